//! Basis expansion of discretized curves.
//!
//! Curves live in the span of `K` orthonormal Fourier functions on `[0, 1]`:
//! `B_1 = 1`, `B_2 = √2 sin(2πu)`, `B_3 = √2 cos(2πu)`, `B_4 = √2 sin(4πu)`, ...
//! A curve is carried around as its coefficient vector, and inner products go
//! through the Gram matrix of the basis so that the rest of the pipeline does
//! not assume orthonormality.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Fourier,
}

/// A finite basis together with its Gram matrix `M_B = (<B_q, B_r>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDescriptor {
    kind: BasisKind,
    gram: DMatrix<f64>,
}

impl BasisDescriptor {
    /// Orthonormal Fourier basis with `nbasis` functions; the Gram matrix is
    /// the identity.
    pub fn fourier(nbasis: usize) -> Result<Self> {
        if nbasis == 0 {
            return Err(Error::InvalidArgument("number of basis functions must be positive".into()));
        }
        Ok(Self { kind: BasisKind::Fourier, gram: DMatrix::identity(nbasis, nbasis) })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn nbasis(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Evaluates the basis functions on `grid` (one row per point).
    pub fn eval(&self, grid: &[f64]) -> Result<DMatrix<f64>> {
        match self.kind {
            BasisKind::Fourier => fourier_basis_eval(self.nbasis(), grid),
        }
    }

    /// Squared L² norm of the function with coefficients `c`.
    pub fn norm_sq(&self, c: &[f64]) -> f64 {
        gram_form(&self.gram, c, c)
    }
}

/// `g' M f` without allocating.
pub(crate) fn gram_form(gram: &DMatrix<f64>, f: &[f64], g: &[f64]) -> f64 {
    let k = gram.nrows();
    let mut acc = 0.0;
    for r in 0..k {
        let mut row = 0.0;
        for q in 0..k {
            row += gram[(r, q)] * f[q];
        }
        acc += g[r] * row;
    }
    acc
}

/// Evaluates the first `nbasis` orthonormal Fourier functions on `grid`.
pub fn fourier_basis_eval(nbasis: usize, grid: &[f64]) -> Result<DMatrix<f64>> {
    if nbasis == 0 {
        return Err(Error::InvalidArgument("number of basis functions must be positive".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("evaluation grid is empty".into()));
    }
    if let Some(u) = grid.iter().find(|u| !(0.0..=1.0).contains(*u)) {
        return Err(Error::InvalidArgument(format!("grid point {u} lies outside [0, 1]")));
    }
    Ok(DMatrix::from_fn(grid.len(), nbasis, |i, j| {
        let u = grid[i];
        if j == 0 {
            return 1.0;
        }
        let freq = j.div_ceil(2) as f64;
        let arg = 2.0 * PI * freq * u;
        if j % 2 == 1 {
            SQRT_2 * arg.sin()
        } else {
            SQRT_2 * arg.cos()
        }
    }))
}

/// `count` equispaced points covering `[0, 1]` including both ends.
pub fn equispaced_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}

/// A series of `n` functional observations stored as basis coefficients.
///
/// Row `s` (0-based) holds the coefficients of observation `t = s + 1`, whose
/// phase is `s mod period`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSeries {
    coeffs: DMatrix<f64>,
    basis: BasisDescriptor,
    period: usize,
}

impl FunctionalSeries {
    pub fn new(coeffs: DMatrix<f64>, basis: BasisDescriptor, period: usize) -> Result<Self> {
        if coeffs.nrows() == 0 {
            return Err(Error::InvalidArgument("a series needs at least one observation".into()));
        }
        if period == 0 {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        if coeffs.ncols() != basis.nbasis() {
            return Err(Error::shape("coefficient columns vs basis size", basis.nbasis(), coeffs.ncols()));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self { coeffs, basis, period })
    }

    /// Coefficient rows in the orthonormal Fourier basis.
    pub fn from_fourier_coeffs(coeffs: DMatrix<f64>, period: usize) -> Result<Self> {
        let basis = BasisDescriptor::fourier(coeffs.ncols())?;
        Self::new(coeffs, basis, period)
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    pub fn nbasis(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Phase of the observation stored in row `row`.
    pub fn phase(&self, row: usize) -> usize {
        row % self.period
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.coeffs.row(row).iter().copied().collect()
    }

    pub fn with_period(mut self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        self.period = period;
        Ok(self)
    }

    /// Contiguous block of rows `[start, end)`. Phases are relabeled so the
    /// first selected row has phase 0.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "row range {start}..{end} is empty or exceeds {} observations",
                self.len()
            )));
        }
        let coeffs = self.coeffs.rows(start, end - start).into_owned();
        Ok(Self { coeffs, basis: self.basis.clone(), period: self.period })
    }

    /// Evaluates every curve on `grid` (n × G).
    pub fn eval(&self, grid: &[f64]) -> Result<DMatrix<f64>> {
        let b = self.basis.eval(grid)?;
        Ok(&self.coeffs * b.transpose())
    }

    pub(crate) fn check_same_basis(&self, basis: &BasisDescriptor) -> Result<()> {
        if self.basis.nbasis() != basis.nbasis() {
            return Err(Error::shape("basis size", basis.nbasis(), self.basis.nbasis()));
        }
        if self.basis.kind() != basis.kind() || self.basis.gram() != basis.gram() {
            return Err(Error::InvalidArgument("series and model use different bases".into()));
        }
        Ok(())
    }
}

/// Least-squares projection of discretized curves onto `nbasis` Fourier
/// functions. `raw` holds one curve per row, sampled on `grid`.
pub fn smooth_curves(raw: &DMatrix<f64>, grid: &[f64], nbasis: usize) -> Result<FunctionalSeries> {
    if nbasis == 0 {
        return Err(Error::InvalidArgument("number of basis functions must be positive".into()));
    }
    if raw.ncols() != grid.len() {
        return Err(Error::shape("curve samples vs grid points", grid.len(), raw.ncols()));
    }
    if grid.len() < nbasis {
        return Err(Error::UnderdeterminedFit { points: grid.len(), nbasis });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("curve samples must be finite".into()));
    }
    let design = fourier_basis_eval(nbasis, grid)?;
    let qr = design.qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.diagonal().iter().any(|v| v.abs() <= 1e-12 * scale.max(1.0)) {
        return Err(Error::NumericalFailure("basis design matrix is rank deficient on this grid".into()));
    }
    let rhs = qr.q().transpose() * raw.transpose();
    let coeffs =
        r.solve_upper_triangular(&rhs).ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    FunctionalSeries::new(coeffs.transpose(), BasisDescriptor::fourier(nbasis)?, 1)
}

/// Phase-wise sample means `μ̂_0, ..., μ̂_{T-1}` (one row per phase).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMean {
    means: DMatrix<f64>,
}

impl PeriodicMean {
    pub fn new(means: DMatrix<f64>) -> Result<Self> {
        if means.nrows() == 0 || means.ncols() == 0 {
            return Err(Error::InvalidArgument("periodic mean must be non-empty".into()));
        }
        Ok(Self { means })
    }

    pub fn period(&self) -> usize {
        self.means.nrows()
    }

    pub fn means(&self) -> &DMatrix<f64> {
        &self.means
    }

    pub fn phase_mean(&self, phase: usize) -> Vec<f64> {
        self.means.row(phase % self.period()).iter().copied().collect()
    }

    /// Subtracts the phase-matched mean from every row.
    pub fn center(&self, series: &FunctionalSeries) -> Result<FunctionalSeries> {
        self.shift(series, -1.0)
    }

    /// Adds the phase-matched mean to every row.
    pub fn restore(&self, series: &FunctionalSeries) -> Result<FunctionalSeries> {
        self.shift(series, 1.0)
    }

    fn shift(&self, series: &FunctionalSeries, sign: f64) -> Result<FunctionalSeries> {
        if series.nbasis() != self.means.ncols() {
            return Err(Error::shape("mean width vs basis size", self.means.ncols(), series.nbasis()));
        }
        let period = self.period();
        let coeffs = DMatrix::from_fn(series.len(), series.nbasis(), |s, k| {
            series.coeffs[(s, k)] + sign * self.means[(s % period, k)]
        });
        Ok(FunctionalSeries { coeffs, basis: series.basis.clone(), period: series.period })
    }
}

/// Estimates the `period`-periodic mean by phase-wise averaging.
pub fn periodic_mean(series: &FunctionalSeries, period: usize) -> Result<PeriodicMean> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if series.len() < period {
        return Err(Error::InsufficientData(format!(
            "{} observations cannot cover a period of {period}",
            series.len()
        )));
    }
    let k = series.nbasis();
    let mut sums = DMatrix::zeros(period, k);
    let mut counts = vec![0usize; period];
    for s in 0..series.len() {
        let d = s % period;
        counts[d] += 1;
        for j in 0..k {
            sums[(d, j)] += series.coeffs[(s, j)];
        }
    }
    for (d, &count) in counts.iter().enumerate() {
        for j in 0..k {
            sums[(d, j)] /= count as f64;
        }
    }
    PeriodicMean::new(sums)
}

/// Convenience wrapper: `periodic_mean` followed by centering.
pub fn center(series: &FunctionalSeries, mean: &PeriodicMean) -> Result<FunctionalSeries> {
    mean.center(series)
}

/// L² inner product `<f, g> = g' M_B f` of two coefficient vectors.
pub fn inner_product(f: &[f64], g: &[f64], basis: &BasisDescriptor) -> Result<f64> {
    let k = basis.nbasis();
    if f.len() != k || g.len() != k {
        return Err(Error::shape("coefficient vector length", k, format!("{} and {}", f.len(), g.len())));
    }
    Ok(gram_form(basis.gram(), f, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(values: &[f64], grid: &[f64]) -> f64 {
        grid.windows(2).zip(values.windows(2)).map(|(u, v)| 0.5 * (u[1] - u[0]) * (v[0] + v[1])).sum()
    }

    #[test]
    fn constant_basis_is_ones() {
        let b = fourier_basis_eval(1, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(b.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn sine_at_quarter() {
        let b = fourier_basis_eval(2, &[0.25]).unwrap();
        assert_eq!(b[(0, 0)], 1.0);
        assert!((b[(0, 1)] - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(fourier_basis_eval(0, &[0.5]), Err(Error::InvalidArgument(_))));
        assert!(matches!(fourier_basis_eval(3, &[1.5]), Err(Error::InvalidArgument(_))));
        assert!(matches!(fourier_basis_eval(3, &[-0.1]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn columns_orthonormal_under_quadrature() {
        let grid = equispaced_grid(1001);
        let b = fourier_basis_eval(5, &grid).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let prod: Vec<f64> = (0..grid.len()).map(|g| b[(g, i)] * b[(g, j)]).collect();
                let integral = trapezoid(&prod, &grid);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((integral - expected).abs() < 1e-6, "({i},{j}) -> {integral}");
            }
        }
    }

    #[test]
    fn smoothing_recovers_constant_and_sine() {
        let grid = equispaced_grid(49);
        let raw =
            DMatrix::from_fn(2, grid.len(), |i, g| if i == 0 { 3.0 } else { SQRT_2 * (2.0 * PI * grid[g]).sin() });
        let series = smooth_curves(&raw, &grid, 5).unwrap();
        assert!((series.coeffs()[(0, 0)] - 3.0).abs() < 1e-12);
        for k in 1..5 {
            assert!(series.coeffs()[(0, k)].abs() < 1e-10);
        }
        assert!((series.coeffs()[(1, 1)] - 1.0).abs() < 1e-10);
        for k in [0, 2, 3, 4] {
            assert!(series.coeffs()[(1, k)].abs() < 1e-10);
        }
        assert_eq!(series.basis().gram(), &DMatrix::<f64>::identity(5, 5));
    }

    #[test]
    fn more_basis_functions_fit_a_parabola_better() {
        let grid = equispaced_grid(49);
        let raw = DMatrix::from_fn(1, grid.len(), |_, g| grid[g] * grid[g]);
        let rss = |k: usize| {
            let fitted = smooth_curves(&raw, &grid, k).unwrap().eval(&grid).unwrap();
            (&raw - fitted).iter().map(|v| v * v).sum::<f64>()
        };
        assert!(rss(15) < rss(5));
    }

    #[test]
    fn smoothing_is_idempotent() {
        let grid = equispaced_grid(37);
        let raw = DMatrix::from_fn(3, grid.len(), |i, g| ((i + 1) as f64 * grid[g]).exp() - grid[g].powi(3));
        let once = smooth_curves(&raw, &grid, 7).unwrap();
        let twice = smooth_curves(&once.eval(&grid).unwrap(), &grid, 7).unwrap();
        let diff = (once.coeffs() - twice.coeffs()).amax();
        assert!(diff < 1e-10, "{diff}");
    }

    #[test]
    fn smoothing_errors() {
        let grid = equispaced_grid(4);
        let raw = DMatrix::zeros(1, 4);
        assert!(matches!(smooth_curves(&raw, &grid, 5), Err(Error::UnderdeterminedFit { points: 4, nbasis: 5 })));
        // sin(2πu) vanishes on {0, 1/2, 1}
        let grid = [0.0, 0.5, 1.0];
        let raw = DMatrix::zeros(1, 3);
        assert!(matches!(smooth_curves(&raw, &grid, 2), Err(Error::NumericalFailure(_))));
        let grid = [0.0, 0.6, 0.5];
        assert!(matches!(smooth_curves(&raw, &grid, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn periodic_mean_cases() {
        let zero = FunctionalSeries::from_fourier_coeffs(DMatrix::zeros(6, 3), 1).unwrap();
        assert_eq!(periodic_mean(&zero, 2).unwrap().means(), &DMatrix::zeros(2, 3));

        let data = DMatrix::from_fn(5, 2, |s, k| (s * 2 + k) as f64);
        let series = FunctionalSeries::from_fourier_coeffs(data.clone(), 1).unwrap();
        let grand = periodic_mean(&series, 1).unwrap();
        for k in 0..2 {
            let avg = data.column(k).sum() / 5.0;
            assert!((grand.means()[(0, k)] - avg).abs() < 1e-15);
        }

        // t = 1, 2, 3, ... (1-based): odd t carries 2, even t carries 1.
        let data = DMatrix::from_fn(8, 3, |s, k| {
            let t = s + 1;
            if k != 0 {
                0.0
            } else if t % 2 == 0 {
                1.0
            } else {
                2.0
            }
        });
        let series = FunctionalSeries::from_fourier_coeffs(data, 2).unwrap();
        let mean = periodic_mean(&series, 2).unwrap();
        assert_eq!(mean.phase_mean(0), vec![2.0, 0.0, 0.0]);
        assert_eq!(mean.phase_mean(1), vec![1.0, 0.0, 0.0]);

        assert!(matches!(periodic_mean(&series, 9), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn centering_zeroes_phase_means() {
        let data = DMatrix::from_fn(23, 4, |s, k| ((s * 7 + k * 3) % 11) as f64 * 0.37 + s as f64);
        let series = FunctionalSeries::from_fourier_coeffs(data, 3).unwrap();
        let mean = periodic_mean(&series, 3).unwrap();
        let centered = center(&series, &mean).unwrap();
        let again = periodic_mean(&centered, 3).unwrap();
        assert!(again.means().amax() < 1e-12);
        let restored = mean.restore(&centered).unwrap();
        assert!((restored.coeffs() - series.coeffs()).amax() < 1e-12);
    }

    #[test]
    fn inner_product_basics() {
        let basis = BasisDescriptor::fourier(3).unwrap();
        assert_eq!(inner_product(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &basis).unwrap(), 1.0);
        assert_eq!(inner_product(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &basis).unwrap(), 0.0);
        assert!(matches!(inner_product(&[1.0, 0.0], &[1.0, 0.0, 0.0], &basis), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn inner_product_matches_quadrature() {
        let basis = BasisDescriptor::fourier(4).unwrap();
        let f = [0.3, -1.2, 0.7, 2.1];
        let g = [-0.4, 0.9, 1.5, -0.2];
        let grid = equispaced_grid(2001);
        let b = basis.eval(&grid).unwrap();
        let fv = &b * nalgebra::DVector::from_column_slice(&f);
        let gv = &b * nalgebra::DVector::from_column_slice(&g);
        let prod: Vec<f64> = fv.iter().zip(gv.iter()).map(|(a, b)| a * b).collect();
        let quad = trapezoid(&prod, &grid);
        assert!((inner_product(&f, &g, &basis).unwrap() - quad).abs() < 1e-6);
    }
}
