//! Periodically correlated dynamic FPCA: fitting, scores and reconstruction.
//!
//! A fitted model holds, for every phase `d`, component `m` and lag `l`, a
//! real filter coefficient function `Φ^d_{l,m}` (as basis coefficients).
//! Component `m` at phase `d` is driven by the `(dp+m)`-th eigenvector of the
//! phase-block spectral density matrix; its inverse Fourier coefficient at
//! lag `l` is split into the `T` blocks `Φ^d_{lT+d}, ..., Φ^d_{lT+d-T+1}`.

mod fpca;
mod io;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::{gram_form, periodic_mean, BasisDescriptor, FunctionalSeries, PeriodicMean};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, inverse_fourier_coeffs, Complex64, FrequencyGrid};
use crate::spectral::{spectral_density, EigenvalueCurves, Kernel};

pub use fpca::{fpca_fit, fpca_reconstruct, StaticFpca};
pub use io::MODEL_FORMAT;

/// Default energy threshold for [`Truncation::Energy`].
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Imaginary residue tolerated in inverse-transformed filters.
const REALNESS_TOLERANCE: f64 = 1e-8;

/// Orientation falls back to the largest entry below this overlap.
const ORIENTATION_FLOOR: f64 = 1e-8;

/// How many lags the filters keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep `l = -L, ..., L` (in period units).
    Fixed(usize),
    /// Smallest `L` whose filters capture at least `1 - ε` of the energy of
    /// the first component at phase 0.
    Energy(f64),
}

impl Truncation {
    /// A fixed lag wins over an energy threshold; with neither, the energy
    /// rule uses [`DEFAULT_EPSILON`].
    pub fn resolve(lag: Option<usize>, epsilon: Option<f64>) -> Result<Self> {
        match (lag, epsilon) {
            (Some(l), _) => Ok(Truncation::Fixed(l)),
            (None, Some(eps)) if eps > 0.0 && eps < 1.0 => Ok(Truncation::Energy(eps)),
            (None, Some(eps)) => Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}"))),
            (None, None) => Ok(Truncation::Energy(DEFAULT_EPSILON)),
        }
    }
}

/// Metaparameters of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Period `T`.
    pub period: usize,
    /// Components per phase `p`.
    pub ncomp: usize,
    /// Lag window `q_n`.
    pub window: usize,
    pub kernel: Kernel,
    pub grid: FrequencyGrid,
    pub truncation: Truncation,
}

impl FitConfig {
    pub fn new(period: usize, ncomp: usize, window: usize, truncation: Truncation) -> Self {
        Self { period, ncomp, window, kernel: Kernel::Bartlett, grid: FrequencyGrid::default(), truncation }
    }

    pub fn with_grid(mut self, grid: FrequencyGrid) -> Self {
        self.grid = grid;
        self
    }
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct PcDfpcaModel {
    period: usize,
    ncomp: usize,
    lag: usize,
    window: usize,
    kernel: Kernel,
    freqs: usize,
    epsilon: Option<f64>,
    basis: BasisDescriptor,
    mean: PeriodicMean,
    /// `F × TK`, one row per grid frequency.
    eigenvalues: Vec<Vec<f64>>,
    /// Indexed by [`PcDfpcaModel::filter_index`].
    filters: Vec<Vec<f64>>,
}

/// Scores `Ŷ_{t,m}`, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    scores: DMatrix<f64>,
    period: usize,
}

impl ScoreSeries {
    pub fn new(scores: DMatrix<f64>, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("scores must be finite".into()));
        }
        Ok(Self { scores, period })
    }

    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn len(&self) -> usize {
        self.scores.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.nrows() == 0
    }

    pub fn ncomp(&self) -> usize {
        self.scores.ncols()
    }

    pub fn phase(&self, row: usize) -> usize {
        row % self.period
    }
}

impl PcDfpcaModel {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    /// Truncation level `L` in period units.
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn freqs(&self) -> usize {
        self.freqs
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn nbasis(&self) -> usize {
        self.basis.nbasis()
    }

    pub fn periodic_mean(&self) -> &PeriodicMean {
        &self.mean
    }

    /// Eigenvalues `λ̂_{θ_j,m}` (row `j`, sorted non-increasing).
    pub fn eigenvalues(&self) -> &[Vec<f64>] {
        &self.eigenvalues
    }

    pub fn eigenvalue_curves(&self) -> Result<EigenvalueCurves> {
        Ok(EigenvalueCurves::from_grid(&FrequencyGrid::new(self.freqs)?, &self.eigenvalues))
    }

    /// Range of lags `l` stored for phase `d`: `[-LT+d-T+1, LT+d]`.
    pub fn lag_range(&self, phase: usize) -> std::ops::RangeInclusive<i64> {
        let (t, l, d) = (self.period as i64, self.lag as i64, phase as i64);
        (-l * t + d - t + 1)..=(l * t + d)
    }

    fn lags_per_filter(&self) -> usize {
        (2 * self.lag + 1) * self.period
    }

    fn filter_index(&self, phase: usize, component: usize, lag: i64) -> Option<usize> {
        if phase >= self.period || component >= self.ncomp {
            return None;
        }
        let range = self.lag_range(phase);
        if !range.contains(&lag) {
            return None;
        }
        let offset = (lag - range.start()) as usize;
        Some((phase * self.ncomp + component) * self.lags_per_filter() + offset)
    }

    /// Coefficients of `Φ^d_{l,m}` for phase `d`, 0-based component `m` and
    /// lag `l`; `None` outside the stored range.
    pub fn filter(&self, phase: usize, component: usize, lag: i64) -> Option<&[f64]> {
        self.filter_index(phase, component, lag).map(|i| self.filters[i].as_slice())
    }

    /// `Σ_l ‖Φ^d_{l,m}‖²` over the stored lags.
    pub fn energy(&self, phase: usize, component: usize) -> f64 {
        self.lag_range(phase).filter_map(|l| self.filter(phase, component, l)).map(|f| self.basis.norm_sq(f)).sum()
    }
}

/// Fits a model to `series` (which need not be centered; the periodic mean is
/// estimated and removed).
pub fn fit(series: &FunctionalSeries, config: &FitConfig) -> Result<PcDfpcaModel> {
    let (t, p, q) = (config.period, config.ncomp, config.window);
    let k = series.nbasis();
    if t == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if p == 0 || p > k {
        return Err(Error::InvalidArgument(format!("number of components must lie in 1..={k}, got {p}")));
    }
    if q == 0 {
        return Err(Error::InvalidArgument("lag window must be positive".into()));
    }
    if series.len() < 2 * t * q.max(2) {
        return Err(Error::InsufficientData(format!(
            "{} observations; at least {} needed for period {t} and window {q}",
            series.len(),
            2 * t * q.max(2)
        )));
    }
    if let Truncation::Energy(eps) = config.truncation {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")));
        }
    }

    let mean = periodic_mean(series, t)?;
    let centered = mean.center(series)?;
    let grid = &config.grid;
    let sde = spectral_density(&centered, t, q, config.kernel, grid)?;

    let dim = t * k;
    let needed = t * p;
    let reference = orientation_reference(series.basis(), t);

    // Eigendecompose the positive half and mirror by conjugation.
    let positive: Vec<usize> = grid.positive_indices().collect();
    let decomposed = positive
        .par_iter()
        .map(|&j| {
            let eig = hermitian_eig(&sde.matrices()[j])?;
            let vectors: Vec<DVector<Complex64>> = (0..needed).map(|m| orient(eig.vector(m), &reference)).collect();
            Ok((eig.values().to_vec(), vectors))
        })
        .collect::<Result<Vec<_>>>()?;

    let f = grid.len();
    let mut eigenvalues = vec![Vec::new(); f];
    let mut vectors: Vec<Vec<DVector<Complex64>>> = vec![Vec::new(); f];
    for (&j, (vals, vecs)) in positive.iter().zip(decomposed) {
        let mirror = grid.mirror(j);
        eigenvalues[mirror] = vals.clone();
        eigenvalues[j] = vals;
        vectors[mirror] = vecs.iter().map(|v| v.map(|z| z.conj())).collect();
        vectors[j] = vecs;
    }

    let samples = |index: usize| -> Vec<DVector<Complex64>> { vectors.iter().map(|v| v[index].clone()).collect() };

    let lag = match config.truncation {
        Truncation::Fixed(l) => l,
        Truncation::Energy(eps) => select_lag(&samples(0), grid, series.basis(), eps)?,
    };

    let lag_i = lag as i64;
    let per_filter = (2 * lag + 1) * t;
    let mut filters = vec![Vec::new(); t * p * per_filter];
    for d in 0..t {
        for m in 0..p {
            let coeffs = inverse_fourier_coeffs(&samples(d * p + m), grid, -lag_i..=lag_i)?;
            let start = -lag_i * t as i64 + d as i64 - t as i64 + 1;
            for (&l, psi) in &coeffs {
                debug_assert_eq!(psi.len(), dim);
                let residue = psi.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
                if residue > REALNESS_TOLERANCE {
                    return Err(Error::NumericalFailure(format!(
                        "filter (phase {d}, component {}, lag {l}) has imaginary residue {residue:.3e}",
                        m + 1
                    )));
                }
                for j in 0..t {
                    let target = l * t as i64 + d as i64 - j as i64;
                    let offset = (target - start) as usize;
                    filters[(d * p + m) * per_filter + offset] = (0..k).map(|i| psi[j * k + i].re).collect();
                }
            }
        }
    }

    Ok(PcDfpcaModel {
        period: t,
        ncomp: p,
        lag,
        window: q,
        kernel: config.kernel,
        freqs: f,
        epsilon: match config.truncation {
            Truncation::Energy(eps) => Some(eps),
            Truncation::Fixed(_) => None,
        },
        basis: series.basis().clone(),
        mean,
        eigenvalues,
        filters,
    })
}

/// Stationary dynamic FPCA: [`fit`] with period 1.
pub fn dfpca_fit(
    series: &FunctionalSeries,
    ncomp: usize,
    window: usize,
    grid: &FrequencyGrid,
    truncation: Truncation,
) -> Result<PcDfpcaModel> {
    let config = FitConfig { period: 1, ncomp, window, kernel: Kernel::Bartlett, grid: grid.clone(), truncation };
    fit(series, &config)
}

/// `ω`: first basis coordinate of every phase block, normalized.
fn orientation_reference(basis: &BasisDescriptor, period: usize) -> DVector<Complex64> {
    let k = basis.nbasis();
    let scale = 1.0 / (period as f64).sqrt();
    // <φ, ω> = Σ_j (M φ_j)[0] / √T, so fold the Gram row into ω.
    let gram_row: Vec<f64> = basis.gram().row(0).iter().copied().collect();
    DVector::from_fn(period * k, |i, _| Complex64::new(gram_row[i % k] * scale, 0.0))
}

/// Rotates the phase of `v` so that `<v, ω>` is positive real, or, when the
/// overlap vanishes, so that its largest entry is positive real.
fn orient(v: DVector<Complex64>, reference: &DVector<Complex64>) -> DVector<Complex64> {
    let overlap: Complex64 = v.iter().zip(reference.iter()).map(|(a, w)| a * w.conj()).sum();
    let anchor = if overlap.norm() >= ORIENTATION_FLOOR {
        overlap
    } else {
        *v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("eigenvector is non-empty")
    };
    if anchor.norm() == 0.0 {
        return v;
    }
    let rotation = anchor.conj() / anchor.norm();
    v.map(|z| z * rotation)
}

/// Smallest `L` with `Σ_{|l|≤L} ‖ψ_l‖² ≥ 1 - ε`, capped at `F/2 - 1`.
fn select_lag(
    samples: &[DVector<Complex64>],
    grid: &FrequencyGrid,
    basis: &BasisDescriptor,
    eps: f64,
) -> Result<usize> {
    let k = basis.nbasis();
    let norm = |psi: &DVector<Complex64>| -> f64 {
        psi.as_slice()
            .chunks(k)
            .map(|block| {
                let re: Vec<f64> = block.iter().map(|z| z.re).collect();
                let im: Vec<f64> = block.iter().map(|z| z.im).collect();
                basis.norm_sq(&re) + basis.norm_sq(&im)
            })
            .sum()
    };
    let max_lag = grid.len() / 2 - 1;
    let mut energy = 0.0;
    for lag in 0..=max_lag as i64 {
        let sides: &[i64] = if lag == 0 { &[0] } else { &[-lag, lag] };
        for &l in sides {
            energy += norm(&inverse_fourier_coeffs(samples, grid, l..=l)?[&l]);
        }
        if energy >= 1.0 - eps {
            return Ok(lag as usize);
        }
    }
    Ok(max_lag)
}

/// Estimated scores `Ŷ_{t,m} = Σ_l <X_{t-l}, Φ^d_{l,m}>` of `series` (raw,
/// uncentered; the model's periodic mean is removed first). Terms whose
/// observation falls outside the series are omitted.
pub fn scores(model: &PcDfpcaModel, series: &FunctionalSeries) -> Result<ScoreSeries> {
    series.check_same_basis(&model.basis)?;
    let centered = model.mean.center(series)?;
    let n = centered.len();
    let (t, p) = (model.period, model.ncomp);
    let gram = model.basis.gram();
    let rows: Vec<Vec<f64>> = (0..n).map(|s| centered.row(s)).collect();

    let mut out = DMatrix::zeros(n, p);
    for s in 0..n {
        let d = s % t;
        for m in 0..p {
            let mut acc = 0.0;
            for lag in model.lag_range(d) {
                let src = s as i64 - lag;
                if src < 0 || src >= n as i64 {
                    continue;
                }
                let phi = model.filter(d, m, lag).expect("lag in range");
                acc += gram_form(gram, &rows[src as usize], phi);
            }
            out[(s, m)] = acc;
        }
    }
    ScoreSeries::new(out, t)
}

/// Reconstructs `n` observations from scores:
/// `X̂_t = μ̂_d + Σ_m Σ_{|l|≤L} Σ_j Ŷ_{t+lT-d+j,m} Φ^j_{lT-d+j,m}` for `t` at
/// phase `d`, with missing scores treated as zero.
pub fn reconstruct(model: &PcDfpcaModel, scores: &ScoreSeries, n: usize) -> Result<FunctionalSeries> {
    if scores.ncomp() != model.ncomp {
        return Err(Error::shape("score columns vs model components", model.ncomp, scores.ncomp()));
    }
    if scores.period() != model.period {
        return Err(Error::shape("score period vs model period", model.period, scores.period()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("cannot reconstruct an empty series".into()));
    }
    let (t, p, k) = (model.period as i64, model.ncomp, model.nbasis());
    let lag = model.lag as i64;
    let available = scores.len() as i64;
    let y = scores.scores();

    let mut out = DMatrix::zeros(n, k);
    for s in 0..n {
        let d = s as i64 % t;
        let mut acc = vec![0.0; k];
        for m in 0..p {
            for l in -lag..=lag {
                for j in 0..t {
                    let src = s as i64 + l * t - d + j;
                    if src < 0 || src >= available {
                        continue;
                    }
                    let score = y[(src as usize, m)];
                    if score == 0.0 {
                        continue;
                    }
                    let phi = model.filter(j as usize, m, l * t - d + j).expect("lag in range");
                    for (a, f) in acc.iter_mut().zip(phi) {
                        *a += score * f;
                    }
                }
            }
        }
        for (i, v) in acc.into_iter().enumerate() {
            out[(s, i)] = v;
        }
    }
    let centered = FunctionalSeries::new(out, model.basis.clone(), model.period)?;
    model.mean.restore(&centered)
}

/// `Σ_t ‖X_t - X̂_t‖² / Σ_t ‖X_t‖²` with norms through the Gram matrix.
pub fn nmse(original: &FunctionalSeries, reconstructed: &FunctionalSeries) -> Result<f64> {
    if original.len() != reconstructed.len() {
        return Err(Error::shape("series length", original.len(), reconstructed.len()));
    }
    reconstructed.check_same_basis(original.basis())?;
    let basis = original.basis();
    let mut num = 0.0;
    let mut den = 0.0;
    for s in 0..original.len() {
        let x = original.row(s);
        let diff: Vec<f64> = x.iter().zip(reconstructed.row(s)).map(|(a, b)| a - b).collect();
        num += basis.norm_sq(&diff);
        den += basis.norm_sq(&x);
    }
    if den == 0.0 {
        return Err(Error::UndefinedDenominator);
    }
    Ok(num / den)
}
