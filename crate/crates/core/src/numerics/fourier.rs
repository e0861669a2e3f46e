use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Midpoint discretization of `(-π, π]`:
/// `θ_j = -π + 2π(j + 1/2)/F`, `j = 0, ..., F-1`.
///
/// The upper half is stored as the exact negation of the lower half so that
/// `θ_{F-1-j} = -θ_j` holds bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub const DEFAULT_SIZE: usize = 512;

    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "frequency grid size must be a positive even integer, got {size}"
            )));
        }
        let half = size / 2;
        let mut points = vec![0.0; size];
        for j in 0..half {
            points[j] = -PI + 2.0 * PI * (j as f64 + 0.5) / size as f64;
        }
        for j in half..size {
            points[j] = -points[size - 1 - j];
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of `-θ_j`.
    pub fn mirror(&self, j: usize) -> usize {
        self.len() - 1 - j
    }

    /// Indices of the strictly positive frequencies.
    pub fn positive_indices(&self) -> RangeInclusive<usize> {
        self.len() / 2..=self.len() - 1
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_SIZE).expect("default grid size is even")
    }
}

/// Midpoint-rule approximation of `(1/2π) ∫ s(θ) e^{-ilθ} dθ`, i.e.
/// `(1/F) Σ_j s(θ_j) e^{-ilθ_j}`, for every `l` in `lags`.
pub fn inverse_fourier_coeffs(
    samples: &[DVector<Complex64>],
    grid: &FrequencyGrid,
    lags: RangeInclusive<i64>,
) -> Result<BTreeMap<i64, DVector<Complex64>>> {
    if samples.len() != grid.len() {
        return Err(Error::shape("samples vs frequency grid", grid.len(), samples.len()));
    }
    let dim = samples.first().map_or(0, |s| s.len());
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::shape("sample vector length", dim, bad.len()));
    }
    let scale = 1.0 / grid.len() as f64;
    let mut out = BTreeMap::new();
    for l in lags {
        let mut acc = DVector::<Complex64>::zeros(dim);
        for (sample, &theta) in samples.iter().zip(grid.points()) {
            let arg = -(l as f64) * theta;
            let phase = Complex64::new(arg.cos(), arg.sin());
            for (a, s) in acc.iter_mut().zip(sample.iter()) {
                *a += s * phase;
            }
        }
        acc.scale_mut(scale);
        out.insert(l, acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cvec(values: &[(f64, f64)]) -> DVector<Complex64> {
        DVector::from_iterator(values.len(), values.iter().map(|&(re, im)| Complex64::new(re, im)))
    }

    #[test]
    fn grid_layout() {
        let grid = FrequencyGrid::new(8).unwrap();
        assert_eq!(grid.len(), 8);
        for j in 0..8 {
            assert_eq!(grid.points()[grid.mirror(j)], -grid.points()[j]);
            assert!(grid.points()[j] > -PI && grid.points()[j] <= PI);
        }
        assert!((grid.points()[0] - (-PI + PI / 8.0)).abs() < 1e-15);
        assert!(grid.points()[*grid.positive_indices().start()] > 0.0);
        assert!(FrequencyGrid::new(7).is_err());
        assert!(FrequencyGrid::new(0).is_err());
    }

    #[test]
    fn constant_spectrum_maps_to_lag_zero() {
        let grid = FrequencyGrid::new(64).unwrap();
        let v = cvec(&[(1.5, -0.5), (0.25, 2.0)]);
        let samples = vec![v.clone(); 64];
        let coeffs = inverse_fourier_coeffs(&samples, &grid, -31..=31).unwrap();
        assert!((&coeffs[&0] - &v).norm() < 1e-12);
        for l in (-31..=31).filter(|&l| l != 0) {
            assert!(coeffs[&l].norm() <= 1e-10, "lag {l}");
        }
    }

    #[test]
    fn single_exponential_maps_to_its_lag() {
        let grid = FrequencyGrid::new(32).unwrap();
        let v = cvec(&[(0.3, 0.1), (-1.0, 0.0), (0.0, 2.0)]);
        let samples: Vec<_> = grid.points().iter().map(|&t| &v * Complex64::new(t.cos(), t.sin())).collect();
        let coeffs = inverse_fourier_coeffs(&samples, &grid, -10..=10).unwrap();
        assert!((&coeffs[&1] - &v).norm() < 1e-12);
        for l in (-10..=10).filter(|&l| l != 1) {
            assert!(coeffs[&l].norm() <= 1e-10);
        }
    }

    #[test]
    fn hermitian_symmetric_input_gives_real_coefficients() {
        let grid = FrequencyGrid::new(40).unwrap();
        let samples: Vec<_> = grid
            .points()
            .iter()
            .map(|&t| cvec(&[(t.cos() + 0.5 * (3.0 * t).cos(), t.sin() - 0.2 * (2.0 * t).sin()), (t * t, t.powi(3))]))
            .collect();
        let coeffs = inverse_fourier_coeffs(&samples, &grid, -15..=15).unwrap();
        for c in coeffs.values() {
            for z in c.iter() {
                assert!(z.im.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let grid = FrequencyGrid::new(4).unwrap();
        let samples = vec![cvec(&[(1.0, 0.0)]); 3];
        assert!(matches!(inverse_fourier_coeffs(&samples, &grid, 0..=0), Err(Error::ShapeMismatch { .. })));
    }

    proptest! {
        #[test]
        fn exact_on_trigonometric_polynomials(
            coeffs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 11),
            size_half in 12usize..40,
        ) {
            // degree 5 polynomial, lags up to 5: exact when 5 < F/2 - 5
            let size = 2 * size_half;
            let grid = FrequencyGrid::new(size).unwrap();
            let samples: Vec<_> = grid.points().iter().map(|&t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, &(re, im)) in coeffs.iter().enumerate() {
                    let k = idx as f64 - 5.0;
                    acc += Complex64::new(re, im) * Complex64::new((k * t).cos(), (k * t).sin());
                }
                DVector::from_element(1, acc)
            }).collect();
            let out = inverse_fourier_coeffs(&samples, &grid, -5..=5).unwrap();
            for (idx, &(re, im)) in coeffs.iter().enumerate() {
                let l = idx as i64 - 5;
                prop_assert!((out[&l][0] - Complex64::new(re, im)).norm() <= 1e-10);
            }
        }
    }
}
