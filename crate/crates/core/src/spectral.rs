//! Periodic lag covariances and the phase-block spectral density matrix.
//!
//! For a `T`-periodic series of coefficient vectors the covariance block
//! between phases `q` and `r` at period lag `h ≥ 0` is estimated by
//!
//! ```text
//! Ĉ_{h,(q,r)} = (T/n) Σ_j c_{q+Tj} c'_{r+Tj-Th}
//! ```
//!
//! over the indices where both observations exist, and
//! `Ĉ_{-h,(q,r)} = Ĉ_{h,(r,q)}'`. The spectral density matrix at `θ` is the
//! `T × T` block matrix of `(1/2π) Σ_{|h|≤q_n} w(h/q_n) Ĉ_{h,(q,r)} e^{-ihθ}`,
//! right-multiplied by `blockdiag(M_B')`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::FunctionalSeries;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, Complex64, FrequencyGrid, HermitianMatrix};

/// Lag-window kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `w(x) = 1 - |x|` on `[-1, 1]`.
    Bartlett,
}

impl Kernel {
    pub fn weight(self, x: f64) -> f64 {
        match self {
            Kernel::Bartlett => (1.0 - x.abs()).max(0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Bartlett => "bartlett",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bartlett" => Ok(Kernel::Bartlett),
            other => Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Estimated covariance blocks `Ĉ_{h,(q,r)}` for `|h| ≤ max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCovariance {
    period: usize,
    nbasis: usize,
    max_lag: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl PeriodicCovariance {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn nbasis(&self) -> usize {
        self.nbasis
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// `Ĉ_{h,(q,r)}`, or `None` when `h` or a phase is out of range.
    pub fn block(&self, h: i64, q: usize, r: usize) -> Option<&DMatrix<f64>> {
        if h.unsigned_abs() as usize > self.max_lag || q >= self.period || r >= self.period {
            return None;
        }
        let idx = ((h + self.max_lag as i64) as usize * self.period + q) * self.period + r;
        self.blocks.get(idx)
    }

    /// The `TK × TK` matrix whose `(q, r)` block is `Ĉ_{h,(q,r)}`.
    pub fn assemble(&self, h: i64) -> Option<DMatrix<f64>> {
        let (t, k) = (self.period, self.nbasis);
        let mut out = DMatrix::zeros(t * k, t * k);
        for q in 0..t {
            for r in 0..t {
                out.view_mut((q * k, r * k), (k, k)).copy_from(self.block(h, q, r)?);
            }
        }
        Some(out)
    }
}

/// A single block `Ĉ_{h,(q,r)}` for `h ≥ 0`; zero when no index pair exists.
pub fn lag_covariance_block(
    series: &FunctionalSeries,
    period: usize,
    h: usize,
    q: usize,
    r: usize,
) -> Result<DMatrix<f64>> {
    if period == 0 || q >= period || r >= period {
        return Err(Error::InvalidArgument(format!("phases ({q}, {r}) invalid for period {period}")));
    }
    let n = series.len();
    let k = series.nbasis();
    let c = series.coeffs();
    let mut acc = DMatrix::zeros(k, k);
    // s = q + Tj, s' = r + Tj - Th (0-based rows).
    let mut s = q;
    while s < n {
        let partner = (s + r) as i64 - (q + period * h) as i64;
        if partner >= 0 && (partner as usize) < n {
            let p = partner as usize;
            for a in 0..k {
                for b in 0..k {
                    acc[(a, b)] += c[(s, a)] * c[(p, b)];
                }
            }
        }
        s += period;
    }
    Ok(acc * (period as f64 / n as f64))
}

/// Estimates all covariance blocks with `|h| ≤ max_lag` from a centered
/// series.
pub fn periodic_autocov(series: &FunctionalSeries, period: usize, max_lag: usize) -> Result<PeriodicCovariance> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if max_lag * period >= series.len() {
        return Err(Error::InsufficientData(format!(
            "lag {max_lag} at period {period} needs more than {} observations",
            series.len()
        )));
    }
    let k = series.nbasis();
    let per_lag = period * period;
    let mut positive = Vec::with_capacity((max_lag + 1) * per_lag);
    for h in 0..=max_lag {
        for q in 0..period {
            for r in 0..period {
                positive.push(lag_covariance_block(series, period, h, q, r)?);
            }
        }
    }
    let mut blocks = vec![DMatrix::zeros(k, k); (2 * max_lag + 1) * per_lag];
    for h in 0..=max_lag {
        for q in 0..period {
            for r in 0..period {
                let src = &positive[(h * period + q) * period + r];
                blocks[((max_lag + h) * period + q) * period + r] = src.clone();
                if h > 0 {
                    // Ĉ_{-h,(r,q)} = Ĉ_{h,(q,r)}'
                    blocks[((max_lag - h) * period + r) * period + q] = src.transpose();
                }
            }
        }
    }
    Ok(PeriodicCovariance { period, nbasis: k, max_lag, blocks })
}

/// Lag-window estimate of the `TK × TK` spectral density matrix on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityEstimate {
    grid: FrequencyGrid,
    matrices: Vec<HermitianMatrix>,
    period: usize,
    nbasis: usize,
    window: usize,
    kernel: Kernel,
}

impl SpectralDensityEstimate {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.matrices
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn nbasis(&self) -> usize {
        self.nbasis
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// Eigenvalue curves `λ̂_{θ,m}` over the whole grid.
    pub fn eigenvalue_curves(&self) -> Result<EigenvalueCurves> {
        let values = self
            .matrices
            .par_iter()
            .map(|m| hermitian_eig(m).map(|e| e.values().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(EigenvalueCurves::from_grid(&self.grid, &values))
    }
}

/// Spectral density estimate from a centered series, with lag window
/// `window` (`q_n`).
pub fn spectral_density(
    series: &FunctionalSeries,
    period: usize,
    window: usize,
    kernel: Kernel,
    grid: &FrequencyGrid,
) -> Result<SpectralDensityEstimate> {
    if window == 0 {
        return Err(Error::InvalidArgument("lag window must be positive".into()));
    }
    let cov = periodic_autocov(series, period, window)?;
    let k = series.nbasis();
    let dim = period * k;

    let mut right = DMatrix::zeros(dim, dim);
    let gram_t = series.basis().gram().transpose();
    for d in 0..period {
        right.view_mut((d * k, d * k), (k, k)).copy_from(&gram_t);
    }

    let q = window as i64;
    let lagged: Vec<(i64, DMatrix<f64>)> = (-q..=q)
        .filter_map(|h| {
            let w = kernel.weight(h as f64 / window as f64);
            (w != 0.0).then(|| (h, cov.assemble(h).expect("lag within window") * (w / (2.0 * PI))))
        })
        .collect();

    let matrices = grid
        .points()
        .par_iter()
        .map(|&theta| {
            let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
            for (h, m) in &lagged {
                let arg = -(*h as f64) * theta;
                let phase = Complex64::new(arg.cos(), arg.sin());
                acc.zip_apply(m, |a, b| *a += phase * b);
            }
            let weighted = acc * right.map(|v| Complex64::new(v, 0.0));
            HermitianMatrix::new(weighted)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SpectralDensityEstimate { grid: grid.clone(), matrices, period, nbasis: k, window, kernel })
}

/// One point of an eigenvalue curve; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvaluePoint {
    pub frequency: f64,
    pub index: usize,
    pub value: f64,
}

/// Flat list of `(frequency, index, value)` triples, serialized as JSON for
/// diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueCurves {
    pub points: Vec<EigenvaluePoint>,
}

impl EigenvalueCurves {
    pub fn from_grid(grid: &FrequencyGrid, values: &[Vec<f64>]) -> Self {
        let points = grid
            .points()
            .iter()
            .zip(values)
            .flat_map(|(&frequency, vals)| {
                vals.iter().enumerate().map(move |(m, &value)| EigenvaluePoint { frequency, index: m + 1, value })
            })
            .collect();
        Self { points }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
