//! JSON model documents.
//!
//! Filters are stored under keys `"d/m/l"`: phase `d` (0-based), component
//! `m` (1-based) and lag `l`. Floats are written in shortest round-trip form,
//! so a loaded model reproduces scores bit for bit.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::PcDfpcaModel;
use crate::basis::{BasisDescriptor, BasisKind, PeriodicMean};
use crate::error::{Error, Result};
use crate::numerics::FrequencyGrid;
use crate::spectral::Kernel;

pub const MODEL_FORMAT: &str = "pcdfpca-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisDocument {
    kind: BasisKind,
    nbasis: usize,
    gram: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    version: u32,
    period: usize,
    ncomp: usize,
    lag: usize,
    nbasis: usize,
    window: usize,
    freqs: usize,
    kernel: Kernel,
    epsilon: Option<f64>,
    basis: BasisDocument,
    periodic_mean: Vec<Vec<f64>>,
    eigenvalues: Vec<Vec<f64>>,
    filters: BTreeMap<String, Vec<f64>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ModelFormat(format!("{what} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn filter_key(phase: usize, component: usize, lag: i64) -> String {
    format!("{phase}/{}/{lag}", component + 1)
}

impl PcDfpcaModel {
    pub fn to_json(&self) -> Result<String> {
        let mut filters = BTreeMap::new();
        for d in 0..self.period {
            for m in 0..self.ncomp {
                for l in self.lag_range(d) {
                    let phi = self.filter(d, m, l).expect("stored lag");
                    filters.insert(filter_key(d, m, l), phi.to_vec());
                }
            }
        }
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            period: self.period,
            ncomp: self.ncomp,
            lag: self.lag,
            nbasis: self.nbasis(),
            window: self.window,
            freqs: self.freqs,
            kernel: self.kernel,
            epsilon: self.epsilon,
            basis: BasisDocument { kind: self.basis.kind(), nbasis: self.nbasis(), gram: rows_of(self.basis.gram()) },
            periodic_mean: rows_of(self.mean.means()),
            eigenvalues: self.eigenvalues.clone(),
            filters,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses and validates a model document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!("unexpected format tag '{}'", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {}", doc.version)));
        }
        let (t, p, k) = (doc.period, doc.ncomp, doc.nbasis);
        if t == 0 || k == 0 || p == 0 || p > k {
            return Err(Error::ModelFormat(format!("inconsistent dimensions: period {t}, ncomp {p}, nbasis {k}")));
        }
        if doc.window == 0 {
            return Err(Error::ModelFormat("window must be positive".into()));
        }
        FrequencyGrid::new(doc.freqs).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if let Some(eps) = doc.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::ModelFormat(format!("epsilon {eps} outside (0, 1)")));
            }
        }
        if doc.basis.nbasis != k {
            return Err(Error::ModelFormat("basis size disagrees with nbasis".into()));
        }
        let basis = match doc.basis.kind {
            BasisKind::Fourier => BasisDescriptor::fourier(k)?,
        };
        let gram = matrix_from_rows(&doc.basis.gram, k, k, "gram")?;
        if &gram != basis.gram() {
            return Err(Error::ModelFormat("gram matrix does not match the basis".into()));
        }
        let mean = PeriodicMean::new(matrix_from_rows(&doc.periodic_mean, t, k, "periodic_mean")?)?;

        let dim = t.checked_mul(k).ok_or_else(|| Error::ModelFormat("dimension overflow".into()))?;
        if doc.eigenvalues.len() != doc.freqs || doc.eigenvalues.iter().any(|r| r.len() != dim) {
            return Err(Error::ModelFormat(format!("eigenvalues must be {}x{dim}", doc.freqs)));
        }

        let per_filter = doc
            .lag
            .checked_mul(2)
            .and_then(|v| v.checked_add(1))
            .and_then(|v| v.checked_mul(t))
            .ok_or_else(|| Error::ModelFormat("lag overflow".into()))?;
        let expected = per_filter
            .checked_mul(t)
            .and_then(|v| v.checked_mul(p))
            .ok_or_else(|| Error::ModelFormat("filter count overflow".into()))?;
        if doc.filters.len() != expected {
            return Err(Error::ModelFormat(format!("expected {expected} filter entries, found {}", doc.filters.len())));
        }
        if i64::try_from(per_filter).is_err() {
            return Err(Error::ModelFormat("lag overflow".into()));
        }

        let mut model = PcDfpcaModel {
            period: t,
            ncomp: p,
            lag: doc.lag,
            window: doc.window,
            kernel: doc.kernel,
            freqs: doc.freqs,
            epsilon: doc.epsilon,
            basis,
            mean,
            eigenvalues: doc.eigenvalues,
            filters: Vec::with_capacity(expected),
        };
        let mut filters = doc.filters;
        for d in 0..t {
            for m in 0..p {
                for l in model.lag_range(d) {
                    let key = filter_key(d, m, l);
                    let phi =
                        filters.remove(&key).ok_or_else(|| Error::ModelFormat(format!("missing filter '{key}'")))?;
                    if phi.len() != k {
                        return Err(Error::ModelFormat(format!(
                            "filter '{key}' has {} coefficients, expected {k}",
                            phi.len()
                        )));
                    }
                    model.filters.push(phi);
                }
            }
        }
        Ok(model)
    }
}
