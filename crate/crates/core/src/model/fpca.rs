use nalgebra::DMatrix;

use crate::basis::{gram_form, BasisDescriptor, FunctionalSeries};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, HermitianMatrix};

/// Static functional principal components of the pooled sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticFpca {
    basis: BasisDescriptor,
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// `K × p`, one component per column.
    components: DMatrix<f64>,
}

impl StaticFpca {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// All `K` eigenvalues of the sample covariance operator.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn ncomp(&self) -> usize {
        self.components.ncols()
    }

    /// Scores `<X_t - μ̂, v_m>` (n × p).
    pub fn scores(&self, series: &FunctionalSeries) -> Result<DMatrix<f64>> {
        series.check_same_basis(&self.basis)?;
        let gram = self.basis.gram();
        let p = self.ncomp();
        let mut out = DMatrix::zeros(series.len(), p);
        for s in 0..series.len() {
            let centered: Vec<f64> = series.row(s).iter().zip(&self.mean).map(|(x, m)| x - m).collect();
            for m in 0..p {
                let v: Vec<f64> = self.components.column(m).iter().copied().collect();
                out[(s, m)] = gram_form(gram, &centered, &v);
            }
        }
        Ok(out)
    }
}

/// Eigendecomposition of the sample covariance of the grand-mean-centered
/// coefficient rows, keeping `ncomp` components.
pub fn fpca_fit(series: &FunctionalSeries, ncomp: usize) -> Result<StaticFpca> {
    let k = series.nbasis();
    if ncomp == 0 || ncomp > k {
        return Err(Error::InvalidArgument(format!("number of components must lie in 1..={k}, got {ncomp}")));
    }
    let n = series.len();
    let c = series.coeffs();
    let mean: Vec<f64> = (0..k).map(|j| c.column(j).sum() / n as f64).collect();
    let mut cov = DMatrix::zeros(k, k);
    for s in 0..n {
        for a in 0..k {
            for b in 0..k {
                cov[(a, b)] += (c[(s, a)] - mean[a]) * (c[(s, b)] - mean[b]);
            }
        }
    }
    cov /= n as f64;
    let operator = &cov * series.basis().gram().transpose();
    let eig = hermitian_eig(&HermitianMatrix::from_real(&operator)?)?;
    let mut components = DMatrix::zeros(k, ncomp);
    for m in 0..ncomp {
        let v = eig.vector(m);
        // Real symmetric input keeps the eigenvectors real; fix the sign by
        // the largest entry.
        let pivot = v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).map(|z| z.re).unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..k {
            components[(i, m)] = sign * v[i].re;
        }
    }
    Ok(StaticFpca { basis: series.basis().clone(), mean, eigenvalues: eig.values().to_vec(), components })
}

/// `X̂_t = μ̂ + Σ_{m≤p} <X_t - μ̂, v_m> v_m`.
pub fn fpca_reconstruct(model: &StaticFpca, series: &FunctionalSeries) -> Result<FunctionalSeries> {
    let scores = model.scores(series)?;
    let k = series.nbasis();
    let out = DMatrix::from_fn(series.len(), k, |s, i| {
        let mut value = model.mean[i];
        for m in 0..model.ncomp() {
            value += scores[(s, m)] * model.components[(i, m)];
        }
        value
    });
    FunctionalSeries::new(out, series.basis().clone(), series.period())
}
