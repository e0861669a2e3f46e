use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix equal to its conjugate transpose.
///
/// Construction replaces the input by `(H + H*) / 2`, so the invariant holds
/// exactly whatever noise the caller's estimate carries.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::shape(
                "Hermitian matrix",
                "a square matrix",
                format!("{}x{}", entries.nrows(), entries.ncols()),
            ));
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let n = entries.nrows();
        let sym = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(entries[(i, i)].re, 0.0)
            } else {
                (entries[(i, j)] + entries[(j, i)].conj()) * 0.5
            }
        });
        Ok(Self { entries: sym })
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise complex conjugate (still Hermitian).
    pub fn conj(&self) -> Self {
        Self { entries: self.entries.map(|z| z.conj()) }
    }
}

/// Eigenvalues in non-increasing order with unit eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> DVector<Complex64> {
        self.vectors.column(index).into_owned()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Each rotation `J` acts on coordinates `(p, q)` as
/// `J e_p = c e_p - s w̄ e_q`, `J e_q = s w e_p + c e_q` with `w = a_pq / |a_pq|`,
/// which annihilates `a_pq` for `t = s / c` the smaller root of
/// `t² + 2ϑt - 1 = 0`, `ϑ = (a_qq - a_pp) / (2|a_pq|)`.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    // Row-major working copies.
    let mut a: Vec<Complex64> = (0..n * n).map(|idx| h.entries[(idx / n, idx % n)]).collect();
    let mut v: Vec<Complex64> = (0..n * n)
        .map(|idx| if idx / n == idx % n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();

    let norm = h.frobenius_norm();
    let tol = 1e-15 * norm;
    let mut converged = norm == 0.0 || n == 1;
    let mut sweeps = 0;

    while !converged {
        let off = off_diagonal_norm(&a, n);
        if off <= tol {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Negligible against both diagonal entries: drop it.
                if sweeps > 4 && app.abs() + 1e3 * mag == app.abs() && aqq.abs() + 1e3 * mag == aqq.abs() {
                    a[p * n + q] = Complex64::new(0.0, 0.0);
                    a[q * n + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let w = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sw = w * s;
                let swc = w.conj() * s;

                // A <- A J (columns p, q)
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - swc * akq;
                    a[k * n + q] = sw * akp + akq * c;
                }
                // A <- J* A (rows p, q)
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - sw * aqk;
                    a[q * n + k] = swc * apk + aqk * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                // V <- V J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - swc * vkq;
                    v[k * n + q] = sw * vkp + vkq * c;
                }
            }
        }
    }

    if !converged {
        let off = off_diagonal_norm(&a, n);
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge after {MAX_SWEEPS} sweeps \
             (off-diagonal norm {off:.3e}, matrix norm {norm:.3e})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = DMatrix::from_fn(n, n, |row, col| v[row * n + order[col]]);
    for mut col in vectors.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}
