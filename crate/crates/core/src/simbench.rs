//! Synthetic periodically correlated processes and the train/test benchmark
//! comparing static FPCA, stationary DFPCA and PC-DFPCA.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`), which produces the same
//! stream on every platform. Normal variates use the ziggurat sampler of
//! `rand_distr::StandardNormal`. Replication `r` of a benchmark with seed `s`
//! draws from stream `r` of the generator seeded with `s`; stand-alone
//! generation uses stream 0.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::FunctionalSeries;
use crate::error::{Error, Result};
use crate::model::{dfpca_fit, fit, fpca_fit, fpca_reconstruct, nmse, reconstruct, scores, FitConfig, Truncation};
use crate::numerics::{hermitian_eig, FrequencyGrid, HermitianMatrix};
use crate::spectral::Kernel;

/// Share of failed replications above which a benchmark is rejected.
const MAX_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `c_{3i+1} = a_i`, `c_{3i+2} = b_i`, `c_{3i+3} = 2a_i - b_i`.
    DeterministicMixing,
    /// Periodic vector AR(2) with phase-dependent coefficient matrices.
    PeriodicAr,
}

/// Norm used to rescale the random AR coefficient matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiNorm {
    /// Largest singular value.
    Spectral,
    Frobenius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fpca,
    Dfpca,
    PcDfpca,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Fpca, Method::Dfpca, Method::PcDfpca];

    pub fn label(self) -> &'static str {
        match self {
            Method::Fpca => "FPCA",
            Method::Dfpca => "DFPCA",
            Method::PcDfpca => "PC-DFPCA",
        }
    }
}

/// Benchmark configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Dimension of the coefficient vectors.
    pub dim: usize,
    pub period: usize,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Filter truncation `L`.
    pub lag: usize,
    /// Lag window `q_n`.
    pub window: usize,
    pub freqs: usize,
    pub ncomp: usize,
    pub kernel: Kernel,
    pub psi_norm: PsiNorm,
    /// Allows `period`/`n` to differ from the scenario defaults.
    pub custom: bool,
}

impl ScenarioSpec {
    /// Deterministic mixing: `p = 7`, `T = 3`, `n = 300`, `L = 2`, `q = 3`.
    pub fn scenario_a(reps: usize, seed: u64) -> Self {
        Self {
            kind: ScenarioKind::DeterministicMixing,
            dim: 7,
            period: 3,
            n: 300,
            reps,
            seed,
            lag: 2,
            window: 3,
            freqs: FrequencyGrid::DEFAULT_SIZE,
            ncomp: 1,
            kernel: Kernel::Bartlett,
            psi_norm: PsiNorm::Spectral,
            custom: false,
        }
    }

    /// Periodic AR: `p = 7`, `T = 2`, `n = 1000`, with scenario A's fitting
    /// metaparameters.
    pub fn scenario_b(reps: usize, seed: u64) -> Self {
        Self { kind: ScenarioKind::PeriodicAr, period: 2, n: 1000, ..Self::scenario_a(reps, seed) }
    }

    pub fn for_kind(kind: ScenarioKind, reps: usize, seed: u64) -> Self {
        match kind {
            ScenarioKind::DeterministicMixing => Self::scenario_a(reps, seed),
            ScenarioKind::PeriodicAr => Self::scenario_b(reps, seed),
        }
    }

    /// Length of the training half.
    pub fn train_len(&self) -> usize {
        self.n / 2
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("reps", self.reps),
            ("dim", self.dim),
            ("period", self.period),
            ("n", self.n),
            ("window", self.window),
            ("ncomp", self.ncomp),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
        FrequencyGrid::new(self.freqs)?;
        if self.ncomp > self.dim {
            return Err(Error::InvalidArgument(format!("ncomp {} exceeds dimension {}", self.ncomp, self.dim)));
        }
        let (default_period, default_n) = match self.kind {
            ScenarioKind::DeterministicMixing => (3, 300),
            ScenarioKind::PeriodicAr => (2, 1000),
        };
        if !self.custom && (self.period != default_period || self.n != default_n) {
            return Err(Error::InvalidArgument(format!(
                "{:?} uses T={default_period}, n={default_n}; set `custom` to override",
                self.kind
            )));
        }
        if self.kind == ScenarioKind::DeterministicMixing && (self.period != 3 || !self.n.is_multiple_of(3)) {
            return Err(Error::InvalidArgument("deterministic mixing needs T = 3 and n divisible by 3".into()));
        }
        if self.kind == ScenarioKind::PeriodicAr && self.period != 2 {
            return Err(Error::InvalidArgument("periodic AR needs T = 2".into()));
        }
        if !self.train_len().is_multiple_of(self.period) {
            return Err(Error::InvalidArgument(format!(
                "training length {} is not a multiple of the period {}",
                self.train_len(),
                self.period
            )));
        }
        Ok(())
    }

    /// Statements about how metaparameters were chosen, echoed in reports.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = vec![
            format!("train = first {} observations, test = last {}", self.train_len(), self.n - self.train_len()),
            "FPCA and DFPCA center with the grand mean, PC-DFPCA with the periodic mean".to_string(),
        ];
        if self.kind == ScenarioKind::PeriodicAr {
            notes.push(format!(
                "L, q and the half/half split for the periodic AR process are not given by the \
                 reference setup; scenario A values (L={}, q={}) are reused",
                self.lag, self.window
            ));
            notes.push(format!("AR coefficient matrices scaled with the {:?} norm", self.psi_norm).to_lowercase());
        }
        notes
    }
}

/// Generator for replication `rep` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Standard deviations `exp(-k/p)`, `k = 1..p`, i.e. variances `exp(-2k/p)`.
pub fn decaying_sd(dim: usize) -> Vec<f64> {
    (1..=dim).map(|k| (-(k as f64) / dim as f64).exp()).collect()
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Deterministic mixing with `dim` coordinates and `n` observations
/// (`n` divisible by 3): per block, `a`, `b`, `2a - b` with
/// `a, b ~ N(0, diag(exp(-2k/dim)))`, drawing `a` before `b`.
pub fn gen_deterministic_mixing<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<FunctionalSeries> {
    if dim == 0 || n == 0 || !n.is_multiple_of(3) {
        return Err(Error::InvalidArgument(format!(
            "deterministic mixing needs dim > 0 and n a positive multiple of 3 (dim {dim}, n {n})"
        )));
    }
    let sd = decaying_sd(dim);
    let mut data = DMatrix::zeros(n, dim);
    for i in 0..n / 3 {
        let a: Vec<f64> = sd.iter().map(|s| s * normal(rng)).collect();
        let b: Vec<f64> = sd.iter().map(|s| s * normal(rng)).collect();
        for k in 0..dim {
            data[(3 * i, k)] = a[k];
            data[(3 * i + 1, k)] = b[k];
            data[(3 * i + 2, k)] = 2.0 * a[k] - b[k];
        }
    }
    FunctionalSeries::from_fourier_coeffs(data, 3)
}

/// Scenario A: `dim = 7`, `n = 300`, `T = 3`.
pub fn gen_scenario_a(seed: u64) -> FunctionalSeries {
    gen_deterministic_mixing(7, 300, &mut replication_rng(seed, 0)).expect("fixed dimensions are valid")
}

/// Coefficient matrices `Ψ_{d,j}` of the periodic AR(2) recursion
/// `c_t = Ψ_{d,0} c_{t-1} + Ψ_{d,1} c_{t-2} + ε_t` for `t ≡ d (mod 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicArCoefficients {
    /// Indexed `[d][j]`.
    pub psi: [[DMatrix<f64>; 2]; 2],
}

impl PeriodicArCoefficients {
    /// Draws `P` with independent entries `δ_{k,l} ~ N(0, exp(-2l/dim))` and
    /// rescales to `0.9 P / ‖P‖`, in the order `(0,0), (0,1), (1,0), (1,1)`,
    /// entries row by row.
    pub fn draw<R: Rng + ?Sized>(dim: usize, norm: PsiNorm, rng: &mut R) -> Result<Self> {
        let sd = decaying_sd(dim);
        let mut next = || -> Result<DMatrix<f64>> {
            let mut p = DMatrix::zeros(dim, dim);
            for k in 0..dim {
                for l in 0..dim {
                    p[(k, l)] = sd[l] * normal(rng);
                }
            }
            let size = matrix_norm(&p, norm)?;
            if size == 0.0 {
                return Err(Error::NumericalFailure("drew a zero coefficient matrix".into()));
            }
            Ok(p * (0.9 / size))
        };
        let a = next()?;
        let b = next()?;
        let c = next()?;
        let d = next()?;
        Ok(Self { psi: [[a, b], [c, d]] })
    }

    pub fn zeros(dim: usize) -> Self {
        let z = DMatrix::zeros(dim, dim);
        Self { psi: [[z.clone(), z.clone()], [z.clone(), z]] }
    }

    pub fn dim(&self) -> usize {
        self.psi[0][0].nrows()
    }

    /// Runs the recursion for `t = 1..n` from zero initial values, drawing
    /// `ε_t ~ N(0, diag(exp(-2k/dim)))` in time order.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<FunctionalSeries> {
        let dim = self.dim();
        let sd = decaying_sd(dim);
        let mut data = DMatrix::zeros(n, dim);
        for t in 1..=n {
            let d = t % 2;
            let mut row: Vec<f64> = sd.iter().map(|s| s * normal(rng)).collect();
            for (j, back) in [1usize, 2].into_iter().enumerate() {
                if t > back {
                    let prev = data.row(t - 1 - back).transpose();
                    let contrib = &self.psi[d][j] * prev;
                    for (r, v) in row.iter_mut().zip(contrib.iter()) {
                        *r += v;
                    }
                }
            }
            for (k, v) in row.into_iter().enumerate() {
                data[(t - 1, k)] = v;
            }
        }
        FunctionalSeries::from_fourier_coeffs(data, 2)
    }
}

pub fn matrix_norm(m: &DMatrix<f64>, norm: PsiNorm) -> Result<f64> {
    match norm {
        PsiNorm::Frobenius => Ok(m.norm()),
        PsiNorm::Spectral => {
            let gram = m.transpose() * m;
            let eig = hermitian_eig(&HermitianMatrix::from_real(&gram)?)?;
            Ok(eig.values()[0].max(0.0).sqrt())
        }
    }
}

/// Periodic AR process with freshly drawn coefficients.
pub fn gen_periodic_ar<R: Rng + ?Sized>(dim: usize, n: usize, norm: PsiNorm, rng: &mut R) -> Result<FunctionalSeries> {
    PeriodicArCoefficients::draw(dim, norm, rng)?.simulate(n, rng)
}

/// Scenario B: `dim = 7`, `n = 1000`, `T = 2`, spectral norm.
pub fn gen_scenario_b(seed: u64) -> FunctionalSeries {
    gen_periodic_ar(7, 1000, PsiNorm::Spectral, &mut replication_rng(seed, 0)).expect("fixed dimensions are valid")
}

/// Periodic moving average `c_t = ε_t + Θ_d ε_{t-1}` with phase `d = (t-1) mod T`,
/// `Θ_d` drawn with entries `N(0, 0.5² exp(-2l/dim))`, innovations as in the
/// other scenarios. Used by property tests.
pub fn gen_periodic_ma<R: Rng + ?Sized>(dim: usize, n: usize, period: usize, rng: &mut R) -> Result<FunctionalSeries> {
    if dim == 0 || n == 0 || period == 0 {
        return Err(Error::InvalidArgument("dimension, length and period must be positive".into()));
    }
    let sd = decaying_sd(dim);
    let theta: Vec<DMatrix<f64>> =
        (0..period).map(|_| DMatrix::from_fn(dim, dim, |_, l| 0.5 * sd[l] * normal(rng))).collect();
    let mut prev: Vec<f64> = sd.iter().map(|s| s * normal(rng)).collect();
    let mut data = DMatrix::zeros(n, dim);
    for s in 0..n {
        let eps: Vec<f64> = sd.iter().map(|s| s * normal(rng)).collect();
        let th = &theta[s % period];
        for k in 0..dim {
            let mut v = eps[k];
            for l in 0..dim {
                v += th[(k, l)] * prev[l];
            }
            data[(s, k)] = v;
        }
        prev = eps;
    }
    FunctionalSeries::from_fourier_coeffs(data, period)
}

fn generate(spec: &ScenarioSpec, rep: usize) -> Result<FunctionalSeries> {
    let mut rng = replication_rng(spec.seed, rep as u64);
    match spec.kind {
        ScenarioKind::DeterministicMixing => gen_deterministic_mixing(spec.dim, spec.n, &mut rng),
        ScenarioKind::PeriodicAr => gen_periodic_ar(spec.dim, spec.n, spec.psi_norm, &mut rng),
    }
}

/// Test-set NMSE of the three methods for one replication, in
/// [`Method::ALL`] order.
pub fn run_replication(spec: &ScenarioSpec, rep: usize) -> Result<[f64; 3]> {
    let series = generate(spec, rep)?.with_period(spec.period)?;
    let split = spec.train_len();
    let train = series.slice(0, split)?;
    let test = series.slice(split, spec.n)?;
    let grid = FrequencyGrid::new(spec.freqs)?;
    let truncation = Truncation::Fixed(spec.lag);

    let static_model = fpca_fit(&train, spec.ncomp)?;
    let fpca = nmse(&test, &fpca_reconstruct(&static_model, &test)?)?;

    let stationary = dfpca_fit(&train, spec.ncomp, spec.window, &grid, truncation)?;
    let y = scores(&stationary, &test)?;
    let dfpca = nmse(&test, &reconstruct(&stationary, &y, test.len())?)?;

    let config = FitConfig {
        period: spec.period,
        ncomp: spec.ncomp,
        window: spec.window,
        kernel: spec.kernel,
        grid,
        truncation,
    };
    let periodic = fit(&train, &config)?;
    let y = scores(&periodic, &test)?;
    let pcdfpca = nmse(&test, &reconstruct(&periodic, &y, test.len())?)?;

    Ok([fpca, dfpca, pcdfpca])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean: f64,
    /// Sample standard deviation (denominator `reps - 1`); `None` for a
    /// single replication.
    pub sd: Option<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub rep: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: ScenarioSpec,
    pub notes: Vec<String>,
    pub methods: Vec<MethodSummary>,
    /// Replication indices contributing to the statistics.
    pub replications: Vec<usize>,
    pub failures: Vec<ReplicationFailure>,
}

impl BenchmarkReport {
    pub fn summary(&self, method: Method) -> &MethodSummary {
        self.methods.iter().find(|s| s.method == method).expect("every method is reported")
    }

    pub fn mean(&self, method: Method) -> f64 {
        self.summary(method).mean
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per replication: `rep,fpca,dfpca,pcdfpca`.
    pub fn replications_csv(&self) -> String {
        let mut out = String::from("rep,fpca,dfpca,pcdfpca\n");
        for (i, rep) in self.replications.iter().enumerate() {
            let _ = writeln!(
                out,
                "{rep},{},{},{}",
                self.methods[0].values[i], self.methods[1].values[i], self.methods[2].values[i]
            );
        }
        out
    }

    pub fn table(&self) -> String {
        let c = &self.config;
        let name = match c.kind {
            ScenarioKind::DeterministicMixing => "deterministic mixing",
            ScenarioKind::PeriodicAr => "periodic AR",
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario: {name} (T={}, n={}, dim={}, reps={}, seed={}, L={}, q={}, p={})",
            c.period, c.n, c.dim, c.reps, c.seed, c.lag, c.window, c.ncomp
        );
        let _ = writeln!(out, "{:<10} {:>10} {:>8} {:>20}", "method", "mean NMSE", "sd", "variance explained");
        for s in &self.methods {
            let sd = s.sd.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ =
                writeln!(out, "{:<10} {:>10.4} {:>8} {:>19.1}%", s.method.label(), s.mean, sd, (1.0 - s.mean) * 100.0);
        }
        if !self.failures.is_empty() {
            let _ = writeln!(out, "failed replications: {}", self.failures.len());
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

/// Runs every replication (in parallel) and aggregates test-set NMSE.
pub fn run_benchmark(spec: &ScenarioSpec) -> Result<BenchmarkReport> {
    spec.validate()?;
    let outcomes: Vec<Result<[f64; 3]>> =
        (0..spec.reps).into_par_iter().map(|rep| run_replication(spec, rep)).collect();

    let mut replications = Vec::new();
    let mut values = [Vec::new(), Vec::new(), Vec::new()];
    let mut failures = Vec::new();
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => {
                replications.push(rep);
                for (bucket, x) in values.iter_mut().zip(v) {
                    bucket.push(x);
                }
            }
            Err(e) => failures.push(ReplicationFailure { rep, message: e.to_string() }),
        }
    }
    if replications.is_empty() || failures.len() as f64 > MAX_FAILURE_RATE * spec.reps as f64 {
        return Err(Error::NumericalFailure(format!(
            "{} of {} replications failed{}",
            failures.len(),
            spec.reps,
            failures.first().map_or(String::new(), |f| format!(" (first: {})", f.message))
        )));
    }
    let methods = Method::ALL
        .iter()
        .zip(values)
        .map(|(&method, values)| {
            let (mean, sd) = mean_sd(&values);
            MethodSummary { method, mean, sd, values }
        })
        .collect();
    Ok(BenchmarkReport { config: spec.clone(), notes: spec.notes(), methods, replications, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixing_relation_holds_exactly() {
        let series = gen_scenario_a(3);
        assert_eq!(series.len(), 300);
        assert_eq!(series.period(), 3);
        let c = series.coeffs();
        for i in 0..100 {
            for k in 0..7 {
                assert_eq!(c[(3 * i + 2, k)], 2.0 * c[(3 * i, k)] - c[(3 * i + 1, k)]);
            }
        }
    }

    #[test]
    fn mixing_variances_decay() {
        let mut rng = replication_rng(17, 0);
        let draws = 100_000;
        let series = gen_deterministic_mixing(7, 3 * draws, &mut rng).unwrap();
        let c = series.coeffs();
        for k in 0..7 {
            let var = (0..draws).map(|i| c[(3 * i, k)].powi(2)).sum::<f64>() / draws as f64;
            let expected = (-2.0 * (k + 1) as f64 / 7.0).exp();
            assert!((var / expected - 1.0).abs() < 0.03, "coordinate {k}: {var} vs {expected}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_scenario_a(5), gen_scenario_a(5));
        assert_ne!(gen_scenario_a(5), gen_scenario_a(6));
        assert_eq!(gen_scenario_b(5), gen_scenario_b(5));
        assert_ne!(gen_scenario_b(5), gen_scenario_b(6));
    }

    #[test]
    fn ar_coefficients_have_norm_point_nine() {
        for norm in [PsiNorm::Spectral, PsiNorm::Frobenius] {
            let coef = PeriodicArCoefficients::draw(7, norm, &mut replication_rng(2, 0)).unwrap();
            for row in &coef.psi {
                for m in row {
                    assert!((matrix_norm(m, norm).unwrap() - 0.9).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -2.0, 1.0]));
        assert!((matrix_norm(&m, PsiNorm::Spectral).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_coefficients_give_innovations() {
        let coef = PeriodicArCoefficients::zeros(4);
        let series = coef.simulate(50, &mut replication_rng(8, 0)).unwrap();
        let mut rng = replication_rng(8, 0);
        let sd = decaying_sd(4);
        for s in 0..50 {
            for k in 0..4 {
                assert_eq!(series.coeffs()[(s, k)], sd[k] * normal(&mut rng));
            }
        }
    }

    #[test]
    fn ar_phases_differ_in_lag_one_covariance() {
        let series = gen_scenario_b(4);
        let c = series.coeffs();
        // Cov(c_t, c_{t-1}) separately for odd and even t (1-based).
        let mut cov = [DMatrix::<f64>::zeros(7, 7), DMatrix::zeros(7, 7)];
        let mut count = [0usize; 2];
        for t in 2..=1000 {
            let d = t % 2;
            count[d] += 1;
            for a in 0..7 {
                for b in 0..7 {
                    cov[d][(a, b)] += c[(t - 1, a)] * c[(t - 2, b)];
                }
            }
        }
        let diff = (&cov[0] / count[0] as f64 - &cov[1] / count[1] as f64).amax();
        assert!(diff > 0.05, "{diff}");
    }

    #[test]
    fn validation() {
        assert!(ScenarioSpec::scenario_a(10, 1).validate().is_ok());
        assert!(ScenarioSpec::scenario_b(10, 1).validate().is_ok());
        let mut spec = ScenarioSpec::scenario_a(10, 1);
        spec.n = 600;
        assert!(spec.validate().is_err());
        spec.custom = true;
        assert!(spec.validate().is_ok());
        spec.n = 601;
        assert!(spec.validate().is_err());
        let mut spec = ScenarioSpec::scenario_b(0, 1);
        assert!(spec.validate().is_err());
        spec.reps = 1;
        spec.ncomp = 8;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn single_replication_is_reproducible() {
        let spec = ScenarioSpec { freqs: 64, ..ScenarioSpec::scenario_a(1, 99) };
        let a = run_benchmark(&spec).unwrap();
        let b = run_benchmark(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.summary(Method::Fpca).sd.is_none());
        assert!(a.table().contains("PC-DFPCA"));
        assert_eq!(a.replications_csv().lines().count(), 2);
    }
}
