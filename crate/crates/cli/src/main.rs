//! `pcdfpca`: fit, apply and benchmark periodically correlated dynamic FPCA
//! from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 data validation, 4 numerical failure.
//! Outputs are computed in full before anything is written, and every file
//! is replaced atomically.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use pcdfpca::basis::{smooth_curves, FunctionalSeries};
use pcdfpca::io::{format_matrix_csv, read_matrix_csv, write_atomic};
use pcdfpca::model::{fit, nmse, reconstruct, scores, FitConfig, PcDfpcaModel, ScoreSeries, Truncation};
use pcdfpca::numerics::FrequencyGrid;
use pcdfpca::simbench::{
    gen_deterministic_mixing, gen_periodic_ar, replication_rng, run_benchmark, Method, PsiNorm, ScenarioKind,
    ScenarioSpec,
};
use pcdfpca::spectral::Kernel;
use pcdfpca::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "pcdfpca", version, about = "Dynamic FPCA for periodically correlated functional time series")]
struct Cli {
    /// Print summaries as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a model and write it as JSON.
    Fit(FitArgs),
    /// Compute scores of a series under a fitted model.
    Transform(TransformArgs),
    /// Rebuild curves from scores and report NMSE against the originals.
    Reconstruct(ReconstructArgs),
    /// Generate a synthetic benchmark dataset.
    Simulate(SimulateArgs),
    /// Compare FPCA, DFPCA and PC-DFPCA over repeated simulations.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV with one observation per row.
    #[arg(long)]
    input: PathBuf,
    /// Rows of the input are basis coefficients.
    #[arg(long, conflicts_with = "grid")]
    coeffs: bool,
    /// Rows of the input are curve values at these points in [0, 1] (CSV).
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Number of Fourier basis functions used to smooth raw curves.
    #[arg(long)]
    nbasis: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Period T.
    #[arg(long)]
    period: usize,
    /// Components per phase p.
    #[arg(long)]
    ncomp: usize,
    /// Lag window q.
    #[arg(long)]
    window: usize,
    /// Filter truncation L; takes precedence over --epsilon.
    #[arg(long)]
    lag: Option<usize>,
    /// Energy threshold for choosing L (default 0.05).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Size of the frequency grid F (even).
    #[arg(long, default_value_t = FrequencyGrid::DEFAULT_SIZE)]
    freqs: usize,
    #[arg(long, value_enum, default_value_t = KernelArg::Bartlett)]
    kernel: KernelArg,
    /// Model file to write.
    #[arg(long)]
    model: PathBuf,
    /// Also write the eigenvalue curves as JSON.
    #[arg(long)]
    eigen_dump: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    model: PathBuf,
    /// Scores CSV to write.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    model: PathBuf,
    /// Scores CSV produced by `transform`.
    #[arg(long)]
    scores: PathBuf,
    /// Original series, for NMSE and the number of rows to rebuild.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, requires = "input", conflicts_with = "grid")]
    coeffs: bool,
    /// Also evaluates the output on these points.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, requires = "input")]
    nbasis: Option<usize>,
    /// Number of rows to rebuild when no input is given (default: score rows).
    #[arg(long, conflicts_with = "input")]
    rows: Option<usize>,
    /// Reconstructed coefficients (or curve values when --grid is given).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = NormArg::Spectral)]
    psi_norm: NormArg,
    /// Coefficient CSV to write.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Filter truncation L.
    #[arg(long, default_value_t = 2)]
    lag: usize,
    /// Lag window q.
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    ncomp: usize,
    #[arg(long, default_value_t = FrequencyGrid::DEFAULT_SIZE)]
    freqs: usize,
    #[arg(long, value_enum, default_value_t = NormArg::Spectral)]
    psi_norm: NormArg,
    /// Report JSON to write.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-replication NMSE CSV to write.
    #[arg(long)]
    replications: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Bartlett,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    /// Deterministic mixing, T = 3, n = 300.
    A,
    /// Periodic AR(2), T = 2, n = 1000.
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Spectral,
    Frobenius,
}

impl From<KernelArg> for Kernel {
    fn from(_: KernelArg) -> Self {
        Kernel::Bartlett
    }
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::A => ScenarioKind::DeterministicMixing,
            ScenarioArg::B => ScenarioKind::PeriodicAr,
        }
    }
}

impl From<NormArg> for PsiNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Spectral => PsiNorm::Spectral,
            NormArg::Frobenius => PsiNorm::Frobenius,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) => 2,
            Error::NumericalFailure(_) => 4,
            _ => 3,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read_context(path: &Path, what: &str) -> impl FnOnce(Error) -> Failure {
    let prefix = format!("{what} '{}'", path.display());
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{prefix}: {}", f.message);
        f
    }
}

fn read_grid(path: &Path) -> Outcome<Vec<f64>> {
    let grid = read_matrix_csv(path).map_err(read_context(path, "grid"))?;
    Ok(grid.data.transpose().iter().copied().collect())
}

/// Loads a series as coefficients, smoothing raw curves when a grid is given.
fn load_series(
    input: &Path,
    coeffs: bool,
    grid: Option<&Path>,
    nbasis: Option<usize>,
    period: usize,
) -> Outcome<FunctionalSeries> {
    let data = read_matrix_csv(input).map_err(read_context(input, "input"))?.data;
    let series = match (coeffs, grid) {
        (true, _) => {
            if let Some(k) = nbasis {
                if k != data.ncols() {
                    return Err(Failure::usage(format!(
                        "--nbasis {k} disagrees with {} coefficient columns",
                        data.ncols()
                    )));
                }
            }
            FunctionalSeries::from_fourier_coeffs(data, period)?
        }
        (false, Some(grid)) => {
            let k = nbasis.ok_or_else(|| Failure::usage("--grid requires --nbasis"))?;
            let points = read_grid(grid)?;
            smooth_curves(&data, &points, k)?.with_period(period)?
        }
        (false, None) => return Err(Failure::usage("give --coeffs or --grid to describe the input")),
    };
    Ok(series)
}

fn check_model_basis(model: &PcDfpcaModel, series: &FunctionalSeries) -> Outcome {
    if series.nbasis() != model.nbasis() {
        return Err(Failure {
            code: 3,
            message: format!(
                "data have {} basis coefficients per row but the model expects {}",
                series.nbasis(),
                model.nbasis()
            ),
        });
    }
    Ok(())
}

fn load_model(path: &Path) -> Outcome<PcDfpcaModel> {
    let text = std::fs::read_to_string(path).map_err(|e| read_context(path, "model")(e.into()))?;
    PcDfpcaModel::from_json_str(&text).map_err(read_context(path, "model"))
}

fn write(path: &Path, contents: &str) -> Outcome {
    write_atomic(path, contents.as_bytes()).map_err(read_context(path, "cannot write"))
}

fn print_json(value: &serde_json::Value) {
    // A closed stdout (e.g. piped into `head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn cmd_fit(args: &FitArgs, as_json: bool) -> Outcome {
    if args.period == 0 || args.ncomp == 0 || args.window == 0 {
        return Err(Failure::usage("--period, --ncomp and --window must be positive"));
    }
    let series =
        load_series(&args.input.input, args.input.coeffs, args.input.grid.as_deref(), args.input.nbasis, args.period)?;
    let config = FitConfig {
        period: args.period,
        ncomp: args.ncomp,
        window: args.window,
        kernel: args.kernel.into(),
        grid: FrequencyGrid::new(args.freqs)?,
        truncation: Truncation::resolve(args.lag, args.epsilon)?,
    };
    let model = fit(&series, &config)?;
    let model_json = model.to_json()?;
    let dump = match &args.eigen_dump {
        Some(_) => Some(model.eigenvalue_curves()?.to_json()?),
        None => None,
    };

    write(&args.model, &model_json)?;
    if let (Some(path), Some(text)) = (&args.eigen_dump, dump) {
        write(path, &text)?;
    }

    let phases: Vec<serde_json::Value> = (0..model.period())
        .flat_map(|d| (0..model.ncomp()).map(move |m| (d, m)))
        .map(|(d, m)| {
            let column: Vec<f64> = model.eigenvalues().iter().map(|row| row[d * model.ncomp() + m]).collect();
            let mean = column.iter().sum::<f64>() / column.len() as f64;
            let min = column.iter().copied().fold(f64::INFINITY, f64::min);
            let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            json!({
                "phase": d,
                "component": m + 1,
                "eigenvalue_mean": mean,
                "eigenvalue_min": min,
                "eigenvalue_max": max,
                "energy": model.energy(d, m),
            })
        })
        .collect();
    if as_json {
        print_json(&json!({
            "model": args.model.display().to_string(),
            "observations": series.len(),
            "nbasis": series.nbasis(),
            "lag": model.lag(),
            "epsilon": model.epsilon(),
            "components": phases,
        }));
    } else {
        println!(
            "fitted {} observations, K={}, T={}, p={}, q={}, L={}",
            series.len(),
            series.nbasis(),
            model.period(),
            model.ncomp(),
            model.window(),
            model.lag()
        );
        println!(
            "{:>5} {:>9} {:>12} {:>12} {:>12} {:>8}",
            "phase", "component", "mean eig", "min eig", "max eig", "energy"
        );
        for p in &phases {
            println!(
                "{:>5} {:>9} {:>12.6} {:>12.6} {:>12.6} {:>8.4}",
                p["phase"],
                p["component"],
                p["eigenvalue_mean"].as_f64().unwrap(),
                p["eigenvalue_min"].as_f64().unwrap(),
                p["eigenvalue_max"].as_f64().unwrap(),
                p["energy"].as_f64().unwrap()
            );
        }
        println!("model written to {}", args.model.display());
    }
    Ok(())
}

fn score_header(p: usize) -> Vec<String> {
    (1..=p).map(|m| format!("score{m}")).collect()
}

fn cmd_transform(args: &TransformArgs, as_json: bool) -> Outcome {
    let model = load_model(&args.model)?;
    let series = load_series(
        &args.input.input,
        args.input.coeffs,
        args.input.grid.as_deref(),
        args.input.nbasis,
        model.period(),
    )?;
    check_model_basis(&model, &series)?;
    let y = scores(&model, &series)?;
    write(&args.output, &format_matrix_csv(y.scores(), Some(&score_header(y.ncomp()))))?;
    if as_json {
        print_json(&json!({ "scores": args.output.display().to_string(), "rows": y.len(), "ncomp": y.ncomp() }));
    } else {
        println!("wrote {}x{} scores to {}", y.len(), y.ncomp(), args.output.display());
    }
    Ok(())
}

fn cmd_reconstruct(args: &ReconstructArgs, as_json: bool) -> Outcome {
    let model = load_model(&args.model)?;
    let table = read_matrix_csv(&args.scores).map_err(read_context(&args.scores, "scores"))?;
    if table.data.ncols() != model.ncomp() {
        return Err(Failure {
            code: 3,
            message: format!(
                "scores have {} columns but the model has {} components",
                table.data.ncols(),
                model.ncomp()
            ),
        });
    }
    let y = ScoreSeries::new(table.data, model.period())?;

    let original = match &args.input {
        Some(path) => Some(load_series(path, args.coeffs, args.grid.as_deref(), args.nbasis, model.period())?),
        None => None,
    };
    if let Some(x) = &original {
        check_model_basis(&model, x)?;
    }
    let rows = original.as_ref().map_or(args.rows.unwrap_or(y.len()), |x| x.len());
    let rebuilt = reconstruct(&model, &y, rows)?;
    let error = original.as_ref().map(|x| nmse(x, &rebuilt)).transpose()?;

    let (data, header): (DMatrix<f64>, Vec<String>) = match args.grid.as_deref() {
        Some(path) => {
            let points = read_grid(path)?;
            let values = rebuilt.eval(&points)?;
            let header = (1..=values.ncols()).map(|j| format!("u{j}")).collect();
            (values, header)
        }
        None => (rebuilt.coeffs().clone(), (1..=model.nbasis()).map(|j| format!("c{j}")).collect()),
    };
    write(&args.output, &format_matrix_csv(&data, Some(&header)))?;

    if as_json {
        print_json(&json!({
            "output": args.output.display().to_string(),
            "rows": rows,
            "nmse": error,
            "variance_explained_percent": error.map(|e| (1.0 - e) * 100.0),
        }));
    } else {
        println!("wrote {rows} reconstructed rows to {}", args.output.display());
        if let Some(e) = error {
            println!("NMSE {e:.6} (variance explained {:.2}%)", (1.0 - e) * 100.0);
        }
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, as_json: bool) -> Outcome {
    let spec = ScenarioSpec::for_kind(args.scenario.into(), 1, args.seed);
    let mut rng = replication_rng(args.seed, 0);
    let series = match spec.kind {
        ScenarioKind::DeterministicMixing => gen_deterministic_mixing(spec.dim, spec.n, &mut rng)?,
        ScenarioKind::PeriodicAr => gen_periodic_ar(spec.dim, spec.n, args.psi_norm.into(), &mut rng)?,
    };
    let header: Vec<String> = (1..=series.nbasis()).map(|j| format!("c{j}")).collect();
    write(&args.output, &format_matrix_csv(series.coeffs(), Some(&header)))?;
    if as_json {
        print_json(&json!({
            "output": args.output.display().to_string(),
            "rows": series.len(),
            "nbasis": series.nbasis(),
            "period": spec.period,
            "seed": args.seed,
        }));
    } else {
        println!(
            "wrote {} observations (K={}, T={}) to {}",
            series.len(),
            series.nbasis(),
            spec.period,
            args.output.display()
        );
    }
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs, as_json: bool) -> Outcome {
    let spec = ScenarioSpec {
        lag: args.lag,
        window: args.window,
        ncomp: args.ncomp,
        freqs: args.freqs,
        psi_norm: args.psi_norm.into(),
        ..ScenarioSpec::for_kind(args.scenario.into(), args.reps, args.seed)
    };
    let report = run_benchmark(&spec)?;
    let report_json = report.to_json()?;
    if let Some(path) = &args.output {
        write(path, &report_json)?;
    }
    if let Some(path) = &args.replications {
        write(path, &report.replications_csv())?;
    }
    if as_json {
        let methods: Vec<serde_json::Value> = Method::ALL
            .iter()
            .map(|&m| {
                let s = report.summary(m);
                json!({ "method": m.label(), "mean_nmse": s.mean, "sd": s.sd, "variance_explained_percent": (1.0 - s.mean) * 100.0 })
            })
            .collect();
        print_json(&json!({ "methods": methods, "failures": report.failures.len(), "notes": report.notes }));
    } else {
        print!("{}", report.table());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, cli.json),
        Command::Transform(a) => cmd_transform(a, cli.json),
        Command::Reconstruct(a) => cmd_reconstruct(a, cli.json),
        Command::Simulate(a) => cmd_simulate(a, cli.json),
        Command::Benchmark(a) => cmd_benchmark(a, cli.json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
