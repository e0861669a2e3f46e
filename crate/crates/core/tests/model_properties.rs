use nalgebra::DMatrix;
use pcdfpca::basis::FunctionalSeries;
use pcdfpca::model::{fit, nmse, reconstruct, scores, FitConfig, PcDfpcaModel, ScoreSeries, Truncation};
use pcdfpca::numerics::FrequencyGrid;
use pcdfpca::simbench::{gen_periodic_ma, gen_scenario_a, gen_scenario_b, replication_rng};

fn pc_ma(n: usize, dim: usize, period: usize, seed: u64) -> FunctionalSeries {
    gen_periodic_ma(dim, n, period, &mut replication_rng(seed, 0)).unwrap()
}

fn config(period: usize, ncomp: usize, window: usize, lag: usize) -> FitConfig {
    FitConfig::new(period, ncomp, window, Truncation::Fixed(lag)).with_grid(FrequencyGrid::new(128).unwrap())
}

/// Stacked score vectors `(Ŷ_{iT+d,m})_{d,m}`, one row per full period.
fn stacked(y: &ScoreSeries) -> DMatrix<f64> {
    let (t, p) = (y.period(), y.ncomp());
    let rows = y.len() / t;
    DMatrix::from_fn(rows, t * p, |i, c| y.scores()[(i * t + c / p, c % p)])
}

/// `Σ_i (a_{i+h} - ā)(b_i - b̄) / rows`, skipping `skip` rows at both ends.
fn cross_cov(z: &DMatrix<f64>, a: usize, b: usize, h: i64, skip: usize) -> f64 {
    let rows = z.nrows() - 2 * skip;
    let mean = |c: usize| (skip..skip + rows).map(|i| z[(i, c)]).sum::<f64>() / rows as f64;
    let (ma, mb) = (mean(a), mean(b));
    let mut acc = 0.0;
    for i in skip..skip + rows {
        let j = i as i64 + h;
        if j < skip as i64 || j >= (skip + rows) as i64 {
            continue;
        }
        acc += (z[(j as usize, a)] - ma) * (z[(i, b)] - mb);
    }
    acc / rows as f64
}

fn assert_real_fit(model: &PcDfpcaModel, series: &FunctionalSeries) {
    for d in 0..model.period() {
        for m in 0..model.ncomp() {
            for l in model.lag_range(d) {
                assert!(model.filter(d, m, l).unwrap().iter().all(|v| v.is_finite()));
            }
        }
    }
    assert!(scores(model, series).unwrap().scores().iter().all(|v| v.is_finite()));
}

#[test]
fn filters_and_scores_are_real() {
    // Fitting fails when the inverse transform leaves an imaginary part above
    // 1e-8, so a successful fit certifies realness.
    let a = gen_scenario_a(4);
    assert_real_fit(&fit(&a, &config(3, 3, 3, 2)).unwrap(), &a);
    let b = gen_scenario_b(4);
    assert_real_fit(&fit(&b, &config(2, 7, 3, 2)).unwrap(), &b);
}

#[test]
fn scores_are_mutually_uncorrelated() {
    let (t, dim, n) = (2, 3, 5000);
    let series = pc_ma(n, dim, t, 21);
    // Filters of the minor components decay slowly, so L is generous.
    let model = fit(&series, &config(t, dim, 20, 10)).unwrap();
    let z = stacked(&scores(&model, &series).unwrap());
    let skip = 2 * 10 + 2;
    let width = z.ncols();
    let var: Vec<f64> = (0..width).map(|c| cross_cov(&z, c, c, 0, skip)).collect();
    let mut worst = 0.0f64;
    for a in 0..width {
        for b in 0..width {
            if a == b {
                continue;
            }
            for h in -3..=3 {
                let corr = cross_cov(&z, a, b, h, skip) / (var[a] * var[b]).sqrt();
                worst = worst.max(corr.abs());
            }
        }
    }
    assert!(worst <= 0.1, "max cross-correlation {worst}");
}

#[test]
fn long_run_covariance_of_scores_is_nearly_diagonal() {
    let (t, dim, n) = (2, 3, 5000);
    let series = pc_ma(n, dim, t, 22);
    let model = fit(&series, &config(t, dim, 20, 10)).unwrap();
    let z = stacked(&scores(&model, &series).unwrap());
    let skip = 22;
    let width = z.ncols();
    let window = 10i64;
    let long_run = DMatrix::from_fn(width, width, |a, b| {
        (-window..=window)
            .map(|h| (1.0 - h.abs() as f64 / (window + 1) as f64) * cross_cov(&z, a, b, h, skip))
            .sum::<f64>()
    });
    let mut worst = 0.0f64;
    for a in 0..width {
        for b in 0..width {
            if a != b {
                worst = worst.max(long_run[(a, b)].abs() / (long_run[(a, a)] * long_run[(b, b)]).sqrt());
            }
        }
    }
    assert!(worst <= 0.15, "off-diagonal ratio {worst}");
}

#[test]
fn nmse_is_non_increasing_in_components() {
    for (t, seed) in [(2usize, 31u64), (3, 32)] {
        let dim = 4;
        let series = pc_ma(600, dim, t, seed);
        let mut previous = f64::INFINITY;
        for p in 1..=dim {
            let model = fit(&series, &config(t, p, 4, 3)).unwrap();
            let y = scores(&model, &series).unwrap();
            let err = nmse(&series, &reconstruct(&model, &y, series.len()).unwrap()).unwrap();
            assert!(err <= previous + 1e-12, "T={t}, p={p}: {err} > {previous}");
            previous = err;
        }
        assert!(previous < 0.1, "full reconstruction NMSE {previous}");
    }
}

#[test]
fn all_components_beat_one_component() {
    let series = pc_ma(600, 4, 2, 33);
    let err = |p| {
        let model = fit(&series, &config(2, p, 4, 6)).unwrap();
        let y = scores(&model, &series).unwrap();
        nmse(&series, &reconstruct(&model, &y, series.len()).unwrap()).unwrap()
    };
    assert!(err(4) < err(1));
}

#[test]
fn test_error_shrinks_with_sample_size() {
    // One long realization of a fixed process; training prefixes grow while
    // the test block stays the same.
    let (t, dim) = (2usize, 4usize);
    let series = pc_ma(5400, dim, t, 41);
    let test = series.slice(4800, 5400).unwrap();
    let errors: Vec<f64> = [300usize, 1200, 4800]
        .iter()
        .map(|&n| {
            let window = ((n / t) as f64).sqrt().round() as usize;
            let model = fit(&series.slice(0, n).unwrap(), &config(t, 1, window, 3)).unwrap();
            let y = scores(&model, &test).unwrap();
            nmse(&test, &reconstruct(&model, &y, test.len()).unwrap()).unwrap()
        })
        .collect();
    let inversions = errors.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "{errors:?}");
    assert!(errors[2] < errors[0], "{errors:?}");
}
