use gue_extremes::charpoly::{centering, log_abs_charpoly};
use gue_extremes::ensemble::*;
use gue_extremes::prediction::{default_grid, invert_to_density, InversionConfig, MomentFunction, Variant};
use gue_extremes::sampler::{realization_seed, rng_from_seed, sample_tridiagonal};
use gue_extremes::Error;
use rand::Rng;

fn small_config(workers: usize) -> RunConfig {
    RunConfig { n: 50, realizations: 100, master_seed: 11, workers, ..Default::default() }
}

#[test]
fn identical_across_worker_counts() {
    let a = run_ensemble(&small_config(1)).unwrap();
    let b = run_ensemble(&small_config(8)).unwrap();
    assert_eq!(a.maxima, b.maxima);
    assert_eq!(a.histogram, b.histogram);
    assert_eq!(a.correction, b.correction);

    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_maxima_csv(&a, &pa).unwrap();
    write_maxima_csv(&b, &pb).unwrap();
    assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    let (ja, jb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_json(&a, &ja).unwrap();
    write_json(&b, &jb).unwrap();
    assert_eq!(std::fs::read(&ja).unwrap(), std::fs::read(&jb).unwrap());

    // Maxima survive a round trip through the CSV file unchanged.
    assert_eq!(read_maxima_csv(&pa).unwrap(), a.maxima);
}

#[test]
fn seeds_follow_the_master_seed() {
    let s = run_ensemble(&small_config(0)).unwrap();
    for (i, r) in s.maxima.iter().enumerate() {
        assert_eq!(r.index, i);
        assert_eq!(r.seed, realization_seed(11, i as u64));
    }
    assert!(s.failures.is_empty());
    assert!((s.histogram.as_ref().unwrap().total_mass() - 1.0).abs() < 1e-9);
    let c = s.correction.unwrap();
    assert!(c.c_star.is_finite() && c.s_star.is_finite());
    assert!(s.var_max.unwrap() > 0.0);
}

#[test]
fn single_realization_is_degenerate() {
    let s = run_ensemble(&RunConfig { n: 20, realizations: 1, ..Default::default() }).unwrap();
    assert!(s.degenerate());
    assert!(s.var_max.is_none());
    assert!(s.histogram.is_none());
    assert!(matches!(s.corrected(), Err(Error::DegenerateStatistics(_))));
}

#[test]
fn fitted_correction_reproduces_target_moments() {
    let s = run_ensemble(&RunConfig { n: 80, realizations: 300, master_seed: 5, ..Default::default() }).unwrap();
    let y = s.corrected().unwrap();
    let (mean, var) = mean_var(&y);
    let (mean_y, var_y) = s.target_moments;
    assert!((mean - mean_y).abs() < 1e-9, "{mean} vs {mean_y}");
    assert!((var.unwrap() - var_y).abs() < 1e-9);
}

fn predicted_y() -> gue_extremes::prediction::PredictedDensity {
    let mf = MomentFunction::standard(Variant::YFull).unwrap();
    invert_to_density(&mf, &default_grid(), &InversionConfig::default()).unwrap()
}

/// Synthetic ensemble whose maxima are L_N - y with y drawn from the predicted law.
fn synthetic_summary(pred: &gue_extremes::prediction::PredictedDensity, n: usize, count: usize) -> EnsembleSummary {
    let mut rng = rng_from_seed(2024);
    let maxima = (0..count)
        .map(|index| Realization {
            index,
            seed: 0,
            x_star: 0.0,
            m_star: leading_order(n) - pred.quantile(rng.random::<f64>()),
        })
        .collect();
    let cfg = RunConfig { n, realizations: count, ..Default::default() };
    summarize(&cfg, maxima, vec![], limiting_moments().unwrap()).unwrap()
}

#[test]
fn sampled_limiting_law_fits_without_correction() {
    let pred = predicted_y();
    let s = synthetic_summary(&pred, 1000, 100_000);
    let c = s.correction.unwrap();
    // Sampling error of the variance ratio is about 1% at this size.
    assert!(c.s_star.abs() < 0.03, "{c:?}");
    assert!(c.c_star.abs() < 0.03, "{c:?}");

    let raw: Vec<f64> = s.maxima.iter().map(|r| leading_order(1000) - r.m_star).collect();
    let bound = 1.36 / (1e5f64).sqrt() * 1.5;
    let ks = ks_statistic(&raw, |v| pred.cdf_at(v));
    assert!(ks < bound, "ks {ks} >= {bound}");

    let report = compare_distribution(&s, &pred).unwrap();
    assert!(report.ks_statistic < bound, "{}", report.ks_statistic);
    assert!(report.l1_distance < 0.05, "{}", report.l1_distance);
    assert_eq!(report.residuals.len(), s.histogram.as_ref().unwrap().bins.len());
}

#[test]
fn comparison_rejects_uncovered_range() {
    let pred = predicted_y();
    let mut s = synthetic_summary(&pred, 200, 1000);
    let y = s.corrected().unwrap();
    s.histogram = Some(Histogram::new(&y, -40.0, 8.0, 0.1).unwrap());
    assert!(compare_distribution(&s, &pred).is_err());
}

#[test]
fn bootstrap_errors_scale_like_inverse_root() {
    let pred = predicted_y();
    let small = synthetic_summary(&pred, 500, 2_500);
    let large = synthetic_summary(&pred, 500, 40_000);
    let a = table1_row(&small, 200).unwrap();
    let b = table1_row(&large, 200).unwrap();
    let ratio = a.stderr_s / b.stderr_s;
    assert!((ratio - 4.0).abs() < 1.0, "ratio {ratio}");
    let ratio = a.stderr_c / b.stderr_c;
    assert!((ratio - 4.0).abs() < 1.0, "ratio {ratio}");
}

#[test]
fn covariance_reference_column() {
    let rows = covariance_probe(60, &[(-0.25, 0.25), (0.1, 0.35)], 50, 3).unwrap();
    assert!(rows[0].reference.abs() < 1e-15);
    assert!((rows[1].reference - 2.0 * std::f64::consts::LN_2).abs() < 1e-14);
    assert!(covariance_probe(60, &[(0.2, 0.2)], 50, 3).is_err());
    assert!(covariance_probe(60, &[(0.2, 1.0)], 50, 3).is_err());
}

#[test]
fn covariance_matches_log_kernel() {
    let rows = covariance_probe(1000, &[(-0.125, 0.125)], 100_000, 17).unwrap();
    let r = rows[0];
    // The product of two fields with variance ~2 log N is noisy: se is ~4% here.
    assert!((r.empirical - r.reference).abs() < 4.0 * r.stderr, "{r:?}");
    assert!(r.stderr < 0.05 * r.reference);
}

#[test]
fn covariance_depends_on_separation_in_the_bulk() {
    for sep in [0.1, 0.3] {
        let rows = covariance_probe(400, &[(-sep / 2.0, sep / 2.0), (0.05, 0.05 + sep)], 40_000, 23).unwrap();
        let (a, b) = (rows[0], rows[1]);
        let z = separation_in_stderr(a.empirical, a.stderr, b.empirical, b.stderr);
        assert!(z.abs() < 4.0, "sep {sep}: {a:?} {b:?}");
    }
}

#[test]
fn field_mean_matches_centering() {
    let (n, x, reps) = (500, 0.5, 10_000);
    let v: Vec<f64> = (0..reps)
        .map(|i| {
            let m = sample_tridiagonal(n, realization_seed(99, i)).unwrap();
            2.0 * log_abs_charpoly(&m, x).log_abs
        })
        .collect();
    let (mean, var) = mean_var(&v);
    let se = (var.unwrap() / reps as f64).sqrt();
    let target = centering(n, x);
    assert!((mean - target).abs() < 4.0 * se, "{mean} vs {target} (se {se})");
}

#[test]
fn table_rows_are_written_with_header() {
    let rows = [Table1Row {
        n: 150,
        realizations: 10,
        c_star: 0.3,
        s_star: 0.2,
        stderr_c: 0.01,
        stderr_s: 0.02,
        mean_max: 8.0,
        var_max: 2.0,
    }];
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    write_table1_csv(&rows, &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text, "N,c_star,s_star,stderr_c,stderr_s\n150,0.3,0.2,0.01,0.02\n");
}
