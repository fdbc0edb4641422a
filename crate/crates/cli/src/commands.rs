use std::path::Path;

use anyhow::{bail, Result};
use gue_extremes::charpoly::CharPoly;
use gue_extremes::ensemble::{
    self, compare_distribution, limiting_moments, run_ensemble, summarize, write_field_csv,
    write_histogram_csv, write_json, write_maxima_csv, write_table1_csv, ComparisonReport,
    EnsembleSummary, RunConfig,
};
use gue_extremes::prediction::{
    self, invert_to_density, moments_y, uniform_grid, InversionConfig, MomentFunction, Variant,
    DEFAULT_GRID, DEFAULT_K,
};
use gue_extremes::sampler::{realization_seed, rng_from_seed, sample_tridiagonal};
use gue_extremes::search::{global_maximum, mesh_points, SearchParams};
use gue_extremes::selberg::{
    duality_gap, frozen_transform, recursion_residual, selberg_closed_form, selberg_monte_carlo,
    ContinuationParams, SelbergParams,
};
use gue_extremes::special::{
    ln_barnes_g, ln_barnes_g_complex, ln_barnes_g_half_closed_form, ln_gamma, ln_gamma_complex,
};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::meta::Recorder;
use crate::options::Options;
use crate::UsageError;

fn recorder(command: &'static str, opts: &Options, seeds: serde_json::Value) -> Result<Recorder> {
    // Thread count and output location do not affect results.
    let hashed = Options { workers: None, out: None, ..opts.clone() };
    Ok(Recorder {
        command,
        config: serde_json::to_value(hashed)?,
        seeds,
        workers: opts.workers.unwrap_or(0),
    })
}

fn search_params(opts: &Options) -> SearchParams {
    let d = SearchParams::default();
    SearchParams {
        delta: opts.delta.or(d.delta),
        top_k: opts.top_k.unwrap_or(d.top_k),
        x_tol: opts.x_tol.unwrap_or(d.x_tol),
        ..d
    }
}

fn run_config(opts: &Options, n: usize) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        n,
        realizations: opts.realizations.unwrap_or(d.realizations),
        master_seed: opts.seed.unwrap_or(d.master_seed),
        search: search_params(opts),
        workers: opts.workers.unwrap_or(0),
        output_dir: opts.out_dir(),
        histogram_lo: opts.histogram_lo.unwrap_or(d.histogram_lo),
        histogram_hi: opts.histogram_hi.unwrap_or(d.histogram_hi),
        bin_width: opts.bin_width.unwrap_or(d.bin_width),
    }
}

fn scale_k(opts: &Options) -> f64 {
    opts.k.unwrap_or(DEFAULT_K)
}

/// Re-fits against the moments of y at the requested K.
fn refit(summary: EnsembleSummary, k: f64) -> Result<EnsembleSummary> {
    let moments = moments_y(&MomentFunction::new(Variant::YFull, k)?)?;
    if moments == summary.target_moments {
        return Ok(summary);
    }
    let cfg = summary.config.clone();
    Ok(summarize(&cfg, summary.maxima, summary.failures, moments)?)
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    config: &'a RunConfig,
    n: usize,
    realizations: usize,
    successful: usize,
    failures: &'a [ensemble::FailedRealization],
    mean_max: f64,
    var_max: Option<f64>,
    target_mean: f64,
    target_variance: f64,
    c_star: Option<f64>,
    s_star: Option<f64>,
    degenerate: bool,
    ks_statistic: Option<f64>,
    l1_distance: Option<f64>,
}

impl<'a> SummaryJson<'a> {
    fn new(s: &'a EnsembleSummary, cmp: Option<&ComparisonReport>) -> Self {
        Self {
            config: &s.config,
            n: s.n,
            realizations: s.realizations,
            successful: s.maxima.len(),
            failures: &s.failures,
            mean_max: s.mean_max,
            var_max: s.var_max,
            target_mean: s.target_moments.0,
            target_variance: s.target_moments.1,
            c_star: s.correction.map(|c| c.c_star),
            s_star: s.correction.map(|c| c.s_star),
            degenerate: s.degenerate(),
            ks_statistic: cmp.map(|c| c.ks_statistic),
            l1_distance: cmp.map(|c| c.l1_distance),
        }
    }
}

fn write_summary(s: &EnsembleSummary, rec: &Recorder, dir: &Path, stem: &str) -> Result<()> {
    let p = dir.join(format!("{stem}.csv"));
    write_maxima_csv(s, &p)?;
    rec.record(&p)?;
    if let Some(h) = &s.histogram {
        let p = dir.join(format!("{stem}_histogram.csv"));
        write_histogram_csv(h, &p)?;
        rec.record(&p)?;
    }
    Ok(())
}

pub fn sample(opts: &Options) -> Result<()> {
    let n = opts.single_n(1000)?;
    let master = opts.seed.unwrap_or(0);
    let seed = realization_seed(master, 0);
    let m = sample_tridiagonal(n, seed)?;
    let delta = opts.delta.unwrap_or(2 * n);
    let xs = mesh_points(delta);
    let mut f = vec![0.0; xs.len()];
    CharPoly::new(&m).field_many(&xs, &mut f);
    let points: Vec<(f64, f64)> = xs.into_iter().zip(f).collect();
    let rec = recorder("sample", opts, json!({ "master_seed": master, "matrix_seed": seed }))?;
    let dir = opts.out_dir();
    let p = dir.join("field.csv");
    write_field_csv(&points, &p)?;
    rec.record(&p)?;
    let max = global_maximum(&m, &search_params(opts))?;
    let p = dir.join("field_max.json");
    write_json(&max, &p)?;
    rec.record(&p)?;
    println!("N={n} seed={seed}: max f = {} at x = {}", max.m_star, max.x_star);
    Ok(())
}

pub fn maxima(opts: &Options) -> Result<()> {
    let cfg = run_config(opts, opts.single_n(150)?);
    let summary = refit(run_ensemble(&cfg)?, scale_k(opts))?;
    let rec = recorder("maxima", opts, json!({ "master_seed": cfg.master_seed }))?;
    let dir = opts.out_dir();
    write_summary(&summary, &rec, &dir, "maxima")?;
    let p = dir.join("summary.json");
    write_json(&SummaryJson::new(&summary, None), &p)?;
    rec.record(&p)?;
    println!(
        "N={} realizations={} failures={} mean={:.6} var={:?} correction={:?}",
        summary.n,
        summary.realizations,
        summary.failures.len(),
        summary.mean_max,
        summary.var_max,
        summary.correction
    );
    Ok(())
}

fn grid(opts: &Options) -> Result<Vec<f64>> {
    let (lo, hi, step) = DEFAULT_GRID;
    Ok(uniform_grid(
        opts.grid_lo.unwrap_or(lo),
        opts.grid_hi.unwrap_or(hi),
        opts.grid_step.unwrap_or(step),
    )?)
}

/// Acceptable deviation of the tabulated mass from one.
const NORM_TOL: f64 = 1e-4;

#[derive(Serialize)]
struct DensityDiagnostics {
    variant: Variant,
    k: f64,
    c: f64,
    contour_offset: f64,
    truncation: f64,
    norm_error: f64,
    mean: f64,
    variance: f64,
    grid_lo: f64,
    grid_hi: f64,
    points: usize,
}

fn predicted(opts: &Options, variant: Variant) -> Result<prediction::PredictedDensity> {
    let mf = MomentFunction::new(variant, scale_k(opts))?;
    let cfg = InversionConfig {
        contour_offset: opts.contour.unwrap_or(0.0),
        ..Default::default()
    };
    Ok(invert_to_density(&mf, &grid(opts)?, &cfg)?)
}

pub fn predict(opts: &Options) -> Result<()> {
    let variants = match opts.variant.as_deref().unwrap_or("both") {
        "both" => vec![Variant::YFull, Variant::YPrime],
        v => vec![v.parse::<Variant>()?],
    };
    let rec = recorder("predict", opts, json!(null))?;
    let dir = opts.out_dir();
    let mut worst: f64 = 0.0;
    for v in variants {
        let d = predicted(opts, v)?;
        let stem = match v {
            Variant::YFull => "density_y",
            Variant::YPrime => "density_y_prime",
        };
        let p = dir.join(format!("{stem}.csv"));
        d.write_csv(&p)?;
        rec.record(&p)?;
        let diag = DensityDiagnostics {
            variant: v,
            k: d.k,
            c: d.c,
            contour_offset: d.contour_offset,
            truncation: d.truncation,
            norm_error: d.norm_error,
            mean: d.mean,
            variance: d.variance,
            grid_lo: d.grid[0],
            grid_hi: *d.grid.last().unwrap(),
            points: d.grid.len(),
        };
        let p = dir.join(format!("{stem}.json"));
        write_json(&diag, &p)?;
        rec.record(&p)?;
        println!("{stem}: norm_error={:.3e} mean={:.10} variance={:.10}", d.norm_error, d.mean, d.variance);
        worst = worst.max(d.norm_error.abs());
    }
    if worst > NORM_TOL {
        bail!(gue_extremes::Error::Precision { what: "density normalization".into(), achieved: worst });
    }
    Ok(())
}

pub fn compare(opts: &Options) -> Result<()> {
    let summary = match &opts.maxima {
        Some(path) => {
            let n = match opts.n.as_deref() {
                Some([n]) => *n,
                _ => return Err(UsageError("compare --maxima needs the matrix size --n".into()).into()),
            };
            let maxima = ensemble::read_maxima_csv(path)?;
            let cfg = RunConfig { realizations: maxima.len().max(1), ..run_config(opts, n) };
            cfg.validate()?;
            summarize(&cfg, maxima, vec![], limiting_moments()?)?
        }
        None => run_ensemble(&run_config(opts, opts.single_n(600)?))?,
    };
    let summary = refit(summary, scale_k(opts))?;
    let pred = predicted(opts, Variant::YFull)?;
    let report = compare_distribution(&summary, &pred)?;
    let rec = recorder("compare", opts, json!({ "master_seed": summary.config.master_seed }))?;
    let dir = opts.out_dir();
    if opts.maxima.is_none() {
        write_summary(&summary, &rec, &dir, "maxima")?;
    }
    let p = dir.join("comparison.json");
    write_json(&SummaryJson::new(&summary, Some(&report)), &p)?;
    rec.record(&p)?;
    let p = dir.join("residuals.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["bin_center", "empirical", "predicted", "residual"])?;
    for r in &report.residuals {
        w.serialize((r.center, r.empirical, r.predicted, r.residual))?;
    }
    w.flush()?;
    rec.record(&p)?;
    println!(
        "N={} c*={:.4} s*={:.4} KS={:.5} L1={:.5}",
        summary.n, report.correction.c_star, report.correction.s_star, report.ks_statistic, report.l1_distance
    );
    Ok(())
}

pub fn check_selberg(opts: &Options) -> Result<()> {
    let samples = opts.samples.unwrap_or(200_000);
    let master = opts.seed.unwrap_or(0);
    let rec = recorder("check-selberg", opts, json!({ "master_seed": master }))?;
    let dir = opts.out_dir();

    let p = dir.join("selberg_mc.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["k", "a", "b", "gamma", "closed_form", "monte_carlo", "stderr", "z"])?;
    let mut worst_z: f64 = 0.0;
    let mut case = 0u64;
    for k in 1..=3 {
        for gamma in [-0.5, 0.1, 0.25] {
            for a in [0.0, 0.5, 1.0] {
                for b in [0.0, 0.5, 1.0] {
                    let sp = SelbergParams { k, a, b, gamma };
                    if sp.validate().is_err() {
                        continue;
                    }
                    let exact = selberg_closed_form(&sp)?.exp();
                    let (est, se) = selberg_monte_carlo(&sp, samples, realization_seed(master, case))?;
                    case += 1;
                    let z = if se > 0.0 { (est - exact) / se } else if (est - exact).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
                    worst_z = worst_z.max(z.abs());
                    w.serialize((k, a, b, gamma, exact, est, se, z))?;
                }
            }
        }
    }
    w.flush()?;
    rec.record(&p)?;

    let p = dir.join("selberg_exact.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["case", "closed_form", "exact", "residual"])?;
    let mut worst_exact: f64 = 0.0;
    for (name, sp, exact) in [
        ("k=1 a=0 b=0", SelbergParams { k: 1, a: 0.0, b: 0.0, gamma: 0.3 }, 1.0),
        ("k=2 a=0 b=0 |x-y|", SelbergParams { k: 2, a: 0.0, b: 0.0, gamma: -0.5 }, 1.0 / 3.0),
    ] {
        let v = selberg_closed_form(&sp)?.exp();
        worst_exact = worst_exact.max((v - exact).abs());
        w.serialize((name, v, exact, v - exact))?;
    }
    w.flush()?;
    rec.record(&p)?;
    println!("selberg: {case} Monte-Carlo cases, worst |z| = {worst_z:.2}; exact cases max residual {worst_exact:.1e}");
    if worst_z > 4.0 || worst_exact > 1e-12 {
        bail!(gue_extremes::Error::Precision { what: "Selberg checks".into(), achieved: worst_z });
    }
    Ok(())
}

pub fn check_duality(opts: &Options) -> Result<()> {
    let betas = opts.beta.clone().unwrap_or_else(|| vec![0.4, 0.65, 0.9]);
    let qs = opts.q.clone().unwrap_or_else(|| vec![0.0, 1.0, 2.0]);
    let rec = recorder("check-duality", opts, json!(null))?;
    let dir = opts.out_dir();

    let p = dir.join("duality.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["beta", "q", "s", "gap"])?;
    let mut worst_self_dual: f64 = 0.0;
    for &q in &qs {
        for &beta in &betas {
            for s in [0.05, 0.5, 1.0] {
                let gap = duality_gap(s, beta, q)?;
                if q == 1.0 {
                    worst_self_dual = worst_self_dual.max(gap);
                }
                w.serialize((beta, q, s, gap))?;
            }
        }
    }
    w.flush()?;
    rec.record(&p)?;

    let p = dir.join("recursion.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["beta", "q", "s", "residual"])?;
    let mut worst_rec: f64 = 0.0;
    for &beta in &betas {
        for &q in &qs {
            for s in [0.0, 0.35, 0.8, 1.4] {
                let r = recursion_residual(s, &ContinuationParams::gue(beta, q))?;
                worst_rec = worst_rec.max(r);
                w.serialize((beta, q, s, r))?;
            }
        }
    }
    w.flush()?;
    rec.record(&p)?;

    let p = dir.join("frozen.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["s", "frozen", "laplace", "relative_residual"])?;
    let mut worst_frozen: f64 = 0.0;
    for i in 0..=12 {
        let s = -0.75 + 0.25 * i as f64;
        let a = frozen_transform(s)?;
        let b = prediction::laplace_moment(Complex64::from(s), Variant::YFull)?.re;
        let r = (a / b - 1.0).abs();
        worst_frozen = worst_frozen.max(r);
        w.serialize((s, a, b, r))?;
    }
    w.flush()?;
    rec.record(&p)?;
    println!(
        "duality gap at q=1: {worst_self_dual:.1e}; recursion residual: {worst_rec:.1e}; frozen transform: {worst_frozen:.1e}"
    );
    if worst_self_dual > 1e-6 || worst_rec > 1e-7 || worst_frozen > 1e-9 {
        bail!(gue_extremes::Error::Precision {
            what: "continuation checks".into(),
            achieved: worst_self_dual.max(worst_rec).max(worst_frozen),
        });
    }
    Ok(())
}

pub fn check_specialfns(opts: &Options) -> Result<()> {
    let master = opts.seed.unwrap_or(0);
    let rec = recorder("check-specialfns", opts, json!({ "master_seed": master }))?;
    let p = opts.out_dir().join("specialfns.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["check", "value", "reference", "residual", "tolerance"])?;
    let mut failed = Vec::new();
    let mut row = |name: &str, value: f64, reference: f64, residual: f64, tol: f64| -> Result<()> {
        if !(residual.abs() <= tol) {
            failed.push(name.to_string());
        }
        w.serialize((name, value, reference, residual, tol))?;
        Ok(())
    };
    for x in [1.0, 2.0, 3.0] {
        let g = ln_barnes_g(x)?.exp();
        row(&format!("G({x})"), g, 1.0, g - 1.0, 1e-11)?;
    }
    let g6 = ln_barnes_g(6.0)?.exp();
    row("G(6)", g6, 288.0, g6 / 288.0 - 1.0, 1e-11)?;
    let gh = ln_barnes_g(0.5)?.exp();
    let closed = ln_barnes_g_half_closed_form().exp();
    row("G(1/2) vs Glaisher form", gh, closed, gh / closed - 1.0, 1e-10)?;

    let mut rng = rng_from_seed(master);
    let (mut dup, mut recur): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let x: f64 = rng.random_range(0.05..30.0);
        let d = ln_gamma(x)? + ln_gamma(x + 0.5)?
            - ((1.0 - 2.0 * x) * std::f64::consts::LN_2 + 0.5 * std::f64::consts::PI.ln() + ln_gamma(2.0 * x)?);
        dup = dup.max(d.abs());
        let z = Complex64::new(rng.random_range(0.2..12.0), rng.random_range(-15.0..15.0));
        let lhs = ln_barnes_g_complex(z + 1.0)?;
        let diff = lhs - ln_gamma_complex(z)? - ln_barnes_g_complex(z)?;
        let two_pi = 2.0 * std::f64::consts::PI;
        let diff = Complex64::new(diff.re, diff.im - two_pi * (diff.im / two_pi).round());
        recur = recur.max(diff.norm() / lhs.norm().max(1.0));
    }
    row("gamma duplication (max of 100)", dup, 0.0, dup, 1e-10)?;
    row("G recurrence (max of 100)", recur, 0.0, recur, 1e-10)?;

    let a = prediction::normalization_closed_form();
    let b = prediction::normalization_from_unit_mass()?;
    row("normalization C: closed form vs unit mass", a, b, a / b - 1.0, 1e-10)?;
    w.flush()?;
    rec.record(&p)?;
    if failed.is_empty() {
        println!("special functions: all checks within tolerance");
        Ok(())
    } else {
        bail!(gue_extremes::Error::Precision { what: format!("failed: {}", failed.join(", ")), achieved: f64::NAN })
    }
}

pub fn table1(opts: &Options) -> Result<()> {
    let sizes = opts.n.clone().unwrap_or_else(|| vec![150, 600, 1050]);
    let base = RunConfig { realizations: opts.realizations.unwrap_or(20_000), ..run_config(opts, sizes[0]) };
    let resamples = opts.bootstrap.unwrap_or(ensemble::BOOTSTRAP_RESAMPLES);
    let dir = opts.out_dir();
    let seeds: Vec<(usize, u64)> = sizes.iter().map(|&n| (n, ensemble::sweep_seed(base.master_seed, n))).collect();
    let rec = recorder("table1", opts, json!({ "master_seed": base.master_seed, "per_size": seeds }))?;
    let mut rows = Vec::new();
    for &n in &sizes {
        let cfg = RunConfig { n, master_seed: ensemble::sweep_seed(base.master_seed, n), ..base.clone() };
        let summary = refit(run_ensemble(&cfg)?, scale_k(opts))?;
        write_summary(&summary, &rec, &dir, &format!("maxima_n{n}"))?;
        let row = ensemble::table1_row(&summary, resamples)?;
        println!(
            "N={n}: c*={:.4} ± {:.4}  s*={:.4} ± {:.4}",
            row.c_star, row.stderr_c, row.s_star, row.stderr_s
        );
        rows.push(row);
    }
    let p = dir.join("table1.csv");
    write_table1_csv(&rows, &p)?;
    rec.record(&p)?;
    Ok(())
}
