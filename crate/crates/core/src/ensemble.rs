//! Ensemble runs over independent realizations, the two-moment affine
//! correction, comparison with the predicted law, and the covariance probe.
//!
//! Every realization draws its matrix from `realization_seed(master, i)`, and
//! results are gathered in index order before any reduction, so a run is
//! bit-for-bit reproducible for any number of worker threads.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charpoly::CharPoly;
use crate::error::{Error, Result};
use crate::prediction::{moments_y, MomentFunction, PredictedDensity, Variant};
use crate::sampler::{realization_seed, rng_from_seed, sample_tridiagonal};
use crate::search::{global_maximum, SearchParams};

/// At most one failed search per this many realizations.
pub const FAILURE_BUDGET: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub search: SearchParams,
    /// Thread count, 0 for the rayon default. Results do not depend on it.
    #[serde(skip_serializing)]
    pub workers: usize,
    /// Recorded in the metadata sidecar rather than in the results.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    /// Histogram of the corrected maxima y*.
    pub histogram_lo: f64,
    pub histogram_hi: f64,
    pub bin_width: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 150,
            realizations: 1000,
            master_seed: 0,
            search: SearchParams::default(),
            workers: 0,
            output_dir: PathBuf::from("out"),
            histogram_lo: -16.0,
            histogram_hi: 8.0,
            bin_width: 0.1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n must be at least 2, got {}", self.n)));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidParameter("realizations must be at least 1".into()));
        }
        if !(self.bin_width > 0.0) {
            return Err(Error::InvalidParameter(format!("bin_width must be positive, got {}", self.bin_width)));
        }
        if !(self.histogram_lo < self.histogram_hi) {
            return Err(Error::InvalidParameter(format!(
                "histogram range [{}, {}] is empty",
                self.histogram_lo, self.histogram_hi
            )));
        }
        self.search.validate()
    }

    /// Runs `f` on a pool with the configured thread count.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// 2 log N - (3/2) log log N.
pub fn leading_order(n: usize) -> f64 {
    let l = (n as f64).ln();
    2.0 * l - 1.5 * l.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub index: usize,
    pub seed: u64,
    pub x_star: f64,
    pub m_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRealization {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

/// Shift and scale mapping a maximum M to y* = (L_N - M + c*)(1 + s*).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineCorrection {
    pub c_star: f64,
    pub s_star: f64,
}

impl AffineCorrection {
    pub fn apply(&self, n: usize, m_star: f64) -> f64 {
        (leading_order(n) - m_star + self.c_star) * (1.0 + self.s_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub count: u64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    /// Samples falling outside [lo, hi); the density is normalized over the rest.
    pub outside: u64,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !(lo < hi) {
            return Err(Error::InvalidParameter(format!("bad histogram range [{lo}, {hi}) / {bin_width}")));
        }
        let nbins = ((hi - lo) / bin_width).round().max(1.0) as usize;
        let mut counts = vec![0u64; nbins];
        let mut outside = 0;
        for &v in values {
            let j = ((v - lo) / bin_width).floor();
            if j >= 0.0 && (j as usize) < nbins {
                counts[j as usize] += 1;
            } else {
                outside += 1;
            }
        }
        let inside = values.len() as u64 - outside;
        if inside == 0 {
            return Err(Error::DegenerateStatistics("no samples inside the histogram range".into()));
        }
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(j, count)| HistogramBin {
                center: lo + (j as f64 + 0.5) * bin_width,
                count,
                density: count as f64 / (inside as f64 * bin_width),
            })
            .collect();
        Ok(Self { lo, bin_width, bins, outside })
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.bins.len() as f64 * self.bin_width
    }

    /// bin_width · Σ density; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.bin_width * self.bins.iter().map(|b| b.density).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: RunConfig,
    pub n: usize,
    pub realizations: usize,
    pub maxima: Vec<Realization>,
    pub failures: Vec<FailedRealization>,
    pub mean_max: f64,
    /// Unbiased sample variance; `None` with fewer than two maxima.
    pub var_max: Option<f64>,
    /// Moments of the limiting law the correction was fitted to.
    pub target_moments: (f64, f64),
    pub correction: Option<AffineCorrection>,
    pub histogram: Option<Histogram>,
}

impl EnsembleSummary {
    pub fn degenerate(&self) -> bool {
        self.correction.is_none()
    }

    pub fn m_values(&self) -> Vec<f64> {
        self.maxima.iter().map(|r| r.m_star).collect()
    }

    /// Maxima mapped through the fitted correction.
    pub fn corrected(&self) -> Result<Vec<f64>> {
        let corr = self.correction.ok_or_else(|| {
            Error::DegenerateStatistics("fewer than two maxima; no correction fitted".into())
        })?;
        Ok(self.maxima.iter().map(|r| corr.apply(self.n, r.m_star)).collect())
    }
}

/// Mean and unbiased variance (`None` for fewer than two values).
pub fn mean_var(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var))
}

/// Method-of-moments fit: matches the mean and variance of y* to `moments`.
pub fn fit_affine_correction(
    n: usize,
    mean_max: f64,
    var_max: f64,
    moments: (f64, f64),
) -> Result<AffineCorrection> {
    let (mean_y, var_y) = moments;
    if !(var_max > 0.0) || !var_max.is_finite() {
        return Err(Error::DegenerateStatistics(format!("variance of the maxima is {var_max}")));
    }
    if !(var_y > 0.0) {
        return Err(Error::InvalidParameter(format!("target variance must be positive, got {var_y}")));
    }
    let s_star = (var_y / var_max).sqrt() - 1.0;
    let c_star = mean_y / (s_star + 1.0) - (leading_order(n) - mean_max);
    Ok(AffineCorrection { c_star, s_star })
}

/// Mean and variance of the full limiting law y.
pub fn limiting_moments() -> Result<(f64, f64)> {
    moments_y(&MomentFunction::standard(Variant::YFull)?)
}

/// Builds the summary for a set of maxima (already in index order).
pub fn summarize(
    cfg: &RunConfig,
    maxima: Vec<Realization>,
    failures: Vec<FailedRealization>,
    moments: (f64, f64),
) -> Result<EnsembleSummary> {
    if maxima.is_empty() {
        return Err(Error::DegenerateStatistics("no successful realizations".into()));
    }
    let m: Vec<f64> = maxima.iter().map(|r| r.m_star).collect();
    let (mean_max, var_max) = mean_var(&m);
    let correction = match var_max {
        Some(v) if v > 0.0 => Some(fit_affine_correction(cfg.n, mean_max, v, moments)?),
        _ => None,
    };
    let histogram = match correction {
        Some(c) => {
            let y: Vec<f64> = m.iter().map(|&v| c.apply(cfg.n, v)).collect();
            Some(Histogram::new(&y, cfg.histogram_lo, cfg.histogram_hi, cfg.bin_width)?)
        }
        None => None,
    };
    Ok(EnsembleSummary {
        config: cfg.clone(),
        n: cfg.n,
        realizations: cfg.realizations,
        maxima,
        failures,
        mean_max,
        var_max,
        target_moments: moments,
        correction,
        histogram,
    })
}

/// Samples, searches and aggregates `cfg.realizations` matrices.
pub fn run_ensemble(cfg: &RunConfig) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let moments = limiting_moments()?;
    let outcomes: Vec<std::result::Result<Realization, FailedRealization>> = cfg.install(|| {
        (0..cfg.realizations)
            .into_par_iter()
            .map(|index| {
                let seed = realization_seed(cfg.master_seed, index as u64);
                sample_tridiagonal(cfg.n, seed)
                    .and_then(|m| global_maximum(&m, &cfg.search))
                    .map(|r| Realization { index, seed, x_star: r.x_star, m_star: r.m_star })
                    .map_err(|e| FailedRealization { index, seed, message: e.to_string() })
            })
            .collect()
    })?;
    let mut maxima = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => maxima.push(r),
            Err(f) => failures.push(f),
        }
    }
    if failures.len() * FAILURE_BUDGET > cfg.realizations {
        return Err(Error::SearchFailure(format!(
            "{} of {} realizations failed (first: {})",
            failures.len(),
            cfg.realizations,
            failures[0].message
        )));
    }
    summarize(cfg, maxima, failures, moments)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinResidual {
    pub center: f64,
    pub empirical: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub samples: usize,
    pub correction: AffineCorrection,
    pub ks_statistic: f64,
    /// Σ bin_width · |empirical - predicted| over the histogram range.
    pub l1_distance: f64,
    pub residuals: Vec<BinResidual>,
}

/// sup |F_n - F| for the empirical distribution of `samples`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Compares the corrected maxima with a predicted law.
pub fn compare_distribution(summary: &EnsembleSummary, predicted: &PredictedDensity) -> Result<ComparisonReport> {
    let correction = summary.correction.ok_or_else(|| {
        Error::DegenerateStatistics("the summary has no fitted correction".into())
    })?;
    let hist = summary.histogram.as_ref().ok_or_else(|| {
        Error::DegenerateStatistics("the summary has no histogram".into())
    })?;
    let (g0, g1) = match (predicted.grid.first(), predicted.grid.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidParameter("empty predicted grid".into())),
    };
    if hist.lo < g0 - 1e-12 || hist.hi() > g1 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "histogram range [{}, {}] is not covered by the predicted grid [{g0}, {g1}]",
            hist.lo,
            hist.hi()
        )));
    }
    let y = summary.corrected()?;
    let ks = ks_statistic(&y, |v| predicted.cdf_at(v));
    // Bin averages of the predicted density, from the tabulated cdf.
    let residuals: Vec<BinResidual> = hist
        .bins
        .iter()
        .map(|b| {
            let lo = b.center - 0.5 * hist.bin_width;
            let p = (predicted.cdf_at(lo + hist.bin_width) - predicted.cdf_at(lo)) / hist.bin_width;
            BinResidual { center: b.center, empirical: b.density, predicted: p, residual: b.density - p }
        })
        .collect();
    let l1 = hist.bin_width * residuals.iter().map(|r| r.residual.abs()).sum::<f64>();
    Ok(ComparisonReport { samples: y.len(), correction, ks_statistic: ks, l1_distance: l1, residuals })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub x: f64,
    pub y: f64,
    pub separation: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// -2 log(2|x - y|)
    pub reference: f64,
}

/// Monte-Carlo covariance of f_N at the given pairs of points.
pub fn covariance_probe(
    n: usize,
    pairs: &[(f64, f64)],
    realizations: usize,
    seed: u64,
) -> Result<Vec<CovarianceRow>> {
    if realizations < 2 {
        return Err(Error::DegenerateStatistics("need at least two realizations".into()));
    }
    for &(x, y) in pairs {
        if !(x.abs() < 1.0 && y.abs() < 1.0) || x == y {
            return Err(Error::OutOfDomain(format!("pair ({x}, {y}) must be distinct points of (-1, 1)")));
        }
    }
    let points: Vec<f64> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    let values: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let m = sample_tridiagonal(n, realization_seed(seed, i as u64))?;
            let mut out = vec![0.0; points.len()];
            CharPoly::new(&m).field_many(&points, &mut out);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let r = realizations as f64;
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(p, &(x, y))| {
            let a: Vec<f64> = values.iter().map(|v| v[2 * p]).collect();
            let b: Vec<f64> = values.iter().map(|v| v[2 * p + 1]).collect();
            let (ma, _) = mean_var(&a);
            let (mb, _) = mean_var(&b);
            let prods: Vec<f64> = a.iter().zip(&b).map(|(u, v)| (u - ma) * (v - mb)).collect();
            let (mp, vp) = mean_var(&prods);
            let separation = (x - y).abs();
            CovarianceRow {
                x,
                y,
                separation,
                empirical: mp * r / (r - 1.0),
                stderr: (vp.unwrap_or(0.0) / r).sqrt(),
                reference: -2.0 * (2.0 * separation).ln(),
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: usize,
    pub realizations: usize,
    pub c_star: f64,
    pub s_star: f64,
    pub stderr_c: f64,
    pub stderr_s: f64,
    pub mean_max: f64,
    pub var_max: f64,
}

/// Bootstrap standard errors of (c*, s*) by resampling the maxima.
pub fn bootstrap_correction(
    n: usize,
    m_values: &[f64],
    moments: (f64, f64),
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if m_values.len() < 2 || resamples < 2 {
        return Err(Error::DegenerateStatistics("bootstrap needs two maxima and two resamples".into()));
    }
    let fits: Vec<AffineCorrection> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(realization_seed(seed, b as u64));
            let draw: Vec<f64> =
                (0..m_values.len()).map(|_| m_values[rng.random_range(0..m_values.len())]).collect();
            let (mean, var) = mean_var(&draw);
            fit_affine_correction(n, mean, var.unwrap_or(0.0), moments)
        })
        .collect::<Result<_>>()?;
    let c: Vec<f64> = fits.iter().map(|f| f.c_star).collect();
    let s: Vec<f64> = fits.iter().map(|f| f.s_star).collect();
    Ok((mean_var(&c).1.unwrap().sqrt(), mean_var(&s).1.unwrap().sqrt()))
}

/// Master seed for size `n` in a sweep, so different sizes are independent.
pub fn sweep_seed(master_seed: u64, n: usize) -> u64 {
    realization_seed(master_seed ^ 0x7461_626c_6531_0000, n as u64)
}

pub const BOOTSTRAP_RESAMPLES: usize = 400;

pub fn table1_row(summary: &EnsembleSummary, resamples: usize) -> Result<Table1Row> {
    let corr = summary.correction.ok_or_else(|| {
        Error::DegenerateStatistics(format!("no correction fitted at N = {}", summary.n))
    })?;
    let (stderr_c, stderr_s) = bootstrap_correction(
        summary.n,
        &summary.m_values(),
        summary.target_moments,
        resamples,
        summary.config.master_seed,
    )?;
    Ok(Table1Row {
        n: summary.n,
        realizations: summary.maxima.len(),
        c_star: corr.c_star,
        s_star: corr.s_star,
        stderr_c,
        stderr_s,
        mean_max: summary.mean_max,
        var_max: summary.var_max.unwrap_or(f64::NAN),
    })
}

/// Runs one ensemble per size and fits the correction for each.
pub fn table1(sizes: &[usize], base: &RunConfig) -> Result<Vec<(EnsembleSummary, Table1Row)>> {
    sizes
        .iter()
        .map(|&n| {
            let cfg = RunConfig { n, master_seed: sweep_seed(base.master_seed, n), ..base.clone() };
            let summary = run_ensemble(&cfg)?;
            let row = table1_row(&summary, BOOTSTRAP_RESAMPLES)?;
            Ok((summary, row))
        })
        .collect()
}

/// (a - b) / √(se_a² + se_b²)
pub fn separation_in_stderr(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    (a - b) / se_a.hypot(se_b)
}

fn float(v: f64) -> String {
    format!("{v}")
}

pub fn write_maxima_csv(summary: &EnsembleSummary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "seed", "x_star", "m_star"])?;
    for r in &summary.maxima {
        w.write_record([r.index.to_string(), r.seed.to_string(), float(r.x_star), float(r.m_star)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a maxima file back, in file order.
pub fn read_maxima_csv(path: &Path) -> Result<Vec<Realization>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_histogram_csv(hist: &Histogram, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_center", "count", "density"])?;
    for b in &hist.bins {
        w.write_record([float(b.center), b.count.to_string(), float(b.density)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table1_csv(rows: &[Table1Row], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["N", "c_star", "s_star", "stderr_c", "stderr_s"])?;
    for r in rows {
        w.write_record([r.n.to_string(), float(r.c_star), float(r.s_star), float(r.stderr_c), float(r.stderr_s)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field_csv(points: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "f"])?;
    for &(x, f) in points {
        w.write_record([float(x), float(f)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_normalization() {
        let v: Vec<f64> = (0..1000).map(|i| -3.0 + 0.0071 * i as f64).collect();
        let h = Histogram::new(&v, -2.0, 2.0, 0.1).unwrap();
        assert_eq!(h.bins.len(), 40);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(h.outside + h.bins.iter().map(|b| b.count).sum::<u64>(), 1000);
    }

    #[test]
    fn matched_variance_gives_zero_scale() {
        let c = fit_affine_correction(100, 7.0, 3.5, (-0.8, 3.5)).unwrap();
        assert!(c.s_star.abs() < 1e-15);
        assert!(fit_affine_correction(100, 7.0, 0.0, (-0.8, 3.5)).is_err());
    }

    #[test]
    fn ks_of_exact_quantiles() {
        // Midpoint quantiles of U(0,1) sit at distance 1/(2n).
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&s, |x| x) - 0.005).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { realizations: 0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { bin_width: 0.0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { histogram_lo: 1.0, histogram_hi: 1.0, ..Default::default() }.validate().is_err());
    }
}
