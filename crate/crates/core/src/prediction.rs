//! Predicted law of the centered maximum.
//!
//! The two-sided Laplace transform of y is
//!
//! ```text
//!   E e^{sy} = (1/C) K^s Γ(s+1) Γ(s+3) G(s+7/2)² / (G(s+6) G(s+1)),   Re s > -1,
//! ```
//!
//! and y = g + y' with g a (min-convention) Gumbel variable whose transform is
//! Γ(1+s); the variant without Γ(s+1) describes y'. Densities come from the
//! Bromwich integral along Re s = c.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::barnes::{
    barnes_g_log_derivative, barnes_g_log_second_derivative, ln_barnes_g, ln_barnes_g_complex,
};
use crate::special::gamma::{digamma, ln_gamma, ln_gamma_complex, trigamma};
use crate::special::quad::gauss_legendre;
use crate::special::{glaisher, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    YFull,
    YPrime,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "y_full" | "full" | "y" => Ok(Variant::YFull),
            "y_prime" | "prime" => Ok(Variant::YPrime),
            other => Err(Error::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

pub const DEFAULT_K: f64 = 2.0 * std::f64::consts::PI;

/// C from its closed form in terms of Glaisher's constant.
pub fn normalization_closed_form() -> f64 {
    let pi = std::f64::consts::PI;
    (0.25f64).exp() * pi.powf(2.5) / (2f64.powf(9.0 + 11.0 / 12.0) * glaisher().powi(3))
}

/// C forced by E e^{0·y} = 1: Γ(3) G(7/2)² / G(6).
pub fn normalization_from_unit_mass() -> Result<f64> {
    Ok((ln_gamma(3.0)? + 2.0 * ln_barnes_g(3.5)? - ln_barnes_g(6.0)?).exp())
}

/// C, with the two routes cross-checked.
pub fn normalization_constant() -> Result<f64> {
    let closed = normalization_closed_form();
    let forced = normalization_from_unit_mass()?;
    if (closed - forced).abs() > 1e-8 * closed {
        return Err(Error::InternalConsistency(format!(
            "normalization routes disagree: {closed} vs {forced}"
        )));
    }
    Ok(closed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentFunction {
    pub k: f64,
    pub c: f64,
    pub variant: Variant,
}

impl MomentFunction {
    pub fn new(variant: Variant, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
        }
        Ok(Self { k, c: normalization_constant()?, variant })
    }

    pub fn standard(variant: Variant) -> Result<Self> {
        Self::new(variant, DEFAULT_K)
    }

    pub fn ln_moment(&self, s: Complex64) -> Result<Complex64> {
        if !(s.re > -1.0) {
            return Err(Error::OutOfStrip(s.re));
        }
        let mut v = s * self.k.ln() + ln_gamma_complex(s + 3.0)?
            + 2.0 * ln_barnes_g_complex(s + 3.5)?
            - ln_barnes_g_complex(s + 6.0)?
            - ln_barnes_g_complex(s + 1.0)?
            - self.c.ln();
        if self.variant == Variant::YFull {
            v += ln_gamma_complex(s + 1.0)?;
        }
        Ok(v)
    }

    pub fn moment(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.ln_moment(s)?.exp())
    }

    pub fn ln_moment_real(&self, s: f64) -> Result<f64> {
        Ok(self.ln_moment(Complex64::from(s))?.re)
    }

    /// Mean and variance from log-derivatives of Γ and G at s = 0.
    pub fn moments_analytic(&self) -> Result<(f64, f64)> {
        let mut mean = self.k.ln() + digamma(3.0)? + 2.0 * barnes_g_log_derivative(3.5)?
            - barnes_g_log_derivative(6.0)?
            - barnes_g_log_derivative(1.0)?;
        let mut var = trigamma(3.0)? + 2.0 * barnes_g_log_second_derivative(3.5)?
            - barnes_g_log_second_derivative(6.0)?
            - barnes_g_log_second_derivative(1.0)?;
        if self.variant == Variant::YFull {
            mean += digamma(1.0)?;
            var += trigamma(1.0)?;
        }
        Ok((mean, var))
    }

    /// Mean and variance from Richardson-extrapolated central differences.
    pub fn moments_finite_difference(&self) -> Result<(f64, f64)> {
        let l0 = self.ln_moment_real(0.0)?;
        let diffs = |h: f64| -> Result<(f64, f64)> {
            let (lp, lm) = (self.ln_moment_real(h)?, self.ln_moment_real(-h)?);
            Ok(((lp - lm) / (2.0 * h), (lp - 2.0 * l0 + lm) / (h * h)))
        };
        let (d1, d2) = diffs(1e-3)?;
        let (e1, e2) = diffs(5e-4)?;
        Ok(((4.0 * e1 - d1) / 3.0, (4.0 * e2 - d2) / 3.0))
    }
}

/// E e^{sy} with the default K.
pub fn laplace_moment(s: Complex64, variant: Variant) -> Result<Complex64> {
    MomentFunction::standard(variant)?.moment(s)
}

/// (mean, variance) of y or y', both routes computed and compared.
pub fn moments_y(mf: &MomentFunction) -> Result<(f64, f64)> {
    let (m_a, v_a) = mf.moments_analytic()?;
    let (m_f, v_f) = mf.moments_finite_difference()?;
    if (m_a - m_f).abs() > 1e-7 || (v_a - v_f).abs() > 1e-7 {
        return Err(Error::InternalConsistency(format!(
            "moment routes disagree: mean {m_a} vs {m_f}, variance {v_a} vs {v_f}"
        )));
    }
    Ok((m_a, v_a))
}

/// Mean of the min-convention Gumbel variable (-γ).
pub const GUMBEL_MEAN: f64 = -EULER_GAMMA;

/// Density of the min-convention Gumbel law, whose transform is Γ(1+s).
pub fn gumbel_density(g: f64) -> f64 {
    (g - g.exp()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InversionConfig {
    pub contour_offset: f64,
    /// The contour is cut where |M| drops below this fraction of |M(c)|.
    pub tail_tol: f64,
    pub t_max: f64,
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    /// Panels are halved until successive tabulations agree to this.
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            contour_offset: 0.0,
            tail_tol: 1e-16,
            t_max: 400.0,
            panel_width: 0.5,
            nodes_per_panel: 16,
            abs_tol: 1e-11,
            max_refinements: 6,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.contour_offset > -1.0
            && self.tail_tol > 0.0
            && self.t_max > 0.0
            && self.panel_width > 0.0
            && self.nodes_per_panel >= 2
            && self.abs_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid inversion config {self:?}")))
        }
    }
}

pub const DEFAULT_GRID: (f64, f64, f64) = (-32.0, 12.0, 0.01);

pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(hi > lo && step > 0.0) {
        return Err(Error::InvalidParameter(format!("bad grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

pub fn default_grid() -> Vec<f64> {
    uniform_grid(DEFAULT_GRID.0, DEFAULT_GRID.1, DEFAULT_GRID.2).expect("static grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedDensity {
    pub variant: Variant,
    pub k: f64,
    pub c: f64,
    pub grid: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub contour_offset: f64,
    pub truncation: f64,
    pub norm_error: f64,
    pub mean: f64,
    pub variance: f64,
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

impl PredictedDensity {
    /// ∫ e^{sy} pdf(y) dy over the tabulated grid.
    pub fn laplace_on_grid(&self, s: f64) -> f64 {
        let w: Vec<f64> = self.grid.iter().zip(&self.pdf).map(|(y, p)| (s * y).exp() * p).collect();
        trapezoid(&self.grid, &w)
    }

    /// Linear interpolation of the pdf (zero outside the grid).
    pub fn pdf_at(&self, y: f64) -> f64 {
        interpolate(&self.grid, &self.pdf, y, 0.0, 0.0)
    }

    pub fn cdf_at(&self, y: f64) -> f64 {
        interpolate(&self.grid, &self.cdf, y, 0.0, 1.0)
    }

    /// Inverse of the tabulated cdf (linear between grid points), u in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c < u);
        if j == 0 {
            return self.grid[0];
        }
        if j == self.cdf.len() {
            return self.grid[j - 1];
        }
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.grid[j - 1] + t * (self.grid[j] - self.grid[j - 1])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["y", "pdf", "cdf"])?;
        for i in 0..self.grid.len() {
            w.write_record(&[
                format!("{:.4}", self.grid[i]),
                format!("{:.12e}", self.pdf[i]),
                format!("{:.12e}", self.cdf[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64, below: f64, above: f64) -> f64 {
    if xs.is_empty() || x < xs[0] {
        return below;
    }
    if x > xs[xs.len() - 1] {
        return above;
    }
    let i = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Points t_j with weights w_j and values M(c + i t_j) on [0, T].
fn contour_nodes(
    mf: &MomentFunction,
    c: f64,
    t_cut: f64,
    panel_width: f64,
    nodes_per_panel: usize,
) -> Result<Vec<(f64, f64, Complex64)>> {
    let (x, w) = gauss_legendre(nodes_per_panel);
    let panels = (t_cut / panel_width).ceil().max(1.0) as usize;
    let h = t_cut / panels as f64;
    let mut out = Vec::with_capacity(panels * nodes_per_panel);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + 0.5 * h * xi;
            out.push((t, 0.5 * h * wi, mf.moment(Complex64::new(c, t))?));
        }
    }
    Ok(out)
}

fn tabulate(grid: &[f64], c: f64, nodes: &[(f64, f64, Complex64)]) -> Vec<f64> {
    grid.par_iter()
        .map(|&y| {
            let damp = (-c * y).exp();
            let sum: f64 = nodes
                .iter()
                .map(|(t, w, m)| {
                    let (sin, cos) = (t * y).sin_cos();
                    // Re[m e^{-ity}]
                    w * (m.re * cos + m.im * sin)
                })
                .sum();
            damp * sum / std::f64::consts::PI
        })
        .collect()
}

/// Density of y (or y') on `grid` by Bromwich inversion.
pub fn invert_to_density(
    mf: &MomentFunction,
    grid: &[f64],
    cfg: &InversionConfig,
) -> Result<PredictedDensity> {
    cfg.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    let c = cfg.contour_offset;
    let peak = mf.moment(Complex64::from(c))?.norm();
    // Cut the contour where the tail is negligible; |M| decays exponentially.
    let mut t_cut = 1.0;
    loop {
        let m = mf.moment(Complex64::new(c, t_cut))?.norm();
        if m < cfg.tail_tol * peak {
            break;
        }
        if t_cut >= cfg.t_max {
            return Err(Error::Precision {
                what: format!("contour truncation: |M| still {:.3e} of peak", m / peak),
                achieved: t_cut,
            });
        }
        t_cut = (t_cut + 0.5).min(cfg.t_max);
    }

    let mut width = cfg.panel_width;
    let mut pdf = tabulate(grid, c, &contour_nodes(mf, c, t_cut, width, cfg.nodes_per_panel)?);
    let mut converged = false;
    for _ in 0..cfg.max_refinements {
        width *= 0.5;
        let next = tabulate(grid, c, &contour_nodes(mf, c, t_cut, width, cfg.nodes_per_panel)?);
        // Compare before the e^{-cy} factor, which only amplifies roundoff.
        let diff = grid
            .iter()
            .zip(pdf.iter().zip(&next))
            .map(|(y, (a, b))| (a - b).abs() / (-c * y).exp().max(1.0))
            .fold(0.0, f64::max);
        pdf = next;
        if diff < cfg.abs_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Precision { what: "Bromwich quadrature did not settle".into(), achieved: width });
    }

    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in 1..grid.len() {
        acc += 0.5 * (grid[i] - grid[i - 1]) * (pdf[i] + pdf[i - 1]);
        cdf.push(acc);
    }
    let mass = acc;
    let yp: Vec<f64> = grid.iter().zip(&pdf).map(|(y, p)| y * p).collect();
    let mean = trapezoid(grid, &yp) / mass;
    let y2p: Vec<f64> = grid.iter().zip(&pdf).map(|(y, p)| (y - mean).powi(2) * p).collect();
    let variance = trapezoid(grid, &y2p) / mass;
    Ok(PredictedDensity {
        variant: mf.variant,
        k: mf.k,
        c: mf.c,
        grid: grid.to_vec(),
        pdf,
        cdf,
        contour_offset: c,
        truncation: t_cut,
        norm_error: (mass - 1.0).abs(),
        mean,
        variance,
    })
}

/// The y' density convolved with the min-convention Gumbel law, on the same grid.
pub fn convolve_with_gumbel(prime: &PredictedDensity) -> Vec<f64> {
    let g = &prime.grid;
    (0..g.len())
        .into_par_iter()
        .map(|i| {
            let vals: Vec<f64> = g.iter().zip(&prime.pdf).map(|(y, p)| gumbel_density(g[i] - y) * p).collect();
            trapezoid(g, &vals)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_routes_agree() {
        let a = normalization_closed_form();
        let b = normalization_from_unit_mass().unwrap();
        assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
        assert!(a > 0.0);
        assert!((a - 0.011_02).abs() < 1e-5);
        assert_eq!(normalization_constant().unwrap(), a);
    }

    #[test]
    fn unit_mass_at_origin() {
        for v in [Variant::YFull, Variant::YPrime] {
            let m = laplace_moment(Complex64::from(0.0), v).unwrap();
            assert!((m - 1.0).norm() < 1e-13, "{m}");
        }
        // Without C: 2 G(7/2)² / G(6) equals C itself.
        let c = normalization_constant().unwrap();
        let raw = (2f64.ln() + 2.0 * ln_barnes_g(3.5).unwrap() - ln_barnes_g(6.0).unwrap()).exp();
        assert!((raw - c).abs() < 1e-12);
    }

    #[test]
    fn value_at_one_via_recurrences() {
        let mf = MomentFunction::standard(Variant::YFull).unwrap();
        let direct = mf.moment(Complex64::from(1.0)).unwrap().re;
        // G(9/2) = Γ(7/2) G(7/2), G(7) = Γ(6) G(6) = 120·288, G(2) = 1, Γ(2)Γ(4) = 6.
        let g45 = ln_gamma(3.5).unwrap() + ln_barnes_g(3.5).unwrap();
        let reduced = (DEFAULT_K.ln() + 6f64.ln() + 2.0 * g45 - (120.0f64 * 288.0).ln()).exp() / mf.c;
        assert!((direct - reduced).abs() < 1e-9 * reduced, "{direct} vs {reduced}");
    }

    #[test]
    fn strip_boundary() {
        let mf = MomentFunction::standard(Variant::YFull).unwrap();
        assert!(mf.moment(Complex64::new(-0.999, 0.0)).unwrap().re.is_finite());
        assert!(mf.moment(Complex64::new(-0.999, 3.0)).unwrap().norm().is_finite());
        assert!(matches!(mf.moment(Complex64::new(-1.0, 0.0)), Err(Error::OutOfStrip(_))));
        assert!(MomentFunction::new(Variant::YFull, -1.0).is_err());
    }

    #[test]
    fn characteristic_function_is_bounded() {
        for v in [Variant::YFull, Variant::YPrime] {
            let mf = MomentFunction::standard(v).unwrap();
            for i in 1..200 {
                let m = mf.moment(Complex64::new(0.0, 0.1 * i as f64)).unwrap().norm();
                assert!(m <= 1.0 + 1e-13);
            }
        }
    }

    #[test]
    fn moment_routes_and_gumbel_cumulants() {
        let full = MomentFunction::standard(Variant::YFull).unwrap();
        let prime = MomentFunction::standard(Variant::YPrime).unwrap();
        let (mf, vf) = moments_y(&full).unwrap();
        let (mp, vp) = moments_y(&prime).unwrap();
        assert!(vf > 0.0 && vp > 0.0);
        assert!((mf - mp - GUMBEL_MEAN).abs() < 1e-7);
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((vf - vp - pi2_6).abs() < 1e-7);
    }

    #[test]
    fn gumbel_density_normalized_with_mean_minus_gamma() {
        let grid = uniform_grid(-40.0, 5.0, 0.001).unwrap();
        let p: Vec<f64> = grid.iter().map(|g| gumbel_density(*g)).collect();
        assert!((trapezoid(&grid, &p) - 1.0).abs() < 1e-10);
        let gp: Vec<f64> = grid.iter().zip(&p).map(|(g, p)| g * p).collect();
        assert!((trapezoid(&grid, &gp) - GUMBEL_MEAN).abs() < 1e-8);
    }

    #[test]
    fn grid_construction() {
        let g = default_grid();
        assert_eq!(g.len(), 4401);
        assert_eq!(g[0], -32.0);
        assert!((g[4400] - 12.0).abs() < 1e-12);
        assert!(uniform_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("y_full".parse::<Variant>().unwrap(), Variant::YFull);
        assert_eq!("Y-PRIME".parse::<Variant>().unwrap(), Variant::YPrime);
        assert!("z".parse::<Variant>().is_err());
    }
}
