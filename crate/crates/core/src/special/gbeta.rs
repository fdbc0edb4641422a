//! The two-parameter Barnes function G_β, evaluated from its integral
//! representation
//!
//! ```text
//! ln G_β(x) = (x - Q/2)/2 · ln 2π
//!           + ∫₀^∞ dt/t [ (e^{-Qt/2} - e^{-xt}) / ((1 - e^{-βt})(1 - e^{-t/β}))
//!                         + e^{-t}/2 · (Q/2 - x)² + (Q/2 - x)/t ],   Q = β + 1/β.
//! ```
//!
//! The bracket vanishes like O(t) at the origin, but its three pieces are each
//! O(1/t); below `t_split` the integrand is replaced by its Taylor series,
//! which is generated numerically by power-series arithmetic. Beyond the
//! truncation point the integrand is `(Q/2 - x)/t²` up to exponentially small
//! terms, and that tail is added in closed form.

use super::quad;
use super::LN_2PI;
use crate::error::{Error, Result};

/// Tunables for the G_β quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnConfig {
    pub quad_rel_tol: f64,
    pub t_split: f64,
    /// Upper truncation of the integral; chosen from the decay rate when `None`.
    pub t_cut: Option<f64>,
    /// Number of Taylor terms used below `t_split`.
    pub series_terms: usize,
}

impl Default for SpecialFnConfig {
    fn default() -> Self {
        Self { quad_rel_tol: 1e-12, t_split: 1e-3, t_cut: None, series_terms: 8 }
    }
}

impl SpecialFnConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.quad_rel_tol > 0.0
            && self.t_split > 0.0
            && self.series_terms >= 1
            && self.t_cut.is_none_or(|c| c > self.t_split);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid special-function config {self:?}")))
        }
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// Taylor coefficients h_k of the integrand h(t) = bracket(t)/t around t = 0.
fn integrand_series(x: f64, beta: f64, terms: usize) -> Vec<f64> {
    let q_half = 0.5 * (beta + 1.0 / beta);
    let u = q_half - x;
    let len = terms + 3;
    let fact = factorials(len + 1);

    // (1 - e^{-ct})/t = sum_k (-1)^k c^{k+1} t^k / (k+1)!
    let one_minus_exp_over_t = |c: f64| -> Vec<f64> {
        (0..len)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * c.powi(k as i32 + 1) / fact[k + 1]
            })
            .collect()
    };
    let e1 = one_minus_exp_over_t(beta);
    let e2 = one_minus_exp_over_t(1.0 / beta);
    let mut denom = vec![0.0; len];
    for i in 0..len {
        for j in 0..len - i {
            denom[i + j] += e1[i] * e2[j];
        }
    }
    // (e^{-Qt/2} - e^{-xt})/t
    let numer: Vec<f64> = (0..len)
        .map(|k| ((-q_half).powi(k as i32 + 1) - (-x).powi(k as i32 + 1)) / fact[k + 1])
        .collect();
    // ratio = numer / denom, so the first bracket term is ratio(t)/t.
    let mut ratio = vec![0.0; len];
    for k in 0..len {
        let mut acc = numer[k];
        for j in 1..=k {
            acc -= denom[j] * ratio[k - j];
        }
        ratio[k] = acc / denom[0];
    }
    // ratio[0] = -u cancels the u/t term; ratio[1] + u²/2 = 0 makes the
    // bracket O(t).
    (0..terms)
        .map(|k| {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            ratio[k + 2] + 0.5 * u * u * sign / fact[k + 1]
        })
        .collect()
}

fn integrand(x: f64, beta: f64, t: f64) -> f64 {
    let u = 0.5 * (beta + 1.0 / beta) - x;
    let first = (-x * t).exp() * (-u * t).exp_m1() / ((-beta * t).exp_m1() * (-t / beta).exp_m1());
    (first + 0.5 * u * u * (-t).exp() + u / t) / t
}

/// ln G_β(x) for x > 0, β > 0.
pub fn ln_barnes_g_beta(x: f64, beta: f64, cfg: &SpecialFnConfig) -> Result<f64> {
    cfg.validate()?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::OutOfDomain(format!("G_beta needs x > 0, got {x}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("G_beta needs beta > 0, got {beta}")));
    }
    let q_half = 0.5 * (beta + 1.0 / beta);
    let u = q_half - x;
    let ts = cfg.t_split;

    let series = integrand_series(x, beta, cfg.series_terms);
    let head: f64 = series
        .iter()
        .enumerate()
        .map(|(k, c)| c * ts.powi(k as i32 + 1) / (k + 1) as f64)
        .sum();

    let rate = x.min(1.0);
    let t_cut = cfg.t_cut.unwrap_or_else(|| ((40.0 + (1.0 + u * u).ln()) / rate).max(10.0 * ts));
    let mut breaks = vec![ts];
    let mut b = ts * 10.0;
    while b < 1.0 && b < t_cut {
        breaks.push(b);
        b *= 10.0;
    }
    let mut b = 1.0;
    while b < t_cut {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(t_cut);

    let (body, _) = quad::integrate(
        |t| integrand(x, beta, t),
        &breaks,
        // The bracket cancels O(1/t) terms, so roundoff sets an absolute floor.
        0.5 * cfg.quad_rel_tol,
        cfg.quad_rel_tol,
        20_000,
    )
    .map_err(|e| match e {
        Error::Precision { achieved, .. } => Error::Precision {
            what: format!("G_beta quadrature at x={x}, beta={beta}"),
            achieved,
        },
        other => other,
    })?;

    Ok(0.5 * (x - q_half) * LN_2PI + head + body + u / t_cut)
}
