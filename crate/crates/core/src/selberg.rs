//! Moments of the partition function Z_N(β) = (N/2) ∫ e^{β f_N(x)} ρ(x)^q dx,
//! their Selberg-integral form, the continuation to complex order through
//! G_β, and the self-duality check that singles out q = 1.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::prediction::{MomentFunction, Variant, DEFAULT_K};
use crate::sampler::rng_from_seed;
use crate::special::barnes::ln_barnes_g;
use crate::special::gamma::ln_gamma;
use crate::special::gbeta::{ln_barnes_g_beta, SpecialFnConfig};
use crate::special::LN_2PI;

const LN_2: f64 = std::f64::consts::LN_2;

/// ln C(α) with C(α) = 2^{2α²} G(α+1)² / G(2α+1).
pub fn ln_krasovsky_c(alpha: f64) -> Result<f64> {
    if !(alpha > -0.5) {
        return Err(Error::OutOfDomain(format!("C(alpha) needs alpha > -1/2, got {alpha}")));
    }
    Ok(2.0 * alpha * alpha * LN_2 + 2.0 * ln_barnes_g(alpha + 1.0)? - ln_barnes_g(2.0 * alpha + 1.0)?)
}

/// Log of the large-N asymptotics of E ∏_j |p_N(x_j)|^{2α_j}.
pub fn krasovsky_log_moment(points: &[(f64, f64)], n: usize) -> Result<f64> {
    for (i, &(x, _)) in points.iter().enumerate() {
        if points[i + 1..].iter().any(|p| p.0 == x) {
            return Err(Error::InvalidParameter(format!("coincident points at x = {x}")));
        }
    }
    let nf = n as f64;
    let mut total = 0.0;
    for (i, &(x, a)) in points.iter().enumerate() {
        if !(x.abs() < 1.0) {
            return Err(Error::OutOfDomain(format!("point {x} outside (-1, 1)")));
        }
        if a == 0.0 {
            continue;
        }
        total += ln_krasovsky_c(a)?
            + 0.5 * a * a * (1.0 - x * x).ln()
            + a * a * (0.5 * nf).ln()
            + a * nf * (2.0 * x * x - 1.0 - 2.0 * LN_2);
        for &(y, b) in &points[i + 1..] {
            if b != 0.0 {
                total -= 2.0 * a * b * (2.0 * (x - y).abs()).ln();
            }
        }
    }
    Ok(total)
}

/// S_k(a, b, -γ) = ∫_{[0,1]^k} ∏ x^a (1-x)^b ∏_{i<j} |x_i - x_j|^{-2γ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelbergParams {
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl SelbergParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("Selberg integral needs k >= 1".into()));
        }
        if !(self.a > -1.0 && self.b > -1.0) {
            return Err(Error::InvalidParameter(format!("need a, b > -1, got {self:?}")));
        }
        if self.k >= 2 {
            let km1 = (self.k - 1) as f64;
            let bound = (1.0 / self.k as f64).min((self.a + 1.0) / km1).min((self.b + 1.0) / km1);
            if !(self.gamma < bound) {
                return Err(Error::InvalidParameter(format!(
                    "Selberg integral diverges: gamma = {} must be below {bound}",
                    self.gamma
                )));
            }
        }
        Ok(())
    }
}

pub fn selberg_closed_form(p: &SelbergParams) -> Result<f64> {
    p.validate()?;
    let (k, g) = (p.k as f64, p.gamma);
    let mut total = 0.0;
    for j in 1..=p.k {
        let j = j as f64;
        total += ln_gamma(p.a + 1.0 - (j - 1.0) * g)? + ln_gamma(p.b + 1.0 - (j - 1.0) * g)?
            + ln_gamma(1.0 - j * g)?
            - ln_gamma(p.a + p.b + 2.0 - (k + j - 2.0) * g)?
            - ln_gamma(1.0 - g)?;
    }
    Ok(total)
}

/// Monte-Carlo estimate of S_k and its standard error.
///
/// For γ <= 0 this is the plain average over uniform points in [0,1]^k. For
/// γ > 0 the plain estimator has infinite variance once k >= 2 (the weight
/// blows up where points collide), so ordered points are drawn instead through
/// Dirichlet spacings whose inner exponents absorb the collision singularity,
/// and the integrand is reweighted by k!/density. Both estimators are unbiased.
pub fn selberg_monte_carlo(p: &SelbergParams, samples: usize, seed: u64) -> Result<(f64, f64)> {
    p.validate()?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let mut rng = rng_from_seed(seed);
    let k = p.k;
    let log_integrand = |x: &[f64]| -> f64 {
        let mut log_w = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            log_w += p.a * xj.ln() + p.b * (1.0 - xj).ln();
            for &xl in &x[j + 1..] {
                log_w -= 2.0 * p.gamma * (xj - xl).abs().ln();
            }
        }
        log_w
    };

    let spacing = (p.gamma > 0.0 && k >= 2).then(|| {
        let inner = 1.0 - 2.0 * p.gamma - p.gamma.min(0.5 * (1.0 - 2.0 * p.gamma));
        let mut alpha = vec![1.0; k + 1];
        for a in alpha.iter_mut().take(k).skip(1) {
            *a = inner;
        }
        alpha
    });
    let samplers = match &spacing {
        Some(alpha) => Some(
            alpha
                .iter()
                .map(|a| Gamma::new(*a, 1.0))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidParameter(format!("spacing sampler: {e}")))?,
        ),
        None => None,
    };
    let log_norm = match &spacing {
        Some(alpha) => {
            let mut v = ln_gamma(alpha.iter().sum())?;
            for a in alpha {
                v -= ln_gamma(*a)?;
            }
            // k! orderings of the points.
            v - ln_gamma(k as f64 + 1.0)?
        }
        None => 0.0,
    };

    let mut x = vec![0.0f64; k];
    let mut gaps = vec![0.0f64; k + 1];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let w = match (&spacing, &samplers) {
            (Some(alpha), Some(gam)) => {
                let mut total = 0.0;
                for (g, d) in gaps.iter_mut().zip(gam) {
                    *g = d.sample(&mut rng).max(f64::MIN_POSITIVE);
                    total += *g;
                }
                let mut log_density = log_norm;
                for (j, g) in gaps.iter_mut().enumerate() {
                    *g /= total;
                    log_density += (alpha[j] - 1.0) * g.ln();
                }
                // Work from the gaps directly: forming positions first would
                // round tiny gaps to exact collisions.
                let mut log_w = 0.0;
                for j in 0..k {
                    let left: f64 = gaps[..=j].iter().sum();
                    let right: f64 = gaps[j + 1..].iter().sum();
                    log_w += p.a * left.ln() + p.b * right.ln();
                    let mut d = 0.0;
                    for g in &gaps[j + 1..k] {
                        d += g;
                        log_w -= 2.0 * p.gamma * d.ln();
                    }
                }
                (log_w - log_density).exp()
            }
            _ => {
                for v in x.iter_mut() {
                    *v = rng.random::<f64>();
                }
                log_integrand(&x).exp()
            }
        };
        let delta = w - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (w - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Parameters of the continued moments: a = a1 + a2 β², b = b1 + b2 β².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationParams {
    pub beta: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub q: f64,
    pub special: SpecialFnConfig,
}

impl ContinuationParams {
    /// The GUE case: a1 = b1 = 1/2, a2 = b2 = q/2.
    pub fn gue(beta: f64, q: f64) -> Self {
        Self {
            beta,
            a1: 0.5,
            a2: 0.5 * q,
            b1: 0.5,
            b2: 0.5 * q,
            q,
            special: SpecialFnConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.q >= 0.0) {
            return Err(Error::InvalidParameter(format!("q must be non-negative, got {}", self.q)));
        }
        self.special.validate()
    }

    pub fn selberg_a(&self) -> f64 {
        self.a1 + self.a2 * self.beta * self.beta
    }

    pub fn selberg_b(&self) -> f64 {
        self.b1 + self.b2 * self.beta * self.beta
    }
}

/// Log of the asymptotic E Z_N(β)^k for integer 1 <= k < 1/β².
pub fn partition_moment_prediction(n: usize, k: usize, cp: &ContinuationParams) -> Result<f64> {
    cp.validate()?;
    let (beta, q) = (cp.beta, cp.q);
    let b2 = beta * beta;
    let kf = k as f64;
    if k == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1".into()));
    }
    if !(b2 * kf < 1.0) {
        return Err(Error::OutOfStrip(b2 * kf));
    }
    let ab = 0.5 * (b2 + q);
    let selberg = selberg_closed_form(&SelbergParams { k, a: ab, b: ab, gamma: b2 })?;
    Ok(kf * ((1.0 + b2) * (0.5 * n as f64).ln() + ln_krasovsky_c(beta)? + q * (2.0 / std::f64::consts::PI).ln())
        + (kf * (b2 + q + 1.0) - 2.0 * b2 * kf * (kf - 1.0)) * LN_2
        + selberg)
}

fn ln_gb(x: f64, beta: f64, cfg: &SpecialFnConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::OutOfDomain(format!("G_beta argument {x} is not positive")));
    }
    ln_barnes_g_beta(x, beta, cfg)
}

/// The eight G_β arguments of the continued moment: four numerators, four denominators.
fn continuation_arguments(s: f64, cp: &ContinuationParams) -> ([f64; 4], [f64; 4]) {
    let ContinuationParams { beta, a1, a2, b1, b2, .. } = *cp;
    let (sa, sb) = (a1 + b1, a2 + b2);
    let num = [
        beta * (s + 0.5 * (sb + 1.0)) + (2.0 + sa) / (2.0 * beta),
        beta * (s + 0.5 * sb) + (2.0 + sa) / (2.0 * beta),
        beta * (s + 0.5 * (sb + 1.0)) + (3.0 + sa) / (2.0 * beta),
        beta * (s + 0.5 * sb) + (3.0 + sa) / (2.0 * beta),
    ];
    let den = [
        beta * (s + a2) + (1.0 + a1) / beta,
        beta * (s + b2) + (1.0 + b1) / beta,
        beta * (s + 1.0 + sb) + (2.0 + sa) / beta,
        beta * (s - 1.0) + 1.0 / beta,
    ];
    (num, den)
}

/// ln M^G_β(s), the continuation of the moments E z^{1-s}.
pub fn moment_continuation(s: f64, cp: &ContinuationParams) -> Result<f64> {
    cp.validate()?;
    let ContinuationParams { beta, a1, a2, b1, b2, .. } = *cp;
    let big_b1 = 2.0 * beta * beta;
    let big_b2 = 2.0 * (a1 + b1 + 1.0) + beta * beta * (2.0 * a2 + 2.0 * b2 - 1.0);
    let mut total = -s * std::f64::consts::PI.ln()
        + (big_b1 * s * s + big_b2 * s) * LN_2
        + beta * beta * s * beta.ln();
    let (num, den) = continuation_arguments(s, cp);
    for x in num {
        total += ln_gb(x, beta, &cp.special)?;
    }
    for x in den {
        total -= ln_gb(x, beta, &cp.special)?;
    }
    Ok(total)
}

/// ln of the Γ-ratio that M(s)/M(s+1) must equal.
pub fn recursion_log_rhs(s: f64, cp: &ContinuationParams) -> Result<f64> {
    let ContinuationParams { beta, a1, a2, b1, b2, .. } = *cp;
    let g = beta * beta;
    let (sa, sb) = (a1 + b1, a2 + b2);
    Ok(ln_gamma(1.0 + a1 + g * (s + a2))? + ln_gamma(1.0 + b1 + g * (s + b2))?
        + ln_gamma(1.0 + g * (s - 1.0))?
        + ln_gamma(2.0 + sa + (s + 1.0 + sb) * g)?
        - ln_gamma(1.0 + g * (s + 0.5 + 0.5 * sb) + 0.5 * sa)?
        - ln_gamma(g * (s + 0.5 * (1.0 + sb)) + 0.5 * (sa + 3.0))?
        + std::f64::consts::PI.ln()
        - (2.0 * (1.0 + sa) + (4.0 * s + 1.0 + 2.0 * sb) * g) * LN_2
        - ln_gamma(1.0 + 0.5 * sa + g * (s + 0.5 * sb))?
        - ln_gamma(0.5 * (3.0 + sa) + g * (s + 0.5 * sb))?)
}

/// |ln M^G(s) - ln M^G(s+1) - ln RHS(s)|.
pub fn recursion_residual(s: f64, cp: &ContinuationParams) -> Result<f64> {
    let lhs = moment_continuation(s, cp)? - moment_continuation(s + 1.0, cp)?;
    Ok((lhs - recursion_log_rhs(s, cp)?).abs())
}

/// Relative mismatch between M^G(1-k)/M^G(1) and Γ(1-β²)^k S_k at integer k.
pub fn integer_moment_residual(k: usize, cp: &ContinuationParams) -> Result<f64> {
    let g = cp.beta * cp.beta;
    let continued = moment_continuation(1.0 - k as f64, cp)? - moment_continuation(1.0, cp)?;
    let selberg = selberg_closed_form(&SelbergParams {
        k,
        a: cp.selberg_a(),
        b: cp.selberg_b(),
        gamma: g,
    })? + k as f64 * ln_gamma(1.0 - g)?;
    Ok((continued - selberg).exp_m1().abs())
}

/// Residual of 1/G_β(β(s-1)+1/β) = Γ(1+β²(s-1)) (2π)^{(β-1)/2} β^{-1/2-β²(s-1)} / G_β(βs+1/β), in logs.
pub fn shift_identity_residual(s: f64, beta: f64, cfg: &SpecialFnConfig) -> Result<f64> {
    let g = beta * beta;
    let lhs = -ln_gb(beta * (s - 1.0) + 1.0 / beta, beta, cfg)?;
    let rhs = ln_gamma(1.0 + g * (s - 1.0))? + 0.5 * (beta - 1.0) * LN_2PI
        - (0.5 + g * (s - 1.0)) * beta.ln()
        - ln_gb(beta * s + 1.0 / beta, beta, cfg)?;
    Ok((lhs - rhs).abs())
}

/// s-dependent part of ln E Z^{1-σ} after the shift identity, for a1 = b1 = 1/2,
/// a2 = b2 = q/2; terms linear in σ are dropped except the 2^{(1+β²)(σ-1)} factor.
fn dual_shape(sigma: f64, beta: f64, q: f64, cfg: &SpecialFnConfig) -> Result<f64> {
    let mut cp = ContinuationParams::gue(beta, q);
    cp.special = *cfg;
    let g = beta * beta;
    let (num, mut den) = continuation_arguments(sigma, &cp);
    den[3] = beta * sigma + 1.0 / beta;
    let mut total = (1.0 + g) * (sigma - 1.0) * LN_2 + ln_gamma(1.0 + g * (sigma - 1.0))?;
    for x in num {
        total += ln_gb(x, beta, cfg)?;
    }
    for x in den {
        total -= ln_gb(x, beta, cfg)?;
    }
    Ok(total)
}

/// ln of the Laplace transform of p_β at s, up to the N-dependent scale.
pub fn dual_log_transform(s: f64, beta: f64, q: f64, cfg: &SpecialFnConfig) -> Result<f64> {
    let sigma = 1.0 + s / beta;
    Ok(dual_shape(sigma, beta, q, cfg)? - dual_shape(1.0, beta, q, cfg)? + ln_gamma(1.0 + s / beta)?)
}

/// |ln transform at β - ln transform at 1/β|.
pub fn duality_gap(s: f64, beta: f64, q: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    let cfg = SpecialFnConfig::default();
    Ok((dual_log_transform(s, beta, q, &cfg)? - dual_log_transform(s, 1.0 / beta, q, &cfg)?).abs())
}

/// The frozen (β = 1) transform K^s Γ(1+s)² G(s+7/2)² G(s+4) / (C G(s+3) G(s+6) G(s+2)),
/// cross-checked against the prediction module.
pub fn frozen_transform(s: f64) -> Result<f64> {
    if !(s > -1.0) {
        return Err(Error::OutOfStrip(s));
    }
    let mf = MomentFunction::standard(Variant::YFull)?;
    let ln_v = s * DEFAULT_K.ln() + 2.0 * ln_gamma(1.0 + s)? + 2.0 * ln_barnes_g(s + 3.5)?
        + ln_barnes_g(s + 4.0)?
        - ln_barnes_g(s + 3.0)?
        - ln_barnes_g(s + 6.0)?
        - ln_barnes_g(s + 2.0)?
        - mf.c.ln();
    let other = mf.ln_moment_real(s)?;
    if (ln_v - other).abs() > 1e-9 {
        return Err(Error::InternalConsistency(format!(
            "frozen transform {ln_v} disagrees with the predicted transform {other} at s = {s}"
        )));
    }
    Ok(ln_v.exp())
}
