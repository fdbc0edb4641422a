//! Taylor expansions about 1 for ln Γ and ln G on the real line.
//!
//! ```text
//! ln Γ(1+z) = -γ z + Σ_{k≥2} (-1)^k ζ(k) z^k / k
//! ln G(1+z) = z (ln 2π - 1)/2 - (1+γ) z²/2 + Σ_{k≥3} (-1)^{k-1} ζ(k-1) z^k / k
//! ```
//!
//! Used for |z| <= 1/2, where they are accurate to a few ulp and free of the
//! cancellation that the large-argument expansions suffer after shifting.

use std::sync::OnceLock;

use super::{EULER_GAMMA, LN_2PI};

const MAX_ORDER: usize = 64;

/// ζ(k) for k = 0..=MAX_ORDER (entries 0 and 1 unused).
fn zeta_table() -> &'static [f64; MAX_ORDER + 1] {
    static TABLE: OnceLock<[f64; MAX_ORDER + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, v) in t.iter_mut().enumerate().skip(2) {
            *v = zeta_integer(k as i32);
        }
        t
    })
}

/// ζ(k), k >= 2: partial sum plus Euler-Maclaurin tail.
pub fn zeta_integer(k: i32) -> f64 {
    const J: i32 = 50;
    // B_{2i} / (2i)!
    const B: [f64; 5] = [
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40_320.0,
        5.0 / 66.0 / 3_628_800.0,
    ];
    let s = k as f64;
    let jf = J as f64;
    let mut sum: f64 = (1..J).rev().map(|j| (j as f64).powi(-k)).sum();
    sum += jf.powf(1.0 - s) / (s - 1.0) + 0.5 * jf.powf(-s);
    // Σ B_{2i}/(2i)! · s(s+1)…(s+2i-2) · J^{-s-2i+1}
    let mut rising = s;
    for (i, b) in B.iter().enumerate() {
        let p = 2 * i as i32 + 1;
        sum += b * rising * jf.powi(-k - p);
        rising *= (s + p as f64) * (s + p as f64 + 1.0);
    }
    sum
}

fn check(z: f64) {
    debug_assert!(z.abs() <= 0.5 + 1e-12, "series used outside |z| <= 1/2: {z}");
}

/// ln Γ(1+z) for |z| <= 1/2.
pub fn ln_gamma_1p(z: f64) -> f64 {
    check(z);
    let zeta = zeta_table();
    let mut acc = 0.0;
    for k in (2..=MAX_ORDER).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * zeta[k] / k as f64;
    }
    acc * z * z - EULER_GAMMA * z
}

/// ln G(1+z) for |z| <= 1/2.
pub fn ln_barnes_g_1p(z: f64) -> f64 {
    check(z);
    let zeta = zeta_table();
    let mut acc = 0.0;
    for k in (3..=MAX_ORDER).rev() {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc = acc * z + sign * zeta[k - 1] / k as f64;
    }
    acc * z * z * z + 0.5 * (LN_2PI - 1.0) * z - 0.5 * (1.0 + EULER_GAMMA) * z * z
}

/// Splits x > 0 as x = 1 + z + m with |z| <= 1/2 and m >= -1.
fn split(x: f64) -> (f64, i64) {
    let m = (x - 1.0).round();
    (x - 1.0 - m, m as i64)
}

/// ln Γ(x) for moderate x > 0 via the series and exact shifts.
pub fn ln_gamma_real(x: f64) -> f64 {
    let (z, m) = split(x);
    if m < 0 {
        // x = z in (0, 1/2]: Γ(x) = Γ(1+x)/x.
        return ln_gamma_1p(z) - x.ln();
    }
    let prod: f64 = (1..=m).map(|i| z + i as f64).product();
    ln_gamma_1p(z) + prod.ln()
}

/// ln G(x) for 0 < x, moderate x, via the series and exact shifts.
pub fn ln_barnes_g_real(x: f64) -> f64 {
    let (z, m) = split(x);
    if m < 0 {
        // G(x) = G(1+x)/Γ(x)
        return ln_barnes_g_1p(z) - ln_gamma_real(x);
    }
    // ln G(1+z+m) = ln G(1+z) + m ln Γ(1+z) + Σ_{i<m} (m-i) ln(z+i)
    let mut prod = 1.0;
    for i in 1..m {
        prod *= (z + i as f64).powi((m - i) as i32);
    }
    ln_barnes_g_1p(z) + m as f64 * ln_gamma_1p(z) + prod.ln()
}

/// Arguments up to this bound use the series route.
pub const SERIES_LIMIT: f64 = 20.0;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_values() {
        assert!((zeta_integer(2) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta_integer(4) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta_integer(3) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta_integer(40) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_hit_known_points() {
        // Γ(1/2) = √π, Γ(3/2) = √π/2.
        assert!((ln_gamma_1p(-0.5) - 0.5 * PI.ln()).abs() < 1e-15);
        assert!((ln_gamma_1p(0.5) - (0.5 * PI.sqrt()).ln()).abs() < 1e-15);
        assert!((ln_gamma_real(7.0) - 720f64.ln()).abs() < 1e-14);
        assert!(ln_barnes_g_real(2.0).abs() < 1e-16);
        assert!((ln_barnes_g_real(6.0) - 288f64.ln()).abs() < 1e-14);
        assert!((ln_barnes_g_real(0.25) - (ln_barnes_g_real(1.25) - ln_gamma_real(0.25))).abs() < 1e-15);
    }
}
