//! The Barnes G-function, G(z + 1) = Γ(z) G(z), G(1) = 1.

use num_complex::Complex64;

use super::gamma::{digamma, ln_gamma_complex, trigamma};
use super::{LN_2PI, ZETA_PRIME_MINUS_ONE};
use crate::error::{Error, Result};

// B_{2k+2} / (4k (k+1)) in the large-z expansion of ln G(z+1).
const ASYMPTOTIC: [f64; 8] = [
    -1.0 / 240.0,
    1.0 / 1008.0,
    -1.0 / 1440.0,
    1.0 / 1056.0,
    -691.0 / 327_600.0,
    1.0 / 144.0,
    -3617.0 / 114_240.0,
    43_867.0 / 229_824.0,
];

const SHIFT_TO: f64 = 12.0;

fn asymptotic(w: Complex64) -> Complex64 {
    // ln G(z+1) with z = w - 1.
    let z = w - 1.0;
    let ln_z = z.ln();
    let z2 = z * z;
    let inv2 = z2.inv();
    let mut series = Complex64::new(0.0, 0.0);
    for c in ASYMPTOTIC.iter().rev() {
        series = series * inv2 + c;
    }
    (z2 * 0.5 - 1.0 / 12.0) * ln_z - z2 * 0.75 + z * (0.5 * LN_2PI) + ZETA_PRIME_MINUS_ONE
        + series * inv2
}

/// ln G(z) for Re z > 0.
///
/// The non-positive integers are the zeros of G; there the result is the
/// `-inf` sentinel. Other points with Re z <= 0 are rejected.
pub fn ln_barnes_g_complex(z: Complex64) -> Result<Complex64> {
    if z.re <= 0.0 {
        if z.im == 0.0 && z.re == z.re.round() {
            return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
        }
        return Err(Error::OutOfDomain(format!("Barnes G is provided for Re z > 0, got {z}")));
    }
    if z.im == 0.0 && z.re <= super::series::SERIES_LIMIT {
        return Ok(Complex64::from(super::series::ln_barnes_g_real(z.re)));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT_TO {
        shift += ln_gamma_complex(w)?;
        w += 1.0;
    }
    Ok(asymptotic(w) - shift)
}

/// ln G(x) for real x > 0.
pub fn ln_barnes_g(x: f64) -> Result<f64> {
    ln_barnes_g_complex(Complex64::from(x)).map(|v| v.re)
}

/// d/dx ln G(x) = (x - 1) ψ(x) - x + (1 + ln 2π)/2.
pub fn barnes_g_log_derivative(x: f64) -> Result<f64> {
    Ok((x - 1.0) * digamma(x)? - x + 0.5 * (1.0 + LN_2PI))
}

/// d²/dx² ln G(x) = ψ(x) + (x - 1) ψ'(x) - 1.
pub fn barnes_g_log_second_derivative(x: f64) -> Result<f64> {
    Ok(digamma(x)? + (x - 1.0) * trigamma(x)? - 1.0)
}
