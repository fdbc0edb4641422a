//! Log-gamma (real and complex), digamma and trigamma.

use num_complex::Complex64;

use super::LN_SQRT_2PI;
use crate::error::{Error, Result};

// B_{2k} / (2k (2k - 1)) for the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

// Below this modulus the argument is shifted upwards before the series is used.
const SHIFT_TO: f64 = 10.0;

fn check_real_arg(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else if x == x.round() {
        Err(Error::Pole(x))
    } else {
        Err(Error::OutOfDomain(format!("log-gamma needs a positive argument, got {x}")))
    }
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_real_arg(x)?;
    if x <= super::series::SERIES_LIMIT {
        return Ok(super::series::ln_gamma_real(x));
    }
    let mut x = x;
    let mut shift = 1.0;
    while x < SHIFT_TO {
        shift *= x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    Ok((x - 0.5) * x.ln() - x + LN_SQRT_2PI + series * inv - shift.ln())
}

/// Principal branch of ln Γ(z) on the right half-plane, continuous from the
/// positive real axis.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return ln_gamma(z.re).map(Complex64::from);
    }
    if z.re <= 0.0 {
        return Err(Error::OutOfDomain(format!(
            "complex log-gamma is provided for Re z > 0, got {z}"
        )));
    }
    let mut z = z;
    // Sum of logs rather than log of a product keeps the branch continuous.
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < SHIFT_TO {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    Ok((z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv - shift)
}

/// ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_real_arg(x)?;
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // -sum B_{2k} / (2k x^{2k})
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32_760.0)))));
    Ok(acc + x.ln() - 0.5 / x - tail)
}

/// ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_real_arg(x)?;
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv2
        * inv
        * (1.0 / 6.0
            - inv2
                * (1.0 / 30.0
                    - inv2
                        * (1.0 / 42.0
                            - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0 - inv2 * 691.0 / 2730.0)))));
    Ok(acc + inv + 0.5 * inv2 + tail)
}
