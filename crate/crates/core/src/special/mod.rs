//! Special functions: log-gamma, Barnes G and its two-parameter variant G_β.

pub mod barnes;
pub mod gamma;
pub mod gbeta;
pub mod quad;
pub mod series;

pub use barnes::{
    barnes_g_log_derivative, barnes_g_log_second_derivative, ln_barnes_g, ln_barnes_g_complex,
};
pub use gamma::{digamma, ln_gamma, ln_gamma_complex, trigamma};
pub use gbeta::{ln_barnes_g_beta, SpecialFnConfig};

/// Glaisher-Kinkelin constant A = exp(1/12 - ζ'(-1)).
pub const GLAISHER: f64 = 1.282_427_129_100_622_636_875_342_568_869_791_727_767_688_927_325;
/// ζ'(-1).
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_929_213_919_660_242_780_6;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;
pub const LN_2PI: f64 = 1.837_877_066_409_345_483_560_659_472_811_235_279_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_639_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub glaisher: f64,
    pub euler_gamma: f64,
    pub log_2pi: f64,
}

pub const CONSTANTS: Constants =
    Constants { glaisher: GLAISHER, euler_gamma: EULER_GAMMA, log_2pi: LN_2PI };

pub fn glaisher() -> f64 {
    GLAISHER
}

/// Closed form G(1/2) = 2^{1/24} e^{1/8} π^{-1/4} A^{-3/2}, in log form.
pub fn ln_barnes_g_half_closed_form() -> f64 {
    std::f64::consts::LN_2 / 24.0 + 0.125
        - 0.25 * std::f64::consts::PI.ln()
        - 1.5 * GLAISHER.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// ζ'(2) = -Σ ln n / n², with an Euler-Maclaurin tail from n = N on.
    fn zeta_prime_2() -> f64 {
        let big_n = 1000u32;
        let head: f64 = (2..big_n).map(|n| (n as f64).ln() / (n as f64).powi(2)).sum();
        let n = big_n as f64;
        let ln = n.ln();
        let f = ln / (n * n);
        let f1 = (1.0 - 2.0 * ln) / n.powi(3);
        let f3 = (26.0 - 24.0 * ln) / n.powi(5);
        let tail = (ln + 1.0) / n + 0.5 * f - f1 / 12.0 + f3 / 720.0;
        -(head + tail)
    }

    #[test]
    fn glaisher_matches_dirichlet_series_route() {
        assert!(glaisher().to_string().starts_with("1.2824271291"));
        // ζ'(2)/ζ(2) = γ + ln 2π - 12 ln A
        let ln_a = (EULER_GAMMA + LN_2PI - 6.0 * zeta_prime_2() / (PI * PI)) / 12.0;
        let zeta_prime_m1 = 1.0 / 12.0 - ln_a;
        assert!((zeta_prime_m1 - ZETA_PRIME_MINUS_ONE).abs() < 1e-13);
        assert!((GLAISHER - (1.0 / 12.0 - zeta_prime_m1).exp()).abs() < 1e-12);
    }

    #[test]
    fn constants_are_consistent() {
        assert!((LN_2PI - (2.0 * PI).ln()).abs() < 1e-15);
        assert!((LN_SQRT_2PI - 0.5 * LN_2PI).abs() < 1e-15);
        assert!((ZETA_PRIME_MINUS_ONE - (1.0 / 12.0 - GLAISHER.ln())).abs() < 1e-15);
    }

    #[test]
    fn g_half_closed_form() {
        let v = ln_barnes_g(0.5).unwrap();
        assert!((v - ln_barnes_g_half_closed_form()).abs() < 1e-10 * v.abs());
        // G(1/2) = 0.603244281209446...
        assert!((v.exp() - 0.603_244_281_209_446).abs() < 1e-13);
    }
}
