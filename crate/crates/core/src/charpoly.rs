//! log|det(xI - H)| for tridiagonal H, and the centered field
//! f_N(x) = 2 log|p_N(x)| - N(2x² - 1 - 2 log 2).
//!
//! The leading principal minors obey d_k = (x - a_k) d_{k-1} - b_{k-1}² d_{k-2}.
//! The pair (d_{k-1}, d_k) is kept as a mantissa pair times 2^e and rescaled
//! by an exact power of two whenever it drifts far from unity, so nothing
//! over- or underflows and no rounding is introduced by the rescaling.

use crate::error::{Error, Result};
use crate::sampler::TridiagonalMatrix;

const LN_2: f64 = std::f64::consts::LN_2;
const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;
/// |d_N| below e^{-700} of the running scale counts as an exact zero.
const DEGENERATE_LOG_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetValue {
    pub log_abs: f64,
    pub sign: i8,
    pub degenerate: bool,
}

impl LogDetValue {
    fn from_scaled(value: f64, scale: f64, exp2: i64) -> Self {
        let log_abs = value.abs().ln() + exp2 as f64 * LN_2;
        let rel = (value.abs() / scale).ln();
        let degenerate = value == 0.0 || rel < DEGENERATE_LOG_FLOOR;
        LogDetValue {
            log_abs: if degenerate { f64::NEG_INFINITY } else { log_abs },
            sign: if value < 0.0 { -1 } else { 1 },
            degenerate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredFieldValue {
    pub x: f64,
    pub f: f64,
}

/// Asymptotic mean of 2 log|p_N(x)| inside the bulk.
pub fn centering(n: usize, x: f64) -> f64 {
    n as f64 * (2.0 * x * x - 1.0 - 2.0 * LN_2)
}

#[inline]
fn binary_exponent(v: f64) -> i64 {
    ((v.to_bits() >> 52) & 0x7ff) as i64 - 1023
}

#[inline]
fn pow2(e: i64) -> f64 {
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Precomputed view of a matrix for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CharPoly<'a> {
    diag: &'a [f64],
    off_sq: Vec<f64>,
}

impl<'a> CharPoly<'a> {
    pub fn new(m: &'a TridiagonalMatrix) -> Self {
        Self { diag: m.diag(), off_sq: m.subdiag().iter().map(|b| b * b).collect() }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn log_abs_det(&self, x: f64) -> LogDetValue {
        let (mut p0, mut p1) = (1.0, x - self.diag[0]);
        let mut exp2: i64 = 0;
        for k in 1..self.diag.len() {
            let p2 = (x - self.diag[k]) * p1 - self.off_sq[k - 1] * p0;
            p0 = p1;
            p1 = p2;
            if k % 4 == 0 {
                let m = p0.abs().max(p1.abs());
                if !(RESCALE_LO..=RESCALE_HI).contains(&m) && m > 0.0 {
                    let e = binary_exponent(m);
                    let s = pow2(-e);
                    p0 *= s;
                    p1 *= s;
                    exp2 += e;
                }
            }
        }
        LogDetValue::from_scaled(p1, p0.abs().max(p1.abs()), exp2)
    }

    /// log|d_j| and sign(d_j) for every leading minor j = 1..n.
    pub fn log_abs_minors(&self, x: f64) -> Vec<LogDetValue> {
        let n = self.diag.len();
        let mut out = Vec::with_capacity(n);
        let (mut p0, mut p1) = (1.0, x - self.diag[0]);
        let mut exp2: i64 = 0;
        out.push(LogDetValue::from_scaled(p1, 1.0f64.max(p1.abs()), exp2));
        for k in 1..n {
            let p2 = (x - self.diag[k]) * p1 - self.off_sq[k - 1] * p0;
            p0 = p1;
            p1 = p2;
            let m = p0.abs().max(p1.abs());
            out.push(LogDetValue::from_scaled(p1, m, exp2));
            if !(RESCALE_LO..=RESCALE_HI).contains(&m) && m > 0.0 {
                let e = binary_exponent(m);
                let s = pow2(-e);
                p0 *= s;
                p1 *= s;
                exp2 += e;
            }
        }
        out
    }

    /// Number of eigenvalues strictly below x (Sturm count via LDLᵀ pivots).
    pub fn eigenvalues_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut r = x - self.diag[0];
        for k in 0..self.diag.len() {
            if k > 0 {
                r = (x - self.diag[k]) - self.off_sq[k - 1] / r;
            }
            if r == 0.0 {
                r = -f64::MIN_POSITIVE;
            }
            if r > 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Centered field at x (no domain check; -inf at an eigenvalue).
    pub fn field(&self, x: f64) -> f64 {
        2.0 * self.log_abs_det(x).log_abs - centering(self.n(), x)
    }

    /// Centered field at many points; four recursions run in lockstep.
    pub fn field_many(&self, xs: &[f64], out: &mut [f64]) {
        assert_eq!(xs.len(), out.len());
        let n = self.n();
        let mut chunks = xs.chunks_exact(4);
        let mut outs = out.chunks_exact_mut(4);
        for (x, o) in (&mut chunks).zip(&mut outs) {
            let x = [x[0], x[1], x[2], x[3]];
            let mut p0 = [1.0f64; 4];
            let mut p1 = [0.0f64; 4];
            for l in 0..4 {
                p1[l] = x[l] - self.diag[0];
            }
            let mut exp2 = [0i64; 4];
            for k in 1..n {
                let a = self.diag[k];
                let b2 = self.off_sq[k - 1];
                for l in 0..4 {
                    let p2 = (x[l] - a) * p1[l] - b2 * p0[l];
                    p0[l] = p1[l];
                    p1[l] = p2;
                }
                if k % 4 == 0 {
                    for l in 0..4 {
                        let m = p0[l].abs().max(p1[l].abs());
                        if !(RESCALE_LO..=RESCALE_HI).contains(&m) && m > 0.0 {
                            let e = binary_exponent(m);
                            let s = pow2(-e);
                            p0[l] *= s;
                            p1[l] *= s;
                            exp2[l] += e;
                        }
                    }
                }
            }
            for l in 0..4 {
                let v = LogDetValue::from_scaled(p1[l], p0[l].abs().max(p1[l].abs()), exp2[l]);
                o[l] = 2.0 * v.log_abs - centering(n, x[l]);
            }
        }
        for (x, o) in chunks.remainder().iter().zip(outs.into_remainder()) {
            *o = self.field(*x);
        }
    }
}

pub fn log_abs_charpoly(m: &TridiagonalMatrix, x: f64) -> LogDetValue {
    CharPoly::new(m).log_abs_det(x)
}

pub fn log_abs_minors(m: &TridiagonalMatrix, x: f64) -> Vec<LogDetValue> {
    CharPoly::new(m).log_abs_minors(x)
}

pub fn eigenvalues_below(m: &TridiagonalMatrix, x: f64) -> usize {
    CharPoly::new(m).eigenvalues_below(x)
}

/// f_N(x) for |x| < 1.
pub fn centered_field(m: &TridiagonalMatrix, x: f64) -> Result<CenteredFieldValue> {
    if !(x.abs() < 1.0) {
        return Err(Error::OutOfDomain(format!(
            "the centered field is defined for |x| < 1, got {x}"
        )));
    }
    Ok(CenteredFieldValue { x, f: CharPoly::new(m).field(x) })
}
