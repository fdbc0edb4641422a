//! Tridiagonal model of the GUE spectrum.
//!
//! With density ∝ exp(-2N Tr H²) the eigenvalues of H fill [-1, 1]; the same
//! eigenvalue law is realised by the symmetric tridiagonal matrix
//!
//! ```text
//!   1/(2√(2N)) · tridiag( χ_2 … χ_{2(N-1)} ;  N(0,2) … N(0,2) )
//! ```
//!
//! with χ_{2k} on the k-th off-diagonal position (counted from the top-left).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    n: usize,
    diag: Vec<f64>,
    subdiag: Vec<f64>,
    seed: u64,
}

impl TridiagonalMatrix {
    /// Builds a matrix from explicit entries (already scaled).
    pub fn from_parts(diag: Vec<f64>, subdiag: Vec<f64>, seed: u64) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("matrix size must be at least 1".into()));
        }
        if subdiag.len() != n - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} off-diagonal entries, got {}",
                n - 1,
                subdiag.len()
            )));
        }
        if let Some(b) = subdiag.iter().find(|b| !(**b > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal entries must be positive, got {b}"
            )));
        }
        Ok(Self { n, diag, subdiag, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn subdiag(&self) -> &[f64] {
        &self.subdiag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of realization `index` in a run with `master_seed`.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One draw of χ_dof = sqrt(χ²_dof), via Gamma(dof/2, scale 2).
pub fn sample_chi<R: Rng + ?Sized>(dof: u32, rng: &mut R) -> Result<f64> {
    if dof == 0 {
        return Err(Error::InvalidParameter("chi distribution needs dof >= 1".into()));
    }
    let gamma = Gamma::new(0.5 * dof as f64, 2.0)
        .map_err(|e| Error::InvalidParameter(format!("gamma sampler: {e}")))?;
    Ok(gamma.sample(rng).sqrt())
}

/// Tridiagonal GUE realization of size `n`, deterministic in `(n, seed)`.
pub fn sample_tridiagonal(n: usize, seed: u64) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (2.0 * (2.0 * n as f64).sqrt());
    let diag = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * std::f64::consts::SQRT_2 * scale
        })
        .collect();
    let subdiag = (1..n)
        .map(|k| Ok(sample_chi(2 * k as u32, &mut rng)?.max(f64::MIN_POSITIVE) * scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(TridiagonalMatrix { n, diag, subdiag, seed })
}

/// Semicircle density (2/π)√(1 - x²) on [-1, 1].
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        2.0 / std::f64::consts::PI * (1.0 - x * x).sqrt()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_moments() {
        let mut rng = rng_from_seed(11);
        let draws: Vec<f64> = (0..1_000_000).map(|_| sample_chi(2, &mut rng).unwrap()).collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // E χ_2 = √2 Γ(3/2)/Γ(1) = √(π/2)
        let expected = (std::f64::consts::PI / 2.0).sqrt();
        assert!((mean - expected).abs() < 4.0 * (var / n).sqrt(), "{mean}");

        let squares: Vec<f64> = draws.iter().map(|d| d * d).collect();
        let m2 = squares.iter().sum::<f64>() / n;
        let v2 = squares.iter().map(|s| (s - m2).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m2 - 2.0).abs() < 4.0 * (v2 / n).sqrt(), "{m2}");
    }

    #[test]
    fn chi_mean_matches_sum_of_squared_normals() {
        // χ_3 built directly from three normals, against the gamma route.
        let mut rng = rng_from_seed(5);
        let n = 200_000;
        let direct: f64 = (0..n)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z * z
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .sum::<f64>()
            / n as f64;
        let via_gamma: f64 =
            (0..n).map(|_| sample_chi(3, &mut rng).unwrap()).sum::<f64>() / n as f64;
        // E χ_3 = 2√(2/π); both estimates have s.d. about 0.67/√n.
        let exact = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        let se = 0.68 / (n as f64).sqrt();
        assert!((direct - exact).abs() < 4.0 * se);
        assert!((via_gamma - exact).abs() < 4.0 * se);
    }

    #[test]
    fn chi_rejects_zero_dof() {
        let mut rng = rng_from_seed(0);
        assert!(matches!(sample_chi(0, &mut rng), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn degenerate_and_invalid_sizes() {
        let m = sample_tridiagonal(1, 3).unwrap();
        assert_eq!(m.diag().len(), 1);
        assert!(m.subdiag().is_empty());
        assert!(sample_tridiagonal(0, 3).is_err());
        assert!(TridiagonalMatrix::from_parts(vec![0.0, 1.0], vec![0.0], 0).is_err());
        assert!(TridiagonalMatrix::from_parts(vec![0.0, 1.0], vec![], 0).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = sample_tridiagonal(300, 42).unwrap();
        let b = sample_tridiagonal(300, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_tridiagonal(300, 43).unwrap();
        assert_ne!(a.diag(), c.diag());
    }

    #[test]
    fn realization_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> =
            (0..10_000).map(|i| realization_seed(7, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(realization_seed(7, 0), realization_seed(8, 0));
    }

    #[test]
    fn semicircle_values() {
        assert!((semicircle_density(0.0) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(semicircle_density(1.0), 0.0);
        assert_eq!(semicircle_density(-1.0), 0.0);
        assert_eq!(semicircle_density(1.5), 0.0);
        // Normalisation by Gauss-Legendre after x = sin θ (smooth integrand).
        let (nodes, weights) = crate::special::quad::gauss_legendre(40);
        let half_pi = std::f64::consts::FRAC_PI_2;
        let total: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| {
                let theta = half_pi * t;
                w * half_pi * semicircle_density(theta.sin()) * theta.cos()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}
