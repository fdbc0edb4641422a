use gue_extremes::charpoly::CharPoly;
use gue_extremes::sampler::{realization_seed, sample_tridiagonal};
use statrs::distribution::{ContinuousCDF, Normal};

fn semicircle_cdf(x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
}

#[test]
fn eigenvalue_histogram_approaches_semicircle() {
    let (n, reps, bins) = (200usize, 10_000u64, 40usize);
    let edges: Vec<f64> = (0..=bins).map(|i| -1.0 + 2.0 * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins + 2];
    for r in 0..reps {
        let m = sample_tridiagonal(n, realization_seed(99, r)).unwrap();
        let cp = CharPoly::new(&m);
        let below: Vec<usize> = edges.iter().map(|e| cp.eigenvalues_below(*e)).collect();
        counts[0] += below[0] as u64;
        for i in 0..bins {
            counts[i + 1] += (below[i + 1] - below[i]) as u64;
        }
        counts[bins + 1] += (n - below[bins]) as u64;
    }
    let total = (n as u64 * reps) as f64;
    let mut l1 = (counts[0] + counts[bins + 1]) as f64 / total;
    for i in 0..bins {
        let p = semicircle_cdf(edges[i + 1]) - semicircle_cdf(edges[i]);
        l1 += (counts[i + 1] as f64 / total - p).abs();
    }
    assert!(l1 < 0.05, "L1 distance {l1}");
}

#[test]
fn diagonal_entries_are_gaussian() {
    let n = 500;
    let scale = 2.0 * (2.0 * n as f64).sqrt() / std::f64::consts::SQRT_2;
    let mut z: Vec<f64> = (0..40u64)
        .flat_map(|r| sample_tridiagonal(n, realization_seed(3, r)).unwrap().diag().to_vec())
        .map(|a| a * scale)
        .collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let m = z.len() as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = normal.cdf(*v);
            (c - i as f64 / m).abs().max(((i + 1) as f64 / m - c).abs())
        })
        .fold(0.0, f64::max);
    // Asymptotic KS critical value at the 0.1% level.
    assert!(d < 1.949 / m.sqrt(), "KS statistic {d}");
}

#[test]
fn trace_moments() {
    let (n, reps) = (100usize, 20_000u64);
    let mut tr = Vec::with_capacity(reps as usize);
    let mut tr2 = Vec::with_capacity(reps as usize);
    for r in 0..reps {
        let m = sample_tridiagonal(n, realization_seed(5, r)).unwrap();
        tr.push(m.diag().iter().sum::<f64>());
        tr2.push(
            m.diag().iter().map(|a| a * a).sum::<f64>() + 2.0 * m.subdiag().iter().map(|b| b * b).sum::<f64>(),
        );
    }
    let k = reps as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / k;
    let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    // Tr H ~ N(0, 1/4) and E Tr H² = N/4.
    let m1 = mean(&tr);
    assert!(m1.abs() < 4.0 * (0.25 / k).sqrt(), "{m1}");
    let v1 = var(&tr, m1);
    assert!((v1 - 0.25).abs() < 4.0 * 0.25 * (2.0 / k).sqrt(), "{v1}");
    let m2 = mean(&tr2);
    let se2 = (var(&tr2, m2) / k).sqrt();
    assert!((m2 - n as f64 / 4.0).abs() < 4.0 * se2, "{m2}");
}
