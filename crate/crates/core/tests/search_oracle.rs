use gue_extremes::charpoly::CharPoly;
use gue_extremes::sampler::{realization_seed, sample_tridiagonal};
use gue_extremes::search::{
    global_maximum, mesh_points, refine_landscape, refine_maximum, Landscape, SearchParams,
};

/// Brute force: scan a fine mesh, then refine every fine-mesh local maximum
/// within `window` of the best over its two neighbouring fine-mesh cells.
fn exhaustive_maximum(cp: &CharPoly, delta: usize, window: f64) -> (f64, f64) {
    let xs = mesh_points(delta);
    let mut fs = vec![0.0; xs.len()];
    cp.values(&xs, &mut fs);
    let best = fs.iter().cloned().filter(|f| f.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let h = 1.0 / delta as f64;
    let mut out = (f64::NAN, f64::NEG_INFINITY);
    for j in 1..xs.len() - 1 {
        if fs[j] >= best - window && fs[j] >= fs[j - 1] && fs[j] >= fs[j + 1] {
            let (x, f) = refine_landscape(cp, (xs[j] - h, xs[j] + h), 1e-10, 200).unwrap();
            if f > out.1 {
                out = (x, f);
            }
        }
    }
    out
}

#[test]
fn agrees_with_exhaustive_scan_at_n1000() {
    let n = 1000;
    let params = SearchParams::default();
    let mut worst: f64 = 0.0;
    for r in 0..100 {
        let m = sample_tridiagonal(n, realization_seed(2024, r)).unwrap();
        let rec = global_maximum(&m, &params).unwrap();
        let (_, f) = exhaustive_maximum(&CharPoly::new(&m), 40 * n, 0.5);
        worst = worst.max((rec.m_star - f).abs());
    }
    assert!(worst < 1e-6, "largest discrepancy {worst}");
}

#[test]
fn n3000_maximizer_lies_in_a_refined_gap() {
    let n = 3000;
    let params = SearchParams::default();
    for r in 0..10 {
        let m = sample_tridiagonal(n, realization_seed(77, r)).unwrap();
        let cp = CharPoly::new(&m);
        let rec = global_maximum(&m, &params).unwrap();
        let (x, f) = exhaustive_maximum(&cp, 40 * n, 0.5);
        assert_eq!(cp.eigenvalues_below(x), cp.eigenvalues_below(rec.x_star), "realization {r}");
        assert!((rec.m_star - f).abs() < 1e-6, "realization {r}: {} vs {f}", rec.m_star);
    }
}

#[test]
fn small_matrix_against_very_fine_cell_scan() {
    let m = sample_tridiagonal(12, 3).unwrap();
    let params = SearchParams::default();
    let rec = global_maximum(&m, &params).unwrap();
    // Locate the winning cell of the default mesh and scan it at Δ = 10⁶.
    let cp = CharPoly::new(&m);
    let delta = params.mesh_density(12) as f64;
    let (lo, hi) = (rec.x_star - 1.0 / delta, rec.x_star + 1.0 / delta);
    let steps = ((hi - lo) * 1e6) as usize;
    let (mut bx, mut bf) = (lo, f64::NEG_INFINITY);
    for i in 0..=steps {
        let x = lo + i as f64 * 1e-6;
        let f = cp.field(x);
        if f > bf {
            bx = x;
            bf = f;
        }
    }
    assert!((rec.x_star - bx).abs() < 1e-6, "{} vs {bx}", rec.x_star);
    assert!(rec.m_star >= bf);
}

#[test]
fn refinement_never_lowers_the_mesh_value() {
    let m = sample_tridiagonal(400, 8).unwrap();
    let cp = CharPoly::new(&m);
    let p = SearchParams::default();
    for x in mesh_points(800).into_iter().step_by(37) {
        let h = 1.0 / 800.0;
        let (lo, hi) = ((x - h).max(-0.999), (x + h).min(0.999));
        let (_, f) = refine_maximum(&m, (lo, hi), &p).unwrap();
        assert!(f >= cp.field(x) - 1e-12);
    }
}

#[test]
fn x_star_is_away_from_eigenvalues() {
    let p = SearchParams::default();
    for r in 0..50 {
        let m = sample_tridiagonal(300, realization_seed(4, r)).unwrap();
        let cp = CharPoly::new(&m);
        let rec = global_maximum(&m, &p).unwrap();
        assert!(rec.m_star.is_finite());
        assert_eq!(cp.eigenvalues_below(rec.x_star - 1e-9), cp.eigenvalues_below(rec.x_star + 1e-9));
    }
}

#[test]
fn stable_under_doubled_mesh_and_candidates() {
    let n = 1000;
    let base = SearchParams::default();
    let doubled = SearchParams { delta: Some(4 * n), top_k: 32, ..base };
    let mut misses = 0;
    for r in 0..1000 {
        let m = sample_tridiagonal(n, realization_seed(31, r)).unwrap();
        let a = global_maximum(&m, &base).unwrap().m_star;
        let b = global_maximum(&m, &doubled).unwrap().m_star;
        if (a - b).abs() > 1e-6 {
            eprintln!("realization {r}: {a} vs {b}");
            misses += 1;
        }
    }
    assert!(misses < 10, "{misses} of 1000 realizations disagree");
}
