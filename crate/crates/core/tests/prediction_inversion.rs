use gue_extremes::prediction::{
    convolve_with_gumbel, default_grid, invert_to_density, laplace_moment, moments_y,
    InversionConfig, MomentFunction, Variant,
};
use num_complex::Complex64;

fn density(variant: Variant, c: f64) -> gue_extremes::prediction::PredictedDensity {
    let mf = MomentFunction::standard(variant).unwrap();
    let cfg = InversionConfig { contour_offset: c, ..Default::default() };
    invert_to_density(&mf, &default_grid(), &cfg).unwrap()
}

#[test]
fn prime_density_is_a_probability_density() {
    let d = density(Variant::YPrime, 0.0);
    assert!(d.pdf.iter().all(|p| *p >= -1e-8));
    assert!(d.norm_error < 1e-4, "{}", d.norm_error);
    assert!(d.cdf.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn full_density_tails_mass_and_moments() {
    let d = density(Variant::YFull, 0.0);
    assert!(d.pdf.iter().all(|p| *p >= -1e-8));
    assert!(d.norm_error < 1e-4);
    assert!(d.cdf[0] < 1e-5);
    assert!(*d.cdf.last().unwrap() > 1.0 - 1e-5);
    // Probability left of -8 is far from negligible: the left tail is ~|y| e^{y}.
    assert!(d.cdf_at(-8.0) > 1e-3);
    let (mean, var) = moments_y(&MomentFunction::standard(Variant::YFull).unwrap()).unwrap();
    assert!((d.mean - mean).abs() < 1e-5, "{} vs {mean}", d.mean);
    assert!((d.variance - var).abs() < 1e-5, "{} vs {var}", d.variance);
    for s in [-0.5, 0.5, 1.0] {
        let want = laplace_moment(Complex64::from(s), Variant::YFull).unwrap().re;
        let got = d.laplace_on_grid(s);
        assert!((got - want).abs() < 1e-4, "s={s}: {got} vs {want}");
    }
}

#[test]
fn contour_independence() {
    let a = density(Variant::YFull, 0.0);
    let b = density(Variant::YFull, 0.5);
    let diff = a.pdf.iter().zip(&b.pdf).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn gumbel_convolution_reproduces_full_density() {
    let prime = density(Variant::YPrime, 0.0);
    let full = density(Variant::YFull, 0.0);
    let conv = convolve_with_gumbel(&prime);
    let diff = conv.iter().zip(&full.pdf).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-4, "{diff}");
}
