use fracbubble_core::bubble::FracDims;
use fracbubble_core::energy::*;
use fracbubble_core::error::Error;
use fracbubble_core::expansions::{Ansatz, ExpansionConfig};
use fracbubble_core::green::{GreenEvaluator, GreenOptions};
use fracbubble_core::projection::{dilation, spectral_projection, Profile};
use fracbubble_core::spectral::{BoxDomain, CoeffVector, SpectralBasis};
use proptest::prelude::*;
use std::sync::OnceLock;

fn dims() -> FracDims {
    FracDims::new(1, 0.4).unwrap()
}

fn evaluator() -> &'static GreenEvaluator {
    static EV: OnceLock<GreenEvaluator> = OnceLock::new();
    EV.get_or_init(|| GreenEvaluator::new(&dims(), &BoxDomain::unit(1), GreenOptions::for_dim(1)).unwrap())
}

fn small_basis() -> &'static SpectralBasis {
    static B: OnceLock<SpectralBasis> = OnceLock::new();
    B.get_or_init(|| SpectralBasis::build(&BoxDomain::unit(1), 64, 8).unwrap())
}

fn smooth_coeffs(seed: f64) -> CoeffVector {
    let mut v = CoeffVector::zeros(small_basis().len());
    for (k, c) in v.values.iter_mut().enumerate().take(12) {
        *c = (seed * (k + 1) as f64).sin() / (1.0 + k as f64).powi(2);
    }
    v
}

#[test]
fn energy_of_zero_is_zero() {
    let b = small_basis();
    assert_eq!(energy(b, &dims(), 0.01, &CoeffVector::zeros(b.len())).unwrap(), 0.0);
}

#[test]
fn negative_eps_is_a_usage_error() {
    let b = small_basis();
    assert!(matches!(energy(b, &dims(), -0.1, &CoeffVector::zeros(b.len())), Err(Error::Usage(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn derivative_matches_central_difference(seed in 0.1f64..3.0, dseed in 0.1f64..3.0, eps in 0.0f64..0.1) {
        let b = small_basis();
        let d = dims();
        let v = smooth_coeffs(seed);
        let dir = smooth_coeffs(dseed);
        let h = 1e-5;
        let shift = |t: f64| CoeffVector { values: v.values.iter().zip(&dir.values).map(|(a, b)| a + t * b).collect() };
        let fd = (energy(b, &d, eps, &shift(h)).unwrap() - energy(b, &d, eps, &shift(-h)).unwrap()) / (2.0 * h);
        let an = energy_derivative(b, &d, eps, &v, &dir).unwrap();
        prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
    }
}

#[test]
fn fixed_frame_energy_matches_spectral_route() {
    // at ε = 0.5 the scale μλ is resolvable by a sine basis
    let d = dims();
    let eps = 0.5;
    let mu = dilation(&d, eps);
    let cfg = ExpansionConfig::interval(&d);
    let ans = Ansatz::new(&d, 1.0, &cfg.signs, &cfg.lambdas, &cfg.sigmas, eps, cfg.projection, cfg.grid).unwrap();
    let basis = SpectralBasis::build(&BoxDomain::unit(1), 4096, 8).unwrap();
    let mut v = CoeffVector::zeros(basis.len());
    for i in 0..2 {
        let u = spectral_projection(&basis, &d, Profile::Bubble, mu * cfg.lambdas[i], cfg.sigmas[i]).unwrap();
        for (a, b) in v.values.iter_mut().zip(&u.values) {
            *a += cfg.signs[i] * b;
        }
    }
    let quad = basis.hs_inner(&v, &v, d.order).unwrap();
    let spectral = energy(&basis, &d, eps, &v).unwrap();
    // the dilated-frame nonlinear term carries an extra μ^{−εq/2}
    let nonlinear = 0.5 * quad - spectral;
    let expected = 0.5 * quad - mu.powf(-eps * d.decay / 2.0) * nonlinear;
    let fixed = ansatz_energy(&ans);
    assert!((fixed - expected).abs() <= 1e-6 * expected.abs(), "{fixed} vs {expected}");
}

#[test]
fn pair_integrals_are_symmetric() {
    let d = dims();
    let cfg = ExpansionConfig { lambdas: vec![0.8, 1.3], ..ExpansionConfig::interval(&d) };
    let ans = Ansatz::new(&d, 1.0, &cfg.signs, &cfg.lambdas, &cfg.sigmas, 1e-3, cfg.projection, cfg.grid).unwrap();
    let (a, b) = (pair_integral(&ans, 0, 1), pair_integral(&ans, 1, 0));
    assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
    assert!(interaction_integrals(&ans, 0, 0).is_err());
    assert!(interaction_integrals(&ans, 0, 2).is_err());
}

fn check_report(r: &EnergyReport) {
    assert!(r.rates.cases[0].slope >= 1.05, "slope {}", r.rates.cases[0].slope);
    assert!(r.leading.rel_err <= 1e-2, "{:?}", r.leading);
    for f in &r.interactions {
        assert!((f.self_coefficient - f.self_predicted).abs() <= 0.05 * f.self_predicted.abs(), "{f:?}");
        assert!((f.cross_coefficient - f.cross_predicted).abs() <= 0.05 * f.cross_predicted.abs(), "{f:?}");
    }
    assert!(r.pass);
}

#[test]
fn single_bubble_expansion() {
    let d = dims();
    let cfg = ExpansionConfig { signs: vec![1.0], lambdas: vec![1.0], sigmas: vec![0.5], ..ExpansionConfig::interval(&d) };
    let r = energy_expansion_report(evaluator(), &cfg).unwrap();
    assert_eq!(r.k, 1);
    assert!(r.interactions.is_empty());
    check_report(&r);
}

#[test]
fn opposite_pair_expansion() {
    let d = dims();
    let r = energy_expansion_report(evaluator(), &ExpansionConfig::interval(&d)).unwrap();
    assert_eq!(r.interactions.len(), 2);
    check_report(&r);
}

#[test]
fn unequal_scales_expansion() {
    let d = dims();
    let cfg = ExpansionConfig { lambdas: vec![0.7, 1.4], sigmas: vec![0.35, 0.7], ..ExpansionConfig::interval(&d) };
    check_report(&energy_expansion_report(evaluator(), &cfg).unwrap());
}

#[test]
fn expansion_is_stable_under_refinement() {
    let d = dims();
    let cfg = ExpansionConfig::interval(&d);
    let a = energy_expansion_report(evaluator(), &cfg).unwrap();
    let b = energy_expansion_report(evaluator(), &cfg.refined()).unwrap();
    for (x, y) in a.energies.iter().zip(&b.energies) {
        assert!((x - y).abs() <= 1e-9 * x.abs(), "{x} vs {y}");
    }
}
