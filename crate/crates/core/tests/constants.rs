use fracbubble_core::bubble::{bubble_gradients, bubble_value, radial_integral, BubbleParams, FracDims};
use std::f64::consts::PI;

// Reference values for (N, s) = (1, 0.4) from an independent 30-digit
// evaluation (closed forms plus tanh-sinh quadrature).
const AMPLITUDE: f64 = 0.815480855120328118069227250092;
const RIESZ: f64 = 1.38978929130103380773302375714;
const C0: f64 = 0.408589845602506104889866854914;
const C1: f64 = 0.586765821426732930983235196829;
const CLOG: f64 = -0.139985647075229767280918477563;
const SOBOLEV: f64 = 1.43049048138162332995356516201;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn constants_match_reference() {
    let d = FracDims::new(1, 0.4).unwrap();
    assert!(rel(d.amplitude, AMPLITUDE) < 1e-13, "{}", d.amplitude);
    assert!(rel(d.riesz_const, RIESZ) < 1e-13, "{}", d.riesz_const);
    assert!(rel(d.energy_mass, C0) < 1e-11, "{}", d.energy_mass);
    assert!(rel(d.source_mass, C1) < 1e-11, "{}", d.source_mass);
    assert!(rel(d.log_moment, CLOG) < 1e-10, "{}", d.log_moment);
    assert!(rel(d.sobolev, SOBOLEV) < 1e-11);
    assert!(rel(d.sobolev_formula, SOBOLEV) < 1e-13);
}

#[test]
fn energy_mass_matches_closed_form() {
    // w^{p+1} = a^{10} λ/(λ²+x²) integrates to π a^{10}
    let d = FracDims::new(1, 0.4).unwrap();
    assert!(rel(d.energy_mass, PI * d.amplitude.powi(10)) < 1e-8);
}

#[test]
fn doubling_radial_order_is_stable() {
    let a = FracDims::with_radial_order(1, 0.4, 10).unwrap();
    let b = FracDims::with_radial_order(1, 0.4, 20).unwrap();
    assert!((a.energy_mass - b.energy_mass).abs() < 1e-10);
    assert!((a.source_mass - b.source_mass).abs() < 1e-10);
    assert!((a.log_moment - b.log_moment).abs() < 1e-10);
}

#[test]
fn mass_scaling_laws() {
    let d = FracDims::new(1, 0.4).unwrap();
    for &l in &[0.5, 1.0, 2.0] {
        let p = BubbleParams::centered(1, l);
        let c0 = radial_integral(1, 10, |r| d.radial_value(&p, r).powf(d.exponent + 1.0)).unwrap();
        assert!(rel(c0, d.energy_mass) < 1e-10, "λ={l}");
        let c1 = radial_integral(1, 10, |r| d.radial_value(&p, r).powf(d.exponent)).unwrap();
        assert!(rel(c1, l.powf(d.decay / 2.0) * d.source_mass) < 1e-10, "λ={l}");
    }
}

#[test]
fn tail_limit_is_amplitude() {
    let d = FracDims::new(1, 0.4).unwrap();
    let x: f64 = 1e4;
    let v = x.powf(d.decay) * bubble_value(&d, &BubbleParams::centered(1, 1.0), &[x]);
    assert!(rel(v, d.amplitude) < 1e-3);
}

#[test]
fn higher_dimension_constants_are_finite() {
    for &(n, s) in &[(2usize, 0.5), (3, 0.75), (2, 0.3)] {
        let d = FracDims::new(n, s).unwrap();
        assert!(d.energy_mass.is_finite() && d.energy_mass > 0.0);
        assert!(!d.sobolev_flagged(), "N={n} s={s}: {}", d.sobolev_mismatch());
        let p = BubbleParams::new(1.3, vec![0.2; n]).unwrap();
        let (psi0, psi) = bubble_gradients(&d, &p, &vec![0.5; n]);
        assert!(psi0.is_finite() && psi.len() == n);
    }
}

#[test]
fn masses_at_small_order() {
    // (N, s) = (1, 0.1), from the same independent evaluation
    let d = FracDims::new(1, 0.1).unwrap();
    assert!(rel(d.source_mass, 5.19346012623761) < 1e-10, "{}", d.source_mass);
    assert!(rel(d.energy_mass, 0.856978257012558) < 1e-10, "{}", d.energy_mass);
}
