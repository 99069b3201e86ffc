use fracbubble_core::bubble::FracDims;
use fracbubble_core::wholespace::*;

fn setup() -> (FracDims, PvQuadrature) {
    (FracDims::new(1, 0.4).unwrap(), PvQuadrature::new(0.4))
}

#[test]
fn pv_matches_fourier_on_gaussian() {
    let (_, q) = setup();
    for &x in &[0.0, 1.0] {
        let pv = q.apply(|t| (-t * t).exp(), x).unwrap();
        let f = gaussian_fourier(0.4, x).unwrap();
        assert!((pv - f).abs() <= 1e-4 * f.abs(), "x={x}: {pv} vs {f}");
    }
}

#[test]
fn pv_is_linear_and_translation_covariant() {
    let (_, q) = setup();
    let u = |t: f64| (-t * t).exp();
    let v = |t: f64| 1.0 / (1.0 + t * t);
    let x = 0.3;
    let sum = q.apply(|t| u(t) + v(t), x).unwrap();
    let parts = q.apply(u, x).unwrap() + q.apply(v, x).unwrap();
    assert!((sum - parts).abs() < 1e-12 * parts.abs());
    let shifted = q.apply(|t| u(t - 2.0), x + 2.0).unwrap();
    assert!((shifted - q.apply(u, x).unwrap()).abs() < 1e-10);
}

#[test]
fn bubble_equation_holds() {
    let (d, q) = setup();
    let r = verify_bubble(&q, &d, &[0.0, 0.5, 1.0, 2.0, 5.0]).unwrap();
    assert!(r.pass, "{:?}", r.residuals);
    // refinement changes residuals by at most a factor of two
    let fine = verify_bubble(&q.refined(), &d, &[0.0, 0.5, 1.0, 2.0, 5.0]).unwrap();
    for (a, b) in r.residuals.iter().zip(&fine.residuals) {
        assert!(*b <= 2.0 * a.max(1e-9) && *a <= 2.0 * b.max(1e-9));
    }
}

#[test]
fn wrong_amplitude_breaks_the_equation() {
    let (d, q) = setup();
    let bad = FracDims::with_amplitude(1, 0.4, 1.1 * d.amplitude).unwrap();
    assert!(!verify_bubble(&q, &bad, &[0.0, 1.0]).unwrap().pass);
}

#[test]
fn residual_profile_is_scale_invariant() {
    let (d, q) = setup();
    let pts = [0.0, 0.5, 1.0];
    let base = verify_bubble(&q, &d, &pts).unwrap();
    let scaled: Vec<f64> = pts.iter().map(|x| 2.0 * x).collect();
    let r2 = verify_bubble_scaled(&q, &d, &scaled, 2.0).unwrap();
    for (a, b) in base.residuals.iter().zip(&r2.residuals) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn calibration_agrees_with_closed_form() {
    let (d, q) = setup();
    assert!(amplitude_gap(&q, &d).unwrap() < 1e-3);
    let a1 = calibrate_amplitude(&q, &d).unwrap();
    let a2 = calibrate_amplitude_scaled(&q, &d, 2.0).unwrap();
    assert!((a1 - a2).abs() < 1e-4 * a1);
    // classical value 3^{1/4} in three dimensions
    assert!((calibrate_local_laplacian(3) - 3f64.powf(0.25)).abs() < 1e-6);
}

#[test]
fn kernel_functions_solve_the_linearized_equation() {
    let (d, q) = setup();
    let pts = [0.3, 1.0, 2.0];
    for dir in [KernelDirection::Dilation, KernelDirection::Translation] {
        let r = verify_kernel(&q, &d, dir, &pts).unwrap();
        assert!(r.pass, "{dir:?}: {:?}", r.residuals);
    }
    let neg = verify_kernel(&q, &d, KernelDirection::Bubble, &pts).unwrap();
    assert!(neg.residuals.iter().all(|r| *r > 0.5), "{:?}", neg.residuals);
}

#[test]
fn sobolev_identity_and_sharpness() {
    let (d, _) = setup();
    let r = verify_sobolev(&d).unwrap();
    assert!(!r.flagged);
    assert!((r.derived - d.energy_mass.powf(-0.4)).abs() < 1e-15);
    for b in &r.bubble_quotients {
        assert!((b - r.derived).abs() < 1e-10);
    }
    assert!(r.gaussian_quotient < r.derived);
}
