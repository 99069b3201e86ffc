use fracbubble_core::bubble::FracDims;
use fracbubble_core::error::Error;
use fracbubble_core::expansions::*;
use fracbubble_core::rate::RateReport;

fn report(s: f64) -> RateReport {
    let d = FracDims::new(1, s).unwrap();
    expansion_report(&ExpansionConfig::interval(&d), &Suite::all()).unwrap()
}

fn slope(r: &RateReport, tag: &str) -> f64 {
    r.case(tag).unwrap_or_else(|| panic!("missing {tag}")).slope
}

#[test]
fn all_suites_pass_at_s_04() {
    let r = report(0.4);
    assert!(r.pass, "{:#?}", r.cases.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    assert!(slope(&r, "projection_remainder") >= 1.05);
    assert!((slope(&r, "kernel_projection_dilation") - 0.5).abs() <= 0.15);
    assert!((slope(&r, "kernel_projection_translation") - 5.5).abs() <= 0.15);
    assert!((slope(&r, "nonlinear_interaction") - 1.0).abs() <= 0.15);
    let ratio = r.case("critical_norm_ratio").unwrap();
    assert!(ratio.lhs.iter().all(|v| *v <= 1.0));
}

#[test]
fn all_suites_pass_at_s_01() {
    let r = report(0.1);
    assert!(r.pass, "{:#?}", r.cases.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    assert!((slope(&r, "nonlinear_interaction") - 0.75).abs() <= 0.15);
    assert!((slope(&r, "kernel_projection_translation") - 1.75).abs() <= 0.15);
}

#[test]
fn slopes_are_stable_under_refinement() {
    let d = FracDims::new(1, 0.4).unwrap();
    let cfg = ExpansionConfig::interval(&d);
    let suites = [Suite::ProjectionRemainder, Suite::KernelProjection, Suite::Interaction];
    let a = expansion_report(&cfg, &suites).unwrap();
    let b = expansion_report(&cfg.refined(), &suites).unwrap();
    for (x, y) in a.cases.iter().zip(&b.cases) {
        assert_eq!(x.tag, y.tag);
        assert!((x.slope - y.slope).abs() <= 0.05, "{}: {} vs {}", x.tag, x.slope, y.slope);
    }
}

#[test]
fn short_ladder_is_a_usage_error() {
    let d = FracDims::new(1, 0.4).unwrap();
    let mut cfg = ExpansionConfig::interval(&d);
    cfg.ladder = vec![1e-2, 1e-3, 1e-4];
    assert!(matches!(expansion_report(&cfg, &[Suite::CriticalNorm]), Err(Error::Usage(_))));
    cfg.ladder = vec![1e-2, 1e-3, 1e-3, 1e-4];
    assert!(expansion_report(&cfg, &[Suite::CriticalNorm]).is_err());
}

#[test]
fn report_round_trips_through_json() {
    let d = FracDims::new(1, 0.4).unwrap();
    let r = expansion_report(&ExpansionConfig::interval(&d), &[Suite::CriticalNorm, Suite::SubcriticalDefect]).unwrap();
    let back: RateReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(r, back);
}
