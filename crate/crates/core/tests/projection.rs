use fracbubble_core::bubble::FracDims;
use fracbubble_core::grid::Point;
use fracbubble_core::projection::*;
use fracbubble_core::spectral::{BoxDomain, SpectralBasis};
use proptest::prelude::*;
use std::sync::OnceLock;

fn dims() -> FracDims {
    FracDims::new(1, 0.4).unwrap()
}

fn basis() -> &'static SpectralBasis {
    static B: OnceLock<SpectralBasis> = OnceLock::new();
    B.get_or_init(|| SpectralBasis::build(&BoxDomain::unit(1), 4096, 8).unwrap())
}

#[test]
fn fixed_frame_matches_spectral_route() {
    let d = dims();
    for prof in [Profile::Bubble, Profile::Dilation, Profile::Translation] {
        let u = spectral_projection(basis(), &d, prof, 0.05, 0.3).unwrap();
        let pb = ProjectedBubble::with_scale(&d, 1.0, prof, 0.05, 0.3, ProjectionOptions::default()).unwrap();
        let xs = [0.05, 0.2, 0.3, 0.37, 0.5, 0.8, 0.97];
        let peak = xs.iter().map(|&x| pb.value(&Point::at(x)).abs()).fold(0.0, f64::max);
        for x in xs {
            let a = basis().evaluate(&u, &[x]).unwrap();
            let b = pb.value(&Point::at(x));
            assert!((a - b).abs() <= 1e-6 * peak, "{prof:?} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn construction_from_eps_matches_construction_from_scale() {
    let d = dims();
    let eps = 10f64.powf(-2.5);
    let a = ProjectedBubble::new(&d, 1.0, Profile::Bubble, eps, 1.7, 0.4, ProjectionOptions::default()).unwrap();
    let b = ProjectedBubble::with_scale(&d, 1.0, Profile::Bubble, dilation(&d, eps) * 1.7, 0.4, ProjectionOptions::default()).unwrap();
    for x in [0.01, 0.3, 0.4, 0.9] {
        assert_eq!(a.correction(x), b.correction(x));
    }
    assert!((a.mu - eps.powf(5.0)).abs() <= 1e-12 * a.mu);
}

#[test]
fn projection_vanishes_on_the_boundary() {
    let d = dims();
    let pb = ProjectedBubble::with_scale(&d, 1.0, Profile::Bubble, 1e-3, 0.3, ProjectionOptions::default()).unwrap();
    for x in [0.0, 1.0] {
        let pt = Point::at(x);
        let free = pb.free_at(&pt);
        assert!((free + pb.correction(x)).abs() <= 1e-9 * free, "x={x}");
    }
}

#[test]
fn leading_remainder_is_small_against_the_robin_term() {
    let d = dims();
    let pb = ProjectedBubble::with_scale(&d, 1.0, Profile::Bubble, 1e-6, 0.5, ProjectionOptions::default()).unwrap();
    let parts = pb.parts(0.2).unwrap();
    let lead = parts.h_center * pb.whole_mass;
    assert!(pb.leading_remainder(0.2).unwrap().abs() <= 1e-3 * lead.abs());
}

#[test]
fn rejects_bad_inputs() {
    let d = dims();
    let o = ProjectionOptions::default();
    assert!(ProjectedBubble::new(&d, 1.0, Profile::Bubble, 1e-2, 1.0, 1.2, o).is_err());
    assert!(ProjectedBubble::new(&d, 1.0, Profile::Bubble, 0.0, 1.0, 0.5, o).is_err());
    let d2 = FracDims::new(2, 0.5).unwrap();
    assert!(ProjectedBubble::new(&d2, 1.0, Profile::Bubble, 1e-2, 1.0, 0.5, o).is_err());
}

fn symmetric_pair() -> &'static (ProjectedBubble, ProjectedBubble) {
    static P: OnceLock<(ProjectedBubble, ProjectedBubble)> = OnceLock::new();
    P.get_or_init(|| {
        let d = dims();
        let o = ProjectionOptions::default();
        (
            ProjectedBubble::with_scale(&d, 1.0, Profile::Bubble, 1e-2, 0.5, o).unwrap(),
            ProjectedBubble::with_scale(&d, 1.0, Profile::Translation, 1e-2, 0.5, o).unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centered_projection_respects_reflection(x in 0.001f64..0.499) {
        let (bubble, translation) = symmetric_pair();
        let (l, r) = (Point::at(x), Point::at(1.0 - x));
        let scale = bubble.value(&Point::at(0.5));
        prop_assert!((bubble.value(&l) - bubble.value(&r)).abs() <= 1e-9 * scale);
        let tscale = translation.value(&Point::at(0.51)).abs();
        prop_assert!((translation.value(&l) + translation.value(&r)).abs() <= 1e-9 * tscale);
    }

    #[test]
    fn projected_bubble_is_positive_and_below_free(x in 0.001f64..0.999) {
        let (bubble, _) = symmetric_pair();
        let pt = Point::at(x);
        let v = bubble.value(&pt);
        prop_assert!(v > 0.0);
        prop_assert!(v <= bubble.free_at(&pt));
    }
}
