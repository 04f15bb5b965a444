use proptest::prelude::*;
use sobolev_lab::constants::{aubin_talenti, sobolev_s, sobolev_s_tilde, SobolevParams};
use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::sobolev::*;
use sobolev_lab::LabError;

fn flat_ball(m: usize) -> Patch {
    let chart = Surface::FlatBall {
        n: 3,
        m,
        radius: 1.0,
        grading: 10.0,
    }
    .chart()
    .unwrap();
    Patch::new(chart, &[256, 8, 4]).unwrap()
}

#[test]
fn truncated_bubble_recovers_aubin_talenti() {
    let patch = flat_ball(0);
    let params = SobolevParams::new(3, 0, 2.0).unwrap();
    let at = aubin_talenti(3, 2.0).unwrap();
    let f = RadialField::bubble(
        vec![0.0; 3],
        2e-3,
        3,
        2.0,
        Some(Cutoff::new(0.7, 0.95).unwrap()),
    );
    let r = sobolev_quotient(&patch, &f, &params).unwrap();
    assert!(
        r.quotient >= 0.95 * at && r.quotient <= 1.0001 * at,
        "{r:?}"
    );
    assert!(r.quotient < sobolev_s(3, 2.0).unwrap());
    assert_eq!(r.bound_name, BoundName::S);
    assert!((r.bound_for(BoundName::AtReference).unwrap() - at).abs() < 1e-15);
}

#[test]
fn maximizer_finds_the_euclidean_constant() {
    let patch = flat_ball(0);
    let params = SobolevParams::new(3, 0, 2.0).unwrap();
    let at = aubin_talenti(3, 2.0).unwrap();
    let family = BubbleFamily::new(vec![vec![0.0; 3], vec![0.2, 0.0, 0.0]], 5e-4, 0.2);
    let best = maximize_quotient(&patch, &family, &params, 80).unwrap();
    assert!((best.best.quotient / at - 1.0).abs() < 0.01, "{best:?}");
    assert_eq!(best.center, vec![0.0; 3]);
    let again = maximize_quotient(&patch, &family, &params, 80).unwrap();
    assert_eq!(best, again);
}

#[test]
fn maximizer_on_catenoid_stays_below_bound() {
    let patch = Patch::uniform(Surface::Catenoid.chart().unwrap(), 64).unwrap();
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let family = BubbleFamily::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.2, 0.3]], 1e-3, 0.3);
    let best = maximize_quotient(&patch, &family, &params, 60).unwrap();
    assert!(best.best.quotient <= sobolev_s_tilde(2, 1, 1.5).unwrap());
    assert!(best.best.margin > 0.0);
}

#[test]
fn seeded_bumps_certify_on_minimal_members() {
    for (surface, m) in [(Surface::Catenoid, 1), (Surface::HolomorphicGraphZ2, 2)] {
        let patch = Patch::uniform(surface.chart().unwrap(), 64).unwrap();
        let params = SobolevParams::new(2, m, 1.5).unwrap();
        let bound = sobolev_s_tilde(2, m, 1.5).unwrap();
        for seed in 0..10 {
            let f = seeded_bumps(&patch, seed).unwrap();
            let r = sobolev_quotient(&patch, &f, &params).unwrap();
            assert_eq!(r.bound_name, BoundName::STilde);
            assert!((r.bound - bound).abs() < 1e-15);
            assert!(
                r.margin > 2.0 * r.uncertainty,
                "{surface:?} seed {seed}: {r:?}"
            );
        }
    }
}

#[test]
fn bounds_coincide_at_p_two() {
    let patch = flat_ball(1);
    let params = SobolevParams::new(3, 1, 2.0).unwrap();
    let f = RadialField::new(vec![0.0; 4], 1.0, Shape::Bump { radius: 0.5 }, None);
    let r = sobolev_quotient(&patch, &f, &params).unwrap();
    let s = r.bound_for(BoundName::S).unwrap();
    let st = r.bound_for(BoundName::STilde).unwrap();
    assert!((s / st - 1.0).abs() < 1e-12);
    assert!(r.margin > 0.0);
}

#[test]
fn refinement_keeps_confident_margins() {
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let coarse = Patch::uniform(Surface::Helicoid.chart().unwrap(), 32).unwrap();
    let fine = Patch::uniform(Surface::Helicoid.chart().unwrap(), 96).unwrap();
    for seed in 0..5 {
        let f = seeded_bumps(&coarse, seed).unwrap();
        let a = sobolev_quotient(&coarse, &f, &params).unwrap();
        let b = sobolev_quotient(&fine, &f, &params).unwrap();
        if a.margin.abs() > 2.0 * a.uncertainty {
            assert_eq!(a.margin > 0.0, b.margin > 0.0);
        }
    }
}

#[test]
fn unsupported_functions_are_rejected() {
    let patch = Patch::uniform(Surface::Enneper.chart().unwrap(), 16).unwrap();
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let gauss = RadialField::new(vec![0.0; 3], 1.0, Shape::Gaussian { width: 0.2 }, None);
    assert!(matches!(
        sobolev_quotient(&patch, &gauss, &params),
        Err(LabError::Domain(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quotient_is_scale_invariant(seed in 0u64..1000, k in 0usize..3) {
        let alpha = [1e-6, 1.0, 1e6][k];
        let patch = Patch::uniform(Surface::Catenoid.chart().unwrap(), 24).unwrap();
        let params = SobolevParams::new(2, 1, 1.5).unwrap();
        let f = seeded_bumps(&patch, seed).unwrap();
        let mut g = f.clone();
        for t in &mut g.terms {
            t.amplitude *= alpha;
        }
        let a = sobolev_quotient(&patch, &f, &params).unwrap().quotient;
        let b = sobolev_quotient(&patch, &g, &params).unwrap().quotient;
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn margins_positive_on_minimal_members(seed in 0u64..1000, k in 0usize..4, pk in 0usize..2) {
        let p = [1.5, 1.8][pk];
        let surface = Surface::minimal_members()
            .into_iter()
            .filter(|s| s.dim() == 2 && !matches!(s, Surface::Flat { .. } | Surface::FlatBall { .. }))
            .nth(k)
            .unwrap();
        let patch = Patch::uniform(surface.chart().unwrap(), 32).unwrap();
        let params = SobolevParams::new(2, surface.codim(), p).unwrap();
        let f = seeded_bumps(&patch, seed).unwrap();
        let r = sobolev_quotient(&patch, &f, &params).unwrap();
        prop_assert!(r.margin > 0.0, "{:?}", r);
    }
}
