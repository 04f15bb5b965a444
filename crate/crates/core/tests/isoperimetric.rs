use std::f64::consts::PI;

use proptest::prelude::*;
use sobolev_lab::constants::Branch;
use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::isoperimetric::*;
use sobolev_lab::sobolev::{seeded_positive_field, FieldSum, RadialField, Shape};
use sobolev_lab::LabError;

#[test]
fn sqrt_density_is_exact() {
    for n in [2, 3, 5] {
        let d = sqrt_density(n).unwrap();
        assert!((d.mass - 1.0).abs() < 1e-10);
        assert!(slice_deviation(&d, 512).unwrap() <= 1e-10);
        let omega = (n as f64 / 2.0 * PI.ln() - libm_lgamma(n as f64 / 2.0 + 1.0)).exp();
        let a = alpha_of_density(&d).unwrap();
        assert!((a.alpha * omega - 1.0).abs() < 1e-10, "{n}: {a:?}");
    }
}

// ln Γ through the recurrence down to Γ(1) = 1 and Γ(1/2) = √π; enough for half-integers.
fn libm_lgamma(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    while y > 1.0 {
        y -= 1.0;
        acc += y.ln();
    }
    if (y - 0.5).abs() < 1e-12 {
        acc + 0.5 * PI.ln()
    } else {
        acc
    }
}

#[test]
fn codimension_two_power_densities_attain_the_upper_bound() {
    for n in [2, 3, 4] {
        for j in [1, 5, 50, 500] {
            let d = power_density(j, n, 2).unwrap();
            let a = alpha_of_density(&d).unwrap();
            let closed = PI * d.normalizer / (j as f64 + 1.0);
            assert!((a.alpha / closed - 1.0).abs() < 1e-8, "{n} {j}");
            assert!((power_alpha_upper(&d).unwrap() / closed - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn codimension_three_sweep_approaches_lower_bound() {
    for n in [2, 3] {
        let rows = alpha_sweep(n, 3, &[1, 10, 100, 1000]).unwrap();
        let bounds = alpha_bounds(n, 3).unwrap();
        assert_eq!(bounds.active, Branch::Codimension);
        for w in rows.windows(2) {
            assert!(w[1].alpha < w[0].alpha);
        }
        for row in &rows {
            assert!(row.alpha <= row.upper * (1.0 + 1e-10));
            assert!(row.alpha >= row.lower);
        }
        let last = rows.last().unwrap();
        assert!(last.alpha / last.lower - 1.0 < 1e-2);
    }
}

#[test]
fn sphere_with_unit_field_has_ratio_one_half() {
    let patch = Patch::new(Surface::Sphere { n: 2 }.chart().unwrap(), &[128, 32]).unwrap();
    let r = check_isoperimetric(&patch, &FieldSum::constant(1.0)).unwrap();
    assert!((r.lhs - 2.0 * PI.sqrt()).abs() < 1e-6);
    assert!((r.rhs - 4.0 * PI.sqrt()).abs() < 1e-6);
    assert!((r.ratio - 0.5).abs() < 1e-6);
    assert_eq!(r.boundary, 0.0);
    assert!(r.passed);
}

#[test]
fn flat_disk_is_extremal() {
    let patch = Patch::new(Surface::disk().chart().unwrap(), &[32, 32]).unwrap();
    let r = check_isoperimetric(&patch, &FieldSum::constant(1.0)).unwrap();
    assert!((r.ratio - 1.0).abs() < 1e-8, "{r:?}");
    assert!((r.boundary - 2.0 * PI).abs() < 1e-10);
    assert!(r.passed);
}

#[test]
fn catenoid_with_bump_includes_rims() {
    let patch = Patch::uniform(Surface::Catenoid.chart().unwrap(), 64).unwrap();
    let f = FieldSum {
        offset: 1.0,
        terms: vec![RadialField::new(
            vec![1.0, 0.0, 0.0],
            2.0,
            Shape::Bump { radius: 0.5 },
            None,
        )],
    };
    let r = check_isoperimetric(&patch, &f).unwrap();
    assert!(r.boundary > 4.0 * PI * 1f64.cosh() - 1e-9);
    assert!(r.passed && r.ratio < 1.0);
}

#[test]
fn seeded_positive_fields_pass_on_every_member() {
    for surface in Surface::all_members() {
        let count = if surface.dim() == 3 { 12 } else { 32 };
        let patch = Patch::uniform(surface.chart().unwrap(), count).unwrap();
        for seed in 0..10 {
            let f = seeded_positive_field(&patch, seed);
            let r = check_isoperimetric(&patch, &f).unwrap();
            assert!(r.passed, "{surface:?} seed {seed}: {r:?}");
        }
    }
}

#[test]
fn non_positive_fields_are_rejected() {
    let patch = Patch::uniform(Surface::Catenoid.chart().unwrap(), 8).unwrap();
    let f = FieldSum {
        offset: 0.0,
        terms: vec![RadialField::new(
            vec![1.0, 0.0, 0.0],
            1.0,
            Shape::Bump { radius: 0.3 },
            None,
        )],
    };
    assert!(matches!(
        check_isoperimetric(&patch, &f),
        Err(LabError::Positivity { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ratio_is_homogeneous(seed in 0u64..1000, scale in 1e-3f64..1e3) {
        let patch = Patch::uniform(Surface::Enneper.chart().unwrap(), 16).unwrap();
        let f = seeded_positive_field(&patch, seed);
        let mut g = f.clone();
        g.offset *= scale;
        for t in &mut g.terms {
            t.amplitude *= scale;
        }
        let a = check_isoperimetric(&patch, &f).unwrap();
        let b = check_isoperimetric(&patch, &g).unwrap();
        prop_assert!((a.ratio / b.ratio - 1.0).abs() < 1e-12);
        prop_assert!((b.lhs / a.lhs / scale - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_alpha_between_bounds(j in 1u32..200, n in 2usize..5, m in 1usize..5) {
        let d = power_density(j, n, m).unwrap();
        let a = alpha_of_density(&d).unwrap().alpha;
        let lower = alpha_bounds(n, m).unwrap().lower;
        prop_assert!(a >= lower * (1.0 - 1e-12));
        if m >= 2 {
            prop_assert!(a <= power_alpha_upper(&d).unwrap() * (1.0 + 1e-10));
        }
    }
}
