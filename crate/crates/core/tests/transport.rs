use proptest::prelude::*;
use sobolev_lab::constants::SobolevParams;
use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::quadrature::integrate_1d;
use sobolev_lab::sobolev::{seeded_positive_field, FieldSum, RadialField, Shape};
use sobolev_lab::specfun::{radial_integral_closed, RadialIntegralParams};
use sobolev_lab::transport::*;
use sobolev_lab::LabError;

fn catenoid(count: usize) -> Patch {
    Patch::uniform(Surface::Catenoid.chart().unwrap(), count).unwrap()
}

fn radius(c: &WeightedCloud, i: usize) -> f64 {
    c.point(i).iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn radial_cdf_matches_independent_quadrature() {
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let law = RadialLaw::new(&params).unwrap();
    assert_eq!(law.cdf(0.0), 0.0);
    assert!((law.cdf(1e12) - 1.0).abs() < 1e-12);
    // F(r) = ∫₀^r s²(1+s³)^{−7/3} ds over the full radial integral.
    let total =
        radial_integral_closed(&RadialIntegralParams::new(1.0, 3.0, 2.0, 7.0 / 3.0).unwrap());
    for r in [0.1, 0.5, 1.0, 2.0, 5.0, 30.0] {
        let part = integrate_1d(
            |s| s * s * (1.0 + s.powi(3)).powf(-7.0 / 3.0),
            0.0,
            r,
            1e-13,
        )
        .unwrap()
        .value;
        assert!((law.cdf(r) - part / total).abs() < 1e-6, "r={r}");
    }
    let mut prev = 0.0;
    for k in 1..100 {
        let q = law.quantile(k as f64 / 100.0);
        assert!(q > prev);
        assert!((law.cdf(q) - k as f64 / 100.0).abs() < 1e-9);
        prev = q;
    }
}

#[test]
fn target_moment_and_radius_distribution() {
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let law = RadialLaw::new(&params).unwrap();
    let n = 100_000;
    let cloud = sample_from_law(&law, n, 7);
    let again = sample_from_law(&law, n, 7);
    assert_eq!(cloud.points, again.points);
    assert!(cloud.weights.iter().all(|&w| w == 1.0 / n as f64));

    let v: Vec<f64> = (0..n).map(|i| radius(&cloud, i).powi(3)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let z = (mean - 3.0) / (var / n as f64).sqrt();
    assert!(z.abs() < 3.0, "mean {mean}, z {z}");

    let mut r: Vec<f64> = (0..n).map(|i| radius(&cloud, i)).collect();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n as f64)
                .abs()
                .max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.63 / (n as f64).sqrt(), "KS {ks}");
}

#[test]
fn source_weights_follow_the_density() {
    let flat = Patch::uniform(Surface::Flat { n: 2, m: 0 }.chart().unwrap(), 16).unwrap();
    let params = SobolevParams::new(2, 0, 1.5).unwrap();
    let cloud = sample_source(&flat, &FieldSum::constant(1.0), &params, 200, 3).unwrap();
    assert!((cloud.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(cloud
        .weights
        .iter()
        .all(|w| (w - 1.0 / 200.0).abs() < 1e-15));

    let patch = catenoid(48);
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let peak = RadialField::new(
        vec![1.0, 0.0, 0.0],
        1.0,
        Shape::Gaussian { width: 0.1 },
        None,
    );
    let f = FieldSum {
        offset: 1e-3,
        terms: vec![peak],
    };
    let cloud = sample_source(&patch, &f, &params, 1000, 5).unwrap();
    assert!((cloud.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut w = cloud.weights.clone();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top: f64 = w[..w.len() / 10].iter().sum();
    assert!(top > 0.5, "top decile carries {top}");
    let same = sample_source(&patch, &f, &params, 1000, 5).unwrap();
    assert_eq!(cloud.points, same.points);
}

#[test]
fn catenoid_plan_invariants() {
    let patch = catenoid(32);
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let f = seeded_positive_field(&patch, 11);
    let source = sample_source(&patch, &f, &params, 200, 11).unwrap();
    let target = sample_target(&params, 200, 12).unwrap();
    let plan = solve_plan(&source, &target, 0.05, 1e-9, 20_000).unwrap();
    assert!(plan.converged);
    assert!(plan.marginal_residual <= 1e-9);
    for (i, w) in source.weights.iter().enumerate() {
        assert!((plan.row(i).iter().sum::<f64>() - w).abs() <= 1e-8);
    }
    for (c, w) in plan.column_sums().iter().zip(&target.weights) {
        assert!((c - w).abs() <= 1e-12);
    }
    assert!(plan.dual_monotone());
    let mean: f64 = plan
        .potential_source
        .iter()
        .zip(&source.weights)
        .map(|(f, w)| f * w)
        .sum();
    assert!(mean.abs() < 1e-10);

    let again = solve_plan(&source, &target, 0.05, 1e-9, 20_000).unwrap();
    assert_eq!(plan.coupling, again.coupling);
    assert_eq!(plan.potential_source, again.potential_source);

    let stats = tangential_structure_residual(&plan, &source, &target, 12).unwrap();
    assert!(stats.projector_identity <= 1e-12);
    assert!(stats.median.is_finite() && stats.p90 >= stats.median);
    let j = estimate_j(&plan, &source, &target, &params).unwrap();
    assert!(j.j_hat <= j.plan_moment + 1e-12);
    assert_eq!(j.j_bound, 3.0);

    let csv = matched_pairs_csv(&plan, &source, &target);
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn neighbor_count_is_validated() {
    let patch = catenoid(16);
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let source = sample_source(&patch, &FieldSum::constant(1.0), &params, 30, 1).unwrap();
    let target = sample_target(&params, 30, 2).unwrap();
    let plan = solve_plan(&source, &target, 0.1, 1e-8, 10_000).unwrap();
    for k in [1, 30] {
        assert!(matches!(
            potential_gradients(&plan, &source, k),
            Err(LabError::InsufficientNeighbors { .. })
        ));
    }
    assert!(potential_gradients(&plan, &source, 29).is_ok());
}

#[test]
fn narrow_source_gives_finite_j() {
    let patch = catenoid(48);
    let params = SobolevParams::new(2, 1, 1.5).unwrap();
    let spike = RadialField::new(
        vec![1.0, 0.0, 0.0],
        1.0,
        Shape::Gaussian { width: 0.02 },
        None,
    );
    let f = FieldSum {
        offset: 0.0,
        terms: vec![spike],
    };
    let source = sample_source(&patch, &f, &params, 300, 9).unwrap();
    let target = sample_target(&params, 300, 10).unwrap();
    let plan = solve_plan(&source, &target, 0.05, 1e-7, 20_000).unwrap();
    let j = estimate_j(&plan, &source, &target, &params).unwrap();
    assert!(j.j_hat.is_finite() && j.plan_moment.is_finite());
}

#[test]
fn flat_bubble_source_recovers_euclidean_j() {
    let chart = Surface::FlatBall {
        n: 3,
        m: 1,
        radius: 20.0,
        grading: 6.0,
    }
    .chart()
    .unwrap();
    let patch = Patch::new(chart, &[32, 8, 4]).unwrap();
    let source_params = SobolevParams::new(3, 1, 2.0).unwrap();
    let target_params = SobolevParams::new(3, 0, 2.0).unwrap();
    let f = RadialField::bubble(vec![0.0; 4], 1.0, 3, 2.0, None);
    let source = sample_source(&patch, &f, &source_params, 500, 7).unwrap();
    let target = sample_target(&target_params, 500, 8)
        .unwrap()
        .padded(4)
        .unwrap();
    let plan = solve_plan(&source, &target, 0.1, 1e-5, 5000).unwrap();
    let j = estimate_j(&plan, &source, &target, &target_params).unwrap();
    assert!((j.j_hat / 3.0 - 1.0).abs() <= 0.1, "J = {}", j.j_hat);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn plans_respect_marginals_and_jensen(seed in 0u64..1000, eps in 0.05f64..0.5) {
        let patch = catenoid(16);
        let params = SobolevParams::new(2, 1, 1.5).unwrap();
        let f = seeded_positive_field(&patch, seed);
        let source = sample_source(&patch, &f, &params, 60, seed).unwrap();
        let target = sample_target(&params, 60, seed + 1).unwrap();
        let plan = solve_plan(&source, &target, eps, 1e-9, 50_000).unwrap();
        prop_assert!(plan.marginal_residual <= 1e-9);
        prop_assert!(plan.coupling.iter().all(|&x| x >= 0.0));
        prop_assert!(plan.dual_monotone());
        let j = estimate_j(&plan, &source, &target, &params).unwrap();
        prop_assert!(j.j_hat <= j.plan_moment + 1e-12);
        let stats = tangential_structure_residual(&plan, &source, &target, 12).unwrap();
        prop_assert!(stats.projector_identity <= 1e-12);
    }
}
