//! Invariants of the distance and the intervals on random inputs. Runnable
//! on its own with `cargo test -p swinfer-core --test properties`.

mod common;

use common::*;
use proptest::prelude::*;
use swinfer_core::*;

fn order() -> impl Strategy<Value = TrimOrder> {
    (prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]), prop::sample::select(vec![0.0, 0.05, 0.1, 0.2]))
        .prop_map(|(r, delta)| TrimOrder::new(r, delta).unwrap())
}

/// Three Gaussian samples of unrelated sizes and locations, plus directions.
fn triple() -> impl Strategy<Value = (Sample, Sample, Sample, DirectionSet)> {
    (1usize..=3, 2usize..60, 2usize..60, 2usize..60, any::<u64>()).prop_map(|(d, n1, n2, n3, seed)| {
        let mut rng = seeded(seed);
        let x = gaussian_sample(&mut rng, n1, d, 0.0, 1.0);
        let y = gaussian_sample(&mut rng, n2, d, 0.7, 2.0);
        let z = gaussian_sample(&mut rng, n3, d, -1.3, 0.5);
        (x, y, z, sample_directions(d, 16, seed).unwrap())
    })
}

/// Samples large enough for the relative VC constant to stay below one at
/// `α/N` with four directions.
fn relvc_pair() -> impl Strategy<Value = (Sample, Sample, DirectionSet)> {
    (1usize..=3, 400usize..700, 400usize..700, any::<u64>()).prop_map(|(d, n, m, seed)| {
        let mut rng = seeded(seed);
        let x = gaussian_sample(&mut rng, n, d, 0.0, 1.0);
        let y = gaussian_sample(&mut rng, m, d, 0.4, 1.5);
        (x, y, sample_directions(d, 4, seed).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sliced_distance_is_a_metric((x, y, z, dirs) in triple(), to in order()) {
        prop_assert_eq!(metric_axioms(&x, &y, &z, to, &dirs), Ok(()));
    }

    #[test]
    fn affine_maps_scale_distance_and_interval(
        (x, y, _, dirs) in triple(),
        to in order(),
        a in 0.01f64..50.0,
        b in -20.0f64..20.0,
    ) {
        let shift = vec![b; x.d()];
        prop_assert_eq!(affine_equivariance(&x, &y, a, &shift, to, &dirs), Ok(()));
    }

    #[test]
    fn intervals_widen_as_alpha_shrinks(
        (x, y, _, dirs) in triple(),
        to in order(),
        a1 in 0.001f64..0.5,
        a2 in 0.001f64..0.5,
    ) {
        prop_assert_eq!(alpha_monotone(&x, &y, (a1, a2), BandFamily::Dkw, to, &dirs), Ok(()));
    }

    #[test]
    fn relvc_intervals_widen_as_alpha_shrinks(
        (x, y, dirs) in relvc_pair(),
        to in order(),
        a1 in 0.01f64..0.5,
        a2 in 0.01f64..0.5,
    ) {
        prop_assert_eq!(alpha_monotone(&x, &y, (a1, a2), BandFamily::RelVc, to, &dirs), Ok(()));
    }

    #[test]
    fn hybrid_takes_the_branch_its_pretest_names(
        (x, y, _, dirs) in triple(),
        to in order(),
        tol in prop::sample::select(vec![0.0, 1e-3, 0.05]),
    ) {
        prop_assert_eq!(hybrid_soundness(&x, &y, to, &dirs, tol), Ok(()));
    }

    #[test]
    fn duplicated_points_force_the_finite_branch((x, y, _, dirs) in triple(), to in order()) {
        let mut rows: Vec<Vec<f64>> = x.points().map(<[f64]>::to_vec).collect();
        rows.push(rows[0].clone());
        let x = Sample::from_rows(&rows).unwrap();
        let mut cfg = CiConfig::new(0.05, BandFamily::Dkw);
        cfg.override_a1 = true;
        let h = hybrid_ci(&x, &y, to, &cfg, &BootstrapConfig::new(20, 1, 0.05), &dirs, 0.0).unwrap();
        prop_assert_eq!(h.branch, Some(Branch::Finite));
    }

    #[test]
    fn finite_interval_brackets_the_estimate((x, y, _, dirs) in triple(), to in order()) {
        let mut cfg = CiConfig::new(0.05, BandFamily::Dkw);
        cfg.override_a1 = true;
        let ci = ci_sliced(&x, &y, to, &cfg, &dirs).unwrap();
        let est = sliced_wasserstein(&x, &y, to, &dirs).unwrap();
        prop_assert!(ci.lower <= est * (1.0 + REL_EPS) && est <= ci.upper * (1.0 + REL_EPS), "{} {} {}", ci.lower, est, ci.upper);
    }

    #[test]
    fn one_dimensional_shift_is_recovered(values in prop::collection::vec(-1e3f64..1e3, 1..80), c in -50.0f64..50.0, to in order()) {
        let x = SortedProjection::new(values.clone()).unwrap();
        let y = SortedProjection::new(values.iter().map(|v| v + c).collect()).unwrap();
        let w = wasserstein_1d(&x, &y, to).unwrap();
        prop_assert!((w - c.abs()).abs() <= 1e-9 * (1.0 + c.abs()), "{w} vs {c}");
    }

    #[test]
    fn sup_distance_dominates_every_order(
        a in prop::collection::vec(-10.0f64..10.0, 1..40),
        b in prop::collection::vec(-10.0f64..10.0, 1..40),
        to in order(),
    ) {
        let (x, y) = (SortedProjection::new(a).unwrap(), SortedProjection::new(b).unwrap());
        let w = wasserstein_1d(&x, &y, to).unwrap();
        let sup = wasserstein_inf_1d(&x, &y, to.delta()).unwrap();
        prop_assert!(w <= sup * (1.0 + REL_EPS) + REL_EPS, "{w} > {sup}");
    }
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    assert_eq!(thread_determinism(4), Ok(()));
}
