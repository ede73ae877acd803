use proptest::prelude::*;

use seqmon_core::boundaries::{
    calibrate_gamma, conditional_power, decide, thresholds_from_gamma, BoundarySpec, Decision,
    Drift,
};
use seqmon_core::design::{
    fixed_sample_size, reestimate_sample_size, DesignSpec, SampleSizeFormula, Sided,
};
use seqmon_core::monitor::{ambiguous_direction_analysis, analyze_interim, Labeling};
use seqmon_core::optimize::{
    crossing_probabilities, evaluate_design, Drifts, GroupSequentialDesign,
};
use seqmon_core::stats::{
    fisher_one_sided_p, fisher_test, hypergeom_pmf, max_significance_one_sided_p, normal_cdf,
    normal_quantile, two_prop_z_test, Direction, TwoByTwoTable,
};

fn table() -> impl Strategy<Value = TwoByTwoTable> {
    (1u64..120, 1u64..120)
        .prop_flat_map(|(na, nb)| (0..=na, Just(na), 0..=nb, Just(nb)))
        .prop_map(|(a, na, b, nb)| TwoByTwoTable::new(a, na, b, nb).unwrap())
}

fn observed_mass(t: &TwoByTwoTable) -> f64 {
    hypergeom_pmf(t.events_a, t.total(), t.total_events(), t.total_a).unwrap()
}

proptest! {
    #[test]
    fn point_mass_identity(t in table()) {
        let up = fisher_one_sided_p(&t, Direction::AExceedsB);
        let down = fisher_one_sided_p(&t, Direction::BExceedsA);
        prop_assert!((up + down - observed_mass(&t) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn label_swap_preserves_p_and_negates_z(t in table(), dir in prop_oneof![Just(Direction::AExceedsB), Just(Direction::BExceedsA)]) {
        let s = t.swapped();
        prop_assert_eq!(fisher_one_sided_p(&t, dir), fisher_one_sided_p(&s, dir.flipped()));
        let (x, y) = (fisher_test(&t, dir), fisher_test(&s, dir.flipped()));
        prop_assert!((x.p_two_sided - y.p_two_sided).abs() < 1e-12);
        prop_assert!((x.z + y.z).abs() < 1e-12);
        if let (Ok(x), Ok(y)) = (two_prop_z_test(&t, dir), two_prop_z_test(&s, dir.flipped())) {
            prop_assert!((x.p_one_sided - y.p_one_sided).abs() < 1e-12);
        }
    }

    #[test]
    fn max_significance_is_the_minimum(t in table()) {
        let (p, d) = max_significance_one_sided_p(&t);
        let a = fisher_one_sided_p(&t, Direction::AExceedsB);
        let b = fisher_one_sided_p(&t, Direction::BExceedsA);
        prop_assert_eq!(p, a.min(b));
        prop_assert_eq!(p, fisher_one_sided_p(&t, d));
    }

    #[test]
    fn upper_p_strictly_decreasing_over_support(na in 1u64..80, nb in 1u64..80, m_frac in 0.0f64..1.0) {
        let m = ((na + nb) as f64 * m_frac).floor() as u64;
        let lo = m.saturating_sub(nb);
        let hi = m.min(na);
        let mut prev = f64::INFINITY;
        for a in lo..=hi {
            let t = TwoByTwoTable::new(a, na, m - a, nb).unwrap();
            let p = fisher_one_sided_p(&t, Direction::AExceedsB);
            // Tail masses below one ulp of 1 cannot move a value that rounds to 1.
            prop_assert!(p <= prev);
            prop_assert!(p < prev || prev >= 1.0 - 1e-15);
            prev = p;
        }
    }

    #[test]
    fn normal_round_trip(z in -8.0f64..8.0) {
        // Above z = 5 the CDF is within a few ulps of 1, so the positive half
        // goes through the symmetric lower tail.
        let back = if z <= 0.0 {
            normal_quantile(normal_cdf(z).unwrap()).unwrap()
        } else {
            -normal_quantile(normal_cdf(-z).unwrap()).unwrap()
        };
        prop_assert!((back - z).abs() <= 1e-9);
        if z <= 5.0 {
            prop_assert!((normal_quantile(normal_cdf(z).unwrap()).unwrap() - z).abs() <= 1e-9);
        }
    }

    #[test]
    fn sample_size_monotone(pc in 0.3f64..0.8, d1 in 0.05f64..0.15, extra in 0.01f64..0.1, power in 0.6f64..0.9, formula in prop_oneof![Just(SampleSizeFormula::SimplePooled), Just(SampleSizeFormula::PooledPlusAltVariance)]) {
        let base = DesignSpec { p_control: pc, p_treatment: pc - d1, power, ..DesignSpec::default() };
        let n = fixed_sample_size(&base, formula).unwrap().n_per_group;
        let wider = DesignSpec { p_treatment: pc - d1 - extra, ..base };
        prop_assert!(fixed_sample_size(&wider, formula).unwrap().n_per_group <= n);
        let looser = DesignSpec { alpha: 0.1, ..base };
        prop_assert!(fixed_sample_size(&looser, formula).unwrap().n_per_group <= n);
        let stronger = DesignSpec { power: power + 0.05, ..base };
        prop_assert!(fixed_sample_size(&stronger, formula).unwrap().n_per_group >= n);
    }

    #[test]
    fn reestimation_at_planned_rate_is_identity(pc in 0.2f64..0.8, rr in 0.4f64..0.8) {
        let spec = DesignSpec { p_control: pc, p_treatment: pc * rr, sided: Sided::Two, ..DesignSpec::default() };
        let n = fixed_sample_size(&spec, SampleSizeFormula::SimplePooled).unwrap();
        let r = reestimate_sample_size(&spec, spec.expected_pooled_rate(), 2, SampleSizeFormula::SimplePooled).unwrap();
        prop_assert!(r.n_total.abs_diff(n.n_total) <= 2);
    }

    #[test]
    fn conditional_power_monotone(z in -3.0f64..3.0, dz in 0.01f64..1.0, t in 0.05f64..0.95, a in 0.005f64..0.1) {
        let lo = conditional_power(z, t, a, Drift::CurrentTrend).unwrap();
        let hi = conditional_power(z + dz, t, a, Drift::CurrentTrend).unwrap();
        prop_assert!(hi > lo || (lo == 1.0 && hi == 1.0) || (lo == 0.0 && hi == 0.0));
        // Smaller alpha means a larger final critical value.
        let strict = conditional_power(z, t, a / 2.0, Drift::CurrentTrend).unwrap();
        prop_assert!(strict <= lo);
    }

    #[test]
    fn calibration_round_trip(p_sig in 0.001f64..0.02, p_fut in 0.2f64..0.6, t in 0.2f64..0.8) {
        let (gs, gf) = calibrate_gamma(p_sig, p_fut, t, 0.025).unwrap();
        let b = thresholds_from_gamma(gs, gf, t, 0.025).unwrap();
        prop_assert!((b.p_sig - p_sig).abs() <= 1e-9);
        prop_assert!((b.p_fut - p_fut).abs() <= 1e-9);
    }

    #[test]
    fn decide_is_monotone(p in 0.0f64..1.0, dp in 0.0f64..0.5) {
        let b = BoundarySpec::direct(0.0081, 0.382, 0.5, 0.025).unwrap();
        let rank = |d: Decision| match d {
            Decision::StopSignificance => 0,
            Decision::Continue => 1,
            Decision::StopFutility => 2,
        };
        prop_assert!(rank(decide((p + dp).min(1.0), &b)) >= rank(decide(p, &b)));
    }

    #[test]
    fn ambiguous_analysis_ignores_labels(t in table()) {
        let b = BoundarySpec::direct(0.0081, 0.382, 0.5, 0.025).unwrap();
        prop_assert_eq!(ambiguous_direction_analysis(&t, &b), ambiguous_direction_analysis(&t.swapped(), &b));
    }

    #[test]
    fn labelings_satisfy_point_mass_identity(t in table()) {
        let b = BoundarySpec::direct(0.0081, 0.382, 0.5, 0.025).unwrap();
        let r = analyze_interim(&t, &b, Direction::BExceedsA, true).unwrap();
        let p1 = r.labeling(Labeling::ATreatment).unwrap().p_one_sided;
        let p2 = r.labeling(Labeling::BTreatment).unwrap().p_one_sided;
        prop_assert!((p1 + p2 - observed_mass(&t) - 1.0).abs() < 1e-10);
        prop_assert_eq!(r.overall.deblind_required, r.overall.decision.is_none());
    }

    #[test]
    fn crossing_probabilities_normalize(
        u1 in 1.5f64..4.0, l1 in -2.0f64..1.0, u2 in 1.5f64..3.5, l2 in -1.0f64..1.4,
        c in 1.6f64..2.4, drift in -4.0f64..4.0, ratio in 0.8f64..1.5,
    ) {
        let d = GroupSequentialDesign {
            info_fractions: vec![1.0 / 3.0, 2.0 / 3.0, 1.0],
            upper_z: vec![u1, u2, c],
            lower_z: vec![l1, l2.min(u2 - 0.1), c],
            n_fixed_reference: 100,
            max_ratio: ratio,
        };
        let r = crossing_probabilities(&d, drift).unwrap();
        let total: f64 = r.looks.iter().map(|l| l.stop_high + l.stop_low).sum::<f64>() + r.continue_final;
        prop_assert!((total - 1.0).abs() < 1e-6, "{}", total);
    }

    #[test]
    fn finite_futility_boundary_saves_patients_under_harm(l1 in -1.0f64..1.0, u1 in 2.0f64..4.0, theta in 1.0f64..5.0) {
        let d = GroupSequentialDesign {
            info_fractions: vec![0.5, 1.0],
            upper_z: vec![u1, 1.96],
            lower_z: vec![l1, 1.96],
            n_fixed_reference: 200,
            max_ratio: 1.0,
        };
        let e = evaluate_design(&d, Drifts::for_design(0.025, 0.8, -theta)).unwrap();
        prop_assert!(e.expected_n.negative < 200.0);
    }
}

#[test]
fn single_look_reproduces_fixed_design() {
    let z = normal_quantile(0.975).unwrap();
    let d = GroupSequentialDesign::fixed(z, 182);
    let e = evaluate_design(&d, Drifts::for_design(0.025, 0.8, -2.0)).unwrap();
    assert!((e.size - 0.025).abs() < 1e-12);
    assert!((e.power - 0.8).abs() < 1e-12);
}

#[test]
fn futility_threshold_falls_with_information() {
    let (gs, gf) = calibrate_gamma(0.0081, 0.382, 0.5, 0.025).unwrap();
    let p_fut: Vec<f64> = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
        .iter()
        .map(|&t| thresholds_from_gamma(gs, gf, t, 0.025).unwrap().p_fut)
        .collect();
    assert!(p_fut.windows(2).all(|w| w[1] < w[0]), "{p_fut:?}");
}
