use seqmon_core::optimize::{
    evaluate_design, optimize_design, Drifts, OptimizeSpec, SearchSettings,
};

const ALPHA: f64 = 0.025;
const POWER: f64 = 0.8;

fn spec(looks: usize, drift: f64) -> OptimizeSpec {
    OptimizeSpec {
        looks,
        alpha: ALPHA,
        power: POWER,
        objective_drift: drift,
        n_fixed: 390,
    }
}

#[test]
fn optimized_designs_dominate_the_fixed_design() {
    for drift in [0.0, -4.0] {
        let opt = optimize_design(spec(3, drift), SearchSettings::default(), None).unwrap();
        let e = evaluate_design(&opt.design, Drifts::for_design(ALPHA, POWER, drift)).unwrap();
        assert!((e.size - ALPHA).abs() <= 1e-3, "{}", e.size);
        assert!(e.power >= POWER - 1e-3, "{}", e.power);
        assert!(e.expected_n.negative < 390.0);
        assert!(e.expected_n.null <= 390.0 && e.expected_n.alternative <= 390.0);
        assert!((e.en_ratio_negative - opt.objective_ratio).abs() < 1e-9);
        assert!(opt.refined_ratio <= opt.objective_ratio + 1e-12);
        opt.design.validate().unwrap();
    }
}

#[test]
fn more_looks_never_hurt() {
    let drift = -5.0;
    let k2 = optimize_design(spec(2, drift), SearchSettings::default(), None).unwrap();
    let k4 = optimize_design(spec(4, drift), SearchSettings::default(), Some(&k2.design)).unwrap();
    assert!(
        k4.objective_ratio <= k2.objective_ratio + 1e-3,
        "{} vs {}",
        k4.objective_ratio,
        k2.objective_ratio
    );
}
