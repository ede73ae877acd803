//! Crossing probabilities from the quadrature recursion against plain Monte
//! Carlo of the sequential z process.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use seqmon_core::boundaries::{comparator_z_boundaries, Comparator};
use seqmon_core::optimize::{crossing_probabilities, GroupSequentialDesign};

const DRAWS: usize = 1_000_000;

/// Per-look (stop_high, stop_low) frequencies.
fn monte_carlo(design: &GroupSequentialDesign, drift: f64, seed: u64) -> Vec<(f64, f64)> {
    let info: Vec<f64> = design
        .info_fractions
        .iter()
        .map(|t| t * design.max_ratio)
        .collect();
    let k = info.len();
    let mut high = vec![0u64; k];
    let mut low = vec![0u64; k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..DRAWS {
        let mut s = 0.0;
        let mut prev = 0.0;
        for j in 0..k {
            let d = info[j] - prev;
            let e: f64 = StandardNormal.sample(&mut rng);
            s += drift * d + d.sqrt() * e;
            prev = info[j];
            let z = s / info[j].sqrt();
            if z >= design.upper_z[j] {
                high[j] += 1;
                break;
            }
            if z <= design.lower_z[j] {
                low[j] += 1;
                break;
            }
        }
    }
    let n = DRAWS as f64;
    high.iter()
        .zip(&low)
        .map(|(&h, &l)| (h as f64 / n, l as f64 / n))
        .collect()
}

fn within_three_se(quad: f64, mc: f64) -> bool {
    let se = (quad * (1.0 - quad) / DRAWS as f64).sqrt();
    (quad - mc).abs() <= 3.0 * se + 1e-6
}

fn check(design: &GroupSequentialDesign, drift: f64, seed: u64) {
    let quad = crossing_probabilities(design, drift).unwrap();
    let mc = monte_carlo(design, drift, seed);
    for (j, (q, m)) in quad.looks.iter().zip(&mc).enumerate() {
        assert!(
            within_three_se(q.stop_high, m.0) && within_three_se(q.stop_low, m.1),
            "look {}: quadrature ({}, {}) vs simulation ({}, {}) at drift {drift}",
            j + 1,
            q.stop_high,
            q.stop_low,
            m.0,
            m.1
        );
    }
}

fn five_look() -> GroupSequentialDesign {
    GroupSequentialDesign {
        info_fractions: vec![0.2, 0.4, 0.6, 0.8, 1.0],
        upper_z: vec![3.2, 2.8, 2.5, 2.2, 2.0],
        lower_z: vec![-1.0, -0.2, 0.5, 1.2, 2.0],
        n_fixed_reference: 390,
        max_ratio: 1.1,
    }
}

#[test]
fn two_look_design_matches_simulation() {
    let d = GroupSequentialDesign {
        info_fractions: vec![0.5, 1.0],
        upper_z: vec![2.4, 1.96],
        lower_z: vec![0.3, 1.96],
        n_fixed_reference: 200,
        max_ratio: 1.0,
    };
    check(&d, 0.0, 1);
    check(&d, 2.8, 2);
}

#[test]
fn five_look_design_matches_simulation() {
    let d = five_look();
    check(&d, 0.0, 3);
    check(&d, 2.8, 4);
    check(&d, -3.0, 5);
}

#[test]
fn symmetric_boundaries_mirror_under_drift_reversal() {
    let d = GroupSequentialDesign {
        info_fractions: vec![0.5, 1.0],
        upper_z: vec![2.5, 2.0],
        lower_z: vec![-2.5, -2.0],
        n_fixed_reference: 100,
        max_ratio: 1.0,
    };
    for theta in [0.5, 1.7, 3.0] {
        let plus = crossing_probabilities(&d, theta).unwrap();
        let minus = crossing_probabilities(&d, -theta).unwrap();
        for (p, m) in plus.looks.iter().zip(&minus.looks) {
            assert!((p.stop_high - m.stop_low).abs() < 1e-10);
        }
    }
    check(&d, 1.7, 6);
}

#[test]
fn obrien_fleming_simulated_size() {
    let z = comparator_z_boundaries(Comparator::OBrienFleming, 2, 0.025).unwrap();
    let d = GroupSequentialDesign {
        info_fractions: vec![0.5, 1.0],
        upper_z: z.clone(),
        lower_z: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
        n_fixed_reference: 100,
        max_ratio: 1.0,
    };
    let mc = monte_carlo(&d, 0.0, 7);
    let size: f64 = mc.iter().map(|m| m.0).sum();
    let se = (0.025f64 * 0.975 / DRAWS as f64).sqrt();
    assert!((size - 0.025).abs() <= 3.0 * se, "{size}");
    assert!(z[0] > z[1]);
}
