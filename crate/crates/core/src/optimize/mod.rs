//! Group-sequential designs on the normal information scale: exact crossing
//! probabilities, design evaluation, and a grid coordinate-descent search for
//! designs minimizing expected sample size under a chosen drift.
//!
//! Drift is measured in units of the fixed-sample design: a drift `θ` means
//! `E[Z] = θ` for a single analysis at the fixed sample size. A design with
//! maximum sample size `R · n_fixed` observes `Z_k` at information
//! `R · t_k` with mean `θ √(R t_k)`.

mod counterfactual;
mod crossing;
mod search;

pub use counterfactual::{
    endpoint_setup, propatria_counterfactuals, ActualDesignOutcome, CandidateDesign,
    CounterfactualReport, EndpointCounterfactual, EndpointKind, EndpointSetup, SearchSummary,
    ACTUAL_INTERIM_N, ACTUAL_N_MAX, ACTUAL_P_FUT, ACTUAL_P_SIG, REPORTED_EN_RATIO,
    REPORTED_MORTALITY_STOP_N,
};
pub use search::{optimize_design, OptimizeSpec, OptimizedDesign, SearchSettings};

pub(crate) use crossing::{crossings, FINE_GRID};

use crate::error::{domain, Result};
use crate::stats::phi_inv;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSequentialDesign {
    /// Fractions of the maximum sample size at each look; the last is 1.
    pub info_fractions: Vec<f64>,
    /// Efficacy boundaries on the z scale.
    pub upper_z: Vec<f64>,
    /// Futility boundaries on the z scale; equals `upper_z` at the final look.
    pub lower_z: Vec<f64>,
    pub n_fixed_reference: u64,
    /// Maximum sample size as a multiple of `n_fixed_reference`.
    pub max_ratio: f64,
}

impl GroupSequentialDesign {
    /// The single-look design rejecting when `Z ≥ z_crit`.
    pub fn fixed(z_crit: f64, n_fixed: u64) -> Self {
        Self {
            info_fractions: vec![1.0],
            upper_z: vec![z_crit],
            lower_z: vec![z_crit],
            n_fixed_reference: n_fixed,
            max_ratio: 1.0,
        }
    }

    pub fn looks(&self) -> usize {
        self.info_fractions.len()
    }

    /// Sample size at each look.
    pub fn sample_sizes(&self) -> Vec<f64> {
        self.info_fractions
            .iter()
            .map(|t| t * self.max_ratio * self.n_fixed_reference as f64)
            .collect()
    }

    fn info_levels(&self) -> Vec<f64> {
        self.info_fractions
            .iter()
            .map(|t| t * self.max_ratio)
            .collect()
    }

    /// Structural checks needed by the crossing recursion.
    fn check_shape(&self) -> Result<()> {
        let k = self.looks();
        if k == 0 {
            return domain("a design needs at least one look");
        }
        if self.upper_z.len() != k || self.lower_z.len() != k {
            return domain(format!(
                "boundary vectors have lengths {} and {}, expected {k}",
                self.upper_z.len(),
                self.lower_z.len()
            ));
        }
        let mut prev = 0.0;
        for &t in &self.info_fractions {
            if !(t > prev && t <= 1.0) {
                return domain(format!(
                    "information fractions must be strictly increasing in (0, 1]: {:?}",
                    self.info_fractions
                ));
            }
            prev = t;
        }
        if !(self.max_ratio.is_finite() && self.max_ratio > 0.0) {
            return domain(format!("max_ratio {} must be positive", self.max_ratio));
        }
        for (u, l) in self.upper_z.iter().zip(&self.lower_z) {
            if u.is_nan() || l.is_nan() || l > u {
                return domain(format!("invalid boundary pair (lower {l}, upper {u})"));
            }
        }
        Ok(())
    }

    /// Full design invariants: fractions end at 1, interim boundaries are
    /// ordered, and the final look forces a decision.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        let k = self.looks();
        if self.info_fractions[k - 1] != 1.0 {
            return domain("the final information fraction must be 1");
        }
        for j in 0..k - 1 {
            if self.lower_z[j] >= self.upper_z[j] {
                return domain(format!("interim look {} has lower >= upper", j + 1));
            }
        }
        if self.lower_z[k - 1] != self.upper_z[k - 1] {
            return domain("final look must have lower == upper");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookProbabilities {
    pub stop_high: f64,
    pub stop_low: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub looks: Vec<LookProbabilities>,
    /// Mass still in the continuation region after the last look (zero for
    /// designs whose final look forces a decision).
    pub continue_final: f64,
}

impl CrossingReport {
    pub fn total_high(&self) -> f64 {
        self.looks.iter().map(|l| l.stop_high).sum()
    }
}

/// Per-look boundary-crossing probabilities at the given drift.
pub fn crossing_probabilities(
    design: &GroupSequentialDesign,
    drift: f64,
) -> Result<CrossingReport> {
    design.check_shape()?;
    if !drift.is_finite() {
        return domain(format!("drift {drift} is not finite"));
    }
    Ok(crossing_report(design, drift, FINE_GRID))
}

fn crossing_report(design: &GroupSequentialDesign, drift: f64, grid: usize) -> CrossingReport {
    let info = design.info_levels();
    let (c, sub) = crossing::crossings_with_density(
        &info,
        &design.upper_z,
        &design.lower_z,
        drift,
        grid,
        true,
    );
    let looks = c
        .upper
        .iter()
        .zip(&c.lower)
        .map(|(&stop_high, &stop_low)| LookProbabilities {
            stop_high,
            stop_low,
        })
        .collect();
    CrossingReport {
        looks,
        continue_final: sub.map_or(0.0, |s| s.continuation()),
    }
}

fn expected_n(design: &GroupSequentialDesign, report: &CrossingReport) -> f64 {
    let sizes = design.sample_sizes();
    let stopped: f64 = sizes
        .iter()
        .zip(&report.looks)
        .map(|(n, l)| n * (l.stop_high + l.stop_low))
        .sum();
    stopped + sizes[sizes.len() - 1] * report.continue_final
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drifts {
    pub null: f64,
    pub alternative: f64,
    pub negative: f64,
}

impl Drifts {
    /// Null at zero, alternative at `z_α + z_β`, and the given negative drift.
    pub fn for_design(alpha_one_sided: f64, power: f64, negative: f64) -> Self {
        Self {
            null: 0.0,
            alternative: phi_inv(1.0 - alpha_one_sided) + phi_inv(power),
            negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedN {
    pub null: f64,
    pub alternative: f64,
    pub negative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignEvaluation {
    pub size: f64,
    pub power: f64,
    pub expected_n: ExpectedN,
    /// E[N] under the negative drift over the fixed sample size.
    pub en_ratio_negative: f64,
}

/// Size, power and expected sample sizes of `design` at three drifts.
pub fn evaluate_design(design: &GroupSequentialDesign, drifts: Drifts) -> Result<DesignEvaluation> {
    design.check_shape()?;
    for d in [drifts.null, drifts.alternative, drifts.negative] {
        if !d.is_finite() {
            return domain(format!("drift {d} is not finite"));
        }
    }
    Ok(evaluate_with_grid(design, drifts, FINE_GRID))
}

pub(crate) fn evaluate_with_grid(
    design: &GroupSequentialDesign,
    drifts: Drifts,
    grid: usize,
) -> DesignEvaluation {
    let null = crossing_report(design, drifts.null, grid);
    let alt = crossing_report(design, drifts.alternative, grid);
    let neg = crossing_report(design, drifts.negative, grid);
    let expected_n = ExpectedN {
        null: expected_n(design, &null),
        alternative: expected_n(design, &alt),
        negative: expected_n(design, &neg),
    };
    DesignEvaluation {
        size: null.total_high(),
        power: alt.total_high(),
        expected_n,
        en_ratio_negative: expected_n.negative / design.n_fixed_reference as f64,
    }
}

/// Drift (fixed-design units) of a true control/treatment rate pair for a
/// design with `n_per_group` patients per arm; positive when treatment has
/// fewer events.
pub fn drift_for_rates(p_control: f64, p_treatment: f64, n_per_group: f64) -> f64 {
    let var = (p_control * (1.0 - p_control) + p_treatment * (1.0 - p_treatment)) / n_per_group;
    (p_control - p_treatment) / var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z975: f64 = 1.959_963_984_540_054;

    #[test]
    fn k1_reduces_to_normal_tail() {
        let d = GroupSequentialDesign::fixed(Z975, 100);
        let c = crossing_probabilities(&d, 0.0).unwrap();
        assert!((c.looks[0].stop_high - 0.025).abs() < 1e-12);
        let e = evaluate_design(&d, Drifts::for_design(0.025, 0.8, -3.0)).unwrap();
        assert!((e.size - 0.025).abs() < 1e-12);
        assert!((e.power - 0.8).abs() < 1e-12);
        assert_eq!(e.expected_n.null, 100.0);
        assert_eq!(e.en_ratio_negative, 1.0);
    }

    #[test]
    fn rejects_bad_fractions() {
        let d = GroupSequentialDesign {
            info_fractions: vec![0.6, 0.5, 1.0],
            upper_z: vec![3.0, 3.0, 2.0],
            lower_z: vec![0.0, 0.0, 2.0],
            n_fixed_reference: 10,
            max_ratio: 1.0,
        };
        assert!(crossing_probabilities(&d, 0.0).is_err());
        let mut ok = d.clone();
        ok.info_fractions = vec![0.3, 0.6, 1.0];
        assert!(ok.validate().is_ok());
        ok.lower_z[2] = 1.0;
        assert!(ok.validate().is_err());
    }

    #[test]
    fn two_looks_at_fixed_values_sum_to_one() {
        let d = GroupSequentialDesign {
            info_fractions: vec![0.5, 1.0],
            upper_z: vec![Z975, Z975],
            lower_z: vec![Z975, Z975],
            n_fixed_reference: 100,
            max_ratio: 1.0,
        };
        let c = crossing_probabilities(&d, 0.0).unwrap();
        let total: f64 = c.looks.iter().map(|l| l.stop_high + l.stop_low).sum();
        assert!((total + c.continue_final - 1.0).abs() < 1e-6);
    }

    #[test]
    fn futility_boundary_cuts_expected_n_under_harm() {
        let d = GroupSequentialDesign {
            info_fractions: vec![0.5, 1.0],
            upper_z: vec![3.0, 2.0],
            lower_z: vec![0.0, 2.0],
            n_fixed_reference: 200,
            max_ratio: 1.0,
        };
        let e = evaluate_design(&d, Drifts::for_design(0.025, 0.8, -2.8)).unwrap();
        assert!(e.expected_n.negative < 200.0);
        assert!(e.en_ratio_negative < 0.6);
    }

    #[test]
    fn drift_sign_convention() {
        assert!(drift_for_rates(0.5, 0.3, 91.0) > 0.0);
        let d = drift_for_rates(0.5, 0.3, 91.0);
        // Fixed design sized for 80% power sits near z_α + z_β.
        assert!((d - (Z975 + 0.841_621_233_572_914)).abs() < 0.02);
    }
}
