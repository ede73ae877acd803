//! What the trial would have looked like under an expected-sample-size
//! optimal group-sequential plan, for the infection endpoint (risk doubled by
//! treatment) and for the mortality endpoint (10% halved versus doubled).

use super::{
    drift_for_rates, evaluate_design, optimize_design, DesignEvaluation, Drifts,
    GroupSequentialDesign, OptimizeSpec, OptimizedDesign, SearchSettings,
};
use crate::design::{diluted_design, fixed_sample_size, DesignSpec, SampleSizeFormula, Sided};
use crate::error::Result;
use crate::simulate::{
    default_background_mortality, DEATH_GIVEN_INFECTION_CONTROL, DEATH_GIVEN_INFECTION_HARM,
};
use crate::stats::phi_inv;

/// Published expected sample size under harm, as a fraction of the fixed size.
pub const REPORTED_EN_RATIO: f64 = 0.15;
/// Published stopping size for the mortality endpoint under harm.
pub const REPORTED_MORTALITY_STOP_N: f64 = 100.0;

/// Maximum enrollment and interim size of the trial as run.
pub const ACTUAL_N_MAX: u64 = 296;
pub const ACTUAL_INTERIM_N: u64 = 184;
pub const ACTUAL_P_SIG: f64 = 0.0081;
pub const ACTUAL_P_FUT: f64 = 0.382;

const ALPHA_ONE_SIDED: f64 = 0.025;
const POWER: f64 = 0.8;
const INFECTION_DILUTION: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDesign {
    pub label: String,
    pub design: GroupSequentialDesign,
    pub evaluation: DesignEvaluation,
    /// Search metadata for optimized designs.
    pub search: Option<SearchSummary>,
    /// Expected deaths (control, treatment) under the harm scenario.
    pub expected_deaths_harm: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSummary {
    pub grid_step: f64,
    pub refinement_gain: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointCounterfactual {
    pub endpoint: &'static str,
    pub p_control: f64,
    pub p_treatment: f64,
    /// Treatment event rate in the harm scenario.
    pub p_harm: f64,
    /// Total fixed sample size (both arms).
    pub n_fixed: u64,
    pub drifts: Drifts,
    /// Mortality (control, treatment) under the harm scenario.
    pub harm_mortality: (f64, f64),
    /// Fixed design first, then the optimized designs in increasing K.
    pub designs: Vec<CandidateDesign>,
    /// E[N | null] / n_fixed of the headline design, from the report itself.
    pub en_ratio_null: f64,
    /// Same quantity recomputed through `evaluate_design` with a zero harm drift.
    pub en_ratio_null_check: f64,
}

impl EndpointCounterfactual {
    pub fn design(&self, label: &str) -> Option<&CandidateDesign> {
        self.designs.iter().find(|d| d.label == label)
    }
}

/// The trial as run: one interim at 184 of 296 patients with the quoted
/// p-value thresholds, evaluated on the infection endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ActualDesignOutcome {
    pub design: GroupSequentialDesign,
    pub evaluation: DesignEvaluation,
    pub expected_deaths_harm: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualReport {
    pub infection: EndpointCounterfactual,
    pub mortality: EndpointCounterfactual,
    pub actual: ActualDesignOutcome,
    pub reported_en_ratio: f64,
    pub reported_mortality_stop_n: f64,
}

impl CounterfactualReport {
    /// en_ratio under harm of the infection-endpoint design with `looks` looks.
    pub fn infection_en_ratio(&self, looks: usize) -> Option<f64> {
        self.infection
            .design(&format!("K={looks}"))
            .map(|d| d.evaluation.en_ratio_negative)
    }

    /// Expected stopping size under harm of the mortality design with `looks` looks.
    pub fn mortality_stop_n(&self, looks: usize) -> Option<f64> {
        self.mortality
            .design(&format!("K={looks}"))
            .map(|d| d.evaluation.expected_n.negative)
    }
}

fn deaths(expected_n: f64, mortality: (f64, f64)) -> (f64, f64) {
    (
        0.5 * expected_n * mortality.0,
        0.5 * expected_n * mortality.1,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    /// Infectious complications, planning rates after 40% dilution.
    Infection,
    /// Mortality, 10% halved by treatment.
    Mortality,
}

impl EndpointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EndpointKind::Infection => "INFECTION",
            EndpointKind::Mortality => "MORTALITY",
        }
    }
}

impl std::str::FromStr for EndpointKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "INFECTION" => Ok(EndpointKind::Infection),
            "MORTALITY" => Ok(EndpointKind::Mortality),
            _ => crate::error::domain(format!("unknown endpoint {s:?}")),
        }
    }
}

/// Planning rates, harm rate, fixed sample size and drifts of an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointSetup {
    pub kind: EndpointKind,
    pub p_control: f64,
    pub p_treatment: f64,
    pub p_harm: f64,
    /// Total over both arms.
    pub n_fixed: u64,
    pub drifts: Drifts,
    /// Mortality (control, treatment) under harm.
    pub harm_mortality: (f64, f64),
}

/// One-sided alpha 0.025 and power 0.8 throughout; harm doubles the control
/// rate.
pub fn endpoint_setup(kind: EndpointKind) -> Result<EndpointSetup> {
    let (p_control, p_treatment, p_harm, harm_mortality) = match kind {
        EndpointKind::Infection => {
            let planning = diluted_design(&DesignSpec {
                dilution: INFECTION_DILUTION,
                ..DesignSpec::default()
            })?;
            let harm = 2.0 * planning.p_control;
            (
                planning.p_control,
                planning.p_treatment,
                harm,
                infection_harm_mortality(planning.p_control, harm),
            )
        }
        EndpointKind::Mortality => (0.10, 0.05, 0.20, (0.10, 0.20)),
    };
    let spec = DesignSpec {
        alpha: 2.0 * ALPHA_ONE_SIDED,
        sided: Sided::Two,
        power: POWER,
        p_control,
        p_treatment,
        dilution: 0.0,
        allocation: 1.0,
    };
    let fixed = fixed_sample_size(&spec, SampleSizeFormula::SimplePooled)?;
    let negative = drift_for_rates(p_control, p_harm, fixed.n_per_group as f64);
    Ok(EndpointSetup {
        kind,
        p_control,
        p_treatment,
        p_harm,
        n_fixed: fixed.n_total,
        drifts: Drifts::for_design(ALPHA_ONE_SIDED, POWER, negative),
        harm_mortality,
    })
}

fn run_endpoint(kind: EndpointKind, looks: &[usize]) -> Result<EndpointCounterfactual> {
    let e = endpoint_setup(kind)?;
    let (n_fixed, drifts, negative) = (e.n_fixed, e.drifts, e.drifts.negative);

    let fixed_design = GroupSequentialDesign::fixed(phi_inv(1.0 - ALPHA_ONE_SIDED), n_fixed);
    let fixed_eval = evaluate_design(&fixed_design, drifts)?;
    let mut designs = vec![CandidateDesign {
        label: "FIXED".into(),
        expected_deaths_harm: deaths(fixed_eval.expected_n.negative, e.harm_mortality),
        design: fixed_design,
        evaluation: fixed_eval,
        search: None,
    }];

    let mut previous: Option<OptimizedDesign> = None;
    for &looks in looks {
        let opt = optimize_design(
            OptimizeSpec {
                looks,
                alpha: ALPHA_ONE_SIDED,
                power: POWER,
                objective_drift: negative,
                n_fixed,
            },
            SearchSettings::default(),
            previous.as_ref().map(|p| &p.design),
        )?;
        designs.push(CandidateDesign {
            label: format!("K={looks}"),
            expected_deaths_harm: deaths(opt.evaluation.expected_n.negative, e.harm_mortality),
            design: opt.design.clone(),
            evaluation: opt.evaluation,
            search: Some(SearchSummary {
                grid_step: opt.grid_step,
                refinement_gain: opt.refinement_gain(),
                evaluations: opt.evaluations,
            }),
        });
        previous = Some(opt);
    }

    let headline = designs.last().expect("at least the fixed design");
    let en_ratio_null = headline.evaluation.expected_n.null / n_fixed as f64;
    let zero_effect = evaluate_design(
        &headline.design,
        Drifts {
            negative: 0.0,
            ..drifts
        },
    )?;
    Ok(EndpointCounterfactual {
        endpoint: kind.as_str(),
        p_control: e.p_control,
        p_treatment: e.p_treatment,
        p_harm: e.p_harm,
        n_fixed,
        drifts,
        harm_mortality: e.harm_mortality,
        en_ratio_null,
        en_ratio_null_check: zero_effect.en_ratio_negative,
        designs,
    })
}

fn infection_harm_mortality(p_control: f64, p_harm: f64) -> (f64, f64) {
    let b = default_background_mortality();
    (
        p_control * DEATH_GIVEN_INFECTION_CONTROL + (1.0 - p_control) * b,
        p_harm * DEATH_GIVEN_INFECTION_HARM + (1.0 - p_harm) * b,
    )
}

/// Both endpoint counterfactuals plus the as-run design.
///
/// The infection endpoint uses the planning rates after 40% dilution
/// (0.30 versus 0.18); harm doubles the control rate. The mortality endpoint
/// plans 0.10 versus 0.05 with harm at 0.20. Optimized designs use K = 5 and
/// K = 10 equally spaced looks, the latter warm-started from the former.
pub fn propatria_counterfactuals() -> Result<CounterfactualReport> {
    let infection = run_endpoint(EndpointKind::Infection, &[5, 10])?;
    let mortality = run_endpoint(EndpointKind::Mortality, &[5, 10])?;

    let n_ref = infection.n_fixed;
    let actual_design = GroupSequentialDesign {
        info_fractions: vec![ACTUAL_INTERIM_N as f64 / ACTUAL_N_MAX as f64, 1.0],
        upper_z: vec![phi_inv(1.0 - ACTUAL_P_SIG), phi_inv(1.0 - ALPHA_ONE_SIDED)],
        lower_z: vec![phi_inv(1.0 - ACTUAL_P_FUT), phi_inv(1.0 - ALPHA_ONE_SIDED)],
        n_fixed_reference: n_ref,
        max_ratio: ACTUAL_N_MAX as f64 / n_ref as f64,
    };
    let actual_eval = evaluate_design(&actual_design, infection.drifts)?;
    let actual = ActualDesignOutcome {
        expected_deaths_harm: deaths(actual_eval.expected_n.negative, infection.harm_mortality),
        design: actual_design,
        evaluation: actual_eval,
    };

    Ok(CounterfactualReport {
        infection,
        mortality,
        actual,
        reported_en_ratio: REPORTED_EN_RATIO,
        reported_mortality_stop_n: REPORTED_MORTALITY_STOP_N,
    })
}
