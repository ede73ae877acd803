//! Monte Carlo operating characteristics of a two-arm trial with interim
//! p-value stopping.
//!
//! Group A is treatment and benefit means fewer infections on treatment.
//! Patients are randomized in permuted pairs. At each interim look the
//! one-sided p in the benefit direction goes through [`decide`]; a trial that
//! reaches `n_max` rejects when that p is at most the one-sided alpha.
//!
//! Alongside the benefit-directed procedure, each replication also runs its
//! mirror image (benefit in the opposite direction) on the same patients.
//! Rejection by either one is the two-sided rejection event used for size.

use std::fmt;

use rayon::prelude::*;

use crate::boundaries::{decide, BoundarySpec, Decision};
use crate::error::{check_probability, domain, Error, Result};
use crate::monitor::EXPECTED_OVERALL_MORTALITY;
use crate::rng::Stream;
use crate::stats::{
    fisher_one_sided_p, randomized_fisher_p, two_prop_z_test, Direction, TwoByTwoTable,
};

/// Pooled infection rate observed at the interim.
pub const OBSERVED_POOLED_INFECTION: f64 = 0.28;
/// Mortality among infected control patients.
pub const DEATH_GIVEN_INFECTION_CONTROL: f64 = 0.25;
/// Mortality among infected treatment patients in the harm scenario.
pub const DEATH_GIVEN_INFECTION_HARM: f64 = 0.5;

/// Mortality among uninfected patients such that the average of the two arms'
/// overall mortality equals `target`.
pub fn fit_background_mortality(
    p_infect_control: f64,
    p_infect_treatment: f64,
    death_given_infection_control: f64,
    death_given_infection_treatment: f64,
    target: f64,
) -> Result<f64> {
    for (name, p) in [
        ("p_infect_control", p_infect_control),
        ("p_infect_treatment", p_infect_treatment),
        (
            "death_given_infection_control",
            death_given_infection_control,
        ),
        (
            "death_given_infection_treatment",
            death_given_infection_treatment,
        ),
        ("target", target),
    ] {
        check_probability(name, p)?;
    }
    let infected_deaths = 0.5
        * (p_infect_control * death_given_infection_control
            + p_infect_treatment * death_given_infection_treatment);
    let uninfected = 1.0 - 0.5 * (p_infect_control + p_infect_treatment);
    if uninfected <= 0.0 {
        return domain("every patient is infected; background mortality is unidentified");
    }
    let b = (target - infected_deaths) / uninfected;
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Calibration(format!(
            "overall mortality {target} is unreachable (background would be {b})"
        )));
    }
    Ok(b)
}

/// Background mortality fitted to the overall mortality at the interim,
/// assuming both arms at the observed pooled infection rate.
pub fn default_background_mortality() -> f64 {
    fit_background_mortality(
        OBSERVED_POOLED_INFECTION,
        OBSERVED_POOLED_INFECTION,
        DEATH_GIVEN_INFECTION_CONTROL,
        DEATH_GIVEN_INFECTION_CONTROL,
        EXPECTED_OVERALL_MORTALITY,
    )
    .expect("reference values are consistent")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialScenario {
    pub p_infect_control: f64,
    pub p_infect_treatment: f64,
    pub p_death_given_infection_control: f64,
    pub p_death_given_infection_treatment: f64,
    pub p_death_no_infection: f64,
    pub n_max: u64,
    /// Interim looks as fractions of `n_max`; empty for a fixed design.
    pub interim_fractions: Vec<f64>,
}

impl TrialScenario {
    /// Infection rates as given, equal infected mortality in both arms and
    /// the default background mortality.
    pub fn new(
        p_infect_control: f64,
        p_infect_treatment: f64,
        n_max: u64,
        interim_fractions: Vec<f64>,
    ) -> Self {
        Self {
            p_infect_control,
            p_infect_treatment,
            p_death_given_infection_control: DEATH_GIVEN_INFECTION_CONTROL,
            p_death_given_infection_treatment: DEATH_GIVEN_INFECTION_CONTROL,
            p_death_no_infection: default_background_mortality(),
            n_max,
            interim_fractions,
        }
    }

    /// Treatment doubles both the infection risk and the mortality of infection.
    pub fn harm(p_infect_control: f64, n_max: u64, interim_fractions: Vec<f64>) -> Self {
        Self {
            p_infect_treatment: (2.0 * p_infect_control).min(1.0),
            p_death_given_infection_treatment: DEATH_GIVEN_INFECTION_HARM,
            ..Self::new(p_infect_control, p_infect_control, n_max, interim_fractions)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_infect_control", self.p_infect_control),
            ("p_infect_treatment", self.p_infect_treatment),
            (
                "p_death_given_infection_control",
                self.p_death_given_infection_control,
            ),
            (
                "p_death_given_infection_treatment",
                self.p_death_given_infection_treatment,
            ),
            ("p_death_no_infection", self.p_death_no_infection),
        ] {
            check_probability(name, p)?;
        }
        if self.n_max < 2 {
            return domain(format!("n_max {} must be at least 2", self.n_max));
        }
        let mut prev = 0.0;
        for &t in &self.interim_fractions {
            if !(t > prev && t < 1.0) {
                return domain(format!(
                    "interim fractions must be strictly increasing in (0, 1): {:?}",
                    self.interim_fractions
                ));
            }
            prev = t;
        }
        let sizes = self.look_sizes();
        let mut prev = 0;
        for &n in &sizes {
            if n <= prev {
                return domain(format!(
                    "looks at {:?} do not give increasing whole-pair sample sizes for n_max {}",
                    self.interim_fractions, self.n_max
                ));
            }
            prev = n;
        }
        Ok(())
    }

    /// Patients analyzed at each look, interim sizes rounded down to whole
    /// pairs; the last entry is `n_max`.
    pub fn look_sizes(&self) -> Vec<u64> {
        self.interim_fractions
            .iter()
            .map(|t| 2 * ((t * self.n_max as f64) / 2.0).floor() as u64)
            .chain(std::iter::once(self.n_max))
            .collect()
    }

    pub fn is_null(&self) -> bool {
        self.p_infect_control == self.p_infect_treatment
    }
}

/// Interim test used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimTest {
    /// Fisher exact one-sided p.
    Exact,
    /// Pooled z test; a pooled rate of 0 or 1 counts as z = 0.
    NormalApprox,
    /// Randomized exact p, uniform under the null.
    Randomized,
}

impl SimTest {
    pub fn as_str(self) -> &'static str {
        match self {
            SimTest::Exact => "EXACT",
            SimTest::NormalApprox => "NORMAL_APPROX",
            SimTest::Randomized => "RANDOMIZED",
        }
    }
}

impl fmt::Display for SimTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SimTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "EXACT" | "FISHER" => Ok(SimTest::Exact),
            "NORMAL_APPROX" | "Z" => Ok(SimTest::NormalApprox),
            "RANDOMIZED" | "CONTINUOUS" => Ok(SimTest::Randomized),
            _ => domain(format!("unknown test {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    EarlySignificance,
    EarlyFutility,
    FinalSignificant,
    FinalNotSignificant,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::EarlySignificance => "EARLY_SIGNIFICANCE",
            Outcome::EarlyFutility => "EARLY_FUTILITY",
            Outcome::FinalSignificant => "FINAL_SIGNIFICANT",
            Outcome::FinalNotSignificant => "FINAL_NOT_SIGNIFICANT",
        }
    }

    pub fn rejects(self) -> bool {
        matches!(self, Outcome::EarlySignificance | Outcome::FinalSignificant)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmCounts {
    pub control: u64,
    pub treatment: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// 1-based look at which the trial ended; interims first, then the final.
    pub stop_look: usize,
    pub outcome: Outcome,
    /// Table at the stopping look, group A = treatment.
    pub final_table: TwoByTwoTable,
    pub deaths: ArmCounts,
    /// Whether the mirror-image procedure rejected on the same patients.
    pub mirror_rejected: bool,
    /// Benefit-direction p at each interim look reached.
    pub interim_p: Vec<f64>,
}

impl TrialRecord {
    pub fn enrolled(&self) -> u64 {
        self.final_table.total()
    }

    /// Interim decision, if the trial stopped early.
    pub fn decision(&self) -> Decision {
        match self.outcome {
            Outcome::EarlySignificance => Decision::StopSignificance,
            Outcome::EarlyFutility => Decision::StopFutility,
            _ => Decision::Continue,
        }
    }
}

/// Running per-arm counts after each patient.
struct Cohort {
    /// Cumulative (events, enrolled, deaths) for treatment then control.
    cumulative: Vec<[u64; 6]>,
}

impl Cohort {
    fn draw(scenario: &TrialScenario, seed: u64, rep: u64) -> Self {
        let mut stream = Stream::patients(seed, rep);
        let n = scenario.n_max as usize;
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = [0u64; 6];
        cumulative.push(acc);
        let mut pair_first_treated = false;
        for i in 0..n {
            let [coin, u_inf, u_death_inf, u_death] = stream.patient();
            let treated = if i % 2 == 0 {
                pair_first_treated = coin < 0.5;
                pair_first_treated
            } else {
                !pair_first_treated
            };
            let (p_inf, p_die_inf, base) = if treated {
                (
                    scenario.p_infect_treatment,
                    scenario.p_death_given_infection_treatment,
                    0,
                )
            } else {
                (
                    scenario.p_infect_control,
                    scenario.p_death_given_infection_control,
                    3,
                )
            };
            let infected = u_inf < p_inf;
            let died = if infected {
                u_death_inf < p_die_inf
            } else {
                u_death < scenario.p_death_no_infection
            };
            acc[base] += infected as u64;
            acc[base + 1] += 1;
            acc[base + 2] += died as u64;
            cumulative.push(acc);
        }
        Self { cumulative }
    }

    fn table(&self, n: u64) -> TwoByTwoTable {
        let c = self.cumulative[n as usize];
        TwoByTwoTable {
            events_a: c[0],
            total_a: c[1],
            events_b: c[3],
            total_b: c[4],
        }
    }

    fn deaths(&self, n: u64) -> ArmCounts {
        let c = self.cumulative[n as usize];
        ArmCounts {
            treatment: c[2],
            control: c[5],
        }
    }
}

/// One-sided p-values (benefit, mirror) for a table.
fn p_pair(table: &TwoByTwoTable, test: SimTest, u: f64) -> (f64, f64) {
    // An arm can be empty only when a look holds a single patient.
    if table.total_a == 0 || table.total_b == 0 {
        return (0.5, 0.5);
    }
    match test {
        SimTest::Exact => (
            fisher_one_sided_p(table, Direction::BExceedsA),
            fisher_one_sided_p(table, Direction::AExceedsB),
        ),
        SimTest::NormalApprox => match two_prop_z_test(table, Direction::BExceedsA) {
            Ok(r) => (r.p_one_sided, r.p_other_side),
            Err(_) => (0.5, 0.5),
        },
        SimTest::Randomized => (
            randomized_fisher_p(table, Direction::BExceedsA, u),
            randomized_fisher_p(table, Direction::AExceedsB, 1.0 - u),
        ),
    }
}

fn run_replication(
    scenario: &TrialScenario,
    sizes: &[u64],
    boundary: &BoundarySpec,
    test: SimTest,
    seed: u64,
    rep: u64,
) -> TrialRecord {
    let cohort = Cohort::draw(scenario, seed, rep);
    let mut looks = Stream::looks(seed, rep);
    let last = sizes.len() - 1;
    let mut benefit: Option<(usize, Outcome)> = None;
    let mut mirror: Option<bool> = None;
    let mut interim_p = Vec::new();

    for (k, &n) in sizes.iter().enumerate() {
        let u = looks.uniform();
        let table = cohort.table(n);
        let (p_benefit, p_mirror) = p_pair(&table, test, u);
        if k < last {
            if benefit.is_none() {
                interim_p.push(p_benefit);
                match decide(p_benefit, boundary) {
                    Decision::StopSignificance => benefit = Some((k, Outcome::EarlySignificance)),
                    Decision::StopFutility => benefit = Some((k, Outcome::EarlyFutility)),
                    Decision::Continue => {}
                }
            }
            if mirror.is_none() {
                match decide(p_mirror, boundary) {
                    Decision::StopSignificance => mirror = Some(true),
                    Decision::StopFutility => mirror = Some(false),
                    Decision::Continue => {}
                }
            }
        } else {
            if benefit.is_none() {
                let outcome = if p_benefit <= boundary.alpha_one_sided {
                    Outcome::FinalSignificant
                } else {
                    Outcome::FinalNotSignificant
                };
                benefit = Some((k, outcome));
            }
            if mirror.is_none() {
                mirror = Some(p_mirror <= boundary.alpha_one_sided);
            }
        }
        if benefit.is_some() && mirror.is_some() {
            break;
        }
    }

    let (k, outcome) = benefit.expect("the final look always decides");
    TrialRecord {
        stop_look: k + 1,
        outcome,
        final_table: cohort.table(sizes[k]),
        deaths: cohort.deaths(sizes[k]),
        mirror_rejected: mirror.unwrap_or(false),
        interim_p,
    }
}

fn checked_sizes(scenario: &TrialScenario, boundary: &BoundarySpec) -> Result<Vec<u64>> {
    scenario.validate()?;
    boundary.validate()?;
    Ok(scenario.look_sizes())
}

/// One trial, replication 0 of `seed`.
pub fn simulate_trial(
    scenario: &TrialScenario,
    boundary: &BoundarySpec,
    test: SimTest,
    seed: u64,
) -> Result<TrialRecord> {
    let sizes = checked_sizes(scenario, boundary)?;
    Ok(run_replication(scenario, &sizes, boundary, test, seed, 0))
}

/// Replications `0..replications` in index order.
pub fn simulate_replications(
    scenario: &TrialScenario,
    boundary: &BoundarySpec,
    test: SimTest,
    replications: u64,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    let sizes = checked_sizes(scenario, boundary)?;
    Ok((0..replications)
        .into_par_iter()
        .map(|rep| run_replication(scenario, &sizes, boundary, test, seed, rep))
        .collect())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    fn proportion(count: u64, reps: u64) -> Self {
        let p = count as f64 / reps as f64;
        Self {
            value: p,
            se: (p * (1.0 - p) / reps as f64).sqrt(),
        }
    }

    fn mean(sum: i128, sum_sq: i128, reps: u64) -> Self {
        let n = reps as f64;
        let mean = sum as f64 / n;
        let var = if reps > 1 {
            ((sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            se: (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmEstimates {
    pub control: Estimate,
    pub treatment: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingCharacteristics {
    pub prob_stop_significance: Estimate,
    pub prob_stop_futility: Estimate,
    pub prob_reach_final: Estimate,
    /// Early or final rejection in the benefit direction.
    pub prob_reject_benefit: Estimate,
    /// Rejection by the benefit procedure or its mirror image.
    pub prob_reject_either: Estimate,
    /// Two-sided rejection rate; the size when the scenario is null.
    pub empirical_size: f64,
    /// Benefit-direction rejection rate.
    pub empirical_power: f64,
    pub expected_n: Estimate,
    pub expected_deaths: ArmEstimates,
    pub replications: u64,
    pub seed: u64,
    pub test: SimTest,
}

#[derive(Default)]
struct Totals {
    sig: u64,
    fut: u64,
    reject: u64,
    either: u64,
    n: i128,
    n_sq: i128,
    dc: i128,
    dc_sq: i128,
    dt: i128,
    dt_sq: i128,
}

impl Totals {
    fn add(&mut self, r: &TrialRecord) {
        let o = r.outcome;
        self.sig += (o == Outcome::EarlySignificance) as u64;
        self.fut += (o == Outcome::EarlyFutility) as u64;
        self.reject += o.rejects() as u64;
        self.either += (o.rejects() || r.mirror_rejected) as u64;
        let (n, dc, dt) = (
            r.enrolled() as i128,
            r.deaths.control as i128,
            r.deaths.treatment as i128,
        );
        self.n += n;
        self.n_sq += n * n;
        self.dc += dc;
        self.dc_sq += dc * dc;
        self.dt += dt;
        self.dt_sq += dt * dt;
    }
}

/// Aggregate `replications` trials. Integer tallies make the result identical
/// for any thread count.
pub fn operating_characteristics(
    scenario: &TrialScenario,
    boundary: &BoundarySpec,
    test: SimTest,
    replications: u64,
    seed: u64,
) -> Result<OperatingCharacteristics> {
    if replications == 0 {
        return domain("at least one replication is required");
    }
    let records = simulate_replications(scenario, boundary, test, replications, seed)?;
    let mut t = Totals::default();
    for r in &records {
        t.add(r);
    }
    let reps = replications;
    let prob_reject_benefit = Estimate::proportion(t.reject, reps);
    let prob_reject_either = Estimate::proportion(t.either, reps);
    Ok(OperatingCharacteristics {
        prob_stop_significance: Estimate::proportion(t.sig, reps),
        prob_stop_futility: Estimate::proportion(t.fut, reps),
        prob_reach_final: Estimate::proportion(reps - t.sig - t.fut, reps),
        prob_reject_benefit,
        prob_reject_either,
        empirical_size: prob_reject_either.value,
        empirical_power: prob_reject_benefit.value,
        expected_n: Estimate::mean(t.n, t.n_sq, reps),
        expected_deaths: ArmEstimates {
            control: Estimate::mean(t.dc, t.dc_sq, reps),
            treatment: Estimate::mean(t.dt, t.dt_sq, reps),
        },
        replications,
        seed,
        test,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmReport {
    pub expected_n: (f64, f64),
    pub expected_treatment_deaths: (f64, f64),
    /// Design B minus design A, paired by replication.
    pub delta_treatment_deaths: Estimate,
    pub delta_control_deaths: Estimate,
    pub delta_n: Estimate,
    pub replications: u64,
    pub seed: u64,
}

/// Compare two boundaries on identical simulated patients.
pub fn harm_report(
    scenario: &TrialScenario,
    boundary_a: &BoundarySpec,
    boundary_b: &BoundarySpec,
    test: SimTest,
    replications: u64,
    seed: u64,
) -> Result<HarmReport> {
    if replications == 0 {
        return domain("at least one replication is required");
    }
    let a = simulate_replications(scenario, boundary_a, test, replications, seed)?;
    let b = simulate_replications(scenario, boundary_b, test, replications, seed)?;
    let (mut sa_n, mut sb_n, mut sa_t, mut sb_t) = (0i128, 0i128, 0i128, 0i128);
    let mut dt = (0i128, 0i128);
    let mut dc = (0i128, 0i128);
    let mut dn = (0i128, 0i128);
    for (x, y) in a.iter().zip(&b) {
        let (xn, yn) = (x.enrolled() as i128, y.enrolled() as i128);
        let (xt, yt) = (x.deaths.treatment as i128, y.deaths.treatment as i128);
        let d_c = y.deaths.control as i128 - x.deaths.control as i128;
        sa_n += xn;
        sb_n += yn;
        sa_t += xt;
        sb_t += yt;
        dt = (dt.0 + (yt - xt), dt.1 + (yt - xt) * (yt - xt));
        dc = (dc.0 + d_c, dc.1 + d_c * d_c);
        dn = (dn.0 + (yn - xn), dn.1 + (yn - xn) * (yn - xn));
    }
    let r = replications as f64;
    Ok(HarmReport {
        expected_n: (sa_n as f64 / r, sb_n as f64 / r),
        expected_treatment_deaths: (sa_t as f64 / r, sb_t as f64 / r),
        delta_treatment_deaths: Estimate::mean(dt.0, dt.1, replications),
        delta_control_deaths: Estimate::mean(dc.0, dc.1, replications),
        delta_n: Estimate::mean(dn.0, dn.1, replications),
        replications,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snapinn() -> BoundarySpec {
        BoundarySpec::direct(0.0081, 0.382, 0.5, 0.025).unwrap()
    }

    fn vacuous() -> BoundarySpec {
        BoundarySpec::direct(1e-12, 1.0 - 1e-12, 0.5, 0.025).unwrap()
    }

    #[test]
    fn background_fit_hits_target() {
        let b = default_background_mortality();
        let overall = 0.28 * 0.25 + 0.72 * b;
        assert!((overall - 0.11).abs() < 1e-15);
        assert!(fit_background_mortality(0.9, 0.9, 0.5, 0.5, 0.11).is_err());
    }

    #[test]
    fn look_sizes_round_to_pairs() {
        let s = TrialScenario::new(0.29, 0.29, 182, vec![0.5]);
        assert_eq!(s.look_sizes(), vec![90, 182]);
        assert!(TrialScenario::new(0.29, 0.29, 4, vec![0.1])
            .validate()
            .is_err());
        assert!(TrialScenario::new(0.29, 0.29, 100, vec![0.6, 0.5])
            .validate()
            .is_err());
        assert!(TrialScenario::new(1.2, 0.29, 100, vec![])
            .validate()
            .is_err());
    }

    #[test]
    fn vacuous_boundary_never_stops_early() {
        let s = TrialScenario::new(0.3, 0.4, 200, vec![0.25, 0.5, 0.75]);
        let oc = operating_characteristics(&s, &vacuous(), SimTest::NormalApprox, 500, 1).unwrap();
        assert_eq!(oc.prob_reach_final.value, 1.0);
        assert_eq!(oc.expected_n.value, 200.0);
    }

    #[test]
    fn extreme_harm_stops_for_futility() {
        let mut s = TrialScenario::new(0.0, 1.0, 100, vec![0.5]);
        s.p_death_no_infection = 0.0;
        let r = simulate_trial(&s, &snapinn(), SimTest::Exact, 3).unwrap();
        assert_eq!(r.outcome, Outcome::EarlyFutility);
        assert_eq!(r.decision(), Decision::StopFutility);
        assert_eq!(r.stop_look, 1);
        assert_eq!(r.final_table.events_a, r.final_table.total_a);
        assert_eq!(r.final_table.events_b, 0);
        assert_eq!(r.deaths.control, 0);
    }

    #[test]
    fn arms_differ_by_at_most_one() {
        let s = TrialScenario::new(0.3, 0.3, 101, vec![0.5]);
        let r = simulate_trial(&s, &vacuous(), SimTest::Exact, 11).unwrap();
        assert!(r.final_table.total_a.abs_diff(r.final_table.total_b) <= 1);
        assert_eq!(r.enrolled(), 101);
    }

    #[test]
    fn replay_is_reproducible() {
        let s = TrialScenario::new(0.29, 0.29, 200, vec![0.5]);
        let a = simulate_trial(&s, &snapinn(), SimTest::NormalApprox, 42).unwrap();
        let b = simulate_trial(&s, &snapinn(), SimTest::NormalApprox, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_boundaries_give_zero_deltas() {
        let s = TrialScenario::harm(0.29, 200, vec![0.5]);
        let h = harm_report(&s, &snapinn(), &snapinn(), SimTest::Exact, 300, 5).unwrap();
        assert_eq!(h.delta_treatment_deaths.value, 0.0);
        assert_eq!(h.delta_control_deaths.value, 0.0);
        assert_eq!(h.delta_n.value, 0.0);
    }

    #[test]
    fn futility_rule_saves_treatment_deaths_under_harm() {
        let s = TrialScenario::harm(0.29, 200, vec![0.5]);
        let h = harm_report(&s, &vacuous(), &snapinn(), SimTest::Exact, 2000, 8).unwrap();
        assert!(h.delta_treatment_deaths.value < 0.0);
        assert!(h.delta_n.value < 0.0);
    }
}
