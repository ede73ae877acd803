use seqmon_core::boundaries::{
    calibrate_gamma, comparator_boundary, thresholds_from_gamma, BoundarySpec, Comparator, Decision,
};
use seqmon_core::design::{
    fixed_sample_size, reestimate_sample_size, DesignSpec, SampleSizeFormula, SampleSizeResult,
    Sided,
};
use seqmon_core::monitor::{analyze_interim, Labeling};
use seqmon_core::optimize::{
    endpoint_setup, optimize_design, propatria_counterfactuals, CandidateDesign,
    EndpointCounterfactual, EndpointKind, GroupSequentialDesign, OptimizeSpec, SearchSettings,
    REPORTED_EN_RATIO, REPORTED_MORTALITY_STOP_N,
};
use seqmon_core::simulate::{
    harm_report, operating_characteristics, Estimate, SimTest, TrialScenario,
};
use seqmon_core::stats::{Direction, TwoByTwoTable};
use seqmon_core::{Error, Result};

use crate::args::{
    BoundaryArgs, DesignArgs, InterimArgs, OptimizeArgs, ReestimateArgs, RuleArgs, SimulateArgs,
};
use crate::report::Report;

pub const EXIT_CONTINUE: i32 = 0;
pub const EXIT_STOP_SIGNIFICANCE: i32 = 10;
pub const EXIT_STOP_FUTILITY: i32 = 11;
pub const EXIT_DEBLIND_REQUIRED: i32 = 12;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub fn decision_exit_code(decision: Option<Decision>) -> i32 {
    match decision {
        Some(Decision::Continue) => EXIT_CONTINUE,
        Some(Decision::StopSignificance) => EXIT_STOP_SIGNIFICANCE,
        Some(Decision::StopFutility) => EXIT_STOP_FUTILITY,
        None => EXIT_DEBLIND_REQUIRED,
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("{x:?} is not a number")))
        })
        .collect()
}

fn parse_table(s: &str) -> Result<TwoByTwoTable> {
    let v: Vec<u64> = s
        .split_whitespace()
        .map(|x| {
            x.parse()
                .map_err(|_| Error::Domain(format!("{x:?} is not a count")))
        })
        .collect::<Result<_>>()?;
    match v.as_slice() {
        &[a, na, b, nb] => TwoByTwoTable::new(a, na, b, nb),
        _ => Err(Error::Domain(format!(
            "a table needs four integers, got {s:?}"
        ))),
    }
}

fn table_text(t: &TwoByTwoTable) -> String {
    format!("{} {} {} {}", t.events_a, t.total_a, t.events_b, t.total_b)
}

fn design_spec(a: &DesignArgs) -> Result<DesignSpec> {
    Ok(DesignSpec {
        alpha: a.alpha,
        sided: Sided::from_count(a.sides)?,
        power: a.power,
        p_control: a.p_control,
        p_treatment: a.p_treatment,
        dilution: a.dilution,
        allocation: a.allocation,
    })
}

fn design_params(r: &mut Report, a: &DesignArgs) {
    r.param("alpha", a.alpha)
        .param("sides", u64::from(a.sides))
        .param("power", a.power)
        .param("p-control", a.p_control)
        .param("p-treatment", a.p_treatment)
        .param("dilution", a.dilution)
        .param("allocation", a.allocation);
}

fn formulas(name: &str) -> Result<Vec<SampleSizeFormula>> {
    if name.eq_ignore_ascii_case("ALL") {
        Ok(SampleSizeFormula::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

fn size_rows(r: &mut Report, res: &SampleSizeResult) {
    r.section(&res.formula.as_str().to_ascii_lowercase())
        .row("n_per_group", res.n_per_group)
        .row("n_total", res.n_total)
        .row("rate_control", res.effective_rates.0)
        .row("rate_treatment", res.effective_rates.1);
}

pub fn design(a: &DesignArgs, formula: &str) -> Result<Report> {
    let spec = design_spec(a)?;
    let mut r = Report::new("design");
    design_params(&mut r, a);
    r.param("formula", formula);
    for f in formulas(formula)? {
        size_rows(&mut r, &fixed_sample_size(&spec, f)?);
    }
    Ok(r)
}

pub fn reestimate(a: &ReestimateArgs) -> Result<Report> {
    let spec = design_spec(&a.design)?;
    let mut r = Report::new("reestimate");
    design_params(&mut r, &a.design);
    r.param("formula", a.formula.formula.as_str())
        .param("observed-rate", a.observed_rate)
        .param("n-observed", a.n_observed);
    for f in formulas(&a.formula.formula)? {
        let planned = fixed_sample_size(&spec, f)?;
        let re = reestimate_sample_size(&spec, a.observed_rate, a.n_observed, f)?;
        size_rows(&mut r, &re);
        r.row("planned_n_total", planned.n_total);
    }
    Ok(r)
}

fn rule_params(r: &mut Report, rule: &RuleArgs) {
    r.param("p-sig", rule.p_sig)
        .param("p-fut", rule.p_fut)
        .param("alpha1", rule.alpha1);
}

pub fn boundary(a: &BoundaryArgs) -> Result<Report> {
    let mut r = Report::new("boundary");
    rule_params(&mut r, &a.rule);
    r.param("t", a.t);
    let (gs, gf) = match (a.gamma_sig, a.gamma_fut) {
        (Some(gs), Some(gf)) => {
            r.param("gamma-sig", gs).param("gamma-fut", gf);
            (gs, gf)
        }
        _ => calibrate_gamma(a.rule.p_sig, a.rule.p_fut, a.t, a.rule.alpha1)?,
    };
    let grid = parse_list(&a.grid)?;
    r.param("grid", fmt_list(&grid)).param("looks", a.looks);

    r.section("calibration")
        .row("gamma_sig", gs)
        .row("gamma_fut", gf);
    for &t in &grid {
        let b = thresholds_from_gamma(gs, gf, t, a.rule.alpha1)?;
        r.section(&format!("t_{t:?}"))
            .row("p_sig", b.p_sig)
            .row("p_fut", b.p_fut);
    }
    for method in [
        Comparator::Pocock,
        Comparator::OBrienFleming,
        Comparator::HaybittlePeto,
    ] {
        r.section(&method.as_str().to_ascii_lowercase());
        for k in 1..=a.looks {
            let p = comparator_boundary(method, k, a.looks, a.rule.alpha1)?;
            r.row(&format!("look_{k}"), p);
        }
    }
    Ok(r)
}

fn benefit_direction(s: &str) -> Result<Direction> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        // Group A is treatment: fewer treatment events means B's rate exceeds A's.
        "treatment-fewer" => Ok(Direction::BExceedsA),
        "treatment-more" => Ok(Direction::AExceedsB),
        _ => s.parse(),
    }
}

pub fn interim(a: &InterimArgs) -> Result<(Report, i32)> {
    let table = match (&a.table, a.counts.as_slice()) {
        (Some(t), _) => parse_table(t)?,
        (None, &[ea, na, eb, nb]) => TwoByTwoTable::new(ea, na, eb, nb)?,
        _ => {
            return Err(Error::Domain(
                "interim needs a table: four integers or --table".into(),
            ))
        }
    };
    let benefit = benefit_direction(&a.benefit_direction)?;
    let boundary = BoundarySpec::direct(a.rule.p_sig, a.rule.p_fut, a.t, a.rule.alpha1)?;
    let mut report = analyze_interim(&table, &boundary, benefit, a.blinded)?;
    if let Some(m) = &a.mortality {
        report = report.with_mortality(parse_table(m)?);
    }

    let mut r = Report::new("interim");
    r.param("table", table_text(&table));
    rule_params(&mut r, &a.rule);
    r.param("t", a.t)
        .param("blinded", a.blinded)
        .param("benefit-direction", a.benefit_direction.as_str())
        .param("emulate-ambiguous", a.emulate_ambiguous);
    if let Some(m) = &a.mortality {
        r.param(
            "mortality",
            m.split_whitespace().collect::<Vec<_>>().join(" "),
        );
    }

    for l in &report.per_labeling {
        let name = match l.labeling {
            Labeling::ATreatment => "true_labeling",
            Labeling::BTreatment => "swapped_labeling",
        };
        r.section(name)
            .row(
                "treatment_group",
                if l.labeling == Labeling::ATreatment {
                    "A"
                } else {
                    "B"
                },
            )
            .row("alternative", l.alternative.as_str())
            .row("p_one_sided", l.p_one_sided)
            .row("decision", l.decision.as_str());
    }
    let d = &report.diagnostics;
    r.section("ambiguous_direction")
        .row("p_one_sided", d.ambiguous_direction_p)
        .row("decision", d.ambiguous_direction_decision.as_str());
    r.section("diagnostics").row("degenerate", d.degenerate);
    if let Some(m) = &d.mortality {
        r.row("mortality_overall_rate", m.overall_rate)
            .row("mortality_p_two_sided", m.p_two_sided);
    }

    let (decision, deblind) = if a.emulate_ambiguous {
        (Some(d.ambiguous_direction_decision), false)
    } else {
        (report.overall.decision, report.overall.deblind_required)
    };
    let code = decision_exit_code(decision);
    r.section("overall")
        .row("decision", decision.map_or("NONE", |x| x.as_str()))
        .row("deblind_required", deblind)
        .row("exit_code", code as u64);
    if deblind {
        r.note("the labelings disagree; an unblinded statistician must say which one is true");
    }
    if a.emulate_ambiguous {
        r.note("decision taken with the smaller one-sided p, ignoring which group is treatment");
    }
    Ok((r, code))
}

fn estimate(r: &mut Report, key: &str, e: Estimate) {
    r.row(key, e.value).row(&format!("{key}_se"), e.se);
}

pub fn simulate(a: &SimulateArgs, seed: u64, reps: u64) -> Result<Report> {
    let mut scenario = match a.scenario.to_ascii_lowercase().as_str() {
        "null" => TrialScenario::new(0.29, 0.29, 200, vec![0.5]),
        "harm" => TrialScenario::harm(0.29, 200, vec![0.5]),
        "alternative" => {
            let n = fixed_sample_size(&DesignSpec::default(), SampleSizeFormula::SimplePooled)?;
            TrialScenario::new(0.5, 0.3, n.n_total, vec![0.5])
        }
        other => return Err(Error::Domain(format!("unknown scenario preset {other:?}"))),
    };
    let fitted_background = a.death_uninfected.is_none();
    if let Some(x) = a.p_control {
        scenario.p_infect_control = x;
    }
    if let Some(x) = a.p_treatment {
        scenario.p_infect_treatment = x;
    }
    if let Some(x) = a.death_infected_control {
        scenario.p_death_given_infection_control = x;
    }
    if let Some(x) = a.death_infected_treatment {
        scenario.p_death_given_infection_treatment = x;
    }
    if let Some(x) = a.death_uninfected {
        scenario.p_death_no_infection = x;
    }
    if let Some(n) = a.n_max {
        scenario.n_max = n;
    }
    if let Some(s) = &a.interims {
        scenario.interim_fractions = if s.eq_ignore_ascii_case("none") {
            Vec::new()
        } else {
            parse_list(s)?
        };
    }
    let test: SimTest = a.test.parse()?;
    let t = scenario.interim_fractions.first().copied().unwrap_or(0.5);
    let boundary = BoundarySpec::direct(a.rule.p_sig, a.rule.p_fut, t, a.rule.alpha1)?;
    let oc = operating_characteristics(&scenario, &boundary, test, reps, seed)?;

    let mut r = Report::new("simulate");
    r.param("scenario", a.scenario.to_ascii_lowercase())
        .param("p-control", scenario.p_infect_control)
        .param("p-treatment", scenario.p_infect_treatment)
        .param(
            "death-infected-control",
            scenario.p_death_given_infection_control,
        )
        .param(
            "death-infected-treatment",
            scenario.p_death_given_infection_treatment,
        )
        .param("n-max", scenario.n_max)
        .param(
            "interims",
            if scenario.interim_fractions.is_empty() {
                "none".to_string()
            } else {
                fmt_list(&scenario.interim_fractions)
            },
        );
    if !fitted_background {
        r.param("death-uninfected", scenario.p_death_no_infection);
    }
    rule_params(&mut r, &a.rule);
    r.param("test", test.as_str())
        .param("harm-report", a.harm_report)
        .param("seed", seed)
        .param("reps", reps);

    r.section("operating_characteristics");
    estimate(&mut r, "prob_stop_significance", oc.prob_stop_significance);
    estimate(&mut r, "prob_stop_futility", oc.prob_stop_futility);
    estimate(&mut r, "prob_reach_final", oc.prob_reach_final);
    estimate(&mut r, "prob_reject_benefit", oc.prob_reject_benefit);
    estimate(&mut r, "prob_reject_either", oc.prob_reject_either);
    r.row("empirical_size", oc.empirical_size)
        .row("empirical_power", oc.empirical_power);
    estimate(&mut r, "expected_n", oc.expected_n);
    estimate(
        &mut r,
        "expected_deaths_control",
        oc.expected_deaths.control,
    );
    estimate(
        &mut r,
        "expected_deaths_treatment",
        oc.expected_deaths.treatment,
    );
    r.row("death_uninfected", scenario.p_death_no_infection)
        .row("background_mortality_fitted", fitted_background);
    if fitted_background {
        r.note("mortality without infection is fitted to 11% overall mortality; it is not reported directly");
    }
    r.note("empirical_size counts rejections in either direction; empirical_power counts the benefit direction");

    if a.harm_report {
        let vacuous = BoundarySpec::direct(1e-300, 1.0 - 1e-16, t, a.rule.alpha1)?;
        let h = harm_report(&scenario, &vacuous, &boundary, test, reps, seed)?;
        r.section("harm_report")
            .row("expected_n_without_interim", h.expected_n.0)
            .row("expected_n_with_rule", h.expected_n.1)
            .row(
                "treatment_deaths_without_interim",
                h.expected_treatment_deaths.0,
            )
            .row("treatment_deaths_with_rule", h.expected_treatment_deaths.1);
        estimate(&mut r, "delta_treatment_deaths", h.delta_treatment_deaths);
        estimate(&mut r, "delta_control_deaths", h.delta_control_deaths);
        estimate(&mut r, "delta_n", h.delta_n);
    }
    Ok(r)
}

fn design_rows(r: &mut Report, d: &GroupSequentialDesign) {
    r.row("looks", d.looks())
        .row("info_fractions", fmt_list(&d.info_fractions))
        .row("upper_z", fmt_list(&d.upper_z))
        .row("lower_z", fmt_list(&d.lower_z))
        .row("max_ratio", d.max_ratio)
        .row("n_max", d.max_ratio * d.n_fixed_reference as f64);
}

fn candidate_rows(r: &mut Report, c: &CandidateDesign) {
    design_rows(r, &c.design);
    let e = &c.evaluation;
    r.row("size", e.size)
        .row("power", e.power)
        .row("expected_n_null", e.expected_n.null)
        .row("expected_n_alternative", e.expected_n.alternative)
        .row("expected_n_harm", e.expected_n.negative)
        .row("en_ratio_harm", e.en_ratio_negative)
        .row("expected_deaths_control_harm", c.expected_deaths_harm.0)
        .row("expected_deaths_treatment_harm", c.expected_deaths_harm.1);
    if let Some(s) = &c.search {
        r.row("grid_step", s.grid_step)
            .row("refinement_gain", s.refinement_gain)
            .row("evaluations", s.evaluations);
    }
}

pub fn optimize(a: &OptimizeArgs, seed: u64) -> Result<Report> {
    let kind: EndpointKind = a.endpoint.parse()?;
    let setup = endpoint_setup(kind)?;
    let n_fixed = a.n_fixed.unwrap_or(setup.n_fixed);
    let drift = a.objective_drift.unwrap_or(setup.drifts.negative);
    let settings = SearchSettings {
        min_step: a.min_step,
        ..SearchSettings::default()
    };
    let opt = optimize_design(
        OptimizeSpec {
            looks: a.looks,
            alpha: a.alpha1,
            power: a.power,
            objective_drift: drift,
            n_fixed,
        },
        settings,
        None,
    )?;

    let mut r = Report::new("optimize");
    r.param("looks", a.looks)
        .param("endpoint", kind.as_str())
        .param("n-fixed", n_fixed)
        .param("objective-drift", drift)
        .param("alpha1", a.alpha1)
        .param("power", a.power)
        .param("min-step", a.min_step)
        .param("seed", seed);
    r.section("design");
    design_rows(&mut r, &opt.design);
    let e = &opt.evaluation;
    r.section("evaluation")
        .row("size", e.size)
        .row("power", e.power)
        .row("expected_n_null", e.expected_n.null)
        .row("expected_n_alternative", e.expected_n.alternative)
        .row("expected_n_objective", e.expected_n.negative)
        .row("objective_ratio", opt.objective_ratio)
        .row("grid_step", opt.grid_step)
        .row("refined_ratio", opt.refined_ratio)
        .row("refinement_gain", opt.refinement_gain())
        .row("evaluations", opt.evaluations);
    r.section("counterfactual");
    match kind {
        EndpointKind::Infection => {
            r.row("en_ratio", opt.objective_ratio)
                .row("reported_en_ratio", REPORTED_EN_RATIO);
        }
        EndpointKind::Mortality => {
            r.row("expected_stop_n", e.expected_n.negative)
                .row("reported_stop_n", REPORTED_MORTALITY_STOP_N);
        }
    }
    r.note(
        "the published figure comes from an unstated design family; the comparison is approximate",
    );
    Ok(r)
}

fn endpoint_rows(r: &mut Report, e: &EndpointCounterfactual) {
    let name = e.endpoint.to_ascii_lowercase();
    r.section(&name)
        .row("p_control", e.p_control)
        .row("p_treatment", e.p_treatment)
        .row("p_harm", e.p_harm)
        .row("n_fixed", e.n_fixed)
        .row("drift_alternative", e.drifts.alternative)
        .row("drift_harm", e.drifts.negative)
        .row("mortality_control_harm", e.harm_mortality.0)
        .row("mortality_treatment_harm", e.harm_mortality.1)
        .row("en_ratio_null", e.en_ratio_null)
        .row("en_ratio_null_check", e.en_ratio_null_check);
    for c in &e.designs {
        r.section(&format!(
            "{name}_{}",
            c.label.to_ascii_lowercase().replace('=', "")
        ));
        candidate_rows(r, c);
    }
}

pub fn counterfactuals() -> Result<Report> {
    let c = propatria_counterfactuals()?;
    let mut r = Report::new("counterfactuals");
    r.param("reported-en-ratio", c.reported_en_ratio)
        .param("reported-mortality-stop-n", c.reported_mortality_stop_n);
    endpoint_rows(&mut r, &c.infection);
    endpoint_rows(&mut r, &c.mortality);
    r.section("as_run");
    design_rows(&mut r, &c.actual.design);
    let e = &c.actual.evaluation;
    r.row("size", e.size)
        .row("power", e.power)
        .row("expected_n_null", e.expected_n.null)
        .row("expected_n_harm", e.expected_n.negative)
        .row("en_ratio_harm", e.en_ratio_negative)
        .row(
            "expected_deaths_control_harm",
            c.actual.expected_deaths_harm.0,
        )
        .row(
            "expected_deaths_treatment_harm",
            c.actual.expected_deaths_harm.1,
        );
    r.section("headline")
        .row(
            "infection_en_ratio_k5",
            c.infection_en_ratio(5).unwrap_or(f64::NAN),
        )
        .row(
            "infection_en_ratio_k10",
            c.infection_en_ratio(10).unwrap_or(f64::NAN),
        )
        .row("reported_en_ratio", c.reported_en_ratio)
        .row(
            "mortality_stop_n_k10",
            c.mortality_stop_n(10).unwrap_or(f64::NAN),
        )
        .row("reported_mortality_stop_n", c.reported_mortality_stop_n);
    Ok(r)
}
