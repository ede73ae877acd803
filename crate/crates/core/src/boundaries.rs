//! Conditional-probability stopping rule in p-value form, its conditional-power
//! calibration, and comparator group-sequential boundaries.
//!
//! The rule compares the interim one-sided p-value with two thresholds:
//! below `p_sig` stop for significance, above `p_fut` stop for futility.
//! Each threshold corresponds to a conditional-power level under the
//! current-trend drift, via the Brownian-motion representation
//! `B(t) = Z(t) √t`.

use std::fmt;

use crate::error::{check_open_probability, domain, Error, Result};
use crate::optimize::{crossings, FINE_GRID};
use crate::roots::brent;
use crate::stats::{phi, phi_inv, phi_upper};

/// Drift assumed for the remainder of the trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    /// Drift estimated from the data so far, `B(t) / t`.
    CurrentTrend,
    Null,
    /// Expected final z under the design alternative.
    Design(f64),
}

/// Probability that the final z exceeds `Φ⁻¹(1 − alpha_one_sided)` given the
/// interim z at information fraction `t`.
pub fn conditional_power(z_t: f64, t: f64, alpha_one_sided: f64, drift: Drift) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("information fraction {t} must lie in (0, 1)"));
    }
    check_open_probability("alpha_one_sided", alpha_one_sided)?;
    if !z_t.is_finite() {
        return domain(format!("interim z {z_t} is not finite"));
    }
    let z_crit = phi_inv(1.0 - alpha_one_sided);
    Ok(cp(z_t, t, z_crit, drift))
}

fn cp(z_t: f64, t: f64, z_crit: f64, drift: Drift) -> f64 {
    let b = z_t * t.sqrt();
    let theta = match drift {
        Drift::CurrentTrend => b / t,
        Drift::Null => 0.0,
        Drift::Design(theta) => theta,
    };
    phi((b + theta * (1.0 - t) - z_crit) / (1.0 - t).sqrt())
}

/// Interim z at which the current-trend conditional power equals `gamma`.
fn z_for_gamma(gamma: f64, t: f64, z_crit: f64) -> f64 {
    t.sqrt() * (z_crit + (1.0 - t).sqrt() * phi_inv(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySource {
    Direct,
    ConditionalPower { gamma_sig: f64, gamma_fut: f64 },
    Pocock,
    OBrienFleming,
    HaybittlePeto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    /// Fraction of the planned sample size at the interim look.
    pub t: f64,
    pub p_sig: f64,
    pub p_fut: f64,
    pub alpha_one_sided: f64,
    pub source: BoundarySource,
}

impl BoundarySpec {
    /// Thresholds given directly as p-values.
    pub fn direct(p_sig: f64, p_fut: f64, t: f64, alpha_one_sided: f64) -> Result<Self> {
        let spec = Self {
            t,
            p_sig,
            p_fut,
            alpha_one_sided,
            source: BoundarySource::Direct,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t <= 1.0) {
            return domain(format!(
                "information fraction {} must lie in (0, 1]",
                self.t
            ));
        }
        check_open_probability("alpha_one_sided", self.alpha_one_sided)?;
        if !(self.p_sig > 0.0 && self.p_sig < self.p_fut && self.p_fut < 1.0) {
            return domain(format!(
                "thresholds must satisfy 0 < p_sig < p_fut < 1 (got {} and {})",
                self.p_sig, self.p_fut
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Continue,
    StopSignificance,
    StopFutility,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Continue => "CONTINUE",
            Decision::StopSignificance => "STOP_SIGNIFICANCE",
            Decision::StopFutility => "STOP_FUTILITY",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Compare a one-sided p-value with the thresholds; values exactly at a
/// threshold continue.
pub fn decide(p_one_sided: f64, boundary: &BoundarySpec) -> Decision {
    if p_one_sided < boundary.p_sig {
        Decision::StopSignificance
    } else if p_one_sided > boundary.p_fut {
        Decision::StopFutility
    } else {
        Decision::Continue
    }
}

/// p-value thresholds whose current-trend conditional power is `gamma_sig`
/// and `gamma_fut` respectively.
pub fn thresholds_from_gamma(
    gamma_sig: f64,
    gamma_fut: f64,
    t: f64,
    alpha_one_sided: f64,
) -> Result<BoundarySpec> {
    check_open_probability("gamma_sig", gamma_sig)?;
    check_open_probability("gamma_fut", gamma_fut)?;
    if gamma_fut >= gamma_sig {
        return domain(format!(
            "gamma_fut ({gamma_fut}) must be below gamma_sig ({gamma_sig})"
        ));
    }
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("information fraction {t} must lie in (0, 1)"));
    }
    check_open_probability("alpha_one_sided", alpha_one_sided)?;
    let z_crit = phi_inv(1.0 - alpha_one_sided);
    let p_sig = phi_upper(z_for_gamma(gamma_sig, t, z_crit));
    let p_fut = phi_upper(z_for_gamma(gamma_fut, t, z_crit));
    if !(p_sig > 0.0 && p_sig < p_fut && p_fut < 1.0) {
        return Err(Error::Calibration(format!(
            "thresholds ({p_sig}, {p_fut}) fall outside (0, 1)"
        )));
    }
    Ok(BoundarySpec {
        t,
        p_sig,
        p_fut,
        alpha_one_sided,
        source: BoundarySource::ConditionalPower {
            gamma_sig,
            gamma_fut,
        },
    })
}

/// Conditional-power levels implied by quoted p-value thresholds; inverse of
/// [`thresholds_from_gamma`].
pub fn calibrate_gamma(p_sig: f64, p_fut: f64, t: f64, alpha_one_sided: f64) -> Result<(f64, f64)> {
    if !(p_sig > 0.0 && p_sig < p_fut && p_fut < 1.0) {
        return domain(format!(
            "thresholds must satisfy 0 < p_sig < p_fut < 1 (got {p_sig} and {p_fut})"
        ));
    }
    let z_sig = phi_inv(1.0 - p_sig);
    let z_fut = phi_inv(1.0 - p_fut);
    Ok((
        conditional_power(z_sig, t, alpha_one_sided, Drift::CurrentTrend)?,
        conditional_power(z_fut, t, alpha_one_sided, Drift::CurrentTrend)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Pocock,
    OBrienFleming,
    HaybittlePeto,
}

impl Comparator {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparator::Pocock => "POCOCK",
            Comparator::OBrienFleming => "OBRIEN_FLEMING",
            Comparator::HaybittlePeto => "HAYBITTLE_PETO",
        }
    }
}

impl std::str::FromStr for Comparator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "POCOCK" => Ok(Comparator::Pocock),
            "OBRIEN_FLEMING" | "OBF" => Ok(Comparator::OBrienFleming),
            "HAYBITTLE_PETO" | "HP" => Ok(Comparator::HaybittlePeto),
            _ => domain(format!("unknown comparator {s:?}")),
        }
    }
}

/// Nominal p-value applied at interim looks by the Haybittle–Peto rule.
pub const HAYBITTLE_PETO_INTERIM_P: f64 = 0.001;

/// z-scale efficacy boundaries for all `looks` equally spaced analyses,
/// calibrated so the overall one-sided size is `alpha_one_sided`.
pub fn comparator_z_boundaries(
    method: Comparator,
    looks: usize,
    alpha_one_sided: f64,
) -> Result<Vec<f64>> {
    if looks == 0 {
        return domain("at least one look is required");
    }
    check_open_probability("alpha_one_sided", alpha_one_sided)?;
    let k = looks;
    if k == 1 {
        return Ok(vec![phi_inv(1.0 - alpha_one_sided)]);
    }
    let info: Vec<f64> = (1..=k).map(|j| j as f64 / k as f64).collect();
    let lower = vec![f64::NEG_INFINITY; k];
    let shape = |c: f64| -> Vec<f64> {
        match method {
            Comparator::Pocock => vec![c; k],
            Comparator::OBrienFleming => info.iter().map(|t| c / t.sqrt()).collect(),
            Comparator::HaybittlePeto => {
                let mut v = vec![phi_inv(1.0 - HAYBITTLE_PETO_INTERIM_P); k];
                v[k - 1] = c;
                v
            }
        }
    };
    let size = |c: f64| -> f64 {
        crossings(&info, &shape(c), &lower, 0.0, FINE_GRID)
            .upper
            .iter()
            .sum()
    };
    let c = brent(|c| size(c) - alpha_one_sided, 0.0, 10.0, 1e-12).ok_or_else(|| {
        Error::Calibration(format!(
            "{} boundary for {k} looks cannot reach size {alpha_one_sided}",
            method.as_str()
        ))
    })?;
    Ok(shape(c))
}

/// Nominal one-sided p threshold at look `k` (1-based) of `looks`.
pub fn comparator_boundary(
    method: Comparator,
    k: usize,
    looks: usize,
    alpha_one_sided: f64,
) -> Result<f64> {
    if k == 0 || k > looks {
        return domain(format!("look {k} is outside 1..={looks}"));
    }
    let z = comparator_z_boundaries(method, looks, alpha_one_sided)?;
    Ok(phi_upper(z[k - 1]))
}
