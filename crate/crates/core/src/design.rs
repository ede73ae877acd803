//! Fixed-sample-size calculation for two proportions, dilution by event-free
//! mild cases, and blinded re-estimation from the pooled event rate.

use std::fmt;

use crate::error::{check_open_probability, domain, Error, Result};
use crate::stats::phi_inv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sided {
    One,
    Two,
}

impl Sided {
    pub fn from_count(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Sided::One),
            2 => Ok(Sided::Two),
            _ => domain(format!("sided must be 1 or 2, got {n}")),
        }
    }

    pub fn count(self) -> u8 {
        match self {
            Sided::One => 1,
            Sided::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSizeFormula {
    /// `(z_α + z_β)² (p_c q_c + p_t q_t) / δ²`
    SimplePooled,
    /// Pooled null variance on the `z_α` term, alternative variance on the
    /// `z_β` term, then the Fleiss continuity correction.
    PooledPlusAltVariance,
}

impl SampleSizeFormula {
    pub const ALL: [SampleSizeFormula; 2] = [
        SampleSizeFormula::SimplePooled,
        SampleSizeFormula::PooledPlusAltVariance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SampleSizeFormula::SimplePooled => "SIMPLE_POOLED",
            SampleSizeFormula::PooledPlusAltVariance => "POOLED_PLUS_ALT_VARIANCE",
        }
    }
}

impl fmt::Display for SampleSizeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SampleSizeFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SIMPLE_POOLED" | "SIMPLE" => Ok(SampleSizeFormula::SimplePooled),
            "POOLED_PLUS_ALT_VARIANCE" | "POOLED_ALT" => {
                Ok(SampleSizeFormula::PooledPlusAltVariance)
            }
            _ => domain(format!("unknown sample-size formula {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub alpha: f64,
    pub sided: Sided,
    pub power: f64,
    pub p_control: f64,
    pub p_treatment: f64,
    /// Fraction of enrollees who turn out to be event-free mild cases.
    pub dilution: f64,
    /// Treatment-to-control allocation ratio.
    pub allocation: f64,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            sided: Sided::Two,
            power: 0.80,
            p_control: 0.50,
            p_treatment: 0.30,
            dilution: 0.0,
            allocation: 1.0,
        }
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        check_open_probability("alpha", self.alpha)?;
        check_open_probability("power", self.power)?;
        check_open_probability("p_control", self.p_control)?;
        check_open_probability("p_treatment", self.p_treatment)?;
        if !(0.0..1.0).contains(&self.dilution) {
            return domain(format!("dilution {} must lie in [0, 1)", self.dilution));
        }
        if !(self.allocation.is_finite() && self.allocation > 0.0) {
            return domain(format!(
                "allocation ratio {} must be positive",
                self.allocation
            ));
        }
        if self.p_control == self.p_treatment {
            return Err(Error::NoEffect(self.p_control));
        }
        Ok(())
    }

    fn z_alpha(&self) -> f64 {
        match self.sided {
            Sided::One => phi_inv(1.0 - self.alpha),
            Sided::Two => phi_inv(1.0 - self.alpha / 2.0),
        }
    }

    /// Event rate expected across both arms combined.
    pub fn expected_pooled_rate(&self) -> f64 {
        let d = diluted_rates(self);
        (d.0 + self.allocation * d.1) / (1.0 + self.allocation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSizeResult {
    /// Control-arm size; equals the treatment-arm size under 1:1 allocation.
    pub n_per_group: u64,
    pub n_total: u64,
    pub formula: SampleSizeFormula,
    /// (control, treatment) rates the calculation used.
    pub effective_rates: (f64, f64),
}

fn diluted_rates(spec: &DesignSpec) -> (f64, f64) {
    let keep = 1.0 - spec.dilution;
    (keep * spec.p_control, keep * spec.p_treatment)
}

/// Rates scaled by `1 − dilution`, mild cases counted event-free in both arms.
/// The returned spec carries `dilution = 0`.
pub fn diluted_design(spec: &DesignSpec) -> Result<DesignSpec> {
    if !(0.0..1.0).contains(&spec.dilution) {
        return domain(format!("dilution {} must lie in [0, 1)", spec.dilution));
    }
    let (p_control, p_treatment) = diluted_rates(spec);
    Ok(DesignSpec {
        p_control,
        p_treatment,
        dilution: 0.0,
        ..*spec
    })
}

/// Control-arm size before rounding for rates `(pc, pt)`.
fn raw_control_n(spec: &DesignSpec, pc: f64, pt: f64, formula: SampleSizeFormula) -> f64 {
    let r = spec.allocation;
    let za = spec.z_alpha();
    let zb = phi_inv(spec.power);
    let delta = (pc - pt).abs();
    let alt_var = pc * (1.0 - pc) + pt * (1.0 - pt) / r;
    match formula {
        SampleSizeFormula::SimplePooled => (za + zb).powi(2) * alt_var / (delta * delta),
        SampleSizeFormula::PooledPlusAltVariance => {
            let pbar = (pc + r * pt) / (1.0 + r);
            let null_var = pbar * (1.0 - pbar) * (1.0 + 1.0 / r);
            let n = (za * null_var.sqrt() + zb * alt_var.sqrt()).powi(2) / (delta * delta);
            let cc = 1.0 + (1.0 + 2.0 * (r + 1.0) / (r * n * delta)).sqrt();
            n * cc * cc / 4.0
        }
    }
}

fn size_for_rates(
    spec: &DesignSpec,
    pc: f64,
    pt: f64,
    formula: SampleSizeFormula,
) -> SampleSizeResult {
    // Guard against 90.00000000001 rounding up to 91.
    let raw = raw_control_n(spec, pc, pt, formula);
    let n_control = ((raw - 1e-9).ceil() as u64).max(2);
    let n_treatment = ((n_control as f64 * spec.allocation - 1e-9).ceil() as u64).max(2);
    SampleSizeResult {
        n_per_group: n_control,
        n_total: n_control + n_treatment,
        formula,
        effective_rates: (pc, pt),
    }
}

/// Normal-approximation sample size, after applying the design's dilution.
pub fn fixed_sample_size(
    spec: &DesignSpec,
    formula: SampleSizeFormula,
) -> Result<SampleSizeResult> {
    spec.validate()?;
    let d = diluted_design(spec)?;
    if d.p_control == d.p_treatment {
        return Err(Error::NoEffect(d.p_control));
    }
    Ok(size_for_rates(spec, d.p_control, d.p_treatment, formula))
}

/// Blinded re-estimation: keep the design's relative risk, re-anchor the
/// rates on the observed pooled event rate, and recompute the total.
/// The result never falls below `n_observed`.
pub fn reestimate_sample_size(
    spec: &DesignSpec,
    observed_pooled_rate: f64,
    n_observed: u64,
    formula: SampleSizeFormula,
) -> Result<SampleSizeResult> {
    spec.validate()?;
    check_open_probability("observed_pooled_rate", observed_pooled_rate)?;
    let rr = spec.p_treatment / spec.p_control;
    let r = spec.allocation;
    let pc = observed_pooled_rate * (1.0 + r) / (1.0 + r * rr);
    let pt = rr * pc;
    if !(pc > 0.0 && pc < 1.0 && pt > 0.0 && pt < 1.0) {
        return Err(Error::DegenerateReestimation(format!(
            "pooled rate {observed_pooled_rate} with relative risk {rr} implies rates ({pc}, {pt})"
        )));
    }
    let mut out = size_for_rates(spec, pc, pt, formula);
    if out.n_total < n_observed {
        out.n_total = n_observed;
        out.n_per_group = ((n_observed as f64) / (1.0 + r)).ceil() as u64;
    }
    Ok(out)
}
