//! Coordinate-descent search over interim boundaries.
//!
//! For a candidate set of interim boundaries the final critical value is
//! fixed by the size constraint (the null distribution does not depend on the
//! maximum sample size) and the maximum sample size by the power constraint.
//! Only the interim boundaries are searched; candidates for which either
//! constraint cannot be met, or for which E[N] under the null or the
//! alternative exceeds the fixed sample size, are discarded.

use super::crossing::{crossings, interim_crossings, FINE_GRID, SEARCH_GRID};
use super::{evaluate_with_grid, DesignEvaluation, Drifts, GroupSequentialDesign};
use crate::error::{check_open_probability, domain, Error, Result};
use crate::roots::brent;
use crate::stats::phi_inv;

/// Boundaries are kept inside ±`Z_LIMIT`; a boundary at the limit never stops.
const Z_LIMIT: f64 = 8.0;
const MIN_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeSpec {
    pub looks: usize,
    /// One-sided significance level.
    pub alpha: f64,
    pub power: f64,
    /// Drift at which E[N] is minimized.
    pub objective_drift: f64,
    pub n_fixed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    pub initial_step: f64,
    /// Smallest coordinate step; the design is a local minimum on this grid.
    pub min_step: f64,
    /// Quadrature density used during the search.
    pub grid: usize,
    /// Largest admissible maximum sample size as a multiple of `n_fixed`.
    pub max_ratio_cap: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            min_step: 1.0 / 32.0,
            grid: SEARCH_GRID,
            max_ratio_cap: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedDesign {
    pub design: GroupSequentialDesign,
    /// Evaluated on the fine quadrature grid.
    pub evaluation: DesignEvaluation,
    /// E[N at objective drift] / n_fixed.
    pub objective_ratio: f64,
    pub grid_step: f64,
    /// Objective after one further halving of the step (≤ `objective_ratio`).
    pub refined_ratio: f64,
    pub evaluations: usize,
}

impl OptimizedDesign {
    /// Objective improvement found by the extra refinement pass.
    pub fn refinement_gain(&self) -> f64 {
        self.objective_ratio - self.refined_ratio
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Fitted {
    upper: Vec<f64>,
    lower: Vec<f64>,
    c_final: f64,
    ratio: f64,
    objective: f64,
}

struct Problem {
    spec: OptimizeSpec,
    settings: SearchSettings,
    fractions: Vec<f64>,
    drift_alt: f64,
    evaluations: usize,
}

impl Problem {
    fn new(spec: OptimizeSpec, settings: SearchSettings) -> Self {
        let k = spec.looks;
        Self {
            fractions: (1..=k).map(|j| j as f64 / k as f64).collect(),
            drift_alt: phi_inv(1.0 - spec.alpha) + phi_inv(spec.power),
            spec,
            settings,
            evaluations: 0,
        }
    }

    fn info(&self, ratio: f64) -> Vec<f64> {
        self.fractions.iter().map(|t| t * ratio).collect()
    }

    /// Final critical value, maximum-size ratio and objective for the
    /// interim boundaries `(upper, lower)`, or `None` if infeasible.
    fn fit(&mut self, upper: &[f64], lower: &[f64], grid: usize) -> Option<Fitted> {
        self.evaluations += 1;
        let k = self.spec.looks;
        let alpha = self.spec.alpha;
        if upper.iter().zip(lower).any(|(u, l)| u - l < MIN_GAP) {
            return None;
        }
        let mut up = upper.to_vec();
        let mut lo = lower.to_vec();
        up.push(0.0);
        lo.push(0.0);

        // Size: the null law of Z does not depend on the information scale.
        let (null_head, null_sub) = interim_crossings(&self.fractions, &up, &lo, 0.0, grid);
        let null_sub = null_sub?;
        let spent: f64 = null_head.upper.iter().sum();
        if spent >= alpha {
            return None;
        }
        let c_final = brent(
            |c| spent + null_sub.upper_next(1.0, c, 0.0) - alpha,
            -Z_LIMIT,
            Z_LIMIT,
            1e-11,
        )?;
        up[k - 1] = c_final;
        lo[k - 1] = c_final;

        // Power fixes the maximum sample size.
        let target = self.spec.power;
        let drift = self.drift_alt;
        let power_at = |ratio: f64| -> f64 {
            let info: Vec<f64> = self.fractions.iter().map(|t| t * ratio).collect();
            crossings(&info, &up, &lo, drift, grid)
                .upper
                .iter()
                .sum::<f64>()
        };
        let cap = self.settings.max_ratio_cap;
        if power_at(cap) < target {
            return None;
        }
        let ratio = brent(|r| power_at(r) - target, 0.25, cap, 1e-9)?;

        let en = |d: f64| -> f64 {
            let c = crossings(&self.info(ratio), &up, &lo, d, grid);
            let stopped: f64 = self
                .fractions
                .iter()
                .zip(c.upper.iter().zip(&c.lower))
                .map(|(t, (a, b))| t * (a + b))
                .sum();
            ratio * stopped
        };
        if en(0.0) > 1.0 || en(drift) > 1.0 {
            return None;
        }
        let objective = en(self.spec.objective_drift);
        Some(Fitted {
            upper: upper.to_vec(),
            lower: lower.to_vec(),
            c_final,
            ratio,
            objective,
        })
    }

    fn initial(&mut self, warm: Option<&GroupSequentialDesign>) -> Option<Fitted> {
        let k = self.spec.looks;
        let grid = self.settings.grid;
        let mut starts: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        if let Some(w) = warm {
            if let Some(s) = embed(w, &self.fractions) {
                starts.push(s);
            }
        }
        // Futility lines below the alternative mean, fixed conservative
        // efficacy boundaries, in decreasing order of aggressiveness.
        for offset in [1.5, 2.0, 2.5, 3.0, 4.0] {
            let upper = vec![3.0; k - 1];
            let lower = self.fractions[..k - 1]
                .iter()
                .map(|t| (self.drift_alt * t.sqrt() - offset).max(-Z_LIMIT))
                .collect();
            starts.push((upper, lower));
        }
        starts.push((vec![Z_LIMIT; k - 1], vec![-Z_LIMIT; k - 1]));

        let mut best: Option<Fitted> = None;
        for (u, l) in starts {
            if let Some(f) = self.fit(&u, &l, grid) {
                if best.as_ref().is_none_or(|b| better(&f, b)) {
                    best = Some(f);
                }
            }
        }
        best
    }

    /// First-improvement coordinate descent at a fixed step.
    fn descend(&mut self, mut current: Fitted, step: f64, grid: usize) -> Fitted {
        let k = self.spec.looks;
        loop {
            let mut improved = false;
            for coord in 0..2 * (k - 1) {
                let mut best_here: Option<Fitted> = None;
                for sign in [-1.0, 1.0] {
                    let mut upper = current.upper.clone();
                    let mut lower = current.lower.clone();
                    let j = coord / 2;
                    let slot = if coord % 2 == 0 {
                        &mut upper[j]
                    } else {
                        &mut lower[j]
                    };
                    *slot = (*slot + sign * step).clamp(-Z_LIMIT, Z_LIMIT);
                    if upper == current.upper && lower == current.lower {
                        continue;
                    }
                    if let Some(f) = self.fit(&upper, &lower, grid) {
                        if f.objective < current.objective - 1e-12
                            && best_here.as_ref().is_none_or(|b| better(&f, b))
                        {
                            best_here = Some(f);
                        }
                    }
                }
                if let Some(f) = best_here {
                    current = f;
                    improved = true;
                }
            }
            if !improved {
                return current;
            }
        }
    }

    fn design(&self, f: &Fitted) -> GroupSequentialDesign {
        let mut upper_z = f.upper.clone();
        let mut lower_z = f.lower.clone();
        upper_z.push(f.c_final);
        lower_z.push(f.c_final);
        GroupSequentialDesign {
            info_fractions: self.fractions.clone(),
            upper_z,
            lower_z,
            n_fixed_reference: self.spec.n_fixed,
            max_ratio: f.ratio,
        }
    }
}

/// Lower objective wins; ties go to the lexicographically smaller boundary vector.
fn better(a: &Fitted, b: &Fitted) -> bool {
    if a.objective != b.objective {
        return a.objective < b.objective;
    }
    let key = |f: &Fitted| -> Vec<f64> { f.upper.iter().chain(&f.lower).copied().collect() };
    key(a)
        .iter()
        .zip(key(b).iter())
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x < y)
}

/// Place the interim boundaries of `w` on the looks of `fractions` that
/// coincide with its looks; other looks never stop.
fn embed(w: &GroupSequentialDesign, fractions: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = fractions.len();
    let mut upper = vec![Z_LIMIT; k - 1];
    let mut lower = vec![-Z_LIMIT; k - 1];
    let wk = w.looks();
    for j in 0..wk.saturating_sub(1) {
        let t = w.info_fractions[j];
        let pos = fractions[..k - 1]
            .iter()
            .position(|&f| (f - t).abs() < 1e-12)?;
        upper[pos] = w.upper_z[j];
        lower[pos] = w.lower_z[j];
    }
    Some((upper, lower))
}

/// Minimize E[N at `objective_drift`] over equally spaced K-look designs with
/// one-sided size `alpha` and the given power at `z_α + z_β`.
///
/// `warm_start` may supply a design whose looks are a subset of the new ones
/// (for example K = 5 inside K = 10); the result is then never worse.
pub fn optimize_design(
    spec: OptimizeSpec,
    settings: SearchSettings,
    warm_start: Option<&GroupSequentialDesign>,
) -> Result<OptimizedDesign> {
    if spec.looks < 2 {
        return domain(format!(
            "optimization needs K >= 2 looks, got {}",
            spec.looks
        ));
    }
    check_open_probability("alpha", spec.alpha)?;
    check_open_probability("power", spec.power)?;
    if spec.power <= spec.alpha {
        return domain("power must exceed alpha");
    }
    if !spec.objective_drift.is_finite() {
        return domain("objective drift must be finite");
    }
    if !(settings.min_step > 0.0 && settings.initial_step >= settings.min_step) {
        return domain("search steps must satisfy 0 < min_step <= initial_step");
    }

    let mut problem = Problem::new(spec, settings);
    let grid = settings.grid;
    let mut current = problem.initial(warm_start).ok_or_else(|| {
        Error::Infeasible(format!(
            "no {}-look design meets size {} and power {} with max sample size <= {} x n_fixed",
            spec.looks, spec.alpha, spec.power, settings.max_ratio_cap
        ))
    })?;

    let mut step = settings.initial_step;
    while step >= settings.min_step {
        current = problem.descend(current, step, grid);
        step /= 2.0;
    }
    let grid_step = step * 2.0;

    // Re-fit on the fine grid so the reported constraints hold at full accuracy.
    let fine = problem
        .fit(&current.upper, &current.lower, FINE_GRID)
        .ok_or_else(|| Error::Infeasible("design lost feasibility on the fine grid".into()))?;
    let refined = problem.descend(current.clone(), grid_step / 2.0, grid);
    let refined_fine = problem
        .fit(&refined.upper, &refined.lower, FINE_GRID)
        .map_or(fine.objective, |f| f.objective.min(fine.objective));

    let design = problem.design(&fine);
    let drifts = Drifts {
        null: 0.0,
        alternative: problem.drift_alt,
        negative: spec.objective_drift,
    };
    let evaluation = evaluate_with_grid(&design, drifts, FINE_GRID);
    Ok(OptimizedDesign {
        objective_ratio: fine.objective,
        refined_ratio: refined_fine,
        grid_step,
        evaluations: problem.evaluations,
        design,
        evaluation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_look_null_objective() {
        let spec = OptimizeSpec {
            looks: 2,
            alpha: 0.025,
            power: 0.8,
            objective_drift: 0.0,
            n_fixed: 200,
        };
        let out = optimize_design(spec, SearchSettings::default(), None).unwrap();
        let e = out.evaluation;
        assert!((e.size - 0.025).abs() <= 1e-3, "size {}", e.size);
        assert!(e.power >= 0.8 - 1e-3, "power {}", e.power);
        assert!(e.expected_n.null < 200.0);
        assert!(out.design.validate().is_ok());
        assert!(out.refined_ratio <= out.objective_ratio + 1e-12);
    }

    #[test]
    fn rejects_single_look() {
        let spec = OptimizeSpec {
            looks: 1,
            alpha: 0.025,
            power: 0.8,
            objective_drift: 0.0,
            n_fixed: 200,
        };
        assert!(optimize_design(spec, SearchSettings::default(), None).is_err());
    }

    #[test]
    fn infeasible_when_capped() {
        let spec = OptimizeSpec {
            looks: 3,
            alpha: 0.025,
            power: 0.999,
            objective_drift: -3.0,
            n_fixed: 100,
        };
        let settings = SearchSettings {
            max_ratio_cap: 0.9,
            ..SearchSettings::default()
        };
        assert!(matches!(
            optimize_design(spec, settings, None),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn embedding_keeps_matching_looks() {
        let w = GroupSequentialDesign {
            info_fractions: vec![0.5, 1.0],
            upper_z: vec![2.5, 2.0],
            lower_z: vec![0.1, 2.0],
            n_fixed_reference: 1,
            max_ratio: 1.0,
        };
        let (u, l) = embed(&w, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(u, vec![Z_LIMIT, 2.5, Z_LIMIT]);
        assert_eq!(l, vec![-Z_LIMIT, 0.1, -Z_LIMIT]);
        assert!(embed(&w, &[0.3, 0.6, 1.0]).is_none());
    }
}
