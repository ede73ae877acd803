//! Interim analysis under blinding.
//!
//! A blinded committee sees counts by group label without knowing which label
//! is treatment. The correct procedure evaluates the stopping rule under both
//! label assignments, each with the p-value aimed at treatment benefit, and
//! asks for deblinding when the two disagree. The erroneous procedure takes
//! whichever one-sided p is smaller, which makes the decision independent of
//! the labels and turns a harmful trend into an apparent benefit.

use std::fmt;

use crate::boundaries::{decide, BoundarySpec, Decision};
use crate::error::{domain, Result};
use crate::stats::{
    fisher_one_sided_p, fisher_test, max_significance_one_sided_p, Direction, TwoByTwoTable,
};

/// Patients analyzed at the reconstructed interim look.
pub const INTERIM_N_TOTAL: u64 = 184;
/// Two-sided p for the mortality difference reported at the interim.
pub const REPORTED_MORTALITY_P: f64 = 0.10;
/// Overall mortality the monitors considered within the expected range.
pub const EXPECTED_OVERALL_MORTALITY: f64 = 0.11;

/// Which group label is treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Labeling {
    ATreatment,
    BTreatment,
}

impl Labeling {
    pub fn as_str(self) -> &'static str {
        match self {
            Labeling::ATreatment => "A_IS_TREATMENT",
            Labeling::BTreatment => "B_IS_TREATMENT",
        }
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelingResult {
    pub labeling: Labeling,
    /// Alternative tested, in table orientation.
    pub alternative: Direction,
    pub p_one_sided: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverallDecision {
    /// Set only when every evaluated labeling agrees.
    pub decision: Option<Decision>,
    pub deblind_required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MortalityDiagnostics {
    pub table: TwoByTwoTable,
    pub overall_rate: f64,
    pub p_two_sided: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub ambiguous_direction_p: f64,
    pub ambiguous_direction_decision: Decision,
    pub degenerate: bool,
    pub mortality: Option<MortalityDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterimReport {
    /// Oriented so that group A is treatment under the true labeling.
    pub table: TwoByTwoTable,
    pub boundary: BoundarySpec,
    /// Which sign of effect counts as treatment benefit when A is treatment.
    pub benefit_direction: Direction,
    pub blinded: bool,
    /// True labeling first; the swapped labeling follows when blinded.
    pub per_labeling: Vec<LabelingResult>,
    pub overall: OverallDecision,
    pub diagnostics: Diagnostics,
}

impl InterimReport {
    /// Attach a mortality table as a diagnostic; no decision depends on it.
    pub fn with_mortality(mut self, table: TwoByTwoTable) -> Self {
        let test = fisher_test(&table, Direction::AExceedsB);
        self.diagnostics.mortality = Some(MortalityDiagnostics {
            table,
            overall_rate: table.pooled_rate(),
            p_two_sided: test.p_two_sided,
        });
        self
    }

    pub fn labeling(&self, labeling: Labeling) -> Option<&LabelingResult> {
        self.per_labeling.iter().find(|r| r.labeling == labeling)
    }
}

fn evaluate(
    table: &TwoByTwoTable,
    boundary: &BoundarySpec,
    labeling: Labeling,
    benefit: Direction,
) -> LabelingResult {
    let alternative = match labeling {
        Labeling::ATreatment => benefit,
        Labeling::BTreatment => benefit.flipped(),
    };
    let p = fisher_one_sided_p(table, alternative);
    LabelingResult {
        labeling,
        alternative,
        p_one_sided: p,
        decision: decide(p, boundary),
    }
}

/// Apply the stopping rule to an interim table.
///
/// Blinded analyses evaluate both label assignments; unblinded ones only the
/// true assignment. Degenerate tables are flagged in the diagnostics.
pub fn analyze_interim(
    table: &TwoByTwoTable,
    boundary: &BoundarySpec,
    benefit_direction: Direction,
    blinded: bool,
) -> Result<InterimReport> {
    boundary.validate()?;
    let mut per_labeling = vec![evaluate(
        table,
        boundary,
        Labeling::ATreatment,
        benefit_direction,
    )];
    if blinded {
        per_labeling.push(evaluate(
            table,
            boundary,
            Labeling::BTreatment,
            benefit_direction,
        ));
    }
    let first = per_labeling[0].decision;
    let agree = per_labeling.iter().all(|r| r.decision == first);
    let (ambiguous_p, ambiguous_decision) = ambiguous_direction_analysis(table, boundary);
    Ok(InterimReport {
        table: *table,
        boundary: *boundary,
        benefit_direction,
        blinded,
        per_labeling,
        overall: OverallDecision {
            decision: agree.then_some(first),
            deblind_required: !agree,
        },
        diagnostics: Diagnostics {
            ambiguous_direction_p: ambiguous_p,
            ambiguous_direction_decision: ambiguous_decision,
            degenerate: table.is_degenerate(),
            mortality: None,
        },
    })
}

/// The erroneous convention: test whichever direction is more significant.
/// Invariant under swapping the group labels.
pub fn ambiguous_direction_analysis(
    table: &TwoByTwoTable,
    boundary: &BoundarySpec,
) -> (f64, Decision) {
    let (p, _) = max_significance_one_sided_p(table);
    (p, decide(p, boundary))
}

/// Constraints for searching interim tables consistent with the reported
/// summary: group A's event rate exceeds B's by a few percentage points, and
/// the one-sided p-values are near the quoted pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionSpec {
    pub n_total: u64,
    /// Largest allowed difference between the group sizes.
    pub split_tolerance: u64,
    /// Inclusive range for `100 · (rate_a − rate_b)`.
    pub diff_points: (f64, f64),
    /// Targets for (p in direction A > B, p in direction B > A).
    pub p_targets: (f64, f64),
    pub p_tolerance: f64,
    pub z_range: (f64, f64),
}

impl Default for ReconstructionSpec {
    fn default() -> Self {
        Self {
            n_total: INTERIM_N_TOTAL,
            split_tolerance: 6,
            diff_points: (4.0, 7.0),
            p_targets: (0.21, 0.87),
            p_tolerance: 0.03,
            z_range: (0.75, 1.25),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructedTable {
    pub table: TwoByTwoTable,
    pub p_a_exceeds_b: f64,
    pub p_b_exceeds_a: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub spec: ReconstructionSpec,
    /// Lexicographic table order.
    pub tables: Vec<ReconstructedTable>,
}

impl Reconstruction {
    pub fn failed(&self) -> bool {
        self.tables.is_empty()
    }

    /// The match closest to the quoted p pair, ties to the first in order.
    pub fn closest(&self) -> Option<&ReconstructedTable> {
        let (ta, tb) = self.spec.p_targets;
        let dist = |r: &ReconstructedTable| {
            (r.p_a_exceeds_b - ta)
                .abs()
                .max((r.p_b_exceeds_a - tb).abs())
        };
        self.tables
            .iter()
            .fold(None, |best: Option<&ReconstructedTable>, r| match best {
                Some(b) if dist(b) <= dist(r) => Some(b),
                _ => Some(r),
            })
    }
}

/// Enumerate all tables satisfying `spec`. An empty result is reported through
/// [`Reconstruction::failed`], not as an error.
pub fn reconstruct_interim_tables(spec: &ReconstructionSpec) -> Result<Reconstruction> {
    if spec.n_total < 2 {
        return domain(format!("n_total {} must be at least 2", spec.n_total));
    }
    if spec.diff_points.0 > spec.diff_points.1
        || spec.z_range.0 > spec.z_range.1
        || spec.p_tolerance < 0.0
    {
        return domain("reconstruction ranges must be non-empty");
    }
    let n = spec.n_total;
    let mut tables = Vec::new();
    for total_a in 1..n {
        let total_b = n - total_a;
        if total_a.abs_diff(total_b) > spec.split_tolerance {
            continue;
        }
        for events_a in 0..=total_a {
            for events_b in 0..=total_b {
                let table = TwoByTwoTable {
                    events_a,
                    total_a,
                    events_b,
                    total_b,
                };
                let diff = 100.0 * (table.rate_a() - table.rate_b());
                // Small slack so boundary differences such as 4/100 survive rounding.
                if diff < spec.diff_points.0 - 1e-9 || diff > spec.diff_points.1 + 1e-9 {
                    continue;
                }
                let test = fisher_test(&table, Direction::AExceedsB);
                let (pa, pb) = (test.p_one_sided, test.p_other_side);
                if (pa - spec.p_targets.0).abs() > spec.p_tolerance
                    || (pb - spec.p_targets.1).abs() > spec.p_tolerance
                    || test.z < spec.z_range.0
                    || test.z > spec.z_range.1
                {
                    continue;
                }
                tables.push(ReconstructedTable {
                    table,
                    p_a_exceeds_b: pa,
                    p_b_exceeds_a: pb,
                    z: test.z,
                });
            }
        }
    }
    tables.sort_by_key(|a| a.table);
    Ok(Reconstruction {
        spec: *spec,
        tables,
    })
}
