//! Inference for 2×2 tables with an explicit alternative direction.
//!
//! Group A and group B are the two columns of the table. Every one-sided
//! quantity takes a [`Direction`] naming the group whose event rate is larger
//! under the alternative; nothing here picks a direction on its own except
//! [`max_significance_one_sided_p`], which reproduces the "report whichever
//! side is more significant" convention of common statistics packages.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use crate::error::{check_open_probability, domain, Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("normal_cdf argument {x} is not finite"));
    }
    Ok(phi(x))
}

/// Inverse of [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_open_probability("p", p)?;
    Ok(phi_inv(p))
}

/// Infallible Φ for internal use where the argument is known finite.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x) without cancellation.
#[inline]
pub(crate) fn phi_upper(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn density(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Acklam's rational starting point, polished with Halley steps on Φ.
pub(crate) fn phi_inv(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        // Φ(x) − p, taken from the smaller tail.
        let e = if x > 0.0 {
            (1.0 - p) - phi_upper(x)
        } else {
            phi(x) - p
        };
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Natural log of n!.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Hypergeometric probability of `k` successes in `draws` draws without
/// replacement from `population` items of which `successes` are successes.
pub fn hypergeom_pmf(k: u64, population: u64, successes: u64, draws: u64) -> Result<f64> {
    if successes > population || draws > population {
        return domain(format!(
            "inconsistent hypergeometric counts: population {population}, successes {successes}, draws {draws}"
        ));
    }
    let lo = (draws + successes).saturating_sub(population);
    let hi = draws.min(successes);
    if k < lo || k > hi {
        return Ok(0.0);
    }
    let ln_choose = |n: u64, r: u64| ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r);
    let ln_p = ln_choose(successes, k) + ln_choose(population - successes, draws - k)
        - ln_choose(population, draws);
    Ok(ln_p.exp())
}

/// Which group has the higher event rate under the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AExceedsB,
    BExceedsA,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::AExceedsB => Direction::BExceedsA,
            Direction::BExceedsA => Direction::AExceedsB,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AExceedsB => "A_EXCEEDS_B",
            Direction::BExceedsA => "B_EXCEEDS_A",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "A_EXCEEDS_B" => Ok(Direction::AExceedsB),
            "B_EXCEEDS_A" => Ok(Direction::BExceedsA),
            _ => domain(format!("unknown direction {s:?}")),
        }
    }
}

/// Event counts per group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoByTwoTable {
    pub events_a: u64,
    pub total_a: u64,
    pub events_b: u64,
    pub total_b: u64,
}

impl TwoByTwoTable {
    pub fn new(events_a: u64, total_a: u64, events_b: u64, total_b: u64) -> Result<Self> {
        if total_a == 0 || total_b == 0 {
            return Err(Error::InvalidTable(format!(
                "group totals must be positive (got {total_a} and {total_b})"
            )));
        }
        if events_a > total_a || events_b > total_b {
            return Err(Error::InvalidTable(format!(
                "events exceed totals ({events_a}/{total_a}, {events_b}/{total_b})"
            )));
        }
        Ok(Self {
            events_a,
            total_a,
            events_b,
            total_b,
        })
    }

    /// The same data with the group labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            events_a: self.events_b,
            total_a: self.total_b,
            events_b: self.events_a,
            total_b: self.total_a,
        }
    }

    pub fn total(&self) -> u64 {
        self.total_a + self.total_b
    }

    pub fn total_events(&self) -> u64 {
        self.events_a + self.events_b
    }

    pub fn rate_a(&self) -> f64 {
        self.events_a as f64 / self.total_a as f64
    }

    pub fn rate_b(&self) -> f64 {
        self.events_b as f64 / self.total_b as f64
    }

    pub fn pooled_rate(&self) -> f64 {
        self.total_events() as f64 / self.total() as f64
    }

    /// No events or no non-events overall: the conditional support is one point.
    pub fn is_degenerate(&self) -> bool {
        let m = self.total_events();
        m == 0 || m == self.total()
    }

    fn null_distribution(&self) -> ConditionalNull {
        ConditionalNull::new(self.total(), self.total_events(), self.total_a)
    }

    /// The table and alternative in a fixed label order, so that swapping
    /// labels reproduces every p-value bit for bit.
    fn canonical(&self, alt: Direction) -> (Self, Direction) {
        if (self.total_a, self.events_a) > (self.total_b, self.events_b) {
            (self.swapped(), alt.flipped())
        } else {
            (*self, alt)
        }
    }
}

impl fmt::Display for TwoByTwoTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} vs {}/{}",
            self.events_a, self.total_a, self.events_b, self.total_b
        )
    }
}

/// Distribution of `events_a` given both margins under the null.
///
/// Probabilities are built by the ratio recurrence outward from the mode and
/// normalized, which keeps tail sums accurate to a few ulps.
#[derive(Debug, Clone)]
pub(crate) struct ConditionalNull {
    lo: u64,
    pmf: Vec<f64>,
}

impl ConditionalNull {
    pub(crate) fn new(population: u64, successes: u64, draws: u64) -> Self {
        let lo = (draws + successes).saturating_sub(population);
        let hi = draws.min(successes);
        let len = (hi - lo + 1) as usize;
        let (n, m, d) = (population as f64, successes as f64, draws as f64);
        // P(k+1)/P(k)
        let ratio = |k: f64| (m - k) * (d - k) / ((k + 1.0) * (n - m - d + k + 1.0));
        let mode = (((d + 1.0) * (m + 1.0) / (n + 2.0)).floor() as u64).clamp(lo, hi);
        let mut pmf = vec![0.0; len];
        let mi = (mode - lo) as usize;
        pmf[mi] = 1.0;
        for i in mi + 1..len {
            let k = (lo + i as u64 - 1) as f64;
            pmf[i] = pmf[i - 1] * ratio(k);
        }
        for i in (0..mi).rev() {
            let k = (lo + i as u64) as f64;
            pmf[i] = pmf[i + 1] / ratio(k);
        }
        let total: f64 = pmf.iter().sum();
        for p in &mut pmf {
            *p /= total;
        }
        Self { lo, pmf }
    }

    fn index(&self, k: u64) -> usize {
        (k - self.lo) as usize
    }

    pub(crate) fn mass(&self, k: u64) -> f64 {
        self.pmf[self.index(k)]
    }

    /// P(X ≥ k)
    pub(crate) fn upper(&self, k: u64) -> f64 {
        self.pmf[self.index(k)..].iter().sum::<f64>().min(1.0)
    }

    /// P(X ≤ k)
    pub(crate) fn lower(&self, k: u64) -> f64 {
        self.pmf[..=self.index(k)].iter().sum::<f64>().min(1.0)
    }

    fn two_sided(&self, k: u64) -> f64 {
        let cutoff = self.mass(k) * (1.0 + 1e-7);
        self.pmf
            .iter()
            .filter(|&&p| p <= cutoff)
            .sum::<f64>()
            .min(1.0)
    }
}

/// One-sided Fisher exact p-value, observed table included.
///
/// Degenerate margins give 1; use [`fisher_test`] to see the flag.
pub fn fisher_one_sided_p(table: &TwoByTwoTable, alt: Direction) -> f64 {
    let (table, alt) = table.canonical(alt);
    let null = table.null_distribution();
    match alt {
        Direction::AExceedsB => null.upper(table.events_a),
        Direction::BExceedsA => null.lower(table.events_a),
    }
}

/// Randomized (Tocher) exact p-value: strictly-more-extreme mass plus `u` times
/// the observed mass. Exactly uniform under the null when `u` is uniform.
pub fn randomized_fisher_p(table: &TwoByTwoTable, alt: Direction, u: f64) -> f64 {
    let (table, alt) = table.canonical(alt);
    let null = table.null_distribution();
    let k = table.events_a;
    let beyond = match alt {
        Direction::AExceedsB => null.upper(k),
        Direction::BExceedsA => null.lower(k),
    } - null.mass(k);
    (beyond.max(0.0) + u * null.mass(k)).clamp(0.0, 1.0)
}

/// The one-sided p of whichever direction is more significant.
/// Balanced tables report [`Direction::AExceedsB`].
pub fn max_significance_one_sided_p(table: &TwoByTwoTable) -> (f64, Direction) {
    let a = fisher_one_sided_p(table, Direction::AExceedsB);
    let b = fisher_one_sided_p(table, Direction::BExceedsA);
    if b < a {
        (b, Direction::BExceedsA)
    } else {
        (a, Direction::AExceedsB)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    /// Positive when rate(A) > rate(B). Zero for degenerate tables.
    pub z: f64,
    pub p_one_sided: f64,
    pub p_other_side: f64,
    pub p_two_sided: f64,
    pub method: TestMethod,
    pub degenerate: bool,
}

fn pooled_z(table: &TwoByTwoTable) -> Option<f64> {
    let pooled = table.pooled_rate();
    if pooled <= 0.0 || pooled >= 1.0 {
        return None;
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / table.total_a as f64 + 1.0 / table.total_b as f64))
        .sqrt();
    Some((table.rate_a() - table.rate_b()) / se)
}

/// Fisher exact test in the direction `alt`, with the pooled z for reference.
pub fn fisher_test(table: &TwoByTwoTable, alt: Direction) -> TestResult {
    let (canon, canon_alt) = table.canonical(alt);
    let null = canon.null_distribution();
    let k = canon.events_a;
    let (up, down) = (null.upper(k), null.lower(k));
    let (p_one_sided, p_other_side) = match canon_alt {
        Direction::AExceedsB => (up, down),
        Direction::BExceedsA => (down, up),
    };
    TestResult {
        z: pooled_z(table).unwrap_or(0.0),
        p_one_sided,
        p_other_side,
        p_two_sided: null.two_sided(k),
        method: TestMethod::Exact,
        degenerate: table.is_degenerate(),
    }
}

/// Two-proportion z test with pooled standard error and no continuity correction.
pub fn two_prop_z_test(table: &TwoByTwoTable, alt: Direction) -> Result<TestResult> {
    let z = pooled_z(table).ok_or(Error::UndefinedVariance(table.pooled_rate()))?;
    let (p_one_sided, p_other_side) = match alt {
        Direction::AExceedsB => (phi_upper(z), phi(z)),
        Direction::BExceedsA => (phi(z), phi_upper(z)),
    };
    Ok(TestResult {
        z,
        p_one_sided,
        p_other_side,
        p_two_sided: (2.0 * phi_upper(z.abs())).min(1.0),
        method: TestMethod::NormalApprox,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: u64, na: u64, b: u64, nb: u64) -> TwoByTwoTable {
        TwoByTwoTable::new(a, na, b, nb).unwrap()
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        assert!((normal_cdf(-1.0).unwrap() - 0.158_655_253_931_457).abs() < 1e-12);
        assert!((normal_cdf(1.95996).unwrap() - 0.975).abs() < 1e-6);
        assert!(normal_cdf(f64::NAN).is_err());
        assert!(normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn normal_quantile_reference_points() {
        assert!(normal_quantile(0.5).unwrap().abs() < 1e-15);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.618).unwrap() - 0.300_232_259_380_722).abs() < 1e-12);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        let p = 1e-12;
        assert!((phi(normal_quantile(p).unwrap()) - p).abs() < 1e-20);
    }

    #[test]
    fn hypergeom_examples() {
        let p = hypergeom_pmf(6, 20, 6, 10).unwrap();
        assert!((p - 1001.0 / 184_756.0).abs() < 1e-14);
        assert_eq!(hypergeom_pmf(0, 10, 0, 5).unwrap(), 1.0);
        let s: f64 = (0..=6).map(|k| hypergeom_pmf(k, 20, 6, 10).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert!(hypergeom_pmf(1, 5, 6, 2).is_err());
        assert!(hypergeom_pmf(1, 5, 2, 6).is_err());
        assert_eq!(hypergeom_pmf(7, 20, 6, 10).unwrap(), 0.0);
    }

    #[test]
    fn fisher_examples() {
        let table = t(5, 10, 1, 10);
        let up = fisher_one_sided_p(&table, Direction::AExceedsB);
        assert!((up - 13_013.0 / 184_756.0).abs() < 1e-14);
        let down = fisher_one_sided_p(&table, Direction::BExceedsA);
        assert!((down - (1.0 - 1001.0 / 184_756.0)).abs() < 1e-14);

        let balanced = t(10, 20, 10, 20);
        let r = fisher_test(&balanced, Direction::AExceedsB);
        assert!(r.p_one_sided > 0.5);
        assert!((r.p_two_sided - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_margins_flagged() {
        for table in [t(0, 5, 0, 7), t(5, 5, 7, 7)] {
            let r = fisher_test(&table, Direction::AExceedsB);
            assert!(r.degenerate);
            assert_eq!(r.p_one_sided, 1.0);
            assert_eq!(fisher_one_sided_p(&table, Direction::BExceedsA), 1.0);
        }
    }

    #[test]
    fn max_significance_examples() {
        let (p, d) = max_significance_one_sided_p(&t(5, 10, 1, 10));
        assert!((p - 13_013.0 / 184_756.0).abs() < 1e-14);
        assert_eq!(d, Direction::AExceedsB);
        let (p2, d2) = max_significance_one_sided_p(&t(1, 10, 5, 10));
        assert_eq!(p, p2);
        assert_eq!(d2, Direction::BExceedsA);
        let (_, tie) = max_significance_one_sided_p(&t(4, 9, 4, 9));
        assert_eq!(tie, Direction::AExceedsB);
    }

    #[test]
    fn z_test_examples() {
        let r = two_prop_z_test(&t(30, 92, 25, 92), Direction::AExceedsB).unwrap();
        assert!((r.z - 0.8052).abs() < 5e-4);
        assert!((r.p_one_sided - 0.2104).abs() < 5e-4);
        let s = two_prop_z_test(&t(25, 92, 30, 92), Direction::BExceedsA).unwrap();
        assert!((s.z + r.z).abs() < 1e-15);
        assert!((s.p_one_sided - r.p_one_sided).abs() < 1e-15);
        let e = two_prop_z_test(&t(7, 20, 7, 20), Direction::BExceedsA).unwrap();
        assert_eq!(e.z, 0.0);
        assert_eq!(e.p_one_sided, 0.5);
        assert!(matches!(
            two_prop_z_test(&t(0, 4, 0, 9), Direction::AExceedsB),
            Err(Error::UndefinedVariance(_))
        ));
    }

    #[test]
    fn table_validation() {
        assert!(TwoByTwoTable::new(1, 0, 0, 3).is_err());
        assert!(TwoByTwoTable::new(4, 3, 0, 3).is_err());
    }

    #[test]
    fn randomized_p_spans_the_atom() {
        let table = t(5, 10, 1, 10);
        let lo = randomized_fisher_p(&table, Direction::AExceedsB, 0.0);
        let hi = randomized_fisher_p(&table, Direction::AExceedsB, 1.0);
        assert!((hi - fisher_one_sided_p(&table, Direction::AExceedsB)).abs() < 1e-15);
        let mass = hypergeom_pmf(5, 20, 6, 10).unwrap();
        assert!((hi - lo - mass).abs() < 1e-14);
    }
}
