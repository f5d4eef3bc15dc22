//! Edge-probability models constrained to a vanishing band around C/n:
//! every edge probability satisfies (C - alpha_n)/n <= p(e) <= (C + alpha_n)/n
//! with alpha_n >= 0 tending to zero. Models are immutable and cheap to
//! query, so samplers can resolve millions of candidate edges per second.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exhaustive band scans are feasible up to this many vertices; larger
/// models are spot-checked on a fixed-size random sample of pairs.
pub const EXHAUSTIVE_SCAN_LIMIT: u64 = 10_000;
const SAMPLED_SCAN_PAIRS: u64 = 1_000_000;
const VALIDATE_SEED: u64 = 0x56414C; // deterministic scan sample

// ---------------------------------------------------------------------------
// Colexicographic edge indexing
// ---------------------------------------------------------------------------

/// 0-based colexicographic index of the edge {i, j} with 1 <= i < j:
/// (1,2) -> 0, (1,3) -> 1, (2,3) -> 2, (1,4) -> 3, ...
pub fn colex_index(i: u64, j: u64) -> u64 {
    debug_assert!(1 <= i && i < j);
    let (i0, j0) = (i - 1, j - 1);
    j0 * (j0 - 1) / 2 + i0
}

/// Inverse of `colex_index`: the edge (i, j), 1 <= i < j, at 0-based
/// position `k`. Exact for every k below 2^52 (far beyond any feasible n).
pub fn colex_edge(k: u64) -> (u64, u64) {
    // j0 is the unique integer with j0(j0-1)/2 <= k < j0(j0+1)/2.
    let mut j0 = ((1.0 + ((8.0 * k as f64) + 1.0).sqrt()) / 2.0) as u64;
    while j0 * (j0 - 1) / 2 > k {
        j0 -= 1;
    }
    while (j0 + 1) * j0 / 2 <= k {
        j0 += 1;
    }
    let i0 = k - j0 * (j0 - 1) / 2;
    (i0 + 1, j0 + 1)
}

/// Number of unordered vertex pairs on n vertices.
pub fn pair_count(n: u64) -> u64 {
    n * (n - 1) / 2
}

// ---------------------------------------------------------------------------
// The vanishing band sequence
// ---------------------------------------------------------------------------

/// The band half-width sequence alpha_n: nonnegative and tending to zero.
#[derive(Clone)]
pub enum AlphaSequence {
    /// alpha_n = 0: the homogeneous band.
    Zero,
    /// alpha_n = coefficient / sqrt(n).
    InverseSqrt { coefficient: f64 },
    /// Arbitrary user sequence; must be nonnegative and vanishing.
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl AlphaSequence {
    pub fn value(&self, n: u64) -> f64 {
        match self {
            AlphaSequence::Zero => 0.0,
            AlphaSequence::InverseSqrt { coefficient } => coefficient / (n as f64).sqrt(),
            AlphaSequence::Custom(f) => f(n),
        }
    }

    /// Smoke test of the defining limit on a logarithmic grid up to 1e9:
    /// values must be finite, nonnegative, nonincreasing along the grid
    /// (within slack), and the last grid value must sit clearly below the
    /// first (unless the sequence is identically ~0).
    pub fn vanishes(&self) -> bool {
        let grid = [10u64, 100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000, 1_000_000_000];
        let values: Vec<f64> = grid.iter().map(|&n| self.value(n)).collect();
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return false;
        }
        let first = values[0];
        let last = *values.last().unwrap();
        if first <= 1e-12 {
            return last <= 1e-12;
        }
        let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        monotone && last <= 0.9 * first + 1e-12
    }
}

impl fmt::Debug for AlphaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSequence::Zero => write!(f, "Zero"),
            AlphaSequence::InverseSqrt { coefficient } => {
                write!(f, "InverseSqrt {{ coefficient: {coefficient} }}")
            }
            AlphaSequence::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

// ---------------------------------------------------------------------------
// Two-class plumbing
// ---------------------------------------------------------------------------

/// How many edges belong to the full-probability class of a two-class model.
#[derive(Clone)]
pub enum CountRule {
    /// floor(n^2 / 8), clamped to the number of pairs.
    NSquaredOver8,
    /// A fixed count, clamped to the number of pairs.
    Fixed(u64),
    /// Arbitrary deterministic rule, clamped to the number of pairs.
    Custom(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
}

impl CountRule {
    pub fn count(&self, n: u64) -> u64 {
        let raw = match self {
            CountRule::NSquaredOver8 => n * n / 8,
            CountRule::Fixed(k) => *k,
            CountRule::Custom(f) => f(n),
        };
        raw.min(pair_count(n))
    }
}

impl fmt::Debug for CountRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountRule::NSquaredOver8 => write!(f, "NSquaredOver8"),
            CountRule::Fixed(k) => write!(f, "Fixed({k})"),
            CountRule::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

/// Which edges form the full-probability class.
#[derive(Clone)]
pub enum EdgeSelector {
    /// The first `count(n)` edges in colexicographic order. The fixed order
    /// makes runs reproducible; any deterministic choice is admissible.
    ColexPrefix,
    /// Membership by 0-based colex index: f(n, index) -> in full class.
    /// When this variant is used it alone decides membership and the count
    /// rule is ignored.
    Custom(Arc<dyn Fn(u64, u64) -> bool + Send + Sync>),
}

impl fmt::Debug for EdgeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeSelector::ColexPrefix => write!(f, "ColexPrefix"),
            EdgeSelector::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

// ---------------------------------------------------------------------------
// The model
// ---------------------------------------------------------------------------

/// An edge-probability assignment inside the band [(C-alpha_n)/n, (C+alpha_n)/n].
#[derive(Clone)]
pub enum EdgeProbModel {
    /// Every edge has probability exactly C/n.
    Homogeneous { c: f64 },
    /// A selected set of edges keeps the full probability C/n; every other
    /// edge is reduced to (C - alpha_n)/n. The selected full-probability
    /// edges are precisely the ones that can differ between a graph and its
    /// lower coupling companion.
    TwoClass {
        c: f64,
        alpha: AlphaSequence,
        full_count: CountRule,
        full_selector: EdgeSelector,
    },
    /// Arbitrary per-edge probabilities; the band is asserted by `validate`,
    /// not assumed. The function receives (n, i, j) with 1 <= i < j <= n.
    Custom {
        c: f64,
        alpha: AlphaSequence,
        prob_fn: Arc<dyn Fn(u64, u64, u64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for EdgeProbModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeProbModel::Homogeneous { c } => write!(f, "Homogeneous {{ c: {c} }}"),
            EdgeProbModel::TwoClass {
                c,
                alpha,
                full_count,
                full_selector,
            } => write!(
                f,
                "TwoClass {{ c: {c}, alpha: {alpha:?}, full_count: {full_count:?}, full_selector: {full_selector:?} }}"
            ),
            EdgeProbModel::Custom { c, alpha, .. } => {
                write!(f, "Custom {{ c: {c}, alpha: {alpha:?}, prob_fn: <fn> }}")
            }
        }
    }
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParam {
            name: "C",
            value: c,
            requirement: "finite and > 0",
        })
    }
}

fn check_n(n: u64) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::BadParam {
            name: "n",
            value: n as f64,
            requirement: ">= 2",
        })
    }
}

fn check_alpha(alpha: &AlphaSequence) -> Result<()> {
    if let AlphaSequence::InverseSqrt { coefficient } = alpha {
        if !(coefficient.is_finite() && *coefficient >= 0.0) {
            return Err(Error::BadParam {
                name: "alpha coefficient",
                value: *coefficient,
                requirement: "finite and >= 0",
            });
        }
    }
    Ok(())
}

impl EdgeProbModel {
    pub fn homogeneous(c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(EdgeProbModel::Homogeneous { c })
    }

    /// Two-class model with the default full-edge rule: the first
    /// floor(n^2/8) edges in colex order keep probability C/n.
    pub fn two_class(c: f64, alpha: AlphaSequence) -> Result<Self> {
        Self::two_class_with(c, alpha, CountRule::NSquaredOver8, EdgeSelector::ColexPrefix)
    }

    pub fn two_class_with(
        c: f64,
        alpha: AlphaSequence,
        full_count: CountRule,
        full_selector: EdgeSelector,
    ) -> Result<Self> {
        check_c(c)?;
        check_alpha(&alpha)?;
        Ok(EdgeProbModel::TwoClass {
            c,
            alpha,
            full_count,
            full_selector,
        })
    }

    pub fn custom(
        c: f64,
        alpha: AlphaSequence,
        prob_fn: Arc<dyn Fn(u64, u64, u64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        check_c(c)?;
        check_alpha(&alpha)?;
        Ok(EdgeProbModel::Custom { c, alpha, prob_fn })
    }

    pub fn c(&self) -> f64 {
        match self {
            EdgeProbModel::Homogeneous { c }
            | EdgeProbModel::TwoClass { c, .. }
            | EdgeProbModel::Custom { c, .. } => *c,
        }
    }

    pub fn alpha_n(&self, n: u64) -> f64 {
        match self {
            EdgeProbModel::Homogeneous { .. } => 0.0,
            EdgeProbModel::TwoClass { alpha, .. } | EdgeProbModel::Custom { alpha, .. } => {
                alpha.value(n)
            }
        }
    }

    /// True when the 0-based colex index `k` belongs to the full-probability
    /// class of a two-class model.
    pub(crate) fn two_class_is_full(&self, n: u64, k: u64) -> bool {
        match self {
            EdgeProbModel::TwoClass {
                full_count,
                full_selector,
                ..
            } => match full_selector {
                EdgeSelector::ColexPrefix => k < full_count.count(n),
                EdgeSelector::Custom(f) => f(n, k),
            },
            _ => false,
        }
    }

    /// The probability of the edge {i, j} in the n-vertex model. Accepts the
    /// pair in either order; rejects loops and out-of-range endpoints, and
    /// rejects assignments that are not probabilities (above 1, or below 0
    /// for a two-class model whose alpha_n exceeds C at this n).
    pub fn edge_prob(&self, n: u64, i: u64, j: u64) -> Result<f64> {
        check_n(n)?;
        if i == j {
            return Err(Error::BadEdge { n, i, j });
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if lo < 1 || hi > n {
            return Err(Error::BadEdge { n, i, j });
        }
        let nf = n as f64;
        let p = match self {
            EdgeProbModel::Homogeneous { c } => c / nf,
            EdgeProbModel::TwoClass { c, alpha, .. } => {
                if self.two_class_is_full(n, colex_index(lo, hi)) {
                    c / nf
                } else {
                    (c - alpha.value(n)) / nf
                }
            }
            EdgeProbModel::Custom { prob_fn, .. } => prob_fn(n, lo, hi),
        };
        if p > 1.0 {
            return Err(Error::InfeasibleBand { n, p_u: p });
        }
        if p < 0.0 {
            return Err(Error::BadParam {
                name: "p(e)",
                value: p,
                requirement: ">= 0 (alpha_n exceeds C at this n?)",
            });
        }
        Ok(p)
    }

    /// The band endpoints ((C - alpha_n)/n, (C + alpha_n)/n). The lower
    /// endpoint may be negative when alpha_n > C; it is a bound, not an
    /// assigned probability. An upper endpoint above 1 means the model is
    /// infeasible at this n.
    pub fn band(&self, n: u64) -> Result<(f64, f64)> {
        check_n(n)?;
        let c = self.c();
        let a = self.alpha_n(n);
        let nf = n as f64;
        let (p_d, p_u) = ((c - a) / nf, (c + a) / nf);
        if p_u > 1.0 {
            return Err(Error::InfeasibleBand { n, p_u });
        }
        Ok((p_d, p_u))
    }

    /// Scan the model for band violations: exhaustively for n up to
    /// `EXHAUSTIVE_SCAN_LIMIT`, otherwise on a fixed-seed random sample of
    /// pairs plus the extreme pairs. Also smoke-tests that the alpha
    /// sequence vanishes.
    pub fn validate(&self, n: u64) -> Result<ValidationReport> {
        let (p_d, p_u) = self.band(n)?;
        let slack = 1e-12 * p_u.abs().max(1e-300);
        let mut report = ValidationReport {
            n,
            p_d,
            p_u,
            pairs_checked: 0,
            exhaustive: n <= EXHAUSTIVE_SCAN_LIMIT,
            violation_count: 0,
            violations: Vec::new(),
            alpha_vanishes: match self {
                EdgeProbModel::Homogeneous { .. } => true,
                EdgeProbModel::TwoClass { alpha, .. } | EdgeProbModel::Custom { alpha, .. } => {
                    alpha.vanishes()
                }
            },
        };
        let check_pair = |i: u64, j: u64, report: &mut ValidationReport| {
            report.pairs_checked += 1;
            let p = match self.edge_prob(n, i, j) {
                Ok(p) => p,
                Err(_) => f64::NAN, // rejected assignment: always a violation
            };
            let in_band = p >= p_d - slack && p <= p_u + slack && (0.0..=1.0).contains(&p);
            if !in_band {
                report.violation_count += 1;
                if report.violations.len() < ValidationReport::MAX_LISTED {
                    report.violations.push(BandViolation { i, j, p });
                }
            }
        };
        if report.exhaustive {
            for j in 2..=n {
                for i in 1..j {
                    check_pair(i, j, &mut report);
                }
            }
        } else {
            let total = pair_count(n);
            let mut rng = ChaCha8Rng::seed_from_u64(VALIDATE_SEED);
            for _ in 0..SAMPLED_SCAN_PAIRS {
                let (i, j) = colex_edge(rng.random_range(0..total));
                check_pair(i, j, &mut report);
            }
            for (i, j) in [(1, 2), (1, n), (n - 1, n)] {
                check_pair(i, j, &mut report);
            }
        }
        Ok(report)
    }
}

/// One out-of-band edge found by `validate`. `p` is NaN when the model
/// rejected the assignment outright.
#[derive(Debug, Clone, Serialize)]
pub struct BandViolation {
    pub i: u64,
    pub j: u64,
    pub p: f64,
}

/// Outcome of a band scan. The model is valid at n exactly when no scanned
/// pair violated the band; `alpha_vanishes` is advisory (a model definition
/// problem, not an n-specific one).
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: u64,
    pub p_d: f64,
    pub p_u: f64,
    pub pairs_checked: u64,
    pub exhaustive: bool,
    pub violation_count: u64,
    /// At most `MAX_LISTED` concrete examples.
    pub violations: Vec<BandViolation>,
    pub alpha_vanishes: bool,
}

impl ValidationReport {
    pub const MAX_LISTED: usize = 100;

    pub fn is_valid(&self) -> bool {
        self.violation_count == 0
    }
}

// ---------------------------------------------------------------------------
// JSON descriptors
// ---------------------------------------------------------------------------

/// Serializable description of an alpha sequence.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaDescriptor {
    Zero,
    InverseSqrt { coef: f64 },
}

impl AlphaDescriptor {
    pub fn to_sequence(self) -> AlphaSequence {
        match self {
            AlphaDescriptor::Zero => AlphaSequence::Zero,
            AlphaDescriptor::InverseSqrt { coef } => AlphaSequence::InverseSqrt { coefficient: coef },
        }
    }
}

/// Serializable description of a model, used by configs and the CLI.
///
/// `custom_table` carries an explicit per-edge probability vector in colex
/// order for a specific (small) n. When `C`/`alpha` are omitted they are
/// derived so the band hugs the table exactly at its own n:
/// C = n(max+min)/2 and alpha_n = n(max-min)/2 (as an inverse-sqrt sequence
/// anchored at n, so it still vanishes).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelDescriptor {
    Homogeneous {
        #[serde(rename = "C")]
        c: f64,
    },
    TwoClass {
        #[serde(rename = "C")]
        c: f64,
        alpha: AlphaDescriptor,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        full_count: Option<u64>,
    },
    CustomTable {
        n: u64,
        probs: Vec<f64>,
        #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<AlphaDescriptor>,
    },
}

impl ModelDescriptor {
    pub fn to_model(&self) -> Result<EdgeProbModel> {
        match self {
            ModelDescriptor::Homogeneous { c } => EdgeProbModel::homogeneous(*c),
            ModelDescriptor::TwoClass { c, alpha, full_count } => {
                let rule = match full_count {
                    None => CountRule::NSquaredOver8,
                    Some(k) => CountRule::Fixed(*k),
                };
                EdgeProbModel::two_class_with(
                    *c,
                    alpha.to_sequence(),
                    rule,
                    EdgeSelector::ColexPrefix,
                )
            }
            ModelDescriptor::CustomTable { n, probs, c, alpha } => {
                let n = *n;
                check_n(n)?;
                let expected = pair_count(n) as usize;
                if probs.len() != expected {
                    return Err(Error::BadDescriptor {
                        msg: format!(
                            "custom_table for n = {n} needs {expected} probabilities, got {}",
                            probs.len()
                        ),
                    });
                }
                if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::BadDescriptor {
                        msg: format!("custom_table probability {bad} outside [0, 1]"),
                    });
                }
                let (mut min_p, mut max_p) = (f64::INFINITY, f64::NEG_INFINITY);
                for &p in probs {
                    min_p = min_p.min(p);
                    max_p = max_p.max(p);
                }
                let nf = n as f64;
                let c = c.unwrap_or(nf * (max_p + min_p) / 2.0);
                if c <= 0.0 {
                    return Err(Error::BadDescriptor {
                        msg: "custom_table derives C <= 0 (all-zero table needs explicit C)"
                            .to_string(),
                    });
                }
                let alpha = match alpha {
                    Some(a) => a.to_sequence(),
                    None => AlphaSequence::InverseSqrt {
                        coefficient: nf * (max_p - min_p) / 2.0 * nf.sqrt(),
                    },
                };
                let table: Arc<[f64]> = Arc::from(probs.as_slice());
                let table_n = n;
                EdgeProbModel::custom(
                    c,
                    alpha,
                    Arc::new(move |nn, i, j| {
                        assert_eq!(
                            nn, table_n,
                            "probability table built for n = {table_n} queried at n = {nn}"
                        );
                        table[colex_index(i, j) as usize]
                    }),
                )
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_abs(got: f64, expected: f64, tol: f64) {
        assert!(
            (got - expected).abs() <= tol,
            "got {got:.17e}, expected {expected:.17e}"
        );
    }

    #[test]
    fn colex_indexing_round_trips() {
        assert_eq!(colex_edge(0), (1, 2));
        assert_eq!(colex_edge(1), (1, 3));
        assert_eq!(colex_edge(2), (2, 3));
        assert_eq!(colex_edge(3), (1, 4));
        for k in 0..10_000u64 {
            let (i, j) = colex_edge(k);
            assert!(1 <= i && i < j);
            assert_eq!(colex_index(i, j), k);
        }
        // Large-index exactness near the n = 1e5 pair count.
        let big = pair_count(100_000) - 1;
        for k in [big, big - 1, big / 2, 1 << 40] {
            let (i, j) = colex_edge(k);
            assert_eq!(colex_index(i, j), k);
        }
    }

    #[test]
    fn homogeneous_probabilities_and_symmetry() {
        let m = EdgeProbModel::homogeneous(2.0).unwrap();
        assert_eq!(m.edge_prob(100, 1, 2).unwrap(), 0.02);
        assert_eq!(
            m.edge_prob(100, 7, 3).unwrap(),
            m.edge_prob(100, 3, 7).unwrap()
        );
        assert!(m.edge_prob(100, 5, 5).is_err());
        assert!(m.edge_prob(100, 0, 3).is_err());
        assert!(m.edge_prob(100, 3, 101).is_err());
        assert!(m.edge_prob(1, 1, 2).is_err());
        assert_eq!(m.band(100).unwrap(), (0.02, 0.02));
        // Probability 1 is feasible, above 1 is not.
        assert_eq!(m.edge_prob(2, 1, 2).unwrap(), 1.0);
        assert!(EdgeProbModel::homogeneous(3.0).unwrap().band(2).is_err());
    }

    #[test]
    fn two_class_reference_probabilities_at_n_1024() {
        let m = EdgeProbModel::two_class(
            2.0,
            AlphaSequence::InverseSqrt { coefficient: 16.0 },
        )
        .unwrap();
        // alpha = 16/32 = 0.5. Full class: first floor(1024^2/8) = 131072
        // colex edges; (1,2) is index 0.
        assert_eq!(m.edge_prob(1024, 1, 2).unwrap(), 0.001953125);
        // An edge past the class boundary is reduced.
        let (i, j) = colex_edge(131_072);
        assert_eq!(m.edge_prob(1024, i, j).unwrap(), 0.00146484375);
        let (bi, bj) = colex_edge(131_071);
        assert_eq!(m.edge_prob(1024, bi, bj).unwrap(), 0.001953125);
        assert_eq!(m.band(1024).unwrap(), (0.00146484375, 0.00244140625));
    }

    #[test]
    fn two_class_full_edge_count_is_exact() {
        for n in [5u64, 16, 64] {
            let m = EdgeProbModel::two_class(
                2.0,
                AlphaSequence::InverseSqrt { coefficient: 1.0 },
            )
            .unwrap();
            let full_p = 2.0 / n as f64;
            let mut full = 0u64;
            for j in 2..=n {
                for i in 1..j {
                    if m.edge_prob(n, i, j).unwrap() == full_p {
                        full += 1;
                    }
                }
            }
            assert_eq!(full, (n * n / 8).min(pair_count(n)), "n = {n}");
        }
    }

    #[test]
    fn two_class_rejects_negative_reduced_probability() {
        // alpha_n = 16/sqrt(63) > 2 = C: the reduced class would get a
        // negative probability.
        let m = EdgeProbModel::two_class(
            2.0,
            AlphaSequence::InverseSqrt { coefficient: 16.0 },
        )
        .unwrap();
        let k_reduced = 63 * 63 / 8 + 1;
        let (i, j) = colex_edge(k_reduced);
        assert!(m.edge_prob(63, i, j).is_err());
        // The full class is still fine.
        assert!(m.edge_prob(63, 1, 2).is_ok());
    }

    #[test]
    fn custom_selector_overrides_the_prefix_rule() {
        let m = EdgeProbModel::two_class_with(
            2.0,
            AlphaSequence::InverseSqrt { coefficient: 16.0 },
            CountRule::NSquaredOver8,
            EdgeSelector::Custom(Arc::new(|_, k| k % 2 == 0)),
        )
        .unwrap();
        assert_eq!(m.edge_prob(1024, 1, 2).unwrap(), 0.001953125); // k = 0
        assert_eq!(m.edge_prob(1024, 1, 3).unwrap(), 0.00146484375); // k = 1
    }

    #[test]
    fn custom_model_band_reference() {
        let m = EdgeProbModel::custom(
            1.0,
            AlphaSequence::Custom(Arc::new(|n| 1.0 / n as f64)),
            Arc::new(|n, _i, j| if j % 2 == 0 { 1.05 / n as f64 } else { 0.95 / n as f64 }),
        )
        .unwrap();
        let (p_d, p_u) = m.band(10).unwrap();
        assert_abs(p_d, 0.09, 1e-15);
        assert_abs(p_u, 0.11, 1e-15);
        assert!(m.validate(10).unwrap().is_valid());
    }

    #[test]
    fn validate_flags_constructed_violations() {
        let ok = EdgeProbModel::homogeneous(2.0).unwrap().validate(100).unwrap();
        assert!(ok.is_valid() && ok.exhaustive);
        assert_eq!(ok.pairs_checked, 4950);
        assert!(ok.alpha_vanishes);

        let bad = EdgeProbModel::custom(
            2.0,
            AlphaSequence::Zero,
            Arc::new(|_, _, _| 0.5),
        )
        .unwrap();
        let report = bad.validate(100).unwrap();
        assert!(!report.is_valid());
        assert_eq!(report.violation_count, 4950);
        assert_eq!(report.violations.len(), ValidationReport::MAX_LISTED);

        let two = EdgeProbModel::two_class(
            2.0,
            AlphaSequence::InverseSqrt { coefficient: 16.0 },
        )
        .unwrap();
        assert!(two.validate(1024).unwrap().is_valid());
    }

    #[test]
    fn validate_samples_large_models() {
        let m = EdgeProbModel::homogeneous(2.0).unwrap();
        let report = m.validate(50_000).unwrap();
        assert!(!report.exhaustive);
        assert!(report.pairs_checked >= 1_000_000);
        assert!(report.is_valid());
    }

    #[test]
    fn alpha_vanishing_smoke_test() {
        assert!(AlphaSequence::Zero.vanishes());
        assert!(AlphaSequence::InverseSqrt { coefficient: 16.0 }.vanishes());
        assert!(AlphaSequence::Custom(Arc::new(|n| 1.0 / (n as f64).ln())).vanishes());
        assert!(!AlphaSequence::Custom(Arc::new(|_| 0.5)).vanishes());
        assert!(!AlphaSequence::Custom(Arc::new(|n| -1.0 / n as f64)).vanishes());
    }

    #[test]
    fn descriptor_round_trips_and_table_derivation() {
        let h: ModelDescriptor = serde_json::from_str(r#"{"kind":"homogeneous","C":2.0}"#).unwrap();
        assert_eq!(h.to_model().unwrap().c(), 2.0);
        let json = serde_json::to_string(&h).unwrap();
        assert!(json.contains(r#""kind":"homogeneous""#) && json.contains(r#""C":2.0"#));

        let t: ModelDescriptor = serde_json::from_str(
            r#"{"kind":"two_class","C":2.0,"alpha":{"kind":"inverse_sqrt","coef":16.0}}"#,
        )
        .unwrap();
        let tm = t.to_model().unwrap();
        assert_eq!(tm.band(1024).unwrap(), (0.00146484375, 0.00244140625));
        let back: ModelDescriptor = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);

        // Table: probs [0.2, 0.5, 0.8] at n = 3 derive C = 1.5, band (0.2, 0.8).
        let ct: ModelDescriptor = serde_json::from_str(
            r#"{"kind":"custom_table","n":3,"probs":[0.2,0.5,0.8]}"#,
        )
        .unwrap();
        let cm = ct.to_model().unwrap();
        assert_abs(cm.c(), 1.5, 1e-12);
        let (p_d, p_u) = cm.band(3).unwrap();
        assert_abs(p_d, 0.2, 1e-12);
        assert_abs(p_u, 0.8, 1e-12);
        assert_eq!(cm.edge_prob(3, 1, 2).unwrap(), 0.2);
        assert_eq!(cm.edge_prob(3, 2, 3).unwrap(), 0.8);
        assert!(cm.validate(3).unwrap().is_valid());

        let short: ModelDescriptor =
            serde_json::from_str(r#"{"kind":"custom_table","n":4,"probs":[0.1]}"#).unwrap();
        assert!(short.to_model().is_err());
        let out_of_range: ModelDescriptor =
            serde_json::from_str(r#"{"kind":"custom_table","n":2,"probs":[1.5]}"#).unwrap();
        assert!(out_of_range.to_model().is_err());
    }
}
