//! Analytic side of the model: the exponential rate `delta`, its perturbed
//! variants, tree-weighted series for the small-component mass `q(C)`, the
//! fixed-point characterization of `q`, certified series remainders, and the
//! explicit non-asymptotic bounds on component sizes, small-component totals,
//! and breadth-first layer moments.
//!
//! Everything here is a pure function of real parameters. Series terms are
//! combined in log-space (log-sum-exp with running maximum) so that term
//! counts up to 10^6 and arguments up to C = 8 stay inside f64 range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// sqrt(2*pi) to full f64 precision.
pub const SQRT_2PI: f64 = 2.5066282746310005;

/// Hard cap on series length. At C = 1 the terms decay like r^(-3/2), so a
/// tolerance below ~8e-4 is unreachable; the cap keeps such calls finite and
/// the `converged` flag reports the truncation honestly.
pub const MAX_SERIES_TERMS: u64 = 1_000_000;

/// Iteration cap for the fixed-point solver; generous enough for any C
/// bounded away from 1 by ~1e-7.
const FIXED_POINT_MAX_ITERS: u64 = 50_000_000;

// ---------------------------------------------------------------------------
// Elementary helpers
// ---------------------------------------------------------------------------

/// Natural log of the gamma function for x > 0 (Lanczos, g = 5, 6 terms).
/// Absolute error is below 2e-10 over the range used here.
pub(crate) fn log_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "log_gamma needs a positive argument");
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut series = 1.000000000190015;
    let mut denom = x;
    for c in COEF {
        denom += 1.0;
        series += c / denom;
    }
    -tmp + (SQRT_2PI * series / x).ln()
}

/// ln(k!) — exact integer factorial below 2^53, Lanczos above.
fn ln_factorial(k: u64) -> f64 {
    if k <= 18 {
        let fact: u64 = (1..=k).product::<u64>().max(1);
        (fact as f64).ln()
    } else {
        log_gamma((k + 1) as f64)
    }
}

/// ln(T_r) where T_r = r^(r-2) is the number of labelled trees on r
/// vertices, with T_1 = 1.
fn ln_tree_count(r: u64) -> f64 {
    if r == 1 {
        0.0
    } else {
        let rf = r as f64;
        (rf - 2.0) * rf.ln()
    }
}

/// ln(e^a + e^b) without overflow: max + ln(1 + e^(min - max)).
fn logaddexp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParam {
            name,
            value,
            requirement: "finite and > 0",
        })
    }
}

fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParam {
            name,
            value,
            requirement: "in the open interval (0, 1)",
        })
    }
}

// ---------------------------------------------------------------------------
// Parameter bundle
// ---------------------------------------------------------------------------

/// The five scalar knobs every bound below depends on: the branching mean
/// `C`, the band half-widths `epsilon` (relative edge-probability slack) and
/// `omega` (additive rate slack), the giant-total tolerance `gamma`, and the
/// small-component cutoff multiplier `M` (components of size <= M ln n count
/// as small).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub c: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub gamma: f64,
    pub m: f64,
}

impl TheoryParams {
    pub fn new(c: f64, epsilon: f64, omega: f64, gamma: f64, m: f64) -> Result<Self> {
        check_positive("C", c)?;
        check_open_unit("epsilon", epsilon)?;
        check_positive("omega", omega)?;
        check_open_unit("gamma", gamma)?;
        check_positive("M", m)?;
        Ok(Self {
            c,
            epsilon,
            omega,
            gamma,
            m,
        })
    }
}

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

/// The exponential decay rate delta(C) = C - 1 - ln C. Zero exactly at
/// C = 1 and strictly positive everywhere else on (0, inf).
pub fn delta(c: f64) -> Result<f64> {
    check_positive("C", c)?;
    Ok(c - 1.0 - c.ln())
}

/// Perturbed rates selected by `which`:
/// 0 -> delta - C*epsilon - omega,
/// 1 -> delta - 2*C*epsilon - omega,
/// 2 -> delta - ln(1 - epsilon) + omega.
/// The first two may be nonpositive; callers that need positivity check it.
/// The third is strictly positive for every valid parameter bundle.
pub fn delta_i(params: &TheoryParams, which: u8) -> Result<f64> {
    let d = delta(params.c)?;
    match which {
        0 => Ok(d - params.c * params.epsilon - params.omega),
        1 => Ok(d - 2.0 * params.c * params.epsilon - params.omega),
        2 => Ok(d - (1.0 - params.epsilon).ln() + params.omega),
        _ => Err(Error::BadParam {
            name: "which",
            value: which as f64,
            requirement: "one of 0, 1, 2",
        }),
    }
}

// ---------------------------------------------------------------------------
// The tree series q(C) and its certified remainder
// ---------------------------------------------------------------------------

/// Natural log of the r-th series term T_r C^(r-1) e^(-C r) / (r-1)!.
/// For r = 1 this is exactly -C.
pub fn log_tree_term(r: u64, c: f64) -> Result<f64> {
    if r < 1 {
        return Err(Error::BadParam {
            name: "r",
            value: r as f64,
            requirement: ">= 1",
        });
    }
    check_positive("C", c)?;
    if r == 1 {
        return Ok(-c);
    }
    let rf = r as f64;
    Ok(ln_tree_count(r) + (rf - 1.0) * c.ln() - c * rf - ln_factorial(r - 1))
}

/// Outcome of a truncated series evaluation. `tail_bound` is a certified
/// upper bound on the mass of all discarded terms, so the true sum lies in
/// [value, value + tail_bound]. `converged` records whether the requested
/// tolerance was reached before the term cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Tail of sum_{r > n} r^(-3/2) e^(-rate*r) / (c*sqrt(2*pi)), bounded two
/// ways and taking the smaller: freeze the exponential at its largest value
/// and integrate the power law (integral arm), or freeze the power law and
/// sum the geometric series (geometric arm, rate > 0 only).
fn envelope_tail(n: u64, c: f64, rate: f64) -> f64 {
    let n1 = (n + 1) as f64;
    let decay = (-rate * n1).exp();
    let integral_arm = decay * 2.0 / (n as f64).sqrt();
    let arm = if rate > 0.0 {
        let geometric_arm = n1.powf(-1.5) * decay / (-(-rate).exp_m1());
        integral_arm.min(geometric_arm)
    } else {
        integral_arm
    };
    arm / (c * SQRT_2PI)
}

/// Certified upper bound on the series tail sum_{r > N} T_r C^(r-1)
/// e^(-C r)/(r-1)!.
///
/// Two facts make the bound rigorous. First, the Stirling lower bound
/// (r-1)! >= sqrt(2*pi) r^(r-1/2) e^(-r) turns each term into at most
/// (1/(C sqrt(2*pi))) r^(-3/2) e^(-delta(C) r), whose tail `envelope_tail`
/// bounds. Second, the ratio of the C-term to the 1-term, e^(-delta(C) r)/C,
/// is decreasing in r, so the C-series tail crosses the C = 1 tail at most
/// once from above and is dominated by it for every N: R_N(C) <= R_N(1).
/// Taking the minimum of the two certified envelopes preserves certification
/// and restores that dominance, which the raw envelope alone loses for C
/// slightly below 1 at small N.
pub fn remainder(n_terms: u64, c: f64) -> Result<f64> {
    if n_terms < 1 {
        return Err(Error::BadParam {
            name: "N",
            value: n_terms as f64,
            requirement: ">= 1",
        });
    }
    let rate = delta(c)?;
    let own = envelope_tail(n_terms, c, rate);
    let at_unit = envelope_tail(n_terms, 1.0, 0.0);
    Ok(own.min(at_unit).max(f64::MIN_POSITIVE))
}

/// Partial sum of q(C) = sum_{r >= 1} T_r C^(r-1) e^(-C r)/(r-1)!, extended
/// until the certified tail drops below `tol` or the term cap is reached.
/// Terms follow the exact log-ratio recurrence
/// ln t_{r+1} - ln t_r = (r-1) ln(1 + 1/r) + ln C - C,
/// which avoids per-term log-gamma error; accumulation is log-sum-exp.
pub fn q_series(c: f64, tol: f64) -> Result<SeriesResult> {
    check_positive("C", c)?;
    check_positive("tol", tol)?;
    let ln_c = c.ln();
    let mut log_term = -c; // r = 1
    let mut log_sum = log_term;
    let mut terms_used: u64 = 1;
    let mut tail_bound = remainder(terms_used, c)?;
    while tail_bound > tol && terms_used < MAX_SERIES_TERMS {
        let r = terms_used as f64;
        log_term += (r - 1.0) * (1.0 / r).ln_1p() + ln_c - c;
        log_sum = logaddexp(log_sum, log_term);
        terms_used += 1;
        tail_bound = remainder(terms_used, c)?;
    }
    Ok(SeriesResult {
        value: log_sum.exp(),
        terms_used,
        tail_bound,
        converged: tail_bound <= tol,
    })
}

/// The smallest root q in (0, 1] of q = e^(-C(1-q)) — the extinction
/// probability of a Poisson(C) branching process, and the limiting fraction
/// of vertices in small components. Returns 1 for C <= 1. Iteration from 0
/// is monotone increasing to the smallest root, so no bracketing is needed;
/// it stops when successive iterates differ by less than `tol`.
pub fn q_fixed_point(c: f64, tol: f64) -> Result<f64> {
    check_positive("C", c)?;
    check_positive("tol", tol)?;
    if c <= 1.0 {
        return Ok(1.0);
    }
    let mut q = 0.0f64;
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let next = (-c * (1.0 - q)).exp();
        if (next - q).abs() < tol {
            return Ok(next);
        }
        q = next;
    }
    Ok(q)
}

/// Perturbed series q_i = e^(-C) + sum_{r >= 2} (1/C) T_r e^(-r(1+delta_i))
/// / (r-1)!, truncated under the same certified envelope with rate delta_i.
/// which in {0, 1} requires delta_i > 0 (otherwise the series diverges and
/// a divergence error is returned); delta_2 is always positive.
pub fn q_i_series(which: u8, params: &TheoryParams, tol: f64) -> Result<SeriesResult> {
    check_positive("tol", tol)?;
    let rate = delta_i(params, which)?;
    if rate <= 0.0 {
        return Err(Error::DivergentSeries {
            which,
            value: rate,
        });
    }
    let c = params.c;
    let mut log_sum = -c; // r = 1 term is e^(-C) exactly
    let mut log_term = f64::NEG_INFINITY;
    let mut terms_used: u64 = 1;
    let mut tail_bound = envelope_tail(terms_used, c, rate);
    while tail_bound > tol && terms_used < MAX_SERIES_TERMS {
        let next_r = terms_used + 1;
        if next_r == 2 {
            log_term = -c.ln() - 2.0 * (1.0 + rate);
        } else {
            let r = terms_used as f64;
            log_term += (r - 1.0) * (1.0 / r).ln_1p() - (1.0 + rate);
        }
        log_sum = logaddexp(log_sum, log_term);
        terms_used = next_r;
        tail_bound = envelope_tail(terms_used, c, rate);
    }
    Ok(SeriesResult {
        value: log_sum.exp(),
        terms_used,
        tail_bound,
        converged: tail_bound <= tol,
    })
}

// ---------------------------------------------------------------------------
// Component-size bounds
// ---------------------------------------------------------------------------

/// Upper bound T_r e^(-r(1+delta_0)) / (C (r-1)!) on the probability that a
/// fixed vertex lies in a component of exactly r vertices, valid whenever
/// delta_0 > 0 and C != 1.
pub fn component_size_upper(params: &TheoryParams, r: u64) -> Result<f64> {
    if r < 1 {
        return Err(Error::BadParam {
            name: "r",
            value: r as f64,
            requirement: ">= 1",
        });
    }
    if params.c == 1.0 {
        return Err(Error::CriticalC {
            op: "component_size_upper",
        });
    }
    let d0 = delta_i(params, 0)?;
    if d0 <= 0.0 {
        return Err(Error::DivergentSeries { which: 0, value: d0 });
    }
    let rf = r as f64;
    Ok((ln_tree_count(r) - rf * (1.0 + d0) - params.c.ln() - ln_factorial(r - 1)).exp())
}

/// Matching lower bound
/// T_r e^(-r(1+delta_2)) e^(-2 epsilon + 2 omega / 3) / (C (1-epsilon) (r-1)!)
/// on the same probability; delta_2 > 0 always, but C = 1 is still excluded.
pub fn component_size_lower(params: &TheoryParams, r: u64) -> Result<f64> {
    if r < 1 {
        return Err(Error::BadParam {
            name: "r",
            value: r as f64,
            requirement: ">= 1",
        });
    }
    if params.c == 1.0 {
        return Err(Error::CriticalC {
            op: "component_size_lower",
        });
    }
    let d2 = delta_i(params, 2)?;
    let rf = r as f64;
    let log_val = ln_tree_count(r) - rf * (1.0 + d2) - ln_factorial(r - 1)
        - (params.c * (1.0 - params.epsilon)).ln()
        - 2.0 * params.epsilon
        + 2.0 * params.omega / 3.0;
    Ok(log_val.exp())
}

fn joint_factor_log(params: &TheoryParams, d1: f64, r: u64) -> f64 {
    let rf = r as f64;
    ln_tree_count(r) - rf * (1.0 + d1) - params.c.ln() - ln_factorial(r - 1)
}

/// Upper bound on the probability that two fixed vertices lie in distinct
/// components of sizes exactly r1 and r2: the product of two single-vertex
/// factors at rate delta_1 (which must be positive).
pub fn joint_size_upper_distinct(params: &TheoryParams, r1: u64, r2: u64) -> Result<f64> {
    if r1 < 1 || r2 < 1 {
        return Err(Error::BadParam {
            name: "r",
            value: r1.min(r2) as f64,
            requirement: ">= 1",
        });
    }
    if params.c == 1.0 {
        return Err(Error::CriticalC {
            op: "joint_size_upper_distinct",
        });
    }
    let d1 = delta_i(params, 1)?;
    if d1 <= 0.0 {
        return Err(Error::DivergentSeries { which: 1, value: d1 });
    }
    Ok((joint_factor_log(params, d1, r1) + joint_factor_log(params, d1, r2)).exp())
}

/// Upper bound on the probability that two fixed vertices share one
/// component of exactly r1 >= 2 vertices: 2 epsilon times the single-vertex
/// upper bound.
pub fn joint_size_upper_same(params: &TheoryParams, r1: u64) -> Result<f64> {
    if r1 < 2 {
        return Err(Error::BadParam {
            name: "r1",
            value: r1 as f64,
            requirement: ">= 2",
        });
    }
    Ok(2.0 * params.epsilon * component_size_upper(params, r1)?)
}

/// Union bound n^(1 - M delta_0) on the probability that some component has
/// size between M ln n and epsilon n (the mid-size window). Requires
/// delta_0 > 0 and M delta_0 >= 1; at M delta_0 = 1 the bound is exactly 1
/// (vacuous but not an error), below that it grows with n and is rejected.
pub fn midsize_bound(params: &TheoryParams, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadParam {
            name: "n",
            value: n as f64,
            requirement: ">= 2",
        });
    }
    if params.c == 1.0 {
        return Err(Error::CriticalC {
            op: "midsize_bound",
        });
    }
    let d0 = delta_i(params, 0)?;
    if d0 <= 0.0 {
        return Err(Error::DivergentSeries { which: 0, value: d0 });
    }
    let m_d0 = params.m * d0;
    if m_d0 < 1.0 {
        return Err(Error::VacuousBound {
            m: params.m,
            m_delta0: m_d0,
        });
    }
    Ok(((1.0 - m_d0) * (n as f64).ln()).exp())
}

// ---------------------------------------------------------------------------
// Small-component totals
// ---------------------------------------------------------------------------

/// Two-sided band (n q (1-gamma), n q (1+gamma)) for the expected total
/// number of vertices in small components. gamma = 0 collapses the band to
/// the point n q. C = 1 is rejected: the band constants require a strictly
/// sub- or supercritical mean.
pub fn mean_band(c: f64, gamma: f64, n: u64) -> Result<(f64, f64)> {
    check_positive("C", c)?;
    if c == 1.0 {
        return Err(Error::CriticalC { op: "mean_band" });
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::BadParam {
            name: "gamma",
            value: gamma,
            requirement: "in [0, 1)",
        });
    }
    if n < 1 {
        return Err(Error::BadParam {
            name: "n",
            value: n as f64,
            requirement: ">= 1",
        });
    }
    let q = q_fixed_point(c, 1e-12)?;
    let nf = n as f64;
    Ok((nf * q * (1.0 - gamma), nf * q * (1.0 + gamma)))
}

/// Upper bound n q (1+gamma) + 4 n^2 q^2 gamma on the variance of the total
/// number of vertices in small components.
pub fn variance_bound(c: f64, gamma: f64, n: u64) -> Result<f64> {
    check_positive("C", c)?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::BadParam {
            name: "gamma",
            value: gamma,
            requirement: "in [0, 1)",
        });
    }
    if n < 1 {
        return Err(Error::BadParam {
            name: "n",
            value: n as f64,
            requirement: ">= 1",
        });
    }
    let q = q_fixed_point(c, 1e-12)?;
    let nf = n as f64;
    Ok(nf * q * (1.0 + gamma) + 4.0 * nf * nf * q * q * gamma)
}

// ---------------------------------------------------------------------------
// Breadth-first layer moments
// ---------------------------------------------------------------------------

/// For a subcritical upper mean C_u < 1, the t-th breadth-first layer from a
/// fixed source has mean at most C_u^t and second moment at most
/// C_u^t / (1 - C_u). Returns (mean_bound, second_moment_bound).
pub fn layer_moment_bounds(c_u: f64, t: u32) -> Result<(f64, f64)> {
    if !(c_u > 0.0 && c_u < 1.0) {
        return Err(Error::BadParam {
            name: "C_u",
            value: c_u,
            requirement: "in the open interval (0, 1)",
        });
    }
    if t < 1 {
        return Err(Error::BadParam {
            name: "t",
            value: t as f64,
            requirement: ">= 1",
        });
    }
    let mean = c_u.powi(t as i32);
    Ok((mean, mean / (1.0 - c_u)))
}

// ---------------------------------------------------------------------------
// Special constants and the very-sparse regime
// ---------------------------------------------------------------------------

/// The unique root above 2 of C/2 - 1 - ln C = 0, i.e. the mean at which
/// the rate delta stays positive even after halving the exponent. Bisection
/// on [2, 8] to an interval of 1e-10.
pub fn solve_c0() -> f64 {
    let f = |c: f64| c / 2.0 - 1.0 - c.ln();
    let (mut lo, mut hi) = (2.0f64, 8.0f64);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Tail bounds in the very sparse regime C < 1/e, where the rate
/// d0 = ln(1/(e C)) is positive without any epsilon/omega slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeepSubcriticalBound {
    /// (1/C) n^(-M d0): bound on one vertex lying in a component larger
    /// than M ln n.
    pub per_vertex: f64,
    /// (1/C) n^(1 - M d0): union bound over all n vertices.
    pub union: f64,
}

/// Evaluate the very-sparse tail bounds. Rejects C >= 1/e (the rate would
/// vanish or go negative).
pub fn deep_subcritical_bound(c: f64, m: f64, n: u64) -> Result<DeepSubcriticalBound> {
    check_positive("C", c)?;
    check_positive("M", m)?;
    if n < 2 {
        return Err(Error::BadParam {
            name: "n",
            value: n as f64,
            requirement: ">= 2",
        });
    }
    let inv_e = (-1.0f64).exp();
    if c >= inv_e {
        return Err(Error::BadParam {
            name: "C",
            value: c,
            requirement: "strictly below 1/e",
        });
    }
    let d0 = -1.0 - c.ln();
    let ln_n = (n as f64).ln();
    Ok(DeepSubcriticalBound {
        per_vertex: (-m * d0 * ln_n).exp() / c,
        union: ((1.0 - m * d0) * ln_n).exp() / c,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
