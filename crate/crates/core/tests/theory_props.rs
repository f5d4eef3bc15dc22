//! Analytic-layer properties: series partial sums, certified remainders,
//! the envelope inequality behind them, and the relations among the
//! perturbed series and the per-size bounds.

use ergraph::theory::{
    component_size_lower, component_size_upper, delta, log_tree_term, q_fixed_point, q_i_series,
    q_series, remainder, TheoryParams, SQRT_2PI,
};

#[test]
fn partial_sums_are_nondecreasing_and_capped_by_one() {
    for c in [0.3, 0.5, 1.0, 1.5, 2.0, 4.0, 8.0] {
        let mut partial = 0.0f64;
        let mut prev = 0.0f64;
        for r in 1..=2000u64 {
            partial += log_tree_term(r, c).unwrap().exp();
            assert!(partial >= prev, "partial sum decreased at C={c}, r={r}");
            assert!(
                partial <= 1.0 + 1e-12,
                "partial sum {partial} exceeds 1 at C={c}, r={r}"
            );
            prev = partial;
        }
    }
}

#[test]
fn series_and_fixed_point_agree_tightly_when_both_converge() {
    for c in [1.2, 2.0, 3.0, 5.0] {
        let s = q_series(c, 1e-10).unwrap();
        assert!(s.converged);
        let f = q_fixed_point(c, 1e-12).unwrap();
        assert!(
            (s.value - f).abs() < 2e-8,
            "C={c}: series {} vs fixed point {f}",
            s.value
        );
    }
}

#[test]
fn truncation_error_is_certified_by_the_remainder() {
    // Summing 50 exact terms at C=2 must land within remainder(50, 2) of
    // the true value (taken from the tightly converged fixed point).
    let partial: f64 = (1..=50u64).map(|r| log_tree_term(r, 2.0).unwrap().exp()).sum();
    let truth = q_fixed_point(2.0, 1e-13).unwrap();
    let gap = (truth - partial).abs();
    let cert = remainder(50, 2.0).unwrap();
    assert!(
        gap <= cert + 5e-12,
        "gap {gap:.3e} not covered by certificate {cert:.3e}"
    );
    // The certificate must not be wildly loose either (same order).
    assert!(cert < 1e-9);
}

#[test]
fn remainder_envelope_dominates_every_tree_term() {
    // The certificate rests on term_r <= (1/(C sqrt(2 pi))) r^{-3/2}
    // e^{-delta(C) r}; check the log form with a tiny float allowance.
    for c in [0.3, 0.9, 1.0, 1.3, 2.0, 5.0, 8.0] {
        let d = delta(c).unwrap();
        let log_prefactor = -(c * SQRT_2PI).ln();
        for r in 1..=2000u64 {
            let lhs = log_tree_term(r, c).unwrap();
            let rhs = log_prefactor - 1.5 * (r as f64).ln() - d * r as f64;
            assert!(
                lhs <= rhs + 1e-12,
                "envelope fails at C={c}, r={r}: {lhs} > {rhs}"
            );
        }
    }
}

#[test]
fn remainder_decreases_in_terms_and_bounds_true_tails() {
    for c in [0.5, 1.0, 2.0, 4.0] {
        let mut prev = f64::INFINITY;
        for n in [1u64, 2, 5, 10, 50, 100, 1000] {
            let r = remainder(n, c).unwrap();
            assert!(r > 0.0 && r < prev, "C={c}, N={n}");
            prev = r;
            // True tail between N and a far horizon must be below the bound.
            let tail: f64 = (n + 1..=n + 4000).map(|k| log_tree_term(k, c).unwrap().exp()).sum();
            assert!(tail <= r * (1.0 + 1e-12), "C={c}, N={n}: {tail} > {r}");
        }
    }
}

#[test]
fn perturbed_series_collapse_to_the_plain_series_as_slacks_shrink() {
    let q = q_fixed_point(3.0, 1e-13).unwrap();
    let mut prev_gap = f64::INFINITY;
    for h in [0.1, 0.01, 0.001] {
        let params = TheoryParams::new(3.0, h, h, 0.05, 10.0).unwrap();
        let q0 = q_i_series(0, &params, 1e-12).unwrap().value;
        let gap = (q0 - q).abs();
        assert!(gap < prev_gap, "gap did not shrink at h={h}");
        prev_gap = gap;
    }
    assert!(prev_gap < 5e-3);
}

#[test]
fn per_size_bounds_sandwich_the_exact_terms() {
    let params = TheoryParams::new(2.0, 0.01, 0.01, 0.05, 10.0).unwrap();
    for r in 1..=100u64 {
        let term = log_tree_term(r, 2.0).unwrap().exp();
        let up = component_size_upper(&params, r).unwrap();
        let lo = component_size_lower(&params, r).unwrap();
        assert!(
            lo <= term && term <= up,
            "sandwich fails at r={r}: {lo} <= {term} <= {up}"
        );
        assert!(lo > 0.0);
    }
}

#[test]
fn summed_upper_bounds_match_the_perturbed_series_identity() {
    // sum_r upper(r) telescopes to q_0 + e^{-C}(e^{C eps + omega} - 1):
    // the r = 1 bound replaces the plain e^{-C} leading term.
    let params = TheoryParams::new(2.0, 0.01, 0.01, 0.05, 10.0).unwrap();
    let q0 = q_i_series(0, &params, 1e-14).unwrap().value;
    let c = 2.0f64;
    let closed_form = q0 + (-c).exp() * ((c * 0.01 + 0.01f64).exp() - 1.0);
    let summed: f64 = (1..=400u64)
        .map(|r| component_size_upper(&params, r).unwrap())
        .sum();
    assert!(
        summed <= closed_form + 1e-12,
        "{summed} > {closed_form}"
    );
    assert!((closed_form - summed) < 1e-10, "sum should nearly exhaust the identity");
}
