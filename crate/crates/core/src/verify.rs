//! The library's self-verification battery: twelve numbered checks that pin
//! the analytic machinery to independently computed reference values and
//! confront the samplers with the closed-form predictions at desk scale.
//! `run_all` executes every check and reports one outcome per check; the
//! CLI exposes the battery as the `verify` subcommand.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::components::components;
use crate::montecarlo::{
    bound_check, coupling_experiment, layer_check, run, ExperimentConfig,
};
use crate::oracle::{exact_component_law, ProbTable};
use crate::probmodel::ModelDescriptor;
use crate::sampler::{sample_graph, SeedSpec};
use crate::theory::{q_fixed_point, q_series, solve_c0, TheoryParams};

/// Outcome of one numbered check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub runtime_ms: u64,
    /// Wall-clock budget, when the check carries one.
    pub limit_ms: Option<u64>,
}

impl CheckOutcome {
    /// One human-readable result line.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let budget = match self.limit_ms {
            Some(limit) => format!("{} ms / {} ms", self.runtime_ms, limit),
            None => format!("{} ms", self.runtime_ms),
        };
        format!(
            "check {:>2} {} [{}] {}: {}",
            self.id, verdict, budget, self.name, self.detail
        )
    }
}

/// Run all checks in order. Each check is deterministic (fixed seeds) and
/// independent of thread count.
pub fn run_all() -> Vec<CheckOutcome> {
    type CheckFn = fn() -> (bool, String);
    let checks: &[(u32, &'static str, Option<u64>, CheckFn)] = &[
        (1, "series agrees with fixed point", Some(1_000), check_series_vs_fixed_point),
        (2, "subcritical extinction is total", Some(5_000), check_subcritical_extinction),
        (3, "extinction strictly decreases in C", None, check_strict_monotonicity),
        (4, "uniqueness threshold root", None, check_threshold_root),
        (5, "supercritical giant fraction", Some(60_000), check_giant_fraction),
        (6, "subcritical components stay small", Some(60_000), check_subcritical_smallness),
        (7, "mid-size window stays empty", None, check_midsize_gap),
        (8, "giant is unique above the threshold", None, check_giant_uniqueness),
        (9, "sampler matches exact enumeration", Some(120_000), check_oracle_equivalence),
        (10, "coupling frequencies", None, check_coupling_frequencies),
        (11, "size-law confidence intervals inside envelope", None, check_size_law_envelope),
        (12, "layer moments under geometric envelope", None, check_layer_moments),
    ];
    checks
        .iter()
        .map(|&(id, name, limit_ms, f)| {
            let started = Instant::now();
            let (mut passed, detail) = f();
            let runtime_ms = started.elapsed().as_millis() as u64;
            if let Some(limit) = limit_ms {
                passed &= runtime_ms < limit;
            }
            CheckOutcome {
                id,
                name,
                passed,
                detail,
                runtime_ms,
                limit_ms,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Exact numerics
// ---------------------------------------------------------------------------

fn check_series_vs_fixed_point() -> (bool, String) {
    let mut worst = 0.0f64;
    for c in [1.2, 1.5, 2.0, 3.0, 5.0, 8.0] {
        let series = match q_series(c, 1e-8) {
            Ok(s) => s.value,
            Err(e) => return (false, format!("series failed at C={c}: {e}")),
        };
        let fixed = match q_fixed_point(c, 1e-10) {
            Ok(v) => v,
            Err(e) => return (false, format!("fixed point failed at C={c}: {e}")),
        };
        worst = worst.max((series - fixed).abs());
    }
    (
        worst < 1e-6,
        format!("max |series - fixed point| = {worst:.3e} over 6 values (tol 1e-6)"),
    )
}

fn check_subcritical_extinction() -> (bool, String) {
    let below = match q_series(0.5, 1e-6) {
        Ok(s) => s,
        Err(e) => return (false, format!("series failed at C=0.5: {e}")),
    };
    let ok_below = below.converged && (below.value - 1.0).abs() <= 1e-6;
    // At the critical point the series converges too slowly to finish; the
    // honest contract is a partial sum plus a certified tail that still
    // covers the true value 1.
    let critical = match q_series(1.0, 1e-12) {
        Ok(s) => s,
        Err(e) => return (false, format!("series failed at C=1: {e}")),
    };
    let gap = 1.0 - critical.value;
    let ok_critical = !critical.converged
        && critical.terms_used <= 1_000_000
        && critical.value >= 0.995
        && gap <= critical.tail_bound + 1e-12;
    (
        ok_below && ok_critical,
        format!(
            "q(0.5) = {:.9} ({} terms); q(1) partial = {:.9} after {} terms, gap {:.3e} <= certified tail {:.3e}",
            below.value,
            below.terms_used,
            critical.value,
            critical.terms_used,
            gap,
            critical.tail_bound
        ),
    )
}

fn check_strict_monotonicity() -> (bool, String) {
    let mut prev = None;
    let mut min_drop = f64::INFINITY;
    for k in 0..=69u32 {
        let c = (11 + k) as f64 / 10.0; // 1.1, 1.2, ..., 8.0
        let q = match q_fixed_point(c, 1e-10) {
            Ok(v) => v,
            Err(e) => return (false, format!("fixed point failed at C={c}: {e}")),
        };
        if let Some(p) = prev {
            min_drop = f64::min(min_drop, p - q);
        }
        prev = Some(q);
    }
    (
        min_drop > 1e-7,
        format!("min consecutive drop of q over C = 1.1..8.0 step 0.1 is {min_drop:.3e} (> 1e-7 required)"),
    )
}

fn check_threshold_root() -> (bool, String) {
    let c0 = solve_c0();
    let residual = (c0 / 2.0 - 1.0 - c0.ln()).abs();
    let ok = c0 > 2.0 && c0 < 8.0 && (c0 - 5.356694).abs() <= 1e-5 && residual < 1e-9;
    (
        ok,
        format!("C0 = {c0:.7} (expected 5.356694 +/- 1e-5), residual {residual:.3e}"),
    )
}

// ---------------------------------------------------------------------------
// Desk-scale sampling checks
// ---------------------------------------------------------------------------

fn check_giant_fraction() -> (bool, String) {
    let cfg = ExperimentConfig::new(ModelDescriptor::Homogeneous { c: 2.0 }, 100_000, 20);
    let summary = match run(&cfg) {
        Ok(s) => s,
        Err(e) => return (false, format!("run failed: {e}")),
    };
    let giants = &summary.stats["giant_count"];
    let one_giant_every_trial = giants.mean == 1.0 && giants.variance == 0.0;
    let y_frac = summary.stats["y_frac"].mean;
    let y_ok = (y_frac - 0.796812).abs() <= 0.02;
    let h2_freq = summary.stats["h2"].mean;
    let ok = one_giant_every_trial && y_ok && h2_freq == 1.0;
    (
        ok,
        format!(
            "giant count mean {} var {}; mean Y/n = {y_frac:.6} (expect 0.796812 +/- 0.02); freq(h2) = {h2_freq}",
            giants.mean, giants.variance
        ),
    )
}

fn check_subcritical_smallness() -> (bool, String) {
    let cfg = ExperimentConfig::new(ModelDescriptor::Homogeneous { c: 0.5 }, 100_000, 50);
    let summary = match run(&cfg) {
        Ok(s) => s,
        Err(e) => return (false, format!("run failed: {e}")),
    };
    let h1_freq = summary.stats["h1"].mean;
    let cut = 10.0 * (100_000f64).ln(); // ~115.13
    let max = summary.max_size_observed;
    let ok = h1_freq == 1.0 && (max as f64) <= cut;
    (
        ok,
        format!("freq(h1) = {h1_freq}; largest component {max} <= {cut:.2}"),
    )
}

fn check_midsize_gap() -> (bool, String) {
    let cfg = ExperimentConfig::new(ModelDescriptor::Homogeneous { c: 2.0 }, 100_000, 100);
    let summary = match run(&cfg) {
        Ok(s) => s,
        Err(e) => return (false, format!("run failed: {e}")),
    };
    let b_freq = summary.stats["b"].mean;
    (
        b_freq == 0.0,
        format!("freq(mid-size component in (M ln n, eps n]) = {b_freq} over 100 trials"),
    )
}

fn check_giant_uniqueness() -> (bool, String) {
    let cfg = ExperimentConfig::new(ModelDescriptor::Homogeneous { c: 6.0 }, 100_000, 50);
    let summary = match run(&cfg) {
        Ok(s) => s,
        Err(e) => return (false, format!("run failed: {e}")),
    };
    let h3_freq = summary.stats["h3"].mean;
    (
        h3_freq >= 0.95,
        format!("freq(single in-band giant, rest small) = {h3_freq} (>= 0.95 required)"),
    )
}

fn check_oracle_equivalence() -> (bool, String) {
    const TABLES: usize = 20;
    const TRIALS: u64 = 1_000_000;
    let mut prob_rng = ChaCha8Rng::seed_from_u64(0xE59);
    let mut excursions = 0u32;
    let mut worst_z = 0.0f64;
    for table_idx in 0..TABLES {
        let probs: Vec<f64> = (0..10).map(|_| 0.05 + 0.90 * prob_rng.random::<f64>()).collect();
        let table = match ProbTable::new(5, probs) {
            Ok(t) => t,
            Err(e) => return (false, format!("table {table_idx}: {e}")),
        };
        let exact = match exact_component_law(&table, 1) {
            Ok(l) => l,
            Err(e) => return (false, format!("law {table_idx}: {e}")),
        };
        let model = match table.descriptor().to_model() {
            Ok(m) => m,
            Err(e) => return (false, format!("model {table_idx}: {e}")),
        };
        let counts: Vec<u64> = (0..TRIALS)
            .into_par_iter()
            .fold(
                || vec![0u64; 5],
                |mut acc, t| {
                    let stream = table_idx as u64 * TRIALS + t;
                    let g = sample_graph(&model, 5, SeedSpec::new(0xE59, stream))
                        .expect("in-band table must sample");
                    let census = components(&g);
                    acc[census.size_of(1) as usize - 1] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; 5],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        for r in 0..5 {
            let freq = counts[r] as f64 / TRIALS as f64;
            let p = exact[r];
            let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
            let z = (freq - p).abs() / sigma;
            worst_z = worst_z.max(z);
            if z > 4.0 {
                excursions += 1;
            }
        }
    }
    (
        excursions <= 1,
        format!(
            "{TABLES} tables x {TRIALS} trials: {excursions} cells beyond 4 sigma across 100 cells (<= 1 allowed), worst z = {worst_z:.2}"
        ),
    )
}

fn check_coupling_frequencies() -> (bool, String) {
    let small = match coupling_experiment(2.0, 1024, 10_000, 0) {
        Ok(r) => r,
        Err(e) => return (false, format!("coupling failed: {e}")),
    };
    let large = match coupling_experiment(2.0, 10_000, 1_000, 0) {
        Ok(r) => r,
        Err(e) => return (false, format!("coupling failed: {e}")),
    };
    let ok = small.r_dif_freq >= 0.9375 && large.max_degree_freq >= 0.99;
    (
        ok,
        format!(
            "freq(R_dif in [32, 96]) = {:.4} (>= 0.9375); freq(max degree <= {:.2}) = {:.3} (>= 0.99)",
            small.r_dif_freq, large.degree_threshold, large.max_degree_freq
        ),
    )
}

fn check_size_law_envelope() -> (bool, String) {
    let cfg = ExperimentConfig::new(ModelDescriptor::Homogeneous { c: 2.0 }, 100_000, 100);
    let params = match TheoryParams::new(2.0, 0.05, 0.05, 0.05, 10.0) {
        Ok(p) => p,
        Err(e) => return (false, format!("params: {e}")),
    };
    let report = match bound_check(&cfg, &params, 1..=20) {
        Ok(r) => r,
        Err(e) => return (false, format!("bound check failed: {e}")),
    };
    let judged = report
        .rows
        .iter()
        .filter(|r| r.observations >= crate::montecarlo::MIN_SUPPORT)
        .count();
    (
        report.failures == 0 && report.b_pass,
        format!(
            "{judged}/20 size cells judged (>= 50 observed components): {} failures, {} warnings; mid-window freq {} vs ceiling {:.3e}",
            report.failures,
            report.warnings,
            report.b_freq,
            report.b_bound.unwrap_or(f64::NAN)
        ),
    )
}

fn check_layer_moments() -> (bool, String) {
    let cfg = ExperimentConfig::new(ModelDescriptor::Homogeneous { c: 0.8 }, 100_000, 200);
    let report = match layer_check(&cfg, 25) {
        Ok(r) => r,
        Err(e) => return (false, format!("layer check failed: {e}")),
    };
    let bad: Vec<u32> = report.rows.iter().filter(|r| !r.pass).map(|r| r.t).collect();
    (
        report.all_pass,
        if bad.is_empty() {
            format!(
                "all layer means and second moments within envelope + 3 sigma for t <= 25 (C_u = {})",
                report.c_u
            )
        } else {
            format!("violations at depths {bad:?}")
        },
    )
}
