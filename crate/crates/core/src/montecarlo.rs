//! Experiment harness tying the sampler, the component census, and the
//! analytic bounds together: repeated-trial event frequencies with
//! confidence intervals, pooled component-size laws, bound-violation
//! reports, BFS layer-moment checks, and the coupled-triple experiment.
//!
//! Trials are independent (one RNG stream per trial index) and run in
//! parallel; aggregation folds the per-trial results in trial order, so a
//! summary is bit-identical across thread counts.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::{
    append_census_csv, append_flags_csv, bfs_profile, components, event_flags, max_degree,
    EventFlags,
};
use crate::error::{Error, Result};
use crate::probmodel::{AlphaSequence, EdgeProbModel, ModelDescriptor};
use crate::sampler::{count_dif, sample_coupled, sample_graph, SeedSpec, RNG_NAME};
use crate::theory::{
    component_size_lower, component_size_upper, delta_i, layer_moment_bounds, midsize_bound,
    q_fixed_point, TheoryParams,
};

/// Size-law cells backed by fewer observed components than this are
/// reported but not judged against the analytic bounds: vertices on one
/// component fire together, so the component is the observation unit, and
/// a handful of them cannot support a two-sided interval check.
pub const MIN_SUPPORT: u64 = 50;

/// Sample size from which a bound violation counts as a failure rather
/// than a warning (the analytic bounds hold for all n past an unspecified
/// threshold, so small-n violations are only suspicious, not conclusive).
pub const ASYMPTOTIC_N: u64 = 100_000;

const Z_95: f64 = 1.959963984540054;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Which per-trial artifacts an experiment keeps beyond the scalar stats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    /// Per-trial flag rows (CSV).
    Flags,
    /// Aggregated size -> vertex-count histogram.
    Histogram,
    /// Per-trial component-size rows (CSV); heavier than the others.
    Census,
}

fn default_epsilon() -> f64 {
    0.1
}
fn default_gamma() -> f64 {
    0.05
}
fn default_m() -> f64 {
    10.0
}
fn default_stats() -> BTreeSet<StatKind> {
    [StatKind::Flags, StatKind::Histogram].into_iter().collect()
}

/// A complete, serializable description of one experiment. The model is
/// stored as its descriptor so a config round-trips through JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelDescriptor,
    pub n: u64,
    pub trials: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "M", default = "default_m")]
    pub m: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stats")]
    pub which_stats: BTreeSet<StatKind>,
}

impl ExperimentConfig {
    /// Config with the default thresholds: epsilon 0.1, gamma 0.05, M 10,
    /// seed 0, flags + histogram collection.
    pub fn new(model: ModelDescriptor, n: u64, trials: u64) -> Self {
        Self {
            model,
            n,
            trials,
            epsilon: default_epsilon(),
            gamma: default_gamma(),
            m: default_m(),
            seed: 0,
            which_stats: default_stats(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::BadParam {
                name: "trials",
                value: self.trials as f64,
                requirement: ">= 1",
            });
        }
        for (name, value) in [("epsilon", self.epsilon), ("gamma", self.gamma)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::BadParam {
                    name,
                    value,
                    requirement: "in (0, 1)",
                });
            }
        }
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::BadParam {
                name: "M",
                value: self.m,
                requirement: "> 0 and finite",
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

/// Mean, unbiased sample variance, and 95% normal half-width of one
/// per-trial statistic. For 0/1 statistics the mean is the frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub variance: f64,
    pub half_width_95: f64,
}

fn summarize(values: impl Iterator<Item = f64> + Clone, trials: u64) -> StatSummary {
    let tf = trials as f64;
    let mean = values.clone().sum::<f64>() / tf;
    let variance = if trials > 1 {
        values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (tf - 1.0)
    } else {
        0.0
    };
    StatSummary {
        mean,
        variance,
        half_width_95: Z_95 * (variance / tf).sqrt(),
    }
}

/// Run provenance attached to every summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub rng: String,
    pub seed: u64,
    pub wall_ms: u64,
}

impl RunMetadata {
    fn capture(seed: u64, started: Instant) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_NAME.to_string(),
            seed,
            wall_ms: started.elapsed().as_millis() as u64,
        }
    }
}

/// Aggregated result of [`run`]. `stats` is keyed by statistic name:
/// the flag frequencies `h1, b, w, v, h2, h3`, the giant-mass counts
/// `y_n, z_n, y_frac`, the per-trial extremes `max_size, max_degree`, and
/// the number of components above epsilon n, `giant_count`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    /// Analytic extinction value q(C) used to center the giant band.
    pub q_c: f64,
    pub stats: BTreeMap<String, StatSummary>,
    /// Largest component size seen in any trial.
    pub max_size_observed: u64,
    /// Largest vertex degree seen in any trial.
    pub max_degree_observed: u64,
    /// size -> total vertex count across trials (present with
    /// [`StatKind::Histogram`]); totals n * trials.
    pub histogram: Option<BTreeMap<u64, u64>>,
    /// CSV rows, one per trial (present with [`StatKind::Flags`]).
    pub flags_csv: Option<String>,
    /// CSV rows, one per component per trial (present with
    /// [`StatKind::Census`]).
    pub census_csv: Option<String>,
    pub metadata: RunMetadata,
}

struct TrialOut {
    flags: EventFlags,
    max_size: u64,
    max_degree: u64,
    giant_count: u64,
    histogram: Option<BTreeMap<u64, u64>>,
    census_sizes: Option<Vec<u64>>,
}

/// Sample `config.trials` independent graphs, reduce each to its census and
/// event flags, and aggregate. Deterministic in the config (including seed),
/// independent of thread count.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    let started = Instant::now();
    config.validate()?;
    let model = config.model.to_model()?;
    let q_c = q_fixed_point(model.c(), 1e-10)?;
    let want_hist = config.which_stats.contains(&StatKind::Histogram);
    let want_flags = config.which_stats.contains(&StatKind::Flags);
    let want_census = config.which_stats.contains(&StatKind::Census);

    let trial_results: Vec<TrialOut> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOut> {
            let g = sample_graph(&model, config.n, SeedSpec::new(config.seed, t))?;
            let census = components(&g);
            let flags = event_flags(&census, config.m, config.gamma, config.epsilon, q_c)?;
            let giant_cut = config.epsilon * config.n as f64;
            let giant_count = census.sizes.iter().filter(|&&s| s as f64 > giant_cut).count() as u64;
            let histogram = want_hist.then(|| {
                let mut h: BTreeMap<u64, u64> = BTreeMap::new();
                for &s in &census.sizes {
                    *h.entry(s).or_insert(0) += s; // vertices, not components
                }
                h
            });
            let census_sizes = want_census.then(|| census.sizes.clone());
            Ok(TrialOut {
                flags,
                max_size: census.max_size(),
                max_degree: max_degree(&g),
                giant_count,
                histogram,
                census_sizes,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Sequential fold in trial order: reproducible floating-point sums.
    let nf = config.n as f64;
    let mut stats = BTreeMap::new();
    let column = |f: &dyn Fn(&TrialOut) -> f64| {
        trial_results.iter().map(f).collect::<Vec<f64>>()
    };
    let mut insert = |name: &str, values: Vec<f64>| {
        stats.insert(
            name.to_string(),
            summarize(values.iter().copied(), config.trials),
        );
    };
    insert("h1", column(&|t| f64::from(t.flags.h1)));
    insert("b", column(&|t| f64::from(t.flags.b)));
    insert("w", column(&|t| f64::from(t.flags.w)));
    insert("v", column(&|t| f64::from(t.flags.v)));
    insert("h2", column(&|t| f64::from(t.flags.h2)));
    insert("h3", column(&|t| f64::from(t.flags.h3)));
    insert("y_n", column(&|t| t.flags.y_n as f64));
    insert("z_n", column(&|t| t.flags.z_n as f64));
    insert("y_frac", column(&|t| t.flags.y_n as f64 / nf));
    insert("max_size", column(&|t| t.max_size as f64));
    insert("max_degree", column(&|t| t.max_degree as f64));
    insert("giant_count", column(&|t| t.giant_count as f64));

    let histogram = want_hist.then(|| {
        let mut total: BTreeMap<u64, u64> = BTreeMap::new();
        for t in &trial_results {
            for (&size, &count) in t.histogram.as_ref().unwrap() {
                *total.entry(size).or_insert(0) += count;
            }
        }
        total
    });
    let flags_csv = want_flags.then(|| {
        let mut buf = String::from(crate::components::FLAGS_CSV_HEADER);
        buf.push('\n');
        for (i, t) in trial_results.iter().enumerate() {
            append_flags_csv(&mut buf, i as u64, &t.flags, t.max_size, t.max_degree);
        }
        buf
    });
    let census_csv = want_census.then(|| {
        let mut buf = String::from(crate::components::CENSUS_CSV_HEADER);
        buf.push('\n');
        for (i, t) in trial_results.iter().enumerate() {
            let sizes = t.census_sizes.as_ref().unwrap();
            let stub = crate::components::ComponentCensus {
                n: config.n,
                comp_id: Vec::new(),
                sizes: sizes.clone(),
            };
            append_census_csv(&mut buf, i as u64, &stub);
        }
        buf
    });

    Ok(ExperimentSummary {
        config: config.clone(),
        q_c,
        max_size_observed: trial_results.iter().map(|t| t.max_size).max().unwrap_or(0),
        max_degree_observed: trial_results.iter().map(|t| t.max_degree).max().unwrap_or(0),
        stats,
        histogram,
        flags_csv,
        census_csv,
        metadata: RunMetadata::capture(config.seed, started),
    })
}

// ---------------------------------------------------------------------------
// Component-size law estimation
// ---------------------------------------------------------------------------

/// One estimated cell of the component-size law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    pub r: u64,
    /// Estimated P(the component of a vertex has exactly r vertices).
    pub mean: f64,
    pub half_width_95: f64,
    /// Pooled observation count behind the estimate.
    pub support: u64,
}

/// Estimated component-size law for r = 1..=r_max.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PmfEstimate {
    pub r_max: u64,
    pub vertex_one_only: bool,
    pub trials: u64,
    pub rows: Vec<PmfRow>,
}

/// Estimate P(#E_i = r) for r up to `r_max`. By default the estimate pools
/// all vertices of each trial (variance reduction); per-vertex indicators
/// within a trial are dependent, so the confidence interval always comes
/// from the spread of the per-trial averages. With `vertex_one_only` the
/// estimate uses only vertex 1 of each trial, making observations fully
/// independent.
pub fn estimate_pmf(
    config: &ExperimentConfig,
    r_max: u64,
    vertex_one_only: bool,
) -> Result<PmfEstimate> {
    config.validate()?;
    if r_max < 1 || r_max > config.n {
        return Err(Error::BadParam {
            name: "r_max",
            value: r_max as f64,
            requirement: "in 1..=n",
        });
    }
    let model = config.model.to_model()?;
    let per_trial: Vec<Vec<u64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let g = sample_graph(&model, config.n, SeedSpec::new(config.seed, t))?;
            let census = components(&g);
            let mut counts = vec![0u64; r_max as usize];
            if vertex_one_only {
                let s = census.size_of(1);
                if s <= r_max {
                    counts[s as usize - 1] = 1;
                }
            } else {
                for &s in &census.sizes {
                    if s <= r_max {
                        counts[s as usize - 1] += s; // vertices on size-s components
                    }
                }
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;

    let denom = if vertex_one_only { 1.0 } else { config.n as f64 };
    let rows = (0..r_max as usize)
        .map(|idx| {
            let fractions: Vec<f64> = per_trial.iter().map(|c| c[idx] as f64 / denom).collect();
            let s = summarize(fractions.iter().copied(), config.trials);
            PmfRow {
                r: idx as u64 + 1,
                mean: s.mean,
                half_width_95: s.half_width_95,
                support: per_trial.iter().map(|c| c[idx]).sum(),
            }
        })
        .collect();
    Ok(PmfEstimate {
        r_max,
        vertex_one_only,
        trials: config.trials,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Bound checking
// ---------------------------------------------------------------------------

/// Outcome of one cell's comparison against the analytic envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    /// Fewer than [`MIN_SUPPORT`] observations: not judged.
    Skipped,
    /// Violation at small n, where the asymptotic bounds need not hold yet.
    Warning,
    /// Violation at n >= [`ASYMPTOTIC_N`].
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckRow {
    pub r: u64,
    /// Pooled vertex count behind the estimate (components x r).
    pub support: u64,
    /// Number of size-r components observed; the [`MIN_SUPPORT`] gate.
    pub observations: u64,
    pub mean: f64,
    pub half_width_95: f64,
    pub lower: f64,
    pub upper: f64,
    pub status: BoundStatus,
}

/// Result of [`bound_check`]: per-size-cell comparisons plus the
/// middle-window event frequency against its analytic ceiling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub rows: Vec<BoundCheckRow>,
    pub failures: u64,
    pub warnings: u64,
    /// Empirical frequency of a component in the middle window
    /// (M ln n, epsilon n].
    pub b_freq: f64,
    /// Analytic ceiling for that frequency (absent when the exponent makes
    /// the ceiling vacuous).
    pub b_bound: Option<f64>,
    pub b_pass: bool,
}

impl BoundCheckReport {
    pub fn all_pass(&self) -> bool {
        self.failures == 0 && self.b_pass
    }
}

/// Compare the estimated component-size law against the analytic
/// per-size envelope on `r_range`: a cell passes when its confidence
/// interval lies inside [lower(r), upper(r)]. Cells backed by fewer than
/// [`MIN_SUPPORT`] observed components are skipped; violations are
/// warnings below [`ASYMPTOTIC_N`] vertices and failures at or above it.
/// Also estimates the middle-window frequency and compares it against its
/// union bound plus three binomial standard errors.
pub fn bound_check(
    config: &ExperimentConfig,
    params: &TheoryParams,
    r_range: RangeInclusive<u64>,
) -> Result<BoundCheckReport> {
    config.validate()?;
    let d0 = delta_i(params, 0)?;
    if d0 <= 0.0 {
        return Err(Error::DivergentSeries {
            which: 0,
            value: d0,
        });
    }
    let (r_lo, r_hi) = (*r_range.start(), *r_range.end());
    if r_lo < 1 || r_hi < r_lo || r_hi > config.n {
        return Err(Error::BadParam {
            name: "r_range",
            value: r_hi as f64,
            requirement: "1 <= start <= end <= n",
        });
    }
    let model = config.model.to_model()?;
    // The middle window and its ceiling must share thresholds, so both come
    // from `params` (the config's epsilon only shapes event_flags runs).
    let giant_cut = params.epsilon * config.n as f64;
    let small_cut = params.m * (config.n as f64).ln();

    // One sampling pass: per-r pooled counts and the middle-window flag.
    let per_trial: Vec<(Vec<u64>, bool)> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<(Vec<u64>, bool)> {
            let g = sample_graph(&model, config.n, SeedSpec::new(config.seed, t))?;
            let census = components(&g);
            let mut counts = vec![0u64; (r_hi - r_lo + 1) as usize];
            let mut b = false;
            for &s in &census.sizes {
                if s >= r_lo && s <= r_hi {
                    counts[(s - r_lo) as usize] += s;
                }
                let sf = s as f64;
                if sf > small_cut && sf <= giant_cut {
                    b = true;
                }
            }
            Ok((counts, b))
        })
        .collect::<Result<Vec<_>>>()?;

    let nf = config.n as f64;
    let severity = if config.n >= ASYMPTOTIC_N {
        BoundStatus::Failure
    } else {
        BoundStatus::Warning
    };
    let mut rows = Vec::new();
    let (mut failures, mut warnings) = (0u64, 0u64);
    for (idx, r) in (r_lo..=r_hi).enumerate() {
        let fractions: Vec<f64> = per_trial.iter().map(|(c, _)| c[idx] as f64 / nf).collect();
        let s = summarize(fractions.iter().copied(), config.trials);
        let support: u64 = per_trial.iter().map(|(c, _)| c[idx]).sum();
        let observations = support / r; // each size-r component adds exactly r
        let upper = component_size_upper(params, r)?;
        let lower = component_size_lower(params, r)?;
        let status = if observations < MIN_SUPPORT {
            BoundStatus::Skipped
        } else if s.mean + s.half_width_95 <= upper && s.mean - s.half_width_95 >= lower {
            BoundStatus::Pass
        } else {
            match severity {
                BoundStatus::Failure => failures += 1,
                _ => warnings += 1,
            }
            severity
        };
        rows.push(BoundCheckRow {
            r,
            support,
            observations,
            mean: s.mean,
            half_width_95: s.half_width_95,
            lower,
            upper,
            status,
        });
    }

    let b_count = per_trial.iter().filter(|(_, b)| *b).count() as f64;
    let b_freq = b_count / config.trials as f64;
    let b_bound = midsize_bound(params, config.n).ok();
    let b_pass = match b_bound {
        Some(bound) => {
            let sigma = (b_freq * (1.0 - b_freq) / config.trials as f64).sqrt();
            b_freq <= bound + 3.0 * sigma
        }
        None => true, // vacuous exponent: nothing to check
    };
    Ok(BoundCheckReport {
        rows,
        failures,
        warnings,
        b_freq,
        b_bound,
        b_pass,
    })
}

// ---------------------------------------------------------------------------
// Layer moments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerCheckRow {
    pub t: u32,
    pub mean: f64,
    pub mean_sigma: f64,
    pub mean_bound: f64,
    pub second_moment: f64,
    pub second_moment_sigma: f64,
    pub second_moment_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerCheckReport {
    pub c_u: f64,
    pub rows: Vec<LayerCheckRow>,
    pub all_pass: bool,
}

/// Compare empirical BFS layer moments from vertex 1 against the geometric
/// envelopes: for each depth t the mean layer size is tested against C_u^t
/// and the second moment against C_u^t / (1 - C_u), each with a
/// three-standard-error allowance. Each trial samples a fresh graph and
/// profiles vertex 1. Requires a subcritical ceiling C_u < 1.
pub fn layer_check(config: &ExperimentConfig, t_max: u32) -> Result<LayerCheckReport> {
    config.validate()?;
    if t_max < 1 {
        return Err(Error::BadParam {
            name: "t_max",
            value: t_max as f64,
            requirement: ">= 1",
        });
    }
    let model = config.model.to_model()?;
    let (_, p_u) = model.band(config.n)?;
    let c_u = p_u * config.n as f64;
    if !(c_u < 1.0) {
        return Err(Error::BadParam {
            name: "C_u",
            value: c_u,
            requirement: "< 1: layer bounds are vacuous at or above the critical ceiling",
        });
    }

    let per_trial: Vec<Vec<u64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let g = sample_graph(&model, config.n, SeedSpec::new(config.seed, t))?;
            let profile = bfs_profile(&g, 1)?;
            let mut layers = vec![0u64; t_max as usize + 1];
            for (depth, &count) in profile.layer_sizes.iter().enumerate() {
                if depth <= t_max as usize {
                    layers[depth] = count;
                }
            }
            Ok(layers)
        })
        .collect::<Result<Vec<_>>>()?;

    let trials = config.trials;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for t in 1..=t_max {
        let values: Vec<f64> = per_trial.iter().map(|l| l[t as usize] as f64).collect();
        let squares: Vec<f64> = values.iter().map(|x| x * x).collect();
        let sm = summarize(values.iter().copied(), trials);
        let sq = summarize(squares.iter().copied(), trials);
        let (mean_bound, second_moment_bound) = layer_moment_bounds(c_u, t)?;
        let mean_sigma = (sm.variance / trials as f64).sqrt();
        let sq_sigma = (sq.variance / trials as f64).sqrt();
        let pass = sm.mean <= mean_bound + 3.0 * mean_sigma
            && sq.mean <= second_moment_bound + 3.0 * sq_sigma;
        all_pass &= pass;
        rows.push(LayerCheckRow {
            t,
            mean: sm.mean,
            mean_sigma,
            mean_bound,
            second_moment: sq.mean,
            second_moment_sigma: sq_sigma,
            second_moment_bound,
            pass,
        });
    }
    Ok(LayerCheckReport {
        c_u,
        rows,
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// Coupling experiment
// ---------------------------------------------------------------------------

/// Frequencies from repeated coupled-triple sampling of the two-class
/// model with alpha = 16/sqrt(n) and n^2/8 boosted pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingReport {
    pub c: f64,
    pub n: u64,
    pub trials: u64,
    /// Frequency of R_dif in [sqrt(n), 3 sqrt(n)] with its half-width.
    pub r_dif_freq: f64,
    pub r_dif_half_width: f64,
    pub r_dif_window: (f64, f64),
    pub mean_r_dif: f64,
    /// Frequency of max degree <= 3 ln n with its half-width.
    pub max_degree_freq: f64,
    pub max_degree_half_width: f64,
    pub degree_threshold: f64,
    /// Frequency of some component size in [2 sqrt(n)/(3 ln n), 6 sqrt(n)].
    pub sandwich_freq: f64,
    pub sandwich_half_width: f64,
    pub sandwich_window: (f64, f64),
    pub metadata: RunMetadata,
}

/// Sample coupled triples of the canonical two-class model and record how
/// often (i) the number of boost-only edges R_dif lands in
/// [sqrt(n), 3 sqrt(n)], (ii) the max degree of the middle graph stays
/// under 3 ln n, and (iii) some component of the middle graph has size in
/// the sandwich window [2 sqrt(n) / (3 ln n), 6 sqrt(n)].
pub fn coupling_experiment(c: f64, n: u64, trials: u64, seed: u64) -> Result<CouplingReport> {
    let started = Instant::now();
    if trials < 1 {
        return Err(Error::BadParam {
            name: "trials",
            value: trials as f64,
            requirement: ">= 1",
        });
    }
    let model = EdgeProbModel::two_class(c, AlphaSequence::InverseSqrt { coefficient: 16.0 })?;
    let sqrt_n = (n as f64).sqrt();
    let ln_n = (n as f64).ln();
    let r_dif_window = (sqrt_n, 3.0 * sqrt_n);
    let degree_threshold = 3.0 * ln_n;
    let sandwich_window = (2.0 * sqrt_n / (3.0 * ln_n), 6.0 * sqrt_n);

    let per_trial: Vec<(u64, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, bool, bool)> {
            let triple = sample_coupled(&model, n, SeedSpec::new(seed, t))?;
            let r_dif = count_dif(&triple);
            let deg_ok = max_degree(&triple.g) as f64 <= degree_threshold;
            let census = components(&triple.g);
            let sandwich = census.sizes.iter().any(|&s| {
                let sf = s as f64;
                sf >= sandwich_window.0 && sf <= sandwich_window.1
            });
            Ok((r_dif, deg_ok, sandwich))
        })
        .collect::<Result<Vec<_>>>()?;

    let tf = trials as f64;
    let freq_hw = |count: u64| -> (f64, f64) {
        let f = count as f64 / tf;
        (f, Z_95 * (f * (1.0 - f) / tf).sqrt())
    };
    let in_window = per_trial
        .iter()
        .filter(|(r, _, _)| {
            let rf = *r as f64;
            rf >= r_dif_window.0 && rf <= r_dif_window.1
        })
        .count() as u64;
    let (r_dif_freq, r_dif_half_width) = freq_hw(in_window);
    let (max_degree_freq, max_degree_half_width) =
        freq_hw(per_trial.iter().filter(|(_, d, _)| *d).count() as u64);
    let (sandwich_freq, sandwich_half_width) =
        freq_hw(per_trial.iter().filter(|(_, _, s)| *s).count() as u64);
    let mean_r_dif = per_trial.iter().map(|(r, _, _)| *r as f64).sum::<f64>() / tf;

    Ok(CouplingReport {
        c,
        n,
        trials,
        r_dif_freq,
        r_dif_half_width,
        r_dif_window,
        mean_r_dif,
        max_degree_freq,
        max_degree_half_width,
        degree_threshold,
        sandwich_freq,
        sandwich_half_width,
        sandwich_window,
        metadata: RunMetadata::capture(seed, started),
    })
}
