//! `ergraph`: command-line front end for the random-graph laboratory.
//! Machine output (CSV/JSON) goes to standard out or `--out`; a one-line
//! metadata block with the fully resolved configuration goes to standard
//! error so pipelines can log provenance without parsing it back out.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ergraph::montecarlo::{
    bound_check, coupling_experiment, run as run_experiment, ExperimentConfig,
};
use ergraph::oracle::{exact_component_law, ProbTable};
use ergraph::probmodel::{AlphaDescriptor, ModelDescriptor};
use ergraph::sampler::{sample_graph, SeedSpec, RNG_NAME};
use ergraph::theory::{delta, q_fixed_point, q_series, solve_c0, TheoryParams};

const SEED_ENV: &str = "ERGRAPH_SEED";

/// Errors in how the tool was invoked (bad flag combinations, malformed
/// environment); these exit with status 2 like clap's own parse errors,
/// while runtime failures exit 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage_error(msg: String) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg))
}

#[derive(Parser)]
#[command(name = "ergraph", version, about = "Sparse random-graph sampling and phase-transition analysis")]
struct Cli {
    /// Cap trial parallelism (default: all cores; 1 = strictly serial).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the extinction series, fixed point, and decay rate.
    Theory(TheoryArgs),
    /// Sample one graph and write its edge list.
    Sample(SampleArgs),
    /// Exact component-size law of a small probability table.
    Oracle(OracleArgs),
    /// Repeated-trial experiment with event flags and histograms.
    Experiment(ExperimentArgs),
    /// Coupled-triple experiment on the two-class model.
    Coupling(CouplingArgs),
    /// Run the full verification battery.
    Verify,
}

#[derive(Args)]
struct TheoryArgs {
    /// Single evaluation point.
    #[arg(long = "C", value_name = "C")]
    c: Option<f64>,
    /// Evaluation grid "lo:hi:step" (inclusive).
    #[arg(long, conflicts_with = "c")]
    grid: Option<String>,
    /// Series / fixed-point tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SampleArgs {
    /// Mean-degree parameter.
    #[arg(long = "C", value_name = "C")]
    c: f64,
    #[arg(long)]
    n: u64,
    /// Band half-width coefficient a: alpha_n = a / sqrt(n) (two-class
    /// model); omitted = homogeneous.
    #[arg(long)]
    alpha_coef: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// RNG stream id (e.g. a trial index).
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// JSON file: {"n": 3, "probs": [p12, p13, p23]} in colex pair order.
    #[arg(long)]
    table: PathBuf,
    /// Vertex whose component-size law to compute (1-based).
    #[arg(long, default_value_t = 1)]
    vertex: u64,
    /// Admit n = 7 (2^21 configurations).
    #[arg(long)]
    allow_seven: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ExperimentArgs {
    /// ExperimentConfig JSON file; inline flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "C", value_name = "C")]
    c: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "M", value_name = "M")]
    m: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Two-class band coefficient (alpha_n = a / sqrt(n)).
    #[arg(long)]
    alpha_coef: Option<f64>,
    /// Directory for summary.json, flags.csv, census.csv, histogram.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also judge the empirical size law against the analytic envelope
    /// (exit 1 on any hard failure).
    #[arg(long)]
    bound_check: bool,
    /// Envelope slack parameter for --bound-check.
    #[arg(long, default_value_t = 0.05)]
    omega: f64,
    /// Largest component size judged by --bound-check.
    #[arg(long, default_value_t = 20)]
    r_max: u64,
}

#[derive(Args)]
struct CouplingArgs {
    #[arg(long = "C", value_name = "C")]
    c: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        // Ignore the error if a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<UsageError>().is_some() { 2 } else { 1 };
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Theory(args) => cmd_theory(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Coupling(args) => cmd_coupling(args),
        Command::Verify => cmd_verify(),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// Seed precedence: explicit flag, then config-file value, then the
/// ERGRAPH_SEED environment variable, then 0.
fn resolve_seed(flag: Option<u64>, config_value: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = config_value {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw.parse::<u64>().map_err(|_| {
            usage_error(format!("{SEED_ENV} must be an unsigned integer, got {raw:?}"))
        }),
        Err(_) => Ok(0),
    }
}

fn emit_metadata(command: &str, seed: Option<u64>, resolved: Value) {
    let block = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "rng": RNG_NAME,
        "seed": seed,
        "command": command,
        "resolved": resolved,
    });
    eprintln!("{block}");
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn model_descriptor(c: f64, alpha_coef: Option<f64>) -> ModelDescriptor {
    match alpha_coef {
        None => ModelDescriptor::Homogeneous { c },
        Some(coef) => ModelDescriptor::TwoClass {
            c,
            alpha: AlphaDescriptor::InverseSqrt { coef },
            full_count: None,
        },
    }
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:hi:step, got {spec:?}");
    }
    let lo: f64 = parts[0].parse().context("grid lo")?;
    let hi: f64 = parts[1].parse().context("grid hi")?;
    let step: f64 = parts[2].parse().context("grid step")?;
    if !(step > 0.0) || hi < lo {
        bail!("grid needs step > 0 and hi >= lo");
    }
    let count = ((hi - lo) / step).round() as u64;
    let mut values = Vec::new();
    for k in 0..=count {
        let c = lo + k as f64 * step;
        if c <= hi + step * 1e-9 {
            values.push(c);
        }
    }
    Ok(values)
}

fn cmd_theory(args: TheoryArgs) -> Result<u8> {
    let points = match (&args.c, &args.grid) {
        (Some(c), None) => vec![*c],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => return Err(usage_error("theory needs --C or --grid".into())),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let mut rows = Vec::new();
    for &c in &points {
        let series = q_series(c, args.tol)?;
        let fixed = q_fixed_point(c, args.tol)?;
        rows.push(json!({
            "C": c,
            "q_series": series.value,
            "q_fixed_point": fixed,
            "delta": delta(c)?,
            "series_converged": series.converged,
        }));
    }
    let content = match args.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&rows)?),
        Format::Csv => {
            let mut s = String::from("C,q_series,q_fixed_point,delta,series_converged\n");
            for row in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row["C"],
                    row["q_series"],
                    row["q_fixed_point"],
                    row["delta"],
                    u8::from(row["series_converged"].as_bool().unwrap()),
                ));
            }
            s
        }
    };
    write_output(args.out.as_deref(), &content)?;
    emit_metadata(
        "theory",
        None,
        json!({"points": points, "tol": args.tol, "C0": solve_c0()}),
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

fn cmd_sample(args: SampleArgs) -> Result<u8> {
    let seed = resolve_seed(args.seed, None)?;
    let descriptor = model_descriptor(args.c, args.alpha_coef);
    let model = descriptor.to_model()?;
    let spec = SeedSpec::new(seed, args.stream);
    let g = sample_graph(&model, args.n, spec)?;
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf, spec)?;
    write_output(args.out.as_deref(), std::str::from_utf8(&buf)?)?;
    emit_metadata(
        "sample",
        Some(seed),
        json!({
            "model": descriptor,
            "n": args.n,
            "stream": args.stream,
            "edges": g.edge_count(),
        }),
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let raw = fs::read_to_string(&args.table)
        .with_context(|| format!("reading {}", args.table.display()))?;
    let value: Value = serde_json::from_str(&raw).context("table JSON")?;
    let n = value["n"]
        .as_u64()
        .context("table JSON needs an integer \"n\"")?;
    let probs: Vec<f64> = value["probs"]
        .as_array()
        .context("table JSON needs a \"probs\" array")?
        .iter()
        .map(|p| p.as_f64().context("probs must be numbers"))
        .collect::<Result<_>>()?;
    let table = if args.allow_seven {
        ProbTable::new_with_n7_override(n, probs)?
    } else {
        ProbTable::new(n, probs)?
    };
    let law = exact_component_law(&table, args.vertex)?;
    let content = match args.format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "n": n,
                "vertex": args.vertex,
                "law": law,
            }))?
        ),
        Format::Csv => {
            let mut s = String::from("r,probability\n");
            for (i, p) in law.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, p));
            }
            s
        }
    };
    write_output(args.out.as_deref(), &content)?;
    emit_metadata(
        "oracle",
        None,
        json!({"n": n, "vertex": args.vertex, "mass": law.iter().sum::<f64>()}),
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn cmd_experiment(args: ExperimentArgs) -> Result<u8> {
    // Base config from file (if any), then flag overrides.
    let (mut config, file_seed) = match &args.config {
        Some(path) => {
            let raw = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let value: Value = serde_json::from_str(&raw).context("config JSON")?;
            let has_seed = value.get("seed").is_some();
            let cfg: ExperimentConfig =
                serde_json::from_value(value).context("config JSON shape")?;
            let file_seed = has_seed.then_some(cfg.seed);
            (cfg, file_seed)
        }
        None => {
            let c = args
                .c
                .ok_or_else(|| usage_error("experiment needs --C or --config".into()))?;
            let n = args
                .n
                .ok_or_else(|| usage_error("experiment needs --n or --config".into()))?;
            let trials = args.trials.unwrap_or(100);
            (
                ExperimentConfig::new(model_descriptor(c, args.alpha_coef), n, trials),
                None,
            )
        }
    };
    if args.config.is_some() {
        if let Some(c) = args.c {
            config.model = model_descriptor(c, args.alpha_coef);
        }
        if let Some(n) = args.n {
            config.n = n;
        }
        if let Some(trials) = args.trials {
            config.trials = trials;
        }
    }
    if let Some(epsilon) = args.epsilon {
        config.epsilon = epsilon;
    }
    if let Some(gamma) = args.gamma {
        config.gamma = gamma;
    }
    if let Some(m) = args.m {
        config.m = m;
    }
    config.seed = resolve_seed(args.seed, file_seed)?;

    let summary = run_experiment(&config)?;
    emit_metadata(
        "experiment",
        Some(config.seed),
        serde_json::to_value(&config)?,
    );

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        if let Some(csv) = &summary.flags_csv {
            fs::write(dir.join("flags.csv"), csv)?;
        }
        if let Some(csv) = &summary.census_csv {
            fs::write(dir.join("census.csv"), csv)?;
        }
        if let Some(hist) = &summary.histogram {
            let mut s = String::from("size,vertex_count\n");
            for (size, count) in hist {
                s.push_str(&format!("{size},{count}\n"));
            }
            fs::write(dir.join("histogram.csv"), s)?;
        }
    } else {
        let content = match args.format {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&summary)?),
            Format::Csv => {
                let mut s = String::from("stat,mean,variance,half_width_95\n");
                for (name, stat) in &summary.stats {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        name, stat.mean, stat.variance, stat.half_width_95
                    ));
                }
                s
            }
        };
        write_output(None, &content)?;
    }

    if args.bound_check {
        let params = TheoryParams::new(
            config.model.to_model()?.c(),
            config.epsilon,
            args.omega,
            config.gamma,
            config.m,
        )?;
        let report = bound_check(&config, &params, 1..=args.r_max)?;
        let rendered = serde_json::to_string_pretty(&report)?;
        match &args.out {
            Some(dir) => fs::write(dir.join("bounds.json"), rendered)?,
            None => println!("{rendered}"),
        }
        if !report.all_pass() {
            eprintln!(
                "bound check: {} hard failures (mid-window pass: {})",
                report.failures, report.b_pass
            );
            return Ok(1);
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// coupling
// ---------------------------------------------------------------------------

fn cmd_coupling(args: CouplingArgs) -> Result<u8> {
    let seed = resolve_seed(args.seed, None)?;
    let report = coupling_experiment(args.c, args.n, args.trials, seed)?;
    let content = match args.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let flat: BTreeMap<&str, f64> = BTreeMap::from([
                ("r_dif_freq", report.r_dif_freq),
                ("r_dif_half_width", report.r_dif_half_width),
                ("r_dif_window_lo", report.r_dif_window.0),
                ("r_dif_window_hi", report.r_dif_window.1),
                ("mean_r_dif", report.mean_r_dif),
                ("max_degree_freq", report.max_degree_freq),
                ("max_degree_half_width", report.max_degree_half_width),
                ("degree_threshold", report.degree_threshold),
                ("sandwich_freq", report.sandwich_freq),
                ("sandwich_half_width", report.sandwich_half_width),
                ("sandwich_window_lo", report.sandwich_window.0),
                ("sandwich_window_hi", report.sandwich_window.1),
            ]);
            let mut s = String::from("field,value\n");
            for (k, v) in flat {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
    };
    write_output(args.out.as_deref(), &content)?;
    emit_metadata(
        "coupling",
        Some(seed),
        json!({"C": args.c, "n": args.n, "trials": args.trials}),
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify() -> Result<u8> {
    let outcomes = ergraph::verify::run_all();
    let mut all = true;
    for outcome in &outcomes {
        println!("{}", outcome.line());
        all &= outcome.passed;
    }
    println!("overall: {}", if all { "PASS" } else { "FAIL" });
    emit_metadata("verify", None, json!({"checks": outcomes.len(), "passed": all}));
    Ok(if all { 0 } else { 1 })
}
