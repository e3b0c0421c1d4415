//! resistnet: effective-resistance computations on weighted networks.
//!
//! Every subcommand is a thin adapter over the library; output is CSV on
//! stdout (header always emitted) or a single JSON object with `--json`.
//! A run manifest goes to stderr as one JSON line. Exit codes: 0 success,
//! 1 validation failure, 2 non-convergence, 64 usage error.

mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use resistnet_core::embedding;
use resistnet_core::error::Error;
use resistnet_core::limits::{self, LimitEstimate};
use resistnet_core::models::{ball_exhaustion, generate_from_str, NetworkSource};
use resistnet_core::network::{load_network, validate_text, Network};
use resistnet_core::resistance;
use resistnet_core::trace;
use resistnet_core::walk::{self, WalkConfig, RNG_ALGORITHM};

use output::{fmt_float, CsvWriter};

#[derive(Parser)]
#[command(name = "resistnet", version, about = "Effective-resistance metrics on weighted networks")]
struct Cli {
    /// Emit a single JSON object instead of CSV
    #[arg(long, global = true)]
    json: bool,

    /// Print floats with 17 significant digits instead of 12
    #[arg(long, global = true)]
    full_precision: bool,

    /// Cap worker threads (RESISTNET_THREADS as fallback); results do not
    /// depend on this
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network file against the data-model invariants
    Validate {
        /// Edge-list file
        file: String,
    },
    /// Effective resistance between vertex pairs of a finite network
    Resistance {
        /// Edge-list file or model spec (name:params)
        input: String,
        /// Pairs like "a,b;c,d"
        #[arg(long)]
        pairs: String,
        /// Emit all six formulations per pair
        #[arg(long)]
        report: bool,
    },
    /// Resistance limits over a ball exhaustion of an infinite model
    Limits {
        /// Model spec (name:params) or edge-list file
        input: String,
        x: String,
        y: String,
        #[arg(long, value_enum, default_value_t = MetricKind::Free)]
        metric: MetricKind,
        /// Radii as "1..30" or "2,4,8"
        #[arg(long, default_value = "1..40")]
        radii: String,
        #[arg(long, default_value_t = limits::DEFAULT_TOL)]
        tol: f64,
    },
    /// Reduce a network: Schur trace onto kept vertices, or one classical
    /// transform
    Reduce {
        /// Edge-list file
        file: String,
        /// Vertices to keep, comma-separated
        #[arg(long, conflicts_with = "transform")]
        keep: Option<String>,
        /// One of series:<z>, wye-delta:<t>, parallel
        #[arg(long)]
        transform: Option<String>,
    },
    /// Random-walk computations
    Walk {
        /// Edge-list file or finite model spec
        input: String,
        #[command(subcommand)]
        job: WalkJob,
    },
    /// Embed a resistance metric into coordinates
    Embed {
        /// Edge-list file or model spec
        input: String,
        #[arg(long, value_enum)]
        metric: Option<EmbedMetric>,
        /// Sample size for infinite models (first vertices in enumeration)
        #[arg(long, default_value_t = 10)]
        sample: usize,
        #[arg(long, default_value = "1..40")]
        radii: String,
        #[arg(long, default_value_t = limits::DEFAULT_TOL)]
        tol: f64,
        /// Write coordinates to a file instead of stdout
        #[arg(long)]
        out: Option<String>,
    },
    /// Compare effective resistance against the geodesic distance
    Compare {
        /// Edge-list file or model spec
        input: String,
        #[arg(long)]
        pairs: String,
        #[arg(long, default_value = "1..40")]
        radii: String,
        #[arg(long, default_value_t = limits::DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Free,
    Wired,
    Harmonic,
    Boundary,
    Trace,
}

impl MetricKind {
    fn name(self) -> &'static str {
        match self {
            MetricKind::Free => "free",
            MetricKind::Wired => "wired",
            MetricKind::Harmonic => "harmonic",
            MetricKind::Boundary => "boundary",
            MetricKind::Trace => "trace",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedMetric {
    Finite,
    Free,
    Wired,
}

#[derive(Args, Clone, Copy)]
struct WalkOpts {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    episodes: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
}

#[derive(Subcommand)]
enum WalkJob {
    /// Estimate P[a -> b]: reach b before returning to a
    Escape {
        a: String,
        b: String,
        #[command(flatten)]
        opts: WalkOpts,
    },
    /// Exact hitting probabilities of reaching targets before avoid
    Exact {
        /// Target vertices, comma-separated
        targets: String,
        #[arg(long, default_value = "")]
        avoid: String,
    },
    /// Path-integral identity: exact and Monte-Carlo 1/(c(x) P[x -> y])
    PathIntegral {
        x: String,
        y: String,
        #[command(flatten)]
        opts: WalkOpts,
    },
    /// Check v_x = R(o, x) u_x on a finite network
    DipoleCheck { x: String },
    /// Experimental estimator of the kernel value v_x(y) from truncated
    /// walks; no correctness claim
    FreeKernel {
        x: String,
        y: String,
        /// Required acknowledgment that this estimator is experimental
        #[arg(long)]
        experimental: bool,
        #[arg(long, default_value = "1..12")]
        radii: String,
        #[command(flatten)]
        opts: WalkOpts,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 64 } else { 0 });
        }
    };
    let started = Instant::now();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("RESISTNET_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    match run(&cli, threads) {
        Ok((manifest, code)) => {
            let mut manifest = manifest;
            manifest["timing_ms"] = json!(started.elapsed().as_millis() as u64);
            eprintln!("{manifest}");
            code
        }
        Err(err) => {
            eprintln!("resistnet: {err}");
            let code = match err {
                Error::NonConvergence(_) => 2,
                Error::Parse { .. } | Error::Validation { .. } => 1,
                Error::UnknownModel(_) | Error::UnknownVertex(_) | Error::InvalidParameter(_)
                | Error::Precondition(_) => 64,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

type RunOutcome = Result<(serde_json::Value, ExitCode), Error>;

fn run(cli: &Cli, threads: usize) -> RunOutcome {
    let sig = if cli.full_precision { 17 } else { 12 };
    match &cli.command {
        Command::Validate { file } => cmd_validate(cli, file),
        Command::Resistance {
            input,
            pairs,
            report,
        } => cmd_resistance(cli, sig, input, pairs, *report),
        Command::Limits {
            input,
            x,
            y,
            metric,
            radii,
            tol,
        } => cmd_limits(cli, sig, input, x, y, *metric, radii, *tol),
        Command::Reduce {
            file,
            keep,
            transform,
        } => cmd_reduce(cli, file, keep.as_deref(), transform.as_deref()),
        Command::Walk { input, job } => cmd_walk(cli, sig, input, job, threads),
        Command::Embed {
            input,
            metric,
            sample,
            radii,
            tol,
            out,
        } => cmd_embed(cli, sig, input, *metric, *sample, radii, *tol, out.as_deref()),
        Command::Compare {
            input,
            pairs,
            radii,
            tol,
        } => cmd_compare(cli, sig, input, pairs, radii, *tol),
    }
}

fn manifest(cli: &Cli, command: &str, args: serde_json::Value, seed: Option<u64>) -> serde_json::Value {
    json!({
        "command": command,
        "args": args,
        "seed": seed,
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "rng": if seed.is_some() { Some(RNG_ALGORITHM) } else { None },
        "json": cli.json,
        "full_precision": cli.full_precision,
    })
}

/// A file path if it exists on disk, otherwise a model spec.
fn load_source(input: &str) -> Result<NetworkSource, Error> {
    if std::path::Path::new(input).exists() {
        let text = std::fs::read_to_string(input).map_err(|e| Error::Parse {
            line: 0,
            message: format!("{input}: {e}"),
        })?;
        Ok(NetworkSource::Finite(load_network(&text)?))
    } else {
        generate_from_str(input)
    }
}

fn finite_network(input: &str) -> Result<Network, Error> {
    match load_source(input)? {
        NetworkSource::Finite(net) => Ok(net),
        NetworkSource::Infinite(spec) => Err(Error::Precondition(format!(
            "{} is an infinite model; this subcommand needs a finite network",
            spec.name()
        ))),
    }
}

fn parse_pairs(net: &Network, pairs: &str) -> Result<Vec<(usize, usize)>, Error> {
    pairs
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(',')
                .ok_or_else(|| Error::Precondition(format!("bad pair `{pair}`")))?;
            Ok((net.index_of(a.trim())?, net.index_of(b.trim())?))
        })
        .collect()
}

fn parse_id_pairs(pairs: &str) -> Result<Vec<(String, String)>, Error> {
    pairs
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(',')
                .ok_or_else(|| Error::Precondition(format!("bad pair `{pair}`")))?;
            Ok((a.trim().to_string(), b.trim().to_string()))
        })
        .collect()
}

fn parse_radii(spec: &str) -> Result<Vec<u32>, Error> {
    let bad = |m: &str| Error::Precondition(format!("bad radii `{spec}`: {m}"));
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u32 = a.trim().parse().map_err(|_| bad("start"))?;
        let hi: u32 = b.trim().parse().map_err(|_| bad("end"))?;
        if lo < 1 || hi < lo {
            return Err(bad("range"));
        }
        Ok((lo..=hi).collect())
    } else {
        let list: Result<Vec<u32>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
        list.map_err(|_| bad("list"))
    }
}

fn cmd_validate(cli: &Cli, file: &str) -> RunOutcome {
    let text = std::fs::read_to_string(file).map_err(|e| Error::Parse {
        line: 0,
        message: format!("{file}: {e}"),
    })?;
    let report = validate_text(&text)?;
    let passed = report.all_passed();
    if cli.json {
        let checks: Vec<_> = report
            .checks
            .iter()
            .map(|c| {
                json!({"invariant": c.invariant, "passed": c.passed, "witness": c.witness})
            })
            .collect();
        println!("{}", json!({"results": {"checks": checks, "passed": passed}}));
    } else {
        let mut csv = CsvWriter::new(vec!["invariant", "status", "witness"]);
        for c in &report.checks {
            csv.row(vec![
                c.invariant.clone(),
                if c.passed { "pass" } else { "fail" }.into(),
                c.witness.clone().unwrap_or_default(),
            ]);
        }
        print!("{}", csv.finish());
    }
    let code = if passed { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok((
        manifest(cli, "validate", json!({"file": file}), None),
        code,
    ))
}

fn cmd_resistance(cli: &Cli, sig: usize, input: &str, pairs: &str, report: bool) -> RunOutcome {
    let net = finite_network(input)?;
    let pair_idx = parse_pairs(&net, pairs)?;
    let mut rows_json = Vec::new();
    let mut csv = if report {
        CsvWriter::new(vec![
            "x",
            "y",
            "potential_drop",
            "dipole_energy",
            "min_dissipation",
            "reciprocal_min_energy",
            "best_constant",
            "sup_form",
            "consensus",
            "spread",
        ])
    } else {
        CsvWriter::new(vec!["x", "y", "resistance"])
    };
    for &(x, y) in &pair_idx {
        if report {
            let r = resistance::resistance_report(&net, x, y)?;
            csv.row(vec![
                net.id(x).into(),
                net.id(y).into(),
                fmt_float(r.potential_drop, sig),
                fmt_float(r.dipole_energy, sig),
                fmt_float(r.min_dissipation, sig),
                fmt_float(r.reciprocal_min_energy, sig),
                fmt_float(r.best_constant, sig),
                fmt_float(r.sup_form, sig),
                fmt_float(r.consensus, sig),
                fmt_float(r.spread, sig),
            ]);
            rows_json.push(json!({
                "x": net.id(x), "y": net.id(y),
                "potential_drop": r.potential_drop,
                "dipole_energy": r.dipole_energy,
                "min_dissipation": r.min_dissipation,
                "reciprocal_min_energy": r.reciprocal_min_energy,
                "best_constant": r.best_constant,
                "sup_form": r.sup_form,
                "consensus": r.consensus,
                "spread": r.spread,
            }));
        } else {
            let r = resistance::effective_resistance(&net, x, y)?;
            csv.row(vec![net.id(x).into(), net.id(y).into(), fmt_float(r, sig)]);
            rows_json.push(json!({"x": net.id(x), "y": net.id(y), "resistance": r}));
        }
    }
    if cli.json {
        println!("{}", json!({"results": rows_json}));
    } else {
        print!("{}", csv.finish());
    }
    Ok((
        manifest(
            cli,
            "resistance",
            json!({"input": input, "pairs": pairs, "report": report}),
            None,
        ),
        ExitCode::SUCCESS,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_limits(
    cli: &Cli,
    sig: usize,
    input: &str,
    x: &str,
    y: &str,
    metric: MetricKind,
    radii: &str,
    tol: f64,
) -> RunOutcome {
    let source = load_source(input)?;
    let radii = parse_radii(radii)?;
    let exh = ball_exhaustion(&source, &radii)?;
    let est: LimitEstimate = match metric {
        MetricKind::Free => limits::free_resistance(&source, x, y, &exh, tol)?,
        MetricKind::Wired => limits::wired_resistance(&source, x, y, &exh, tol)?,
        MetricKind::Harmonic => limits::harmonic_resistance(&source, x, y, &exh, tol)?,
        MetricKind::Boundary => limits::boundary_resistance(&source, x, y, &exh, tol)?,
        MetricKind::Trace => trace::trace_resistance(&source, x, y, &exh)?,
    };
    if cli.json {
        let values: Vec<_> = est
            .values
            .iter()
            .map(|t| json!({"k": t.k, "radius": t.radius, "value": t.value}))
            .collect();
        println!(
            "{}",
            json!({"results": {
                "metric": est.metric,
                "values": values,
                "converged": est.converged(),
                "estimate": if est.estimate.is_finite() { json!(est.estimate) } else { json!("inf") },
            }})
        );
    } else {
        let mut csv = CsvWriter::new(vec!["k", "radius", "value"]);
        for t in &est.values {
            csv.row(vec![
                t.k.to_string(),
                t.radius.to_string(),
                fmt_float(t.value, sig),
            ]);
        }
        print!("{}", csv.finish());
        println!(
            "# metric={} converged={} estimate={}",
            est.metric,
            est.converged(),
            fmt_float(est.estimate, sig)
        );
    }
    let code = if est.converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    };
    Ok((
        manifest(
            cli,
            "limits",
            json!({"input": input, "x": x, "y": y, "metric": metric.name(),
                   "radii": radii, "tol": tol}),
            None,
        ),
        code,
    ))
}

fn cmd_reduce(cli: &Cli, file: &str, keep: Option<&str>, transform: Option<&str>) -> RunOutcome {
    let net = finite_network(file)?;
    let (reduced, log): (Network, Vec<(String, String)>) = match (keep, transform) {
        (Some(keep), None) => {
            let keep_idx: Vec<usize> = keep
                .split(',')
                .map(|s| net.index_of(s.trim()))
                .collect::<Result<_, _>>()?;
            let traced = trace::schur_trace(&net, &keep_idx)?;
            let log = traced
                .elimination
                .iter()
                .map(|e| (e.vertex.clone(), e.rule.clone()))
                .collect();
            (traced.network, log)
        }
        (None, Some(spec)) => {
            let reduced = match spec.split_once(':') {
                Some(("series", z)) => trace::series_reduce(&net, net.index_of(z.trim())?)?,
                Some(("wye-delta", t)) => trace::wye_delta(&net, net.index_of(t.trim())?)?,
                _ if spec == "parallel" => trace::parallel_merge(&net)?,
                _ => {
                    return Err(Error::Precondition(format!(
                        "unknown transform `{spec}` (series:<z>, wye-delta:<t>, parallel)"
                    )))
                }
            };
            (reduced, Vec::new())
        }
        _ => {
            return Err(Error::Precondition(
                "reduce needs exactly one of --keep or --transform".into(),
            ))
        }
    };
    if cli.json {
        let log: Vec<_> = log
            .iter()
            .map(|(v, r)| json!({"vertex": v, "rule": r}))
            .collect();
        println!(
            "{}",
            json!({"results": {"network": reduced.to_edge_list(), "elimination": log}})
        );
    } else {
        print!("{}", reduced.to_edge_list());
    }
    Ok((
        manifest(
            cli,
            "reduce",
            json!({"file": file, "keep": keep, "transform": transform}),
            None,
        ),
        ExitCode::SUCCESS,
    ))
}

fn cmd_walk(cli: &Cli, sig: usize, input: &str, job: &WalkJob, threads: usize) -> RunOutcome {
    match job {
        WalkJob::Escape { a, b, opts } => {
            let net = finite_network(input)?;
            let cfg = WalkConfig {
                seed: opts.seed,
                episodes: opts.episodes,
                max_steps: opts.max_steps,
                threads,
            };
            let est = walk::simulate_escape(&net, net.index_of(a)?, net.index_of(b)?, &cfg)?;
            if cli.json {
                println!(
                    "{}",
                    json!({"results": {
                        "estimate": est.estimate,
                        "standard_error": est.standard_error,
                        "episodes": est.episodes,
                        "successes": est.successes,
                        "truncated": est.truncated,
                        "rng": RNG_ALGORITHM,
                    }})
                );
            } else {
                let mut csv = CsvWriter::new(vec![
                    "estimate",
                    "standard_error",
                    "episodes",
                    "successes",
                    "truncated",
                    "rng",
                ]);
                csv.row(vec![
                    fmt_float(est.estimate, sig),
                    fmt_float(est.standard_error, sig),
                    est.episodes.to_string(),
                    est.successes.to_string(),
                    est.truncated.to_string(),
                    RNG_ALGORITHM.into(),
                ]);
                print!("{}", csv.finish());
            }
            Ok((
                manifest(
                    cli,
                    "walk escape",
                    json!({"input": input, "a": a, "b": b,
                           "episodes": opts.episodes, "max_steps": opts.max_steps}),
                    Some(opts.seed),
                ),
                ExitCode::SUCCESS,
            ))
        }
        WalkJob::Exact { targets, avoid } => {
            let net = finite_network(input)?;
            let t: Vec<usize> = targets
                .split(',')
                .map(|s| net.index_of(s.trim()))
                .collect::<Result<_, _>>()?;
            let a: Vec<usize> = avoid
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| net.index_of(s.trim()))
                .collect::<Result<_, _>>()?;
            let h = walk::exact_hitting(&net, &t, &a)?;
            if cli.json {
                let rows: Vec<_> = (0..net.len())
                    .map(|v| json!({"vertex": net.id(v), "probability": h.value(v)}))
                    .collect();
                println!("{}", json!({"results": rows}));
            } else {
                let mut csv = CsvWriter::new(vec!["vertex", "probability"]);
                for v in 0..net.len() {
                    csv.row(vec![net.id(v).into(), fmt_float(h.value(v), sig)]);
                }
                print!("{}", csv.finish());
            }
            Ok((
                manifest(
                    cli,
                    "walk exact",
                    json!({"input": input, "targets": targets, "avoid": avoid}),
                    None,
                ),
                ExitCode::SUCCESS,
            ))
        }
        WalkJob::PathIntegral { x, y, opts } => {
            let net = finite_network(input)?;
            let cfg = WalkConfig {
                seed: opts.seed,
                episodes: opts.episodes,
                max_steps: opts.max_steps,
                threads,
            };
            let r = walk::path_integral_resistance(&net, net.index_of(x)?, net.index_of(y)?, &cfg)?;
            if cli.json {
                println!(
                    "{}",
                    json!({"results": {
                        "exact": r.exact,
                        "monte_carlo": r.monte_carlo,
                        "mc_standard_error": r.mc_standard_error,
                        "escape_probability": r.escape_probability,
                    }})
                );
            } else {
                let mut csv = CsvWriter::new(vec![
                    "exact",
                    "monte_carlo",
                    "mc_standard_error",
                    "escape_probability",
                ]);
                csv.row(vec![
                    fmt_float(r.exact, sig),
                    fmt_float(r.monte_carlo, sig),
                    fmt_float(r.mc_standard_error, sig),
                    fmt_float(r.escape_probability, sig),
                ]);
                print!("{}", csv.finish());
            }
            Ok((
                manifest(
                    cli,
                    "walk path-integral",
                    json!({"input": input, "x": x, "y": y, "episodes": opts.episodes}),
                    Some(opts.seed),
                ),
                ExitCode::SUCCESS,
            ))
        }
        WalkJob::DipoleCheck { x } => {
            let net = finite_network(input)?;
            let report = walk::dipole_probability_check(&net, net.index_of(x)?)?;
            if cli.json {
                println!(
                    "{}",
                    json!({"results": {
                        "resistance": report.resistance,
                        "max_deviation": report.max_deviation,
                        "scale": report.scale,
                        "passed": report.passed(),
                    }})
                );
            } else {
                let mut csv =
                    CsvWriter::new(vec!["resistance", "max_deviation", "scale", "passed"]);
                csv.row(vec![
                    fmt_float(report.resistance, sig),
                    fmt_float(report.max_deviation, sig),
                    fmt_float(report.scale, sig),
                    report.passed().to_string(),
                ]);
                print!("{}", csv.finish());
            }
            let code = if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            Ok((
                manifest(cli, "walk dipole-check", json!({"input": input, "x": x}), None),
                code,
            ))
        }
        WalkJob::FreeKernel {
            x,
            y,
            experimental,
            radii,
            opts,
        } => {
            if !experimental {
                return Err(Error::Precondition(
                    "the free-kernel estimator carries no correctness claim; pass --experimental to run it"
                        .into(),
                ));
            }
            let source = load_source(input)?;
            let radii = parse_radii(radii)?;
            let exh = ball_exhaustion(&source, &radii)?;
            let cfg = WalkConfig {
                seed: opts.seed,
                episodes: opts.episodes,
                max_steps: opts.max_steps,
                threads,
            };
            let est = walk::experimental_free_kernel(&source, x, y, &exh, &cfg)?;
            if cli.json {
                println!(
                    "{}",
                    json!({"results": {
                        "mc_value": est.mc_value,
                        "numeric_value": est.numeric_value,
                        "free_resistance": est.free_resistance,
                        "note": "experimental; no correctness claim",
                    }})
                );
            } else {
                let mut csv = CsvWriter::new(vec![
                    "mc_value",
                    "numeric_value",
                    "free_resistance",
                    "note",
                ]);
                csv.row(vec![
                    fmt_float(est.mc_value, sig),
                    fmt_float(est.numeric_value, sig),
                    fmt_float(est.free_resistance, sig),
                    "experimental; no correctness claim".into(),
                ]);
                print!("{}", csv.finish());
            }
            Ok((
                manifest(
                    cli,
                    "walk free-kernel",
                    json!({"input": input, "x": x, "y": y, "experimental": true,
                           "episodes": opts.episodes}),
                    Some(opts.seed),
                ),
                ExitCode::SUCCESS,
            ))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_embed(
    cli: &Cli,
    sig: usize,
    input: &str,
    metric: Option<EmbedMetric>,
    sample: usize,
    radii: &str,
    tol: f64,
    out: Option<&str>,
) -> RunOutcome {
    let source = load_source(input)?;
    let metric = metric.unwrap_or(match &source {
        NetworkSource::Finite(_) => EmbedMetric::Finite,
        NetworkSource::Infinite(_) => EmbedMetric::Free,
    });
    let (ids, r_matrix) = match (&source, metric) {
        (NetworkSource::Finite(net), EmbedMetric::Finite) => {
            let idx: Vec<usize> = (0..net.len().min(sample.max(2))).collect();
            let ids: Vec<String> = idx.iter().map(|&v| net.id(v).to_string()).collect();
            (ids, limits::sample_resistance_matrix(net, &idx)?)
        }
        (NetworkSource::Finite(_), _) => {
            return Err(Error::Precondition(
                "free/wired embedding needs an infinite model; finite networks use --metric finite"
                    .into(),
            ))
        }
        (NetworkSource::Infinite(_), EmbedMetric::Finite) => {
            return Err(Error::Precondition(
                "an infinite model has no finite metric; use --metric free or wired".into(),
            ))
        }
        (NetworkSource::Infinite(spec), m) => {
            let radii = parse_radii(radii)?;
            let exh = ball_exhaustion(&source, &radii)?;
            let keys = spec.enumerate(sample);
            let ids: Vec<String> = keys.iter().map(|&k| spec.id_of(k)).collect();
            let wired = matches!(m, EmbedMetric::Wired);
            let (matrix, converged) =
                limit_matrix(&source, &exh, &ids, tol, wired)?;
            if !converged {
                return Err(Error::NonConvergence(
                    "sample resistance matrix did not converge; raise --radii".into(),
                ));
            }
            (ids, matrix)
        }
    };
    let d = embedding::entrywise_sqrt(&r_matrix);
    let result = embedding::vn_embed(&d, 0)?;
    let mut csv = {
        let mut header = vec!["vertex".to_string()];
        header.extend((1..=result.rank).map(|i| format!("coord_{i}")));
        CsvWriter::new_owned(header)
    };
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(result.coordinates[i].iter().map(|&c| fmt_float(c, sig)));
        csv.row(row);
    }
    let table = csv.finish();
    if cli.json {
        let coords: Vec<_> = ids
            .iter()
            .zip(&result.coordinates)
            .map(|(id, c)| json!({"vertex": id, "coords": c}))
            .collect();
        let payload = json!({"results": {
            "rank": result.rank,
            "max_defect": result.max_defect,
            "max_zero_sum_eigenvalue": result.max_zero_sum_eigenvalue,
            "coordinates": coords,
        }});
        match out {
            Some(path) => std::fs::write(path, payload.to_string()).map_err(io_err)?,
            None => println!("{payload}"),
        }
    } else {
        match out {
            Some(path) => std::fs::write(path, &table).map_err(io_err)?,
            None => print!("{table}"),
        }
        println!(
            "# rank={} max_defect={} max_zero_sum_eigenvalue={}",
            result.rank,
            fmt_float(result.max_defect, sig),
            fmt_float(result.max_zero_sum_eigenvalue, sig)
        );
    }
    Ok((
        manifest(
            cli,
            "embed",
            json!({"input": input, "sample": sample, "radii": radii, "tol": tol, "out": out}),
            None,
        ),
        ExitCode::SUCCESS,
    ))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Solve(format!("io: {e}"))
}

/// Converged sample resistance matrix of an infinite model, free or wired.
fn limit_matrix(
    source: &NetworkSource,
    exh: &resistnet_core::models::Exhaustion,
    ids: &[String],
    tol: f64,
    wired: bool,
) -> Result<(resistnet_core::nalgebra::DMatrix<f64>, bool), Error> {
    use resistnet_core::models::{free_truncation, wired_truncation};
    let mut prev: Option<resistnet_core::nalgebra::DMatrix<f64>> = None;
    let mut stable = 0usize;
    for k in 0..exh.len() {
        let net = if wired {
            wired_truncation(source, exh, k)?.0
        } else {
            free_truncation(source, exh, k)?
        };
        let idx: Result<Vec<usize>, Error> = ids.iter().map(|id| net.index_of(id)).collect();
        let idx = match idx {
            Ok(v) => v,
            Err(_) => continue, // sample not yet inside the ball
        };
        let matrix = limits::sample_resistance_matrix(&net, &idx)?;
        if let Some(p) = &prev {
            let rel = (0..matrix.nrows())
                .flat_map(|i| (0..matrix.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let scale = matrix[(i, j)].abs().max(1e-30);
                    (matrix[(i, j)] - p[(i, j)]).abs() / scale
                })
                .fold(0.0f64, f64::max);
            stable = if rel <= tol { stable + 1 } else { 0 };
        }
        prev = Some(matrix);
        if stable >= limits::CONSECUTIVE_RUNS {
            return Ok((prev.unwrap(), true));
        }
    }
    let covered = limits::source_covered(source, exh);
    Ok((prev.ok_or_else(|| Error::Precondition("sample never fit in the exhaustion".into()))?, covered))
}

fn cmd_compare(cli: &Cli, sig: usize, input: &str, pairs: &str, radii: &str, tol: f64) -> RunOutcome {
    let source = load_source(input)?;
    let id_pairs = parse_id_pairs(pairs)?;
    let mut csv = CsvWriter::new(vec!["x", "y", "resistance", "geodesic", "bound_holds"]);
    let mut rows_json = Vec::new();
    for (x, y) in &id_pairs {
        let (r, d) = match &source {
            NetworkSource::Finite(net) => {
                let ix = net.index_of(x)?;
                let iy = net.index_of(y)?;
                (
                    resistance::effective_resistance(net, ix, iy)?,
                    embedding::geodesic_distance(net, ix, iy),
                )
            }
            NetworkSource::Infinite(_) => {
                let radii = parse_radii(radii)?;
                let exh = ball_exhaustion(&source, &radii)?;
                let est = limits::free_resistance(&source, x, y, &exh, tol)?;
                if !est.converged() {
                    return Err(Error::NonConvergence(format!(
                        "free resistance for {x},{y} did not converge"
                    )));
                }
                let d = embedding::geodesic_distance_source(
                    &source,
                    x,
                    y,
                    *radii.last().unwrap_or(&limits::DEFAULT_RADIUS_BUDGET),
                )?;
                (est.estimate, d)
            }
        };
        let holds = r <= d + 1e-9;
        csv.row(vec![
            x.clone(),
            y.clone(),
            fmt_float(r, sig),
            fmt_float(d, sig),
            holds.to_string(),
        ]);
        rows_json.push(json!({"x": x, "y": y, "resistance": r, "geodesic": d, "bound_holds": holds}));
    }
    if cli.json {
        println!("{}", json!({"results": rows_json}));
    } else {
        print!("{}", csv.finish());
    }
    Ok((
        manifest(
            cli,
            "compare",
            json!({"input": input, "pairs": pairs, "radii": radii, "tol": tol}),
            None,
        ),
        ExitCode::SUCCESS,
    ))
}
