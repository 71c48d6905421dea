//! `repeaterlab`: link analytics and repeater-chain Monte-Carlo from the
//! command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 simulation
//! failure.

mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use manifest::{manifest_path, RunManifest};
use repeaterlab::probe_model::{self, optimize_distinguishability};
use repeaterlab::repeater_sim::{self, sweep_epsilon, ChainConfig};

#[derive(Parser)]
#[command(name = "repeaterlab", version, about = "Hybrid quantum repeater analytics and chain simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal distinguishability, fidelity and success probability over a
    /// range of postselection windows.
    Analyze(AnalyzeArgs),
    /// Simulate one chain and write the full result as JSON.
    Simulate(SimulateArgs),
    /// Simulate one chain per gate-loss value and write a CSV row for each.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Segment power transmission; defaults to 10 km of 0.17 dB/km fibre.
    #[arg(long)]
    eta_sq: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pc_min: f64,
    #[arg(long, default_value_t = 1.5)]
    pc_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 30)]
    pc_steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChainArgs {
    /// JSON chain configuration.
    #[arg(long, required_unless_present = "dump_defaults")]
    config: Option<PathBuf>,
    /// Print the fully resolved configuration and exit. Without `--config`
    /// this prints the defaults for a 1280 km chain of 10 km segments.
    #[arg(long)]
    dump_defaults: bool,
    #[arg(long, required_unless_present = "dump_defaults")]
    seed: Option<u64>,
    #[arg(long, required_unless_present = "dump_defaults")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Comma-separated gate-loss values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    epsilons: Vec<f64>,
    /// Independent runs per value; statistics pool all of them.
    #[arg(long, default_value_t = 1)]
    runs: usize,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Io(String),
    Simulation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
            Failure::Simulation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Io(m) | Failure::Simulation(m) => m,
        }
    }
}

impl From<repeaterlab::Error> for Failure {
    fn from(e: repeaterlab::Error) -> Self {
        match e {
            repeaterlab::Error::Deadlock { .. } => Failure::Simulation(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load_config(path: &Path) -> Outcome<ChainConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_error(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

fn csv_writer(path: &Path) -> Outcome<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> Outcome {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn finish(mut manifest: RunManifest, out: &Path) -> Outcome {
    manifest.outputs.push(out.to_path_buf());
    write_json(&manifest_path(out), &manifest)
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serialises")
}

fn ensure_finite(label: &str, values: &[f64]) -> Outcome {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::Simulation(format!("{label} produced a non-finite value: {values:?}")))
    }
}

#[derive(Serialize)]
struct AnalyzeRow {
    p_c: f64,
    d_opt: f64,
    f_max: f64,
    p_s: f64,
}

#[derive(Serialize)]
struct AnalyzeSettings {
    eta_sq: f64,
    pc_min: f64,
    pc_max: f64,
    pc_steps: usize,
}

fn analyze(args: &AnalyzeArgs) -> Outcome {
    let started = Utc::now();
    let eta_sq = args.eta_sq.unwrap_or_else(|| probe_model::fiber_transmission(10.0, 0.17));
    if !(eta_sq > 0.0 && eta_sq <= 1.0) {
        return Err(Failure::Invalid(format!("--eta-sq must lie in (0, 1], got {eta_sq}")));
    }
    let (lo, hi, n) = (args.pc_min, args.pc_max, args.pc_steps);
    if !(lo > 0.0 && hi.is_finite() && lo <= hi) || n == 0 || (n > 1 && lo == hi) {
        return Err(Failure::Invalid(format!(
            "invalid window grid: need 0 < pc-min < pc-max and pc-steps >= 1 (got {lo}, {hi}, {n})"
        )));
    }
    let rows = (0..n)
        .map(|i| {
            let p_c = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            let point = optimize_distinguishability(p_c, eta_sq.sqrt())?;
            Ok(AnalyzeRow { p_c, d_opt: point.d_opt, f_max: point.f_max, p_s: point.p_s })
        })
        .collect::<Outcome<Vec<_>>>()?;
    for r in &rows {
        ensure_finite("analyze", &[r.p_c, r.d_opt, r.f_max, r.p_s])?;
    }
    write_rows(&args.out, &rows)?;
    let settings = AnalyzeSettings { eta_sq, pc_min: lo, pc_max: hi, pc_steps: n };
    finish(RunManifest::new("analyze", None, to_value(&settings), started), &args.out)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

/// Loads the config, or prints it and returns `None` for `--dump-defaults`.
fn resolve_chain(args: &ChainArgs) -> Outcome<Option<(ChainConfig, PathBuf)>> {
    let config = match &args.config {
        Some(path) => load_config(path)?,
        None => ChainConfig::new(1280.0, 10.0)?,
    };
    if args.dump_defaults {
        let text = serde_json::to_string_pretty(&config).expect("config serialises");
        println!("{text}");
        return Ok(None);
    }
    let seed = args.seed.expect("clap requires --seed");
    let out = args.out.clone().expect("clap requires --out");
    Ok(Some((config.with_seed(seed), out)))
}

fn simulate(args: &SimulateArgs) -> Outcome {
    let started = Utc::now();
    let Some((config, out)) = resolve_chain(&args.chain)? else {
        return Ok(());
    };
    let seed = config.rng_seed;
    let result = repeater_sim::run(config.clone())?;
    write_json(&out, &result)?;
    finish(RunManifest::new("simulate", Some(seed), to_value(&config), started), &out)?;
    println!(
        "rate_hz={:.4} fidelity={:.6}±{:.6}",
        result.rate_hz, result.mean_final_fidelity, result.std_final_fidelity
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    rate_hz: f64,
    rate_std_hz: f64,
    fidelity: f64,
    fidelity_std: f64,
    seed: u64,
}

fn sweep(args: &SweepArgs) -> Outcome {
    let started = Utc::now();
    if !args.chain.dump_defaults {
        if args.epsilons.is_empty() {
            return Err(Failure::Invalid("--epsilons needs at least one value".into()));
        }
        if let Some(bad) = args.epsilons.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Failure::Invalid(format!("epsilon must lie in [0, 1), got {bad}")));
        }
        if args.runs == 0 {
            return Err(Failure::Invalid("--runs must be at least 1".into()));
        }
    }
    let Some((config, out)) = resolve_chain(&args.chain)? else {
        return Ok(());
    };
    let points = sweep_epsilon(&config, &args.epsilons, args.runs)?;
    let rows: Vec<SweepRow> = points
        .iter()
        .map(|p| SweepRow {
            epsilon: p.epsilon,
            rate_hz: p.rate_hz,
            rate_std_hz: p.rate_std_hz,
            fidelity: p.mean_final_fidelity,
            fidelity_std: p.std_final_fidelity,
            seed: p.seed,
        })
        .collect();
    for r in &rows {
        ensure_finite("sweep", &[r.rate_hz, r.rate_std_hz, r.fidelity, r.fidelity_std])?;
    }
    write_rows(&out, &rows)?;
    let mut settings = to_value(&config);
    settings["sweep_epsilons"] = to_value(&args.epsilons);
    settings["sweep_runs_per_point"] = to_value(&args.runs);
    finish(RunManifest::new("sweep", Some(config.rng_seed), settings, started), &out)?;
    for r in &rows {
        println!("epsilon={} rate_hz={:.4} fidelity={:.6}±{:.6}", r.epsilon, r.rate_hz, r.fidelity, r.fidelity_std);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
