//! `resil`: build zoo functions, run the certification pipelines and write
//! JSON or CSV artifacts.
//!
//! Exit status is 0 on success, 1 when a precondition fails and 2 when a
//! certificate does not hold.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use output::{emit, envelope, render_csv, render_json};

#[derive(Parser, Serialize)]
#[command(name = "resil", version, about = "Approximate resilience toolkit")]
struct Cli {
    #[command(subcommand)]
    #[serde(flatten)]
    command: Command,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Fourier coefficients of a function.
    Spectrum(FnArgs),
    /// Low-degree weight, influences and level weights.
    Stats(StatsArgs),
    /// Both LPs and the duality gap |α + Δ − 1|.
    Duality(DegreeArgs),
    /// Exact resilience check and distance to resilience.
    Resilience(ResilienceArgs),
    /// Best degree-d ℓ1 approximation.
    L1approx(DegreeArgs),
    /// Hypercontractive witness construction over a τ sweep.
    Witness(WitnessArgs),
    /// Repair CycleRun into a balanced 1-resilient function.
    CyclerunBuild(BuildArgs),
    /// Self-composition distance and noise bounds.
    Amplify(AmplifyArgs),
    /// Greedy (n,k,d) design.
    Design(DesignArgs),
    /// Embedded copies of a resilient function along a design.
    OrthoFamily(OrthoArgs),
    /// Low-degree ℓ1 regression learner.
    Learn(LearnArgs),
    /// Statistics and Gaussian estimates for the threshold family f_t.
    FtStats(FtArgs),
    /// Write a function's truth table in the text format.
    Table(FnArgs),
}

#[derive(Args, Serialize)]
struct FnArgs {
    /// Function spec, e.g. `tribes:w=3,s=4` or `file:path=f.txt`.
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    func: String,
}

#[derive(Args, Serialize)]
struct StatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    #[arg(long, default_value_t = 1)]
    d: usize,
}

#[derive(Args, Serialize)]
struct DegreeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    #[arg(long)]
    d: usize,
    /// Largest admissible certificate error.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Serialize)]
struct ResilienceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    #[arg(long)]
    d: usize,
    /// Coefficient tolerance for non-Boolean tables.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Serialize)]
struct WitnessArgs {
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// One or more thresholds, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    tau: Vec<f64>,
}

#[derive(Args, Serialize)]
struct BuildArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = resil_core::builder::DEFAULT_C1)]
    c1: f64,
}

#[derive(Args, Serialize)]
struct AmplifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    /// Resilience order of the LP witness paired with f.
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Monte Carlo samples when the composition is too wide to enumerate.
    #[arg(long, default_value_t = resil_core::amplify::DEFAULT_SAMPLES)]
    m: usize,
    /// Required when sampling.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct DesignArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    /// Shuffle candidates with this seed instead of lexicographic order.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct OrthoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    /// Resilience order of the base function.
    #[arg(long)]
    d: usize,
    /// Ambient dimension for a greedy design.
    #[arg(long, required_unless_present = "design")]
    n: Option<usize>,
    /// Design JSON written by `resil design`.
    #[arg(long, conflicts_with = "n")]
    design: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ClassChoice {
    None,
    Dictators,
}

#[derive(Args, Serialize)]
struct LearnArgs {
    /// Conditional mean E[y|x] is `scale` times this function.
    #[command(flatten)]
    #[serde(flatten)]
    f: FnArgs,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = ClassChoice::None)]
    class: ClassChoice,
    /// Sample count; omit for the exact distribution.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct FtArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.0])]
    t: Vec<f64>,
    /// Constant in place of 3 in the influence and support estimates.
    #[arg(long, default_value_t = 3.0)]
    factor: f64,
}

enum Failure {
    Precondition(String),
    Violation(String),
}

fn failure_of(e: resil_core::Error) -> Failure {
    match e {
        resil_core::Error::Certificate(msg) => Failure::Violation(msg),
        other => Failure::Precondition(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = serde_json::to_value(&cli).expect("config serializes");
    let result = commands::dispatch(&cli.command).map_err(failure_of);

    let artifact = match result {
        Ok(a) => a,
        Err(failure) => return report_failure(&config, failure),
    };
    let bytes = match (&artifact.raw, cli.format) {
        (Some(raw), _) => Ok(raw.clone().into_bytes()),
        (None, Format::Json) => Ok(render_json(&envelope(&config, ("result", artifact.result)))),
        (None, Format::Csv) => render_csv(&artifact.csv),
    };
    if let Err(e) = bytes.and_then(|b| emit(&b, cli.out.as_deref())) {
        return report_failure(&config, Failure::Precondition(format!("cannot write output: {e}")));
    }
    match artifact.violation {
        Some(msg) => report_failure(&config, Failure::Violation(msg)),
        None => ExitCode::SUCCESS,
    }
}

fn report_failure(config: &serde_json::Value, failure: Failure) -> ExitCode {
    let (kind, message, code) = match failure {
        Failure::Precondition(m) => ("precondition", m, 1),
        Failure::Violation(m) => ("certificate-violation", m, 2),
    };
    let report = envelope(config, ("error", json!({ "kind": kind, "message": message })));
    eprint!("{}", String::from_utf8_lossy(&render_json(&report)));
    ExitCode::from(code)
}
