mod analyze;
mod circuit;
mod generate;
mod io;
mod optimize;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qfp_core::sim::NoiseModel;

/// Quantum fingerprinting for the MOD_p automaton.
#[derive(Parser)]
#[command(name = "qfp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a coefficient set and write it as JSON.
    Generate(generate::GenerateArgs),
    /// Error profile, additive statistics and bound checks for coefficient sets.
    Analyze(analyze::AnalyzeArgs),
    /// Shot counts per word length (CSV).
    Simulate(simulate::SimulateArgs),
    /// Threshold classification of shot counts.
    Classify(simulate::ClassifyArgs),
    /// Search for coefficients minimizing an objective.
    Optimize(optimize::OptimizeArgs),
    /// Width and depth per construction, formula against measured.
    Report(report::ReportArgs),
    /// Emit a circuit in the line format with its metrics.
    Circuit(circuit::CircuitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Cyclic,
    Aikps,
    Gap,
    Random,
    Explicit,
}

/// Coefficients for commands that run a fingerprint.
#[derive(Args, Debug, Default)]
pub struct SourceArgs {
    /// Coefficient-set JSON; sets carrying shallow parameters use the shallow circuit.
    #[arg(long, conflicts_with = "params")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Shallow parameters `t0,t1,..,tm`.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<u64>>,
    /// Use the deep circuit even when shallow parameters are known.
    #[arg(long)]
    pub deep: bool,
}

/// `none`, `default` or `p1,p2,pm`.
pub fn parse_noise(s: &str) -> Result<NoiseModel, String> {
    match s {
        "none" => return Ok(NoiseModel::noiseless()),
        "default" => return Ok(NoiseModel::default()),
        _ => {}
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [p1, p2, pm] => NoiseModel::new(p1, p2, pm).map_err(|e| e.to_string()),
        _ => Err("expected p1,p2,pm".into()),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qfp_core::Error>() {
        Some(qfp_core::Error::SearchExhausted(_)) => 3,
        Some(e) if e.is_precondition() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Classify(a) => simulate::run_classify(a),
        Command::Optimize(a) => optimize::run(a),
        Command::Report(a) => report::run(a),
        Command::Circuit(a) => circuit::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
