use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use qfp_core::optimize::{
    multi_start, Encoding, Hybrid, Objective, Problem, Sign, DEFAULT_CAP, DEFAULT_RESTARTS,
};
use qfp_core::sim::NoiseModel;
use qfp_core::{Error, Prime};

use crate::{io, parse_noise};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveKind {
    /// Worst-case error of the coefficient set.
    Epsilon,
    /// Separation at `6p` over lengths `1..=6p+9`.
    Diff,
    /// Separation at `p` over lengths `1..=2p+10`.
    DiffPrime,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub p: u64,
    /// Shallow search over `(t_0; t_1..t_m)`.
    #[arg(long, conflicts_with = "d")]
    pub m: Option<usize>,
    /// Deep search over `d` coefficients.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum, default_value = "epsilon")]
    pub objective: ObjectiveKind,
    /// `none`, `default` or `p1,p2,pm`; `none` evaluates separations exactly.
    #[arg(long, value_parser = parse_noise, default_value = "none")]
    pub noise: NoiseModel,
    /// Maximize `member - non-member` literally instead of minimizing the gap.
    #[arg(long)]
    pub literal_sign: bool,
    /// `A:B`: descent on the first A coordinates, exhaustive search on the next B.
    #[arg(long)]
    pub hybrid: Option<Hybrid>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,
    /// Largest exhaustive block, in candidates.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Writes `iteration,value` pairs of the winning run.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
}

fn problem(a: &OptimizeArgs) -> Result<Problem> {
    let p = Prime::new(a.p)?;
    let encoding = match (a.m, a.d) {
        (Some(m), None) => Encoding::Shallow { m },
        (None, Some(d)) => Encoding::Deep { d },
        _ => return Err(Error::Precondition("give exactly one of --m or --d".into()).into()),
    };
    let noise = (!a.noise.is_noiseless()).then_some(a.noise);
    let mut objective = match a.objective {
        ObjectiveKind::Epsilon => Objective::Epsilon,
        ObjectiveKind::Diff => Objective::shallow_separation(p, noise),
        ObjectiveKind::DiffPrime => Objective::standard_separation(p, noise),
    };
    if a.literal_sign {
        match &mut objective {
            Objective::Separation { sign, .. } => *sign = Sign::Literal,
            Objective::Epsilon => {
                return Err(Error::Precondition(
                    "--literal-sign needs a separation objective".into(),
                )
                .into())
            }
        }
    }
    Ok(Problem::new(p, encoding, objective)?)
}

pub fn run(a: OptimizeArgs) -> Result<()> {
    let seed = io::require_seed(a.seed, "optimize")?;
    let prob = problem(&a)?;
    let split = a.hybrid.unwrap_or_else(|| Hybrid::descent(prob.dims()));
    let res = multi_start(&prob, split, a.restarts, a.max_sweeps, seed, a.cap)?;

    let mut w = io::sink(a.out.as_deref())?;
    writeln!(w, "{}", res.to_json()?)?;
    w.flush()?;
    if let Some(path) = &a.trace_csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        res.write_trace_csv(BufWriter::new(f))?;
    }
    eprintln!(
        "best {:?} value {:.6} after {} evaluations ({} restarts, split {split})",
        res.best,
        res.best_value,
        res.evaluations,
        res.restarts.len()
    );
    Ok(())
}
