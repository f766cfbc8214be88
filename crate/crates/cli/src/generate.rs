use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use qfp_core::coeffgen::{
    aikps_set, cyclic_set, find_gap_params_capped, gap_dimension, is_proper_gap,
    probabilistic_size, random_set, subset_sum_set, CoefficientSet, GapSearch, DEFAULT_ATTEMPT_CAP,
};
use qfp_core::{Error, Prime};

use crate::report::{describe, formula, measured};
use crate::{io, Method};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub p: u64,
    /// Generator count for the GAP method.
    #[arg(long)]
    pub m: Option<usize>,
    /// Set size for the cyclic and random methods.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Coefficients for the explicit method.
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Option<Vec<u64>>,
    /// Candidate limit for the GAP parameter search.
    #[arg(long, default_value_t = DEFAULT_ATTEMPT_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn need<T>(v: Option<T>, flag: &str, method: Method) -> Result<T> {
    v.ok_or_else(|| Error::Precondition(format!("{} needs --{flag}", method.name())).into())
}

fn build(a: &GenerateArgs, p: Prime) -> Result<CoefficientSet> {
    let size = |fallback: fn(Prime, f64) -> usize| -> Result<usize> {
        match (a.d, a.eps) {
            (Some(d), _) => Ok(d),
            (None, Some(eps)) => Ok(fallback(p, eps)),
            (None, None) => need(None, "d or --eps", a.method),
        }
    };
    Ok(match a.method {
        Method::Cyclic => cyclic_set(p, size(probabilistic_size)?)?,
        Method::Aikps => aikps_set(p, need(a.eps, "eps", a.method)?)?,
        Method::Gap => {
            let m = match (a.m, a.eps) {
                (Some(m), _) => m,
                (None, Some(eps)) => gap_dimension(p, eps),
                (None, None) => need(None, "m or --eps", a.method)?,
            };
            let strategy = a
                .seed
                .map_or(GapSearch::Sequential, |seed| GapSearch::Random { seed });
            let pv = find_gap_params_capped(p, m, strategy, a.cap)?;
            let proper = is_proper_gap(&pv);
            subset_sum_set(&pv)?.with_proper_gap(proper)
        }
        Method::Random => {
            let seed = io::require_seed(a.seed, "random")?;
            random_set(p, size(probabilistic_size)?, seed)?
        }
        Method::Explicit => {
            CoefficientSet::explicit(p, need(a.coeffs.clone(), "coeffs", a.method)?)?
        }
    })
}

pub fn run(a: GenerateArgs) -> Result<()> {
    let p = Prime::new(a.p)?;
    let k = build(&a, p).with_context(|| format!("method {}", a.method.name()))?;
    io::write_json(a.out.as_deref(), &k)?;

    let metrics = measured(&k);
    eprintln!("{}: {}", a.method.name(), describe(a.method));
    if let Some(eps) = a.eps {
        let f = formula(a.method, p, eps);
        if let (Some(w), Some(d)) = (f.width, f.depth) {
            eprintln!("formula at eps={eps}: width {w:.2}, depth {d:.2}");
        }
    }
    eprintln!(
        "measured: d={} width {} depth {}",
        k.len(),
        metrics.width,
        metrics.depth
    );
    Ok(())
}
