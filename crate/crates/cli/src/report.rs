use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use qfp_core::circuit::{build_aikps, build_deep, build_shallow};
use qfp_core::coeffgen::{
    cyclic_set, find_gap_params, gap_dimension, probabilistic_size, random_set, subset_sum_set,
    three_pow_exceeds, CoefficientSet, GapSearch, ParamVector,
};
use qfp_core::spectral::epsilon_value;
use qfp_core::{Metrics, Prime};

use crate::{io, Method};

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub eps: f64,
    /// Seed for the probabilistic row.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Width and depth predicted for a construction, where a closed form exists.
#[derive(Debug, Clone, Copy)]
pub struct Formula {
    pub width: Option<f64>,
    pub depth: Option<f64>,
}

pub fn formula(method: Method, p: Prime, eps: f64) -> Formula {
    let lg = (p.get() as f64).log2();
    let (width, depth) = match method {
        Method::Aikps => (
            Some(lg.powf(2.0 + 3.0 * eps)),
            Some((1.0 + 2.0 * eps) * lg.powf(1.0 + eps) * lg.log2()),
        ),
        Method::Random => {
            let l = (2.0 * p.get() as f64).log2();
            (Some(4.0 * l / eps), Some(2.0 * l / eps))
        }
        Method::Gap => (
            Some(p.get() as f64 / (eps * eps)),
            Some(gap_dimension(p, eps) as f64 + 2.0),
        ),
        // p^{c / log log p} with no explicit constant
        Method::Cyclic | Method::Explicit => (None, None),
    };
    Formula { width, depth }
}

pub fn describe(method: Method) -> &'static str {
    match method {
        Method::Cyclic => "width, depth ~ p^(c/loglog p), c unspecified",
        Method::Aikps => "width log^(2+3eps) p, depth (1+2eps) log^(1+eps) p * loglog p",
        Method::Random => "width 4 log(2p)/eps, depth 2 log(2p)/eps",
        Method::Gap => "width p/eps^2, depth ceil(log p - 2 log eps) + 2",
        Method::Explicit => "no closed form",
    }
}

/// Metrics of the circuit that realizes a set: shallow when parameters are known.
pub fn measured(k: &CoefficientSet) -> Metrics {
    match k.params() {
        Some(pv) => build_shallow(pv, 1).metrics(),
        None => build_deep(k, 1).metrics(),
    }
}

/// GAP parameters for `(p, eps)`: a proper GAP when one can exist, otherwise binary weights.
pub fn gap_params(p: Prime, m: usize) -> Result<ParamVector> {
    if three_pow_exceeds(m, p.get()) {
        let gens = (0..m).map(|i| p.reduce(1u64 << i.min(63))).collect();
        Ok(ParamVector::new(p, 0, gens)?)
    } else {
        Ok(find_gap_params(p, m, GapSearch::Sequential)?)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.4}"))
}

pub fn run(a: ReportArgs) -> Result<()> {
    let p = Prime::new(a.p)?;
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(
            qfp_core::Error::Precondition(format!("eps must lie in (0,1), got {}", a.eps)).into(),
        );
    }

    let mut rows: Vec<(Method, CoefficientSet, Metrics)> = Vec::new();

    // smallest cyclic prefix reaching the target error
    let cyclic = (1..p.get() as usize)
        .map(|d| cyclic_set(p, d))
        .find(|k| k.as_ref().map_or(true, |k| epsilon_value(k) <= a.eps))
        .unwrap_or_else(|| cyclic_set(p, p.get() as usize - 1))?;
    let m = measured(&cyclic);
    rows.push((Method::Cyclic, cyclic, m));

    match build_aikps(p, a.eps, 1) {
        Ok(c) => {
            let realized =
                CoefficientSet::explicit(p, c.meta.coefficients.clone().unwrap_or_default())?
                    .with_provenance(qfp_core::Provenance::Aikps);
            rows.push((Method::Aikps, realized, c.metrics()));
        }
        Err(e) => eprintln!("aikps: {e}"),
    }

    let random = random_set(p, probabilistic_size(p, a.eps), a.seed)?;
    let m = measured(&random);
    rows.push((Method::Random, random, m));

    let pv = gap_params(p, gap_dimension(p, a.eps))?;
    let gap = subset_sum_set(&pv)?;
    let m = measured(&gap);
    rows.push((Method::Gap, gap, m));

    let mut w = io::sink(a.out.as_deref())?;
    writeln!(
        w,
        "method,d,formula_width,measured_width,formula_depth,measured_depth,epsilon"
    )?;
    for (method, k, metrics) in rows {
        let f = formula(method, p, a.eps);
        let name = match method {
            Method::Random => "probabilistic",
            other => other.name(),
        };
        writeln!(
            w,
            "{name},{},{},{},{},{},{:.6}",
            k.len(),
            fmt_opt(f.width),
            metrics.width,
            fmt_opt(f.depth),
            metrics.depth,
            epsilon_value(&k)
        )?;
    }
    w.flush()?;
    Ok(())
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cyclic => "cyclic",
            Method::Aikps => "aikps",
            Method::Gap => "gap",
            Method::Random => "random",
            Method::Explicit => "explicit",
        }
    }
}
