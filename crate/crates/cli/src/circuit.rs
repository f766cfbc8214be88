use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};

use qfp_core::circuit::{
    best_nn_cx_count, build_aikps, decompose_multi_controlled, transpile_ry_to_rz,
};
use qfp_core::Error;

use crate::{io, SourceArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// Shallow when the input carries parameters, deep otherwise.
    Auto,
    Deep,
    Aikps,
}

#[derive(Args, Debug)]
pub struct CircuitArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub construction: Construction,
    /// Word length.
    #[arg(long, default_value_t = 1)]
    pub x: u64,
    /// AIKPS window parameter.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lower multi-controlled rotations to CX and RY.
    #[arg(long)]
    pub decompose: bool,
    /// Rewrite RY rotations into the H/RZ/PHASE basis (implies --decompose).
    #[arg(long)]
    pub rz: bool,
    /// Skip the linear-chain CX count.
    #[arg(long)]
    pub no_routing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: CircuitArgs) -> Result<()> {
    let mut c = match a.construction {
        Construction::Aikps => {
            let eps = a
                .eps
                .ok_or_else(|| Error::Precondition("aikps needs --eps".into()))?;
            build_aikps(io::prime(a.source.p)?, eps, a.x)?
        }
        Construction::Deep | Construction::Auto => {
            let fp = io::fingerprint(&SourceArgs {
                deep: a.source.deep || a.construction == Construction::Deep,
                input: a.source.input.clone(),
                p: a.source.p,
                params: a.source.params.clone(),
            })?;
            fp.build(a.x)
        }
    };
    if (a.decompose || a.rz) && c.has_multi_controlled() {
        c = decompose_multi_controlled(&c)?;
    }
    if a.rz {
        c = transpile_ry_to_rz(&c)?;
    }

    let mut w = io::sink(a.out.as_deref())?;
    write!(w, "{}", c.to_text())?;
    w.flush()?;

    let m = c.metrics();
    let counts: Vec<String> = m
        .gate_counts
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    eprintln!(
        "width {} depth {} rotation_depth {} gates {}",
        m.width,
        m.depth,
        m.rotation_depth,
        counts.join(" ")
    );
    if !a.no_routing {
        let flat = if c.has_multi_controlled() {
            decompose_multi_controlled(&c)?
        } else {
            c
        };
        let (layout, r) = best_nn_cx_count(&flat)?;
        eprintln!(
            "linear-chain CX {} (swaps {}, fused {}) with order {:?}",
            r.cx,
            r.swaps,
            r.fused,
            layout.order()
        );
    }
    Ok(())
}
