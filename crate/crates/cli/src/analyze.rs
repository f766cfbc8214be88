use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::Args;

use qfp_core::coeffgen::CoefficientSet;
use qfp_core::spectral::{
    bias_energy_bound, epsilon_of, fourier_bias, verify_gap_theorem, ProfileHeader,
};

use crate::io;

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Coefficient-set JSON (one set or an array).
    pub input: PathBuf,
    /// Second input; emits the error ratio `eps(input) / eps(other)` set by set.
    pub other: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn summary(k: &CoefficientSet) -> Result<String> {
    let prof = epsilon_of(k);
    let stats = fourier_bias(k);
    let sandwich = bias_energy_bound(k).holds(1e-12);
    let gap = match k.params() {
        Some(pv) => match verify_gap_theorem(pv) {
            Ok(r) => format!("{:.6},{}", r.bound_sqrt_p_over_d, r.holds),
            Err(_) => ",".into(),
        },
        None => ",".into(),
    };
    Ok(format!(
        "{},{},{},{:.12},{},{},{:.12},{:.6},{},{}",
        k.p(),
        k.len(),
        k.provenance(),
        prof.epsilon,
        prof.argmax_x,
        stats.energy,
        stats.fourier_bias,
        stats.density,
        sandwich,
        gap
    ))
}

const SUMMARY_HEADER: &str =
    "p,d,method,epsilon,argmax_x,energy,fourier_bias,density,sandwich_holds,gap_bound,gap_holds";

pub fn run(a: AnalyzeArgs) -> Result<()> {
    let sets = io::load_sets(&a.input)?;
    let mut w = io::sink(a.out.as_deref())?;

    if let Some(other) = &a.other {
        let others = io::load_sets(other)?;
        if others.len() != sets.len() {
            return Err(anyhow!(
                "inputs hold {} and {} sets; ratios pair them in order",
                sets.len(),
                others.len()
            ));
        }
        writeln!(w, "p,d_a,d_b,eps_a,eps_b,ratio")?;
        let mut band = (f64::INFINITY, f64::NEG_INFINITY);
        for (ka, kb) in sets.iter().zip(&others) {
            if ka.p() != kb.p() {
                return Err(anyhow!("paired sets differ in p: {} vs {}", ka.p(), kb.p()));
            }
            let (ea, eb) = (epsilon_of(ka).epsilon, epsilon_of(kb).epsilon);
            let ratio = ea / eb;
            band = (band.0.min(ratio), band.1.max(ratio));
            writeln!(
                w,
                "{},{},{},{ea:.12},{eb:.12},{ratio:.12}",
                ka.p(),
                ka.len(),
                kb.len()
            )?;
        }
        w.flush()?;
        eprintln!("ratio range [{:.6}, {:.6}]", band.0, band.1);
        return Ok(());
    }

    if let [k] = &sets[..] {
        epsilon_of(k).write_csv(&mut w, &ProfileHeader::for_set(k))?;
        w.flush()?;
        eprintln!("{SUMMARY_HEADER}");
        eprintln!("{}", summary(k)?);
    } else {
        writeln!(w, "{SUMMARY_HEADER}")?;
        for k in &sets {
            writeln!(w, "{}", summary(k)?)?;
        }
        w.flush()?;
    }
    Ok(())
}
