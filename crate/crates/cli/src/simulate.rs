use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use qfp_core::sim::{
    classify, noiseless_accept_curve, noisy_accept_curve, read_shot_records, sample_curve,
    write_shot_records, Classification, NoiseModel,
};

use crate::{io, parse_noise, SourceArgs};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// `none`, `default` or `p1,p2,pm`.
    #[arg(long, value_parser = parse_noise, default_value = "none")]
    pub noise: NoiseModel,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Longest word length; defaults to `7p + 9`.
    #[arg(long)]
    pub window: Option<u64>,
    /// Adds `predicted` and `actual` columns.
    #[arg(long)]
    pub threshold: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Shot-record CSV with columns `length,shots,accept_count`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub threshold: u64,
    /// Adds the true membership column `actual` (length divisible by p).
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_classification(w: &mut dyn Write, c: &Classification, p: Option<u64>) -> Result<()> {
    match p {
        Some(_) => writeln!(w, "length,shots,accept_count,predicted,actual")?,
        None => writeln!(w, "length,shots,accept_count,predicted")?,
    }
    for r in &c.rows {
        write!(
            w,
            "{},{},{},{}",
            r.length, r.shots, r.accept_count, r.predicted
        )?;
        if let Some(p) = p {
            write!(w, ",{}", r.length % p == 0)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn report_classification(c: &Classification, p: Option<u64>) {
    eprintln!("members predicted: {:?}", c.members());
    if let Some(lambda) = c.cut_point() {
        eprintln!(
            "cut point {lambda:.4}, isolation {:.4}",
            c.isolation().unwrap_or(0.0)
        );
    }
    if let Some(p) = p {
        let wrong = c
            .rows
            .iter()
            .filter(|r| r.predicted != (r.length % p == 0))
            .count();
        eprintln!("misclassified lengths: {wrong}");
    }
}

pub fn run(a: SimulateArgs) -> Result<()> {
    let seed = io::require_seed(a.seed, "simulate")?;
    let fp = io::fingerprint(&a.source)?;
    let p = fp.p().get();
    let window = a.window.unwrap_or(7 * p + 9);
    let curve = if a.noise.is_noiseless() {
        noiseless_accept_curve(&fp, window)?
    } else {
        noisy_accept_curve(&fp, &a.noise, window)?
    };
    let records = sample_curve(&curve, a.shots, seed)?;

    let mut w = io::sink(a.out.as_deref())?;
    match a.threshold {
        Some(t) => {
            let c = classify(&records, t);
            write_classification(&mut w, &c, Some(p))?;
            report_classification(&c, Some(p));
        }
        None => write_shot_records(&mut w, &records)?,
    }
    w.flush()?;
    Ok(())
}

pub fn run_classify(a: ClassifyArgs) -> Result<()> {
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let records =
        read_shot_records(file).with_context(|| format!("reading {}", a.input.display()))?;
    let c = classify(&records, a.threshold);
    let mut w = io::sink(a.out.as_deref())?;
    write_classification(&mut w, &c, a.p)?;
    w.flush()?;
    report_classification(&c, a.p);
    Ok(())
}
