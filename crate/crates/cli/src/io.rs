use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};

use qfp_core::circuit::Fingerprint;
use qfp_core::coeffgen::{CoefficientSet, ParamVector};
use qfp_core::{Error, Prime};

use crate::SourceArgs;

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// A JSON file holding one coefficient set or an array of them.
pub fn load_sets(path: &Path) -> Result<Vec<CoefficientSet>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let sets = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(serde_json::from_value)
            .collect::<Result<Vec<CoefficientSet>, _>>(),
        one => serde_json::from_value(one).map(|s| vec![s]),
    }
    .with_context(|| format!("invalid coefficient set in {}", path.display()))?;
    if sets.is_empty() {
        return Err(anyhow!("{} holds no coefficient sets", path.display()));
    }
    Ok(sets)
}

pub fn prime(p: Option<u64>) -> Result<Prime> {
    let p = p.ok_or_else(|| Error::Precondition("--p is required".into()))?;
    Ok(Prime::new(p)?)
}

pub fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::Precondition(format!("--seed is required for {what}")).into())
}

pub fn fingerprint(src: &SourceArgs) -> Result<Fingerprint> {
    if let Some(coords) = &src.params {
        let pv = ParamVector::from_coords(prime(src.p)?, coords)?;
        return Ok(if src.deep {
            Fingerprint::Deep(qfp_core::coeffgen::subset_sum_set(&pv)?)
        } else {
            Fingerprint::Shallow(pv)
        });
    }
    let path = src
        .input
        .as_deref()
        .ok_or_else(|| Error::Precondition("give --input or --p with --params".into()))?;
    let mut sets = load_sets(path)?;
    if sets.len() != 1 {
        return Err(anyhow!(
            "{} holds {} sets, expected one",
            path.display(),
            sets.len()
        ));
    }
    let k = sets.remove(0);
    if let Some(p) = src.p {
        if p != k.p().get() {
            return Err(
                Error::Precondition(format!("--p {p} differs from set modulus {}", k.p())).into(),
            );
        }
    }
    Ok(match (k.params(), src.deep) {
        (Some(pv), false) => Fingerprint::Shallow(pv.clone()),
        _ => Fingerprint::Deep(k),
    })
}

pub fn write_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
