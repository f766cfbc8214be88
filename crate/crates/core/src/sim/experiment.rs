use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::circuit::{decompose_multi_controlled, Circuit, Fingerprint, Gate};
use crate::error::{Error, Result};

use super::{
    accept_probability_noisy, accept_probability_pure, check_noisy, evolve_noisy, Mode, NoiseModel,
    QuantumState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordStyle {
    /// One rotation block with angles for the whole word.
    Collapsed,
    /// One rotation block per letter.
    PerLetter,
}

fn prepare_layer(fp: &Fingerprint) -> Vec<Gate> {
    (0..fp.controls()).map(Gate::H).collect()
}

/// The circuit that reads `a^i` and ends with the inverse preparation, so
/// acceptance is the all-zeros outcome.
///
/// The per-letter form has depth `i * b + 2` for a rotation block of depth `b`.
pub fn build_word_circuit(fp: &Fingerprint, i: u64, style: WordStyle) -> Circuit {
    let mut c = match style {
        WordStyle::Collapsed => fp.build(i),
        WordStyle::PerLetter => {
            let template = fp.build(i);
            let mut c = Circuit::new(fp.num_qubits()).with_meta(template.meta);
            c.meta.construction.push_str("/per_letter");
            let block = fp.rotation_layers(1);
            let push = |c: &mut Circuit, layer: Vec<Gate>| {
                c.push_layer(layer)
                    .expect("fingerprint layers are disjoint")
            };
            push(&mut c, prepare_layer(fp));
            for _ in 0..i {
                for layer in &block {
                    push(&mut c, layer.clone());
                }
            }
            c
        }
    };
    c.append_unprepare();
    c
}

fn letter_block(fp: &Fingerprint) -> Result<Circuit> {
    let mut block = Circuit::new(fp.num_qubits());
    for layer in fp.rotation_layers(1) {
        block.push_layer(layer)?;
    }
    if block.has_multi_controlled() {
        block = decompose_multi_controlled(&block)?;
    }
    Ok(block)
}

/// Noisy acceptance of the per-letter circuit for every length `0..=max_len`.
///
/// The state is advanced one letter at a time and each length branches off
/// for the inverse preparation and readout, so the cost is linear in `max_len`.
/// Multi-controlled rotations are decomposed into CX and RY first.
pub fn noisy_accept_curve(fp: &Fingerprint, nm: &NoiseModel, max_len: u64) -> Result<Vec<f64>> {
    let block = letter_block(fp)?;
    check_noisy(&block)?;
    let prep = [prepare_layer(fp)];
    let mut s = QuantumState::zero(fp.num_qubits(), Mode::Mixed);
    evolve_noisy(&mut s, &prep, nm);
    let mut out = Vec::with_capacity(max_len as usize + 1);
    for i in 0..=max_len {
        if i > 0 {
            evolve_noisy(&mut s, block.layers(), nm);
        }
        let mut t = s.clone();
        evolve_noisy(&mut t, &prep, nm);
        out.push(t.all_zero_probability(nm.p_meas));
    }
    Ok(out)
}

/// Exact noiseless acceptance for every length `0..=max_len`.
pub fn noiseless_accept_curve(fp: &Fingerprint, max_len: u64) -> Result<Vec<f64>> {
    (0..=max_len)
        .map(|i| accept_probability_pure(&build_word_circuit(fp, i, WordStyle::Collapsed)))
        .collect()
}

/// Outcome counts for one word length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub length: u64,
    pub shots: u64,
    pub accept_count: u64,
}

impl ShotRecord {
    pub fn frequency(&self) -> f64 {
        self.accept_count as f64 / self.shots as f64
    }
}

fn draw(q: f64, shots: u64, seed: u64, length: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(length);
    let dist = Binomial::new(shots, q.clamp(0.0, 1.0))
        .map_err(|e| Error::Precondition(format!("binomial sampler: {e}")))?;
    Ok(rng.sample(dist))
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::Precondition("shots must be at least 1".into()));
    }
    Ok(())
}

/// Binomial shot count for `c` (word length from `c.meta.x`).
///
/// Each length draws from its own stream of the seeded generator, so records
/// do not depend on which other lengths were sampled.
pub fn sample_shots(c: &Circuit, nm: &NoiseModel, shots: u64, seed: u64) -> Result<ShotRecord> {
    check_shots(shots)?;
    let q = if nm.is_noiseless() {
        accept_probability_pure(c)?
    } else {
        accept_probability_noisy(c, nm)?
    };
    let length = c.meta.x.unwrap_or(0);
    Ok(ShotRecord {
        length,
        shots,
        accept_count: draw(q, shots, seed, length)?,
    })
}

/// Samples lengths `1..curve.len()` from a curve indexed by length.
pub fn sample_curve(curve: &[f64], shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
    check_shots(shots)?;
    (1..curve.len() as u64)
        .map(|length| {
            Ok(ShotRecord {
                length,
                shots,
                accept_count: draw(curve[length as usize], shots, seed, length)?,
            })
        })
        .collect()
}

pub fn write_shot_records<W: Write>(out: W, records: &[ShotRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_shot_records<R: Read>(input: R) -> Result<Vec<ShotRecord>> {
    let mut records = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let r: ShotRecord = row?;
        if r.accept_count > r.shots {
            return Err(Error::Precondition(format!(
                "length {}: accept_count {} exceeds shots {}",
                r.length, r.accept_count, r.shots
            )));
        }
        records.push(r);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifiedLength {
    pub length: u64,
    pub shots: u64,
    pub accept_count: u64,
    pub predicted: bool,
}

/// Threshold decisions with their cut-point form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub threshold: u64,
    pub rows: Vec<ClassifiedLength>,
}

impl Classification {
    pub fn members(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|r| r.predicted)
            .map(|r| r.length)
            .collect()
    }

    /// `threshold / shots` per record, when all records share one shot count.
    pub fn cut_point(&self) -> Option<f64> {
        let shots = self.rows.first()?.shots;
        self.rows
            .iter()
            .all(|r| r.shots == shots)
            .then(|| self.threshold as f64 / shots as f64)
    }

    /// Smallest distance of an observed frequency from the cut point.
    pub fn isolation(&self) -> Option<f64> {
        let lambda = self.cut_point()?;
        self.rows
            .iter()
            .map(|r| (r.accept_count as f64 / r.shots as f64 - lambda).abs())
            .min_by(f64::total_cmp)
    }
}

/// A length is predicted a member iff its accept count exceeds `threshold`.
pub fn classify(records: &[ShotRecord], threshold: u64) -> Classification {
    Classification {
        threshold,
        rows: records
            .iter()
            .map(|r| ClassifiedLength {
                length: r.length,
                shots: r.shots,
                accept_count: r.accept_count,
                predicted: r.accept_count > threshold,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffgen::ParamVector;
    use crate::zp::Prime;

    fn fp() -> Fingerprint {
        let p = Prime::new(17).unwrap();
        Fingerprint::Shallow(ParamVector::new(p, 6, vec![4, 8, 12]).unwrap())
    }

    #[test]
    fn per_letter_depth_grows_linearly() {
        for i in 0..6 {
            let c = build_word_circuit(&fp(), i, WordStyle::PerLetter);
            assert_eq!(c.depth() as u64, i * 4 + 2);
        }
    }

    #[test]
    fn empty_word_accepts() {
        for style in [WordStyle::Collapsed, WordStyle::PerLetter] {
            let c = build_word_circuit(&fp(), 0, style);
            assert!((accept_probability_pure(&c).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_matches_direct_noisy_runs() {
        let nm = NoiseModel::default();
        let curve = noisy_accept_curve(&fp(), &nm, 5).unwrap();
        for (i, &q) in curve.iter().enumerate() {
            let c = build_word_circuit(&fp(), i as u64, WordStyle::PerLetter);
            assert!((accept_probability_noisy(&c, &nm).unwrap() - q).abs() < 1e-12);
        }
    }

    #[test]
    fn shots_are_reproducible_and_exact_for_certain_events() {
        let c = build_word_circuit(&fp(), 17, WordStyle::Collapsed);
        let r = sample_shots(&c, &NoiseModel::noiseless(), 10000, 3).unwrap();
        assert_eq!(r.accept_count, 10000);
        assert_eq!(r.length, 17);
        let c = build_word_circuit(&fp(), 5, WordStyle::Collapsed);
        let a = sample_shots(&c, &NoiseModel::default(), 1000, 9).unwrap();
        let b = sample_shots(&c, &NoiseModel::default(), 1000, 9).unwrap();
        assert_eq!(a, b);
        assert!(sample_shots(&c, &NoiseModel::default(), 0, 9).is_err());
    }

    #[test]
    fn records_round_trip_through_csv() {
        let recs = vec![
            ShotRecord {
                length: 1,
                shots: 10,
                accept_count: 3,
            },
            ShotRecord {
                length: 2,
                shots: 10,
                accept_count: 10,
            },
        ];
        let mut buf = Vec::new();
        write_shot_records(&mut buf, &recs).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("length,shots,accept_count\n"));
        assert_eq!(read_shot_records(&buf[..]).unwrap(), recs);
        assert!(read_shot_records("length,shots,accept_count\n1,5,6\n".as_bytes()).is_err());
    }

    #[test]
    fn classification_contract() {
        let empty = classify(&[], 1000);
        assert!(empty.rows.is_empty());
        assert_eq!(empty.cut_point(), None);
        let recs = [
            ShotRecord {
                length: 1,
                shots: 10000,
                accept_count: 1000,
            },
            ShotRecord {
                length: 2,
                shots: 10000,
                accept_count: 1500,
            },
        ];
        let c = classify(&recs, 1000);
        assert_eq!(c.members(), vec![2]);
        assert_eq!(c.cut_point(), Some(0.1));
        assert!(c.isolation().unwrap().abs() < 1e-15);
    }
}
