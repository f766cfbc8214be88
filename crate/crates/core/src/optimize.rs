//! Discrete search over coefficient vectors in `Z_p^n`.
//!
//! Coordinates are either shallow parameters `[t_0, t_1, .., t_m]` or an
//! explicit coefficient list. Each step scans one block of coordinates
//! exhaustively (a single coordinate is an exact line search) and moves only
//! on strict improvement; ties go to the lexicographically smallest candidate.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Fingerprint;
use crate::coeffgen::{subset_sum_set, CoefficientSet, ParamVector, Provenance};
use crate::error::{Error, Result};
use crate::sim::{noisy_accept_curve, NoiseModel};
use crate::spectral::{acceptance_probability, epsilon_value};
use crate::zp::Prime;

pub const DEFAULT_CAP: u64 = 100_000_000;
pub const DEFAULT_RESTARTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Encoding {
    /// `[t_0, t_1, .., t_m]` for the shallow circuit.
    Shallow { m: usize },
    /// `d` coefficients for the deep circuit.
    Deep { d: usize },
}

impl Encoding {
    pub fn dims(self) -> usize {
        match self {
            Encoding::Shallow { m } => m + 1,
            Encoding::Deep { d } => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    /// `max non-member - member`: lower means better separated.
    Separation,
    /// `member - max non-member`, taken literally.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Objective {
    /// `epsilon(K)` of the realized coefficient set.
    Epsilon,
    /// Gap between the member probe and the most accepted non-member in
    /// `1..=window_max`. Noisy values use per-letter circuits.
    Separation {
        member_probe: u64,
        window_max: u64,
        noise: Option<NoiseModel>,
        sign: Sign,
    },
}

impl Objective {
    /// Separation probing `6p` over `1..=6p+9` (shallow search).
    pub fn shallow_separation(p: Prime, noise: Option<NoiseModel>) -> Self {
        Objective::Separation {
            member_probe: 6 * p.get(),
            window_max: 6 * p.get() + 9,
            noise,
            sign: Sign::Separation,
        }
    }

    /// Separation probing `p` over `1..=2p+10` (standard-circuit search).
    pub fn standard_separation(p: Prime, noise: Option<NoiseModel>) -> Self {
        Objective::Separation {
            member_probe: p.get(),
            window_max: 2 * p.get() + 10,
            noise,
            sign: Sign::Separation,
        }
    }
}

/// Search problem: what the coordinates mean and what is minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub p: Prime,
    pub encoding: Encoding,
    pub objective: Objective,
}

impl Problem {
    pub fn new(p: Prime, encoding: Encoding, objective: Objective) -> Result<Self> {
        if encoding.dims() == 0 {
            return Err(Error::Precondition(
                "at least one coordinate required".into(),
            ));
        }
        if let Objective::Separation {
            member_probe,
            window_max,
            ..
        } = objective
        {
            if window_max < member_probe {
                return Err(Error::Precondition(format!(
                    "window {window_max} ends before member probe {member_probe}"
                )));
            }
        }
        Ok(Problem {
            p,
            encoding,
            objective,
        })
    }

    pub fn dims(&self) -> usize {
        self.encoding.dims()
    }

    fn check(&self, coords: &[u64]) -> Result<()> {
        if coords.len() != self.dims() {
            return Err(Error::Precondition(format!(
                "expected {} coordinates, got {}",
                self.dims(),
                coords.len()
            )));
        }
        Ok(())
    }

    /// The coefficient set realized by `coords`.
    pub fn coefficient_set(&self, coords: &[u64]) -> Result<CoefficientSet> {
        self.check(coords)?;
        match self.encoding {
            Encoding::Shallow { .. } => {
                let pv = ParamVector::from_coords(self.p, coords)?;
                Ok(subset_sum_set(&pv)?.with_provenance(Provenance::Optimized))
            }
            Encoding::Deep { .. } => {
                CoefficientSet::new(self.p, coords.to_vec(), Provenance::Optimized)
            }
        }
    }

    pub fn fingerprint(&self, coords: &[u64]) -> Result<Fingerprint> {
        self.check(coords)?;
        Ok(match self.encoding {
            Encoding::Shallow { .. } => {
                Fingerprint::Shallow(ParamVector::from_coords(self.p, coords)?)
            }
            Encoding::Deep { .. } => Fingerprint::Deep(self.coefficient_set(coords)?),
        })
    }

    pub fn evaluate(&self, coords: &[u64]) -> Result<f64> {
        match self.objective {
            Objective::Epsilon => Ok(epsilon_value(&self.coefficient_set(coords)?)),
            Objective::Separation {
                member_probe,
                window_max,
                noise,
                sign,
            } => {
                let prob: Vec<f64> = match noise {
                    Some(nm) => noisy_accept_curve(&self.fingerprint(coords)?, &nm, window_max)?,
                    None => {
                        let k = self.coefficient_set(coords)?;
                        (0..=window_max)
                            .map(|r| acceptance_probability(&k, r))
                            .collect()
                    }
                };
                let p = self.p.get();
                let worst = (1..=window_max)
                    .filter(|r| r % p != 0)
                    .map(|r| prob[r as usize])
                    .fold(f64::NEG_INFINITY, f64::max);
                let member = prob[member_probe as usize];
                Ok(match sign {
                    Sign::Separation => worst - member,
                    Sign::Literal => member - worst,
                })
            }
        }
    }
}

/// Split of the coordinates into `singles` line-searched coordinates followed
/// by one exhaustive block of `block` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hybrid {
    pub singles: usize,
    pub block: usize,
}

impl Hybrid {
    pub fn descent(dims: usize) -> Self {
        Hybrid {
            singles: dims,
            block: 0,
        }
    }

    pub fn exhaustive(dims: usize) -> Self {
        Hybrid {
            singles: 0,
            block: dims,
        }
    }

    fn blocks(self) -> Vec<std::ops::Range<usize>> {
        let mut b: Vec<_> = (0..self.singles).map(|i| i..i + 1).collect();
        if self.block > 0 {
            b.push(self.singles..self.singles + self.block);
        }
        b
    }
}

impl FromStr for Hybrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("hybrid split {s:?} is not A:B"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        Ok(Hybrid {
            singles: a.trim().parse().map_err(|_| bad())?,
            block: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for Hybrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.singles, self.block)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Block scans completed when the value was reached (0 = initial point).
    pub iteration: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub problem: Problem,
    pub best: Vec<u64>,
    pub best_value: f64,
    /// The coefficient set realized by `best`.
    pub coefficients: Vec<u64>,
    pub trace: Vec<TracePoint>,
    pub evaluations: u64,
    pub sweeps: usize,
    /// Final value of every restart, when several were run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restarts: Vec<f64>,
}

impl SearchResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for t in &self.trace {
            w.serialize(t)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn params(&self) -> Option<ParamVector> {
        match self.problem.encoding {
            Encoding::Shallow { .. } => ParamVector::from_coords(self.problem.p, &self.best).ok(),
            Encoding::Deep { .. } => None,
        }
    }
}

fn decode(mut idx: u64, p: u64, out: &mut [u64]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % p;
        idx /= p;
    }
}

fn block_size(p: u64, len: usize) -> Option<u64> {
    u32::try_from(len).ok().and_then(|l| p.checked_pow(l))
}

/// Best candidate for the coordinates in `range`, others held fixed.
///
/// Candidates are indexed in lexicographic order, so the minimum by
/// `(value, index)` is independent of evaluation order.
fn scan_block(
    problem: &Problem,
    x: &[u64],
    range: std::ops::Range<usize>,
    count: u64,
) -> Result<(f64, u64)> {
    let p = problem.p.get();
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut y = x.to_vec();
            decode(idx, p, &mut y[range.clone()]);
            Ok((problem.evaluate(&y)?, idx))
        })
        .try_reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                Ok(match a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) {
                    std::cmp::Ordering::Greater => b,
                    _ => a,
                })
            },
        )
}

/// Block coordinate descent from `init`; stops after a sweep without change
/// or after `max_sweeps`. Blocks larger than `cap` candidates are rejected.
pub fn hybrid_search(
    problem: &Problem,
    init: &[u64],
    split: Hybrid,
    max_sweeps: usize,
    cap: u64,
) -> Result<SearchResult> {
    let dims = problem.dims();
    if split.singles + split.block != dims {
        return Err(Error::Precondition(format!(
            "hybrid split {split} does not cover {dims} coordinates"
        )));
    }
    problem.check(init)?;
    let p = problem.p.get();
    let blocks = split.blocks();
    let mut sizes = Vec::with_capacity(blocks.len());
    for b in &blocks {
        match block_size(p, b.len()).filter(|&s| s <= cap) {
            Some(s) => sizes.push(s),
            None => {
                return Err(Error::SpaceTooLarge {
                    size: (p as f64).powi(b.len() as i32),
                    cap,
                })
            }
        }
    }

    let mut x: Vec<u64> = init.iter().map(|&v| v % p).collect();
    let mut fx = problem.evaluate(&x)?;
    let mut evaluations = 1u64;
    let mut trace = vec![TracePoint {
        iteration: 0,
        value: fx,
    }];
    let mut iteration = 0u64;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for (b, &size) in blocks.iter().zip(&sizes) {
            let (value, idx) = scan_block(problem, &x, b.clone(), size)?;
            evaluations += size;
            iteration += 1;
            if value < fx {
                decode(idx, p, &mut x[b.clone()]);
                fx = value;
                changed = true;
                trace.push(TracePoint { iteration, value });
            }
        }
        if !changed {
            break;
        }
    }
    Ok(SearchResult {
        problem: problem.clone(),
        coefficients: problem.coefficient_set(&x)?.coeffs().to_vec(),
        best: x,
        best_value: fx,
        trace,
        evaluations,
        sweeps,
        restarts: Vec::new(),
    })
}

/// Single-coordinate exact line searches in natural order.
pub fn coordinate_descent(
    problem: &Problem,
    init: &[u64],
    max_sweeps: usize,
) -> Result<SearchResult> {
    hybrid_search(
        problem,
        init,
        Hybrid::descent(problem.dims()),
        max_sweeps,
        DEFAULT_CAP,
    )
}

/// Exact global optimum over all of `Z_p^n`.
pub fn brute_force(problem: &Problem, cap: u64) -> Result<SearchResult> {
    let init = vec![0; problem.dims()];
    hybrid_search(problem, &init, Hybrid::exhaustive(problem.dims()), 1, cap)
}

/// Uniform random starting point for restart `restart`.
pub fn random_init(problem: &Problem, seed: u64, restart: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    let p = problem.p.get();
    (0..problem.dims())
        .map(|_| rng.random_range(0..p))
        .collect()
}

/// Best of `restarts` searches from seeded random starts; ties keep the earliest.
pub fn multi_start(
    problem: &Problem,
    split: Hybrid,
    restarts: usize,
    max_sweeps: usize,
    seed: u64,
    cap: u64,
) -> Result<SearchResult> {
    if restarts == 0 {
        return Err(Error::Precondition("at least one restart required".into()));
    }
    let mut best: Option<SearchResult> = None;
    let mut finals = Vec::with_capacity(restarts);
    let mut evaluations = 0;
    for r in 0..restarts {
        let init = random_init(problem, seed, r as u64);
        let res = hybrid_search(problem, &init, split, max_sweeps, cap)?;
        finals.push(res.best_value);
        evaluations += res.evaluations;
        if best.as_ref().is_none_or(|b| res.best_value < b.best_value) {
            best = Some(res);
        }
    }
    let mut best = best.expect("at least one restart");
    best.restarts = finals;
    best.evaluations = evaluations;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn eps_problem(p: u64, m: usize) -> Problem {
        Problem::new(prime(p), Encoding::Shallow { m }, Objective::Epsilon).unwrap()
    }

    #[test]
    fn epsilon_objective_extremes() {
        let full = Problem::new(prime(7), Encoding::Deep { d: 7 }, Objective::Epsilon).unwrap();
        assert!(full.evaluate(&[0, 1, 2, 3, 4, 5, 6]).unwrap() < 1e-12);
        let single = Problem::new(prime(7), Encoding::Deep { d: 1 }, Objective::Epsilon).unwrap();
        assert!((single.evaluate(&[3]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_separation_is_non_positive() {
        let p = prime(17);
        let prob = Problem::new(
            p,
            Encoding::Shallow { m: 3 },
            Objective::shallow_separation(p, None),
        )
        .unwrap();
        let v = prob.evaluate(&[6, 4, 8, 12]).unwrap();
        assert!(v <= 0.0);
        assert!((v - (0.09116 - 1.0)).abs() < 1e-4);
    }

    #[test]
    fn window_must_reach_probe() {
        let obj = Objective::Separation {
            member_probe: 20,
            window_max: 10,
            noise: None,
            sign: Sign::Separation,
        };
        assert!(Problem::new(prime(17), Encoding::Shallow { m: 1 }, obj).is_err());
    }

    #[test]
    fn hybrid_parsing() {
        let h: Hybrid = "6:2".parse().unwrap();
        assert_eq!(
            h,
            Hybrid {
                singles: 6,
                block: 2
            }
        );
        assert_eq!(h.to_string(), "6:2");
        assert!("6-2".parse::<Hybrid>().is_err());
    }

    #[test]
    fn brute_force_matches_enumeration() {
        let prob = eps_problem(5, 1);
        let res = brute_force(&prob, DEFAULT_CAP).unwrap();
        let mut best = (f64::INFINITY, vec![]);
        for a in 0..5 {
            for b in 0..5 {
                let v = prob.evaluate(&[a, b]).unwrap();
                if v < best.0 {
                    best = (v, vec![a, b]);
                }
            }
        }
        assert_eq!(res.best_value, best.0);
        assert_eq!(res.best, best.1);
        assert_eq!(res.evaluations, 26);
    }

    #[test]
    fn space_cap_enforced() {
        let prob = eps_problem(101, 4);
        assert!(matches!(
            brute_force(&prob, 1_000_000),
            Err(Error::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn stationary_point_stops_after_one_sweep() {
        let prob = eps_problem(31, 2);
        let first = coordinate_descent(&prob, &[1, 2, 3], 50).unwrap();
        let again = coordinate_descent(&prob, &first.best, 50).unwrap();
        assert_eq!(again.sweeps, 1);
        assert_eq!(again.best, first.best);
        assert_eq!(again.trace.len(), 1);
    }

    #[test]
    fn empty_block_hybrid_is_descent() {
        let prob = eps_problem(31, 2);
        let a = coordinate_descent(&prob, &[5, 9, 2], 50).unwrap();
        let b = hybrid_search(
            &prob,
            &[5, 9, 2],
            Hybrid {
                singles: 3,
                block: 0,
            },
            50,
            DEFAULT_CAP,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(hybrid_search(
            &prob,
            &[5, 9, 2],
            Hybrid {
                singles: 1,
                block: 1
            },
            5,
            10
        )
        .is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let prob = eps_problem(17, 2);
        let res = multi_start(&prob, Hybrid::descent(3), 3, 10, 4, DEFAULT_CAP).unwrap();
        assert_eq!(res.restarts.len(), 3);
        let back = SearchResult::from_json(&res.to_json().unwrap()).unwrap();
        assert_eq!(back, res);
        let mut buf = Vec::new();
        res.write_trace_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("iteration,value\n0,"));
    }
}
