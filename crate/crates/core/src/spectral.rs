//! Exponential-sum analysis of coefficient sets.
//!
//! The central quantity is the normalized squared character sum
//! `|sum_j e(k_j x / p)|^2 / d^2`, whose maximum over nonzero `x` bounds the
//! automaton's error on every non-member word.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::coeffgen::{
    gap_values, is_proper_gap, subset_sum_set, three_pow_exceeds, CoefficientSet, ParamVector,
};
use crate::error::{Error, Result};
use crate::zp::Prime;

/// Values within this distance of the maximum count as ties for `argmax_x`.
const TIE_TOLERANCE: f64 = 1e-12;

/// Table of `e(r/p)` for `r` in `0..p`, or on-the-fly evaluation for huge `p`.
pub struct UnitRoots {
    p: u64,
    table: Option<Vec<Complex64>>,
}

impl UnitRoots {
    const TABLE_LIMIT: u64 = 1 << 22;

    pub fn new(p: Prime) -> Self {
        let pv = p.get();
        let table = (pv <= Self::TABLE_LIMIT).then(|| {
            (0..pv)
                .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / pv as f64))
                .collect()
        });
        UnitRoots { p: pv, table }
    }

    /// `e(r/p)` for a residue `r < p`.
    #[inline]
    pub fn get(&self, r: u64) -> Complex64 {
        match &self.table {
            Some(t) => t[r as usize],
            None => Complex64::from_polar(1.0, TAU * r as f64 / self.p as f64),
        }
    }

    /// `sum_j e(k_j x / p)`.
    pub fn character_sum(&self, coeffs: &[u64], x: u64) -> Complex64 {
        let x = x % self.p;
        coeffs.iter().map(|&k| self.get(k * x % self.p)).sum()
    }
}

/// `(1/d^2) (sum_i cos(2 pi k_i x / p))^2`, the probability that the
/// automaton accepts the word `a^x`.
pub fn acceptance_probability(k: &CoefficientSet, x: u64) -> f64 {
    let p = k.p().get();
    let x = x % p;
    let d = k.len() as f64;
    let s: f64 = k
        .coeffs()
        .iter()
        .map(|&c| (TAU * (c * x % p) as f64 / p as f64).cos())
        .sum();
    (s / d) * (s / d)
}

/// Worst-case error over nonzero `x`, with the per-`x` values it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile {
    pub epsilon: f64,
    pub argmax_x: u64,
    /// `per_x[i]` is the value at `x = i + 1`.
    pub per_x: Option<Vec<f64>>,
}

impl ErrorProfile {
    fn from_values(values: Vec<f64>, keep: bool) -> Self {
        let epsilon = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax_x = values
            .iter()
            .position(|&v| v >= epsilon - TIE_TOLERANCE)
            .map_or(1, |i| i as u64 + 1);
        ErrorProfile {
            epsilon,
            argmax_x,
            per_x: keep.then_some(values),
        }
    }

    /// Writes `x,value` rows behind a `#` header line carrying `p`, `d` and `method`.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &ProfileHeader) -> Result<()> {
        writeln!(
            out,
            "# p={} d={} method={}",
            header.p, header.d, header.method
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        if let Some(values) = &self.per_x {
            for (i, v) in values.iter().enumerate() {
                w.write_record([(i + 1).to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<(ProfileHeader, ErrorProfile)> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let header = ProfileHeader::parse(first.trim_end())?;
        let mut rdr = csv::Reader::from_reader(input);
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse_err = |msg: &str| Error::Parse {
                line: i + 3,
                msg: msg.to_string(),
            };
            let x: u64 = rec
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad x"))?;
            if x != i as u64 + 1 {
                return Err(parse_err("x column must be 1, 2, ..."));
            }
            let v: f64 = rec
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad value"))?;
            values.push(v);
        }
        Ok((header, ErrorProfile::from_values(values, true)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileHeader {
    pub p: u64,
    pub d: usize,
    pub method: String,
}

impl ProfileHeader {
    pub fn for_set(k: &CoefficientSet) -> Self {
        ProfileHeader {
            p: k.p().get(),
            d: k.len(),
            method: k.provenance().to_string(),
        }
    }

    fn parse(line: &str) -> Result<Self> {
        let err = |msg: &str| Error::Parse {
            line: 1,
            msg: msg.to_string(),
        };
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| err("missing header"))?;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for tok in body.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| err("expected key=value"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| err(&format!("missing {k}")))
        };
        Ok(ProfileHeader {
            p: get("p")?.parse().map_err(|_| err("bad p"))?,
            d: get("d")?.parse().map_err(|_| err("bad d"))?,
            method: get("method")?.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsilonMethod {
    /// Transform when `d > log2 p`, direct sums otherwise.
    #[default]
    Auto,
    Direct,
    Transform,
}

pub fn epsilon_of(k: &CoefficientSet) -> ErrorProfile {
    epsilon_with(k, EpsilonMethod::Auto, true)
}

/// Just the worst-case value.
pub fn epsilon_value(k: &CoefficientSet) -> f64 {
    epsilon_with(k, EpsilonMethod::Auto, false).epsilon
}

pub fn epsilon_with(k: &CoefficientSet, method: EpsilonMethod, keep_profile: bool) -> ErrorProfile {
    let p = k.p();
    let use_transform = match method {
        EpsilonMethod::Direct => false,
        EpsilonMethod::Transform => true,
        EpsilonMethod::Auto => k.len() as f64 > (p.get() as f64).log2(),
    };
    let sums = if use_transform {
        squared_sums_transform(p, k.coeffs())
    } else {
        squared_sums_direct(p, k.coeffs())
    };
    let d2 = (k.len() * k.len()) as f64;
    ErrorProfile::from_values(sums.into_iter().map(|s| s / d2).collect(), keep_profile)
}

/// `|sum_j e(k_j x / p)|^2` for `x = 1..p-1`, by direct summation.
fn squared_sums_direct(p: Prime, coeffs: &[u64]) -> Vec<f64> {
    let roots = UnitRoots::new(p);
    (1..p.get())
        .map(|x| roots.character_sum(coeffs, x).norm_sqr())
        .collect()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|pl| pl.borrow_mut().plan_fft_forward(len))
}

/// Same values via a length-`p` DFT of the coefficient histogram.
fn squared_sums_transform(p: Prime, coeffs: &[u64]) -> Vec<f64> {
    let n = p.get() as usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for &k in coeffs {
        buf[k as usize].re += 1.0;
    }
    plan(n).process(&mut buf);
    // forward DFT carries e(-kx/p); the modulus is the same
    buf[1..].iter().map(|c| c.norm_sqr()).collect()
}

/// Number of quadruples `(a, b, a', b')` in `A^4` with `a + b = a' + b'`,
/// `A` taken as the set of distinct coefficients.
pub fn additive_energy(a: &CoefficientSet) -> u64 {
    pair_sum_counts(a.p(), &a.distinct())
        .into_values()
        .map(|r| r * r)
        .sum()
}

/// `R_n(A)` for every attained `n`, from one pass over ordered pairs.
pub fn pair_sum_counts(p: Prime, set: &[u64]) -> BTreeMap<u64, u64> {
    let pv = p.get();
    if pv <= 1 << 24 {
        let mut counts = vec![0u64; pv as usize];
        for &x in set {
            for &y in set {
                counts[((x + y) % pv) as usize] += 1;
            }
        }
        counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(n, c)| (n as u64, c))
            .collect()
    } else {
        let mut counts = BTreeMap::new();
        for &x in set {
            for &y in set {
                *counts.entry((x + y) % pv).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// `R_n(A) = 2^{|c_1(n)|}` for the subset-sum set of a proper GAP, where
/// `c_1(n)` is the set of indices with digit 1 in the unique representation
/// `n = 2 t_0 + sum gamma_i t_i`.
pub fn solution_count_profile(params: &ParamVector) -> Result<BTreeMap<u64, u64>> {
    if params.m() > 16 {
        return Err(Error::Precondition(format!("m={} exceeds 16", params.m())));
    }
    if !is_proper_gap(params) {
        return Err(Error::NotProperGap);
    }
    let mut out = BTreeMap::new();
    for (idx, n) in gap_values(params).into_iter().enumerate() {
        let mut digits = idx;
        let mut ones = 0;
        while digits > 0 {
            if digits % 3 == 1 {
                ones += 1;
            }
            digits /= 3;
        }
        out.insert(n, 1u64 << ones);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditiveStats {
    pub energy: u64,
    pub fourier_bias: f64,
    pub density: f64,
}

/// `max_{xi != 0} |(1/p) sum_{a in A} e(-xi a / p)|` over distinct elements,
/// together with the energy and density of the same set.
pub fn fourier_bias(a: &CoefficientSet) -> AdditiveStats {
    let set = a.distinct();
    let p = a.p();
    let pv = p.get() as f64;
    let bias = squared_sums_direct(p, &set)
        .into_iter()
        .fold(0.0f64, f64::max)
        .sqrt()
        / pv;
    AdditiveStats {
        energy: additive_energy(a),
        fourier_bias: bias,
        density: set.len() as f64 / pv,
    }
}

/// The three sides of `|A|_U^4 <= E/|Z|^3 - P^4 <= |A|_U^2 P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasEnergyBound {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl BiasEnergyBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.middle + tol && self.middle <= self.upper + tol
    }
}

pub fn bias_energy_bound(a: &CoefficientSet) -> BiasEnergyBound {
    let stats = fourier_bias(a);
    let z = a.p().get() as f64;
    let u = stats.fourier_bias;
    let prob = stats.density;
    BiasEnergyBound {
        lower: u.powi(4),
        middle: stats.energy as f64 / (z * z * z) - prob.powi(4),
        upper: u * u * prob,
    }
}

pub fn verify_bias_energy_bound(a: &CoefficientSet) -> bool {
    bias_energy_bound(a).holds(1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapTheoremReport {
    pub epsilon_exact: f64,
    /// `sqrt(p / 2^m)`.
    pub bound_sqrt_p_over_d: f64,
    pub holds: bool,
}

/// Checks `epsilon(A) <= sqrt(p / 2^m)` for the subset-sum set of a proper GAP.
pub fn verify_gap_theorem(params: &ParamVector) -> Result<GapTheoremReport> {
    let pv = params.p().get();
    if three_pow_exceeds(params.m(), pv) {
        return Err(Error::PropernessImpossible {
            p: pv,
            m: params.m(),
        });
    }
    if !is_proper_gap(params) {
        return Err(Error::NotProperGap);
    }
    let a = subset_sum_set(params)?;
    let epsilon_exact = epsilon_value(&a);
    let bound = (pv as f64 / (1u64 << params.m()) as f64).sqrt();
    Ok(GapTheoremReport {
        epsilon_exact,
        bound_sqrt_p_over_d: bound,
        holds: epsilon_exact <= bound + 1e-9,
    })
}
