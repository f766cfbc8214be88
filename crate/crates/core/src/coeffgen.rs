//! Coefficient-set constructions: cyclic, AIKPS, subset sums over a GAP,
//! and uniformly random.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zp::{mod_inverse, primes_in_range, primitive_root, Prime};

/// Default number of candidates tried by [`find_gap_params`].
pub const DEFAULT_ATTEMPT_CAP: u64 = 1_000_000;

/// Shallow parameters `(t_0; t_1..t_m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamVector {
    p: Prime,
    offset: u64,
    generators: Vec<u64>,
}

impl ParamVector {
    pub fn new(p: Prime, offset: u64, generators: Vec<u64>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Precondition(
                "at least one generator required".into(),
            ));
        }
        let generators = generators.into_iter().map(|t| p.reduce(t)).collect();
        Ok(ParamVector {
            p,
            offset: p.reduce(offset),
            generators,
        })
    }

    /// Builds from a flat coordinate vector `[t_0, t_1, .., t_m]`.
    pub fn from_coords(p: Prime, coords: &[u64]) -> Result<Self> {
        match coords.split_first() {
            Some((&t0, rest)) => ParamVector::new(p, t0, rest.to_vec()),
            None => Err(Error::Precondition("empty coordinate vector".into())),
        }
    }

    pub fn to_coords(&self) -> Vec<u64> {
        std::iter::once(self.offset)
            .chain(self.generators.iter().copied())
            .collect()
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// Number of generators `m`.
    pub fn m(&self) -> usize {
        self.generators.len()
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(u64::to_string).collect();
        write!(f, "({}; {})", self.offset, gens.join(","))
    }
}

/// Which construction produced a coefficient set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Cyclic,
    Aikps,
    GapSubsetSum,
    Random,
    Optimized,
    Explicit,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Cyclic => "cyclic",
            Provenance::Aikps => "aikps",
            Provenance::GapSubsetSum => "gap_subset_sum",
            Provenance::Random => "random",
            Provenance::Optimized => "optimized",
            Provenance::Explicit => "explicit",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cyclic" => Provenance::Cyclic,
            "aikps" => Provenance::Aikps,
            "gap" | "gap_subset_sum" => Provenance::GapSubsetSum,
            "random" => Provenance::Random,
            "optimized" => Provenance::Optimized,
            "explicit" => Provenance::Explicit,
            other => return Err(Error::Precondition(format!("unknown method {other:?}"))),
        })
    }
}

/// An ordered multiset `K = (k_1..k_d)` of rotation multipliers in Z_p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientSetJson", into = "CoefficientSetJson")]
pub struct CoefficientSet {
    p: Prime,
    coeffs: Vec<u64>,
    provenance: Provenance,
    params: Option<ParamVector>,
    proper_gap: Option<bool>,
}

impl CoefficientSet {
    pub fn new(p: Prime, coeffs: Vec<u64>, provenance: Provenance) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition(
                "coefficient set must be non-empty".into(),
            ));
        }
        Ok(CoefficientSet {
            p,
            coeffs: coeffs.into_iter().map(|k| p.reduce(k)).collect(),
            provenance,
            params: None,
            proper_gap: None,
        })
    }

    pub fn explicit(p: Prime, coeffs: Vec<u64>) -> Result<Self> {
        CoefficientSet::new(p, coeffs, Provenance::Explicit)
    }

    pub fn with_params(mut self, params: ParamVector) -> Self {
        self.params = Some(params);
        self
    }

    /// Records the result of a properness check alongside the set.
    pub fn with_proper_gap(mut self, proper: bool) -> Self {
        self.proper_gap = Some(proper);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn params(&self) -> Option<&ParamVector> {
        self.params.as_ref()
    }

    pub fn proper_gap(&self) -> Option<bool> {
        self.proper_gap
    }

    /// Distinct elements, ascending.
    pub fn distinct(&self) -> Vec<u64> {
        let mut v = self.coeffs.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Serialize, Deserialize)]
struct CoefficientSetJson {
    p: u64,
    method: Provenance,
    coeffs: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<GapParamsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    is_proper_gap: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct GapParamsJson {
    t0: u64,
    #[serde(rename = "T")]
    gens: Vec<u64>,
}

impl From<CoefficientSet> for CoefficientSetJson {
    fn from(k: CoefficientSet) -> Self {
        CoefficientSetJson {
            p: k.p.get(),
            method: k.provenance,
            coeffs: k.coeffs,
            params: k.params.map(|pv| GapParamsJson {
                t0: pv.offset,
                gens: pv.generators,
            }),
            is_proper_gap: k.proper_gap,
        }
    }
}

impl TryFrom<CoefficientSetJson> for CoefficientSet {
    type Error = Error;

    fn try_from(j: CoefficientSetJson) -> Result<Self> {
        let p = Prime::new(j.p)?;
        if let Some(&bad) = j.coeffs.iter().find(|&&k| k >= p.get()) {
            return Err(Error::Precondition(format!(
                "coefficient {bad} not reduced mod {p}"
            )));
        }
        let mut k = CoefficientSet::new(p, j.coeffs, j.method)?;
        if let Some(gp) = j.params {
            k.params = Some(ParamVector::new(p, gp.t0, gp.gens)?);
        }
        k.proper_gap = j.is_proper_gap;
        Ok(k)
    }
}

/// `k_i = g^i mod p` for `i = 1..d`, `g` the smallest primitive root.
pub fn cyclic_set(p: Prime, d: usize) -> Result<CoefficientSet> {
    if d == 0 || d as u64 > p.get() - 1 {
        return Err(Error::Precondition(format!(
            "cyclic set needs 1 <= d <= p-1, got d={d}, p={p}"
        )));
    }
    let g = primitive_root(p).value();
    let mut acc = 1;
    let coeffs = (0..d)
        .map(|_| {
            acc = p.mul(acc, g);
            acc
        })
        .collect();
    CoefficientSet::new(p, coeffs, Provenance::Cyclic)
}

/// The prime window `R` and integer range `S = 1..=s_max` behind an AIKPS set.
#[derive(Debug, Clone, PartialEq)]
pub struct AikpsWindow {
    pub p: Prime,
    pub eps: f64,
    /// Open interval bounds of the prime window.
    pub lo: f64,
    pub hi: f64,
    pub primes: Vec<u64>,
    pub s_max: u64,
}

impl AikpsWindow {
    pub fn new(p: Prime, eps: f64) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Precondition(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let log_p = (p.get() as f64).log2();
        let hi = log_p.powf(1.0 + eps);
        let lo = hi / 2.0;
        let primes: Vec<u64> = primes_in_range(lo, hi)
            .into_iter()
            .map(Prime::get)
            // an r divisible by p has no inverse
            .filter(|&r| r % p.get() != 0)
            .collect();
        if primes.is_empty() {
            return Err(Error::EmptyAikpsWindow { lo, hi });
        }
        let s_max = log_p.powf(1.0 + 2.0 * eps).floor() as u64;
        if s_max == 0 {
            return Err(Error::Precondition("AIKPS range S is empty".into()));
        }
        Ok(AikpsWindow {
            p,
            eps,
            lo,
            hi,
            primes,
            s_max,
        })
    }

    /// Generating pairs `(r, s)` in output order.
    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.primes
            .iter()
            .flat_map(move |&r| (1..=self.s_max).map(move |s| (r, s)))
    }

    pub fn inverse(&self, r: u64) -> u64 {
        mod_inverse(self.p.element(r))
            .expect("window primes are units mod p")
            .value()
    }
}

/// `{ s * r^{-1} mod p }` ordered by `(r, s)`.
pub fn aikps_set(p: Prime, eps: f64) -> Result<CoefficientSet> {
    let w = AikpsWindow::new(p, eps)?;
    let coeffs = w
        .primes
        .iter()
        .flat_map(|&r| {
            let inv = w.inverse(r);
            (1..=w.s_max).map(move |s| p.mul(s, inv))
        })
        .collect();
    CoefficientSet::new(p, coeffs, Provenance::Aikps)
}

/// All subset sums `t_0 + sum_{i: bit i of j} t_{i+1}`, indexed by `j`.
pub fn subset_sums(params: &ParamVector) -> Vec<u64> {
    let p = params.p;
    let mut out = Vec::with_capacity(1 << params.m());
    out.push(params.offset);
    for &t in &params.generators {
        let n = out.len();
        for j in 0..n {
            out.push(p.add(out[j], t));
        }
    }
    out
}

pub fn subset_sum_set(params: &ParamVector) -> Result<CoefficientSet> {
    if params.m() > 30 {
        return Err(Error::Precondition(format!(
            "m={} too large to enumerate 2^m subsets",
            params.m()
        )));
    }
    Ok(
        CoefficientSet::new(params.p, subset_sums(params), Provenance::GapSubsetSum)?
            .with_params(params.clone()),
    )
}

/// Values `2 t_0 + sum n_i t_i`, `n_i` in {0,1,2}, index `sum n_i 3^(i-1)`.
pub fn gap_values(params: &ParamVector) -> Vec<u64> {
    let p = params.p;
    let mut out = Vec::with_capacity(3usize.pow(params.m() as u32));
    out.push(p.add(params.offset, params.offset));
    for &t in &params.generators {
        let n = out.len();
        for j in 0..n {
            out.push(p.add(out[j], t));
        }
        for j in 0..n {
            out.push(p.add(out[n + j], t));
        }
    }
    out
}

/// True when `3^m > p`, i.e. no GAP with these digits can be proper.
pub fn three_pow_exceeds(m: usize, p: u64) -> bool {
    let mut v: u64 = 1;
    for _ in 0..m {
        v = v.saturating_mul(3);
        if v > p {
            return true;
        }
    }
    false
}

/// True iff all `3^m` values `2 t_0 + sum n_i t_i` are distinct mod p.
pub fn is_proper_gap(params: &ParamVector) -> bool {
    let pv = params.p.get();
    if three_pow_exceeds(params.m(), pv) {
        return false;
    }
    let values = gap_values(params);
    if pv <= 1 << 26 {
        let mut seen = vec![0u64; (pv as usize).div_ceil(64)];
        for v in values {
            let (w, b) = ((v / 64) as usize, v % 64);
            if seen[w] >> b & 1 == 1 {
                return false;
            }
            seen[w] |= 1 << b;
        }
        true
    } else {
        let mut v = values;
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSearch {
    Sequential,
    Random { seed: u64 },
}

/// Finds `(t_0; t_1..t_m)` whose doubled GAP is proper.
pub fn find_gap_params(p: Prime, m: usize, strategy: GapSearch) -> Result<ParamVector> {
    find_gap_params_capped(p, m, strategy, DEFAULT_ATTEMPT_CAP)
}

pub fn find_gap_params_capped(
    p: Prime,
    m: usize,
    strategy: GapSearch,
    cap: u64,
) -> Result<ParamVector> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let pv = p.get();
    if three_pow_exceeds(m, pv) {
        return Err(Error::PropernessImpossible { p: pv, m });
    }
    let attempts = std::cell::Cell::new(0u64);
    let check = |gens: Vec<u64>, t0: u64| -> Option<ParamVector> {
        attempts.set(attempts.get() + 1);
        let cand = ParamVector::new(p, t0, gens).ok()?;
        is_proper_gap(&cand).then_some(cand)
    };
    match strategy {
        GapSearch::Sequential => {
            // base-3 weights scaled by each unit, then an odometer over the generators
            for scale in 1..pv {
                if attempts.get() >= cap {
                    return Err(Error::SearchExhausted(attempts.get()));
                }
                let gens = (0..m).map(|i| p.mul(scale, p.pow(3, i as u64))).collect();
                if let Some(found) = check(gens, 0) {
                    return Ok(found);
                }
            }
            let mut gens = vec![1u64; m];
            while attempts.get() < cap {
                if let Some(found) = check(gens.clone(), 0) {
                    return Ok(found);
                }
                let mut i = 0;
                loop {
                    if i == m {
                        return Err(Error::SearchExhausted(attempts.get()));
                    }
                    gens[i] += 1;
                    if gens[i] < pv {
                        break;
                    }
                    gens[i] = 1;
                    i += 1;
                }
            }
            Err(Error::SearchExhausted(attempts.get()))
        }
        GapSearch::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while attempts.get() < cap {
                let t0 = rng.random_range(0..pv);
                let gens = (0..m).map(|_| rng.random_range(0..pv)).collect();
                if let Some(found) = check(gens, t0) {
                    return Ok(found);
                }
            }
            Err(Error::SearchExhausted(attempts.get()))
        }
    }
}

/// `d` values drawn independently and uniformly from `1..p`.
pub fn random_set(p: Prime, d: usize, seed: u64) -> Result<CoefficientSet> {
    if d == 0 {
        return Err(Error::Precondition("d must be at least 1".into()));
    }
    if p.get() < 2 {
        return Err(Error::Precondition(
            "p too small for nonzero coefficients".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..d).map(|_| rng.random_range(1..p.get())).collect();
    CoefficientSet::new(p, coeffs, Provenance::Random)
}

/// `d = ceil(2 log2(2p) / eps)`, the probabilistic-method set size.
pub fn probabilistic_size(p: Prime, eps: f64) -> usize {
    (2.0 * (2.0 * p.get() as f64).log2() / eps).ceil() as usize
}

/// `m = ceil(log2 p - 2 log2 eps)`, the GAP-method generator count.
pub fn gap_dimension(p: Prime, eps: f64) -> usize {
    ((p.get() as f64).log2() - 2.0 * eps.log2()).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn pv(q: u64, t0: u64, t: &[u64]) -> ParamVector {
        ParamVector::new(p(q), t0, t.to_vec()).unwrap()
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(cyclic_set(p(7), 3).unwrap().coeffs(), &[3, 2, 6]);
        assert_eq!(cyclic_set(p(3), 1).unwrap().coeffs(), &[2]);
        assert!(cyclic_set(p(7), 7).is_err());
        assert!(cyclic_set(p(7), 0).is_err());
        let full = cyclic_set(p(101), 100).unwrap();
        assert_eq!(full.distinct().len(), 100);
    }

    #[test]
    fn aikps_p1013() {
        let w = AikpsWindow::new(p(1013), 0.5).unwrap();
        assert_eq!(w.primes, vec![17, 19, 23, 29, 31]);
        assert_eq!(w.s_max, 99);
        let k = aikps_set(p(1013), 0.5).unwrap();
        assert_eq!(k.len(), 495);
        for ((r, s), &e) in w.pairs().zip(k.coeffs()) {
            assert_eq!(e * r % 1013, s);
        }
    }

    #[test]
    fn aikps_p17_small_window() {
        let w = AikpsWindow::new(p(17), 0.1).unwrap();
        assert!((w.lo - 2.3527).abs() < 1e-3 && (w.hi - 4.7054).abs() < 1e-3);
        assert_eq!(w.primes, vec![3]);
        assert_eq!(w.s_max, 5);
        // 3^{-1} = 6 mod 17
        assert_eq!(aikps_set(p(17), 0.1).unwrap().coeffs(), &[6, 12, 1, 7, 13]);
    }

    #[test]
    fn aikps_errors() {
        assert!(AikpsWindow::new(p(17), 0.0).is_err());
        // (log2 3)^1.01 ~ 1.59: window (0.8, 1.59) holds no prime
        assert!(matches!(
            aikps_set(p(3), 0.01),
            Err(Error::EmptyAikpsWindow { .. })
        ));
    }

    #[test]
    fn subset_sum_examples() {
        let k = subset_sum_set(&pv(17, 0, &[1, 2, 4])).unwrap();
        assert_eq!(k.coeffs(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        // bit i of the index selects t_{i+1}; 4 + 8 = 12 makes entries 3 and 4 collide
        let k = subset_sum_set(&pv(17, 6, &[4, 8, 12])).unwrap();
        assert_eq!(k.coeffs(), &[6, 10, 14, 1, 1, 5, 9, 13]);
        let k = subset_sum_set(&pv(7, 5, &[0])).unwrap();
        assert_eq!(k.coeffs(), &[5, 5]);
    }

    #[test]
    fn proper_gap_examples() {
        assert!(is_proper_gap(&pv(31, 0, &[1, 3, 9])));
        assert!(!is_proper_gap(&pv(17, 0, &[1, 1])));
        assert!(!is_proper_gap(&pv(7, 0, &[1, 3])));
    }

    #[test]
    fn gap_values_enumeration_matches_definition() {
        let params = pv(1013, 7, &[5, 40, 333]);
        let vals = gap_values(&params);
        for (idx, &v) in vals.iter().enumerate() {
            let (n1, n2, n3) = (idx % 3, idx / 3 % 3, idx / 9);
            let want = (14 + n1 as u64 * 5 + n2 as u64 * 40 + n3 as u64 * 333) % 1013;
            assert_eq!(v, want);
        }
    }

    #[test]
    fn find_gap_examples() {
        let found = find_gap_params(p(31), 3, GapSearch::Sequential).unwrap();
        assert_eq!(found.offset(), 0);
        assert_eq!(found.generators(), &[1, 3, 9]);
        assert!(matches!(
            find_gap_params(p(7), 2, GapSearch::Sequential),
            Err(Error::PropernessImpossible { p: 7, m: 2 })
        ));
        assert!(matches!(
            find_gap_params(p(7), 2, GapSearch::Random { seed: 3 }),
            Err(Error::PropernessImpossible { .. })
        ));
        let r = find_gap_params(p(257), 3, GapSearch::Random { seed: 11 }).unwrap();
        assert!(is_proper_gap(&r));
        assert_eq!(
            r,
            find_gap_params(p(257), 3, GapSearch::Random { seed: 11 }).unwrap()
        );
    }

    #[test]
    fn find_gap_respects_cap() {
        // 27 of 29 residues must be hit: random candidates almost never succeed
        assert!(matches!(
            find_gap_params_capped(p(29), 3, GapSearch::Random { seed: 1 }, 20),
            Err(Error::SearchExhausted(20))
        ));
    }

    #[test]
    fn random_set_contract() {
        let a = random_set(p(1013), 44, 9).unwrap();
        assert_eq!(a.len(), 44);
        assert!(a.coeffs().iter().all(|&k| (1..1013).contains(&k)));
        assert_eq!(a, random_set(p(1013), 44, 9).unwrap());
        assert_ne!(a, random_set(p(1013), 44, 10).unwrap());
        assert!(random_set(p(1013), 0, 1).is_err());
    }

    #[test]
    fn size_formulas() {
        assert_eq!(probabilistic_size(p(1013), 0.5), 44);
        assert_eq!(gap_dimension(p(31), 0.5), 7);
        assert_eq!(gap_dimension(p(17), 1.0), 5);
    }

    #[test]
    fn json_shape() {
        let k = subset_sum_set(&pv(31, 0, &[1, 3, 9]))
            .unwrap()
            .with_proper_gap(true);
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(
            s,
            r#"{"p":31,"method":"gap_subset_sum","coeffs":[0,1,3,4,9,10,12,13],"params":{"t0":0,"T":[1,3,9]},"is_proper_gap":true}"#
        );
        let back: CoefficientSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        let plain = cyclic_set(p(7), 3).unwrap();
        assert_eq!(
            serde_json::to_string(&plain).unwrap(),
            r#"{"p":7,"method":"cyclic","coeffs":[3,2,6]}"#
        );
        assert!(serde_json::from_str::<CoefficientSet>(
            r#"{"p":8,"method":"explicit","coeffs":[1]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<CoefficientSet>(
            r#"{"p":7,"method":"explicit","coeffs":[9]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<CoefficientSet>(
            r#"{"p":7,"method":"explicit","coeffs":[]}"#
        )
        .is_err());
    }

    proptest::proptest! {
        #[test]
        fn subset_sum_size_and_distinctness(t0 in 0u64..1013, t in proptest::collection::vec(0u64..1013, 1..7)) {
            let params = pv(1013, t0, &t);
            let k = subset_sum_set(&params).unwrap();
            proptest::prop_assert_eq!(k.len(), 1 << t.len());
            if is_proper_gap(&params) {
                proptest::prop_assert_eq!(k.distinct().len(), k.len());
            }
        }
    }
}
