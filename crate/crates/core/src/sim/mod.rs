//! Statevector and density-matrix simulation of [`Circuit`]s.

mod experiment;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

pub use experiment::{
    build_word_circuit, classify, noiseless_accept_curve, noisy_accept_curve, read_shot_records,
    sample_curve, sample_shots, write_shot_records, Classification, ClassifiedLength, ShotRecord,
    WordStyle,
};

pub const MAX_PURE_QUBITS: usize = 24;
pub const MAX_NOISY_QUBITS: usize = 12;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

fn real(v: f64) -> C {
    C::new(v, 0.0)
}

fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[real(c), real(-s)], [real(s), real(c)]]
}

/// The single-qubit unitary a gate applies to its target.
fn gate_unitary(g: &Gate) -> Mat2 {
    match *g {
        Gate::H(_) => {
            let h = real(FRAC_1_SQRT_2);
            [[h, h], [h, -h]]
        }
        Gate::Ry { angle, .. } | Gate::Cry { angle, .. } | Gate::Mcry { angle, .. } => ry(angle),
        Gate::Rz { angle, .. } => [
            [C::from_polar(1.0, -angle / 2.0), ZERO],
            [ZERO, C::from_polar(1.0, angle / 2.0)],
        ],
        Gate::Phase { angle, .. } => [[ONE, ZERO], [ZERO, C::from_polar(1.0, angle)]],
        Gate::Cx { .. } => [[ZERO, ONE], [ONE, ZERO]],
    }
}

/// Every gate is a single-qubit unitary conditioned on a control pattern.
struct Action {
    target: usize,
    mask: usize,
    value: usize,
    u: Mat2,
}

impl Action {
    fn of(g: &Gate) -> Self {
        let (mut mask, mut value) = (0, 0);
        for (q, on) in g.controls() {
            mask |= 1 << q;
            if on {
                value |= 1 << q;
            }
        }
        Action {
            target: g.target(),
            mask,
            value,
            u: gate_unitary(g),
        }
    }

    fn shifted(&self, by: usize, conjugate: bool) -> Self {
        let mut u = self.u;
        if conjugate {
            for row in &mut u {
                for v in row {
                    *v = v.conj();
                }
            }
        }
        Action {
            target: self.target + by,
            mask: self.mask << by,
            value: self.value << by,
            u,
        }
    }

    fn apply(&self, amps: &mut [C]) {
        let tb = 1usize << self.target;
        let u = &self.u;
        for i in 0..amps.len() {
            if i & tb != 0 || i & self.mask != self.value {
                continue;
            }
            let j = i | tb;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = u[0][0] * a + u[0][1] * b;
            amps[j] = u[1][0] * a + u[1][1] * b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Pure,
    Mixed,
}

/// A pure state (amplitudes, length `2^n`) or a density matrix stored row-major
/// as `rho[(row << n) | col]`. Basis index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    mode: Mode,
    data: Vec<C>,
}

impl QuantumState {
    pub fn zero(num_qubits: usize, mode: Mode) -> Self {
        let len = match mode {
            Mode::Pure => 1usize << num_qubits,
            Mode::Mixed => 1usize << (2 * num_qubits),
        };
        let mut data = vec![ZERO; len];
        data[0] = ONE;
        QuantumState {
            num_qubits,
            mode,
            data,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Amplitudes of a pure state.
    pub fn amplitudes(&self) -> Option<&[C]> {
        (self.mode == Mode::Pure).then_some(&self.data[..])
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Density-matrix entry `<row| rho |col>`.
    pub fn entry(&self, row: usize, col: usize) -> C {
        match self.mode {
            Mode::Pure => self.data[row] * self.data[col].conj(),
            Mode::Mixed => self.data[(row << self.num_qubits) | col],
        }
    }

    /// Computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|s| self.entry(s, s).re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn to_mixed(&self) -> QuantumState {
        if self.mode == Mode::Mixed {
            return self.clone();
        }
        let n = self.dim();
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(self.entry(r, c));
            }
        }
        QuantumState {
            num_qubits: self.num_qubits,
            mode: Mode::Mixed,
            data,
        }
    }

    /// `<psi| rho |psi>` against a pure reference state.
    pub fn fidelity_with(&self, psi: &[C]) -> f64 {
        let n = self.dim();
        let mut acc = ZERO;
        for r in 0..n {
            if psi[r] == ZERO {
                continue;
            }
            for c in 0..n {
                acc += psi[r].conj() * self.entry(r, c) * psi[c];
            }
        }
        acc.re
    }

    fn apply_unitary(&mut self, g: &Gate) {
        let a = Action::of(g);
        match self.mode {
            Mode::Pure => a.apply(&mut self.data),
            Mode::Mixed => {
                a.shifted(self.num_qubits, false).apply(&mut self.data);
                a.shifted(0, true).apply(&mut self.data);
            }
        }
    }

    /// `rho -> (1 - p) rho + p Tr_Q(rho) (x) I / 2^|Q|` on qubits `qs`.
    fn depolarize(&mut self, qs: &[usize], p: f64) {
        if p == 0.0 || qs.is_empty() {
            return;
        }
        let n = self.num_qubits;
        let qmask: usize = qs.iter().map(|&q| 1usize << q).sum();
        let patterns: Vec<usize> = (0..1usize << qs.len())
            .map(|s| {
                qs.iter()
                    .enumerate()
                    .filter(|&(i, _)| s >> i & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();
        let scale = p / patterns.len() as f64;
        let dim = 1usize << n;
        for r in (0..dim).filter(|r| r & qmask == 0) {
            for c in (0..dim).filter(|c| c & qmask == 0) {
                let traced: C = patterns
                    .iter()
                    .map(|&s| self.data[((r | s) << n) | (c | s)])
                    .sum();
                for &a in &patterns {
                    for &b in &patterns {
                        let idx = ((r | a) << n) | (c | b);
                        self.data[idx] *= 1.0 - p;
                        if a == b {
                            self.data[idx] += traced * scale;
                        }
                    }
                }
            }
        }
    }

    fn symmetrize(&mut self) {
        let n = self.num_qubits;
        let dim = 1usize << n;
        for r in 0..dim {
            let d = (r << n) | r;
            self.data[d] = real(self.data[d].re);
            for c in r + 1..dim {
                let (i, j) = ((r << n) | c, (c << n) | r);
                let avg = (self.data[i] + self.data[j].conj()) * 0.5;
                self.data[i] = avg;
                self.data[j] = avg.conj();
            }
        }
    }

    /// Probability that every qubit reads 0, with each readout flipped independently.
    pub fn all_zero_probability(&self, p_meas: f64) -> f64 {
        if p_meas == 0.0 {
            return self.entry(0, 0).re;
        }
        let n = self.num_qubits as i32;
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(s, &pr)| {
                let ones = s.count_ones() as i32;
                pr * (1.0 - p_meas).powi(n - ones) * p_meas.powi(ones)
            })
            .sum()
    }
}

/// Symmetric depolarizing noise after every gate plus independent readout flips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub p_meas: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p1: 0.001,
            p2: 0.01,
            p_meas: 0.02,
        }
    }
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, p_meas: f64) -> Result<Self> {
        let nm = NoiseModel { p1, p2, p_meas };
        for (name, v) in [("p1", p1), ("p2", p2), ("p_meas", p_meas)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Precondition(format!("{name}={v} outside [0, 1]")));
            }
        }
        Ok(nm)
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            p_meas: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_meas == 0.0
    }

    fn gate_error(&self, g: &Gate) -> f64 {
        if g.arity() == 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Noiseless evolution of `|0...0>` through every layer.
pub fn run_pure(c: &Circuit) -> Result<QuantumState> {
    if c.num_qubits() > MAX_PURE_QUBITS {
        return Err(Error::QubitBudget(c.num_qubits(), MAX_PURE_QUBITS));
    }
    let mut s = QuantumState::zero(c.num_qubits(), Mode::Pure);
    for g in c.gates() {
        s.apply_unitary(g);
    }
    Ok(s)
}

fn unprepare_layer(c: &Circuit) -> Vec<Gate> {
    if c.meta.unprepared {
        Vec::new()
    } else {
        c.control_qubits().into_iter().map(Gate::H).collect()
    }
}

/// Probability of reading all zeros after undoing the uniform preparation.
///
/// Circuits already carrying the inverse preparation are measured directly.
pub fn accept_probability_pure(c: &Circuit) -> Result<f64> {
    let mut s = run_pure(c)?;
    for g in unprepare_layer(c) {
        s.apply_unitary(&g);
    }
    Ok(s.entry(0, 0).re)
}

fn check_noisy(c: &Circuit) -> Result<()> {
    if c.num_qubits() > MAX_NOISY_QUBITS {
        return Err(Error::QubitBudget(c.num_qubits(), MAX_NOISY_QUBITS));
    }
    if c.has_multi_controlled() {
        return Err(Error::DecomposeFirst);
    }
    Ok(())
}

pub(crate) fn evolve_noisy(s: &mut QuantumState, layers: &[Vec<Gate>], nm: &NoiseModel) {
    for layer in layers {
        for g in layer {
            s.apply_unitary(g);
            s.depolarize(&g.qubits(), nm.gate_error(g));
        }
        s.symmetrize();
    }
}

/// Density-matrix evolution with depolarizing noise after every gate.
///
/// Gates with more than one control must be decomposed first.
pub fn run_noisy(c: &Circuit, nm: &NoiseModel) -> Result<QuantumState> {
    check_noisy(c)?;
    let mut s = QuantumState::zero(c.num_qubits(), Mode::Mixed);
    evolve_noisy(&mut s, c.layers(), nm);
    Ok(s)
}

/// Noisy acceptance: inverse preparation (if absent) under noise, then readout.
pub fn accept_probability_noisy(c: &Circuit, nm: &NoiseModel) -> Result<f64> {
    let mut s = run_noisy(c, nm)?;
    let tail = unprepare_layer(c);
    if !tail.is_empty() {
        evolve_noisy(&mut s, &[tail], nm);
    }
    Ok(s.all_zero_probability(nm.p_meas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_circuit_is_ground_state() {
        let s = run_pure(&Circuit::new(3)).unwrap();
        let a = s.amplitudes().unwrap();
        assert_eq!(a[0], ONE);
        assert!(a[1..].iter().all(|&z| z == ZERO));
    }

    #[test]
    fn hadamard_superposition() {
        let c = Circuit::from_gates(1, [Gate::H(0)]).unwrap();
        let a = run_pure(&c).unwrap().amplitudes().unwrap().to_vec();
        assert!((a[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn qubit_budgets() {
        assert!(matches!(
            run_pure(&Circuit::new(25)),
            Err(Error::QubitBudget(25, 24))
        ));
        assert!(matches!(
            run_noisy(&Circuit::new(13), &NoiseModel::default()),
            Err(Error::QubitBudget(13, 12))
        ));
    }

    #[test]
    fn open_control_fires_on_zero() {
        let c = Circuit::from_gates(
            2,
            [Gate::Cry {
                control: 0,
                target: 1,
                angle: PI,
                polarity: false,
            }],
        )
        .unwrap();
        let a = run_pure(&c).unwrap().amplitudes().unwrap().to_vec();
        assert!((a[2].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multi_controlled_needs_decomposition_under_noise() {
        let c = Circuit::from_gates(
            3,
            [Gate::Mcry {
                controls: vec![0, 1],
                pattern: vec![true, true],
                target: 2,
                angle: 1.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            run_noisy(&c, &NoiseModel::noiseless()),
            Err(Error::DecomposeFirst)
        ));
    }

    #[test]
    fn noiseless_density_matches_pure() {
        let c = Circuit::from_gates(
            3,
            [
                Gate::H(0),
                Gate::H(1),
                Gate::Cry {
                    control: 0,
                    target: 2,
                    angle: 0.7,
                    polarity: true,
                },
                Gate::Rz {
                    target: 1,
                    angle: 0.3,
                },
                Gate::Cx {
                    control: 1,
                    target: 2,
                },
                Gate::Phase {
                    target: 2,
                    angle: 1.1,
                },
            ],
        )
        .unwrap();
        let pure = run_pure(&c).unwrap().to_mixed();
        let mixed = run_noisy(&c, &NoiseModel::noiseless()).unwrap();
        for r in 0..8 {
            for col in 0..8 {
                assert!((pure.entry(r, col) - mixed.entry(r, col)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_depolarization_is_maximally_mixed() {
        let c = Circuit::from_gates(
            3,
            [
                Gate::H(0),
                Gate::Ry {
                    target: 1,
                    angle: 0.4,
                },
                Gate::Cx {
                    control: 0,
                    target: 2,
                },
            ],
        )
        .unwrap();
        let nm = NoiseModel::new(1.0, 1.0, 0.0).unwrap();
        let s = run_noisy(&c, &nm).unwrap();
        for r in 0..8 {
            for col in 0..8 {
                let want = if r == col { 0.125 } else { 0.0 };
                assert!((s.entry(r, col).re - want).abs() < 1e-12);
                assert!(s.entry(r, col).im.abs() < 1e-12);
            }
        }
        assert!((accept_probability_noisy(&c, &nm).unwrap() - 0.125).abs() < 1e-9);
    }

    #[test]
    fn readout_flips() {
        let s = QuantumState::zero(2, Mode::Mixed);
        assert!((s.all_zero_probability(0.1) - 0.81).abs() < 1e-15);
    }

    #[test]
    fn noise_model_range() {
        assert!(NoiseModel::new(-0.1, 0.0, 0.0).is_err());
        assert!(NoiseModel::new(0.0, 1.5, 0.0).is_err());
        assert!(NoiseModel::default().p2 > NoiseModel::default().p1);
    }
}
