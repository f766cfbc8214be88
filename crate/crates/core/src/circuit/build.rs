use std::f64::consts::PI;

use crate::coeffgen::{subset_sums, AikpsWindow, CoefficientSet, ParamVector};
use crate::error::Result;
use crate::zp::Prime;

use super::{Circuit, CircuitMeta, Gate};

/// `4 pi (k x mod p) / p`: RY by this angle rotates `|0>` to
/// `cos(2 pi k x / p)|0> + sin(2 pi k x / p)|1>`.
pub fn rotation_angle(p: Prime, k: u64, x: u64) -> f64 {
    let r = p.mul(k, p.reduce(x));
    4.0 * PI * r as f64 / p.get() as f64
}

/// A fingerprint source: shallow parameters or an explicit coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub enum Fingerprint {
    Shallow(ParamVector),
    Deep(CoefficientSet),
}

impl Fingerprint {
    pub fn p(&self) -> Prime {
        match self {
            Fingerprint::Shallow(pv) => pv.p(),
            Fingerprint::Deep(k) => k.p(),
        }
    }

    /// Number of control qubits.
    pub fn controls(&self) -> usize {
        match self {
            Fingerprint::Shallow(pv) => pv.m(),
            Fingerprint::Deep(k) => deep_controls(k.len()),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.controls() + 1
    }

    /// Coefficient per control basis state (padded for deep sources).
    pub fn coefficients(&self) -> Vec<u64> {
        match self {
            Fingerprint::Shallow(pv) => subset_sums(pv),
            Fingerprint::Deep(k) => padded(k),
        }
    }

    /// The rotation layers for word length `x`, without preparation.
    pub fn rotation_layers(&self, x: u64) -> Vec<Vec<Gate>> {
        match self {
            Fingerprint::Shallow(pv) => shallow_layers(pv, x),
            Fingerprint::Deep(k) => deep_layers(k, x),
        }
    }

    pub fn build(&self, x: u64) -> Circuit {
        match self {
            Fingerprint::Shallow(pv) => build_shallow(pv, x),
            Fingerprint::Deep(k) => build_deep(k, x),
        }
    }
}

fn deep_controls(d: usize) -> usize {
    (d.max(2).next_power_of_two().trailing_zeros()) as usize
}

fn padded(k: &CoefficientSet) -> Vec<u64> {
    let m = deep_controls(k.len());
    let mut coeffs = k.coeffs().to_vec();
    let last = *coeffs.last().expect("coefficient sets are non-empty");
    coeffs.resize(1 << m, last);
    coeffs
}

fn hadamards(controls: usize) -> Vec<Gate> {
    (0..controls).map(Gate::H).collect()
}

fn assemble(num_qubits: usize, layers: Vec<Vec<Gate>>, meta: CircuitMeta) -> Circuit {
    let mut c = Circuit::new(num_qubits).with_meta(meta);
    for layer in layers {
        c.push_layer(layer)
            .expect("constructions emit disjoint layers");
    }
    c
}

fn deep_layers(k: &CoefficientSet, x: u64) -> Vec<Vec<Gate>> {
    let m = deep_controls(k.len());
    let coeffs = padded(k);
    (0..coeffs.len())
        .rev()
        .map(|j| {
            vec![Gate::Mcry {
                controls: (0..m).collect(),
                pattern: (0..m).map(|i| j >> i & 1 == 1).collect(),
                target: m,
                angle: rotation_angle(k.p(), coeffs[j], x),
            }]
        })
        .collect()
}

/// Hadamards on `m` controls, then one multi-controlled RY per coefficient.
///
/// Coefficient `j` fires on the control basis state whose bit `i` is bit `i`
/// of `j`. Sets whose size is not a power of two are padded by repeating the
/// last coefficient; the count is kept in `meta.padding`.
pub fn build_deep(k: &CoefficientSet, x: u64) -> Circuit {
    let m = deep_controls(k.len());
    let coeffs = padded(k);
    let mut layers = vec![hadamards(m)];
    layers.extend(deep_layers(k, x));
    let meta = CircuitMeta {
        construction: "deep".into(),
        p: Some(k.p().get()),
        x: Some(x),
        target: Some(m),
        padding: coeffs.len() - k.len(),
        coefficients: Some(coeffs),
        ..Default::default()
    };
    assemble(m + 1, layers, meta)
}

fn shallow_layers(params: &ParamVector, x: u64) -> Vec<Vec<Gate>> {
    let m = params.m();
    let p = params.p();
    let mut layers: Vec<Vec<Gate>> = params
        .generators()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            vec![Gate::Cry {
                control: i,
                target: m,
                angle: rotation_angle(p, t, x),
                polarity: true,
            }]
        })
        .collect();
    layers.push(vec![Gate::Ry {
        target: m,
        angle: rotation_angle(p, params.offset(), x),
    }]);
    layers
}

/// The per-letter rotation block of the shallow circuit (`x = 1`).
pub fn shallow_letter_block(params: &ParamVector) -> Vec<Vec<Gate>> {
    shallow_layers(params, 1)
}

/// Hadamards on `m` controls, one controlled RY per generator, then the
/// offset rotation; depth `m + 2`.
pub fn build_shallow(params: &ParamVector, x: u64) -> Circuit {
    let m = params.m();
    let mut layers = vec![hadamards(m)];
    layers.extend(shallow_layers(params, x));
    let meta = CircuitMeta {
        construction: "shallow".into(),
        p: Some(params.p().get()),
        x: Some(x),
        target: Some(m),
        coefficients: Some(subset_sums(params)),
        ..Default::default()
    };
    assemble(m + 1, layers, meta)
}

/// Number of binary-weighted rotations per AIKPS block.
fn aikps_weights(p: Prime, eps: f64) -> usize {
    let ll = (p.get() as f64).log2().log2();
    ((1.0 + 2.0 * eps) * ll).ceil().max(1.0) as usize
}

/// Concatenated AIKPS blocks `C_j`, one per prime `r_j` in the window.
///
/// Qubits `0..w-1` carry the binary weights, the next `ceil(log2 |R|)`
/// qubits select the block, and the last qubit is the target. Block `j`
/// fires on selector state `j`; with `|R| = 1` the selector is empty and the
/// rotations are plain CRY/RY as in the single-block circuit. All control
/// qubits share one Hadamard layer, so depth is `1 + |R| * w`.
pub fn build_aikps(p: Prime, eps: f64, x: u64) -> Result<Circuit> {
    let window = AikpsWindow::new(p, eps)?;
    let weights = aikps_weights(p, eps);
    let blocks = window.primes.len();
    let sel = if blocks == 1 {
        0
    } else {
        blocks.next_power_of_two().trailing_zeros() as usize
    };
    let target = weights + sel;
    let selectors: Vec<usize> = (weights..weights + sel).collect();

    let mut layers = vec![hadamards(target)];
    let mut coefficients = vec![0u64; 1 << target];
    for (j, &r) in window.primes.iter().enumerate() {
        let inv = window.inverse(r);
        let sel_pattern: Vec<bool> = (0..sel).map(|i| j >> i & 1 == 1).collect();
        let rot = |extra: Option<usize>, mult: u64| {
            let angle = rotation_angle(p, p.mul(mult, inv), x);
            match (extra, sel) {
                (Some(c), 0) => Gate::Cry {
                    control: c,
                    target,
                    angle,
                    polarity: true,
                },
                (None, 0) => Gate::Ry { target, angle },
                (extra, _) => Gate::Mcry {
                    controls: extra.into_iter().chain(selectors.iter().copied()).collect(),
                    pattern: extra
                        .map(|_| true)
                        .into_iter()
                        .chain(sel_pattern.iter().copied())
                        .collect(),
                    target,
                    angle,
                },
            }
        };
        for k in 0..weights {
            layers.push(vec![rot(Some(k), 1u64 << k)]);
        }
        layers.push(vec![rot(None, 1)]);
        for b in 0..1usize << weights {
            coefficients[(j << weights) | b] = p.mul(b as u64 + 1, inv);
        }
    }
    let unused = (1usize << sel) - blocks;
    let realized_max = 1u64 << weights;
    let note = format!(
        "s realized 1..={realized_max} vs S=1..={}; {} unused selector states carry coefficient 0",
        window.s_max, unused
    );
    let meta = CircuitMeta {
        construction: "aikps".into(),
        p: Some(p.get()),
        x: Some(x),
        target: Some(target),
        coefficients: Some(coefficients),
        note: Some(note),
        ..Default::default()
    };
    Ok(assemble(target + 1, layers, meta))
}
