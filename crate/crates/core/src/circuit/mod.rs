//! Gate-level circuits: a layered IR, the fingerprinting constructions,
//! basis rewriting and linear-chain CX accounting.

mod build;
mod routing;
mod text;
mod transpile;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub use build::{
    build_aikps, build_deep, build_shallow, rotation_angle, shallow_letter_block, Fingerprint,
};
pub use routing::{best_nn_cx_count, nn_cx_count, Layout, RoutingReport};
pub use transpile::{decompose_multi_controlled, transpile_ry_to_rz};

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    Ry {
        target: usize,
        angle: f64,
    },
    Rz {
        target: usize,
        angle: f64,
    },
    Phase {
        target: usize,
        angle: f64,
    },
    Cx {
        control: usize,
        target: usize,
    },
    /// Single-controlled RY; `polarity = false` fires on control `|0>`.
    Cry {
        control: usize,
        target: usize,
        angle: f64,
        polarity: bool,
    },
    /// RY on `target` when `controls[i]` is in state `pattern[i]` for all `i`.
    Mcry {
        controls: Vec<usize>,
        pattern: Vec<bool>,
        target: usize,
        angle: f64,
    },
}

impl Gate {
    pub fn target(&self) -> usize {
        match self {
            Gate::H(t) => *t,
            Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::Phase { target, .. }
            | Gate::Cx { target, .. }
            | Gate::Cry { target, .. }
            | Gate::Mcry { target, .. } => *target,
        }
    }

    /// Control qubits paired with the state each must be in.
    pub fn controls(&self) -> Vec<(usize, bool)> {
        match self {
            Gate::Cx { control, .. } => vec![(*control, true)],
            Gate::Cry {
                control, polarity, ..
            } => vec![(*control, *polarity)],
            Gate::Mcry {
                controls, pattern, ..
            } => controls
                .iter()
                .copied()
                .zip(pattern.iter().copied())
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.controls().into_iter().map(|(c, _)| c).collect();
        q.push(self.target());
        q
    }

    pub fn arity(&self) -> usize {
        self.qubits().len()
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::Phase { angle, .. }
            | Gate::Cry { angle, .. }
            | Gate::Mcry { angle, .. } => Some(*angle),
            Gate::H(_) | Gate::Cx { .. } => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        self.angle().is_some()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::Phase { .. } => "PHASE",
            Gate::Cx { .. } => "CX",
            Gate::Cry { .. } => "CRY",
            Gate::Mcry { .. } => "MCRY",
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        if let Gate::Mcry {
            controls, pattern, ..
        } = self
        {
            if controls.len() != pattern.len() {
                return Err(Error::InvalidCircuit(
                    "control pattern length differs from control count".into(),
                ));
            }
        }
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= num_qubits) {
            return Err(Error::InvalidCircuit(format!(
                "qubit {q} out of range for {num_qubits} qubits"
            )));
        }
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::InvalidCircuit(format!(
                    "{} gate repeats qubit {a}",
                    self.kind()
                )));
            }
        }
        Ok(())
    }
}

/// Descriptive data carried alongside a circuit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitMeta {
    pub construction: String,
    pub p: Option<u64>,
    /// Word length the angles were built for.
    pub x: Option<u64>,
    /// Fingerprint target qubit; every other qubit is a control.
    pub target: Option<usize>,
    /// Coefficients appended to reach a power-of-two count.
    pub padding: usize,
    /// Multiplier realized on each control basis state, by basis index.
    pub coefficients: Option<Vec<u64>>,
    /// True once the inverse of the uniform preparation has been appended.
    pub unprepared: bool,
    pub note: Option<String>,
}

/// An ordered list of layers; gates in one layer act on disjoint qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    layers: Vec<Vec<Gate>>,
    pub meta: CircuitMeta,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            layers: Vec::new(),
            meta: CircuitMeta::default(),
        }
    }

    pub fn with_meta(mut self, meta: CircuitMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Appends a layer after checking qubit ranges and disjointness.
    pub fn push_layer(&mut self, layer: Vec<Gate>) -> Result<()> {
        let mut used = vec![false; self.num_qubits];
        for g in &layer {
            g.validate(self.num_qubits)?;
            for q in g.qubits() {
                if std::mem::replace(&mut used[q], true) {
                    return Err(Error::InvalidCircuit(format!(
                        "layer {} touches qubit {q} twice",
                        self.layers.len()
                    )));
                }
            }
        }
        if !layer.is_empty() {
            self.layers.push(layer);
        }
        Ok(())
    }

    /// Packs a gate sequence into layers as early as qubit dependencies allow.
    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits);
        let mut frontier = vec![0usize; num_qubits];
        for g in gates {
            g.validate(num_qubits)?;
            let qs = g.qubits();
            let level = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            if level == c.layers.len() {
                c.layers.push(Vec::new());
            }
            for &q in &qs {
                frontier[q] = level + 1;
            }
            c.layers[level].push(g);
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    /// Gates in execution order.
    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// The fingerprint target, defaulting to the last qubit.
    pub fn target(&self) -> usize {
        self.meta
            .target
            .unwrap_or(self.num_qubits.saturating_sub(1))
    }

    pub fn control_qubits(&self) -> Vec<usize> {
        let t = self.target();
        (0..self.num_qubits).filter(|&q| q != t).collect()
    }

    /// Appends all layers of `other`, which must have the same width.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::InvalidCircuit("width mismatch in append".into()));
        }
        self.layers.extend(other.layers.iter().cloned());
        Ok(())
    }

    /// Appends `H` on every control qubit, undoing the uniform preparation.
    pub fn append_unprepare(&mut self) {
        let layer: Vec<Gate> = self.control_qubits().into_iter().map(Gate::H).collect();
        if !layer.is_empty() {
            self.layers.push(layer);
        }
        self.meta.unprepared = true;
    }

    pub fn has_multi_controlled(&self) -> bool {
        self.gates().any(|g| g.arity() > 2)
    }

    pub fn metrics(&self) -> Metrics {
        let mut gate_counts = BTreeMap::new();
        for g in self.gates() {
            *gate_counts.entry(g.kind().to_string()).or_insert(0) += 1;
        }
        Metrics {
            depth: self.depth(),
            width: self.num_qubits,
            rotation_depth: self
                .layers
                .iter()
                .filter(|l| l.iter().any(Gate::is_rotation))
                .count(),
            gate_counts,
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    /// Number of layers.
    pub depth: usize,
    /// Number of qubits.
    pub width: usize,
    /// Layers containing at least one rotation.
    pub rotation_depth: usize,
    pub gate_counts: BTreeMap<String, usize>,
}

impl Metrics {
    pub fn count(&self, kind: &str) -> usize {
        self.gate_counts.get(kind).copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_metrics() {
        let m = Circuit::new(3).metrics();
        assert_eq!(m.depth, 0);
        assert_eq!(m.width, 3);
        assert!(m.gate_counts.is_empty());
    }

    #[test]
    fn layers_must_be_disjoint() {
        let mut c = Circuit::new(2);
        assert!(c
            .push_layer(vec![
                Gate::H(0),
                Gate::Cx {
                    control: 1,
                    target: 0
                }
            ])
            .is_err());
        assert!(c.push_layer(vec![Gate::H(2)]).is_err());
        assert!(c
            .push_layer(vec![Gate::Cx {
                control: 1,
                target: 1
            }])
            .is_err());
        assert!(c
            .push_layer(vec![Gate::Mcry {
                controls: vec![0],
                pattern: vec![],
                target: 1,
                angle: 0.0
            }])
            .is_err());
        c.push_layer(vec![Gate::H(0), Gate::H(1)]).unwrap();
        assert_eq!(c.depth(), 1);
    }

    #[test]
    fn asap_packing() {
        let c = Circuit::from_gates(
            3,
            [
                Gate::H(0),
                Gate::H(1),
                Gate::Cx {
                    control: 0,
                    target: 1,
                },
                Gate::H(2),
                Gate::Ry {
                    target: 0,
                    angle: 1.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(c.depth(), 3);
        assert_eq!(c.layers()[0].len(), 3);
        assert_eq!(
            c.layers()[2],
            vec![Gate::Ry {
                target: 0,
                angle: 1.0
            }]
        );
        let m = c.metrics();
        assert_eq!(m.rotation_depth, 1);
        assert_eq!(m.count("H"), 3);
        assert_eq!(m.count("CX"), 1);
    }
}
