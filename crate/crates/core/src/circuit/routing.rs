use crate::error::{Error, Result};

use super::transpile::lower_to_cx;
use super::{Circuit, Gate};

const SWAP_CX: usize = 3;

/// Placement of logical qubits on a linear chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    positions: Vec<usize>,
}

impl Layout {
    /// `positions[q]` is the chain position of logical qubit `q`.
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        let n = positions.len();
        let mut seen = vec![false; n];
        for &p in &positions {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidLayout(format!(
                    "{positions:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(Layout { positions })
    }

    pub fn identity(n: usize) -> Self {
        Layout {
            positions: (0..n).collect(),
        }
    }

    /// Builds a layout from the chain read left to right: `order[pos]` is a logical qubit.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut positions = vec![usize::MAX; n];
        for (pos, &q) in order.iter().enumerate() {
            if q >= n || positions[q] != usize::MAX {
                return Err(Error::InvalidLayout(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
            positions[q] = pos;
        }
        Ok(Layout { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Logical qubits in chain order.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.positions.len()];
        for (q, &p) in self.positions.iter().enumerate() {
            order[p] = q;
        }
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoutingReport {
    /// Total CX count including routing.
    pub cx: usize,
    pub swaps: usize,
    /// Swaps absorbed into the preceding CX on the same pair (cost 1 instead of 3).
    pub fused: usize,
}

struct Chain {
    pos: Vec<usize>,
    at: Vec<usize>,
    /// Id of the last two-qubit operation at each position, if it was a lone CX.
    last_cx: Vec<Option<usize>>,
    next_id: usize,
    report: RoutingReport,
}

impl Chain {
    fn new(layout: &Layout) -> Self {
        let n = layout.positions.len();
        Chain {
            pos: layout.positions.clone(),
            at: layout.order(),
            last_cx: vec![None; n],
            next_id: 0,
            report: RoutingReport::default(),
        }
    }

    fn fusable(&self, a: usize) -> bool {
        matches!((self.last_cx[a], self.last_cx[a + 1]), (Some(x), Some(y)) if x == y)
    }

    /// Swaps chain positions `a` and `a + 1`.
    fn swap(&mut self, a: usize) {
        let fused = self.fusable(a);
        self.report.swaps += 1;
        if fused {
            self.report.fused += 1;
            self.report.cx += 1;
        } else {
            self.report.cx += SWAP_CX;
        }
        self.last_cx[a] = None;
        self.last_cx[a + 1] = None;
        self.at.swap(a, a + 1);
        self.pos[self.at[a]] = a;
        self.pos[self.at[a + 1]] = a + 1;
    }

    fn cx(&mut self, control: usize, target: usize) {
        loop {
            let (pc, pt) = (self.pos[control], self.pos[target]);
            if pc.abs_diff(pt) <= 1 {
                break;
            }
            // Moving a qubit one step toward the other swaps it with a neighbour.
            let step_toward = |from: usize, to: usize| if from < to { from } else { from - 1 };
            let target_move = step_toward(pt, pc);
            let control_move = step_toward(pc, pt);
            if !self.fusable(target_move) && self.fusable(control_move) {
                self.swap(control_move);
            } else {
                self.swap(target_move);
            }
        }
        let (pc, pt) = (self.pos[control], self.pos[target]);
        let id = self.next_id;
        self.next_id += 1;
        self.last_cx[pc] = Some(id);
        self.last_cx[pt] = Some(id);
        self.report.cx += 1;
    }
}

fn route(gates: &[Gate], layout: &Layout) -> RoutingReport {
    let mut chain = Chain::new(layout);
    for g in gates {
        if let Gate::Cx { control, target } = *g {
            chain.cx(control, target);
        }
    }
    chain.report
}

/// CX count of `c` on a linear chain under `layout`, after lowering every
/// controlled rotation to CX gates and routing non-adjacent pairs with SWAPs.
///
/// Single-qubit gates commute through a SWAP by relabelling, so a SWAP directly
/// following a CX on the same pair merges with it into two CX.
pub fn nn_cx_count(c: &Circuit, layout: &Layout) -> Result<RoutingReport> {
    if layout.positions.len() != c.num_qubits() {
        return Err(Error::InvalidLayout(format!(
            "layout has {} positions for {} qubits",
            layout.positions.len(),
            c.num_qubits()
        )));
    }
    let gates = lower_to_cx(c)?;
    Ok(route(&gates, layout))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|&x| x > v[i])
        .expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

const EXHAUSTIVE_MAX_QUBITS: usize = 7;

/// Minimum of [`nn_cx_count`] over layouts.
///
/// All permutations are tried up to seven qubits; wider circuits try the
/// fingerprint target at every chain position with controls in index order.
pub fn best_nn_cx_count(c: &Circuit) -> Result<(Layout, RoutingReport)> {
    let n = c.num_qubits();
    let gates = lower_to_cx(c)?;
    let mut best: Option<(Layout, RoutingReport)> = None;
    let mut consider = |layout: Layout| {
        let r = route(&gates, &layout);
        if best.as_ref().is_none_or(|(_, b)| r.cx < b.cx) {
            best = Some((layout, r));
        }
    };
    if n <= EXHAUSTIVE_MAX_QUBITS {
        let mut order: Vec<usize> = (0..n).collect();
        loop {
            consider(Layout::from_order(&order)?);
            if !next_permutation(&mut order) {
                break;
            }
        }
    } else {
        let t = c.target();
        let controls = c.control_qubits();
        for slot in 0..n {
            for reversed in [false, true] {
                let mut order = controls.clone();
                if reversed {
                    order.reverse();
                }
                order.insert(slot, t);
                consider(Layout::from_order(&order)?);
            }
        }
    }
    Ok(best.unwrap_or_else(|| (Layout::identity(n), RoutingReport::default())))
}
