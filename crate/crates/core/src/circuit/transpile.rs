use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

use super::{Circuit, Gate};

/// `RY(theta) = S H RZ(theta) H S^dagger`, in execution order.
fn ry_via_rz(target: usize, angle: f64, out: &mut Vec<Gate>) {
    if angle == 0.0 {
        return;
    }
    out.extend([
        Gate::Phase {
            target,
            angle: -FRAC_PI_2,
        },
        Gate::H(target),
        Gate::Rz { target, angle },
        Gate::H(target),
        Gate::Phase {
            target,
            angle: FRAC_PI_2,
        },
    ]);
}

/// Two-CX form of a singly controlled RY:
/// `RY(a) . CX . RY(b) . CX` on the target, with `a = theta/2` and
/// `b = -theta/2` (closed control) or `b = theta/2` (open control).
fn cry_parts(control: usize, target: usize, angle: f64, polarity: bool) -> [Gate; 4] {
    let half = angle / 2.0;
    let second = if polarity { -half } else { half };
    [
        Gate::Ry {
            target,
            angle: half,
        },
        Gate::Cx { control, target },
        Gate::Ry {
            target,
            angle: second,
        },
        Gate::Cx { control, target },
    ]
}

/// Rewrites a circuit over `{H, RY, CRY, CX}` into `{H, RZ, PHASE, CX}`.
///
/// The result equals the input up to global phase and is re-layered ASAP.
pub fn transpile_ry_to_rz(c: &Circuit) -> Result<Circuit> {
    let mut out = Vec::new();
    for g in c.gates() {
        match *g {
            Gate::Ry { target, angle } => ry_via_rz(target, angle, &mut out),
            Gate::Cry {
                control,
                target,
                angle,
                polarity,
            } => {
                for part in cry_parts(control, target, angle, polarity) {
                    match part {
                        Gate::Ry { target, angle } => ry_via_rz(target, angle, &mut out),
                        other => out.push(other),
                    }
                }
            }
            Gate::H(_) | Gate::Cx { .. } | Gate::Rz { .. } | Gate::Phase { .. } => {
                out.push(g.clone())
            }
            Gate::Mcry { .. } => return Err(Error::UnsupportedGate(g.kind().into())),
        }
    }
    let mut t = Circuit::from_gates(c.num_qubits(), out)?;
    t.meta = c.meta.clone();
    t.meta.construction = format!("{}+rz", c.meta.construction);
    Ok(t)
}

/// Gray-code sequence of a uniformly controlled RY over `controls`.
///
/// `angles[j]` is the rotation wanted when control `i` holds bit `i` of `j`.
/// Emits `2^k` RY and `2^k` CX gates.
fn uniformly_controlled_ry(controls: &[usize], target: usize, angles: &[f64], out: &mut Vec<Gate>) {
    let k = controls.len();
    let n = 1usize << k;
    debug_assert_eq!(angles.len(), n);
    let gray = |i: usize| i ^ (i >> 1);
    for i in 0..n {
        let phi: f64 = angles
            .iter()
            .enumerate()
            .map(|(j, &theta)| {
                if (j & gray(i)).count_ones() % 2 == 0 {
                    theta
                } else {
                    -theta
                }
            })
            .sum::<f64>()
            / n as f64;
        out.push(Gate::Ry { target, angle: phi });
        let flip = if i == n - 1 {
            k - 1
        } else {
            (i + 1).trailing_zeros() as usize
        };
        out.push(Gate::Cx {
            control: controls[flip],
            target,
        });
    }
}

/// Replaces every multi-controlled RY with CX and RY gates.
///
/// Consecutive MCRY gates that share a target and a control set commute and
/// together form one uniformly controlled rotation; each such run becomes a
/// Gray-code sequence of `2^k` CX gates. Other gates pass through unchanged.
pub fn decompose_multi_controlled(c: &Circuit) -> Result<Circuit> {
    let mut out = Vec::new();
    let gates: Vec<&Gate> = c.gates().collect();
    let mut i = 0;
    while i < gates.len() {
        let Gate::Mcry {
            controls, target, ..
        } = gates[i]
        else {
            out.push(gates[i].clone());
            i += 1;
            continue;
        };
        let mut sorted = controls.clone();
        sorted.sort_unstable();
        let mut angles = vec![0.0; 1 << sorted.len()];
        while i < gates.len() {
            let Gate::Mcry {
                controls: cs,
                pattern,
                target: t,
                angle,
            } = gates[i]
            else {
                break;
            };
            let mut same = cs.clone();
            same.sort_unstable();
            if t != target || same != sorted {
                break;
            }
            let idx = cs.iter().zip(pattern).fold(0usize, |acc, (q, &bit)| {
                let pos = sorted.binary_search(q).expect("same control set");
                acc | (usize::from(bit) << pos)
            });
            angles[idx] += angle;
            i += 1;
        }
        uniformly_controlled_ry(&sorted, *target, &angles, &mut out);
    }
    let mut d = Circuit::from_gates(c.num_qubits(), out)?;
    d.meta = c.meta.clone();
    Ok(d)
}

/// CX-level lowering used for routing: MCRY runs via Gray codes, CRY via two CX.
pub(super) fn lower_to_cx(c: &Circuit) -> Result<Vec<Gate>> {
    let decomposed = decompose_multi_controlled(c)?;
    let mut out = Vec::new();
    for g in decomposed.gates() {
        match *g {
            Gate::Cry {
                control,
                target,
                angle,
                polarity,
            } => out.extend(cry_parts(control, target, angle, polarity)),
            _ => out.push(g.clone()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ry_zero_is_dropped() {
        let mut c = Circuit::new(1);
        c.push_layer(vec![Gate::Ry {
            target: 0,
            angle: 0.0,
        }])
        .unwrap();
        let t = transpile_ry_to_rz(&c).unwrap();
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn cry_uses_two_cx() {
        let mut c = Circuit::new(2);
        c.push_layer(vec![Gate::Cry {
            control: 0,
            target: 1,
            angle: 0.7,
            polarity: true,
        }])
        .unwrap();
        let m = transpile_ry_to_rz(&c).unwrap().metrics();
        assert_eq!(m.count("CX"), 2);
        assert_eq!(m.count("RY"), 0);
        assert_eq!(m.count("CRY"), 0);
        assert_eq!(m.count("RZ"), 2);
    }

    #[test]
    fn mcry_rejected() {
        let mut c = Circuit::new(3);
        c.push_layer(vec![Gate::Mcry {
            controls: vec![0, 1],
            pattern: vec![true, false],
            target: 2,
            angle: 0.3,
        }])
        .unwrap();
        assert!(matches!(
            transpile_ry_to_rz(&c),
            Err(Error::UnsupportedGate(_))
        ));
        let d = decompose_multi_controlled(&c).unwrap();
        assert!(!d.has_multi_controlled());
        assert_eq!(d.metrics().count("CX"), 4);
    }
}
