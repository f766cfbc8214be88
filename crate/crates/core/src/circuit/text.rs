//! Line format: `#` header lines, then one gate per line as
//! `KIND target [controls...] [angle]`, layers separated by `---`.
//! A control written `!q` fires on `|0>`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{Circuit, CircuitMeta, Gate};

const SEPARATOR: &str = "---";

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn write_gate(out: &mut String, g: &Gate) {
    out.push_str(g.kind());
    let _ = write!(out, " {}", g.target());
    for (q, on) in g.controls() {
        let _ = write!(out, " {}{q}", if on { "" } else { "!" });
    }
    if let Some(a) = g.angle() {
        let _ = write!(out, " {a:?}");
    }
    out.push('\n');
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {s:?}")))
}

fn parse_gate(line: usize, text: &str) -> Result<Gate> {
    let mut tok = text.split_whitespace();
    let kind = tok.next().ok_or_else(|| parse_err(line, "empty gate"))?;
    let rest: Vec<&str> = tok.collect();
    let target: usize = parse_num(
        line,
        rest.first()
            .ok_or_else(|| parse_err(line, "missing target"))?,
    )?;
    let controls = |range: &[&str]| -> Result<Vec<(usize, bool)>> {
        range
            .iter()
            .map(|s| match s.strip_prefix('!') {
                Some(q) => Ok((parse_num(line, q)?, false)),
                None => Ok((parse_num(line, s)?, true)),
            })
            .collect()
    };
    let angle = || -> Result<f64> {
        parse_num(
            line,
            rest.last()
                .filter(|_| rest.len() >= 2)
                .ok_or_else(|| parse_err(line, "missing angle"))?,
        )
    };
    let arity = |n: usize| -> Result<()> {
        if rest.len() == n {
            Ok(())
        } else {
            Err(parse_err(
                line,
                format!("{kind} takes {n} fields, found {}", rest.len()),
            ))
        }
    };
    let g = match kind {
        "H" => {
            arity(1)?;
            Gate::H(target)
        }
        "RY" | "RZ" | "PHASE" => {
            arity(2)?;
            let angle = angle()?;
            match kind {
                "RY" => Gate::Ry { target, angle },
                "RZ" => Gate::Rz { target, angle },
                _ => Gate::Phase { target, angle },
            }
        }
        "CX" => {
            arity(2)?;
            match controls(&rest[1..])?[..] {
                [(control, true)] => Gate::Cx { control, target },
                _ => return Err(parse_err(line, "CX control must be closed")),
            }
        }
        "CRY" => {
            arity(3)?;
            let (control, polarity) = controls(&rest[1..2])?[0];
            Gate::Cry {
                control,
                target,
                angle: angle()?,
                polarity,
            }
        }
        "MCRY" => {
            if rest.len() < 3 {
                return Err(parse_err(line, "MCRY needs controls and an angle"));
            }
            let (controls, pattern) = controls(&rest[1..rest.len() - 1])?.into_iter().unzip();
            Gate::Mcry {
                controls,
                pattern,
                target,
                angle: angle()?,
            }
        }
        other => return Err(parse_err(line, format!("unknown gate {other:?}"))),
    };
    Ok(g)
}

impl Circuit {
    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        let _ = writeln!(out, "# qubits {}", self.num_qubits);
        if let Some(t) = m.target {
            let _ = writeln!(out, "# target {t}");
        }
        if !m.construction.is_empty() {
            let _ = writeln!(out, "# construction {}", escape(&m.construction));
        }
        if let Some(p) = m.p {
            let _ = writeln!(out, "# p {p}");
        }
        if let Some(x) = m.x {
            let _ = writeln!(out, "# x {x}");
        }
        if m.padding > 0 {
            let _ = writeln!(out, "# padding {}", m.padding);
        }
        if m.unprepared {
            out.push_str("# unprepared true\n");
        }
        if let Some(k) = &m.coefficients {
            out.push_str("# coeffs");
            for v in k {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        if let Some(n) = &m.note {
            let _ = writeln!(out, "# note {}", escape(n));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                out.push_str(SEPARATOR);
                out.push('\n');
            }
            for g in layer {
                write_gate(&mut out, g);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut meta = CircuitMeta::default();
        let mut num_qubits = None;
        let mut layers: Vec<(usize, Vec<Gate>)> = Vec::new();
        let mut current: Option<(usize, Vec<Gate>)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if let Some(h) = raw.strip_prefix('#') {
                let h = h.strip_prefix(' ').unwrap_or(h);
                let (key, value) = h.split_once(' ').unwrap_or((h, ""));
                match key {
                    "qubits" => num_qubits = Some(parse_num::<usize>(line, value)?),
                    "target" => meta.target = Some(parse_num(line, value)?),
                    "construction" => meta.construction = unescape(value),
                    "p" => meta.p = Some(parse_num(line, value)?),
                    "x" => meta.x = Some(parse_num(line, value)?),
                    "padding" => meta.padding = parse_num(line, value)?,
                    "unprepared" => meta.unprepared = parse_num(line, value)?,
                    "coeffs" => {
                        meta.coefficients = Some(
                            value
                                .split_whitespace()
                                .map(|s| parse_num(line, s))
                                .collect::<Result<_>>()?,
                        )
                    }
                    "note" => meta.note = Some(unescape(value)),
                    _ => {}
                }
                continue;
            }
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed == SEPARATOR {
                layers.push(current.take().unwrap_or((line, Vec::new())));
                continue;
            }
            let g = parse_gate(line, trimmed)?;
            current.get_or_insert_with(|| (line, Vec::new())).1.push(g);
        }
        if let Some(l) = current {
            layers.push(l);
        }
        let n = num_qubits.ok_or_else(|| parse_err(0, "missing `# qubits` header"))?;
        let mut c = Circuit::new(n).with_meta(meta);
        for (line, layer) in layers {
            if layer.is_empty() {
                return Err(parse_err(line, "empty layer"));
            }
            c.push_layer(layer)
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(c)
    }
}
