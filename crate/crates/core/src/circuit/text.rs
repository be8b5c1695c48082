//! Line-oriented circuit format.
//!
//! ```text
//! qubits 2 measured 1
//! H 0
//! Rz 1 0.7853981633974483
//! CX 0 1
//! U2q 0 1 m0
//! matrix m0 1.0,0.0 0.0,0.0 ... (16 entries, row-major)
//! ```
//!
//! Angles and matrix entries use Rust's shortest round-trip float formatting,
//! so parsing the output reproduces the circuit bit for bit. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::Matrix4;

use super::gate::{Gate, GateKind, GateName, C64};
use super::Circuit;
use crate::error::{Error, Result};

/// Fixed single-qubit gate by name.
pub fn gate_from_name(name: &str, q: usize) -> Option<Gate> {
    Some(match GateName::parse(name)? {
        GateName::X => Gate::x(q),
        GateName::SX => Gate::sx(q),
        GateName::SXdg => Gate::sxdg(q),
        GateName::H => Gate::h(q),
        GateName::S => Gate::s(q),
        GateName::Sdg => Gate::sdg(q),
        GateName::Z => Gate::z(q),
        GateName::T => Gate::t(q),
        GateName::Tdg => Gate::tdg(q),
        _ => return None,
    })
}

pub fn to_text(c: &Circuit) -> String {
    let mut s = String::new();
    let mut matrices = Vec::new();
    writeln!(s, "qubits {} measured {}", c.n_qubits, u8::from(c.measured)).unwrap();
    for g in &c.gates {
        s.push_str(g.name().as_str());
        for q in &g.qubits {
            write!(s, " {q}").unwrap();
        }
        match &g.kind {
            GateKind::Rz(t) => write!(s, " {t:?}").unwrap(),
            GateKind::U2q(m) => {
                write!(s, " m{}", matrices.len()).unwrap();
                matrices.push(m.clone());
            }
            _ => {}
        }
        s.push('\n');
    }
    for (i, m) in matrices.iter().enumerate() {
        write!(s, "matrix m{i}").unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let z = m[(r, col)];
                write!(s, " {:?},{:?}", z.re, z.im).unwrap();
            }
        }
        s.push('\n');
    }
    s
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Tokens of a line with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: (usize, &str), line: usize, what: &str) -> Result<T> {
    tok.1
        .parse()
        .map_err(|_| perr(line, tok.0, format!("expected {what}, found {:?}", tok.1)))
}

pub fn from_text(text: &str) -> Result<Circuit> {
    let mut header = None;
    let mut pending: Vec<(usize, usize, Vec<usize>, String)> = Vec::new();
    let mut gates: Vec<Option<Gate>> = Vec::new();
    let mut matrices: BTreeMap<String, Matrix4<C64>> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let toks = tokens(raw);
        if toks.is_empty() || toks[0].1.starts_with('#') {
            continue;
        }
        if header.is_none() {
            if toks.len() != 4 || toks[0].1 != "qubits" || toks[2].1 != "measured" {
                return Err(perr(ln, 1, "expected header `qubits N measured {0|1}`"));
            }
            let n: usize = parse_num(toks[1], ln, "qubit count")?;
            let m = match toks[3].1 {
                "0" => false,
                "1" => true,
                other => return Err(perr(ln, toks[3].0, format!("measured flag must be 0 or 1, found {other:?}"))),
            };
            header = Some((n, m));
            continue;
        }
        let (col, kind) = toks[0];
        if kind == "matrix" {
            if toks.len() != 18 {
                return Err(perr(ln, col, "matrix line needs an id and 16 re,im entries"));
            }
            let mut m = Matrix4::zeros();
            for (k, tok) in toks[2..].iter().enumerate() {
                let (re, im) = tok
                    .1
                    .split_once(',')
                    .ok_or_else(|| perr(ln, tok.0, "matrix entry must be `re,im`"))?;
                let re: f64 = parse_num((tok.0, re), ln, "real part")?;
                let im: f64 = parse_num((tok.0, im), ln, "imaginary part")?;
                m[(k / 4, k % 4)] = C64::new(re, im);
            }
            if matrices.insert(toks[1].1.to_string(), m).is_some() {
                return Err(perr(ln, toks[1].0, format!("duplicate matrix id {}", toks[1].1)));
            }
            continue;
        }
        let name = GateName::parse(kind)
            .ok_or_else(|| perr(ln, col, format!("unknown gate kind {kind:?}")))?;
        let arity = name.arity();
        let extra = usize::from(matches!(name, GateName::Rz | GateName::U2q));
        if toks.len() != 1 + arity + extra {
            return Err(perr(ln, col, format!("{kind} takes {arity} qubit(s){}", if extra == 1 { " and one argument" } else { "" })));
        }
        let qubits = toks[1..=arity]
            .iter()
            .map(|&t| parse_num::<usize>(t, ln, "qubit index"))
            .collect::<Result<Vec<_>>>()?;
        let gate = match name {
            GateName::Rz => {
                let theta: f64 = parse_num(toks[2], ln, "angle")?;
                Some(Gate::rz(qubits[0], theta))
            }
            GateName::U2q => {
                pending.push((ln, gates.len(), qubits, toks[3].1.to_string()));
                None
            }
            GateName::CX => Some(Gate::cx(qubits[0], qubits[1])),
            GateName::SWAP => Some(Gate::swap(qubits[0], qubits[1])),
            _ => gate_from_name(kind, qubits[0]),
        };
        gates.push(gate);
    }
    let (n, measured) = header.ok_or_else(|| perr(1, 1, "missing header"))?;
    for (ln, slot, qubits, id) in pending {
        let m = matrices
            .get(&id)
            .ok_or_else(|| perr(ln, 1, format!("undefined matrix id {id}")))?;
        let g = Gate::u2q(qubits[0], qubits[1], *m).map_err(|e| perr(ln, 1, e.to_string()))?;
        gates[slot] = Some(g);
    }
    let c = Circuit {
        n_qubits: n,
        gates: gates.into_iter().map(|g| g.expect("filled")).collect(),
        measured,
    };
    c.validate()?;
    Ok(c)
}
