//! Export of lowered circuits to a QASM subset, and the matching parser.
//!
//! The subset: `OPENQASM 2.0;` header, one `qreg`, an optional
//! `// global-phase <v>` comment preserving the circuit's phase, and the
//! primitive gates `ry`, `rz`, `cx`, `h`, `t`, `tdg`, `s`, `x`. Angles are
//! printed with 17 significant digits so parsing restores them bit-exactly
//! and export is byte-deterministic.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

fn fmt_angle(a: f64) -> String {
    format!("{a:.16e}")
}

/// Serialize a lowered circuit. Fails on macro gates (UCR, CSWAP,
/// controlled blocks); run lowering first.
pub fn export_qasm(c: &Circuit) -> Result<String> {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    let _ = writeln!(out, "qreg q[{}];", c.num_qubits);
    if c.global_phase != 0.0 {
        let _ = writeln!(out, "// global-phase {}", fmt_angle(c.global_phase));
    }
    for (idx, g) in c.gates.iter().enumerate() {
        match g {
            Gate::X { qubit } => {
                let _ = writeln!(out, "x q[{qubit}];");
            }
            Gate::H { qubit } => {
                let _ = writeln!(out, "h q[{qubit}];");
            }
            Gate::T { qubit } => {
                let _ = writeln!(out, "t q[{qubit}];");
            }
            Gate::Tdg { qubit } => {
                let _ = writeln!(out, "tdg q[{qubit}];");
            }
            Gate::S { qubit } => {
                let _ = writeln!(out, "s q[{qubit}];");
            }
            Gate::Ry { qubit, angle } => {
                let _ = writeln!(out, "ry({}) q[{qubit}];", fmt_angle(*angle));
            }
            Gate::Rz { qubit, angle } => {
                let _ = writeln!(out, "rz({}) q[{qubit}];", fmt_angle(*angle));
            }
            Gate::Cnot { control, target } => {
                let _ = writeln!(out, "cx q[{control}],q[{target}];");
            }
            other => {
                return Err(Error::Circuit(format!(
                    "cannot export unlowered gate at position {idx}: {other:?}"
                )));
            }
        }
    }
    Ok(out)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_operand(tok: &str, line: usize) -> Result<usize> {
    let inner = tok
        .strip_prefix("q[")
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| parse_err(line, format!("expected operand like q[i], got `{tok}`")))?;
    inner
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad qubit index `{inner}`")))
}

fn parse_angle(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_err(line, format!("bad angle `{s}`")))
}

/// Parse text produced by [`export_qasm`] back into a circuit.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("//") {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("global-phase") {
                let c = circuit
                    .as_mut()
                    .ok_or_else(|| parse_err(line_no, "global-phase before qreg"))?;
                c.global_phase = parse_angle(v.trim(), line_no)?;
            }
            continue;
        }
        if !saw_header {
            if line != "OPENQASM 2.0;" {
                return Err(parse_err(line_no, "expected `OPENQASM 2.0;` header"));
            }
            saw_header = true;
            continue;
        }
        let stmt = line
            .strip_suffix(';')
            .ok_or_else(|| parse_err(line_no, "missing trailing `;`"))?
            .trim();
        if let Some(rest) = stmt.strip_prefix("qreg") {
            if circuit.is_some() {
                return Err(parse_err(line_no, "multiple qreg declarations"));
            }
            let inner = rest
                .trim()
                .strip_prefix("q[")
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| parse_err(line_no, "expected `qreg q[N]`"))?;
            let n = inner
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad register size `{inner}`")))?;
            circuit = Some(Circuit::new(n));
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| parse_err(line_no, "gate before qreg declaration"))?;
        let (head, operands) = stmt
            .split_once(' ')
            .ok_or_else(|| parse_err(line_no, format!("malformed statement `{stmt}`")))?;
        let gate = match head {
            "x" | "h" | "t" | "tdg" | "s" => {
                let q = parse_operand(operands.trim(), line_no)?;
                match head {
                    "x" => Gate::X { qubit: q },
                    "h" => Gate::H { qubit: q },
                    "t" => Gate::T { qubit: q },
                    "tdg" => Gate::Tdg { qubit: q },
                    _ => Gate::S { qubit: q },
                }
            }
            "cx" => {
                let (a, b) = operands
                    .trim()
                    .split_once(',')
                    .ok_or_else(|| parse_err(line_no, "cx needs two operands"))?;
                Gate::Cnot {
                    control: parse_operand(a.trim(), line_no)?,
                    target: parse_operand(b.trim(), line_no)?,
                }
            }
            _ if head.starts_with("ry(") || head.starts_with("rz(") => {
                let arg = &head[3..head
                    .rfind(')')
                    .ok_or_else(|| parse_err(line_no, "missing `)` in rotation"))?];
                let angle = parse_angle(arg, line_no)?;
                let q = parse_operand(operands.trim(), line_no)?;
                if head.starts_with("ry") {
                    Gate::Ry { qubit: q, angle }
                } else {
                    Gate::Rz { qubit: q, angle }
                }
            }
            other => {
                return Err(parse_err(line_no, format!("unknown mnemonic `{other}`")));
            }
        };
        c.push(gate)
            .map_err(|e| parse_err(line_no, e.to_string()))?;
    }
    if !saw_header {
        return Err(parse_err(1, "empty program: missing header"));
    }
    circuit.ok_or_else(|| parse_err(1, "missing qreg declaration"))
}
