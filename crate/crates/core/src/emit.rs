//! Serialization of flat circuits to an OpenQASM 2 subset and a JSON-lines
//! format, plus ensemble size statistics.
//!
//! Emission is a pure function of the circuit and the config: floats print in
//! shortest round-trip form and map iteration is recorded in the optional
//! header, so re-running an expansion reproduces every artifact byte for
//! byte.

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Event, FlatCircuit};
use crate::expand::{expand_stream, ExpandError, ExpansionPlan};
use crate::print::print_module;

/// Gate vocabulary accepted by the OpenQASM 2 emitter. Parametric entries
/// take exactly one angle.
pub const QASM2_GATES: [&str; 15] = [
    "id", "x", "y", "z", "h", "s", "sdg", "t", "tdg", "rx", "ry", "rz", "cx", "cz", "rzz",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Qasm2,
    Jsonl,
}

impl EmitFormat {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "qasm2" => Some(EmitFormat::Qasm2),
            "jsonl" => Some(EmitFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmitConfig {
    pub format: EmitFormat,
    /// Prepend the `// eirkit seed=<s> iteration=<i>` header (QASM) or emit
    /// the file-level metadata line (JSONL writers).
    pub include_header: bool,
    pub seed: u64,
}

impl EmitConfig {
    pub fn new(format: EmitFormat, seed: u64) -> Self {
        EmitConfig { format, include_header: true, seed }
    }

    pub fn headerless(format: EmitFormat) -> Self {
        EmitConfig { format, include_header: false, seed: 0 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EmitError {
    #[error("unsupported gate `{0}` for OpenQASM 2 emission")]
    UnsupportedGate(String),
    #[error("gate `{name}` used with {qubits} qubit(s) and {params} parameter(s)")]
    MalformedGate { name: String, qubits: usize, params: usize },
}

/// Output filename for one expanded circuit.
pub fn circuit_filename(iteration: u64) -> String {
    format!("circuit_{iteration:06}.qasm")
}

/// Output filename for a whole JSON-lines ensemble.
pub const JSONL_FILENAME: &str = "ensemble.jsonl";

fn fmt_params(params: &[f64]) -> String {
    params.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(",")
}

/// Emits one circuit as OpenQASM 2.0 text.
pub fn emit_qasm2(circuit: &FlatCircuit, config: &EmitConfig) -> Result<String, EmitError> {
    let mut out = String::new();
    if config.include_header {
        out.push_str(&format!(
            "// eirkit seed={} iteration={}\n",
            config.seed, circuit.iteration_index
        ));
    }
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", circuit.n_qubits));
    if circuit.n_cbits > 0 {
        out.push_str(&format!("creg c[{}];\n", circuit.n_cbits));
    }
    for ev in &circuit.events {
        match ev {
            Event::Reset { qubit } => out.push_str(&format!("reset q[{qubit}];\n")),
            Event::Measure { qubit, cbit } => {
                out.push_str(&format!("measure q[{qubit}] -> c[{cbit}];\n"))
            }
            Event::Gate { name, params, qubits } => {
                let (want_qubits, want_params) = match name.as_str() {
                    "id" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" => (1, 0),
                    "rx" | "ry" | "rz" => (1, 1),
                    "cx" | "cz" => (2, 0),
                    "rzz" => (2, 1),
                    other => return Err(EmitError::UnsupportedGate(other.to_string())),
                };
                if qubits.len() != want_qubits || params.len() != want_params {
                    return Err(EmitError::MalformedGate {
                        name: name.clone(),
                        qubits: qubits.len(),
                        params: params.len(),
                    });
                }
                let qs = qubits
                    .iter()
                    .map(|q| format!("q[{q}]"))
                    .collect::<Vec<_>>()
                    .join(",");
                if params.is_empty() {
                    out.push_str(&format!("{name} {qs};\n"));
                } else {
                    out.push_str(&format!("{name}({}) {qs};\n", fmt_params(params)));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct EventJson<'a> {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<&'a [f64]>,
    qubits: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cbit: Option<u32>,
}

#[derive(Serialize)]
struct CircuitJson<'a> {
    iteration: u64,
    n_qubits: u32,
    n_cbits: u32,
    events: Vec<EventJson<'a>>,
}

/// Emits one circuit as a single JSON object (one JSON-lines record),
/// newline terminated.
pub fn emit_jsonl(circuit: &FlatCircuit, _config: &EmitConfig) -> String {
    let events = circuit
        .events
        .iter()
        .map(|ev| match ev {
            Event::Reset { qubit } => EventJson {
                kind: "reset",
                name: None,
                params: None,
                qubits: vec![*qubit],
                cbit: None,
            },
            Event::Gate { name, params, qubits } => EventJson {
                kind: "gate",
                name: Some(name),
                params: Some(params),
                qubits: qubits.clone(),
                cbit: None,
            },
            Event::Measure { qubit, cbit } => EventJson {
                kind: "measure",
                name: None,
                params: None,
                qubits: vec![*qubit],
                cbit: Some(*cbit),
            },
        })
        .collect();
    let record = CircuitJson {
        iteration: circuit.iteration_index,
        n_qubits: circuit.n_qubits,
        n_cbits: circuit.n_cbits,
        events,
    };
    let mut line = serde_json::to_string(&record).expect("circuit serialization is infallible");
    line.push('\n');
    line
}

/// File-level metadata line for JSON-lines ensembles.
pub fn jsonl_header(seed: u64) -> String {
    format!(
        "{{\"schema\":1,\"kind\":\"eir-ensemble\",\"seed\":{seed},\"version\":\"{}\"}}\n",
        crate::TOOL_VERSION
    )
}

/// Size statistics comparing the single IR program against the enumerated
/// form of the whole ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub schema: u32,
    pub seed: u64,
    pub ir_bytes: u64,
    pub enumerated_bytes_total: u64,
    pub n_circuits: u64,
    pub events_mean: f64,
    pub events_min: u64,
    pub events_max: u64,
    pub compression_ratio: f64,
}

impl EnsembleStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialization is infallible")
    }
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

/// Expands every planned iteration and accumulates size statistics.
/// `ir_bytes` is the UTF-8 length of the canonical printed program;
/// `enumerated_bytes_total` sums headerless QASM emissions.
pub fn compute_stats(plan: &ExpansionPlan) -> Result<EnsembleStats, StatsError> {
    let ir_bytes = print_module(plan.program()).len() as u64;
    let headerless = EmitConfig::headerless(EmitFormat::Qasm2);
    let mut enumerated_bytes_total = 0u64;
    let mut n_circuits = 0u64;
    let mut events_total = 0u64;
    let mut events_min = u64::MAX;
    let mut events_max = 0u64;
    for circuit in expand_stream(plan) {
        let circuit = circuit?;
        let text = emit_qasm2(&circuit, &headerless)?;
        enumerated_bytes_total += text.len() as u64;
        n_circuits += 1;
        let n_events = circuit.events.len() as u64;
        events_total += n_events;
        events_min = events_min.min(n_events);
        events_max = events_max.max(n_events);
    }
    if n_circuits == 0 {
        events_min = 0;
    }
    Ok(EnsembleStats {
        schema: 1,
        seed: plan.master_seed(),
        ir_bytes,
        enumerated_bytes_total,
        n_circuits,
        events_mean: if n_circuits == 0 {
            0.0
        } else {
            events_total as f64 / n_circuits as f64
        },
        events_min,
        events_max,
        compression_ratio: enumerated_bytes_total as f64 / ir_bytes as f64,
    })
}

// ------------------------------------------------- reference QASM checker ----

/// Minimal re-parser for the emitted OpenQASM 2 subset. The grammar is
/// regular: a fixed prologue followed by one statement per line. Returns the
/// first offending line on failure.
pub fn check_qasm2(text: &str) -> Result<(), String> {
    let mut lines = text.lines().enumerate().peekable();
    let fail = |lineno: usize, msg: &str, line: &str| -> Result<(), String> {
        Err(format!("line {}: {msg}: `{line}`", lineno + 1))
    };

    if let Some(&(_, line)) = lines.peek() {
        if let Some(rest) = line.strip_prefix("// eirkit seed=") {
            let mut parts = rest.split(" iteration=");
            let seed_ok = parts
                .next()
                .map(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
                .unwrap_or(false);
            let iter_ok = parts
                .next()
                .map(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
                .unwrap_or(false);
            if !seed_ok || !iter_ok || parts.next().is_some() {
                return Err(format!("line 1: malformed header comment: `{line}`"));
            }
            lines.next();
        }
    }

    let mut expect_line = |want: &str| -> Result<(), String> {
        match lines.next() {
            Some((_, line)) if line == want => Ok(()),
            Some((n, line)) => Err(format!("line {}: expected `{want}`, found `{line}`", n + 1)),
            None => Err(format!("unexpected end of file, expected `{want}`")),
        }
    };
    expect_line("OPENQASM 2.0;")?;
    expect_line("include \"qelib1.inc\";")?;

    fn bracketed(s: &str, reg: char) -> Option<u64> {
        let body = s.strip_prefix(reg)?.strip_prefix('[')?.strip_suffix(']')?;
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        body.parse().ok()
    }

    let (n_qubits, n_cbits);
    match lines.next() {
        Some((n, line)) => match line.strip_suffix(';').and_then(|s| s.strip_prefix("qreg ")) {
            Some(decl) if bracketed(decl, 'q').is_some() => {
                n_qubits = bracketed(decl, 'q').unwrap();
            }
            _ => return fail(n, "expected a qreg declaration", line),
        },
        None => return Err("unexpected end of file, expected `qreg`".into()),
    }
    n_cbits = match lines.peek() {
        Some(&(_, line)) if line.starts_with("creg ") => {
            let (n, line) = lines.next().unwrap();
            match line.strip_suffix(';').and_then(|s| s.strip_prefix("creg ")) {
                Some(decl) => match bracketed(decl, 'c') {
                    Some(m) => m,
                    None => return fail(n, "malformed creg declaration", line),
                },
                None => return fail(n, "malformed creg declaration", line),
            }
        }
        _ => 0,
    };

    for (n, line) in lines {
        let Some(stmt) = line.strip_suffix(';') else {
            return fail(n, "statement must end with `;`", line);
        };
        if let Some(rest) = stmt.strip_prefix("reset ") {
            match bracketed(rest, 'q') {
                Some(q) if q < n_qubits => continue,
                _ => return fail(n, "malformed or out-of-range reset", line),
            }
        }
        if let Some(rest) = stmt.strip_prefix("measure ") {
            let mut halves = rest.split(" -> ");
            let q = halves.next().and_then(|s| bracketed(s, 'q'));
            let c = halves.next().and_then(|s| bracketed(s, 'c'));
            match (q, c, halves.next()) {
                (Some(q), Some(c), None) if q < n_qubits && c < n_cbits => continue,
                _ => return fail(n, "malformed or out-of-range measure", line),
            }
        }
        // Gate statement: name[(params)] q[i](,q[j])?
        let Some((head, operands)) = stmt.split_once(' ') else {
            return fail(n, "malformed statement", line);
        };
        let (name, params) = match head.split_once('(') {
            Some((name, rest)) => match rest.strip_suffix(')') {
                Some(ps) => (name, Some(ps)),
                None => return fail(n, "unbalanced parameter list", line),
            },
            None => (head, None),
        };
        let (want_qubits, want_params) = match name {
            "id" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" => (1, 0),
            "rx" | "ry" | "rz" => (1, 1),
            "cx" | "cz" => (2, 0),
            "rzz" => (2, 1),
            _ => return fail(n, "unknown gate", line),
        };
        let n_params = match params {
            None => 0,
            Some(ps) => {
                let parts: Vec<&str> = ps.split(',').collect();
                if parts.iter().any(|p| p.parse::<f64>().is_err()) {
                    return fail(n, "malformed gate parameter", line);
                }
                parts.len()
            }
        };
        if n_params != want_params {
            return fail(n, "wrong parameter count", line);
        }
        let qs: Vec<&str> = operands.split(',').collect();
        if qs.len() != want_qubits {
            return fail(n, "wrong qubit operand count", line);
        }
        let mut seen = Vec::new();
        for part in qs {
            match bracketed(part, 'q') {
                Some(q) if q < n_qubits && !seen.contains(&q) => seen.push(q),
                _ => return fail(n, "malformed, duplicate, or out-of-range qubit", line),
            }
        }
    }
    Ok(())
}
