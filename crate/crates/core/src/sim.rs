//! Dense statevector oracle for desk-scale verification.
//!
//! Conventions:
//!  - little-endian qubit ordering: qubit 0 is the least significant bit of
//!    the basis index;
//!  - rotations are `RX/RY/RZ(theta) = exp(-i * theta * P / 2)` and
//!    `RZZ(theta) = diag(e^{-i t/2}, e^{i t/2}, e^{i t/2}, e^{-i t/2})`;
//!  - `cx` takes its first listed operand as the control;
//!  - outcome bitstrings cover the whole classical register, most significant
//!    cbit first (cbit 0 is the rightmost character); unmeasured cbits read 0.
//!
//! Sampled simulation consumes exactly one stream draw per `Measure` or
//! `Reset` event per shot, whether or not the outcome is deterministic, so
//! stream alignment never depends on amplitudes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Event, FlatCircuit};
use crate::rng::RngStream;

/// Hard cap on simulated qubits; keeps every oracle fast.
pub const MAX_QUBITS: u32 = 14;
/// Cap for the basis-state sweep of the equivalence check.
pub const MAX_EQUIV_QUBITS: u32 = 10;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{n} qubits exceed the simulator cap of {max}")]
    TooManyQubits { n: u32, max: u32 },
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("gate `{name}` used with {qubits} qubit(s) and {params} parameter(s)")]
    MalformedGate { name: String, qubits: usize, params: usize },
    #[error("mid-circuit measurement requires sampled simulation")]
    MidCircuitMeasure,
    #[error("reset of a qubit in superposition requires sampled simulation")]
    NondeterministicReset,
    #[error("qubit counts differ: {0} vs {1}")]
    QubitCountMismatch(u32, u32),
    #[error("equivalence checking requires measurement- and reset-free circuits")]
    NonUnitaryEvent,
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
}

/// A dense statevector over `n_qubits` qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n_qubits: u32,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: u32) -> Result<Self, SimError> {
        Self::basis(n_qubits, 0)
    }

    /// The computational basis state |index>.
    pub fn basis(n_qubits: u32, index: usize) -> Result<Self, SimError> {
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n: n_qubits, max: MAX_QUBITS });
        }
        let mut amplitudes = vec![Complex64::ZERO; 1usize << n_qubits];
        amplitudes[index] = Complex64::ONE;
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of reading 1 on `qubit`.
    pub fn prob_one(&self, qubit: u32) -> f64 {
        let mask = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply(&mut self, name: &str, params: &[f64], qubits: &[u32]) -> Result<(), SimError> {
        apply_gate(self, name, params, qubits)
    }

    /// <self|other>.
    pub fn inner_product(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn apply_1q(&mut self, u: [[Complex64; 2]; 2], q: u32) {
        let mask = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = u[0][0] * a + u[0][1] * b;
                self.amplitudes[j] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// Projects `qubit` onto `outcome` and renormalizes. Returns the
    /// pre-projection probability of that outcome.
    fn project(&mut self, qubit: u32, outcome: bool) -> f64 {
        let mask = 1usize << qubit;
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & mask != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let scale = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::ZERO;
            }
        }
        p
    }

    /// Swaps the |0> and |1> components of `qubit` (an X gate as a bit
    /// permutation; used by reset).
    fn flip(&mut self, qubit: u32) {
        let mask = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                self.amplitudes.swap(i, i | mask);
            }
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn apply_gate(
    state: &mut StateVector,
    name: &str,
    params: &[f64],
    qubits: &[u32],
) -> Result<(), SimError> {
    let malformed = || SimError::MalformedGate {
        name: name.to_string(),
        qubits: qubits.len(),
        params: params.len(),
    };
    let one_qubit = |expected_params: usize| -> Result<u32, SimError> {
        if qubits.len() == 1 && params.len() == expected_params {
            Ok(qubits[0])
        } else {
            Err(malformed())
        }
    };
    let two_qubits = |expected_params: usize| -> Result<(u32, u32), SimError> {
        if qubits.len() == 2 && params.len() == expected_params && qubits[0] != qubits[1] {
            Ok((qubits[0], qubits[1]))
        } else {
            Err(malformed())
        }
    };
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "id" => {
            one_qubit(0)?;
        }
        "x" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]], q);
        }
        "y" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]], q);
        }
        "z" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]], q);
        }
        "h" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(s2, 0.0), c(s2, 0.0)], [c(s2, 0.0), c(-s2, 0.0)]], q);
        }
        "s" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]], q);
        }
        "sdg" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]], q);
        }
        "t" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(s2, s2)]], q);
        }
        "tdg" => {
            let q = one_qubit(0)?;
            state.apply_1q([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(s2, -s2)]], q);
        }
        "rx" => {
            let q = one_qubit(1)?;
            let (cos, sin) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
            state.apply_1q([[c(cos, 0.0), c(0.0, -sin)], [c(0.0, -sin), c(cos, 0.0)]], q);
        }
        "ry" => {
            let q = one_qubit(1)?;
            let (cos, sin) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
            state.apply_1q([[c(cos, 0.0), c(-sin, 0.0)], [c(sin, 0.0), c(cos, 0.0)]], q);
        }
        "rz" => {
            let q = one_qubit(1)?;
            let phase = Complex64::from_polar(1.0, params[0] / 2.0);
            state.apply_1q([[phase.conj(), c(0.0, 0.0)], [c(0.0, 0.0), phase]], q);
        }
        "cx" => {
            let (control, target) = two_qubits(0)?;
            let (cm, tm) = (1usize << control, 1usize << target);
            for i in 0..state.amplitudes.len() {
                if i & cm != 0 && i & tm == 0 {
                    state.amplitudes.swap(i, i | tm);
                }
            }
        }
        "cz" => {
            let (a, b) = two_qubits(0)?;
            let (am, bm) = (1usize << a, 1usize << b);
            for (i, amp) in state.amplitudes.iter_mut().enumerate() {
                if i & am != 0 && i & bm != 0 {
                    *amp = -*amp;
                }
            }
        }
        "rzz" => {
            let (a, b) = two_qubits(1)?;
            let (am, bm) = (1usize << a, 1usize << b);
            let phase = Complex64::from_polar(1.0, params[0] / 2.0);
            for (i, amp) in state.amplitudes.iter_mut().enumerate() {
                let parity = (i & am != 0) != (i & bm != 0);
                *amp *= if parity { phase } else { phase.conj() };
            }
        }
        other => return Err(SimError::UnsupportedGate(other.to_string())),
    }
    Ok(())
}

/// Either exact probabilities or sampled counts over the classical register.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeDistribution {
    Analytic { probabilities: BTreeMap<String, f64> },
    Sampled { counts: BTreeMap<String, u64>, shots: u64 },
}

impl OutcomeDistribution {
    /// Normalized view: counts become empirical frequencies.
    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        match self {
            OutcomeDistribution::Analytic { probabilities } => probabilities.clone(),
            OutcomeDistribution::Sampled { counts, shots } => counts
                .iter()
                .map(|(k, &v)| (k.clone(), v as f64 / *shots as f64))
                .collect(),
        }
    }

    /// Total variation distance between the two distributions.
    pub fn total_variation_distance(&self, other: &OutcomeDistribution) -> f64 {
        let (a, b) = (self.probabilities(), other.probabilities());
        let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
        0.5 * keys
            .into_iter()
            .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>()
    }
}

fn bitstring(bits: &[bool]) -> String {
    // Most significant cbit first; cbit 0 is the rightmost character.
    bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

fn check_circuit(circuit: &FlatCircuit) -> Result<(), SimError> {
    if circuit.n_qubits > MAX_QUBITS {
        return Err(SimError::TooManyQubits { n: circuit.n_qubits, max: MAX_QUBITS });
    }
    circuit.validate().map_err(|e| SimError::InvalidCircuit(e.to_string()))
}

/// Runs the unitary part of a circuit and returns the final statevector.
/// Measurements are permitted only as a terminal suffix and are not applied.
pub fn run_statevector(circuit: &FlatCircuit) -> Result<StateVector, SimError> {
    check_circuit(circuit)?;
    let mut state = StateVector::zero(circuit.n_qubits)?;
    let mut measuring = false;
    for ev in &circuit.events {
        match ev {
            Event::Measure { .. } => measuring = true,
            _ if measuring => return Err(SimError::MidCircuitMeasure),
            Event::Gate { name, params, qubits } => state.apply(name, params, qubits)?,
            Event::Reset { qubit } => analytic_reset(&mut state, *qubit)?,
        }
    }
    Ok(state)
}

fn analytic_reset(state: &mut StateVector, qubit: u32) -> Result<(), SimError> {
    let p1 = state.prob_one(qubit);
    if p1 <= NORM_TOL {
        Ok(())
    } else if p1 >= 1.0 - NORM_TOL {
        state.flip(qubit);
        Ok(())
    } else {
        Err(SimError::NondeterministicReset)
    }
}

/// Exact outcome distribution over the classical register. Gates run in
/// event order; measurements must form the terminal suffix of the circuit.
pub fn run_analytic(circuit: &FlatCircuit) -> Result<OutcomeDistribution, SimError> {
    check_circuit(circuit)?;
    let mut state = StateVector::zero(circuit.n_qubits)?;
    let mut measures: Vec<(u32, u32)> = Vec::new();
    for ev in &circuit.events {
        match ev {
            Event::Measure { qubit, cbit } => measures.push((*qubit, *cbit)),
            _ if !measures.is_empty() => return Err(SimError::MidCircuitMeasure),
            Event::Gate { name, params, qubits } => state.apply(name, params, qubits)?,
            Event::Reset { qubit } => analytic_reset(&mut state, *qubit)?,
        }
    }
    let mut probabilities: BTreeMap<String, f64> = BTreeMap::new();
    for (index, amp) in state.amplitudes.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut cbits = vec![false; circuit.n_cbits as usize];
        for &(q, cb) in &measures {
            cbits[cb as usize] = index & (1usize << q) != 0;
        }
        *probabilities.entry(bitstring(&cbits)).or_insert(0.0) += p;
    }
    Ok(OutcomeDistribution::Analytic { probabilities })
}

/// Shot-by-shot simulation with mid-circuit measurement and reset support.
/// Measurement projects per the Born rule using `stream`; reset measures and
/// flips back to |0> when the outcome was 1.
pub fn run_sampled(
    circuit: &FlatCircuit,
    shots: u64,
    mut stream: RngStream,
) -> Result<OutcomeDistribution, SimError> {
    check_circuit(circuit)?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let mut state = StateVector::zero(circuit.n_qubits)?;
        let mut cbits = vec![false; circuit.n_cbits as usize];
        for ev in &circuit.events {
            match ev {
                Event::Gate { name, params, qubits } => state.apply(name, params, qubits)?,
                Event::Measure { qubit, cbit } => {
                    cbits[*cbit as usize] = born_sample(&mut state, *qubit, &mut stream);
                }
                Event::Reset { qubit } => {
                    if born_sample(&mut state, *qubit, &mut stream) {
                        state.flip(*qubit);
                    }
                }
            }
        }
        *counts.entry(bitstring(&cbits)).or_insert(0) += 1;
    }
    Ok(OutcomeDistribution::Sampled { counts, shots })
}

fn born_sample(state: &mut StateVector, qubit: u32, stream: &mut RngStream) -> bool {
    let p1 = state.prob_one(qubit);
    let outcome = stream.next_f64() < p1;
    state.project(qubit, outcome);
    outcome
}

/// Basis-state sweep equivalence: true iff for every computational basis
/// input |x>, the overlap |<a(x)|b(x)>|^2 is at least `1 - tol`. Inputs must
/// be free of measurements and resets (see [`FlatCircuit::unitary_only`]).
pub fn equivalent_up_to_global_phase(
    a: &FlatCircuit,
    b: &FlatCircuit,
    tol: f64,
) -> Result<bool, SimError> {
    if a.n_qubits != b.n_qubits {
        return Err(SimError::QubitCountMismatch(a.n_qubits, b.n_qubits));
    }
    if a.n_qubits > MAX_EQUIV_QUBITS {
        return Err(SimError::TooManyQubits { n: a.n_qubits, max: MAX_EQUIV_QUBITS });
    }
    for circuit in [a, b] {
        check_circuit(circuit)?;
        if circuit.events.iter().any(|e| !matches!(e, Event::Gate { .. })) {
            return Err(SimError::NonUnitaryEvent);
        }
    }
    for x in 0..(1usize << a.n_qubits) {
        let mut sa = StateVector::basis(a.n_qubits, x)?;
        let mut sb = StateVector::basis(b.n_qubits, x)?;
        for ev in &a.events {
            if let Event::Gate { name, params, qubits } = ev {
                sa.apply(name, params, qubits)?;
            }
        }
        for ev in &b.events {
            if let Event::Gate { name, params, qubits } = ev {
                sb.apply(name, params, qubits)?;
            }
        }
        if sa.inner_product(&sb).norm_sqr() < 1.0 - tol {
            return Ok(false);
        }
    }
    Ok(true)
}
