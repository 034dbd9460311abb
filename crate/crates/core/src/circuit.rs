//! The fully materialized circuit produced by expanding one iteration.

use thiserror::Error;

/// One event in a flat circuit, in execution order.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Reset { qubit: u32 },
    Gate { name: String, params: Vec<f64>, qubits: Vec<u32> },
    Measure { qubit: u32, cbit: u32 },
}

impl Event {
    pub fn gate_name(&self) -> Option<&str> {
        match self {
            Event::Gate { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn is_pauli(&self) -> bool {
        matches!(self.gate_name(), Some("id" | "x" | "y" | "z"))
    }
}

/// A branch-free circuit for a single iteration index.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCircuit {
    pub iteration_index: u64,
    pub n_qubits: u32,
    pub n_cbits: u32,
    pub events: Vec<Event>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("qubit index {index} out of range (n_qubits = {n_qubits})")]
    QubitOutOfRange { index: u32, n_qubits: u32 },
    #[error("cbit index {index} out of range (n_cbits = {n_cbits})")]
    CbitOutOfRange { index: u32, n_cbits: u32 },
    #[error("gate `{0}` applied to the same qubit twice")]
    DuplicateQubit(String),
    #[error("n_qubits must be positive")]
    NoQubits,
}

impl FlatCircuit {
    /// Re-checks the structural invariants: positive qubit count, all indices
    /// in range, and pairwise-distinct qubit operands within one gate event.
    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.n_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        let check_q = |index: u32| {
            if index < self.n_qubits {
                Ok(())
            } else {
                Err(CircuitError::QubitOutOfRange { index, n_qubits: self.n_qubits })
            }
        };
        for ev in &self.events {
            match ev {
                Event::Reset { qubit } => check_q(*qubit)?,
                Event::Gate { name, qubits, .. } => {
                    for &q in qubits {
                        check_q(q)?;
                    }
                    for (i, &a) in qubits.iter().enumerate() {
                        if qubits[i + 1..].contains(&a) {
                            return Err(CircuitError::DuplicateQubit(name.clone()));
                        }
                    }
                }
                Event::Measure { qubit, cbit } => {
                    check_q(*qubit)?;
                    if *cbit >= self.n_cbits {
                        return Err(CircuitError::CbitOutOfRange {
                            index: *cbit,
                            n_cbits: self.n_cbits,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// A copy with every `Reset` and `Measure` removed, leaving only the
    /// unitary gate sequence. This is the input form the global-phase
    /// equivalence check expects.
    pub fn unitary_only(&self) -> FlatCircuit {
        FlatCircuit {
            iteration_index: self.iteration_index,
            n_qubits: self.n_qubits,
            n_cbits: self.n_cbits,
            events: self
                .events
                .iter()
                .filter(|e| matches!(e, Event::Gate { .. }))
                .cloned()
                .collect(),
        }
    }

    pub fn gate_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| matches!(e, Event::Gate { .. }))
    }
}
