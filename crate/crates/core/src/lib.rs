//! eirkit: a compiler toolkit for the Ensemble-IR (`eir`) dialect.
//!
//! An ensemble program describes a whole family of related quantum circuits
//! as one piece of IR: shared structure lives in the program text, and
//! per-circuit variation comes from seeded random sampling, gate
//! distributions, and structured control flow evaluated per iteration. This
//! crate provides the full pipeline around that representation:
//!
//! - [`ir`]: the in-memory IR (types, SSA operations, regions) and builders
//! - [`parse`] / [`print`]: the `.eir` textual format, round-trip stable
//! - [`verify`]: semantic checks (typing, dominance, dialect rules V1-V10)
//! - [`rng`]: deterministic SplitMix64 streams, one per iteration
//! - [`expand`]: the interpreter that turns one iteration into a
//!   [`circuit::FlatCircuit`]
//! - [`emit`]: OpenQASM 2 and JSON-lines serialization plus ensemble size
//!   statistics
//! - [`sim`]: a dense statevector oracle for desk-scale verification
//! - [`workloads`]: builders for the shipped example ensembles
//!
//! Everything downstream of a parsed program is a pure function of
//! (program text, master seed, iteration index), bit-exact across platforms
//! and runs.

pub mod circuit;
pub mod emit;
pub mod expand;
pub mod ir;
pub mod parse;
pub mod print;
pub mod rng;
pub mod sim;
pub mod verify;
pub mod workloads;

pub use circuit::{Event, FlatCircuit};
pub use ir::{EirType, Operation, Program, ProgramBuilder, ValueId};
pub use parse::{parse_module, SourceError};
pub use print::print_module;
pub use rng::{derive_stream, RngStream};
pub use verify::{verify, Diagnostic};

/// Version string recorded in emitted artifact headers.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
