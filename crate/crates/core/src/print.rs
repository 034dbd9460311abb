//! Canonical textual form of a program.
//!
//! The printer is the inverse of the parser: parsing its output reproduces a
//! structurally identical program, and printing that re-parse is
//! byte-identical. Formatting is fixed: one op per line, two-space
//! indentation per region depth, LF newlines.

use std::fmt::Write;

use crate::ir::{OpKind, Operation, Program, ValueId};

pub fn print_module(program: &Program) -> String {
    let mut out = String::new();
    print_ops(program, program.top_ops(), 0, &mut out);
    out
}

fn name_of(program: &Program, id: ValueId) -> String {
    match program.value_name(id) {
        Some(n) => format!("%{n}"),
        None => format!("%_v{}", id.0),
    }
}

fn print_ops(program: &Program, ids: &[crate::ir::OpId], depth: usize, out: &mut String) {
    for &id in ids {
        print_op(program, program.op(id), depth, out);
    }
}

fn print_op(program: &Program, op: &Operation, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    match op.kind {
        OpKind::ScfFor => {
            let iv = name_of(program, op.regions[0].args[0].id);
            let lo = name_of(program, op.operands[0]);
            let hi = name_of(program, op.operands[1]);
            let st = name_of(program, op.operands[2]);
            let _ = writeln!(out, "{indent}scf.for {iv} = {lo} to {hi} step {st} {{");
            print_ops(program, &op.regions[0].ops, depth + 1, out);
            let _ = writeln!(out, "{indent}}}");
        }
        OpKind::ScfIf => {
            let cond = name_of(program, op.operands[0]);
            let _ = writeln!(out, "{indent}scf.if {cond} {{");
            print_ops(program, &op.regions[0].ops, depth + 1, out);
            if op.regions.len() > 1 {
                let _ = writeln!(out, "{indent}}} else {{");
                print_ops(program, &op.regions[1].ops, depth + 1, out);
            }
            let _ = writeln!(out, "{indent}}}");
        }
        OpKind::EirQuantumProgramIteration => {
            let _ = writeln!(out, "{indent}eir.quantum_program_iteration {{");
            print_ops(program, &op.regions[0].ops, depth + 1, out);
            let _ = writeln!(out, "{indent}}}");
        }
        _ => {
            out.push_str(&indent);
            if let Some(first) = op.results.first() {
                let _ = write!(out, "{} = ", name_of(program, first.id));
            }
            let _ = write!(out, "{}(", op.opname());
            for (i, v) in op.operands.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&name_of(program, *v));
            }
            out.push(')');
            if !op.attributes.is_empty() {
                out.push_str(" {");
                for (i, (k, v)) in op.attributes.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{k} = {v}");
                }
                out.push('}');
            }
            if let Some(first) = op.results.first() {
                let _ = write!(out, " : {}", first.ty);
            }
            out.push('\n');
        }
    }
}
