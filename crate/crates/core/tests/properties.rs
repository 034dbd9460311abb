//! Property tests for the module invariants: parser/verifier robustness,
//! round-trip stability, traversal order, and sampling range containment.

use proptest::prelude::*;

use eirkit::parse::parse_module;
use eirkit::print::print_module;
use eirkit::rng::{derive_stream, sample_float_uniform, sample_int_uniform};
use eirkit::verify::verify;
use eirkit::workloads;

/// Op names in textual order, recovered from canonical text by stripping
/// structure. Used to check that `walk` equals textual order.
fn opnames_from_text(text: &str) -> Vec<String> {
    let mut names = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t == "}" || t == "} else {" {
            continue;
        }
        let after_result = match t.split_once(" = ") {
            Some((lhs, rhs)) if lhs.starts_with('%') => rhs,
            _ => t,
        };
        let name: String = after_result
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '.' || *c == '_')
            .collect();
        names.push(name);
    }
    names
}

#[test]
fn walk_order_equals_textual_order_on_the_corpus() {
    for text in [
        workloads::ghz(3, 5).unwrap(),
        workloads::ghz_rc(5).unwrap(),
        workloads::wirecut_qaoa(4).unwrap(),
        workloads::rx_sweep(2).unwrap(),
    ] {
        let program = parse_module(&text).unwrap();
        let mut walked = Vec::new();
        program.walk(|op| walked.push(op.opname().to_string()));
        assert_eq!(walked, opnames_from_text(&text));
    }
}

fn token_soup() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("%a".to_string()),
        Just("%b".to_string()),
        Just("%q".to_string()),
        Just("=".to_string()),
        Just("(".to_string()),
        Just(")".to_string()),
        Just("{".to_string()),
        Just("}".to_string()),
        Just(":".to_string()),
        Just(",".to_string()),
        Just("index".to_string()),
        Just("i32".to_string()),
        Just("tensor<2x!eir.physical_qubit>".to_string()),
        Just("tensor<4xi32>".to_string()),
        Just("!eir.gate<1, 0>".to_string()),
        Just("eir.gate".to_string()),
        Just("eir.apply".to_string()),
        Just("eir.extract".to_string()),
        Just("eir.program_alloc".to_string()),
        Just("eir.transmit_results".to_string()),
        Just("eir.quantum_program_iteration".to_string()),
        Just("eir.int_uniform".to_string()),
        Just("arith.constant".to_string()),
        Just("arith.remsi".to_string()),
        Just("scf.for".to_string()),
        Just("scf.if".to_string()),
        Just("to".to_string()),
        Just("step".to_string()),
        Just("else".to_string()),
        Just("value".to_string()),
        Just("low".to_string()),
        Just("high".to_string()),
        Just("name".to_string()),
        Just("\"h\"".to_string()),
        Just("0".to_string()),
        Just("1".to_string()),
        Just("-3".to_string()),
        Just("2.5".to_string()),
        Just("// comment".to_string()),
    ];
    let sep = prop_oneof![Just(" ".to_string()), Just("\n".to_string())];
    (proptest::collection::vec((token, sep), 0..60)).prop_map(|pairs| {
        let mut s = String::new();
        for (tok, sep) in pairs {
            s.push_str(&tok);
            s.push_str(&sep);
        }
        s
    })
}

proptest! {
    /// The verifier never panics on anything the parser accepts, and the
    /// parser never panics on anything at all.
    #[test]
    fn verify_never_crashes_on_accepted_input(src in token_soup()) {
        if let Ok(program) = parse_module(&src) {
            let _ = verify(&program);
            // A parse-accepted program must also survive printing.
            let _ = print_module(&program);
        }
    }

    #[test]
    fn parser_never_panics_on_arbitrary_text(src in "\\PC{0,200}") {
        let _ = parse_module(&src);
    }

    /// print -> parse -> print is byte-stable and structure-preserving for
    /// generated workloads across their parameter space.
    #[test]
    fn round_trip_over_workload_parameters(n in 2u32..6, iters in 1u64..30) {
        let text = workloads::ghz(n, iters).unwrap();
        let program = parse_module(&text).unwrap();
        let canonical = print_module(&program);
        let reparsed = parse_module(&canonical).unwrap();
        prop_assert_eq!(print_module(&reparsed), canonical);
        prop_assert!(program.structurally_equal(&reparsed));
    }

    /// Integer samples stay inside the inclusive range.
    #[test]
    fn int_samples_are_range_contained(
        seed in any::<u64>(),
        low in -1000i64..1000,
        span in 0i64..100,
        n in 1usize..200,
    ) {
        let mut stream = derive_stream(seed, 0);
        let high = low + span;
        let t = sample_int_uniform(&mut stream, low, high, &[n as u64]).unwrap();
        prop_assert!(t.data.iter().all(|v| (low..=high).contains(v)));
    }

    /// Float samples stay inside the half-open range.
    #[test]
    fn float_samples_are_range_contained(
        seed in any::<u64>(),
        low in -1000.0f64..1000.0,
        span in 1e-9f64..100.0,
        n in 1usize..200,
    ) {
        let mut stream = derive_stream(seed, 1);
        let high = low + span;
        prop_assume!(high > low);
        let t = sample_float_uniform(&mut stream, low, high, &[n as u64]).unwrap();
        prop_assert!(t.data.iter().all(|v| *v >= low && *v < high));
    }

    /// Per-iteration streams are pure functions of (seed, iteration).
    #[test]
    fn derived_streams_are_reproducible(seed in any::<u64>(), iteration in any::<u64>()) {
        let mut a = derive_stream(seed, iteration);
        let mut b = derive_stream(seed, iteration);
        for _ in 0..16 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
