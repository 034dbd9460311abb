//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p eirkit --test acceptance -- --nocapture` to see
//! the per-criterion report.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};

use eirkit::circuit::{Event, FlatCircuit};
use eirkit::emit::{compute_stats, emit_jsonl, emit_qasm2, EmitConfig, EmitFormat};
use eirkit::expand::{expand_iteration, expand_stream, plan};
use eirkit::parse::{parse_module, SourceErrorKind};
use eirkit::print::print_module;
use eirkit::rng::{derive_stream, sample_float_uniform, sample_int_uniform, RngStream};
use eirkit::sim::{equivalent_up_to_global_phase, run_analytic, run_sampled, run_statevector};
use eirkit::verify::{verify, Severity};
use eirkit::workloads;

fn criterion(number: u32, name: &str, body: impl FnOnce() + UnwindSafe) {
    let result = catch_unwind(body);
    let status = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {number} ({name}): {status}");
    if let Err(panic) = result {
        resume_unwind(panic);
    }
}

fn corpus() -> Vec<(&'static str, String)> {
    vec![
        ("ghz", workloads::ghz(2, 100).unwrap()),
        ("ghz_rc", workloads::ghz_rc(100).unwrap()),
        ("wirecut_qaoa", workloads::wirecut_qaoa(50).unwrap()),
        ("rx_sweep", workloads::rx_sweep(100).unwrap()),
    ]
}

// ----------------------------------------------------- mutation negatives ----

#[derive(Clone, Copy)]
enum Mutation {
    DeleteFirst(&'static str),
    ReplaceFirst(&'static str, &'static str),
}

#[derive(Clone, Copy)]
enum Golden {
    Parse(SourceErrorKind),
    Verify(&'static str),
}

struct Negative {
    label: &'static str,
    base: &'static str, // corpus program name
    mutation: Mutation,
    golden: Golden,
}

/// Twenty mutation-derived negatives over the corpus: ten parse errors (each
/// reported on the mutated line) and one verifier fixture per rule V1-V10.
fn negatives() -> Vec<Negative> {
    use Golden::{Parse, Verify};
    use Mutation::{DeleteFirst, ReplaceFirst};
    use SourceErrorKind as K;
    vec![
        Negative {
            label: "missing `=` after a result name",
            base: "ghz",
            mutation: DeleteFirst("= "),
            golden: Parse(K::Syntax),
        },
        Negative {
            label: "missing `(` after an op name",
            base: "wirecut_qaoa",
            mutation: DeleteFirst("("),
            golden: Parse(K::Syntax),
        },
        Negative {
            label: "missing `)` after an operand list",
            base: "wirecut_qaoa",
            mutation: DeleteFirst(")"),
            golden: Parse(K::Syntax),
        },
        Negative {
            label: "missing `:` before a result type",
            base: "ghz",
            mutation: DeleteFirst(" : "),
            golden: Parse(K::TypeAnnotationMismatch),
        },
        Negative {
            label: "missing `to` in an scf.for header",
            base: "ghz_rc",
            mutation: DeleteFirst("to "),
            golden: Parse(K::Syntax),
        },
        Negative {
            label: "missing `step` in an scf.for header",
            base: "ghz",
            mutation: DeleteFirst("step "),
            golden: Parse(K::Syntax),
        },
        Negative {
            label: "missing `,` between attributes",
            base: "rx_sweep",
            mutation: DeleteFirst(", "),
            golden: Parse(K::Syntax),
        },
        Negative {
            label: "unregistered op name",
            base: "wirecut_qaoa",
            mutation: ReplaceFirst("eir.alloc_cbits", "eir.alloc_qbits"),
            golden: Parse(K::UnknownOp),
        },
        Negative {
            label: "second definition of an SSA name",
            base: "ghz",
            mutation: ReplaceFirst("%c0 = eir.extract(%c", "%q0 = eir.extract(%c"),
            golden: Parse(K::Redefinition),
        },
        Negative {
            label: "integer literal overflow",
            base: "ghz",
            mutation: ReplaceFirst("{value = 0}", "{value = 99999999999999999999999999}"),
            golden: Parse(K::Lex),
        },
        Negative {
            label: "V1 use of an undefined value",
            base: "ghz",
            mutation: ReplaceFirst("eir.reset(%q0)", "eir.reset(%q9)"),
            golden: Verify("V1"),
        },
        Negative {
            label: "V2 float constant with index result type",
            base: "ghz",
            mutation: ReplaceFirst(
                "%st = arith.constant() {value = 1} : index",
                "%st = arith.constant() {value = 1.5} : index",
            ),
            golden: Verify("V2"),
        },
        Negative {
            label: "V3 extract index count above tensor rank",
            base: "ghz",
            mutation: ReplaceFirst("eir.extract(%q, %k0) :", "eir.extract(%q, %k0, %k1) :"),
            golden: Verify("V3"),
        },
        Negative {
            label: "V4 duplicate qubit operand on apply",
            base: "ghz",
            mutation: ReplaceFirst(
                "eir.apply(%g_cx, %q0, %q1)",
                "eir.apply(%g_cx, %q0, %q0)",
            ),
            golden: Verify("V4"),
        },
        Negative {
            label: "V5 mixed-arity gate distribution",
            base: "ghz_rc",
            mutation: ReplaceFirst(
                "%pauli = eir.gate_distribution(%g_id, %g_x",
                "%pauli = eir.gate_distribution(%g_id, %g_cx",
            ),
            golden: Verify("V5"),
        },
        Negative {
            label: "V6 missing transmit_results",
            base: "ghz",
            mutation: DeleteFirst("    eir.transmit_results()\n"),
            golden: Verify("V6"),
        },
        Negative {
            label: "V7 swapped measure operand types",
            base: "ghz",
            mutation: ReplaceFirst("eir.measure(%q1, %c1)", "eir.measure(%c1, %q1)"),
            golden: Verify("V7"),
        },
        Negative {
            label: "V8 remsi over mixed operand types",
            base: "ghz_rc",
            mutation: ReplaceFirst("arith.remsi(%pt, %two)", "arith.remsi(%pt, %k0)"),
            golden: Verify("V8"),
        },
        Negative {
            label: "V9 empty integer sampling range",
            base: "ghz_rc",
            mutation: ReplaceFirst("{low = 0, high = 3}", "{low = 3, high = 0}"),
            golden: Verify("V9"),
        },
        Negative {
            label: "V10 extra op in the ensemble loop body",
            base: "ghz",
            mutation: ReplaceFirst(
                "  eir.quantum_program_iteration {",
                "  %extra = arith.constant() {value = 0} : index\n  eir.quantum_program_iteration {",
            ),
            golden: Verify("V10"),
        },
    ]
}

fn apply_mutation(text: &str, mutation: Mutation) -> (String, u32) {
    let (needle, replacement) = match mutation {
        Mutation::DeleteFirst(n) => (n, String::new()),
        Mutation::ReplaceFirst(n, r) => (n, r.to_string()),
    };
    let at = text.find(needle).unwrap_or_else(|| panic!("mutation target `{needle}` not found"));
    let line = text[..at].bytes().filter(|&b| b == b'\n').count() as u32 + 1;
    let mutated = format!("{}{}{}", &text[..at], replacement, &text[at + needle.len()..]);
    (mutated, line)
}

#[test]
fn criterion_1_round_trip_and_negatives() {
    criterion(1, "round-trip", || {
        for (name, text) in corpus() {
            let program = parse_module(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let canonical = print_module(&program);
            let reparsed = parse_module(&canonical).unwrap();
            assert_eq!(print_module(&reparsed), canonical, "{name}: print not idempotent");
            assert!(
                program.structurally_equal(&reparsed),
                "{name}: parse(print) changed structure"
            );
        }

        let sources: std::collections::HashMap<&str, String> = corpus().into_iter().collect();
        let negatives = negatives();
        assert_eq!(negatives.len(), 20);
        for negative in negatives {
            let base = &sources[negative.base];
            let (mutated, line) = apply_mutation(base, negative.mutation);
            match negative.golden {
                Golden::Parse(kind) => {
                    let err = match parse_module(&mutated) {
                        Err(e) => e,
                        Ok(_) => panic!("{}: expected a parse error", negative.label),
                    };
                    assert_eq!(err.kind, kind, "{}", negative.label);
                    assert_eq!(err.line, line, "{}: error line", negative.label);
                }
                Golden::Verify(rule) => {
                    let program = parse_module(&mutated)
                        .unwrap_or_else(|e| panic!("{}: unexpected parse error {e}", negative.label));
                    let errors: Vec<&str> = verify(&program)
                        .iter()
                        .filter(|d| d.severity == Severity::Error)
                        .map(|d| d.rule)
                        .collect();
                    assert_eq!(errors, vec![rule], "{}", negative.label);
                }
            }
        }
    });
}

#[test]
fn criterion_2_determinism_and_order_independence() {
    criterion(2, "determinism and order independence", || {
        let text = workloads::ghz_rc(100).unwrap();
        let program = parse_module(&text).unwrap();
        let config = EmitConfig::new(EmitFormat::Qasm2, 7);

        let run = || -> Vec<String> {
            let pl = plan(&program, 7, None).unwrap();
            expand_stream(&pl)
                .map(|c| emit_qasm2(&c.unwrap(), &config).unwrap())
                .collect()
        };
        let first = run();
        let second = run();
        assert_eq!(first, second, "two full expansions differ");
        assert_eq!(first.len(), 100);

        let single_plan = plan(&program, 7, Some(vec![57])).unwrap();
        let single = expand_iteration(&single_plan, 57).unwrap();
        let single_qasm = emit_qasm2(&single, &config).unwrap();
        assert_eq!(single_qasm, first[57], "iteration 57 alone differs from the full run");

        let jsonl_cfg = EmitConfig::new(EmitFormat::Jsonl, 7);
        let full_jsonl: Vec<String> = {
            let pl = plan(&program, 7, None).unwrap();
            expand_stream(&pl).map(|c| emit_jsonl(&c.unwrap(), &jsonl_cfg)).collect()
        };
        assert_eq!(emit_jsonl(&single, &jsonl_cfg), full_jsonl[57]);
    });
}

fn baseline_ghz_gates() -> FlatCircuit {
    FlatCircuit {
        iteration_index: 0,
        n_qubits: 2,
        n_cbits: 2,
        events: vec![
            Event::Gate { name: "h".into(), params: vec![], qubits: vec![0] },
            Event::Gate { name: "h".into(), params: vec![], qubits: vec![1] },
            Event::Gate { name: "cx".into(), params: vec![], qubits: vec![0, 1] },
        ],
    }
}

#[test]
fn criterion_3_twirling_correctness() {
    criterion(3, "twirling correctness", || {
        let text = workloads::ghz_rc(100).unwrap();
        let program = parse_module(&text).unwrap();
        let pl = plan(&program, 7, None).unwrap();
        let baseline = baseline_ghz_gates();
        let mut n = 0;
        for circuit in expand_stream(&pl) {
            let circuit = circuit.unwrap();
            let stripped = circuit.unitary_only();
            assert!(
                equivalent_up_to_global_phase(&stripped, &baseline, 1e-10).unwrap(),
                "iteration {} is not equivalent to the baseline",
                circuit.iteration_index
            );
            n += 1;
        }
        assert_eq!(n, 100);
    });
}

#[test]
fn criterion_4_twirling_structure() {
    criterion(4, "twirling structure", || {
        let text = workloads::ghz_rc(100).unwrap();
        let program = parse_module(&text).unwrap();
        let pl = plan(&program, 7, None).unwrap();
        let expected = 2 * 2 * workloads::GHZ_RC_TWIRLED_CYCLES;
        for circuit in expand_stream(&pl) {
            let circuit = circuit.unwrap();
            let paulis = circuit.events.iter().filter(|e| e.is_pauli()).count();
            assert_eq!(paulis, expected, "iteration {}", circuit.iteration_index);
            // Pairs bracket each cycle: twirls directly before the cycle
            // gates, corrections directly after.
            let names: Vec<Option<&str>> = circuit.events.iter().map(Event::gate_name).collect();
            assert_eq!(names[4], Some("h"));
            assert_eq!(names[5], Some("h"));
            assert!(circuit.events[2].is_pauli() && circuit.events[3].is_pauli());
            assert!(circuit.events[6].is_pauli() && circuit.events[7].is_pauli());
            assert_eq!(names[10], Some("cx"));
            assert!(circuit.events[8].is_pauli() && circuit.events[9].is_pauli());
            assert!(circuit.events[11].is_pauli() && circuit.events[12].is_pauli());
        }
    });
}

#[test]
fn criterion_5_wirecut_structure() {
    criterion(5, "wire-cut structure", || {
        let text = workloads::wirecut_qaoa(50).unwrap();
        let program = parse_module(&text).unwrap();
        let pl = plan(&program, 11, None).unwrap();
        let mut n = 0;
        for circuit in expand_stream(&pl) {
            let circuit = circuit.unwrap();
            assert_eq!(circuit.n_qubits, 3);
            let measures: Vec<usize> = circuit
                .events
                .iter()
                .enumerate()
                .filter(|(_, e)| matches!(e, Event::Measure { .. }))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(measures.len(), 3);
            if circuit.iteration_index % 2 == 0 {
                // Even: the three events before the measures are basis shifts,
                // one per qubit.
                let start = measures[0] - 3;
                let mut qubits = Vec::new();
                for ev in &circuit.events[start..measures[0]] {
                    match ev {
                        Event::Gate { name, params, qubits: qs } => {
                            assert!(matches!(name.as_str(), "id" | "h" | "rx"));
                            if name == "rx" {
                                assert_eq!(params[0], std::f64::consts::FRAC_PI_2);
                            }
                            qubits.push(qs[0]);
                        }
                        other => panic!("expected a basis shift, found {other:?}"),
                    }
                }
                qubits.sort_unstable();
                assert_eq!(qubits, vec![0, 1, 2]);
            } else {
                // Odd: the first three events are state preparations, then H
                // and RZZ entanglers appear.
                let mut qubits = Vec::new();
                for ev in &circuit.events[..3] {
                    match ev {
                        Event::Gate { name, params, qubits: qs } => {
                            assert!(matches!(name.as_str(), "id" | "x" | "h" | "rx"));
                            if name == "rx" {
                                assert_eq!(params[0], -std::f64::consts::FRAC_PI_2);
                            }
                            qubits.push(qs[0]);
                        }
                        other => panic!("expected a state preparation, found {other:?}"),
                    }
                }
                qubits.sort_unstable();
                assert_eq!(qubits, vec![0, 1, 2]);
                assert!(circuit.events[3..].iter().any(|e| e.gate_name() == Some("h")));
                assert!(circuit.events[3..].iter().any(|e| e.gate_name() == Some("rzz")));
            }
            n += 1;
        }
        assert_eq!(n, 50);
    });
}

#[test]
fn criterion_6_rng_contracts() {
    criterion(6, "rng contracts", || {
        // SplitMix64 reference vector from state 0.
        let mut s = RngStream::from_state(0);
        assert_eq!(s.next_u64(), 0xE220_A839_7B1D_CDAF);

        let mut s = derive_stream(0, 0);
        let ints = sample_int_uniform(&mut s, 0, 2, &[30000]).unwrap();
        assert!(ints.data.iter().all(|v| (0..=2).contains(v)));
        for value in 0..=2 {
            let freq = ints.data.iter().filter(|&&x| x == value).count() as f64 / 30000.0;
            assert!(
                (0.323..=0.343).contains(&freq),
                "value {value} frequency {freq}"
            );
        }

        let mut s = derive_stream(0, 1);
        let floats = sample_float_uniform(&mut s, 0.0, 3.0, &[30000]).unwrap();
        assert!(floats.data.iter().all(|v| (0.0..3.0).contains(v)));
        let mean = floats.data.iter().sum::<f64>() / 30000.0;
        assert!((mean - 1.5).abs() <= 0.02, "mean {mean}");
    });
}

#[test]
fn criterion_7_compression() {
    criterion(7, "compression", || {
        let text_100 = workloads::ghz_rc(100).unwrap();
        let text_1000 = workloads::ghz_rc(1000).unwrap();

        // The program template is identical; only the loop-bound literal
        // changes, so the IR size is constant up to that literal's width.
        let normalized = text_1000.replacen("{value = 1000}", "{value = 100}", 1);
        assert_eq!(normalized, text_100, "templates differ beyond the loop bound");
        assert_eq!(text_1000.len(), text_100.len() + 1);

        let p100 = parse_module(&text_100).unwrap();
        let p1000 = parse_module(&text_1000).unwrap();
        let stats_100 = compute_stats(&plan(&p100, 7, None).unwrap()).unwrap();
        let stats_1000 = compute_stats(&plan(&p1000, 7, None).unwrap()).unwrap();

        assert_eq!(stats_100.ir_bytes + 1, stats_1000.ir_bytes);
        let ratio =
            stats_1000.enumerated_bytes_total as f64 / stats_100.enumerated_bytes_total as f64;
        assert!(
            (9.5..=10.5).contains(&ratio),
            "enumerated-bytes ratio {ratio}"
        );
        assert!(
            stats_1000.compression_ratio > 50.0,
            "compression ratio {}",
            stats_1000.compression_ratio
        );
    });
}

#[test]
fn criterion_8_simulator_oracle() {
    criterion(8, "simulator oracle", || {
        let h_only = FlatCircuit {
            iteration_index: 0,
            n_qubits: 1,
            n_cbits: 0,
            events: vec![Event::Gate { name: "h".into(), params: vec![], qubits: vec![0] }],
        };
        let sv = run_statevector(&h_only).unwrap();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sv.amplitudes[0].re - s2).abs() <= 1e-12 && sv.amplitudes[0].im.abs() <= 1e-12);
        assert!((sv.amplitudes[1].re - s2).abs() <= 1e-12 && sv.amplitudes[1].im.abs() <= 1e-12);

        let ghz = FlatCircuit {
            iteration_index: 0,
            n_qubits: 2,
            n_cbits: 2,
            events: vec![
                Event::Gate { name: "h".into(), params: vec![], qubits: vec![0] },
                Event::Gate { name: "cx".into(), params: vec![], qubits: vec![0, 1] },
                Event::Measure { qubit: 0, cbit: 0 },
                Event::Measure { qubit: 1, cbit: 1 },
            ],
        };
        let analytic = run_analytic(&ghz).unwrap();
        let probs = analytic.probabilities();
        assert!((probs.get("00").copied().unwrap_or(0.0) - 0.5).abs() <= 1e-10);
        assert!((probs.get("11").copied().unwrap_or(0.0) - 0.5).abs() <= 1e-10);
        assert_eq!(probs.len(), 2);

        let sampled = run_sampled(&ghz, 40_000, derive_stream(8, 0)).unwrap();
        let tv = analytic.total_variation_distance(&sampled);
        assert!(tv <= 0.02, "total variation {tv}");
    });
}

#[test]
fn criterion_9_verifier_catalog() {
    criterion(9, "verifier catalog", || {
        let sources: std::collections::HashMap<&str, String> = corpus().into_iter().collect();
        let mut rules_covered = Vec::new();
        for negative in negatives() {
            let Golden::Verify(rule) = negative.golden else {
                continue;
            };
            let (mutated, _) = apply_mutation(&sources[negative.base], negative.mutation);
            let program = parse_module(&mutated).unwrap();
            let errors: Vec<&str> = verify(&program)
                .iter()
                .filter(|d| d.severity == Severity::Error)
                .map(|d| d.rule)
                .collect();
            assert_eq!(errors, vec![rule], "{}: fixture must trigger exactly {rule}", negative.label);
            rules_covered.push(rule);
        }
        rules_covered.sort_unstable();
        let expected: Vec<String> = (1..=10).map(|i| format!("V{i}")).collect();
        let mut expected: Vec<&str> = expected.iter().map(String::as_str).collect();
        expected.sort_unstable();
        assert_eq!(rules_covered, expected, "every rule V1-V10 has a dedicated fixture");
    });
}
