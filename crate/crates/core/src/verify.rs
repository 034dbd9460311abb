//! Semantic verification: SSA dominance, typing, and the dialect's
//! structural rules.
//!
//! Rule catalog:
//!  - V1  SSA dominance and single definition
//!  - V2  operand/result types match the op signature
//!  - V3  `eir.extract` index count equals tensor rank; constant indices in bounds
//!  - V4  `eir.apply` operand count equals gate arity; qubit operands pairwise distinct
//!  - V5  all candidates of one `eir.gate_distribution` share one arity
//!  - V6  exactly one `eir.transmit_results` per iteration region, as its final op
//!  - V7  `eir.measure` operand types are (qubit, cbit)
//!  - V8  `arith.remsi` operands are both index or both same-width integers
//!  - V9  RNG ranges are nonempty (int: low <= high; float: low < high, finite)
//!  - V10 the top level contains exactly one ensemble loop nest
//!
//! `verify` is pure: diagnostics are returned, sorted by (line, column, rule),
//! and never panic regardless of input shape. Warnings (rule W1, unused op
//! results) never block expansion.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::ir::{Attribute, EirType, Loc, OpId, OpKind, Operation, Program, ValueId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule: &'static str,
    pub loc: Loc,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.loc.line, self.loc.col, self.rule, self.message
        )
    }
}

/// Verifies a structurally well-formed program. Returns every diagnostic;
/// the program is valid exactly when no diagnostic has `Severity::Error`.
pub fn verify(program: &Program) -> Vec<Diagnostic> {
    let mut checker = Checker {
        p: program,
        diags: Vec::new(),
        live: HashSet::new(),
        defined: HashSet::new(),
        use_counts: HashMap::new(),
        result_sites: Vec::new(),
    };
    checker.check_ops(program.top_ops(), None, false);
    checker.check_ensemble_shape();
    checker.warn_unused();
    let mut diags = checker.diags;
    diags.sort_by_key(|d| (d.loc.line, d.loc.col, d.rule));
    diags
}

/// True when `verify` reports no errors.
pub fn is_valid(diags: &[Diagnostic]) -> bool {
    diags.iter().all(|d| d.severity != Severity::Error)
}

struct Checker<'p> {
    p: &'p Program,
    diags: Vec<Diagnostic>,
    live: HashSet<ValueId>,
    defined: HashSet<ValueId>,
    use_counts: HashMap<ValueId, u32>,
    result_sites: Vec<(ValueId, Loc, String)>,
}

impl<'p> Checker<'p> {
    fn error(&mut self, rule: &'static str, loc: Loc, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            rule,
            loc,
            message: message.into(),
        });
    }

    fn warn(&mut self, rule: &'static str, loc: Loc, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Warning,
            rule,
            loc,
            message: message.into(),
        });
    }

    fn vname(&self, v: ValueId) -> String {
        match self.p.value_name(v) {
            Some(n) => format!("%{n}"),
            None => format!("%<v{}>", v.0),
        }
    }

    fn ty_of(&self, v: ValueId) -> Option<&'p EirType> {
        self.p.value_type(v)
    }

    fn check_ops(&mut self, ids: &[OpId], parent: Option<(OpKind, usize)>, inside_qpi: bool) {
        let mut local_defs: Vec<ValueId> = Vec::new();
        for (pos, &id) in ids.iter().enumerate() {
            let op = self.p.op(id);
            for &v in &op.operands {
                *self.use_counts.entry(v).or_insert(0) += 1;
                if !self.live.contains(&v) {
                    let msg = if self.p.def_site(v).is_none() {
                        format!("use of undefined value {}", self.vname(v))
                    } else {
                        format!(
                            "{} does not dominate this use (defined in a non-enclosing region or later in the program)",
                            self.vname(v)
                        )
                    };
                    self.error("V1", op.loc, msg);
                }
            }

            self.check_op(op, parent, pos + 1 == ids.len(), inside_qpi);

            for r in &op.results {
                if !self.defined.insert(r.id) {
                    self.error(
                        "V1",
                        op.loc,
                        format!("value {} defined more than once", self.vname(r.id)),
                    );
                }
                self.live.insert(r.id);
                local_defs.push(r.id);
                self.result_sites.push((r.id, op.loc, self.vname(r.id)));
            }

            let nested_qpi = inside_qpi || op.kind == OpKind::EirQuantumProgramIteration;
            for (ri, region) in op.regions.iter().enumerate() {
                let mut region_defs: Vec<ValueId> = Vec::new();
                for arg in &region.args {
                    if !self.defined.insert(arg.id) {
                        self.error(
                            "V1",
                            op.loc,
                            format!("value {} defined more than once", self.vname(arg.id)),
                        );
                    }
                    self.live.insert(arg.id);
                    region_defs.push(arg.id);
                }
                self.check_ops(&region.ops, Some((op.kind, ri)), nested_qpi);
                for v in region_defs {
                    self.live.remove(&v);
                }
            }
        }
        for v in local_defs {
            self.live.remove(&v);
        }
    }

    // ---- per-op signature checks -----------------------------------------

    fn check_op(
        &mut self,
        op: &Operation,
        parent: Option<(OpKind, usize)>,
        is_last: bool,
        inside_qpi: bool,
    ) {
        self.check_shape_counts(op);
        match op.kind {
            OpKind::EirGate => self.check_gate(op),
            OpKind::EirGateDistribution => self.check_distribution(op),
            OpKind::EirIntUniform => self.check_int_uniform(op),
            OpKind::EirFloatUniform => self.check_float_uniform(op),
            OpKind::EirProgramAlloc => {
                self.expect_result_kind(op, |t| matches!(t, EirType::QubitTensor { .. }), "a qubit tensor");
            }
            OpKind::EirAllocCbits => {
                self.expect_result_kind(op, |t| matches!(t, EirType::CBitTensor { .. }), "a cbit tensor");
            }
            OpKind::EirQuantumProgramIteration => self.check_qpi(op),
            OpKind::EirApply => self.check_apply(op),
            OpKind::EirApplyDistribution => self.check_apply_distribution(op),
            OpKind::EirMeasure => self.check_measure(op),
            OpKind::EirReset => {
                if op.operands.len() != 1 {
                    self.error("V2", op.loc, "eir.reset takes exactly one qubit operand");
                } else {
                    self.expect_operand(op, 0, |t| t.is_single_qubit(), "a single-qubit tensor");
                }
            }
            OpKind::EirExtract => self.check_extract(op),
            OpKind::EirTransmitResults => {
                if !inside_qpi {
                    self.error(
                        "V6",
                        op.loc,
                        "eir.transmit_results only appears inside an eir.quantum_program_iteration region",
                    );
                }
            }
            OpKind::ScfFor => self.check_for(op),
            OpKind::ScfIf => self.check_if(op),
            OpKind::ScfYield => {
                let ok_parent = matches!(parent, Some((OpKind::ScfFor | OpKind::ScfIf, _)));
                if !ok_parent || !is_last {
                    self.error(
                        "V2",
                        op.loc,
                        "scf.yield may only appear as the final op of an scf.for or scf.if region",
                    );
                }
            }
            OpKind::ArithConstant => self.check_constant(op),
            OpKind::ArithRemsi => self.check_remsi(op),
            OpKind::ArithIndexCast => self.check_index_cast(op),
        }
    }

    /// Result/region/attribute cardinality for every op kind.
    fn check_shape_counts(&mut self, op: &Operation) {
        use OpKind as K;
        let has_result = matches!(
            op.kind,
            K::EirGate
                | K::EirGateDistribution
                | K::EirIntUniform
                | K::EirFloatUniform
                | K::EirProgramAlloc
                | K::EirAllocCbits
                | K::EirExtract
                | K::ArithConstant
                | K::ArithRemsi
                | K::ArithIndexCast
        );
        let expected = usize::from(has_result);
        if op.results.len() != expected {
            self.error(
                "V2",
                op.loc,
                format!("{} produces {} result(s), found {}", op.opname(), expected, op.results.len()),
            );
        }
        let regions_ok = match op.kind {
            K::ScfIf => op.regions.len() == 1 || op.regions.len() == 2,
            _ => op.regions.len() == op.kind.max_regions(),
        };
        if !regions_ok {
            self.error("V2", op.loc, format!("{} has a malformed region list", op.opname()));
        }
        let attrs_allowed: &[&str] = match op.kind {
            K::EirGate => &["name"], // param<i> handled in check_gate
            K::EirIntUniform | K::EirFloatUniform => &["low", "high"],
            K::ArithConstant => &["value", "type"],
            _ => &[],
        };
        if op.kind != K::EirGate {
            for (name, _) in &op.attributes {
                if !attrs_allowed.contains(&name.as_str()) {
                    self.error(
                        "V2",
                        op.loc,
                        format!("{} does not take an attribute `{name}`", op.opname()),
                    );
                }
            }
        }
        for (ri, region) in op.regions.iter().enumerate() {
            let want_args = usize::from(op.kind == K::ScfFor && ri == 0);
            if region.args.len() != want_args {
                self.error(
                    "V2",
                    op.loc,
                    format!("region {ri} of {} has a malformed argument list", op.opname()),
                );
            }
        }
    }

    fn result_ty<'a>(&self, op: &'a Operation) -> Option<&'a EirType> {
        op.results.first().map(|r| &r.ty)
    }

    fn expect_result_kind(
        &mut self,
        op: &Operation,
        pred: impl Fn(&EirType) -> bool,
        what: &str,
    ) {
        if let Some(ty) = self.result_ty(op) {
            if !pred(ty) {
                self.error(
                    "V2",
                    op.loc,
                    format!("{} must produce {what}, found `{ty}`", op.opname()),
                );
            }
        }
    }

    fn expect_operand(
        &mut self,
        op: &Operation,
        index: usize,
        pred: impl Fn(&EirType) -> bool,
        what: &str,
    ) -> bool {
        let Some(&v) = op.operands.get(index) else {
            return false;
        };
        // Undefined operands were already reported under V1.
        let Some(ty) = self.ty_of(v) else {
            return false;
        };
        if !pred(ty) {
            self.error(
                "V2",
                op.loc,
                format!(
                    "operand {index} of {} must be {what}, found `{ty}`",
                    op.opname()
                ),
            );
            return false;
        }
        true
    }

    fn check_gate(&mut self, op: &Operation) {
        let Some(EirType::Gate { n_params, .. }) = self.result_ty(op).cloned() else {
            self.expect_result_kind(op, |t| matches!(t, EirType::Gate { .. }), "a gate type");
            return;
        };
        match op.str_attr("name") {
            Some(s) if !s.is_empty() => {}
            _ => self.error("V2", op.loc, "eir.gate requires a nonempty string attribute `name`"),
        }
        let mut static_positions: HashSet<u32> = HashSet::new();
        for (attr_name, value) in &op.attributes {
            if attr_name == "name" {
                continue;
            }
            let pos = attr_name
                .strip_prefix("param")
                .and_then(|s| s.parse::<u32>().ok());
            match (pos, value) {
                (Some(i), Attribute::Float(_)) if i < n_params => {
                    if !static_positions.insert(i) {
                        self.error("V2", op.loc, format!("duplicate static parameter `{attr_name}`"));
                    }
                }
                _ => self.error(
                    "V2",
                    op.loc,
                    format!("eir.gate does not take an attribute `{attr_name}` (params are `param0`..`param{}` floats)", n_params.saturating_sub(1)),
                ),
            }
        }
        let dynamic = n_params as usize - static_positions.len().min(n_params as usize);
        if op.operands.len() != dynamic {
            self.error(
                "V2",
                op.loc,
                format!(
                    "eir.gate with {n_params} parameter(s) and {} static value(s) takes {dynamic} operand(s), found {}",
                    static_positions.len(),
                    op.operands.len()
                ),
            );
        }
        for i in 0..op.operands.len() {
            self.expect_operand(op, i, |t| matches!(t, EirType::FloatScalar { .. }), "an f64 parameter");
        }
    }

    fn check_distribution(&mut self, op: &Operation) {
        let result_arity = match self.result_ty(op) {
            Some(EirType::GateDistribution { arity }) => Some(*arity),
            Some(ty) => {
                let ty = ty.clone();
                self.error(
                    "V2",
                    op.loc,
                    format!("eir.gate_distribution must produce a gate distribution type, found `{ty}`"),
                );
                None
            }
            None => None,
        };
        if op.operands.is_empty() {
            self.error("V2", op.loc, "eir.gate_distribution needs at least one candidate gate");
            return;
        }
        let mut arities: Vec<u32> = Vec::new();
        for (i, &v) in op.operands.iter().enumerate() {
            match self.ty_of(v) {
                Some(EirType::Gate { arity, .. }) => arities.push(*arity),
                Some(ty) => {
                    let ty = ty.clone();
                    self.error(
                        "V2",
                        op.loc,
                        format!("candidate {i} of eir.gate_distribution must be a gate, found `{ty}`"),
                    );
                }
                None => {}
            }
        }
        if let Some((&first, rest)) = arities.split_first() {
            if rest.iter().any(|&a| a != first) {
                self.error(
                    "V5",
                    op.loc,
                    "all candidates of a gate distribution must share the same number of qubit operands",
                );
            } else if let Some(want) = result_arity {
                if first != want {
                    self.error(
                        "V2",
                        op.loc,
                        format!("distribution type arity {want} does not match candidate arity {first}"),
                    );
                }
            }
        }
    }

    fn check_int_uniform(&mut self, op: &Operation) {
        let width = match self.result_ty(op) {
            Some(EirType::IntTensor { width, .. }) => Some(*width),
            Some(ty) => {
                let ty = ty.clone();
                self.error(
                    "V2",
                    op.loc,
                    format!("eir.int_uniform must produce an integer tensor, found `{ty}`"),
                );
                None
            }
            None => None,
        };
        if !op.operands.is_empty() {
            self.error("V2", op.loc, "eir.int_uniform takes no operands");
        }
        match (op.int_attr("low"), op.int_attr("high")) {
            (Some(low), Some(high)) => {
                if low > high {
                    self.error(
                        "V9",
                        op.loc,
                        format!("empty integer range: low {low} > high {high}"),
                    );
                }
                if let Some(32) = width {
                    for (label, v) in [("low", low), ("high", high)] {
                        if i32::try_from(v).is_err() {
                            self.error(
                                "V2",
                                op.loc,
                                format!("{label} {v} does not fit the i32 element type"),
                            );
                        }
                    }
                }
            }
            _ => self.error(
                "V2",
                op.loc,
                "eir.int_uniform requires integer attributes `low` and `high`",
            ),
        }
    }

    fn check_float_uniform(&mut self, op: &Operation) {
        self.expect_result_kind(op, |t| matches!(t, EirType::FloatTensor { .. }), "a float tensor");
        if !op.operands.is_empty() {
            self.error("V2", op.loc, "eir.float_uniform takes no operands");
        }
        match (op.float_attr("low"), op.float_attr("high")) {
            (Some(low), Some(high)) => {
                if low >= high || !low.is_finite() || !high.is_finite() {
                    self.error(
                        "V9",
                        op.loc,
                        format!("invalid float range [{low}, {high}): bounds must be finite with low < high"),
                    );
                }
            }
            _ => self.error(
                "V2",
                op.loc,
                "eir.float_uniform requires float attributes `low` and `high`",
            ),
        }
    }

    fn check_qpi(&mut self, op: &Operation) {
        if !op.operands.is_empty() {
            self.error("V2", op.loc, "eir.quantum_program_iteration takes no operands");
        }
        let Some(region) = op.regions.first() else {
            return;
        };
        let mut transmit_count = 0usize;
        fn count(p: &Program, ids: &[OpId], n: &mut usize) {
            for &id in ids {
                let op = p.op(id);
                if op.kind == OpKind::EirTransmitResults {
                    *n += 1;
                }
                for r in &op.regions {
                    count(p, &r.ops, n);
                }
            }
        }
        count(self.p, &region.ops, &mut transmit_count);
        if transmit_count != 1 {
            self.error(
                "V6",
                op.loc,
                format!(
                    "iteration region must contain exactly one eir.transmit_results, found {transmit_count}"
                ),
            );
        } else {
            let last_is_transmit = region
                .ops
                .last()
                .map(|&id| self.p.op(id).kind == OpKind::EirTransmitResults)
                .unwrap_or(false);
            if !last_is_transmit {
                self.error(
                    "V6",
                    op.loc,
                    "eir.transmit_results must be the final op of the iteration region",
                );
            }
        }
    }

    fn check_apply(&mut self, op: &Operation) {
        let arity = match op.operands.first().and_then(|&v| self.ty_of(v)) {
            Some(EirType::Gate { arity, .. }) => *arity,
            Some(ty) => {
                let ty = ty.clone();
                self.error(
                    "V2",
                    op.loc,
                    format!("operand 0 of eir.apply must be a gate, found `{ty}`"),
                );
                return;
            }
            None => return,
        };
        if op.operands.len() != 1 + arity as usize {
            self.error(
                "V4",
                op.loc,
                format!(
                    "eir.apply of a {arity}-qubit gate takes {arity} qubit operand(s), found {}",
                    op.operands.len().saturating_sub(1)
                ),
            );
            return;
        }
        for i in 1..op.operands.len() {
            self.expect_operand(op, i, |t| t.is_single_qubit(), "a single-qubit tensor");
        }
        self.check_distinct_qubits(op, 1);
    }

    fn check_apply_distribution(&mut self, op: &Operation) {
        let arity = match op.operands.first().and_then(|&v| self.ty_of(v)) {
            Some(EirType::GateDistribution { arity }) => *arity,
            Some(ty) => {
                let ty = ty.clone();
                self.error(
                    "V2",
                    op.loc,
                    format!("operand 0 of eir.apply_distribution must be a gate distribution, found `{ty}`"),
                );
                return;
            }
            None => return,
        };
        if op.operands.len() != 2 + arity as usize {
            self.error(
                "V2",
                op.loc,
                format!(
                    "eir.apply_distribution over a {arity}-qubit pool takes a selector plus {arity} qubit operand(s)"
                ),
            );
            return;
        }
        self.expect_operand(op, 1, EirType::is_int_or_index_scalar, "an integer or index selector");
        for i in 2..op.operands.len() {
            self.expect_operand(op, i, |t| t.is_single_qubit(), "a single-qubit tensor");
        }
        self.check_distinct_qubits(op, 2);
    }

    fn check_distinct_qubits(&mut self, op: &Operation, first_qubit: usize) {
        let qs = &op.operands[first_qubit..];
        for (i, &a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(&a) {
                self.error(
                    "V4",
                    op.loc,
                    format!("qubit operand {} appears more than once", self.vname(a)),
                );
                return;
            }
        }
    }

    fn check_measure(&mut self, op: &Operation) {
        if op.operands.len() != 2 {
            self.error("V7", op.loc, "eir.measure takes exactly (qubit, cbit) operands");
            return;
        }
        let q_ok = self
            .ty_of(op.operands[0])
            .map(EirType::is_single_qubit)
            .unwrap_or(true);
        let c_ok = self
            .ty_of(op.operands[1])
            .map(EirType::is_single_cbit)
            .unwrap_or(true);
        if !q_ok || !c_ok {
            self.error(
                "V7",
                op.loc,
                "eir.measure operand types must be (single-qubit tensor, single-cbit tensor)",
            );
        }
    }

    fn check_extract(&mut self, op: &Operation) {
        let Some(&tensor) = op.operands.first() else {
            self.error("V2", op.loc, "eir.extract takes a tensor operand plus indices");
            return;
        };
        let Some(tensor_ty) = self.ty_of(tensor).cloned() else {
            return;
        };
        let Some(shape) = tensor_ty.shape().map(<[u64]>::to_vec) else {
            self.error(
                "V2",
                op.loc,
                format!("operand 0 of eir.extract must be a tensor, found `{tensor_ty}`"),
            );
            return;
        };
        let indices = &op.operands[1..];
        if indices.len() != shape.len() {
            self.error(
                "V3",
                op.loc,
                format!(
                    "eir.extract on a rank-{} tensor takes {} index operand(s), found {}",
                    shape.len(),
                    shape.len(),
                    indices.len()
                ),
            );
            return;
        }
        for (k, &v) in indices.iter().enumerate() {
            self.expect_operand(op, 1 + k, EirType::is_int_or_index_scalar, "an integer or index");
            if let Some(cst) = self.p.defining_op(v).filter(|d| d.kind == OpKind::ArithConstant) {
                if let Some(value) = cst.int_attr("value") {
                    if value < 0 || (value as u64) >= shape[k] {
                        self.error(
                            "V3",
                            op.loc,
                            format!(
                                "constant index {value} is out of bounds for dimension {k} of extent {}",
                                shape[k]
                            ),
                        );
                    }
                }
            }
        }
        if let (Some(want), Some(got)) = (tensor_ty.extract_result(), self.result_ty(op)) {
            if *got != want {
                let got = got.clone();
                self.error(
                    "V2",
                    op.loc,
                    format!("eir.extract from `{tensor_ty}` produces `{want}`, found `{got}`"),
                );
            }
        }
    }

    fn check_for(&mut self, op: &Operation) {
        if op.operands.len() != 3 {
            self.error("V2", op.loc, "scf.for takes (lower, upper, step) operands");
        }
        for i in 0..op.operands.len().min(3) {
            self.expect_operand(op, i, |t| matches!(t, EirType::Index), "an index");
        }
        if let Some(region) = op.regions.first() {
            if let Some(arg) = region.args.first() {
                if arg.ty != EirType::Index {
                    self.error("V2", op.loc, "the scf.for induction variable must have index type");
                }
            }
        }
    }

    fn check_if(&mut self, op: &Operation) {
        if op.operands.len() != 1 {
            self.error("V2", op.loc, "scf.if takes exactly one condition operand");
        } else {
            self.expect_operand(
                op,
                0,
                EirType::is_int_or_index_scalar,
                "an integer or index condition",
            );
        }
    }

    fn check_constant(&mut self, op: &Operation) {
        if !op.operands.is_empty() {
            self.error("V2", op.loc, "arith.constant takes no operands");
        }
        let Some(result_ty) = self.result_ty(op).cloned() else {
            return;
        };
        match op.attr("value") {
            Some(Attribute::Int(v)) => match &result_ty {
                EirType::Index | EirType::IntScalar { width: 64 } => {}
                EirType::IntScalar { width: 32 } => {
                    if i32::try_from(*v).is_err() {
                        self.error("V2", op.loc, format!("value {v} does not fit i32"));
                    }
                }
                other => {
                    let other = other.clone();
                    self.error(
                        "V2",
                        op.loc,
                        format!("integer constant cannot produce `{other}`"),
                    );
                }
            },
            Some(Attribute::Float(_)) => {
                if !matches!(result_ty, EirType::FloatScalar { .. }) {
                    self.error(
                        "V2",
                        op.loc,
                        format!("float constant cannot produce `{result_ty}`"),
                    );
                }
            }
            _ => self.error("V2", op.loc, "arith.constant requires a `value` attribute"),
        }
        if let Some(Attribute::Type(t)) = op.attr("type") {
            if *t != result_ty {
                self.error(
                    "V2",
                    op.loc,
                    "the `type` attribute of arith.constant must match its result type",
                );
            }
        }
    }

    fn check_remsi(&mut self, op: &Operation) {
        if op.operands.len() != 2 {
            self.error("V8", op.loc, "arith.remsi takes exactly two operands");
            return;
        }
        let (a, b) = (self.ty_of(op.operands[0]), self.ty_of(op.operands[1]));
        if let (Some(a), Some(b)) = (a, b) {
            let compatible = matches!(
                (a, b),
                (EirType::Index, EirType::Index)
            ) || matches!((a, b),
                (EirType::IntScalar { width: wa }, EirType::IntScalar { width: wb }) if wa == wb);
            if !compatible {
                let (a, b) = (a.clone(), b.clone());
                self.error(
                    "V8",
                    op.loc,
                    format!("arith.remsi operands must be both index or both same-width integers, found `{a}` and `{b}`"),
                );
                return;
            }
            let a = a.clone();
            if let Some(res) = self.result_ty(op) {
                if *res != a {
                    let res = res.clone();
                    self.error(
                        "V2",
                        op.loc,
                        format!("arith.remsi result must be `{a}`, found `{res}`"),
                    );
                }
            }
        }
    }

    fn check_index_cast(&mut self, op: &Operation) {
        if op.operands.len() != 1 {
            self.error("V2", op.loc, "arith.index_cast takes exactly one operand");
            return;
        }
        let Some(src) = self.ty_of(op.operands[0]).cloned() else {
            return;
        };
        let Some(dst) = self.result_ty(op).cloned() else {
            return;
        };
        let ok = matches!(
            (&src, &dst),
            (EirType::Index, EirType::IntScalar { .. }) | (EirType::IntScalar { .. }, EirType::Index)
        );
        if !ok {
            self.error(
                "V2",
                op.loc,
                format!("arith.index_cast converts between index and integers, found `{src}` -> `{dst}`"),
            );
        }
    }

    // ---- whole-program structure -----------------------------------------

    /// V10: the top level holds exactly one ensemble loop nest: one top-level
    /// `scf.for` whose body is exactly one `eir.quantum_program_iteration`,
    /// and no iteration op anywhere else.
    fn check_ensemble_shape(&mut self) {
        let mut qpi_locs: Vec<Loc> = Vec::new();
        self.p.walk(|op| {
            if op.kind == OpKind::EirQuantumProgramIteration {
                qpi_locs.push(op.loc);
            }
        });
        let mut ensemble_loops = 0usize;
        for &id in self.p.top_ops() {
            let op = self.p.op(id);
            if op.kind != OpKind::ScfFor {
                continue;
            }
            let Some(region) = op.regions.first() else {
                continue;
            };
            let body_is_single_qpi = region.ops.len() == 1
                && self.p.op(region.ops[0]).kind == OpKind::EirQuantumProgramIteration;
            let mut contains_qpi = false;
            for &bid in &region.ops {
                let mut found = false;
                count_qpi(self.p, bid, &mut found);
                contains_qpi |= found;
            }
            if body_is_single_qpi {
                ensemble_loops += 1;
            } else if contains_qpi {
                self.error(
                    "V10",
                    op.loc,
                    "the ensemble loop body must consist of exactly one eir.quantum_program_iteration",
                );
                return;
            }
        }
        if qpi_locs.is_empty() || ensemble_loops == 0 {
            let loc = qpi_locs.first().copied().unwrap_or_default();
            self.error(
                "V10",
                loc,
                "program must contain exactly one top-level ensemble loop around an eir.quantum_program_iteration",
            );
        } else if ensemble_loops > 1 || qpi_locs.len() > 1 {
            self.error(
                "V10",
                qpi_locs[qpi_locs.len() - 1],
                "program must contain exactly one ensemble loop nest",
            );
        }
    }

    fn warn_unused(&mut self) {
        let sites = std::mem::take(&mut self.result_sites);
        for (id, loc, name) in sites {
            if self.use_counts.get(&id).copied().unwrap_or(0) == 0 {
                self.warn("W1", loc, format!("value {name} is never used"));
            }
        }
    }
}

fn count_qpi(p: &Program, id: OpId, found: &mut bool) {
    let op = p.op(id);
    if op.kind == OpKind::EirQuantumProgramIteration {
        *found = true;
    }
    for r in &op.regions {
        for &cid in &r.ops {
            count_qpi(p, cid, found);
        }
    }
}
