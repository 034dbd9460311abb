//! The interpreter that turns one program iteration into a [`FlatCircuit`].
//!
//! A [`plan`] verifies the program, locates the ensemble loop, reads its
//! constant bounds, and evaluates the top-level definitions (gates,
//! distributions, allocations, constants) once. Each [`expand_iteration`]
//! then replays the iteration region from a clean environment with the
//! induction variable bound to the iteration index and a fresh per-iteration
//! random stream. Iterations are therefore independently computable, in any
//! order, with byte-identical results.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::circuit::{Event, FlatCircuit};
use crate::ir::{Attribute, EirType, Loc, OpId, OpKind, Operation, Program, ValueId};
use crate::rng::{self, derive_stream, FloatTensor, IntTensor, RngStream, Tensor};
use crate::verify::{is_valid, verify, Diagnostic};

/// A gate with its parameters fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub name: String,
    pub arity: u32,
    pub params: Vec<f64>,
}

/// Runtime value of an SSA name during expansion.
#[derive(Debug, Clone)]
pub enum EvalValue {
    Int(i64),
    Index(i64),
    Float(f64),
    IntTensor(IntTensor),
    FloatTensor(FloatTensor),
    QubitRef { alloc: usize, flat: u32 },
    QubitTensorRef { alloc: usize },
    CBitRef { alloc: usize, flat: u32 },
    CBitTensorRef { alloc: usize },
    Gate(Rc<GateInstance>),
    GateDist(Rc<Vec<Rc<GateInstance>>>),
}

impl EvalValue {
    fn as_int_like(&self) -> Option<i64> {
        match self {
            EvalValue::Int(v) | EvalValue::Index(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct AllocLayout {
    base: u32,
    shape: Vec<u64>,
    size: u32,
}

#[derive(Debug, Clone, Default)]
struct GlobalEnv {
    values: HashMap<ValueId, EvalValue>,
    qubit_allocs: Vec<AllocLayout>,
    cbit_allocs: Vec<AllocLayout>,
    n_qubits: u32,
    n_cbits: u32,
}

/// Everything needed to expand iterations of one verified program.
#[derive(Debug, Clone)]
pub struct ExpansionPlan<'p> {
    program: &'p Program,
    master_seed: u64,
    lo: u64,
    hi: u64,
    step: u64,
    filter: Option<Vec<u64>>,
    global: GlobalEnv,
    qpi: OpId,
    induction_var: ValueId,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("program failed verification with {} error(s); first: {first}", .diagnostics.len())]
    Invalid {
        diagnostics: Vec<Diagnostic>,
        first: String,
    },
    #[error("{}:{}: the {which} bound of the ensemble loop must be an arith.constant index", loc.line, loc.col)]
    NonConstantBounds { which: &'static str, loc: Loc },
    #[error("ensemble loop bounds must satisfy lower >= 0 and step >= 1, found ({lo}, {hi}, {step})")]
    BadBounds { lo: i64, hi: i64, step: i64 },
    #[error("filter index {0} is outside the ensemble loop's index set")]
    FilterOutOfRange(u64),
    #[error("{}:{}: `{opname}` is not supported at top level; only definitions, allocations, constants and the ensemble loop may appear there", loc.line, loc.col)]
    UnsupportedTopLevel { opname: &'static str, loc: Loc },
    #[error("program allocates no qubits")]
    NoQubits,
}

/// Why a single iteration failed to expand. Carried inside [`ExpandError`]
/// together with the iteration index so a consumer can skip and continue.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExpandErrorKind {
    #[error("iteration is outside the plan's index set")]
    IterationOutOfRange,
    #[error("distribution selector {selector} out of range [0, {n_candidates})")]
    SelectorOutOfRange { selector: i64, n_candidates: usize },
    #[error("extract indices {indices:?} out of bounds for shape {shape:?}")]
    IndexOutOfBounds { indices: Vec<i64>, shape: Vec<u64> },
    #[error("arithmetic error: {0}")]
    Arith(String),
    #[error("gate `{gate}` would act twice on qubit {qubit}")]
    DuplicateQubit { gate: String, qubit: u32 },
    #[error("sampling error: {0}")]
    Rng(String),
    #[error("`{0}` cannot execute inside an iteration region")]
    UnsupportedOp(&'static str),
    #[error("internal expansion error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("iteration {iteration}: {kind}")]
pub struct ExpandError {
    pub iteration: u64,
    pub kind: ExpandErrorKind,
}

/// Builds an expansion plan over a verified program.
pub fn plan(
    program: &Program,
    master_seed: u64,
    filter: Option<Vec<u64>>,
) -> Result<ExpansionPlan<'_>, PlanError> {
    let diagnostics = verify(program);
    if !is_valid(&diagnostics) {
        let first = diagnostics
            .iter()
            .find(|d| d.severity == crate::verify::Severity::Error)
            .map(|d| d.to_string())
            .unwrap_or_default();
        return Err(PlanError::Invalid { diagnostics, first });
    }

    // V10 guarantees exactly one top-level loop whose body is one iteration op.
    let mut found: Option<(OpId, OpId)> = None;
    for &id in program.top_ops() {
        let op = program.op(id);
        if op.kind == OpKind::ScfFor {
            let body = &op.regions[0].ops;
            if body.len() == 1 && program.op(body[0]).kind == OpKind::EirQuantumProgramIteration {
                found = Some((id, body[0]));
            }
        }
    }
    let (loop_id, qpi) = found.expect("verified program has an ensemble loop");
    let loop_op = program.op(loop_id);
    let induction_var = loop_op.regions[0].args[0].id;

    let bound = |which: &'static str, v: ValueId| -> Result<i64, PlanError> {
        let def = program
            .defining_op(v)
            .filter(|d| d.kind == OpKind::ArithConstant);
        match def.and_then(|d| d.int_attr("value")) {
            Some(value) => Ok(value),
            None => Err(PlanError::NonConstantBounds { which, loc: loop_op.loc }),
        }
    };
    let lo = bound("lower", loop_op.operands[0])?;
    let hi = bound("upper", loop_op.operands[1])?;
    let step = bound("step", loop_op.operands[2])?;
    if lo < 0 || hi < 0 || step < 1 {
        return Err(PlanError::BadBounds { lo, hi, step });
    }
    let (lo, hi, step) = (lo as u64, hi as u64, step as u64);

    let global = build_global_env(program, loop_id)?;
    if global.n_qubits == 0 {
        return Err(PlanError::NoQubits);
    }

    let in_range = |i: u64| i >= lo && i < hi && (i - lo).is_multiple_of(step);
    let filter = match filter {
        None => None,
        Some(mut items) => {
            for &i in &items {
                if !in_range(i) {
                    return Err(PlanError::FilterOutOfRange(i));
                }
            }
            items.sort_unstable();
            items.dedup();
            Some(items)
        }
    };

    Ok(ExpansionPlan {
        program,
        master_seed,
        lo,
        hi,
        step,
        filter,
        global,
        qpi,
        induction_var,
    })
}

fn build_global_env(program: &Program, ensemble_loop: OpId) -> Result<GlobalEnv, PlanError> {
    let mut env = GlobalEnv::default();
    for &id in program.top_ops() {
        if id == ensemble_loop {
            continue;
        }
        let op = program.op(id);
        let unsupported = || PlanError::UnsupportedTopLevel { opname: op.opname(), loc: op.loc };
        match op.kind {
            OpKind::ArithConstant => {
                let value = eval_constant(op).ok_or_else(unsupported)?;
                env.values.insert(op.results[0].id, value);
            }
            OpKind::EirGate => {
                let gate =
                    eval_gate(op, |v| env.values.get(&v).cloned()).map_err(|_| unsupported())?;
                env.values
                    .insert(op.results[0].id, EvalValue::Gate(Rc::new(gate)));
            }
            OpKind::EirGateDistribution => {
                let mut candidates = Vec::with_capacity(op.operands.len());
                for &v in &op.operands {
                    match env.values.get(&v) {
                        Some(EvalValue::Gate(g)) => candidates.push(g.clone()),
                        _ => return Err(unsupported()),
                    }
                }
                env.values
                    .insert(op.results[0].id, EvalValue::GateDist(Rc::new(candidates)));
            }
            OpKind::EirProgramAlloc => {
                let shape = op.results[0].ty.shape().unwrap_or(&[]).to_vec();
                let size = shape.iter().product::<u64>() as u32;
                env.qubit_allocs.push(AllocLayout { base: env.n_qubits, shape, size });
                env.n_qubits += size;
                env.values.insert(
                    op.results[0].id,
                    EvalValue::QubitTensorRef { alloc: env.qubit_allocs.len() - 1 },
                );
            }
            OpKind::EirAllocCbits => {
                let shape = op.results[0].ty.shape().unwrap_or(&[]).to_vec();
                let size = shape.iter().product::<u64>() as u32;
                env.cbit_allocs.push(AllocLayout { base: env.n_cbits, shape, size });
                env.n_cbits += size;
                env.values.insert(
                    op.results[0].id,
                    EvalValue::CBitTensorRef { alloc: env.cbit_allocs.len() - 1 },
                );
            }
            _ => return Err(unsupported()),
        }
    }
    Ok(env)
}

fn eval_constant(op: &Operation) -> Option<EvalValue> {
    match (op.attr("value"), &op.results[0].ty) {
        (Some(Attribute::Int(v)), EirType::Index) => Some(EvalValue::Index(*v)),
        (Some(Attribute::Int(v)), EirType::IntScalar { .. }) => Some(EvalValue::Int(*v)),
        (Some(Attribute::Float(v)), EirType::FloatScalar { .. }) => Some(EvalValue::Float(*v)),
        _ => None,
    }
}

/// Resolves a gate definition into a [`GateInstance`]: static `param<i>`
/// attributes fill their positions, dynamic operands fill the remaining
/// positions in ascending order.
fn eval_gate(
    op: &Operation,
    resolve: impl Fn(ValueId) -> Option<EvalValue>,
) -> Result<GateInstance, ExpandErrorKind> {
    let (arity, n_params) = match &op.results[0].ty {
        EirType::Gate { arity, n_params } => (*arity, *n_params),
        other => {
            return Err(ExpandErrorKind::Internal(format!(
                "eir.gate with result type `{other}`"
            )))
        }
    };
    let name = op
        .str_attr("name")
        .ok_or_else(|| ExpandErrorKind::Internal("eir.gate without a name".into()))?
        .to_string();
    let mut params: Vec<Option<f64>> = vec![None; n_params as usize];
    for (attr, value) in &op.attributes {
        if let Some(pos) = attr.strip_prefix("param").and_then(|s| s.parse::<usize>().ok()) {
            if let Attribute::Float(v) = value {
                if pos < params.len() {
                    params[pos] = Some(*v);
                }
            }
        }
    }
    let mut operands = op.operands.iter();
    for slot in params.iter_mut() {
        if slot.is_none() {
            let v = operands
                .next()
                .ok_or_else(|| ExpandErrorKind::Internal("missing dynamic parameter".into()))?;
            match resolve(*v) {
                Some(EvalValue::Float(x)) => *slot = Some(x),
                _ => {
                    return Err(ExpandErrorKind::Internal(
                        "dynamic gate parameter is not an f64 value".into(),
                    ))
                }
            }
        }
    }
    Ok(GateInstance {
        name,
        arity,
        params: params.into_iter().map(Option::unwrap).collect(),
    })
}

impl<'p> ExpansionPlan<'p> {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    /// The (lower, upper, step) bounds of the ensemble loop.
    pub fn iteration_range(&self) -> (u64, u64, u64) {
        (self.lo, self.hi, self.step)
    }

    /// Iteration indices this plan will expand, in ascending order.
    pub fn indices(&self) -> Vec<u64> {
        match &self.filter {
            Some(f) => f.clone(),
            None => (self.lo..self.hi).step_by(self.step.max(1) as usize).collect(),
        }
    }

    pub fn n_qubits(&self) -> u32 {
        self.global.n_qubits
    }

    pub fn n_cbits(&self) -> u32 {
        self.global.n_cbits
    }

    fn contains(&self, iteration: u64) -> bool {
        iteration >= self.lo
            && iteration < self.hi
            && (iteration - self.lo).is_multiple_of(self.step)
    }
}

/// Expands a single iteration. The result depends only on
/// (program, master seed, iteration); no other iteration is consulted.
pub fn expand_iteration(plan: &ExpansionPlan, iteration: u64) -> Result<FlatCircuit, ExpandError> {
    let fail = |kind: ExpandErrorKind| ExpandError { iteration, kind };
    if !plan.contains(iteration) {
        return Err(fail(ExpandErrorKind::IterationOutOfRange));
    }
    let mut interp = Interp {
        program: plan.program,
        global: &plan.global,
        locals: HashMap::new(),
        stream: derive_stream(plan.master_seed, iteration),
        events: Vec::new(),
        transmitted: false,
    };
    interp
        .locals
        .insert(plan.induction_var, EvalValue::Index(iteration as i64));
    let qpi = plan.program.op(plan.qpi);
    interp.exec_ops(&qpi.regions[0].ops).map_err(&fail)?;
    if !interp.transmitted {
        return Err(fail(ExpandErrorKind::Internal(
            "iteration region ended without eir.transmit_results".into(),
        )));
    }
    Ok(FlatCircuit {
        iteration_index: iteration,
        n_qubits: plan.global.n_qubits,
        n_cbits: plan.global.n_cbits,
        events: interp.events,
    })
}

/// Streams every planned iteration in ascending order, one circuit at a
/// time and in constant memory. Errors carry their iteration index; later
/// iterations remain reachable if the consumer keeps pulling.
pub fn expand_stream<'a>(
    plan: &'a ExpansionPlan<'a>,
) -> impl Iterator<Item = Result<FlatCircuit, ExpandError>> + 'a {
    let indices: Box<dyn Iterator<Item = u64> + 'a> = match &plan.filter {
        Some(filter) => Box::new(filter.iter().copied()),
        None => Box::new((plan.lo..plan.hi).step_by(plan.step.max(1) as usize)),
    };
    indices.map(move |i| expand_iteration(plan, i))
}

struct Interp<'p> {
    program: &'p Program,
    global: &'p GlobalEnv,
    locals: HashMap<ValueId, EvalValue>,
    stream: RngStream,
    events: Vec<Event>,
    transmitted: bool,
}

impl<'p> Interp<'p> {
    fn get(&self, v: ValueId) -> Result<EvalValue, ExpandErrorKind> {
        self.locals
            .get(&v)
            .or_else(|| self.global.values.get(&v))
            .cloned()
            .ok_or_else(|| {
                ExpandErrorKind::Internal(format!(
                    "unbound value %{}",
                    self.program.value_name(v).unwrap_or("?")
                ))
            })
    }

    fn get_int_like(&self, v: ValueId) -> Result<i64, ExpandErrorKind> {
        self.get(v)?
            .as_int_like()
            .ok_or_else(|| ExpandErrorKind::Internal("expected an integer value".into()))
    }

    /// Global qubit index of a single-qubit operand value.
    fn qubit_index(&self, value: &EvalValue) -> Result<u32, ExpandErrorKind> {
        match value {
            EvalValue::QubitRef { alloc, flat } => {
                Ok(self.global.qubit_allocs[*alloc].base + flat)
            }
            EvalValue::QubitTensorRef { alloc } => {
                let layout = &self.global.qubit_allocs[*alloc];
                if layout.size == 1 {
                    Ok(layout.base)
                } else {
                    Err(ExpandErrorKind::Internal(
                        "multi-qubit tensor used as a single-qubit operand".into(),
                    ))
                }
            }
            _ => Err(ExpandErrorKind::Internal("expected a qubit operand".into())),
        }
    }

    fn cbit_index(&self, value: &EvalValue) -> Result<u32, ExpandErrorKind> {
        match value {
            EvalValue::CBitRef { alloc, flat } => Ok(self.global.cbit_allocs[*alloc].base + flat),
            EvalValue::CBitTensorRef { alloc } => {
                let layout = &self.global.cbit_allocs[*alloc];
                if layout.size == 1 {
                    Ok(layout.base)
                } else {
                    Err(ExpandErrorKind::Internal(
                        "multi-cbit tensor used as a single-cbit operand".into(),
                    ))
                }
            }
            _ => Err(ExpandErrorKind::Internal("expected a cbit operand".into())),
        }
    }

    fn exec_ops(&mut self, ids: &[OpId]) -> Result<(), ExpandErrorKind> {
        for &id in ids {
            self.exec_op(self.program.op(id))?;
        }
        Ok(())
    }

    fn set_result(&mut self, op: &Operation, value: EvalValue) {
        self.locals.insert(op.results[0].id, value);
    }

    fn exec_op(&mut self, op: &'p Operation) -> Result<(), ExpandErrorKind> {
        match op.kind {
            OpKind::ArithConstant => {
                let v = eval_constant(op)
                    .ok_or_else(|| ExpandErrorKind::Internal("malformed constant".into()))?;
                self.set_result(op, v);
            }
            OpKind::ArithRemsi => {
                let a = self.get_int_like(op.operands[0])?;
                let b = self.get_int_like(op.operands[1])?;
                if b == 0 {
                    return Err(ExpandErrorKind::Arith("remainder by zero".into()));
                }
                // Signed remainder; sign follows the dividend. wrapping_rem
                // avoids the i64::MIN % -1 overflow trap.
                let r = a.wrapping_rem(b);
                let value = match op.results[0].ty {
                    EirType::Index => EvalValue::Index(r),
                    _ => EvalValue::Int(r),
                };
                self.set_result(op, value);
            }
            OpKind::ArithIndexCast => {
                let v = self.get_int_like(op.operands[0])?;
                let value = match op.results[0].ty {
                    EirType::Index => EvalValue::Index(v),
                    EirType::IntScalar { width: 32 } => {
                        if i32::try_from(v).is_err() {
                            return Err(ExpandErrorKind::Arith(format!(
                                "index_cast value {v} does not fit i32"
                            )));
                        }
                        EvalValue::Int(v)
                    }
                    _ => EvalValue::Int(v),
                };
                self.set_result(op, value);
            }
            OpKind::EirIntUniform => {
                let low = op.int_attr("low").unwrap_or(0);
                let high = op.int_attr("high").unwrap_or(0);
                let shape = op.results[0].ty.shape().unwrap_or(&[]).to_vec();
                let tensor = rng::sample_int_uniform(&mut self.stream, low, high, &shape)
                    .map_err(|e| ExpandErrorKind::Rng(e.to_string()))?;
                self.set_result(op, EvalValue::IntTensor(tensor));
            }
            OpKind::EirFloatUniform => {
                let low = op.float_attr("low").unwrap_or(0.0);
                let high = op.float_attr("high").unwrap_or(0.0);
                let shape = op.results[0].ty.shape().unwrap_or(&[]).to_vec();
                let tensor = rng::sample_float_uniform(&mut self.stream, low, high, &shape)
                    .map_err(|e| ExpandErrorKind::Rng(e.to_string()))?;
                self.set_result(op, EvalValue::FloatTensor(tensor));
            }
            OpKind::EirGate => {
                let gate = eval_gate(op, |v| {
                    self.locals.get(&v).or_else(|| self.global.values.get(&v)).cloned()
                })?;
                self.set_result(op, EvalValue::Gate(Rc::new(gate)));
            }
            OpKind::EirGateDistribution => {
                let mut candidates = Vec::with_capacity(op.operands.len());
                for &v in &op.operands {
                    match self.get(v)? {
                        EvalValue::Gate(g) => candidates.push(g),
                        _ => {
                            return Err(ExpandErrorKind::Internal(
                                "distribution candidate is not a gate".into(),
                            ))
                        }
                    }
                }
                self.set_result(op, EvalValue::GateDist(Rc::new(candidates)));
            }
            OpKind::EirExtract => {
                let tensor = self.get(op.operands[0])?;
                let mut indices = Vec::with_capacity(op.operands.len() - 1);
                for &v in &op.operands[1..] {
                    indices.push(self.get_int_like(v)?);
                }
                let value = self.extract(tensor, &indices)?;
                self.set_result(op, value);
            }
            OpKind::EirApply => {
                let gate = match self.get(op.operands[0])? {
                    EvalValue::Gate(g) => g,
                    _ => return Err(ExpandErrorKind::Internal("apply of a non-gate".into())),
                };
                self.apply_gate(&gate, &op.operands[1..])?;
            }
            OpKind::EirApplyDistribution => {
                let dist = match self.get(op.operands[0])? {
                    EvalValue::GateDist(d) => d,
                    _ => {
                        return Err(ExpandErrorKind::Internal(
                            "apply_distribution of a non-distribution".into(),
                        ))
                    }
                };
                let selector = self.get_int_like(op.operands[1])?;
                if selector < 0 || selector as usize >= dist.len() {
                    return Err(ExpandErrorKind::SelectorOutOfRange {
                        selector,
                        n_candidates: dist.len(),
                    });
                }
                let gate = dist[selector as usize].clone();
                self.apply_gate(&gate, &op.operands[2..])?;
            }
            OpKind::EirMeasure => {
                let q = self.qubit_index(&self.get(op.operands[0])?)?;
                let c = self.cbit_index(&self.get(op.operands[1])?)?;
                self.events.push(Event::Measure { qubit: q, cbit: c });
            }
            OpKind::EirReset => {
                let q = self.qubit_index(&self.get(op.operands[0])?)?;
                self.events.push(Event::Reset { qubit: q });
            }
            OpKind::EirTransmitResults => {
                self.transmitted = true;
            }
            OpKind::ScfFor => {
                let lo = self.get_int_like(op.operands[0])?;
                let hi = self.get_int_like(op.operands[1])?;
                let step = self.get_int_like(op.operands[2])?;
                if step < 1 {
                    return Err(ExpandErrorKind::Arith(format!(
                        "scf.for step must be >= 1, found {step}"
                    )));
                }
                let iv = op.regions[0].args[0].id;
                let mut i = lo;
                while i < hi {
                    self.locals.insert(iv, EvalValue::Index(i));
                    self.exec_ops(&op.regions[0].ops)?;
                    i = match i.checked_add(step) {
                        Some(n) => n,
                        None => break,
                    };
                }
            }
            OpKind::ScfIf => {
                let cond = self.get_int_like(op.operands[0])?;
                if cond != 0 {
                    self.exec_ops(&op.regions[0].ops)?;
                } else if let Some(els) = op.regions.get(1) {
                    self.exec_ops(&els.ops)?;
                }
            }
            OpKind::ScfYield => {}
            OpKind::EirProgramAlloc
            | OpKind::EirAllocCbits
            | OpKind::EirQuantumProgramIteration => {
                return Err(ExpandErrorKind::UnsupportedOp(op.opname()));
            }
        }
        Ok(())
    }

    fn extract(&self, tensor: EvalValue, indices: &[i64]) -> Result<EvalValue, ExpandErrorKind> {
        let oob = |shape: &[u64]| ExpandErrorKind::IndexOutOfBounds {
            indices: indices.to_vec(),
            shape: shape.to_vec(),
        };
        match tensor {
            EvalValue::IntTensor(t) => match Tensor::<i64>::flat_index(&t.shape, indices) {
                Some(i) => Ok(EvalValue::Int(t.data[i])),
                None => Err(oob(&t.shape)),
            },
            EvalValue::FloatTensor(t) => match Tensor::<f64>::flat_index(&t.shape, indices) {
                Some(i) => Ok(EvalValue::Float(t.data[i])),
                None => Err(oob(&t.shape)),
            },
            EvalValue::QubitTensorRef { alloc } => {
                let shape = &self.global.qubit_allocs[alloc].shape;
                match Tensor::<i64>::flat_index(shape, indices) {
                    Some(i) => Ok(EvalValue::QubitRef { alloc, flat: i as u32 }),
                    None => Err(oob(shape)),
                }
            }
            EvalValue::CBitTensorRef { alloc } => {
                let shape = &self.global.cbit_allocs[alloc].shape;
                match Tensor::<i64>::flat_index(shape, indices) {
                    Some(i) => Ok(EvalValue::CBitRef { alloc, flat: i as u32 }),
                    None => Err(oob(shape)),
                }
            }
            // Re-extracting from an already-extracted single element: the
            // only in-bounds index is 0, yielding the same reference.
            EvalValue::QubitRef { alloc, flat } => match indices {
                [0] => Ok(EvalValue::QubitRef { alloc, flat }),
                _ => Err(oob(&[1])),
            },
            EvalValue::CBitRef { alloc, flat } => match indices {
                [0] => Ok(EvalValue::CBitRef { alloc, flat }),
                _ => Err(oob(&[1])),
            },
            _ => Err(ExpandErrorKind::Internal("extract from a non-tensor".into())),
        }
    }

    fn apply_gate(
        &mut self,
        gate: &GateInstance,
        qubit_operands: &[ValueId],
    ) -> Result<(), ExpandErrorKind> {
        let mut qubits = Vec::with_capacity(qubit_operands.len());
        for &v in qubit_operands {
            let q = self.qubit_index(&self.get(v)?)?;
            if qubits.contains(&q) {
                return Err(ExpandErrorKind::DuplicateQubit { gate: gate.name.clone(), qubit: q });
            }
            qubits.push(q);
        }
        self.events.push(Event::Gate {
            name: gate.name.clone(),
            params: gate.params.clone(),
            qubits,
        });
        Ok(())
    }
}
