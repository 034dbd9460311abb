//! Builders for the shipped example ensembles.
//!
//! Each builder constructs IR through [`ProgramBuilder`] and returns the
//! canonical program text, so every output parses, verifies clean, and is
//! byte-stable for a fixed parameter set.
//!
//! Pauli indexing throughout is `0 = id, 1 = x, 2 = y, 3 = z`. The
//! randomized-compilation corrections are embedded as reordered gate
//! distributions: looking up a correction is just indexing a distribution
//! whose candidate order encodes the table row. The tables themselves
//! ([`h_correction`], [`cx_correction`]) are validated against a dense
//! matrix oracle in the test suite.

use thiserror::Error;

use crate::ir::{
    Attribute, EirType, IrError, OpId, ParamSpec, Physicality, ProgramBuilder, ValueId,
};
use crate::print::print_module;

/// QAOA problem angle used by `wirecut_qaoa` (the `rzz` rotation).
pub const QAOA_GAMMA: f64 = 0.8;
/// QAOA mixer angle used by `wirecut_qaoa` (the `rx` rotation).
pub const QAOA_BETA: f64 = 0.4;
/// Number of twirled gate cycles in the `ghz_rc` program (the H layer and
/// the CX cycle).
pub const GHZ_RC_TWIRLED_CYCLES: usize = 2;

pub const PAULI_NAMES: [&str; 4] = ["id", "x", "y", "z"];

/// Product of two Paulis up to global phase (the Klein four-group).
pub fn pauli_mul(a: usize, b: usize) -> usize {
    // (x, z) symplectic bits for id, x, y, z; the product mod phase is XOR.
    const BITS: [(u8, u8); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];
    let (ax, az) = BITS[a];
    let (bx, bz) = BITS[b];
    BITS.iter()
        .position(|&p| p == (ax ^ bx, az ^ bz))
        .expect("closed under xor")
}

/// Correction index for a Pauli twirl around an H gate: the unique C with
/// `C * H * P = H` up to global phase.
pub fn h_correction(p: usize) -> usize {
    // H conjugation swaps X and Z and fixes Y (up to phase).
    [0, 3, 2, 1][p]
}

/// Correction pair for a Pauli twirl around a CX cycle: the unique
/// `(Cc, Ct)` with `(Cc (x) Ct) * CX * (Pc (x) Pt) = CX` up to global phase.
pub fn cx_correction(pc: usize, pt: usize) -> (usize, usize) {
    // CX propagation: X_c -> X_c X_t, Z_c -> Z_c, X_t -> X_t, Z_t -> Z_c Z_t.
    const CONTROL_FROM_PC: [usize; 4] = [0, 1, 2, 3];
    const TARGET_FROM_PC: [usize; 4] = [0, 1, 1, 0];
    const CONTROL_FROM_PT: [usize; 4] = [0, 0, 3, 3];
    const TARGET_FROM_PT: [usize; 4] = [0, 1, 2, 3];
    (
        pauli_mul(CONTROL_FROM_PC[pc], CONTROL_FROM_PT[pt]),
        pauli_mul(TARGET_FROM_PC[pc], TARGET_FROM_PT[pt]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadKind {
    Ghz,
    GhzRc,
    WirecutQaoa,
    RxSweep,
}

impl WorkloadKind {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ghz" => Some(WorkloadKind::Ghz),
            "ghz_rc" => Some(WorkloadKind::GhzRc),
            "wirecut_qaoa" => Some(WorkloadKind::WirecutQaoa),
            "rx_sweep" => Some(WorkloadKind::RxSweep),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::Ghz => "ghz",
            WorkloadKind::GhzRc => "ghz_rc",
            WorkloadKind::WirecutQaoa => "wirecut_qaoa",
            WorkloadKind::RxSweep => "rx_sweep",
        }
    }
}

pub const WORKLOAD_NAMES: [&str; 4] = ["ghz", "ghz_rc", "wirecut_qaoa", "rx_sweep"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    /// Only `ghz` is width-parametric; `None` means the workload default.
    pub n_qubits: Option<u32>,
    pub iterations: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("ghz requires at least 2 qubits")]
    TooFewQubits,
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("wirecut_qaoa requires an even iteration count of at least 2")]
    OddIterations,
    #[error("workload `{0}` does not take a qubit count")]
    QubitsNotApplicable(&'static str),
    #[error("builder error: {0}")]
    Ir(#[from] IrError),
}

/// Builds the program text for a workload spec.
pub fn build(spec: &WorkloadSpec) -> Result<String, WorkloadError> {
    match spec.kind {
        WorkloadKind::Ghz => ghz(spec.n_qubits.unwrap_or(2), spec.iterations),
        WorkloadKind::GhzRc => {
            if spec.n_qubits.is_some() {
                return Err(WorkloadError::QubitsNotApplicable("ghz_rc"));
            }
            ghz_rc(spec.iterations)
        }
        WorkloadKind::WirecutQaoa => {
            if spec.n_qubits.is_some() {
                return Err(WorkloadError::QubitsNotApplicable("wirecut_qaoa"));
            }
            wirecut_qaoa(spec.iterations)
        }
        WorkloadKind::RxSweep => {
            if spec.n_qubits.is_some() {
                return Err(WorkloadError::QubitsNotApplicable("rx_sweep"));
            }
            rx_sweep(spec.iterations)
        }
    }
}

// ------------------------------------------------------------- plumbing ----

/// Thin wrapper keeping the workload templates readable.
struct W {
    b: ProgramBuilder,
}

impl W {
    fn new() -> Self {
        W { b: ProgramBuilder::new() }
    }

    fn qubit_alloc(&mut self, ssa: &str, n: u64) -> Result<ValueId, IrError> {
        let ty = EirType::QubitTensor { shape: vec![n], physicality: Physicality::Physical };
        let op = self.b.build_generic("eir.program_alloc", vec![], vec![], vec![(ssa.into(), ty)], 0)?;
        Ok(self.b.result_of(op, 0))
    }

    fn cbit_alloc(&mut self, ssa: &str, n: u64) -> Result<ValueId, IrError> {
        let ty = EirType::CBitTensor { shape: vec![n] };
        let op = self.b.build_generic("eir.alloc_cbits", vec![], vec![], vec![(ssa.into(), ty)], 0)?;
        Ok(self.b.result_of(op, 0))
    }

    fn gate(&mut self, ssa: &str, name: &str, arity: u32, params: &[ParamSpec]) -> Result<ValueId, IrError> {
        let (_, v) = self.b.build_gate_def(ssa, name, arity, params)?;
        Ok(v)
    }

    fn dist(&mut self, ssa: &str, arity: u32, members: &[ValueId]) -> Result<ValueId, IrError> {
        let ty = EirType::GateDistribution { arity };
        let op = self.b.build_generic(
            "eir.gate_distribution",
            members.to_vec(),
            vec![],
            vec![(ssa.into(), ty)],
            0,
        )?;
        Ok(self.b.result_of(op, 0))
    }

    fn int_uniform(&mut self, ssa: &str, low: i64, high: i64, shape: &[u64]) -> Result<ValueId, IrError> {
        let ty = EirType::IntTensor { shape: shape.to_vec(), width: 32 };
        let op = self.b.build_generic(
            "eir.int_uniform",
            vec![],
            vec![("low".into(), Attribute::Int(low)), ("high".into(), Attribute::Int(high))],
            vec![(ssa.into(), ty)],
            0,
        )?;
        Ok(self.b.result_of(op, 0))
    }

    fn float_uniform(&mut self, ssa: &str, low: f64, high: f64, shape: &[u64]) -> Result<ValueId, IrError> {
        let ty = EirType::FloatTensor { shape: shape.to_vec(), width: 64 };
        let op = self.b.build_generic(
            "eir.float_uniform",
            vec![],
            vec![("low".into(), Attribute::Float(low)), ("high".into(), Attribute::Float(high))],
            vec![(ssa.into(), ty)],
            0,
        )?;
        Ok(self.b.result_of(op, 0))
    }

    fn extract(&mut self, ssa: &str, tensor: ValueId, indices: &[ValueId], result: EirType) -> Result<ValueId, IrError> {
        let mut operands = vec![tensor];
        operands.extend_from_slice(indices);
        let op = self.b.build_generic("eir.extract", operands, vec![], vec![(ssa.into(), result)], 0)?;
        Ok(self.b.result_of(op, 0))
    }

    fn apply(&mut self, gate: ValueId, qubits: &[ValueId]) -> Result<(), IrError> {
        let mut operands = vec![gate];
        operands.extend_from_slice(qubits);
        self.b.build_generic("eir.apply", operands, vec![], vec![], 0)?;
        Ok(())
    }

    fn apply_dist(&mut self, dist: ValueId, selector: ValueId, qubits: &[ValueId]) -> Result<(), IrError> {
        let mut operands = vec![dist, selector];
        operands.extend_from_slice(qubits);
        self.b.build_generic("eir.apply_distribution", operands, vec![], vec![], 0)?;
        Ok(())
    }

    fn measure(&mut self, q: ValueId, c: ValueId) -> Result<(), IrError> {
        self.b.build_generic("eir.measure", vec![q, c], vec![], vec![], 0)?;
        Ok(())
    }

    fn reset(&mut self, q: ValueId) -> Result<(), IrError> {
        self.b.build_generic("eir.reset", vec![q], vec![], vec![], 0)?;
        Ok(())
    }

    fn transmit(&mut self) -> Result<(), IrError> {
        self.b.build_generic("eir.transmit_results", vec![], vec![], vec![], 0)?;
        Ok(())
    }

    fn remsi(&mut self, ssa: &str, a: ValueId, b: ValueId, ty: EirType) -> Result<ValueId, IrError> {
        let op = self.b.build_generic("arith.remsi", vec![a, b], vec![], vec![(ssa.into(), ty)], 0)?;
        Ok(self.b.result_of(op, 0))
    }

    /// Opens the ensemble scaffold (`scf.for` + iteration region) and leaves
    /// the insertion point inside the iteration region.
    fn open_ensemble(&mut self, iterations: u64) -> Result<(), IrError> {
        let lo = self.b.const_index("lo", 0)?;
        let hi = self.b.const_index("hi", iterations as i64)?;
        let st = self.b.const_index("st", 1)?;
        let f = self.b.build_generic("scf.for", vec![lo, hi, st], vec![], vec![], 1)?;
        self.b.add_block_arg(f, 0, "i", EirType::Index)?;
        self.b.enter_region(f, 0)?;
        let qpi = self
            .b
            .build_generic("eir.quantum_program_iteration", vec![], vec![], vec![], 1)?;
        self.b.enter_region(qpi, 0)?;
        Ok(())
    }

    fn close_ensemble(&mut self) -> Result<(), IrError> {
        self.transmit()?;
        self.b.exit_region();
        self.b.exit_region();
        Ok(())
    }

    fn scf_if(&mut self, cond: ValueId) -> Result<OpId, IrError> {
        self.b.build_generic("scf.if", vec![cond], vec![], vec![], 2)
    }

    fn scf_for(&mut self, iv: &str, lo: ValueId, hi: ValueId, st: ValueId) -> Result<(OpId, ValueId), IrError> {
        let f = self.b.build_generic("scf.for", vec![lo, hi, st], vec![], vec![], 1)?;
        let iv = self.b.add_block_arg(f, 0, iv, EirType::Index)?;
        Ok((f, iv))
    }

    fn finish(self) -> String {
        print_module(&self.b.finish())
    }
}

fn single_qubit_ty() -> EirType {
    EirType::QubitTensor { shape: vec![1], physicality: Physicality::Physical }
}

fn single_cbit_ty() -> EirType {
    EirType::CBitTensor { shape: vec![1] }
}

fn i32_ty() -> EirType {
    EirType::IntScalar { width: 32 }
}

// ------------------------------------------------------------ workloads ----

/// Baseline GHZ ensemble: per iteration, reset every qubit, apply H to all of
/// them, entangle along a CX chain, and measure each qubit into its cbit.
pub fn ghz(n_qubits: u32, iterations: u64) -> Result<String, WorkloadError> {
    if n_qubits < 2 {
        return Err(WorkloadError::TooFewQubits);
    }
    if iterations == 0 {
        return Err(WorkloadError::NoIterations);
    }
    let n = n_qubits as usize;
    let mut w = W::new();
    let q = w.qubit_alloc("q", n_qubits as u64)?;
    let c = w.cbit_alloc("c", n_qubits as u64)?;
    let h = w.gate("g_h", "h", 1, &[])?;
    let cx = w.gate("g_cx", "cx", 2, &[])?;
    w.open_ensemble(iterations)?;
    let mut idx = Vec::with_capacity(n);
    for k in 0..n {
        idx.push(w.b.const_index(&format!("k{k}"), k as i64)?);
    }
    let mut qs = Vec::with_capacity(n);
    let mut cs = Vec::with_capacity(n);
    for (k, &ik) in idx.iter().enumerate() {
        qs.push(w.extract(&format!("q{k}"), q, &[ik], single_qubit_ty())?);
        cs.push(w.extract(&format!("c{k}"), c, &[ik], single_cbit_ty())?);
    }
    for &qk in &qs {
        w.reset(qk)?;
    }
    for &qk in &qs {
        w.apply(h, &[qk])?;
    }
    for k in 0..n - 1 {
        w.apply(cx, &[qs[k], qs[k + 1]])?;
    }
    for k in 0..n {
        w.measure(qs[k], cs[k])?;
    }
    w.close_ensemble()?;
    Ok(w.finish())
}

/// GHZ with randomized compilation: every gate cycle of the baseline (the H
/// layer and the CX cycle) is bracketed by freshly sampled Pauli twirls and
/// their corrections. Correction lookup stays inside the IR: single-qubit
/// corrections are permuted distributions indexed by the twirl sample, and
/// the CX correction dispatches on the target twirl through `scf.if` over
/// `arith.remsi` bits, selecting per-leaf distributions indexed by the
/// control twirl.
pub fn ghz_rc(iterations: u64) -> Result<String, WorkloadError> {
    if iterations == 0 {
        return Err(WorkloadError::NoIterations);
    }
    let mut w = W::new();
    let q = w.qubit_alloc("q", 2)?;
    let c = w.cbit_alloc("c", 2)?;
    let paulis = [
        w.gate("g_id", "id", 1, &[])?,
        w.gate("g_x", "x", 1, &[])?,
        w.gate("g_y", "y", 1, &[])?,
        w.gate("g_z", "z", 1, &[])?,
    ];
    let h = w.gate("g_h", "h", 1, &[])?;
    let cx = w.gate("g_cx", "cx", 2, &[])?;

    let by_index =
        |table: [usize; 4]| -> Vec<ValueId> { table.iter().map(|&i| paulis[i]).collect() };

    let pauli_dist = w.dist("pauli", 1, &by_index([0, 1, 2, 3]))?;
    let corr_h = w.dist(
        "corr_h",
        1,
        &by_index([h_correction(0), h_correction(1), h_correction(2), h_correction(3)]),
    )?;
    // Per-leaf CX correction rows: with the target twirl pt fixed, the
    // corrections become functions of the control twirl pc alone.
    let mut cc_leaf = Vec::with_capacity(4);
    let mut ct_leaf = Vec::with_capacity(4);
    for pt in 0..4 {
        let mut cc = [0usize; 4];
        let mut ct = [0usize; 4];
        for pc in 0..4 {
            let (a, b) = cx_correction(pc, pt);
            cc[pc] = a;
            ct[pc] = b;
        }
        cc_leaf.push(w.dist(&format!("corr_c{pt}"), 1, &by_index(cc))?);
        ct_leaf.push(w.dist(&format!("corr_t{pt}"), 1, &by_index(ct))?);
    }

    w.open_ensemble(iterations)?;
    let k: Vec<ValueId> = (0..4)
        .map(|i| w.b.const_index(&format!("k{i}"), i))
        .collect::<Result<_, _>>()?;
    let q0 = w.extract("q0", q, &[k[0]], single_qubit_ty())?;
    let q1 = w.extract("q1", q, &[k[1]], single_qubit_ty())?;
    let c0 = w.extract("c0", c, &[k[0]], single_cbit_ty())?;
    let c1 = w.extract("c1", c, &[k[1]], single_cbit_ty())?;
    w.reset(q0)?;
    w.reset(q1)?;

    let tw = w.int_uniform("tw", 0, 3, &[4])?;
    let p0 = w.extract("p0", tw, &[k[0]], i32_ty())?;
    let p1 = w.extract("p1", tw, &[k[1]], i32_ty())?;
    let pc = w.extract("pc", tw, &[k[2]], i32_ty())?;
    let pt = w.extract("pt", tw, &[k[3]], i32_ty())?;

    // Cycle 1: the H layer.
    w.apply_dist(pauli_dist, p0, &[q0])?;
    w.apply_dist(pauli_dist, p1, &[q1])?;
    w.apply(h, &[q0])?;
    w.apply(h, &[q1])?;
    w.apply_dist(corr_h, p0, &[q0])?;
    w.apply_dist(corr_h, p1, &[q1])?;

    // Cycle 2: the CX cycle.
    w.apply_dist(pauli_dist, pc, &[q0])?;
    w.apply_dist(pauli_dist, pt, &[q1])?;
    w.apply(cx, &[q0, q1])?;

    // Four-way dispatch on pt using only remainders: (pt mod 2, pt mod 3)
    // separates {0, 1, 2, 3}.
    let two = w.b.const_int("two", 2, 32)?;
    let three = w.b.const_int("three", 3, 32)?;
    let r2 = w.remsi("r2", pt, two, i32_ty())?;
    let r3 = w.remsi("r3", pt, three, i32_ty())?;

    let outer = w.scf_if(r2)?;
    w.b.enter_region(outer, 0)?; // pt odd: 1 or 3
    {
        let inner = w.scf_if(r3)?;
        w.b.enter_region(inner, 0)?; // pt == 1
        w.apply_dist(cc_leaf[1], pc, &[q0])?;
        w.apply_dist(ct_leaf[1], pc, &[q1])?;
        w.b.exit_region();
        w.b.enter_region(inner, 1)?; // pt == 3
        w.apply_dist(cc_leaf[3], pc, &[q0])?;
        w.apply_dist(ct_leaf[3], pc, &[q1])?;
        w.b.exit_region();
    }
    w.b.exit_region();
    w.b.enter_region(outer, 1)?; // pt even: 0 or 2
    {
        let inner = w.scf_if(r3)?;
        w.b.enter_region(inner, 0)?; // pt == 2
        w.apply_dist(cc_leaf[2], pc, &[q0])?;
        w.apply_dist(ct_leaf[2], pc, &[q1])?;
        w.b.exit_region();
        w.b.enter_region(inner, 1)?; // pt == 0
        w.apply_dist(cc_leaf[0], pc, &[q0])?;
        w.apply_dist(ct_leaf[0], pc, &[q1])?;
        w.b.exit_region();
    }
    w.b.exit_region();

    w.measure(q0, c0)?;
    w.measure(q1, c1)?;
    w.close_ensemble()?;
    Ok(w.finish())
}

/// Wire-cut 4-qubit QAOA as two alternating 3-qubit subcircuits. Even
/// iterations run the top subcircuit (H layer, rzz couplings, rx mixer, then
/// a sampled measurement-basis shift on every qubit inside an `scf.for`);
/// odd iterations run the bottom subcircuit (a sampled state-preparation
/// gate on every qubit, then the H/rzz/rx structure). The basis-shift and
/// state-prep pools are fixed representative sets.
pub fn wirecut_qaoa(iterations: u64) -> Result<String, WorkloadError> {
    if iterations < 2 || !iterations.is_multiple_of(2) {
        return Err(WorkloadError::OddIterations);
    }
    let mut w = W::new();
    let q = w.qubit_alloc("q", 3)?;
    let c = w.cbit_alloc("c", 3)?;
    let g_id = w.gate("g_id", "id", 1, &[])?;
    let g_x = w.gate("g_x", "x", 1, &[])?;
    let g_h = w.gate("g_h", "h", 1, &[])?;
    let g_rzz = w.gate("g_rzz", "rzz", 2, &[ParamSpec::Static(QAOA_GAMMA)])?;
    let g_mix = w.gate("g_mix", "rx", 1, &[ParamSpec::Static(QAOA_BETA)])?;
    // Y-basis shift and |+i> preparation as rx(+-pi/2).
    let g_ybasis = w.gate("g_ybasis", "rx", 1, &[ParamSpec::Static(std::f64::consts::FRAC_PI_2)])?;
    let g_yprep = w.gate("g_yprep", "rx", 1, &[ParamSpec::Static(-std::f64::consts::FRAC_PI_2)])?;
    // Z/X/Y measurement bases; computational, |1>, |+>, |+i> preparations.
    let basis = w.dist("basis", 1, &[g_id, g_h, g_ybasis])?;
    let prep = w.dist("prep", 1, &[g_id, g_x, g_h, g_yprep])?;

    w.open_ensemble(iterations)?;
    let zero = w.b.const_index("zero", 0)?;
    let one = w.b.const_index("one", 1)?;
    let two = w.b.const_index("two", 2)?;
    let three = w.b.const_index("three", 3)?;
    let iv = w.b.lookup("i").expect("ensemble induction variable");
    let parity = w.remsi("parity", iv, two, EirType::Index)?;
    let q0 = w.extract("q0", q, &[zero], single_qubit_ty())?;
    let q1 = w.extract("q1", q, &[one], single_qubit_ty())?;
    let q2 = w.extract("q2", q, &[two], single_qubit_ty())?;
    let c0 = w.extract("c0", c, &[zero], single_cbit_ty())?;
    let c1 = w.extract("c1", c, &[one], single_cbit_ty())?;
    let c2 = w.extract("c2", c, &[two], single_cbit_ty())?;

    let branch = w.scf_if(parity)?;
    w.b.enter_region(branch, 0)?; // odd iteration: bottom subcircuit
    {
        let preps = w.int_uniform("preps", 0, 3, &[3])?;
        let (f, j) = w.scf_for("j", zero, three, one)?;
        w.b.enter_region(f, 0)?;
        let pj = w.extract("pj", preps, &[j], i32_ty())?;
        let qj = w.extract("qj", q, &[j], single_qubit_ty())?;
        w.apply_dist(prep, pj, &[qj])?;
        w.b.exit_region();
        for qk in [q0, q1, q2] {
            w.apply(g_h, &[qk])?;
        }
        w.apply(g_rzz, &[q0, q1])?;
        w.apply(g_rzz, &[q1, q2])?;
        for qk in [q0, q1, q2] {
            w.apply(g_mix, &[qk])?;
        }
    }
    w.b.exit_region();
    w.b.enter_region(branch, 1)?; // even iteration: top subcircuit
    {
        for qk in [q0, q1, q2] {
            w.apply(g_h, &[qk])?;
        }
        w.apply(g_rzz, &[q0, q1])?;
        w.apply(g_rzz, &[q1, q2])?;
        for qk in [q0, q1, q2] {
            w.apply(g_mix, &[qk])?;
        }
        let sels = w.int_uniform("sels", 0, 2, &[3])?;
        let (f, j2) = w.scf_for("j2", zero, three, one)?;
        w.b.enter_region(f, 0)?;
        let sj = w.extract("sj", sels, &[j2], i32_ty())?;
        let qj2 = w.extract("qj2", q, &[j2], single_qubit_ty())?;
        w.apply_dist(basis, sj, &[qj2])?;
        w.b.exit_region();
    }
    w.b.exit_region();

    w.measure(q0, c0)?;
    w.measure(q1, c1)?;
    w.measure(q2, c2)?;
    w.close_ensemble()?;
    Ok(w.finish())
}

/// Parameter-sweep workload: each iteration samples a 10x10 float tensor over
/// [0.0, 3.0), extracts element (0, 0), and uses it as the angle of a single
/// RX rotation before measuring.
pub fn rx_sweep(iterations: u64) -> Result<String, WorkloadError> {
    if iterations == 0 {
        return Err(WorkloadError::NoIterations);
    }
    let mut w = W::new();
    let q = w.qubit_alloc("q", 1)?;
    let c = w.cbit_alloc("c", 1)?;
    w.open_ensemble(iterations)?;
    let t = w.float_uniform("t", 0.0, 3.0, &[10, 10])?;
    let zero = w.b.const_index("zero", 0)?;
    let theta = w.extract("theta", t, &[zero, zero], EirType::FloatScalar { width: 64 })?;
    let rx = w.gate("rx", "rx", 1, &[ParamSpec::Dynamic(theta)])?;
    let q0 = w.extract("q0", q, &[zero], single_qubit_ty())?;
    w.apply(rx, &[q0])?;
    let c0 = w.extract("c0", c, &[zero], single_cbit_ty())?;
    w.measure(q0, c0)?;
    w.close_ensemble()?;
    Ok(w.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Event;
    use crate::expand::{expand_iteration, expand_stream, plan};
    use crate::parse::parse_module;
    use crate::sim::equivalent_up_to_global_phase;
    use crate::verify::verify;
    use num_complex::Complex64;

    fn parsed(text: &str) -> crate::ir::Program {
        parse_module(text).expect("workload text parses")
    }

    #[test]
    fn every_workload_verifies_clean() {
        for text in [
            ghz(2, 100).unwrap(),
            ghz(3, 10).unwrap(),
            ghz_rc(100).unwrap(),
            wirecut_qaoa(50).unwrap(),
            rx_sweep(100).unwrap(),
        ] {
            let diags = verify(&parsed(&text));
            assert!(diags.is_empty(), "{diags:?}\n{text}");
        }
    }

    #[test]
    fn builders_are_byte_stable() {
        assert_eq!(ghz(2, 100).unwrap(), ghz(2, 100).unwrap());
        assert_eq!(ghz_rc(7).unwrap(), ghz_rc(7).unwrap());
        assert_eq!(wirecut_qaoa(8).unwrap(), wirecut_qaoa(8).unwrap());
        assert_eq!(rx_sweep(3).unwrap(), rx_sweep(3).unwrap());
    }

    #[test]
    fn parameter_validation() {
        assert_eq!(ghz(1, 10).unwrap_err(), WorkloadError::TooFewQubits);
        assert_eq!(ghz(2, 0).unwrap_err(), WorkloadError::NoIterations);
        assert_eq!(wirecut_qaoa(7).unwrap_err(), WorkloadError::OddIterations);
        assert_eq!(wirecut_qaoa(0).unwrap_err(), WorkloadError::OddIterations);
        assert_eq!(
            build(&WorkloadSpec {
                kind: WorkloadKind::RxSweep,
                n_qubits: Some(3),
                iterations: 1
            })
            .unwrap_err(),
            WorkloadError::QubitsNotApplicable("rx_sweep")
        );
    }

    #[test]
    fn ghz_expansion_matches_the_reference_event_list() {
        let p = parsed(&ghz(2, 100).unwrap());
        let pl = plan(&p, 0, None).unwrap();
        let c = expand_iteration(&pl, 42).unwrap();
        let expect = vec![
            Event::Reset { qubit: 0 },
            Event::Reset { qubit: 1 },
            Event::Gate { name: "h".into(), params: vec![], qubits: vec![0] },
            Event::Gate { name: "h".into(), params: vec![], qubits: vec![1] },
            Event::Gate { name: "cx".into(), params: vec![], qubits: vec![0, 1] },
            Event::Measure { qubit: 0, cbit: 0 },
            Event::Measure { qubit: 1, cbit: 1 },
        ];
        assert_eq!(c.events, expect);
        assert_eq!((c.n_qubits, c.n_cbits), (2, 2));
    }

    #[test]
    fn ghz3_event_counts() {
        let p = parsed(&ghz(3, 10).unwrap());
        let pl = plan(&p, 1, None).unwrap();
        for circuit in expand_stream(&pl).map(Result::unwrap) {
            let resets = circuit.events.iter().filter(|e| matches!(e, Event::Reset { .. })).count();
            let hs = circuit.events.iter().filter(|e| e.gate_name() == Some("h")).count();
            let cxs = circuit.events.iter().filter(|e| e.gate_name() == Some("cx")).count();
            let measures =
                circuit.events.iter().filter(|e| matches!(e, Event::Measure { .. })).count();
            assert_eq!((resets, hs, cxs, measures), (3, 3, 2, 3));
        }
    }

    // ---- brute-force oracle for the embedded twirl tables ------------------

    fn pauli_matrix(p: usize) -> [[Complex64; 2]; 2] {
        let o = Complex64::ZERO;
        let l = Complex64::ONE;
        let i = Complex64::I;
        match p {
            0 => [[l, o], [o, l]],
            1 => [[o, l], [l, o]],
            2 => [[o, -i], [i, o]],
            3 => [[l, o], [o, -l]],
            _ => unreachable!(),
        }
    }

    fn kron2(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> Vec<Vec<Complex64>> {
        let mut m = vec![vec![Complex64::ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[i * 2 + k][j * 2 + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        m
    }

    fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let n = a.len();
        let mut out = vec![vec![Complex64::ZERO; n]; n];
        for i in 0..n {
            for j in 0..n {
                for (k, bk) in b.iter().enumerate() {
                    out[i][j] += a[i][k] * bk[j];
                }
            }
        }
        out
    }

    /// True when a = phase * b for a single unit-modulus global phase.
    fn equal_up_to_phase(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
        let mut phase: Option<Complex64> = None;
        for (ra, rb) in a.iter().zip(b) {
            for (&ea, &eb) in ra.iter().zip(rb) {
                if eb.norm() < 1e-12 {
                    if ea.norm() > 1e-12 {
                        return false;
                    }
                    continue;
                }
                let ratio = ea / eb;
                match phase {
                    None => phase = Some(ratio),
                    Some(p) => {
                        if (ratio - p).norm() > 1e-12 {
                            return false;
                        }
                    }
                }
            }
        }
        phase.map(|p| (p.norm() - 1.0).abs() < 1e-12).unwrap_or(false)
    }

    #[test]
    fn h_correction_table_against_matrix_oracle() {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let h = [
            [Complex64::new(s2, 0.0), Complex64::new(s2, 0.0)],
            [Complex64::new(s2, 0.0), Complex64::new(-s2, 0.0)],
        ];
        for p in 0..4 {
            let c = h_correction(p);
            // C * H * P == H up to phase (2x2 products).
            let mul2 = |a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]| {
                let mut out = [[Complex64::ZERO; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            out[i][j] += a[i][k] * b[k][j];
                        }
                    }
                }
                out
            };
            let lhs = mul2(mul2(pauli_matrix(c), h), pauli_matrix(p));
            let lhs: Vec<Vec<Complex64>> = lhs.iter().map(|r| r.to_vec()).collect();
            let rhs: Vec<Vec<Complex64>> = h.iter().map(|r| r.to_vec()).collect();
            assert!(equal_up_to_phase(&lhs, &rhs), "pauli {p}");
        }
    }

    #[test]
    fn cx_correction_table_against_matrix_oracle() {
        let o = Complex64::ZERO;
        let l = Complex64::ONE;
        // Control is qubit 0 (LSB), target qubit 1, matching the expander's
        // operand order [q0, q1] and the simulator's little-endian layout.
        let mut cx = vec![vec![o; 4]; 4];
        cx[0b00][0b00] = l;
        cx[0b11][0b01] = l;
        cx[0b10][0b10] = l;
        cx[0b01][0b11] = l;
        for pc in 0..4 {
            for pt in 0..4 {
                let (cc, ct) = cx_correction(pc, pt);
                // kron(target, control): row index is (target bit, control bit).
                let twirl = kron2(pauli_matrix(pt), pauli_matrix(pc));
                let corr = kron2(pauli_matrix(ct), pauli_matrix(cc));
                let lhs = matmul(&corr, &matmul(&cx, &twirl));
                assert!(
                    equal_up_to_phase(&lhs, &cx),
                    "pc={pc} pt={pt} -> cc={cc} ct={ct}"
                );
            }
        }
        // The documented example entry: twirl (X (x) I) corrects with (X (x) X).
        assert_eq!(cx_correction(1, 0), (1, 1));
    }

    #[test]
    fn ghz_rc_structure_and_equivalence() {
        let p = parsed(&ghz_rc(30).unwrap());
        let pl = plan(&p, 7, None).unwrap();
        let baseline = crate::circuit::FlatCircuit {
            iteration_index: 0,
            n_qubits: 2,
            n_cbits: 2,
            events: vec![
                Event::Gate { name: "h".into(), params: vec![], qubits: vec![0] },
                Event::Gate { name: "h".into(), params: vec![], qubits: vec![1] },
                Event::Gate { name: "cx".into(), params: vec![], qubits: vec![0, 1] },
            ],
        };
        for circuit in expand_stream(&pl).map(Result::unwrap) {
            let paulis = circuit.events.iter().filter(|e| e.is_pauli()).count();
            assert_eq!(paulis, 2 * 2 * GHZ_RC_TWIRLED_CYCLES);
            assert_eq!(circuit.events.len(), 15);
            let stripped = circuit.unitary_only();
            assert!(
                equivalent_up_to_global_phase(&stripped, &baseline, 1e-10).unwrap(),
                "iteration {}",
                circuit.iteration_index
            );
        }
    }

    #[test]
    fn ghz_rc_identity_twirl_reduces_to_baseline_plus_ids() {
        let p = parsed(&ghz_rc(2000).unwrap());
        let pl = plan(&p, 0, None).unwrap();
        let mut found = false;
        for circuit in expand_stream(&pl).map(Result::unwrap) {
            let all_id = circuit
                .gate_events()
                .filter(|e| e.is_pauli())
                .all(|e| e.gate_name() == Some("id"));
            if all_id {
                found = true;
                let non_pauli: Vec<&str> = circuit
                    .gate_events()
                    .filter(|e| !e.is_pauli())
                    .map(|e| e.gate_name().unwrap())
                    .collect();
                assert_eq!(non_pauli, vec!["h", "h", "cx"]);
                break;
            }
        }
        assert!(found, "no all-identity twirl among 2000 iterations");
    }

    #[test]
    fn wirecut_structure() {
        let p = parsed(&wirecut_qaoa(10).unwrap());
        let pl = plan(&p, 11, None).unwrap();
        for circuit in expand_stream(&pl).map(Result::unwrap) {
            assert_eq!(circuit.n_qubits, 3);
            let gates: Vec<&Event> = circuit.gate_events().collect();
            let measures =
                circuit.events.iter().filter(|e| matches!(e, Event::Measure { .. })).count();
            assert_eq!(measures, 3);
            if circuit.iteration_index % 2 == 0 {
                // Top subcircuit: last three gate events are the basis shifts.
                let shifts = &gates[gates.len() - 3..];
                let mut covered: Vec<u32> = Vec::new();
                for ev in shifts {
                    if let Event::Gate { name, params, qubits } = ev {
                        assert!(matches!(name.as_str(), "id" | "h" | "rx"));
                        if name == "rx" {
                            assert_eq!(params[0], std::f64::consts::FRAC_PI_2);
                        }
                        covered.push(qubits[0]);
                    }
                }
                covered.sort_unstable();
                assert_eq!(covered, vec![0, 1, 2]);
            } else {
                // Bottom subcircuit: first three events are the preparations.
                let preps = &circuit.events[0..3];
                let mut covered: Vec<u32> = Vec::new();
                for ev in preps {
                    if let Event::Gate { name, params, qubits } = ev {
                        assert!(matches!(name.as_str(), "id" | "x" | "h" | "rx"));
                        if name == "rx" {
                            assert_eq!(params[0], -std::f64::consts::FRAC_PI_2);
                        }
                        covered.push(qubits[0]);
                    } else {
                        panic!("expected a gate event, found {ev:?}");
                    }
                }
                covered.sort_unstable();
                assert_eq!(covered, vec![0, 1, 2]);
                assert!(gates.iter().any(|e| e.gate_name() == Some("h")));
                assert!(gates.iter().any(|e| e.gate_name() == Some("rzz")));
            }
        }
    }

    #[test]
    fn rx_sweep_samples_land_in_range() {
        let p = parsed(&rx_sweep(1000).unwrap());
        let pl = plan(&p, 3, None).unwrap();
        let mut sum = 0.0;
        for circuit in expand_stream(&pl).map(Result::unwrap) {
            let rx_events: Vec<&Event> =
                circuit.gate_events().filter(|e| e.gate_name() == Some("rx")).collect();
            assert_eq!(rx_events.len(), 1);
            if let Event::Gate { params, .. } = rx_events[0] {
                assert!((0.0..3.0).contains(&params[0]));
                sum += params[0];
            }
        }
        let mean = sum / 1000.0;
        assert!((mean - 1.5).abs() <= 0.11, "mean {mean}");
    }
}
