//! In-memory representation of Ensemble-IR programs.
//!
//! A [`Program`] owns a flat arena of [`Operation`]s; the top level and every
//! region body hold ordered lists of [`OpId`]s into that arena. SSA values are
//! identified by [`ValueId`]s that are unique across the whole program, with
//! the defining site and type recorded in the program's symbol table. Programs
//! are immutable once a [`ProgramBuilder`] is finished, so they can be shared
//! freely across threads for traversal, printing, and expansion.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Whether a qubit tensor refers to hardware qubits or pre-routing virtual
/// ones. Carried in the type only; no pass in this toolkit acts on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Physicality {
    Physical,
    Virtual,
}

/// The type lattice of the dialect.
///
/// Tensor shapes always have rank and extents of at least 1, and gate
/// arity is at least 1. Constructors in the parser and builder enforce
/// this, and
/// [`EirType::validate`] re-checks it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EirType {
    IntScalar { width: u32 },
    FloatScalar { width: u32 },
    Index,
    IntTensor { shape: Vec<u64>, width: u32 },
    FloatTensor { shape: Vec<u64>, width: u32 },
    QubitTensor { shape: Vec<u64>, physicality: Physicality },
    CBitTensor { shape: Vec<u64> },
    Gate { arity: u32, n_params: u32 },
    GateDistribution { arity: u32 },
}

impl EirType {
    pub fn validate(&self) -> Result<(), IrError> {
        match self {
            EirType::IntScalar { width } | EirType::FloatScalar { width } => {
                check_width(self, *width)
            }
            EirType::Index => Ok(()),
            EirType::IntTensor { shape, width } | EirType::FloatTensor { shape, width } => {
                check_width(self, *width)?;
                check_shape(shape)
            }
            EirType::QubitTensor { shape, .. } | EirType::CBitTensor { shape } => {
                check_shape(shape)
            }
            EirType::Gate { arity, .. } | EirType::GateDistribution { arity } => {
                if *arity == 0 {
                    Err(IrError::InvalidGateArity)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Tensor shape, if this is a tensor type.
    pub fn shape(&self) -> Option<&[u64]> {
        match self {
            EirType::IntTensor { shape, .. }
            | EirType::FloatTensor { shape, .. }
            | EirType::QubitTensor { shape, .. }
            | EirType::CBitTensor { shape } => Some(shape),
            _ => None,
        }
    }

    pub fn rank(&self) -> Option<usize> {
        self.shape().map(|s| s.len())
    }

    pub fn num_elements(&self) -> Option<u64> {
        self.shape().map(|s| s.iter().product())
    }

    /// A qubit tensor holding exactly one qubit: the operand form accepted by
    /// gate application, measurement, and reset.
    pub fn is_single_qubit(&self) -> bool {
        matches!(self, EirType::QubitTensor { .. }) && self.num_elements() == Some(1)
    }

    pub fn is_single_cbit(&self) -> bool {
        matches!(self, EirType::CBitTensor { .. }) && self.num_elements() == Some(1)
    }

    pub fn is_int_or_index_scalar(&self) -> bool {
        matches!(self, EirType::IntScalar { .. } | EirType::Index)
    }

    /// Result type of `eir.extract` applied to this tensor type: the scalar
    /// element for int/float tensors, a single-element tensor for qubit and
    /// cbit tensors.
    pub fn extract_result(&self) -> Option<EirType> {
        match self {
            EirType::IntTensor { width, .. } => Some(EirType::IntScalar { width: *width }),
            EirType::FloatTensor { width, .. } => Some(EirType::FloatScalar { width: *width }),
            EirType::QubitTensor { physicality, .. } => Some(EirType::QubitTensor {
                shape: vec![1],
                physicality: *physicality,
            }),
            EirType::CBitTensor { .. } => Some(EirType::CBitTensor { shape: vec![1] }),
            _ => None,
        }
    }
}

fn check_shape(shape: &[u64]) -> Result<(), IrError> {
    if shape.is_empty() || shape.contains(&0) {
        Err(IrError::InvalidShape(shape.to_vec()))
    } else {
        Ok(())
    }
}

fn check_width(ty: &EirType, width: u32) -> Result<(), IrError> {
    let ok = match ty {
        EirType::FloatScalar { .. } | EirType::FloatTensor { .. } => width == 64,
        _ => width == 32 || width == 64,
    };
    if ok {
        Ok(())
    } else {
        Err(IrError::InvalidWidth(width))
    }
}

impl fmt::Display for EirType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn elem(f: &mut fmt::Formatter<'_>, shape: &[u64], elem: &str) -> fmt::Result {
            write!(f, "tensor<")?;
            for d in shape {
                write!(f, "{d}x")?;
            }
            write!(f, "{elem}>")
        }
        match self {
            EirType::IntScalar { width } => write!(f, "i{width}"),
            EirType::FloatScalar { width } => write!(f, "f{width}"),
            EirType::Index => write!(f, "index"),
            EirType::IntTensor { shape, width } => elem(f, shape, &format!("i{width}")),
            EirType::FloatTensor { shape, width } => elem(f, shape, &format!("f{width}")),
            EirType::QubitTensor {
                shape,
                physicality,
            } => {
                let kw = match physicality {
                    Physicality::Physical => "!eir.physical_qubit",
                    Physicality::Virtual => "!eir.virtual_qubit",
                };
                elem(f, shape, kw)
            }
            EirType::CBitTensor { shape } => elem(f, shape, "!eir.cbit"),
            EirType::Gate { arity, n_params } => write!(f, "!eir.gate<{arity}, {n_params}>"),
            EirType::GateDistribution { arity } => {
                write!(f, "!eir.gate_distribution<{arity}>")
            }
        }
    }
}

/// Attribute values: a closed set sufficient for the whole dialect.
#[derive(Debug, Clone, PartialEq)]
pub enum Attribute {
    Int(i64),
    Float(f64),
    Str(String),
    Type(EirType),
    Array(Vec<Attribute>),
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attribute::Int(v) => write!(f, "{v}"),
            // Debug formatting of f64 is shortest-round-trip and always keeps
            // a decimal point or exponent, which separates floats from ints
            // when re-parsed.
            Attribute::Float(v) => write!(f, "{v:?}"),
            Attribute::Str(s) => write!(f, "\"{}\"", escape_str(s)),
            Attribute::Type(t) => write!(f, "{t}"),
            Attribute::Array(items) => {
                write!(f, "[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, "]")
            }
        }
    }
}

pub(crate) fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

/// The registered operation vocabulary. This set is exhaustive for the
/// artifact; [`ProgramBuilder::build_generic`] rejects anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    EirGate,
    EirGateDistribution,
    EirIntUniform,
    EirFloatUniform,
    EirProgramAlloc,
    EirAllocCbits,
    EirQuantumProgramIteration,
    EirApply,
    EirApplyDistribution,
    EirMeasure,
    EirReset,
    EirExtract,
    EirTransmitResults,
    ScfFor,
    ScfIf,
    ScfYield,
    ArithConstant,
    ArithRemsi,
    ArithIndexCast,
}

pub const OP_REGISTRY: &[OpKind] = &[
    OpKind::EirGate,
    OpKind::EirGateDistribution,
    OpKind::EirIntUniform,
    OpKind::EirFloatUniform,
    OpKind::EirProgramAlloc,
    OpKind::EirAllocCbits,
    OpKind::EirQuantumProgramIteration,
    OpKind::EirApply,
    OpKind::EirApplyDistribution,
    OpKind::EirMeasure,
    OpKind::EirReset,
    OpKind::EirExtract,
    OpKind::EirTransmitResults,
    OpKind::ScfFor,
    OpKind::ScfIf,
    OpKind::ScfYield,
    OpKind::ArithConstant,
    OpKind::ArithRemsi,
    OpKind::ArithIndexCast,
];

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::EirGate => "eir.gate",
            OpKind::EirGateDistribution => "eir.gate_distribution",
            OpKind::EirIntUniform => "eir.int_uniform",
            OpKind::EirFloatUniform => "eir.float_uniform",
            OpKind::EirProgramAlloc => "eir.program_alloc",
            OpKind::EirAllocCbits => "eir.alloc_cbits",
            OpKind::EirQuantumProgramIteration => "eir.quantum_program_iteration",
            OpKind::EirApply => "eir.apply",
            OpKind::EirApplyDistribution => "eir.apply_distribution",
            OpKind::EirMeasure => "eir.measure",
            OpKind::EirReset => "eir.reset",
            OpKind::EirExtract => "eir.extract",
            OpKind::EirTransmitResults => "eir.transmit_results",
            OpKind::ScfFor => "scf.for",
            OpKind::ScfIf => "scf.if",
            OpKind::ScfYield => "scf.yield",
            OpKind::ArithConstant => "arith.constant",
            OpKind::ArithRemsi => "arith.remsi",
            OpKind::ArithIndexCast => "arith.index_cast",
        }
    }

    pub fn from_name(name: &str) -> Option<OpKind> {
        OP_REGISTRY.iter().copied().find(|k| k.name() == name)
    }

    /// Number of regions this op carries in well-formed IR.
    pub fn max_regions(self) -> usize {
        match self {
            OpKind::ScfFor | OpKind::EirQuantumProgramIteration => 1,
            OpKind::ScfIf => 2,
            _ => 0,
        }
    }
}

/// Identifier of an SSA value, unique across one [`Program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(pub u32);

/// Index of an operation in the program arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpId(pub u32);

/// Source location (1-based line and column); (0, 0) for built programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }
}

/// A declared result of an operation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultDecl {
    pub id: ValueId,
    pub name: String,
    pub ty: EirType,
}

/// A declared block argument (for example a loop induction variable).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockArg {
    pub id: ValueId,
    pub name: String,
    pub ty: EirType,
}

/// A region. The dialect uses structured control flow only, so every region
/// holds exactly one block, modeled directly as the argument list plus the
/// ordered op list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub args: Vec<BlockArg>,
    pub ops: Vec<OpId>,
}

/// A generic SSA operation node.
#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    pub kind: OpKind,
    pub operands: Vec<ValueId>,
    pub attributes: Vec<(String, Attribute)>,
    pub results: Vec<ResultDecl>,
    pub regions: Vec<Region>,
    pub loc: Loc,
}

impl Operation {
    pub fn opname(&self) -> &'static str {
        self.kind.name()
    }

    pub fn attr(&self, name: &str) -> Option<&Attribute> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn int_attr(&self, name: &str) -> Option<i64> {
        match self.attr(name) {
            Some(Attribute::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn float_attr(&self, name: &str) -> Option<f64> {
        match self.attr(name) {
            Some(Attribute::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn str_attr(&self, name: &str) -> Option<&str> {
        match self.attr(name) {
            Some(Attribute::Str(s)) => Some(s),
            _ => None,
        }
    }
}

/// Where a value is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefSite {
    /// `index`-th result of the operation.
    Result { op: OpId, index: usize },
    /// Block argument `index` of region `region` of the operation.
    BlockArg { op: OpId, region: usize, index: usize },
}

#[derive(Debug, Clone)]
struct ValueInfo {
    name: String,
    ty: EirType,
    site: DefSite,
}

/// A whole module: the top-level op list plus the arena and symbol table.
#[derive(Debug, Clone, Default)]
pub struct Program {
    arena: Vec<Operation>,
    top: Vec<OpId>,
    values: HashMap<ValueId, ValueInfo>,
    // Names referenced as operands without a definition anywhere. The parser
    // records them so the verifier can report the dangling use (rule V1)
    // instead of the parser rejecting otherwise well-formed text.
    placeholders: HashMap<ValueId, String>,
}

impl Program {
    pub fn top_ops(&self) -> &[OpId] {
        &self.top
    }

    pub fn op(&self, id: OpId) -> &Operation {
        &self.arena[id.0 as usize]
    }

    pub fn num_ops(&self) -> usize {
        self.arena.len()
    }

    pub fn value_type(&self, id: ValueId) -> Option<&EirType> {
        self.values.get(&id).map(|v| &v.ty)
    }

    pub fn value_name(&self, id: ValueId) -> Option<&str> {
        self.values
            .get(&id)
            .map(|v| v.name.as_str())
            .or_else(|| self.placeholders.get(&id).map(String::as_str))
    }

    pub fn def_site(&self, id: ValueId) -> Option<DefSite> {
        self.values.get(&id).map(|v| v.site)
    }

    /// The operation defining `id`, when it is an op result.
    pub fn defining_op(&self, id: ValueId) -> Option<&Operation> {
        match self.def_site(id)? {
            DefSite::Result { op, .. } => Some(self.op(op)),
            DefSite::BlockArg { .. } => None,
        }
    }

    /// Pre-order traversal of every operation, regions included, in textual
    /// order. The order is total and deterministic.
    pub fn walk<'a, F: FnMut(&'a Operation)>(&'a self, mut f: F) {
        fn go<'a, F: FnMut(&'a Operation)>(p: &'a Program, ids: &[OpId], f: &mut F) {
            for &id in ids {
                let op = p.op(id);
                f(op);
                for r in &op.regions {
                    go(p, &r.ops, f);
                }
            }
        }
        go(self, &self.top, &mut f);
    }

    /// Pre-order traversal carrying op ids.
    pub fn walk_ids<F: FnMut(OpId, &Operation)>(&self, mut f: F) {
        fn go<F: FnMut(OpId, &Operation)>(p: &Program, ids: &[OpId], f: &mut F) {
            for &id in ids {
                f(id, p.op(id));
                for r in &p.op(id).regions {
                    go(p, &r.ops, f);
                }
            }
        }
        go(self, &self.top, &mut f);
    }

    /// Structural equality modulo ValueId numbering and source locations.
    ///
    /// Two programs are structurally equal when their op trees match
    /// operation by operation (kind, attributes, result names and types,
    /// block arguments) and every operand refers to the corresponding
    /// definition under the bijection built from definition order.
    pub fn structurally_equal(&self, other: &Program) -> bool {
        let mut map: HashMap<ValueId, ValueId> = HashMap::new();

        fn ops_eq(
            a: &Program,
            b: &Program,
            ids_a: &[OpId],
            ids_b: &[OpId],
            map: &mut HashMap<ValueId, ValueId>,
        ) -> bool {
            if ids_a.len() != ids_b.len() {
                return false;
            }
            for (&ia, &ib) in ids_a.iter().zip(ids_b) {
                let (oa, ob) = (a.op(ia), b.op(ib));
                if oa.kind != ob.kind
                    || oa.attributes != ob.attributes
                    || oa.operands.len() != ob.operands.len()
                    || oa.results.len() != ob.results.len()
                    || oa.regions.len() != ob.regions.len()
                {
                    return false;
                }
                for (va, vb) in oa.operands.iter().zip(&ob.operands) {
                    if map.get(va) != Some(vb) {
                        return false;
                    }
                }
                for (ra, rb) in oa.results.iter().zip(&ob.results) {
                    if ra.name != rb.name || ra.ty != rb.ty {
                        return false;
                    }
                    map.insert(ra.id, rb.id);
                }
                for (rga, rgb) in oa.regions.iter().zip(&ob.regions) {
                    if rga.args.len() != rgb.args.len() {
                        return false;
                    }
                    for (aa, ab) in rga.args.iter().zip(&rgb.args) {
                        if aa.name != ab.name || aa.ty != ab.ty {
                            return false;
                        }
                        map.insert(aa.id, ab.id);
                    }
                    if !ops_eq(a, b, &rga.ops, &rgb.ops, map) {
                        return false;
                    }
                }
            }
            true
        }

        ops_eq(self, other, &self.top, &other.top, &mut map)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IrError {
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("gate arity must be at least 1")]
    InvalidGateArity,
    #[error("gate name must be nonempty")]
    EmptyGateName,
    #[error("invalid tensor shape {0:?}: rank >= 1 and every extent >= 1 required")]
    InvalidShape(Vec<u64>),
    #[error("unsupported scalar width {0}")]
    InvalidWidth(u32),
    #[error("invalid SSA name `{0}`")]
    InvalidName(String),
    #[error("SSA name `{0}` already defined")]
    DuplicateName(String),
    #[error("operation has no region {0}")]
    NoSuchRegion(usize),
}

/// Static parameter or SSA-supplied parameter of a gate definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSpec {
    Static(f64),
    Dynamic(ValueId),
}

pub(crate) fn valid_ssa_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Constructs a [`Program`] incrementally. Operations are appended at the
/// current insertion point, which is either the top level or a region opened
/// with [`ProgramBuilder::enter_region`].
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    program: Program,
    next_value: u32,
    names: HashMap<String, ValueId>,
    // Insertion point stack; empty means top level.
    cursor: Vec<(OpId, usize)>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self) -> Program {
        self.program
    }

    /// Read-only view of the program under construction.
    pub fn program(&self) -> &Program {
        &self.program
    }

    fn fresh_value(&mut self, name: &str) -> Result<ValueId, IrError> {
        if !valid_ssa_name(name) {
            return Err(IrError::InvalidName(name.to_string()));
        }
        if self.names.contains_key(name) {
            return Err(IrError::DuplicateName(name.to_string()));
        }
        let id = ValueId(self.next_value);
        self.next_value += 1;
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    /// Value previously defined under `name`, if any.
    pub fn lookup(&self, name: &str) -> Option<ValueId> {
        self.names.get(name).copied()
    }

    fn insert_op(&mut self, op: Operation) -> OpId {
        let id = OpId(self.program.arena.len() as u32);
        self.program.arena.push(op);
        match self.cursor.last().copied() {
            None => self.program.top.push(id),
            Some((host, region)) => {
                self.program.arena[host.0 as usize].regions[region].ops.push(id)
            }
        }
        id
    }

    /// Builds a generic registered operation with `n_regions` empty regions.
    /// Region bodies are filled through [`ProgramBuilder::enter_region`].
    pub fn build_generic(
        &mut self,
        opname: &str,
        operands: Vec<ValueId>,
        attributes: Vec<(String, Attribute)>,
        results: Vec<(String, EirType)>,
        n_regions: usize,
    ) -> Result<OpId, IrError> {
        let kind = OpKind::from_name(opname).ok_or_else(|| IrError::UnknownOp(opname.into()))?;
        self.build_kind(kind, operands, attributes, results, n_regions, Loc::default())
    }

    pub fn build_kind(
        &mut self,
        kind: OpKind,
        operands: Vec<ValueId>,
        attributes: Vec<(String, Attribute)>,
        results: Vec<(String, EirType)>,
        n_regions: usize,
        loc: Loc,
    ) -> Result<OpId, IrError> {
        for (name, ty) in &results {
            ty.validate()?;
            if !valid_ssa_name(name) {
                return Err(IrError::InvalidName(name.clone()));
            }
        }
        let op_id = OpId(self.program.arena.len() as u32);
        let mut decls = Vec::with_capacity(results.len());
        for (index, (name, ty)) in results.into_iter().enumerate() {
            let id = self.fresh_value(&name)?;
            self.program.values.insert(
                id,
                ValueInfo {
                    name: name.clone(),
                    ty: ty.clone(),
                    site: DefSite::Result { op: op_id, index },
                },
            );
            decls.push(ResultDecl { id, name, ty });
        }
        let op = Operation {
            kind,
            operands,
            attributes,
            results: decls,
            regions: vec![Region::default(); n_regions],
            loc,
        };
        let inserted = self.insert_op(op);
        debug_assert_eq!(inserted, op_id);
        Ok(op_id)
    }

    /// Builds an `eir.gate` definition. Static parameters are stored as
    /// `param<i>` attributes at their positional index; dynamic parameters
    /// become operands in position order.
    pub fn build_gate_def(
        &mut self,
        result_name: &str,
        gate_name: &str,
        arity: u32,
        params: &[ParamSpec],
    ) -> Result<(OpId, ValueId), IrError> {
        if gate_name.is_empty() {
            return Err(IrError::EmptyGateName);
        }
        if arity == 0 {
            return Err(IrError::InvalidGateArity);
        }
        let mut attributes = vec![("name".to_string(), Attribute::Str(gate_name.to_string()))];
        let mut operands = Vec::new();
        for (i, p) in params.iter().enumerate() {
            match p {
                ParamSpec::Static(v) => {
                    attributes.push((format!("param{i}"), Attribute::Float(*v)));
                }
                ParamSpec::Dynamic(v) => operands.push(*v),
            }
        }
        let ty = EirType::Gate {
            arity,
            n_params: params.len() as u32,
        };
        let op = self.build_kind(
            OpKind::EirGate,
            operands,
            attributes,
            vec![(result_name.to_string(), ty)],
            0,
            Loc::default(),
        )?;
        let value = self.program.op(op).results[0].id;
        Ok((op, value))
    }

    /// Declares a block argument on region `region` of `op` (the induction
    /// variable of an `scf.for`, in this dialect).
    pub fn add_block_arg(
        &mut self,
        op: OpId,
        region: usize,
        name: &str,
        ty: EirType,
    ) -> Result<ValueId, IrError> {
        ty.validate()?;
        if region >= self.program.op(op).regions.len() {
            return Err(IrError::NoSuchRegion(region));
        }
        let id = self.fresh_value(name)?;
        self.program.arena[op.0 as usize].regions[region].args.push(BlockArg {
            id,
            name: name.to_string(),
            ty: ty.clone(),
        });
        let index = self.program.arena[op.0 as usize].regions[region].args.len() - 1;
        self.program.values.insert(
            id,
            ValueInfo {
                name: name.to_string(),
                ty,
                site: DefSite::BlockArg { op, region, index },
            },
        );
        Ok(id)
    }

    /// Allocates a value id for an operand name with no definition in sight.
    /// The id has a printable name but no type or def site, which the
    /// verifier reports as an undefined use.
    pub fn placeholder_value(&mut self, name: &str) -> ValueId {
        let id = ValueId(self.next_value);
        self.next_value += 1;
        self.program.placeholders.insert(id, name.to_string());
        id
    }

    /// Appends one more empty region to `op` and returns its index. Used for
    /// the optional `else` region of `scf.if`.
    pub fn append_region(&mut self, op: OpId) -> usize {
        self.program.arena[op.0 as usize].regions.push(Region::default());
        self.program.arena[op.0 as usize].regions.len() - 1
    }

    /// Moves the insertion point into region `region` of `op`.
    pub fn enter_region(&mut self, op: OpId, region: usize) -> Result<(), IrError> {
        if region >= self.program.op(op).regions.len() {
            return Err(IrError::NoSuchRegion(region));
        }
        self.cursor.push((op, region));
        Ok(())
    }

    /// Moves the insertion point back out of the innermost open region.
    pub fn exit_region(&mut self) {
        self.cursor.pop();
    }

    // ---- convenience constructors used by workload builders and tests ----

    pub fn const_index(&mut self, name: &str, value: i64) -> Result<ValueId, IrError> {
        let op = self.build_kind(
            OpKind::ArithConstant,
            vec![],
            vec![("value".into(), Attribute::Int(value))],
            vec![(name.into(), EirType::Index)],
            0,
            Loc::default(),
        )?;
        Ok(self.program.op(op).results[0].id)
    }

    pub fn const_int(&mut self, name: &str, value: i64, width: u32) -> Result<ValueId, IrError> {
        let op = self.build_kind(
            OpKind::ArithConstant,
            vec![],
            vec![("value".into(), Attribute::Int(value))],
            vec![(name.into(), EirType::IntScalar { width })],
            0,
            Loc::default(),
        )?;
        Ok(self.program.op(op).results[0].id)
    }

    pub fn result_of(&self, op: OpId, index: usize) -> ValueId {
        self.program.op(op).results[index].id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_def_examples() {
        let mut b = ProgramBuilder::new();
        let (h_op, _) = b.build_gate_def("h", "h", 1, &[]).unwrap();
        assert_eq!(
            b.program().op(h_op).results[0].ty,
            EirType::Gate { arity: 1, n_params: 0 }
        );

        let (ry_op, _) = b
            .build_gate_def("ry", "ry", 1, &[ParamSpec::Static(0.5)])
            .unwrap();
        let ry = b.program().op(ry_op);
        assert_eq!(ry.results[0].ty, EirType::Gate { arity: 1, n_params: 1 });
        assert_eq!(ry.float_attr("param0"), Some(0.5));

        let (cx_op, _) = b.build_gate_def("cx", "cx", 2, &[]).unwrap();
        assert_eq!(
            b.program().op(cx_op).results[0].ty,
            EirType::Gate { arity: 2, n_params: 0 }
        );
    }

    #[test]
    fn gate_def_rejects_zero_arity() {
        let mut b = ProgramBuilder::new();
        assert_eq!(
            b.build_gate_def("g", "g", 0, &[]).unwrap_err(),
            IrError::InvalidGateArity
        );
    }

    #[test]
    fn build_generic_examples() {
        let mut b = ProgramBuilder::new();
        let t = b
            .build_generic("eir.transmit_results", vec![], vec![], vec![], 0)
            .unwrap();
        assert_eq!(b.program().op(t).kind, OpKind::EirTransmitResults);

        let c = b
            .build_generic(
                "arith.constant",
                vec![],
                vec![
                    ("value".into(), Attribute::Int(0)),
                    ("type".into(), Attribute::Type(EirType::Index)),
                ],
                vec![("c0".into(), EirType::Index)],
                0,
            )
            .unwrap();
        assert_eq!(b.program().op(c).int_attr("value"), Some(0));

        assert_eq!(
            b.build_generic("bogus.op", vec![], vec![], vec![], 0)
                .unwrap_err(),
            IrError::UnknownOp("bogus.op".into())
        );
    }

    #[test]
    fn walk_is_preorder_and_empty_on_empty() {
        let p = ProgramBuilder::new().finish();
        let mut n = 0;
        p.walk(|_| n += 1);
        assert_eq!(n, 0);

        // for { if { yield } } : outer before inner, textual order.
        let mut b = ProgramBuilder::new();
        let lo = b.const_index("lo", 0).unwrap();
        let hi = b.const_index("hi", 2).unwrap();
        let st = b.const_index("st", 1).unwrap();
        let f = b
            .build_generic("scf.for", vec![lo, hi, st], vec![], vec![], 1)
            .unwrap();
        b.add_block_arg(f, 0, "i", EirType::Index).unwrap();
        b.enter_region(f, 0).unwrap();
        let cond = b.const_index("c", 1).unwrap();
        let iff = b
            .build_generic("scf.if", vec![cond], vec![], vec![], 2)
            .unwrap();
        b.enter_region(iff, 0).unwrap();
        b.build_generic("scf.yield", vec![], vec![], vec![], 0).unwrap();
        b.exit_region();
        b.exit_region();
        let p = b.finish();
        let mut seq = Vec::new();
        p.walk(|op| seq.push(op.opname()));
        assert_eq!(
            seq,
            vec![
                "arith.constant",
                "arith.constant",
                "arith.constant",
                "scf.for",
                "arith.constant",
                "scf.if",
                "scf.yield"
            ]
        );
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut b = ProgramBuilder::new();
        b.const_index("x", 0).unwrap();
        assert_eq!(
            b.const_index("x", 1).unwrap_err(),
            IrError::DuplicateName("x".into())
        );
    }

    #[test]
    fn type_display_forms() {
        assert_eq!(
            EirType::QubitTensor { shape: vec![25], physicality: Physicality::Physical }
                .to_string(),
            "tensor<25x!eir.physical_qubit>"
        );
        assert_eq!(
            EirType::IntTensor { shape: vec![10, 10], width: 32 }.to_string(),
            "tensor<10x10xi32>"
        );
        assert_eq!(
            EirType::Gate { arity: 2, n_params: 1 }.to_string(),
            "!eir.gate<2, 1>"
        );
        assert_eq!(EirType::Index.to_string(), "index");
    }

    #[test]
    fn send_sync_for_shared_traversal() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Program>();
    }
}
