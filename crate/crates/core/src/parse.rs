//! Parser for the textual form of the dialect.
//!
//! One op per line in the canonical form, though the grammar itself is
//! whitespace-insensitive. The first error wins: there is no recovery, and
//! every error carries the line and column of the offending token.

use thiserror::Error;

use crate::ir::{
    Attribute, EirType, Loc, OpId, OpKind, Physicality, Program, ProgramBuilder, ValueId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceErrorKind {
    Lex,
    Syntax,
    TypeAnnotationMismatch,
    UnknownOp,
    Redefinition,
}

impl std::fmt::Display for SourceErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SourceErrorKind::Lex => "lex",
            SourceErrorKind::Syntax => "syntax",
            SourceErrorKind::TypeAnnotationMismatch => "type-annotation-mismatch",
            SourceErrorKind::UnknownOp => "unknown-op",
            SourceErrorKind::Redefinition => "redefinition",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{line}:{column}: error[{kind}]: {message}")]
pub struct SourceError {
    pub line: u32,
    pub column: u32,
    pub kind: SourceErrorKind,
    pub message: String,
}

impl SourceError {
    fn new(kind: SourceErrorKind, loc: Loc, message: impl Into<String>) -> Self {
        SourceError { line: loc.line, column: loc.col, kind, message: message.into() }
    }
}

// ---------------------------------------------------------------- lexer ----

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Percent(String),
    Int(i64),
    Float(f64),
    Str(String),
    /// A `tensor<...>` or `!eir....` literal captured verbatim.
    TypeLit(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Equal,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Percent(s) => format!("`%{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Float(v) => format!("float `{v:?}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::TypeLit(s) => format!("type `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Equal => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    loc: Loc,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn loc(&self) -> Loc {
        Loc::new(self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => {
                    self.bump();
                }
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn take_ident_chars(&mut self, allow_dot: bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            let ok = c.is_ascii_alphanumeric() || c == b'_' || (allow_dot && c == b'.');
            if !ok {
                break;
            }
            s.push(c as char);
            self.bump();
        }
        s
    }

    /// Captures a balanced `<...>` block, angle brackets included.
    fn take_angle_block(&mut self, start: Loc) -> Result<String, SourceError> {
        let mut s = String::new();
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Some(b'<') => {
                    depth += 1;
                    s.push('<');
                    self.bump();
                }
                Some(b'>') => {
                    depth -= 1;
                    s.push('>');
                    self.bump();
                    if depth == 0 {
                        return Ok(s);
                    }
                }
                Some(c) => {
                    s.push(c as char);
                    self.bump();
                }
                None => {
                    return Err(SourceError::new(
                        SourceErrorKind::Lex,
                        start,
                        "unterminated type literal",
                    ))
                }
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, SourceError> {
        self.skip_trivia();
        let loc = self.loc();
        let c = match self.peek() {
            None => return Ok(Spanned { tok: Tok::Eof, loc }),
            Some(c) => c,
        };
        let tok = match c {
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'{' => {
                self.bump();
                Tok::LBrace
            }
            b'}' => {
                self.bump();
                Tok::RBrace
            }
            b'[' => {
                self.bump();
                Tok::LBracket
            }
            b']' => {
                self.bump();
                Tok::RBracket
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b':' => {
                self.bump();
                Tok::Colon
            }
            b'=' => {
                self.bump();
                Tok::Equal
            }
            b'%' => {
                self.bump();
                match self.peek() {
                    Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                        Tok::Percent(self.take_ident_chars(false))
                    }
                    _ => {
                        return Err(SourceError::new(
                            SourceErrorKind::Lex,
                            loc,
                            "`%` must be followed by an SSA name",
                        ))
                    }
                }
            }
            b'"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some(b'"') => break,
                        Some(b'\\') => match self.bump() {
                            Some(b'"') => s.push('"'),
                            Some(b'\\') => s.push('\\'),
                            Some(b'n') => s.push('\n'),
                            _ => {
                                return Err(SourceError::new(
                                    SourceErrorKind::Lex,
                                    loc,
                                    "invalid escape in string literal",
                                ))
                            }
                        },
                        Some(b'\n') | None => {
                            return Err(SourceError::new(
                                SourceErrorKind::Lex,
                                loc,
                                "unterminated string literal",
                            ))
                        }
                        Some(c) => s.push(c as char),
                    }
                }
                Tok::Str(s)
            }
            b'!' => {
                self.bump();
                let name = self.take_ident_chars(true);
                if name.is_empty() {
                    return Err(SourceError::new(
                        SourceErrorKind::Lex,
                        loc,
                        "`!` must begin a dialect type",
                    ));
                }
                let mut lit = format!("!{name}");
                if self.peek() == Some(b'<') {
                    lit.push_str(&self.take_angle_block(loc)?);
                }
                Tok::TypeLit(lit)
            }
            c if c.is_ascii_digit() || c == b'-' => {
                let mut s = String::new();
                if c == b'-' {
                    s.push('-');
                    self.bump();
                    if !matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        return Err(SourceError::new(
                            SourceErrorKind::Lex,
                            loc,
                            "`-` must begin a numeric literal",
                        ));
                    }
                }
                let mut is_float = false;
                while let Some(d) = self.peek() {
                    if d.is_ascii_digit() {
                        s.push(d as char);
                        self.bump();
                    } else if d == b'.'
                        && matches!(self.src.get(self.pos + 1), Some(n) if n.is_ascii_digit())
                    {
                        is_float = true;
                        s.push('.');
                        self.bump();
                    } else if (d == b'e' || d == b'E') && !s.is_empty() {
                        // exponent: e[+-]?digits
                        let save = (self.pos, self.line, self.col, s.len());
                        s.push('e');
                        self.bump();
                        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                            s.push(self.bump().unwrap() as char);
                        }
                        if matches!(self.peek(), Some(n) if n.is_ascii_digit()) {
                            is_float = true;
                        } else {
                            // not an exponent after all; rewind
                            self.pos = save.0;
                            self.line = save.1;
                            self.col = save.2;
                            s.truncate(save.3);
                            break;
                        }
                    } else {
                        break;
                    }
                }
                if is_float {
                    match s.parse::<f64>() {
                        Ok(v) => Tok::Float(v),
                        Err(_) => {
                            return Err(SourceError::new(
                                SourceErrorKind::Lex,
                                loc,
                                format!("invalid float literal `{s}`"),
                            ))
                        }
                    }
                } else {
                    match s.parse::<i64>() {
                        Ok(v) => Tok::Int(v),
                        Err(_) => {
                            return Err(SourceError::new(
                                SourceErrorKind::Lex,
                                loc,
                                format!("integer literal `{s}` out of range"),
                            ))
                        }
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.take_ident_chars(true);
                if name == "tensor" && self.peek() == Some(b'<') {
                    let block = self.take_angle_block(loc)?;
                    Tok::TypeLit(format!("tensor{block}"))
                } else {
                    Tok::Ident(name)
                }
            }
            other => {
                return Err(SourceError::new(
                    SourceErrorKind::Lex,
                    loc,
                    format!("unexpected character `{}`", other as char),
                ))
            }
        };
        Ok(Spanned { tok, loc })
    }
}

fn lex(src: &str) -> Result<Vec<Spanned>, SourceError> {
    let mut lexer = Lexer::new(src);
    let mut out = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}

// ---------------------------------------------------------- type parsing ----

/// Parses the canonical rendering of a type. `lit` is either a bare scalar
/// keyword (`i32`, `i64`, `f64`, `index`) or a captured type literal.
fn parse_type(lit: &str, loc: Loc) -> Result<EirType, SourceError> {
    let err = |msg: String| Err(SourceError::new(SourceErrorKind::Syntax, loc, msg));
    match lit {
        "i32" => return Ok(EirType::IntScalar { width: 32 }),
        "i64" => return Ok(EirType::IntScalar { width: 64 }),
        "f64" => return Ok(EirType::FloatScalar { width: 64 }),
        "index" => return Ok(EirType::Index),
        _ => {}
    }
    if let Some(body) = lit.strip_prefix("tensor<").and_then(|s| s.strip_suffix('>')) {
        let mut shape = Vec::new();
        let mut rest = body;
        loop {
            let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
            if digits.is_empty() {
                break;
            }
            let Ok(extent) = digits.parse::<u64>() else {
                return err(format!("tensor extent `{digits}` out of range"));
            };
            if extent == 0 {
                return err("tensor extents must be at least 1".into());
            }
            rest = &rest[digits.len()..];
            match rest.strip_prefix('x') {
                Some(r) => rest = r,
                None => return err(format!("expected `x` after extent in `{lit}`")),
            }
            shape.push(extent);
        }
        if shape.is_empty() {
            return err(format!("tensor type `{lit}` needs at least one extent"));
        }
        return match rest {
            "i32" => Ok(EirType::IntTensor { shape, width: 32 }),
            "i64" => Ok(EirType::IntTensor { shape, width: 64 }),
            "f64" => Ok(EirType::FloatTensor { shape, width: 64 }),
            "!eir.physical_qubit" => {
                Ok(EirType::QubitTensor { shape, physicality: Physicality::Physical })
            }
            "!eir.virtual_qubit" => {
                Ok(EirType::QubitTensor { shape, physicality: Physicality::Virtual })
            }
            "!eir.cbit" => Ok(EirType::CBitTensor { shape }),
            other => err(format!("unknown tensor element type `{other}`")),
        };
    }
    if let Some(body) = lit.strip_prefix("!eir.gate<").and_then(|s| s.strip_suffix('>')) {
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return err(format!("`{lit}`: expected `!eir.gate<arity, nparams>`"));
        }
        let (Ok(arity), Ok(n_params)) = (parts[0].parse::<u32>(), parts[1].parse::<u32>()) else {
            return err(format!("`{lit}`: arity and nparams must be nonnegative integers"));
        };
        if arity == 0 {
            return err("gate arity must be at least 1".into());
        }
        return Ok(EirType::Gate { arity, n_params });
    }
    if let Some(body) = lit
        .strip_prefix("!eir.gate_distribution<")
        .and_then(|s| s.strip_suffix('>'))
    {
        let Ok(arity) = body.trim().parse::<u32>() else {
            return err(format!("`{lit}`: arity must be a nonnegative integer"));
        };
        if arity == 0 {
            return err("gate distribution arity must be at least 1".into());
        }
        return Ok(EirType::GateDistribution { arity });
    }
    err(format!("unknown type `{lit}`"))
}

// --------------------------------------------------------------- parser ----

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    builder: ProgramBuilder,
    /// Textual name resolution: defs override placeholders.
    scope: std::collections::HashMap<String, ValueId>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, loc: Loc, msg: impl Into<String>) -> SourceError {
        SourceError::new(SourceErrorKind::Syntax, loc, msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Spanned, SourceError> {
        let t = self.peek().clone();
        if t.tok == want {
            Ok(self.bump())
        } else {
            Err(self.syntax(t.loc, format!("expected {what}, found {}", t.tok.describe())))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SourceError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => Err(self.syntax(t.loc, format!("expected `{kw}`, found {}", other.describe()))),
        }
    }

    fn expect_percent(&mut self, what: &str) -> Result<(String, Loc), SourceError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Percent(name) => {
                self.bump();
                Ok((name, t.loc))
            }
            other => Err(self.syntax(t.loc, format!("expected {what}, found {}", other.describe()))),
        }
    }

    /// Resolves an operand reference, minting a placeholder for names with no
    /// definition yet (the verifier reports those as undefined uses).
    fn operand(&mut self, name: &str) -> ValueId {
        if let Some(&id) = self.scope.get(name) {
            return id;
        }
        let id = self.builder.placeholder_value(name);
        self.scope.insert(name.to_string(), id);
        id
    }

    /// Registers a definition, reporting duplicates as redefinition errors.
    fn define(
        &mut self,
        build: impl FnOnce(&mut ProgramBuilder) -> Result<ValueId, crate::ir::IrError>,
        name: &str,
        loc: Loc,
    ) -> Result<ValueId, SourceError> {
        match build(&mut self.builder) {
            Ok(id) => {
                self.scope.insert(name.to_string(), id);
                Ok(id)
            }
            Err(crate::ir::IrError::DuplicateName(n)) => Err(SourceError::new(
                SourceErrorKind::Redefinition,
                loc,
                format!("SSA name `%{n}` is already defined"),
            )),
            Err(e) => Err(self.syntax(loc, e.to_string())),
        }
    }

    fn parse_type_token(&mut self) -> Result<(EirType, Loc), SourceError> {
        let t = self.peek().clone();
        let ty = match &t.tok {
            Tok::TypeLit(lit) => parse_type(lit, t.loc)?,
            Tok::Ident(name) if matches!(name.as_str(), "i32" | "i64" | "f64" | "index") => {
                parse_type(name, t.loc)?
            }
            other => {
                return Err(self.syntax(t.loc, format!("expected a type, found {}", other.describe())))
            }
        };
        self.bump();
        Ok((ty, t.loc))
    }

    fn parse_attr_value(&mut self) -> Result<Attribute, SourceError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Attribute::Int(v))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Attribute::Float(v))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Attribute::Str(s))
            }
            Tok::TypeLit(_) => Ok(Attribute::Type(self.parse_type_token()?.0)),
            Tok::Ident(ref name) if matches!(name.as_str(), "i32" | "i64" | "f64" | "index") => {
                Ok(Attribute::Type(self.parse_type_token()?.0))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if self.peek().tok != Tok::RBracket {
                    loop {
                        items.push(self.parse_attr_value()?);
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Attribute::Array(items))
            }
            other => Err(self.syntax(
                t.loc,
                format!("expected an attribute value, found {}", other.describe()),
            )),
        }
    }

    fn parse_attrs(&mut self) -> Result<Vec<(String, Attribute)>, SourceError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut attrs: Vec<(String, Attribute)> = Vec::new();
        if self.peek().tok != Tok::RBrace {
            loop {
                let t = self.peek().clone();
                let name = match t.tok {
                    Tok::Ident(n) => {
                        self.bump();
                        n
                    }
                    other => {
                        return Err(self.syntax(
                            t.loc,
                            format!("expected an attribute name, found {}", other.describe()),
                        ))
                    }
                };
                if attrs.iter().any(|(n, _)| *n == name) {
                    return Err(self.syntax(t.loc, format!("duplicate attribute `{name}`")));
                }
                self.expect(Tok::Equal, "`=`")?;
                let value = self.parse_attr_value()?;
                attrs.push((name, value));
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(attrs)
    }

    /// Parses ops until the closing token of the enclosing region (`}`) or
    /// end of input at the top level.
    fn parse_op_list(&mut self, top_level: bool) -> Result<(), SourceError> {
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => {
                    if top_level {
                        return Ok(());
                    }
                    return Err(self.syntax(t.loc, "unexpected end of input inside a region"));
                }
                Tok::RBrace => {
                    if top_level {
                        return Err(self.syntax(t.loc, "unexpected `}` at top level"));
                    }
                    return Ok(());
                }
                _ => self.parse_op()?,
            }
        }
    }

    fn parse_op(&mut self) -> Result<(), SourceError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(name) if name == "scf.for" => self.parse_for(),
            Tok::Ident(name) if name == "scf.if" => self.parse_if(),
            Tok::Ident(name) if name == "eir.quantum_program_iteration" => self.parse_qpi(),
            Tok::Ident(_) => self.parse_generic(None),
            Tok::Percent(_) => {
                let (name, loc) = self.expect_percent("an SSA name")?;
                self.expect(Tok::Equal, "`=`")?;
                self.parse_generic(Some((name, loc)))
            }
            other => Err(self.syntax(t.loc, format!("expected an operation, found {}", other.describe()))),
        }
    }

    fn parse_generic(&mut self, result: Option<(String, Loc)>) -> Result<(), SourceError> {
        let t = self.peek().clone();
        let (opname, op_loc) = match t.tok {
            Tok::Ident(name) => {
                self.bump();
                (name, t.loc)
            }
            other => {
                return Err(self.syntax(t.loc, format!("expected an op name, found {}", other.describe())))
            }
        };
        let kind = match OpKind::from_name(&opname) {
            Some(k) => k,
            None => {
                return Err(SourceError::new(
                    SourceErrorKind::UnknownOp,
                    op_loc,
                    format!("`{opname}` is not a registered operation"),
                ))
            }
        };
        if kind.max_regions() > 0 {
            return Err(self.syntax(
                op_loc,
                format!("`{opname}` uses its structured form, not the generic form"),
            ));
        }

        self.expect(Tok::LParen, "`(`")?;
        let mut operands = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                let (name, _) = self.expect_percent("an operand")?;
                operands.push(self.operand(&name));
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;

        let attrs = if self.peek().tok == Tok::LBrace {
            self.parse_attrs()?
        } else {
            Vec::new()
        };

        let annotation = if self.peek().tok == Tok::Colon {
            let colon = self.bump();
            Some((self.parse_type_token()?.0, colon.loc))
        } else {
            None
        };

        match (result, annotation) {
            (Some((name, name_loc)), Some((ty, _))) => {
                let loc = Loc::new(name_loc.line, name_loc.col);
                self.define(
                    |b| {
                        b.build_kind(kind, operands, attrs, vec![(name.clone(), ty)], 0, loc)
                            .map(|op| b.result_of(op, 0))
                    },
                    &name,
                    name_loc,
                )?;
                Ok(())
            }
            (None, None) => {
                self.builder
                    .build_kind(kind, operands, attrs, vec![], 0, op_loc)
                    .map_err(|e| self.syntax(op_loc, e.to_string()))?;
                Ok(())
            }
            (Some((name, name_loc)), None) => Err(SourceError::new(
                SourceErrorKind::TypeAnnotationMismatch,
                name_loc,
                format!("result `%{name}` needs a `: type` annotation"),
            )),
            (None, Some((_, colon_loc))) => Err(SourceError::new(
                SourceErrorKind::TypeAnnotationMismatch,
                colon_loc,
                format!("`{opname}` has no results, so a type annotation is not allowed"),
            )),
        }
    }

    fn parse_for(&mut self) -> Result<(), SourceError> {
        let kw = self.bump(); // scf.for
        let (iv, iv_loc) = self.expect_percent("the induction variable")?;
        self.expect(Tok::Equal, "`=`")?;
        let (lo, _) = self.expect_percent("the lower bound")?;
        self.expect_keyword("to")?;
        let (hi, _) = self.expect_percent("the upper bound")?;
        self.expect_keyword("step")?;
        let (st, _) = self.expect_percent("the step")?;
        let operands = vec![self.operand(&lo), self.operand(&hi), self.operand(&st)];
        let op = self
            .builder
            .build_kind(OpKind::ScfFor, operands, vec![], vec![], 1, kw.loc)
            .map_err(|e| self.syntax(kw.loc, e.to_string()))?;
        self.define(
            |b| b.add_block_arg(op, 0, &iv, EirType::Index),
            &iv,
            iv_loc,
        )?;
        self.expect(Tok::LBrace, "`{`")?;
        self.builder.enter_region(op, 0).unwrap();
        self.parse_op_list(false)?;
        self.builder.exit_region();
        self.expect(Tok::RBrace, "`}`")?;
        Ok(())
    }

    fn parse_if(&mut self) -> Result<(), SourceError> {
        let kw = self.bump(); // scf.if
        let (cond, _) = self.expect_percent("the condition")?;
        let operands = vec![self.operand(&cond)];
        let op = self
            .builder
            .build_kind(OpKind::ScfIf, operands, vec![], vec![], 1, kw.loc)
            .map_err(|e| self.syntax(kw.loc, e.to_string()))?;
        self.expect(Tok::LBrace, "`{`")?;
        self.builder.enter_region(op, 0).unwrap();
        self.parse_op_list(false)?;
        self.builder.exit_region();
        self.expect(Tok::RBrace, "`}`")?;
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "else") {
            self.bump();
            let region = self.builder.append_region(op);
            self.expect(Tok::LBrace, "`{`")?;
            self.builder.enter_region(op, region).unwrap();
            self.parse_op_list(false)?;
            self.builder.exit_region();
            self.expect(Tok::RBrace, "`}`")?;
        }
        Ok(())
    }

    fn parse_qpi(&mut self) -> Result<(), SourceError> {
        let kw = self.bump();
        let op = self
            .builder
            .build_kind(OpKind::EirQuantumProgramIteration, vec![], vec![], vec![], 1, kw.loc)
            .map_err(|e| self.syntax(kw.loc, e.to_string()))?;
        self.expect(Tok::LBrace, "`{`")?;
        self.builder.enter_region(op, 0).unwrap();
        self.parse_op_list(false)?;
        self.builder.exit_region();
        self.expect(Tok::RBrace, "`}`")?;
        Ok(())
    }
}

/// Parses a whole module. On success the returned program prints back to a
/// canonical text that re-parses to a structurally identical program.
pub fn parse_module(text: &str) -> Result<Program, SourceError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        builder: ProgramBuilder::new(),
        scope: std::collections::HashMap::new(),
    };
    parser.parse_op_list(true)?;
    Ok(parser.builder.finish())
}

/// Convenience used by ops that need both a parse and an op-id view in tests.
pub fn parse_single_op(text: &str) -> Result<(Program, Option<OpId>), SourceError> {
    let p = parse_module(text)?;
    let id = p.top_ops().first().copied();
    Ok((p, id))
}
