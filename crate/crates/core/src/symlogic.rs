//! Symbolic Boolean/dataflow expressions: parsing, evaluation, truth-table
//! equivalence, normalization, and extraction from combinational RTL.
//!
//! Textual grammar (precedence `~` > `&` > `^` > `|` > `?:`):
//!
//! ```text
//! def  := IDENT ['[' INT ']'] '=' expr
//! expr := expr ('^'|'&'|'|') expr | '~' expr | expr '?' expr ':' expr
//!       | '(' expr ')' | IDENT ['[' INT ']'] | '0' | '1' | '{' expr, ... '}'
//! ```
//!
//! `⊕ ∧ ∨ ¬` and `!` are accepted as aliases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hdl::{AstItem, BinaryOp, BlockKind, CodeBlock, Expr, UnaryOp};

/// Largest variable count `equivalent` will enumerate.
pub const MAX_EQUIV_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("symbolic syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("{count} variables exceed the enumeration bound of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error("block is not combinational: {0}")]
    NotCombinational(String),
    #[error("operator not representable in the symbolic IR: {0}")]
    UnsupportedOperator(String),
    #[error("concatenation has no single-bit value")]
    NotScalar,
    #[error("duplicate definition of `{0}` in bundle")]
    DuplicateDefinition(String),
}

/// A variable reference, optionally indexed (`A[3]`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarRef {
    pub name: String,
    pub bit: Option<u32>,
}

impl VarRef {
    pub fn new(name: &str) -> Self {
        VarRef {
            name: name.to_string(),
            bit: None,
        }
    }

    pub fn indexed(name: &str, bit: u32) -> Self {
        VarRef {
            name: name.to_string(),
            bit: Some(bit),
        }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bit {
            Some(b) => write!(f, "{}[{b}]", self.name),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymExpr {
    Var(VarRef),
    Const(bool),
    Not(Box<SymExpr>),
    And(Box<SymExpr>, Box<SymExpr>),
    Or(Box<SymExpr>, Box<SymExpr>),
    Xor(Box<SymExpr>, Box<SymExpr>),
    Ite(Box<SymExpr>, Box<SymExpr>, Box<SymExpr>),
    Concat(Vec<SymExpr>),
    /// A definition; only valid at the root.
    Eq(VarRef, Box<SymExpr>),
}

use SymExpr::*;

pub fn var(name: &str) -> SymExpr {
    Var(VarRef::new(name))
}

pub fn not(e: SymExpr) -> SymExpr {
    Not(Box::new(e))
}

pub fn and(a: SymExpr, b: SymExpr) -> SymExpr {
    And(Box::new(a), Box::new(b))
}

pub fn or(a: SymExpr, b: SymExpr) -> SymExpr {
    Or(Box::new(a), Box::new(b))
}

pub fn xor(a: SymExpr, b: SymExpr) -> SymExpr {
    Xor(Box::new(a), Box::new(b))
}

pub fn ite(c: SymExpr, t: SymExpr, e: SymExpr) -> SymExpr {
    Ite(Box::new(c), Box::new(t), Box::new(e))
}

pub fn define(target: VarRef, e: SymExpr) -> SymExpr {
    Eq(target, Box::new(e))
}

impl SymExpr {
    /// Right-hand side of a definition, or the expression itself.
    pub fn body(&self) -> &SymExpr {
        match self {
            Eq(_, rhs) => rhs,
            other => other,
        }
    }

    pub fn defined_symbol(&self) -> Option<&VarRef> {
        match self {
            Eq(v, _) => Some(v),
            _ => None,
        }
    }

    /// Free variables (a definition's target is not free).
    pub fn free_vars(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        self.body().collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarRef>) {
        match self {
            Var(v) => {
                out.insert(v.clone());
            }
            Const(_) => {}
            Not(a) => a.collect_vars(out),
            And(a, b) | Or(a, b) | Xor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Ite(c, t, e) => {
                c.collect_vars(out);
                t.collect_vars(out);
                e.collect_vars(out);
            }
            Concat(parts) => parts.iter().for_each(|p| p.collect_vars(out)),
            Eq(_, rhs) => rhs.collect_vars(out),
        }
    }

    /// Variables in order of first appearance (left to right).
    pub fn vars_in_order(&self) -> Vec<VarRef> {
        fn walk(e: &SymExpr, seen: &mut Vec<VarRef>) {
            match e {
                Var(v) => {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
                Const(_) => {}
                Not(a) => walk(a, seen),
                And(a, b) | Or(a, b) | Xor(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                Ite(c, t, e) => {
                    walk(c, seen);
                    walk(t, seen);
                    walk(e, seen);
                }
                Concat(parts) => parts.iter().for_each(|p| walk(p, seen)),
                Eq(_, rhs) => walk(rhs, seen),
            }
        }
        let mut seen = Vec::new();
        walk(self, &mut seen);
        seen
    }

    /// Renames variables through `f`; unmapped variables are kept.
    pub fn rename_vars(&self, f: &dyn Fn(&VarRef) -> Option<VarRef>) -> SymExpr {
        match self {
            Var(v) => Var(f(v).unwrap_or_else(|| v.clone())),
            Const(b) => Const(*b),
            Not(a) => not(a.rename_vars(f)),
            And(a, b) => and(a.rename_vars(f), b.rename_vars(f)),
            Or(a, b) => or(a.rename_vars(f), b.rename_vars(f)),
            Xor(a, b) => xor(a.rename_vars(f), b.rename_vars(f)),
            Ite(c, t, e) => ite(c.rename_vars(f), t.rename_vars(f), e.rename_vars(f)),
            Concat(parts) => Concat(parts.iter().map(|p| p.rename_vars(f)).collect()),
            Eq(v, rhs) => Eq(v.clone(), Box::new(rhs.rename_vars(f))),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Eq(..) => 0,
            Ite(..) => 1,
            Or(..) => 2,
            Xor(..) => 3,
            And(..) => 4,
            Not(..) => 5,
            _ => 6,
        }
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &SymExpr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Var(v) => write!(f, "{v}"),
            Const(b) => f.write_str(if *b { "1" } else { "0" }),
            Not(a) => {
                f.write_str("~")?;
                child(f, a, a.prec() < 5)
            }
            And(a, b) | Or(a, b) | Xor(a, b) => {
                let p = self.prec();
                let op = match self {
                    And(..) => "&",
                    Or(..) => "|",
                    _ => "^",
                };
                child(f, a, a.prec() < p)?;
                write!(f, " {op} ")?;
                child(f, b, b.prec() <= p)
            }
            Ite(c, t, e) => {
                child(f, c, c.prec() <= 1)?;
                f.write_str(" ? ")?;
                child(f, t, t.prec() < 1)?;
                f.write_str(" : ")?;
                child(f, e, e.prec() < 1)
            }
            Concat(parts) => {
                f.write_str("{")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}")
            }
            Eq(v, rhs) => write!(f, "{v} = {rhs}"),
        }
    }
}

/// An ordered multi-output component, e.g. `{sum = a ^ b, carry = a & b}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymBundle {
    pub defs: Vec<SymExpr>,
}

impl SymBundle {
    pub fn new(defs: Vec<SymExpr>) -> Result<Self, SymError> {
        let mut seen = BTreeSet::new();
        for d in &defs {
            if let Some(v) = d.defined_symbol() {
                if !seen.insert(v.clone()) {
                    return Err(SymError::DuplicateDefinition(v.to_string()));
                }
            }
        }
        Ok(SymBundle { defs })
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Rendered definitions, one string per output.
    pub fn render_lines(&self) -> Vec<String> {
        self.defs.iter().map(|d| d.to_string()).collect()
    }
}

impl fmt::Display for SymBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_lines().join("; "))
    }
}

impl Serialize for SymBundle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.render_lines().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymBundle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let lines = Vec::<String>::deserialize(d)?;
        let defs = lines
            .iter()
            .map(|l| parse_sym(l))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        SymBundle::new(defs).map_err(serde::de::Error::custom)
    }
}

/// Symbolic logic attached to a subcomponent or knowledge-base entry:
/// either a formal bundle or a free-text sketch that did not parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phi {
    Formal(SymBundle),
    Sketch(String),
}

impl Phi {
    /// Parses `text` as a bundle when possible, otherwise keeps it as a sketch.
    pub fn from_text(text: &str) -> Phi {
        match parse_bundle(text) {
            Ok(b) => Phi::Formal(b),
            Err(_) => Phi::Sketch(text.trim().to_string()),
        }
    }

    pub fn formal(&self) -> Option<&SymBundle> {
        match self {
            Phi::Formal(b) => Some(b),
            Phi::Sketch(_) => None,
        }
    }

    pub fn is_formal(&self) -> bool {
        matches!(self, Phi::Formal(_))
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Formal(b) => write!(f, "{b}"),
            Phi::Sketch(s) => f.write_str(s),
        }
    }
}

/// Formal bundles serialize as an array of definitions, sketches as a
/// plain string.
impl Serialize for Phi {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Phi::Formal(b) => b.serialize(s),
            Phi::Sketch(t) => t.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Phi {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Lines(Vec<String>),
            Text(String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Lines(lines) => {
                let defs = lines
                    .iter()
                    .map(|l| parse_sym(l))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(serde::de::Error::custom)?;
                Phi::Formal(SymBundle::new(defs).map_err(serde::de::Error::custom)?)
            }
            Raw::Text(t) => Phi::from_text(&t),
        })
    }
}

/// Parses a bundle of definitions separated by `;`, `,` or newlines.
pub fn parse_bundle(text: &str) -> Result<SymBundle, SymError> {
    let mut defs = Vec::new();
    let mut offset = 0;
    for piece in split_top_level(text) {
        let trimmed = piece.trim();
        if !trimmed.is_empty() {
            let lead = piece.len() - piece.trim_start().len();
            let e = parse_sym(trimmed).map_err(|e| match e {
                SymError::Syntax { position, message } => SymError::Syntax {
                    position: position + offset + lead,
                    message,
                },
                other => other,
            })?;
            defs.push(e);
        }
        offset += piece.len() + 1;
    }
    if defs.is_empty() {
        return Err(SymError::Syntax {
            position: 0,
            message: "empty bundle".into(),
        });
    }
    SymBundle::new(defs)
}

// Splits on separators outside braces so `{a, b}` stays intact.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ';' | ',' | '\n' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u32),
    Op(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SymError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), i));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            let v = s.parse().map_err(|_| SymError::Syntax {
                position: i,
                message: format!("integer `{s}` out of range"),
            })?;
            out.push((Tok::Int(v), i));
            continue;
        }
        let op = match c {
            '&' | '∧' => '&',
            '|' | '∨' => '|',
            '^' | '⊕' => '^',
            '~' | '¬' | '!' => '~',
            '?' | ':' | '(' | ')' | '=' | '[' | ']' | '{' | '}' | ',' => c,
            other => {
                return Err(SymError::Syntax {
                    position: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        out.push((Tok::Op(op), i));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct SymParser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl SymParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> SymError {
        let message = if matches!(self.peek(), Tok::End) {
            format!("{message} (found end of input)")
        } else {
            message.to_string()
        };
        SymError::Syntax {
            position: self.at(),
            message,
        }
    }

    fn expect(&mut self, op: char) -> Result<(), SymError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{op}`")))
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn var_ref(&mut self, name: String) -> Result<VarRef, SymError> {
        if self.eat('[') {
            let Tok::Int(bit) = self.peek().clone() else {
                return Err(self.error("expected bit index"));
            };
            self.bump();
            self.expect(']')?;
            return Ok(VarRef::indexed(&name, bit));
        }
        Ok(VarRef { name, bit: None })
    }

    fn ternary(&mut self) -> Result<SymExpr, SymError> {
        let c = self.binary(0)?;
        if self.eat('?') {
            let t = self.ternary()?;
            self.expect(':')?;
            let e = self.ternary()?;
            return Ok(ite(c, t, e));
        }
        Ok(c)
    }

    // levels: 0 = |, 1 = ^, 2 = &
    fn binary(&mut self, level: u8) -> Result<SymExpr, SymError> {
        if level > 2 {
            return self.unary();
        }
        let op = ['|', '^', '&'][level as usize];
        let mut lhs = self.binary(level + 1)?;
        while self.eat(op) {
            let rhs = self.binary(level + 1)?;
            lhs = match op {
                '|' => or(lhs, rhs),
                '^' => xor(lhs, rhs),
                _ => and(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SymExpr, SymError> {
        if self.eat('~') {
            return Ok(not(self.unary()?));
        }
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Var(self.var_ref(name)?))
            }
            Tok::Int(v @ (0 | 1)) => {
                self.bump();
                Ok(Const(v == 1))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.ternary()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op('{') => {
                self.bump();
                let mut parts = vec![self.ternary()?];
                while self.eat(',') {
                    parts.push(self.ternary()?);
                }
                self.expect('}')?;
                Ok(Concat(parts))
            }
            _ => Err(self.error("expected operand")),
        }
    }
}

/// Parses one definition (`S0 = A0 ^ B0`) or a bare expression.
pub fn parse_sym(text: &str) -> Result<SymExpr, SymError> {
    let toks = lex(text)?;
    let mut p = SymParser { toks, pos: 0 };
    let is_def = {
        let mut i = 0;
        if matches!(p.toks.first(), Some((Tok::Ident(_), _))) {
            i = 1;
            if p.toks.get(1).map(|t| &t.0) == Some(&Tok::Op('[')) {
                i = 4;
            }
        }
        i > 0 && p.toks.get(i).map(|t| &t.0) == Some(&Tok::Op('='))
    };
    let expr = if is_def {
        let Tok::Ident(name) = p.bump() else {
            unreachable!("checked above")
        };
        let target = p.var_ref(name)?;
        p.expect('=')?;
        define(target, p.ternary()?)
    } else {
        p.ternary()?
    };
    if !matches!(p.peek(), Tok::End) {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(expr)
}

/// Evaluates under a variable assignment. Definitions evaluate their body.
pub fn eval(expr: &SymExpr, assignment: &BTreeMap<VarRef, bool>) -> Result<bool, SymError> {
    Ok(match expr {
        Var(v) => *assignment
            .get(v)
            .ok_or_else(|| SymError::UnboundVariable(v.to_string()))?,
        Const(b) => *b,
        Not(a) => !eval(a, assignment)?,
        And(a, b) => eval(a, assignment)? & eval(b, assignment)?,
        Or(a, b) => eval(a, assignment)? | eval(b, assignment)?,
        Xor(a, b) => eval(a, assignment)? ^ eval(b, assignment)?,
        Ite(c, t, e) => {
            if eval(c, assignment)? {
                eval(t, assignment)?
            } else {
                eval(e, assignment)?
            }
        }
        Concat(parts) if parts.len() == 1 => eval(&parts[0], assignment)?,
        Concat(_) => return Err(SymError::NotScalar),
        Eq(_, rhs) => eval(rhs, assignment)?,
    })
}

// Index-based evaluation used by the enumeration loop.
fn eval_indexed(expr: &SymExpr, index: &BTreeMap<&VarRef, usize>, bits: u64) -> Result<bool, SymError> {
    Ok(match expr {
        Var(v) => (bits >> index[v]) & 1 == 1,
        Const(b) => *b,
        Not(a) => !eval_indexed(a, index, bits)?,
        And(a, b) => eval_indexed(a, index, bits)? & eval_indexed(b, index, bits)?,
        Or(a, b) => eval_indexed(a, index, bits)? | eval_indexed(b, index, bits)?,
        Xor(a, b) => eval_indexed(a, index, bits)? ^ eval_indexed(b, index, bits)?,
        Ite(c, t, e) => {
            if eval_indexed(c, index, bits)? {
                eval_indexed(t, index, bits)?
            } else {
                eval_indexed(e, index, bits)?
            }
        }
        Concat(parts) if parts.len() == 1 => eval_indexed(&parts[0], index, bits)?,
        Concat(_) => return Err(SymError::NotScalar),
        Eq(_, rhs) => eval_indexed(rhs, index, bits)?,
    })
}

/// True iff both expressions agree on every assignment over the union of
/// their free variables. Definitions are compared by their bodies.
pub fn equivalent(e1: &SymExpr, e2: &SymExpr) -> Result<bool, SymError> {
    let mut vars = e1.free_vars();
    vars.extend(e2.free_vars());
    if vars.len() > MAX_EQUIV_VARS {
        return Err(SymError::TooManyVariables {
            count: vars.len(),
            limit: MAX_EQUIV_VARS,
        });
    }
    let index: BTreeMap<&VarRef, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    for bits in 0u64..(1u64 << vars.len()) {
        if eval_indexed(e1, &index, bits)? != eval_indexed(e2, &index, bits)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Canonical form: constants folded, double negation removed, operands of
/// commutative operators sorted by their rendering.
pub fn normalize(expr: &SymExpr) -> SymExpr {
    match expr {
        Var(_) | Const(_) => expr.clone(),
        Not(a) => match normalize(a) {
            Const(b) => Const(!b),
            Not(inner) => *inner,
            other => not(other),
        },
        And(a, b) => {
            let (a, b) = sorted(normalize(a), normalize(b));
            match (a, b) {
                (Const(false), _) | (_, Const(false)) => Const(false),
                (Const(true), x) | (x, Const(true)) => x,
                (x, y) if x == y => x,
                (x, y) => and(x, y),
            }
        }
        Or(a, b) => {
            let (a, b) = sorted(normalize(a), normalize(b));
            match (a, b) {
                (Const(true), _) | (_, Const(true)) => Const(true),
                (Const(false), x) | (x, Const(false)) => x,
                (x, y) if x == y => x,
                (x, y) => or(x, y),
            }
        }
        Xor(a, b) => {
            let (a, b) = sorted(normalize(a), normalize(b));
            match (a, b) {
                (Const(false), x) | (x, Const(false)) => x,
                (Const(true), x) | (x, Const(true)) => normalize(&not(x)),
                (x, y) if x == y => Const(false),
                (x, y) => xor(x, y),
            }
        }
        Ite(c, t, e) => {
            let (c, t, e) = (normalize(c), normalize(t), normalize(e));
            match c {
                Const(true) => t,
                Const(false) => e,
                _ if t == e => t,
                c => ite(c, t, e),
            }
        }
        Concat(parts) => Concat(parts.iter().map(normalize).collect()),
        Eq(v, rhs) => Eq(v.clone(), Box::new(normalize(rhs))),
    }
}

fn sorted(a: SymExpr, b: SymExpr) -> (SymExpr, SymExpr) {
    // constants first so the fold patterns above see them on the left
    let key = |e: &SymExpr| (!matches!(e, Const(_)), e.to_string());
    if key(&b) < key(&a) {
        (b, a)
    } else {
        (a, b)
    }
}

/// Translates a combinational block's continuous assigns into one definition
/// per assigned bit. Multi-bit signals are bit-blasted into indexed
/// variables.
pub fn extract_from_rtl(block: &CodeBlock) -> Result<SymBundle, SymError> {
    if !matches!(
        block.kind,
        BlockKind::ContinuousAssign | BlockKind::NetDecl | BlockKind::WholeModule
    ) {
        return Err(SymError::NotCombinational(format!("{:?} block", block.kind)));
    }
    let mut defs = Vec::new();
    for item in &block.items {
        match item {
            AstItem::ContinuousAssign { lhs, rhs } => {
                let targets = lvalue_bits(lhs, &block.widths)?;
                for (bit, target) in targets.into_iter().enumerate() {
                    let e = translate(rhs, bit as u32, &block.widths)?;
                    defs.push(define(target, e));
                }
            }
            AstItem::AlwaysBlock { .. } => {
                return Err(SymError::NotCombinational("always block".into()))
            }
            AstItem::Instantiation { module, .. } => {
                return Err(SymError::NotCombinational(format!("instance of `{module}`")))
            }
            _ => {}
        }
    }
    SymBundle::new(defs)
}

fn width_of(name: &str, widths: &BTreeMap<String, u32>) -> u32 {
    widths.get(name).copied().unwrap_or(1)
}

fn scalar_var(name: &str, bit: u32, widths: &BTreeMap<String, u32>) -> VarRef {
    if width_of(name, widths) == 1 {
        VarRef::new(name)
    } else {
        VarRef::indexed(name, bit)
    }
}

// Destination bits, least significant first.
fn lvalue_bits(lhs: &Expr, widths: &BTreeMap<String, u32>) -> Result<Vec<VarRef>, SymError> {
    Ok(match lhs {
        Expr::Ident(n) => (0..width_of(n, widths))
            .map(|b| scalar_var(n, b, widths))
            .collect(),
        Expr::Index(n, i) => vec![VarRef::indexed(n, const_index(i)?)],
        Expr::Slice(n, a, b) => {
            let (hi, lo) = (const_index(a)?, const_index(b)?);
            (lo.min(hi)..=hi.max(lo))
                .map(|b| VarRef::indexed(n, b))
                .collect()
        }
        Expr::Concat(parts) => {
            let mut out = Vec::new();
            for p in parts.iter().rev() {
                out.extend(lvalue_bits(p, widths)?);
            }
            out
        }
        other => {
            return Err(SymError::UnsupportedOperator(format!(
                "assignment target {}",
                crate::hdl::emit_expr(other)
            )))
        }
    })
}

fn const_index(e: &Expr) -> Result<u32, SymError> {
    match e {
        Expr::Number(l) => Ok(l.value as u32),
        other => Err(SymError::UnsupportedOperator(format!(
            "non-constant bit select {}",
            crate::hdl::emit_expr(other)
        ))),
    }
}

fn expr_width(e: &Expr, widths: &BTreeMap<String, u32>) -> u32 {
    match e {
        Expr::Ident(n) => width_of(n, widths),
        Expr::Index(..) => 1,
        Expr::Slice(_, a, b) => match (const_index(a), const_index(b)) {
            (Ok(a), Ok(b)) => a.abs_diff(b) + 1,
            _ => 1,
        },
        Expr::Number(l) => l.width.unwrap_or(32),
        Expr::Unary(UnaryOp::Not, x) => expr_width(x, widths),
        Expr::Unary(..) => 1,
        Expr::Binary(_, a, b) => expr_width(a, widths).max(expr_width(b, widths)),
        Expr::Ternary(_, t, o) => expr_width(t, widths).max(expr_width(o, widths)),
        Expr::Concat(parts) => parts.iter().map(|p| expr_width(p, widths)).sum(),
        Expr::Replicate(..) => 1,
    }
}

/// Bit `bit` of `e` as a symbolic expression.
fn translate(e: &Expr, bit: u32, widths: &BTreeMap<String, u32>) -> Result<SymExpr, SymError> {
    Ok(match e {
        Expr::Ident(n) => {
            if bit >= width_of(n, widths) {
                Const(false)
            } else {
                Var(scalar_var(n, bit, widths))
            }
        }
        Expr::Index(n, i) => {
            if bit > 0 {
                Const(false)
            } else {
                Var(VarRef::indexed(n, const_index(i)?))
            }
        }
        Expr::Slice(n, a, b) => {
            let (hi, lo) = (const_index(a)?, const_index(b)?);
            let lo = lo.min(hi);
            if bit > hi.max(lo) - lo {
                Const(false)
            } else {
                Var(VarRef::indexed(n, lo + bit))
            }
        }
        Expr::Number(l) => Const(bit < 64 && (l.value >> bit) & 1 == 1),
        Expr::Unary(UnaryOp::Not, x) => {
            if bit >= expr_width(x, widths) {
                // Verilog would extend first; only same-width use is modelled
                Const(true)
            } else {
                not(translate(x, bit, widths)?)
            }
        }
        Expr::Unary(UnaryOp::LogicalNot, x) if expr_width(x, widths) == 1 => {
            if bit > 0 {
                Const(false)
            } else {
                not(translate(x, 0, widths)?)
            }
        }
        Expr::Binary(op @ (BinaryOp::And | BinaryOp::Or | BinaryOp::Xor | BinaryOp::Xnor), a, b) => {
            let (x, y) = (
                translate(a, bit, widths)?,
                translate(b, bit, widths)?,
            );
            match op {
                BinaryOp::And => and(x, y),
                BinaryOp::Or => or(x, y),
                BinaryOp::Xor => xor(x, y),
                _ => not(xor(x, y)),
            }
        }
        Expr::Ternary(c, t, o) => {
            if expr_width(c, widths) != 1 {
                return Err(SymError::UnsupportedOperator(
                    "multi-bit ternary condition".into(),
                ));
            }
            ite(
                translate(c, 0, widths)?,
                translate(t, bit, widths)?,
                translate(o, bit, widths)?,
            )
        }
        Expr::Concat(parts) => {
            let mut offset = 0;
            for p in parts.iter().rev() {
                let w = expr_width(p, widths);
                if bit < offset + w {
                    return translate(p, bit - offset, widths);
                }
                offset += w;
            }
            Const(false)
        }
        other => {
            return Err(SymError::UnsupportedOperator(
                crate::hdl::emit_expr(other),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdl::{parse_verilog, segment};

    fn assignment(pairs: &[(&str, bool)]) -> BTreeMap<VarRef, bool> {
        pairs.iter().map(|(k, v)| (VarRef::new(k), *v)).collect()
    }

    #[test]
    fn parses_table_definition() {
        let e = parse_sym("S0 = A0 ^ B0").unwrap();
        assert_eq!(e, define(VarRef::new("S0"), xor(var("A0"), var("B0"))));
        assert_eq!(parse_sym("S_0 = A_0 ⊕ B_0").unwrap().to_string(), "S_0 = A_0 ^ B_0");
    }

    #[test]
    fn bare_variable() {
        assert_eq!(parse_sym("x").unwrap(), var("x"));
    }

    #[test]
    fn dangling_operator_reports_end_of_input() {
        match parse_sym("a ^ ") {
            Err(SymError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence() {
        // ~ > & > ^ > | > ?:
        let e = parse_sym("a | b ^ c & ~d ? x : y").unwrap();
        assert_eq!(
            e,
            ite(
                or(var("a"), xor(var("b"), and(var("c"), not(var("d"))))),
                var("x"),
                var("y")
            )
        );
    }

    #[test]
    fn eval_examples() {
        let x = xor(var("a"), var("b"));
        assert!(!eval(&x, &assignment(&[("a", true), ("b", true)])).unwrap());
        let carry = parse_sym("(a & b) | (b & c) | (a & c)").unwrap();
        assert!(eval(&carry, &assignment(&[("a", true), ("b", true), ("c", false)])).unwrap());
        assert_eq!(
            eval(&var("a"), &BTreeMap::new()),
            Err(SymError::UnboundVariable("a".into()))
        );
    }

    #[test]
    fn equivalence_examples() {
        let a = parse_sym("a ^ b").unwrap();
        let b = parse_sym("(a & ~b) | (~a & b)").unwrap();
        assert!(equivalent(&a, &b).unwrap());
        assert!(equivalent(&a, &a).unwrap());
        assert!(!equivalent(&parse_sym("a & b").unwrap(), &parse_sym("a | b").unwrap()).unwrap());
    }

    #[test]
    fn equivalence_bound() {
        let wide = (0..21)
            .map(|i| format!("v{i}"))
            .collect::<Vec<_>>()
            .join(" & ");
        let e = parse_sym(&wide).unwrap();
        assert!(matches!(
            equivalent(&e, &e),
            Err(SymError::TooManyVariables { count: 21, .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&xor(var("b"), var("a"))), xor(var("a"), var("b")));
        assert_eq!(normalize(&not(not(var("a")))), var("a"));
        assert_eq!(normalize(&and(var("a"), Const(true))), var("a"));
    }

    #[test]
    fn extract_half_adder() {
        let m = parse_verilog(
            "module half_adder(input a, b, output sum, carry);\n  assign sum = a ^ b;\n  assign carry = a & b;\nendmodule\n",
        )
        .unwrap();
        let blocks = segment(&m);
        let bundle = extract_from_rtl(&blocks[0]).unwrap();
        assert_eq!(bundle.render_lines(), vec!["sum = a ^ b", "carry = a & b"]);
    }

    #[test]
    fn extract_inverter_and_reject_always() {
        let m = parse_verilog("module i(input x, output y); assign y = ~x; endmodule").unwrap();
        let bundle = extract_from_rtl(&segment(&m)[0]).unwrap();
        assert_eq!(bundle.render_lines(), vec!["y = ~x"]);

        let m = parse_verilog("module r(input c, d, output reg q); always @(posedge c) q <= d; endmodule")
            .unwrap();
        assert!(matches!(
            extract_from_rtl(&segment(&m)[0]),
            Err(SymError::NotCombinational(_))
        ));
    }

    #[test]
    fn extract_bit_blasts_vectors() {
        let m = parse_verilog(
            "module v(input [1:0] a, b, output [1:0] y); assign y = a & ~b; endmodule",
        )
        .unwrap();
        let bundle = extract_from_rtl(&segment(&m)[0]).unwrap();
        assert_eq!(
            bundle.render_lines(),
            vec!["y[0] = a[0] & ~b[0]", "y[1] = a[1] & ~b[1]"]
        );
    }

    #[test]
    fn phi_serialization() {
        let formal = Phi::from_text("sum = a ^ b; carry = a & b");
        assert!(formal.is_formal());
        let json = serde_json::to_string(&formal).unwrap();
        assert_eq!(json, r#"["sum = a ^ b","carry = a & b"]"#);
        assert_eq!(serde_json::from_str::<Phi>(&json).unwrap(), formal);
        let sketch = Phi::from_text("counts up on every clock edge");
        assert_eq!(serde_json::to_string(&sketch).unwrap(), r#""counts up on every clock edge""#);
        assert!(serde_json::from_str::<Phi>(r#"["a ^"]"#).is_err());
    }

    #[test]
    fn bundle_parsing_and_duplicates() {
        let b = parse_bundle("S0 = A0 ⊕ B0, C1 = A0 ∧ B0").unwrap();
        assert_eq!(b.len(), 2);
        assert!(matches!(
            parse_bundle("x = a; x = b"),
            Err(SymError::DuplicateDefinition(_))
        ));
    }
}
