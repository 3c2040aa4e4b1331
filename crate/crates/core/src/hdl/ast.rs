use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HdlError;

/// Byte range into the original source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span {
            offset: start,
            len: end.saturating_sub(start),
        }
    }

    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HdlLanguage {
    Verilog,
    Vhdl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Range {
    pub msb: Expr,
    pub lsb: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    Wire,
    Reg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    /// Explicit `wire`/`reg` keyword in the port declaration, if any.
    pub net: Option<NetKind>,
    pub range: Option<Range>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamAssign {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    /// `~`
    Not,
    /// `!`
    LogicalNot,
    Neg,
    RedAnd,
    RedOr,
    RedXor,
    RedNand,
    RedNor,
    RedXnor,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "~",
            UnaryOp::LogicalNot => "!",
            UnaryOp::Neg => "-",
            UnaryOp::RedAnd => "&",
            UnaryOp::RedOr => "|",
            UnaryOp::RedXor => "^",
            UnaryOp::RedNand => "~&",
            UnaryOp::RedNor => "~|",
            UnaryOp::RedXnor => "~^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Xor,
    Xnor,
    Or,
    LogicalAnd,
    LogicalOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&",
            BinaryOp::Xor => "^",
            BinaryOp::Xnor => "~^",
            BinaryOp::Or => "|",
            BinaryOp::LogicalAnd => "&&",
            BinaryOp::LogicalOr => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 9,
            BinaryOp::Shl | BinaryOp::Shr => 8,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 7,
            BinaryOp::Eq | BinaryOp::Ne => 6,
            BinaryOp::And => 5,
            BinaryOp::Xor | BinaryOp::Xnor => 4,
            BinaryOp::Or => 3,
            BinaryOp::LogicalAnd => 2,
            BinaryOp::LogicalOr => 1,
        }
    }
}

/// Verilog number literal, kept verbatim so emit reproduces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub text: String,
    pub width: Option<u32>,
    pub value: u64,
}

impl Literal {
    pub fn parse(text: &str) -> Result<Literal, String> {
        let cleaned: String = text.chars().filter(|&c| c != '_').collect();
        if let Some(q) = cleaned.find('\'') {
            let width = if q == 0 {
                None
            } else {
                Some(
                    cleaned[..q]
                        .parse::<u32>()
                        .map_err(|_| format!("bad literal width in `{text}`"))?,
                )
            };
            let mut rest = &cleaned[q + 1..];
            if rest.starts_with(['s', 'S']) {
                rest = &rest[1..];
            }
            let radix = match rest.chars().next().map(|c| c.to_ascii_lowercase()) {
                Some('b') => 2,
                Some('o') => 8,
                Some('d') => 10,
                Some('h') => 16,
                _ => return Err(format!("bad literal base in `{text}`")),
            };
            let digits = &rest[1..];
            if digits.chars().any(|c| matches!(c, 'x' | 'X' | 'z' | 'Z' | '?')) {
                return Err(format!("four-state literal `{text}` is not supported"));
            }
            let value = u64::from_str_radix(digits, radix)
                .map_err(|_| format!("literal `{text}` does not fit in 64 bits"))?;
            if width == Some(0) || width.is_some_and(|w| w > 64) {
                return Err(format!("literal width out of range in `{text}`"));
            }
            Ok(Literal {
                text: text.to_string(),
                width,
                value: value & mask(width.unwrap_or(64)),
            })
        } else {
            let value = cleaned
                .parse::<u64>()
                .map_err(|_| format!("bad literal `{text}`"))?;
            Ok(Literal {
                text: text.to_string(),
                width: None,
                value,
            })
        }
    }

    pub fn from_bit(bit: bool) -> Literal {
        Literal {
            text: if bit { "1'b1" } else { "1'b0" }.to_string(),
            width: Some(1),
            value: bit as u64,
        }
    }
}

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(String),
    Index(String, Box<Expr>),
    Slice(String, Box<Expr>, Box<Expr>),
    Number(Literal),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Replicate(Box<Expr>, Vec<Expr>),
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    /// Identifiers referenced anywhere in the expression.
    pub fn identifiers(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Ident(n) => {
                out.insert(n.clone());
            }
            Expr::Index(n, i) => {
                out.insert(n.clone());
                i.identifiers(out);
            }
            Expr::Slice(n, a, b) => {
                out.insert(n.clone());
                a.identifiers(out);
                b.identifiers(out);
            }
            Expr::Number(_) => {}
            Expr::Unary(_, e) => e.identifiers(out),
            Expr::Binary(_, a, b) => {
                a.identifiers(out);
                b.identifiers(out);
            }
            Expr::Ternary(c, t, e) => {
                c.identifiers(out);
                t.identifiers(out);
                e.identifiers(out);
            }
            Expr::Concat(parts) => parts.iter().for_each(|p| p.identifiers(out)),
            Expr::Replicate(n, parts) => {
                n.identifiers(out);
                parts.iter().for_each(|p| p.identifiers(out));
            }
        }
    }

    /// Names of the signals an lvalue writes (not the index expressions).
    pub fn written_targets(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Ident(n) | Expr::Index(n, _) | Expr::Slice(n, _, _) => {
                out.insert(n.clone());
            }
            Expr::Concat(parts) => parts.iter().for_each(|p| p.written_targets(out)),
            _ => {}
        }
    }

    /// Identifiers an lvalue reads (index expressions only).
    pub fn lvalue_reads(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Index(_, i) => i.identifiers(out),
            Expr::Slice(_, a, b) => {
                a.identifiers(out);
                b.identifiers(out);
            }
            Expr::Concat(parts) => parts.iter().for_each(|p| p.lvalue_reads(out)),
            _ => {}
        }
    }

    /// Rewrites every identifier occurrence through `f`.
    pub fn rename(&mut self, f: &dyn Fn(&str) -> Option<String>) {
        let apply = |n: &mut String| {
            if let Some(new) = f(n) {
                *n = new;
            }
        };
        match self {
            Expr::Ident(n) => apply(n),
            Expr::Index(n, i) => {
                apply(n);
                i.rename(f);
            }
            Expr::Slice(n, a, b) => {
                apply(n);
                a.rename(f);
                b.rename(f);
            }
            Expr::Number(_) => {}
            Expr::Unary(_, e) => e.rename(f),
            Expr::Binary(_, a, b) => {
                a.rename(f);
                b.rename(f);
            }
            Expr::Ternary(c, t, e) => {
                c.rename(f);
                t.rename(f);
                e.rename(f);
            }
            Expr::Concat(parts) => parts.iter_mut().for_each(|p| p.rename(f)),
            Expr::Replicate(n, parts) => {
                n.rename(f);
                parts.iter_mut().for_each(|p| p.rename(f));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Posedge,
    Negedge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensItem {
    pub edge: Option<Edge>,
    pub signal: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sensitivity {
    Star,
    List(Vec<SensItem>),
}

impl Sensitivity {
    pub fn is_clocked(&self) -> bool {
        match self {
            Sensitivity::Star => false,
            Sensitivity::List(items) => items.iter().any(|i| i.edge.is_some()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Case,
    Casez,
    Casex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseArm {
    /// Empty means `default`.
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then: Box<Stmt>,
        otherwise: Option<Box<Stmt>>,
    },
    Case {
        kind: CaseKind,
        subject: Expr,
        arms: Vec<CaseArm>,
    },
    Blocking(Expr, Expr),
    NonBlocking(Expr, Expr),
    Empty,
}

impl Stmt {
    pub fn visit_exprs(&self, reads: &mut BTreeSet<String>, writes: &mut BTreeSet<String>) {
        match self {
            Stmt::Block(stmts) => stmts.iter().for_each(|s| s.visit_exprs(reads, writes)),
            Stmt::If {
                cond,
                then,
                otherwise,
            } => {
                cond.identifiers(reads);
                then.visit_exprs(reads, writes);
                if let Some(o) = otherwise {
                    o.visit_exprs(reads, writes);
                }
            }
            Stmt::Case { subject, arms, .. } => {
                subject.identifiers(reads);
                for arm in arms {
                    arm.labels.iter().for_each(|l| l.identifiers(reads));
                    arm.body.visit_exprs(reads, writes);
                }
            }
            Stmt::Blocking(l, r) | Stmt::NonBlocking(l, r) => {
                l.written_targets(writes);
                l.lvalue_reads(reads);
                r.identifiers(reads);
            }
            Stmt::Empty => {}
        }
    }

    pub fn rename(&mut self, f: &dyn Fn(&str) -> Option<String>) {
        match self {
            Stmt::Block(stmts) => stmts.iter_mut().for_each(|s| s.rename(f)),
            Stmt::If {
                cond,
                then,
                otherwise,
            } => {
                cond.rename(f);
                then.rename(f);
                if let Some(o) = otherwise {
                    o.rename(f);
                }
            }
            Stmt::Case { subject, arms, .. } => {
                subject.rename(f);
                for arm in arms {
                    arm.labels.iter_mut().for_each(|l| l.rename(f));
                    arm.body.rename(f);
                }
            }
            Stmt::Blocking(l, r) | Stmt::NonBlocking(l, r) => {
                l.rename(f);
                r.rename(f);
            }
            Stmt::Empty => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connections {
    Positional(Vec<Expr>),
    /// `.port(expr)`; `None` for an explicitly unconnected port.
    Named(Vec<(String, Option<Expr>)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    NetDecl,
    RegDecl,
    ParamDecl,
    ContinuousAssign,
    AlwaysBlock,
    Instantiation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstItem {
    NetDecl {
        range: Option<Range>,
        names: Vec<String>,
    },
    RegDecl {
        range: Option<Range>,
        names: Vec<String>,
    },
    ParamDecl {
        local: bool,
        assigns: Vec<ParamAssign>,
    },
    ContinuousAssign {
        lhs: Expr,
        rhs: Expr,
    },
    AlwaysBlock {
        sensitivity: Sensitivity,
        body: Stmt,
    },
    Instantiation {
        module: String,
        params: Vec<Expr>,
        instance: String,
        connections: Connections,
    },
}

impl AstItem {
    pub fn kind(&self) -> ItemKind {
        match self {
            AstItem::NetDecl { .. } => ItemKind::NetDecl,
            AstItem::RegDecl { .. } => ItemKind::RegDecl,
            AstItem::ParamDecl { .. } => ItemKind::ParamDecl,
            AstItem::ContinuousAssign { .. } => ItemKind::ContinuousAssign,
            AstItem::AlwaysBlock { .. } => ItemKind::AlwaysBlock,
            AstItem::Instantiation { .. } => ItemKind::Instantiation,
        }
    }

    pub fn is_declaration(&self) -> bool {
        matches!(
            self.kind(),
            ItemKind::NetDecl | ItemKind::RegDecl | ItemKind::ParamDecl
        )
    }

    /// (read, written) identifier sets. Declarations read only their
    /// range/initializer expressions; instantiation connections count as reads.
    pub fn reads_writes(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        match self {
            AstItem::NetDecl { range, .. } | AstItem::RegDecl { range, .. } => {
                if let Some(r) = range {
                    r.msb.identifiers(&mut reads);
                    r.lsb.identifiers(&mut reads);
                }
            }
            AstItem::ParamDecl { assigns, .. } => {
                for a in assigns {
                    a.value.identifiers(&mut reads);
                }
            }
            AstItem::ContinuousAssign { lhs, rhs } => {
                lhs.written_targets(&mut writes);
                lhs.lvalue_reads(&mut reads);
                rhs.identifiers(&mut reads);
            }
            AstItem::AlwaysBlock { sensitivity, body } => {
                if let Sensitivity::List(items) = sensitivity {
                    for i in items {
                        reads.insert(i.signal.clone());
                    }
                }
                body.visit_exprs(&mut reads, &mut writes);
            }
            AstItem::Instantiation {
                params,
                connections,
                ..
            } => {
                params.iter().for_each(|p| p.identifiers(&mut reads));
                match connections {
                    Connections::Positional(exprs) => {
                        exprs.iter().for_each(|e| e.identifiers(&mut reads))
                    }
                    Connections::Named(pairs) => pairs
                        .iter()
                        .filter_map(|(_, e)| e.as_ref())
                        .for_each(|e| e.identifiers(&mut reads)),
                }
            }
        }
        (reads, writes)
    }

    /// Names this item declares (nets, regs, params, instance).
    pub fn declared_names(&self) -> Vec<&str> {
        match self {
            AstItem::NetDecl { names, .. } | AstItem::RegDecl { names, .. } => {
                names.iter().map(String::as_str).collect()
            }
            AstItem::ParamDecl { assigns, .. } => assigns.iter().map(|a| a.name.as_str()).collect(),
            AstItem::Instantiation { instance, .. } => vec![instance.as_str()],
            _ => Vec::new(),
        }
    }
}

/// One parsed module (or VHDL entity/architecture pair).
///
/// Equality is structural: spans and the backing source text are ignored.
#[derive(Debug, Clone)]
pub struct ModuleAst {
    pub name: String,
    pub language: HdlLanguage,
    pub params: Vec<ParamAssign>,
    pub ports: Vec<Port>,
    pub items: Vec<AstItem>,
    /// Region of `source` belonging to this module, including any leading
    /// text before the `module` keyword and trailing text after `endmodule`
    /// up to the next module.
    pub source_span: Span,
    /// End of the module header (just past the `;` after the port list).
    pub header_end: usize,
    pub item_spans: Vec<Span>,
    pub source: Arc<str>,
}

impl PartialEq for ModuleAst {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.language == other.language
            && self.params == other.params
            && self.ports == other.ports
            && self.items == other.items
    }
}

impl ModuleAst {
    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports
            .iter()
            .filter(|p| p.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports
            .iter()
            .filter(|p| p.direction == Direction::Output)
    }

    /// The exact source text of this module's region.
    pub fn text(&self) -> &str {
        &self.source[self.source_span.offset..self.source_span.end()]
    }

    /// Values of header and body parameters, evaluated in declaration order.
    pub fn param_values(&self) -> Result<BTreeMap<String, u64>, HdlError> {
        let mut env = BTreeMap::new();
        let body = self.items.iter().filter_map(|i| match i {
            AstItem::ParamDecl { assigns, .. } => Some(assigns.iter()),
            _ => None,
        });
        for pa in self.params.iter().chain(body.flatten()) {
            let v = const_eval(&pa.value, &env)?;
            env.insert(pa.name.clone(), v);
        }
        Ok(env)
    }

    /// Bit widths of every port, net, and reg.
    pub fn signal_widths(&self) -> Result<BTreeMap<String, u32>, HdlError> {
        let params = self.param_values()?;
        let mut out = BTreeMap::new();
        for p in &self.ports {
            out.insert(p.name.clone(), range_width(p.range.as_ref(), &params)?);
        }
        for item in &self.items {
            if let AstItem::NetDecl { range, names } | AstItem::RegDecl { range, names } = item {
                let w = range_width(range.as_ref(), &params)?;
                for n in names {
                    out.entry(n.clone()).or_insert(w);
                }
            }
        }
        Ok(out)
    }

    /// Lower bound of every vector's declared range; `c[4]` of
    /// `[4:1] c` is bit 3 of the stored value.
    pub fn signal_offsets(&self) -> Result<BTreeMap<String, u64>, HdlError> {
        let params = self.param_values()?;
        let low = |r: Option<&Range>| -> Result<u64, HdlError> {
            Ok(match r {
                Some(r) => const_eval(&r.msb, &params)?.min(const_eval(&r.lsb, &params)?),
                None => 0,
            })
        };
        let mut out = BTreeMap::new();
        for p in &self.ports {
            out.insert(p.name.clone(), low(p.range.as_ref())?);
        }
        for item in &self.items {
            if let AstItem::NetDecl { range, names } | AstItem::RegDecl { range, names } = item {
                let l = low(range.as_ref())?;
                for n in names {
                    out.entry(n.clone()).or_insert(l);
                }
            }
        }
        Ok(out)
    }

    pub fn port_width(&self, port: &Port) -> Result<u32, HdlError> {
        range_width(port.range.as_ref(), &self.param_values()?)
    }

    /// True when no always block is edge-triggered.
    pub fn is_combinational(&self) -> bool {
        !self.items.iter().any(|i| {
            matches!(i, AstItem::AlwaysBlock { sensitivity, .. } if sensitivity.is_clocked())
        })
    }
}

/// A parsed source file: one or more modules in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub modules: Vec<ModuleAst>,
}

impl Design {
    pub fn module(&self, name: &str) -> Option<&ModuleAst> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// The top module: the last module not instantiated by any other module
    /// in the file.
    pub fn top(&self) -> Option<&ModuleAst> {
        let instantiated: BTreeSet<&str> = self
            .modules
            .iter()
            .flat_map(|m| m.items.iter())
            .filter_map(|i| match i {
                AstItem::Instantiation { module, .. } => Some(module.as_str()),
                _ => None,
            })
            .collect();
        self.modules
            .iter()
            .rev()
            .find(|m| !instantiated.contains(m.name.as_str()))
            .or(self.modules.last())
    }
}

pub fn range_width(range: Option<&Range>, params: &BTreeMap<String, u64>) -> Result<u32, HdlError> {
    let Some(r) = range else { return Ok(1) };
    let msb = const_eval(&r.msb, params)? as i64;
    let lsb = const_eval(&r.lsb, params)? as i64;
    let w = (msb - lsb).unsigned_abs() + 1;
    if w > 64 {
        return Err(HdlError::Unsupported {
            construct: format!("vector wider than 64 bits ({w})"),
            line: 0,
            col: 0,
        });
    }
    Ok(w as u32)
}

/// Evaluates a constant expression over parameter values.
pub fn const_eval(expr: &Expr, params: &BTreeMap<String, u64>) -> Result<u64, HdlError> {
    let not_const = || HdlError::Unsupported {
        construct: "non-constant expression where a constant is required".into(),
        line: 0,
        col: 0,
    };
    Ok(match expr {
        Expr::Number(l) => l.value,
        Expr::Ident(n) => *params.get(n).ok_or_else(not_const)?,
        Expr::Unary(UnaryOp::Neg, e) => const_eval(e, params)?.wrapping_neg(),
        Expr::Binary(op, a, b) => {
            let (a, b) = (const_eval(a, params)?, const_eval(b, params)?);
            match op {
                BinaryOp::Add => a.wrapping_add(b),
                BinaryOp::Sub => a.wrapping_sub(b),
                BinaryOp::Shl => a.checked_shl(b as u32).unwrap_or(0),
                BinaryOp::Shr => a.checked_shr(b as u32).unwrap_or(0),
                _ => return Err(not_const()),
            }
        }
        _ => return Err(not_const()),
    })
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ItemKind::NetDecl => "net declaration",
            ItemKind::RegDecl => "reg declaration",
            ItemKind::ParamDecl => "parameter declaration",
            ItemKind::ContinuousAssign => "continuous assign",
            ItemKind::AlwaysBlock => "always block",
            ItemKind::Instantiation => "instantiation",
        };
        f.write_str(s)
    }
}
