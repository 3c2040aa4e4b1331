//! Recursive-descent parser for the synthesizable Verilog subset.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::ast::*;
use super::lexer::{tokenize, Dialect, Token, TokenKind};
use super::HdlError;

/// Reserved words of the accepted subset plus those we recognise only to
/// reject. None of these may be used as a user identifier.
pub const VERILOG_KEYWORDS: &[&str] = &[
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "parameter", "localparam",
    "assign", "always", "posedge", "negedge", "or", "begin", "end", "if", "else", "case", "casez",
    "casex", "endcase", "default", "generate", "endgenerate", "function", "endfunction", "task",
    "endtask", "interface", "endinterface", "initial", "genvar", "integer", "real", "specify",
    "endspecify", "always_ff", "always_comb", "always_latch", "logic", "for", "while", "repeat",
    "forever", "signed", "tri", "supply0", "supply1", "primitive", "endprimitive", "fork", "join",
    "defparam", "and", "nand", "nor", "xor", "xnor", "not", "buf",
];

const UNSUPPORTED_ITEMS: &[&str] = &[
    "generate", "function", "task", "interface", "initial", "genvar", "integer", "real",
    "specify", "always_ff", "always_comb", "always_latch", "logic", "defparam", "primitive",
    "tri", "supply0", "supply1", "and", "nand", "nor", "xor", "xnor", "not", "buf", "for",
];

pub fn is_keyword(word: &str) -> bool {
    VERILOG_KEYWORDS.contains(&word)
}

/// Parses a source file containing exactly one module.
pub fn parse_verilog(source: &str) -> Result<ModuleAst, HdlError> {
    let mut design = parse_design(source)?;
    match design.modules.len() {
        1 => Ok(design.modules.remove(0)),
        0 => Err(HdlError::Syntax {
            line: 1,
            col: 1,
            token: "<end of input>".into(),
            message: "expected `module`".into(),
        }),
        n => Err(HdlError::Unsupported {
            construct: format!("{n} modules in one source (use parse_design)"),
            line: 1,
            col: 1,
        }),
    }
}

/// Parses every module in a Verilog source file.
pub fn parse_design(source: &str) -> Result<Design, HdlError> {
    let tokens = tokenize(source, Dialect::Verilog)?;
    let shared: Arc<str> = Arc::from(source);
    let mut p = Parser {
        tokens,
        pos: 0,
    };
    let mut modules = Vec::new();
    let mut region_start = 0;
    while !matches!(p.peek().kind, TokenKind::Eof) {
        if !p.peek().is_ident("module") {
            let t = p.peek().clone();
            if let TokenKind::Ident(w) = &t.kind {
                if is_keyword(w) && w != "endmodule" {
                    return Err(HdlError::Unsupported {
                        construct: format!("`{w}` outside a module"),
                        line: t.line,
                        col: t.col,
                    });
                }
            }
            return Err(p.syntax_error(&t, "expected `module`"));
        }
        let mut m = p.module(shared.clone())?;
        let end = if matches!(p.peek().kind, TokenKind::Eof) {
            source.len()
        } else {
            p.tokens[p.pos - 1].end
        };
        m.source_span = Span::new(region_start, end);
        region_start = end;
        check_module(&m)?;
        modules.push(m);
    }
    // Trailing text after the last module belongs to it.
    if let Some(last) = modules.last_mut() {
        last.source_span = Span::new(last.source_span.offset, source.len());
    }
    let mut seen = BTreeSet::new();
    for m in &modules {
        if !seen.insert(m.name.clone()) {
            return Err(HdlError::Duplicate {
                name: m.name.clone(),
                what: "module".into(),
            });
        }
    }
    Ok(Design { modules })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn prev_end(&self) -> usize {
        self.tokens[self.pos.saturating_sub(1)].end
    }

    fn syntax_error(&self, t: &Token, message: &str) -> HdlError {
        HdlError::Syntax {
            line: t.line,
            col: t.col,
            token: t.text(),
            message: message.to_string(),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, HdlError> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            let t = self.peek().clone();
            Err(self.syntax_error(&t, &format!("expected `{p}`")))
        }
    }

    fn eat_keyword(&mut self, w: &str) -> bool {
        if self.peek().is_ident(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, w: &str) -> Result<Token, HdlError> {
        if self.peek().is_ident(w) {
            Ok(self.bump())
        } else {
            let t = self.peek().clone();
            Err(self.syntax_error(&t, &format!("expected `{w}`")))
        }
    }

    fn identifier(&mut self) -> Result<String, HdlError> {
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Ident(w) if w.starts_with('$') => Err(HdlError::Unsupported {
                construct: format!("system task or function `{w}`"),
                line: t.line,
                col: t.col,
            }),
            TokenKind::Ident(w) if !is_keyword(w) => {
                self.bump();
                Ok(w.clone())
            }
            _ => Err(self.syntax_error(&t, "expected identifier")),
        }
    }

    fn unsupported(&self, t: &Token, what: &str) -> HdlError {
        HdlError::Unsupported {
            construct: what.to_string(),
            line: t.line,
            col: t.col,
        }
    }

    fn module(&mut self, source: Arc<str>) -> Result<ModuleAst, HdlError> {
        self.expect_keyword("module")?;
        let name = self.identifier()?;
        let mut params = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            if !self.peek().is_punct(")") {
                loop {
                    if !self.eat_keyword("parameter") && params.is_empty() {
                        let t = self.peek().clone();
                        return Err(self.syntax_error(&t, "expected `parameter`"));
                    }
                    let name = self.identifier()?;
                    self.expect_punct("=")?;
                    let value = self.expr()?;
                    params.push(ParamAssign { name, value });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        let mut ports = Vec::new();
        if self.eat_punct("(") {
            if !self.peek().is_punct(")") {
                self.ansi_ports(&mut ports)?;
            }
            self.expect_punct(")")?;
        }
        self.expect_punct(";")?;
        let header_end = self.prev_end();

        let mut items = Vec::new();
        let mut item_spans = Vec::new();
        loop {
            let t = self.peek().clone();
            if t.is_ident("endmodule") {
                self.bump();
                break;
            }
            if matches!(t.kind, TokenKind::Eof) {
                return Err(self.syntax_error(&t, "expected `endmodule`"));
            }
            let start = t.start;
            let item = self.item()?;
            items.push(item);
            item_spans.push(Span::new(start, self.prev_end()));
        }

        Ok(ModuleAst {
            name,
            language: HdlLanguage::Verilog,
            params,
            ports,
            items,
            source_span: Span::default(),
            header_end,
            item_spans,
            source,
        })
    }

    fn ansi_ports(&mut self, ports: &mut Vec<Port>) -> Result<(), HdlError> {
        let mut current: Option<(Direction, Option<NetKind>, Option<Range>)> = None;
        loop {
            let t = self.peek().clone();
            let dir = match &t.kind {
                TokenKind::Ident(w) if w == "input" => Some(Direction::Input),
                TokenKind::Ident(w) if w == "output" => Some(Direction::Output),
                TokenKind::Ident(w) if w == "inout" => Some(Direction::Inout),
                _ => None,
            };
            if let Some(dir) = dir {
                self.bump();
                let net = if self.eat_keyword("wire") {
                    Some(NetKind::Wire)
                } else if self.eat_keyword("reg") {
                    Some(NetKind::Reg)
                } else {
                    None
                };
                if self.peek().is_ident("signed") {
                    let t = self.peek().clone();
                    return Err(self.unsupported(&t, "signed ports"));
                }
                let range = self.opt_range()?;
                current = Some((dir, net, range));
            } else if current.is_none() {
                return Err(self.unsupported(&t, "non-ANSI port list"));
            }
            let (direction, net, range) = current.clone().expect("set above");
            let name = self.identifier()?;
            ports.push(Port {
                name,
                direction,
                net,
                range,
            });
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn opt_range(&mut self) -> Result<Option<Range>, HdlError> {
        if !self.eat_punct("[") {
            return Ok(None);
        }
        let msb = self.expr()?;
        self.expect_punct(":")?;
        let lsb = self.expr()?;
        self.expect_punct("]")?;
        Ok(Some(Range { msb, lsb }))
    }

    fn name_list(&mut self) -> Result<Vec<String>, HdlError> {
        let mut names = vec![self.identifier()?];
        while self.eat_punct(",") {
            names.push(self.identifier()?);
        }
        if self.peek().is_punct("=") {
            let t = self.peek().clone();
            return Err(self.unsupported(&t, "declaration with initializer"));
        }
        if self.peek().is_punct("[") {
            let t = self.peek().clone();
            return Err(self.unsupported(&t, "memory (array) declaration"));
        }
        self.expect_punct(";")?;
        Ok(names)
    }

    fn item(&mut self) -> Result<AstItem, HdlError> {
        let t = self.peek().clone();
        let TokenKind::Ident(word) = &t.kind else {
            return Err(self.syntax_error(&t, "expected module item"));
        };
        match word.as_str() {
            "wire" => {
                self.bump();
                let range = self.opt_range()?;
                let names = self.name_list()?;
                Ok(AstItem::NetDecl { range, names })
            }
            "reg" => {
                self.bump();
                let range = self.opt_range()?;
                let names = self.name_list()?;
                Ok(AstItem::RegDecl { range, names })
            }
            "parameter" | "localparam" => {
                let local = word == "localparam";
                self.bump();
                if self.peek().is_punct("[") {
                    let t = self.peek().clone();
                    return Err(self.unsupported(&t, "ranged parameter"));
                }
                let mut assigns = Vec::new();
                loop {
                    let name = self.identifier()?;
                    self.expect_punct("=")?;
                    let value = self.expr()?;
                    assigns.push(ParamAssign { name, value });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                Ok(AstItem::ParamDecl { local, assigns })
            }
            "assign" => {
                self.bump();
                let lhs = self.lvalue()?;
                self.expect_punct("=")?;
                let rhs = self.expr()?;
                self.expect_punct(";")?;
                Ok(AstItem::ContinuousAssign { lhs, rhs })
            }
            "always" => {
                self.bump();
                let at = self.peek().clone();
                if !self.eat_punct("@") {
                    return Err(self.unsupported(&at, "always block without event control"));
                }
                let sensitivity = self.sensitivity()?;
                let body = self.stmt()?;
                Ok(AstItem::AlwaysBlock { sensitivity, body })
            }
            "input" | "output" | "inout" => Err(self.unsupported(&t, "non-ANSI port declaration")),
            w if UNSUPPORTED_ITEMS.contains(&w) => Err(self.unsupported(&t, &format!("`{w}`"))),
            w if w.starts_with('$') => {
                Err(self.unsupported(&t, &format!("system task `{w}`")))
            }
            w if is_keyword(w) => Err(self.syntax_error(&t, "expected module item")),
            _ => self.instantiation(),
        }
    }

    fn instantiation(&mut self) -> Result<AstItem, HdlError> {
        let module = self.identifier()?;
        let mut params = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            if self.peek().is_punct(".") {
                let t = self.peek().clone();
                return Err(self.unsupported(&t, "named parameter override"));
            }
            if !self.peek().is_punct(")") {
                params.push(self.expr()?);
                while self.eat_punct(",") {
                    params.push(self.expr()?);
                }
            }
            self.expect_punct(")")?;
        }
        let instance = self.identifier()?;
        self.expect_punct("(")?;
        let connections = if self.peek().is_punct(".") {
            let mut named = Vec::new();
            loop {
                self.expect_punct(".")?;
                let port = self.identifier()?;
                self.expect_punct("(")?;
                let e = if self.peek().is_punct(")") {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(")")?;
                named.push((port, e));
                if !self.eat_punct(",") {
                    break;
                }
            }
            Connections::Named(named)
        } else {
            let mut pos = Vec::new();
            if !self.peek().is_punct(")") {
                pos.push(self.expr()?);
                while self.eat_punct(",") {
                    pos.push(self.expr()?);
                }
            }
            Connections::Positional(pos)
        };
        self.expect_punct(")")?;
        if self.peek().is_punct(",") {
            let t = self.peek().clone();
            return Err(self.unsupported(&t, "multiple instances in one statement"));
        }
        self.expect_punct(";")?;
        Ok(AstItem::Instantiation {
            module,
            params,
            instance,
            connections,
        })
    }

    fn sensitivity(&mut self) -> Result<Sensitivity, HdlError> {
        if self.eat_punct("*") {
            return Ok(Sensitivity::Star);
        }
        self.expect_punct("(")?;
        if self.eat_punct("*") {
            self.expect_punct(")")?;
            return Ok(Sensitivity::Star);
        }
        let mut items = Vec::new();
        loop {
            let edge = if self.eat_keyword("posedge") {
                Some(Edge::Posedge)
            } else if self.eat_keyword("negedge") {
                Some(Edge::Negedge)
            } else {
                None
            };
            let signal = self.identifier()?;
            items.push(SensItem { edge, signal });
            if !(self.eat_punct(",") || self.eat_keyword("or")) {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(Sensitivity::List(items))
    }

    fn stmt(&mut self) -> Result<Stmt, HdlError> {
        let t = self.peek().clone();
        if self.eat_punct(";") {
            return Ok(Stmt::Empty);
        }
        if t.is_punct("#") {
            return Err(self.unsupported(&t, "delay control"));
        }
        if t.is_punct("@") {
            return Err(self.unsupported(&t, "event control inside statement"));
        }
        if self.eat_keyword("begin") {
            if self.peek().is_punct(":") {
                let t = self.peek().clone();
                return Err(self.unsupported(&t, "named block"));
            }
            let mut stmts = Vec::new();
            while !self.eat_keyword("end") {
                if matches!(self.peek().kind, TokenKind::Eof) {
                    let t = self.peek().clone();
                    return Err(self.syntax_error(&t, "expected `end`"));
                }
                stmts.push(self.stmt()?);
            }
            return Ok(Stmt::Block(stmts));
        }
        if self.eat_keyword("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then = Box::new(self.stmt()?);
            let otherwise = if self.eat_keyword("else") {
                Some(Box::new(self.stmt()?))
            } else {
                None
            };
            return Ok(Stmt::If {
                cond,
                then,
                otherwise,
            });
        }
        let case_kind = if t.is_ident("case") {
            Some(CaseKind::Case)
        } else if t.is_ident("casez") {
            Some(CaseKind::Casez)
        } else if t.is_ident("casex") {
            Some(CaseKind::Casex)
        } else {
            None
        };
        if let Some(kind) = case_kind {
            self.bump();
            self.expect_punct("(")?;
            let subject = self.expr()?;
            self.expect_punct(")")?;
            let mut arms = Vec::new();
            while !self.eat_keyword("endcase") {
                if matches!(self.peek().kind, TokenKind::Eof) {
                    let t = self.peek().clone();
                    return Err(self.syntax_error(&t, "expected `endcase`"));
                }
                let labels = if self.eat_keyword("default") {
                    self.eat_punct(":");
                    Vec::new()
                } else {
                    let mut labels = vec![self.expr()?];
                    while self.eat_punct(",") {
                        labels.push(self.expr()?);
                    }
                    self.expect_punct(":")?;
                    labels
                };
                let body = self.stmt()?;
                arms.push(CaseArm { labels, body });
            }
            return Ok(Stmt::Case {
                kind,
                subject,
                arms,
            });
        }
        if let TokenKind::Ident(w) = &t.kind {
            if is_keyword(w) {
                return Err(self.unsupported(&t, &format!("`{w}` statement")));
            }
            if w.starts_with('$') {
                return Err(self.unsupported(&t, &format!("system task `{w}`")));
            }
        }
        let lhs = self.lvalue()?;
        let stmt = if self.eat_punct("=") {
            Stmt::Blocking(lhs, self.expr()?)
        } else if self.eat_punct("<=") {
            Stmt::NonBlocking(lhs, self.expr()?)
        } else {
            let t = self.peek().clone();
            return Err(self.syntax_error(&t, "expected `=` or `<=`"));
        };
        self.expect_punct(";")?;
        Ok(stmt)
    }

    fn lvalue(&mut self) -> Result<Expr, HdlError> {
        if self.eat_punct("{") {
            let mut parts = vec![self.lvalue()?];
            while self.eat_punct(",") {
                parts.push(self.lvalue()?);
            }
            self.expect_punct("}")?;
            return Ok(Expr::Concat(parts));
        }
        let name = self.identifier()?;
        self.select(name)
    }

    fn select(&mut self, name: String) -> Result<Expr, HdlError> {
        if !self.eat_punct("[") {
            return Ok(Expr::Ident(name));
        }
        let first = self.expr()?;
        let e = if self.eat_punct(":") {
            let second = self.expr()?;
            Expr::Slice(name, Box::new(first), Box::new(second))
        } else {
            Expr::Index(name, Box::new(first))
        };
        self.expect_punct("]")?;
        if self.peek().is_punct("[") {
            let t = self.peek().clone();
            return Err(self.unsupported(&t, "multi-dimensional select"));
        }
        Ok(e)
    }

    pub fn expr(&mut self) -> Result<Expr, HdlError> {
        let cond = self.binary(1)?;
        if self.eat_punct("?") {
            let then = self.expr()?;
            self.expect_punct(":")?;
            let otherwise = self.expr()?;
            return Ok(Expr::Ternary(
                Box::new(cond),
                Box::new(then),
                Box::new(otherwise),
            ));
        }
        Ok(cond)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        let TokenKind::Punct(p) = self.peek().kind else {
            return None;
        };
        Some(match p {
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "<<" => BinaryOp::Shl,
            ">>" => BinaryOp::Shr,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "&" => BinaryOp::And,
            "^" => BinaryOp::Xor,
            "~^" | "^~" => BinaryOp::Xnor,
            "|" => BinaryOp::Or,
            "&&" => BinaryOp::LogicalAnd,
            "||" => BinaryOp::LogicalOr,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, HdlError> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek().clone();
            if t.is_punct("*") || t.is_punct("/") || t.is_punct("%") {
                return Err(self.unsupported(&t, &format!("operator `{}`", t.text())));
            }
            if t.is_punct("===") || t.is_punct("!==") || t.is_punct("<<<") || t.is_punct(">>>") {
                return Err(self.unsupported(&t, &format!("operator `{}`", t.text())));
            }
            let Some(op) = self.binary_op() else { break };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, HdlError> {
        let op = match self.peek().kind {
            TokenKind::Punct("~") => Some(UnaryOp::Not),
            TokenKind::Punct("!") => Some(UnaryOp::LogicalNot),
            TokenKind::Punct("-") => Some(UnaryOp::Neg),
            TokenKind::Punct("&") => Some(UnaryOp::RedAnd),
            TokenKind::Punct("|") => Some(UnaryOp::RedOr),
            TokenKind::Punct("^") => Some(UnaryOp::RedXor),
            TokenKind::Punct("~&") => Some(UnaryOp::RedNand),
            TokenKind::Punct("~|") => Some(UnaryOp::RedNor),
            TokenKind::Punct("~^") => Some(UnaryOp::RedXnor),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary()?;
            return Ok(Expr::Unary(op, Box::new(operand)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, HdlError> {
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Number(text) => {
                self.bump();
                let lit = Literal::parse(text).map_err(|m| HdlError::Unsupported {
                    construct: m,
                    line: t.line,
                    col: t.col,
                })?;
                Ok(Expr::Number(lit))
            }
            TokenKind::Ident(w) if w.starts_with('$') => {
                Err(self.unsupported(&t, &format!("system function `{w}`")))
            }
            TokenKind::Ident(w) if !is_keyword(w) => {
                self.bump();
                if self.peek().is_punct("(") {
                    return Err(self.unsupported(&t, &format!("function call `{w}`")));
                }
                self.select(w.clone())
            }
            TokenKind::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            TokenKind::Punct("{") => {
                self.bump();
                let first = self.expr()?;
                if self.eat_punct("{") {
                    let mut parts = vec![self.expr()?];
                    while self.eat_punct(",") {
                        parts.push(self.expr()?);
                    }
                    self.expect_punct("}")?;
                    self.expect_punct("}")?;
                    return Ok(Expr::Replicate(Box::new(first), parts));
                }
                let mut parts = vec![first];
                while self.eat_punct(",") {
                    parts.push(self.expr()?);
                }
                self.expect_punct("}")?;
                Ok(Expr::Concat(parts))
            }
            _ => Err(self.syntax_error(&t, "expected expression")),
        }
    }
}

/// Enforces the declaration invariants on a parsed module.
pub(crate) fn check_module(m: &ModuleAst) -> Result<(), HdlError> {
    let mut declared: BTreeSet<String> = BTreeSet::new();
    for p in &m.params {
        if !declared.insert(p.name.clone()) {
            return Err(HdlError::Duplicate {
                name: p.name.clone(),
                what: "parameter".into(),
            });
        }
    }
    for p in &m.ports {
        if !declared.insert(p.name.clone()) {
            return Err(HdlError::Duplicate {
                name: p.name.clone(),
                what: "port".into(),
            });
        }
    }
    let mut instances = BTreeSet::new();
    for item in &m.items {
        match item {
            AstItem::Instantiation { instance, .. } => {
                if !instances.insert(instance.clone()) {
                    return Err(HdlError::Duplicate {
                        name: instance.clone(),
                        what: "instance".into(),
                    });
                }
            }
            // `output q; reg q;` style redeclaration of an output as reg is allowed
            AstItem::RegDecl { names, .. } | AstItem::NetDecl { names, .. } => {
                for n in names {
                    let is_port = m.port(n).is_some();
                    if !declared.insert(n.clone()) && !is_port {
                        return Err(HdlError::Duplicate {
                            name: n.clone(),
                            what: "signal".into(),
                        });
                    }
                }
            }
            other => {
                for n in other.declared_names() {
                    if !declared.insert(n.to_string()) {
                        return Err(HdlError::Duplicate {
                            name: n.to_string(),
                            what: "parameter".into(),
                        });
                    }
                }
            }
        }
    }
    let check = |set: &BTreeSet<String>| -> Result<(), HdlError> {
        for n in set {
            if !declared.contains(n) {
                return Err(HdlError::Undeclared {
                    name: n.clone(),
                    module: m.name.clone(),
                });
            }
        }
        Ok(())
    };
    for p in &m.ports {
        if let Some(r) = &p.range {
            let mut s = BTreeSet::new();
            r.msb.identifiers(&mut s);
            r.lsb.identifiers(&mut s);
            check(&s)?;
        }
    }
    for item in &m.items {
        let (reads, writes) = item.reads_writes();
        check(&reads)?;
        check(&writes)?;
    }
    Ok(())
}
