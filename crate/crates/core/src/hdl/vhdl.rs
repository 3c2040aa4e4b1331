//! Minimal VHDL front end: one entity plus one architecture made of
//! concurrent signal assignments. The result is lowered onto the same
//! [`ModuleAst`] used for Verilog.

use std::sync::Arc;

use super::ast::*;
use super::lexer::{tokenize, Dialect, Token, TokenKind};
use super::HdlError;

pub const VHDL_KEYWORDS: &[&str] = &[
    "library", "use", "entity", "is", "port", "in", "out", "inout", "end", "architecture", "of",
    "begin", "signal", "and", "or", "xor", "nand", "nor", "xnor", "not", "downto", "to", "process",
    "when", "else", "with", "select", "generate", "component", "function", "procedure", "type",
    "constant", "variable", "if", "then", "case", "all", "others", "generic", "map", "package",
];

const UNSUPPORTED: &[&str] = &[
    "process", "when", "with", "generate", "component", "function", "procedure", "type",
    "constant", "variable", "generic", "package",
];

pub fn parse_vhdl(source: &str) -> Result<ModuleAst, HdlError> {
    let tokens = tokenize(source, Dialect::Vhdl)?;
    let mut p = VhdlParser { tokens, pos: 0 };
    p.design(Arc::from(source))
}

struct VhdlParser {
    tokens: Vec<Token>,
    pos: usize,
}

impl VhdlParser {
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

    fn err(&self, t: &Token, msg: &str) -> HdlError {
        HdlError::Syntax {
            line: t.line,
            col: t.col,
            token: t.text(),
            message: msg.to_string(),
        }
    }

    fn check_unsupported(&self) -> Result<(), HdlError> {
        let t = self.peek();
        if let TokenKind::Ident(w) = &t.kind {
            if UNSUPPORTED.contains(&w.as_str()) {
                return Err(HdlError::Unsupported {
                    construct: format!("VHDL `{w}`"),
                    line: t.line,
                    col: t.col,
                });
            }
        }
        Ok(())
    }

    fn kw(&mut self, w: &str) -> Result<Token, HdlError> {
        self.check_unsupported()?;
        if self.peek().is_ident(w) {
            Ok(self.bump())
        } else {
            let t = self.peek().clone();
            Err(self.err(&t, &format!("expected `{w}`")))
        }
    }

    fn eat_kw(&mut self, w: &str) -> bool {
        if self.peek().is_ident(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn punct(&mut self, p: &str) -> Result<Token, HdlError> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            let t = self.peek().clone();
            Err(self.err(&t, &format!("expected `{p}`")))
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

    fn ident(&mut self) -> Result<String, HdlError> {
        self.check_unsupported()?;
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Ident(w) if !VHDL_KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w.clone())
            }
            _ => Err(self.err(&t, "expected identifier")),
        }
    }

    fn design(&mut self, source: Arc<str>) -> Result<ModuleAst, HdlError> {
        // context clauses
        loop {
            if self.eat_kw("library") {
                self.ident()?;
                while self.eat_punct(",") {
                    self.ident()?;
                }
                self.punct(";")?;
            } else if self.eat_kw("use") {
                while !self.peek().is_punct(";") {
                    if matches!(self.peek().kind, TokenKind::Eof) {
                        let t = self.peek().clone();
                        return Err(self.err(&t, "expected `;`"));
                    }
                    self.bump();
                }
                self.punct(";")?;
            } else {
                break;
            }
        }

        self.kw("entity")?;
        let name = self.ident()?;
        self.kw("is")?;
        let mut ports = Vec::new();
        if self.eat_kw("port") {
            self.punct("(")?;
            loop {
                let mut names = vec![self.ident()?];
                while self.eat_punct(",") {
                    names.push(self.ident()?);
                }
                self.punct(":")?;
                let direction = if self.eat_kw("in") {
                    Direction::Input
                } else if self.eat_kw("out") {
                    Direction::Output
                } else if self.eat_kw("inout") {
                    Direction::Inout
                } else {
                    let t = self.peek().clone();
                    return Err(self.err(&t, "expected port mode"));
                };
                let range = self.type_mark()?;
                for n in names {
                    ports.push(Port {
                        name: n,
                        direction,
                        net: None,
                        range: range.clone(),
                    });
                }
                if !self.eat_punct(";") {
                    break;
                }
            }
            self.punct(")")?;
            self.punct(";")?;
        }
        self.kw("end")?;
        self.eat_kw("entity");
        if !self.peek().is_punct(";") {
            let closing = self.ident()?;
            if closing != name {
                let t = self.tokens[self.pos - 1].clone();
                return Err(self.err(&t, "entity name mismatch"));
            }
        }
        self.punct(";")?;

        self.kw("architecture")?;
        let arch = self.ident()?;
        self.kw("of")?;
        let of = self.ident()?;
        if of != name {
            let t = self.tokens[self.pos - 1].clone();
            return Err(self.err(&t, "architecture does not belong to the entity"));
        }
        self.kw("is")?;
        let header_end = self.tokens[self.pos - 1].end;

        let mut items = Vec::new();
        let mut item_spans = Vec::new();
        while self.peek().is_ident("signal") {
            let start = self.peek().start;
            self.bump();
            let mut names = vec![self.ident()?];
            while self.eat_punct(",") {
                names.push(self.ident()?);
            }
            self.punct(":")?;
            let range = self.type_mark()?;
            self.punct(";")?;
            items.push(AstItem::NetDecl { range, names });
            item_spans.push(Span::new(start, self.tokens[self.pos - 1].end));
        }
        self.kw("begin")?;
        loop {
            self.check_unsupported()?;
            if self.peek().is_ident("end") {
                break;
            }
            let start = self.peek().start;
            let target = self.ident()?;
            let lhs = self.name_suffix(target)?;
            self.punct("<=")?;
            let rhs = self.expr()?;
            self.check_unsupported()?;
            self.punct(";")?;
            items.push(AstItem::ContinuousAssign { lhs, rhs });
            item_spans.push(Span::new(start, self.tokens[self.pos - 1].end));
        }
        self.kw("end")?;
        self.eat_kw("architecture");
        if !self.peek().is_punct(";") {
            let closing = self.ident()?;
            if closing != arch {
                let t = self.tokens[self.pos - 1].clone();
                return Err(self.err(&t, "architecture name mismatch"));
            }
        }
        self.punct(";")?;
        if !matches!(self.peek().kind, TokenKind::Eof) {
            let t = self.peek().clone();
            return Err(HdlError::Unsupported {
                construct: "more than one design unit".into(),
                line: t.line,
                col: t.col,
            });
        }

        let len = source.len();
        let m = ModuleAst {
            name,
            language: HdlLanguage::Vhdl,
            params: Vec::new(),
            ports,
            items,
            source_span: Span::new(0, len),
            header_end,
            item_spans,
            source,
        };
        super::parser::check_module(&m)?;
        Ok(m)
    }

    fn type_mark(&mut self) -> Result<Option<Range>, HdlError> {
        let t = self.peek().clone();
        let ty = self.ident()?;
        match ty.as_str() {
            "std_logic" | "std_ulogic" | "bit" => Ok(None),
            "std_logic_vector" | "std_ulogic_vector" | "bit_vector" => {
                self.punct("(")?;
                let hi = self.int()?;
                let dir = self.peek().clone();
                let (msb, lsb) = if self.eat_kw("downto") {
                    (hi, self.int()?)
                } else if self.eat_kw("to") {
                    (self.int()?, hi)
                } else {
                    return Err(self.err(&dir, "expected `downto` or `to`"));
                };
                self.punct(")")?;
                Ok(Some(Range {
                    msb: num(msb),
                    lsb: num(lsb),
                }))
            }
            _ => Err(HdlError::Unsupported {
                construct: format!("VHDL type `{ty}`"),
                line: t.line,
                col: t.col,
            }),
        }
    }

    fn int(&mut self) -> Result<u64, HdlError> {
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Number(n) if n.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                n.parse().map_err(|_| self.err(&t, "bad integer"))
            }
            _ => Err(self.err(&t, "expected integer")),
        }
    }

    fn name_suffix(&mut self, name: String) -> Result<Expr, HdlError> {
        if self.eat_punct("(") {
            let idx = self.int()?;
            self.punct(")")?;
            return Ok(Expr::Index(name, Box::new(num(idx))));
        }
        Ok(Expr::Ident(name))
    }

    fn logical_op(&self) -> Option<&'static str> {
        let TokenKind::Ident(w) = &self.peek().kind else {
            return None;
        };
        ["and", "or", "xor", "nand", "nor", "xnor"]
            .into_iter()
            .find(|op| op == w)
    }

    // VHDL logical operators share one precedence level; mixing different
    // operators without parentheses is illegal, we parse left-associatively.
    fn expr(&mut self) -> Result<Expr, HdlError> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.logical_op() {
            self.bump();
            let rhs = self.factor()?;
            let (l, r) = (Box::new(lhs), Box::new(rhs));
            lhs = match op {
                "and" => Expr::Binary(BinaryOp::And, l, r),
                "or" => Expr::Binary(BinaryOp::Or, l, r),
                "xor" => Expr::Binary(BinaryOp::Xor, l, r),
                "xnor" => Expr::Binary(BinaryOp::Xnor, l, r),
                "nand" => Expr::Unary(UnaryOp::Not, Box::new(Expr::Binary(BinaryOp::And, l, r))),
                _ => Expr::Unary(UnaryOp::Not, Box::new(Expr::Binary(BinaryOp::Or, l, r))),
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, HdlError> {
        self.check_unsupported()?;
        if self.eat_kw("not") {
            let e = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(e)));
        }
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Number(n) if n == "'0'" || n == "'1'" => {
                self.bump();
                Ok(Expr::Number(Literal::from_bit(n == "'1'")))
            }
            TokenKind::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.punct(")")?;
                Ok(e)
            }
            TokenKind::Ident(_) => {
                let n = self.ident()?;
                self.name_suffix(n)
            }
            _ => Err(self.err(&t, "expected expression")),
        }
    }
}

fn num(v: u64) -> Expr {
    Expr::Number(Literal {
        text: v.to_string(),
        width: None,
        value: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF_ADDER_VHDL: &str = "entity half_adder is\n  port(a, b: in std_logic;\n  sum, carry: out std_logic);\nend entity;\narchitecture rtl of half_adder is\nbegin\n  sum <= a xor b;\n  carry <= a and b;\nend architecture;\n";

    #[test]
    fn table_snippet_parses() {
        let m = parse_vhdl(HALF_ADDER_VHDL).unwrap();
        assert_eq!(m.name, "half_adder");
        assert_eq!(m.ports.len(), 4);
        assert_eq!(m.items.len(), 2);
        assert_eq!(m.language, HdlLanguage::Vhdl);
    }

    #[test]
    fn full_adder_with_parens() {
        let src = "library ieee;\nuse ieee.std_logic_1164.all;\nentity full_adder is\n  port(a, b, cin: in std_logic; sum,\n  cout: out std_logic);\nend entity;\narchitecture rtl of full_adder is\nbegin\n  sum <= a xor b xor cin;\n  cout <= (a and b) or (b and cin) or (a and cin);\nend architecture;\n";
        let m = parse_vhdl(src).unwrap();
        assert_eq!(m.items.len(), 2);
    }

    #[test]
    fn process_is_unsupported() {
        let src = "entity e is port(a: in std_logic); end; architecture r of e is begin process begin end process; end;";
        assert!(matches!(parse_vhdl(src), Err(HdlError::Unsupported { .. })));
    }

    #[test]
    fn vectors_and_signals() {
        let src = "entity e is port(a: in std_logic_vector(3 downto 0); y: out std_logic); end e;\narchitecture r of e is\n signal t: std_logic;\nbegin\n t <= a(0) and a(1);\n y <= t or not a(3);\nend r;";
        let m = parse_vhdl(src).unwrap();
        assert_eq!(m.signal_widths().unwrap()["a"], 4);
        assert_eq!(m.items.len(), 3);
    }
}
