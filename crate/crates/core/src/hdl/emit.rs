//! Deterministic pretty-printer. Output re-parses to a structurally equal AST.

use std::fmt::Write;

use super::ast::*;

pub fn emit(ast: &ModuleAst) -> String {
    match ast.language {
        HdlLanguage::Verilog => emit_verilog(ast),
        HdlLanguage::Vhdl => emit_vhdl(ast),
    }
}

pub fn emit_design(design: &Design) -> String {
    design
        .modules
        .iter()
        .map(emit)
        .collect::<Vec<_>>()
        .join("\n")
}

fn emit_verilog(m: &ModuleAst) -> String {
    let mut out = String::new();
    write!(out, "module {}", m.name).unwrap();
    if !m.params.is_empty() {
        let ps: Vec<String> = m
            .params
            .iter()
            .map(|p| format!("parameter {} = {}", p.name, expr(&p.value)))
            .collect();
        write!(out, " #({}) ", ps.join(", ")).unwrap();
    }
    let ports: Vec<String> = m.ports.iter().map(port).collect();
    writeln!(out, "({});", ports.join(", ")).unwrap();
    for item in &m.items {
        emit_item(&mut out, item);
    }
    out.push_str("endmodule\n");
    out
}

fn port(p: &Port) -> String {
    let mut s = p.direction.keyword().to_string();
    match p.net {
        Some(NetKind::Wire) => s.push_str(" wire"),
        Some(NetKind::Reg) => s.push_str(" reg"),
        None => {}
    }
    if let Some(r) = &p.range {
        s.push(' ');
        s.push_str(&range(r));
    }
    s.push(' ');
    s.push_str(&p.name);
    s
}

fn range(r: &Range) -> String {
    format!("[{}:{}]", expr(&r.msb), expr(&r.lsb))
}

fn decl(out: &mut String, kw: &str, r: &Option<Range>, names: &[String]) {
    match r {
        Some(r) => writeln!(out, "  {kw} {} {};", range(r), names.join(", ")).unwrap(),
        None => writeln!(out, "  {kw} {};", names.join(", ")).unwrap(),
    }
}

pub(crate) fn emit_item(out: &mut String, item: &AstItem) {
    match item {
        AstItem::NetDecl { range, names } => decl(out, "wire", range, names),
        AstItem::RegDecl { range, names } => decl(out, "reg", range, names),
        AstItem::ParamDecl { local, assigns } => {
            let kw = if *local { "localparam" } else { "parameter" };
            let body: Vec<String> = assigns
                .iter()
                .map(|a| format!("{} = {}", a.name, expr(&a.value)))
                .collect();
            writeln!(out, "  {kw} {};", body.join(", ")).unwrap();
        }
        AstItem::ContinuousAssign { lhs, rhs } => {
            writeln!(out, "  assign {} = {};", expr(lhs), expr(rhs)).unwrap();
        }
        AstItem::AlwaysBlock { sensitivity, body } => {
            let sens = match sensitivity {
                Sensitivity::Star => "*".to_string(),
                Sensitivity::List(items) => items
                    .iter()
                    .map(|i| match i.edge {
                        Some(Edge::Posedge) => format!("posedge {}", i.signal),
                        Some(Edge::Negedge) => format!("negedge {}", i.signal),
                        None => i.signal.clone(),
                    })
                    .collect::<Vec<_>>()
                    .join(" or "),
            };
            write!(out, "  always @({sens}) ").unwrap();
            stmt(out, body, 1);
        }
        AstItem::Instantiation {
            module,
            params,
            instance,
            connections,
        } => {
            write!(out, "  {module} ").unwrap();
            if !params.is_empty() {
                let ps: Vec<String> = params.iter().map(expr).collect();
                write!(out, "#({}) ", ps.join(", ")).unwrap();
            }
            let conns: Vec<String> = match connections {
                Connections::Positional(es) => es.iter().map(expr).collect(),
                Connections::Named(pairs) => pairs
                    .iter()
                    .map(|(p, e)| match e {
                        Some(e) => format!(".{p}({})", expr(e)),
                        None => format!(".{p}()"),
                    })
                    .collect(),
            };
            writeln!(out, "{instance}({});", conns.join(", ")).unwrap();
        }
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Writes a statement starting at the current cursor; ends with a newline.
fn stmt(out: &mut String, s: &Stmt, level: usize) {
    match s {
        Stmt::Block(stmts) => {
            out.push_str("begin\n");
            for st in stmts {
                indent(out, level + 1);
                stmt(out, st, level + 1);
            }
            indent(out, level);
            out.push_str("end\n");
        }
        Stmt::If {
            cond,
            then,
            otherwise,
        } => {
            write!(out, "if ({}) ", expr(cond)).unwrap();
            stmt(out, then, level);
            if let Some(o) = otherwise {
                indent(out, level);
                out.push_str("else ");
                stmt(out, o, level);
            }
        }
        Stmt::Case {
            kind,
            subject,
            arms,
        } => {
            let kw = match kind {
                CaseKind::Case => "case",
                CaseKind::Casez => "casez",
                CaseKind::Casex => "casex",
            };
            writeln!(out, "{kw} ({})", expr(subject)).unwrap();
            for arm in arms {
                indent(out, level + 1);
                if arm.labels.is_empty() {
                    out.push_str("default: ");
                } else {
                    let ls: Vec<String> = arm.labels.iter().map(expr).collect();
                    write!(out, "{}: ", ls.join(", ")).unwrap();
                }
                stmt(out, &arm.body, level + 1);
            }
            indent(out, level);
            out.push_str("endcase\n");
        }
        Stmt::Blocking(l, r) => writeln!(out, "{} = {};", expr(l), expr(r)).unwrap(),
        Stmt::NonBlocking(l, r) => writeln!(out, "{} <= {};", expr(l), expr(r)).unwrap(),
        Stmt::Empty => out.push_str(";\n"),
    }
}

const PREC_TERNARY: u8 = 0;
const PREC_UNARY: u8 = 10;
const PREC_PRIMARY: u8 = 11;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Ternary(..) => PREC_TERNARY,
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(..) => PREC_UNARY,
        _ => PREC_PRIMARY,
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

/// Renders a Verilog expression with the minimal parentheses needed to
/// reproduce the same tree.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Ident(n) => n.clone(),
        Expr::Index(n, i) => format!("{n}[{}]", expr(i)),
        Expr::Slice(n, a, b) => format!("{n}[{}:{}]", expr(a), expr(b)),
        Expr::Number(l) => l.text.clone(),
        Expr::Unary(op, inner) => {
            let parens = prec(inner) <= PREC_UNARY;
            format!("{}{}", op.symbol(), wrap(inner, parens))
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            format!(
                "{} {} {}",
                wrap(a, prec(a) < p),
                op.symbol(),
                wrap(b, prec(b) <= p)
            )
        }
        Expr::Ternary(c, t, o) => format!(
            "{} ? {} : {}",
            wrap(c, prec(c) == PREC_TERNARY),
            expr(t),
            expr(o)
        ),
        Expr::Concat(parts) => {
            let ps: Vec<String> = parts.iter().map(expr).collect();
            format!("{{{}}}", ps.join(", "))
        }
        Expr::Replicate(n, parts) => {
            let ps: Vec<String> = parts.iter().map(expr).collect();
            format!("{{{}{{{}}}}}", wrap(n, prec(n) < PREC_PRIMARY), ps.join(", "))
        }
    }
}

fn emit_vhdl(m: &ModuleAst) -> String {
    let mut out = String::new();
    writeln!(out, "library ieee;\nuse ieee.std_logic_1164.all;\n").unwrap();
    writeln!(out, "entity {} is", m.name).unwrap();
    if !m.ports.is_empty() {
        let ports: Vec<String> = m
            .ports
            .iter()
            .map(|p| {
                let mode = match p.direction {
                    Direction::Input => "in",
                    Direction::Output => "out",
                    Direction::Inout => "inout",
                };
                format!("{}: {} {}", p.name, mode, vhdl_type(&p.range))
            })
            .collect();
        writeln!(out, "  port({});", ports.join("; ")).unwrap();
    }
    writeln!(out, "end entity;\narchitecture rtl of {} is", m.name).unwrap();
    for item in &m.items {
        if let AstItem::NetDecl { range, names } = item {
            writeln!(out, "  signal {}: {};", names.join(", "), vhdl_type(range)).unwrap();
        }
    }
    out.push_str("begin\n");
    for item in &m.items {
        if let AstItem::ContinuousAssign { lhs, rhs } = item {
            writeln!(out, "  {} <= {};", vhdl_expr(lhs), vhdl_expr(rhs)).unwrap();
        }
    }
    out.push_str("end architecture;\n");
    out
}

fn vhdl_type(r: &Option<Range>) -> String {
    match r {
        None => "std_logic".into(),
        Some(r) => format!(
            "std_logic_vector({} downto {})",
            expr(&r.msb),
            expr(&r.lsb)
        ),
    }
}

fn vhdl_expr(e: &Expr) -> String {
    let operand = |x: &Expr| match x {
        Expr::Binary(..) | Expr::Unary(UnaryOp::Not, _) => format!("({})", vhdl_expr(x)),
        _ => vhdl_expr(x),
    };
    match e {
        Expr::Ident(n) => n.clone(),
        Expr::Index(n, i) => format!("{n}({})", vhdl_expr(i)),
        Expr::Number(l) if l.width == Some(1) => format!("'{}'", l.value),
        Expr::Number(l) => l.value.to_string(),
        Expr::Unary(UnaryOp::Not, inner) => match inner.as_ref() {
            Expr::Binary(BinaryOp::And, a, b) => format!("{} nand {}", operand(a), operand(b)),
            Expr::Binary(BinaryOp::Or, a, b) => format!("{} nor {}", operand(a), operand(b)),
            other => format!("not {}", operand(other)),
        },
        Expr::Binary(op, a, b) => {
            let kw = match op {
                BinaryOp::And => "and",
                BinaryOp::Or => "or",
                BinaryOp::Xor => "xor",
                BinaryOp::Xnor => "xnor",
                _ => "??",
            };
            // keep left-associative chains of the same operator flat
            let left = match a.as_ref() {
                Expr::Binary(inner, ..) if inner == op => vhdl_expr(a),
                _ => operand(a),
            };
            format!("{left} {kw} {}", operand(b))
        }
        other => expr(other),
    }
}
