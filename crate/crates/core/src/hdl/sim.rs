//! Two-state evaluator for combinational designs.
//!
//! Continuous assigns, `always @*` blocks and instantiations of modules
//! defined in the same design are evaluated to a fixpoint. Widths follow a
//! simplified rule set: operands are held in 64-bit words and results are
//! masked to the destination width on assignment.

use std::collections::BTreeMap;

use super::ast::*;
use super::HdlError;

pub type Signals = BTreeMap<String, u64>;

const MAX_DEPTH: usize = 32;

/// Evaluates `module` of `design` on the given input port values and returns
/// the value of every output port.
pub fn eval_module(design: &Design, module: &str, inputs: &Signals) -> Result<Signals, HdlError> {
    eval_inner(design, module, inputs, 0)
}

fn eval_inner(
    design: &Design,
    module: &str,
    inputs: &Signals,
    depth: usize,
) -> Result<Signals, HdlError> {
    if depth > MAX_DEPTH {
        return Err(HdlError::Eval(format!(
            "instantiation depth exceeds {MAX_DEPTH} (recursive design?)"
        )));
    }
    let m = design
        .module(module)
        .ok_or_else(|| HdlError::Eval(format!("module `{module}` is not defined")))?;
    if !m.is_combinational() {
        return Err(HdlError::NotCombinational(m.name.clone()));
    }
    let widths = m.signal_widths()?;
    let offsets = m.signal_offsets()?;
    let params = m.param_values()?;
    let mut env = Env {
        values: BTreeMap::new(),
        widths: &widths,
        offsets: &offsets,
        params: &params,
    };
    for name in widths.keys() {
        env.values.insert(name.clone(), 0);
    }
    for p in m.inputs() {
        let v = inputs.get(&p.name).copied().ok_or_else(|| {
            HdlError::Eval(format!("no value for input `{}` of `{}`", p.name, m.name))
        })?;
        env.values.insert(p.name.clone(), v & mask(widths[&p.name]));
    }

    let passes = m.items.len() + 2;
    let mut converged = false;
    for _ in 0..passes.max(4) * 2 {
        let before = env.values.clone();
        for item in &m.items {
            match item {
                AstItem::ContinuousAssign { lhs, rhs } => {
                    let v = env.eval(rhs)?;
                    env.assign(lhs, v)?;
                }
                AstItem::AlwaysBlock { body, .. } => env.exec(body)?,
                AstItem::Instantiation {
                    module: sub,
                    connections,
                    params: overrides,
                    ..
                } => {
                    if !overrides.is_empty() {
                        return Err(HdlError::Eval(
                            "parameter overrides on instances are not evaluated".into(),
                        ));
                    }
                    env.instance(design, sub, connections, depth)?;
                }
                _ => {}
            }
        }
        if env.values == before {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(HdlError::Eval(format!(
            "combinational loop in `{}`: values did not settle",
            m.name
        )));
    }
    Ok(m.outputs()
        .map(|p| (p.name.clone(), env.values[&p.name]))
        .collect())
}

struct Env<'a> {
    values: Signals,
    widths: &'a BTreeMap<String, u32>,
    offsets: &'a BTreeMap<String, u64>,
    params: &'a BTreeMap<String, u64>,
}

impl Env<'_> {
    fn read(&self, name: &str) -> Result<u64, HdlError> {
        if let Some(v) = self.values.get(name) {
            return Ok(*v);
        }
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| HdlError::Eval(format!("unknown signal `{name}`")))
    }

    /// Bit position of declared index `i` of `name`.
    fn bit(&self, name: &str, i: u64) -> u64 {
        i.wrapping_sub(self.offsets.get(name).copied().unwrap_or(0))
    }

    fn width_of(&self, name: &str) -> u32 {
        self.widths.get(name).copied().unwrap_or(32)
    }

    /// Self-determined width of an expression (approximate).
    fn width(&self, e: &Expr) -> u32 {
        match e {
            Expr::Ident(n) => self.width_of(n),
            Expr::Index(..) => 1,
            Expr::Slice(_, a, b) => match (self.eval(a), self.eval(b)) {
                (Ok(a), Ok(b)) => (a.abs_diff(b) + 1) as u32,
                _ => 1,
            },
            Expr::Number(l) => l.width.unwrap_or(32),
            Expr::Unary(UnaryOp::Not | UnaryOp::Neg, x) => self.width(x),
            Expr::Unary(..) => 1,
            Expr::Binary(op, a, b) => match op {
                BinaryOp::Lt
                | BinaryOp::Le
                | BinaryOp::Gt
                | BinaryOp::Ge
                | BinaryOp::Eq
                | BinaryOp::Ne
                | BinaryOp::LogicalAnd
                | BinaryOp::LogicalOr => 1,
                BinaryOp::Shl | BinaryOp::Shr => self.width(a),
                _ => self.width(a).max(self.width(b)),
            },
            Expr::Ternary(_, t, o) => self.width(t).max(self.width(o)),
            Expr::Concat(parts) => parts.iter().map(|p| self.width(p)).sum(),
            Expr::Replicate(n, parts) => {
                let count = self.eval(n).unwrap_or(1) as u32;
                count * parts.iter().map(|p| self.width(p)).sum::<u32>()
            }
        }
    }

    fn eval(&self, e: &Expr) -> Result<u64, HdlError> {
        Ok(match e {
            Expr::Ident(n) => self.read(n)?,
            Expr::Index(n, i) => {
                let i = self.bit(n, self.eval(i)?);
                if i >= 64 {
                    0
                } else {
                    (self.read(n)? >> i) & 1
                }
            }
            Expr::Slice(n, a, b) => {
                let (hi, lo) = (self.bit(n, self.eval(a)?), self.bit(n, self.eval(b)?));
                let (hi, lo) = (hi.max(lo), hi.min(lo));
                if lo >= 64 {
                    return Ok(0);
                }
                (self.read(n)? >> lo) & mask((hi - lo + 1) as u32)
            }
            Expr::Number(l) => l.value,
            Expr::Unary(op, x) => {
                let v = self.eval(x)?;
                let w = self.width(x);
                let m = mask(w);
                match op {
                    UnaryOp::Not => !v & m,
                    UnaryOp::LogicalNot => (v == 0) as u64,
                    UnaryOp::Neg => v.wrapping_neg() & m,
                    UnaryOp::RedAnd => ((v & m) == m) as u64,
                    UnaryOp::RedOr => (v & m != 0) as u64,
                    UnaryOp::RedXor => ((v & m).count_ones() & 1) as u64,
                    UnaryOp::RedNand => ((v & m) != m) as u64,
                    UnaryOp::RedNor => (v & m == 0) as u64,
                    UnaryOp::RedXnor => (((v & m).count_ones() & 1) ^ 1) as u64,
                }
            }
            Expr::Binary(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinaryOp::Add => x.wrapping_add(y),
                    BinaryOp::Sub => x.wrapping_sub(y) & mask(self.width(e).max(1)),
                    BinaryOp::Shl => x.checked_shl(y as u32).unwrap_or(0) & mask(self.width(a)),
                    BinaryOp::Shr => x.checked_shr(y as u32).unwrap_or(0),
                    BinaryOp::Lt => (x < y) as u64,
                    BinaryOp::Le => (x <= y) as u64,
                    BinaryOp::Gt => (x > y) as u64,
                    BinaryOp::Ge => (x >= y) as u64,
                    BinaryOp::Eq => (x == y) as u64,
                    BinaryOp::Ne => (x != y) as u64,
                    BinaryOp::And => x & y,
                    BinaryOp::Or => x | y,
                    BinaryOp::Xor => x ^ y,
                    BinaryOp::Xnor => !(x ^ y) & mask(self.width(e)),
                    BinaryOp::LogicalAnd => (x != 0 && y != 0) as u64,
                    BinaryOp::LogicalOr => (x != 0 || y != 0) as u64,
                }
            }
            Expr::Ternary(c, t, o) => {
                if self.eval(c)? != 0 {
                    self.eval(t)?
                } else {
                    self.eval(o)?
                }
            }
            Expr::Concat(parts) => {
                let mut acc = 0u64;
                for p in parts {
                    let w = self.width(p);
                    acc = acc.checked_shl(w).unwrap_or(0) | (self.eval(p)? & mask(w));
                }
                acc
            }
            Expr::Replicate(n, parts) => {
                let count = self.eval(n)?;
                let inner = Expr::Concat(parts.clone());
                let w = self.width(&inner);
                let v = self.eval(&inner)? & mask(w);
                let mut acc = 0u64;
                for _ in 0..count {
                    acc = acc.checked_shl(w).unwrap_or(0) | v;
                }
                acc
            }
        })
    }

    fn assign(&mut self, lhs: &Expr, value: u64) -> Result<(), HdlError> {
        match lhs {
            Expr::Ident(n) => {
                let w = self.width_of(n);
                self.values.insert(n.clone(), value & mask(w));
            }
            Expr::Index(n, i) => {
                let i = self.bit(n, self.eval(i)?);
                if i < 64 {
                    let cur = self.read(n)?;
                    let v = (cur & !(1 << i)) | ((value & 1) << i);
                    self.values.insert(n.clone(), v & mask(self.width_of(n)));
                }
            }
            Expr::Slice(n, a, b) => {
                let (hi, lo) = (self.bit(n, self.eval(a)?), self.bit(n, self.eval(b)?));
                let (hi, lo) = (hi.max(lo), hi.min(lo));
                if lo >= 64 {
                    return Ok(());
                }
                let field = mask((hi - lo + 1) as u32) << lo;
                let cur = self.read(n)?;
                let v = (cur & !field) | ((value << lo) & field);
                self.values.insert(n.clone(), v & mask(self.width_of(n)));
            }
            Expr::Concat(parts) => {
                let mut shift = 0u32;
                for p in parts.iter().rev() {
                    let w = self.width(p);
                    let part = value.checked_shr(shift).unwrap_or(0) & mask(w);
                    self.assign(p, part)?;
                    shift += w;
                }
            }
            other => {
                return Err(HdlError::Eval(format!("invalid assignment target {other:?}")));
            }
        }
        Ok(())
    }

    fn exec(&mut self, s: &Stmt) -> Result<(), HdlError> {
        match s {
            Stmt::Block(stmts) => {
                for st in stmts {
                    self.exec(st)?;
                }
            }
            Stmt::If {
                cond,
                then,
                otherwise,
            } => {
                if self.eval(cond)? != 0 {
                    self.exec(then)?;
                } else if let Some(o) = otherwise {
                    self.exec(o)?;
                }
            }
            Stmt::Case { subject, arms, .. } => {
                let v = self.eval(subject)?;
                let mut matched = None;
                'arms: for arm in arms {
                    for l in &arm.labels {
                        if self.eval(l)? == v {
                            matched = Some(&arm.body);
                            break 'arms;
                        }
                    }
                }
                let chosen =
                    matched.or_else(|| arms.iter().find(|a| a.labels.is_empty()).map(|a| &a.body));
                if let Some(body) = chosen {
                    self.exec(body)?;
                }
            }
            Stmt::Blocking(l, r) | Stmt::NonBlocking(l, r) => {
                let v = self.eval(r)?;
                self.assign(l, v)?;
            }
            Stmt::Empty => {}
        }
        Ok(())
    }

    fn instance(
        &mut self,
        design: &Design,
        sub: &str,
        connections: &Connections,
        depth: usize,
    ) -> Result<(), HdlError> {
        let child = design
            .module(sub)
            .ok_or_else(|| HdlError::Eval(format!("module `{sub}` is not defined in the design")))?;
        let bound: Vec<(&Port, Option<&Expr>)> = match connections {
            Connections::Positional(es) => child
                .ports
                .iter()
                .enumerate()
                .map(|(i, p)| (p, es.get(i)))
                .collect(),
            Connections::Named(pairs) => {
                for (name, _) in pairs {
                    if child.port(name).is_none() {
                        return Err(HdlError::Eval(format!(
                            "`{sub}` has no port named `{name}`"
                        )));
                    }
                }
                child
                    .ports
                    .iter()
                    .map(|p| {
                        let e = pairs
                            .iter()
                            .find(|(n, _)| n == &p.name)
                            .and_then(|(_, e)| e.as_ref());
                        (p, e)
                    })
                    .collect()
            }
        };
        let mut child_inputs = Signals::new();
        for (p, e) in &bound {
            if p.direction == Direction::Input {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => 0,
                };
                child_inputs.insert(p.name.clone(), v);
            }
        }
        let outs = eval_inner(design, sub, &child_inputs, depth + 1)?;
        for (p, e) in bound {
            if p.direction == Direction::Output {
                if let Some(e) = e {
                    self.assign(e, outs[&p.name])?;
                }
            }
        }
        Ok(())
    }
}

/// Enumerates every input combination of a module whose inputs total at most
/// `max_bits` bits, yielding the full input map for each.
pub fn input_space(m: &ModuleAst, max_bits: u32) -> Result<Vec<Signals>, HdlError> {
    let widths: Vec<(String, u32)> = m
        .inputs()
        .map(|p| Ok((p.name.clone(), m.port_width(p)?)))
        .collect::<Result<_, HdlError>>()?;
    let total: u32 = widths.iter().map(|(_, w)| w).sum();
    if total > max_bits {
        return Err(HdlError::TooManyInputs {
            bits: total,
            limit: max_bits,
        });
    }
    let mut out = Vec::with_capacity(1 << total);
    for code in 0u64..(1u64 << total) {
        let mut shift = 0;
        let mut sig = Signals::new();
        for (name, w) in &widths {
            sig.insert(name.clone(), (code >> shift) & mask(*w));
            shift += w;
        }
        out.push(sig);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdl::parse_design;

    fn sig(pairs: &[(&str, u64)]) -> Signals {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn ripple_adder_adds() {
        let src = "module full_adder(input a, b, cin, output sum, cout);\n assign sum = a ^ b ^ cin;\n assign cout = (a & b) | (b & cin) | (a & cin);\nendmodule\n\
                   module add4(input [3:0] a, input [3:0] b, output [3:0] s, output co);\n wire [4:0] c;\n assign c[0] = 1'b0;\n\
                   full_adder f0(.a(a[0]), .b(b[0]), .cin(c[0]), .sum(s[0]), .cout(c[1]));\n\
                   full_adder f1(a[1], b[1], c[1], s[1], c[2]);\n\
                   full_adder f2(.a(a[2]), .b(b[2]), .cin(c[2]), .sum(s[2]), .cout(c[3]));\n\
                   full_adder f3(.a(a[3]), .b(b[3]), .cin(c[3]), .sum(s[3]), .cout(c[4]));\n\
                   assign co = c[4];\nendmodule\n";
        let d = parse_design(src).unwrap();
        assert_eq!(d.top().unwrap().name, "add4");
        for a in 0..16u64 {
            for b in 0..16u64 {
                let out = eval_module(&d, "add4", &sig(&[("a", a), ("b", b)])).unwrap();
                assert_eq!(out["s"] | (out["co"] << 4), a + b);
            }
        }
    }

    #[test]
    fn concat_lhs_with_addition() {
        let src = "module add(input [7:0] a, b, output [7:0] s, output c); assign {c, s} = a + b; endmodule";
        let d = parse_design(src).unwrap();
        let out = eval_module(&d, "add", &sig(&[("a", 200), ("b", 100)])).unwrap();
        assert_eq!((out["c"], out["s"]), (1, 44));
    }

    #[test]
    fn combinational_always_and_case() {
        let src = "module mux4(input [1:0] s, input [3:0] d, output reg y);\n always @(*) begin\n case (s)\n 2'd0: y = d[0];\n 2'd1: y = d[1];\n 2'd2: y = d[2];\n default: y = d[3];\n endcase\n end\nendmodule";
        let d = parse_design(src).unwrap();
        for s in 0..4u64 {
            let out = eval_module(&d, "mux4", &sig(&[("s", s), ("d", 1 << s)])).unwrap();
            assert_eq!(out["y"], 1);
        }
    }

    #[test]
    fn clocked_logic_is_rejected() {
        let src = "module r(input clk, input d, output reg q); always @(posedge clk) q <= d; endmodule";
        let d = parse_design(src).unwrap();
        assert!(matches!(
            eval_module(&d, "r", &sig(&[("clk", 0), ("d", 1)])),
            Err(HdlError::NotCombinational(_))
        ));
    }

    #[test]
    fn inverted_bits_mask_to_width() {
        let src = "module n(input [3:0] a, output [3:0] y, output z); assign y = ~a; assign z = ~a[0]; endmodule";
        let d = parse_design(src).unwrap();
        let out = eval_module(&d, "n", &sig(&[("a", 0b0101)])).unwrap();
        assert_eq!(out["y"], 0b1010);
        assert_eq!(out["z"], 0);
    }
}
