//! Built-in functional check of a combinational design against a vector
//! file. Not an HDL simulator: it evaluates the top module with the
//! two-state evaluator.
//!
//! Format: `#` comments, one header line naming the input then output
//! ports separated by `:`, then one line per vector with hexadecimal
//! values in the same order. `x` in an output column means don't-care.
//!
//! ```text
//! a b : sum carry
//! 1 1 : 0 1
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hdl::sim::{eval_module, Signals};
use crate::hdl::{parse_hdl, HdlError, HdlLanguage};

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("vector file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("design: {0}")]
    Design(#[from] HdlError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorSet {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// (line, input values, expected outputs; `None` is don't-care)
    pub rows: Vec<(usize, Vec<u64>, Vec<Option<u64>>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorReport {
    pub total: usize,
    pub failures: Vec<String>,
}

impl VectorReport {
    pub fn passed(&self) -> bool {
        self.total > 0 && self.failures.is_empty()
    }
}

fn hex(token: &str, line: usize) -> Result<u64, VectorError> {
    u64::from_str_radix(token.trim_start_matches("0x"), 16).map_err(|e| VectorError::Format {
        line,
        message: format!("`{token}`: {e}"),
    })
}

pub fn parse_vectors(text: &str) -> Result<VectorSet, VectorError> {
    let mut header: Option<(Vec<String>, Vec<String>)> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (lhs, rhs) = content.split_once(':').ok_or_else(|| VectorError::Format {
            line,
            message: "missing `:` between inputs and outputs".into(),
        })?;
        let lhs: Vec<&str> = lhs.split_whitespace().collect();
        let rhs: Vec<&str> = rhs.split_whitespace().collect();
        match &header {
            None => {
                header = Some((
                    lhs.iter().map(|s| s.to_string()).collect(),
                    rhs.iter().map(|s| s.to_string()).collect(),
                ))
            }
            Some((ins, outs)) => {
                if lhs.len() != ins.len() || rhs.len() != outs.len() {
                    return Err(VectorError::Format {
                        line,
                        message: format!("expected {} inputs and {} outputs", ins.len(), outs.len()),
                    });
                }
                let i: Vec<u64> = lhs.iter().map(|t| hex(t, line)).collect::<Result<_, _>>()?;
                let o: Vec<Option<u64>> = rhs
                    .iter()
                    .map(|t| {
                        if t.eq_ignore_ascii_case("x") {
                            Ok(None)
                        } else {
                            hex(t, line).map(Some)
                        }
                    })
                    .collect::<Result<_, _>>()?;
                rows.push((line, i, o));
            }
        }
    }
    let (inputs, outputs) = header.ok_or(VectorError::Format {
        line: 0,
        message: "no header line".into(),
    })?;
    Ok(VectorSet { inputs, outputs, rows })
}

/// Evaluates the design's top module on every vector.
pub fn check_vectors(design: &str, language: HdlLanguage, vectors: &VectorSet) -> Result<VectorReport, VectorError> {
    let d = parse_hdl(design, language)?;
    let top = d
        .top()
        .ok_or_else(|| HdlError::Eval("design contains no module".into()))?;
    for name in vectors.inputs.iter().chain(&vectors.outputs) {
        if top.port(name).is_none() {
            return Err(HdlError::Eval(format!("module `{}` has no port `{name}`", top.name)).into());
        }
    }
    let mut failures = Vec::new();
    for (line, ins, outs) in &vectors.rows {
        let env: Signals = vectors.inputs.iter().cloned().zip(ins.iter().copied()).collect();
        let got = eval_module(&d, &top.name, &env)?;
        for (name, want) in vectors.outputs.iter().zip(outs) {
            if let Some(w) = want {
                if got[name] != *w {
                    failures.push(format!("line {line}: {name} = {:x}, expected {w:x}", got[name]));
                }
            }
        }
    }
    Ok(VectorReport {
        total: vectors.rows.len(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HA: &str = "module half_adder(input a, b, output sum, carry);\n assign sum = a ^ b;\n assign carry = a & b;\nendmodule\n";

    #[test]
    fn half_adder_vectors() {
        let v = parse_vectors("# ha\na b : sum carry\n0 0 : 0 0\n0 1 : 1 0\n1 0 : 1 x\n1 1 : 0 1\n").unwrap();
        let r = check_vectors(HA, HdlLanguage::Verilog, &v).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let bad = parse_vectors("a b : sum carry\n1 1 : 1 1\n").unwrap();
        let r = check_vectors(HA, HdlLanguage::Verilog, &bad).unwrap();
        assert_eq!(r.failures.len(), 1);
    }

    #[test]
    fn malformed_files() {
        assert!(parse_vectors("").is_err());
        assert!(parse_vectors("a b sum\n").is_err());
        assert!(parse_vectors("a : y\n1 1 : 0\n").is_err());
        assert!(parse_vectors("a : y\nz : 0\n").is_err());
    }
}
