//! HDL front end: parsing, segmentation into functional blocks, emission,
//! and combinational evaluation for a synthesizable Verilog subset and a
//! small VHDL subset.

mod ast;
mod emit;
mod lexer;
mod parser;
mod segment;
pub mod sim;
mod vhdl;

use std::path::Path;

use thiserror::Error;

pub use ast::*;
pub use emit::{emit, emit_design, expr as emit_expr};
pub use parser::{is_keyword, parse_design, parse_verilog, VERILOG_KEYWORDS};
pub use segment::{
    extract_identifiers, header_footer, segment, whole_module_block, BlockKind, CodeBlock,
    IdentRole,
};
pub use vhdl::{parse_vhdl, VHDL_KEYWORDS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HdlError {
    #[error("syntax error at {line}:{col} near `{token}`: {message}")]
    Syntax {
        line: usize,
        col: usize,
        token: String,
        message: String,
    },
    #[error("unsupported construct at {line}:{col}: {construct}")]
    Unsupported {
        construct: String,
        line: usize,
        col: usize,
    },
    #[error("identifier `{name}` is not declared in module `{module}`")]
    Undeclared { name: String, module: String },
    #[error("duplicate {what} `{name}`")]
    Duplicate { name: String, what: String },
    #[error("module `{0}` contains sequential logic")]
    NotCombinational(String),
    #[error("design has {bits} input bits; the limit is {limit}")]
    TooManyInputs { bits: u32, limit: u32 },
    #[error("evaluation failed: {0}")]
    Eval(String),
}

/// Parses a design in either language. VHDL sources always hold one unit.
pub fn parse_hdl(source: &str, language: HdlLanguage) -> Result<Design, HdlError> {
    match language {
        HdlLanguage::Verilog => parse_design(source),
        HdlLanguage::Vhdl => Ok(Design {
            modules: vec![parse_vhdl(source)?],
        }),
    }
}

/// Language implied by a file extension (`.v`, `.sv`, `.vhd`, `.vhdl`).
pub fn language_for_path(path: &Path) -> Option<HdlLanguage> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "v" | "sv" => Some(HdlLanguage::Verilog),
        "vhd" | "vhdl" => Some(HdlLanguage::Vhdl),
        _ => None,
    }
}
