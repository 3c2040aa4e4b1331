use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::templates::fill;
use super::{Direction, Origin, PipelineError, Stage, SubComponent, TaskInput, Templates};
use crate::hdl::{parse_hdl, segment, BlockKind, CodeBlock, HdlLanguage};
use crate::providers::{GenRequest, TextGenerator};
use crate::symlogic::{extract_from_rtl, parse_bundle, Phi};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DivideTrace {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prompts: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replies: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

static ITEM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:[-*]\s*)?(?:\*\*)?(\d+)[.)]\s*(.+?)\s*$").unwrap());
static PHI: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:[-*]\s*)?(?:phi|φ|logic)\s*[:=]\s*(.+?)\s*$").unwrap());

/// Numbered items with their `phi:` lines, in reply order. Items without
/// a logic line get `None`.
pub fn parse_decomposition(reply: &str) -> Vec<(String, Option<String>)> {
    let mut out: Vec<(String, Option<String>)> = Vec::new();
    for line in reply.lines() {
        if let Some(c) = PHI.captures(line) {
            if let Some(last) = out.last_mut() {
                let text = c[1].trim().to_string();
                last.1 = Some(match last.1.take() {
                    Some(prev) => format!("{prev}; {text}"),
                    None => text,
                });
            }
        } else if let Some(c) = ITEM.captures(line) {
            let x = c[2].trim_end_matches("**").trim().trim_end_matches(':').trim();
            if !x.is_empty() {
                out.push((x.to_string(), None));
            }
        }
    }
    out
}

/// VHDL when the text declares an entity and an architecture.
pub fn detect_language(source: &str) -> HdlLanguage {
    let lower = source.to_ascii_lowercase();
    if lower.contains("entity") && lower.contains("architecture") {
        HdlLanguage::Vhdl
    } else {
        HdlLanguage::Verilog
    }
}

fn block_label(b: &CodeBlock) -> String {
    let kind = match b.kind {
        BlockKind::ContinuousAssign => "continuous assignments",
        BlockKind::AlwaysBlock => "procedural block",
        BlockKind::Instantiation => "sub-module instance",
        BlockKind::WholeModule => "module body",
        BlockKind::NetDecl | BlockKind::RegDecl | BlockKind::ParamDecl => "declarations",
    };
    if b.identifiers_written.is_empty() {
        kind.to_string()
    } else {
        let w: Vec<&str> = b.identifiers_written.iter().map(String::as_str).collect();
        format!("{kind} driving {}", w.join(", "))
    }
}

fn ask(generator: &dyn TextGenerator, prompt: String, trace: &mut DivideTrace) -> Result<String, PipelineError> {
    let reply = generator
        .generate(&GenRequest::new(prompt.clone()))
        .map_err(|source| PipelineError::Provider {
            stage: Stage::Divide,
            source,
        })?
        .text;
    trace.prompts.push(prompt);
    trace.replies.push(reply.clone());
    Ok(reply)
}

/// Splits a task into sub-components. Synthesis asks the provider for a
/// numbered decomposition; summarization segments the source, extracting
/// logic from combinational blocks and asking the provider for the rest.
pub fn divide(
    input: &TaskInput,
    generator: &dyn TextGenerator,
    templates: &Templates,
) -> Result<(Vec<SubComponent>, DivideTrace), PipelineError> {
    let mut trace = DivideTrace::default();
    let mut subs = Vec::new();
    match input.direction {
        Direction::Synthesis => {
            let n = input.n_hint.to_string();
            let prompt = fill(&templates.divide, &[("X", &input.x), ("N", &n)]);
            let reply = ask(generator, prompt, &mut trace)?;
            for (x, phi_text) in parse_decomposition(&reply) {
                let index = subs.len() + 1;
                let phi = match phi_text {
                    Some(t) => match parse_bundle(&t) {
                        Ok(b) if !b.is_empty() => Phi::Formal(b),
                        Ok(_) => Phi::Sketch(t),
                        Err(e) => {
                            trace
                                .notes
                                .push(format!("sub-component {index}: logic kept as sketch ({e})"));
                            Phi::Sketch(t)
                        }
                    },
                    None => {
                        trace
                            .notes
                            .push(format!("sub-component {index}: no logic line, description used as sketch"));
                        Phi::Sketch(x.clone())
                    }
                };
                subs.push(SubComponent {
                    index,
                    x,
                    phi,
                    origin: Origin::Llm,
                });
            }
            if subs.is_empty() {
                return Err(PipelineError::EmptyDecomposition { raw: reply });
            }
        }
        Direction::Summarization => {
            let lang = detect_language(&input.x);
            let design = parse_hdl(&input.x, lang).map_err(PipelineError::Source)?;
            let top = design
                .top()
                .ok_or_else(|| PipelineError::InvalidInput("source contains no module".into()))?;
            for block in segment(top) {
                let index = subs.len() + 1;
                let x = block_label(&block);
                let (phi, origin) = match extract_from_rtl(&block) {
                    Ok(b) if !b.is_empty() => (Phi::Formal(b), Origin::Ast),
                    other => {
                        if let Err(e) = other {
                            trace.notes.push(format!("block {index}: {e}; logic requested from provider"));
                        }
                        let prompt = fill(
                            &templates.describe,
                            &[("X", &input.x), ("x_i", &x), ("snippet", block.code())],
                        );
                        let reply = ask(generator, prompt, &mut trace)?;
                        (Phi::from_text(reply.trim()), Origin::Llm)
                    }
                };
                subs.push(SubComponent { index, x, phi, origin });
            }
            if subs.is_empty() {
                return Err(PipelineError::EmptyDecomposition { raw: input.x.clone() });
            }
        }
    }
    Ok((subs, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbered_items_with_logic() {
        let reply = "Plan:\n1. LSB half-adder\nphi: s0 = a0 ^ b0; c1 = a0 & b0\n2) Upper full-adders:\n   Phi = s = a ^ b ^ c\n3. glue\n";
        let items = parse_decomposition(reply);
        assert_eq!(items.len(), 3);
        assert_eq!(items[0], ("LSB half-adder".into(), Some("s0 = a0 ^ b0; c1 = a0 & b0".into())));
        assert_eq!(items[1].0, "Upper full-adders");
        assert_eq!(items[1].1.as_deref(), Some("s = a ^ b ^ c"));
        assert_eq!(items[2].1, None);
    }

    #[test]
    fn language_detection() {
        assert_eq!(detect_language("module m; endmodule"), HdlLanguage::Verilog);
        assert_eq!(
            detect_language("entity e is end entity; architecture rtl of e is begin end architecture;"),
            HdlLanguage::Vhdl
        );
    }
}
