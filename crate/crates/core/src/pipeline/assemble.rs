use serde::{Deserialize, Serialize};

use super::templates::fill;
use super::{Deps, Direction, PipelineError, Stage, SubTrace, TaskInput};
use crate::hdl::parse_hdl;
use crate::providers::{GenRequest, TextGenerator};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssembleTrace {
    pub prompts: Vec<String>,
    pub replies: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_errors: Vec<String>,
    /// Synthesis only: whether the final design parses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parses: Option<bool>,
}

/// The body of the first fenced code block, or the whole reply when it has
/// none; always ends with a newline.
pub fn extract_code(reply: &str) -> String {
    let mut lines = reply.lines();
    let mut body = Vec::new();
    let mut fenced = false;
    for line in lines.by_ref() {
        if line.trim_start().starts_with("```") {
            fenced = true;
            break;
        }
    }
    if fenced {
        for line in lines {
            if line.trim_start().starts_with("```") {
                break;
            }
            body.push(line);
        }
    }
    let text = if fenced { body.join("\n") } else { reply.to_string() };
    format!("{}\n", text.trim())
}

fn components(input: &TaskInput, subs: &[SubTrace], deps: &Deps) -> String {
    let template = match input.direction {
        Direction::Synthesis => &deps.templates.component_synth,
        Direction::Summarization => &deps.templates.component_summ,
    };
    subs.iter()
        .map(|t| {
            let entry = t
                .selected
                .as_ref()
                .and_then(|c| deps.index.get(&c.entry_id));
            let snippet = match (entry, input.direction) {
                (None, _) => "(no snippet retrieved)".to_string(),
                (Some(e), Direction::Synthesis) => e.y.trim_end().to_string(),
                (Some(e), Direction::Summarization) if e.d.is_empty() => e.y.trim_end().to_string(),
                (Some(e), Direction::Summarization) => format!("{}\nDescription: {}", e.y.trim_end(), e.d),
            };
            let i = t.sub.index.to_string();
            let phi = t.sub.phi.to_string();
            fill(
                template,
                &[("i", &i), ("x_i", &t.sub.x), ("phi_i", &phi), ("snippet", &snippet)],
            )
            .trim_end()
            .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn call(generator: &dyn TextGenerator, prompt: String, trace: &mut AssembleTrace) -> Result<String, PipelineError> {
    let reply = generator
        .generate(&GenRequest::new(prompt.clone()))
        .map_err(|source| PipelineError::Provider {
            stage: Stage::Assemble,
            source,
        })?
        .text;
    trace.prompts.push(prompt);
    trace.replies.push(reply.clone());
    Ok(reply)
}

/// Prompts for the final artifact. Synthesis output must parse in the
/// target language; one repair prompt is sent when it does not.
pub fn assemble(
    input: &TaskInput,
    subs: &[SubTrace],
    deps: &Deps,
) -> Result<(String, bool, AssembleTrace), PipelineError> {
    let mut trace = AssembleTrace::default();
    let comps = components(input, subs, deps);
    match input.direction {
        Direction::Summarization => {
            let prompt = fill(&deps.templates.assemble_summ, &[("X", input.x.trim_end()), ("components", &comps)]);
            let reply = call(deps.generator, prompt, &mut trace)?;
            Ok((format!("{}\n", reply.trim()), true, trace))
        }
        Direction::Synthesis => {
            let lang = input.target.hdl().unwrap_or(crate::hdl::HdlLanguage::Verilog);
            let label = input.target.label();
            let prompt = fill(
                &deps.templates.assemble_synth,
                &[("X", &input.x), ("components", &comps), ("language", label)],
            );
            let mut code = extract_code(&call(deps.generator, prompt, &mut trace)?);
            let mut parses = true;
            if let Err(e) = parse_hdl(&code, lang) {
                let error = e.to_string();
                trace.parse_errors.push(error.clone());
                let prompt = fill(
                    &deps.templates.repair,
                    &[("X", &input.x), ("candidate", code.trim_end()), ("error", &error), ("language", label)],
                );
                code = extract_code(&call(deps.generator, prompt, &mut trace)?);
                if let Err(e) = parse_hdl(&code, lang) {
                    trace.parse_errors.push(e.to_string());
                    parses = false;
                }
            }
            trace.parses = Some(parses);
            Ok((code, parses, trace))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_extraction() {
        assert_eq!(extract_code("```verilog\nmodule m;\nendmodule\n```\nthanks"), "module m;\nendmodule\n");
        assert_eq!(extract_code("  module m;\nendmodule"), "module m;\nendmodule\n");
    }
}
