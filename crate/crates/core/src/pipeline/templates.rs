use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::PipelineError;

/// Prompt templates with `{name}` placeholders. Each field corresponds to a
/// file `<name>.v1.txt`; a template directory overrides any subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    pub divide: String,
    pub describe: String,
    pub verify: String,
    pub component_synth: String,
    pub component_summ: String,
    pub assemble_synth: String,
    pub assemble_summ: String,
    pub repair: String,
}

const REQUIRED: [(&str, &[&str]); 8] = [
    ("divide", &["{X}", "{N}"]),
    ("describe", &["{snippet}"]),
    ("verify", &["{x_i}", "{phi_i}", "{snippet}"]),
    ("component_synth", &["{x_i}", "{phi_i}", "{snippet}"]),
    ("component_summ", &["{x_i}", "{phi_i}", "{snippet}"]),
    ("assemble_synth", &["{X}", "{components}"]),
    ("assemble_summ", &["{X}", "{components}"]),
    ("repair", &["{candidate}", "{error}"]),
];

impl Default for Templates {
    fn default() -> Self {
        Templates {
            divide: include_str!("../../templates/divide.v1.txt").into(),
            describe: include_str!("../../templates/describe.v1.txt").into(),
            verify: include_str!("../../templates/verify.v1.txt").into(),
            component_synth: include_str!("../../templates/component_synth.v1.txt").into(),
            component_summ: include_str!("../../templates/component_summ.v1.txt").into(),
            assemble_synth: include_str!("../../templates/assemble_synth.v1.txt").into(),
            assemble_summ: include_str!("../../templates/assemble_summ.v1.txt").into(),
            repair: include_str!("../../templates/repair.v1.txt").into(),
        }
    }
}

impl Templates {
    fn slots(&mut self) -> [(&'static str, &mut String); 8] {
        [
            ("divide", &mut self.divide),
            ("describe", &mut self.describe),
            ("verify", &mut self.verify),
            ("component_synth", &mut self.component_synth),
            ("component_summ", &mut self.component_summ),
            ("assemble_synth", &mut self.assemble_synth),
            ("assemble_summ", &mut self.assemble_summ),
            ("repair", &mut self.repair),
        ]
    }

    /// Built-in templates overridden by any `<name>.v1.txt` found in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, PipelineError> {
        let mut t = Templates::default();
        for (name, slot) in t.slots() {
            let path = dir.join(format!("{name}.v1.txt"));
            if path.is_file() {
                *slot = fs::read_to_string(&path)
                    .map_err(|e| PipelineError::Template(format!("{}: {e}", path.display())))?;
            }
        }
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let mut t = self.clone();
        for ((name, text), (_, required)) in t.slots().into_iter().zip(REQUIRED) {
            for p in required {
                if !text.contains(p) {
                    return Err(PipelineError::Template(format!("template `{name}` lacks {p}")));
                }
            }
        }
        Ok(())
    }

    /// Short content hash per template, recorded in traces.
    pub fn digests(&self) -> BTreeMap<String, String> {
        let mut t = self.clone();
        t.slots()
            .into_iter()
            .map(|(name, text)| {
                let h = hex::encode(Sha256::digest(text.as_bytes()));
                (format!("{name}.v1"), h[..12].to_string())
            })
            .collect()
    }
}

/// Substitutes `{key}` placeholders in a single pass, so inserted values
/// are never re-expanded.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let hit = after.find('}').and_then(|end| {
            let key = &after[..end];
            vars.iter().find(|(k, _)| *k == key).map(|(_, v)| (end, *v))
        });
        match hit {
            Some((end, v)) => {
                out.push_str(v);
                rest = &after[end + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        Templates::default().validate().unwrap();
        assert_eq!(Templates::default().digests().len(), 8);
    }

    #[test]
    fn fill_is_single_pass() {
        assert_eq!(fill("a {X} b {N} {q}", &[("X", "{N}"), ("N", "4")]), "a {N} b 4 {q}");
    }

    #[test]
    fn directory_overrides() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("verify.v1.txt"), "score {x_i} {phi_i} {snippet}").unwrap();
        let t = Templates::load_dir(dir.path()).unwrap();
        assert_eq!(t.verify, "score {x_i} {phi_i} {snippet}");
        fs::write(dir.path().join("repair.v1.txt"), "fix it").unwrap();
        assert!(Templates::load_dir(dir.path()).is_err());
    }
}
