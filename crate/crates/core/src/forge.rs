//! Training-pair construction: identifier renaming, statement reordering
//! with inert code, partial-to-complete pairs, and exhaustive functional
//! equivalence checking for combinational designs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::hdl::sim::{eval_module, input_space, Signals};
use crate::hdl::{
    emit_design, extract_identifiers, header_footer, is_keyword, parse_hdl, AstItem, BinaryOp,
    Connections, Design, Direction, Expr, HdlError, HdlLanguage, Literal, ModuleAst, Range,
    Sensitivity, UnaryOp, VHDL_KEYWORDS,
};
use crate::providers::{GenRequest, ProviderError, TextGenerator};

/// Whitespace-token bound for partial-to-complete sources (exclusive).
pub const PC_TOKEN_LIMIT: usize = 1024;

/// Input-bit bound for exhaustive equivalence checking.
pub const EQUIV_INPUT_LIMIT: u32 = 16;

const PROBLEM_TEMPLATE: &str = include_str!("../templates/forge_problem.v1.txt");
const SUMMARY_TEMPLATE: &str = include_str!("../templates/forge_summary.v1.txt");

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error(transparent)]
    Parse(HdlError),
    #[error("module `{0}` contains sequential logic")]
    NotCombinational(String),
    #[error("design has {bits} input bits; the limit is {limit}")]
    TooManyInputs { bits: u32, limit: u32 },
    #[error("source has {tokens} whitespace tokens; the limit is {limit} (exclusive)")]
    TooLarge { tokens: usize, limit: usize },
    #[error("top module has {items} item(s); at least 2 are needed")]
    TooSmall { items: usize },
    #[error("design contains no module")]
    EmptyDesign,
    #[error("tool unavailable: {0}")]
    ToolUnavailable(String),
    #[error("tool failed: {0}")]
    ToolFailed(String),
    #[error("provider returned empty text")]
    EmptyText,
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<HdlError> for ForgeError {
    fn from(e: HdlError) -> Self {
        match e {
            HdlError::NotCombinational(m) => ForgeError::NotCombinational(m),
            HdlError::TooManyInputs { bits, limit } => ForgeError::TooManyInputs { bits, limit },
            other => ForgeError::Parse(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairType {
    #[serde(rename = "TC")]
    TextToCode,
    #[serde(rename = "CS")]
    CodeToSummary,
    #[serde(rename = "FEC")]
    Equivalent,
    #[serde(rename = "PC")]
    PartialToComplete,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub transform: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Equivalence-check outcome; `None` when the check was not applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalent: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    #[serde(rename = "type")]
    pub pair_type: PairType,
    pub source: String,
    pub target: String,
    pub provenance: Provenance,
}

impl PairRecord {
    fn new(pair_type: PairType, source: String, target: String, provenance: Provenance) -> Result<Self, ForgeError> {
        if source.trim().is_empty() || target.trim().is_empty() {
            return Err(ForgeError::EmptyText);
        }
        Ok(PairRecord {
            pair_type,
            source,
            target,
            provenance,
        })
    }
}

pub fn write_jsonl(records: &[PairRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("pair records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl(text: &str) -> Result<Vec<PairRecord>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

fn parse(source: &str, language: HdlLanguage) -> Result<Design, ForgeError> {
    let design = parse_hdl(source, language)?;
    if design.modules.is_empty() {
        return Err(ForgeError::EmptyDesign);
    }
    Ok(design)
}

// Readable-name generation

const ADJECTIVES: &[&str] = &[
    "amber", "brisk", "calm", "deft", "eager", "fleet", "grand", "hazy", "ivory", "jolly", "keen",
    "lucid", "mellow", "noble", "opal", "prime", "quiet", "rapid", "solid", "tidy", "umber",
    "vivid", "warm", "zesty",
];

const NOUNS: &[&str] = &[
    "beacon", "bridge", "channel", "delta", "ember", "flux", "gate", "harbor", "ingot", "junction",
    "kernel", "lane", "matrix", "node", "orbit", "pulse", "quartz", "relay", "strand", "token",
    "unit", "vector", "wave", "zone",
];

fn reserved(name: &str) -> bool {
    is_keyword(name) || VHDL_KEYWORDS.contains(&name)
}

struct NameGen {
    rng: ChaCha8Rng,
    taken: BTreeSet<String>,
}

impl NameGen {
    fn new(seed: u64, taken: BTreeSet<String>) -> Self {
        NameGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            taken,
        }
    }

    fn fresh_word(&mut self) -> String {
        let a = ADJECTIVES[self.rng.random_range(0..ADJECTIVES.len())];
        let n = NOUNS[self.rng.random_range(0..NOUNS.len())];
        format!("{a}_{n}")
    }

    fn abbreviate(name: &str) -> String {
        name.split('_')
            .filter(|p| !p.is_empty())
            .map(|p| {
                let mut chars = p.chars();
                let first = chars.next().unwrap_or('x');
                let rest: String = chars.filter(|c| !"aeiouAEIOU".contains(*c)).collect();
                format!("{first}{rest}")
            })
            .collect::<Vec<_>>()
            .join("_")
    }

    /// Single-character names get a fresh readable name; longer names are
    /// abbreviated, have their parts permuted, or get a prefix.
    fn candidate(&mut self, original: &str) -> String {
        if original.chars().count() == 1 {
            return self.fresh_word();
        }
        let parts: Vec<&str> = original.split('_').filter(|p| !p.is_empty()).collect();
        match self.rng.random_range(0..3) {
            0 => Self::abbreviate(original),
            1 if parts.len() > 1 => {
                let mut p = parts.clone();
                p.rotate_left(1 + self.rng.random_range(0..parts.len() - 1));
                p.join("_")
            }
            _ => {
                let a = ADJECTIVES[self.rng.random_range(0..ADJECTIVES.len())];
                format!("{a}_{original}")
            }
        }
    }

    fn acceptable(&self, name: &str, original: &str) -> bool {
        let valid = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !name.contains("__")
            && !name.ends_with('_');
        valid
            && name != original
            && !reserved(name)
            && !self.taken.contains(&name.to_ascii_lowercase())
    }

    fn name_for(&mut self, original: &str) -> String {
        for _ in 0..8 {
            let c = self.candidate(original).to_ascii_lowercase();
            if self.acceptable(&c, original) {
                self.taken.insert(c.clone());
                return c;
            }
        }
        let base = self.fresh_word();
        let mut n = 0u32;
        loop {
            let c = if n == 0 { base.clone() } else { format!("{base}_{n}") };
            if self.acceptable(&c, original) {
                self.taken.insert(c.clone());
                return c;
            }
            n += 1;
        }
    }
}

// Renaming

fn rename_range(r: &mut Option<Range>, f: &dyn Fn(&str) -> Option<String>) {
    if let Some(r) = r {
        r.msb.rename(f);
        r.lsb.rename(f);
    }
}

fn rename_module(m: &mut ModuleAst, map: &BTreeMap<String, String>, local_modules: &BTreeSet<String>) {
    let f = |n: &str| map.get(n).cloned();
    let apply = |n: &mut String| {
        if let Some(new) = map.get(n.as_str()) {
            *n = new.clone();
        }
    };
    apply(&mut m.name);
    for p in &mut m.params {
        apply(&mut p.name);
        p.value.rename(&f);
    }
    for p in &mut m.ports {
        apply(&mut p.name);
        rename_range(&mut p.range, &f);
    }
    for item in &mut m.items {
        match item {
            AstItem::NetDecl { range, names } | AstItem::RegDecl { range, names } => {
                rename_range(range, &f);
                names.iter_mut().for_each(apply);
            }
            AstItem::ParamDecl { assigns, .. } => {
                for a in assigns {
                    apply(&mut a.name);
                    a.value.rename(&f);
                }
            }
            AstItem::ContinuousAssign { lhs, rhs } => {
                lhs.rename(&f);
                rhs.rename(&f);
            }
            AstItem::AlwaysBlock { sensitivity, body } => {
                if let Sensitivity::List(items) = sensitivity {
                    items.iter_mut().for_each(|i| apply(&mut i.signal));
                }
                body.rename(&f);
            }
            AstItem::Instantiation {
                module,
                params,
                instance,
                connections,
            } => {
                let local = local_modules.contains(module.as_str());
                if local {
                    apply(module);
                }
                params.iter_mut().for_each(|p| p.rename(&f));
                apply(instance);
                match connections {
                    Connections::Positional(exprs) => exprs.iter_mut().for_each(|e| e.rename(&f)),
                    Connections::Named(pairs) => {
                        for (port, e) in pairs {
                            if local {
                                apply(port);
                            }
                            if let Some(e) = e {
                                e.rename(&f);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Consistently renames every user identifier of every module in `source`.
/// Returns the emitted text and the old-to-new name map.
pub fn type2_rename(
    source: &str,
    language: HdlLanguage,
    seed: u64,
) -> Result<(String, BTreeMap<String, String>), ForgeError> {
    let mut design = parse(source, language)?;
    let originals: BTreeSet<String> = design
        .modules
        .iter()
        .flat_map(|m| extract_identifiers(m).into_keys())
        .collect();
    let local_modules: BTreeSet<String> = design.modules.iter().map(|m| m.name.clone()).collect();
    let taken = originals.iter().map(|s| s.to_ascii_lowercase()).collect();
    let mut gen = NameGen::new(seed, taken);
    let map: BTreeMap<String, String> = originals
        .iter()
        .map(|o| (o.clone(), gen.name_for(o)))
        .collect();
    for m in &mut design.modules {
        rename_module(m, &map, &local_modules);
    }
    let text = emit_design(&design);
    parse(&text, language)?;
    Ok((text, map))
}

// Reordering and inert code

fn fresh_inert_name(taken: &mut BTreeSet<String>, rng: &mut ChaCha8Rng) -> String {
    loop {
        let n = NOUNS[rng.random_range(0..NOUNS.len())];
        let c = format!("spare_{n}_{}", rng.random_range(0..100));
        if !taken.contains(&c) && !reserved(&c) {
            taken.insert(c.clone());
            return c;
        }
    }
}

fn reorder_module(m: &mut ModuleAst, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut notes = Vec::new();
    let mut params = Vec::new();
    let mut decls = Vec::new();
    let mut rest = Vec::new();
    for item in m.items.drain(..) {
        match item {
            AstItem::ParamDecl { .. } => params.push(item),
            AstItem::NetDecl { .. } | AstItem::RegDecl { .. } => decls.push(item),
            _ => rest.push(item),
        }
    }
    let before_decls = decls.clone();
    let before_rest = rest.clone();
    decls.shuffle(rng);
    rest.shuffle(rng);
    if decls != before_decls {
        notes.push(format!("{}: declarations permuted", m.name));
    }
    if rest != before_rest {
        notes.push(format!("{}: concurrent items permuted", m.name));
    }

    let mut taken: BTreeSet<String> = extract_identifiers(m).into_keys().collect();
    for item in params.iter().chain(&decls).chain(&rest) {
        taken.extend(item.declared_names().into_iter().map(String::from));
    }
    let driver = m
        .inputs()
        .next()
        .map(|p| (p.name.clone(), p.range.clone()));
    let mut inert_decls = Vec::new();
    let mut inert_assigns = Vec::new();
    for _ in 0..rng.random_range(0..=2u32) {
        let name = fresh_inert_name(&mut taken, rng);
        let with_assign = rng.random_bool(0.5);
        match (&driver, with_assign) {
            (Some((input, range)), true) => {
                inert_decls.push(AstItem::NetDecl {
                    range: range.clone(),
                    names: vec![name.clone()],
                });
                inert_assigns.push(AstItem::ContinuousAssign {
                    lhs: Expr::ident(&name),
                    rhs: Expr::ident(input),
                });
                notes.push(format!("{}: inert assign to `{name}`", m.name));
            }
            (None, true) => {
                inert_decls.push(AstItem::NetDecl {
                    range: None,
                    names: vec![name.clone()],
                });
                inert_assigns.push(AstItem::ContinuousAssign {
                    lhs: Expr::ident(&name),
                    rhs: Expr::Number(Literal::from_bit(false)),
                });
                notes.push(format!("{}: inert assign to `{name}`", m.name));
            }
            (_, false) => {
                inert_decls.push(AstItem::NetDecl {
                    range: None,
                    names: vec![name.clone()],
                });
                notes.push(format!("{}: unused wire `{name}`", m.name));
            }
        }
    }
    m.items = params
        .into_iter()
        .chain(decls)
        .chain(inert_decls)
        .chain(rest)
        .chain(inert_assigns)
        .collect();
    notes
}

/// Permutes declarations and concurrent items (parameters stay first, in
/// order) and injects up to two inert items per module.
pub fn type3_transform(source: &str, language: HdlLanguage, seed: u64) -> Result<String, ForgeError> {
    type3_with_notes(source, language, seed).map(|(t, _)| t)
}

fn type3_with_notes(
    source: &str,
    language: HdlLanguage,
    seed: u64,
) -> Result<(String, Vec<String>), ForgeError> {
    let mut design = parse(source, language)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut notes = Vec::new();
    for m in &mut design.modules {
        notes.extend(reorder_module(m, &mut rng));
    }
    let text = emit_design(&design);
    parse(&text, language)?;
    Ok((text, notes))
}

// Equivalence

fn port_widths(m: &ModuleAst, dir: Direction) -> Result<Vec<(String, u32)>, HdlError> {
    m.ports
        .iter()
        .filter(|p| p.direction == dir)
        .map(|p| Ok((p.name.clone(), m.port_width(p)?)))
        .collect()
}

/// Exhaustive equivalence of the top modules of two designs. Ports are
/// matched by position; differing interfaces are not equivalent.
pub fn check_equiv_designs(a: &Design, b: &Design) -> Result<bool, ForgeError> {
    let ta = a.top().ok_or(ForgeError::EmptyDesign)?;
    let tb = b.top().ok_or(ForgeError::EmptyDesign)?;
    for m in [ta, tb] {
        if !m.is_combinational() {
            return Err(ForgeError::NotCombinational(m.name.clone()));
        }
    }
    let (ia, ib) = (port_widths(ta, Direction::Input)?, port_widths(tb, Direction::Input)?);
    let (oa, ob) = (port_widths(ta, Direction::Output)?, port_widths(tb, Direction::Output)?);
    let space = input_space(ta, EQUIV_INPUT_LIMIT)?;
    let widths = |v: &[(String, u32)]| v.iter().map(|x| x.1).collect::<Vec<_>>();
    if widths(&ia) != widths(&ib) || widths(&oa) != widths(&ob) {
        return Ok(false);
    }
    for inputs in space {
        let mapped: Signals = ia
            .iter()
            .zip(&ib)
            .map(|((na, _), (nb, _))| (nb.clone(), inputs[na]))
            .collect();
        let ra = eval_module(a, &ta.name, &inputs)?;
        let rb = eval_module(b, &tb.name, &mapped)?;
        if oa.iter().zip(&ob).any(|((na, _), (nb, _))| ra[na] != rb[nb]) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn check_equiv(original: &str, transformed: &str, language: HdlLanguage) -> Result<bool, ForgeError> {
    check_equiv_designs(&parse(original, language)?, &parse(transformed, language)?)
}

// Mutants

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutantKind {
    /// One `&`, `|` or `^` replaced by a different gate.
    GateSwap,
    /// An inverter inserted on the driver of an output port.
    OutputInversion,
}

fn gate_sites(e: &Expr, out: &mut usize) {
    match e {
        Expr::Binary(op, a, b) => {
            if matches!(op, BinaryOp::And | BinaryOp::Or | BinaryOp::Xor) {
                *out += 1;
            }
            gate_sites(a, out);
            gate_sites(b, out);
        }
        Expr::Unary(_, a) => gate_sites(a, out),
        Expr::Ternary(c, t, f) => {
            gate_sites(c, out);
            gate_sites(t, out);
            gate_sites(f, out);
        }
        Expr::Concat(parts) | Expr::Replicate(_, parts) => parts.iter().for_each(|p| gate_sites(p, out)),
        _ => {}
    }
}

fn swap_gate(e: &mut Expr, target: &mut usize) -> bool {
    match e {
        Expr::Binary(op, a, b) => {
            if matches!(op, BinaryOp::And | BinaryOp::Or | BinaryOp::Xor) {
                if *target == 0 {
                    *op = match op {
                        BinaryOp::And => BinaryOp::Or,
                        BinaryOp::Or => BinaryOp::And,
                        _ => BinaryOp::And,
                    };
                    return true;
                }
                *target -= 1;
            }
            swap_gate(a, target) || swap_gate(b, target)
        }
        Expr::Unary(_, a) => swap_gate(a, target),
        Expr::Ternary(c, t, f) => swap_gate(c, target) || swap_gate(t, target) || swap_gate(f, target),
        Expr::Concat(parts) | Expr::Replicate(_, parts) => {
            parts.iter_mut().any(|p| swap_gate(p, target))
        }
        _ => false,
    }
}

/// Applies one seeded single-gate change to the top module's continuous
/// assigns. `None` when the requested kind has no site.
pub fn inject_gate_mutant(
    source: &str,
    language: HdlLanguage,
    kind: MutantKind,
    seed: u64,
) -> Result<Option<String>, ForgeError> {
    let mut design = parse(source, language)?;
    let top_name = design.top().ok_or(ForgeError::EmptyDesign)?.name.clone();
    let top = design
        .modules
        .iter_mut()
        .find(|m| m.name == top_name)
        .expect("top exists");
    let outputs: BTreeSet<String> = top.outputs().map(|p| p.name.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        MutantKind::OutputInversion => {
            let sites: Vec<usize> = top
                .items
                .iter()
                .enumerate()
                .filter(|(_, i)| {
                    matches!(i, AstItem::ContinuousAssign { lhs: Expr::Ident(n), .. } if outputs.contains(n))
                })
                .map(|(i, _)| i)
                .collect();
            if sites.is_empty() {
                return Ok(None);
            }
            let at = sites[rng.random_range(0..sites.len())];
            if let AstItem::ContinuousAssign { rhs, .. } = &mut top.items[at] {
                *rhs = Expr::Unary(UnaryOp::Not, Box::new(rhs.clone()));
            }
        }
        MutantKind::GateSwap => {
            let mut total = 0;
            for item in &top.items {
                if let AstItem::ContinuousAssign { rhs, .. } = item {
                    gate_sites(rhs, &mut total);
                }
            }
            if total == 0 {
                return Ok(None);
            }
            let mut target = rng.random_range(0..total);
            for item in &mut top.items {
                if let AstItem::ContinuousAssign { rhs, .. } = item {
                    if swap_gate(rhs, &mut target) {
                        break;
                    }
                }
            }
        }
    }
    Ok(Some(emit_design(&design)))
}

// Pair builders

fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// One partial-to-complete pair: the partial keeps the header, ports and a
/// seeded strict prefix of the top module's items. A seeded coin applies a
/// renaming to the complete side.
pub fn make_pc_pairs(source: &str, language: HdlLanguage, seed: u64) -> Result<Vec<PairRecord>, ForgeError> {
    let tokens = whitespace_tokens(source);
    if tokens >= PC_TOKEN_LIMIT {
        return Err(ForgeError::TooLarge {
            tokens,
            limit: PC_TOKEN_LIMIT,
        });
    }
    let design = parse(source, language)?;
    let top = design.top().ok_or(ForgeError::EmptyDesign)?;
    let n = top.items.len();
    if n < 2 {
        return Err(ForgeError::TooSmall { items: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = rng.random_range(1..n);
    let cut = top.item_spans[keep - 1].end();
    let (_, footer) = header_footer(top);
    let footer_start = top.source_span.end() - footer.len();
    let partial = format!("{}{}", &source[..cut], &source[footer_start..]);

    let mut notes = vec![
        format!("kept {keep} of {n} items"),
        format!("{tokens} whitespace tokens"),
    ];
    let rename = rng.random_bool(0.5);
    let complete = if rename {
        let (text, map) = type2_rename(source, language, seed)?;
        notes.push(format!("complete renamed ({} identifiers)", map.len()));
        text
    } else {
        source.to_string()
    };
    let provenance = Provenance {
        transform: if rename { "partial+type2".into() } else { "partial".into() },
        seed: Some(seed),
        equivalent: None,
        notes,
    };
    Ok(vec![PairRecord::new(PairType::PartialToComplete, partial, complete, provenance)?])
}

fn equivalence_outcome(
    source: &str,
    target: &str,
    language: HdlLanguage,
    notes: &mut Vec<String>,
) -> Result<Option<bool>, ForgeError> {
    match check_equiv(source, target, language) {
        Ok(v) => Ok(Some(v)),
        Err(e @ (ForgeError::NotCombinational(_) | ForgeError::TooManyInputs { .. })) => {
            notes.push(format!("equivalence not checked: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Type-2 and Type-3 functionally equivalent pairs, each carrying its
/// equivalence-check result.
pub fn make_fec_pairs(source: &str, language: HdlLanguage, seed: u64) -> Result<Vec<PairRecord>, ForgeError> {
    let (renamed, map) = type2_rename(source, language, seed)?;
    let mut notes = vec![format!("{} identifiers renamed", map.len())];
    let equivalent = equivalence_outcome(source, &renamed, language, &mut notes)?;
    let type2 = PairRecord::new(
        PairType::Equivalent,
        source.to_string(),
        renamed,
        Provenance {
            transform: "type2".into(),
            seed: Some(seed),
            equivalent,
            notes,
        },
    )?;

    let (reordered, mut notes) = type3_with_notes(source, language, seed)?;
    let equivalent = equivalence_outcome(source, &reordered, language, &mut notes)?;
    let type3 = PairRecord::new(
        PairType::Equivalent,
        source.to_string(),
        reordered,
        Provenance {
            transform: "type3".into(),
            seed: Some(seed),
            equivalent,
            notes,
        },
    )?;
    Ok(vec![type2, type3])
}

fn generate(generator: &dyn TextGenerator, template: &str, code: &str) -> Result<String, ForgeError> {
    let prompt = template.replace("{code}", code.trim_end());
    let text = generator.generate(&GenRequest::new(prompt))?.text;
    let text = text.trim().to_string();
    if text.is_empty() {
        return Err(ForgeError::EmptyText);
    }
    Ok(text)
}

/// A problem statement written by the provider for `source`, paired with it.
pub fn make_tc_pair(source: &str, generator: &dyn TextGenerator) -> Result<PairRecord, ForgeError> {
    let statement = generate(generator, PROBLEM_TEMPLATE, source)?;
    PairRecord::new(
        PairType::TextToCode,
        statement,
        source.to_string(),
        Provenance {
            transform: format!("problem-statement via {} provider", generator.kind()),
            ..Provenance::default()
        },
    )
}

/// `source` paired with a provider-written summary.
pub fn make_cs_pair(source: &str, generator: &dyn TextGenerator) -> Result<PairRecord, ForgeError> {
    let summary = generate(generator, SUMMARY_TEMPLATE, source)?;
    PairRecord::new(
        PairType::CodeToSummary,
        source.to_string(),
        summary,
        Provenance {
            transform: format!("summary via {} provider", generator.kind()),
            ..Provenance::default()
        },
    )
}

// Back-translation

/// Shell templates with `{input}` and `{output}` placeholders that translate
/// between the two languages.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Type4Config {
    pub verilog_to_vhdl: Option<String>,
    pub vhdl_to_verilog: Option<String>,
    pub timeout_secs: Option<f64>,
}

/// Translates `source` into the other language with the configured tool and
/// checks the result parses.
pub fn type4_translate(source: &str, from: HdlLanguage, cfg: &Type4Config) -> Result<String, ForgeError> {
    let (template, to, ext_in, ext_out) = match from {
        HdlLanguage::Verilog => (&cfg.verilog_to_vhdl, HdlLanguage::Vhdl, "v", "vhd"),
        HdlLanguage::Vhdl => (&cfg.vhdl_to_verilog, HdlLanguage::Verilog, "vhd", "v"),
    };
    let Some(template) = template else {
        return Err(ForgeError::ToolUnavailable(format!("no {from:?} back-translation command configured")));
    };
    let program = template.split_whitespace().next().unwrap_or("");
    if which::which(program).is_err() {
        return Err(ForgeError::ToolUnavailable(format!("`{program}` not found on PATH")));
    }
    let dir = tempfile::tempdir()?;
    let input = dir.path().join(format!("input.{ext_in}"));
    let output = dir.path().join(format!("output.{ext_out}"));
    std::fs::write(&input, source)?;
    let command = template
        .replace("{input}", &shell_quote(&input))
        .replace("{output}", &shell_quote(&output));
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()?;
    let timeout = Duration::from_secs_f64(cfg.timeout_secs.unwrap_or(60.0));
    let status = match child.wait_timeout(timeout)? {
        Some(s) => s,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ForgeError::ToolFailed(format!("`{program}` timed out")));
        }
    };
    if !status.success() {
        return Err(ForgeError::ToolFailed(format!("`{program}` exited with {status}")));
    }
    let text = std::fs::read_to_string(&output)?;
    parse(&text, to)?;
    Ok(text)
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

// Corpus statistics

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub text_to_code: usize,
    pub equivalent: usize,
    pub code_to_summary: usize,
    pub partial_to_complete: usize,
}

impl CorpusStats {
    pub fn from_records(records: &[PairRecord]) -> Self {
        let count = |t: PairType| records.iter().filter(|r| r.pair_type == t).count();
        CorpusStats {
            total: records.len(),
            text_to_code: count(PairType::TextToCode),
            equivalent: count(PairType::Equivalent),
            code_to_summary: count(PairType::CodeToSummary),
            partial_to_complete: count(PairType::PartialToComplete),
        }
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("# Total Size", self.total),
            ("# Text-to-Code Pairs", self.text_to_code),
            ("# FEC Pairs", self.equivalent),
            ("# Code-to-Summary Pairs", self.code_to_summary),
            ("# Partial-to-Complete Code Pairs", self.partial_to_complete),
        ];
        let mut out = String::new();
        for (label, n) in rows {
            let _ = writeln!(out, "{label:<34}{n:>8}");
        }
        out
    }
}

/// Outcome of forging pairs from a set of sources.
#[derive(Debug, Default)]
pub struct ForgeRun {
    pub records: Vec<PairRecord>,
    /// Source name and the reason it produced fewer pairs.
    pub skipped: Vec<(String, String)>,
}

/// FEC and PC pairs for each `(name, text, language)` source, plus TC and CS
/// pairs when a generator is supplied.
pub fn forge_corpus(
    sources: &[(String, String, HdlLanguage)],
    seed: u64,
    generator: Option<&dyn TextGenerator>,
) -> ForgeRun {
    let mut run = ForgeRun::default();
    for (i, (name, text, lang)) in sources.iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        match make_fec_pairs(text, *lang, s) {
            Ok(r) => run.records.extend(r),
            Err(e) => run.skipped.push((name.clone(), format!("fec: {e}"))),
        }
        match make_pc_pairs(text, *lang, s) {
            Ok(r) => run.records.extend(r),
            Err(e) => run.skipped.push((name.clone(), format!("pc: {e}"))),
        }
        if let Some(g) = generator {
            for (tag, r) in [("tc", make_tc_pair(text, g)), ("cs", make_cs_pair(text, g))] {
                match r {
                    Ok(r) => run.records.push(r),
                    Err(e) => run.skipped.push((name.clone(), format!("{tag}: {e}"))),
                }
            }
        }
    }
    run
}
