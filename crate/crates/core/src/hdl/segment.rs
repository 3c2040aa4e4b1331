//! Functional-block segmentation and identifier tables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    NetDecl,
    RegDecl,
    ParamDecl,
    ContinuousAssign,
    AlwaysBlock,
    Instantiation,
    WholeModule,
}

impl From<ItemKind> for BlockKind {
    fn from(k: ItemKind) -> Self {
        match k {
            ItemKind::NetDecl => BlockKind::NetDecl,
            ItemKind::RegDecl => BlockKind::RegDecl,
            ItemKind::ParamDecl => BlockKind::ParamDecl,
            ItemKind::ContinuousAssign => BlockKind::ContinuousAssign,
            ItemKind::AlwaysBlock => BlockKind::AlwaysBlock,
            ItemKind::Instantiation => BlockKind::Instantiation,
        }
    }
}

/// A contiguous slice of a module body.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeBlock {
    /// Exact source slice, including leading whitespace and comments.
    pub text: String,
    pub kind: BlockKind,
    pub span: Span,
    pub items: Vec<AstItem>,
    pub identifiers_read: BTreeSet<String>,
    pub identifiers_written: BTreeSet<String>,
    /// Bit widths of every signal the block touches.
    pub widths: BTreeMap<String, u32>,
    pub language: HdlLanguage,
}

impl CodeBlock {
    /// The block's own code without surrounding whitespace.
    pub fn code(&self) -> &str {
        self.text.trim()
    }
}

/// Module header and footer slices around the blocks.
pub fn header_footer(ast: &ModuleAst) -> (&str, &str) {
    let region = ast.source_span;
    let last_end = ast
        .item_spans
        .last()
        .map(|s| s.end())
        .unwrap_or(ast.header_end);
    (
        &ast.source[region.offset..ast.header_end],
        &ast.source[last_end..region.end()],
    )
}

/// Splits a module body into functional blocks.
///
/// Each always block and instantiation is its own block. Adjacent continuous
/// assigns are grouped while they share an identifier with the group formed
/// so far. Declarations join the block that follows them (trailing
/// declarations join the last block). Blocks tile the body exactly, so
/// header + blocks + footer reproduces the module source.
pub fn segment(ast: &ModuleAst) -> Vec<CodeBlock> {
    let widths = ast.signal_widths().unwrap_or_default();

    // groups of item indices
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut pending_decls: Vec<usize> = Vec::new();
    let mut open_assign: Option<BTreeSet<String>> = None;

    for (idx, item) in ast.items.iter().enumerate() {
        if item.is_declaration() {
            pending_decls.push(idx);
            continue;
        }
        let (r, w) = item.reads_writes();
        let touched: BTreeSet<String> = r.union(&w).cloned().collect();
        let extends_group = match (&mut open_assign, item.kind()) {
            (Some(cone), ItemKind::ContinuousAssign) => {
                if cone.intersection(&touched).next().is_some() {
                    cone.extend(touched.iter().cloned());
                    true
                } else {
                    false
                }
            }
            _ => false,
        };
        if extends_group {
            let group = groups.last_mut().expect("open group");
            group.append(&mut pending_decls);
            group.push(idx);
            continue;
        }
        let mut group = std::mem::take(&mut pending_decls);
        group.push(idx);
        groups.push(group);
        open_assign = (item.kind() == ItemKind::ContinuousAssign).then_some(touched);
    }
    if !pending_decls.is_empty() {
        match groups.last_mut() {
            Some(g) => g.extend(pending_decls),
            None => groups.push(pending_decls),
        }
    }

    let mut blocks = Vec::with_capacity(groups.len());
    let mut cursor = ast.header_end;
    for group in groups {
        let last = *group.last().expect("non-empty group");
        let end = ast.item_spans[last].end();
        let items: Vec<AstItem> = group.iter().map(|&i| ast.items[i].clone()).collect();
        let primary = items
            .iter()
            .find(|i| !i.is_declaration())
            .unwrap_or(&items[0]);
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        for it in &items {
            let (r, w) = it.reads_writes();
            reads.extend(r);
            writes.extend(w);
        }
        let declared: Vec<&str> = items.iter().flat_map(|i| i.declared_names()).collect();
        let block_widths = reads
            .iter()
            .chain(writes.iter())
            .map(String::as_str)
            .chain(declared)
            .filter_map(|n| widths.get(n).map(|w| (n.to_string(), *w)))
            .collect();
        blocks.push(CodeBlock {
            text: ast.source[cursor..end].to_string(),
            kind: primary.kind().into(),
            span: Span::new(cursor, end),
            items,
            identifiers_read: reads,
            identifiers_written: writes,
            widths: block_widths,
            language: ast.language,
        });
        cursor = end;
    }
    blocks
}

/// The whole module as a single block.
pub fn whole_module_block(ast: &ModuleAst) -> CodeBlock {
    let mut reads = BTreeSet::new();
    let mut writes = BTreeSet::new();
    for it in &ast.items {
        let (r, w) = it.reads_writes();
        reads.extend(r);
        writes.extend(w);
    }
    CodeBlock {
        text: ast.text().to_string(),
        kind: BlockKind::WholeModule,
        span: ast.source_span,
        items: ast.items.clone(),
        identifiers_read: reads,
        identifiers_written: writes,
        widths: ast.signal_widths().unwrap_or_default(),
        language: ast.language,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentRole {
    Module,
    Port,
    Net,
    Reg,
    Param,
    Instance,
}

/// Every user identifier of a module with its role. Keywords never appear.
pub fn extract_identifiers(ast: &ModuleAst) -> BTreeMap<String, IdentRole> {
    let mut table = BTreeMap::new();
    table.insert(ast.name.clone(), IdentRole::Module);
    for p in &ast.params {
        table.entry(p.name.clone()).or_insert(IdentRole::Param);
    }
    for p in &ast.ports {
        table.entry(p.name.clone()).or_insert(IdentRole::Port);
    }
    for item in &ast.items {
        let role = match item {
            AstItem::NetDecl { .. } => IdentRole::Net,
            AstItem::RegDecl { .. } => IdentRole::Reg,
            AstItem::ParamDecl { .. } => IdentRole::Param,
            AstItem::Instantiation { .. } => IdentRole::Instance,
            _ => continue,
        };
        for n in item.declared_names() {
            table.entry(n.to_string()).or_insert(role);
        }
    }
    table
}
