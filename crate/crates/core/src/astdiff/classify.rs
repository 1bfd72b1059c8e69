//! Classifies the operations of an edit script by where they land.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsparse::{NodeKind, SyntaxTree};

use super::script::{ApplyError, EditOp, EditScript};
use super::ted::Flat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditClass {
    LiteralChange,
    IdentifierRename,
    CallArgChange,
    ApiCalleeChange,
    StructuralChange,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditClassification {
    pub counts: BTreeMap<EditClass, usize>,
    /// One entry per script operation; `None` when the operation is part of
    /// a larger insert or delete already counted at its root.
    pub annotations: Vec<Option<EditClass>>,
}

impl EditClassification {
    pub fn classes(&self) -> BTreeSet<EditClass> {
        self.counts.keys().copied().collect()
    }

    pub fn contains(&self, class: EditClass) -> bool {
        self.counts.contains_key(&class)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("edit script does not apply: {0}")]
    InconsistentScript(#[from] ApplyError),
    #[error("edit script does not produce the target tree")]
    WrongResult,
}

fn in_callee_chain(f: &Flat<'_>, i: usize) -> bool {
    let mut cur = i;
    while let Some(p) = f.parent[cur] {
        let first = f.child_index[cur] == 0;
        match f.nodes[p].kind {
            NodeKind::Call if first => return true,
            NodeKind::Member | NodeKind::Index if first => cur = p,
            _ => return false,
        }
    }
    false
}

fn in_call_args(f: &Flat<'_>, i: usize) -> bool {
    let mut cur = i;
    while let Some(p) = f.parent[cur] {
        let kind = f.nodes[p].kind;
        if kind == NodeKind::Call && f.child_index[cur] > 0 {
            return true;
        }
        if kind.is_statement() || matches!(kind, NodeKind::FunctionExpr | NodeKind::ArrowFunction) {
            return false;
        }
        cur = p;
    }
    false
}

pub fn classify_edit(
    script: &EditScript,
    a: &SyntaxTree,
    b: &SyntaxTree,
) -> Result<EditClassification, ClassifyError> {
    if script.apply(&a.root)? != b.root {
        return Err(ClassifyError::WrongResult);
    }
    let fa = Flat::new(&a.root);
    let fb = Flat::new(&b.root);
    let deleted: HashSet<usize> = script
        .ops
        .iter()
        .filter_map(|op| match op {
            EditOp::Delete { node, .. } => Some(*node),
            _ => None,
        })
        .collect();
    let inserted: HashSet<usize> = script
        .ops
        .iter()
        .filter_map(|op| match op {
            EditOp::Insert { node, .. } => Some(*node),
            _ => None,
        })
        .collect();

    let mut out = EditClassification::default();
    for op in &script.ops {
        let class = match op {
            EditOp::Relabel {
                node, target, from, to,
            } => Some(if in_callee_chain(&fa, *node) || in_callee_chain(&fb, *target) {
                EditClass::ApiCalleeChange
            } else if from.kind.is_literal() && to.kind.is_literal() {
                EditClass::LiteralChange
            } else if from.kind == to.kind
                && matches!(
                    from.kind,
                    NodeKind::Identifier | NodeKind::Member | NodeKind::Property
                )
            {
                EditClass::IdentifierRename
            } else if in_call_args(&fa, *node) {
                EditClass::CallArgChange
            } else if from.kind == to.kind {
                // Operator or declaration-keyword swaps.
                EditClass::LiteralChange
            } else {
                EditClass::StructuralChange
            }),
            EditOp::Delete { node, label } => {
                if fa.parent[*node].is_some_and(|p| deleted.contains(&p)) {
                    None
                } else {
                    Some(whole_node_class(&fa, *node, label.kind))
                }
            }
            EditOp::Insert { node, label, .. } => {
                if fb.parent[*node].is_some_and(|p| inserted.contains(&p)) {
                    None
                } else {
                    Some(whole_node_class(&fb, *node, label.kind))
                }
            }
        };
        if let Some(c) = class {
            *out.counts.entry(c).or_default() += 1;
        }
        out.annotations.push(class);
    }
    Ok(out)
}

fn whole_node_class(f: &Flat<'_>, i: usize, kind: NodeKind) -> EditClass {
    if kind.is_statement() {
        EditClass::StructuralChange
    } else if in_callee_chain(f, i) {
        EditClass::ApiCalleeChange
    } else if in_call_args(f, i) {
        EditClass::CallArgChange
    } else {
        EditClass::StructuralChange
    }
}
