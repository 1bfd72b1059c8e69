//! Edit scripts over syntax trees and their application.
//!
//! Node indices are preorder positions: `Relabel::node` and `Delete::node`
//! index the source tree, `Insert::node` and `Relabel::target` the target.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsparse::{Node, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl Label {
    pub fn of(node: &Node) -> Label {
        Label {
            kind: node.kind,
            value: node.value.clone(),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.value {
            Some(v) => write!(f, "{} {}", self.kind, v),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRef {
    Source(usize),
    Target(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum EditOp {
    Relabel {
        node: usize,
        target: usize,
        from: Label,
        to: Label,
    },
    /// Removes the node; its children take its place in the parent.
    Delete { node: usize, label: Label },
    /// Inserts a node under `parent` (or at top level) at `position`, taking
    /// the `adopt` siblings that start there as its children.
    Insert {
        node: usize,
        label: Label,
        parent: Option<NodeRef>,
        position: usize,
        adopt: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    /// Unit costs: one per operation.
    pub fn cost(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn apply(&self, source: &Node) -> Result<Node, ApplyError> {
        let mut w = Work::new(source);
        for (i, op) in self.ops.iter().enumerate() {
            w.apply(op).map_err(|message| ApplyError { op: i, message })?;
        }
        w.finish().map_err(|message| ApplyError {
            op: self.ops.len(),
            message,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("edit operation {op}: {message}")]
pub struct ApplyError {
    pub op: usize,
    pub message: String,
}

struct WNode {
    label: Label,
    children: Vec<usize>,
    parent: Option<usize>,
    live: bool,
}

/// Mutable forest the script operates on. Source nodes keep their preorder
/// index as id; inserted nodes are appended.
pub(crate) struct Work {
    nodes: Vec<WNode>,
    top: Vec<usize>,
    sources: usize,
    inserted: HashMap<usize, usize>,
}

impl Work {
    pub(crate) fn new(source: &Node) -> Work {
        let mut nodes = Vec::with_capacity(source.size());
        fn build(n: &Node, parent: Option<usize>, nodes: &mut Vec<WNode>) -> usize {
            let id = nodes.len();
            nodes.push(WNode {
                label: Label::of(n),
                children: Vec::with_capacity(n.children.len()),
                parent,
                live: true,
            });
            for c in &n.children {
                let cid = build(c, Some(id), nodes);
                nodes[id].children.push(cid);
            }
            id
        }
        let root = build(source, None, &mut nodes);
        Work {
            nodes,
            top: vec![root],
            sources: source.size(),
            inserted: HashMap::new(),
        }
    }

    fn live_source(&self, idx: usize) -> Result<usize, String> {
        match self.nodes.get(idx).filter(|_| idx < self.sources) {
            Some(n) if n.live => Ok(idx),
            Some(_) => Err(format!("source node {idx} no longer exists")),
            None => Err(format!("source node {idx} out of range")),
        }
    }

    pub(crate) fn resolve(&self, r: NodeRef) -> Result<usize, String> {
        match r {
            NodeRef::Source(i) => self.live_source(i),
            NodeRef::Target(t) => self
                .inserted
                .get(&t)
                .copied()
                .ok_or_else(|| format!("target node {t} has not been inserted")),
        }
    }

    pub(crate) fn children_of(&self, parent: Option<usize>) -> &[usize] {
        match parent {
            Some(p) => &self.nodes[p].children,
            None => &self.top,
        }
    }

    fn children_mut(&mut self, parent: Option<usize>) -> &mut Vec<usize> {
        match parent {
            Some(p) => &mut self.nodes[p].children,
            None => &mut self.top,
        }
    }

    pub(crate) fn apply(&mut self, op: &EditOp) -> Result<(), String> {
        match op {
            EditOp::Relabel { node, from, to, .. } => {
                let id = self.live_source(*node)?;
                if self.nodes[id].label != *from {
                    return Err(format!(
                        "relabel expects {from} but node {node} is {}",
                        self.nodes[id].label
                    ));
                }
                self.nodes[id].label = to.clone();
            }
            EditOp::Delete { node, label } => {
                let id = self.live_source(*node)?;
                if self.nodes[id].label != *label {
                    return Err(format!("delete expects {label} at node {node}"));
                }
                let parent = self.nodes[id].parent;
                let kids = std::mem::take(&mut self.nodes[id].children);
                for &k in &kids {
                    self.nodes[k].parent = parent;
                }
                let siblings = self.children_mut(parent);
                let at = siblings
                    .iter()
                    .position(|&s| s == id)
                    .expect("live node is listed under its parent");
                siblings.splice(at..=at, kids);
                self.nodes[id].live = false;
            }
            EditOp::Insert {
                node,
                label,
                parent,
                position,
                adopt,
            } => {
                if self.inserted.contains_key(node) {
                    return Err(format!("target node {node} inserted twice"));
                }
                let parent = parent.map(|p| self.resolve(p)).transpose()?;
                let len = self.children_of(parent).len();
                if position + adopt > len {
                    return Err(format!(
                        "insert range {position}+{adopt} exceeds {len} children"
                    ));
                }
                let id = self.nodes.len();
                let adopted: Vec<usize> = self
                    .children_mut(parent)
                    .splice(*position..position + adopt, [id])
                    .collect();
                for &k in &adopted {
                    self.nodes[k].parent = Some(id);
                }
                self.nodes.push(WNode {
                    label: label.clone(),
                    children: adopted,
                    parent,
                    live: true,
                });
                self.inserted.insert(*node, id);
            }
        }
        Ok(())
    }

    pub(crate) fn finish(&self) -> Result<Node, String> {
        if self.top.len() != 1 {
            return Err(format!("result has {} roots", self.top.len()));
        }
        fn build(w: &Work, id: usize) -> Node {
            let n = &w.nodes[id];
            Node::new(
                n.label.kind,
                n.label.value.clone(),
                n.children.iter().map(|&c| build(w, c)).collect(),
            )
        }
        Ok(build(self, self.top[0]))
    }
}
