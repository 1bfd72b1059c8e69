//! Intra-procedural control-flow graphs and their comparison.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsparse::{print_expression, printer::print_statement, Node, NodeKind, Span, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CfgNodeKind {
    Entry,
    Exit,
    Stmt,
    Branch,
    LoopHead,
    Merge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfgNode {
    pub kind: CfgNodeKind,
    /// Condition text for Branch/LoopHead, first printed line for Stmt.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub text: String,
    #[serde(default, skip_serializing_if = "Span::is_empty")]
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeLabel {
    True,
    False,
    Back,
    Fallthrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CfgEdge {
    pub from: usize,
    pub to: usize,
    pub label: Option<EdgeLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfg {
    pub name: String,
    pub nodes: Vec<CfgNode>,
    pub edges: Vec<CfgEdge>,
    pub entry: usize,
    pub exit: usize,
    /// Statements that can never execute; pruned from `nodes`.
    pub unreachable: Vec<CfgNode>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("{0} is not a function with a block body")]
    NotAFunction(NodeKind),
}

impl Cfg {
    pub fn out_degree(&self, n: usize) -> usize {
        self.edges.iter().filter(|e| e.from == n).count()
    }

    pub fn count(&self, kind: CfgNodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Branch and loop conditions in program order.
    pub fn conditions(&self) -> Vec<(CfgNodeKind, &str)> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, CfgNodeKind::Branch | CfgNodeKind::LoopHead))
            .map(|n| (n.kind, n.text.as_str()))
            .collect()
    }

    /// Node kinds, conditions and edges with statement text dropped; equal
    /// shapes mean isomorphic graphs under the construction order.
    fn shape(&self) -> (Vec<(CfgNodeKind, &str)>, Vec<CfgEdge>) {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n.kind {
                CfgNodeKind::Branch | CfgNodeKind::LoopHead => (n.kind, n.text.as_str()),
                k => (k, ""),
            })
            .collect();
        let mut edges = self.edges.clone();
        edges.sort();
        (nodes, edges)
    }
}

type Pending = Vec<(usize, Option<EdgeLabel>)>;

struct Builder {
    nodes: Vec<CfgNode>,
    edges: Vec<CfgEdge>,
    exit: usize,
}

impl Builder {
    fn add(&mut self, kind: CfgNodeKind, text: String, span: Span) -> usize {
        self.nodes.push(CfgNode { kind, text, span });
        self.nodes.len() - 1
    }

    fn connect(&mut self, from: Pending, to: usize) {
        for (f, label) in from {
            self.edges.push(CfgEdge { from: f, to, label });
        }
    }

    fn stmt_text(n: &Node) -> String {
        print_statement(n).lines().next().unwrap_or("").trim().to_string()
    }

    fn simple(&mut self, n: &Node, text: String, preds: Pending) -> Pending {
        let id = self.add(CfgNodeKind::Stmt, text, n.span);
        self.connect(preds, id);
        vec![(id, Some(EdgeLabel::Fallthrough))]
    }

    fn statements(&mut self, stmts: &[Node], mut preds: Pending) -> Pending {
        for s in stmts {
            preds = self.statement(s, preds);
        }
        preds
    }

    fn statement(&mut self, s: &Node, preds: Pending) -> Pending {
        match s.kind {
            NodeKind::Block => self.statements(&s.children, preds),
            NodeKind::Return => {
                let id = self.add(CfgNodeKind::Stmt, Self::stmt_text(s), s.span);
                self.connect(preds, id);
                self.edges.push(CfgEdge {
                    from: id,
                    to: self.exit,
                    label: None,
                });
                Vec::new()
            }
            NodeKind::If => {
                let branch = self.add(CfgNodeKind::Branch, print_expression(&s.children[0]), s.span);
                self.connect(preds, branch);
                let mut outs = self.statement(&s.children[1], vec![(branch, Some(EdgeLabel::True))]);
                match s.children.get(2) {
                    Some(alt) => outs.extend(self.statement(alt, vec![(branch, Some(EdgeLabel::False))])),
                    None => outs.push((branch, Some(EdgeLabel::False))),
                }
                if outs.is_empty() {
                    return outs;
                }
                let merge = self.add(CfgNodeKind::Merge, String::new(), Span::default());
                self.connect(outs, merge);
                vec![(merge, Some(EdgeLabel::Fallthrough))]
            }
            NodeKind::While => {
                let head = self.add(CfgNodeKind::LoopHead, print_expression(&s.children[0]), s.span);
                self.connect(preds, head);
                let outs = self.statement(&s.children[1], vec![(head, Some(EdgeLabel::True))]);
                self.back(outs, head);
                vec![(head, Some(EdgeLabel::False))]
            }
            NodeKind::For => {
                let mask: Vec<char> = s.value_str().chars().collect();
                let mut parts = s.children.iter();
                let mut take = |flag: char| {
                    if mask.contains(&flag) {
                        parts.next()
                    } else {
                        None
                    }
                };
                let (init, test, update) = (take('i'), take('t'), take('u'));
                let body = s.children.last().expect("for has a body");
                let mut preds = preds;
                if let Some(init) = init {
                    let text = if init.kind.is_statement() {
                        Self::stmt_text(init)
                    } else {
                        print_expression(init)
                    };
                    preds = self.simple(init, text, preds);
                }
                let cond = test.map_or_else(|| "true".to_string(), print_expression);
                let head = self.add(CfgNodeKind::LoopHead, cond, s.span);
                self.connect(preds, head);
                let mut outs = self.statement(body, vec![(head, Some(EdgeLabel::True))]);
                if let Some(update) = update {
                    if !outs.is_empty() {
                        outs = self.simple(update, print_expression(update), outs);
                    }
                }
                self.back(outs, head);
                if test.is_some() {
                    vec![(head, Some(EdgeLabel::False))]
                } else {
                    Vec::new()
                }
            }
            _ => self.simple(s, Self::stmt_text(s), preds),
        }
    }

    fn back(&mut self, outs: Pending, head: usize) {
        for (f, _) in outs {
            self.edges.push(CfgEdge {
                from: f,
                to: head,
                label: Some(EdgeLabel::Back),
            });
        }
    }
}

/// Builds the graph of a function with a block body. Statements that cannot
/// be reached from Entry are moved to `unreachable`; Exit always stays.
pub fn extract_cfg(func: &Node) -> Result<Cfg, CfgError> {
    let body = match (func.kind, func.function_body()) {
        (
            NodeKind::FunctionDecl | NodeKind::FunctionExpr | NodeKind::ArrowFunction,
            Some(b),
        ) if b.kind == NodeKind::Block => b,
        _ => return Err(CfgError::NotAFunction(func.kind)),
    };
    let mut b = Builder {
        nodes: Vec::new(),
        edges: Vec::new(),
        exit: 1,
    };
    let entry = b.add(CfgNodeKind::Entry, String::new(), func.span);
    let exit = b.add(CfgNodeKind::Exit, String::new(), Span::default());
    let outs = b.statements(&body.children, vec![(entry, Some(EdgeLabel::Fallthrough))]);
    b.connect(outs, exit);

    let mut seen = vec![false; b.nodes.len()];
    seen[entry] = true;
    let mut queue = VecDeque::from([entry]);
    while let Some(n) = queue.pop_front() {
        for e in b.edges.iter().filter(|e| e.from == n) {
            if !seen[e.to] {
                seen[e.to] = true;
                queue.push_back(e.to);
            }
        }
    }
    seen[exit] = true;
    let mut remap = vec![usize::MAX; b.nodes.len()];
    let mut nodes = Vec::new();
    let mut unreachable = Vec::new();
    for (i, n) in b.nodes.into_iter().enumerate() {
        if seen[i] {
            remap[i] = nodes.len();
            nodes.push(n);
        } else {
            unreachable.push(n);
        }
    }
    let edges = b
        .edges
        .into_iter()
        .filter(|e| seen[e.from] && seen[e.to])
        .map(|e| CfgEdge {
            from: remap[e.from],
            to: remap[e.to],
            label: e.label,
        })
        .collect();
    Ok(Cfg {
        name: func.value_str().to_string(),
        nodes,
        edges,
        entry: remap[entry],
        exit: remap[exit],
        unreachable: unreachable
            .into_iter()
            .filter(|n| n.kind == CfgNodeKind::Stmt || n.kind == CfgNodeKind::Branch || n.kind == CfgNodeKind::LoopHead)
            .collect(),
    })
}

/// Functions addressable by name: declarations anywhere, plus function
/// values bound to object keys or variables (`onLoad: function () {}`).
pub fn named_functions(tree: &SyntaxTree) -> Vec<(String, &Node)> {
    let mut out = Vec::new();
    for n in tree.root.preorder() {
        match n.kind {
            NodeKind::FunctionDecl => out.push((n.value_str().to_string(), n)),
            NodeKind::Property | NodeKind::VarDecl => {
                if let Some(f) = n.children.last().filter(|c| {
                    matches!(c.kind, NodeKind::FunctionExpr | NodeKind::ArrowFunction)
                        && c.function_body().is_some_and(|b| b.kind == NodeKind::Block)
                }) {
                    let name = if n.kind == NodeKind::Property {
                        n.value_str()
                    } else {
                        n.children[0].value_str()
                    };
                    out.push((name.trim_matches(['"', '\'']).to_string(), f));
                }
            }
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfgDelta {
    pub node_count_delta: i64,
    pub edge_count_delta: i64,
    pub changed_branch_conditions: Vec<(String, String)>,
    pub added_loops: usize,
    pub removed_loops: usize,
    /// Graph shape differs even if every count above matches.
    pub structure_changed: bool,
}

impl CfgDelta {
    pub fn is_zero(&self) -> bool {
        *self == CfgDelta::default()
    }
}

pub fn cfg_diff(a: &Cfg, b: &Cfg) -> CfgDelta {
    let ca = a.conditions();
    let cb = b.conditions();
    // LCS over (kind, text); unmatched runs pair up as changed conditions.
    let (n, m) = (ca.len(), cb.len());
    let w = m + 1;
    let mut t = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i * w + j] = if ca[i] == cb[j] {
                t[(i + 1) * w + j + 1] + 1
            } else {
                t[(i + 1) * w + j].max(t[i * w + j + 1])
            };
        }
    }
    let mut changed = Vec::new();
    let (mut ra, mut rb): (Vec<&str>, Vec<&str>) = (Vec::new(), Vec::new());
    let mut flush = |ra: &mut Vec<&str>, rb: &mut Vec<&str>| {
        for (x, y) in ra.iter().zip(rb.iter()) {
            changed.push((x.to_string(), y.to_string()));
        }
        ra.clear();
        rb.clear();
    };
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && ca[i] == cb[j] {
            flush(&mut ra, &mut rb);
            i += 1;
            j += 1;
        } else if j == m || (i < n && t[(i + 1) * w + j] >= t[i * w + j + 1]) {
            ra.push(ca[i].1);
            i += 1;
        } else {
            rb.push(cb[j].1);
            j += 1;
        }
    }
    flush(&mut ra, &mut rb);

    let (la, lb) = (a.count(CfgNodeKind::LoopHead), b.count(CfgNodeKind::LoopHead));
    CfgDelta {
        node_count_delta: b.nodes.len() as i64 - a.nodes.len() as i64,
        edge_count_delta: b.edges.len() as i64 - a.edges.len() as i64,
        changed_branch_conditions: changed,
        added_loops: lb.saturating_sub(la),
        removed_loops: la.saturating_sub(lb),
        structure_changed: a.shape() != b.shape(),
    }
}
