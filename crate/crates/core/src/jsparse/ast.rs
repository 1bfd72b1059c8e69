use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Program,
    FunctionDecl,
    VarDecl,
    Block,
    If,
    While,
    For,
    Return,
    ExprStmt,
    Assign,
    Binary,
    Unary,
    Call,
    Member,
    Index,
    Identifier,
    NumberLit,
    StringLit,
    BoolLit,
    NullLit,
    ObjectLit,
    ArrayLit,
    FunctionExpr,
    ArrowFunction,
    Property,
}

impl NodeKind {
    pub const ALL: [NodeKind; 25] = [
        NodeKind::Program,
        NodeKind::FunctionDecl,
        NodeKind::VarDecl,
        NodeKind::Block,
        NodeKind::If,
        NodeKind::While,
        NodeKind::For,
        NodeKind::Return,
        NodeKind::ExprStmt,
        NodeKind::Assign,
        NodeKind::Binary,
        NodeKind::Unary,
        NodeKind::Call,
        NodeKind::Member,
        NodeKind::Index,
        NodeKind::Identifier,
        NodeKind::NumberLit,
        NodeKind::StringLit,
        NodeKind::BoolLit,
        NodeKind::NullLit,
        NodeKind::ObjectLit,
        NodeKind::ArrayLit,
        NodeKind::FunctionExpr,
        NodeKind::ArrowFunction,
        NodeKind::Property,
    ];

    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Program
                | NodeKind::FunctionDecl
                | NodeKind::VarDecl
                | NodeKind::Block
                | NodeKind::If
                | NodeKind::While
                | NodeKind::For
                | NodeKind::Return
                | NodeKind::ExprStmt
        )
    }

    pub fn is_literal(self) -> bool {
        matches!(
            self,
            NodeKind::NumberLit | NodeKind::StringLit | NodeKind::BoolLit | NodeKind::NullLit
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// 1-based line/column; the end position is exclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    pub fn contains(&self, inner: &Span) -> bool {
        self.start() <= inner.start() && inner.end() <= self.end()
    }

    pub fn is_empty(&self) -> bool {
        *self == Span::default()
    }
}

/// A syntax node. Equality and hashing are structural: spans are ignored, so
/// two parses of differently formatted but equivalent sources compare equal.
///
/// Child layout per kind (`?` optional, `*` repeated):
///
/// | kind | value | children |
/// |------|-------|----------|
/// | FunctionDecl | name | Identifier* params, Block body |
/// | FunctionExpr | name? | Identifier* params, Block body |
/// | ArrowFunction | - | Identifier* params, body (Block or expression) |
/// | VarDecl | `var`/`let`/`const` | Identifier, init? |
/// | For | presence mask over init/test/update, e.g. `it-` | present parts, body |
/// | If | - | test, consequent, alternate? |
/// | Assign, Binary, Unary | operator (`post++`/`post--` for postfix) | operands |
/// | Member | property name | object |
/// | Property | key lexeme | value |
/// | Call | - | callee, arguments* |
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Node>,
    #[serde(default, skip_serializing_if = "Span::is_empty")]
    pub span: Span,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.value == other.value && self.children == other.children
    }
}

impl Eq for Node {}

impl Hash for Node {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.value.hash(state);
        self.children.hash(state);
    }
}

impl Node {
    pub fn new(kind: NodeKind, value: Option<String>, children: Vec<Node>) -> Node {
        Node {
            kind,
            value,
            children,
            span: Span::default(),
        }
    }

    pub fn leaf(kind: NodeKind, value: impl Into<String>) -> Node {
        Node::new(kind, Some(value.into()), Vec::new())
    }

    pub fn branch(kind: NodeKind, children: Vec<Node>) -> Node {
        Node::new(kind, None, children)
    }

    pub fn with_value(kind: NodeKind, value: impl Into<String>, children: Vec<Node>) -> Node {
        Node::new(kind, Some(value.into()), children)
    }

    pub fn value_str(&self) -> &str {
        self.value.as_deref().unwrap_or("")
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }

    pub fn preorder(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn postorder(&self) -> Vec<&Node> {
        fn walk<'a>(n: &'a Node, out: &mut Vec<&'a Node>) {
            for c in &n.children {
                walk(c, out);
            }
            out.push(n);
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Clears every span in the subtree.
    pub fn erase_spans(&mut self) {
        self.span = Span::default();
        for c in &mut self.children {
            c.erase_spans();
        }
    }

    /// The function body of FunctionDecl/FunctionExpr/ArrowFunction nodes.
    pub fn function_body(&self) -> Option<&Node> {
        match self.kind {
            NodeKind::FunctionDecl | NodeKind::FunctionExpr | NodeKind::ArrowFunction => {
                self.children.last()
            }
            _ => None,
        }
    }

    pub fn function_params(&self) -> &[Node] {
        match self.kind {
            NodeKind::FunctionDecl | NodeKind::FunctionExpr | NodeKind::ArrowFunction => {
                &self.children[..self.children.len().saturating_sub(1)]
            }
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyntaxTree {
    pub root: Node,
}

impl SyntaxTree {
    pub fn new(statements: Vec<Node>) -> SyntaxTree {
        SyntaxTree {
            root: Node::branch(NodeKind::Program, statements),
        }
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn statements(&self) -> &[Node] {
        &self.root.children
    }

    /// Checks span nesting and the statement-only rule for Program children.
    pub fn check_well_formed(&self) -> Result<(), String> {
        if self.root.kind != NodeKind::Program {
            return Err("root is not a Program".into());
        }
        if let Some(bad) = self.root.children.iter().find(|c| !c.kind.is_statement()) {
            return Err(format!("{} directly under Program", bad.kind));
        }
        fn spans(n: &Node) -> Result<(), String> {
            for c in &n.children {
                if !n.span.is_empty() && !c.span.is_empty() && !n.span.contains(&c.span) {
                    return Err(format!(
                        "{} span {:?} escapes parent {} span {:?}",
                        c.kind, c.span, n.kind, n.span
                    ));
                }
                spans(c)?;
            }
            Ok(())
        }
        spans(&self.root)
    }
}
