//! Canonical source printer. Output uses two-space indentation, one
//! statement per line and single spaces around binary operators; parsing the
//! output yields a tree equal to the input (spans aside).

use super::ast::{Node, NodeKind, SyntaxTree};

const INDENT: &str = "  ";

pub fn print_tree(tree: &SyntaxTree) -> String {
    let mut p = Printer::default();
    for s in tree.statements() {
        p.statement(s, 0);
    }
    p.out
}

/// Canonical text of a single expression (no trailing newline).
pub fn print_expression(node: &Node) -> String {
    expr(node, 0, PREC_ASSIGN)
}

/// Canonical text of a single statement, including its trailing newline.
pub fn print_statement(node: &Node) -> String {
    let mut p = Printer::default();
    p.statement(node, 0);
    p.out
}

const PREC_ASSIGN: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_EQUALITY: u8 = 4;
const PREC_RELATIONAL: u8 = 5;
const PREC_ADDITIVE: u8 = 6;
const PREC_MULTIPLICATIVE: u8 = 7;
const PREC_PREFIX: u8 = 8;
const PREC_POSTFIX: u8 = 9;
const PREC_CALL: u8 = 10;
const PREC_PRIMARY: u8 = 11;

fn binary_prec(op: &str) -> u8 {
    match op {
        "||" => PREC_OR,
        "&&" => PREC_AND,
        "==" | "!=" | "===" | "!==" => PREC_EQUALITY,
        "<" | ">" | "<=" | ">=" | "instanceof" | "in" => PREC_RELATIONAL,
        "+" | "-" => PREC_ADDITIVE,
        _ => PREC_MULTIPLICATIVE,
    }
}

fn precedence(n: &Node) -> u8 {
    match n.kind {
        NodeKind::Assign | NodeKind::ArrowFunction => PREC_ASSIGN,
        NodeKind::Binary => binary_prec(n.value_str()),
        NodeKind::Unary if n.value_str().starts_with("post") => PREC_POSTFIX,
        NodeKind::Unary => PREC_PREFIX,
        NodeKind::Call | NodeKind::Member | NodeKind::Index => PREC_CALL,
        _ => PREC_PRIMARY,
    }
}

#[derive(Default)]
struct Printer {
    out: String,
}

impl Printer {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn statement(&mut self, s: &Node, depth: usize) {
        let text = statement_text(s, depth);
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(&text);
        self.out.push('\n');
    }
}

/// Statement text starting at the current indentation (not included) and
/// without a trailing newline. Nested lines carry their own indentation.
fn statement_text(s: &Node, depth: usize) -> String {
    match s.kind {
        NodeKind::VarDecl => format!("{};", var_decl(s, depth)),
        NodeKind::FunctionDecl => function(s, depth),
        NodeKind::Return => match s.children.first() {
            Some(e) => format!("return {};", expr(e, depth, PREC_ASSIGN)),
            None => "return;".to_string(),
        },
        NodeKind::ExprStmt => {
            let e = expr(&s.children[0], depth, PREC_ASSIGN);
            if needs_statement_parens(&e) {
                format!("({e});")
            } else {
                format!("{e};")
            }
        }
        NodeKind::Block => block(s, depth),
        NodeKind::If => {
            let mut out = format!("if ({})", expr(&s.children[0], depth, PREC_ASSIGN));
            let then = &s.children[1];
            out.push_str(&body(then, depth));
            if let Some(alt) = s.children.get(2) {
                if then.kind == NodeKind::Block {
                    out.push_str(" else");
                } else {
                    out.push('\n');
                    push_indent(&mut out, depth);
                    out.push_str("else");
                }
                if alt.kind == NodeKind::If {
                    out.push(' ');
                    out.push_str(&statement_text(alt, depth));
                } else {
                    out.push_str(&body(alt, depth));
                }
            }
            out
        }
        NodeKind::While => {
            let mut out = format!("while ({})", expr(&s.children[0], depth, PREC_ASSIGN));
            out.push_str(&body(&s.children[1], depth));
            out
        }
        NodeKind::For => {
            let mask = s.value_str().as_bytes();
            let mut parts = s.children.iter();
            let mut out = String::from("for (");
            if mask.first() == Some(&b'i') {
                let init = parts.next().expect("for init");
                if init.kind == NodeKind::VarDecl {
                    out.push_str(&var_decl(init, depth));
                } else {
                    out.push_str(&expr(init, depth, PREC_ASSIGN));
                }
            }
            out.push(';');
            if mask.get(1) == Some(&b't') {
                out.push(' ');
                out.push_str(&expr(parts.next().expect("for test"), depth, PREC_ASSIGN));
            }
            out.push(';');
            if mask.get(2) == Some(&b'u') {
                out.push(' ');
                out.push_str(&expr(parts.next().expect("for update"), depth, PREC_ASSIGN));
            }
            out.push(')');
            out.push_str(&body(parts.next().expect("for body"), depth));
            out
        }
        // Expressions never sit in statement position in a well-formed tree;
        // print them as expression statements.
        _ => format!("{};", expr(s, depth, PREC_ASSIGN)),
    }
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

/// Loop/if body: a block continues on the same line, anything else goes on
/// the next line one level deeper.
fn body(s: &Node, depth: usize) -> String {
    if s.kind == NodeKind::Block {
        format!(" {}", block(s, depth))
    } else {
        let mut out = String::from("\n");
        push_indent(&mut out, depth + 1);
        out.push_str(&statement_text(s, depth + 1));
        out
    }
}

fn block(s: &Node, depth: usize) -> String {
    if s.children.is_empty() {
        return "{}".to_string();
    }
    let mut p = Printer::default();
    p.out.push_str("{\n");
    for c in &s.children {
        p.statement(c, depth + 1);
    }
    p.line(depth, "}");
    p.out.pop();
    p.out
}

fn var_decl(s: &Node, depth: usize) -> String {
    let name = s.children[0].value_str();
    match s.children.get(1) {
        Some(init) => format!("{} {} = {}", s.value_str(), name, expr(init, depth, PREC_ASSIGN)),
        None => format!("{} {}", s.value_str(), name),
    }
}

fn params(n: &Node) -> String {
    n.function_params()
        .iter()
        .map(|p| p.value_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn function(n: &Node, depth: usize) -> String {
    let body = block(n.function_body().expect("function body"), depth);
    match &n.value {
        Some(name) => format!("function {}({}) {}", name, params(n), body),
        None => format!("function ({}) {}", params(n), body),
    }
}

fn needs_statement_parens(text: &str) -> bool {
    if text.starts_with('{') {
        return true;
    }
    text.strip_prefix("function")
        .is_some_and(|rest| !rest.starts_with(|c: char| c.is_alphanumeric() || c == '_' || c == '$'))
}

fn expr(n: &Node, depth: usize, min_prec: u8) -> String {
    let text = expr_inner(n, depth);
    if precedence(n) < min_prec {
        format!("({text})")
    } else {
        text
    }
}

fn expr_inner(n: &Node, depth: usize) -> String {
    match n.kind {
        NodeKind::Identifier
        | NodeKind::NumberLit
        | NodeKind::StringLit
        | NodeKind::BoolLit
        | NodeKind::NullLit => n.value_str().to_string(),
        NodeKind::Assign => format!(
            "{} {} {}",
            expr(&n.children[0], depth, PREC_CALL),
            n.value_str(),
            expr(&n.children[1], depth, PREC_ASSIGN)
        ),
        NodeKind::Binary => {
            let p = binary_prec(n.value_str());
            format!(
                "{} {} {}",
                expr(&n.children[0], depth, p),
                n.value_str(),
                expr(&n.children[1], depth, p + 1)
            )
        }
        NodeKind::Unary => {
            let op = n.value_str();
            if let Some(post) = op.strip_prefix("post") {
                return format!("{}{}", expr(&n.children[0], depth, PREC_CALL), post);
            }
            let operand = expr(&n.children[0], depth, PREC_PREFIX);
            if op.chars().all(char::is_alphabetic) {
                format!("{op} {operand}")
            } else if operand.starts_with(['+', '-']) && op.ends_with(['+', '-']) {
                // Keep `- -x` from lexing as `--x`.
                format!("{op}({operand})")
            } else {
                format!("{op}{operand}")
            }
        }
        NodeKind::Call => {
            let args: Vec<String> = n.children[1..]
                .iter()
                .map(|a| expr(a, depth, PREC_ASSIGN))
                .collect();
            format!(
                "{}({})",
                callee_or_object(&n.children[0], depth),
                args.join(", ")
            )
        }
        NodeKind::Member => format!(
            "{}.{}",
            callee_or_object(&n.children[0], depth),
            n.value_str()
        ),
        NodeKind::Index => format!(
            "{}[{}]",
            callee_or_object(&n.children[0], depth),
            expr(&n.children[1], depth, PREC_ASSIGN)
        ),
        NodeKind::ArrayLit => {
            let items: Vec<String> = n
                .children
                .iter()
                .map(|a| expr(a, depth, PREC_ASSIGN))
                .collect();
            format!("[{}]", items.join(", "))
        }
        NodeKind::ObjectLit => {
            if n.children.is_empty() {
                return "{}".to_string();
            }
            let mut out = String::from("{\n");
            let last = n.children.len() - 1;
            for (i, prop) in n.children.iter().enumerate() {
                push_indent(&mut out, depth + 1);
                out.push_str(prop.value_str());
                out.push_str(": ");
                out.push_str(&expr(&prop.children[0], depth + 1, PREC_ASSIGN));
                if i != last {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(&mut out, depth);
            out.push('}');
            out
        }
        NodeKind::Property => format!(
            "{}: {}",
            n.value_str(),
            expr(&n.children[0], depth, PREC_ASSIGN)
        ),
        NodeKind::FunctionExpr => function(n, depth),
        NodeKind::ArrowFunction => {
            let body = n.function_body().expect("arrow body");
            let body_text = if body.kind == NodeKind::Block {
                block(body, depth)
            } else {
                let e = expr(body, depth, PREC_ASSIGN);
                if e.starts_with('{') {
                    format!("({e})")
                } else {
                    e
                }
            };
            format!("({}) => {}", params(n), body_text)
        }
        _ => statement_text(n, depth),
    }
}

/// The object of a member access or a callee. Bare number literals need
/// parentheses so the dot is not read as a decimal point.
fn callee_or_object(n: &Node, depth: usize) -> String {
    if n.kind == NodeKind::NumberLit {
        format!("({})", n.value_str())
    } else {
        expr(n, depth, PREC_CALL)
    }
}
