//! View-layer (WXML) tag tree parser.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagNode {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<TagNode>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagTree {
    pub roots: Vec<TagNode>,
}

impl TagTree {
    pub fn element_count(&self) -> usize {
        fn count(nodes: &[TagNode]) -> usize {
            nodes
                .iter()
                .map(|n| match n {
                    TagNode::Element(e) => 1 + count(&e.children),
                    TagNode::Text(_) => 0,
                })
                .sum()
        }
        count(&self.roots)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{line}:{col}: {message}")]
pub struct ViewError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ViewError {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() as u32 + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
        ViewError {
            line,
            col,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> ViewError {
        self.error_at(self.pos, message)
    }

    fn name(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | ':' | '.'))
        {
            self.bump();
        }
        self.src[start..self.pos].to_string()
    }
}

/// Parses tags, attributes and text. Whitespace-only text is dropped and
/// other text is trimmed; `{{ ... }}` bindings stay verbatim in text.
pub fn parse_view(source: &str) -> Result<TagTree, ViewError> {
    let mut s = Scanner { src: source, pos: 0 };
    // (element, position of its open tag)
    let mut stack: Vec<(Element, usize)> = Vec::new();
    let mut roots = Vec::new();

    fn push(node: TagNode, stack: &mut [(Element, usize)], roots: &mut Vec<TagNode>) {
        match stack.last_mut() {
            Some((parent, _)) => parent.children.push(node),
            None => roots.push(node),
        }
    }

    while s.peek().is_some() {
        if s.rest().starts_with("<!--") {
            let start = s.pos;
            match s.rest().find("-->") {
                Some(i) => s.pos += i + 3,
                None => return Err(s.error_at(start, "unterminated comment")),
            }
        } else if s.rest().starts_with("</") {
            let start = s.pos;
            s.pos += 2;
            let name = s.name();
            s.skip_ws();
            if s.bump() != Some('>') {
                return Err(s.error("expected '>' in closing tag"));
            }
            match stack.pop() {
                Some((el, _)) if el.name == name => push(TagNode::Element(el), &mut stack, &mut roots),
                Some((el, _)) => {
                    return Err(s.error_at(
                        start,
                        format!("closing tag </{name}> does not match <{}>", el.name),
                    ))
                }
                None => return Err(s.error_at(start, format!("unexpected closing tag </{name}>"))),
            }
        } else if s.peek() == Some('<') {
            let start = s.pos;
            s.bump();
            let name = s.name();
            if name.is_empty() {
                return Err(s.error("expected tag name"));
            }
            let mut attributes: Vec<(String, String)> = Vec::new();
            let self_closing = loop {
                s.skip_ws();
                if s.rest().starts_with("/>") {
                    s.pos += 2;
                    break true;
                }
                if s.peek() == Some('>') {
                    s.bump();
                    break false;
                }
                let attr_pos = s.pos;
                let attr = s.name();
                if attr.is_empty() {
                    return Err(s.error("expected attribute name"));
                }
                s.skip_ws();
                let value = if s.peek() == Some('=') {
                    s.bump();
                    s.skip_ws();
                    match s.peek() {
                        Some(q @ ('"' | '\'')) => {
                            s.bump();
                            let vstart = s.pos;
                            match s.rest().find(q) {
                                Some(i) => {
                                    s.pos += i + 1;
                                    s.src[vstart..vstart + i].to_string()
                                }
                                None => return Err(s.error_at(vstart, "unterminated attribute value")),
                            }
                        }
                        _ => {
                            let vstart = s.pos;
                            while s
                                .peek()
                                .is_some_and(|c| !c.is_whitespace() && c != '>' && c != '/')
                            {
                                s.bump();
                            }
                            s.src[vstart..s.pos].to_string()
                        }
                    }
                } else {
                    String::new()
                };
                if attributes.iter().any(|(n, _)| *n == attr) {
                    return Err(s.error_at(attr_pos, format!("duplicate attribute {attr}")));
                }
                attributes.push((attr, value));
            };
            let el = Element {
                name,
                attributes,
                children: Vec::new(),
            };
            if self_closing {
                push(TagNode::Element(el), &mut stack, &mut roots);
            } else {
                stack.push((el, start));
            }
        } else {
            let start = s.pos;
            while let Some(c) = s.peek() {
                if c == '<' {
                    break;
                }
                if s.rest().starts_with("{{") {
                    match s.rest().find("}}") {
                        Some(i) => s.pos += i + 2,
                        None => return Err(s.error("unterminated {{ binding")),
                    }
                    continue;
                }
                s.bump();
            }
            let text = s.src[start..s.pos].trim();
            if !text.is_empty() {
                push(TagNode::Text(text.to_string()), &mut stack, &mut roots);
            }
        }
    }
    if let Some((el, pos)) = stack.pop() {
        return Err(s.error_at(pos, format!("unclosed tag <{}>", el.name)));
    }
    Ok(TagTree { roots })
}
