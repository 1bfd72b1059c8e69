//! Logic-layer parser (an ECMAScript subset), canonical printer and the
//! View-layer tag parser.

pub mod ast;
pub mod bench;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod view;

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

pub use ast::{Node, NodeKind, Span, SyntaxTree};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_expression, parse_with, ParseError, ParseOptions};
pub use printer::{print_expression, print_tree};
pub use view::{parse_view, Element, TagNode, TagTree, ViewError};

use crate::model::{Layer, Snapshot};

/// Per-file parse result for a Logic file.
pub type ParseOutcome = Result<SyntaxTree, ParseError>;

#[derive(Debug, Clone, Default)]
pub struct ParsedSnapshot {
    pub logic: BTreeMap<String, ParseOutcome>,
    pub view: BTreeMap<String, Result<TagTree, ViewError>>,
}

impl ParsedSnapshot {
    pub fn all_logic_ok(&self) -> bool {
        self.logic.values().all(Result::is_ok)
    }

    /// Trees of every Logic file, or `None` if any of them failed.
    pub fn trees(&self) -> Option<BTreeMap<&str, &SyntaxTree>> {
        self.logic
            .iter()
            .map(|(p, r)| r.as_ref().ok().map(|t| (p.as_str(), t)))
            .collect()
    }

    pub fn first_error(&self) -> Option<(&str, &ParseError)> {
        self.logic
            .iter()
            .find_map(|(p, r)| r.as_ref().err().map(|e| (p.as_str(), e)))
    }

    /// See [`structural_hash`]; `None` when a Logic file failed to parse.
    pub fn structural_hash(&self) -> Option<String> {
        self.trees().map(|t| structural_hash(t))
    }
}

fn decode(bytes: &[u8]) -> Result<&str, ParseError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = prefix.iter().filter(|b| **b == b'\n').count() as u32 + 1;
        let col = prefix.iter().rev().take_while(|b| **b != b'\n').count() as u32 + 1;
        ParseError {
            line,
            col,
            message: "source is not valid UTF-8".into(),
            offending_lexeme: String::new(),
        }
    })
}

/// Parses every Logic and View file independently. Style and Other files
/// are ignored.
pub fn parse_snapshot(snapshot: &Snapshot) -> ParsedSnapshot {
    let mut out = ParsedSnapshot::default();
    for (path, bytes) in snapshot.files_in(Layer::Logic) {
        out.logic
            .insert(path.to_string(), decode(bytes).and_then(parse));
    }
    for (path, bytes) in snapshot.files_in(Layer::View) {
        let parsed = match std::str::from_utf8(bytes) {
            Ok(src) => parse_view(src),
            Err(_) => Err(ViewError {
                line: 1,
                col: 1,
                message: "source is not valid UTF-8".into(),
            }),
        };
        out.view.insert(path.to_string(), parsed);
    }
    out
}

/// SHA-256 over the canonical print of each tree, in path order, each entry
/// framed as `len(path) ‖ path ‖ len(text) ‖ text` with 8-byte big-endian
/// lengths. Formatting-only edits do not change it.
pub fn structural_hash<'a>(trees: impl IntoIterator<Item = (&'a str, &'a SyntaxTree)>) -> String {
    let mut entries: Vec<(&str, String)> = trees
        .into_iter()
        .map(|(p, t)| (p, print_tree(t)))
        .collect();
    entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
    let mut h = Sha256::new();
    for (path, text) in entries {
        h.update((path.len() as u64).to_be_bytes());
        h.update(path.as_bytes());
        h.update((text.len() as u64).to_be_bytes());
        h.update(text.as_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(files: &[(&str, &str)]) -> Snapshot {
        Snapshot::new(files.iter().map(|(p, s)| (*p, s.as_bytes().to_vec()))).unwrap()
    }

    #[test]
    fn per_file_independence() {
        let s = snap(&[
            ("a.js", "var a = 1;"),
            ("b.js", "if (x"),
            ("c.js", "f();"),
            ("app.wxss", "page {}"),
        ]);
        let p = parse_snapshot(&s);
        assert_eq!(p.logic.len(), 3);
        assert_eq!(p.logic.values().filter(|r| r.is_ok()).count(), 2);
        assert_eq!(p.first_error().unwrap().0, "b.js");
        assert!(p.structural_hash().is_none());
    }

    #[test]
    fn no_logic_files() {
        let p = parse_snapshot(&snap(&[("index.wxml", "<view/>")]));
        assert!(p.logic.is_empty());
        assert_eq!(p.view.len(), 1);
    }

    #[test]
    fn view_files_parsed() {
        let p = parse_snapshot(&snap(&[("index.wxml", "<view><text>hi</text></view>")]));
        let tree = p.view["index.wxml"].as_ref().unwrap();
        assert_eq!(
            tree.roots,
            vec![TagNode::Element(Element {
                name: "view".into(),
                attributes: vec![],
                children: vec![TagNode::Element(Element {
                    name: "text".into(),
                    attributes: vec![],
                    children: vec![TagNode::Text("hi".into())],
                })],
            })]
        );
    }

    #[test]
    fn invalid_utf8_is_a_parse_error() {
        let s = Snapshot::new([("a.js", vec![b'x', b'\n', 0xff])]).unwrap();
        let p = parse_snapshot(&s);
        let e = p.logic["a.js"].as_ref().unwrap_err();
        assert_eq!((e.line, e.col), (2, 1));
    }

    #[test]
    fn hash_ignores_formatting_but_not_paths() {
        let a = parse_snapshot(&snap(&[("a.js", "var x=1;")]));
        let b = parse_snapshot(&snap(&[("a.js", "var   x =\n  1 ;  // c")]));
        let c = parse_snapshot(&snap(&[("b.js", "var x=1;")]));
        assert_eq!(a.structural_hash(), b.structural_hash());
        assert_ne!(a.structural_hash(), c.structural_hash());
    }
}
