use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Number,
    String,
    Punct,
    Keyword,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
    /// A line terminator appears between the previous token and this one.
    pub newline_before: bool,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Eof => f.write_str("end of input"),
            _ => write!(f, "'{}'", self.text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// Whitespace or comment text skipped between tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriviaKind {
    Whitespace,
    LineComment,
    BlockComment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Token(Token),
    Trivia { kind: TriviaKind, start: usize, end: usize },
}

pub const KEYWORDS: &[&str] = &[
    "var", "let", "const", "function", "if", "else", "while", "for", "return", "true", "false",
    "null", "this", "typeof", "void", "delete", "in", "instanceof", "new", "class", "do",
    "switch", "case", "default", "break", "continue", "try", "catch", "finally", "throw",
    "yield", "async", "await", "import", "export", "extends", "super", "with", "debugger",
    "enum",
];

// Longest first within each leading character.
const PUNCTUATORS: &[&str] = &[
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "=>", "==", "!=", "<=", ">=", "&&",
    "||", "??", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "**",
    "?.", "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%", "&", "|",
    "^", "!", "~", "?", ":", "=", ".", "@", "#",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: u32, col: u32, message: impl Into<String>) -> LexError {
        LexError {
            line,
            col,
            message: message.into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_part(c: char) -> bool {
    is_ident_start(c) || c.is_alphanumeric()
}

fn is_line_terminator(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}')
}

/// Tokens only; trivia is dropped. The final token is always `Eof`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Ok(tokenize_with_trivia(source)?
        .into_iter()
        .filter_map(|p| match p {
            Piece::Token(t) => Some(t),
            Piece::Trivia { .. } => None,
        })
        .collect())
}

/// Every byte of the input is covered by exactly one piece, in order.
pub fn tokenize_with_trivia(source: &str) -> Result<Vec<Piece>, LexError> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut pieces = Vec::new();
    let mut newline_before = false;

    loop {
        let start = cur.pos;
        let (line, col) = (cur.line, cur.col);
        let Some(c) = cur.peek() else {
            pieces.push(Piece::Token(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                span: Span {
                    start_line: line,
                    start_col: col,
                    end_line: line,
                    end_col: col,
                },
                start,
                end: start,
                newline_before,
            }));
            return Ok(pieces);
        };

        if c.is_whitespace() {
            while cur.peek().is_some_and(char::is_whitespace) {
                if cur.bump().is_some_and(is_line_terminator) {
                    newline_before = true;
                }
            }
            pieces.push(Piece::Trivia {
                kind: TriviaKind::Whitespace,
                start,
                end: cur.pos,
            });
            continue;
        }
        if cur.rest().starts_with("//") {
            while cur.peek().is_some_and(|c| !is_line_terminator(c)) {
                cur.bump();
            }
            pieces.push(Piece::Trivia {
                kind: TriviaKind::LineComment,
                start,
                end: cur.pos,
            });
            continue;
        }
        if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                match cur.bump() {
                    Some(c) if is_line_terminator(c) => newline_before = true,
                    Some(_) => {}
                    None => return Err(cur.error(line, col, "unterminated block comment")),
                }
            }
            pieces.push(Piece::Trivia {
                kind: TriviaKind::BlockComment,
                start,
                end: cur.pos,
            });
            continue;
        }

        let kind = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_part) {
                cur.bump();
            }
            if KEYWORDS.contains(&&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur)?;
            TokenKind::Number
        } else if c == '"' || c == '\'' {
            lex_string(&mut cur, c, line, col)?;
            TokenKind::String
        } else if c == '`' {
            return Err(cur.error(line, col, "template literals are not supported"));
        } else if let Some(p) = PUNCTUATORS.iter().find(|p| cur.rest().starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punct
        } else {
            return Err(cur.error(line, col, format!("unexpected character {c:?}")));
        };

        pieces.push(Piece::Token(Token {
            kind,
            text: source[start..cur.pos].to_string(),
            span: Span {
                start_line: line,
                start_col: col,
                end_line: cur.line,
                end_col: cur.col,
            },
            start,
            end: cur.pos,
            newline_before,
        }));
        newline_before = false;
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<(), LexError> {
    if cur.rest().starts_with("0x") || cur.rest().starts_with("0X") {
        cur.bump();
        cur.bump();
        if !cur.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
            return Err(cur.error(cur.line, cur.col, "malformed hex literal"));
        }
        while cur.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
            cur.bump();
        }
    } else {
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
        if cur.peek() == Some('.') {
            cur.bump();
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
        }
        if matches!(cur.peek(), Some('e' | 'E')) {
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(cur.error(cur.line, cur.col, "malformed exponent"));
            }
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    if cur.peek().is_some_and(is_ident_start) {
        return Err(cur.error(cur.line, cur.col, "identifier directly after number"));
    }
    Ok(())
}

fn lex_string(cur: &mut Cursor<'_>, quote: char, line: u32, col: u32) -> Result<(), LexError> {
    cur.bump();
    loop {
        match cur.peek() {
            None => return Err(cur.error(line, col, "unterminated string")),
            Some(c) if is_line_terminator(c) => {
                return Err(cur.error(line, col, "unterminated string"))
            }
            Some('\\') => {
                cur.bump();
                // Line continuation or any escaped character.
                if cur.bump().is_none() {
                    return Err(cur.error(line, col, "unterminated string"));
                }
            }
            Some(c) if c == quote => {
                cur.bump();
                return Ok(());
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
}
