//! Recursive-descent parser for the Logic-layer language.
//!
//! Grammar (single-error abort, no recovery):
//!
//! ```text
//! Program  := Stmt*
//! Stmt     := VarDecl | FunctionDecl | If | While | For | Return | Block | ExprStmt
//! Expr     := Assign
//! Assign   := Arrow | LogicalOr (AssignOp Assign)?
//! LogicalOr  := LogicalAnd ("||" LogicalAnd)*
//! LogicalAnd := Equality ("&&" Equality)*
//! Equality   := Relational (("==" | "!=" | "===" | "!==") Relational)*
//! Relational := Additive (("<" | ">" | "<=" | ">=" | "instanceof" | "in") Additive)*
//! Additive   := Multiplicative (("+" | "-") Multiplicative)*
//! Multiplicative := Unary (("*" | "/" | "%") Unary)*
//! Unary    := UnaryOp Unary | Postfix
//! Postfix  := CallMember ("++" | "--")?
//! CallMember := Primary ("." Name | "[" Expr "]" | "(" Args ")")*
//! Primary  := Identifier | this | literal | "(" Expr ")" | Array | Object | FunctionExpr
//! ```
//!
//! Semicolons may be omitted before a line break, a `}` or end of input.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{Node, NodeKind, Span, SyntaxTree};
use super::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{line}:{col}: {message} (at {offending_lexeme:?})")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub offending_lexeme: String,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            line: e.line,
            col: e.col,
            message: e.message,
            offending_lexeme: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub track_spans: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { track_spans: true }
    }
}

pub fn parse(source: &str) -> Result<SyntaxTree, ParseError> {
    parse_with(source, ParseOptions::default())
}

pub fn parse_with(source: &str, options: ParseOptions) -> Result<SyntaxTree, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        track_spans: options.track_spans,
    };
    let mut statements = Vec::new();
    while !p.at_eof() {
        p.statement_into(&mut statements)?;
    }
    let mut root = Node::branch(NodeKind::Program, statements);
    if options.track_spans {
        let eof = p.peek().span;
        root.span = Span {
            start_line: 1,
            start_col: 1,
            end_line: eof.end_line,
            end_col: eof.end_col,
        };
    }
    Ok(SyntaxTree { root })
}

/// Parses a single expression, rejecting trailing input.
pub fn parse_expression(source: &str) -> Result<Node, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        track_spans: false,
    };
    let e = p.expression()?;
    if !p.at_eof() {
        return Err(p.unexpected("expected end of expression"));
    }
    Ok(e)
}

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    track_spans: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.peek().is_punct(p) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&format!("expected '{p}'")))
        }
    }

    fn unexpected(&self, message: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.span.start_line,
            col: t.span.start_col,
            message: format!("{message}, found {t}"),
            offending_lexeme: t.text.clone(),
        }
    }

    fn start_span(&self) -> Span {
        self.peek().span
    }

    /// Span from `start` to the end of the last consumed token.
    fn finish(&self, mut node: Node, start: Span) -> Node {
        if self.track_spans {
            let end = if self.pos == 0 {
                start
            } else {
                self.tokens[self.pos - 1].span
            };
            node.span = Span {
                start_line: start.start_line,
                start_col: start.start_col,
                end_line: end.end_line,
                end_col: end.end_col,
            };
        }
        node
    }

    /// Builds a node whose span runs from its first child to the last
    /// consumed token (for left-recursive productions).
    fn finish_from(&self, node: Node, first: &Span) -> Node {
        let start = if self.track_spans { *first } else { Span::default() };
        self.finish(node, start)
    }

    fn consume_semicolon(&mut self) -> PResult<()> {
        if self.eat_punct(";") {
            return Ok(());
        }
        let t = self.peek();
        if t.kind == TokenKind::Eof || t.is_punct("}") || t.newline_before {
            return Ok(());
        }
        Err(self.unexpected("expected ';'"))
    }

    fn identifier(&mut self) -> PResult<Node> {
        if self.peek().kind != TokenKind::Identifier {
            return Err(self.unexpected("expected identifier"));
        }
        let start = self.start_span();
        let t = self.advance();
        Ok(self.finish(Node::leaf(NodeKind::Identifier, t.text), start))
    }

    // ------------------------------------------------------------------
    // Statements

    fn statement_into(&mut self, out: &mut Vec<Node>) -> PResult<()> {
        let t = self.peek();
        if t.is_punct(";") {
            // Empty statement; carries no structure.
            self.advance();
            return Ok(());
        }
        if t.kind == TokenKind::Keyword && matches!(t.text.as_str(), "var" | "let" | "const") {
            let decls = self.var_declarations(true)?;
            self.consume_semicolon()?;
            out.extend(decls);
            return Ok(());
        }
        let s = self.statement()?;
        out.push(s);
        Ok(())
    }

    fn statement(&mut self) -> PResult<Node> {
        let t = self.peek().clone();
        match (t.kind, t.text.as_str()) {
            (TokenKind::Punct, "{") => self.block(),
            (TokenKind::Keyword, "var" | "let" | "const") => {
                let mut decls = self.var_declarations(false)?;
                self.consume_semicolon()?;
                Ok(decls.remove(0))
            }
            (TokenKind::Keyword, "function") => self.function(NodeKind::FunctionDecl),
            (TokenKind::Keyword, "if") => self.if_statement(),
            (TokenKind::Keyword, "while") => self.while_statement(),
            (TokenKind::Keyword, "for") => self.for_statement(),
            (TokenKind::Keyword, "return") => self.return_statement(),
            (TokenKind::Keyword, kw)
                if !matches!(
                    kw,
                    "this" | "true" | "false" | "null" | "typeof" | "void" | "delete"
                ) =>
            {
                Err(self.unexpected("unsupported statement"))
            }
            (TokenKind::Eof, _) => Err(self.unexpected("expected statement")),
            _ => {
                let start = self.start_span();
                let e = self.expression()?;
                self.consume_semicolon()?;
                Ok(self.finish(Node::branch(NodeKind::ExprStmt, vec![e]), start))
            }
        }
    }

    fn block(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.peek().is_punct("}") {
            if self.at_eof() {
                return Err(self.unexpected("expected '}'"));
            }
            self.statement_into(&mut body)?;
        }
        self.advance();
        Ok(self.finish(Node::branch(NodeKind::Block, body), start))
    }

    /// `var a = 1, b` yields one VarDecl per declarator. Where only a single
    /// statement is allowed (`allow_many` false) a list is an error.
    fn var_declarations(&mut self, allow_many: bool) -> PResult<Vec<Node>> {
        let kw = self.advance();
        let mut decls = Vec::new();
        loop {
            let start = if decls.is_empty() { kw.span } else { self.start_span() };
            let name = self.identifier()?;
            let mut children = vec![name];
            if self.eat_punct("=") {
                children.push(self.assignment()?);
            }
            decls.push(self.finish(
                Node::with_value(NodeKind::VarDecl, kw.text.clone(), children),
                start,
            ));
            if !self.peek().is_punct(",") {
                break;
            }
            if !allow_many {
                return Err(self.unexpected("multiple declarators are not supported here"));
            }
            self.advance();
        }
        Ok(decls)
    }

    fn function(&mut self, kind: NodeKind) -> PResult<Node> {
        let start = self.start_span();
        self.advance(); // function
        let name = if self.peek().kind == TokenKind::Identifier {
            Some(self.advance().text)
        } else if kind == NodeKind::FunctionDecl {
            return Err(self.unexpected("expected function name"));
        } else {
            None
        };
        if self.peek().is_punct("*") {
            return Err(self.unexpected("generators are not supported"));
        }
        let mut children = self.parameters()?;
        children.push(self.block()?);
        Ok(self.finish(Node::new(kind, name, children), start))
    }

    fn parameters(&mut self) -> PResult<Vec<Node>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                params.push(self.identifier()?);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(params)
    }

    fn paren_condition(&mut self) -> PResult<Node> {
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        Ok(cond)
    }

    fn if_statement(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.advance();
        let cond = self.paren_condition()?;
        let then = self.statement()?;
        let mut children = vec![cond, then];
        if self.peek().is_keyword("else") {
            self.advance();
            children.push(self.statement()?);
        }
        Ok(self.finish(Node::branch(NodeKind::If, children), start))
    }

    fn while_statement(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.advance();
        let cond = self.paren_condition()?;
        let body = self.statement()?;
        Ok(self.finish(Node::branch(NodeKind::While, vec![cond, body]), start))
    }

    fn for_statement(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.advance();
        self.expect_punct("(")?;
        let mut mask = String::with_capacity(3);
        let mut children = Vec::new();

        if self.peek().is_punct(";") {
            mask.push('-');
        } else {
            let t = self.peek();
            let init = if t.kind == TokenKind::Keyword
                && matches!(t.text.as_str(), "var" | "let" | "const")
            {
                self.var_declarations(false)?.remove(0)
            } else {
                self.expression()?
            };
            mask.push('i');
            children.push(init);
        }
        self.expect_punct(";")?;

        if self.peek().is_punct(";") {
            mask.push('-');
        } else {
            mask.push('t');
            children.push(self.expression()?);
        }
        self.expect_punct(";")?;

        if self.peek().is_punct(")") {
            mask.push('-');
        } else {
            mask.push('u');
            children.push(self.expression()?);
        }
        self.expect_punct(")")?;

        children.push(self.statement()?);
        Ok(self.finish(Node::with_value(NodeKind::For, mask, children), start))
    }

    fn return_statement(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.advance();
        let t = self.peek();
        let mut children = Vec::new();
        if !(t.is_punct(";") || t.is_punct("}") || t.kind == TokenKind::Eof || t.newline_before) {
            children.push(self.expression()?);
        }
        self.consume_semicolon()?;
        Ok(self.finish(Node::branch(NodeKind::Return, children), start))
    }

    // ------------------------------------------------------------------
    // Expressions

    fn expression(&mut self) -> PResult<Node> {
        self.assignment()
    }

    /// True when the `(` at the cursor opens an arrow parameter list.
    fn at_arrow(&self) -> bool {
        if !self.peek().is_punct("(") {
            return false;
        }
        let mut depth = 0usize;
        let mut i = self.pos;
        while i < self.tokens.len() {
            let t = &self.tokens[i];
            match (t.kind, t.text.as_str()) {
                (TokenKind::Eof, _) => return false,
                (TokenKind::Punct, "(" | "[" | "{") => depth += 1,
                (TokenKind::Punct, ")" | "]" | "}") => {
                    depth -= 1;
                    if depth == 0 {
                        return self
                            .tokens
                            .get(i + 1)
                            .is_some_and(|n| n.is_punct("=>") && !n.newline_before);
                    }
                }
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn arrow_function(&mut self) -> PResult<Node> {
        let start = self.start_span();
        let mut children = self.parameters()?;
        self.expect_punct("=>")?;
        let body = if self.peek().is_punct("{") {
            self.block()?
        } else {
            self.assignment()?
        };
        children.push(body);
        Ok(self.finish(Node::branch(NodeKind::ArrowFunction, children), start))
    }

    fn assignment(&mut self) -> PResult<Node> {
        if self.at_arrow() {
            return self.arrow_function();
        }
        let target = self.logical_or()?;
        let t = self.peek();
        if t.kind == TokenKind::Punct && ASSIGN_OPS.contains(&t.text.as_str()) {
            if !matches!(
                target.kind,
                NodeKind::Identifier | NodeKind::Member | NodeKind::Index
            ) {
                return Err(self.unexpected("invalid assignment target"));
            }
            let op = self.advance().text;
            let value = self.assignment()?;
            let first = target.span;
            return Ok(self.finish_from(
                Node::with_value(NodeKind::Assign, op, vec![target, value]),
                &first,
            ));
        }
        if t.kind == TokenKind::Punct && matches!(t.text.as_str(), "?" | "??" | "?.") {
            return Err(self.unexpected("unsupported operator"));
        }
        Ok(target)
    }

    fn binary_level(
        &mut self,
        ops: &[&str],
        keyword_ops: &[&str],
        next: fn(&mut Parser) -> PResult<Node>,
    ) -> PResult<Node> {
        let mut left = next(self)?;
        loop {
            let t = self.peek();
            let matched = (t.kind == TokenKind::Punct && ops.contains(&t.text.as_str()))
                || (t.kind == TokenKind::Keyword && keyword_ops.contains(&t.text.as_str()));
            if !matched {
                return Ok(left);
            }
            let op = self.advance().text;
            let right = next(self)?;
            let first = left.span;
            left = self.finish_from(
                Node::with_value(NodeKind::Binary, op, vec![left, right]),
                &first,
            );
        }
    }

    fn logical_or(&mut self) -> PResult<Node> {
        self.binary_level(&["||"], &[], Parser::logical_and)
    }

    fn logical_and(&mut self) -> PResult<Node> {
        self.binary_level(&["&&"], &[], Parser::equality)
    }

    fn equality(&mut self) -> PResult<Node> {
        self.binary_level(&["==", "!=", "===", "!=="], &[], Parser::relational)
    }

    fn relational(&mut self) -> PResult<Node> {
        self.binary_level(&["<", ">", "<=", ">="], &["instanceof", "in"], Parser::additive)
    }

    fn additive(&mut self) -> PResult<Node> {
        self.binary_level(&["+", "-"], &[], Parser::multiplicative)
    }

    fn multiplicative(&mut self) -> PResult<Node> {
        self.binary_level(&["*", "/", "%"], &[], Parser::unary)
    }

    fn unary(&mut self) -> PResult<Node> {
        let t = self.peek();
        let is_op = (t.kind == TokenKind::Punct
            && matches!(t.text.as_str(), "!" | "-" | "+" | "~" | "++" | "--"))
            || (t.kind == TokenKind::Keyword
                && matches!(t.text.as_str(), "typeof" | "void" | "delete"));
        if !is_op {
            return self.postfix();
        }
        let start = self.start_span();
        let op = self.advance().text;
        let operand = self.unary()?;
        if (op == "++" || op == "--")
            && !matches!(
                operand.kind,
                NodeKind::Identifier | NodeKind::Member | NodeKind::Index
            )
        {
            return Err(self.unexpected("invalid update target"));
        }
        Ok(self.finish(Node::with_value(NodeKind::Unary, op, vec![operand]), start))
    }

    fn postfix(&mut self) -> PResult<Node> {
        let operand = self.call_member()?;
        let t = self.peek();
        if t.kind == TokenKind::Punct && (t.text == "++" || t.text == "--") && !t.newline_before {
            if !matches!(
                operand.kind,
                NodeKind::Identifier | NodeKind::Member | NodeKind::Index
            ) {
                return Err(self.unexpected("invalid update target"));
            }
            let op = format!("post{}", self.advance().text);
            let first = operand.span;
            return Ok(self.finish_from(
                Node::with_value(NodeKind::Unary, op, vec![operand]),
                &first,
            ));
        }
        Ok(operand)
    }

    fn call_member(&mut self) -> PResult<Node> {
        let mut e = self.primary()?;
        loop {
            let first = e.span;
            if self.eat_punct(".") {
                let t = self.peek();
                if !matches!(t.kind, TokenKind::Identifier | TokenKind::Keyword) {
                    return Err(self.unexpected("expected property name"));
                }
                let name = self.advance().text;
                e = self.finish_from(Node::with_value(NodeKind::Member, name, vec![e]), &first);
            } else if self.eat_punct("[") {
                let index = self.expression()?;
                self.expect_punct("]")?;
                e = self.finish_from(Node::branch(NodeKind::Index, vec![e, index]), &first);
            } else if self.peek().is_punct("(") {
                self.advance();
                let mut children = vec![e];
                if !self.eat_punct(")") {
                    loop {
                        children.push(self.assignment()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                e = self.finish_from(Node::branch(NodeKind::Call, children), &first);
            } else if self.peek().is_punct("?.") {
                return Err(self.unexpected("optional chaining is not supported"));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Node> {
        let start = self.start_span();
        let t = self.peek().clone();
        match (t.kind, t.text.as_str()) {
            (TokenKind::Identifier, _) => self.identifier(),
            (TokenKind::Keyword, "this") => {
                self.advance();
                Ok(self.finish(Node::leaf(NodeKind::Identifier, "this"), start))
            }
            (TokenKind::Keyword, "true" | "false") => {
                self.advance();
                Ok(self.finish(Node::leaf(NodeKind::BoolLit, t.text), start))
            }
            (TokenKind::Keyword, "null") => {
                self.advance();
                Ok(self.finish(Node::leaf(NodeKind::NullLit, "null"), start))
            }
            (TokenKind::Keyword, "function") => self.function(NodeKind::FunctionExpr),
            (TokenKind::Number, _) => {
                self.advance();
                Ok(self.finish(Node::leaf(NodeKind::NumberLit, t.text), start))
            }
            (TokenKind::String, _) => {
                self.advance();
                Ok(self.finish(Node::leaf(NodeKind::StringLit, t.text), start))
            }
            (TokenKind::Punct, "(") => {
                self.advance();
                if self.eat_punct(")") {
                    return Err(self.unexpected("expected '=>'"));
                }
                let e = self.expression()?;
                if e.kind == NodeKind::Identifier && self.peek().is_punct(",") {
                    // Reads like an arrow parameter list that lost a token;
                    // report where it stops looking like one.
                    while self.eat_punct(",") {
                        self.identifier()?;
                    }
                    self.expect_punct(")")?;
                    return Err(self.unexpected("expected '=>'"));
                }
                self.expect_punct(")")?;
                Ok(e)
            }
            (TokenKind::Punct, "[") => self.array_literal(),
            (TokenKind::Punct, "{") => self.object_literal(),
            _ => Err(self.unexpected("expected expression")),
        }
    }

    fn array_literal(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.advance();
        let mut elements = Vec::new();
        while !self.eat_punct("]") {
            if self.peek().is_punct(",") {
                return Err(self.unexpected("array holes are not supported"));
            }
            elements.push(self.assignment()?);
            if !self.peek().is_punct("]") {
                self.expect_punct(",")?;
            }
        }
        Ok(self.finish(Node::branch(NodeKind::ArrayLit, elements), start))
    }

    fn object_literal(&mut self) -> PResult<Node> {
        let start = self.start_span();
        self.advance();
        let mut props: Vec<Node> = Vec::new();
        while !self.eat_punct("}") {
            let pstart = self.start_span();
            let t = self.peek();
            if !matches!(
                t.kind,
                TokenKind::Identifier | TokenKind::Keyword | TokenKind::String | TokenKind::Number
            ) {
                return Err(self.unexpected("expected property key"));
            }
            let key = self.advance().text;
            self.expect_punct(":")?;
            let value = self.assignment()?;
            props.push(self.finish(
                Node::with_value(NodeKind::Property, key, vec![value]),
                pstart,
            ));
            if !self.peek().is_punct("}") {
                self.expect_punct(",")?;
            }
        }
        Ok(self.finish(Node::branch(NodeKind::ObjectLit, props), start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeKind::*;

    fn ident(n: &str) -> Node {
        Node::leaf(Identifier, n)
    }

    fn num(n: &str) -> Node {
        Node::leaf(NumberLit, n)
    }

    #[test]
    fn var_declaration() {
        let t = parse("var x = 1;").unwrap();
        assert_eq!(
            t,
            SyntaxTree::new(vec![Node::with_value(VarDecl, "var", vec![ident("x"), num("1")])])
        );
    }

    #[test]
    fn function_declaration() {
        let t = parse("function f(a){return a+1;}").unwrap();
        let expected = SyntaxTree::new(vec![Node::with_value(
            FunctionDecl,
            "f",
            vec![
                ident("a"),
                Node::branch(
                    Block,
                    vec![Node::branch(
                        Return,
                        vec![Node::with_value(Binary, "+", vec![ident("a"), num("1")])],
                    )],
                ),
            ],
        )]);
        assert_eq!(t, expected);
    }

    #[test]
    fn unclosed_if_reports_eof_position() {
        let err = parse("if (x").unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
        assert!(err.message.contains("expected ')'"), "{}", err.message);
        assert_eq!(err.offending_lexeme, "");
    }

    #[test]
    fn precedence() {
        let e = parse_expression("a = b || c && d == e < f + g * !h").unwrap();
        let expected = Node::with_value(
            Assign,
            "=",
            vec![
                ident("a"),
                Node::with_value(
                    Binary,
                    "||",
                    vec![
                        ident("b"),
                        Node::with_value(
                            Binary,
                            "&&",
                            vec![
                                ident("c"),
                                Node::with_value(
                                    Binary,
                                    "==",
                                    vec![
                                        ident("d"),
                                        Node::with_value(
                                            Binary,
                                            "<",
                                            vec![
                                                ident("e"),
                                                Node::with_value(
                                                    Binary,
                                                    "+",
                                                    vec![
                                                        ident("f"),
                                                        Node::with_value(
                                                            Binary,
                                                            "*",
                                                            vec![
                                                                ident("g"),
                                                                Node::with_value(
                                                                    Unary,
                                                                    "!",
                                                                    vec![ident("h")],
                                                                ),
                                                            ],
                                                        ),
                                                    ],
                                                ),
                                            ],
                                        ),
                                    ],
                                ),
                            ],
                        ),
                    ],
                ),
            ],
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn left_associativity() {
        let e = parse_expression("a - b - c").unwrap();
        assert_eq!(e.children[0].kind, Binary);
        assert_eq!(e.children[1], ident("c"));
    }

    #[test]
    fn assignment_is_right_associative() {
        let e = parse_expression("a = b = 1").unwrap();
        assert_eq!(e.children[1].kind, Assign);
    }

    #[test]
    fn member_call_chain() {
        let e = parse_expression("wx.request({url: u}).then(f)[0]").unwrap();
        assert_eq!(e.kind, Index);
        let call = &e.children[0];
        assert_eq!(call.kind, Call);
        assert_eq!(call.children[0].kind, Member);
        assert_eq!(call.children[0].value_str(), "then");
    }

    #[test]
    fn arrow_functions() {
        let e = parse_expression("(a, b) => a + b").unwrap();
        assert_eq!(e.kind, ArrowFunction);
        assert_eq!(e.function_params().len(), 2);
        assert_eq!(e.function_body().unwrap().kind, Binary);
        let e = parse_expression("() => { return 1; }").unwrap();
        assert_eq!(e.children.len(), 1);
        assert_eq!(e.children[0].kind, Block);
        // A parenthesised expression is not an arrow.
        assert_eq!(parse_expression("(a + b) * c").unwrap().kind, Binary);
    }

    #[test]
    fn multiple_declarators_split() {
        let t = parse("var a = 1, b;").unwrap();
        assert_eq!(t.statements().len(), 2);
        assert_eq!(t.statements()[1].children, vec![ident("b")]);
        assert!(parse("for (var i = 0, j = 1; i < j; i++) {}").is_err());
    }

    #[test]
    fn for_mask() {
        let t = parse("for (;;) {}").unwrap();
        assert_eq!(t.statements()[0].value_str(), "---");
        let t = parse("for (var i = 0; i < 3; i++) x(i);").unwrap();
        let f = &t.statements()[0];
        assert_eq!(f.value_str(), "itu");
        assert_eq!(f.children.len(), 4);
        assert_eq!(f.children[0].kind, VarDecl);
        assert_eq!(f.children[2].value_str(), "post++");
    }

    #[test]
    fn semicolon_insertion_at_newlines() {
        let t = parse("var a = 1\nvar b = 2\nf()").unwrap();
        assert_eq!(t.statements().len(), 3);
        assert!(parse("var a = 1 var b = 2").is_err());
        // `return` followed by a newline returns nothing.
        let t = parse("function f() { return\n1 }").unwrap();
        let body = t.statements()[0].function_body().unwrap();
        assert_eq!(body.children[0].children.len(), 0);
        assert_eq!(body.children[1].kind, ExprStmt);
    }

    #[test]
    fn unsupported_constructs_fail() {
        for src in [
            "class A {}",
            "new Foo();",
            "a ? b : c;",
            "x => x;",
            "`t`;",
            "var r = /ab+c/;",
            "switch (x) {}",
            "a, b;",
            "async function f() {}",
            "function* g() {}",
            "a?.b;",
            "[1, , 2];",
            "1 = 2;",
        ] {
            assert!(parse(src).is_err(), "{src} should fail");
        }
    }

    #[test]
    fn this_is_an_identifier() {
        let e = parse_expression("this.setData({a: 1})").unwrap();
        assert_eq!(e.children[0].children[0], ident("this"));
    }

    #[test]
    fn object_keys_keep_lexeme() {
        let e = parse_expression("{'a': 1, b: 2, 3: 4, default: 5}").unwrap();
        let keys: Vec<_> = e.children.iter().map(|p| p.value_str()).collect();
        assert_eq!(keys, ["'a'", "b", "3", "default"]);
    }

    #[test]
    fn spans_nest_and_are_optional() {
        let src = "function f(a) {\n  if (a > 1) {\n    g(a, [1, 2]);\n  }\n}\n";
        let t = parse(src).unwrap();
        t.check_well_formed().unwrap();
        let f = &t.statements()[0];
        assert_eq!(f.span.start(), (1, 1));
        assert_eq!(f.span.end(), (5, 2));
        let no_spans = parse_with(src, ParseOptions { track_spans: false }).unwrap();
        assert_eq!(no_spans, t);
        assert!(no_spans.root.preorder().iter().all(|n| n.span.is_empty()));
    }

    #[test]
    fn empty_statements_are_dropped() {
        let t = parse(";;function f() {};").unwrap();
        assert_eq!(t.statements().len(), 1);
    }

    #[test]
    fn lex_error_surfaces_as_parse_error() {
        let err = parse("var s = \"abc").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("unterminated"));
    }
}
