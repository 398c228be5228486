//! Indentation-aware recursive-descent parser for Python source.
//!
//! Layout tokens (NEWLINE, INDENT, DEDENT) are derived from token positions
//! rather than produced by the lexer, which keeps the lexical stream free of
//! synthetic tokens. The first token's column is taken as the base
//! indentation so methods cut out of a class body parse as-is.

use alloc::string::String;
use alloc::vec::Vec;

use super::tokens::{significant, Tok, TokKind};
use super::{AstNode, SyntaxError};
use crate::record::Language;

type PResult<T> = Result<T, SyntaxError>;

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del",
    "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

const AUG_OPS: &[&str] = &["+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="];

const ARITH_LEVELS: &[&[&str]] = &[&["|"], &["^"], &["&"], &["<<", ">>"], &["+", "-"], &["*", "/", "//", "%", "@"]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Token,
    Newline,
    Indent,
    Dedent,
    End,
}

#[derive(Debug, Clone, Copy)]
struct PTok<'a> {
    layout: Layout,
    text: &'a str,
    kind: TokKind,
    start: usize,
    end: usize,
}

fn column(src: &str, pos: usize) -> usize {
    let line_start = src[..pos].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let mut col = 0;
    for c in src[line_start..pos].chars() {
        col = if c == '\t' { (col / 8 + 1) * 8 } else { col + 1 };
    }
    col
}

fn line_of(line_starts: &[usize], pos: usize) -> usize {
    match line_starts.binary_search(&pos) {
        Ok(i) => i,
        Err(i) => i - 1,
    }
}

fn layout_tokens<'a>(src: &'a str, toks: &[Tok<'a>]) -> PResult<Vec<PTok<'a>>> {
    let mut line_starts = alloc::vec![0usize];
    line_starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
    let synth = |layout, pos| PTok { layout, text: "", kind: TokKind::Punct, start: pos, end: pos };

    let mut out = Vec::with_capacity(toks.len() + 16);
    let mut indents: Vec<usize> = Vec::new();
    let mut depth = 0usize;
    let mut continuation = false;
    let mut prev_end_line: Option<usize> = None;
    for t in toks {
        if t.text == "\\" {
            continuation = true;
            continue;
        }
        let line = line_of(&line_starts, t.start);
        match prev_end_line {
            None => indents.push(column(src, t.start)),
            Some(prev) if depth == 0 && !continuation && line > prev => {
                out.push(synth(Layout::Newline, t.start));
                let col = column(src, t.start);
                let top = *indents.last().expect("base indent");
                if col > top {
                    indents.push(col);
                    out.push(synth(Layout::Indent, t.start));
                } else {
                    while col < *indents.last().expect("base indent") {
                        indents.pop();
                        out.push(synth(Layout::Dedent, t.start));
                        if indents.is_empty() {
                            return Err(SyntaxError::new(t.start, "unindent below base indentation"));
                        }
                    }
                    if col != *indents.last().expect("base indent") {
                        return Err(SyntaxError::new(t.start, "unindent does not match any outer indentation level"));
                    }
                }
            }
            _ => {}
        }
        continuation = false;
        match t.text {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth = depth.saturating_sub(1),
            _ => {}
        }
        out.push(PTok { layout: Layout::Token, text: t.text, kind: t.kind, start: t.start, end: t.end });
        prev_end_line = Some(line_of(&line_starts, t.end.saturating_sub(1).max(t.start)));
    }
    let end = src.len();
    if !out.is_empty() {
        out.push(synth(Layout::Newline, end));
    }
    for _ in 1..indents.len() {
        out.push(synth(Layout::Dedent, end));
    }
    out.push(synth(Layout::End, end));
    Ok(out)
}

pub(crate) fn parse(code: &str) -> PResult<AstNode> {
    let toks = significant(code, Language::Python);
    let mut p = Parser { toks: layout_tokens(code, &toks)?, pos: 0, last_end: 0 };
    let mut module = AstNode::new("Module", (0, code.len()));
    while p.layout() != Layout::End {
        if p.layout() == Layout::Newline {
            p.pos += 1;
            continue;
        }
        module.children.extend(p.statement()?);
    }
    Ok(module)
}

/// Parses a standalone expression (used for f-string replacement fields).
fn parse_expression_at(code: &str, offset: usize) -> PResult<AstNode> {
    let toks: Vec<Tok<'_>> = significant(code, Language::Python);
    let mut ptoks: Vec<PTok<'_>> = toks
        .iter()
        .map(|t| PTok { layout: Layout::Token, text: t.text, kind: t.kind, start: t.start, end: t.end })
        .collect();
    ptoks.push(PTok { layout: Layout::End, text: "", kind: TokKind::Punct, start: code.len(), end: code.len() });
    let mut p = Parser { toks: ptoks, pos: 0, last_end: 0 };
    let mut node = p.testlist_star_expr()?;
    if p.layout() != Layout::End {
        return Err(p.error("unexpected token in f-string expression"));
    }
    shift_spans(&mut node, offset);
    Ok(node)
}

fn shift_spans(node: &mut AstNode, offset: usize) {
    node.span = (node.span.0 + offset, node.span.1 + offset);
    for c in &mut node.children {
        shift_spans(c, offset);
    }
}

struct Parser<'a> {
    toks: Vec<PTok<'a>>,
    pos: usize,
    last_end: usize,
}

impl<'a> Parser<'a> {
    fn cur(&self) -> PTok<'a> {
        self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn layout(&self) -> Layout {
        self.cur().layout
    }

    fn peek(&self) -> &'a str {
        let t = self.cur();
        if t.layout == Layout::Token {
            t.text
        } else {
            ""
        }
    }

    fn peek_n(&self, n: usize) -> &'a str {
        match self.toks.get(self.pos + n) {
            Some(t) if t.layout == Layout::Token => t.text,
            _ => "",
        }
    }

    fn is(&self, s: &str) -> bool {
        self.peek() == s
    }

    fn start(&self) -> usize {
        self.cur().start
    }

    fn span_from(&self, start: usize) -> (usize, usize) {
        (start, self.last_end.max(start))
    }

    fn advance(&mut self) -> &'a str {
        let t = self.cur();
        self.last_end = t.end;
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t.text
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.layout() == Layout::Token && self.is(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let t = self.cur();
        let found = match t.layout {
            Layout::Token => t.text,
            Layout::Newline => "newline",
            Layout::Indent => "indent",
            Layout::Dedent => "dedent",
            Layout::End => "end of input",
        };
        SyntaxError::new(t.start, alloc::format!("{}, found `{}`", message.into(), found))
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(alloc::format!("expected `{s}`")))
        }
    }

    fn expect_layout(&mut self, layout: Layout) -> PResult<()> {
        if self.layout() == layout {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(alloc::format!("expected {layout:?}")))
        }
    }

    fn is_name(&self) -> bool {
        let t = self.cur();
        t.layout == Layout::Token && t.kind == TokKind::Ident && !KEYWORDS.contains(&t.text)
    }

    fn name(&mut self) -> PResult<&'a str> {
        if self.is_name() {
            Ok(self.advance())
        } else {
            Err(self.error("expected name"))
        }
    }

    fn at_simple_end(&self) -> bool {
        matches!(self.layout(), Layout::Newline | Layout::End | Layout::Dedent) || self.is(";")
    }

    // ---- statements ----

    fn statement(&mut self) -> PResult<Vec<AstNode>> {
        match self.peek() {
            "if" => Ok(alloc::vec![self.if_statement()?]),
            "while" => Ok(alloc::vec![self.while_statement()?]),
            "for" => Ok(alloc::vec![self.for_statement(self.start(), "For")?]),
            "try" => Ok(alloc::vec![self.try_statement()?]),
            "with" => Ok(alloc::vec![self.with_statement(self.start(), "With")?]),
            "def" => Ok(alloc::vec![self.funcdef(self.start(), "FunctionDef", Vec::new())?]),
            "class" => Ok(alloc::vec![self.classdef(self.start(), Vec::new())?]),
            "@" => Ok(alloc::vec![self.decorated()?]),
            "async" => {
                let start = self.start();
                self.advance();
                match self.peek() {
                    "def" => Ok(alloc::vec![self.funcdef(start, "AsyncFunctionDef", Vec::new())?]),
                    "for" => Ok(alloc::vec![self.for_statement(start, "AsyncFor")?]),
                    "with" => Ok(alloc::vec![self.with_statement(start, "AsyncWith")?]),
                    _ => Err(self.error("expected `def`, `for` or `with` after `async`")),
                }
            }
            _ => self.simple_statements(),
        }
    }

    fn simple_statements(&mut self) -> PResult<Vec<AstNode>> {
        let mut out = alloc::vec![self.small_statement()?];
        while self.eat(";") {
            if self.at_simple_end() {
                break;
            }
            out.push(self.small_statement()?);
        }
        match self.layout() {
            Layout::Newline => {
                self.pos += 1;
                Ok(out)
            }
            Layout::End | Layout::Dedent => Ok(out),
            _ => Err(self.error("expected end of statement")),
        }
    }

    fn small_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let node = match self.peek() {
            "pass" => {
                self.advance();
                AstNode::new("Pass", (start, start))
            }
            "break" => {
                self.advance();
                AstNode::new("Break", (start, start))
            }
            "continue" => {
                self.advance();
                AstNode::new("Continue", (start, start))
            }
            "return" => {
                self.advance();
                let mut node = AstNode::new("Return", (start, start));
                if !self.at_simple_end() {
                    node.push(self.testlist_star_expr()?);
                }
                node
            }
            "raise" => {
                self.advance();
                let mut node = AstNode::new("Raise", (start, start));
                if !self.at_simple_end() {
                    node.push(self.test()?);
                    if self.eat("from") {
                        node.push(self.test()?);
                    }
                }
                node
            }
            "global" | "nonlocal" => {
                let kind = if self.advance() == "global" { "Global" } else { "Nonlocal" };
                loop {
                    self.name()?;
                    if !self.eat(",") {
                        break;
                    }
                }
                AstNode::new(kind, (start, start))
            }
            "del" => {
                self.advance();
                let mut node = AstNode::new("Delete", (start, start));
                loop {
                    node.push(self.expr()?);
                    if !self.eat(",") || self.at_simple_end() {
                        break;
                    }
                }
                node
            }
            "assert" => {
                self.advance();
                let mut node = AstNode::new("Assert", (start, start));
                node.push(self.test()?);
                if self.eat(",") {
                    node.push(self.test()?);
                }
                node
            }
            "import" => {
                self.advance();
                let mut node = AstNode::new("Import", (start, start));
                loop {
                    node.push(self.alias(true)?);
                    if !self.eat(",") {
                        break;
                    }
                }
                node
            }
            "from" => self.import_from()?,
            _ => self.expression_statement()?,
        };
        let mut node = node;
        node.span = self.span_from(start);
        Ok(node)
    }

    fn alias(&mut self, dotted: bool) -> PResult<AstNode> {
        let start = self.start();
        let mut name = String::from(self.name()?);
        while dotted && self.is(".") {
            self.advance();
            name.push('.');
            name.push_str(self.name()?);
        }
        if self.eat("as") {
            self.name()?;
        }
        Ok(AstNode::labeled("alias", name, self.span_from(start)))
    }

    fn import_from(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("from")?;
        while self.eat(".") || self.eat("...") {}
        if self.is_name() {
            self.name()?;
            while self.eat(".") {
                self.name()?;
            }
        }
        self.expect("import")?;
        let mut node = AstNode::new("ImportFrom", (start, start));
        if self.is("*") {
            let s = self.start();
            self.advance();
            node.push(AstNode::labeled("alias", "*", self.span_from(s)));
        } else {
            let paren = self.eat("(");
            loop {
                if paren && self.is(")") {
                    break;
                }
                node.push(self.alias(false)?);
                if !self.eat(",") {
                    break;
                }
            }
            if paren {
                self.expect(")")?;
            }
        }
        Ok(node)
    }

    fn expression_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let first = if self.is("yield") { self.yield_expr()? } else { self.testlist_star_expr()? };
        if self.eat(":") {
            let annotation = self.test()?;
            let mut node = AstNode::new("AnnAssign", (start, start));
            node.push(first);
            node.push(annotation);
            if self.eat("=") {
                node.push(self.assignment_value()?);
            }
            return Ok(node);
        }
        if AUG_OPS.contains(&self.peek()) {
            self.advance();
            let value = self.assignment_value()?;
            return Ok(AstNode::new("AugAssign", (start, start)).with_children(alloc::vec![first, value]));
        }
        if self.is("=") {
            let mut parts = alloc::vec![first];
            while self.eat("=") {
                parts.push(self.assignment_value()?);
            }
            return Ok(AstNode::new("Assign", (start, start)).with_children(parts));
        }
        Ok(AstNode::new("Expr", (start, start)).with_children(alloc::vec![first]))
    }

    fn assignment_value(&mut self) -> PResult<AstNode> {
        if self.is("yield") {
            self.yield_expr()
        } else {
            self.testlist_star_expr()
        }
    }

    fn suite(&mut self) -> PResult<Vec<AstNode>> {
        self.expect(":")?;
        if self.layout() != Layout::Newline {
            return self.simple_statements();
        }
        self.expect_layout(Layout::Newline)?;
        self.expect_layout(Layout::Indent)?;
        let mut body = Vec::new();
        loop {
            match self.layout() {
                Layout::Dedent => {
                    self.pos += 1;
                    break;
                }
                Layout::End => break,
                Layout::Newline => {
                    self.pos += 1;
                }
                _ => body.extend(self.statement()?),
            }
        }
        Ok(body)
    }

    fn if_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.advance(); // `if` or `elif`
        let mut node = AstNode::new("If", (start, start));
        node.push(self.named_expr_test()?);
        node.children.extend(self.suite()?);
        if self.is("elif") {
            node.push(self.if_statement()?);
        } else if self.eat("else") {
            node.children.extend(self.suite()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn while_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("while")?;
        let mut node = AstNode::new("While", (start, start));
        node.push(self.named_expr_test()?);
        node.children.extend(self.suite()?);
        if self.eat("else") {
            node.children.extend(self.suite()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn for_statement(&mut self, start: usize, kind: &'static str) -> PResult<AstNode> {
        self.expect("for")?;
        let mut node = AstNode::new(kind, (start, start));
        node.push(self.target_list()?);
        self.expect("in")?;
        node.push(self.testlist_star_expr()?);
        node.children.extend(self.suite()?);
        if self.eat("else") {
            node.children.extend(self.suite()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    /// `for` targets: bitwise-level expressions so `in` is not consumed.
    fn target_list(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let first = self.star_or(|p| p.expr())?;
        if !self.is(",") {
            return Ok(first);
        }
        let mut elts = alloc::vec![first];
        while self.eat(",") {
            if self.is("in") || self.is("=") {
                break;
            }
            elts.push(self.star_or(|p| p.expr())?);
        }
        Ok(AstNode::new("Tuple", self.span_from(start)).with_children(elts))
    }

    fn try_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("try")?;
        let mut node = AstNode::new("Try", (start, start));
        node.children.extend(self.suite()?);
        while self.is("except") {
            let h_start = self.start();
            self.advance();
            if self.eat("*") {
                node.kind = "TryStar";
            }
            let mut handler = AstNode::new("ExceptHandler", (h_start, h_start));
            if !self.is(":") {
                handler.push(self.test()?);
                if self.eat(",") {
                    // Python 2 style `except E, e` is not valid Python 3
                    return Err(self.error("expected `as`"));
                }
                if self.eat("as") {
                    self.name()?;
                }
            }
            handler.children.extend(self.suite()?);
            handler.span = self.span_from(h_start);
            node.push(handler);
        }
        let has_handler = node.children.iter().any(|c| c.kind == "ExceptHandler");
        if has_handler && self.eat("else") {
            node.children.extend(self.suite()?);
        }
        if self.eat("finally") {
            node.children.extend(self.suite()?);
        } else if !has_handler {
            return Err(self.error("expected `except` or `finally`"));
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn with_statement(&mut self, start: usize, kind: &'static str) -> PResult<AstNode> {
        self.expect("with")?;
        let mut node = AstNode::new(kind, (start, start));
        // parenthesized item lists: `with (a as b, c as d):`
        let save = (self.pos, self.last_end);
        if self.is("(") {
            self.advance();
            let mut items = Vec::new();
            let parsed = loop {
                if self.is(")") {
                    break true;
                }
                match self.with_item() {
                    Ok(item) => items.push(item),
                    Err(_) => break false,
                }
                if !self.eat(",") {
                    break self.is(")");
                }
            };
            if parsed && self.eat(")") && self.is(":") {
                node.children.extend(items);
                node.children.extend(self.suite()?);
                node.span = self.span_from(start);
                return Ok(node);
            }
            self.pos = save.0;
            self.last_end = save.1;
        }
        loop {
            node.push(self.with_item()?);
            if !self.eat(",") {
                break;
            }
        }
        node.children.extend(self.suite()?);
        node.span = self.span_from(start);
        Ok(node)
    }

    fn with_item(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let mut item = AstNode::new("withitem", (start, start));
        item.push(self.test()?);
        if self.eat("as") {
            item.push(self.star_or(|p| p.expr())?);
        }
        item.span = self.span_from(start);
        Ok(item)
    }

    fn decorated(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let mut decorators = Vec::new();
        while self.eat("@") {
            decorators.push(self.named_expr_test()?);
            self.expect_layout(Layout::Newline)?;
        }
        match self.peek() {
            "def" => self.funcdef(start, "FunctionDef", decorators),
            "class" => self.classdef(start, decorators),
            "async" => {
                self.advance();
                self.funcdef(start, "AsyncFunctionDef", decorators)
            }
            _ => Err(self.error("expected `def` or `class` after decorator")),
        }
    }

    fn funcdef(&mut self, start: usize, kind: &'static str, decorators: Vec<AstNode>) -> PResult<AstNode> {
        self.expect("def")?;
        let name = self.name()?;
        let mut node = AstNode::labeled(kind, name, (start, start));
        self.expect("(")?;
        node.push(self.parameters(")", true)?);
        self.expect(")")?;
        let returns = if self.eat("->") { Some(self.test()?) } else { None };
        node.children.extend(self.suite()?);
        node.children.extend(decorators);
        node.children.extend(returns);
        node.span = self.span_from(start);
        Ok(node)
    }

    fn classdef(&mut self, start: usize, decorators: Vec<AstNode>) -> PResult<AstNode> {
        self.expect("class")?;
        let name = self.name()?;
        let mut node = AstNode::labeled("ClassDef", name, (start, start));
        if self.is("(") {
            let (args, keywords) = self.call_arguments()?;
            node.children.extend(args);
            node.children.extend(keywords);
        }
        node.children.extend(self.suite()?);
        node.children.extend(decorators);
        node.span = self.span_from(start);
        Ok(node)
    }

    /// Parameter list up to (not including) `close`. Children follow the
    /// field order posonlyargs, args, vararg, kwonlyargs, kw_defaults, kwarg,
    /// defaults.
    fn parameters(&mut self, close: &str, annotations: bool) -> PResult<AstNode> {
        let start = self.start();
        let mut positional: Vec<AstNode> = Vec::new();
        let mut vararg: Option<AstNode> = None;
        let mut kwonly: Vec<AstNode> = Vec::new();
        let mut kw_defaults: Vec<AstNode> = Vec::new();
        let mut kwarg: Option<AstNode> = None;
        let mut defaults: Vec<AstNode> = Vec::new();
        let mut star_seen = false;
        while !self.is(close) {
            if self.eat("/") {
            } else if self.eat("**") {
                kwarg = Some(self.param(annotations)?);
            } else if self.eat("*") {
                star_seen = true;
                if self.is_name() {
                    vararg = Some(self.param(annotations)?);
                }
            } else {
                let arg = self.param(annotations)?;
                let default = if self.eat("=") { Some(self.test()?) } else { None };
                if star_seen {
                    kwonly.push(arg);
                    kw_defaults.extend(default);
                } else {
                    positional.push(arg);
                    defaults.extend(default);
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        let mut node = AstNode::new("arguments", (start, start));
        node.children.extend(positional);
        node.children.extend(vararg);
        node.children.extend(kwonly);
        node.children.extend(kw_defaults);
        node.children.extend(kwarg);
        node.children.extend(defaults);
        node.span = self.span_from(start);
        Ok(node)
    }

    fn param(&mut self, annotations: bool) -> PResult<AstNode> {
        let start = self.start();
        let name = self.name()?;
        let mut arg = AstNode::labeled("arg", name, (start, start));
        if annotations && self.eat(":") {
            arg.push(self.test()?);
        }
        arg.span = self.span_from(start);
        Ok(arg)
    }

    // ---- expressions ----

    fn star_or(&mut self, f: impl FnOnce(&mut Self) -> PResult<AstNode>) -> PResult<AstNode> {
        let start = self.start();
        if self.eat("*") {
            let value = self.expr()?;
            return Ok(AstNode::new("Starred", self.span_from(start)).with_children(alloc::vec![value]));
        }
        f(self)
    }

    fn testlist_star_expr(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let first = self.star_or(|p| p.test())?;
        if !self.is(",") {
            return Ok(first);
        }
        let mut elts = alloc::vec![first];
        while self.eat(",") {
            if self.at_simple_end()
                || matches!(self.peek(), "=" | ")" | ":" | "]" | "}")
                || AUG_OPS.contains(&self.peek())
            {
                break;
            }
            elts.push(self.star_or(|p| p.test())?);
        }
        Ok(AstNode::new("Tuple", self.span_from(start)).with_children(elts))
    }

    fn named_expr_test(&mut self) -> PResult<AstNode> {
        let start = self.start();
        if self.is_name() && self.peek_n(1) == ":=" {
            self.advance();
            let target = AstNode::new("Name", self.span_from(start));
            self.advance();
            let value = self.test()?;
            return Ok(AstNode::new("NamedExpr", self.span_from(start)).with_children(alloc::vec![target, value]));
        }
        self.test()
    }

    fn test(&mut self) -> PResult<AstNode> {
        if self.is("lambda") {
            return self.lambda(true);
        }
        let start = self.start();
        let body = self.or_test()?;
        if self.is("if") {
            self.advance();
            let test = self.or_test()?;
            self.expect("else")?;
            let orelse = self.test()?;
            return Ok(AstNode::new("IfExp", self.span_from(start)).with_children(alloc::vec![test, body, orelse]));
        }
        Ok(body)
    }

    fn test_no_cond(&mut self) -> PResult<AstNode> {
        if self.is("lambda") {
            return self.lambda(false);
        }
        self.or_test()
    }

    fn lambda(&mut self, allow_cond: bool) -> PResult<AstNode> {
        let start = self.start();
        self.expect("lambda")?;
        let args = self.parameters(":", false)?;
        self.expect(":")?;
        let body = if allow_cond { self.test()? } else { self.test_no_cond()? };
        Ok(AstNode::new("Lambda", self.span_from(start)).with_children(alloc::vec![args, body]))
    }

    fn or_test(&mut self) -> PResult<AstNode> {
        self.bool_op("or", |p| p.and_test())
    }

    fn and_test(&mut self) -> PResult<AstNode> {
        self.bool_op("and", |p| p.not_test())
    }

    fn bool_op(&mut self, op: &str, mut next: impl FnMut(&mut Self) -> PResult<AstNode>) -> PResult<AstNode> {
        let start = self.start();
        let first = next(self)?;
        if !self.is(op) {
            return Ok(first);
        }
        let mut values = alloc::vec![first];
        while self.eat(op) {
            values.push(next(self)?);
        }
        Ok(AstNode::new("BoolOp", self.span_from(start)).with_children(values))
    }

    fn not_test(&mut self) -> PResult<AstNode> {
        let start = self.start();
        if self.eat("not") {
            let operand = self.not_test()?;
            return Ok(AstNode::new("UnaryOp", self.span_from(start)).with_children(alloc::vec![operand]));
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> bool {
        match self.peek() {
            "<" | ">" | "==" | ">=" | "<=" | "!=" | "in" => {
                self.advance();
                true
            }
            "not" if self.peek_n(1) == "in" => {
                self.advance();
                self.advance();
                true
            }
            "is" => {
                self.advance();
                self.eat("not");
                true
            }
            _ => false,
        }
    }

    fn comparison(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let left = self.expr()?;
        let mut node: Option<AstNode> = None;
        while self.comp_op() {
            let right = self.expr()?;
            node.get_or_insert_with(|| {
                AstNode::new("Compare", (start, start)).with_children(alloc::vec![left.clone()])
            })
            .push(right);
        }
        Ok(match node {
            Some(mut n) => {
                n.span = self.span_from(start);
                n
            }
            None => left,
        })
    }

    fn expr(&mut self) -> PResult<AstNode> {
        self.arith(0)
    }

    fn arith(&mut self, level: usize) -> PResult<AstNode> {
        if level == ARITH_LEVELS.len() {
            return self.factor();
        }
        let start = self.start();
        let mut left = self.arith(level + 1)?;
        while ARITH_LEVELS[level].contains(&self.peek()) {
            self.advance();
            let right = self.arith(level + 1)?;
            left = AstNode::new("BinOp", self.span_from(start)).with_children(alloc::vec![left, right]);
        }
        Ok(left)
    }

    fn factor(&mut self) -> PResult<AstNode> {
        let start = self.start();
        if matches!(self.peek(), "+" | "-" | "~") {
            self.advance();
            let operand = self.factor()?;
            return Ok(AstNode::new("UnaryOp", self.span_from(start)).with_children(alloc::vec![operand]));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let base = if self.is("await") {
            self.advance();
            let value = self.primary()?;
            AstNode::new("Await", self.span_from(start)).with_children(alloc::vec![value])
        } else {
            self.primary()?
        };
        if self.eat("**") {
            let exp = self.factor()?;
            return Ok(AstNode::new("BinOp", self.span_from(start)).with_children(alloc::vec![base, exp]));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let mut node = self.atom()?;
        loop {
            match self.peek() {
                "(" => {
                    let (args, keywords) = self.call_arguments()?;
                    let mut call = AstNode::new("Call", (start, start));
                    call.push(node);
                    call.children.extend(args);
                    call.children.extend(keywords);
                    call.span = self.span_from(start);
                    node = call;
                }
                "[" => {
                    self.advance();
                    let slice = self.subscript_list()?;
                    self.expect("]")?;
                    node = AstNode::new("Subscript", self.span_from(start)).with_children(alloc::vec![node, slice]);
                }
                "." => {
                    self.advance();
                    self.name()?;
                    node = AstNode::new("Attribute", self.span_from(start)).with_children(alloc::vec![node]);
                }
                _ => return Ok(node),
            }
        }
    }

    fn call_arguments(&mut self) -> PResult<(Vec<AstNode>, Vec<AstNode>)> {
        self.expect("(")?;
        let mut args = Vec::new();
        let mut keywords = Vec::new();
        while !self.is(")") {
            let start = self.start();
            if self.eat("**") {
                let value = self.test()?;
                keywords.push(AstNode::new("keyword", self.span_from(start)).with_children(alloc::vec![value]));
            } else if self.eat("*") {
                let value = self.test()?;
                args.push(AstNode::new("Starred", self.span_from(start)).with_children(alloc::vec![value]));
            } else if self.is_name() && self.peek_n(1) == "=" {
                let name = self.advance();
                self.advance();
                let value = self.test()?;
                keywords
                    .push(AstNode::labeled("keyword", name, self.span_from(start)).with_children(alloc::vec![value]));
            } else {
                let value = self.named_expr_test()?;
                if self.is("for") || (self.is("async") && self.peek_n(1) == "for") {
                    let generators = self.comprehension_clauses()?;
                    let mut gen = AstNode::new("GeneratorExp", (start, start));
                    gen.push(value);
                    gen.children.extend(generators);
                    gen.span = self.span_from(start);
                    args.push(gen);
                } else {
                    args.push(value);
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok((args, keywords))
    }

    fn subscript_list(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let first = self.subscript()?;
        if !self.is(",") {
            return Ok(first);
        }
        let mut elts = alloc::vec![first];
        while self.eat(",") {
            if self.is("]") {
                break;
            }
            elts.push(self.subscript()?);
        }
        Ok(AstNode::new("Tuple", self.span_from(start)).with_children(elts))
    }

    fn subscript(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let lower = if self.is(":") { None } else { Some(self.star_or(|p| p.named_expr_test())?) };
        if !self.is(":") {
            return lower.ok_or_else(|| self.error("expected subscript"));
        }
        self.advance();
        let mut slice = AstNode::new("Slice", (start, start));
        slice.children.extend(lower);
        if !matches!(self.peek(), ":" | "," | "]") {
            slice.push(self.test()?);
        }
        if self.eat(":") && !matches!(self.peek(), "," | "]") {
            slice.push(self.test()?);
        }
        slice.span = self.span_from(start);
        Ok(slice)
    }

    fn comprehension_clauses(&mut self) -> PResult<Vec<AstNode>> {
        let mut out = Vec::new();
        loop {
            let start = self.start();
            self.eat("async");
            if !self.eat("for") {
                break;
            }
            let mut comp = AstNode::new("comprehension", (start, start));
            comp.push(self.target_list()?);
            self.expect("in")?;
            comp.push(self.or_test()?);
            while self.eat("if") {
                comp.push(self.test_no_cond()?);
            }
            comp.span = self.span_from(start);
            out.push(comp);
            if !(self.is("for") || (self.is("async") && self.peek_n(1) == "for")) {
                break;
            }
        }
        Ok(out)
    }

    fn yield_expr(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("yield")?;
        if self.eat("from") {
            let value = self.test()?;
            return Ok(AstNode::new("YieldFrom", self.span_from(start)).with_children(alloc::vec![value]));
        }
        let mut node = AstNode::new("Yield", (start, start));
        if !self.at_simple_end() && !matches!(self.peek(), ")" | "]" | "}" | "=") {
            node.push(self.testlist_star_expr()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn atom(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let t = self.cur();
        if t.layout != Layout::Token {
            return Err(self.error("expected expression"));
        }
        match t.kind {
            TokKind::Number => {
                self.advance();
                return Ok(AstNode::new("Constant", self.span_from(start)));
            }
            TokKind::Str => return self.strings(),
            _ => {}
        }
        match t.text {
            "None" | "True" | "False" | "..." => {
                self.advance();
                Ok(AstNode::new("Constant", self.span_from(start)))
            }
            "(" => self.paren_atom(),
            "[" => self.list_atom(),
            "{" => self.brace_atom(),
            _ if self.is_name() => {
                self.advance();
                Ok(AstNode::new("Name", self.span_from(start)))
            }
            _ => Err(self.error("expected expression")),
        }
    }

    fn strings(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let mut parts: Vec<PTok<'a>> = Vec::new();
        while self.cur().layout == Layout::Token && self.cur().kind == TokKind::Str {
            parts.push(self.cur());
            self.advance();
        }
        let is_f = |t: &PTok<'_>| {
            let q = t.text.find(['"', '\'']).unwrap_or(0);
            t.text[..q].contains(['f', 'F'])
        };
        if !parts.iter().any(is_f) {
            return Ok(AstNode::new("Constant", self.span_from(start)));
        }
        let mut node = AstNode::new("JoinedStr", self.span_from(start));
        for part in &parts {
            if is_f(part) {
                fstring_values(part, &mut node.children)?;
            } else {
                push_constant(&mut node.children, (part.start, part.end));
            }
        }
        Ok(node)
    }

    fn paren_atom(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("(")?;
        if self.eat(")") {
            return Ok(AstNode::new("Tuple", self.span_from(start)));
        }
        if self.is("yield") {
            let y = self.yield_expr()?;
            self.expect(")")?;
            return Ok(y);
        }
        let first = self.star_or(|p| p.named_expr_test())?;
        if self.is("for") || (self.is("async") && self.peek_n(1) == "for") {
            let generators = self.comprehension_clauses()?;
            self.expect(")")?;
            let mut gen = AstNode::new("GeneratorExp", self.span_from(start));
            gen.push(first);
            gen.children.extend(generators);
            return Ok(gen);
        }
        if self.eat(")") {
            let mut first = first;
            first.span = self.span_from(start);
            return Ok(first);
        }
        let mut elts = alloc::vec![first];
        while self.eat(",") {
            if self.is(")") {
                break;
            }
            elts.push(self.star_or(|p| p.named_expr_test())?);
        }
        self.expect(")")?;
        Ok(AstNode::new("Tuple", self.span_from(start)).with_children(elts))
    }

    fn list_atom(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("[")?;
        if self.eat("]") {
            return Ok(AstNode::new("List", self.span_from(start)));
        }
        let first = self.star_or(|p| p.named_expr_test())?;
        if self.is("for") || (self.is("async") && self.peek_n(1) == "for") {
            let generators = self.comprehension_clauses()?;
            self.expect("]")?;
            let mut comp = AstNode::new("ListComp", self.span_from(start));
            comp.push(first);
            comp.children.extend(generators);
            return Ok(comp);
        }
        let mut elts = alloc::vec![first];
        while self.eat(",") {
            if self.is("]") {
                break;
            }
            elts.push(self.star_or(|p| p.named_expr_test())?);
        }
        self.expect("]")?;
        Ok(AstNode::new("List", self.span_from(start)).with_children(elts))
    }

    fn brace_atom(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("{")?;
        if self.eat("}") {
            return Ok(AstNode::new("Dict", self.span_from(start)));
        }
        // dict entries are (Option<key>, value); `**d` has no key
        let entry = |p: &mut Self| -> PResult<(Option<AstNode>, Option<AstNode>)> {
            if p.eat("**") {
                return Ok((None, Some(p.expr()?)));
            }
            let first = p.star_or(|q| q.named_expr_test())?;
            if p.eat(":") {
                Ok((Some(first), Some(p.test()?)))
            } else {
                Ok((Some(first), None))
            }
        };
        let (k, v) = entry(self)?;
        let is_dict = v.is_some();
        if self.is("for") || (self.is("async") && self.peek_n(1) == "for") {
            let generators = self.comprehension_clauses()?;
            self.expect("}")?;
            let mut node = AstNode::new(if is_dict { "DictComp" } else { "SetComp" }, self.span_from(start));
            node.children.extend(k);
            node.children.extend(v);
            node.children.extend(generators);
            return Ok(node);
        }
        let mut keys: Vec<AstNode> = Vec::new();
        let mut values: Vec<AstNode> = Vec::new();
        let mut add = |k: Option<AstNode>, v: Option<AstNode>| {
            if is_dict {
                keys.extend(k);
                values.extend(v);
            } else {
                values.extend(k);
            }
        };
        add(k, v);
        while self.eat(",") {
            if self.is("}") {
                break;
            }
            let (k, v) = entry(self)?;
            if is_dict != v.is_some() {
                return Err(self.error("mixed dict and set entries"));
            }
            add(k, v);
        }
        self.expect("}")?;
        let mut node = AstNode::new(if is_dict { "Dict" } else { "Set" }, self.span_from(start));
        node.children.extend(keys);
        node.children.extend(values);
        Ok(node)
    }
}

fn push_constant(children: &mut Vec<AstNode>, span: (usize, usize)) {
    if let Some(last) = children.last_mut() {
        if last.kind == "Constant" {
            last.span.1 = span.1;
            return;
        }
    }
    children.push(AstNode::new("Constant", span));
}

/// Splits one f-string token into Constant and FormattedValue children.
fn fstring_values(tok: &PTok<'_>, out: &mut Vec<AstNode>) -> PResult<()> {
    let text = tok.text;
    let q = text.find(['"', '\'']).unwrap_or(0);
    let quote = &text[q..q + 1];
    let triple = text[q..].starts_with(&alloc::format!("{quote}{quote}{quote}")) && text.len() >= q + 6;
    let open = if triple { 3 } else { 1 };
    let body_start = q + open;
    let body_end =
        if text.len() >= body_start + open && text.ends_with(quote) { text.len() - open } else { text.len() };
    let body = &text[body_start..body_end.max(body_start)];
    parse_fstring_body(body, tok.start + body_start, out)
}

fn parse_fstring_body(body: &str, base: usize, out: &mut Vec<AstNode>) -> PResult<()> {
    let bytes = body.as_bytes();
    let mut i = 0;
    let mut lit_start = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => i += 2,
            b'}' if bytes.get(i + 1) == Some(&b'}') => i += 2,
            b'{' => {
                if lit_start < i {
                    push_constant(out, (base + lit_start, base + i));
                }
                let field_start = i;
                let (expr_end, spec, field_end) = scan_replacement_field(body, i + 1)
                    .ok_or_else(|| SyntaxError::new(base + i, "unterminated f-string replacement field"))?;
                let expr_src = &body[i + 1..expr_end];
                let expr_src = expr_src.strip_suffix('=').unwrap_or(expr_src);
                let value = parse_expression_at(expr_src, base + i + 1)?;
                let mut fv = AstNode::new("FormattedValue", (base + field_start, base + field_end));
                fv.push(value);
                if let Some((s, e)) = spec {
                    let mut spec_node = AstNode::new("JoinedStr", (base + s, base + e));
                    parse_fstring_body(&body[s..e], base + s, &mut spec_node.children)?;
                    fv.push(spec_node);
                }
                out.push(fv);
                i = field_end;
                lit_start = i;
            }
            _ => i += 1,
        }
    }
    if lit_start < bytes.len() {
        push_constant(out, (base + lit_start, base + bytes.len()));
    }
    Ok(())
}

/// End of expression, optional format-spec range, index after `}`.
type FieldSpan = (usize, Option<(usize, usize)>, usize);

fn scan_replacement_field(body: &str, from: usize) -> Option<FieldSpan> {
    let bytes = body.as_bytes();
    let mut depth = 0usize;
    let mut i = from;
    let mut quote: Option<u8> = None;
    let mut expr_end: Option<usize> = None;
    while i < bytes.len() {
        let b = bytes[i];
        if let Some(q) = quote {
            if b == q {
                quote = None;
            }
            i += 1;
            continue;
        }
        match b {
            b'\'' | b'"' => quote = Some(b),
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' => depth = depth.saturating_sub(1),
            b'}' if depth > 0 => depth -= 1,
            b'}' => {
                let end = expr_end.unwrap_or(i);
                return Some((end, None, i + 1));
            }
            b'!' if depth == 0 && bytes.get(i + 1) != Some(&b'=') && expr_end.is_none() => {
                expr_end = Some(i);
            }
            b':' if depth == 0 => {
                let end = expr_end.unwrap_or(i);
                // format spec runs to the matching `}`
                let spec_start = i + 1;
                let mut j = spec_start;
                let mut d = 0usize;
                while j < bytes.len() {
                    match bytes[j] {
                        b'{' => d += 1,
                        b'}' if d > 0 => d -= 1,
                        b'}' => return Some((end, Some((spec_start, j)), j + 1)),
                        _ => {}
                    }
                    j += 1;
                }
                return None;
            }
            _ => {}
        }
        i += 1;
    }
    None
}
