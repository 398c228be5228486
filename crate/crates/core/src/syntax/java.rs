//! Recursive-descent parser for Java member declarations.
//!
//! Records are usually single methods, so the entry point accepts any mix of
//! package/import declarations, type declarations and bare class-body members.

use alloc::string::String;
use alloc::vec::Vec;

use super::tokens::{significant, Tok, TokKind};
use super::{AstNode, SyntaxError};
use crate::record::Language;

type PResult<T> = Result<T, SyntaxError>;

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "abstract",
    "final",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

/// Binary operator precedence levels, loosest first.
const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["|"],
    &["^"],
    &["&"],
    &["==", "!="],
    &["<", ">", "<=", ">=", "instanceof"],
    &["<<", ">>", ">>>"],
    &["+", "-"],
    &["*", "/", "%"],
];

pub(crate) fn parse(code: &str) -> PResult<Vec<AstNode>> {
    let mut p = Parser::new(code);
    let mut roots = Vec::new();
    while !p.at_eof() {
        if p.eat(";") {
            continue;
        }
        if p.is("package") {
            roots.push(p.package_or_import("PackageDeclaration")?);
            continue;
        }
        if p.is("import") {
            roots.push(p.package_or_import("Import")?);
            continue;
        }
        roots.push(p.member()?);
    }
    Ok(roots)
}

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Clone, Copy)]
struct Mark {
    pos: usize,
    split: usize,
    last_end: usize,
}

struct Parser<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    /// Number of leading `>` characters already consumed from the current
    /// token, so `>>` can close two type-argument lists.
    split: usize,
    last_end: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn new(code: &'a str) -> Self {
        Parser { toks: significant(code, Language::Java), pos: 0, split: 0, last_end: 0, src_len: code.len() }
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> &'a str {
        match self.toks.get(self.pos) {
            Some(t) => &t.text[self.split..],
            None => "",
        }
    }

    fn peek_n(&self, n: usize) -> &'a str {
        if n == 0 {
            return self.peek();
        }
        self.toks.get(self.pos + n).map(|t| t.text).unwrap_or("")
    }

    fn kind_n(&self, n: usize) -> Option<TokKind> {
        self.toks.get(self.pos + n).map(|t| t.kind)
    }

    fn is(&self, s: &str) -> bool {
        self.peek() == s
    }

    fn is_ident_n(&self, n: usize) -> bool {
        self.kind_n(n) == Some(TokKind::Ident) && !is_keyword(self.peek_n(n))
    }

    fn start(&self) -> usize {
        match self.toks.get(self.pos) {
            Some(t) => t.start + self.split,
            None => self.src_len,
        }
    }

    fn span_from(&self, start: usize) -> (usize, usize) {
        (start, self.last_end.max(start))
    }

    fn advance(&mut self) -> &'a str {
        let text = self.peek();
        if let Some(t) = self.toks.get(self.pos) {
            self.last_end = t.end;
        }
        self.pos += 1;
        self.split = 0;
        text
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let found = if self.at_eof() { "end of input" } else { self.peek() };
        SyntaxError::new(self.start(), alloc::format!("{}, found `{}`", message.into(), found))
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(alloc::format!("expected `{s}`")))
        }
    }

    /// Consumes one `>` character, splitting `>>`, `>>>` and `>=` tokens.
    fn expect_close_angle(&mut self) -> PResult<()> {
        let text = self.peek();
        if !text.starts_with('>') {
            return Err(self.error("expected `>`"));
        }
        if text.len() == 1 {
            self.advance();
        } else {
            self.split += 1;
            if let Some(t) = self.toks.get(self.pos) {
                self.last_end = t.start + self.split;
            }
        }
        Ok(())
    }

    fn ident(&mut self) -> PResult<&'a str> {
        if self.is_ident_n(0) && self.split == 0 {
            Ok(self.advance())
        } else {
            Err(self.error("expected identifier"))
        }
    }

    fn mark(&self) -> Mark {
        Mark { pos: self.pos, split: self.split, last_end: self.last_end }
    }

    fn reset(&mut self, m: Mark) {
        self.pos = m.pos;
        self.split = m.split;
        self.last_end = m.last_end;
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = String::from(self.ident()?);
        while self.is(".") && self.is_ident_n(1) {
            self.advance();
            name.push('.');
            name.push_str(self.advance());
        }
        Ok(name)
    }

    fn package_or_import(&mut self, kind: &'static str) -> PResult<AstNode> {
        let start = self.start();
        self.advance();
        self.eat("static");
        let mut name = self.qualified_name()?;
        if self.is(".") && self.peek_n(1) == "*" {
            self.advance();
            self.advance();
            name.push_str(".*");
        }
        self.expect(";")?;
        Ok(AstNode::labeled(kind, name, self.span_from(start)))
    }

    // ---- annotations, modifiers, types ----

    fn annotation(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("@")?;
        let name = self.qualified_name()?;
        if self.is("(") {
            self.skip_balanced("(", ")")?;
        }
        Ok(AstNode::labeled("Annotation", name, self.span_from(start)))
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1usize;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error(alloc::format!("unbalanced `{open}`")));
            }
            let t = self.advance();
            if t == open {
                depth += 1;
            } else if t == close {
                depth -= 1;
            }
        }
        Ok(())
    }

    /// Annotations and modifiers preceding a declaration; modifiers are not
    /// materialized.
    fn modifiers(&mut self) -> PResult<Vec<AstNode>> {
        let mut annotations = Vec::new();
        loop {
            if self.is("@") && self.peek_n(1) != "interface" {
                annotations.push(self.annotation()?);
            } else if MODIFIERS.contains(&self.peek())
                && !(self.is("default") && (self.peek_n(1) == ":" || self.peek_n(1) == "->"))
            {
                self.advance();
            } else if self.is("non") && self.peek_n(1) == "-" && self.peek_n(2) == "sealed" {
                self.advance();
                self.advance();
                self.advance();
            } else {
                return Ok(annotations);
            }
        }
    }

    fn skip_type_annotations(&mut self) -> PResult<()> {
        while self.is("@") && self.peek_n(1) != "interface" {
            self.annotation()?;
        }
        Ok(())
    }

    fn dims(&mut self) -> usize {
        let mut n = 0;
        while self.is("[") && self.peek_n(1) == "]" {
            self.advance();
            self.advance();
            n += 1;
        }
        n
    }

    fn parse_type(&mut self) -> PResult<AstNode> {
        self.skip_type_annotations()?;
        let start = self.start();
        if PRIMITIVES.contains(&self.peek()) {
            let name = self.advance();
            self.dims();
            return Ok(AstNode::labeled("BasicType", name, self.span_from(start)));
        }
        let mut name = String::from(self.ident()?);
        let mut args = Vec::new();
        loop {
            if self.is("<") {
                args.extend(self.type_arguments()?);
            }
            if self.is(".") && self.is_ident_n(1) {
                self.advance();
                name.push('.');
                name.push_str(self.advance());
                continue;
            }
            break;
        }
        self.dims();
        Ok(AstNode::labeled("ReferenceType", name, self.span_from(start)).with_children(args))
    }

    fn type_arguments(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("<")?;
        let mut args = Vec::new();
        if self.peek().starts_with('>') {
            self.expect_close_angle()?;
            return Ok(args);
        }
        loop {
            let start = self.start();
            self.skip_type_annotations()?;
            let mut arg = AstNode::new("TypeArgument", (start, start));
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    arg.push(self.parse_type()?);
                }
            } else {
                arg.push(self.parse_type()?);
            }
            arg.span = self.span_from(start);
            args.push(arg);
            if !self.eat(",") {
                break;
            }
        }
        self.expect_close_angle()?;
        Ok(args)
    }

    fn type_parameters(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("<")?;
        let mut params = Vec::new();
        loop {
            self.skip_type_annotations()?;
            let start = self.start();
            let name = self.ident()?;
            let mut node = AstNode::labeled("TypeParameter", name, (start, start));
            if self.eat("extends") {
                node.push(self.parse_type()?);
                while self.eat("&") {
                    node.push(self.parse_type()?);
                }
            }
            node.span = self.span_from(start);
            params.push(node);
            if !self.eat(",") {
                break;
            }
        }
        self.expect_close_angle()?;
        Ok(params)
    }

    // ---- declarations ----

    fn member(&mut self) -> PResult<AstNode> {
        let start = self.start();
        if self.is("{") || (self.is("static") && self.peek_n(1) == "{") {
            self.eat("static");
            let body = self.block()?;
            return Ok(AstNode::new("BlockStatement", self.span_from(start)).with_children(body));
        }
        let annotations = self.modifiers()?;
        if self.is("class")
            || self.is("interface")
            || self.is("enum")
            || (self.is("@") && self.peek_n(1) == "interface")
        {
            return self.type_declaration(start, annotations);
        }
        if self.is("record") && self.is_ident_n(1) {
            return self.record_declaration(start, annotations);
        }
        let type_params = if self.is("<") { self.type_parameters()? } else { Vec::new() };

        if self.is_ident_n(0) && self.peek_n(1) == "(" {
            let name = self.ident()?;
            let mut node = AstNode::labeled("ConstructorDeclaration", name, (start, start));
            node.children.extend(annotations);
            node.children.extend(type_params);
            node.children.extend(self.formal_parameters()?);
            self.throws_clause()?;
            node.children.extend(self.block()?);
            node.span = self.span_from(start);
            return Ok(node);
        }

        let return_type = if self.eat("void") { None } else { Some(self.parse_type()?) };
        let name_start = self.start();
        let name = self.ident()?;
        if self.is("(") {
            let mut node = AstNode::labeled("MethodDeclaration", name, (start, start));
            node.children.extend(annotations);
            node.children.extend(type_params);
            node.children.extend(return_type);
            node.children.extend(self.formal_parameters()?);
            self.dims();
            self.throws_clause()?;
            if self.eat("default") {
                self.element_value()?;
                self.expect(";")?;
            } else if !self.eat(";") {
                node.children.extend(self.block()?);
            }
            node.span = self.span_from(start);
            return Ok(node);
        }

        let Some(ty) = return_type else {
            return Err(self.error("expected `(` after void member name"));
        };
        let mut node = AstNode::new("FieldDeclaration", (start, start));
        node.children.extend(annotations);
        node.push(ty);
        node.children.extend(self.declarators_after_name(name, name_start)?);
        self.expect(";")?;
        node.span = self.span_from(start);
        Ok(node)
    }

    fn element_value(&mut self) -> PResult<()> {
        if self.is("@") {
            self.annotation()?;
        } else if self.is("{") {
            self.skip_balanced("{", "}")?;
        } else {
            self.expression()?;
        }
        Ok(())
    }

    fn throws_clause(&mut self) -> PResult<()> {
        if self.eat("throws") {
            loop {
                self.parse_type()?;
                if !self.eat(",") {
                    break;
                }
            }
        }
        Ok(())
    }

    fn type_declaration(&mut self, start: usize, annotations: Vec<AstNode>) -> PResult<AstNode> {
        let keyword = self.advance();
        let kind = match keyword {
            "class" => "ClassDeclaration",
            "interface" => "InterfaceDeclaration",
            "enum" => "EnumDeclaration",
            _ => {
                self.expect("interface")?;
                "AnnotationDeclaration"
            }
        };
        let name = self.ident()?;
        let mut node = AstNode::labeled(kind, name, (start, start));
        node.children.extend(annotations);
        if self.is("<") {
            node.children.extend(self.type_parameters()?);
        }
        for clause in ["extends", "implements", "permits"] {
            if self.eat(clause) {
                loop {
                    node.push(self.parse_type()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
        }
        if kind == "EnumDeclaration" {
            node.children.extend(self.enum_body()?);
        } else {
            node.children.extend(self.class_body()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn record_declaration(&mut self, start: usize, annotations: Vec<AstNode>) -> PResult<AstNode> {
        self.advance();
        let name = self.ident()?;
        let mut node = AstNode::labeled("RecordDeclaration", name, (start, start));
        node.children.extend(annotations);
        if self.is("<") {
            node.children.extend(self.type_parameters()?);
        }
        node.children.extend(self.formal_parameters()?);
        if self.eat("implements") {
            loop {
                node.push(self.parse_type()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        node.children.extend(self.class_body()?);
        node.span = self.span_from(start);
        Ok(node)
    }

    fn class_body(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.eat("}") {
            if self.at_eof() {
                return Err(self.error("unterminated class body"));
            }
            if self.eat(";") {
                continue;
            }
            members.push(self.member()?);
        }
        Ok(members)
    }

    fn enum_body(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.is(";") && !self.is("}") {
            let start = self.start();
            let annotations = self.modifiers()?;
            let name = self.ident()?;
            let mut constant = AstNode::labeled("EnumConstantDeclaration", name, (start, start));
            constant.children.extend(annotations);
            if self.is("(") {
                constant.children.extend(self.arguments()?);
            }
            if self.is("{") {
                constant.children.extend(self.class_body()?);
            }
            constant.span = self.span_from(start);
            members.push(constant);
            if !self.eat(",") {
                break;
            }
        }
        if self.eat(";") {
            while !self.is("}") {
                if self.at_eof() {
                    return Err(self.error("unterminated enum body"));
                }
                if self.eat(";") {
                    continue;
                }
                members.push(self.member()?);
            }
        }
        self.expect("}")?;
        Ok(members)
    }

    fn formal_parameters(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        loop {
            let start = self.start();
            let annotations = self.modifiers()?;
            let ty = self.parse_type()?;
            self.skip_type_annotations()?;
            self.eat("...");
            if self.is("this") {
                // receiver parameter
                self.advance();
            } else {
                let name = self.ident()?;
                self.dims();
                let mut node = AstNode::labeled("FormalParameter", name, (start, start));
                node.children.extend(annotations);
                node.push(ty);
                node.span = self.span_from(start);
                params.push(node);
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn declarators_after_name(&mut self, first: &'a str, first_start: usize) -> PResult<Vec<AstNode>> {
        let mut out = Vec::new();
        let mut name = first;
        let mut start = first_start;
        loop {
            self.dims();
            let mut decl = AstNode::labeled("VariableDeclarator", name, (start, start));
            if self.eat("=") {
                decl.push(self.variable_initializer()?);
            }
            decl.span = self.span_from(start);
            out.push(decl);
            if !self.eat(",") {
                return Ok(out);
            }
            start = self.start();
            name = self.ident()?;
        }
    }

    fn variable_initializer(&mut self) -> PResult<AstNode> {
        if self.is("{") {
            self.array_initializer()
        } else {
            self.expression()
        }
    }

    fn array_initializer(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("{")?;
        let mut node = AstNode::new("ArrayInitializer", (start, start));
        while !self.is("}") {
            node.push(self.variable_initializer()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        node.span = self.span_from(start);
        Ok(node)
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.eat("}") {
            if self.at_eof() {
                return Err(self.error("unterminated block"));
            }
            stmts.push(self.block_statement()?);
        }
        Ok(stmts)
    }

    fn block_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        // local class declarations
        let m = self.mark();
        let annotations = self.modifiers()?;
        if self.is("class") || self.is("interface") || self.is("enum") {
            return self.type_declaration(start, annotations);
        }
        if self.is("record") && self.is_ident_n(1) && self.peek_n(2) == "(" {
            return self.record_declaration(start, annotations);
        }
        self.reset(m);
        if let Some(decl) = self.try_local_variable_declaration()? {
            self.expect(";")?;
            let mut decl = decl;
            decl.span = self.span_from(start);
            return Ok(decl);
        }
        self.statement()
    }

    /// Parses `[modifiers] Type name ...` when the upcoming tokens form one;
    /// otherwise restores the position and returns `None`.
    fn try_local_variable_declaration(&mut self) -> PResult<Option<AstNode>> {
        let m = self.mark();
        let start = self.start();
        let Ok(annotations) = self.modifiers() else {
            self.reset(m);
            return Ok(None);
        };
        if !(PRIMITIVES.contains(&self.peek()) || self.is_ident_n(0)) {
            self.reset(m);
            return Ok(None);
        }
        let Ok(ty) = self.parse_type() else {
            self.reset(m);
            return Ok(None);
        };
        if !self.is_ident_n(0) || !matches!(self.peek_n(1), "=" | ";" | "," | "[" | ":") {
            self.reset(m);
            return Ok(None);
        }
        let name_start = self.start();
        let name = self.ident()?;
        let mut node = AstNode::new("LocalVariableDeclaration", (start, start));
        node.children.extend(annotations);
        node.push(ty);
        node.children.extend(self.declarators_after_name(name, name_start)?);
        node.span = self.span_from(start);
        Ok(Some(node))
    }

    fn par_expression(&mut self) -> PResult<AstNode> {
        self.expect("(")?;
        let e = self.expression()?;
        self.expect(")")?;
        Ok(e)
    }

    fn statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let node = match self.peek() {
            "{" => {
                let body = self.block()?;
                AstNode::new("BlockStatement", (start, start)).with_children(body)
            }
            ";" => {
                self.advance();
                AstNode::new("Statement", (start, start))
            }
            "if" => {
                self.advance();
                let mut node = AstNode::new("IfStatement", (start, start));
                node.push(self.par_expression()?);
                node.push(self.statement()?);
                if self.eat("else") {
                    node.push(self.statement()?);
                }
                node
            }
            "while" => {
                self.advance();
                let mut node = AstNode::new("WhileStatement", (start, start));
                node.push(self.par_expression()?);
                node.push(self.statement()?);
                node
            }
            "do" => {
                self.advance();
                let body = self.statement()?;
                self.expect("while")?;
                let cond = self.par_expression()?;
                self.expect(";")?;
                AstNode::new("DoStatement", (start, start)).with_children(alloc::vec![cond, body])
            }
            "for" => self.for_statement()?,
            "try" => self.try_statement()?,
            "switch" => self.switch_statement()?,
            "return" => {
                self.advance();
                let mut node = AstNode::new("ReturnStatement", (start, start));
                if !self.is(";") {
                    node.push(self.expression()?);
                }
                self.expect(";")?;
                node
            }
            "break" | "continue" => {
                let kind = if self.advance() == "break" { "BreakStatement" } else { "ContinueStatement" };
                if self.is_ident_n(0) {
                    self.advance();
                }
                self.expect(";")?;
                AstNode::new(kind, (start, start))
            }
            "throw" => {
                self.advance();
                let mut node = AstNode::new("ThrowStatement", (start, start));
                node.push(self.expression()?);
                self.expect(";")?;
                node
            }
            "synchronized" => {
                self.advance();
                let mut node = AstNode::new("SynchronizedStatement", (start, start));
                node.push(self.par_expression()?);
                node.children.extend(self.block()?);
                node
            }
            "assert" => {
                self.advance();
                let mut node = AstNode::new("AssertStatement", (start, start));
                node.push(self.expression()?);
                if self.eat(":") {
                    node.push(self.expression()?);
                }
                self.expect(";")?;
                node
            }
            "yield" if !matches!(self.peek_n(1), "=" | "(" | "." | "[" | "++" | "--") => {
                self.advance();
                let mut node = AstNode::new("YieldStatement", (start, start));
                node.push(self.expression()?);
                self.expect(";")?;
                node
            }
            _ if self.is_ident_n(0) && self.peek_n(1) == ":" => {
                // labeled statement; the label is an attribute
                self.advance();
                self.advance();
                return self.statement();
            }
            _ => {
                let mut node = AstNode::new("StatementExpression", (start, start));
                node.push(self.expression()?);
                self.expect(";")?;
                node
            }
        };
        let mut node = node;
        node.span = self.span_from(start);
        Ok(node)
    }

    fn for_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("for")?;
        self.expect("(")?;
        let mut node = AstNode::new("ForStatement", (start, start));
        let ctl_start = self.start();

        // enhanced for: `Type name :`
        let m = self.mark();
        let annotations = self.modifiers()?;
        if PRIMITIVES.contains(&self.peek()) || self.is_ident_n(0) {
            if let Ok(ty) = self.parse_type() {
                if self.is_ident_n(0) && self.peek_n(1) == ":" {
                    let var_start = self.start();
                    let name = self.ident()?;
                    let declarator = AstNode::labeled("VariableDeclarator", name, self.span_from(var_start));
                    let mut var = AstNode::new("VariableDeclaration", self.span_from(ctl_start));
                    var.children.extend(annotations);
                    var.push(ty);
                    var.push(declarator);
                    self.expect(":")?;
                    let iterable = self.expression()?;
                    let ctl = AstNode::new("EnhancedForControl", self.span_from(ctl_start))
                        .with_children(alloc::vec![var, iterable]);
                    self.expect(")")?;
                    node.push(ctl);
                    node.push(self.statement()?);
                    node.span = self.span_from(start);
                    return Ok(node);
                }
            }
        }
        self.reset(m);

        let mut ctl = AstNode::new("ForControl", (ctl_start, ctl_start));
        if !self.is(";") {
            if let Some(decl) = self.try_local_variable_declaration()? {
                let mut decl = decl;
                decl.kind = "VariableDeclaration";
                ctl.push(decl);
            } else {
                loop {
                    ctl.push(self.expression()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
        }
        self.expect(";")?;
        if !self.is(";") {
            ctl.push(self.expression()?);
        }
        self.expect(";")?;
        while !self.is(")") {
            ctl.push(self.expression()?);
            if !self.eat(",") {
                break;
            }
        }
        ctl.span = self.span_from(ctl_start);
        self.expect(")")?;
        node.push(ctl);
        node.push(self.statement()?);
        node.span = self.span_from(start);
        Ok(node)
    }

    fn try_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("try")?;
        let mut node = AstNode::new("TryStatement", (start, start));
        if self.eat("(") {
            while !self.is(")") {
                let r_start = self.start();
                self.modifiers()?;
                if let Some(decl) = self.try_local_variable_declaration()? {
                    // `Type name = value` becomes TryResource(type, value)
                    let mut res = AstNode::new("TryResource", (r_start, r_start));
                    let mut children = decl.children.into_iter();
                    if let Some(ty) = children.next() {
                        res.push(ty);
                    }
                    for d in children {
                        res.label = d.label.clone();
                        res.children.extend(d.children);
                    }
                    res.span = self.span_from(r_start);
                    node.push(res);
                } else {
                    let mut res = AstNode::new("TryResource", (r_start, r_start));
                    res.push(self.expression()?);
                    res.span = self.span_from(r_start);
                    node.push(res);
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
        }
        node.children.extend(self.block()?);
        while self.is("catch") {
            let c_start = self.start();
            self.advance();
            self.expect("(")?;
            let p_start = self.start();
            self.modifiers()?;
            let mut types = alloc::vec![self.parse_type()?];
            while self.eat("|") {
                types.push(self.parse_type()?);
            }
            let name = self.ident()?;
            let param = AstNode::labeled("CatchClauseParameter", name, self.span_from(p_start)).with_children(types);
            self.expect(")")?;
            let mut clause = AstNode::new("CatchClause", (c_start, c_start));
            clause.push(param);
            clause.children.extend(self.block()?);
            clause.span = self.span_from(c_start);
            node.push(clause);
        }
        if self.eat("finally") {
            node.children.extend(self.block()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn switch_statement(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("switch")?;
        let mut node = AstNode::new("SwitchStatement", (start, start));
        node.push(self.par_expression()?);
        self.expect("{")?;
        while !self.eat("}") {
            if self.at_eof() {
                return Err(self.error("unterminated switch"));
            }
            let c_start = self.start();
            let mut case = AstNode::new("SwitchStatementCase", (c_start, c_start));
            if self.eat("default") {
            } else {
                self.expect("case")?;
                loop {
                    case.push(self.ternary()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            if self.eat("->") {
                if self.is("{") {
                    let body = self.block()?;
                    case.push(AstNode::new("BlockStatement", self.span_from(c_start)).with_children(body));
                } else if self.is("throw") {
                    case.push(self.statement()?);
                } else {
                    let e_start = self.start();
                    let e = self.expression()?;
                    self.expect(";")?;
                    case.push(
                        AstNode::new("StatementExpression", self.span_from(e_start)).with_children(alloc::vec![e]),
                    );
                }
            } else {
                self.expect(":")?;
                while !self.is("case") && !self.is("default") && !self.is("}") {
                    if self.at_eof() {
                        return Err(self.error("unterminated switch"));
                    }
                    case.push(self.block_statement()?);
                }
            }
            case.span = self.span_from(c_start);
            node.push(case);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    // ---- expressions ----

    fn expression(&mut self) -> PResult<AstNode> {
        if let Some(lambda) = self.try_lambda()? {
            return Ok(lambda);
        }
        let start = self.start();
        let lhs = self.ternary()?;
        if ASSIGN_OPS.contains(&self.peek()) {
            self.advance();
            let value = self.expression()?;
            return Ok(AstNode::new("Assignment", self.span_from(start)).with_children(alloc::vec![lhs, value]));
        }
        Ok(lhs)
    }

    fn try_lambda(&mut self) -> PResult<Option<AstNode>> {
        let start = self.start();
        let params = if self.is_ident_n(0) && self.peek_n(1) == "->" {
            let name = self.advance();
            alloc::vec![AstNode::labeled("InferredFormalParameter", name, self.span_from(start))]
        } else if self.is("(") {
            let Some(close) = self.matching_paren(self.pos) else {
                return Ok(None);
            };
            if self.toks.get(close + 1).map(|t| t.text) != Some("->") {
                return Ok(None);
            }
            let inferred = (self.pos + 1..close).all(|i| {
                self.toks[i].text == "," || (self.toks[i].kind == TokKind::Ident && !is_keyword(self.toks[i].text))
            });
            if inferred {
                self.advance();
                let mut params = Vec::new();
                while !self.is(")") {
                    let p_start = self.start();
                    let name = self.ident()?;
                    params.push(AstNode::labeled("InferredFormalParameter", name, self.span_from(p_start)));
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(")")?;
                params
            } else {
                self.formal_parameters()?
            }
        } else {
            return Ok(None);
        };
        self.expect("->")?;
        let mut node = AstNode::new("LambdaExpression", (start, start));
        node.children.extend(params);
        if self.is("{") {
            node.children.extend(self.block()?);
        } else {
            node.push(self.expression()?);
        }
        node.span = self.span_from(start);
        Ok(Some(node))
    }

    fn matching_paren(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            match t.text {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn ternary(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let cond = self.binary(0)?;
        if self.eat("?") {
            let if_true = self.expression()?;
            self.expect(":")?;
            let if_false = match self.try_lambda()? {
                Some(l) => l,
                None => self.ternary()?,
            };
            return Ok(AstNode::new("TernaryExpression", self.span_from(start))
                .with_children(alloc::vec![cond, if_true, if_false]));
        }
        Ok(cond)
    }

    fn binary(&mut self, level: usize) -> PResult<AstNode> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let start = self.start();
        let mut left = self.binary(level + 1)?;
        while BINARY_LEVELS[level].contains(&self.peek()) && self.split == 0 {
            let op = self.advance();
            let right = if op == "instanceof" {
                self.eat("final");
                let ty = self.parse_type()?;
                if self.is_ident_n(0) {
                    self.advance();
                }
                ty
            } else {
                self.binary(level + 1)?
            };
            left = AstNode::new("BinaryOperation", self.span_from(start)).with_children(alloc::vec![left, right]);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        let start = self.start();
        if matches!(self.peek(), "++" | "--" | "+" | "-" | "!" | "~") {
            self.advance();
            let mut operand = self.unary()?;
            operand.span = self.span_from(start);
            return Ok(operand);
        }
        if self.is("(") {
            if let Some(cast) = self.try_cast()? {
                return Ok(cast);
            }
        }
        let mut node = self.primary()?;
        node = self.selectors(node, start)?;
        while self.is("++") || self.is("--") {
            self.advance();
            node.span = self.span_from(start);
        }
        Ok(node)
    }

    fn try_cast(&mut self) -> PResult<Option<AstNode>> {
        let start = self.start();
        let m = self.mark();
        self.advance();
        let primitive = PRIMITIVES.contains(&self.peek());
        let Ok(ty) = self.parse_type() else {
            self.reset(m);
            return Ok(None);
        };
        while self.eat("&") {
            if self.parse_type().is_err() {
                self.reset(m);
                return Ok(None);
            }
        }
        if !self.eat(")") {
            self.reset(m);
            return Ok(None);
        }
        let next = self.peek();
        let operand_follows = match self.kind_n(0) {
            Some(TokKind::Ident) => !BINARY_LEVELS.iter().any(|l| l.contains(&next)),
            Some(TokKind::Number) | Some(TokKind::Str) => true,
            Some(TokKind::Punct) => {
                matches!(next, "(" | "!" | "~") || (primitive && matches!(next, "+" | "-" | "++" | "--"))
            }
            None => false,
        };
        if !operand_follows {
            self.reset(m);
            return Ok(None);
        }
        let operand = match self.try_lambda()? {
            Some(l) => l,
            None => self.unary()?,
        };
        Ok(Some(AstNode::new("Cast", self.span_from(start)).with_children(alloc::vec![ty, operand])))
    }

    fn arguments(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("(")?;
        let mut args = Vec::new();
        while !self.is(")") {
            args.push(self.expression()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let start = self.start();
        match self.kind_n(0) {
            Some(TokKind::Number) | Some(TokKind::Str) => {
                self.advance();
                return Ok(AstNode::new("Literal", self.span_from(start)));
            }
            None => return Err(self.error("expected expression")),
            _ => {}
        }
        match self.peek() {
            "true" | "false" | "null" => {
                self.advance();
                Ok(AstNode::new("Literal", self.span_from(start)))
            }
            "(" => {
                self.advance();
                let e = self.expression()?;
                self.expect(")")?;
                Ok(e)
            }
            "this" => {
                self.advance();
                if self.is("(") {
                    let args = self.arguments()?;
                    return Ok(AstNode::new("ExplicitConstructorInvocation", self.span_from(start)).with_children(args));
                }
                Ok(AstNode::new("This", self.span_from(start)))
            }
            "super" => {
                self.advance();
                if self.is("(") {
                    let args = self.arguments()?;
                    return Ok(AstNode::new("SuperConstructorInvocation", self.span_from(start)).with_children(args));
                }
                if self.is("::") {
                    return Ok(AstNode::new("This", self.span_from(start)));
                }
                self.expect(".")?;
                if self.is("<") {
                    self.type_arguments()?;
                }
                self.ident()?;
                if self.is("(") {
                    let args = self.arguments()?;
                    return Ok(AstNode::new("SuperMethodInvocation", self.span_from(start)).with_children(args));
                }
                Ok(AstNode::new("SuperMemberReference", self.span_from(start)))
            }
            "new" => self.creator(),
            "void" => {
                self.advance();
                self.expect(".")?;
                self.expect("class")?;
                Ok(AstNode::new("VoidClassReference", self.span_from(start)))
            }
            "switch" => {
                let mut sw = self.switch_statement()?;
                sw.kind = "SwitchExpression";
                Ok(sw)
            }
            "<" => {
                self.type_arguments()?;
                self.ident()?;
                let args = self.arguments()?;
                Ok(AstNode::new("MethodInvocation", self.span_from(start)).with_children(args))
            }
            p if PRIMITIVES.contains(&p) => {
                let ty = self.parse_type()?;
                if self.eat("::") {
                    self.advance();
                    return Ok(AstNode::new("MethodReference", self.span_from(start)).with_children(alloc::vec![ty]));
                }
                self.expect(".")?;
                self.expect("class")?;
                Ok(AstNode::new("ClassReference", self.span_from(start)).with_children(alloc::vec![ty]))
            }
            _ if self.is_ident_n(0) => self.name_primary(),
            _ => Err(self.error("expected expression")),
        }
    }

    /// `a.b.c`, `a.b.m(args)`, `a.B.class`, `Outer.this`, `T[]::new`.
    fn name_primary(&mut self) -> PResult<AstNode> {
        let start = self.start();
        let mut parts: Vec<&'a str> = alloc::vec![self.ident()?];
        loop {
            if self.is("(") {
                let args = self.arguments()?;
                return Ok(AstNode::new("MethodInvocation", self.span_from(start)).with_children(args));
            }
            if self.is(".") {
                match self.peek_n(1) {
                    "class" => {
                        self.advance();
                        self.advance();
                        let ty = AstNode::labeled("ReferenceType", parts.join("."), self.span_from(start));
                        return Ok(AstNode::new("ClassReference", self.span_from(start)).with_children(alloc::vec![ty]));
                    }
                    "this" => {
                        self.advance();
                        self.advance();
                        return Ok(AstNode::new("This", self.span_from(start)));
                    }
                    "new" => {
                        let base = AstNode::new("MemberReference", self.span_from(start));
                        self.advance();
                        let creator = self.creator()?;
                        let mut node = base;
                        node.push(creator);
                        node.span = self.span_from(start);
                        return Ok(node);
                    }
                    "<" => {
                        self.advance();
                        self.type_arguments()?;
                        parts.push(self.ident()?);
                        continue;
                    }
                    _ if self.is_ident_n(1) => {
                        self.advance();
                        parts.push(self.advance());
                        continue;
                    }
                    _ => {}
                }
            }
            if self.is("[") && self.peek_n(1) == "]" {
                self.dims();
                let ty = AstNode::labeled("ReferenceType", parts.join("."), self.span_from(start));
                if self.eat(".") {
                    self.expect("class")?;
                    return Ok(AstNode::new("ClassReference", self.span_from(start)).with_children(alloc::vec![ty]));
                }
                return Ok(ty);
            }
            if self.is("<") && !parts.is_empty() {
                // `List<String>::new` style generic method references
                let m = self.mark();
                if self.type_arguments().is_ok() && self.is("::") {
                    return Ok(AstNode::labeled("ReferenceType", parts.join("."), self.span_from(start)));
                }
                self.reset(m);
            }
            return Ok(AstNode::new("MemberReference", self.span_from(start)));
        }
    }

    fn creator(&mut self) -> PResult<AstNode> {
        let start = self.start();
        self.expect("new")?;
        if self.is("<") {
            self.type_arguments()?;
        }
        self.skip_type_annotations()?;
        let ty_start = self.start();
        let ty = if PRIMITIVES.contains(&self.peek()) {
            let name = self.advance();
            AstNode::labeled("BasicType", name, self.span_from(ty_start))
        } else {
            let mut name = String::from(self.ident()?);
            let mut args = Vec::new();
            loop {
                if self.is("<") {
                    args.extend(self.type_arguments()?);
                }
                if self.is(".") && self.is_ident_n(1) {
                    self.advance();
                    name.push('.');
                    name.push_str(self.advance());
                    continue;
                }
                break;
            }
            AstNode::labeled("ReferenceType", name, self.span_from(ty_start)).with_children(args)
        };
        if self.is("[") {
            let mut node = AstNode::new("ArrayCreator", (start, start));
            node.push(ty);
            while self.is("[") {
                self.advance();
                if self.eat("]") {
                    continue;
                }
                node.push(self.expression()?);
                self.expect("]")?;
            }
            if self.is("{") {
                node.push(self.array_initializer()?);
            }
            node.span = self.span_from(start);
            return Ok(node);
        }
        let mut node = AstNode::new("ClassCreator", (start, start));
        node.push(ty);
        node.children.extend(self.arguments()?);
        if self.is("{") {
            node.children.extend(self.class_body()?);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn selectors(&mut self, mut node: AstNode, start: usize) -> PResult<AstNode> {
        loop {
            let sel_start = self.start();
            if self.is(".") {
                self.advance();
                if self.is("<") {
                    self.type_arguments()?;
                }
                if self.is("new") {
                    let creator = self.creator()?;
                    node.push(creator);
                } else {
                    self.ident()?;
                    if self.is("(") {
                        let args = self.arguments()?;
                        node.push(AstNode::new("MethodInvocation", self.span_from(sel_start)).with_children(args));
                    } else {
                        node.push(AstNode::new("MemberReference", self.span_from(sel_start)));
                    }
                }
            } else if self.is("[") {
                self.advance();
                let index = self.expression()?;
                self.expect("]")?;
                node.push(AstNode::new("ArraySelector", self.span_from(sel_start)).with_children(alloc::vec![index]));
            } else if self.is("::") {
                self.advance();
                if self.is("<") {
                    self.type_arguments()?;
                }
                let m_start = self.start();
                if !self.eat("new") {
                    self.ident()?;
                }
                let method = AstNode::new("MemberReference", self.span_from(m_start));
                node = AstNode::new("MethodReference", self.span_from(start)).with_children(alloc::vec![node, method]);
                continue;
            } else {
                return Ok(node);
            }
            node.span = self.span_from(start);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kinds(code: &str) -> Vec<String> {
        let roots = parse(code).unwrap_or_else(|e| panic!("{e}: {code}"));
        roots.iter().flat_map(|r| r.preorder()).map(|n| n.render(true)).collect()
    }

    const FORMAT: &str = r#"public String format(LoggingEvent event) {
    // Reset working stringbuffer
    if(sbuf.capacity() > MAX_CAPACITY) {
      sbuf = new StringBuffer(BUF_SIZE);
    } else {
      sbuf.setLength(0);
    }
    PatternConverter c = head;
    while(c != null) {
      c.format(sbuf, event);
      c = c.next;
    }
    return sbuf.toString();
}"#;

    #[test]
    fn format_method_tree() {
        let k = kinds(FORMAT);
        assert_eq!(
            k,
            vec![
                "MethodDeclaration_format",
                "ReferenceType_String",
                "FormalParameter_event",
                "ReferenceType_LoggingEvent",
                "IfStatement",
                "BinaryOperation",
                "MethodInvocation",
                "MemberReference",
                "BlockStatement",
                "StatementExpression",
                "Assignment",
                "MemberReference",
                "ClassCreator",
                "ReferenceType_StringBuffer",
                "MemberReference",
                "BlockStatement",
                "StatementExpression",
                "MethodInvocation",
                "Literal",
                "LocalVariableDeclaration",
                "ReferenceType_PatternConverter",
                "VariableDeclarator_c",
                "MemberReference",
                "WhileStatement",
                "BinaryOperation",
                "MemberReference",
                "Literal",
                "BlockStatement",
                "StatementExpression",
                "MethodInvocation",
                "MemberReference",
                "MemberReference",
                "StatementExpression",
                "Assignment",
                "MemberReference",
                "MemberReference",
                "ReturnStatement",
                "MethodInvocation",
            ]
        );
    }

    #[test]
    fn generics_and_shift_closing() {
        let k = kinds("Map<String, List<Integer>> m = new HashMap<>(); int x = a >> 2;");
        assert!(k.contains(&"FieldDeclaration".into()));
        assert_eq!(k[1], "ReferenceType_Map");
        let k = kinds("List<List<String>> f() { return null; }");
        assert_eq!(k[0], "MethodDeclaration_f");
        assert_eq!(k[1], "ReferenceType_List");
    }

    #[test]
    fn statements_cover_the_common_forms() {
        let code = r#"
        @Override
        protected synchronized <T extends Comparable<T>> T[] sort(final T[] items, int... rest) throws IOException {
            label: for (int i = 0, j = 1; i < items.length; i++, j--) {
                if (i % 2 == 0) continue label; else break;
            }
            for (T item : items) { System.out.println(item); }
            do { x += (int) y; } while (x < 10);
            try (InputStream in = open(); Reader r = wrap(in)) {
                throw new IllegalStateException("bad " + x);
            } catch (IOException | RuntimeException e) {
                log.warn(e.getMessage());
            } finally { close(); }
            switch (mode) {
                case 1: case 2: run(); break;
                default: stop();
            }
            Runnable r = () -> { run(); };
            Function<String, Integer> f = s -> s.length();
            Comparator<T> c = (a, b) -> a.compareTo(b);
            Supplier<List<T>> s = ArrayList::new;
            int[] arr = new int[] {1, 2, 3};
            int[][] grid = new int[3][];
            Object o = cond ? items[0] : null;
            boolean b = o instanceof String;
            Class<?> k = String.class;
            assert items != null : "items";
            synchronized (this) { this.count++; }
            return (T[]) items.clone();
        }"#;
        let k = kinds(code);
        assert_eq!(k[0], "MethodDeclaration_sort");
        assert_eq!(k[1], "Annotation_Override");
        assert_eq!(k[2], "TypeParameter_T");
        for expected in [
            "ForStatement",
            "ForControl",
            "EnhancedForControl",
            "DoStatement",
            "TryStatement",
            "TryResource_in",
            "CatchClause",
            "CatchClauseParameter_e",
            "SwitchStatement",
            "SwitchStatementCase",
            "LambdaExpression",
            "InferredFormalParameter_s",
            "MethodReference",
            "ArrayCreator",
            "ArrayInitializer",
            "TernaryExpression",
            "ArraySelector",
            "ClassReference",
            "AssertStatement",
            "SynchronizedStatement",
            "Cast",
            "ThrowStatement",
            "ContinueStatement",
            "BreakStatement",
            "This",
        ] {
            assert!(k.iter().any(|x| x == expected), "missing {expected} in {k:?}");
        }
    }

    #[test]
    fn class_wrappers_and_constructors() {
        let code = "package a.b; import java.util.*; public class Foo<T> extends Bar implements Baz { private int n; Foo(int n) { super(); this.n = n; } enum E { A, B(1) { void f() {} }; int v; } }";
        let k = kinds(code);
        assert_eq!(k[0], "PackageDeclaration_a.b");
        assert_eq!(k[1], "Import_java.util.*");
        assert_eq!(k[2], "ClassDeclaration_Foo");
        assert!(k.contains(&"ConstructorDeclaration_Foo".into()));
        assert!(k.contains(&"SuperConstructorInvocation".into()));
        assert!(k.contains(&"EnumConstantDeclaration_B".into()));
    }

    #[test]
    fn parse_errors_are_reported_with_positions() {
        let err = parse("public void f( {").unwrap_err();
        assert!(err.position > 0);
        assert!(parse("x = 1;").is_err());
        assert!(parse("void f() { return }").is_err());
    }

    #[test]
    fn cast_versus_parenthesized_expression() {
        let k = kinds("void f() { a = (b) + c; d = (String) e; g = (int) -h; }");
        assert_eq!(k.iter().filter(|x| *x == "Cast").count(), 2);
        assert_eq!(k.iter().filter(|x| *x == "BinaryOperation").count(), 1);
    }

    #[test]
    fn spans_cover_the_method() {
        let roots = parse(FORMAT).unwrap();
        assert_eq!(roots[0].span, (0, FORMAT.len()));
    }
}
