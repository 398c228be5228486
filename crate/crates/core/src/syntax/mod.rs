//! Syntax trees for Java and Python methods.
//!
//! Node kinds follow the conventional names of each language's tree model
//! (`MethodDeclaration`, `ReferenceType` for Java; `FunctionDef`, `BinOp` for
//! Python). Only named structural nodes are materialized: Java modifiers and
//! qualifiers are attributes, and Python expression contexts and operator
//! nodes are omitted.

mod header;
mod java;
mod python;
mod tokens;

use alloc::string::String;
use alloc::vec::Vec;

use crate::record::Language;

pub use header::{signature_span, SignatureSpan};

/// One node of a syntax tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub kind: &'static str,
    /// Declared name or referenced type name, for nodes that carry one.
    pub label: Option<String>,
    /// Byte range of the node in the source.
    pub span: (usize, usize),
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub(crate) fn new(kind: &'static str, span: (usize, usize)) -> Self {
        AstNode { kind, label: None, span, children: Vec::new() }
    }

    pub(crate) fn labeled(kind: &'static str, label: impl Into<String>, span: (usize, usize)) -> Self {
        AstNode { kind, label: Some(label.into()), span, children: Vec::new() }
    }

    pub(crate) fn with_children(mut self, children: Vec<AstNode>) -> Self {
        self.children = children;
        self
    }

    pub(crate) fn push(&mut self, child: AstNode) {
        self.children.push(child);
    }

    /// Renders the node type, fused with its label when `fuse` is set.
    pub fn render(&self, fuse: bool) -> String {
        match (&self.label, fuse) {
            (Some(label), true) => alloc::format!("{}_{}", self.kind, label),
            _ => String::from(self.kind),
        }
    }

    /// Pre-order traversal.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: alloc::vec![self] }
    }

    pub fn node_count(&self) -> usize {
        self.preorder().count()
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a AstNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a AstNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// A parsed source unit. Python sources have a single `Module` root; Java
/// method records yield one root per top-level declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxTree {
    pub language: Language,
    pub roots: Vec<AstNode>,
}

impl SyntaxTree {
    pub fn preorder(&self) -> impl Iterator<Item = &AstNode> {
        self.roots.iter().flat_map(AstNode::preorder)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {position}: {message}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        SyntaxError { position, message: message.into() }
    }
}

/// Parses source text under the grammar of `language`.
pub fn parse(code: &str, language: Language) -> Result<SyntaxTree, SyntaxError> {
    let roots = match language {
        Language::Java => java::parse(code)?,
        Language::Python => alloc::vec![python::parse(code)?],
    };
    Ok(SyntaxTree { language, roots })
}
