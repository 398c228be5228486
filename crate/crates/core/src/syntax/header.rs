//! Locates the declaration header of the first function or method.

use core::ops::Range;

use alloc::vec::Vec;

use crate::lexer::{is_comment, TokenSequence};
use crate::record::Language;

/// Header of the first declaration found in a token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureSpan {
    /// Token index range into the lexical stream the span was found in.
    pub tokens: Range<usize>,
    /// Byte range in the source.
    pub bytes: (usize, usize),
}

const JAVA_MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "default",
    "transient",
    "volatile",
];

const JAVA_PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

const JAVA_KEYWORDS: &[&str] = &[
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

/// Finds the first declaration header in `seq`, a lexical stream of `code`.
///
/// Java headers run from the first modifier or return-type token through the
/// closing `)` of the parameter list; annotations before the header and any
/// `throws` clause are excluded. Python headers run from `def` through the
/// header `:`; decorators are excluded.
pub fn signature_span(seq: &TokenSequence, code: &str, language: Language) -> Option<SignatureSpan> {
    let idx: Vec<usize> =
        seq.tokens().iter().enumerate().filter(|(_, t)| !is_comment(t, language)).map(|(i, _)| i).collect();
    let texts: Vec<&str> = idx.iter().map(|&i| seq.tokens()[i].as_str()).collect();
    let found = match language {
        Language::Java => java_header(&texts),
        Language::Python => python_header(&texts),
    }?;
    let (first, last) = (idx[found.0], idx[found.1]);
    let spans = seq.spans();
    let bytes = (spans[first].0, spans[last].1);
    debug_assert!(bytes.1 <= code.len());
    Some(SignatureSpan { tokens: first..last + 1, bytes })
}

fn is_ident(t: &str) -> bool {
    let mut chars = t.chars();
    chars.next().is_some_and(|c| c == '_' || c == '$' || c.is_alphabetic())
        && chars.all(|c| c == '_' || c == '$' || c.is_alphanumeric())
}

fn is_java_name(t: &str) -> bool {
    is_ident(t) && !JAVA_KEYWORDS.contains(&t)
}

/// Index of the token closing the bracket opened at `open`.
fn matching(t: &[&str], open: usize, left: &str, right: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, tok) in t.iter().enumerate().skip(open) {
        if *tok == left {
            depth += 1;
        } else if *tok == right {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Index after the generic argument list opened at `open`.
fn skip_angles(t: &[&str], open: usize) -> Option<usize> {
    let mut depth = 0isize;
    for (i, tok) in t.iter().enumerate().skip(open) {
        match *tok {
            "<" => depth += 1,
            ">" => depth -= 1,
            ">>" => depth -= 2,
            ">>>" => depth -= 3,
            "(" | ")" | "{" | "}" | ";" | "=" => return None,
            _ => {}
        }
        if depth <= 0 {
            return (depth == 0).then_some(i + 1);
        }
    }
    None
}

fn skip_annotation(t: &[&str], mut i: usize) -> Option<usize> {
    // `@` Name(.Name)* [( ... )]
    i += 1;
    if !is_ident(t.get(i)?) || t[i] == "interface" {
        return None;
    }
    i += 1;
    while t.get(i) == Some(&".") && t.get(i + 1).is_some_and(|s| is_ident(s)) {
        i += 2;
    }
    if t.get(i) == Some(&"(") {
        i = matching(t, i, "(", ")")? + 1;
    }
    Some(i)
}

fn java_type_end(t: &[&str], mut i: usize) -> Option<usize> {
    let first = *t.get(i)?;
    if JAVA_PRIMITIVES.contains(&first) {
        i += 1;
    } else {
        if !is_java_name(first) {
            return None;
        }
        i += 1;
        loop {
            if t.get(i) == Some(&"<") {
                i = skip_angles(t, i)?;
            }
            if t.get(i) == Some(&".") && t.get(i + 1).is_some_and(|s| is_java_name(s)) {
                i += 2;
            } else {
                break;
            }
        }
    }
    while t.get(i) == Some(&"[") && t.get(i + 1) == Some(&"]") {
        i += 2;
    }
    Some(i)
}

fn java_header_at(t: &[&str], mut i: usize) -> Option<(usize, usize)> {
    while t.get(i) == Some(&"@") {
        i = skip_annotation(t, i)?;
    }
    let start = i;
    loop {
        match t.get(i) {
            Some(m) if JAVA_MODIFIERS.contains(m) => i += 1,
            Some(&"@") => i = skip_annotation(t, i)?,
            _ => break,
        }
    }
    if t.get(i) == Some(&"<") {
        i = skip_angles(t, i)?;
    }
    // constructor: Name (
    if is_java_name(t.get(i)?) && t.get(i + 1) == Some(&"(") {
        let close = matching(t, i + 1, "(", ")")?;
        return matches!(t.get(close + 1), Some(&"{") | Some(&"throws")).then_some((start, close));
    }
    let type_end = java_type_end(t, i)?;
    if !is_java_name(t.get(type_end)?) || t.get(type_end + 1) != Some(&"(") {
        return None;
    }
    let close = matching(t, type_end + 1, "(", ")")?;
    let mut after = close + 1;
    while t.get(after) == Some(&"[") && t.get(after + 1) == Some(&"]") {
        after += 2;
    }
    matches!(t.get(after), Some(&"{") | Some(&"throws") | Some(&";") | Some(&"default")).then_some((start, close))
}

fn java_header(t: &[&str]) -> Option<(usize, usize)> {
    (0..t.len()).filter(|&p| p == 0 || matches!(t[p - 1], ";" | "{" | "}")).find_map(|p| java_header_at(t, p))
}

fn python_header(t: &[&str]) -> Option<(usize, usize)> {
    let start = (0..t.len())
        .find(|&i| t[i] == "def" && t.get(i + 1).is_some_and(|s| is_ident(s)) && t.get(i + 2) == Some(&"("))?;
    let close = matching(t, start + 2, "(", ")")?;
    let mut depth = 0usize;
    for (i, tok) in t.iter().enumerate().skip(close + 1) {
        match *tok {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth = depth.checked_sub(1)?,
            ":" if depth == 0 => return Some((start, i)),
            _ => {}
        }
    }
    None
}
