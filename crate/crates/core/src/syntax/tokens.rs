//! Parser-facing view of the lexical stream.

use alloc::vec::Vec;

use crate::lexer::{is_comment, lex_code};
use crate::record::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokKind {
    Ident,
    Number,
    Str,
    Punct,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tok<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
    pub kind: TokKind,
}

pub(crate) fn classify(text: &str, language: Language) -> TokKind {
    let mut chars = text.chars();
    let first = chars.next().unwrap_or(' ');
    if first == '"' || first == '\'' {
        return TokKind::Str;
    }
    if first.is_ascii_digit() || (first == '.' && chars.next().is_some_and(|c| c.is_ascii_digit())) {
        return TokKind::Number;
    }
    if first == '_' || first.is_alphabetic() || (language == Language::Java && first == '$') {
        if language == Language::Python {
            if let Some(q) = text.find(['"', '\'']) {
                if q <= 2 {
                    return TokKind::Str;
                }
            }
        }
        return TokKind::Ident;
    }
    TokKind::Punct
}

/// Lexes `code` and drops comments.
pub(crate) fn significant(code: &str, language: Language) -> Vec<Tok<'_>> {
    let seq = lex_code(code, language);
    seq.spans()
        .iter()
        .filter_map(|&(start, end)| {
            let text = &code[start..end];
            if is_comment(text, language) {
                return None;
            }
            Some(Tok { text, start, end, kind: classify(text, language) })
        })
        .collect()
}
