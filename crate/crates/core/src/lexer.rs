//! Deterministic lexical token streams for code and summaries.
//!
//! The code lexer is the baseline every retention figure is measured against:
//! identifiers, keywords, literals, operators and punctuation each become one
//! token, comments are kept whole, whitespace is dropped. Lexing never fails;
//! a byte sequence that fits no rule becomes a single-character token.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::record::Language;

/// Where a token stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Code,
    Summary,
    AstSerialized,
}

/// An ordered token stream with byte spans back into the originating text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
    spans: Vec<(usize, usize)>,
    origin: Origin,
}

impl TokenSequence {
    pub fn empty(origin: Origin) -> Self {
        TokenSequence { tokens: Vec::new(), spans: Vec::new(), origin }
    }

    /// Builds a sequence from parallel token and span lists.
    ///
    /// Panics if the lists differ in length or a token is empty; both are
    /// programming errors in the producer.
    pub fn from_parts(tokens: Vec<String>, spans: Vec<(usize, usize)>, origin: Origin) -> Self {
        assert_eq!(tokens.len(), spans.len(), "token and span counts differ");
        assert!(tokens.iter().all(|t| !t.is_empty()), "empty token");
        TokenSequence { tokens, spans, origin }
    }

    pub(crate) fn push(&mut self, token: String, span: (usize, usize)) {
        debug_assert!(!token.is_empty());
        self.tokens.push(token);
        self.spans.push(span);
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    /// Keeps the tokens at positions where `keep` is true.
    pub(crate) fn select(&self, keep: &[bool]) -> TokenSequence {
        let mut out = TokenSequence::empty(self.origin);
        for ((tok, span), k) in self.tokens.iter().zip(&self.spans).zip(keep) {
            if *k {
                out.push(tok.clone(), *span);
            }
        }
        out
    }

    /// Joins tokens into text that lexes back to the same tokens: a single
    /// space between tokens, a newline after line comments.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                let prev = &self.tokens[i - 1];
                if is_line_comment(prev) {
                    out.push('\n');
                } else {
                    out.push(' ');
                }
            }
            out.push_str(tok);
        }
        out
    }
}

fn is_line_comment(tok: &str) -> bool {
    tok.starts_with("//") || tok.starts_with('#')
}

/// True for tokens the code lexer emits as comments.
pub fn is_comment(token: &str, language: Language) -> bool {
    match language {
        Language::Java => token.starts_with("//") || token.starts_with("/*"),
        Language::Python => token.starts_with('#'),
    }
}

const JAVA_OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

const PYTHON_OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=",
];

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset_chars: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset_chars)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn bump_while(&mut self, mut f: impl FnMut(char) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    /// Advances to the end of the current line (not consuming the newline)
    /// and returns the end of the line's content with trailing whitespace
    /// excluded.
    fn skip_line(&mut self) -> usize {
        let line_len = self.rest().find('\n').unwrap_or(self.rest().len());
        let line = &self.rest()[..line_len];
        let content_end = self.pos + line.trim_end().len();
        self.pos += line_len;
        content_end
    }
}

fn is_ident_start(c: char, language: Language) -> bool {
    c == '_' || c.is_alphabetic() || (language == Language::Java && c == '$')
}

fn is_ident_continue(c: char, language: Language) -> bool {
    c == '_' || c.is_alphanumeric() || (language == Language::Java && c == '$')
}

/// Lexes source code into its baseline token stream.
pub fn lex_code(code: &str, language: Language) -> TokenSequence {
    let mut out = TokenSequence::empty(Origin::Code);
    let mut s = Scanner { src: code, pos: 0 };
    while let Some(c) = s.peek() {
        let start = s.pos;
        if c.is_whitespace() {
            s.bump();
            continue;
        }
        let end = match language {
            Language::Java => lex_java_token(&mut s, c),
            Language::Python => lex_python_token(&mut s, c),
        };
        debug_assert!(end > start);
        out.push(code[start..end].to_string(), (start, end));
    }
    out
}

fn lex_java_token(s: &mut Scanner<'_>, c: char) -> usize {
    let rest = s.rest();
    if rest.starts_with("//") {
        return s.skip_line();
    }
    if let Some(body) = rest.strip_prefix("/*") {
        let len = body.find("*/").map(|i| i + 4).unwrap_or(rest.len());
        s.pos += len;
        return s.pos;
    }
    if rest.starts_with("\"\"\"") {
        s.pos += 3;
        let body = s.rest();
        let mut i = 0;
        let bytes = body.as_bytes();
        while i < bytes.len() {
            if bytes[i] == b'\\' {
                i += 2;
                continue;
            }
            if bytes[i..].starts_with(b"\"\"\"") {
                s.pos += i + 3;
                return s.pos;
            }
            i += 1;
        }
        s.pos = s.src.len();
        return s.pos;
    }
    if c == '"' || c == '\'' {
        return lex_quoted_line(s, c);
    }
    if c.is_ascii_digit() || (c == '.' && s.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
        return lex_number(s);
    }
    if is_ident_start(c, Language::Java) {
        s.bump_while(|ch| is_ident_continue(ch, Language::Java));
        return s.pos;
    }
    lex_operator(s, JAVA_OPERATORS)
}

fn lex_python_token(s: &mut Scanner<'_>, c: char) -> usize {
    if c == '#' {
        return s.skip_line();
    }
    if let Some(prefix_len) = python_string_prefix(s.rest()) {
        s.pos += prefix_len;
        let prefix = &s.src[s.pos - prefix_len..s.pos];
        let raw = prefix.contains(['r', 'R']);
        return lex_python_string(s, raw);
    }
    if c.is_ascii_digit() || (c == '.' && s.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
        return lex_number(s);
    }
    if is_ident_start(c, Language::Python) {
        s.bump_while(|ch| is_ident_continue(ch, Language::Python));
        return s.pos;
    }
    lex_operator(s, PYTHON_OPERATORS)
}

/// Length of a string prefix (possibly empty) if a Python string literal
/// starts here.
fn python_string_prefix(rest: &str) -> Option<usize> {
    let bytes = rest.as_bytes();
    let mut i = 0;
    while i < bytes.len() && i < 2 && matches!(bytes[i], b'r' | b'R' | b'b' | b'B' | b'u' | b'U' | b'f' | b'F') {
        i += 1;
    }
    while i > 0 {
        if matches!(bytes.get(i), Some(b'"' | b'\'')) && valid_python_prefix(&rest[..i]) {
            return Some(i);
        }
        i -= 1;
    }
    matches!(bytes.first(), Some(b'"' | b'\'')).then_some(0)
}

fn valid_python_prefix(p: &str) -> bool {
    let lower = p.to_ascii_lowercase();
    matches!(lower.as_str(), "r" | "u" | "b" | "f" | "br" | "rb" | "fr" | "rf")
}

fn lex_python_string(s: &mut Scanner<'_>, raw: bool) -> usize {
    let quote = s.peek().expect("caller checked quote");
    let triple: String = core::iter::repeat_n(quote, 3).collect();
    if s.rest().starts_with(triple.as_str()) {
        s.pos += 3;
        let body = s.rest();
        let bytes = body.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == b'\\' {
                i += 2;
                continue;
            }
            if bytes[i..].starts_with(triple.as_bytes()) {
                s.pos += i + 3;
                return s.pos;
            }
            i += 1;
        }
        s.pos = s.src.len();
        return s.pos;
    }
    // Raw strings still cannot end on an escaped quote, so escapes are
    // skipped either way; `raw` only matters to consumers of the value.
    let _ = raw;
    lex_quoted_line(s, quote)
}

/// A single-line quoted literal; an unterminated literal stops before the
/// newline.
fn lex_quoted_line(s: &mut Scanner<'_>, quote: char) -> usize {
    s.bump();
    while let Some(c) = s.peek() {
        match c {
            '\\' => {
                s.bump();
                if s.peek().is_some_and(|n| n != '\n') {
                    s.bump();
                }
            }
            '\n' => return trim_end_pos(s.src, s.pos),
            c if c == quote => {
                s.bump();
                return s.pos;
            }
            _ => {
                s.bump();
            }
        }
    }
    trim_end_pos(s.src, s.pos)
}

fn trim_end_pos(src: &str, pos: usize) -> usize {
    src[..pos].trim_end().len()
}

fn lex_number(s: &mut Scanner<'_>) -> usize {
    let rest = s.rest();
    let hex = rest.starts_with("0x") || rest.starts_with("0X");
    let mut prev = '\0';
    while let Some(c) = s.peek() {
        let exponent_sign =
            (c == '+' || c == '-') && ((!hex && (prev == 'e' || prev == 'E')) || (hex && (prev == 'p' || prev == 'P')));
        if c.is_ascii_alphanumeric() || c == '_' || c == '.' || exponent_sign {
            if c == '.' && s.peek_at(1) == Some('.') {
                break;
            }
            prev = c;
            s.bump();
        } else {
            break;
        }
    }
    s.pos
}

fn lex_operator(s: &mut Scanner<'_>, operators: &[&str]) -> usize {
    let rest = s.rest();
    for op in operators {
        if rest.starts_with(op) {
            s.pos += op.len();
            return s.pos;
        }
    }
    s.bump();
    s.pos
}

/// Tokenizes a natural-language summary: whitespace-delimited units with
/// trailing punctuation split off one character at a time.
pub fn lex_summary(summary: &str) -> TokenSequence {
    let mut out = TokenSequence::empty(Origin::Summary);
    let mut offset = 0;
    for unit in summary.split_inclusive(char::is_whitespace) {
        let start = offset;
        offset += unit.len();
        let word = unit.trim_end();
        if word.is_empty() {
            continue;
        }
        let mut stem_end = word.len();
        while let Some(c) = word[..stem_end].chars().next_back() {
            if stem_end == c.len_utf8() || !c.is_ascii_punctuation() {
                break;
            }
            stem_end -= c.len_utf8();
        }
        out.push(word[..stem_end].to_string(), (start, start + stem_end));
        let mut p = stem_end;
        for c in word[stem_end..].chars() {
            let w = c.len_utf8();
            out.push(word[p..p + w].to_string(), (start + p, start + p + w));
            p += w;
        }
    }
    out
}

/// Extracts the first sentence of a summary.
///
/// The sentence ends at the first `.`, `!` or `?` followed by whitespace or
/// end of text. Without such a terminator the first line is returned.
/// Abbreviations such as "e.g." are not special-cased.
pub fn first_sentence(summary: &str) -> &str {
    let text = summary.trim_start();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            match chars.peek() {
                None => return text,
                Some((_, next)) if next.is_whitespace() => return &text[..i + c.len_utf8()],
                _ => {}
            }
        }
    }
    text.lines().next().unwrap_or("").trim_end()
}
