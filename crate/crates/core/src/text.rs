//! Tokenizing and span helpers shared by the parser, glossary and rule checkers.
//!
//! Public offsets are character offsets (Unicode scalar values), half open.
//! Internally everything is sliced by byte offsets and converted at the edge.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Half-open character range `[start, end)` into some text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Slice `text` by this character span.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let start = byte_offset(text, self.start);
        let end = byte_offset(text, self.end);
        &text[start..end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Byte offset of the `n`th character, clamped to the text length.
pub fn byte_offset(text: &str, n: usize) -> usize {
    text.char_indices().nth(n).map(|(b, _)| b).unwrap_or(text.len())
}

pub fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

pub(crate) fn char_span(text: &str, byte_start: usize, byte_end: usize) -> Span {
    let start = char_offset(text, byte_start);
    Span::new(start, start + text[byte_start..byte_end].chars().count())
}

/// Collapse whitespace runs to single spaces and trim both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?'];

/// A whitespace-delimited token. `core` is the token with trailing punctuation stripped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Token<'a> {
    pub start: usize,
    pub end: usize,
    pub text: &'a str,
    pub core: &'a str,
}

impl Token<'_> {
    pub fn is(&self, word: &str) -> bool {
        eq_folded(self.core, word)
    }
}

pub(crate) fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(make_token(text, s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(make_token(text, s, text.len()));
    }
    tokens
}

pub(crate) fn make_token(text: &str, start: usize, end: usize) -> Token<'_> {
    let raw = &text[start..end];
    let core = raw.trim_end_matches(TRAILING_PUNCT);
    Token {
        start,
        end,
        text: raw,
        core,
    }
}

/// Length in tokens of `phrase` if it matches `tokens` starting at `at`
/// (case-insensitive, per-token comparison of stripped cores).
pub(crate) fn phrase_at(tokens: &[Token<'_>], at: usize, phrase: &str) -> Option<usize> {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    if words.is_empty() {
        return None;
    }
    for (n, word) in words.iter().enumerate() {
        let tok = tokens.get(at + n)?;
        if !eq_folded(tok.core, word) {
            return None;
        }
        // punctuation may only trail the final word
        if n + 1 < words.len() && tok.core.len() != tok.text.len() {
            return None;
        }
    }
    Some(words.len())
}

pub(crate) fn eq_folded(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
        || a.chars()
            .flat_map(char::to_lowercase)
            .eq(b.chars().flat_map(char::to_lowercase))
}

/// All occurrences of a multi-word phrase, as byte ranges.
pub(crate) fn find_phrase(text: &str, phrase: &str) -> Vec<(usize, usize)> {
    let tokens = tokenize(text);
    let mut found = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if let Some(n) = phrase_at(&tokens, i, phrase) {
            let last = &tokens[i + n - 1];
            found.push((tokens[i].start, last.start + last.core.len()));
            i += n;
        } else {
            i += 1;
        }
    }
    found
}

/// Byte ranges of `TB[CDRN]` matches (case-sensitive, not word bounded).
pub fn find_tbx(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut found = Vec::new();
    let mut i = 0;
    while i + 3 <= bytes.len() {
        if bytes[i] == b'T' && bytes[i + 1] == b'B' && matches!(bytes[i + 2], b'C' | b'D' | b'R' | b'N') {
            found.push((i, i + 3));
            i += 3;
        } else {
            i += 1;
        }
    }
    found
}

/// Case-insensitive (per `char::to_lowercase`) prefix comparison. Returns the
/// byte length consumed from `text` on a match.
pub(crate) fn starts_with_folded(text: &str, prefix: &str, fold: bool) -> Option<usize> {
    if !fold {
        return text.starts_with(prefix).then_some(prefix.len());
    }
    let mut t = text.char_indices();
    for p in prefix.chars() {
        let (_, c) = t.next()?;
        if !c.to_lowercase().eq(p.to_lowercase()) {
            return None;
        }
    }
    Some(t.next().map(|(i, _)| i).unwrap_or(text.len()))
}
