//! The line-oriented key-value block format used by corpus and catalog files.
//!
//! ```text
//! # comment
//! [requirement L3-EX.1]
//! name = Collect Regolith
//! text = <<<
//! multi-line values sit between fence lines
//! >>>
//! ```
//!
//! A block opens with `[kind id]` and ends at the next blank line. A fence
//! may use more than three `<`; it then closes with as many `>`. Line endings
//! are normalized, so a `\r` before a line break is not preserved.

use std::fmt::Write as _;

use thiserror::Error;

const MIN_FENCE: usize = 3;

/// Length of a fence opener `<<<`, `<<<<`, ...
fn fence_len(value: &str) -> Option<usize> {
    (value.len() >= MIN_FENCE && value.bytes().all(|b| b == b'<')).then_some(value.len())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub message: String,
}

fn syntax(line: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: String,
    /// Everything after the kind in the header, trimmed; may be empty.
    pub id: String,
    /// 1-based line of the header.
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Block {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.value.as_str())
    }

    pub fn pairs(&self) -> Vec<(String, String)> {
        self.entries.iter().map(|e| (e.key.clone(), e.value.clone())).collect()
    }
}

fn is_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

fn parse_header(line: &str, n: usize) -> Result<Option<(String, String)>, SyntaxError> {
    let Some(inner) = line.strip_prefix('[') else {
        return Ok(None);
    };
    let inner = inner
        .strip_suffix(']')
        .ok_or_else(|| syntax(n, "block header is missing `]`"))?
        .trim();
    let (kind, id) = inner.split_once(char::is_whitespace).unwrap_or((inner, ""));
    if kind.is_empty() || !kind.chars().all(|c| c.is_ascii_lowercase() || c == '-') {
        return Err(syntax(n, format!("bad block kind `{kind}`")));
    }
    Ok(Some((kind.to_string(), id.trim().to_string())))
}

pub fn parse_blocks(input: &str) -> Result<Vec<Block>, SyntaxError> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut open = false;
    let mut lines = input
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    while let Some((n, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            open = false;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some((kind, id)) = parse_header(line, n)? {
            blocks.push(Block {
                kind,
                id,
                line: n,
                entries: Vec::new(),
            });
            open = true;
            continue;
        }
        if !open {
            return Err(syntax(n, "expected a `[kind id]` header"));
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(n, "expected `key = value`"))?;
        let (key, mut value) = (key.trim(), value.trim().to_string());
        if !is_key(key) {
            return Err(syntax(n, format!("bad key `{key}`")));
        }
        if let Some(len) = fence_len(&value) {
            let close = ">".repeat(len);
            let mut body = Vec::new();
            loop {
                match lines.next() {
                    Some((_, l)) if l == close => break,
                    Some((_, l)) => body.push(l),
                    None => return Err(syntax(n, format!("`{key}` fence is never closed"))),
                }
            }
            value = body.join("\n");
        }
        let block = blocks.last_mut().expect("open implies a block");
        if block.get(key).is_some() {
            return Err(syntax(n, format!("duplicate key `{key}`")));
        }
        block.entries.push(Entry {
            key: key.to_string(),
            value,
            line: n,
        });
    }
    Ok(blocks)
}

fn needs_fence(value: &str) -> bool {
    value.contains('\n') || value.trim() != value || fence_len(value).is_some()
}

/// Shortest fence whose closing line does not occur in `value`.
fn fence_for(value: &str) -> usize {
    let longest = value
        .split('\n')
        .filter(|l| !l.is_empty() && l.bytes().all(|b| b == b'>'))
        .map(str::len)
        .max()
        .unwrap_or(0);
    MIN_FENCE.max(longest + 1)
}

/// Append one block followed by a blank line. Empty values are skipped.
pub fn write_block<K: AsRef<str>, V: AsRef<str>>(out: &mut String, kind: &str, id: &str, entries: &[(K, V)]) {
    if id.is_empty() {
        let _ = writeln!(out, "[{kind}]");
    } else {
        let _ = writeln!(out, "[{kind} {id}]");
    }
    for (key, value) in entries {
        let (key, value) = (key.as_ref(), value.as_ref());
        if value.is_empty() {
            continue;
        }
        if needs_fence(value) {
            let n = fence_for(value);
            let _ = writeln!(out, "{key} = {}\n{value}\n{}", "<".repeat(n), ">".repeat(n));
        } else {
            let _ = writeln!(out, "{key} = {value}");
        }
    }
    out.push('\n');
}
