//! Defined terms, synonym lookup and longest-match annotation of statement text.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::text::{char_span, eq_folded, is_word_char, starts_with_folded, tokenize, Span};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GlossaryTerm {
    pub term: String,
    /// Alternative spellings, often acronyms.
    pub synonyms: Vec<String>,
    pub definition: String,
    /// Where the definition comes from (URI).
    pub source: String,
    /// Model elements the term is allocated to.
    pub allocations: BTreeSet<String>,
}

impl GlossaryTerm {
    pub fn new(term: impl Into<String>) -> Self {
        GlossaryTerm {
            term: term.into(),
            ..Default::default()
        }
    }

    pub fn with_synonyms(mut self, synonyms: &[&str]) -> Self {
        self.synonyms = synonyms.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn allocated_to(mut self, element_id: &str) -> Self {
        self.allocations.insert(element_id.to_string());
        self
    }

    fn forms(&self) -> impl Iterator<Item = &str> {
        core::iter::once(self.term.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlossaryError {
    #[error("glossary term is empty")]
    EmptyTerm,
    #[error("`{form}` already names glossary term `{existing}`")]
    Collision { form: String, existing: String },
}

/// A defined-term occurrence in some text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub span: Span,
    /// Canonical term (synonyms annotate to the term they belong to).
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Glossary {
    terms: BTreeMap<String, GlossaryTerm>,
    case_insensitive: bool,
}

impl Glossary {
    pub fn new(case_insensitive: bool) -> Self {
        Glossary {
            terms: BTreeMap::new(),
            case_insensitive,
        }
    }

    pub fn case_insensitive(&self) -> bool {
        self.case_insensitive
    }

    pub fn terms(&self) -> impl Iterator<Item = &GlossaryTerm> {
        self.terms.values()
    }

    pub fn term(&self, name: &str) -> Option<&GlossaryTerm> {
        self.terms.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn same(&self, a: &str, b: &str) -> bool {
        if self.case_insensitive {
            eq_folded(a, b)
        } else {
            a == b
        }
    }

    /// Term whose name or synonym equals `form`.
    pub fn lookup(&self, form: &str) -> Option<&GlossaryTerm> {
        self.terms.values().find(|t| t.forms().any(|f| self.same(f, form)))
    }

    pub fn add_term(&mut self, term: GlossaryTerm) -> Result<(), GlossaryError> {
        if term.term.trim().is_empty() || term.synonyms.iter().any(|s| s.trim().is_empty()) {
            return Err(GlossaryError::EmptyTerm);
        }
        let forms: Vec<&str> = term.forms().collect();
        for (i, form) in forms.iter().enumerate() {
            if let Some(existing) = self.lookup(form) {
                return Err(GlossaryError::Collision {
                    form: form.to_string(),
                    existing: existing.term.clone(),
                });
            }
            if forms[..i].iter().any(|f| self.same(f, form)) {
                return Err(GlossaryError::Collision {
                    form: form.to_string(),
                    existing: term.term.clone(),
                });
            }
        }
        self.terms.insert(term.term.clone(), term);
        Ok(())
    }

    /// Longest-match, word-bounded, non-overlapping defined-term spans.
    pub fn annotate(&self, text: &str) -> Vec<Annotation> {
        annotate(text, self)
    }
}

fn prev_char(text: &str, at: usize) -> Option<char> {
    text[..at].chars().next_back()
}

/// Longest-match, word-bounded, non-overlapping defined-term spans.
pub fn annotate(text: &str, glossary: &Glossary) -> Vec<Annotation> {
    let mut forms: Vec<(&str, &str)> = glossary
        .terms
        .values()
        .flat_map(|t| t.forms().map(move |f| (f, t.term.as_str())))
        .collect();
    // longest first; ties resolved by canonical term order
    forms.sort_by(|a, b| b.0.chars().count().cmp(&a.0.chars().count()).then(a.1.cmp(b.1)));

    let mut out = Vec::new();
    let mut at = 0;
    while at < text.len() {
        let left_ok = prev_char(text, at).is_none_or(|c| !is_word_char(c));
        let mut matched = None;
        for (form, term) in &forms {
            if !left_ok && form.chars().next().is_some_and(is_word_char) {
                continue;
            }
            let Some(len) = starts_with_folded(&text[at..], form, glossary.case_insensitive) else {
                continue;
            };
            let end = at + len;
            let right_ok = text[end..].chars().next().is_none_or(|c| !is_word_char(c))
                || !form.chars().next_back().is_some_and(is_word_char);
            if right_ok && len > 0 {
                matched = Some((end, *term));
                break;
            }
        }
        match matched {
            Some((end, term)) => {
                out.push(Annotation {
                    span: char_span(text, at, end),
                    term: term.to_string(),
                });
                at = end;
            }
            None => at += text[at..].chars().next().map_or(1, char::len_utf8),
        }
    }
    out
}

/// Identifier-like words: contain `_`, or an upper-case letter directly after a lower-case one.
pub fn looks_like_element_name(word: &str) -> bool {
    let has_alpha = word.chars().any(char::is_alphabetic);
    let underscored = word.contains('_') && has_alpha;
    let chars: Vec<char> = word.chars().collect();
    let intercap = chars.windows(2).any(|w| w[0].is_lowercase() && w[1].is_uppercase());
    underscored || intercap
}

/// Element-like tokens that are neither defined terms (or synonyms) nor names
/// of model elements. Each candidate is reported once, in order of appearance.
pub fn find_undefined(text: &str, glossary: &Glossary, element_names: &[&str]) -> Vec<String> {
    let covered: Vec<Span> = annotate(text, glossary).into_iter().map(|a| a.span).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for tok in tokenize(text) {
        let word = tok.text.trim_matches(|c: char| !is_word_char(c));
        if word.is_empty() || !looks_like_element_name(word) {
            continue;
        }
        let offset = tok.start + tok.text.find(word).unwrap_or(0);
        let span = char_span(text, offset, offset + word.len());
        if covered.iter().any(|c| c.contains(&span))
            || glossary.lookup(word).is_some()
            || element_names.iter().any(|n| glossary.same(n, word))
        {
            continue;
        }
        if seen.insert(word.to_string()) {
            out.push(word.to_string());
        }
    }
    out
}

/// Occurrence counts per canonical term over a collection of texts.
pub fn term_usage<'a>(texts: impl IntoIterator<Item = &'a str>, glossary: &Glossary) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = glossary.terms.keys().map(|t| (t.clone(), 0)).collect();
    for text in texts {
        for a in annotate(text, glossary) {
            *counts.entry(a.term).or_default() += 1;
        }
    }
    counts
}
