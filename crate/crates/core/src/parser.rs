//! Decomposition of "shall" statements into pattern slots, and the reverse
//! rendering of slots into derived text.
//!
//! Detection order: a leading condition marker followed by a comma before
//! "shall" selects the ISO condition pattern; otherwise a trailing "under
//! <condition>" selects the Carson pattern; otherwise the plain ISO pattern.
//! The token right after "shall" is the action head. The constraint starts
//! at the first constraint marker after it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::catalog::Catalog;
use crate::glossary::Glossary;
use crate::model::{PatternId, SlotKey, SlotValue, StructuredStatement, SubjectArticle};
use crate::text::{char_span, make_token, normalize_whitespace, phrase_at, Span, Token};

const ARTICLES: [&str; 3] = ["the", "a", "an"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no `shall` keyword")]
    NoShallKeyword,
    #[error("{count} occurrences of `shall`; parsed against the first")]
    MultipleShall { count: usize },
    #[error("mandatory slot {0} is empty")]
    EmptySlot(SlotKey),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("mandatory slot {0} is missing")]
    MissingMandatorySlot(SlotKey),
    #[error("slot {0} is not part of the pattern")]
    UnexpectedSlot(SlotKey),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParseDiagnostics {
    pub matched_pattern: Option<PatternId>,
    pub shall_count: usize,
    /// Non-whitespace text covered by neither a slot nor a connective.
    pub unconsumed: Vec<Span>,
    /// Slot spans in statement order (which is the pattern's slot order).
    pub slot_spans: Vec<(SlotKey, Span)>,
    /// Comma, article, `shall`, `under`, trailing period.
    pub connective_spans: Vec<Span>,
}

impl ParseDiagnostics {
    pub fn slot_span(&self, key: SlotKey) -> Option<Span> {
        self.slot_spans.iter().find(|(k, _)| *k == key).map(|(_, s)| *s)
    }
}

/// Everything the parser could recover, including partial statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    /// `None` only when there is no "shall" to anchor on.
    pub statement: Option<StructuredStatement>,
    pub diagnostics: ParseDiagnostics,
    pub issues: Vec<ParseError>,
}

impl Analysis {
    /// No empty mandatory slot and exactly one "shall".
    pub fn is_well_formed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Tokens of `text[start..end]`, offsets relative to `text`.
fn tokens_in(text: &str, start: usize, end: usize) -> Vec<Token<'_>> {
    crate::text::tokenize(&text[start..end])
        .into_iter()
        .map(|t| make_token(text, start + t.start, start + t.end))
        .collect()
}

fn range_of(tokens: &[Token<'_>]) -> Option<(usize, usize)> {
    Some((tokens.first()?.start, tokens.last()?.end))
}

/// Longest marker matching at `at`, as a token count.
fn marker_at(tokens: &[Token<'_>], at: usize, markers: &[String]) -> Option<usize> {
    markers.iter().filter_map(|m| phrase_at(tokens, at, m)).max()
}

struct Builder<'a> {
    text: &'a str,
    glossary: &'a Glossary,
    statement: StructuredStatement,
    diagnostics: ParseDiagnostics,
}

impl Builder<'_> {
    fn slot(&mut self, key: SlotKey, range: Option<(usize, usize)>) {
        let Some((start, end)) = range else { return };
        let fragment = &self.text[start..end];
        if fragment.trim().is_empty() {
            return;
        }
        let binding = self
            .glossary
            .lookup(fragment)
            .and_then(|t| t.allocations.iter().next().cloned());
        *self.statement.slot_mut(key) = Some(SlotValue {
            text: fragment.to_string(),
            binding,
        });
        self.diagnostics
            .slot_spans
            .push((key, char_span(self.text, start, end)));
    }

    fn connective(&mut self, start: usize, end: usize) {
        if start < end {
            self.diagnostics.connective_spans.push(char_span(self.text, start, end));
        }
    }
}

/// Total parse: always returns the best available decomposition plus issues.
pub fn analyze_statement(text: &str, glossary: &Glossary, catalog: &Catalog) -> Analysis {
    let tokens = crate::text::tokenize(text);
    let shall: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is("shall"))
        .map(|(i, _)| i)
        .collect();
    let mut diagnostics = ParseDiagnostics {
        shall_count: shall.len(),
        ..Default::default()
    };
    let Some(&s) = shall.first() else {
        diagnostics.unconsumed = uncovered(text, &[]);
        return Analysis {
            statement: None,
            diagnostics,
            issues: alloc::vec![ParseError::NoShallKeyword],
        };
    };
    let shall_tok = tokens[s];

    // trailing period
    let trimmed_end = text.trim_end().len();
    let shall_core_end = shall_tok.start + shall_tok.core.len();
    let period = (text[..trimmed_end].ends_with('.') && trimmed_end > shall_core_end).then(|| trimmed_end - 1);
    let body_end = period.unwrap_or(trimmed_end);

    // leading condition
    let iso2 = catalog.pattern(PatternId::Iso2);
    let condition = (s > 0 && marker_at(&tokens, 0, iso2.connectives(SlotKey::Sr1)).is_some())
        .then(|| text[..shall_tok.start].find(','))
        .flatten();

    let pattern_guess = if condition.is_some() {
        PatternId::Iso2
    } else {
        PatternId::Iso1
    };
    let mut b = Builder {
        text,
        glossary,
        statement: StructuredStatement::new(pattern_guess),
        diagnostics,
    };

    let subject_start = match condition {
        Some(comma) => {
            let cond_end = text[..comma].trim_end().len();
            b.slot(SlotKey::Sr1, Some((tokens[0].start, cond_end)));
            b.connective(comma, comma + 1);
            comma + 1
        }
        None => tokens[0].start.min(shall_tok.start),
    };

    // subject, with one leading article
    let subject = tokens_in(text, subject_start, shall_tok.start);
    let default_article = if condition.is_some() { "the" } else { "The" };
    let mut subject_from = 0;
    b.statement.article = SubjectArticle::Omitted;
    if let Some(first) = subject.first() {
        if subject.len() > 1 && first.core.len() == first.text.len() && ARTICLES.iter().any(|a| first.is(a)) {
            b.statement.article = if first.text == default_article {
                SubjectArticle::Default
            } else {
                SubjectArticle::Verbatim(first.text.to_string())
            };
            b.connective(first.start, first.end);
            subject_from = 1;
        }
    }
    b.slot(SlotKey::Sr2, range_of(&subject[subject_from..]));

    let shall_end = shall_tok.end.min(body_end.max(shall_core_end));
    b.connective(shall_tok.start, shall_end);

    // everything after "shall"
    let body = tokens_in(text, shall_end, body_end.max(shall_end));
    let mut region_end = body.len();
    let mut pattern = pattern_guess;
    if condition.is_none() {
        let carson = catalog.pattern(PatternId::Carson);
        let constraint_markers = carson.connectives(SlotKey::Sr5);
        let inside_marker =
            |u: usize| (0..=u).any(|p| marker_at(&body, p, constraint_markers).is_some_and(|n| p + n > u && p < u));
        let found = (1..body.len()).rev().find_map(|u| {
            let n = marker_at(&body, u, carson.connectives(SlotKey::Sr1))?;
            (u + n < body.len() && !inside_marker(u)).then_some((u, n))
        });
        if let Some((u, n)) = found {
            pattern = PatternId::Carson;
            region_end = u;
            b.connective(body[u].start, body[u + n - 1].end);
            b.slot(SlotKey::Sr1, range_of(&body[u + n..]));
        }
    }
    b.statement.pattern = pattern;

    let region = &body[..region_end];
    let markers = catalog.pattern(pattern).connectives(SlotKey::Sr5);
    let constraint = (1..region.len()).find(|&i| marker_at(region, i, markers).is_some());
    let action_end = constraint.unwrap_or(region.len());
    if pattern == PatternId::Iso2 {
        b.slot(SlotKey::Sr3, range_of(&region[..region.len().min(1)]));
        if action_end > 1 {
            b.slot(SlotKey::Sr4, range_of(&region[1..action_end]));
        }
    } else {
        b.slot(SlotKey::Sr3, range_of(&region[..action_end]));
    }
    if let Some(m) = constraint {
        b.slot(SlotKey::Sr5, range_of(&region[m..]));
    }
    if let Some(p) = period {
        b.connective(p, p + 1);
    }

    let Builder {
        statement,
        mut diagnostics,
        ..
    } = b;
    diagnostics.matched_pattern = Some(pattern);
    diagnostics.slot_spans.sort_by_key(|(_, span)| *span);
    diagnostics.connective_spans.sort();
    let covered: Vec<Span> = diagnostics
        .slot_spans
        .iter()
        .map(|(_, s)| *s)
        .chain(diagnostics.connective_spans.iter().copied())
        .collect();
    diagnostics.unconsumed = uncovered(text, &covered);

    let mut issues: Vec<ParseError> = statement
        .missing_mandatory()
        .into_iter()
        .map(ParseError::EmptySlot)
        .collect();
    if shall.len() > 1 {
        issues.push(ParseError::MultipleShall { count: shall.len() });
    }
    Analysis {
        statement: Some(statement),
        diagnostics,
        issues,
    }
}

/// Maximal runs of non-whitespace characters outside every covered span.
fn uncovered(text: &str, covered: &[Span]) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::new();
    for (i, c) in text.chars().enumerate() {
        if c.is_whitespace() || covered.iter().any(|s| s.start <= i && i < s.end) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.end == i => last.end = i + 1,
            _ => out.push(Span::new(i, i + 1)),
        }
    }
    out
}

/// Strict parse. Errors in priority order: no "shall", an empty mandatory
/// slot, more than one "shall". Use [`analyze_statement`] for partial results.
pub fn parse_statement(
    text: &str,
    glossary: &Glossary,
    catalog: &Catalog,
) -> Result<(StructuredStatement, ParseDiagnostics), ParseError> {
    let analysis = analyze_statement(text, glossary, catalog);
    if let Some(err) = analysis.issues.into_iter().next() {
        return Err(err);
    }
    Ok((
        analysis.statement.expect("statement present without issues"),
        analysis.diagnostics,
    ))
}

/// Derived text for a structured statement.
pub fn render_statement(statement: &StructuredStatement) -> Result<String, RenderError> {
    let pattern = statement.pattern;
    if let Some(missing) = statement.missing_mandatory().first() {
        return Err(RenderError::MissingMandatorySlot(*missing));
    }
    if let Some(extra) = crate::model::SlotKey::ALL
        .iter()
        .find(|k| !pattern.allows(**k) && statement.slot(**k).is_some())
    {
        return Err(RenderError::UnexpectedSlot(*extra));
    }
    let slot = |k: SlotKey| statement.slot(k).map(|s| s.text.as_str()).unwrap_or("");
    let article = match &statement.article {
        SubjectArticle::Default if pattern == PatternId::Iso2 => "the",
        SubjectArticle::Default => "The",
        SubjectArticle::Verbatim(a) => a.as_str(),
        SubjectArticle::Omitted => "",
    };
    let mut parts: Vec<&str> = Vec::new();
    let condition;
    if pattern == PatternId::Iso2 {
        condition = alloc::format!("{},", slot(SlotKey::Sr1).trim_end());
        parts.push(&condition);
    }
    parts.extend([article, slot(SlotKey::Sr2), "shall", slot(SlotKey::Sr3)]);
    match pattern {
        PatternId::Iso2 => parts.extend([slot(SlotKey::Sr4), slot(SlotKey::Sr5)]),
        PatternId::Iso1 => parts.push(slot(SlotKey::Sr5)),
        PatternId::Carson => parts.extend([slot(SlotKey::Sr5), "under", slot(SlotKey::Sr1)]),
    }
    let mut out = normalize_whitespace(&parts.join(" "));
    if out.ends_with('.') {
        out.pop();
    }
    out.push('.');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glossary::GlossaryTerm;

    const ISO: &str = "While in the Sample_Collection mode, the Spacecraft shall collect Asteroid_A_Regolith with Regolith_Sample_Mass target between 0.5 kg and 1 kg.";
    const CARSON: &str = "The Spacecraft shall collect Asteroid_A_Regolith with Regolith_Sample_Mass target between 0.5 kg and 1 kg under Sample_Collection mode.";

    fn parse(text: &str) -> Result<(StructuredStatement, ParseDiagnostics), ParseError> {
        parse_statement(text, &Glossary::default(), &Catalog::default())
    }

    fn slot(st: &StructuredStatement, k: SlotKey) -> Option<&str> {
        st.slot(k).map(|s| s.text.as_str())
    }

    #[test]
    fn iso_condition_example() {
        let (st, diag) = parse(ISO).unwrap();
        assert_eq!(st.pattern, PatternId::Iso2);
        assert_eq!(slot(&st, SlotKey::Sr1), Some("While in the Sample_Collection mode"));
        assert_eq!(slot(&st, SlotKey::Sr2), Some("Spacecraft"));
        assert_eq!(slot(&st, SlotKey::Sr3), Some("collect"));
        assert_eq!(slot(&st, SlotKey::Sr4), Some("Asteroid_A_Regolith"));
        assert_eq!(
            slot(&st, SlotKey::Sr5),
            Some("with Regolith_Sample_Mass target between 0.5 kg and 1 kg")
        );
        assert_eq!(diag.shall_count, 1);
        assert!(diag.unconsumed.is_empty());
        let order: Vec<SlotKey> = diag.slot_spans.iter().map(|(k, _)| *k).collect();
        assert_eq!(order, PatternId::Iso2.slot_order());
    }

    #[test]
    fn carson_example() {
        let (st, diag) = parse(CARSON).unwrap();
        assert_eq!(st.pattern, PatternId::Carson);
        assert_eq!(slot(&st, SlotKey::Sr1), Some("Sample_Collection mode"));
        assert_eq!(slot(&st, SlotKey::Sr2), Some("Spacecraft"));
        assert_eq!(slot(&st, SlotKey::Sr3), Some("collect Asteroid_A_Regolith"));
        assert_eq!(st.action_head(), Some("collect"));
        assert_eq!(slot(&st, SlotKey::Sr4), None);
        assert_eq!(
            slot(&st, SlotKey::Sr5),
            Some("with Regolith_Sample_Mass target between 0.5 kg and 1 kg")
        );
        let order: Vec<SlotKey> = diag.slot_spans.iter().map(|(k, _)| *k).collect();
        assert_eq!(order, PatternId::Carson.slot_order());
    }

    #[test]
    fn missing_shall() {
        assert_eq!(parse("The system is fast."), Err(ParseError::NoShallKeyword));
        assert_eq!(parse(""), Err(ParseError::NoShallKeyword));
        assert_eq!(parse("Marshall the troops."), Err(ParseError::NoShallKeyword));
    }

    #[test]
    fn multiple_shall_still_parses() {
        let text = "The Rover shall drive and shall steer within 5 s.";
        assert_eq!(parse(text), Err(ParseError::MultipleShall { count: 2 }));
        let a = analyze_statement(text, &Glossary::default(), &Catalog::default());
        let st = a.statement.unwrap();
        assert_eq!(slot(&st, SlotKey::Sr3), Some("drive and shall steer"));
        assert_eq!(slot(&st, SlotKey::Sr5), Some("within 5 s"));
    }

    #[test]
    fn missing_constraint_is_empty_slot() {
        assert_eq!(
            parse("The Rover shall drive."),
            Err(ParseError::EmptySlot(SlotKey::Sr5))
        );
        assert_eq!(
            parse("When parked, the Rover shall drive with care."),
            Err(ParseError::EmptySlot(SlotKey::Sr4))
        );
        assert_eq!(
            parse("shall drive within 5 s."),
            Err(ParseError::EmptySlot(SlotKey::Sr2))
        );
    }

    #[test]
    fn in_under_is_a_constraint_not_a_condition() {
        let (st, _) = parse("The Rover shall stop in under 2 s.").unwrap();
        assert_eq!(st.pattern, PatternId::Iso1);
        assert_eq!(slot(&st, SlotKey::Sr5), Some("in under 2 s"));
    }

    #[test]
    fn leading_condition_beats_trailing_under() {
        let (st, _) = parse("When armed, the Lander shall fire Thrusters within 2 s under Descent mode.").unwrap();
        assert_eq!(st.pattern, PatternId::Iso2);
        assert_eq!(slot(&st, SlotKey::Sr5), Some("within 2 s under Descent mode"));
    }

    #[test]
    fn articles() {
        let (st, _) = parse("A Rover shall drive at least 5 m.").unwrap();
        assert_eq!(st.article, SubjectArticle::Verbatim("A".into()));
        assert_eq!(render_statement(&st).unwrap(), "A Rover shall drive at least 5 m.");
        let (st, _) = parse("Rover shall drive at least 5 m.").unwrap();
        assert_eq!(st.article, SubjectArticle::Omitted);
        assert_eq!(render_statement(&st).unwrap(), "Rover shall drive at least 5 m.");
    }

    #[test]
    fn glossary_binding() {
        let mut g = Glossary::default();
        g.add_term(GlossaryTerm::new("Spacecraft").allocated_to("sc-1"))
            .unwrap();
        let (st, _) = parse_statement(ISO, &g, &Catalog::default()).unwrap();
        assert_eq!(st.sr2_subject.unwrap().binding.as_deref(), Some("sc-1"));
    }

    #[test]
    fn render_templates() {
        let (iso, _) = parse(ISO).unwrap();
        assert_eq!(render_statement(&iso).unwrap(), ISO);
        let (carson, _) = parse(CARSON).unwrap();
        assert_eq!(render_statement(&carson).unwrap(), CARSON);
        let iso1 = StructuredStatement::new(PatternId::Iso1)
            .with_slot(SlotKey::Sr2, SlotValue::text("Spacecraft"))
            .with_slot(SlotKey::Sr3, SlotValue::text("transmit telemetry"))
            .with_slot(SlotKey::Sr5, SlotValue::text("at 2 kbps minimum"));
        assert_eq!(
            render_statement(&iso1).unwrap(),
            "The Spacecraft shall transmit telemetry at 2 kbps minimum."
        );
    }

    #[test]
    fn render_rejects_incomplete() {
        let st = StructuredStatement::new(PatternId::Iso1).with_slot(SlotKey::Sr2, SlotValue::text("X"));
        assert_eq!(
            render_statement(&st),
            Err(RenderError::MissingMandatorySlot(SlotKey::Sr3))
        );
        let st = StructuredStatement::new(PatternId::Iso1)
            .with_slot(SlotKey::Sr2, SlotValue::text("X"))
            .with_slot(SlotKey::Sr3, SlotValue::text("go"))
            .with_slot(SlotKey::Sr4, SlotValue::text("home"))
            .with_slot(SlotKey::Sr5, SlotValue::text("within 1 s"));
        assert_eq!(render_statement(&st), Err(RenderError::UnexpectedSlot(SlotKey::Sr4)));
    }

    #[test]
    fn custom_markers_from_catalog() {
        let mut catalog = Catalog::default();
        catalog
            .apply_override("pattern", "Iso1", &[("SR5".into(), "at".into())])
            .unwrap();
        let (st, _) = parse_statement(
            "The Spacecraft shall transmit telemetry at 2 kbps minimum.",
            &Glossary::default(),
            &catalog,
        )
        .unwrap();
        assert_eq!(slot(&st, SlotKey::Sr3), Some("transmit telemetry"));
        assert_eq!(slot(&st, SlotKey::Sr5), Some("at 2 kbps minimum"));
    }
}
