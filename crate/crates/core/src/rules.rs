//! String-matching checkers for the automatable rules, verdict links and the
//! satisfaction matrix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::catalog::{token_enum, Catalog};
use crate::glossary::Glossary;
use crate::model::{ExpressionKind, Model, ModelError, RequirementExpression};
use crate::parser::{analyze_statement, ParseError};
use crate::text::{char_span, find_phrase, find_tbx, tokenize, Span};
use crate::trace::{link_id, LinkKind, NodeRef};

/// Reserved id of the open-item (`TB[CDRN]`) check.
pub const TBX_RULE_ID: &str = "TBX";

const PASSIVE_AUXILIARIES: [&str; 6] = ["be", "is", "are", "was", "were", "been"];
const PASSIVE_WINDOW: usize = 3;

token_enum!(Verdict {
    Satisfy => "Satisfy",
    Violate => "Violate",
    Manual => "Manual",
});

impl Verdict {
    /// Matrix cell letter.
    pub fn letter(&self) -> char {
        match self {
            Verdict::Satisfy => 'S',
            Verdict::Violate => 'V',
            Verdict::Manual => 'M',
        }
    }
}

/// Which text an evidence span points into.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum EvidenceField {
    Text,
    Attribute(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub field: EvidenceField,
    /// Character span into the field's text.
    pub span: Span,
    pub note: String,
}

impl Evidence {
    fn text(span: Span, note: impl Into<String>) -> Self {
        Evidence {
            field: EvidenceField::Text,
            span,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleResult {
    pub requirement_id: String,
    pub rule_id: String,
    pub verdict: Verdict,
    /// Non-empty exactly when the verdict is Violate.
    pub evidence: Vec<Evidence>,
}

fn verdict_of(evidence: &[Evidence]) -> Verdict {
    if evidence.is_empty() {
        Verdict::Satisfy
    } else {
        Verdict::Violate
    }
}

fn whole(text: &str) -> Span {
    Span::new(0, text.chars().count())
}

fn check_structured(req: &RequirementExpression, catalog: &Catalog, glossary: &Glossary) -> Vec<Evidence> {
    let text = &req.text;
    let analysis = analyze_statement(text, glossary, catalog);
    let mut evidence = Vec::new();
    for issue in &analysis.issues {
        match issue {
            ParseError::NoShallKeyword => evidence.push(Evidence::text(whole(text), "no `shall`")),
            ParseError::EmptySlot(slot) => {
                // a stored statement is authoritative for slot contents
                if req
                    .statement
                    .as_ref()
                    .is_some_and(|st| st.is_filled(*slot) || !st.pattern.mandatory_slots().contains(slot))
                {
                    continue;
                }
                evidence.push(Evidence::text(
                    whole(text),
                    format!("{slot} ({}) is empty", slot.label()),
                ));
            }
            ParseError::MultipleShall { count } => {
                for (i, t) in tokenize(text).iter().filter(|t| t.is("shall")).enumerate().skip(1) {
                    let span = char_span(text, t.start, t.start + t.core.len());
                    evidence.push(Evidence::text(span, format!("`shall` {} of {count}", i + 1)));
                }
            }
        }
    }
    evidence
}

fn check_passive(text: &str, participles: &[String]) -> Vec<Evidence> {
    let tokens = tokenize(text);
    let mut evidence = Vec::new();
    for (i, aux) in tokens.iter().enumerate() {
        if aux.core.len() != aux.text.len() || !PASSIVE_AUXILIARIES.iter().any(|a| aux.is(a)) {
            continue;
        }
        for j in i + 1..=(i + PASSIVE_WINDOW).min(tokens.len().saturating_sub(2)) {
            let word = tokens[j].core.to_lowercase();
            let participle =
                (word.len() > 2 && word.ends_with("ed")) || participles.iter().any(|p| p.eq_ignore_ascii_case(&word));
            if participle && tokens[j + 1].is("by") {
                let by = &tokens[j + 1];
                evidence.push(Evidence::text(
                    char_span(text, aux.start, by.start + by.core.len()),
                    format!("passive voice: `{} ... {} by`", aux.core, tokens[j].core),
                ));
                break;
            }
        }
    }
    evidence
}

fn check_phrases(text: &str, phrases: &[String]) -> Vec<Evidence> {
    let mut evidence: Vec<Evidence> = phrases
        .iter()
        .flat_map(|p| {
            find_phrase(text, p)
                .into_iter()
                .map(move |(s, e)| Evidence::text(char_span(text, s, e), format!("`{p}`")))
        })
        .collect();
    evidence.sort_by_key(|e| e.span);
    evidence
}

fn check_open_items(req: &RequirementExpression) -> Vec<Evidence> {
    let mut evidence: Vec<Evidence> = find_tbx(&req.text)
        .into_iter()
        .map(|(s, e)| Evidence::text(char_span(&req.text, s, e), format!("open item `{}`", &req.text[s..e])))
        .collect();
    for (key, value) in &req.attributes {
        if let Some(text) = value.free_text() {
            evidence.extend(find_tbx(text).into_iter().map(|(s, e)| Evidence {
                field: EvidenceField::Attribute(key.clone()),
                span: char_span(text, s, e),
                note: format!("open item `{}`", &text[s..e]),
            }));
        }
    }
    evidence
}

/// Verdicts for every catalog rule (catalog order) followed by TBX. Rules
/// without a checker, or not marked automated, come back Manual.
pub fn check_requirement(req: &RequirementExpression, catalog: &Catalog, glossary: &Glossary) -> Vec<RuleResult> {
    let mut out: Vec<RuleResult> = catalog
        .rules()
        .iter()
        .map(|rule| {
            let evidence = if !catalog.is_automated(&rule.rule_id) {
                None
            } else {
                match rule.rule_id.as_str() {
                    "R1" if req.element_kind == ExpressionKind::Need => None,
                    "R1" => Some(check_structured(req, catalog, glossary)),
                    "R2" => Some(check_passive(&req.text, &rule.phrases)),
                    "R10" | "R16" => Some(check_phrases(&req.text, &rule.phrases)),
                    _ => None,
                }
            };
            RuleResult {
                requirement_id: req.id.clone(),
                rule_id: rule.rule_id.clone(),
                verdict: evidence.as_deref().map_or(Verdict::Manual, verdict_of),
                evidence: evidence.unwrap_or_default(),
            }
        })
        .collect();
    let evidence = check_open_items(req);
    out.push(RuleResult {
        requirement_id: req.id.clone(),
        rule_id: TBX_RULE_ID.to_string(),
        verdict: verdict_of(&evidence),
        evidence,
    });
    out
}

/// Check every leaf expression in scope.
pub fn check_scope(model: &Model, scope: Option<&str>) -> Result<Vec<RuleResult>, ModelError> {
    Ok(model
        .scope_members(scope)?
        .into_iter()
        .flat_map(|req| check_requirement(req, model.catalog(), model.glossary()))
        .collect())
}

fn rule_node(rule_id: &str) -> NodeRef {
    NodeRef::Rule(rule_id.to_string())
}

impl Model {
    /// Verdict recorded by links from `req_id` to a rule node.
    pub fn recorded_verdict(&self, req_id: &str, rule_id: &str) -> Verdict {
        let req = NodeRef::Expression(req_id.to_string());
        let rule = rule_node(rule_id);
        if self.links.contains_key(&link_id(LinkKind::Violate, &req, &rule)) {
            Verdict::Violate
        } else if self.links.contains_key(&link_id(LinkKind::Satisfy, &req, &rule)) {
            Verdict::Satisfy
        } else {
            Verdict::Manual
        }
    }
}

/// Record verdicts as Satisfy/Violate links to rule nodes, replacing earlier
/// verdict links for the same pair, then roll up characteristics: a
/// requirement satisfies C when it satisfies every automated rule that
/// contributes to C.
pub fn apply_verdicts(model: &mut Model, results: &[RuleResult]) -> Result<(), ModelError> {
    for r in results {
        if model.expression(&r.requirement_id).is_none() {
            return Err(ModelError::UnknownId(r.requirement_id.clone()));
        }
        if model.resolve_node(&format!("rule:{}", r.rule_id)).is_none() {
            return Err(ModelError::UnknownId(format!("rule:{}", r.rule_id)));
        }
    }
    let mut touched = BTreeSet::new();
    for r in results {
        let req = NodeRef::Expression(r.requirement_id.clone());
        let rule = rule_node(&r.rule_id);
        for kind in [LinkKind::Satisfy, LinkKind::Violate] {
            model.links.remove(&link_id(kind, &req, &rule));
        }
        let kind = match r.verdict {
            Verdict::Satisfy => LinkKind::Satisfy,
            Verdict::Violate => LinkKind::Violate,
            Verdict::Manual => {
                touched.insert(r.requirement_id.clone());
                continue;
            }
        };
        model.add_link(kind, &r.requirement_id, &format!("rule:{}", r.rule_id))?;
        touched.insert(r.requirement_id.clone());
    }

    let mut contributors: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let catalog = model.catalog_arc();
    for rule in catalog.rules().iter().filter(|r| catalog.is_automated(&r.rule_id)) {
        for c in &rule.contributes_to {
            contributors.entry(c.as_str()).or_default().push(&rule.rule_id);
        }
    }
    for req_id in touched {
        let req = NodeRef::Expression(req_id.clone());
        for (c, rules) in &contributors {
            let satisfied = rules
                .iter()
                .all(|r| model.recorded_verdict(&req_id, r) == Verdict::Satisfy);
            let id = link_id(LinkKind::Satisfy, &req, &NodeRef::Characteristic(c.to_string()));
            if satisfied {
                model.add_link(LinkKind::Satisfy, &req_id, &format!("characteristic:{c}"))?;
            } else {
                model.links.remove(&id);
            }
        }
    }
    Ok(())
}

/// Requirements by rules, each cell read back from the recorded verdict links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionMatrix {
    pub rules: Vec<String>,
    pub rows: Vec<(String, Vec<Verdict>)>,
}

impl SatisfactionMatrix {
    pub fn cell(&self, requirement_id: &str, rule_id: &str) -> Option<Verdict> {
        let col = self.rules.iter().position(|r| r == rule_id)?;
        let (_, cells) = self.rows.iter().find(|(id, _)| id == requirement_id)?;
        cells.get(col).copied()
    }

    /// Per rule `(satisfy, violate, manual)` counts.
    pub fn counts(&self) -> BTreeMap<String, RuleCounts> {
        let mut out: BTreeMap<String, RuleCounts> =
            self.rules.iter().map(|r| (r.clone(), RuleCounts::default())).collect();
        for (_, cells) in &self.rows {
            for (rule, verdict) in self.rules.iter().zip(cells) {
                out.get_mut(rule).expect("seeded").add(*verdict);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RuleCounts {
    pub satisfy: usize,
    pub violate: usize,
    pub manual: usize,
}

impl RuleCounts {
    pub fn add(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::Satisfy => self.satisfy += 1,
            Verdict::Violate => self.violate += 1,
            Verdict::Manual => self.manual += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.satisfy + self.violate + self.manual
    }
}

/// Matrix over the leaf expressions in scope. Columns default to every
/// catalog rule plus TBX.
pub fn build_matrix(
    model: &Model,
    scope: Option<&str>,
    rule_filter: Option<&[String]>,
) -> Result<SatisfactionMatrix, ModelError> {
    let rules: Vec<String> = match rule_filter {
        Some(ids) => {
            for id in ids {
                if model.resolve_node(&format!("rule:{id}")).is_none() {
                    return Err(ModelError::UnknownId(format!("rule:{id}")));
                }
            }
            ids.to_vec()
        }
        None => model
            .catalog()
            .rules()
            .iter()
            .map(|r| r.rule_id.clone())
            .chain(core::iter::once(TBX_RULE_ID.to_string()))
            .collect(),
    };
    let rows = model
        .scope_members(scope)?
        .into_iter()
        .map(|e| {
            (
                e.id.clone(),
                rules.iter().map(|r| model.recorded_verdict(&e.id, r)).collect(),
            )
        })
        .collect();
    Ok(SatisfactionMatrix { rules, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AttributeValue;

    const FIG6: &str = "While in the Sample_Collection mode, the Spacecraft shall collect Asteroid_A_Regolith with Regolith_Sample_Mass target between 0.5 kg and 1 kg.";

    fn verdicts(text: &str) -> BTreeMap<String, Verdict> {
        let req = RequirementExpression::new("X", "", text);
        check_requirement(&req, &Catalog::default(), &Glossary::default())
            .into_iter()
            .filter(|r| r.verdict != Verdict::Manual || r.rule_id == "R1")
            .map(|r| (r.rule_id, r.verdict))
            .collect()
    }

    #[test]
    fn example_statement_is_clean() {
        let v = verdicts(FIG6);
        for rule in ["R1", "R2", "R10", "R16", "TBX"] {
            assert_eq!(v[rule], Verdict::Satisfy, "{rule}");
        }
    }

    #[test]
    fn shall_not_evidence() {
        let text = "The Spacecraft shall not exceed 100 kg.";
        let req = RequirementExpression::new("X", "", text);
        let results = check_requirement(&req, &Catalog::default(), &Glossary::default());
        let r16 = results.iter().find(|r| r.rule_id == "R16").unwrap();
        assert_eq!(r16.verdict, Verdict::Violate);
        assert_eq!(r16.evidence[0].span.slice(text), "shall not");
    }

    #[test]
    fn capable_of_and_tbd() {
        let v = verdicts("The Spacecraft shall be capable of collecting regolith with mass TBD kg.");
        assert_eq!(v["R10"], Verdict::Violate);
        assert_eq!(v["TBX"], Verdict::Violate);
    }

    #[test]
    fn passive_voice() {
        assert_eq!(
            verdicts("The data shall be stored by the Rover within 1 s.")["R2"],
            Verdict::Violate
        );
        assert_eq!(
            verdicts("The data shall be sent by the Rover within 1 s.")["R2"],
            Verdict::Violate
        );
        assert_eq!(
            verdicts("The Rover shall store the data within 1 s.")["R2"],
            Verdict::Satisfy
        );
        assert_eq!(verdicts("The Rover shall be ready by noon.")["R2"], Verdict::Satisfy);
    }

    #[test]
    fn all_rules_reported_once() {
        let req = RequirementExpression::new("X", "", FIG6);
        let results = check_requirement(&req, &Catalog::default(), &Glossary::default());
        assert_eq!(results.len(), crate::catalog::RULE_COUNT + 1);
        assert_eq!(results.last().unwrap().rule_id, TBX_RULE_ID);
        assert!(results
            .iter()
            .all(|r| (r.verdict == Verdict::Violate) == !r.evidence.is_empty()));
        assert_eq!(
            results.iter().filter(|r| r.verdict == Verdict::Manual).count(),
            crate::catalog::RULE_COUNT - 4
        );
    }

    #[test]
    fn attribute_open_items() {
        let req =
            RequirementExpression::new("X", "", FIG6).with_attribute("A01", AttributeValue::Text("Mass is TBR".into()));
        let results = check_requirement(&req, &Catalog::default(), &Glossary::default());
        let tbx = results.last().unwrap();
        assert_eq!(tbx.verdict, Verdict::Violate);
        assert_eq!(tbx.evidence[0].field, EvidenceField::Attribute("A01".into()));
        assert_eq!(tbx.evidence[0].span, Span::new(8, 11));
    }

    #[test]
    fn needs_are_manual_for_structure() {
        let req = RequirementExpression::need("N", "", "Collect regolith.");
        let results = check_requirement(&req, &Catalog::default(), &Glossary::default());
        assert_eq!(results[0].verdict, Verdict::Manual);
    }

    #[test]
    fn apply_and_rollup() {
        let mut m = Model::default();
        m.add_expression(RequirementExpression::new("A", "", FIG6)).unwrap();
        m.add_expression(RequirementExpression::new(
            "B",
            "",
            "The Spacecraft shall not exceed 100 kg.",
        ))
        .unwrap();
        let results = check_scope(&m, None).unwrap();
        apply_verdicts(&mut m, &results).unwrap();
        let c3 = |m: &Model, id: &str| m.link(&format!("satisfy:{id}->characteristic:C3")).is_some();
        assert!(c3(&m, "A"));
        assert!(!c3(&m, "B"));
        assert_eq!(m.recorded_verdict("B", "R16"), Verdict::Violate);
        let links = m.links().cloned().collect::<Vec<_>>();
        apply_verdicts(&mut m, &results).unwrap();
        assert_eq!(m.links().cloned().collect::<Vec<_>>(), links);

        m.set_text("B", "The Spacecraft shall weigh at most 100 kg.").unwrap();
        let results = check_scope(&m, None).unwrap();
        apply_verdicts(&mut m, &results).unwrap();
        assert_eq!(m.recorded_verdict("B", "R16"), Verdict::Satisfy);
        assert!(m.link("violate:B->rule:R16").is_none());
        assert!(c3(&m, "B"));
    }

    #[test]
    fn matrix_shape() {
        let mut m = Model::default();
        for id in ["A", "B", "C"] {
            m.add_expression(RequirementExpression::new(id, "", FIG6)).unwrap();
        }
        let results = check_scope(&m, None).unwrap();
        apply_verdicts(&mut m, &results).unwrap();
        let filter = ["R1".to_string(), "R16".to_string()];
        let matrix = build_matrix(&m, None, Some(&filter)).unwrap();
        assert_eq!(matrix.rows.len(), 3);
        assert!(matrix.rows.iter().all(|(_, cells)| cells.len() == 2));
        assert_eq!(matrix.counts()["R16"].satisfy, 3);
        let empty = Model::default();
        assert!(build_matrix(&empty, None, None).unwrap().rows.is_empty());
    }
}
