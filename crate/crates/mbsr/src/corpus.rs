//! `.mbsr` corpus files: loading into a validated [`Model`] and canonical serialization.
//!
//! Block kinds: `model` (uuid), `element`, `term`, `requirement`, `set` and `link`.
//! Blocks may appear in any order; they are applied kind by kind so references
//! only need to exist somewhere in the file.

use std::path::Path;
use std::sync::Arc;

use mbsr_core::catalog::ValueKind;
use mbsr_core::{
    analyze_statement, AttributeValue, Catalog, ElementKind, ExpressionKind, GlossaryTerm, LinkKind, Model,
    ModelElement, ModelError, PatternId, RequirementExpression, RequirementSet, SlotKey, SlotValue,
    StructuredStatement, SubjectArticle,
};
use thiserror::Error;

use crate::block::{parse_blocks, write_block, Block, SyntaxError};
use crate::time::{format_timestamp, parse_timestamp};

const ARTICLE_NONE: &str = "none";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {line} [{kind} {id}]: {source}")]
    Validation {
        line: usize,
        kind: String,
        id: String,
        #[source]
        source: ModelError,
    },
    #[error("line {line} [{kind} {id}]: {message}")]
    Invalid {
        line: usize,
        kind: String,
        id: String,
        message: String,
    },
}

impl CorpusError {
    /// The model error behind a validation failure, if any.
    pub fn model_error(&self) -> Option<&ModelError> {
        match self {
            CorpusError::Validation { source, .. } => Some(source),
            _ => None,
        }
    }
}

fn validation(block: &Block) -> impl FnOnce(ModelError) -> CorpusError + '_ {
    move |source| CorpusError::Validation {
        line: block.line,
        kind: block.kind.clone(),
        id: block.id.clone(),
        source,
    }
}

fn invalid(block: &Block, message: impl Into<String>) -> CorpusError {
    CorpusError::Invalid {
        line: block.line,
        kind: block.kind.clone(),
        id: block.id.clone(),
        message: message.into(),
    }
}

/// A loaded model plus non-fatal diagnostics (discouraged Trace links).
#[derive(Debug)]
pub struct Loaded {
    pub model: Model,
    pub warnings: Vec<String>,
}

pub fn load_corpus(path: &Path, catalog: Arc<Catalog>) -> Result<Loaded, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text, catalog)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn check_keys(block: &Block, allowed: &[&str]) -> Result<(), CorpusError> {
    match block.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
        Some(e) => Err(invalid(block, format!("line {}: unknown key `{}`", e.line, e.key))),
        None => Ok(()),
    }
}

pub fn parse_corpus(text: &str, catalog: Arc<Catalog>) -> Result<Loaded, CorpusError> {
    let blocks = parse_blocks(text)?;
    let mut model = Model::new(catalog);
    let mut warnings = Vec::new();
    for block in &blocks {
        if !matches!(
            block.kind.as_str(),
            "model" | "element" | "term" | "requirement" | "set" | "link"
        ) {
            return Err(invalid(block, format!("unknown block kind `{}`", block.kind)));
        }
    }
    let of_kind = |kind: &'static str| blocks.iter().filter(move |b| b.kind == kind);

    for block in of_kind("model") {
        check_keys(block, &["uuid"])?;
        if model.uuid().is_some() {
            return Err(invalid(block, "more than one model block"));
        }
        model.set_uuid(block.get("uuid").map(String::from));
    }
    for block in of_kind("element") {
        check_keys(block, &["name", "kind", "xmi_id"])?;
        let kind = match block.get("kind") {
            Some(k) => k.parse::<ElementKind>().map_err(|e| invalid(block, e))?,
            None => ElementKind::Other,
        };
        let name = block.get("name").unwrap_or_default();
        model
            .add_element(ModelElement::new(block.id.as_str(), name, kind))
            .map_err(validation(block))?;
        if let Some(x) = block.get("xmi_id") {
            model.set_external_id(&block.id, x).map_err(validation(block))?;
        }
    }
    for block in of_kind("term") {
        check_keys(block, &["synonyms", "definition", "source", "allocations"])?;
        let term = GlossaryTerm {
            term: block.id.clone(),
            synonyms: block.get("synonyms").map(list).unwrap_or_default(),
            definition: block.get("definition").unwrap_or_default().to_string(),
            source: block.get("source").unwrap_or_default().to_string(),
            allocations: block
                .get("allocations")
                .map(list)
                .unwrap_or_default()
                .into_iter()
                .collect(),
        };
        model.add_term(term).map_err(validation(block))?;
    }
    for block in of_kind("requirement") {
        let e = read_expression(block, &model, false)?;
        model.add_expression(e).map_err(validation(block))?;
        pin_external_id(block, &mut model)?;
    }
    // Sets are created empty first so members may name sets declared later.
    let sets: Vec<&Block> = of_kind("set").collect();
    for block in &sets {
        let e = read_expression(block, &model, true)?;
        model
            .add_set(RequirementSet {
                expression: e,
                members: Vec::new(),
            })
            .map_err(validation(block))?;
        pin_external_id(block, &mut model)?;
    }
    for block in &sets {
        for member in block.get("members").map(list).unwrap_or_default() {
            model.add_member(&block.id, &member).map_err(validation(block))?;
        }
    }
    for block in of_kind("link") {
        check_keys(block, &["kind", "source", "target"])?;
        let field = |key: &str| block.get(key).ok_or_else(|| invalid(block, format!("missing `{key}`")));
        let kind: LinkKind = field("kind")?.parse().map_err(|e| invalid(block, e))?;
        let (source, target) = (field("source")?, field("target")?);
        let added = model.add_link(kind, source, target).map_err(validation(block))?;
        if added.discouraged {
            warnings.push(format!(
                "line {}: Trace link {source} -> {target} is discouraged; use a specific relationship",
                block.line
            ));
        }
    }
    Ok(Loaded { model, warnings })
}

fn pin_external_id(block: &Block, model: &mut Model) -> Result<(), CorpusError> {
    if let Some(x) = block.get("xmi_id") {
        model.set_external_id(&block.id, x).map_err(validation(block))?;
    }
    Ok(())
}

const EXPRESSION_KEYS: [&str; 16] = [
    "name", "kind", "text", "pattern", "article", "SR1", "SR2", "SR3", "SR4", "SR5", "SR1.ref", "SR2.ref", "SR3.ref",
    "SR4.ref", "SR5.ref", "xmi_id",
];

fn read_expression(block: &Block, model: &Model, is_set: bool) -> Result<RequirementExpression, CorpusError> {
    let catalog = model.catalog();
    let mut e = RequirementExpression::new(
        block.id.as_str(),
        block.get("name").unwrap_or_default(),
        block.get("text").unwrap_or_default(),
    );
    if let Some(kind) = block.get("kind") {
        e.element_kind = kind.parse::<ExpressionKind>().map_err(|err| invalid(block, err))?;
    }
    for entry in &block.entries {
        if EXPRESSION_KEYS.contains(&entry.key.as_str()) || (is_set && entry.key == "members") {
            continue;
        }
        let def = catalog
            .attribute(&entry.key)
            .ok_or_else(|| invalid(block, format!("line {}: unknown key `{}`", entry.line, entry.key)))?;
        let value = match def.value_kind {
            ValueKind::Enum => AttributeValue::Enum(entry.value.clone()),
            ValueKind::Text => AttributeValue::Text(entry.value.clone()),
            ValueKind::ElementRef => AttributeValue::ElementRef(entry.value.clone()),
            ValueKind::Timestamp => AttributeValue::Timestamp(
                parse_timestamp(&entry.value)
                    .map_err(|err| invalid(block, format!("line {}: {}: {err}", entry.line, entry.key)))?,
            ),
        };
        e.attributes.insert(entry.key.clone(), value);
    }
    e.statement = read_statement(block, model, &e.text)?;
    Ok(e)
}

/// A stored statement, when the block carries any slot keys. Explicit
/// `SRn` fragments are taken as written; with only `SRn.ref` keys the
/// statement is the parser's reading of the text with those bindings applied.
fn read_statement(block: &Block, model: &Model, text: &str) -> Result<Option<StructuredStatement>, CorpusError> {
    let explicit = SlotKey::ALL.iter().any(|k| block.get(k.as_str()).is_some());
    let refs = SlotKey::ALL.iter().any(|k| block.get(&format!("{k}.ref")).is_some());
    if !explicit && !refs && block.get("pattern").is_none() && block.get("article").is_none() {
        return Ok(None);
    }
    let pattern: Option<PatternId> = block
        .get("pattern")
        .map(|p| p.parse().map_err(|err| invalid(block, err)))
        .transpose()?;
    let parsed = || analyze_statement(text, model.glossary(), model.catalog()).statement;
    let mut st = if explicit {
        let pattern = match pattern.or_else(|| parsed().map(|s| s.pattern)) {
            Some(p) => p,
            None => return Err(invalid(block, "`pattern` is required when the text does not parse")),
        };
        let mut st = StructuredStatement::new(pattern);
        for key in SlotKey::ALL {
            if let Some(fragment) = block.get(key.as_str()) {
                *st.slot_mut(*key) = Some(SlotValue::text(fragment));
            }
        }
        st
    } else {
        let st = parsed().ok_or_else(|| invalid(block, "text does not parse into pattern slots"))?;
        if pattern.is_some_and(|p| p != st.pattern) {
            return Err(invalid(
                block,
                format!("text reads as {}, not {}", st.pattern, pattern.unwrap()),
            ));
        }
        st
    };
    match block.get("article") {
        Some(ARTICLE_NONE) => st.article = SubjectArticle::Omitted,
        Some(a) => st.article = SubjectArticle::Verbatim(a.to_string()),
        None if explicit => st.article = SubjectArticle::Default,
        None => {}
    }
    for key in SlotKey::ALL {
        if let Some(element) = block.get(&format!("{key}.ref")) {
            let slot = st
                .slot_mut(*key)
                .as_mut()
                .ok_or_else(|| invalid(block, format!("{key}.ref given but {key} is empty")))?;
            slot.binding = Some(element.to_string());
        }
    }
    Ok(Some(st))
}

fn attribute_text(value: &AttributeValue) -> String {
    match value {
        AttributeValue::Timestamp(t) => format_timestamp(*t),
        other => other.as_str().unwrap_or_default().to_string(),
    }
}

fn expression_entries(model: &Model, e: &RequirementExpression, members: Option<&[String]>) -> Vec<(String, String)> {
    let mut out = vec![("name".to_string(), e.name.clone())];
    if e.element_kind != ExpressionKind::Requirement {
        out.push(("kind".into(), e.element_kind.to_string()));
    }
    out.push(("text".into(), e.text.clone()));
    if let Some(members) = members {
        out.push(("members".into(), members.join(", ")));
    }
    if let Some(st) = &e.statement {
        out.push(("pattern".into(), st.pattern.to_string()));
        match &st.article {
            SubjectArticle::Default => {}
            SubjectArticle::Omitted => out.push(("article".into(), ARTICLE_NONE.into())),
            SubjectArticle::Verbatim(a) => out.push(("article".into(), a.clone())),
        }
        for key in SlotKey::ALL {
            if let Some(slot) = st.slot(*key) {
                out.push((key.to_string(), slot.text.clone()));
                if let Some(b) = &slot.binding {
                    out.push((format!("{key}.ref"), b.clone()));
                }
            }
        }
    }
    if let Some(x) = model.external_id(&e.id) {
        out.push(("xmi_id".into(), x.to_string()));
    }
    for (key, value) in &e.attributes {
        out.push((key.clone(), attribute_text(value)));
    }
    out
}

/// Canonical text: blocks grouped by kind and sorted by id, keys in fixed order.
pub fn serialize(model: &Model) -> String {
    let mut out = String::new();
    if let Some(uuid) = model.uuid() {
        write_block(&mut out, "model", "", &[("uuid", uuid)]);
    }
    for el in model.elements() {
        let mut entries = vec![("name", el.name.clone()), ("kind", el.kind.to_string())];
        if let Some(x) = model.external_id(&el.element_id) {
            entries.push(("xmi_id", x.to_string()));
        }
        write_block(&mut out, "element", &el.element_id, &entries);
    }
    let mut terms: Vec<&GlossaryTerm> = model.glossary().terms().collect();
    terms.sort_by(|a, b| a.term.cmp(&b.term));
    for t in terms {
        let allocations: Vec<&str> = t.allocations.iter().map(String::as_str).collect();
        write_block(
            &mut out,
            "term",
            &t.term,
            &[
                ("synonyms", t.synonyms.join(", ")),
                ("definition", t.definition.clone()),
                ("source", t.source.clone()),
                ("allocations", allocations.join(", ")),
            ],
        );
    }
    for e in model.expressions() {
        write_block(&mut out, "requirement", &e.id, &expression_entries(model, e, None));
    }
    for s in model.sets() {
        write_block(
            &mut out,
            "set",
            s.id(),
            &expression_entries(model, &s.expression, Some(&s.members)),
        );
    }
    for l in model.links() {
        write_block(
            &mut out,
            "link",
            &l.link_id,
            &[
                ("kind", l.kind.to_string()),
                ("source", l.source.to_string()),
                ("target", l.target.to_string()),
            ],
        );
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}
