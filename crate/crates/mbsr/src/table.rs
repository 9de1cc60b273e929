//! Requirement tables and satisfaction matrices as CSV or Markdown.

use mbsr_core::rules::{check_requirement, TBX_RULE_ID};
use mbsr_core::{AttributeValue, Model, ModelError, SatisfactionMatrix, SlotKey, Verdict};
use thiserror::Error;

use crate::time::format_timestamp;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub const DEFAULT_COLUMNS: [&str; 8] = ["id", "name", "text", "SR1", "SR2", "SR3", "SR4", "SR5"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Id,
    Name,
    Text,
    Slot(SlotKey),
    Attribute(String),
    Rule(String),
}

impl Column {
    pub fn parse(model: &Model, name: &str) -> Result<Column, TableError> {
        let catalog = model.catalog();
        Ok(match name {
            "id" => Column::Id,
            "name" => Column::Name,
            "text" => Column::Text,
            _ => match name.parse::<SlotKey>() {
                Ok(slot) if name == slot.as_str() => Column::Slot(slot),
                _ if catalog.attribute(name).is_some() => Column::Attribute(name.to_string()),
                _ if catalog.rule(name).is_some() || name == TBX_RULE_ID => Column::Rule(name.to_string()),
                _ => return Err(TableError::UnknownColumn(name.to_string())),
            },
        })
    }
}

pub fn attribute_text(model: &Model, value: &AttributeValue) -> String {
    match value {
        AttributeValue::Timestamp(t) => format_timestamp(*t),
        AttributeValue::ElementRef(id) => model.element(id).map_or_else(|| id.clone(), |el| el.name.clone()),
        AttributeValue::Enum(s) | AttributeValue::Text(s) => s.clone(),
    }
}

fn csv_text(writer: csv::Writer<Vec<u8>>) -> Result<String, TableError> {
    let bytes = writer.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writes the UTF-8 it was given"))
}

/// One row per leaf expression in scope. Rule columns are evaluated fresh
/// rather than read from recorded links.
pub fn export_table<S: AsRef<str>>(model: &Model, scope: Option<&str>, columns: &[S]) -> Result<String, TableError> {
    let columns: Vec<Column> = columns
        .iter()
        .map(|c| Column::parse(model, c.as_ref()))
        .collect::<Result<_, _>>()?;
    let members = model.scope_members(scope)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = columns
        .iter()
        .map(|c| match c {
            Column::Id => "id".to_string(),
            Column::Name => "name".to_string(),
            Column::Text => "text".to_string(),
            Column::Slot(s) => s.to_string(),
            Column::Attribute(k) | Column::Rule(k) => k.clone(),
        })
        .collect();
    w.write_record(&header)?;
    for e in members {
        let statement = model.effective_statement(&e.id);
        let needs_rules = columns.iter().any(|c| matches!(c, Column::Rule(_)));
        let results = if needs_rules {
            check_requirement(e, model.catalog(), model.glossary())
        } else {
            Vec::new()
        };
        let row: Vec<String> = columns
            .iter()
            .map(|c| match c {
                Column::Id => e.id.clone(),
                Column::Name => e.name.clone(),
                Column::Text => e.text.clone(),
                Column::Slot(s) => statement
                    .as_ref()
                    .and_then(|st| st.slot(*s))
                    .map(|v| v.text.clone())
                    .unwrap_or_default(),
                Column::Attribute(k) => model
                    .get_attribute(&e.id, k)
                    .ok()
                    .flatten()
                    .map(|v| attribute_text(model, &v))
                    .unwrap_or_default(),
                Column::Rule(r) => results
                    .iter()
                    .find(|res| res.rule_id == *r)
                    .map_or(Verdict::Manual, |res| res.verdict)
                    .letter()
                    .to_string(),
            })
            .collect();
        w.write_record(&row)?;
    }
    csv_text(w)
}

pub fn matrix_csv(matrix: &SatisfactionMatrix) -> Result<String, TableError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["requirement".to_string()];
    header.extend(matrix.rules.iter().cloned());
    w.write_record(&header)?;
    for (id, cells) in &matrix.rows {
        let mut row = vec![id.clone()];
        row.extend(cells.iter().map(|v| v.letter().to_string()));
        w.write_record(&row)?;
    }
    csv_text(w)
}

fn markdown_cell(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfy => "S",
        Verdict::Violate => "!V",
        Verdict::Manual => "M",
    }
}

/// Markdown grid; violations read `!V`. The last row gives S/V/M counts per rule.
pub fn matrix_markdown(matrix: &SatisfactionMatrix) -> String {
    let mut out = format!("| Requirement | {} |\n", matrix.rules.join(" | "));
    out.push_str(&format!("|---|{}\n", "---|".repeat(matrix.rules.len())));
    for (id, cells) in &matrix.rows {
        let cells: Vec<&str> = cells.iter().map(|v| markdown_cell(*v)).collect();
        out.push_str(&format!("| {id} | {} |\n", cells.join(" | ")));
    }
    let counts = matrix.counts();
    let totals: Vec<String> = matrix
        .rules
        .iter()
        .map(|r| {
            let c = counts[r];
            format!("{}/{}/{}", c.satisfy, c.violate, c.manual)
        })
        .collect();
    out.push_str(&format!("| S/V/M | {} |\n", totals.join(" | ")));
    out
}
