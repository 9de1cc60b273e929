//! Markdown stakeholder reports.
//!
//! `Overview`: requirement listing with defined terms underlined, completeness
//! figures and the key/driving view. `SetReview`: per-set listing with a
//! satisfaction matrix over the automated rules, then a summary of open TBD/TBC/TBR/TBN items.

use std::fmt::Write as _;
use std::str::FromStr;

use mbsr_core::metrics::calculate;
use mbsr_core::rules::{apply_verdicts, build_matrix, check_requirement, check_scope, EvidenceField, TBX_RULE_ID};
use mbsr_core::text::byte_offset;
use mbsr_core::{FixedClock, Glossary, MetricTable, MetricsError, Model, ModelError, RequirementExpression, Timestamp};
use thiserror::Error;

use crate::table::matrix_markdown;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Overview,
    SetReview,
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "overview" => Ok(Template::Overview),
            "set-review" | "setreview" => Ok(Template::SetReview),
            other => Err(format!("unknown report template `{other}` (overview, set-review)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Wrap every defined-term occurrence in `<u>..</u>`.
pub fn underline_terms(text: &str, glossary: &Glossary) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for a in glossary.annotate(text) {
        let (start, end) = (byte_offset(text, a.span.start), byte_offset(text, a.span.end));
        out.push_str(&text[at..start]);
        let _ = write!(out, "<u>{}</u>", &text[start..end]);
        at = end;
    }
    out.push_str(&text[at..]);
    out
}

fn scope_label(scope: Option<&str>) -> &str {
    scope.unwrap_or("all requirements")
}

fn listing(out: &mut String, model: &Model, members: &[&RequirementExpression]) {
    if members.is_empty() {
        out.push_str("_No requirements._\n\n");
        return;
    }
    for e in members {
        let title = if e.name.is_empty() {
            String::new()
        } else {
            format!(" {}", e.name)
        };
        let _ = writeln!(
            out,
            "- **{}**{title}: {}",
            e.id,
            underline_terms(&e.text, model.glossary())
        );
    }
    out.push('\n');
}

pub fn generate_report(model: &Model, scope: Option<&str>, template: Template) -> Result<String, ReportError> {
    match template {
        Template::Overview => overview(model, scope),
        Template::SetReview => set_review(model, scope),
    }
}

fn overview(model: &Model, scope: Option<&str>) -> Result<String, ReportError> {
    let members = model.scope_members(scope)?;
    let mut out = format!(
        "# Requirements overview\n\nScope: {}\n\n## Requirements\n\n",
        scope_label(scope)
    );
    listing(&mut out, model, &members);

    let m = calculate(model, &mut MetricTable::new(), scope, None, &FixedClock(Timestamp(0)))?;
    out.push_str("## Completeness\n\n| Total | SR1 | SR2 | SR3 | SR4 | SR5 | Complete | Percent |\n|---|---|---|---|---|---|---|---|\n");
    let slots: Vec<String> = m.per_slot_filled.iter().map(usize::to_string).collect();
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} |\n",
        m.total,
        slots.join(" | "),
        m.complete_count,
        m.pct_text()
    );

    out.push_str("## Key and driving requirements\n\n");
    let kdr = model.kdr_view(scope)?;
    if kdr.is_empty() {
        out.push_str("_None flagged._\n");
    } else {
        out.push_str("| Requirement | Key / Driving | Derived from |\n|---|---|---|\n");
        for k in kdr {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                k.requirement_id,
                k.key_driving,
                k.derive_chain.join(", ")
            );
        }
    }
    Ok(out)
}

/// Sets reviewed: the scope set and every set nested in it, or all sets.
fn review_sets(model: &Model, scope: Option<&str>) -> Result<Vec<String>, ModelError> {
    match scope {
        Some(id) if model.set(id).is_some() => {
            let mut sets = vec![id.to_string()];
            sets.extend(
                model
                    .transitive_members(id)?
                    .into_iter()
                    .filter(|m| model.set(m).is_some()),
            );
            Ok(sets)
        }
        Some(id) => {
            model.scope_members(Some(id))?;
            Ok(Vec::new())
        }
        None => Ok(model.sets().map(|s| s.id().to_string()).collect()),
    }
}

fn set_review(model: &Model, scope: Option<&str>) -> Result<String, ReportError> {
    let members = model.scope_members(scope)?;
    let mut judged = model.clone();
    apply_verdicts(&mut judged, &check_scope(model, scope)?)?;
    let catalog = model.catalog();
    let automated: Vec<String> = catalog
        .rules()
        .iter()
        .filter(|r| catalog.is_automated(&r.rule_id))
        .map(|r| r.rule_id.clone())
        .chain([TBX_RULE_ID.to_string()])
        .collect();

    let mut out = format!("# Set review\n\nScope: {}\n\n", scope_label(scope));
    let sets = review_sets(model, scope)?;
    let mut sections: Vec<(String, Option<&str>)> = sets
        .iter()
        .map(|id| {
            let name = &model.set(id).expect("listed").expression.name;
            let title = if name.is_empty() {
                id.clone()
            } else {
                format!("{id} {name}")
            };
            (title, Some(id.as_str()))
        })
        .collect();
    if sections.is_empty() {
        sections.push((scope_label(scope).to_string(), scope));
    }
    for (title, section_scope) in sections {
        let _ = writeln!(out, "## {title}\n");
        listing(&mut out, model, &model.scope_members(section_scope)?);
        out.push_str("### Satisfaction matrix\n\n");
        out.push_str(&matrix_markdown(&build_matrix(
            &judged,
            section_scope,
            Some(&automated),
        )?));
        out.push('\n');
    }

    let mut items = Vec::new();
    for e in &members {
        let results = check_requirement(e, model.catalog(), model.glossary());
        let tbx = results
            .into_iter()
            .find(|r| r.rule_id == TBX_RULE_ID)
            .expect("TBX always checked");
        for ev in tbx.evidence {
            let (field, source) = match &ev.field {
                EvidenceField::Text => ("text".to_string(), e.text.clone()),
                EvidenceField::Attribute(key) => (
                    key.clone(),
                    e.attributes
                        .get(key)
                        .and_then(|v| v.free_text())
                        .unwrap_or_default()
                        .to_string(),
                ),
            };
            items.push(format!("- {} {field} {}: `{}`", e.id, ev.span, ev.span.slice(&source)));
        }
    }
    let _ = writeln!(out, "## Open items (TBX)\n\nCount: {}\n", items.len());
    for item in items {
        let _ = writeln!(out, "{item}");
    }
    Ok(out)
}
