//! XMI export of requirement expressions with the structured-requirements
//! profile stereotype applied, plus a reader for documents this module writes.
//!
//! Each requirement becomes one stereotype element, one attribute per line:
//!
//! ```text
//! <Model_Based_Structured_Requirements_Profile:Requirement_Expression
//! xmi:id='_2022x_2_46d01c0_1707158979643_806727_21479_'
//! base_Class='_2022x_2_46d01c0_1707158979643_806727_21479'
//! Id='L3-EX.1'
//! ...
//! A40_Type_='Functional' />
//! ```
//!
//! Attribute order is fixed: `xmi:id`, `base_Class`, `Id`, `Text`, the filled
//! slots, then stored attributes in ascending key order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use mbsr_core::catalog::ValueKind;
use mbsr_core::{
    analyze_statement, AttributeValue, Catalog, ElementKind, Model, ModelElement, ModelError, RequirementExpression,
    SlotKey,
};
use thiserror::Error;
use uuid::Uuid;

use crate::time::{format_timestamp, parse_timestamp};

pub const PROFILE: &str = "Model_Based_Structured_Requirements_Profile";
pub const STEREOTYPE: &str = "Requirement_Expression";
const XMI_NS: &str = "http://www.omg.org/spec/XMI/20131001";
const UML_NS: &str = "http://www.omg.org/spec/UML/20131001";
const PROFILE_NS: &str = "urn:mbsr:profile";

#[derive(Debug, Error)]
pub enum XmiError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("{element} is missing `{attribute}`")]
    Missing { element: String, attribute: String },
    #[error("unknown element type `{0}`")]
    UnknownType(String),
    #[error("{0}")]
    Model(#[from] ModelError),
}

fn namespace(model: &Model) -> Uuid {
    match model.uuid() {
        Some(u) => Uuid::parse_str(u).unwrap_or_else(|_| Uuid::new_v5(&Uuid::NAMESPACE_OID, u.as_bytes())),
        None => Uuid::NAMESPACE_OID,
    }
}

/// Interchange id of an element or expression: the pinned `xmi_id` if any,
/// otherwise a name-based UUID of (model uuid, id).
pub fn internal_id(model: &Model, id: &str) -> String {
    match model.external_id(id) {
        Some(x) => x.to_string(),
        None => format!("_{}", Uuid::new_v5(&namespace(model), id.as_bytes()).simple()),
    }
}

/// Escape for a single-quoted XML attribute value.
pub fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\'' => out.push_str("&apos;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn uml_type(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Block => "uml:Class",
        ElementKind::Mode => "uml:State",
        ElementKind::Quantity => "uml:Property",
        ElementKind::Activity => "uml:Activity",
        ElementKind::Other => "uml:NamedElement",
    }
}

fn element_kind(uml: &str) -> Option<ElementKind> {
    ElementKind::ALL.iter().copied().find(|k| uml_type(*k) == uml)
}

fn attribute_value(model: &Model, value: &AttributeValue) -> String {
    match value {
        AttributeValue::Timestamp(t) => format_timestamp(*t),
        AttributeValue::ElementRef(id) => internal_id(model, id),
        AttributeValue::Enum(s) | AttributeValue::Text(s) => s.clone(),
    }
}

/// The stereotype element for one expression, without a trailing newline.
pub fn requirement_element(model: &Model, e: &RequirementExpression) -> String {
    let base = internal_id(model, &e.id);
    let mut attrs: Vec<(String, String)> = vec![
        ("xmi:id".into(), format!("{base}_")),
        ("base_Class".into(), base),
        ("Id".into(), e.id.clone()),
        ("Text".into(), e.text.clone()),
    ];
    if let Some(st) = model.effective_statement(&e.id) {
        for key in SlotKey::ALL {
            if !st.is_filled(*key) {
                continue;
            }
            let slot = st.slot(*key).expect("filled");
            let value = match &slot.binding {
                Some(element) => internal_id(model, element),
                None => slot.text.clone(),
            };
            attrs.push((key.xmi_name().into(), value));
        }
    }
    let catalog = model.catalog();
    for def in catalog.attributes() {
        if let Some(value) = e.attributes.get(&def.attribute_key) {
            attrs.push((def.mangled_name(), attribute_value(model, value)));
        }
    }
    let mut out = format!("<{PROFILE}:{STEREOTYPE}");
    for (name, value) in attrs {
        let _ = write!(out, "\n{name}='{}'", escape(&value));
    }
    out.push_str(" />");
    out
}

/// Whole document: elements and requirement classes under one `uml:Model`,
/// followed by one stereotype application per requirement in scope.
pub fn export_xmi(model: &Model, scope: Option<&str>) -> Result<String, ModelError> {
    let members = model.scope_members(scope)?;
    let mut out = String::from("<?xml version='1.0' encoding='UTF-8'?>\n");
    let _ = writeln!(
        out,
        "<xmi:XMI xmi:version='2.5' xmlns:xmi='{XMI_NS}' xmlns:uml='{UML_NS}' xmlns:{PROFILE}='{PROFILE_NS}'>"
    );
    let model_id = format!("_{}", namespace(model).simple());
    match model.uuid() {
        Some(u) => {
            let _ = writeln!(
                out,
                "<uml:Model xmi:id='{model_id}' xmi:uuid='{}' name='Model'>",
                escape(u)
            );
        }
        None => {
            let _ = writeln!(out, "<uml:Model xmi:id='{model_id}' name='Model'>");
        }
    }
    for el in model.elements() {
        let _ = writeln!(
            out,
            "<packagedElement xmi:type='{}' xmi:id='{}' xmi:label='{}' name='{}'/>",
            uml_type(el.kind),
            escape(&internal_id(model, &el.element_id)),
            escape(&el.element_id),
            escape(&el.name)
        );
    }
    for e in &members {
        let _ = writeln!(
            out,
            "<packagedElement xmi:type='uml:Class' xmi:id='{}' name='{}'/>",
            escape(&internal_id(model, &e.id)),
            escape(&e.name)
        );
    }
    out.push_str("</uml:Model>\n");
    for e in &members {
        out.push_str(&requirement_element(model, e));
        out.push('\n');
    }
    out.push_str("</xmi:XMI>\n");
    Ok(out)
}

fn required<'a>(
    node: roxmltree::Node<'a, '_>,
    name: &str,
    attr: impl Into<roxmltree::ExpandedName<'a, 'a>>,
) -> Result<&'a str, XmiError> {
    node.attribute(attr).ok_or_else(|| XmiError::Missing {
        element: node.tag_name().name().to_string(),
        attribute: name.to_string(),
    })
}

/// Read a document produced by [`export_xmi`]. All interchange ids are pinned
/// so re-exporting yields the same ids. Slots come from re-parsing `Text`;
/// `SRn` values naming an element restore that slot's binding.
pub fn import_xmi(text: &str, catalog: Arc<Catalog>) -> Result<Model, XmiError> {
    let doc = roxmltree::Document::parse(text)?;
    let mut model = Model::new(catalog);
    let mut elements: BTreeMap<String, String> = BTreeMap::new();
    let mut classes: BTreeMap<String, String> = BTreeMap::new();
    for node in doc.descendants().filter(|n| n.has_tag_name((UML_NS, "Model"))) {
        if let Some(u) = node.attribute((XMI_NS, "uuid")) {
            model.set_uuid(Some(u.to_string()));
        }
    }
    for node in doc.descendants().filter(|n| n.has_tag_name("packagedElement")) {
        let internal = required(node, "xmi:id", (XMI_NS, "id"))?;
        let name = node.attribute("name").unwrap_or_default();
        match node.attribute((XMI_NS, "label")) {
            Some(id) => {
                let uml = required(node, "xmi:type", (XMI_NS, "type"))?;
                let kind = element_kind(uml).ok_or_else(|| XmiError::UnknownType(uml.to_string()))?;
                model.add_element(ModelElement::new(id, name, kind))?;
                model.set_external_id(id, internal)?;
                elements.insert(internal.to_string(), id.to_string());
            }
            None => {
                classes.insert(internal.to_string(), name.to_string());
            }
        }
    }
    let stereotype = doc.descendants().filter(|n| n.has_tag_name((PROFILE_NS, STEREOTYPE)));
    for node in stereotype {
        let id = required(node, "Id", "Id")?;
        let base = required(node, "base_Class", "base_Class")?;
        let text = node.attribute("Text").unwrap_or_default();
        let name = classes.get(base).cloned().unwrap_or_default();
        let mut e = RequirementExpression::new(id, name, text);
        for attr in node.attributes().filter(|a| a.namespace().is_none()) {
            let Some(def) = model.catalog().attribute_by_mangled_name(attr.name()) else {
                continue;
            };
            let value = match def.value_kind {
                ValueKind::Enum => AttributeValue::Enum(attr.value().to_string()),
                ValueKind::Text => AttributeValue::Text(attr.value().to_string()),
                ValueKind::ElementRef => AttributeValue::ElementRef(
                    elements
                        .get(attr.value())
                        .cloned()
                        .unwrap_or_else(|| attr.value().to_string()),
                ),
                ValueKind::Timestamp => {
                    AttributeValue::Timestamp(parse_timestamp(attr.value()).map_err(|_| XmiError::Missing {
                        element: id.to_string(),
                        attribute: format!("{} as an ISO-8601 time", attr.name()),
                    })?)
                }
            };
            e.attributes.insert(def.attribute_key.clone(), value);
        }
        if let Some(mut st) = analyze_statement(text, model.glossary(), model.catalog()).statement {
            let mut bound = false;
            for key in SlotKey::ALL {
                let element = node.attribute(key.xmi_name()).and_then(|v| elements.get(v));
                if let (Some(element), Some(slot)) = (element, st.slot_mut(*key).as_mut()) {
                    slot.binding = Some(element.clone());
                    bound = true;
                }
            }
            if bound && mbsr_core::render_statement(&st).is_ok_and(|r| r == mbsr_core::text::normalize_whitespace(text))
            {
                e.statement = Some(st);
            }
        }
        model.add_expression(e)?;
        model.set_external_id(id, base)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_quotes_and_markup() {
        assert_eq!(escape("a'b\"<c>&\n"), "a&apos;b&quot;&lt;c&gt;&amp;&#10;");
    }

    #[test]
    fn generated_ids_are_stable_and_distinct() {
        let mut m = Model::default();
        m.add_element(ModelElement::new("sc", "Spacecraft", ElementKind::Block))
            .unwrap();
        m.add_element(ModelElement::new("rv", "Rover", ElementKind::Block))
            .unwrap();
        let a = internal_id(&m, "sc");
        assert_eq!(a, internal_id(&m.clone(), "sc"));
        assert_ne!(a, internal_id(&m, "rv"));
        m.set_uuid(Some("3f2504e0-4f89-11d3-9a0c-0305e82c3301".into()));
        assert_ne!(a, internal_id(&m, "sc"));
        m.set_external_id("sc", "_pinned").unwrap();
        assert_eq!(internal_id(&m, "sc"), "_pinned");
    }

    #[test]
    fn empty_slot_is_omitted() {
        let mut m = Model::default();
        m.add_expression(RequirementExpression::new(
            "R1",
            "",
            "The Rover shall drive within 5 s.",
        ))
        .unwrap();
        let xml = requirement_element(&m, m.expression("R1").unwrap());
        assert!(xml.contains("\nSR2_Subject='Rover'"));
        assert!(!xml.contains("SR4_Object"));
        assert!(!xml.contains("SR1_Condition"));
    }

    #[test]
    fn unknown_scope() {
        assert_eq!(
            export_xmi(&Model::default(), Some("S9")),
            Err(ModelError::UnknownScope("S9".into()))
        );
    }
}
