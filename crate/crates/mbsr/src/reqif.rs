//! Minimal ReqIF export. Attribute keys reach ReqIF only through an explicit
//! mapping file, and model elements are not exported: slot bindings survive
//! only as the words of the statement text.
//!
//! Mapping file, in the block format:
//!
//! ```text
//! [mapping reqif]
//! A01 = Rationale
//! A40 = Type
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use mbsr_core::{Model, ModelError, RequirementExpression};
use thiserror::Error;

use crate::block::{parse_blocks, SyntaxError};
use crate::table::attribute_text;
use crate::xmi::escape;

const REQIF_NS: &str = "http://www.omg.org/spec/ReqIF/20110401/reqif.xsd";

#[derive(Debug, Error)]
pub enum ReqifError {
    #[error("cannot read mapping {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("mapping: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("mapping line {line}: {message}")]
    BadMapping { line: usize, message: String },
    #[error("attribute {0} is populated but has no ReqIF mapping")]
    MappingMissing(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Attribute key to ReqIF attribute-definition name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Mapping(pub BTreeMap<String, String>);

impl Mapping {
    pub fn parse(text: &str) -> Result<Mapping, ReqifError> {
        let mut map = BTreeMap::new();
        for block in parse_blocks(text)? {
            if block.kind != "mapping" {
                return Err(ReqifError::BadMapping {
                    line: block.line,
                    message: format!("expected `[mapping ...]`, found `[{}]`", block.kind),
                });
            }
            for entry in block.entries {
                if map.insert(entry.key.clone(), entry.value).is_some() {
                    return Err(ReqifError::BadMapping {
                        line: entry.line,
                        message: format!("{} mapped twice", entry.key),
                    });
                }
            }
        }
        Ok(Mapping(map))
    }

    pub fn load(path: &Path) -> Result<Mapping, ReqifError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReqifError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Mapping::parse(&text)
    }
}

/// One node of the exported hierarchy: an expression and, for sets, its members.
struct Node<'m> {
    expression: &'m RequirementExpression,
    children: Vec<Node<'m>>,
}

fn tree<'m>(model: &'m Model, id: &str, seen: &mut BTreeSet<String>) -> Option<Node<'m>> {
    let expression = model.expression(id)?;
    let mut children = Vec::new();
    if seen.insert(id.to_string()) {
        if let Some(set) = model.set(id) {
            children = set.members.iter().filter_map(|m| tree(model, m, seen)).collect();
        }
        seen.remove(id);
    }
    Some(Node { expression, children })
}

/// Top-level specifications: `(identifier, long name, children)`.
fn specifications<'m>(
    model: &'m Model,
    scope: Option<&str>,
) -> Result<Vec<(String, String, Vec<Node<'m>>)>, ModelError> {
    let mut seen = BTreeSet::new();
    let leaf = |id: &str| Node {
        expression: model.expression(id).expect("listed"),
        children: Vec::new(),
    };
    match scope {
        Some(id) if model.set(id).is_some() => {
            let root = tree(model, id, &mut seen).expect("set exists");
            Ok(vec![(id.to_string(), root.expression.name.clone(), root.children)])
        }
        Some(id) => {
            model.scope_members(Some(id))?;
            Ok(vec![(id.to_string(), String::new(), vec![leaf(id)])])
        }
        None => {
            let mut out = Vec::new();
            for set in model.sets().filter(|s| model.containing_sets(s.id()).is_empty()) {
                let root = tree(model, set.id(), &mut seen).expect("set exists");
                out.push((set.id().to_string(), set.expression.name.clone(), root.children));
            }
            let loose: Vec<Node> = model
                .expressions()
                .filter(|e| model.containing_sets(&e.id).is_empty())
                .map(|e| leaf(&e.id))
                .collect();
            if !loose.is_empty() {
                out.push(("unassigned".to_string(), "Unassigned".to_string(), loose));
            }
            Ok(out)
        }
    }
}

fn collect<'m>(nodes: &[Node<'m>], out: &mut BTreeMap<String, &'m RequirementExpression>) {
    for n in nodes {
        out.insert(n.expression.id.clone(), n.expression);
        collect(&n.children, out);
    }
}

fn write_hierarchy(out: &mut String, nodes: &[Node], depth: usize, counter: &mut usize) {
    let pad = "  ".repeat(depth);
    for n in nodes {
        *counter += 1;
        let _ = writeln!(out, "{pad}<SPEC-HIERARCHY IDENTIFIER=\"sh-{counter}\">");
        let _ = writeln!(
            out,
            "{pad}  <OBJECT><SPEC-OBJECT-REF>so-{}</SPEC-OBJECT-REF></OBJECT>",
            escape(&n.expression.id)
        );
        if !n.children.is_empty() {
            let _ = writeln!(out, "{pad}  <CHILDREN>");
            write_hierarchy(out, &n.children, depth + 2, counter);
            let _ = writeln!(out, "{pad}  </CHILDREN>");
        }
        let _ = writeln!(out, "{pad}</SPEC-HIERARCHY>");
    }
}

pub fn export_reqif(model: &Model, scope: Option<&str>, mapping: &Mapping) -> Result<String, ReqifError> {
    let specs = specifications(model, scope)?;
    let mut objects = BTreeMap::new();
    for (_, _, children) in &specs {
        collect(children, &mut objects);
    }
    for e in objects.values() {
        if let Some(key) = e.attributes.keys().find(|k| !mapping.0.contains_key(*k)) {
            return Err(ReqifError::MappingMissing(key.clone()));
        }
    }

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<REQ-IF xmlns=\"{REQIF_NS}\">");
    out.push_str("  <THE-HEADER>\n    <REQ-IF-HEADER IDENTIFIER=\"header\">\n      <TITLE>Requirements export</TITLE>\n    </REQ-IF-HEADER>\n  </THE-HEADER>\n");
    out.push_str("  <CORE-CONTENT>\n    <REQ-IF-CONTENT>\n");
    out.push_str("      <DATATYPES>\n        <DATATYPE-DEFINITION-STRING IDENTIFIER=\"dt-string\" LONG-NAME=\"String\" MAX-LENGTH=\"100000\"/>\n      </DATATYPES>\n");
    out.push_str("      <SPEC-TYPES>\n");
    for kind in ["requirement", "set"] {
        let _ = writeln!(
            out,
            "        <SPEC-OBJECT-TYPE IDENTIFIER=\"sot-{kind}\" LONG-NAME=\"{kind}\">"
        );
        out.push_str("          <SPEC-ATTRIBUTES>\n");
        for (key, name) in &mapping.0 {
            let _ = writeln!(
                out,
                "            <ATTRIBUTE-DEFINITION-STRING IDENTIFIER=\"ad-{kind}-{}\" LONG-NAME=\"{}\"><TYPE><DATATYPE-DEFINITION-STRING-REF>dt-string</DATATYPE-DEFINITION-STRING-REF></TYPE></ATTRIBUTE-DEFINITION-STRING>",
                escape(key),
                escape(name)
            );
        }
        out.push_str("          </SPEC-ATTRIBUTES>\n        </SPEC-OBJECT-TYPE>\n");
    }
    out.push_str("        <SPECIFICATION-TYPE IDENTIFIER=\"spt-specification\" LONG-NAME=\"specification\"/>\n");
    out.push_str("      </SPEC-TYPES>\n      <SPEC-OBJECTS>\n");
    for e in objects.values() {
        let kind = if model.set(&e.id).is_some() {
            "set"
        } else {
            "requirement"
        };
        let _ = writeln!(
            out,
            "        <SPEC-OBJECT IDENTIFIER=\"so-{}\" LONG-NAME=\"{}\" DESC=\"{}\">",
            escape(&e.id),
            escape(&e.id),
            escape(&e.text)
        );
        let _ = writeln!(
            out,
            "          <TYPE><SPEC-OBJECT-TYPE-REF>sot-{kind}</SPEC-OBJECT-TYPE-REF></TYPE>"
        );
        out.push_str("          <VALUES>\n");
        for (key, value) in &e.attributes {
            let _ = writeln!(
                out,
                "            <ATTRIBUTE-VALUE-STRING THE-VALUE=\"{}\"><DEFINITION><ATTRIBUTE-DEFINITION-STRING-REF>ad-{kind}-{}</ATTRIBUTE-DEFINITION-STRING-REF></DEFINITION></ATTRIBUTE-VALUE-STRING>",
                escape(&attribute_text(model, value)),
                escape(key)
            );
        }
        out.push_str("          </VALUES>\n        </SPEC-OBJECT>\n");
    }
    out.push_str("      </SPEC-OBJECTS>\n      <SPECIFICATIONS>\n");
    let mut counter = 0;
    for (id, name, children) in &specs {
        let _ = writeln!(
            out,
            "        <SPECIFICATION IDENTIFIER=\"spec-{}\" LONG-NAME=\"{}\">",
            escape(id),
            escape(if name.is_empty() { id } else { name })
        );
        out.push_str("          <TYPE><SPECIFICATION-TYPE-REF>spt-specification</SPECIFICATION-TYPE-REF></TYPE>\n");
        out.push_str("          <CHILDREN>\n");
        write_hierarchy(&mut out, children, 6, &mut counter);
        out.push_str("          </CHILDREN>\n        </SPECIFICATION>\n");
    }
    out.push_str("      </SPECIFICATIONS>\n    </REQ-IF-CONTENT>\n  </CORE-CONTENT>\n</REQ-IF>\n");
    Ok(out)
}
