//! Relation maps as indented text or Graphviz DOT.

use std::fmt::Write as _;

use mbsr_core::trace::{BidirectionalTrace, Relation, RelationNode};

/// One node per line, children indented two spaces under their parent:
///
/// ```text
/// L3-1
///   Derive -> L2-1
///     Derive -> L1-1
/// ```
pub fn to_text(root: &RelationNode) -> String {
    let mut out = String::new();
    for (depth, n) in root.walk() {
        let indent = "  ".repeat(depth);
        match n.via {
            Some(via) => {
                let _ = writeln!(out, "{indent}{via} {}", n.node);
            }
            None => {
                let _ = writeln!(out, "{}", n.node);
            }
        }
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn edges(parent: &RelationNode, out: &mut String) {
    for child in &parent.children {
        let (p, c) = (quote(&parent.node.to_string()), quote(&child.node.to_string()));
        let (label, outgoing) = match child.via.expect("children have a relation") {
            Relation::Link { kind, outgoing } => (kind.to_string(), outgoing),
            Relation::Slot { slot, outgoing } => (slot.to_string(), outgoing),
        };
        let (from, to) = if outgoing { (p, c) } else { (c, p) };
        let _ = writeln!(out, "  {from} -> {to} [label={}];", quote(&label));
        edges(child, out);
    }
}

/// Edges point from link source to link target whichever way the map was walked.
pub fn to_dot(root: &RelationNode) -> String {
    let mut out = String::from("digraph relations {\n");
    for (_, n) in root.walk() {
        let _ = writeln!(out, "  {};", quote(&n.node.to_string()));
    }
    edges(root, &mut out);
    out.push_str("}\n");
    out
}

pub fn trace_text(id: &str, trace: &BidirectionalTrace) -> String {
    let list = |ids: &[String]| {
        if ids.is_empty() {
            "(none)".to_string()
        } else {
            ids.join(", ")
        }
    };
    format!(
        "{id}\nupstream: {}\ndownstream: {}\n",
        list(&trace.upstream),
        list(&trace.downstream)
    )
}
