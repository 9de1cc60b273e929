//! Typed relationships between expressions, model elements and catalog
//! entries, plus the relation-map and traceability queries over them.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::token_enum;
use crate::model::{AttributeValue, Model, ModelError, SlotKey};

token_enum!(LinkKind {
    Containment => "Containment",
    Derive => "Derive",
    Refine => "Refine",
    Satisfy => "Satisfy",
    Verify => "Verify",
    Copy => "Copy",
    Trace => "Trace",
    Violate => "Violate",
});

/// A link endpoint. Text form: a plain id, `rule:R16` or `characteristic:C3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    /// Expression or requirement set.
    Expression(String),
    Element(String),
    /// Catalog rule, or the reserved `TBX` check.
    Rule(String),
    Characteristic(String),
}

impl NodeRef {
    pub fn id(&self) -> &str {
        match self {
            NodeRef::Expression(id) | NodeRef::Element(id) | NodeRef::Rule(id) | NodeRef::Characteristic(id) => id,
        }
    }

    pub fn is_expression(&self) -> bool {
        matches!(self, NodeRef::Expression(_))
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Expression(id) | NodeRef::Element(id) => f.write_str(id),
            NodeRef::Rule(id) => write!(f, "rule:{id}"),
            NodeRef::Characteristic(id) => write!(f, "characteristic:{id}"),
        }
    }
}

/// Directed link. Derive and Copy point from the derived/copied expression to
/// its origin; Containment points from owner to part; Satisfy, Verify and
/// Refine point from the model element to the expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLink {
    pub link_id: String,
    pub kind: LinkKind,
    pub source: NodeRef,
    pub target: NodeRef,
}

pub fn link_id(kind: LinkKind, source: &NodeRef, target: &NodeRef) -> String {
    format!("{}:{}->{}", kind.as_str().to_ascii_lowercase(), source, target)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddedLink {
    pub link_id: String,
    /// Set for Trace links, which are allowed but discouraged.
    pub discouraged: bool,
}

fn violation(kind: LinkKind, reason: impl Into<String>) -> ModelError {
    ModelError::KindConstraintViolation {
        kind,
        reason: reason.into(),
    }
}

fn check_endpoints(kind: LinkKind, source: &NodeRef, target: &NodeRef) -> Result<(), ModelError> {
    use NodeRef::*;
    let ok = match kind {
        LinkKind::Derive | LinkKind::Copy | LinkKind::Containment => source.is_expression() && target.is_expression(),
        LinkKind::Satisfy => matches!(
            (source, target),
            (Element(_), Expression(_)) | (Expression(_), Rule(_)) | (Expression(_), Characteristic(_))
        ),
        LinkKind::Verify | LinkKind::Refine => matches!((source, target), (Element(_), Expression(_))),
        LinkKind::Violate => matches!((source, target), (Expression(_), Rule(_))),
        LinkKind::Trace => true,
    };
    if ok {
        return Ok(());
    }
    let expected = match kind {
        LinkKind::Derive | LinkKind::Copy | LinkKind::Containment => "expression -> expression",
        LinkKind::Satisfy => "element -> expression, or expression -> rule/characteristic",
        LinkKind::Verify | LinkKind::Refine => "element -> expression",
        LinkKind::Violate => "expression -> rule",
        LinkKind::Trace => unreachable!(),
    };
    Err(violation(kind, format!("{source} -> {target}; expected {expected}")))
}

/// Edge label in a relation map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// A trace link; `outgoing` when the parent node is the link source.
    Link { kind: LinkKind, outgoing: bool },
    /// A statement slot bound to a model element.
    Slot { slot: SlotKey, outgoing: bool },
}

impl Relation {
    fn kind_key(&self) -> (u8, u8) {
        match self {
            Relation::Link { kind, .. } => (0, *kind as u8),
            Relation::Slot { slot, .. } => (1, *slot as u8),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Link { kind, outgoing: true } => write!(f, "{kind} ->"),
            Relation::Link { kind, outgoing: false } => write!(f, "{kind} <-"),
            Relation::Slot { slot, outgoing: true } => write!(f, "{slot} ->"),
            Relation::Slot { slot, outgoing: false } => write!(f, "{slot} <-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationNode {
    pub node: NodeRef,
    /// `None` only for the root.
    pub via: Option<Relation>,
    pub children: Vec<RelationNode>,
}

impl RelationNode {
    /// Pre-order walk yielding `(depth, node)`.
    pub fn walk(&self) -> Vec<(usize, &RelationNode)> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![(0usize, self)];
        while let Some((depth, n)) = stack.pop() {
            out.push((depth, n));
            stack.extend(n.children.iter().rev().map(|c| (depth + 1, c)));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(RelationNode::node_count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KdrEntry {
    pub requirement_id: String,
    /// The A38 token: `K`, `D` or `K+D`.
    pub key_driving: String,
    /// Upward Derive ancestors, nearest first.
    pub derive_chain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BidirectionalTrace {
    pub upstream: Vec<String>,
    pub downstream: Vec<String>,
}

impl Model {
    pub fn links(&self) -> impl Iterator<Item = &TraceLink> {
        self.links.values()
    }

    pub fn link(&self, link_id: &str) -> Option<&TraceLink> {
        self.links.get(link_id)
    }

    /// Links between two nodes, in either direction.
    pub fn links_between(&self, a: &NodeRef, b: &NodeRef) -> impl Iterator<Item = &TraceLink> + '_ {
        let (a, b) = (a.clone(), b.clone());
        self.links
            .values()
            .filter(move |l| (l.source == a && l.target == b) || (l.source == b && l.target == a))
    }

    fn node(&self, id: &str) -> Result<NodeRef, ModelError> {
        self.resolve_node(id)
            .ok_or_else(|| ModelError::UnknownEndpoint(id.to_string()))
    }

    /// Whether `to` is reachable from `from` along `kind` links, source to target.
    fn reaches(&self, kind: LinkKind, from: &NodeRef, to: &NodeRef) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![from.clone()];
        while let Some(n) = stack.pop() {
            if n == *to {
                return true;
            }
            if !seen.insert(n.clone()) {
                continue;
            }
            stack.extend(
                self.links
                    .values()
                    .filter(|l| l.kind == kind && l.source == n)
                    .map(|l| l.target.clone()),
            );
        }
        false
    }

    /// Add a link between two ids (see [`NodeRef`] for the text forms).
    /// Adding an existing (kind, source, target) triple returns its id.
    pub fn add_link(&mut self, kind: LinkKind, source: &str, target: &str) -> Result<AddedLink, ModelError> {
        let source = self.node(source)?;
        let target = self.node(target)?;
        check_endpoints(kind, &source, &target)?;
        let id = link_id(kind, &source, &target);
        let discouraged = kind == LinkKind::Trace;
        if discouraged && self.catalog().options.forbid_trace {
            return Err(ModelError::TraceDiscouraged {
                source_id: source.to_string(),
                target_id: target.to_string(),
            });
        }
        if self.links.contains_key(&id) {
            return Ok(AddedLink {
                link_id: id,
                discouraged,
            });
        }
        match kind {
            LinkKind::Derive | LinkKind::Containment | LinkKind::Copy
                if source == target || self.reaches(kind, &target, &source) =>
            {
                return Err(ModelError::CycleDetected {
                    kind,
                    source_id: source.to_string(),
                    target_id: target.to_string(),
                });
            }
            LinkKind::Containment if self.links.values().any(|l| l.kind == kind && l.target == target) => {
                return Err(violation(kind, format!("{target} already has a containment parent")));
            }
            LinkKind::Copy if self.copy_origin(source.id()).is_some() => {
                return Err(violation(kind, format!("{source} is already a copy")));
            }
            _ => {}
        }
        if kind == LinkKind::Copy {
            let origin = self.expression(target.id()).expect("resolved").clone();
            self.write_text(source.id(), origin.text, origin.statement);
        }
        self.links.insert(
            id.clone(),
            TraceLink {
                link_id: id.clone(),
                kind,
                source,
                target,
            },
        );
        Ok(AddedLink {
            link_id: id,
            discouraged,
        })
    }

    pub fn remove_link(&mut self, link_id: &str) -> Result<TraceLink, ModelError> {
        self.links
            .remove(link_id)
            .ok_or_else(|| ModelError::UnknownLink(link_id.to_string()))
    }

    fn neighbours(&self, node: &NodeRef, kinds: Option<&[LinkKind]>) -> Vec<(Relation, NodeRef)> {
        let mut out: Vec<(Relation, NodeRef)> = Vec::new();
        for l in self.links.values() {
            if kinds.is_some_and(|k| !k.contains(&l.kind)) {
                continue;
            }
            if l.source == *node {
                out.push((
                    Relation::Link {
                        kind: l.kind,
                        outgoing: true,
                    },
                    l.target.clone(),
                ));
            }
            if l.target == *node {
                out.push((
                    Relation::Link {
                        kind: l.kind,
                        outgoing: false,
                    },
                    l.source.clone(),
                ));
            }
        }
        if kinds.is_none() {
            match node {
                NodeRef::Expression(id) => {
                    if let Some(st) = self.effective_statement(id) {
                        for (slot, element) in st.bindings() {
                            out.push((
                                Relation::Slot { slot, outgoing: true },
                                NodeRef::Element(element.to_string()),
                            ));
                        }
                    }
                }
                NodeRef::Element(id) => {
                    for e in self.expressions() {
                        if let Some(st) = self.effective_statement(&e.id) {
                            for (slot, element) in st.bindings() {
                                if element == id {
                                    out.push((
                                        Relation::Slot { slot, outgoing: false },
                                        NodeRef::Expression(e.id.clone()),
                                    ));
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        // by kind, then id; direction only breaks ties
        out.sort_by(|(ra, na), (rb, nb)| (ra.kind_key(), na, ra).cmp(&(rb.kind_key(), nb, rb)));
        out
    }

    /// Breadth-first expansion from `root` to `depth` levels. Each node
    /// appears once, at its shallowest level; children are ordered by relation
    /// then id. Without a kind filter, slot bindings count as relations too.
    pub fn relation_map(
        &self,
        root: &str,
        depth: usize,
        kinds: Option<&[LinkKind]>,
    ) -> Result<RelationNode, ModelError> {
        let root = self
            .resolve_node(root)
            .ok_or_else(|| ModelError::UnknownId(root.to_string()))?;
        let mut visited = BTreeSet::new();
        visited.insert(root.clone());
        // flat arena: (node, via, parent index)
        let mut arena: Vec<(NodeRef, Option<Relation>, Option<usize>)> = alloc::vec![(root, None, None)];
        let mut frontier = alloc::vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &parent in &frontier {
                let node = arena[parent].0.clone();
                for (rel, n) in self.neighbours(&node, kinds) {
                    if visited.insert(n.clone()) {
                        arena.push((n, Some(rel), Some(parent)));
                        next.push(arena.len() - 1);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let mut nodes: Vec<Option<RelationNode>> = arena
            .iter()
            .map(|(n, via, _)| {
                Some(RelationNode {
                    node: n.clone(),
                    via: *via,
                    children: Vec::new(),
                })
            })
            .collect();
        // children always follow their parent in the arena, so fold back to front
        for i in (1..arena.len()).rev() {
            let child = nodes[i].take().expect("taken once");
            let parent = arena[i].2.expect("non-root");
            nodes[parent]
                .as_mut()
                .expect("parent precedes child")
                .children
                .insert(0, child);
        }
        Ok(nodes[0].take().expect("root"))
    }

    /// Key/driving requirements in scope (A38 of K, D or K+D) with their
    /// upward Derive ancestors.
    pub fn kdr_view(&self, scope: Option<&str>) -> Result<Vec<KdrEntry>, ModelError> {
        let mut out = Vec::new();
        for e in self.scope_members(scope)? {
            let Some(AttributeValue::Enum(token)) = e.attributes.get("A38") else {
                continue;
            };
            if !matches!(token.as_str(), "K" | "D" | "K+D") {
                continue;
            }
            let start = NodeRef::Expression(e.id.clone());
            let derive_chain = self.closure(&start, |n| self.derive_targets(n));
            out.push(KdrEntry {
                requirement_id: e.id.clone(),
                key_driving: token.clone(),
                derive_chain,
            });
        }
        Ok(out)
    }

    fn derive_targets(&self, node: &NodeRef) -> Vec<NodeRef> {
        self.links
            .values()
            .filter(|l| l.kind == LinkKind::Derive && l.source == *node)
            .map(|l| l.target.clone())
            .collect()
    }

    /// Breadth-first closure (excluding `start`), ids in discovery order.
    fn closure(&self, start: &NodeRef, step: impl Fn(&NodeRef) -> Vec<NodeRef>) -> Vec<String> {
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start.clone()]);
        let mut out = Vec::new();
        while let Some(n) = queue.pop_front() {
            let mut next = step(&n);
            next.sort();
            for m in next {
                if seen.insert(m.clone()) {
                    out.push(m.id().to_string());
                    queue.push_back(m);
                }
            }
        }
        out
    }

    /// Upstream: Derive origins, containing sets and containment owners,
    /// transitively. Downstream: derived expressions and Satisfy, Verify and
    /// Refine sources, transitively.
    pub fn bidirectional_trace(&self, id: &str) -> Result<BidirectionalTrace, ModelError> {
        if self.expression(id).is_none() {
            return Err(ModelError::UnknownId(id.to_string()));
        }
        let start = NodeRef::Expression(id.to_string());
        let upstream = self.closure(&start, |n| {
            let mut next = self.derive_targets(n);
            next.extend(
                self.containing_sets(n.id())
                    .into_iter()
                    .map(|s| NodeRef::Expression(s.to_string())),
            );
            next.extend(
                self.links
                    .values()
                    .filter(|l| l.kind == LinkKind::Containment && l.target == *n)
                    .map(|l| l.source.clone()),
            );
            next
        });
        let downstream = self.closure(&start, |n| {
            self.links
                .values()
                .filter(|l| {
                    l.target == *n
                        && matches!(
                            l.kind,
                            LinkKind::Derive | LinkKind::Satisfy | LinkKind::Verify | LinkKind::Refine
                        )
                })
                .map(|l| l.source.clone())
                .collect()
        });
        Ok(BidirectionalTrace { upstream, downstream })
    }

    /// Links grouped by kind, for summaries.
    pub fn link_counts(&self) -> BTreeMap<LinkKind, usize> {
        let mut counts = BTreeMap::new();
        for l in self.links.values() {
            *counts.entry(l.kind).or_insert(0) += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ElementKind, ModelElement, RequirementExpression};

    fn chain() -> Model {
        let mut m = Model::default();
        for id in ["L3", "L4", "L5"] {
            m.add_expression(RequirementExpression::new(
                id,
                id,
                format!("The {id} shall work within 1 s."),
            ))
            .unwrap();
        }
        m.add_link(LinkKind::Derive, "L4", "L3").unwrap();
        m.add_link(LinkKind::Derive, "L5", "L4").unwrap();
        m
    }

    #[test]
    fn derive_chain_and_cycle() {
        let mut m = chain();
        let t = m.bidirectional_trace("L5").unwrap();
        assert_eq!(t.upstream, ["L4", "L3"]);
        assert!(t.downstream.is_empty());
        assert_eq!(m.bidirectional_trace("L3").unwrap().downstream, ["L4", "L5"]);
        assert!(matches!(
            m.add_link(LinkKind::Derive, "L3", "L5"),
            Err(ModelError::CycleDetected { .. })
        ));
        assert!(matches!(
            m.add_link(LinkKind::Derive, "L3", "L3"),
            Err(ModelError::CycleDetected { .. })
        ));
    }

    #[test]
    fn duplicate_link_returns_existing_id() {
        let mut m = chain();
        let before = m.links().count();
        let again = m.add_link(LinkKind::Derive, "L4", "L3").unwrap();
        assert_eq!(again.link_id, "derive:L4->L3");
        assert_eq!(m.links().count(), before);
    }

    #[test]
    fn endpoint_kinds() {
        let mut m = chain();
        m.add_element(ModelElement::new("sc", "Spacecraft", ElementKind::Block))
            .unwrap();
        assert!(m.add_link(LinkKind::Satisfy, "sc", "L3").is_ok());
        assert!(m.add_link(LinkKind::Violate, "L3", "rule:R16").is_ok());
        assert!(m.add_link(LinkKind::Satisfy, "L3", "characteristic:C3").is_ok());
        assert!(matches!(
            m.add_link(LinkKind::Derive, "sc", "L3"),
            Err(ModelError::KindConstraintViolation { .. })
        ));
        assert!(matches!(
            m.add_link(LinkKind::Verify, "L3", "sc"),
            Err(ModelError::KindConstraintViolation { .. })
        ));
        assert_eq!(
            m.add_link(LinkKind::Derive, "L3", "nope"),
            Err(ModelError::UnknownEndpoint("nope".into()))
        );
        assert_eq!(
            m.add_link(LinkKind::Violate, "L3", "rule:R99"),
            Err(ModelError::UnknownEndpoint("rule:R99".into()))
        );
    }

    #[test]
    fn trace_links_warn() {
        let mut m = chain();
        assert!(m.add_link(LinkKind::Trace, "L3", "L5").unwrap().discouraged);
    }

    #[test]
    fn containment_forest() {
        let mut m = chain();
        m.add_link(LinkKind::Containment, "L3", "L4").unwrap();
        assert!(matches!(
            m.add_link(LinkKind::Containment, "L5", "L4"),
            Err(ModelError::KindConstraintViolation { .. })
        ));
        assert!(matches!(
            m.add_link(LinkKind::Containment, "L4", "L3"),
            Err(ModelError::CycleDetected { .. })
        ));
        assert_eq!(m.bidirectional_trace("L4").unwrap().upstream, ["L3"]);
    }

    #[test]
    fn copies_are_read_only_and_synced() {
        let mut m = chain();
        m.add_expression(RequirementExpression::new("C1", "copy", "placeholder"))
            .unwrap();
        m.add_link(LinkKind::Copy, "C1", "L3").unwrap();
        assert_eq!(m.expression("C1").unwrap().text, m.expression("L3").unwrap().text);
        assert_eq!(m.set_text("C1", "edited"), Err(ModelError::ReadOnlyCopy("C1".into())));
        m.set_text("L3", "The L3 shall work within 2 s.").unwrap();
        assert_eq!(m.expression("C1").unwrap().text, "The L3 shall work within 2 s.");
    }

    #[test]
    fn need_copy_takes_words_not_slots() {
        let mut m = Model::default();
        let text = "The Rover shall drive at least 10 m per sol.";
        let (st, _) = crate::parse_statement(text, m.glossary(), m.catalog()).unwrap();
        m.add_expression(RequirementExpression::new("R", "", text).with_statement(st))
            .unwrap();
        m.add_expression(RequirementExpression::need("N", "", "draft")).unwrap();
        m.add_link(LinkKind::Copy, "N", "R").unwrap();
        let n = m.expression("N").unwrap();
        assert_eq!((n.text.as_str(), n.statement.is_none()), (text, true));
    }

    #[test]
    fn relation_map_levels() {
        let m = chain();
        let map = m.relation_map("L4", 1, None).unwrap();
        let kids: Vec<&str> = map.children.iter().map(|c| c.node.id()).collect();
        assert_eq!(kids, ["L3", "L5"]);
        let only_copy = m.relation_map("L4", 1, Some(&[LinkKind::Copy])).unwrap();
        assert!(only_copy.children.is_empty());
        let deep = m.relation_map("L5", 3, None).unwrap();
        assert_eq!(deep.node_count(), 3);
        assert_eq!(deep.children[0].children[0].node.id(), "L3");
    }

    #[test]
    fn kdr_requires_key_driving_token() {
        let mut m = chain();
        m.set_attribute("L5", "A38", Some(AttributeValue::Enum("K+D".into())))
            .unwrap();
        m.set_attribute("L4", "A38", Some(AttributeValue::Enum("None".into())))
            .unwrap();
        let view = m.kdr_view(None).unwrap();
        assert_eq!(view.len(), 1);
        assert_eq!(view[0].derive_chain, ["L4", "L3"]);
    }
}
