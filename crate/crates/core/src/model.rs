//! In-memory requirement model: elements, expressions, sets, glossary and links.
//!
//! All mutations validate first and then apply, so a returned error always
//! leaves the model untouched.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicI64, Ordering};

use thiserror::Error;

use crate::catalog::{token_enum, Catalog, ValueKind};
use crate::glossary::{Glossary, GlossaryError, GlossaryTerm};
use crate::parser;
use crate::text::normalize_whitespace;
use crate::trace::{LinkKind, NodeRef, TraceLink};

token_enum!(
    /// Statement pattern a structured statement follows.
    PatternId {
        Iso1 => "Iso1",
        Iso2 => "Iso2",
        Carson => "Carson",
    }
);

impl PatternId {
    /// Slots in the order they appear in the statement text.
    pub fn slot_order(&self) -> &'static [SlotKey] {
        use SlotKey::*;
        match self {
            PatternId::Iso1 => &[Sr2, Sr3, Sr5],
            PatternId::Iso2 => &[Sr1, Sr2, Sr3, Sr4, Sr5],
            PatternId::Carson => &[Sr2, Sr3, Sr5, Sr1],
        }
    }

    /// Slots that must be filled, in key order.
    pub fn mandatory_slots(&self) -> &'static [SlotKey] {
        use SlotKey::*;
        match self {
            PatternId::Iso1 => &[Sr2, Sr3, Sr5],
            PatternId::Iso2 => &[Sr1, Sr2, Sr3, Sr4, Sr5],
            PatternId::Carson => &[Sr1, Sr2, Sr3, Sr5],
        }
    }

    pub fn allows(&self, slot: SlotKey) -> bool {
        self.slot_order().contains(&slot)
    }
}

token_enum!(
    /// Pattern slot keys.
    SlotKey {
        Sr1 => "SR1",
        Sr2 => "SR2",
        Sr3 => "SR3",
        Sr4 => "SR4",
        Sr5 => "SR5",
    }
);

impl SlotKey {
    pub fn label(&self) -> &'static str {
        match self {
            SlotKey::Sr1 => "Condition",
            SlotKey::Sr2 => "Subject",
            SlotKey::Sr3 => "Action",
            SlotKey::Sr4 => "Object",
            SlotKey::Sr5 => "Constraint of Action",
        }
    }

    /// Property name used in the XMI profile listing, e.g. `SR5_Constraint_of_Action`.
    pub fn xmi_name(&self) -> &'static str {
        match self {
            SlotKey::Sr1 => "SR1_Condition",
            SlotKey::Sr2 => "SR2_Subject",
            SlotKey::Sr3 => "SR3_Action",
            SlotKey::Sr4 => "SR4_Object",
            SlotKey::Sr5 => "SR5_Constraint_of_Action",
        }
    }
}

token_enum!(ElementKind {
    Block => "Block",
    Mode => "Mode",
    Quantity => "Quantity",
    Activity => "Activity",
    Other => "Other",
});

token_enum!(
    /// Needs reuse the expression types but carry no structured statement.
    ExpressionKind {
        Requirement => "Requirement",
        Need => "Need",
    }
);

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub Timestamp);

impl Clock for FixedClock {
    fn now(&self) -> Timestamp {
        self.0
    }
}

/// Returns `start`, `start + step`, `start + 2 * step`, ...
#[derive(Debug)]
pub struct SteppingClock {
    next: AtomicI64,
    step: i64,
}

impl SteppingClock {
    pub fn new(start: Timestamp, step: i64) -> Self {
        SteppingClock {
            next: AtomicI64::new(start.0),
            step,
        }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> Timestamp {
        Timestamp(self.next.fetch_add(self.step, Ordering::SeqCst))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelElement {
    pub element_id: String,
    pub name: String,
    pub kind: ElementKind,
}

impl ModelElement {
    pub fn new(element_id: impl Into<String>, name: impl Into<String>, kind: ElementKind) -> Self {
        ModelElement {
            element_id: element_id.into(),
            name: name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotValue {
    /// Verbatim fragment of the statement.
    pub text: String,
    /// Referenced model element.
    pub binding: Option<String>,
}

impl SlotValue {
    pub fn text(text: impl Into<String>) -> Self {
        SlotValue {
            text: text.into(),
            binding: None,
        }
    }

    pub fn bound(text: impl Into<String>, element_id: impl Into<String>) -> Self {
        SlotValue {
            text: text.into(),
            binding: Some(element_id.into()),
        }
    }
}

/// The article in front of the subject. `Default` renders as "the"/"The".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum SubjectArticle {
    #[default]
    Default,
    Verbatim(String),
    Omitted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredStatement {
    pub pattern: PatternId,
    pub article: SubjectArticle,
    pub sr1_condition: Option<SlotValue>,
    pub sr2_subject: Option<SlotValue>,
    pub sr3_action: Option<SlotValue>,
    pub sr4_object: Option<SlotValue>,
    pub sr5_constraint: Option<SlotValue>,
}

impl StructuredStatement {
    pub fn new(pattern: PatternId) -> Self {
        StructuredStatement {
            pattern,
            article: SubjectArticle::Default,
            sr1_condition: None,
            sr2_subject: None,
            sr3_action: None,
            sr4_object: None,
            sr5_constraint: None,
        }
    }

    pub fn with_slot(mut self, key: SlotKey, value: SlotValue) -> Self {
        *self.slot_mut(key) = Some(value);
        self
    }

    pub fn slot(&self, key: SlotKey) -> Option<&SlotValue> {
        match key {
            SlotKey::Sr1 => self.sr1_condition.as_ref(),
            SlotKey::Sr2 => self.sr2_subject.as_ref(),
            SlotKey::Sr3 => self.sr3_action.as_ref(),
            SlotKey::Sr4 => self.sr4_object.as_ref(),
            SlotKey::Sr5 => self.sr5_constraint.as_ref(),
        }
    }

    pub fn slot_mut(&mut self, key: SlotKey) -> &mut Option<SlotValue> {
        match key {
            SlotKey::Sr1 => &mut self.sr1_condition,
            SlotKey::Sr2 => &mut self.sr2_subject,
            SlotKey::Sr3 => &mut self.sr3_action,
            SlotKey::Sr4 => &mut self.sr4_object,
            SlotKey::Sr5 => &mut self.sr5_constraint,
        }
    }

    pub fn is_filled(&self, key: SlotKey) -> bool {
        self.slot(key).is_some_and(|s| !s.text.trim().is_empty())
    }

    pub fn missing_mandatory(&self) -> Vec<SlotKey> {
        self.pattern
            .mandatory_slots()
            .iter()
            .copied()
            .filter(|k| !self.is_filled(*k))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_mandatory().is_empty()
    }

    /// First word of the action slot.
    pub fn action_head(&self) -> Option<&str> {
        self.sr3_action.as_ref()?.text.split_whitespace().next()
    }

    /// Bound slots as `(slot, element_id)`, in key order.
    pub fn bindings(&self) -> impl Iterator<Item = (SlotKey, &str)> + '_ {
        SlotKey::ALL
            .iter()
            .filter_map(|k| Some((*k, self.slot(*k)?.binding.as_deref()?)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeValue {
    Enum(String),
    Text(String),
    ElementRef(String),
    Timestamp(Timestamp),
}

impl AttributeValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            AttributeValue::Enum(_) => ValueKind::Enum,
            AttributeValue::Text(_) => ValueKind::Text,
            AttributeValue::ElementRef(_) => ValueKind::ElementRef,
            AttributeValue::Timestamp(_) => ValueKind::Timestamp,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttributeValue::Enum(s) | AttributeValue::Text(s) | AttributeValue::ElementRef(s) => Some(s),
            AttributeValue::Timestamp(_) => None,
        }
    }

    /// Free text, the only kind searched for open items.
    pub fn free_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementExpression {
    pub id: String,
    pub name: String,
    pub text: String,
    pub statement: Option<StructuredStatement>,
    pub attributes: BTreeMap<String, AttributeValue>,
    pub element_kind: ExpressionKind,
}

impl RequirementExpression {
    pub fn new(id: impl Into<String>, name: impl Into<String>, text: impl Into<String>) -> Self {
        RequirementExpression {
            id: id.into(),
            name: name.into(),
            text: text.into(),
            statement: None,
            attributes: BTreeMap::new(),
            element_kind: ExpressionKind::Requirement,
        }
    }

    pub fn need(id: impl Into<String>, name: impl Into<String>, text: impl Into<String>) -> Self {
        RequirementExpression {
            element_kind: ExpressionKind::Need,
            ..Self::new(id, name, text)
        }
    }

    pub fn with_attribute(mut self, key: &str, value: AttributeValue) -> Self {
        self.attributes.insert(key.to_string(), value);
        self
    }

    pub fn with_statement(mut self, statement: StructuredStatement) -> Self {
        self.statement = Some(statement);
        self
    }
}

/// A set is an expression with an ordered member list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementSet {
    pub expression: RequirementExpression,
    pub members: Vec<String>,
}

impl RequirementSet {
    pub fn new(id: impl Into<String>, name: impl Into<String>, members: &[&str]) -> Self {
        RequirementSet {
            expression: RequirementExpression::new(id, name, ""),
            members: members.iter().map(|m| m.to_string()).collect(),
        }
    }

    pub fn id(&self) -> &str {
        &self.expression.id
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid id `{0}`")]
    InvalidId(String),
    #[error("element `{0}` has an empty name")]
    EmptyName(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("unknown model element `{0}`")]
    UnknownElement(String),
    #[error("unknown attribute key `{0}`")]
    UnknownAttributeKey(String),
    #[error("`{token}` is not a declared value of {key}")]
    InvalidAttributeToken { key: String, token: String },
    #[error("attribute {key} expects a {expected} value")]
    AttributeKindMismatch { key: String, expected: ValueKind },
    #[error("attribute {0} is derived and cannot be set")]
    DerivedAttribute(String),
    #[error("set `{set}` references unknown member `{member}`")]
    UnknownMember { set: String, member: String },
    #[error("set membership cycle through `{0}`")]
    MembershipCycle(String),
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
    #[error("statement of `{id}` is invalid: {reason}")]
    InvalidStatement { id: String, reason: String },
    #[error("`{0}` is a read-only copy")]
    ReadOnlyCopy(String),
    #[error("unknown link endpoint `{0}`")]
    UnknownEndpoint(String),
    #[error("{kind} link not allowed: {reason}")]
    KindConstraintViolation { kind: LinkKind, reason: String },
    #[error("{kind} link {source_id} -> {target_id} would close a cycle")]
    CycleDetected {
        kind: LinkKind,
        source_id: String,
        target_id: String,
    },
    #[error("Trace link {source_id} -> {target_id} is discouraged; use a specific relationship")]
    TraceDiscouraged { source_id: String, target_id: String },
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error(transparent)]
    Glossary(#[from] GlossaryError),
}

/// Expression/set/element id grammar: `[A-Za-z0-9][A-Za-z0-9._-]*`.
pub fn is_valid_id(id: &str) -> bool {
    let mut chars = id.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphanumeric())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

pub struct Model {
    catalog: Arc<Catalog>,
    uuid: Option<String>,
    pub(crate) elements: BTreeMap<String, ModelElement>,
    pub(crate) expressions: BTreeMap<String, RequirementExpression>,
    pub(crate) sets: BTreeMap<String, RequirementSet>,
    pub(crate) glossary: Glossary,
    pub(crate) links: BTreeMap<String, TraceLink>,
    external_ids: BTreeMap<String, String>,
    clock: Option<Arc<dyn Clock>>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("uuid", &self.uuid)
            .field("elements", &self.elements)
            .field("expressions", &self.expressions)
            .field("sets", &self.sets)
            .field("glossary", &self.glossary)
            .field("links", &self.links)
            .field("external_ids", &self.external_ids)
            .finish_non_exhaustive()
    }
}

impl Clone for Model {
    fn clone(&self) -> Self {
        Model {
            catalog: self.catalog.clone(),
            uuid: self.uuid.clone(),
            elements: self.elements.clone(),
            expressions: self.expressions.clone(),
            sets: self.sets.clone(),
            glossary: self.glossary.clone(),
            links: self.links.clone(),
            external_ids: self.external_ids.clone(),
            clock: self.clock.clone(),
        }
    }
}

/// Content equality; the clock is not part of the model's content.
impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        *self.catalog == *other.catalog
            && self.uuid == other.uuid
            && self.elements == other.elements
            && self.expressions == other.expressions
            && self.sets == other.sets
            && self.glossary == other.glossary
            && self.links == other.links
            && self.external_ids == other.external_ids
    }
}

impl Default for Model {
    fn default() -> Self {
        Model::new(Arc::new(Catalog::default()))
    }
}

impl Model {
    pub fn new(catalog: Arc<Catalog>) -> Self {
        let glossary = Glossary::new(catalog.options.glossary_case_insensitive);
        Model {
            catalog,
            uuid: None,
            elements: BTreeMap::new(),
            expressions: BTreeMap::new(),
            sets: BTreeMap::new(),
            glossary,
            links: BTreeMap::new(),
            external_ids: BTreeMap::new(),
            clock: None,
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn catalog_arc(&self) -> Arc<Catalog> {
        self.catalog.clone()
    }

    pub fn uuid(&self) -> Option<&str> {
        self.uuid.as_deref()
    }

    pub fn set_uuid(&mut self, uuid: Option<String>) {
        self.uuid = uuid;
    }

    /// Install a clock; while present every expression mutation stamps A14.
    pub fn set_clock(&mut self, clock: Arc<dyn Clock>) {
        self.clock = Some(clock);
    }

    pub fn clear_clock(&mut self) {
        self.clock = None;
    }

    pub fn glossary(&self) -> &Glossary {
        &self.glossary
    }

    /// Interchange identifier (e.g. an XMI id) pinned for an element or expression.
    pub fn external_id(&self, id: &str) -> Option<&str> {
        self.external_ids.get(id).map(String::as_str)
    }

    pub fn external_ids(&self) -> &BTreeMap<String, String> {
        &self.external_ids
    }

    pub fn set_external_id(&mut self, id: &str, external: impl Into<String>) -> Result<(), ModelError> {
        if !self.id_taken(id) {
            return Err(ModelError::UnknownId(id.to_string()));
        }
        self.external_ids.insert(id.to_string(), external.into());
        Ok(())
    }

    fn id_taken(&self, id: &str) -> bool {
        self.elements.contains_key(id) || self.expressions.contains_key(id) || self.sets.contains_key(id)
    }

    fn check_new_id(&self, id: &str) -> Result<(), ModelError> {
        if !is_valid_id(id) {
            return Err(ModelError::InvalidId(id.to_string()));
        }
        if self.id_taken(id) {
            return Err(ModelError::DuplicateId(id.to_string()));
        }
        Ok(())
    }

    pub fn elements(&self) -> impl Iterator<Item = &ModelElement> {
        self.elements.values()
    }

    pub fn element(&self, id: &str) -> Option<&ModelElement> {
        self.elements.get(id)
    }

    /// Leaf expressions (not sets), ordered by id.
    pub fn expressions(&self) -> impl Iterator<Item = &RequirementExpression> {
        self.expressions.values()
    }

    pub fn sets(&self) -> impl Iterator<Item = &RequirementSet> {
        self.sets.values()
    }

    pub fn set(&self, id: &str) -> Option<&RequirementSet> {
        self.sets.get(id)
    }

    /// Any expression by id, including sets.
    pub fn expression(&self, id: &str) -> Option<&RequirementExpression> {
        self.expressions
            .get(id)
            .or_else(|| self.sets.get(id).map(|s| &s.expression))
    }

    fn expression_mut(&mut self, id: &str) -> Option<&mut RequirementExpression> {
        match self.expressions.get_mut(id) {
            Some(e) => Some(e),
            None => self.sets.get_mut(id).map(|s| &mut s.expression),
        }
    }

    pub fn add_element(&mut self, element: ModelElement) -> Result<(), ModelError> {
        self.check_new_id(&element.element_id)?;
        if element.name.trim().is_empty() {
            return Err(ModelError::EmptyName(element.element_id));
        }
        self.elements.insert(element.element_id.clone(), element);
        Ok(())
    }

    pub fn add_term(&mut self, term: GlossaryTerm) -> Result<(), ModelError> {
        if let Some(missing) = term.allocations.iter().find(|a| !self.elements.contains_key(*a)) {
            return Err(ModelError::UnknownElement(missing.clone()));
        }
        self.glossary.add_term(term)?;
        Ok(())
    }

    pub fn add_expression(&mut self, mut expression: RequirementExpression) -> Result<(), ModelError> {
        self.check_new_id(&expression.id)?;
        self.validate_expression(&expression)?;
        self.stamp(&mut expression);
        self.expressions.insert(expression.id.clone(), expression);
        Ok(())
    }

    pub fn add_set(&mut self, mut set: RequirementSet) -> Result<(), ModelError> {
        let id = set.id().to_string();
        self.check_new_id(&id)?;
        if set.members.contains(&id) {
            return Err(ModelError::MembershipCycle(id));
        }
        let mut seen = BTreeSet::new();
        for member in &set.members {
            if !self.expressions.contains_key(member) && !self.sets.contains_key(member) {
                return Err(ModelError::UnknownMember {
                    set: id,
                    member: member.clone(),
                });
            }
            if !seen.insert(member) {
                return Err(ModelError::DuplicateId(member.clone()));
            }
        }
        self.validate_expression(&set.expression)?;
        self.stamp(&mut set.expression);
        self.sets.insert(id, set);
        Ok(())
    }

    /// Append `member` to `set_id`, rejecting membership cycles.
    pub fn add_member(&mut self, set_id: &str, member: &str) -> Result<(), ModelError> {
        let set = self
            .sets
            .get(set_id)
            .ok_or_else(|| ModelError::UnknownId(set_id.to_string()))?;
        if self.expression(member).is_none() {
            return Err(ModelError::UnknownMember {
                set: set_id.to_string(),
                member: member.to_string(),
            });
        }
        if set.members.iter().any(|m| m == member) {
            return Err(ModelError::DuplicateId(member.to_string()));
        }
        if member == set_id
            || (self.sets.contains_key(member) && self.transitive_members(member)?.iter().any(|m| m == set_id))
        {
            return Err(ModelError::MembershipCycle(set_id.to_string()));
        }
        let set = self.sets.get_mut(set_id).expect("checked above");
        set.members.push(member.to_string());
        let mut expression = set.expression.clone();
        self.stamp(&mut expression);
        self.sets.get_mut(set_id).expect("checked above").expression = expression;
        Ok(())
    }

    fn validate_expression(&self, e: &RequirementExpression) -> Result<(), ModelError> {
        for (key, value) in &e.attributes {
            self.validate_attribute(key, value)?;
        }
        if let Some(statement) = &e.statement {
            self.validate_statement(e, statement)?;
        }
        Ok(())
    }

    fn validate_attribute(&self, key: &str, value: &AttributeValue) -> Result<(), ModelError> {
        let def = self
            .catalog
            .attribute(key)
            .ok_or_else(|| ModelError::UnknownAttributeKey(key.to_string()))?;
        if def.derived {
            return Err(ModelError::DerivedAttribute(key.to_string()));
        }
        if value.kind() != def.value_kind {
            return Err(ModelError::AttributeKindMismatch {
                key: key.to_string(),
                expected: def.value_kind,
            });
        }
        match value {
            AttributeValue::Enum(token) if !def.value_set.iter().any(|v| v == token) => {
                Err(ModelError::InvalidAttributeToken {
                    key: key.to_string(),
                    token: token.clone(),
                })
            }
            AttributeValue::ElementRef(id) if !self.elements.contains_key(id) => {
                Err(ModelError::UnknownElement(id.clone()))
            }
            _ => Ok(()),
        }
    }

    fn validate_statement(&self, e: &RequirementExpression, statement: &StructuredStatement) -> Result<(), ModelError> {
        let invalid = |reason: String| ModelError::InvalidStatement {
            id: e.id.clone(),
            reason,
        };
        if e.element_kind == ExpressionKind::Need {
            return Err(invalid("needs carry no structured statement".to_string()));
        }
        for key in SlotKey::ALL {
            if let Some(slot) = statement.slot(*key) {
                if slot.text.trim().is_empty() {
                    return Err(invalid(alloc::format!("{key} is present but empty")));
                }
                if let Some(b) = &slot.binding {
                    if !self.elements.contains_key(b) {
                        return Err(ModelError::UnknownElement(b.clone()));
                    }
                }
            }
        }
        let rendered = parser::render_statement(statement).map_err(|err| invalid(err.to_string()))?;
        if rendered != normalize_whitespace(&e.text) {
            return Err(invalid(alloc::format!("slots render `{rendered}`, text differs")));
        }
        Ok(())
    }

    fn stamp(&self, expression: &mut RequirementExpression) {
        if let Some(clock) = &self.clock {
            expression
                .attributes
                .insert("A14".to_string(), AttributeValue::Timestamp(clock.now()));
        }
    }

    /// Attribute lookup; A15 and A16 are derived from id and name.
    pub fn get_attribute(&self, id: &str, key: &str) -> Result<Option<AttributeValue>, ModelError> {
        let e = self
            .expression(id)
            .ok_or_else(|| ModelError::UnknownId(id.to_string()))?;
        if self.catalog.attribute(key).is_none() {
            return Err(ModelError::UnknownAttributeKey(key.to_string()));
        }
        Ok(match key {
            "A15" => Some(AttributeValue::Text(e.id.clone())),
            "A16" => Some(AttributeValue::Text(e.name.clone())),
            _ => e.attributes.get(key).cloned(),
        })
    }

    pub fn set_attribute(&mut self, id: &str, key: &str, value: Option<AttributeValue>) -> Result<(), ModelError> {
        if self.expression(id).is_none() {
            return Err(ModelError::UnknownId(id.to_string()));
        }
        match &value {
            Some(v) => self.validate_attribute(key, v)?,
            None if self.catalog.attribute(key).is_none() => {
                return Err(ModelError::UnknownAttributeKey(key.to_string()))
            }
            None => {}
        }
        let mut e = self.expression(id).expect("checked above").clone();
        match value {
            Some(v) => e.attributes.insert(key.to_string(), v),
            None => e.attributes.remove(key),
        };
        self.stamp(&mut e);
        *self.expression_mut(id).expect("checked above") = e;
        Ok(())
    }

    pub fn set_name(&mut self, id: &str, name: impl Into<String>) -> Result<(), ModelError> {
        let mut e = self
            .expression(id)
            .ok_or_else(|| ModelError::UnknownId(id.to_string()))?
            .clone();
        e.name = name.into();
        self.stamp(&mut e);
        *self.expression_mut(id).expect("checked above") = e;
        Ok(())
    }

    /// Replace the statement text. A stored structured statement no longer
    /// matching the new text is dropped. Copies of this expression follow.
    pub fn set_text(&mut self, id: &str, text: impl Into<String>) -> Result<(), ModelError> {
        let text = text.into();
        let e = self
            .expression(id)
            .ok_or_else(|| ModelError::UnknownId(id.to_string()))?;
        if self.copy_origin(id).is_some() {
            return Err(ModelError::ReadOnlyCopy(id.to_string()));
        }
        let statement = e
            .statement
            .clone()
            .filter(|st| parser::render_statement(st).is_ok_and(|r| r == normalize_whitespace(&text)));
        self.write_text(id, text, statement);
        Ok(())
    }

    /// Store slots and regenerate the text from them (derived text).
    pub fn set_statement(&mut self, id: &str, statement: StructuredStatement) -> Result<(), ModelError> {
        let e = self
            .expression(id)
            .ok_or_else(|| ModelError::UnknownId(id.to_string()))?;
        if self.copy_origin(id).is_some() {
            return Err(ModelError::ReadOnlyCopy(id.to_string()));
        }
        let text = parser::render_statement(&statement).map_err(|err| ModelError::InvalidStatement {
            id: id.to_string(),
            reason: err.to_string(),
        })?;
        let mut candidate = e.clone();
        candidate.text = text.clone();
        self.validate_statement(&candidate, &statement)?;
        self.write_text(id, text, Some(statement));
        Ok(())
    }

    pub(crate) fn write_text(&mut self, id: &str, text: String, statement: Option<StructuredStatement>) {
        let mut pending = alloc::vec![id.to_string()];
        let mut visited = BTreeSet::new();
        while let Some(current) = pending.pop() {
            if !visited.insert(current.clone()) {
                continue;
            }
            if let Some(mut e) = self.expression(&current).cloned() {
                e.text = text.clone();
                // a Need mirrors the words only
                e.statement = statement.clone().filter(|_| e.element_kind != ExpressionKind::Need);
                self.stamp(&mut e);
                *self.expression_mut(&current).expect("exists") = e;
            }
            pending.extend(self.copies_of(&current));
        }
    }

    /// The original an expression was copied from, if it is a Copy source.
    pub fn copy_origin(&self, id: &str) -> Option<&str> {
        self.links
            .values()
            .find(|l| l.kind == LinkKind::Copy && l.source.id() == id)
            .map(|l| l.target.id())
    }

    /// Direct copies of `id`.
    pub fn copies_of(&self, id: &str) -> Vec<String> {
        self.links
            .values()
            .filter(|l| l.kind == LinkKind::Copy && l.target.id() == id)
            .map(|l| l.source.id().to_owned())
            .collect()
    }

    /// Every member reachable from a set, nested sets included, each once (pre-order).
    pub fn transitive_members(&self, set_id: &str) -> Result<Vec<String>, ModelError> {
        let set = self
            .sets
            .get(set_id)
            .ok_or_else(|| ModelError::UnknownId(set_id.to_string()))?;
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        seen.insert(set_id.to_string());
        let mut stack: Vec<&str> = set.members.iter().rev().map(String::as_str).collect();
        while let Some(m) = stack.pop() {
            if !seen.insert(m.to_string()) {
                continue;
            }
            out.push(m.to_string());
            if let Some(nested) = self.sets.get(m) {
                stack.extend(nested.members.iter().rev().map(String::as_str));
            }
        }
        Ok(out)
    }

    /// Sets that list `id` as a direct member.
    pub fn containing_sets(&self, id: &str) -> Vec<&str> {
        self.sets
            .values()
            .filter(|s| s.members.iter().any(|m| m == id))
            .map(|s| s.id())
            .collect()
    }

    /// Leaf expressions in a scope, ordered by id. `None` is the whole model; a
    /// set id expands transitively; a plain expression id is a singleton scope.
    pub fn scope_members(&self, scope: Option<&str>) -> Result<Vec<&RequirementExpression>, ModelError> {
        match scope {
            None => Ok(self.expressions.values().collect()),
            Some(id) if self.sets.contains_key(id) => {
                let mut members: Vec<&RequirementExpression> = self
                    .transitive_members(id)?
                    .iter()
                    .filter_map(|m| self.expressions.get(m))
                    .collect();
                members.sort_by(|a, b| a.id.cmp(&b.id));
                Ok(members)
            }
            Some(id) => self
                .expressions
                .get(id)
                .map(|e| alloc::vec![e])
                .ok_or_else(|| ModelError::UnknownScope(id.to_string())),
        }
    }

    /// Stored statement, or the parser's reading of the text (with slots bound
    /// to glossary allocations and same-named elements).
    pub fn effective_statement(&self, id: &str) -> Option<StructuredStatement> {
        let e = self.expression(id)?;
        if e.element_kind == ExpressionKind::Need {
            return None;
        }
        if let Some(st) = &e.statement {
            return Some(st.clone());
        }
        let mut st = parser::analyze_statement(&e.text, &self.glossary, &self.catalog).statement?;
        self.bind_elements(&mut st);
        Some(st)
    }

    /// Bind unbound slots whose text is exactly a model element name.
    pub fn bind_elements(&self, statement: &mut StructuredStatement) {
        for key in SlotKey::ALL {
            if let Some(slot) = statement.slot_mut(*key) {
                if slot.binding.is_none() {
                    slot.binding = self
                        .elements
                        .values()
                        .find(|el| el.name == slot.text)
                        .map(|el| el.element_id.clone());
                }
            }
        }
    }

    pub(crate) fn resolve_node(&self, id: &str) -> Option<NodeRef> {
        if let Some(rule) = id.strip_prefix("rule:") {
            return (self.catalog.rule(rule).is_some() || rule == crate::rules::TBX_RULE_ID)
                .then(|| NodeRef::Rule(rule.to_string()));
        }
        if let Some(c) = id.strip_prefix("characteristic:") {
            return self
                .catalog
                .characteristic(c)
                .map(|_| NodeRef::Characteristic(c.to_string()));
        }
        if self.expression(id).is_some() {
            Some(NodeRef::Expression(id.to_string()))
        } else if self.elements.contains_key(id) {
            Some(NodeRef::Element(id.to_string()))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig6_text() -> &'static str {
        "While in the Sample_Collection mode, the Spacecraft shall collect Asteroid_A_Regolith with Regolith_Sample_Mass target between 0.5 kg and 1 kg."
    }

    fn fig6() -> RequirementExpression {
        RequirementExpression::new("L3-EX.1", "Collect Regolith", fig6_text())
            .with_attribute("A40", AttributeValue::Text("Functional".into()))
            .with_attribute("A08", AttributeValue::Enum("Test".into()))
    }

    #[test]
    fn add_and_read_derived_identity() {
        let mut m = Model::default();
        m.add_expression(fig6()).unwrap();
        assert_eq!(
            m.get_attribute("L3-EX.1", "A15").unwrap(),
            Some(AttributeValue::Text("L3-EX.1".into()))
        );
        assert_eq!(
            m.get_attribute("L3-EX.1", "A16").unwrap(),
            Some(AttributeValue::Text("Collect Regolith".into()))
        );
        assert_eq!(
            m.get_attribute("L3-EX.1", "A08").unwrap(),
            Some(AttributeValue::Enum("Test".into()))
        );
        assert_eq!(
            m.get_attribute("L3-EX.1", "A40").unwrap().unwrap().as_str(),
            Some("Functional")
        );
    }

    #[test]
    fn duplicate_and_bad_tokens() {
        let mut m = Model::default();
        m.add_expression(fig6()).unwrap();
        assert_eq!(m.add_expression(fig6()), Err(ModelError::DuplicateId("L3-EX.1".into())));
        let bad =
            RequirementExpression::new("R2", "", "x").with_attribute("A34", AttributeValue::Enum("Highest".into()));
        assert!(matches!(
            m.add_expression(bad),
            Err(ModelError::InvalidAttributeToken { .. })
        ));
        assert!(m.expression("R2").is_none());
    }

    #[test]
    fn unknown_attribute_keys() {
        let mut m = Model::default();
        m.add_expression(fig6()).unwrap();
        assert_eq!(
            m.get_attribute("L3-EX.1", "A99"),
            Err(ModelError::UnknownAttributeKey("A99".into()))
        );
        assert_eq!(
            m.get_attribute("nope", "A01"),
            Err(ModelError::UnknownId("nope".into()))
        );
        let derived =
            RequirementExpression::new("R3", "", "x").with_attribute("A15", AttributeValue::Text("R3".into()));
        assert_eq!(
            m.add_expression(derived),
            Err(ModelError::DerivedAttribute("A15".into()))
        );
    }

    #[test]
    fn id_grammar() {
        assert!(is_valid_id("L3-EX.1"));
        assert!(is_valid_id("r_2"));
        assert!(!is_valid_id("-x"));
        assert!(!is_valid_id("a b"));
        assert!(!is_valid_id(""));
        let mut m = Model::default();
        assert_eq!(
            m.add_expression(RequirementExpression::new("bad id", "", "x")),
            Err(ModelError::InvalidId("bad id".into()))
        );
    }

    #[test]
    fn set_membership() {
        let mut m = Model::default();
        for id in ["R1", "R2", "R3"] {
            m.add_expression(RequirementExpression::new(id, id, "t")).unwrap();
        }
        m.add_set(RequirementSet::new("S1", "s1", &["R1", "R2"])).unwrap();
        m.add_set(RequirementSet::new("S0", "s0", &["S1", "R3"])).unwrap();
        assert_eq!(m.transitive_members("S0").unwrap(), ["S1", "R1", "R2", "R3"]);
        assert_eq!(m.get_attribute("S0", "A15").unwrap().unwrap().as_str(), Some("S0"));
        assert_eq!(
            m.add_set(RequirementSet::new("S2", "s2", &["S2"])),
            Err(ModelError::MembershipCycle("S2".into()))
        );
        assert!(matches!(
            m.add_set(RequirementSet::new("S3", "s3", &["R99"])),
            Err(ModelError::UnknownMember { .. })
        ));
        assert_eq!(m.add_member("S1", "S0"), Err(ModelError::MembershipCycle("S1".into())));
        let ids: Vec<_> = m
            .scope_members(Some("S0"))
            .unwrap()
            .iter()
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(ids, ["R1", "R2", "R3"]);
        assert_eq!(
            m.scope_members(Some("nope")).unwrap_err(),
            ModelError::UnknownScope("nope".into())
        );
    }

    #[test]
    fn clock_stamps_date_of_last_change() {
        let mut m = Model::default();
        m.set_clock(Arc::new(SteppingClock::new(Timestamp(100), 10)));
        m.add_expression(fig6()).unwrap();
        assert_eq!(
            m.get_attribute("L3-EX.1", "A14").unwrap(),
            Some(AttributeValue::Timestamp(Timestamp(100)))
        );
        m.set_attribute("L3-EX.1", "A34", Some(AttributeValue::Enum("High".into())))
            .unwrap();
        assert_eq!(
            m.get_attribute("L3-EX.1", "A14").unwrap(),
            Some(AttributeValue::Timestamp(Timestamp(110)))
        );
        // failed mutation leaves model untouched
        let before = m.clone();
        assert!(m
            .set_attribute("L3-EX.1", "A34", Some(AttributeValue::Enum("Top".into())))
            .is_err());
        assert_eq!(m, before);
    }

    #[test]
    fn statement_must_render_to_text() {
        let mut m = Model::default();
        let st = StructuredStatement::new(PatternId::Iso1)
            .with_slot(SlotKey::Sr2, SlotValue::text("Spacecraft"))
            .with_slot(SlotKey::Sr3, SlotValue::text("transmit telemetry"))
            .with_slot(SlotKey::Sr5, SlotValue::text("at 2 kbps minimum"));
        let ok = RequirementExpression::new("T1", "", "The Spacecraft shall transmit  telemetry at 2 kbps minimum.")
            .with_statement(st.clone());
        m.add_expression(ok).unwrap();
        let bad = RequirementExpression::new("T2", "", "Something else.").with_statement(st.clone());
        assert!(matches!(
            m.add_expression(bad),
            Err(ModelError::InvalidStatement { .. })
        ));
        let need = RequirementExpression::need("N1", "", "The Spacecraft shall transmit telemetry at 2 kbps minimum.")
            .with_statement(st);
        assert!(matches!(
            m.add_expression(need),
            Err(ModelError::InvalidStatement { .. })
        ));
    }

    #[test]
    fn set_statement_regenerates_text() {
        let mut m = Model::default();
        m.add_expression(RequirementExpression::new("T1", "", "draft")).unwrap();
        let st = StructuredStatement::new(PatternId::Iso1)
            .with_slot(SlotKey::Sr2, SlotValue::text("Rover"))
            .with_slot(SlotKey::Sr3, SlotValue::text("drive"))
            .with_slot(SlotKey::Sr5, SlotValue::text("at least 10 m per sol"));
        m.set_statement("T1", st).unwrap();
        assert_eq!(
            m.expression("T1").unwrap().text,
            "The Rover shall drive at least 10 m per sol."
        );
        m.set_text("T1", "changed").unwrap();
        assert!(m.expression("T1").unwrap().statement.is_none());
    }

    #[test]
    fn effective_statement_parses_and_binds() {
        let mut m = Model::default();
        m.add_element(ModelElement::new("sc", "Spacecraft", ElementKind::Block))
            .unwrap();
        m.add_expression(fig6()).unwrap();
        let st = m.effective_statement("L3-EX.1").unwrap();
        assert_eq!(st.pattern, PatternId::Iso2);
        assert_eq!(st.sr2_subject.unwrap().binding.as_deref(), Some("sc"));
    }

    #[test]
    fn elements_need_names() {
        let mut m = Model::default();
        assert_eq!(
            m.add_element(ModelElement::new("e1", "  ", ElementKind::Other)),
            Err(ModelError::EmptyName("e1".into()))
        );
    }
}
