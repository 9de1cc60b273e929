//! Registries for rules, characteristics, attributes and statement patterns.
//!
//! The default catalog is built in code. Organizations adjust it with
//! per-section overrides (see [`Catalog::apply_override`]); the result is
//! always re-validated before use.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{PatternId, SlotKey};

/// Rules that have a checker in the rules engine.
pub const AUTOMATED_CHECKERS: [&str; 4] = ["R1", "R2", "R10", "R16"];

pub const RULE_COUNT: usize = 42;
pub const CHARACTERISTIC_COUNT: usize = 15;
pub const GTWR_ATTRIBUTE_COUNT: usize = 49;

const CONDITION_MARKERS: [&str; 7] = ["While", "When", "If", "During", "Where", "Upon", "Under"];
const CONSTRAINT_MARKERS: [&str; 12] = [
    "with",
    "within",
    "in less than",
    "in under",
    "at least",
    "at most",
    "no more than",
    "no less than",
    "between",
    "to within",
    "every",
    "per",
];
const IRREGULAR_PARTICIPLES: [&str; 11] = [
    "done", "made", "given", "taken", "sent", "held", "kept", "set", "put", "built", "shown",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("[{section}] {message}")]
    Parse { section: String, message: String },
    #[error("catalog invariant violated: {0}")]
    InvariantViolation(String),
}

fn parse_err(section: &str, id: &str, message: impl Into<String>) -> CatalogError {
    let section = if id.is_empty() {
        section.to_string()
    } else {
        format!("{section} {id}")
    };
    CatalogError::Parse {
        section,
        message: message.into(),
    }
}

fn violation(message: impl Into<String>) -> CatalogError {
    CatalogError::InvariantViolation(message.into())
}

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl ::core::fmt::Display for $name {
            fn fmt(&self, f: &mut ::core::fmt::Formatter<'_>) -> ::core::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl ::core::str::FromStr for $name {
            type Err = ::alloc::string::String;

            fn from_str(s: &str) -> ::core::result::Result<Self, Self::Err> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
                    .ok_or_else(|| ::alloc::format!("unknown {} `{}`", stringify!($name), s))
            }
        }
    };
}
pub(crate) use token_enum;

token_enum!(Automation {
    Automated => "Automated",
    Manual => "Manual",
});

token_enum!(
    /// Whether a characteristic applies to individual needs/requirements or to sets of them.
    Applicability {
        Individual => "Individual",
        Set => "Set",
    }
);

token_enum!(Derivation {
    FormalTransformation => "FormalTransformation",
    AgreedToObligation => "AgreedToObligation",
});

token_enum!(ValueKind {
    Enum => "Enum",
    Text => "Text",
    ElementRef => "ElementRef",
    Timestamp => "Timestamp",
});

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDef {
    pub rule_id: String,
    pub name: String,
    pub description: String,
    pub automation: Automation,
    pub contributes_to: BTreeSet<String>,
    /// Phrase list used by the rule's checker (forbidden phrases, participles, ...).
    pub phrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicDef {
    pub characteristic_id: String,
    pub name: String,
    pub applicability: Applicability,
    pub derivation: Derivation,
    pub nasa_mapped: bool,
    pub iso_mapped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub attribute_key: String,
    pub name: String,
    pub group: String,
    pub minimum_set: bool,
    pub value_kind: ValueKind,
    pub value_set: Vec<String>,
    /// Computed from the expression itself (A15, A16); never stored.
    pub derived: bool,
}

impl AttributeDef {
    fn new(key: &str, name: &str, minimum_set: bool, value_kind: ValueKind, values: &[&str]) -> Self {
        AttributeDef {
            attribute_key: key.to_string(),
            name: name.to_string(),
            group: "GtWR".to_string(),
            minimum_set,
            value_kind,
            value_set: values.iter().map(|v| v.to_string()).collect(),
            derived: false,
        }
    }

    /// Display name; members of the minimum set carry a trailing `*`.
    pub fn display_name(&self) -> String {
        if self.minimum_set {
            format!("{}*", self.name)
        } else {
            self.name.clone()
        }
    }

    /// XML attribute name: key, `_`, then the display name with every
    /// non-alphanumeric character replaced by `_`.
    /// `A08` "System V&V Primary Method*" becomes `A08_System_V_V_Primary_Method_`.
    pub fn mangled_name(&self) -> String {
        let mangled: String = self
            .display_name()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        format!("{}_{}", self.attribute_key, mangled)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDef {
    pub pattern_id: PatternId,
    pub slot_order: Vec<SlotKey>,
    /// Leading keywords per slot: condition markers for SR1, constraint markers for SR5.
    pub connective_words: BTreeMap<SlotKey, Vec<String>>,
}

impl PatternDef {
    pub fn connectives(&self, slot: SlotKey) -> &[String] {
        self.connective_words.get(&slot).map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogOptions {
    pub glossary_case_insensitive: bool,
    pub forbid_trace: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    rules: Vec<RuleDef>,
    characteristics: Vec<CharacteristicDef>,
    attributes: Vec<AttributeDef>,
    patterns: Vec<PatternDef>,
    pub options: CatalogOptions,
}

/// Sort key for attribute keys: GtWR `A..` first, then organization `X..`.
fn attribute_order(key: &str) -> (u8, u32) {
    let prefix = if key.starts_with('A') { 0 } else { 1 };
    (prefix, key[1..].parse().unwrap_or(u32::MAX))
}

fn numbered(id: &str, prefix: char) -> Option<u32> {
    let rest = id.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse().ok()
}

/// `A01`..`A49` (two digits) or organization extensions `X` followed by digits.
pub fn is_valid_attribute_key(key: &str) -> bool {
    match key.as_bytes() {
        [b'A', a, b] if a.is_ascii_digit() && b.is_ascii_digit() => {
            let n = (a - b'0') * 10 + (b - b'0');
            (1..=GTWR_ATTRIBUTE_COUNT as u8).contains(&n)
        }
        [b'X', rest @ ..] => !rest.is_empty() && rest.iter().all(u8::is_ascii_digit),
        _ => false,
    }
}

fn parse_bool(section: &str, id: &str, value: &str) -> Result<bool, CatalogError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        other => Err(parse_err(section, id, format!("expected true/false, got `{other}`"))),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(ToString::to_string)
        .collect()
}

fn default_rules() -> Vec<RuleDef> {
    let set = |ids: &[&str]| ids.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let list = |words: &[&str]| words.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    (1..=RULE_COUNT)
        .map(|n| {
            let rule_id = format!("R{n}");
            let (name, description, automation, contributes_to, phrases) = match n {
                1 => (
                    "Structured Statement",
                    "Statement matches a configured requirement pattern and uses exactly one 'shall'.",
                    Automation::Automated,
                    set(&["C3", "C4", "C5", "C7", "C9"]),
                    Vec::new(),
                ),
                2 => (
                    "Active Voice",
                    "No passive construction (form of 'be', past participle, 'by').",
                    Automation::Automated,
                    set(&["C3"]),
                    list(&IRREGULAR_PARTICIPLES),
                ),
                10 => (
                    "Superfluous Verbiage",
                    "No superfluous phrases such as 'be capable of' or 'be able to'.",
                    Automation::Automated,
                    set(&["C3"]),
                    list(&["be capable of", "be able to"]),
                ),
                16 => (
                    "No Shall Not",
                    "'shall not' is forbidden.",
                    Automation::Automated,
                    set(&["C3"]),
                    list(&["shall not"]),
                ),
                _ => ("", "", Automation::Manual, BTreeSet::new(), Vec::new()),
            };
            let name = if name.is_empty() {
                format!("GtWR Rule {rule_id}")
            } else {
                name.to_string()
            };
            RuleDef {
                rule_id,
                name,
                description: description.to_string(),
                automation,
                contributes_to,
                phrases,
            }
        })
        .collect()
}

fn default_characteristics() -> Vec<CharacteristicDef> {
    use Applicability::*;
    use Derivation::*;
    let table: [(&str, Applicability, Derivation, bool); CHARACTERISTIC_COUNT] = [
        ("Necessary", Individual, FormalTransformation, true),
        ("Appropriate", Individual, FormalTransformation, true),
        ("Unambiguous", Individual, AgreedToObligation, true),
        ("Complete", Individual, AgreedToObligation, true),
        ("Singular", Individual, FormalTransformation, true),
        ("Feasible", Individual, AgreedToObligation, true),
        ("Verifiable", Individual, AgreedToObligation, true),
        ("Correct", Individual, FormalTransformation, true),
        ("Conforming", Individual, FormalTransformation, true),
        ("Complete", Set, FormalTransformation, true),
        ("Consistent", Set, FormalTransformation, true),
        ("Feasible", Set, AgreedToObligation, true),
        ("Comprehensible", Set, AgreedToObligation, true),
        ("Able to be validated", Set, AgreedToObligation, true),
        ("Correct", Set, FormalTransformation, false),
    ];
    table
        .iter()
        .enumerate()
        .map(|(i, (name, applicability, derivation, iso))| CharacteristicDef {
            characteristic_id: format!("C{}", i + 1),
            name: name.to_string(),
            applicability: *applicability,
            derivation: *derivation,
            nasa_mapped: true,
            iso_mapped: *iso,
        })
        .collect()
}

fn default_attributes() -> Vec<AttributeDef> {
    use ValueKind::*;
    (1..=GTWR_ATTRIBUTE_COUNT)
        .map(|n| {
            let key = format!("A{n:02}");
            let mut def = match n {
                1 => AttributeDef::new(&key, "Rationale Statement", true, Text, &[]),
                8 => AttributeDef::new(
                    &key,
                    "System V&V Primary Method",
                    true,
                    Enum,
                    &["Test", "Analysis", "Inspection", "Demonstration"],
                ),
                10 => AttributeDef::new(&key, "System V&V Level", false, Text, &[]),
                14 => AttributeDef::new(&key, "Date of Last Change", false, Timestamp, &[]),
                15 => AttributeDef::new(&key, "Unique Identifier", true, Text, &[]),
                16 => AttributeDef::new(&key, "Unique Name", true, Text, &[]),
                28 => AttributeDef::new(
                    &key,
                    "Need or Requirement Verification Status",
                    true,
                    Enum,
                    &["NotStarted", "InProgress", "Complete"],
                ),
                30 => AttributeDef::new(
                    &key,
                    "Status of the Need or Requirement",
                    false,
                    Enum,
                    &["Draft", "Reviewed", "Approved", "Baselined"],
                ),
                34 => AttributeDef::new(&key, "Priority", true, Enum, &["High", "Medium", "Low"]),
                38 => AttributeDef::new(&key, "Key / Driving", false, Enum, &["K", "D", "K+D", "None"]),
                40 => AttributeDef::new(&key, "Type", true, Text, &[]),
                _ => AttributeDef::new(&key, &format!("GtWR Attribute {key}"), false, Text, &[]),
            };
            def.derived = n == 15 || n == 16;
            def
        })
        .collect()
}

fn default_patterns() -> Vec<PatternDef> {
    let words = |ws: &[&str]| ws.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    PatternId::ALL
        .iter()
        .map(|&pattern_id| {
            let mut connective_words = BTreeMap::new();
            match pattern_id {
                PatternId::Iso2 => {
                    connective_words.insert(SlotKey::Sr1, words(&CONDITION_MARKERS));
                }
                PatternId::Carson => {
                    connective_words.insert(SlotKey::Sr1, words(&["under"]));
                }
                PatternId::Iso1 => {}
            }
            connective_words.insert(SlotKey::Sr5, words(&CONSTRAINT_MARKERS));
            PatternDef {
                pattern_id,
                slot_order: pattern_id.slot_order().to_vec(),
                connective_words,
            }
        })
        .collect()
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog {
            rules: default_rules(),
            characteristics: default_characteristics(),
            attributes: default_attributes(),
            patterns: default_patterns(),
            options: CatalogOptions::default(),
        }
    }
}

impl Catalog {
    pub fn rules(&self) -> &[RuleDef] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&RuleDef> {
        self.rules.iter().find(|r| r.rule_id == id)
    }

    pub fn characteristics(&self) -> &[CharacteristicDef] {
        &self.characteristics
    }

    pub fn characteristic(&self, id: &str) -> Option<&CharacteristicDef> {
        self.characteristics.iter().find(|c| c.characteristic_id == id)
    }

    /// Characteristics for one applicability, in id order.
    pub fn characteristics_for(&self, applicability: Applicability) -> Vec<&CharacteristicDef> {
        self.characteristics
            .iter()
            .filter(|c| c.applicability == applicability)
            .collect()
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn attribute(&self, key: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.attribute_key == key)
    }

    /// Reverse of [`AttributeDef::mangled_name`].
    pub fn attribute_by_mangled_name(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.mangled_name() == name)
    }

    pub fn pattern(&self, id: PatternId) -> &PatternDef {
        self.patterns
            .iter()
            .find(|p| p.pattern_id == id)
            .expect("catalog always holds all three patterns")
    }

    pub fn is_automated(&self, rule_id: &str) -> bool {
        self.rule(rule_id)
            .is_some_and(|r| r.automation == Automation::Automated)
    }

    /// Load-time entry point: default catalog with every override applied, then validated.
    pub fn with_overrides<'a, I>(sections: I) -> Result<Catalog, CatalogError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a [(String, String)])>,
    {
        let mut catalog = Catalog::default();
        for (section, id, entries) in sections {
            catalog.apply_override(section, id, entries)?;
        }
        catalog.validate()?;
        Ok(catalog)
    }

    /// Apply one override section (`rule`, `characteristic`, `attribute`,
    /// `pattern` or `options`). Unknown ids declare new entries; whether that
    /// is allowed is decided by [`Catalog::validate`].
    pub fn apply_override(
        &mut self,
        section: &str,
        id: &str,
        entries: &[(String, String)],
    ) -> Result<(), CatalogError> {
        match section {
            "rule" => self.override_rule(id, entries),
            "characteristic" => self.override_characteristic(id, entries),
            "attribute" => self.override_attribute(id, entries),
            "pattern" => self.override_pattern(id, entries),
            "options" => self.override_options(entries),
            other => Err(parse_err(other, id, "unknown catalog section")),
        }
    }

    fn override_rule(&mut self, id: &str, entries: &[(String, String)]) -> Result<(), CatalogError> {
        let idx = match self.rules.iter().position(|r| r.rule_id == id) {
            Some(i) => i,
            None => {
                self.rules.push(RuleDef {
                    rule_id: id.to_string(),
                    name: format!("GtWR Rule {id}"),
                    description: String::new(),
                    automation: Automation::Manual,
                    contributes_to: BTreeSet::new(),
                    phrases: Vec::new(),
                });
                self.rules.len() - 1
            }
        };
        let rule = &mut self.rules[idx];
        for (key, value) in entries {
            match key.as_str() {
                "name" => rule.name = value.clone(),
                "description" => rule.description = value.clone(),
                "automation" => rule.automation = value.parse().map_err(|e: String| parse_err("rule", id, e))?,
                "contributes_to" => rule.contributes_to = parse_list(value).into_iter().collect(),
                "phrases" => rule.phrases = parse_list(value),
                other => return Err(parse_err("rule", id, format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    fn override_characteristic(&mut self, id: &str, entries: &[(String, String)]) -> Result<(), CatalogError> {
        let idx = match self.characteristics.iter().position(|c| c.characteristic_id == id) {
            Some(i) => i,
            None => {
                self.characteristics.push(CharacteristicDef {
                    characteristic_id: id.to_string(),
                    name: id.to_string(),
                    applicability: Applicability::Set,
                    derivation: Derivation::FormalTransformation,
                    nasa_mapped: false,
                    iso_mapped: false,
                });
                self.characteristics.len() - 1
            }
        };
        let c = &mut self.characteristics[idx];
        for (key, value) in entries {
            match key.as_str() {
                "name" => c.name = value.clone(),
                "applicability" => {
                    c.applicability = value.parse().map_err(|e: String| parse_err("characteristic", id, e))?
                }
                "derivation" => c.derivation = value.parse().map_err(|e: String| parse_err("characteristic", id, e))?,
                "nasa" => c.nasa_mapped = parse_bool("characteristic", id, value)?,
                "iso" => c.iso_mapped = parse_bool("characteristic", id, value)?,
                other => return Err(parse_err("characteristic", id, format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    fn override_attribute(&mut self, id: &str, entries: &[(String, String)]) -> Result<(), CatalogError> {
        let idx = match self.attributes.iter().position(|a| a.attribute_key == id) {
            Some(i) => i,
            None => {
                self.attributes
                    .push(AttributeDef::new(id, id, false, ValueKind::Text, &[]));
                self.attributes.len() - 1
            }
        };
        let a = &mut self.attributes[idx];
        for (key, value) in entries {
            match key.as_str() {
                "name" => a.name = value.clone(),
                "group" => a.group = value.clone(),
                "minimum_set" => a.minimum_set = parse_bool("attribute", id, value)?,
                "value_kind" => a.value_kind = value.parse().map_err(|e: String| parse_err("attribute", id, e))?,
                "values" => a.value_set = parse_list(value),
                other => return Err(parse_err("attribute", id, format!("unknown key `{other}`"))),
            }
        }
        self.attributes.sort_by_key(|x| attribute_order(&x.attribute_key));
        Ok(())
    }

    fn override_pattern(&mut self, id: &str, entries: &[(String, String)]) -> Result<(), CatalogError> {
        let pattern_id: PatternId = id.parse().map_err(|e: String| parse_err("pattern", id, e))?;
        let p = self
            .patterns
            .iter_mut()
            .find(|p| p.pattern_id == pattern_id)
            .expect("catalog always holds all three patterns");
        for (key, value) in entries {
            if key == "slot_order" {
                p.slot_order = parse_list(value)
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, String>>()
                    .map_err(|e| parse_err("pattern", id, e))?;
                continue;
            }
            let slot: SlotKey = key
                .parse()
                .map_err(|_| parse_err("pattern", id, format!("unknown key `{key}`")))?;
            p.connective_words.insert(slot, parse_list(value));
        }
        Ok(())
    }

    fn override_options(&mut self, entries: &[(String, String)]) -> Result<(), CatalogError> {
        for (key, value) in entries {
            match key.as_str() {
                "glossary_case_insensitive" => {
                    self.options.glossary_case_insensitive = parse_bool("options", "", value)?
                }
                "forbid_trace" => self.options.forbid_trace = parse_bool("options", "", value)?,
                other => return Err(parse_err("options", "", format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    /// Check every registry invariant.
    pub fn validate(&self) -> Result<(), CatalogError> {
        self.validate_rules()?;
        self.validate_characteristics()?;
        self.validate_attributes()?;
        for p in &self.patterns {
            if p.slot_order != p.pattern_id.slot_order() {
                return Err(violation(format!(
                    "pattern {} must have slot order {:?}",
                    p.pattern_id,
                    p.pattern_id.slot_order()
                )));
            }
        }
        Ok(())
    }

    fn validate_rules(&self) -> Result<(), CatalogError> {
        if self.rules.len() != RULE_COUNT {
            return Err(violation(format!(
                "expected {RULE_COUNT} rules, found {}",
                self.rules.len()
            )));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if numbered(&rule.rule_id, 'R') != Some(i as u32 + 1) {
                return Err(violation(format!("rule `{}` outside R1..R{RULE_COUNT}", rule.rule_id)));
            }
            let has_checker = AUTOMATED_CHECKERS.contains(&rule.rule_id.as_str());
            if rule.automation == Automation::Automated && !has_checker {
                return Err(violation(format!(
                    "rule {} is Automated but has no checker",
                    rule.rule_id
                )));
            }
            if let Some(c) = rule.contributes_to.iter().find(|c| self.characteristic(c).is_none()) {
                return Err(violation(format!(
                    "rule {} contributes to unknown characteristic {c}",
                    rule.rule_id
                )));
            }
        }
        Ok(())
    }

    fn validate_characteristics(&self) -> Result<(), CatalogError> {
        if self.characteristics.len() != CHARACTERISTIC_COUNT {
            return Err(violation(format!(
                "expected {CHARACTERISTIC_COUNT} characteristics, found {}",
                self.characteristics.len()
            )));
        }
        for (i, c) in self.characteristics.iter().enumerate() {
            let n = i as u32 + 1;
            if numbered(&c.characteristic_id, 'C') != Some(n) {
                return Err(violation(format!(
                    "characteristic `{}` outside C1..C15",
                    c.characteristic_id
                )));
            }
            let expected = if n <= 9 {
                Applicability::Individual
            } else {
                Applicability::Set
            };
            if c.applicability != expected {
                return Err(violation(format!(
                    "{} must have applicability {expected}",
                    c.characteristic_id
                )));
            }
            if !c.nasa_mapped || c.iso_mapped != (n != 15) {
                return Err(violation(format!(
                    "{} has the wrong NASA/ISO mapping",
                    c.characteristic_id
                )));
            }
        }
        Ok(())
    }

    fn validate_attributes(&self) -> Result<(), CatalogError> {
        let mut seen = BTreeSet::new();
        for a in &self.attributes {
            if !is_valid_attribute_key(&a.attribute_key) {
                return Err(violation(format!(
                    "attribute key `{}` is not A01..A49 or X<n>",
                    a.attribute_key
                )));
            }
            if !seen.insert(a.attribute_key.as_str()) {
                return Err(violation(format!("duplicate attribute {}", a.attribute_key)));
            }
            if (a.value_kind == ValueKind::Enum) == a.value_set.is_empty() {
                return Err(violation(format!(
                    "attribute {}: value set must be non-empty exactly when the kind is Enum",
                    a.attribute_key
                )));
            }
            if a.derived != matches!(a.attribute_key.as_str(), "A15" | "A16") {
                return Err(violation(format!(
                    "attribute {} derived flag mismatch",
                    a.attribute_key
                )));
            }
        }
        let gtwr = self
            .attributes
            .iter()
            .filter(|a| a.attribute_key.starts_with('A'))
            .count();
        if gtwr != GTWR_ATTRIBUTE_COUNT {
            return Err(violation(format!("expected A01..A49, found {gtwr} GtWR attributes")));
        }
        Ok(())
    }
}
