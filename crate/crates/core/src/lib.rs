//! Structured requirement modeling without a modeling tool: pattern slots,
//! rule checks, glossary annotation, trace links and completeness metrics.
//!
//! The crate is `no_std` (with `alloc`). File formats, IO and the command
//! line live in the `mbsr` crate.
//!
//! ```
//! use mbsr_core::{Catalog, Glossary, parse_statement, SlotKey};
//!
//! let text = "The Rover shall drive at least 10 m per sol.";
//! let (st, _) = parse_statement(text, &Glossary::default(), &Catalog::default()).unwrap();
//! assert_eq!(st.slot(SlotKey::Sr5).unwrap().text, "at least 10 m per sol");
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod glossary;
pub mod metrics;
pub mod model;
pub mod parser;
pub mod rules;
pub mod text;
pub mod trace;

pub use catalog::{Catalog, CatalogError};
pub use glossary::{Annotation, Glossary, GlossaryError, GlossaryTerm};
pub use metrics::{MetricInstance, MetricTable, MetricsError};
pub use model::{
    AttributeValue, Clock, ElementKind, ExpressionKind, FixedClock, Model, ModelElement, ModelError, PatternId,
    RequirementExpression, RequirementSet, SlotKey, SlotValue, SteppingClock, StructuredStatement, SubjectArticle,
    Timestamp,
};
pub use parser::{analyze_statement, parse_statement, render_statement, ParseDiagnostics, ParseError, RenderError};
pub use rules::{RuleResult, SatisfactionMatrix, Verdict, TBX_RULE_ID};
pub use text::Span;
pub use trace::{LinkKind, NodeRef, TraceLink};
