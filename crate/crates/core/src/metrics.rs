//! Pattern-completeness metrics with a timestamped, append-only history.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{Clock, ExpressionKind, Model, ModelError, SlotKey, Timestamp};
use crate::rules::{build_matrix, RuleCounts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
    #[error("no metric instances recorded for scope `{0}`")]
    NoInstances(String),
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for MetricsError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::UnknownScope(s) => MetricsError::UnknownScope(s),
            other => MetricsError::Model(other),
        }
    }
}

/// One recalculation. `scope_id` of `None` is the whole model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricInstance {
    pub timestamp: Timestamp,
    pub scope_id: Option<String>,
    pub type_filter: Option<ExpressionKind>,
    pub total: usize,
    /// Filled counts for SR1..SR5.
    pub per_slot_filled: [usize; 5],
    pub complete_count: usize,
}

impl MetricInstance {
    pub fn slot_filled(&self, slot: SlotKey) -> usize {
        self.per_slot_filled[slot_index(slot)]
    }

    /// Completeness in hundredths of a percent, rounded half up (7000 = 70.00%).
    pub fn pct_hundredths(&self) -> u32 {
        if self.total == 0 {
            return 0;
        }
        ((self.complete_count as u64 * 10_000 * 2 + self.total as u64) / (2 * self.total as u64)) as u32
    }

    pub fn completeness_pct(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.complete_count as f64 / self.total as f64
        }
    }

    /// `pct` column text with two decimals.
    pub fn pct_text(&self) -> String {
        let h = self.pct_hundredths();
        alloc::format!("{}.{:02}", h / 100, h % 100)
    }
}

fn slot_index(slot: SlotKey) -> usize {
    SlotKey::ALL.iter().position(|k| *k == slot).expect("listed")
}

/// Append-only history of metric instances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricTable {
    instances: Vec<MetricInstance>,
}

impl MetricTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_instances(instances: Vec<MetricInstance>) -> Self {
        MetricTable { instances }
    }

    pub fn instances(&self) -> &[MetricInstance] {
        &self.instances
    }

    pub fn push(&mut self, instance: MetricInstance) {
        self.instances.push(instance);
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Count filled slots and complete statements over the leaf expressions in
/// scope, record the instance in `table` and return it. Expressions without
/// a parse (no "shall", or Needs) count as incomplete.
pub fn calculate(
    model: &Model,
    table: &mut MetricTable,
    scope: Option<&str>,
    type_filter: Option<ExpressionKind>,
    clock: &dyn Clock,
) -> Result<MetricInstance, MetricsError> {
    let mut instance = MetricInstance {
        timestamp: clock.now(),
        scope_id: scope.map(ToString::to_string),
        type_filter,
        total: 0,
        per_slot_filled: [0; 5],
        complete_count: 0,
    };
    for e in model.scope_members(scope)? {
        if type_filter.is_some_and(|t| t != e.element_kind) {
            continue;
        }
        instance.total += 1;
        let Some(st) = model.effective_statement(&e.id) else {
            continue;
        };
        for slot in SlotKey::ALL {
            if st.is_filled(*slot) {
                instance.per_slot_filled[slot_index(*slot)] += 1;
            }
        }
        if st.is_complete() {
            instance.complete_count += 1;
        }
    }
    table.push(instance.clone());
    Ok(instance)
}

/// Per-rule verdict counts over the scope, read from recorded verdict links.
pub fn rule_metrics(model: &Model, scope: Option<&str>) -> Result<BTreeMap<String, RuleCounts>, MetricsError> {
    Ok(build_matrix(model, scope, None)?.counts())
}

/// `(timestamp, pct_hundredths)` for a scope, oldest first.
pub fn burndown(table: &MetricTable, scope: Option<&str>) -> Result<Vec<(Timestamp, u32)>, MetricsError> {
    let mut points: Vec<(Timestamp, u32)> = table
        .instances
        .iter()
        .filter(|i| i.scope_id.as_deref() == scope)
        .map(|i| (i.timestamp, i.pct_hundredths()))
        .collect();
    if points.is_empty() {
        return Err(MetricsError::NoInstances(scope.unwrap_or("*").to_string()));
    }
    points.sort_by_key(|(t, _)| *t);
    Ok(points)
}
