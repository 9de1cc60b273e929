//! Metric history as CSV: `timestamp,scope,type,total,sr1,sr2,sr3,sr4,sr5,complete,pct`.
//! The whole-model scope and the unfiltered type are written as `*`.

use std::io::Write as _;
use std::path::Path;

use mbsr_core::{ExpressionKind, MetricInstance, MetricTable};
use thiserror::Error;

use crate::time::{format_timestamp, parse_timestamp};

pub const HEADER: [&str; 11] = [
    "timestamp",
    "scope",
    "type",
    "total",
    "sr1",
    "sr2",
    "sr3",
    "sr4",
    "sr5",
    "complete",
    "pct",
];
const ANY: &str = "*";

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("history row {row}: {message}")]
    BadRow { row: usize, message: String },
}

fn record(i: &MetricInstance) -> Vec<String> {
    let mut r = vec![
        format_timestamp(i.timestamp),
        i.scope_id.clone().unwrap_or_else(|| ANY.to_string()),
        i.type_filter.map_or_else(|| ANY.to_string(), |t| t.to_string()),
        i.total.to_string(),
    ];
    r.extend(i.per_slot_filled.iter().map(usize::to_string));
    r.push(i.complete_count.to_string());
    r.push(i.pct_text());
    r
}

fn writer(out: Vec<u8>, header: bool) -> Result<csv::Writer<Vec<u8>>, HistoryError> {
    let mut w = csv::Writer::from_writer(out);
    if header {
        w.write_record(HEADER)?;
    }
    Ok(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, HistoryError> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("ASCII and caller text only"))
}

pub fn to_csv(table: &MetricTable) -> Result<String, HistoryError> {
    let mut w = writer(Vec::new(), true)?;
    for i in table.instances() {
        w.write_record(record(i))?;
    }
    finish(w)
}

pub fn from_csv(text: &str) -> Result<MetricTable, HistoryError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(HistoryError::BadRow {
            row: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }
    let mut table = MetricTable::new();
    for (n, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |message: String| HistoryError::BadRow { row: n + 2, message };
        let count = |i: usize| row[i].parse::<usize>().map_err(|e| bad(format!("{}: {e}", HEADER[i])));
        let instance = MetricInstance {
            timestamp: parse_timestamp(&row[0]).map_err(|e| bad(format!("timestamp: {e}")))?,
            scope_id: (&row[1] != ANY).then(|| row[1].to_string()),
            type_filter: match &row[2] {
                ANY => None,
                t => Some(t.parse::<ExpressionKind>().map_err(bad)?),
            },
            total: count(3)?,
            per_slot_filled: [count(4)?, count(5)?, count(6)?, count(7)?, count(8)?],
            complete_count: count(9)?,
        };
        if instance.pct_text() != row[10] {
            return Err(bad(format!(
                "pct {} disagrees with {}/{}",
                &row[10], instance.complete_count, instance.total
            )));
        }
        table.push(instance);
    }
    Ok(table)
}

pub fn load(path: &Path) -> Result<MetricTable, HistoryError> {
    match std::fs::read_to_string(path) {
        Ok(text) => from_csv(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(MetricTable::new()),
        Err(e) => Err(e.into()),
    }
}

/// Append one row, writing the header first when the file is new or empty.
pub fn append(path: &Path, instance: &MetricInstance) -> Result<(), HistoryError> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let mut w = writer(Vec::new(), fresh)?;
    w.write_record(record(instance))?;
    let text = finish(w)?;
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}
