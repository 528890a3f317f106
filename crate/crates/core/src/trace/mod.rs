//! Process-trace analytics: OHRF segmentation, policy cycles, entropy
//! series, summary metrics, and progression-graph export/ingestion.

mod event;
mod export;
mod metrics;
mod ohrf;

use thiserror::Error;

pub use event::{ProcessEvent, Trace};
pub use export::{export_progression, ingest_tsv, ColumnMap, ExportFormat, TSV_COLUMNS};
pub use metrics::{entropy_drops, entropy_trajectory, summarize, OhrfCounts, Summary};
pub use ohrf::{
    cycle_of_events, group_policies, segment_ohrf, segments_from_states, OhrfState, PolicyCycle,
    Segment, Thresholds,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace has no {0} values")]
    UnsupportedField(&'static str),
    #[error("unknown export format {0:?} (expected tsv or svg)")]
    UnknownFormat(String),
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("bad column mapping {0:?} (expected key=column with key time, kind or target)")]
    BadColumnMap(String),
    #[error("row {row}: {reason}")]
    Ingest { row: usize, reason: String },
}
