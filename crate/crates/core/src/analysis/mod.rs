//! Crossing-tree extraction from paths and the estimators built on it.

pub mod forest;
pub mod holder;
pub mod hurst;
pub mod ingest;
pub mod modulus;
pub mod tails;

pub use forest::{
    extract_crossing_forest, extract_passage_times, CrossingForest, CrossingRecord, Passage,
};
pub use holder::{holder_histogram, local_holder, HistogramBin, HolderEstimate, DEFAULT_BIN_WIDTH};
pub use hurst::{
    duration_scale_invariance, estimate_hurst, estimate_hurst_pooled, total_variation,
    HurstEstimate, ScaleInvarianceReport,
};
pub use ingest::{ingest_csv, ingest_reader, ColumnSpec, HeaderMode};
pub use modulus::{brute_force_modulus, h_gauge, modulus_ratio, ModulusReport, OscillationTable};
pub use tails::{
    increment_counts, increment_tail, increment_tail_streamed, remaining_time_fit,
    remaining_time_records, remaining_time_tail, GapSampling, IncrementCounts, IncrementTail,
    RemainingTimeRecord, RemainingTimeTail,
};
