//! Extraction of bounded anomalous events from per-frame anomaly scores and
//! their evaluation against multi-annotator ground truth.
//!
//! The crate covers the whole offline pipeline:
//!
//! - [`dataset`]: loading and validating a dataset directory
//! - [`aggregate`]: soft labels, consensus intervals, Cohen's kappa
//! - [`scorer`]: a mean-background baseline scorer and score normalization
//! - [`peaks`] / [`select`]: threshold and peak-width event selection
//! - [`metrics`] / [`sweep`]: t-IoU, MAE, P/R/F1 and dense parameter sweeps
//! - [`pipeline`]: the commands behind the `cbass` CLI
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`Exec`].

pub mod aggregate;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod formats;
pub mod metrics;
pub mod peaks;
pub mod pipeline;
pub mod scorer;
pub mod select;
pub mod sweep;
pub mod types;

pub use dataset::{binary_label_vector, Dataset};
pub use error::{Error, Result};
pub use exec::Exec;
pub use select::{Method, SelectionParams};
pub use types::{
    AnnotationRecord, AnnotatorId, EventInterval, ModelId, Scene, ScoreSeries, SplitConfig,
    SplitId, VideoId, VideoMeta,
};
