//! Compression-based signals for telling text sources apart.
//!
//! The crate measures how well gzip compresses a document, how that ratio
//! evolves as the document grows, and how it reacts to controlled
//! perturbations. Those measurements feed a gradient-boosted tree classifier
//! whose decisions are attributed back to features with TreeSHAP.
//!
//! Modules, roughly in pipeline order:
//!
//! - [`corpus`]: JSONL documents, preprocessing, sentence and word segmentation
//! - [`compress`]: gzip sizes, ratios, NCD and prefix curves
//! - [`synth`]: fixed-entropy regimes and random-word baselines
//! - [`features`]: the per-document feature battery
//! - [`model`]: histogram GBDT, metrics, SHAP and persistence
//! - [`report`]: curve binning and CSV/JSON export
//! - [`cli`]: the `compsig` command-line front end

pub mod cli;
pub mod compress;
pub mod corpus;
pub mod error;
pub mod features;
pub mod model;
pub mod report;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
