//! Histogram gradient-boosted classification trees.
//!
//! Features are quantile-binned once; each boosting round grows one tree
//! per output (a single logistic score for two classes, one softmax score
//! per class otherwise) leaf-wise from gradient/hessian histograms.

mod binning;
mod ensemble;
mod metrics;
mod persist;
mod shap;
mod train;
mod tree;

pub use binning::BinMapper;
pub use ensemble::Ensemble;
pub use metrics::{evaluate, log_loss, ClassMetrics, Metrics};
pub use persist::{load, save, FORMAT_VERSION};
pub use shap::{shap_global, shap_values, tree_expected_value, tree_shap, GlobalImportance, ShapValues};
pub use train::{fit, fit_with_observer, SplitEvent};
pub use tree::Tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureRow, FEATURE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GBMConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub max_bins: usize,
    pub min_samples_leaf: usize,
    pub l2_reg: f64,
    /// Recorded with the model. Training has no sampling step, so the
    /// result is the same for every seed.
    pub seed: u64,
}

impl Default for GBMConfig {
    fn default() -> Self {
        GBMConfig {
            n_rounds: 200,
            learning_rate: 0.1,
            max_leaves: 31,
            max_bins: 255,
            min_samples_leaf: 20,
            l2_reg: 1.0,
            seed: 0,
        }
    }
}

impl GBMConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::invalid("n_rounds must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid("learning_rate must lie in (0, 1]"));
        }
        if self.max_leaves < 2 {
            return Err(Error::invalid("max_leaves must be at least 2"));
        }
        if !(2..=u16::MAX as usize).contains(&self.max_bins) {
            return Err(Error::invalid("max_bins must lie in [2, 65535]"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf must be at least 1"));
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return Err(Error::invalid("l2_reg must be finite and non-negative"));
        }
        Ok(())
    }
}

/// A labelled feature matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl Dataset {
    /// Checks arity and finiteness of every value.
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::Arity {
                    expected: feature_names.len(),
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    feature: feature_names[j].clone(),
                    row: i,
                });
            }
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn from_feature_rows(rows: &[FeatureRow]) -> Result<Self> {
        Self::new(
            FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.features.to_array().to_vec()).collect(),
            rows.iter().map(|r| r.label.clone()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

/// Stratified train/test split: within each label, a seeded shuffle puts
/// the first `round(train_fraction · n)` documents in train. Both index
/// lists come back sorted.
pub fn stratified_split(labels: &[String], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    use rand::seq::SliceRandom;
    use std::collections::BTreeMap;

    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie in (0, 1)"));
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_label.entry(l.as_str()).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut idx) in by_label {
        let mut rng = crate::seed::rng(crate::seed::derive_seed(seed, label.as_bytes()));
        idx.shuffle(&mut rng);
        let k = (train_fraction * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
