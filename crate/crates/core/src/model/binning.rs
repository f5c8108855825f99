use serde::{Deserialize, Serialize};

/// Per-feature bin edges. A value `v` falls in bin `#{e : e <= v}`, so bin
/// `i` is the right-open interval `[edges[i-1], edges[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub edges: Vec<Vec<f64>>,
}

impl BinMapper {
    /// Edges from a row-major matrix. Features with at most `max_bins`
    /// distinct values get one bin per value (edges at midpoints); others
    /// get quantile edges.
    pub fn fit(rows: &[Vec<f64>], n_features: usize, max_bins: usize) -> Self {
        let edges = (0..n_features)
            .map(|f| {
                let col: Vec<f64> = rows.iter().map(|r| r[f]).collect();
                feature_edges(col, max_bins)
            })
            .collect();
        BinMapper { edges }
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }

    pub fn bin(&self, feature: usize, value: f64) -> usize {
        self.edges[feature].partition_point(|&e| e <= value)
    }
}

fn feature_edges(mut col: Vec<f64>, max_bins: usize) -> Vec<f64> {
    col.sort_by(f64::total_cmp);
    let mut distinct = col.clone();
    distinct.dedup();
    if distinct.len() <= max_bins {
        return distinct
            .windows(2)
            .map(|w| {
                let mid = w[0] + (w[1] - w[0]) / 2.0;
                // Adjacent floats can round the midpoint onto the lower value.
                if mid > w[0] { mid } else { w[1] }
            })
            .collect();
    }
    let n = col.len();
    let mut edges: Vec<f64> = (1..max_bins)
        .map(|i| col[i * n / max_bins])
        .filter(|&e| e > col[0])
        .collect();
    edges.dedup();
    edges
}
