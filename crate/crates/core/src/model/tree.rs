use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary regression tree stored as parallel arrays. Node 0 is the root;
/// `left[i] < 0` marks a leaf. Samples with `x[feature] < threshold` go
/// left; NaN follows `default_left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<i32>,
    pub right: Vec<i32>,
    pub default_left: Vec<bool>,
    /// Leaf output; for internal nodes, the value the node would have had
    /// as a leaf.
    pub value: Vec<f64>,
    /// Training samples that reached the node.
    pub cover: Vec<f64>,
}

impl Tree {
    pub(crate) fn with_root(value: f64, cover: f64) -> Self {
        Tree {
            feature: vec![-1],
            threshold: vec![0.0],
            left: vec![-1],
            right: vec![-1],
            default_left: vec![true],
            value: vec![value],
            cover: vec![cover],
        }
    }

    pub(crate) fn push_leaf(&mut self, value: f64, cover: f64) -> usize {
        self.feature.push(-1);
        self.threshold.push(0.0);
        self.left.push(-1);
        self.right.push(-1);
        self.default_left.push(true);
        self.value.push(value);
        self.cover.push(cover);
        self.len() - 1
    }

    pub fn len(&self) -> usize {
        self.feature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature.is_empty()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.left[node] < 0
    }

    pub fn n_leaves(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_leaf(i)).count()
    }

    /// Child taken by `x` at internal node `node`.
    pub fn next(&self, node: usize, x: &[f64]) -> usize {
        let v = x[self.feature[node] as usize];
        let go_left = if v.is_nan() {
            self.default_left[node]
        } else {
            v < self.threshold[node]
        };
        if go_left {
            self.left[node] as usize
        } else {
            self.right[node] as usize
        }
    }

    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut node = 0;
        while !self.is_leaf(node) {
            node = self.next(node, x);
        }
        node
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.value[self.leaf_index(x)]
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, n: usize) -> usize {
            if t.is_leaf(n) {
                0
            } else {
                1 + go(t, t.left[n] as usize).max(go(t, t.right[n] as usize))
            }
        }
        go(self, 0)
    }

    /// Checks array lengths, child indices (each child after its parent and
    /// reached exactly once), feature range and finiteness.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let n = self.len();
        let bad = |m: String| Err(Error::Model(m));
        if n == 0 {
            return bad("tree has no nodes".into());
        }
        for len in [
            self.threshold.len(),
            self.left.len(),
            self.right.len(),
            self.default_left.len(),
            self.value.len(),
            self.cover.len(),
        ] {
            if len != n {
                return bad("tree arrays differ in length".into());
            }
        }
        let mut parents = vec![0u32; n];
        for i in 0..n {
            if !self.value[i].is_finite() || !self.cover[i].is_finite() || self.cover[i] < 0.0 {
                return bad(format!("node {i} has a non-finite value or cover"));
            }
            let (l, r) = (self.left[i], self.right[i]);
            if l < 0 {
                if r >= 0 {
                    return bad(format!("node {i} has a right child but no left child"));
                }
                continue;
            }
            if r < 0 {
                return bad(format!("node {i} has a left child but no right child"));
            }
            let f = self.feature[i];
            if f < 0 || f as usize >= n_features {
                return bad(format!("node {i} splits on feature {f}"));
            }
            if !self.threshold[i].is_finite() {
                return bad(format!("node {i} has a non-finite threshold"));
            }
            for c in [l as usize, r as usize] {
                if c <= i || c >= n {
                    return bad(format!("node {i} has child {c} out of order"));
                }
                parents[c] += 1;
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return bad("tree nodes are not a single rooted tree".into());
        }
        Ok(())
    }
}
