//! Exact path-dependent TreeSHAP.
//!
//! Attributions explain the raw (pre-link) score of one class. Absent
//! features are marginalized along the tree paths, weighting each branch by
//! its training cover.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::Ensemble;
use super::tree::Tree;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: i32,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

fn extend(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: i32) {
    let d = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        pweight: if d == 0 { 1.0 } else { 0.0 },
    });
    let denom = (d + 1) as f64;
    for i in (0..d).rev() {
        path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) as f64 / denom;
        path[i].pweight = zero_fraction * path[i].pweight * (d - i) as f64 / denom;
    }
}

fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let d = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let denom = (d + 1) as f64;
    let mut next = path[d].pweight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].pweight;
            path[i].pweight = next * denom / ((i + 1) as f64 * one);
            next = tmp - path[i].pweight * zero * (d - i) as f64 / denom;
        } else {
            path[i].pweight = path[i].pweight * denom / (zero * (d - i) as f64);
        }
    }
    for i in index..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let d = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let denom = (d + 1) as f64;
    let mut next = path[d].pweight;
    let mut total = 0.0;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = next * denom / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].pweight - tmp * zero * (d - i) as f64 / denom;
        } else if zero != 0.0 {
            total += path[i].pweight / zero / ((d - i) as f64 / denom);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &Tree,
    x: &[f64],
    phi: &mut [f64],
    node: usize,
    parent: &[PathElement],
    zero_fraction: f64,
    one_fraction: f64,
    feature: i32,
) {
    let mut path = parent.to_vec();
    extend(&mut path, zero_fraction, one_fraction, feature);
    if tree.is_leaf(node) {
        let v = tree.value[node];
        for i in 1..path.len() {
            let w = unwound_sum(&path, i);
            let e = path[i];
            phi[e.feature as usize] += w * (e.one_fraction - e.zero_fraction) * v;
        }
        return;
    }
    let split = tree.feature[node];
    let hot = tree.next(node, x);
    let cold = if hot == tree.left[node] as usize {
        tree.right[node] as usize
    } else {
        tree.left[node] as usize
    };
    let cover = tree.cover[node];
    let (mut iz, mut io) = (1.0, 1.0);
    if let Some(k) = (1..path.len()).find(|&k| path[k].feature == split) {
        iz = path[k].zero_fraction;
        io = path[k].one_fraction;
        unwind(&mut path, k);
    }
    recurse(tree, x, phi, hot, &path, iz * tree.cover[hot] / cover, io, split);
    recurse(tree, x, phi, cold, &path, iz * tree.cover[cold] / cover, 0.0, split);
}

/// Shapley values of one tree's output at `x`, one per feature.
pub fn tree_shap(tree: &Tree, x: &[f64], n_features: usize) -> Vec<f64> {
    let mut phi = vec![0.0; n_features];
    if !tree.is_leaf(0) {
        recurse(tree, x, &mut phi, 0, &[], 1.0, 1.0, -1);
    }
    phi
}

/// Cover-weighted mean leaf value.
pub fn tree_expected_value(tree: &Tree) -> f64 {
    let root = tree.cover[0];
    (0..tree.len())
        .filter(|&i| tree.is_leaf(i))
        .map(|i| tree.value[i] * tree.cover[i] / root)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapValues {
    pub class: String,
    pub feature_names: Vec<String>,
    /// Base score plus expected tree outputs.
    pub expected_value: f64,
    /// `values[sample][feature]`.
    pub values: Vec<Vec<f64>>,
}

/// Which raw score explains `class`, and with which sign.
fn output_for(ens: &Ensemble, class: Option<&str>) -> Result<(String, usize, f64)> {
    let label = match class {
        Some(c) => c.to_string(),
        None if ens.classes.len() == 2 => ens.classes[1].clone(),
        None => ens.classes[0].clone(),
    };
    let idx = ens.class_index(&label)?;
    Ok(if ens.n_outputs() == 1 {
        // The single logistic score is the log-odds of classes[1].
        (label, 0, if idx == 1 { 1.0 } else { -1.0 })
    } else {
        (label, idx, 1.0)
    })
}

/// Per-sample attributions of the raw score of `class` (default: the
/// positive class of a binary model, otherwise the first class).
pub fn shap_values(ens: &Ensemble, rows: &[Vec<f64>], class: Option<&str>) -> Result<ShapValues> {
    if ens.trees.is_empty() {
        return Err(Error::Untrained);
    }
    let (label, out, sign) = output_for(ens, class)?;
    let nf = ens.n_features();
    let expected = ens.base_scores[out]
        + ens.trees.iter().map(|r| tree_expected_value(&r[out])).sum::<f64>();
    let values = rows
        .par_iter()
        .map(|x| {
            if x.len() != nf {
                return Err(Error::Arity { expected: nf, got: x.len() });
            }
            let mut phi = vec![0.0; nf];
            for round in &ens.trees {
                for (p, v) in phi.iter_mut().zip(tree_shap(&round[out], x, nf)) {
                    *p += v;
                }
            }
            Ok(phi.into_iter().map(|v| sign * v).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(ShapValues {
        class: label,
        feature_names: ens.feature_names.clone(),
        expected_value: sign * expected,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub class: String,
    /// `(feature, mean |φ|)`, in model feature order.
    pub mean_abs: Vec<(String, f64)>,
}

impl GlobalImportance {
    /// Features by decreasing importance; name order on ties.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut v = self.mean_abs.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }
}

/// Mean absolute Shapley value per feature over `rows`.
pub fn shap_global(ens: &Ensemble, rows: &[Vec<f64>], class: Option<&str>) -> Result<GlobalImportance> {
    if rows.is_empty() {
        return Err(Error::Empty("attribution set"));
    }
    let sv = shap_values(ens, rows, class)?;
    let n = rows.len() as f64;
    let mean_abs = sv
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), sv.values.iter().map(|r| r[j].abs()).sum::<f64>() / n))
        .collect();
    Ok(GlobalImportance { class: sv.class, mean_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit, Dataset, GBMConfig};

    fn binary_data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|i| {
                let a = ((i * 31) % 97) as f64 / 97.0;
                let b = ((i * 17) % 89) as f64 / 89.0;
                let c = ((i * 7) % 13) as f64;
                vec![a, b, c, 5.0]
            })
            .collect();
        let labels = rows
            .iter()
            .map(|r| if r[0] > 0.55 { "pos" } else { "neg" }.to_string())
            .collect();
        Dataset::new(vec!["a".into(), "b".into(), "c".into(), "flat".into()], rows, labels).unwrap()
    }

    fn cfg() -> GBMConfig {
        GBMConfig { n_rounds: 30, min_samples_leaf: 5, max_leaves: 8, ..Default::default() }
    }

    #[test]
    fn local_accuracy_and_null_player() {
        let d = binary_data();
        let ens = fit(&d, &cfg()).unwrap();
        let sv = shap_values(&ens, &d.rows, None).unwrap();
        assert_eq!(sv.class, "pos");
        for (x, phi) in d.rows.iter().zip(&sv.values) {
            let raw = ens.raw_scores(x).unwrap()[0];
            assert!((phi.iter().sum::<f64>() + sv.expected_value - raw).abs() < 1e-6);
            assert_eq!(phi[3], 0.0);
        }
        let neg = shap_values(&ens, &d.rows[..5], Some("neg")).unwrap();
        assert_eq!(neg.values[0][0], -sv.values[0][0]);
    }

    #[test]
    fn threshold_feature_dominates() {
        let d = binary_data();
        let ens = fit(&d, &cfg()).unwrap();
        let g = shap_global(&ens, &d.rows, None).unwrap();
        assert_eq!(g.ranked()[0].0, "a");
    }

    #[test]
    fn untrained_is_an_error() {
        let d = binary_data();
        let ens = fit(&d, &cfg()).unwrap().with_rounds(0);
        assert!(matches!(shap_values(&ens, &d.rows, None), Err(Error::Untrained)));
    }

    #[test]
    fn depth_two_matches_hand_values() {
        // Root on f0 < 0.5; left splits f1 < 0.5, right is a leaf.
        let t = Tree {
            feature: vec![0, 1, -1, -1, -1],
            threshold: vec![0.5, 0.5, 0.0, 0.0, 0.0],
            left: vec![1, 3, -1, -1, -1],
            right: vec![2, 4, -1, -1, -1],
            default_left: vec![true; 5],
            value: vec![0.0, 0.0, 4.0, 1.0, 2.0],
            cover: vec![10.0, 6.0, 4.0, 3.0, 3.0],
        };
        // x = (0, 0) reaches the leaf with value 1.
        // v({}) = 0.6·1.5 + 0.4·4 = 2.5, v({0}) = 1.5, v({1}) = 0.6·1 + 0.4·4 = 2.2, v({0,1}) = 1.
        // φ0 = ½(1.5 − 2.5) + ½(1 − 2.2) = −1.1, φ1 = ½(2.2 − 2.5) + ½(1 − 1.5) = −0.4.
        let phi = tree_shap(&t, &[0.0, 0.0], 2);
        assert!((phi[0] + 1.1).abs() < 1e-12);
        assert!((phi[1] + 0.4).abs() < 1e-12);
        assert!((tree_expected_value(&t) - 2.5).abs() < 1e-12);
    }
}
