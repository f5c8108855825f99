//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use std::path::PathBuf;

use compsig::model::Tree;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// The bundled public-domain novel, as whitespace tokens.
pub fn novel_tokens() -> Vec<String> {
    let raw = std::fs::read_to_string(data_path("botchan.txt")).expect("bundled text");
    raw.split_whitespace().map(str::to_string).collect()
}

/// `count` windows of `len` consecutive tokens spread evenly over the text.
pub fn natural_windows(count: usize, len: usize) -> Vec<String> {
    let toks = novel_tokens();
    assert!(toks.len() >= len);
    let stride = (toks.len() - len) / (count - 1).max(1);
    (0..count)
        .map(|i| toks[i * stride..i * stride + len].join(" "))
        .collect()
}

/// Best second-order split gain over every feature and every threshold
/// between consecutive distinct values, by direct enumeration.
pub fn exhaustive_best_gain(
    rows: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    l2: f64,
    min_leaf: usize,
) -> Option<f64> {
    let n = rows.len();
    let g: f64 = grad.iter().sum();
    let h: f64 = hess.iter().sum();
    let parent = g * g / (h + l2);
    let mut best: Option<f64> = None;
    for f in 0..rows[0].len() {
        let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0);
            for i in 0..n {
                if rows[i][f] <= w[0] {
                    gl += grad[i];
                    hl += hess[i];
                    nl += 1;
                }
            }
            if nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let (gr, hr) = (g - gl, h - hl);
            let gain = gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent;
            if gain > 0.0 && best.is_none_or(|b| gain > b) {
                best = Some(gain);
            }
        }
    }
    best
}

/// Expected tree output when only the features in `known` are observed;
/// unobserved splits average their children by training cover.
pub fn conditional_expectation(tree: &Tree, x: &[f64], known: &[bool], node: usize) -> f64 {
    if tree.left[node] < 0 {
        return tree.value[node];
    }
    let f = tree.feature[node] as usize;
    let l = tree.left[node] as usize;
    let r = tree.right[node] as usize;
    if known[f] {
        let go_left = x[f] < tree.threshold[node];
        conditional_expectation(tree, x, known, if go_left { l } else { r })
    } else {
        (tree.cover[l] * conditional_expectation(tree, x, known, l)
            + tree.cover[r] * conditional_expectation(tree, x, known, r))
            / tree.cover[node]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Shapley values by enumerating all `2^m` coalitions.
pub fn brute_force_shap(tree: &Tree, x: &[f64], m: usize) -> Vec<f64> {
    let value = |mask: usize| {
        let known: Vec<bool> = (0..m).map(|j| mask >> j & 1 == 1).collect();
        conditional_expectation(tree, x, &known, 0)
    };
    let mut phi = vec![0.0; m];
    for (i, p) in phi.iter_mut().enumerate() {
        for mask in 0..(1usize << m) {
            if mask >> i & 1 == 1 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = factorial(s) * factorial(m - s - 1) / factorial(m);
            *p += w * (value(mask | 1 << i) - value(mask));
        }
    }
    phi
}

/// A random tree of at most `max_depth` levels over `m` features, with
/// covers that add up from the leaves.
pub fn random_tree(rng: &mut impl Rng, max_depth: usize, m: usize) -> Tree {
    let mut t = Tree {
        feature: vec![],
        threshold: vec![],
        left: vec![],
        right: vec![],
        default_left: vec![],
        value: vec![],
        cover: vec![],
    };
    fn grow(t: &mut Tree, rng: &mut impl Rng, depth: usize, max_depth: usize, m: usize) -> usize {
        let id = t.feature.len();
        t.feature.push(-1);
        t.threshold.push(0.0);
        t.left.push(-1);
        t.right.push(-1);
        t.default_left.push(true);
        t.value.push(0.0);
        t.cover.push(0.0);
        let split = depth < max_depth && (depth == 0 || rng.random_bool(0.7));
        if !split {
            t.value[id] = rng.random_range(-2.0..2.0);
            t.cover[id] = rng.random_range(1..50) as f64;
            return id;
        }
        t.feature[id] = rng.random_range(0..m) as i32;
        t.threshold[id] = rng.random_range(0.2..0.8);
        let l = grow(t, rng, depth + 1, max_depth, m);
        let r = grow(t, rng, depth + 1, max_depth, m);
        t.left[id] = l as i32;
        t.right[id] = r as i32;
        t.cover[id] = t.cover[l] + t.cover[r];
        id
    }
    grow(&mut t, rng, 0, max_depth, m);
    t
}
