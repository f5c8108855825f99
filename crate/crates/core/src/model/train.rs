use std::collections::BTreeSet;

use rayon::prelude::*;

use super::binning::BinMapper;
use super::ensemble::Ensemble;
use super::tree::Tree;
use super::{Dataset, GBMConfig};
use crate::error::{Error, Result};

/// A split made during training, with everything needed to check it
/// against an exhaustive search.
#[derive(Debug, Clone)]
pub struct SplitEvent {
    pub round: usize,
    pub output: usize,
    pub node: usize,
    /// Rows reaching the node and their gradient statistics, aligned.
    pub rows: Vec<usize>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub feature: usize,
    /// Rows with `x[feature] < threshold` went left.
    pub threshold: f64,
    pub gain: f64,
}

pub fn fit(data: &Dataset, cfg: &GBMConfig) -> Result<Ensemble> {
    fit_inner(data, cfg, None)
}

/// Like [`fit`], reporting every split to `observer` as it is made.
pub fn fit_with_observer(
    data: &Dataset,
    cfg: &GBMConfig,
    observer: &mut dyn FnMut(&SplitEvent),
) -> Result<Ensemble> {
    fit_inner(data, cfg, Some(observer))
}

#[derive(Debug, Clone, Copy, Default)]
struct Bin {
    g: f64,
    h: f64,
    n: u32,
}

type Histogram = Vec<Vec<Bin>>;

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    bin: usize,
    gain: f64,
}

struct Leaf {
    node: usize,
    rows: Vec<u32>,
    hist: Histogram,
    g: f64,
    h: f64,
    best: Option<Split>,
}

struct Grower<'a> {
    bins: &'a [Vec<u16>],
    mapper: &'a BinMapper,
    cfg: &'a GBMConfig,
}

fn score(g: f64, h: f64, l2: f64) -> f64 {
    g * g / (h + l2)
}

impl Grower<'_> {
    fn histogram(&self, rows: &[u32], grad: &[f64], hess: &[f64]) -> Histogram {
        self.bins
            .par_iter()
            .enumerate()
            .map(|(f, col)| {
                let mut hist = vec![Bin::default(); self.mapper.n_bins(f)];
                for &r in rows {
                    let b = &mut hist[col[r as usize] as usize];
                    b.g += grad[r as usize];
                    b.h += hess[r as usize];
                    b.n += 1;
                }
                hist
            })
            .collect()
    }

    /// Best split of a node, lowest feature then lowest bin on equal gain.
    fn best_split(&self, hist: &Histogram, g: f64, h: f64, n: u32) -> Option<Split> {
        let l2 = self.cfg.l2_reg;
        let min = self.cfg.min_samples_leaf as u32;
        let parent = score(g, h, l2);
        let per_feature: Vec<Option<Split>> = hist
            .par_iter()
            .enumerate()
            .map(|(f, bins)| {
                let mut best: Option<Split> = None;
                let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0u32);
                for (b, bin) in bins.iter().enumerate().take(bins.len().saturating_sub(1)) {
                    gl += bin.g;
                    hl += bin.h;
                    nl += bin.n;
                    if nl < min || bin.n == 0 {
                        continue;
                    }
                    let nr = n - nl;
                    if nr < min {
                        break;
                    }
                    let gain = score(gl, hl, l2) + score(g - gl, h - hl, l2) - parent;
                    if gain > 0.0 && best.is_none_or(|s| gain > s.gain) {
                        best = Some(Split { feature: f, bin: b, gain });
                    }
                }
                best
            })
            .collect();
        per_feature
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<Split>, s| match acc {
                Some(a) if a.gain >= s.gain => Some(a),
                _ => Some(s),
            })
    }

    fn leaf(&self, node: usize, rows: Vec<u32>, hist: Histogram) -> Leaf {
        let (g, h) = hist[0].iter().fold((0.0, 0.0), |(g, h), b| (g + b.g, h + b.h));
        let best = self.best_split(&hist, g, h, rows.len() as u32);
        Leaf { node, rows, hist, g, h, best }
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -self.cfg.learning_rate * g / (h + self.cfg.l2_reg)
    }

    /// Grows one tree leaf-wise; returns it with the leaf reached by each row.
    fn grow(
        &self,
        grad: &[f64],
        hess: &[f64],
        round: usize,
        output: usize,
        observer: &mut Option<&mut dyn FnMut(&SplitEvent)>,
    ) -> (Tree, Vec<u32>) {
        let n = grad.len();
        let all: Vec<u32> = (0..n as u32).collect();
        let root = self.leaf(0, all, self.histogram(&(0..n as u32).collect::<Vec<_>>(), grad, hess));
        let mut tree = Tree::with_root(self.leaf_value(root.g, root.h), n as f64);
        let mut leaves = vec![root];

        while leaves.len() < self.cfg.max_leaves {
            // Highest gain first; equal gains go to the earliest node.
            let pick = leaves
                .iter()
                .enumerate()
                .filter_map(|(i, l)| l.best.map(|s| (i, l.node, s.gain)))
                .fold(None, |acc: Option<(usize, usize, f64)>, c| match acc {
                    Some(a) if a.2 > c.2 || (a.2 == c.2 && a.1 < c.1) => Some(a),
                    _ => Some(c),
                });
            let Some((idx, _, _)) = pick else { break };
            let leaf = leaves.swap_remove(idx);
            let split = leaf.best.expect("picked leaf has a split");
            let f = split.feature;
            let threshold = self.mapper.edges[f][split.bin];

            if let Some(obs) = observer.as_mut() {
                let rows: Vec<usize> = leaf.rows.iter().map(|&r| r as usize).collect();
                obs(&SplitEvent {
                    round,
                    output,
                    node: leaf.node,
                    grad: rows.iter().map(|&r| grad[r]).collect(),
                    hess: rows.iter().map(|&r| hess[r]).collect(),
                    rows,
                    feature: f,
                    threshold,
                    gain: split.gain,
                });
            }

            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = leaf
                .rows
                .iter()
                .partition(|&&r| (self.bins[f][r as usize] as usize) <= split.bin);
            let left_small = left_rows.len() <= right_rows.len();
            let small_hist = self.histogram(if left_small { &left_rows } else { &right_rows }, grad, hess);
            let large_hist: Histogram = leaf
                .hist
                .iter()
                .zip(&small_hist)
                .map(|(p, s)| {
                    p.iter()
                        .zip(s)
                        .map(|(p, s)| Bin { g: p.g - s.g, h: p.h - s.h, n: p.n - s.n })
                        .collect()
                })
                .collect();
            let (lh, rh) = if left_small { (small_hist, large_hist) } else { (large_hist, small_hist) };

            let li = tree.push_leaf(0.0, left_rows.len() as f64);
            let ri = tree.push_leaf(0.0, right_rows.len() as f64);
            let p = leaf.node;
            tree.feature[p] = f as i32;
            tree.threshold[p] = threshold;
            tree.left[p] = li as i32;
            tree.right[p] = ri as i32;
            tree.default_left[p] = left_rows.len() >= right_rows.len();

            let l = self.leaf(li, left_rows, lh);
            let r = self.leaf(ri, right_rows, rh);
            tree.value[li] = self.leaf_value(l.g, l.h);
            tree.value[ri] = self.leaf_value(r.g, r.h);
            leaves.push(l);
            leaves.push(r);
        }

        let mut assign = vec![0u32; n];
        for l in &leaves {
            for &r in &l.rows {
                assign[r as usize] = l.node as u32;
            }
        }
        (tree, assign)
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const MIN_HESS: f64 = 1e-16;

fn fit_inner(
    data: &Dataset,
    cfg: &GBMConfig,
    mut observer: Option<&mut dyn FnMut(&SplitEvent)>,
) -> Result<Ensemble> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    // Re-check in case the dataset was assembled by hand.
    let data = Dataset::new(data.feature_names.clone(), data.rows.clone(), data.labels.clone())?;
    let classes: Vec<String> = data.labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.first().cloned().unwrap_or_default()));
    }
    let y: Vec<usize> = data
        .labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label collected above"))
        .collect();
    let n = data.len();
    let k = classes.len();
    let n_out = if k == 2 { 1 } else { k };

    let mapper = BinMapper::fit(&data.rows, data.n_features(), cfg.max_bins);
    let bins: Vec<Vec<u16>> = (0..data.n_features())
        .map(|f| data.rows.iter().map(|r| mapper.bin(f, r[f]) as u16).collect())
        .collect();

    let mut counts = vec![0usize; k];
    for &c in &y {
        counts[c] += 1;
    }
    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let base_scores: Vec<f64> = if n_out == 1 {
        vec![(priors[1] / priors[0]).ln()]
    } else {
        priors.iter().map(|p| p.ln()).collect()
    };

    let grower = Grower { bins: &bins, mapper: &mapper, cfg };
    let mut scores: Vec<Vec<f64>> = vec![base_scores.clone(); n];
    let mut trees: Vec<Vec<Tree>> = Vec::with_capacity(cfg.n_rounds);
    let mut grad = vec![vec![0.0; n]; n_out];
    let mut hess = vec![vec![0.0; n]; n_out];

    for round in 0..cfg.n_rounds {
        for i in 0..n {
            if n_out == 1 {
                let p = sigmoid(scores[i][0]);
                grad[0][i] = p - (y[i] == 1) as u8 as f64;
                hess[0][i] = (p * (1.0 - p)).max(MIN_HESS);
            } else {
                let mut p = scores[i].clone();
                softmax_in_place(&mut p);
                for c in 0..k {
                    grad[c][i] = p[c] - (y[i] == c) as u8 as f64;
                    hess[c][i] = (p[c] * (1.0 - p[c])).max(MIN_HESS);
                }
            }
        }
        let mut round_trees = Vec::with_capacity(n_out);
        for out in 0..n_out {
            let (tree, assign) = grower.grow(&grad[out], &hess[out], round, out, &mut observer);
            for i in 0..n {
                scores[i][out] += tree.value[assign[i] as usize];
            }
            round_trees.push(tree);
        }
        trees.push(round_trees);
    }

    Ok(Ensemble {
        format_version: super::FORMAT_VERSION,
        classes,
        trees,
        base_scores,
        bin_edges: mapper.edges,
        feature_names: data.feature_names.clone(),
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::log_loss;

    fn toy(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i % 7) as f64, i as f64 / n as f64]).collect();
        let labels = (0..n).map(|i| if i * 2 < n { "lo" } else { "hi" }.to_string()).collect();
        Dataset::new(vec!["noise".into(), "signal".into()], rows, labels).unwrap()
    }

    fn small_cfg(rounds: usize) -> GBMConfig {
        GBMConfig { n_rounds: rounds, min_samples_leaf: 2, ..Default::default() }
    }

    #[test]
    fn separable_set_is_learned() {
        let d = toy(60);
        let ens = fit(&d, &small_cfg(20)).unwrap();
        let pred = ens.predict(&d.rows).unwrap();
        assert_eq!(pred, d.labels);
        // The informative column carries the root split.
        assert_eq!(ens.trees[0][0].feature[0], 1);
    }

    #[test]
    fn loss_does_not_increase() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let x = ((i * 37) % 101) as f64 / 101.0;
                vec![x, ((i * 13) % 17) as f64]
            })
            .collect();
        let labels: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| if r[0] + 0.3 * ((i % 5) as f64 / 5.0) > 0.6 { "a" } else { "b" }.to_string())
            .collect();
        let d = Dataset::new(vec!["x".into(), "z".into()], rows, labels).unwrap();
        let ens = fit(&d, &GBMConfig { n_rounds: 50, ..small_cfg(50) }).unwrap();
        let losses: Vec<f64> = (0..=50)
            .map(|r| log_loss(&ens.with_rounds(r), &d.rows, &d.labels).unwrap())
            .collect();
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{losses:?}");
        }
    }

    #[test]
    fn multiclass_shapes_and_determinism() {
        let rows: Vec<Vec<f64>> = (0..90).map(|i| vec![(i % 3) as f64 + (i as f64) * 1e-3]).collect();
        let labels = (0..90).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
        let d = Dataset::new(vec!["x".into()], rows, labels).unwrap();
        let cfg = small_cfg(5);
        let ens = fit(&d, &cfg).unwrap();
        assert_eq!(ens.trees.len(), 5);
        assert!(ens.trees.iter().all(|r| r.len() == 3));
        assert_eq!(ens.predict(&d.rows).unwrap(), d.labels);
        assert_eq!(ens, fit(&d, &cfg).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let d = Dataset::new(vec!["x".into()], vec![vec![1.0], vec![2.0]], vec!["a".into(), "a".into()]).unwrap();
        assert!(matches!(fit(&d, &small_cfg(1)), Err(Error::SingleClass(_))));
        let bad = Dataset {
            feature_names: vec!["x".into()],
            rows: vec![vec![1.0], vec![f64::INFINITY]],
            labels: vec!["a".into(), "b".into()],
        };
        assert!(matches!(fit(&bad, &small_cfg(1)), Err(Error::NonFinite { row: 1, .. })));
    }

    #[test]
    fn observer_sees_every_split() {
        let d = toy(80);
        let mut events = 0;
        let ens = fit_with_observer(&d, &small_cfg(3), &mut |e| {
            assert_eq!(e.rows.len(), e.grad.len());
            assert!(e.gain > 0.0);
            events += 1;
        })
        .unwrap();
        let internal: usize = ens.trees.iter().flatten().map(|t| t.len() - t.n_leaves()).sum();
        assert_eq!(events, internal);
    }
}
