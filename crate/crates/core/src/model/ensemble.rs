use serde::{Deserialize, Serialize};

use super::train::{sigmoid, softmax_in_place};
use super::tree::Tree;
use super::GBMConfig;
use crate::error::{Error, Result};

/// A trained model. With two classes there is one logistic score per round
/// (for `classes[1]`); otherwise one softmax score per class per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub format_version: u32,
    pub classes: Vec<String>,
    /// `trees[round][output]`.
    pub trees: Vec<Vec<Tree>>,
    pub base_scores: Vec<f64>,
    pub bin_edges: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub config: GBMConfig,
}

impl Ensemble {
    pub fn n_outputs(&self) -> usize {
        self.base_scores.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }

    /// The first `rounds` boosting rounds only.
    pub fn with_rounds(&self, rounds: usize) -> Ensemble {
        let mut e = self.clone();
        e.trees.truncate(rounds);
        e
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(Error::Arity {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Summed tree outputs plus base scores, before the link function.
    pub fn raw_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        let mut s = self.base_scores.clone();
        for round in &self.trees {
            for (out, tree) in round.iter().enumerate() {
                s[out] += tree.predict(x);
            }
        }
        Ok(s)
    }

    fn proba_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut s = self.raw_scores(x)?;
        if self.n_outputs() == 1 {
            let p = sigmoid(s[0]);
            Ok(vec![1.0 - p, p])
        } else {
            softmax_in_place(&mut s);
            Ok(s)
        }
    }

    /// Class probabilities per row, columns ordered as `classes`.
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|x| self.proba_row(x)).collect()
    }

    /// Like [`predict_proba`](Self::predict_proba) for columns given by
    /// name in any order.
    pub fn predict_proba_named(&self, names: &[String], rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let order = self.column_order(names)?;
        rows.iter()
            .map(|r| {
                if r.len() != names.len() {
                    return Err(Error::Arity { expected: names.len(), got: r.len() });
                }
                let x: Vec<f64> = order.iter().map(|&j| r[j]).collect();
                self.proba_row(&x)
            })
            .collect()
    }

    /// Position in `names` of each model feature.
    pub fn column_order(&self, names: &[String]) -> Result<Vec<usize>> {
        self.feature_names
            .iter()
            .map(|f| {
                names
                    .iter()
                    .position(|n| n == f)
                    .ok_or_else(|| Error::invalid(format!("input lacks feature column {f}")))
            })
            .collect()
    }

    /// Most probable class per row; ties go to the earlier class.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<String>> {
        rows.iter()
            .map(|x| {
                let p = self.proba_row(x)?;
                let best = p
                    .iter()
                    .enumerate()
                    .fold(0, |b, (i, &v)| if v > p[b] { i } else { b });
                Ok(self.classes[best].clone())
            })
            .collect()
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit, Dataset};

    fn data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..120).map(|i| vec![(i % 10) as f64, (i % 3) as f64]).collect();
        let labels = (0..120)
            .map(|i| ["p", "q", "r", "p"][(i % 10) / 3].to_string())
            .collect();
        Dataset::new(vec!["u".into(), "v".into()], rows, labels).unwrap()
    }

    fn cfg() -> GBMConfig {
        GBMConfig { n_rounds: 10, min_samples_leaf: 3, ..Default::default() }
    }

    #[test]
    fn zero_rounds_give_priors() {
        let d = data();
        let ens = fit(&d, &cfg()).unwrap().with_rounds(0);
        let priors = [48.0 / 120.0, 36.0 / 120.0, 36.0 / 120.0];
        for p in ens.predict_proba(&d.rows).unwrap() {
            for (a, b) in p.iter().zip(priors) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rows_are_distributions() {
        let d = data();
        let ens = fit(&d, &cfg()).unwrap();
        for p in ens.predict_proba(&d.rows).unwrap() {
            assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(matches!(ens.predict_proba(&[vec![1.0]]), Err(Error::Arity { .. })));
    }

    #[test]
    fn argmax_survives_monotone_transform() {
        let d = data();
        let ens = fit(&d, &cfg()).unwrap();
        for x in &d.rows {
            let s = ens.raw_scores(x).unwrap();
            let t: Vec<f64> = s.iter().map(|v| 3.0 * v.powi(3) + 1.0).collect();
            let am = |v: &[f64]| v.iter().enumerate().fold(0, |b, (i, &x)| if x > v[b] { i } else { b });
            assert_eq!(am(&s), am(&t));
        }
    }

    #[test]
    fn named_columns() {
        let d = data();
        let ens = fit(&d, &cfg()).unwrap();
        let swapped: Vec<Vec<f64>> = d.rows.iter().map(|r| vec![r[1], r[0]]).collect();
        let names = vec!["v".to_string(), "u".to_string()];
        assert_eq!(
            ens.predict_proba_named(&names, &swapped).unwrap(),
            ens.predict_proba(&d.rows).unwrap()
        );
        assert!(ens.predict_proba_named(&["v".to_string()], &[vec![0.0]]).is_err());
    }
}
