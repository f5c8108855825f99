use std::fmt;

use serde::{Deserialize, Serialize};

use super::ensemble::Ensemble;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[true][predicted]`, indexed like `per_class`.
    pub confusion: Vec<Vec<usize>>,
    /// Set when some precision, recall or F1 had a zero denominator and was
    /// reported as 0.
    pub zero_division: bool,
}

impl Metrics {
    pub fn from_predictions<S: AsRef<str>, T: AsRef<str>>(
        classes: &[String],
        truth: &[S],
        predicted: &[T],
    ) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::invalid(format!(
                "{} true labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        if truth.is_empty() {
            return Err(Error::Empty("evaluation set"));
        }
        let index = |l: &str| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let k = classes.len();
        let mut confusion = vec![vec![0usize; k]; k];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[index(t.as_ref())?][index(p.as_ref())?] += 1;
        }
        let n = truth.len();
        let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
        let mut zero_division = false;
        let mut ratio = |num: usize, den: usize| {
            if den == 0 {
                zero_division = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let mut per_class = Vec::with_capacity(k);
        for (i, label) in classes.iter().enumerate() {
            let tp = confusion[i][i];
            let support: usize = confusion[i].iter().sum();
            let predicted_i: usize = (0..k).map(|r| confusion[r][i]).sum();
            let precision = ratio(tp, predicted_i);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_class.push(ClassMetrics {
                label: label.clone(),
                precision,
                recall,
                f1,
                support,
            });
        }
        let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / k as f64;
        Ok(Metrics {
            accuracy: correct as f64 / n as f64,
            macro_f1,
            per_class,
            confusion,
            zero_division,
        })
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .per_class
            .iter()
            .map(|c| c.label.len())
            .max()
            .unwrap_or(0)
            .max(8);
        writeln!(f, "{:<w$}  {:>9}  {:>6}  {:>6}  {:>7}", "class", "precision", "recall", "f1", "support")?;
        for c in &self.per_class {
            writeln!(
                f,
                "{:<w$}  {:>9.4}  {:>6.4}  {:>6.4}  {:>7}",
                c.label, c.precision, c.recall, c.f1, c.support
            )?;
        }
        writeln!(f)?;
        writeln!(f, "accuracy  {:.4}", self.accuracy)?;
        write!(f, "macro_f1  {:.4}", self.macro_f1)?;
        if self.zero_division {
            write!(f, "\nwarning: some scores had a zero denominator and were set to 0")?;
        }
        Ok(())
    }
}

/// Predicts `rows` and scores the predictions against `labels`.
pub fn evaluate<S: AsRef<str>>(ens: &Ensemble, rows: &[Vec<f64>], labels: &[S]) -> Result<Metrics> {
    for l in labels {
        ens.class_index(l.as_ref())?;
    }
    let pred = ens.predict(rows)?;
    Metrics::from_predictions(&ens.classes, labels, &pred)
}

/// Mean negative log-likelihood of the true classes.
pub fn log_loss<S: AsRef<str>>(ens: &Ensemble, rows: &[Vec<f64>], labels: &[S]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let probs = ens.predict_proba(rows)?;
    let mut total = 0.0;
    for (p, l) in probs.iter().zip(labels) {
        let c = ens.class_index(l.as_ref())?;
        total -= p[c].max(1e-300).ln();
    }
    Ok(total / rows.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect() {
        let c = classes(&["a", "b"]);
        let m = Metrics::from_predictions(&c, &["a", "b", "b"], &["a", "b", "b"]).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (1.0, 1.0));
        assert!(!m.zero_division);
    }

    #[test]
    fn constant_predictor() {
        let c = classes(&["a", "b"]);
        let m = Metrics::from_predictions(&c, &["a", "a", "b", "b"], &["a"; 4]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
        assert!(m.zero_division);
    }

    #[test]
    fn hand_computed_confusion() {
        // truth:  a a a a b b b c c c
        // pred:   a a b c b b a c c a
        let c = classes(&["a", "b", "c"]);
        let t = ["a", "a", "a", "a", "b", "b", "b", "c", "c", "c"];
        let p = ["a", "a", "b", "c", "b", "b", "a", "c", "c", "a"];
        let m = Metrics::from_predictions(&c, &t, &p).unwrap();
        assert_eq!(m.confusion, vec![vec![2, 1, 1], vec![1, 2, 0], vec![1, 0, 2]]);
        assert_eq!(m.accuracy, 0.6);
        // a: P 2/4 R 2/4; b: P 2/3 R 2/3; c: P 2/3 R 2/3.
        let f = [0.5, 2.0 / 3.0, 2.0 / 3.0];
        for (cm, f) in m.per_class.iter().zip(f) {
            assert!((cm.f1 - f).abs() < 1e-15);
        }
        assert!((m.macro_f1 - (0.5 + 4.0 / 3.0) / 3.0).abs() < 1e-15);
        assert_eq!(m.per_class.iter().map(|c| c.support).sum::<usize>(), 10);
        let table = m.to_string();
        assert!(table.contains("accuracy  0.6000"));
    }

    #[test]
    fn unknown_label() {
        let c = classes(&["a", "b"]);
        assert!(matches!(
            Metrics::from_predictions(&c, &["z"], &["a"]),
            Err(Error::UnknownLabel(_))
        ));
    }
}
