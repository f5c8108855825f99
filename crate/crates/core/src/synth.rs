//! Controlled statistical regimes.
//!
//! A regime puts mass `h` on one head word and spreads `1 − h` uniformly
//! over the remaining `n − 1` words, moving from uniform (`h = 1/n`,
//! `log2 n` bits) to a point mass (`h = 1`, 0 bits). Texts are i.i.d. draws
//! joined by single spaces. Random baselines draw words uniformly or by
//! corpus frequency.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compress::{compression_ratio, CompressorConfig};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats;

/// Slack accepted on the `[1/n, 1]` bounds for values produced by float
/// grid arithmetic.
const H_TOLERANCE: f64 = 1e-12;

fn check_regime(h: f64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("vocabulary size {n} must be at least 2")));
    }
    let lo = 1.0 / n as f64;
    if !(h >= lo - H_TOLERANCE && h <= 1.0 + H_TOLERANCE) {
        return Err(Error::invalid(format!("h = {h} outside [1/{n}, 1]")));
    }
    Ok(())
}

/// Probability vector of the regime: `h` for the head word, `(1−h)/(n−1)`
/// for each of the others.
pub fn regime_pmf(h: f64, n: usize) -> Result<Vec<f64>> {
    check_regime(h, n)?;
    let h = h.clamp(0.0, 1.0);
    let tail = (1.0 - h) / (n - 1) as f64;
    let mut p = vec![tail; n];
    p[0] = h;
    Ok(p)
}

/// Entropy of the regime in bits, with `0 · log 0 = 0`.
pub fn regime_entropy(h: f64, n: usize) -> Result<f64> {
    check_regime(h, n)?;
    let h = h.clamp(0.0, 1.0);
    let plogp = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
    let rest = 1.0 - h;
    let tail = if rest > 0.0 {
        rest * (rest / (n - 1) as f64).log2()
    } else {
        0.0
    };
    let bits = -(plogp(h) + tail);
    // -(0.0) and rounding dust below zero both map to +0.
    Ok(bits.max(0.0))
}

/// `n` equally spaced values from `1/n` to `1`, endpoints exact.
pub fn h_grid(n: usize, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::invalid(format!("grid needs at least 2 points, got {count}")));
    }
    if n < 2 {
        return Err(Error::invalid(format!("vocabulary size {n} must be at least 2")));
    }
    let lo = 1.0 / n as f64;
    let span = 1.0 - lo;
    let mut grid: Vec<f64> = (0..count)
        .map(|i| lo + span * i as f64 / (count - 1) as f64)
        .collect();
    grid[0] = lo;
    grid[count - 1] = 1.0;
    Ok(grid)
}

/// Deterministic fixed-length pseudo-words `w000001`, `w000002`, …
pub fn pseudo_vocabulary(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(6);
    (1..=n).map(|i| format!("w{i:0width$}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRegime {
    h: f64,
    vocab: Vec<String>,
}

impl EntropyRegime {
    /// Regime over the pseudo-word vocabulary of size `n`.
    pub fn new(h: f64, n: usize) -> Result<Self> {
        Self::with_vocabulary(h, pseudo_vocabulary(n))
    }

    /// Regime over a caller-supplied vocabulary; `vocab[0]` is the head word.
    pub fn with_vocabulary(h: f64, vocab: Vec<String>) -> Result<Self> {
        check_regime(h, vocab.len())?;
        if vocab.iter().any(String::is_empty) {
            return Err(Error::invalid("vocabulary contains an empty word"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = vocab.iter().find(|w| !seen.insert(w.as_str())) {
            return Err(Error::invalid(format!("vocabulary word {dup:?} is repeated")));
        }
        Ok(EntropyRegime {
            h: h.clamp(0.0, 1.0),
            vocab,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn pmf(&self) -> Vec<f64> {
        regime_pmf(self.h, self.n()).expect("validated on construction")
    }

    pub fn entropy_bits(&self) -> f64 {
        regime_entropy(self.h, self.n()).expect("validated on construction")
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        // Head with probability h, otherwise uniform over the tail: this is
        // exactly the regime pmf.
        if rng.random::<f64>() < self.h {
            0
        } else {
            1 + rng.random_range(0..self.n() - 1)
        }
    }
}

/// Where a sampled text came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextSource {
    Regime { h: f64, n: usize },
    Baseline { mode: BaselineMode, vocab_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledText {
    pub source: TextSource,
    pub length: usize,
    pub seed: u64,
    pub text: String,
}

/// `length` i.i.d. draws from the regime, joined by single spaces.
pub fn sample_text(regime: &EntropyRegime, length: usize, seed: u64) -> Result<SampledText> {
    if length == 0 {
        return Err(Error::invalid("sample length must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    let words: Vec<&str> = (0..length)
        .map(|_| regime.vocab[regime.draw(&mut rng)].as_str())
        .collect();
    Ok(SampledText {
        source: TextSource::Regime {
            h: regime.h,
            n: regime.n(),
        },
        length,
        seed,
        text: words.join(" "),
    })
}

/// Groups a space-separated token stream into sentences of
/// `words_per_sentence` tokens: first letter capitalized, `.` appended.
/// The token sequence itself is unchanged.
pub fn punctuate(text: &str, words_per_sentence: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    words
        .chunks(words_per_sentence.max(1))
        .map(|chunk| {
            let mut s = chunk.join(" ");
            if let Some(first) = s.chars().next() {
                let upper: String = first.to_uppercase().collect();
                s.replace_range(..first.len_utf8(), &upper);
            }
            s.push('.');
            s
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub entropy_bits: f64,
    pub mean_ratio: f64,
    /// Population standard deviation of the per-sample ratios.
    pub sd_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub n: usize,
    pub count: usize,
    pub tokens: usize,
    pub samples_per_h: usize,
    pub seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            n: 5000,
            count: 20,
            tokens: 479,
            samples_per_h: 50,
            seed: 0,
        }
    }
}

/// Compression ratio against regime entropy on an equally spaced `h` grid.
///
/// Sample `j` at grid point `i` uses a seed derived from `(seed, i, j)`, so
/// the table does not depend on thread scheduling.
pub fn entropy_sweep(params: &SweepParams, cfg: &CompressorConfig) -> Result<Vec<SweepRow>> {
    if params.samples_per_h == 0 {
        return Err(Error::invalid("samples_per_h must be at least 1"));
    }
    let grid = h_grid(params.n, params.count)?;
    let vocab = pseudo_vocabulary(params.n);
    grid.iter()
        .enumerate()
        .map(|(i, &h)| {
            let regime = EntropyRegime::with_vocabulary(h, vocab.clone())?;
            let ratios = (0..params.samples_per_h)
                .into_par_iter()
                .map(|j| {
                    let s = seed::derive_indexed(params.seed, &[i as u64, j as u64]);
                    let t = sample_text(&regime, params.tokens, s)?;
                    compression_ratio(t.text.as_bytes(), cfg)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SweepRow {
                h,
                entropy_bits: regime.entropy_bits(),
                mean_ratio: stats::mean(&ratios),
                sd_ratio: stats::population_sd(&ratios),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random baselines

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    Uniform,
    Empirical,
}

impl fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineMode::Uniform => "uniform",
            BaselineMode::Empirical => "empirical",
        })
    }
}

impl FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(BaselineMode::Uniform),
            "empirical" | "weighted" => Ok(BaselineMode::Empirical),
            other => Err(Error::invalid(format!("unknown baseline mode {other:?}"))),
        }
    }
}

/// A word list, optionally with an empirical distribution over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub words: Vec<String>,
    pub weights: Option<Vec<f64>>,
}

impl Vocabulary {
    pub fn uniform(words: Vec<String>) -> Self {
        Vocabulary {
            words,
            weights: None,
        }
    }

    /// Empirical distribution of a token stream: weights are relative
    /// frequencies, words ordered by descending count then lexically.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t.as_ref().to_string()).or_default() += 1;
        }
        Self::from_counts(counts)
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut pairs: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let total: u64 = pairs.iter().map(|(_, c)| c).sum();
        let weights = pairs.iter().map(|(_, c)| *c as f64 / total as f64).collect();
        Vocabulary {
            words: pairs.into_iter().map(|(w, _)| w).collect(),
            weights: Some(weights),
        }
    }

    /// Parses `word` or `word<TAB>count` lines. Counts, when present on every
    /// line, become normalized weights.
    pub fn from_tsv(src: &str) -> Result<Self> {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        for (idx, line) in src.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let word = parts.next().unwrap_or("").trim();
            if word.is_empty() {
                return Err(Error::invalid(format!("vocabulary line {}: empty word", idx + 1)));
            }
            words.push(word.to_string());
            if let Some(c) = parts.next() {
                let c: f64 = c.trim().parse().map_err(|_| {
                    Error::invalid(format!("vocabulary line {}: bad count {c:?}", idx + 1))
                })?;
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::invalid(format!(
                        "vocabulary line {}: count must be finite and non-negative",
                        idx + 1
                    )));
                }
                counts.push(c);
            }
        }
        let weights = if !counts.is_empty() {
            if counts.len() != words.len() {
                return Err(Error::invalid("vocabulary mixes weighted and unweighted lines"));
            }
            let total: f64 = counts.iter().sum();
            if total <= 0.0 {
                return Err(Error::invalid("vocabulary counts sum to zero"));
            }
            Some(counts.iter().map(|c| c / total).collect())
        } else {
            None
        };
        Ok(Vocabulary { words, weights })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A random-word document of `length` words drawn i.i.d., uniformly over
/// the vocabulary or by its empirical weights.
pub fn random_baseline(
    vocab: &Vocabulary,
    length: usize,
    mode: BaselineMode,
    seed: u64,
) -> Result<SampledText> {
    if vocab.is_empty() {
        return Err(Error::Empty("baseline vocabulary"));
    }
    if length == 0 {
        return Err(Error::invalid("sample length must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    let picks: Vec<usize> = match mode {
        BaselineMode::Uniform => (0..length)
            .map(|_| rng.random_range(0..vocab.len()))
            .collect(),
        BaselineMode::Empirical => {
            let weights = vocab
                .weights
                .as_ref()
                .ok_or_else(|| Error::invalid("empirical baseline requires word weights"))?;
            if weights.len() != vocab.len() {
                return Err(Error::invalid("weights and words differ in length"));
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
            }
            let dist = WeightedIndex::new(weights)
                .map_err(|e| Error::invalid(format!("bad weights: {e}")))?;
            (0..length).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    let text = picks
        .into_iter()
        .map(|i| vocab.words[i].as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(SampledText {
        source: TextSource::Baseline {
            mode,
            vocab_size: vocab.len(),
        },
        length,
        seed,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pmf_examples() {
        assert_eq!(regime_pmf(1.0, 5).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let u = regime_pmf(0.25, 4).unwrap();
        assert!(u.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        let p = regime_pmf(0.7, 4).unwrap();
        assert_eq!(p[0], 0.7);
        for &t in &p[1..] {
            assert!((t - 0.1).abs() < 1e-15);
        }
        assert!(regime_pmf(0.1, 4).is_err());
        assert!(regime_pmf(1.5, 4).is_err());
        assert!(regime_pmf(0.5, 1).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(regime_entropy(1.0, 7).unwrap(), 0.0);
        assert!(regime_entropy(1.0, 7).unwrap().is_sign_positive());
        assert!((regime_entropy(1.0 / 8.0, 8).unwrap() - 3.0).abs() < 1e-12);
        // Independent evaluation: -(0.7 log2 0.7 + 0.3 log2 0.1) = 1.3567796494470397
        assert!((regime_entropy(0.7, 4).unwrap() - 1.3567796494470397).abs() < 1e-12);
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = h_grid(5000, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 1.0 / 5000.0);
        assert_eq!(g[19], 1.0);
        let step = (1.0 - 1.0 / 5000.0) / 19.0;
        for w in g.windows(2) {
            assert!((w[1] - w[0] - step).abs() < 1e-12);
        }
        assert!(h_grid(10, 1).is_err());
    }

    #[test]
    fn entropy_decreases_along_grid() {
        for n in [2usize, 10, 5000] {
            let g = h_grid(n, 20).unwrap();
            let e: Vec<f64> = g.iter().map(|&h| regime_entropy(h, n).unwrap()).collect();
            let max = e.iter().cloned().fold(f64::MIN, f64::max);
            assert_eq!(max, e[0]);
            for w in e.windows(2) {
                assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn pseudo_words() {
        let v = pseudo_vocabulary(3);
        assert_eq!(v, ["w000001", "w000002", "w000003"]);
        assert_eq!(pseudo_vocabulary(1_234_567)[0], "w0000001");
    }

    #[test]
    fn regime_vocab_validation() {
        assert!(EntropyRegime::with_vocabulary(0.5, vec!["a".into(), "a".into()]).is_err());
        assert!(EntropyRegime::with_vocabulary(0.5, vec!["a".into(), "".into()]).is_err());
    }

    #[test]
    fn dirac_sampling() {
        let r = EntropyRegime::new(1.0, 50).unwrap();
        let t = sample_text(&r, 10, 3).unwrap();
        assert_eq!(t.text, ["w000001"; 10].join(" "));
        assert!(sample_text(&r, 0, 3).is_err());
    }

    #[test]
    fn head_frequency_converges() {
        let r = EntropyRegime::new(0.7, 4).unwrap();
        let t = sample_text(&r, 100_000, 11).unwrap();
        let head = t.text.split(' ').filter(|w| *w == "w000001").count();
        let freq = head as f64 / 100_000.0;
        assert!((freq - 0.7).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn sampling_is_seeded() {
        let r = EntropyRegime::new(0.3, 100).unwrap();
        assert_eq!(sample_text(&r, 50, 9).unwrap(), sample_text(&r, 50, 9).unwrap());
        assert_ne!(sample_text(&r, 50, 9).unwrap().text, sample_text(&r, 50, 10).unwrap().text);
    }

    #[test]
    fn punctuation_grouping() {
        assert_eq!(punctuate("a b c d e", 2), "A b. C d. E.");
        assert_eq!(punctuate("w1 w2", 12), "W1 w2.");
    }

    #[test]
    fn small_sweep() {
        let params = SweepParams {
            n: 50,
            count: 5,
            tokens: 200,
            samples_per_h: 4,
            seed: 1,
        };
        let cfg = CompressorConfig::default();
        let rows = entropy_sweep(&params, &cfg).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].h, 1.0 / 50.0);
        assert_eq!(rows[4].h, 1.0);
        assert_eq!(rows[4].sd_ratio, 0.0);
        let min = rows.iter().map(|r| r.mean_ratio).fold(f64::MAX, f64::min);
        assert_eq!(min, rows[4].mean_ratio);
        assert_eq!(rows, entropy_sweep(&params, &cfg).unwrap());
    }

    #[test]
    fn baselines() {
        let one = Vocabulary::uniform(vec!["echo".into()]);
        let t = random_baseline(&one, 4, BaselineMode::Uniform, 0).unwrap();
        assert_eq!(t.text, "echo echo echo echo");
        assert!(random_baseline(&one, 4, BaselineMode::Empirical, 0).is_err());

        let v = Vocabulary::from_tokens(["the", "the", "the", "cat"]);
        assert_eq!(v.words, ["the", "cat"]);
        assert_eq!(v.weights.as_deref(), Some(&[0.75, 0.25][..]));
        let t = random_baseline(&v, 479, BaselineMode::Empirical, 5).unwrap();
        assert_eq!(t.text.split(' ').count(), 479);
        assert!(random_baseline(&Vocabulary::uniform(vec![]), 3, BaselineMode::Uniform, 0).is_err());
    }

    #[test]
    fn vocabulary_tsv() {
        let v = Vocabulary::from_tsv("a\t3\nb\t1\n").unwrap();
        assert_eq!(v.weights, Some(vec![0.75, 0.25]));
        let v = Vocabulary::from_tsv("a\nb\n\n").unwrap();
        assert_eq!(v.words.len(), 2);
        assert!(v.weights.is_none());
        assert!(Vocabulary::from_tsv("a\t1\nb\n").is_err());
        assert!(Vocabulary::from_tsv("a\tx\n").is_err());
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one(n in 2usize..10_000, t in 0.0f64..=1.0) {
            let h = 1.0 / n as f64 + t * (1.0 - 1.0 / n as f64);
            let p = regime_pmf(h, n).unwrap();
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn sampled_tokens_belong_to_vocab(h in 0.01f64..=1.0, len in 1usize..200, seed: u64) {
            let r = EntropyRegime::new(h.max(0.01), 100).unwrap();
            let t = sample_text(&r, len, seed).unwrap();
            let words: Vec<&str> = t.text.split(' ').collect();
            prop_assert_eq!(words.len(), len);
            prop_assert!(words.iter().all(|w| r.vocab().iter().any(|v| v == w)));
        }
    }
}
