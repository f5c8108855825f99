//! The per-document feature battery.
//!
//! Eleven real-valued measurements of how regular a text is: compression
//! ratios of the whole, of the second half given the first, and of growing
//! prefixes; sensitivity to word order within sentences; and plain
//! distributional statistics over characters and words.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compress::{
    compression_ratio, conditional_compression, ncd, prefix_curve, CompressorConfig,
    PrefixCurve, PrefixUnit,
};
use crate::corpus::{Document, SegmentedDocument};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats;

pub const FEATURE_COUNT: usize = 11;

/// Column names, in the order of [`FeatureVector::to_array`].
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "compression_ratio",
    "conditional_compression",
    "prefix_mean",
    "prefix_slope",
    "shuffle_gap",
    "shuffle_ncd",
    "char_entropy_norm",
    "word_entropy_norm",
    "ttr",
    "rep_dist_mean",
    "rep_dist_sd",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub compression_ratio: f64,
    /// Second half given the first.
    pub conditional_compression: f64,
    pub prefix_mean: f64,
    /// Least-squares slope of prefix ratio against `k / k_max`.
    pub prefix_slope: f64,
    /// `R(shuffled) − R(original)`.
    pub shuffle_gap: f64,
    pub shuffle_ncd: f64,
    pub char_entropy_norm: f64,
    pub word_entropy_norm: f64,
    pub ttr: f64,
    pub rep_dist_mean: f64,
    pub rep_dist_sd: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.compression_ratio,
            self.conditional_compression,
            self.prefix_mean,
            self.prefix_slope,
            self.shuffle_gap,
            self.shuffle_ncd,
            self.char_entropy_norm,
            self.word_entropy_norm,
            self.ttr,
            self.rep_dist_mean,
            self.rep_dist_sd,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            compression_ratio: v[0],
            conditional_compression: v[1],
            prefix_mean: v[2],
            prefix_slope: v[3],
            shuffle_gap: v[4],
            shuffle_ncd: v[5],
            char_entropy_norm: v[6],
            word_entropy_norm: v[7],
            ttr: v[8],
            rep_dist_mean: v[9],
            rep_dist_sd: v[10],
        }
    }
}

/// One document's features with its identifying columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub doc_id: String,
    pub label: String,
    pub word_count: usize,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub compressor: CompressorConfig,
    pub prefix_unit: PrefixUnit,
    pub prefix_step: usize,
    /// Global seed; each document's shuffle seed is derived from it and the
    /// document id.
    pub seed: u64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            compressor: CompressorConfig::default(),
            prefix_unit: PrefixUnit::Character,
            prefix_step: 200,
            seed: 0,
        }
    }
}

/// What the exported feature table was computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMetadata {
    pub features: Vec<String>,
    pub compressor_level: u32,
    pub include_header: bool,
    pub prefix_unit: PrefixUnit,
    pub prefix_step: usize,
    pub seed: u64,
    pub conventions: BTreeMap<String, String>,
}

impl FeatureMetadata {
    pub fn new(cfg: &FeatureConfig) -> Self {
        let conventions = [
            ("repetition_distance", "difference of word indices of consecutive occurrences"),
            ("no_repeat_sentinel", "rep_dist_mean = word count, rep_dist_sd = 0"),
            ("rep_dist_sd", "population standard deviation"),
            ("single_symbol_entropy", "normalized entropy = 1.0 when one distinct symbol"),
            ("entropy_estimator", "plug-in (empirical frequencies)"),
            ("char_entropy_symbols", "Unicode scalar values of the normalized text"),
            ("prefix_slope_regressor", "k / k_max"),
            ("half_split", "sentence boundary nearest the byte midpoint, earlier on ties"),
            ("shuffle_seed", "derived from (seed, doc_id)"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        FeatureMetadata {
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            compressor_level: cfg.compressor.level(),
            include_header: cfg.compressor.include_header(),
            prefix_unit: cfg.prefix_unit,
            prefix_step: cfg.prefix_step,
            seed: cfg.seed,
            conventions,
        }
    }
}

/// Splits the document bytes at the sentence start nearest to half the
/// byte length (the earlier one on ties). Whitespace between the two
/// sentences stays with the first half, so `x ∥ y` is the document.
pub fn split_halves(seg: &SegmentedDocument) -> Result<(&[u8], &[u8])> {
    let spans = seg.sentence_spans();
    if spans.len() < 2 {
        return Err(Error::CannotSplit(format!(
            "document {} has a single sentence",
            seg.doc.id
        )));
    }
    let bytes = seg.bytes();
    let mid = bytes.len() as f64 / 2.0;
    let cut = spans[1..]
        .iter()
        .map(|s| s.start)
        .min_by(|&a, &b| (a as f64 - mid).abs().total_cmp(&(b as f64 - mid).abs()))
        .expect("at least one interior boundary");
    Ok(bytes.split_at(cut))
}

/// Permutes the whitespace-delimited tokens of every sentence uniformly and
/// independently. Tokens are written back into the original slots, so
/// inter-token whitespace, sentence order and all text outside sentences
/// are unchanged.
pub fn shuffle_within_sentences(seg: &SegmentedDocument, seed: u64) -> Document {
    let text = seg.text();
    let mut rng = seed::rng(seed);
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for span in seg.sentence_spans() {
        let sentence = &text[span.clone()];
        let mut slots = Vec::new();
        let mut start = None;
        for (i, c) in sentence.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    slots.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            slots.push(s..sentence.len());
        }
        let mut tokens: Vec<&str> = slots.iter().map(|r| &sentence[r.clone()]).collect();
        tokens.shuffle(&mut rng);

        out.push_str(&text[last..span.start]);
        let mut pos = 0;
        for (slot, tok) in slots.iter().zip(tokens) {
            out.push_str(&sentence[pos..slot.start]);
            out.push_str(tok);
            pos = slot.end;
        }
        out.push_str(&sentence[pos..]);
        last = span.end;
    }
    out.push_str(&text[last..]);

    let mut doc = seg.doc.clone();
    doc.text = out;
    doc
}

/// Plug-in entropy of the empirical distribution divided by `log2 V`.
/// `1.0` when only one distinct symbol occurs.
pub fn normalized_entropy<T: Eq + Hash>(tokens: impl IntoIterator<Item = T>) -> Result<f64> {
    let mut counts: HashMap<T, u64> = HashMap::new();
    let mut total = 0u64;
    for t in tokens {
        *counts.entry(t).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Empty("entropy of no tokens"));
    }
    let v = counts.len();
    if v == 1 {
        return Ok(1.0);
    }
    // Summation order fixed by sorting, so the result does not depend on
    // hash iteration order.
    let mut c: Vec<u64> = counts.into_values().collect();
    c.sort_unstable();
    let n = total as f64;
    let h: f64 = c
        .iter()
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum();
    Ok((h / (v as f64).log2()).clamp(0.0, 1.0))
}

pub fn type_token_ratio<S: AsRef<str>>(words: &[S]) -> Result<f64> {
    if words.is_empty() {
        return Err(Error::Empty("type-token ratio of no words"));
    }
    let distinct: std::collections::HashSet<&str> = words.iter().map(AsRef::as_ref).collect();
    Ok(distinct.len() as f64 / words.len() as f64)
}

/// Mean and population SD of index gaps between consecutive occurrences of
/// the same word. `(N, 0)` when no word repeats.
pub fn repetition_distances<S: AsRef<str>>(words: &[S]) -> Result<(f64, f64)> {
    if words.is_empty() {
        return Err(Error::Empty("repetition distances of no words"));
    }
    let mut last_seen: HashMap<&str, usize> = HashMap::new();
    let mut gaps = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if let Some(prev) = last_seen.insert(w.as_ref(), i) {
            gaps.push((i - prev) as f64);
        }
    }
    if gaps.is_empty() {
        return Ok((words.len() as f64, 0.0));
    }
    Ok((stats::mean(&gaps), stats::population_sd(&gaps)))
}

/// Mean ratio and OLS slope of ratio on `k / k_max`. A single point gives
/// slope 0.
pub fn prefix_stats(curve: &PrefixCurve) -> Result<(f64, f64)> {
    let pts = &curve.points;
    let last = pts.last().ok_or(Error::Empty("prefix curve has no points"))?;
    let ys: Vec<f64> = pts.iter().map(|p| p.ratio).collect();
    let k_max = last.k as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.k as f64 / k_max).collect();
    Ok((stats::mean(&ys), stats::ols_slope(&xs, &ys)))
}

fn tagged<T>(seg: &SegmentedDocument, feature: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Feature {
        doc_id: seg.doc.id.clone(),
        feature,
        source: Box::new(e),
    })
}

/// Computes all eleven features. Reads only the document text and id; the
/// label is never consulted.
pub fn extract(seg: &SegmentedDocument, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let c = &cfg.compressor;
    let bytes = seg.bytes();

    let compression_ratio = tagged(seg, "compression_ratio", compression_ratio(bytes, c))?;

    let conditional_compression = tagged(
        seg,
        "conditional_compression",
        split_halves(seg).and_then(|(x, y)| conditional_compression(x, y, c)),
    )?;

    let (prefix_mean, prefix_slope) = tagged(
        seg,
        "prefix_slope",
        prefix_curve(seg, cfg.prefix_unit, cfg.prefix_step, c).and_then(|cv| prefix_stats(&cv)),
    )?;

    let shuffled = shuffle_within_sentences(seg, seed::derive_seed(cfg.seed, seg.doc.id.as_bytes()));
    let shuffled_ratio = tagged(seg, "shuffle_gap", crate::compress::compression_ratio(shuffled.bytes(), c))?;
    let shuffle_ncd = tagged(seg, "shuffle_ncd", ncd(bytes, shuffled.bytes(), c))?;

    let char_entropy_norm = tagged(seg, "char_entropy_norm", normalized_entropy(seg.text().chars()))?;
    let word_entropy_norm = tagged(
        seg,
        "word_entropy_norm",
        normalized_entropy(seg.words.iter().map(String::as_str)),
    )?;
    let ttr = tagged(seg, "ttr", type_token_ratio(&seg.words))?;
    let (rep_dist_mean, rep_dist_sd) =
        tagged(seg, "rep_dist_mean", repetition_distances(&seg.words))?;

    Ok(FeatureVector {
        compression_ratio,
        conditional_compression,
        prefix_mean,
        prefix_slope,
        shuffle_gap: shuffled_ratio - compression_ratio,
        shuffle_ncd,
        char_entropy_norm,
        word_entropy_norm,
        ttr,
        rep_dist_mean,
        rep_dist_sd,
    })
}

/// Extracts every document in parallel. Output order follows input order
/// and values do not depend on it.
pub fn extract_all(docs: &[SegmentedDocument], cfg: &FeatureConfig) -> Result<Vec<FeatureRow>> {
    docs.par_iter()
        .map(|seg| {
            Ok(FeatureRow {
                doc_id: seg.doc.id.clone(),
                label: seg.doc.label.clone(),
                word_count: seg.word_count,
                features: extract(seg, cfg)?,
            })
        })
        .collect()
}
