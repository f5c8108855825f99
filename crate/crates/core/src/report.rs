//! Curve aggregation and tabular export.
//!
//! Tables are written with a fixed column order. Floats use the shortest
//! representation that parses back to the same value, with `.` as the
//! decimal point, so a write/read/write cycle reproduces the file byte for
//! byte. Every table can carry a `<file>.meta.json` sidecar.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::compress::{prefix_curve, CompressorConfig, PrefixCurve, PrefixUnit};
use crate::corpus::SegmentedDocument;
use crate::error::{Error, Result};
use crate::features::{FeatureRow, FeatureVector};
use crate::stats;
use crate::synth::SweepRow;

pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_MIN_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveBin {
    pub bin_center: f64,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub label: String,
    pub bins: Vec<CurveBin>,
}

fn summarize(center: f64, mut ratios: Vec<f64>) -> CurveBin {
    // Sorting first makes the mean independent of input order.
    ratios.sort_by(f64::total_cmp);
    CurveBin {
        bin_center: center,
        mean: stats::mean(&ratios),
        q25: stats::quantile_sorted(&ratios, 0.25),
        q75: stats::quantile_sorted(&ratios, 0.75),
        count: ratios.len(),
    }
}

/// Pools prefix points per label into `n_bins` uniform bins over the k
/// range observed across all curves, so every label shares bin edges.
/// Bins holding fewer than `min_count` points are dropped.
pub fn bin_curves(curves: &[PrefixCurve], n_bins: usize, min_count: usize) -> Result<Vec<BinnedCurve>> {
    if n_bins == 0 || min_count == 0 {
        return Err(Error::invalid("bins and min_count must be at least 1"));
    }
    let points = curves.iter().flat_map(|c| c.points.iter());
    let (lo, hi) = points.fold((usize::MAX, 0), |(lo, hi), p| (lo.min(p.k), hi.max(p.k)));
    if lo > hi {
        return Err(Error::Empty("no prefix curves to aggregate"));
    }
    let (lo, hi) = (lo as f64, hi as f64);
    let width = (hi - lo) / n_bins as f64;
    let bin_of = |k: usize| {
        if width == 0.0 {
            0
        } else {
            (((k as f64 - lo) / width).floor() as usize).min(n_bins - 1)
        }
    };
    let center = |i: usize| {
        if width == 0.0 {
            lo
        } else {
            lo + (i as f64 + 0.5) * width
        }
    };

    let mut pooled: BTreeMap<&str, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for c in curves {
        let by_bin = pooled.entry(c.label.as_str()).or_default();
        for p in &c.points {
            by_bin.entry(bin_of(p.k)).or_default().push(p.ratio);
        }
    }
    Ok(pooled
        .into_iter()
        .map(|(label, by_bin)| BinnedCurve {
            label: label.to_string(),
            bins: by_bin
                .into_iter()
                .filter(|(_, r)| r.len() >= min_count)
                .map(|(i, r)| summarize(center(i), r))
                .collect(),
        })
        .collect())
}

/// Groups documents by label and summarizes the ratio of the first `k`
/// sentences across documents, for each `k` reached by at least
/// `min_count` of them.
pub fn incremental_group_curve(
    docs: &[SegmentedDocument],
    cfg: &CompressorConfig,
    min_count: usize,
) -> Result<Vec<BinnedCurve>> {
    let curves = docs
        .par_iter()
        .map(|d| prefix_curve(d, PrefixUnit::Sentence, 1, cfg))
        .collect::<Result<Vec<_>>>()?;
    group_by_k(&curves, min_count)
}

/// Per-k summary of already computed curves, without re-binning.
pub fn group_by_k(curves: &[PrefixCurve], min_count: usize) -> Result<Vec<BinnedCurve>> {
    if curves.is_empty() {
        return Err(Error::Empty("no prefix curves to aggregate"));
    }
    let mut pooled: BTreeMap<&str, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for c in curves {
        let by_k = pooled.entry(c.label.as_str()).or_default();
        for p in &c.points {
            by_k.entry(p.k).or_default().push(p.ratio);
        }
    }
    Ok(pooled
        .into_iter()
        .map(|(label, by_k)| BinnedCurve {
            label: label.to_string(),
            bins: by_k
                .into_iter()
                .filter(|(_, r)| r.len() >= min_count.max(1))
                .map(|(k, r)| summarize(k as f64, r))
                .collect(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummaryRecord {
    pub label: String,
    pub bin_center: f64,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    pub count: usize,
}

pub fn summary_records(curves: &[BinnedCurve]) -> Vec<CurveSummaryRecord> {
    curves
        .iter()
        .flat_map(|c| {
            c.bins.iter().map(|b| CurveSummaryRecord {
                label: c.label.clone(),
                bin_center: b.bin_center,
                mean: b.mean,
                q25: b.q25,
                q75: b.q75,
                count: b.count,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePointRecord {
    pub doc_id: String,
    pub label: String,
    pub unit: PrefixUnit,
    pub k: usize,
    pub bytes_in: usize,
    pub ratio: f64,
}

pub fn point_records(curves: &[PrefixCurve]) -> Vec<CurvePointRecord> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(|p| CurvePointRecord {
                doc_id: c.doc_id.clone(),
                label: c.label.clone(),
                unit: c.unit,
                k: p.k,
                bytes_in: p.bytes_in,
                ratio: p.ratio,
            })
        })
        .collect()
}

/// Flat CSV form of a [`FeatureRow`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub doc_id: String,
    pub label: String,
    pub word_count: usize,
    pub compression_ratio: f64,
    pub conditional_compression: f64,
    pub prefix_mean: f64,
    pub prefix_slope: f64,
    pub shuffle_gap: f64,
    pub shuffle_ncd: f64,
    pub char_entropy_norm: f64,
    pub word_entropy_norm: f64,
    pub ttr: f64,
    pub rep_dist_mean: f64,
    pub rep_dist_sd: f64,
}

impl From<&FeatureRow> for FeatureRecord {
    fn from(r: &FeatureRow) -> Self {
        let f = &r.features;
        FeatureRecord {
            doc_id: r.doc_id.clone(),
            label: r.label.clone(),
            word_count: r.word_count,
            compression_ratio: f.compression_ratio,
            conditional_compression: f.conditional_compression,
            prefix_mean: f.prefix_mean,
            prefix_slope: f.prefix_slope,
            shuffle_gap: f.shuffle_gap,
            shuffle_ncd: f.shuffle_ncd,
            char_entropy_norm: f.char_entropy_norm,
            word_entropy_norm: f.word_entropy_norm,
            ttr: f.ttr,
            rep_dist_mean: f.rep_dist_mean,
            rep_dist_sd: f.rep_dist_sd,
        }
    }
}

impl From<FeatureRecord> for FeatureRow {
    fn from(r: FeatureRecord) -> Self {
        FeatureRow {
            doc_id: r.doc_id,
            label: r.label,
            word_count: r.word_count,
            features: FeatureVector {
                compression_ratio: r.compression_ratio,
                conditional_compression: r.conditional_compression,
                prefix_mean: r.prefix_mean,
                prefix_slope: r.prefix_slope,
                shuffle_gap: r.shuffle_gap,
                shuffle_ncd: r.shuffle_ncd,
                char_entropy_norm: r.char_entropy_norm,
                word_entropy_norm: r.word_entropy_norm,
                ttr: r.ttr,
                rep_dist_mean: r.rep_dist_mean,
                rep_dist_sd: r.rep_dist_sd,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRecord {
    pub rank: usize,
    pub feature: String,
    pub mean_abs_shap: f64,
    pub class: String,
}

// ---------------------------------------------------------------------------
// IO

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Like [`write_csv`], but an empty table still gets its header.
pub fn write_csv_with_header<T: Serialize>(path: impl AsRef<Path>, header: &[&str], rows: &[T]) -> Result<()> {
    if !rows.is_empty() {
        return write_csv(path, rows);
    }
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    let mut f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(s.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(serde_json::from_str(&raw)?)
}

pub fn write_features(path: impl AsRef<Path>, rows: &[FeatureRow]) -> Result<()> {
    let recs: Vec<FeatureRecord> = rows.iter().map(FeatureRecord::from).collect();
    write_csv(path, &recs)
}

/// Reads a feature table, rejecting non-finite values.
pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let recs: Vec<FeatureRecord> = read_csv(&path)?;
    let rows: Vec<FeatureRow> = recs.into_iter().map(FeatureRow::from).collect();
    for (i, r) in rows.iter().enumerate() {
        if let Some(j) = r.features.to_array().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                feature: crate::features::FEATURE_NAMES[j].to_string(),
                row: i,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    write_csv(path, rows)
}

pub fn write_curve_summary(path: impl AsRef<Path>, curves: &[BinnedCurve]) -> Result<()> {
    write_csv_with_header(
        path,
        &["label", "bin_center", "mean", "q25", "q75", "count"],
        &summary_records(curves),
    )
}

// ---------------------------------------------------------------------------
// Sidecars

/// Provenance written next to every exported table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub table: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub conventions: BTreeMap<String, String>,
}

impl Sidecar {
    pub fn new(table: &str) -> Self {
        Sidecar {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            table: table.to_string(),
            params: BTreeMap::new(),
            conventions: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain values serialize"),
        );
        self
    }

    pub fn convention(mut self, key: &str, value: &str) -> Self {
        self.conventions.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_quantile_rule(self) -> Self {
        self.convention("quantile", "linear interpolation between closest ranks (type 7)")
    }

    pub fn with_float_format(self) -> Self {
        self.convention("float_format", "shortest round-trip decimal, '.' separator")
    }

    pub fn write_for(&self, table_path: impl AsRef<Path>) -> Result<PathBuf> {
        let p = sidecar_path(table_path.as_ref());
        write_json(&p, self)?;
        Ok(p)
    }
}

/// `<table>.meta.json`.
pub fn sidecar_path(table: &Path) -> PathBuf {
    let mut s = table.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::PrefixPoint;
    use crate::corpus::Document;
    use proptest::prelude::*;

    fn curve(id: &str, label: &str, pts: &[(usize, f64)]) -> PrefixCurve {
        PrefixCurve {
            doc_id: id.into(),
            label: label.into(),
            unit: PrefixUnit::Sentence,
            points: pts.iter().map(|&(k, ratio)| PrefixPoint { k, bytes_in: k * 10, ratio }).collect(),
        }
    }

    #[test]
    fn single_bin_when_k_constant() {
        let c = curve("a", "x", &[(3, 0.5)]);
        let b = bin_curves(&[c.clone(), c], 20, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].bins.len(), 1);
        assert_eq!(b[0].bins[0].count, 2);
        assert!(bin_curves(&[], 20, 1).is_err());
    }

    #[test]
    fn seven_point_quantiles() {
        // Sorted: 0.1 0.2 0.3 0.5 0.8 0.9 1.0; type 7 q25 at h = 1.5 → 0.25,
        // q75 at h = 4.5 → 0.85.
        let ratios = [0.9, 0.1, 0.5, 1.0, 0.3, 0.8, 0.2];
        let pts: Vec<(usize, f64)> = ratios.iter().map(|&r| (1, r)).collect();
        let b = bin_curves(&[curve("a", "x", &pts)], 1, 7).unwrap();
        let bin = b[0].bins[0];
        assert!((bin.q25 - 0.25).abs() < 1e-15);
        assert!((bin.q75 - 0.85).abs() < 1e-15);
        assert!((bin.mean - 3.8 / 7.0).abs() < 1e-15);
        assert!(bin_curves(&[curve("a", "x", &pts)], 1, 8).unwrap()[0].bins.is_empty());
    }

    #[test]
    fn labels_share_edges() {
        let a = curve("a", "human", &[(1, 0.9), (10, 0.5)]);
        let b = curve("b", "model", &[(5, 0.7), (100, 0.3)]);
        let out = bin_curves(&[a, b], 4, 1).unwrap();
        assert_eq!(out[0].label, "human");
        // Range 1..100 in 4 bins of width 24.75.
        assert_eq!(out[0].bins[0].bin_center, 1.0 + 12.375);
        assert_eq!(out[1].bins.last().unwrap().bin_center, 1.0 + 3.5 * 24.75);
    }

    #[test]
    fn identical_docs_have_flat_iqr() {
        let text = ["The bells rang out over the small town at noon."; 6].join(" ");
        let docs: Vec<SegmentedDocument> = (0..4)
            .map(|i| SegmentedDocument::from_document(Document::new(format!("d{i}"), "rep", text.clone())).unwrap())
            .collect();
        let g = incremental_group_curve(&docs, &CompressorConfig::default(), 1).unwrap();
        assert_eq!(g.len(), 1);
        let ks: Vec<f64> = g[0].bins.iter().map(|b| b.bin_center).collect();
        assert_eq!(ks, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        for b in &g[0].bins {
            assert_eq!(b.q25, b.q75);
            assert_eq!(b.count, 4);
        }
        for w in g[0].bins.windows(2) {
            assert!(w[1].mean < w[0].mean);
        }
    }

    #[test]
    fn csv_round_trip_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![FeatureRow {
            doc_id: "d,1".into(),
            label: "human".into(),
            word_count: 12,
            features: FeatureVector::from_array([
                0.1, 1.0 / 3.0, 2e-17, -0.125, 1e300, 0.0, 1.0, 0.5, 0.75, 12.0, 0.3333333333333333,
            ]),
        }];
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_features(&a, &rows).unwrap();
        let back = read_features(&a).unwrap();
        assert_eq!(back, rows);
        write_features(&b, &back).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let header = std::fs::read_to_string(&a).unwrap().lines().next().unwrap().to_string();
        assert_eq!(
            header,
            "doc_id,label,word_count,compression_ratio,conditional_compression,prefix_mean,\
             prefix_slope,shuffle_gap,shuffle_ncd,char_entropy_norm,word_entropy_norm,ttr,\
             rep_dist_mean,rep_dist_sd"
        );
    }

    #[test]
    fn summary_header_even_when_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_curve_summary(&p, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "label,bin_center,mean,q25,q75,count\n");
        assert!(write_curve_summary(dir.path().join("no/such/dir.csv"), &[]).is_err());
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("out/x.csv")), PathBuf::from("out/x.csv.meta.json"));
    }

    proptest! {
        #[test]
        fn aggregation_properties(
            pts in prop::collection::vec((1usize..200, 0.0f64..2.0, 0usize..3), 1..120),
            bins in 1usize..25,
            min_count in 1usize..5,
            rot in 0usize..120,
        ) {
            let curves: Vec<PrefixCurve> = pts
                .iter()
                .enumerate()
                .map(|(i, &(k, r, l))| curve(&format!("d{i}"), ["a", "b", "c"][l], &[(k, r)]))
                .collect();
            let out = bin_curves(&curves, bins, min_count).unwrap();
            let mut rotated = curves.clone();
            rotated.rotate_left(rot % curves.len());
            prop_assert_eq!(&out, &bin_curves(&rotated, bins, min_count).unwrap());
            for c in &out {
                for w in c.bins.windows(2) {
                    prop_assert!(w[0].bin_center < w[1].bin_center);
                }
                for b in &c.bins {
                    prop_assert!(b.count >= min_count);
                    prop_assert!(b.q25 <= b.q75);
                }
            }
        }
    }
}
