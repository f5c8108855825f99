//! Byte-level compression measurements built on gzip (RFC 1952).
//!
//! `C(x)` is the size of the gzip member produced for `x` at a fixed level.
//! Everything else (ratio, conditional cost, NCD, prefix curves) is derived
//! from it. All functions are pure and safe to call from many threads.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};

use crate::corpus::SegmentedDocument;
use crate::error::{Error, Result};

/// Bytes of gzip container overhead: 10-byte header (no name, no extra
/// fields) plus CRC32 and ISIZE trailer.
pub const GZIP_OVERHEAD: usize = 18;

/// The codec's conventional default effort.
pub const DEFAULT_LEVEL: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressorConfig {
    level: u32,
    include_header: bool,
}

impl Default for CompressorConfig {
    fn default() -> Self {
        CompressorConfig {
            level: DEFAULT_LEVEL,
            include_header: true,
        }
    }
}

impl CompressorConfig {
    pub fn new(level: u32, include_header: bool) -> Result<Self> {
        if level > 9 {
            return Err(Error::invalid(format!(
                "compression level {level} outside 0..=9"
            )));
        }
        Ok(CompressorConfig {
            level,
            include_header,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn include_header(&self) -> bool {
        self.include_header
    }
}

/// Write sink that only counts bytes.
#[derive(Default)]
struct ByteCounter(usize);

impl Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0 += buf.len();
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Size in bytes of the gzip encoding of `bytes`.
///
/// The header is fixed (mtime 0, no file name), so the size depends only on
/// the input and the level. With `include_header == false` the constant
/// [`GZIP_OVERHEAD`] is subtracted.
pub fn compressed_size(bytes: &[u8], cfg: &CompressorConfig) -> usize {
    let mut enc = GzBuilder::new()
        .mtime(0)
        .write(ByteCounter::default(), Compression::new(cfg.level));
    enc.write_all(bytes).expect("counting sink never fails");
    let total = enc.finish().expect("counting sink never fails").0;
    if cfg.include_header {
        total
    } else {
        total - GZIP_OVERHEAD
    }
}

/// `C(x) / |x|`. Lower means more compressible.
pub fn compression_ratio(bytes: &[u8], cfg: &CompressorConfig) -> Result<f64> {
    if bytes.is_empty() {
        return Err(Error::Empty("compression ratio of empty input"));
    }
    Ok(compressed_size(bytes, cfg) as f64 / bytes.len() as f64)
}

fn concat(x: &[u8], y: &[u8]) -> Vec<u8> {
    let mut xy = Vec::with_capacity(x.len() + y.len());
    xy.extend_from_slice(x);
    xy.extend_from_slice(y);
    xy
}

/// Marginal cost of `y` given `x` as context: `(C(x ∥ y) − C(x)) / |y|`.
pub fn conditional_compression(x: &[u8], y: &[u8], cfg: &CompressorConfig) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::Empty("conditional compression with empty continuation"));
    }
    let joint = compressed_size(&concat(x, y), cfg) as f64;
    let context = compressed_size(x, cfg) as f64;
    Ok((joint - context) / y.len() as f64)
}

/// Normalized compression distance:
/// `(C(x ∥ y) − min(C(x), C(y))) / max(C(x), C(y))`.
pub fn ncd(x: &[u8], y: &[u8], cfg: &CompressorConfig) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("ncd of empty input"));
    }
    let cx = compressed_size(x, cfg) as f64;
    let cy = compressed_size(y, cfg) as f64;
    let cxy = compressed_size(&concat(x, y), cfg) as f64;
    Ok((cxy - cx.min(cy)) / cx.max(cy))
}

// ---------------------------------------------------------------------------
// Prefix curves

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefixUnit {
    Sentence,
    Character,
}

impl fmt::Display for PrefixUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrefixUnit::Sentence => "sentence",
            PrefixUnit::Character => "character",
        })
    }
}

impl FromStr for PrefixUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentence" => Ok(PrefixUnit::Sentence),
            "character" | "char" => Ok(PrefixUnit::Character),
            other => Err(Error::invalid(format!("unknown prefix unit {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefixPoint {
    /// Prefix length in units.
    pub k: usize,
    pub bytes_in: usize,
    pub ratio: f64,
}

/// Compression ratio of growing prefixes of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixCurve {
    pub doc_id: String,
    pub label: String,
    pub unit: PrefixUnit,
    pub points: Vec<PrefixPoint>,
}

/// Prefix lengths `step, 2·step, …`, always ending at `total`.
fn prefix_lengths(total: usize, step: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..).map(|i| i * step).take_while(|&k| k < total).collect();
    ks.push(total);
    ks
}

/// Byte length of the first `k` units of the document. The full document is
/// used when `k` covers every unit, so the last point measures exactly the
/// document bytes.
fn prefix_bytes(seg: &SegmentedDocument, unit: PrefixUnit, k: usize, total: usize) -> usize {
    if k >= total {
        return seg.bytes().len();
    }
    match unit {
        PrefixUnit::Sentence => seg.sentence_spans()[k - 1].end,
        PrefixUnit::Character => seg
            .text()
            .char_indices()
            .nth(k)
            .map_or(seg.bytes().len(), |(pos, _)| pos),
    }
}

/// Number of units of `unit` in the document.
pub fn unit_count(seg: &SegmentedDocument, unit: PrefixUnit) -> usize {
    match unit {
        PrefixUnit::Sentence => seg.sentences.len(),
        PrefixUnit::Character => seg.text().chars().count(),
    }
}

/// Compression ratios of the prefixes `x[..k]` for `k = step, 2·step, …`
/// up to the whole document, each compressed independently from scratch.
/// Prefixes are true byte prefixes of the document, so original spacing
/// between sentences is kept.
pub fn prefix_curve(
    seg: &SegmentedDocument,
    unit: PrefixUnit,
    step: usize,
    cfg: &CompressorConfig,
) -> Result<PrefixCurve> {
    if step == 0 {
        return Err(Error::invalid("prefix step must be at least 1"));
    }
    let total = unit_count(seg, unit);
    if total == 0 || seg.bytes().is_empty() {
        return Err(Error::Empty("prefix curve of empty document"));
    }
    let bytes = seg.bytes();
    let points = prefix_lengths(total, step)
        .into_iter()
        .map(|k| {
            let n = prefix_bytes(seg, unit, k, total);
            let ratio = compression_ratio(&bytes[..n], cfg)?;
            Ok(PrefixPoint {
                k,
                bytes_in: n,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrefixCurve {
        doc_id: seg.doc.id.clone(),
        label: seg.doc.label.clone(),
        unit,
        points,
    })
}
