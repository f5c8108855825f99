//! Corpus ingestion and preparation: JSONL loading, text cleanup, sentence
//! and word segmentation, length stratification.
//!
//! Everything downstream (compression curves, features, classifiers) consumes
//! [`SegmentedDocument`]s produced here, so every measurement sees identically
//! prepared input.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use rand::seq::index;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::seed;

/// One text unit of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub label: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl Document {
    pub fn new(id: impl Into<String>, label: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            label: label.into(),
            text: text.into(),
            meta: BTreeMap::new(),
        }
    }

    /// The UTF-8 byte view measured by the compressor.
    pub fn bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }
}

// ---------------------------------------------------------------------------
// JSONL

/// Loads a JSONL corpus: one object per line with string fields `id`,
/// `label` and `text`. Extra keys land in `meta` as strings. Blank lines are
/// skipped.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    read_jsonl(BufReader::new(file), path)
}

/// Same as [`load_jsonl`] over any reader; `origin` only labels errors.
pub fn read_jsonl(reader: impl BufRead, origin: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(format!("read {}", origin.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let Value::Object(mut obj) = value else {
            return Err(parse_err("record is not a JSON object".into()));
        };
        let mut take = |field: &'static str| -> Result<String> {
            match obj.remove(field) {
                Some(Value::String(s)) => Ok(s),
                Some(_) => Err(parse_err(format!("field {field} is not a string"))),
                None => Err(Error::MissingField {
                    field,
                    line: line_no,
                }),
            }
        };
        let id = take("id")?;
        let label = take("label")?;
        let text = take("text")?;
        if id.is_empty() {
            return Err(parse_err("empty id".into()));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        let meta = obj
            .into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => (k, s),
                other => (k, other.to_string()),
            })
            .collect();
        docs.push(Document {
            id,
            label,
            text,
            meta,
        });
    }
    Ok(docs)
}

/// Writes documents as JSONL; meta entries are flattened next to the
/// required keys.
pub fn write_jsonl(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let file =
        File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        let mut obj = serde_json::Map::new();
        for (k, v) in &doc.meta {
            obj.insert(k.clone(), Value::String(v.clone()));
        }
        obj.insert("id".into(), Value::String(doc.id.clone()));
        obj.insert("label".into(), Value::String(doc.label.clone()));
        obj.insert("text".into(), Value::String(doc.text.clone()));
        serde_json::to_writer(&mut out, &obj)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    }
    out.flush()
        .map_err(|e| Error::io(format!("write {}", path.display()), e))
}

// ---------------------------------------------------------------------------
// Preprocessing

/// Which cleanup rules to apply. Rules run in field order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessRules {
    pub strip_urls: bool,
    pub strip_emoji: bool,
    pub strip_markup: bool,
    pub collapse_whitespace: bool,
    pub nfc: bool,
    /// Abbreviation stop-list for the sentence segmenter.
    pub abbreviations_path: Option<PathBuf>,
}

impl PreprocessRules {
    /// Every rule enabled, default abbreviation list.
    pub fn all() -> Self {
        PreprocessRules {
            strip_urls: true,
            strip_emoji: true,
            strip_markup: true,
            collapse_whitespace: true,
            nfc: true,
            abbreviations_path: None,
        }
    }

    /// Parses a flat `key = value` config. `#` starts a comment. Boolean
    /// values accept true/false, yes/no, on/off, 1/0.
    pub fn from_config_str(src: &str) -> Result<Self> {
        let mut rules = PreprocessRules::default();
        for (idx, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "preprocessing config line {}: expected key = value",
                    idx + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let flag = || -> Result<bool> {
                match value.to_ascii_lowercase().as_str() {
                    "true" | "yes" | "on" | "1" => Ok(true),
                    "false" | "no" | "off" | "0" => Ok(false),
                    _ => Err(Error::invalid(format!(
                        "preprocessing config line {}: {key} expects a boolean, got {value:?}",
                        idx + 1
                    ))),
                }
            };
            match key {
                "strip_urls" => rules.strip_urls = flag()?,
                "strip_emoji" => rules.strip_emoji = flag()?,
                "strip_markup" => rules.strip_markup = flag()?,
                "collapse_whitespace" => rules.collapse_whitespace = flag()?,
                "nfc" => rules.nfc = flag()?,
                "abbreviations_path" => {
                    rules.abbreviations_path = (!value.is_empty()).then(|| PathBuf::from(value))
                }
                other => {
                    return Err(Error::invalid(format!(
                        "preprocessing config line {}: unknown key {other}",
                        idx + 1
                    )))
                }
            }
        }
        Ok(rules)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("read {}", path.display()), e))?;
        Self::from_config_str(&src)
    }

    /// Segmenter configured by `abbreviations_path`, or the built-in one.
    pub fn segmenter(&self) -> Result<Segmenter> {
        match &self.abbreviations_path {
            Some(p) => Segmenter::from_file(p),
            None => Ok(Segmenter::default()),
        }
    }
}

static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:https?://|ftp://|www\.)\S+").unwrap());
static EMOJI_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[\p{Extended_Pictographic}\p{Emoji_Modifier}\p{Regional_Indicator}\x{FE0F}\x{200D}\x{20E3}]")
        .unwrap()
});
static MARKUP_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"<[^>]*>|&(?:[a-zA-Z]+|#[0-9]+|#x[0-9a-fA-F]+);").unwrap()
});

fn apply_rules_once(text: &str, rules: &PreprocessRules) -> String {
    let mut s = text.to_string();
    if rules.strip_urls {
        s = URL_RE.replace_all(&s, "").into_owned();
    }
    if rules.strip_emoji {
        s = EMOJI_RE.replace_all(&s, "").into_owned();
    }
    if rules.strip_markup {
        s = MARKUP_RE.replace_all(&s, "").into_owned();
    }
    if rules.collapse_whitespace {
        s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    if rules.nfc {
        s = s.nfc().collect();
    }
    s
}

/// Applies the selected rules, in order, until the text stops changing.
///
/// A single pass is not always a fixed point (removing `<i>` from
/// `http<i>s://x` exposes a URL), so passes repeat; every rule only removes
/// or merges characters, so this terminates quickly.
pub fn preprocess(doc: &Document, rules: &PreprocessRules) -> Document {
    let mut text = apply_rules_once(&doc.text, rules);
    for _ in 0..16 {
        let next = apply_rules_once(&text, rules);
        if next == text {
            break;
        }
        text = next;
    }
    Document {
        text,
        ..doc.clone()
    }
}

// ---------------------------------------------------------------------------
// Segmentation

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "inc", "ltd",
    "co", "corp", "mt", "fig", "vol", "gen", "col", "lt", "sgt", "capt", "rev", "hon", "gov",
    "sen", "jan", "feb", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s",
    "a.m", "p.m", "approx", "dept",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201D}', '\u{2019}', '\u{00BB}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201C}', '\u{2018}', '\u{00AB}'];

/// Rule-based sentence splitter: a run of `.`, `!` or `?` (plus closing
/// quotes or brackets) ends a sentence when followed by whitespace and an
/// uppercase letter, or by the end of the text. A period after a listed
/// abbreviation or a single capital-letter initial does not end a sentence.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: BTreeSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    pub fn with_abbreviations<I, S>(abbrevs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbrevs
            .into_iter()
            .map(|a| a.as_ref().trim().trim_end_matches('.').to_lowercase())
            .filter(|a| !a.is_empty())
            .collect();
        Segmenter { abbreviations }
    }

    /// One abbreviation per line, `#` comments, case-insensitive.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("read {}", path.display()), e))?;
        Ok(Segmenter::with_abbreviations(
            src.lines().map(|l| l.split('#').next().unwrap_or("")),
        ))
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.iter().map(String::as_str)
    }

    fn is_abbreviation(&self, text: &str, word_start: usize, dot: usize) -> bool {
        let word = text[word_start..dot].trim_start_matches(OPENERS);
        let mut chars = word.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_uppercase() {
                return true;
            }
        }
        self.abbreviations.contains(&word.to_lowercase())
    }

    /// Byte ranges of the sentences in `text`. Ranges start and end on
    /// non-whitespace; only whitespace lies between consecutive ranges.
    pub fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let n = chars.len();
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let mut word_start = 0;
        let mut i = 0;
        while i < n {
            let (pos, c) = chars[i];
            if c.is_whitespace() {
                word_start = pos + c.len_utf8();
                i += 1;
                continue;
            }
            let s = *start.get_or_insert(pos);
            if !matches!(c, '.' | '!' | '?') {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < n && matches!(chars[j].1, '.' | '!' | '?') {
                j += 1;
            }
            let single_period = c == '.' && j == i + 1;
            while j < n && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let mut k = j;
            while k < n && chars[k].1.is_whitespace() {
                k += 1;
            }
            let boundary = if k == n {
                true
            } else if k == j {
                false
            } else {
                let next = chars[k].1;
                next.is_uppercase()
                    || (OPENERS.contains(&next) && k + 1 < n && chars[k + 1].1.is_uppercase())
            };
            let boundary = boundary && !(single_period && self.is_abbreviation(text, word_start, pos));
            if boundary {
                let end = if j < n { chars[j].0 } else { text.len() };
                spans.push(s..end);
                start = None;
                i = j;
            } else {
                i += 1;
            }
        }
        if let Some(s) = start {
            spans.push(s..text.trim_end().len());
        }
        spans
    }

    /// Sentence strings of `text`, terminal punctuation retained.
    pub fn segment(&self, text: &str) -> Result<Vec<String>> {
        let spans = self.spans(text);
        if spans.is_empty() {
            return Err(Error::Empty("text has no sentences"));
        }
        Ok(spans.into_iter().map(|r| text[r].to_string()).collect())
    }
}

/// Splits `text` into sentences with the default [`Segmenter`].
pub fn segment_sentences(text: &str) -> Result<Vec<String>> {
    Segmenter::default().segment(text)
}

/// Whitespace split, leading/trailing non-alphanumerics stripped, lowercased;
/// empty residues dropped. Internal punctuation (`a-b`, `don't`) is kept.
pub fn tokenize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A document with its sentence and word views computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedDocument {
    pub doc: Document,
    pub sentences: Vec<String>,
    pub words: Vec<String>,
    pub word_count: usize,
    spans: Vec<Range<usize>>,
}

impl SegmentedDocument {
    pub fn new(doc: Document, segmenter: &Segmenter) -> Result<Self> {
        let spans = segmenter.spans(&doc.text);
        if spans.is_empty() {
            return Err(Error::Empty("document text is empty"));
        }
        let sentences = spans.iter().map(|r| doc.text[r.clone()].to_string()).collect();
        let words = tokenize_words(&doc.text);
        Ok(SegmentedDocument {
            word_count: words.len(),
            sentences,
            words,
            spans,
            doc,
        })
    }

    /// Segments with the default splitter.
    pub fn from_document(doc: Document) -> Result<Self> {
        Self::new(doc, &Segmenter::default())
    }

    pub fn text(&self) -> &str {
        &self.doc.text
    }

    pub fn bytes(&self) -> &[u8] {
        self.doc.text.as_bytes()
    }

    /// Byte ranges of each sentence within the document text.
    pub fn sentence_spans(&self) -> &[Range<usize>] {
        &self.spans
    }
}

// ---------------------------------------------------------------------------
// Length strata

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumName {
    Low,
    Mid,
    High,
    VeryHigh,
}

impl StratumName {
    pub const ALL: [StratumName; 4] = [
        StratumName::Low,
        StratumName::Mid,
        StratumName::High,
        StratumName::VeryHigh,
    ];
}

impl fmt::Display for StratumName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StratumName::Low => "low",
            StratumName::Mid => "mid",
            StratumName::High => "high",
            StratumName::VeryHigh => "very_high",
        })
    }
}

/// Half-open word-count interval `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthStratum {
    pub name: StratumName,
    pub lower: usize,
    pub upper: usize,
}

impl LengthStratum {
    pub fn new(name: StratumName, lower: usize, upper: usize) -> Result<Self> {
        if lower >= upper {
            return Err(Error::invalid(format!(
                "stratum {name}: lower bound {lower} must be below upper bound {upper}"
            )));
        }
        Ok(LengthStratum { name, lower, upper })
    }

    pub fn contains(&self, word_count: usize) -> bool {
        self.lower <= word_count && word_count < self.upper
    }

    /// Four strata cut at the quartiles of `word_counts` (type-7 quantiles,
    /// rounded up to whole words); the last stratum is unbounded above.
    pub fn quartile_strata(word_counts: &[usize]) -> Result<[LengthStratum; 4]> {
        if word_counts.is_empty() {
            return Err(Error::Empty("no word counts to derive strata from"));
        }
        let mut sorted: Vec<f64> = word_counts.iter().map(|&w| w as f64).collect();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| crate::stats::quantile_sorted(&sorted, p).ceil() as usize;
        let cuts = [0, q(0.25), q(0.5), q(0.75), usize::MAX];
        let mut out = Vec::with_capacity(4);
        for (i, name) in StratumName::ALL.into_iter().enumerate() {
            out.push(LengthStratum::new(name, cuts[i], cuts[i + 1])?);
        }
        Ok(out.try_into().expect("four strata"))
    }
}

/// Uniform sample without replacement of up to `per_stratum` documents from
/// each stratum; deterministic for a given seed. Selected documents keep
/// their corpus order.
pub fn stratify_by_length(
    docs: &[SegmentedDocument],
    strata: &[LengthStratum],
    per_stratum: usize,
    seed: u64,
) -> Result<BTreeMap<StratumName, Vec<Document>>> {
    if per_stratum == 0 {
        return Err(Error::invalid("per_stratum must be at least 1"));
    }
    let mut sorted: Vec<&LengthStratum> = strata.iter().collect();
    sorted.sort_by_key(|s| s.lower);
    for pair in sorted.windows(2) {
        if pair[0].upper > pair[1].lower {
            return Err(Error::invalid(format!(
                "strata {} and {} overlap",
                pair[0].name, pair[1].name
            )));
        }
    }
    let mut out = BTreeMap::new();
    for stratum in strata {
        let members: Vec<&SegmentedDocument> = docs
            .iter()
            .filter(|d| stratum.contains(d.word_count))
            .collect();
        let take = per_stratum.min(members.len());
        let mut rng = seed::rng(seed::derive_seed(seed, stratum.name.to_string().as_bytes()));
        let mut picked = index::sample(&mut rng, members.len(), take).into_vec();
        picked.sort_unstable();
        let chosen = picked.into_iter().map(|i| members[i].doc.clone()).collect();
        if out.insert(stratum.name, chosen).is_some() {
            return Err(Error::invalid(format!("stratum {} listed twice", stratum.name)));
        }
    }
    Ok(out)
}

/// Documents with `lo <= word_count <= hi`, order preserved.
pub fn filter_word_count(
    docs: &[SegmentedDocument],
    lo: usize,
    hi: usize,
) -> Result<Vec<SegmentedDocument>> {
    if lo > hi {
        return Err(Error::invalid(format!("word-count range {lo}..={hi} is empty")));
    }
    Ok(docs
        .iter()
        .filter(|d| (lo..=hi).contains(&d.word_count))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(src: &str) -> Result<Vec<Document>> {
        read_jsonl(src.as_bytes(), Path::new("test.jsonl"))
    }

    #[test]
    fn jsonl_in_order_with_meta() {
        let docs = read(concat!(
            r#"{"id":"a","label":"human","text":"One."}"#,
            "\n",
            r#"{"id":"b","label":"gpt4o","text":"Two.","source":"x","n":3}"#,
            "\n\n",
            r#"{"id":"c","label":"human","text":"Three."}"#,
            "\n"
        ))
        .unwrap();
        assert_eq!(docs.len(), 3);
        assert_eq!(
            docs.iter().map(|d| d.id.as_str()).collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
        assert_eq!(docs[1].meta["source"], "x");
        assert_eq!(docs[1].meta["n"], "3");
    }

    #[test]
    fn jsonl_empty_and_errors() {
        assert!(read("").unwrap().is_empty());
        let err = read(concat!(
            r#"{"id":"a","label":"h","text":"x"}"#,
            "\n",
            r#"{"id":"b","label":"h"}"#
        ))
        .unwrap_err();
        assert_eq!(err.to_string(), "missing field text at line 2");
        let err = read("{not json}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read(concat!(
            r#"{"id":"a","label":"h","text":"x"}"#,
            "\n",
            r#"{"id":"a","label":"h","text":"y"}"#
        ))
        .unwrap_err();
        assert_eq!(err.to_string(), "duplicate id a");
    }

    #[test]
    fn jsonl_write_read_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let mut d = Document::new("x1", "human", "Line one.\nLine \"two\".");
        d.meta.insert("src".into(), "reddit".into());
        write_jsonl(&path, &[d.clone()]).unwrap();
        assert_eq!(load_jsonl(&path).unwrap(), vec![d]);
    }

    #[test]
    fn preprocess_examples() {
        let rules = PreprocessRules {
            strip_urls: true,
            collapse_whitespace: true,
            ..Default::default()
        };
        let d = Document::new("1", "h", "see https://x.y now");
        assert_eq!(preprocess(&d, &rules).text, "see now");

        let collapse = PreprocessRules {
            collapse_whitespace: true,
            ..Default::default()
        };
        assert_eq!(preprocess(&Document::new("1", "h", "a  b\t c"), &collapse).text, "a b c");

        let plain = Document::new("1", "h", "Plain text, nothing to remove.");
        assert_eq!(preprocess(&plain, &PreprocessRules::all()).text, plain.text);

        let messy = Document::new("1", "h", "<p>Hi 😀 there</p> &amp; www.example.com bye");
        assert_eq!(preprocess(&messy, &PreprocessRules::all()).text, "Hi there bye");
        let composed = Document::new("1", "h", "cafe\u{301}");
        assert_eq!(preprocess(&composed, &PreprocessRules::all()).text, "caf\u{e9}");
    }

    #[test]
    fn preprocess_keeps_identity_fields() {
        let mut d = Document::new("id9", "lbl", "x  y");
        d.meta.insert("k".into(), "v".into());
        let p = preprocess(&d, &PreprocessRules::all());
        assert_eq!((p.id, p.label, p.meta), (d.id, d.label, d.meta));
    }

    #[test]
    fn config_parsing() {
        let rules = PreprocessRules::from_config_str(
            "# cleanup\nstrip_urls = true\nstrip_emoji=no\ncollapse_whitespace = 1\nnfc = off\nabbreviations_path = abbr.txt\n",
        )
        .unwrap();
        assert!(rules.strip_urls && rules.collapse_whitespace);
        assert!(!rules.strip_emoji && !rules.nfc && !rules.strip_markup);
        assert_eq!(rules.abbreviations_path, Some(PathBuf::from("abbr.txt")));
        assert!(PreprocessRules::from_config_str("bogus = 1").is_err());
        assert!(PreprocessRules::from_config_str("nfc = maybe").is_err());
    }

    #[test]
    fn sentence_examples() {
        assert_eq!(segment_sentences("A b. C d? E!").unwrap(), ["A b.", "C d?", "E!"]);
        assert_eq!(segment_sentences("no terminator").unwrap(), ["no terminator"]);
        assert_eq!(
            segment_sentences("Dr. Smith left. He ran.").unwrap(),
            ["Dr. Smith left.", "He ran."]
        );
        assert_eq!(
            segment_sentences("He said \"Stop!\" Then left... Fine. ok then.").unwrap(),
            ["He said \"Stop!\"", "Then left...", "Fine. ok then."]
        );
        assert_eq!(
            segment_sentences("By J. R. Kennedy. Next one.").unwrap(),
            ["By J. R. Kennedy.", "Next one."]
        );
        assert!(segment_sentences("   ").is_err());
        assert!(segment_sentences("").is_err());
    }

    #[test]
    fn custom_abbreviations() {
        let seg = Segmenter::with_abbreviations(["Approx."]);
        assert_eq!(seg.segment("It is approx. Ten.").unwrap(), ["It is approx. Ten."]);
        assert_eq!(seg.segment("Dr. Who.").unwrap(), ["Dr.", "Who."]);
    }

    #[test]
    fn word_examples() {
        assert_eq!(tokenize_words("The cat, the Cat!"), ["the", "cat", "the", "cat"]);
        assert_eq!(tokenize_words("a-b c"), ["a-b", "c"]);
        assert!(tokenize_words("...").is_empty());
    }

    fn segdoc(id: &str, words: usize) -> SegmentedDocument {
        let text = vec!["word"; words].join(" ") + ".";
        SegmentedDocument::from_document(Document::new(id, "h", text)).unwrap()
    }

    #[test]
    fn stratify_counts_boundaries_and_determinism() {
        let docs: Vec<_> = (0..10).map(|i| segdoc(&format!("d{i}"), 5)).collect();
        let s = [LengthStratum::new(StratumName::Low, 0, 10).unwrap()];
        let out = stratify_by_length(&docs, &s, 3, 42).unwrap();
        assert_eq!(out[&StratumName::Low].len(), 3);
        assert_eq!(out, stratify_by_length(&docs, &s, 3, 42).unwrap());

        let edge = vec![segdoc("e", 10)];
        let strata = [
            LengthStratum::new(StratumName::Low, 0, 10).unwrap(),
            LengthStratum::new(StratumName::Mid, 10, 20).unwrap(),
        ];
        let out = stratify_by_length(&edge, &strata, 5, 1).unwrap();
        assert!(out[&StratumName::Low].is_empty());
        assert_eq!(out[&StratumName::Mid].len(), 1);

        let overlapping = [
            LengthStratum::new(StratumName::Low, 0, 11).unwrap(),
            LengthStratum::new(StratumName::Mid, 10, 20).unwrap(),
        ];
        assert!(stratify_by_length(&edge, &overlapping, 5, 1).is_err());
    }

    #[test]
    fn quartile_strata_are_ordered() {
        let counts: Vec<usize> = (1..=100).collect();
        let s = LengthStratum::quartile_strata(&counts).unwrap();
        assert_eq!(s[0].lower, 0);
        assert_eq!(s[3].upper, usize::MAX);
        for w in s.windows(2) {
            assert_eq!(w[0].upper, w[1].lower);
        }
        assert!(LengthStratum::quartile_strata(&[5, 5, 5]).is_err());
    }

    #[test]
    fn word_count_filter() {
        let docs: Vec<_> = [400, 466, 489, 500]
            .iter()
            .map(|&n| segdoc(&format!("n{n}"), n))
            .collect();
        let kept = filter_word_count(&docs, 466, 489).unwrap();
        assert_eq!(kept.iter().map(|d| d.word_count).collect::<Vec<_>>(), [466, 489]);
        assert_eq!(filter_word_count(&docs, 0, usize::MAX).unwrap(), docs);
        assert!(filter_word_count(&[], 1, 2).unwrap().is_empty());
        assert!(filter_word_count(&docs, 5, 4).is_err());
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(
            text in r"[a-zA-Z<>&;:/. \t\n😀🎉é\x{301}-]{0,60}",
            mask in 0u8..32,
        ) {
            let rules = PreprocessRules {
                strip_urls: mask & 1 != 0,
                strip_emoji: mask & 2 != 0,
                strip_markup: mask & 4 != 0,
                collapse_whitespace: mask & 8 != 0,
                nfc: mask & 16 != 0,
                abbreviations_path: None,
            };
            let once = preprocess(&Document::new("p", "l", text), &rules);
            let twice = preprocess(&once, &rules);
            prop_assert_eq!(once.text, twice.text);
        }

        #[test]
        fn segmentation_preserves_non_whitespace(text in r"[A-Za-z.!?\x22' ]{1,80}") {
            let seg = Segmenter::default();
            let joined: String = seg.spans(&text).into_iter().map(|r| &text[r]).collect();
            let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            prop_assert_eq!(strip(&joined), strip(&text));
        }

        #[test]
        fn tokens_are_lowercase_and_nonempty(text in "\\PC{0,80}") {
            for w in tokenize_words(&text) {
                prop_assert!(!w.is_empty());
                prop_assert_eq!(w.to_lowercase(), w);
            }
        }

        #[test]
        fn strata_samples_are_disjoint(counts in proptest::collection::vec(1usize..60, 1..40), seed: u64) {
            let docs: Vec<_> = counts.iter().enumerate().map(|(i, &n)| segdoc(&format!("d{i}"), n)).collect();
            let strata = [
                LengthStratum::new(StratumName::Low, 0, 15).unwrap(),
                LengthStratum::new(StratumName::Mid, 15, 30).unwrap(),
                LengthStratum::new(StratumName::High, 30, 45).unwrap(),
                LengthStratum::new(StratumName::VeryHigh, 45, usize::MAX).unwrap(),
            ];
            let out = stratify_by_length(&docs, &strata, 4, seed).unwrap();
            let mut seen = HashSet::new();
            for docs in out.values() {
                prop_assert!(docs.len() <= 4);
                for d in docs {
                    prop_assert!(seen.insert(d.id.clone()));
                }
            }
        }
    }
}
