//! Extracts the full feature vector for a few documents and writes it as CSV
//! with a metadata sidecar when given an output path.

use compsig::corpus::{Document, SegmentedDocument};
use compsig::features::{self, FeatureConfig, FEATURE_NAMES};
use compsig::synth::{self, EntropyRegime};

const NOVEL: &str = include_str!("../data/botchan.txt");

fn main() -> compsig::Result<()> {
    let words: Vec<&str> = NOVEL.split_whitespace().collect();
    let low = synth::sample_text(&EntropyRegime::new(0.8, 5000)?, 479, 3)?;
    let docs = vec![
        Document::new("novel", "natural", words[10_000..10_479].join(" ")),
        Document::new("h0.8", "synthetic", synth::punctuate(&low.text, 12)),
    ];
    let segs: Vec<SegmentedDocument> = docs
        .into_iter()
        .map(SegmentedDocument::from_document)
        .collect::<compsig::Result<_>>()?;

    let cfg = FeatureConfig::default();
    let rows = features::extract_all(&segs, &cfg)?;
    print!("{:<24}", "feature");
    for r in &rows {
        print!("{:>12}", r.doc_id);
    }
    println!();
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        print!("{name:<24}");
        for r in &rows {
            print!("{:>12.4}", r.features.to_array()[i]);
        }
        println!();
    }

    if let Some(out) = std::env::args().nth(1) {
        compsig::report::write_features(&out, &rows)?;
        println!("wrote {out}");
    }
    Ok(())
}
