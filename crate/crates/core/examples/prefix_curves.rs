//! Prefix compression curves for a repetitive, a natural and an i.i.d. text,
//! then binned into a per-label summary.

use compsig::compress::{prefix_curve, CompressorConfig, PrefixUnit};
use compsig::corpus::{Document, SegmentedDocument};
use compsig::report;
use compsig::synth::{self, EntropyRegime};

const NOVEL: &str = include_str!("../data/botchan.txt");

fn main() -> compsig::Result<()> {
    let cfg = CompressorConfig::default();
    let words: Vec<&str> = NOVEL.split_whitespace().collect();
    let iid = synth::sample_text(&EntropyRegime::new(1.0 / 5000.0, 5000)?, 600, 1)?;
    let docs = [
        Document::new("rep", "repetitive", vec!["The bell rang twice before the class began."; 40].join(" ")),
        Document::new("nat", "natural", words[2000..2600].join(" ")),
        Document::new("iid", "iid", synth::punctuate(&iid.text, 12)),
    ];

    let mut curves = vec![];
    for doc in docs {
        let seg = SegmentedDocument::from_document(doc)?;
        let c = prefix_curve(&seg, PrefixUnit::Sentence, 1, &cfg)?;
        let show: Vec<String> = c
            .points
            .iter()
            .filter(|p| p.k == 1 || p.k % 10 == 0)
            .map(|p| format!("k={} {:.3}", p.k, p.ratio))
            .collect();
        println!("{:<11} {}", c.label, show.join("  "));
        curves.push(c);
    }

    println!("\nbinned (5 bins, min 1 doc per bin)");
    for curve in report::bin_curves(&curves, 5, 1)? {
        for b in &curve.bins {
            println!(
                "{:<11} center {:>6.1}  mean {:.3}  iqr [{:.3}, {:.3}]",
                curve.label, b.bin_center, b.mean, b.q25, b.q75
            );
        }
    }
    Ok(())
}
