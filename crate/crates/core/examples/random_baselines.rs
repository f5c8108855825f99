//! Uniform and frequency-weighted random word documents against natural text
//! windows drawn from the bundled novel.

use compsig::compress::{compression_ratio, CompressorConfig};
use compsig::stats;
use compsig::synth::{random_baseline, BaselineMode, Vocabulary};

const NOVEL: &str = include_str!("../data/botchan.txt");
const DOCS: usize = 100;
const LEN: usize = 479;

fn main() -> compsig::Result<()> {
    let cfg = CompressorConfig::default();
    let tokens: Vec<&str> = NOVEL.split_whitespace().collect();
    let vocab = Vocabulary::from_tokens(tokens.iter().copied());
    println!("vocabulary: {} types from {} tokens", vocab.len(), tokens.len());

    let stride = (tokens.len() - LEN) / DOCS;
    let natural: Vec<f64> = (0..DOCS)
        .map(|i| compression_ratio(tokens[i * stride..i * stride + LEN].join(" ").as_bytes(), &cfg))
        .collect::<compsig::Result<_>>()?;

    let mut report = vec![];
    for mode in [BaselineMode::Uniform, BaselineMode::Empirical] {
        let ratios: Vec<f64> = (0..DOCS as u64)
            .map(|s| compression_ratio(random_baseline(&vocab, LEN, mode, s)?.text.as_bytes(), &cfg))
            .collect::<compsig::Result<_>>()?;
        report.push((mode.to_string(), ratios));
    }
    report.push(("natural".into(), natural));

    for (name, r) in &report {
        println!(
            "{name:<10} mean R {:.4}  sd {:.4}",
            stats::mean(r),
            stats::sample_sd(r)
        );
    }
    Ok(())
}
