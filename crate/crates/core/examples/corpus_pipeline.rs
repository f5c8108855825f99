//! Reads a JSONL corpus, cleans it, filters by length and splits it into
//! word-count quartile strata. Without an argument a small corpus is built
//! from the bundled novel.

use compsig::corpus::{self, Document, LengthStratum, PreprocessRules, SegmentedDocument};

const NOVEL: &str = include_str!("../data/botchan.txt");

fn demo_corpus() -> Vec<Document> {
    let words: Vec<&str> = NOVEL.split_whitespace().collect();
    (0..40)
        .map(|i| {
            let len = 150 + 20 * (i % 10);
            let start = i * 1100;
            let text = format!(
                "<p>{}</p>  See https://example.org/{i} for more.",
                words[start..start + len].join(" ")
            );
            Document::new(format!("doc{i:02}"), if i % 2 == 0 { "a" } else { "b" }, text)
        })
        .collect()
}

fn main() -> compsig::Result<()> {
    let raw = match std::env::args().nth(1) {
        Some(path) => corpus::load_jsonl(path)?,
        None => demo_corpus(),
    };
    let rules = PreprocessRules::all();
    let segmenter = rules.segmenter()?;
    let segs: Vec<SegmentedDocument> = raw
        .iter()
        .map(|d| SegmentedDocument::new(corpus::preprocess(d, &rules), &segmenter))
        .collect::<compsig::Result<_>>()?;
    println!("{} documents; first cleaned text starts {:?}", segs.len(), &segs[0].text()[..60]);

    let kept = corpus::filter_word_count(&segs, 160, 300)?;
    println!("{} documents with 160..=300 words", kept.len());

    let counts: Vec<usize> = segs.iter().map(|s| s.word_count).collect();
    let strata = LengthStratum::quartile_strata(&counts)?;
    for (name, docs) in corpus::stratify_by_length(&segs, &strata, 5, 0)? {
        let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        println!("{name}: {}", ids.join(" "));
    }
    Ok(())
}
