//! Trains the boosted-tree classifier on two synthetic entropy regimes, then
//! reports held-out metrics and global Shapley importance.

use compsig::corpus::SegmentedDocument;
use compsig::corpus::Document;
use compsig::features::{self, FeatureConfig};
use compsig::model::{self, Dataset, GBMConfig};
use compsig::synth::{self, EntropyRegime};

fn docs(h: f64, count: usize, seed: u64) -> compsig::Result<Vec<SegmentedDocument>> {
    let regime = EntropyRegime::new(h, 5000)?;
    (0..count as u64)
        .map(|i| {
            let t = synth::sample_text(&regime, 479, seed + i)?;
            SegmentedDocument::from_document(Document::new(
                format!("h{h}-{i}"),
                format!("h{h}"),
                synth::punctuate(&t.text, 12),
            ))
        })
        .collect()
}

fn main() -> compsig::Result<()> {
    let mut all = docs(0.3, 150, 0)?;
    all.extend(docs(0.6, 150, 1000)?);
    let rows = features::extract_all(&all, &FeatureConfig::default())?;
    let data = Dataset::from_feature_rows(&rows)?;

    let (train_idx, test_idx) = model::stratified_split(&data.labels, 0.7, 0)?;
    let (train, test) = (data.subset(&train_idx), data.subset(&test_idx));
    let cfg = GBMConfig {
        n_rounds: 60,
        ..Default::default()
    };
    let ens = model::fit(&train, &cfg)?;
    println!("{}", model::evaluate(&ens, &test.rows, &test.labels)?);

    let importance = model::shap_global(&ens, &test.rows, None)?;
    println!("mean |SHAP| for class {}", importance.class);
    for (rank, (name, v)) in importance.ranked().into_iter().enumerate().take(5) {
        println!("{:>2}  {name:<24} {v:.4}", rank + 1);
    }

    let path = std::env::temp_dir().join("compsig-example-model.json");
    model::save(&ens, &path)?;
    let back = model::load(&path)?;
    assert_eq!(back.predict(&test.rows)?, ens.predict(&test.rows)?);
    println!("model round-tripped through {}", path.display());
    Ok(())
}
