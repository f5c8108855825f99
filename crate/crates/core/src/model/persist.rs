use std::fs;
use std::path::Path;

use super::ensemble::Ensemble;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub fn save(ens: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string(ens)?;
    fs::write(path, json).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Reads and validates a model file. Any structural problem is an error;
/// a partially valid model is never returned.
pub fn load(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    from_json(&raw)
}

pub(crate) fn from_json(raw: &str) -> Result<Ensemble> {
    let version: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| Error::Model(format!("parse error: {e}")))?;
    match version.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(Error::Model(format!("unsupported format version {v}"))),
        None => return Err(Error::Model("missing format_version".into())),
    }
    let ens: Ensemble =
        serde_json::from_value(version).map_err(|e| Error::Model(format!("parse error: {e}")))?;
    validate(&ens)?;
    Ok(ens)
}

fn validate(ens: &Ensemble) -> Result<()> {
    let bad = |m: String| Err(Error::Model(m));
    ens.config.validate().map_err(|e| Error::Model(e.to_string()))?;
    let k = ens.classes.len();
    if k < 2 {
        return bad("model has fewer than two classes".into());
    }
    let n_out = if k == 2 { 1 } else { k };
    if ens.base_scores.len() != n_out || ens.base_scores.iter().any(|v| !v.is_finite()) {
        return bad("base scores do not match the classes".into());
    }
    if ens.bin_edges.len() != ens.feature_names.len() {
        return bad("bin edges do not match the feature names".into());
    }
    for round in &ens.trees {
        if round.len() != n_out {
            return bad(format!("round has {} trees, expected {n_out}", round.len()));
        }
        for t in round {
            t.validate(ens.feature_names.len())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit, Dataset, GBMConfig};

    fn model() -> (Ensemble, Dataset) {
        let rows: Vec<Vec<f64>> = (0..80).map(|i| vec![(i as f64).sin(), (i % 4) as f64 * 0.1]).collect();
        let labels = rows.iter().map(|r| if r[0] > 0.1 { "y" } else { "n" }.to_string()).collect();
        let d = Dataset::new(vec!["s".into(), "m".into()], rows, labels).unwrap();
        let ens = fit(&d, &GBMConfig { n_rounds: 8, min_samples_leaf: 4, ..Default::default() }).unwrap();
        (ens, d)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let (ens, d) = model();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save(&ens, &p).unwrap();
        let back = load(&p).unwrap();
        assert_eq!(back, ens);
        let a = ens.predict_proba(&d.rows).unwrap();
        let b = back.predict_proba(&d.rows).unwrap();
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn truncated_and_mismatched_files() {
        let (ens, _) = model();
        let json = serde_json::to_string(&ens).unwrap();
        let err = from_json(&json[..json.len() / 2]).unwrap_err();
        assert!(err.to_string().contains("parse error"));

        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["format_version"] = 99.into();
        assert!(from_json(&v.to_string()).unwrap_err().to_string().contains("version"));

        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["trees"][0][0]["left"][0] = 0.into();
        assert!(from_json(&v.to_string()).is_err());
    }
}
