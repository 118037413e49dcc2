//! Versioned model files.

use std::path::Path;

use serde_json::error::Category;

use crate::error::{Error, Result};
use crate::trainer::{Model, MODEL_FORMAT_VERSION};

/// Pretty-printed JSON. Weights are written as shortest round-trip decimals,
/// and all maps are ordered, so equal models give identical bytes.
pub fn model_to_string(model: &Model) -> String {
    let mut out = serde_json::to_string_pretty(model).expect("model serialises");
    out.push('\n');
    out
}

pub fn model_from_str(source: &str) -> Result<Model> {
    let value: serde_json::Value = serde_json::from_str(source).map_err(|e| match e.classify() {
        Category::Eof => Error::TruncatedModel,
        _ => Error::ModelParse(e.to_string()),
    })?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::ModelParse("missing format_version".into()))?;
    if found != u64::from(MODEL_FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let model: Model = serde_json::from_value(value).map_err(|e| Error::ModelParse(e.to_string()))?;
    check_model(&model)?;
    Ok(model)
}

fn check_model(model: &Model) -> Result<()> {
    for (id, list) in &model.associate_lists {
        if *id != list.descriptor_id {
            return Err(Error::ModelParse(format!("list keyed {id} belongs to {}", list.descriptor_id)));
        }
        if list.entries.iter().any(|e| !(e.weight > 0.0 && e.weight.is_finite())) {
            return Err(Error::ModelParse(format!("descriptor {id} has a non-positive weight")));
        }
        let sorted = list.entries.windows(2).all(|w| {
            w[0].weight > w[1].weight || (w[0].weight == w[1].weight && w[0].lemma < w[1].lemma)
        });
        if !sorted {
            return Err(Error::ModelParse(format!("associates of {id} are not sorted")));
        }
    }
    Ok(())
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
