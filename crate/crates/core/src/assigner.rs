//! Ranking descriptors for a document by how similar its lemma frequencies
//! are to each associate list.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusStats;
use crate::error::{Error, Result};
use crate::preprocess::LemmaVector;
use crate::thesaurus::DescriptorId;
use crate::trainer::{AssociateList, Model};

/// Combined scores are rounded to this grid so that rankings do not depend
/// on the last bits of floating-point arithmetic.
pub const SCORE_QUANTUM: f64 = 1e-9;

/// Relative spread below which a score family counts as constant.
const CONSTANT_FAMILY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssignConfig {
    pub min_associates_present: usize,
    /// Weights of the cosine, okapi and dot-product families.
    pub combo_weights: [f64; 3],
    pub okapi_k1: f64,
    pub okapi_b: f64,
    pub top_k: usize,
    pub require_label_in_text: bool,
}

impl Default for AssignConfig {
    fn default() -> Self {
        Self {
            min_associates_present: 4,
            combo_weights: [0.4, 0.2, 0.4],
            okapi_k1: 2.0,
            okapi_b: 0.75,
            top_k: 8,
            require_label_in_text: false,
        }
    }
}

impl AssignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_associates_present < 1 {
            return Err(Error::InvalidConfig("min_associates_present must be at least 1".into()));
        }
        if self.combo_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig("combo_weights must be non-negative".into()));
        }
        let sum: f64 = self.combo_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("combo_weights sum to {sum}, not 1")));
        }
        if !(self.okapi_k1 >= 0.0 && self.okapi_k1.is_finite()) {
            return Err(Error::InvalidConfig("okapi_k1 must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.okapi_b) {
            return Err(Error::InvalidConfig("okapi_b must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDescriptor {
    pub descriptor_id: DescriptorId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentResult {
    pub document_id: String,
    pub ranked: Vec<RankedDescriptor>,
}

impl AssignmentResult {
    pub fn descriptor_ids(&self) -> Vec<DescriptorId> {
        self.ranked.iter().map(|r| r.descriptor_id.clone()).collect()
    }

    /// `rank<TAB>descriptor<TAB>score%` lines, one per ranked descriptor.
    pub fn render_table(&self, label: impl Fn(&DescriptorId) -> String) -> String {
        let mut out = String::from("rank\tdescriptor\tsimilarity\n");
        for (i, r) in self.ranked.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{:.1}%\n",
                i + 1,
                label(&r.descriptor_id),
                100.0 * r.score
            ));
        }
        out
    }
}

/// Number of distinct associates of `list` present in `v`.
pub fn associates_present(v: &LemmaVector, list: &AssociateList) -> usize {
    list.entries.iter().filter(|e| v.contains(&e.lemma)).count()
}

/// Σ count(l) · weight(l) over the shared lemmas.
pub fn dot_sim(v: &LemmaVector, list: &AssociateList) -> f64 {
    list.entries
        .iter()
        .map(|e| v.count(&e.lemma) as f64 * e.weight)
        .sum()
}

/// Cosine between the document counts and the associate weights.
pub fn cosine_sim(v: &LemmaVector, list: &AssociateList) -> f64 {
    let denom = v.norm() * list.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (dot_sim(v, list) / denom).clamp(0.0, 1.0)
}

/// Okapi/BM25-style score with the associate list as the weighted query and
/// document length normalised by the reference corpus average.
pub fn okapi_sim(v: &LemmaVector, list: &AssociateList, reference: &CorpusStats, k1: f64, b: f64) -> f64 {
    let avg = reference.avg_doc_length;
    let length_norm = if avg > 0.0 {
        1.0 - b + b * (v.length() as f64 / avg)
    } else {
        1.0
    };
    list.entries
        .iter()
        .filter_map(|e| {
            let tf = v.count(&e.lemma);
            (tf > 0).then(|| {
                let tf = tf as f64;
                e.weight * tf * (k1 + 1.0) / (tf + k1 * length_norm)
            })
        })
        .sum()
}

/// Min-max normalisation across candidates. A constant family maps to 1
/// when positive and to 0 otherwise.
fn normalise(values: &mut [f64]) {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let spread = max - min;
    if spread <= CONSTANT_FAMILY_TOLERANCE * max.abs().max(min.abs()) {
        let fill = if max > 0.0 { 1.0 } else { 0.0 };
        values.iter_mut().for_each(|v| *v = fill);
    } else {
        values.iter_mut().for_each(|v| *v = ((*v - min) / spread).clamp(0.0, 1.0));
    }
}

fn quantise(score: f64) -> f64 {
    ((score / SCORE_QUANTUM).round() * SCORE_QUANTUM).clamp(0.0, 1.0)
}

/// Ranks the model's descriptors for one document.
///
/// `labels_in_text`, when given together with `require_label_in_text`,
/// restricts candidates to descriptors whose label occurs in the text.
pub fn assign(
    document_id: &str,
    v: &LemmaVector,
    model: &Model,
    config: &AssignConfig,
    labels_in_text: Option<&BTreeSet<DescriptorId>>,
) -> Result<AssignmentResult> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let candidates: Vec<&AssociateList> = model
        .associate_lists
        .values()
        .filter(|list| associates_present(v, list) >= config.min_associates_present)
        .filter(|list| match (config.require_label_in_text, labels_in_text) {
            (true, Some(present)) => present.contains(&list.descriptor_id),
            _ => true,
        })
        .collect();

    let mut cosine: Vec<f64> = candidates.iter().map(|l| cosine_sim(v, l)).collect();
    let mut okapi: Vec<f64> = candidates
        .iter()
        .map(|l| okapi_sim(v, l, &model.reference_stats, config.okapi_k1, config.okapi_b))
        .collect();
    let mut dot: Vec<f64> = candidates.iter().map(|l| dot_sim(v, l)).collect();
    if !candidates.is_empty() {
        normalise(&mut cosine);
        normalise(&mut okapi);
        normalise(&mut dot);
    }

    let [w_cos, w_okapi, w_dot] = config.combo_weights;
    let mut ranked: Vec<RankedDescriptor> = candidates
        .iter()
        .enumerate()
        .map(|(i, list)| RankedDescriptor {
            descriptor_id: list.descriptor_id.clone(),
            score: quantise(w_cos * cosine[i] + w_okapi * okapi[i] + w_dot * dot[i]),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.descriptor_id.cmp(&b.descriptor_id))
    });
    ranked.truncate(config.top_k);
    Ok(AssignmentResult {
        document_id: document_id.to_string(),
        ranked,
    })
}
