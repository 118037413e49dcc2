//! Associate-list training.
//!
//! For every descriptor with enough long training texts, each text is
//! reduced to the lemmas that are significantly over-represented in it
//! against the whole training corpus (G² at the configured p-value). A lemma
//! that is a candidate in at least `min_texts_per_lemma` of the descriptor's
//! texts becomes an associate with weight
//!
//! ```text
//! weight(l, d) = Σ_{t ∈ T(l,d)} 1 / |gold(t)|  ·  ln(max_df / (β · df(l)) + 1)
//! ```
//!
//! where `T(l,d)` are the descriptor's texts in which `l` is a candidate and
//! `df(l)` is the number of descriptors having `l` as an associate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::{lemma_vectors, Corpus, CorpusStats};
use crate::error::{Error, Result};
use crate::parallel;
use crate::preprocess::{LemmaVector, PreprocessConfig, PreprocessFingerprint};
use crate::stats::{g2_threshold, g2_unchecked, ContingencyCounts};
use crate::thesaurus::DescriptorId;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Numeric training parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingParams {
    pub min_texts_per_descriptor: usize,
    pub min_chars_per_text: usize,
    pub p_value: f64,
    pub min_texts_per_lemma: usize,
    pub beta: f64,
    pub min_associate_weight: f64,
    pub min_associates_per_descriptor: usize,
}

impl Default for TrainingParams {
    fn default() -> Self {
        Self {
            min_texts_per_descriptor: 5,
            min_chars_per_text: 2000,
            p_value: 0.15,
            min_texts_per_lemma: 2,
            beta: 10.0,
            min_associate_weight: 0.0,
            min_associates_per_descriptor: 10,
        }
    }
}

impl TrainingParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("min_texts_per_descriptor", self.min_texts_per_descriptor),
            ("min_chars_per_text", self.min_chars_per_text),
            ("min_texts_per_lemma", self.min_texts_per_lemma),
            ("min_associates_per_descriptor", self.min_associates_per_descriptor),
        ];
        for (name, value) in counts {
            if value < 1 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if !(self.p_value > 0.0 && self.p_value <= 1.0) {
            return Err(Error::InvalidPValue(self.p_value));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.min_associate_weight >= 0.0 && self.min_associate_weight.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "min_associate_weight must be non-negative, got {}",
                self.min_associate_weight
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainingConfig {
    pub params: TrainingParams,
    pub preprocess: PreprocessConfig,
}

/// What a model remembers about how it was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSnapshot {
    pub params: TrainingParams,
    pub preprocess: PreprocessFingerprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociateEntry {
    pub lemma: String,
    pub weight: f64,
    pub supporting_text_count: usize,
    pub raw_frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociateList {
    pub descriptor_id: DescriptorId,
    /// Sorted by weight descending, ties by lemma.
    pub entries: Vec<AssociateEntry>,
}

impl AssociateList {
    pub fn new(descriptor_id: DescriptorId, mut entries: Vec<AssociateEntry>) -> Self {
        entries.sort_by(compare_entries);
        Self {
            descriptor_id,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.weight * e.weight).sum::<f64>().sqrt()
    }

    /// Tab-separated `lemma, frequency, texts, weight` rows, best first.
    pub fn render_table(&self, limit: usize) -> String {
        let mut out = String::from("lemma\tfreq\ttexts\tweight\n");
        for e in self.entries.iter().take(limit) {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.2}\n",
                e.lemma, e.raw_frequency, e.supporting_text_count, e.weight
            ));
        }
        out
    }
}

fn compare_entries(a: &AssociateEntry, b: &AssociateEntry) -> Ordering {
    b.weight
        .total_cmp(&a.weight)
        .then_with(|| a.lemma.cmp(&b.lemma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format_version: u32,
    pub training_config: TrainingSnapshot,
    pub reference_stats: CorpusStats,
    pub associate_lists: BTreeMap<DescriptorId, AssociateList>,
}

impl Model {
    pub fn is_empty(&self) -> bool {
        self.associate_lists.is_empty()
    }

    pub fn len(&self) -> usize {
        self.associate_lists.len()
    }

    pub fn get(&self, id: &str) -> Option<&AssociateList> {
        self.associate_lists.get(id)
    }
}

/// Phase-1 accumulator for one lemma of one descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LemmaSupport {
    /// Σ 1/|gold(t)| over the texts in which the lemma is a candidate.
    pub w: f64,
    pub text_count: usize,
    pub raw_frequency: u64,
}

/// One of a descriptor's training texts, ready for accumulation.
#[derive(Debug, Clone, Copy)]
pub struct TrainingText<'a> {
    pub vector: &'a LemmaVector,
    /// Number of gold descriptors of the text.
    pub descriptor_count: usize,
    pub candidates: &'a BTreeSet<String>,
}

/// Why a descriptor seen in the corpus did not make it into the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    /// Fewer qualifying texts than `min_texts_per_descriptor`.
    InsufficientTexts { qualifying: usize },
    /// Fewer surviving associates than `min_associates_per_descriptor`.
    TooFewAssociates { associates: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub trained: Vec<DescriptorId>,
    pub skipped: BTreeMap<DescriptorId, SkipReason>,
}

/// Indices of the documents that count towards each descriptor: those that
/// carry it in their gold set and are at least `min_chars_per_text` long.
fn qualifying_texts(corpus: &Corpus, params: &TrainingParams) -> BTreeMap<DescriptorId, Vec<usize>> {
    let mut texts: BTreeMap<DescriptorId, Vec<usize>> = BTreeMap::new();
    for (idx, doc) in corpus.documents().iter().enumerate() {
        if doc.gold_descriptors.is_empty() {
            continue;
        }
        let long_enough = doc.char_len() >= params.min_chars_per_text;
        for d in &doc.gold_descriptors {
            let entry = texts.entry(d.clone()).or_default();
            if long_enough {
                entry.push(idx);
            }
        }
    }
    texts
}

/// Descriptors with at least `min_texts_per_descriptor` texts of at least
/// `min_chars_per_text` characters.
pub fn eligible_descriptors(corpus: &Corpus, params: &TrainingParams) -> BTreeSet<DescriptorId> {
    qualifying_texts(corpus, params)
        .into_iter()
        .filter(|(_, texts)| texts.len() >= params.min_texts_per_descriptor)
        .map(|(d, _)| d)
        .collect()
}

fn candidates_with_threshold(v: &LemmaVector, reference: &CorpusStats, threshold: f64) -> BTreeSet<String> {
    let n1 = v.length();
    let n2 = reference.total_lemma_count;
    if n1 == 0 || n2 == 0 {
        return BTreeSet::new();
    }
    v.iter()
        .filter_map(|(lemma, k1)| {
            let counts = ContingencyCounts {
                k1,
                n1,
                k2: reference.count(lemma),
                n2,
            };
            if !counts.is_valid() || !counts.overrepresented() {
                return None;
            }
            (g2_unchecked(counts) >= threshold).then(|| lemma.to_string())
        })
        .collect()
}

/// Lemmas of `v` that are over-represented against `reference` with
/// G² at or above the chi-square(1) critical value for `p_value`.
pub fn text_candidates(v: &LemmaVector, reference: &CorpusStats, p_value: f64) -> Result<BTreeSet<String>> {
    let threshold = g2_threshold(p_value)?;
    Ok(candidates_with_threshold(v, reference, threshold))
}

/// Sums `1/|gold(t)|` per candidate lemma over a descriptor's texts and keeps
/// lemmas supported by at least `min_texts_per_lemma` texts.
pub fn accumulate_w(texts: &[TrainingText<'_>], min_texts_per_lemma: usize) -> BTreeMap<String, LemmaSupport> {
    let mut support: BTreeMap<String, LemmaSupport> = BTreeMap::new();
    for text in texts {
        let share = 1.0 / text.descriptor_count.max(1) as f64;
        for lemma in text.candidates {
            let entry = support.entry(lemma.clone()).or_default();
            entry.w += share;
            entry.text_count += 1;
        }
    }
    support.retain(|_, s| s.text_count >= min_texts_per_lemma);
    for (lemma, s) in support.iter_mut() {
        s.raw_frequency = texts.iter().map(|t| t.vector.count(lemma)).sum();
    }
    support
}

/// Inverse descriptor frequency `ln(max_df / (beta · df) + 1)` per lemma.
pub fn compute_idf(df: &BTreeMap<String, usize>, beta: f64) -> Result<BTreeMap<String, f64>> {
    let max_df = *df.values().max().ok_or(Error::EmptyDescriptorFrequencies)?;
    if df.values().any(|&n| n == 0) {
        return Err(Error::InvalidConfig("descriptor frequency of 0".into()));
    }
    let max_df = max_df as f64;
    Ok(df
        .iter()
        .map(|(lemma, &n)| (lemma.clone(), (max_df / (beta * n as f64) + 1.0).ln()))
        .collect())
}

pub fn train(corpus: &Corpus, config: &TrainingConfig) -> Result<Model> {
    train_with_summary(corpus, config).map(|(model, _)| model)
}

/// Trains a model and reports which descriptors were dropped and why.
pub fn train_with_summary(corpus: &Corpus, config: &TrainingConfig) -> Result<(Model, TrainSummary)> {
    let params = &config.params;
    params.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let threshold = g2_threshold(params.p_value)?;

    let vectors = lemma_vectors(corpus, &config.preprocess);
    let reference = CorpusStats::from_vectors(&vectors);

    let mut summary = TrainSummary::default();
    let mut eligible = Vec::new();
    for (descriptor, texts) in qualifying_texts(corpus, params) {
        if texts.len() >= params.min_texts_per_descriptor {
            eligible.push((descriptor, texts));
        } else {
            summary.skipped.insert(
                descriptor,
                SkipReason::InsufficientTexts {
                    qualifying: texts.len(),
                },
            );
        }
    }

    // Candidates depend only on the text and the reference corpus, so they
    // are computed once per document that trains at least one descriptor.
    let mut needed: Vec<usize> = eligible.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    needed.sort_unstable();
    needed.dedup();
    let computed = parallel::map_slice(&needed, |&idx| {
        candidates_with_threshold(&vectors[idx], &reference, threshold)
    });
    let mut candidates: Vec<Option<BTreeSet<String>>> = vec![None; vectors.len()];
    for (idx, set) in needed.into_iter().zip(computed) {
        candidates[idx] = Some(set);
    }

    // Phase 1, independent per descriptor.
    let documents = corpus.documents();
    let phase1 = parallel::map_slice(&eligible, |(_, texts)| {
        let inputs: Vec<TrainingText<'_>> = texts
            .iter()
            .map(|&idx| TrainingText {
                vector: &vectors[idx],
                descriptor_count: documents[idx].gold_descriptors.len(),
                candidates: candidates[idx].as_ref().expect("candidates computed"),
            })
            .collect();
        accumulate_w(&inputs, params.min_texts_per_lemma)
    });

    // Phase 2.
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for support in &phase1 {
        for lemma in support.keys() {
            *df.entry(lemma.clone()).or_insert(0) += 1;
        }
    }
    let idf = if df.is_empty() {
        BTreeMap::new()
    } else {
        compute_idf(&df, params.beta)?
    };

    let mut associate_lists = BTreeMap::new();
    for ((descriptor, _), support) in eligible.into_iter().zip(phase1) {
        let entries: Vec<AssociateEntry> = support
            .into_iter()
            .map(|(lemma, s)| {
                let weight = s.w * idf[&lemma];
                AssociateEntry {
                    lemma,
                    weight,
                    supporting_text_count: s.text_count,
                    raw_frequency: s.raw_frequency,
                }
            })
            .filter(|e| e.weight >= params.min_associate_weight)
            .collect();
        if entries.len() < params.min_associates_per_descriptor {
            summary.skipped.insert(
                descriptor,
                SkipReason::TooFewAssociates {
                    associates: entries.len(),
                },
            );
            continue;
        }
        summary.trained.push(descriptor.clone());
        associate_lists.insert(descriptor.clone(), AssociateList::new(descriptor, entries));
    }

    if associate_lists.is_empty() {
        warn!("no descriptor met the training requirements; the model is empty");
    }

    let model = Model {
        format_version: MODEL_FORMAT_VERSION,
        training_config: TrainingSnapshot {
            params: params.clone(),
            preprocess: config.preprocess.fingerprint(),
        },
        reference_stats: reference,
        associate_lists,
    };
    Ok((model, summary))
}
