//! Generator for synthetic indexed corpora with a known answer, used by the
//! integration tests, the benches and the CLI demo.
//!
//! Each descriptor owns a disjoint content vocabulary; every document mixes
//! content words of its gold descriptors with a shared noise vocabulary.
//! Descriptor labels are built from words that never occur in any text
//! unless `mention_labels` is set.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};
use crate::thesaurus::{DescriptorId, Thesaurus};

const DOC_TYPES: [&str; 3] = ["Parliamentary Question", "Regulation", "Decision"];
const LABEL_WORDS: [&str; 20] = [
    "agriculture", "banking", "customs", "defence", "education", "energy", "fisheries", "forestry",
    "health", "housing", "industry", "justice", "labour", "maritime", "mining", "pensions", "railways",
    "taxation", "tourism", "veterinary",
];

#[derive(Debug, Clone)]
pub struct SeparableSpec {
    pub descriptors: usize,
    pub train_docs_per_descriptor: usize,
    pub test_docs_per_descriptor: usize,
    pub vocabulary_per_descriptor: usize,
    pub noise_vocabulary: usize,
    pub words_per_doc: usize,
    /// Share of a document's words drawn from its descriptors' vocabularies.
    pub content_share: f64,
    /// Every `n`-th document also carries the next descriptor (0 = never).
    pub second_descriptor_every: usize,
    /// Insert the descriptor label phrase into each of its documents.
    pub mention_labels: bool,
    pub seed: u64,
}

impl Default for SeparableSpec {
    fn default() -> Self {
        Self {
            descriptors: 20,
            train_docs_per_descriptor: 40,
            test_docs_per_descriptor: 5,
            vocabulary_per_descriptor: 50,
            noise_vocabulary: 200,
            words_per_doc: 450,
            content_share: 0.6,
            second_descriptor_every: 4,
            mention_labels: false,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub thesaurus: Thesaurus,
    pub train: Corpus,
    pub test: Corpus,
}

impl SyntheticData {
    /// Content vocabulary of descriptor `index`.
    pub fn vocabulary(spec: &SeparableSpec, index: usize) -> BTreeSet<String> {
        (0..spec.vocabulary_per_descriptor)
            .map(|w| content_word(index, w))
            .collect()
    }
}

pub fn descriptor_id(index: usize) -> DescriptorId {
    DescriptorId::new(format!("{}", 1000 + index))
}

fn content_word(descriptor: usize, word: usize) -> String {
    format!("c{descriptor:02}w{word:02}")
}

fn noise_word(word: usize) -> String {
    format!("n{word:03}")
}

fn label(index: usize) -> String {
    let word = LABEL_WORDS[index % LABEL_WORDS.len()];
    format!("{word} policy {}", index / LABEL_WORDS.len() + 1)
}

/// Index of the descriptor built by this generator, from its id.
pub fn descriptor_index(id: &DescriptorId) -> Option<usize> {
    id.as_str().parse::<usize>().ok()?.checked_sub(1000)
}

pub fn separable(spec: &SeparableSpec) -> SyntheticData {
    assert!(spec.descriptors > 0 && spec.vocabulary_per_descriptor > 0 && spec.noise_vocabulary > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // mild Zipf over each vocabulary
    let zipf = |n: usize| WeightedIndex::new((1..=n).map(|r| 1.0 / (r as f64).sqrt())).unwrap();
    let content_dist = zipf(spec.vocabulary_per_descriptor);
    let noise_dist = zipf(spec.noise_vocabulary);

    let make_corpus = |prefix: &str, per_descriptor: usize, rng: &mut ChaCha8Rng| {
        let mut docs = Vec::new();
        for d in 0..spec.descriptors {
            for i in 0..per_descriptor {
                let mut gold = vec![d];
                if spec.second_descriptor_every > 0 && spec.descriptors > 1 && i % spec.second_descriptor_every == 0 {
                    gold.push((d + 1) % spec.descriptors);
                }
                let mut words = Vec::with_capacity(spec.words_per_doc + 8);
                for _ in 0..spec.words_per_doc {
                    if rng.gen_bool(spec.content_share) {
                        let owner = gold[rng.gen_range(0..gold.len())];
                        words.push(content_word(owner, content_dist.sample(rng)));
                    } else {
                        words.push(noise_word(noise_dist.sample(rng)));
                    }
                }
                if spec.mention_labels {
                    for &g in &gold {
                        let at = rng.gen_range(0..=words.len());
                        words.insert(at, label(g));
                    }
                }
                let mut text = words.join(" ");
                text.push('.');
                docs.push(Document {
                    id: format!("{prefix}-{d:02}-{i:03}"),
                    language: "en".into(),
                    doc_type: DOC_TYPES[(d + i) % DOC_TYPES.len()].into(),
                    text,
                    gold_descriptors: gold.into_iter().map(descriptor_id).collect(),
                });
            }
        }
        Corpus::new(docs).expect("generated ids are unique")
    };
    let train = make_corpus("train", spec.train_docs_per_descriptor, &mut rng);
    let test = make_corpus("test", spec.test_docs_per_descriptor, &mut rng);

    let descriptors: Vec<serde_json::Value> = (0..spec.descriptors)
        .map(|d| {
            serde_json::json!({
                "id": descriptor_id(d),
                "labels": {"en": label(d)},
                "non_descriptors": {"en": [format!("{} {}", LABEL_WORDS[d % LABEL_WORDS.len()], "matters")]},
            })
        })
        .collect();
    let thesaurus = Thesaurus::parse(
        &serde_json::json!({"languages": ["en"], "descriptors": descriptors}).to_string(),
    )
    .expect("generated thesaurus is valid");

    SyntheticData {
        thesaurus,
        train,
        test,
    }
}
