//! Manually indexed documents, reference-corpus statistics and stratified
//! train/test splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::preprocess::{preprocess, LemmaVector, PreprocessConfig};
use crate::thesaurus::DescriptorId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: String,
    #[serde(rename = "type")]
    pub doc_type: String,
    pub text: String,
    #[serde(rename = "descriptors", default)]
    pub gold_descriptors: BTreeSet<DescriptorId>,
}

impl Document {
    /// Length of the raw text in characters.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids and empty texts.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (idx, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateDocument {
                    id: doc.id.clone(),
                    line: idx + 1,
                });
            }
            if doc.text.is_empty() {
                return Err(Error::EmptyText {
                    id: doc.id.clone(),
                    line: idx + 1,
                });
            }
        }
        Ok(Self { documents })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// One JSON object per line; blank lines are skipped. Errors carry the
    /// 1-based line number of the offending record.
    pub fn parse(source: &str) -> Result<Self> {
        let mut documents = Vec::new();
        let mut seen = HashSet::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(line).map_err(|e| Error::CorpusParse {
                line: line_no,
                message: e.to_string(),
            })?;
            if doc.text.is_empty() {
                return Err(Error::EmptyText {
                    id: doc.id,
                    line: line_no,
                });
            }
            if !seen.insert(doc.id.clone()) {
                return Err(Error::DuplicateDocument {
                    id: doc.id,
                    line: line_no,
                });
            }
            documents.push(doc);
        }
        Ok(Self { documents })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("document serialises"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}

/// Per-stratum test quota: round-half-up of `size * fraction`.
fn stratum_quota(size: usize, fraction: f64) -> usize {
    ((size as f64) * fraction + 0.5).floor().min(size as f64) as usize
}

/// Splits `corpus` so that every document type contributes
/// `round(stratum_size * test_fraction)` documents to the test side.
/// Each side keeps the corpus order.
pub fn split_stratified(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let mut strata: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, doc) in corpus.documents.iter().enumerate() {
        strata.entry(doc.doc_type.as_str()).or_default().push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; corpus.len()];
    for members in strata.values_mut() {
        let quota = stratum_quota(members.len(), test_fraction);
        members.shuffle(&mut rng);
        for &idx in members.iter().take(quota) {
            in_test[idx] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (doc, is_test) in corpus.documents.iter().zip(in_test) {
        if is_test {
            test.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    Ok((Corpus { documents: train }, Corpus { documents: test }))
}

/// Lemma counts over a whole corpus, used as the reference distribution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub total_lemma_count: u64,
    pub lemma_counts: BTreeMap<String, u64>,
    pub avg_doc_length: f64,
}

impl CorpusStats {
    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a LemmaVector>) -> Self {
        let mut stats = Self::default();
        for v in vectors {
            stats.doc_count += 1;
            stats.total_lemma_count += v.length();
            for (lemma, n) in v.iter() {
                *stats.lemma_counts.entry(lemma.to_string()).or_insert(0) += n;
            }
        }
        stats.refresh_average();
        stats
    }

    /// Combine statistics of two disjoint corpora.
    pub fn merge(&self, other: &Self) -> Self {
        let mut merged = self.clone();
        merged.doc_count += other.doc_count;
        merged.total_lemma_count += other.total_lemma_count;
        for (lemma, &n) in &other.lemma_counts {
            *merged.lemma_counts.entry(lemma.clone()).or_insert(0) += n;
        }
        merged.refresh_average();
        merged
    }

    pub fn count(&self, lemma: &str) -> u64 {
        self.lemma_counts.get(lemma).copied().unwrap_or(0)
    }

    fn refresh_average(&mut self) {
        self.avg_doc_length = if self.doc_count > 0 {
            self.total_lemma_count as f64 / self.doc_count as f64
        } else {
            0.0
        };
    }
}

/// Preprocesses every document (in parallel when enabled), in corpus order.
pub fn lemma_vectors(corpus: &Corpus, config: &PreprocessConfig) -> Vec<LemmaVector> {
    parallel::map_slice(&corpus.documents, |doc| preprocess(&doc.text, config))
}

pub fn corpus_stats(corpus: &Corpus, config: &PreprocessConfig) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(CorpusStats::from_vectors(&lemma_vectors(corpus, config)))
}
