//! Precision, recall and F-measure at fixed ranks against gold descriptor
//! sets, macro-averaged over documents.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::assigner::{assign, AssignConfig};
use crate::baseline::LabelMatcher;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::parallel;
use crate::preprocess::{preprocess, PreprocessConfig};
use crate::thesaurus::DescriptorId;
use crate::trainer::Model;

/// Ranks reported when none are requested.
pub const DEFAULT_RANKS: [usize; 6] = [1, 3, 5, 8, 10, 11];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Prf {
    fn from_pr(precision: f64, recall: f64) -> Self {
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f_measure,
        }
    }
}

/// P/R/F of the first `k` entries of `ranked`.
pub fn pr_at_rank(ranked: &[DescriptorId], gold: &BTreeSet<DescriptorId>, k: usize) -> Result<Prf> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let mut seen = HashSet::with_capacity(ranked.len());
    for id in ranked {
        if !seen.insert(id) {
            return Err(Error::DuplicateRanked(id.to_string()));
        }
    }
    let suggested = k.min(ranked.len());
    let hits = ranked[..suggested].iter().filter(|id| gold.contains(*id)).count();
    let precision = if suggested == 0 {
        0.0
    } else {
        hits as f64 / suggested as f64
    };
    let recall = hits as f64 / gold.len() as f64;
    Ok(Prf::from_pr(precision, recall))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<RankRow>,
    pub documents_evaluated: usize,
    pub documents_skipped_empty_gold: usize,
}

impl EvalReport {
    pub fn row(&self, rank: usize) -> Option<&RankRow> {
        self.rows.iter().find(|r| r.rank == rank)
    }

    /// Plain-text table with percentages to one decimal.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "documents evaluated: {} (skipped without gold: {})\n",
            self.documents_evaluated, self.documents_skipped_empty_gold
        );
        out.push_str("Rank\tP\tR\tF\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{:.1}\t{:.1}\t{:.1}\n",
                row.rank,
                100.0 * row.precision,
                100.0 * row.recall,
                100.0 * row.f_measure
            ));
        }
        out
    }
}

/// A document's ranking together with its gold set.
#[derive(Debug, Clone)]
pub struct RankedDocument {
    pub document_id: String,
    pub ranked: Vec<DescriptorId>,
    pub gold: BTreeSet<DescriptorId>,
}

/// Macro-averages P/R/F per rank over documents with a non-empty gold set.
/// Documents are aggregated in id order so the result does not depend on
/// input order.
pub fn evaluate_rankings(documents: &[RankedDocument], ranks: &[usize]) -> Result<EvalReport> {
    if ranks.contains(&0) {
        return Err(Error::InvalidConfig("ranks start at 1".into()));
    }
    let mut scored: Vec<&RankedDocument> = documents.iter().filter(|d| !d.gold.is_empty()).collect();
    let skipped = documents.len() - scored.len();
    if scored.is_empty() {
        return Err(Error::NoGoldDocuments);
    }
    scored.sort_by(|a, b| a.document_id.cmp(&b.document_id));

    let n = scored.len() as f64;
    let mut rows = Vec::with_capacity(ranks.len());
    for &k in ranks {
        let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
        for doc in &scored {
            let prf = pr_at_rank(&doc.ranked, &doc.gold, k)?;
            p += prf.precision;
            r += prf.recall;
            f += prf.f_measure;
        }
        rows.push(RankRow {
            rank: k,
            precision: p / n,
            recall: r / n,
            f_measure: f / n,
        });
    }
    Ok(EvalReport {
        rows,
        documents_evaluated: scored.len(),
        documents_skipped_empty_gold: skipped,
    })
}

/// Assigns descriptors to every test document and scores the rankings.
///
/// Each document is ranked to depth `max(ranks)` regardless of
/// `config.top_k`, so every requested rank is measured.
pub fn evaluate(
    model: &Model,
    test: &Corpus,
    preprocess_config: &PreprocessConfig,
    config: &AssignConfig,
    ranks: &[usize],
    labels: Option<&LabelMatcher<'_>>,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut depth_config = config.clone();
    depth_config.top_k = ranks.iter().copied().max().unwrap_or(config.top_k);
    let ranked = parallel::map_slice(test.documents(), |doc| {
        let v = preprocess(&doc.text, preprocess_config);
        let present = labels.map(|m| m.extract(&doc.text));
        assign(&doc.id, &v, model, &depth_config, present.as_ref()).map(|r| RankedDocument {
            document_id: doc.id.clone(),
            ranked: r.descriptor_ids(),
            gold: doc.gold_descriptors.clone(),
        })
    });
    let ranked: Vec<RankedDocument> = ranked.into_iter().collect::<Result<_>>()?;
    evaluate_rankings(&ranked, ranks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(items: &[&str]) -> Vec<DescriptorId> {
        items.iter().map(|&s| DescriptorId::from(s)).collect()
    }

    fn gold(items: &[&str]) -> BTreeSet<DescriptorId> {
        ids(items).into_iter().collect()
    }

    #[test]
    fn definitions() {
        let prf = pr_at_rank(&ids(&["A", "B", "C", "X"]), &gold(&["A", "C", "D", "E"]), 3).unwrap();
        assert_eq!(prf.precision, 2.0 / 3.0);
        assert_eq!(prf.recall, 0.5);
        assert!((prf.f_measure - 4.0 / 7.0).abs() < 1e-12);

        let perfect = pr_at_rank(&ids(&["A", "B", "C"]), &gold(&["A", "B", "C"]), 3).unwrap();
        assert_eq!((perfect.precision, perfect.recall, perfect.f_measure), (1.0, 1.0, 1.0));

        let short = pr_at_rank(
            &ids(&["A", "B", "C", "X", "Y", "Z"]),
            &gold(&["A", "B", "C", "D", "E", "F"]),
            10,
        )
        .unwrap();
        assert_eq!((short.precision, short.recall), (0.5, 0.5));
    }

    #[test]
    fn empty_ranking_scores_zero() {
        let prf = pr_at_rank(&[], &gold(&["A"]), 5).unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f_measure), (0.0, 0.0, 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(pr_at_rank(&ids(&["A"]), &BTreeSet::new(), 1), Err(Error::EmptyGold)));
        assert!(matches!(
            pr_at_rank(&ids(&["A", "A"]), &gold(&["A"]), 1),
            Err(Error::DuplicateRanked(_))
        ));
        let docs = [RankedDocument { document_id: "d".into(), ranked: ids(&["A"]), gold: BTreeSet::new() }];
        assert!(matches!(evaluate_rankings(&docs, &[1]), Err(Error::NoGoldDocuments)));
    }

    #[test]
    fn macro_average() {
        let docs = vec![
            RankedDocument { document_id: "a".into(), ranked: ids(&["A", "B", "C"]), gold: gold(&["A", "B", "C"]) },
            RankedDocument { document_id: "b".into(), ranked: ids(&["X", "Y", "Z"]), gold: gold(&["A"]) },
            RankedDocument { document_id: "c".into(), ranked: ids(&["X"]), gold: BTreeSet::new() },
        ];
        let report = evaluate_rankings(&docs, &[3]).unwrap();
        assert_eq!(report.row(3).unwrap().precision, 0.5);
        assert_eq!(report.documents_evaluated, 2);
        assert_eq!(report.documents_skipped_empty_gold, 1);

        let single = evaluate_rankings(&docs[..1], &[1, 3]).unwrap();
        let direct = pr_at_rank(&docs[0].ranked, &docs[0].gold, 1).unwrap();
        assert_eq!(single.row(1).unwrap().precision, direct.precision);
        assert_eq!(single.row(1).unwrap().recall, direct.recall);
    }

    #[test]
    fn table_layout() {
        let docs = vec![RankedDocument { document_id: "a".into(), ranked: ids(&["A", "B"]), gold: gold(&["A"]) }];
        let report = evaluate_rankings(&docs, &DEFAULT_RANKS).unwrap();
        let table = report.render_table();
        let rows: Vec<&str> = table.lines().skip(2).collect();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0], "1\t100.0\t100.0\t100.0");
        assert_eq!(rows[1], "3\t50.0\t100.0\t66.7");
    }

    fn instance() -> impl Strategy<Value = (Vec<DescriptorId>, BTreeSet<DescriptorId>)> {
        (
            Just((0..20).map(|i| DescriptorId::from(format!("D{i}"))).collect::<Vec<_>>()).prop_shuffle(),
            0usize..=20,
            prop::collection::btree_set(0usize..20, 1..10),
        )
            .prop_map(|(pool, len, gold)| {
                let gold = gold.into_iter().map(|i| DescriptorId::from(format!("D{i}"))).collect();
                (pool[..len].to_vec(), gold)
            })
    }

    proptest! {
        #[test]
        fn recall_nondecreasing((ranked, gold) in instance()) {
            let mut last = 0.0;
            for k in 1..=22 {
                let prf = pr_at_rank(&ranked, &gold, k).unwrap();
                prop_assert!(prf.recall >= last);
                last = prf.recall;
            }
            if let Some(top) = ranked.first() {
                if gold.contains(top) {
                    prop_assert_eq!(pr_at_rank(&ranked, &gold, 1).unwrap().precision, 1.0);
                }
            }
        }

        #[test]
        fn report_ignores_document_order(rows in prop::collection::vec(instance(), 1..12), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let docs: Vec<RankedDocument> = rows.into_iter().enumerate().map(|(i, (ranked, gold))| RankedDocument {
                document_id: format!("doc{i}"), ranked, gold,
            }).collect();
            let mut shuffled = docs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(evaluate_rankings(&docs, &DEFAULT_RANKS).unwrap(), evaluate_rankings(&shuffled, &DEFAULT_RANKS).unwrap());
        }
    }
}
