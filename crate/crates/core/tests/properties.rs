use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use assoc_index::assigner::{assign, AssignConfig};
use assoc_index::baseline::{extract_descriptors, ExtractionOptions};
use assoc_index::corpus::{Corpus, CorpusStats, Document};
use assoc_index::preprocess::{LemmaVector, PreprocessConfig};
use assoc_index::synthetic::{self, SeparableSpec};
use assoc_index::thesaurus::{DescriptorId, Thesaurus};
use assoc_index::trainer::{
    train, AssociateEntry, AssociateList, Model, TrainingConfig, TrainingParams, TrainingSnapshot,
    MODEL_FORMAT_VERSION,
};

fn thesaurus_source(n: usize, links: &[(usize, usize, u8)], nd: &[Vec<String>]) -> String {
    let mut descriptors: Vec<serde_json::Value> = (0..n)
        .map(|i| {
            serde_json::json!({
                "id": format!("{}", 100 + i),
                "labels": {"en": format!("label {i}"), "fr": format!("libelle {i}")},
                "non_descriptors": {"en": nd[i % nd.len()]},
            })
        })
        .collect();
    for &(a, b, kind) in links {
        let (a, b) = (a % n, b % n);
        if a == b {
            continue;
        }
        let key = ["bt", "nt", "rt"][kind as usize % 3];
        let entry = descriptors[a].as_object_mut().unwrap().entry(key).or_insert(serde_json::json!([]));
        let target = serde_json::json!(format!("{}", 100 + b));
        if !entry.as_array().unwrap().contains(&target) {
            entry.as_array_mut().unwrap().push(target);
        }
    }
    serde_json::to_string_pretty(&serde_json::json!({"languages": ["en", "fr"], "descriptors": descriptors})).unwrap()
}

fn model_from(rng: &mut ChaCha8Rng, descriptors: usize, vocabulary: usize) -> Model {
    let mut associate_lists = BTreeMap::new();
    for d in 0..descriptors {
        let id = DescriptorId::new(format!("D{d}"));
        let size = rng.gen_range(4..=vocabulary.min(16));
        let mut lemmas: Vec<usize> = (0..vocabulary).collect();
        for i in 0..size {
            let j = rng.gen_range(i..vocabulary);
            lemmas.swap(i, j);
        }
        let entries = lemmas[..size]
            .iter()
            .map(|&l| AssociateEntry {
                lemma: format!("w{l}"),
                weight: rng.gen_range(0.01..20.0),
                supporting_text_count: 2,
                raw_frequency: 2,
            })
            .collect();
        associate_lists.insert(id.clone(), AssociateList::new(id, entries));
    }
    Model {
        format_version: MODEL_FORMAT_VERSION,
        training_config: TrainingSnapshot {
            params: TrainingParams::default(),
            preprocess: PreprocessConfig::plain().fingerprint(),
        },
        reference_stats: CorpusStats {
            doc_count: 10,
            total_lemma_count: 400,
            lemma_counts: BTreeMap::new(),
            avg_doc_length: 40.0,
        },
        associate_lists,
    }
}

fn document_from(rng: &mut ChaCha8Rng, vocabulary: usize) -> LemmaVector {
    let distinct = rng.gen_range(4..=vocabulary);
    LemmaVector::from_counts((0..distinct).map(|_| (format!("w{}", rng.gen_range(0..vocabulary)), rng.gen_range(1..8u64))))
}

fn rank_of(model: &Model, v: &LemmaVector, id: &str, okapi_b: f64) -> Option<usize> {
    let config = AssignConfig { top_k: usize::MAX, okapi_b, ..Default::default() };
    let result = assign("doc", v, model, &config, None).unwrap();
    result.ranked.iter().position(|r| r.descriptor_id.as_str() == id)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thesaurus_round_trip_and_forms(
        n in 1usize..12,
        links in prop::collection::vec((0usize..12, 0usize..12, 0u8..3), 0..20),
        nd in prop::collection::vec(prop::collection::vec("[a-z]{3,8}( [a-z]{3,8})?", 0..3), 1..4),
    ) {
        let source = thesaurus_source(n, &links, &nd);
        let th = Thesaurus::parse(&source).unwrap();
        prop_assert_eq!(&Thesaurus::parse(&source).unwrap(), &th);
        prop_assert_eq!(&Thesaurus::parse(&th.to_json()).unwrap(), &th);
        for desc in th.descriptors() {
            for b in &desc.broader {
                prop_assert!(th.get(b.as_str()).unwrap().narrower.contains(&desc.id));
            }
            for lang in ["en", "fr"] {
                let short = th.surface_forms(desc.id.as_str(), lang, false).unwrap();
                let long = th.surface_forms(desc.id.as_str(), lang, true).unwrap();
                prop_assert_eq!(short.len(), 1);
                prop_assert_eq!(short[0], long[0]);
            }
        }
    }

    #[test]
    fn non_descriptors_never_shrink_extraction(
        nd in prop::collection::vec(prop::collection::vec("[a-d]{1,2}( [a-d]{1,2})?", 0..3), 1..4),
        text in "([a-d]{1,2} |label [0-9] ){0,30}",
    ) {
        let th = Thesaurus::parse(&thesaurus_source(6, &[], &nd)).unwrap();
        let plain = PreprocessConfig::plain();
        let off = extract_descriptors(&text, &th, "en", ExtractionOptions::default(), &plain).unwrap();
        let on_opts = ExtractionOptions { use_non_descriptors: true, ..Default::default() };
        let on = extract_descriptors(&text, &th, "en", on_opts, &plain).unwrap();
        prop_assert!(off.is_subset(&on));
    }

    #[test]
    fn scale_invariance_for_any_factor(seed in any::<u64>(), c in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = model_from(&mut rng, 8, 24);
        let mut scaled = model.clone();
        for list in scaled.associate_lists.values_mut() {
            for e in &mut list.entries {
                e.weight *= c;
            }
        }
        let config = AssignConfig { top_k: 20, ..Default::default() };
        for _ in 0..5 {
            let v = document_from(&mut rng, 24);
            let a = assign("d", &v, &model, &config, None).unwrap();
            let b = assign("d", &v, &scaled, &config, None).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn combined_scores_in_unit_interval_and_sorted(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = model_from(&mut rng, 10, 20);
        let v = document_from(&mut rng, 20);
        let config = AssignConfig { top_k: 20, ..Default::default() };
        let result = assign("d", &v, &model, &config, None).unwrap();
        prop_assert_eq!(&result, &assign("d", &v, &model, &config, None).unwrap());
        for pair in result.ranked.windows(2) {
            prop_assert!(pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score && pair[0].descriptor_id < pair[1].descriptor_id));
        }
        for r in &result.ranked {
            prop_assert!((0.0..=1.0).contains(&r.score));
        }
    }

    // Holds without document-length normalisation; see
    // `length_normalisation_can_demote` for the exception.
    #[test]
    fn unique_lemma_occurrences_never_lower_rank(seed in any::<u64>(), extra in 1u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = model_from(&mut rng, 6, 20);
        // give D0 a lemma no other list has
        let d0 = model.associate_lists.get_mut("D0").unwrap();
        let mut entries = d0.entries.clone();
        entries.push(AssociateEntry {
            lemma: "only".into(),
            weight: rng.gen_range(1e-4..20.0),
            supporting_text_count: 2,
            raw_frequency: 2,
        });
        *d0 = AssociateList::new(d0.descriptor_id.clone(), entries);

        let v = document_from(&mut rng, 20);
        let mut more = v.clone();
        more.add("only", extra);
        if let Some(before) = rank_of(&model, &v, "D0", 0.0) {
            let after = rank_of(&model, &more, "D0", 0.0);
            prop_assert!(after.is_some_and(|a| a <= before), "rank {before} became {after:?}");
        }
    }
}

#[test]
fn length_normalisation_can_demote() {
    // The longer text lowers every okapi term by a factor that depends on
    // its tf, so C overtakes A although only A gained evidence.
    let list = |id: &str, weights: &[(&str, f64)]| {
        let id = DescriptorId::from(id);
        let entries = weights
            .iter()
            .map(|&(lemma, weight)| AssociateEntry { lemma: lemma.into(), weight, supporting_text_count: 2, raw_frequency: 2 })
            .collect();
        (id.clone(), AssociateList::new(id, entries))
    };
    let mut model = model_from(&mut ChaCha8Rng::seed_from_u64(0), 1, 4);
    model.reference_stats.avg_doc_length = 20.0;
    model.associate_lists = [
        list("A", &[("a", 3.0), ("b", 3.0), ("c", 3.0), ("d", 3.0), ("only", 0.01)]),
        list("B", &[("e", 2.0), ("f", 2.0), ("g", 2.0), ("h", 2.0)]),
        list("C", &[("a", 1.0), ("b", 1.0), ("e", 1.0), ("i", 1.0)]),
    ]
    .into();
    let v = LemmaVector::from_counts([
        ("a", 1), ("b", 1), ("c", 1), ("d", 1), ("e", 2), ("f", 2), ("g", 2), ("h", 2), ("i", 4),
    ]);
    let mut more = v.clone();
    more.add("only", 10);
    assert_eq!(rank_of(&model, &v, "A", 0.75), Some(1));
    assert_eq!(rank_of(&model, &more, "A", 0.75), Some(2));
    assert_eq!(rank_of(&model, &v, "A", 0.0), rank_of(&model, &more, "A", 0.0));
}

fn fixture_training_corpus(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    for i in 0..60 {
        let primary = i % 6;
        let mut gold = vec![primary];
        if rng.gen_bool(0.3) {
            gold.push((primary + 1 + rng.gen_range(0..5)) % 6);
        }
        let words: Vec<String> = (0..rng.gen_range(50..400))
            .map(|_| {
                let g = gold[rng.gen_range(0..gold.len())];
                if rng.gen_bool(0.5) {
                    format!("t{g}x{}", rng.gen_range(0..30))
                } else {
                    format!("common{}", rng.gen_range(0..80))
                }
            })
            .collect();
        docs.push(Document {
            id: format!("doc{i:02}"),
            language: "en".into(),
            doc_type: "Decision".into(),
            text: words.join(" "),
            gold_descriptors: gold.into_iter().map(|g| DescriptorId::new(format!("G{g}"))).collect(),
        });
    }
    Corpus::new(docs).unwrap()
}

#[test]
fn trained_lists_satisfy_their_invariants() {
    for seed in 0..8 {
        let corpus = fixture_training_corpus(seed);
        let params = TrainingParams {
            min_chars_per_text: 500,
            ..Default::default()
        };
        let config = TrainingConfig {
            params: params.clone(),
            preprocess: PreprocessConfig::plain(),
        };
        let model = train(&corpus, &config).unwrap();
        assert!(!model.is_empty(), "seed {seed} trained nothing");
        for list in model.associate_lists.values() {
            assert!(list.len() >= params.min_associates_per_descriptor);
            for pair in list.entries.windows(2) {
                assert!(
                    pair[0].weight > pair[1].weight
                        || (pair[0].weight == pair[1].weight && pair[0].lemma < pair[1].lemma)
                );
            }
            for e in &list.entries {
                assert!(e.weight > 0.0);
                assert!(e.supporting_text_count >= params.min_texts_per_lemma);
            }
        }
        let stats = &model.reference_stats;
        assert_eq!(stats.total_lemma_count, stats.lemma_counts.values().sum::<u64>());
        assert_eq!(stats.avg_doc_length, stats.total_lemma_count as f64 / stats.doc_count as f64);
        assert_eq!(train(&corpus, &config).unwrap(), model);
    }
}

#[test]
fn single_thread_pool_trains_the_same_model() {
    let data = synthetic::separable(&SeparableSpec {
        descriptors: 6,
        train_docs_per_descriptor: 12,
        ..Default::default()
    });
    let config = TrainingConfig {
        params: TrainingParams::default(),
        preprocess: PreprocessConfig::plain(),
    };
    let default_pool = train(&data.train, &config).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let sequential = single.install(|| train(&data.train, &config).unwrap());
    assert_eq!(default_pool, sequential);
}
