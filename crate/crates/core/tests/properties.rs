//! Property tests for the library-wide invariants.

mod common;

use proptest::prelude::*;

use common::{random_corpus, with_noisy_pred_layer};
use queryseg::agreement::cohen_kappa;
use queryseg::corpus::{parse_conll, serialize_conll};
use queryseg::eval::{
    extract_mentions, repair_conlleval, score, validate_bio, RepairPolicy,
};
use queryseg::ontology::{Label, TagOntology};
use queryseg::retrieval::{index_products, tokenize, DEFAULT_TOP_N};

const TYPES: [&str; 5] = ["color", "shape", "material", "UoM", "core_product_type"];

/// Strategy for an arbitrary (possibly invalid) label over a tiny ontology.
fn any_label() -> impl Strategy<Value = Label> {
    prop_oneof![
        Just(Label::Outside),
        prop::sample::select(&TYPES[..]).prop_map(Label::begin),
        prop::sample::select(&TYPES[..]).prop_map(Label::inside),
    ]
}

fn any_labels() -> impl Strategy<Value = Vec<Label>> {
    prop::collection::vec(any_label(), 0..24)
}

proptest! {
    #[test]
    fn repair_is_idempotent_and_validates(labels in any_labels()) {
        let once = repair_conlleval(&labels);
        prop_assert!(validate_bio(&once).is_empty());
        prop_assert_eq!(repair_conlleval(&once), once.clone());
        // Valid inputs are untouched.
        if validate_bio(&labels).is_empty() {
            prop_assert_eq!(once, labels);
        }
    }

    #[test]
    fn extracted_mentions_never_overlap(labels in any_labels()) {
        let mentions = extract_mentions(&labels, RepairPolicy::Conlleval).unwrap();
        let mut covered = 0usize;
        let mut prev_end = 0usize;
        for m in &mentions {
            prop_assert!(m.start < m.end);
            prop_assert!(m.start >= prev_end, "overlapping mentions");
            prev_end = m.end;
            covered += m.end - m.start;
        }
        prop_assert!(covered <= labels.len());
        prop_assert!(prev_end <= labels.len());
    }

    #[test]
    fn every_validated_label_serializes_canonically(labels in any_labels()) {
        for label in &labels {
            let as_text = label.to_string();
            prop_assert!(as_text == "O" || as_text.starts_with("B-") || as_text.starts_with("I-"));
            prop_assert_eq!(&as_text.parse::<Label>().unwrap(), label);
        }
    }

    #[test]
    fn cohen_kappa_is_at_most_one(
        pairs in prop::collection::vec((0..4u8, 0..4u8), 1..60)
    ) {
        let a: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let kappa = cohen_kappa(&a, &b).unwrap();
        prop_assert!(kappa <= 1.0 + 1e-12);
        if a == b {
            prop_assert!((kappa - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conjunctive_recall_is_monotone_under_token_removal(
        titles in prop::collection::vec("[a-e]{1,3}( [a-e]{1,3}){0,4}", 1..20),
        query in prop::collection::vec("[a-e]{1,3}", 1..6),
        drop_index in any::<prop::sample::Index>(),
    ) {
        let index = index_products(
            titles.iter().enumerate().map(|(i, t)| (i.to_string(), t.clone())),
        ).unwrap();
        let full = index.search(&query, DEFAULT_TOP_N).unwrap();
        if query.len() > 1 {
            let mut reduced = query.clone();
            reduced.remove(drop_index.index(reduced.len()));
            let relaxed = index.search(&reduced, DEFAULT_TOP_N).unwrap();
            prop_assert!(relaxed.recall >= full.recall);
            prop_assert!((1.0..=5.0).contains(&relaxed.relevance));
        }
        prop_assert!((1.0..=5.0).contains(&full.relevance));
    }
}

#[test]
fn round_trip_identity_on_generated_corpora() {
    let ontology = TagOntology::default();
    for seed in 0..200 {
        let corpus = random_corpus(seed, 8, 7, &TYPES);
        let serialized = serialize_conll(&corpus, "gold").unwrap();
        let reparsed = parse_conll(&serialized, &ontology, "gold").unwrap();
        assert_eq!(corpus.len(), reparsed.len());
        for (a, b) in corpus.queries().iter().zip(reparsed.queries()) {
            assert_eq!(a.id(), b.id());
            assert_eq!(
                a.tokens().iter().map(|t| &t.text).collect::<Vec<_>>(),
                b.tokens().iter().map(|t| &t.text).collect::<Vec<_>>()
            );
            assert_eq!(a.layer("gold"), b.layer("gold"));
        }
    }
}

#[test]
fn self_score_is_always_perfect() {
    for seed in 0..100 {
        let corpus = random_corpus(seed, 5, 6, &TYPES);
        let report = score(&corpus, "gold", &corpus, "gold", RepairPolicy::Conlleval).unwrap();
        assert_eq!(report.micro.precision, 100.0);
        assert_eq!(report.micro.recall, 100.0);
        assert_eq!(report.micro.f1, 100.0);
        assert_eq!(report.token_accuracy, 100.0);
    }
}

#[test]
fn micro_f1_is_invariant_under_query_reordering() {
    let corpus = with_noisy_pred_layer(&random_corpus(3, 12, 6, &TYPES), 4, 0.3, &TYPES);
    let forward = score(&corpus, "pred", &corpus, "gold", RepairPolicy::Conlleval).unwrap();

    let mut reversed_queries: Vec<_> = corpus.queries().to_vec();
    reversed_queries.reverse();
    let reversed = queryseg::corpus::Corpus::new("fuzz", reversed_queries).unwrap();
    let backward = score(&reversed, "pred", &corpus, "gold", RepairPolicy::Conlleval).unwrap();
    assert_eq!(forward, backward);
}

#[test]
fn search_tokenization_is_shared_between_titles_and_queries() {
    let index = index_products([("1".to_owned(), "Red SHOE".to_owned())]).unwrap();
    let outcome = index.search(&tokenize("red shoe"), DEFAULT_TOP_N).unwrap();
    assert_eq!(outcome.recall, 1);
    assert_eq!(outcome.relevance, 5.0);
}
