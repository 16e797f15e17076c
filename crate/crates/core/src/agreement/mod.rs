//! Inter-annotator agreement: Fleiss and pairwise Cohen kappa at token and
//! entity granularity, plus majority adjudication and core-product QC flags.

mod adjudicate;

pub use adjudicate::{
    adjudicate_majority, qc_core_product, AdjudicationResult, Conflict, QcFlag, QcRecord,
};

use std::collections::BTreeMap;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::eval::{extract_mentions, RepairPolicy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgreementError {
    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input must not be empty")]
    EmptyInput,
    #[error("item {item} has {got} votes, expected {expected}")]
    RaterCountMismatch {
        item: usize,
        got: usize,
        expected: usize,
    },
    #[error("need at least two layers, got {0}")]
    LayerCountMismatch(usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Cohen's kappa between two raters: κ = (p_o − p_e)/(1 − p_e) with chance
/// agreement p_e from the product of the two raters' marginals. Degenerate
/// inputs where chance agreement is total (both raters constant on the same
/// category) return 1.0.
pub fn cohen_kappa<T: Eq + Hash>(items_a: &[T], items_b: &[T]) -> Result<f64, AgreementError> {
    if items_a.len() != items_b.len() {
        return Err(AgreementError::LengthMismatch(items_a.len(), items_b.len()));
    }
    if items_a.is_empty() {
        return Err(AgreementError::EmptyInput);
    }
    let n = items_a.len() as f64;
    let observed = items_a
        .iter()
        .zip(items_b)
        .filter(|(a, b)| a == b)
        .count() as f64
        / n;

    let mut marginals: std::collections::HashMap<&T, (f64, f64)> = std::collections::HashMap::new();
    for a in items_a {
        marginals.entry(a).or_default().0 += 1.0;
    }
    for b in items_b {
        marginals.entry(b).or_default().1 += 1.0;
    }
    let expected: f64 = marginals
        .values()
        .map(|(ca, cb)| (ca / n) * (cb / n))
        .sum();

    if (1.0 - expected).abs() < f64::EPSILON {
        return Ok(1.0);
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Fleiss' kappa from per-item category vote counts. Every item must carry
/// exactly `n_raters` votes. A single category used everywhere is perfect
/// agreement and returns 1.0.
pub fn fleiss_kappa(
    votes: &[BTreeMap<String, usize>],
    n_raters: usize,
) -> Result<f64, AgreementError> {
    if votes.is_empty() {
        return Err(AgreementError::EmptyInput);
    }
    for (item, counts) in votes.iter().enumerate() {
        let got: usize = counts.values().sum();
        if got != n_raters {
            return Err(AgreementError::RaterCountMismatch {
                item,
                got,
                expected: n_raters,
            });
        }
    }
    let n_items = votes.len() as f64;
    let n = n_raters as f64;

    // Per-item agreement P_i, averaged.
    let p_bar: f64 = votes
        .iter()
        .map(|counts| {
            let sum_sq: f64 = counts.values().map(|&c| (c * c) as f64).sum();
            (sum_sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / n_items;

    // Chance agreement from pooled category proportions.
    let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
    for counts in votes {
        for (category, &count) in counts {
            *totals.entry(category).or_default() += count as f64;
        }
    }
    let p_e: f64 = totals
        .values()
        .map(|c| (c / (n_items * n)).powi(2))
        .sum();

    if (1.0 - p_e).abs() < f64::EPSILON {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Which item universe an agreement report was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Token,
    Entity,
}

/// Category assignment for token-level agreement: the full BIO label string
/// (strictest reading, `B-color` ≠ `I-color`) or just the type name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenCategory {
    #[default]
    FullLabel,
    TypeOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohenPair {
    pub layer_a: String,
    pub layer_b: String,
    pub kappa: f64,
}

/// Fleiss kappa over all layers plus Cohen kappa per layer pair, over one
/// item universe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub granularity: Granularity,
    pub fleiss: f64,
    pub cohen_pairs: Vec<CohenPair>,
    pub item_count: usize,
}

impl AgreementReport {
    /// Pairwise kappa, symmetric in the two layer names.
    pub fn cohen(&self, layer_a: &str, layer_b: &str) -> Option<f64> {
        self.cohen_pairs
            .iter()
            .find(|p| {
                (p.layer_a == layer_a && p.layer_b == layer_b)
                    || (p.layer_a == layer_b && p.layer_b == layer_a)
            })
            .map(|p| p.kappa)
    }
}

/// Builds a report from per-item categories, one row per layer.
fn report_from_categories(
    granularity: Granularity,
    layers: &[String],
    categories: &[Vec<String>],
    item_count: usize,
) -> Result<AgreementReport, AgreementError> {
    if item_count == 0 {
        return Err(AgreementError::EmptyInput);
    }
    let votes: Vec<BTreeMap<String, usize>> = (0..item_count)
        .map(|item| {
            let mut counts = BTreeMap::new();
            for row in categories {
                *counts.entry(row[item].clone()).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let fleiss = fleiss_kappa(&votes, layers.len())?;

    let mut cohen_pairs = Vec::new();
    for a in 0..layers.len() {
        for b in a + 1..layers.len() {
            cohen_pairs.push(CohenPair {
                layer_a: layers[a].clone(),
                layer_b: layers[b].clone(),
                kappa: cohen_kappa(&categories[a], &categories[b])?,
            });
        }
    }
    Ok(AgreementReport {
        granularity,
        fleiss,
        cohen_pairs,
        item_count,
    })
}

fn check_layers(layers: &[String]) -> Result<(), AgreementError> {
    if layers.len() < 2 {
        return Err(AgreementError::LayerCountMismatch(layers.len()));
    }
    Ok(())
}

/// Token-level agreement: every token is an item, the category is its label.
pub fn token_agreement(
    corpus: &Corpus,
    layers: &[String],
    category: TokenCategory,
) -> Result<AgreementReport, AgreementError> {
    check_layers(layers)?;
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); layers.len()];
    for query in corpus.queries() {
        for (row, layer) in categories.iter_mut().zip(layers) {
            let labels = query.require_layer(layer)?;
            row.extend(labels.iter().map(|label| match category {
                TokenCategory::FullLabel => label.to_string(),
                TokenCategory::TypeOnly => label.ty().unwrap_or("O").to_owned(),
            }));
        }
    }
    let item_count = categories[0].len();
    report_from_categories(Granularity::Token, layers, &categories, item_count)
}

/// Entity-level agreement: the items are the distinct (query, start, end)
/// spans proposed by any layer; a layer's category is its mention type when
/// it proposed exactly that span, otherwise `NONE`.
pub fn entity_agreement(
    corpus: &Corpus,
    layers: &[String],
) -> Result<AgreementReport, AgreementError> {
    check_layers(layers)?;
    let none = "NONE".to_owned();
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); layers.len()];
    let mut item_count = 0usize;
    for query in corpus.queries() {
        // type proposed per layer, keyed by span
        let mut proposals: Vec<BTreeMap<(usize, usize), String>> = Vec::with_capacity(layers.len());
        for layer in layers {
            let labels = query.require_layer(layer)?;
            let mentions = extract_mentions(labels, RepairPolicy::Conlleval)
                .expect("conlleval repair always yields a valid sequence");
            proposals.push(
                mentions
                    .into_iter()
                    .map(|m| ((m.start, m.end), m.ty))
                    .collect(),
            );
        }
        let spans: std::collections::BTreeSet<(usize, usize)> = proposals
            .iter()
            .flat_map(|p| p.keys().copied())
            .collect();
        item_count += spans.len();
        for span in spans {
            for (row, proposal) in categories.iter_mut().zip(&proposals) {
                row.push(proposal.get(&span).cloned().unwrap_or_else(|| none.clone()));
            }
        }
    }
    report_from_categories(Granularity::Entity, layers, &categories, item_count)
}
