//! Query relaxation for null and low recall recovery: random token dropping
//! and entity dropping with core-product preservation.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, TaggedQuery, Token};
use crate::eval::{extract_mentions, repair_conlleval, Mention, RepairPolicy};
use crate::ontology::{Label, CORE_PRODUCT_TYPE};
use crate::rng::derive_rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelaxError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("query has {len} tokens, cannot drop {k}")]
    TooShort { len: usize, k: usize },
    #[error("no droppable entity (none present, all core product, or the query would be emptied)")]
    NoDroppableEntity,
    #[error("at least one strategy is required")]
    NoStrategies,
    #[error("token drop count must be at least 1")]
    ZeroDrop,
}

/// A relaxation strategy. Token dropping removes `k` random tokens; entity
/// dropping removes one random non-core mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    TokenDrop { k: usize },
    EntityDropKeepCore,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::TokenDrop { .. } => "token_drop_k",
            Strategy::EntityDropKeepCore => "entity_drop_keep_core",
        }
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// What a variant removed from its original.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Dropped {
    Tokens(Vec<usize>),
    Entity(Mention),
}

/// One relaxed variant of a query: the surviving tokens with labels repaired
/// back to valid BIO.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxationVariant {
    pub original_id: String,
    pub strategy: Strategy,
    pub dropped: Dropped,
    pub tokens: Vec<Token>,
    pub labels: Vec<Label>,
}

impl RelaxationVariant {
    /// Surviving token texts joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// CoNLL lines (`token label`) for the variant.
    pub fn conll_lines(&self) -> Vec<String> {
        self.tokens
            .iter()
            .zip(&self.labels)
            .map(|(t, l)| format!("{} {}", t.text, l))
            .collect()
    }
}

impl Serialize for RelaxationVariant {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut state = serializer.serialize_struct("RelaxationVariant", 5)?;
        state.serialize_field("original_id", &self.original_id)?;
        state.serialize_field("strategy", &self.strategy)?;
        state.serialize_field("dropped", &self.dropped)?;
        state.serialize_field("query_text", &self.text())?;
        state.serialize_field("conll_lines", &self.conll_lines())?;
        state.end()
    }
}

fn keep_positions(
    query: &TaggedQuery,
    labels: &[Label],
    keep: impl Fn(usize) -> bool,
) -> (Vec<Token>, Vec<Label>) {
    let mut tokens = Vec::new();
    let mut kept_labels = Vec::new();
    for (i, (token, label)) in query.tokens().iter().zip(labels).enumerate() {
        if keep(i) {
            tokens.push(token.clone());
            kept_labels.push(label.clone());
        }
    }
    let repaired = repair_conlleval(&kept_labels);
    (tokens, repaired)
}

/// Removes `k` distinct uniformly chosen token positions. Surviving labels
/// are repaired, so an orphaned `I-X` becomes `B-X`. Requires the query to
/// be strictly longer than `k`.
pub fn token_drop<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    k: usize,
    rng: &mut R,
) -> Result<RelaxationVariant, RelaxError> {
    if k == 0 {
        return Err(RelaxError::ZeroDrop);
    }
    if query.len() <= k {
        return Err(RelaxError::TooShort {
            len: query.len(),
            k,
        });
    }
    let labels = query.require_layer(layer)?;
    let mut positions = sample(rng, query.len(), k).into_vec();
    positions.sort_unstable();
    let (tokens, kept_labels) = keep_positions(query, labels, |i| !positions.contains(&i));
    Ok(RelaxationVariant {
        original_id: query.id().to_owned(),
        strategy: Strategy::TokenDrop { k },
        dropped: Dropped::Tokens(positions),
        tokens,
        labels: kept_labels,
    })
}

/// Removes one uniformly chosen mention whose type is not
/// `core_product_type`. Core product tokens always survive, outside tokens
/// are untouched, and a candidate whose removal would empty the query is not
/// droppable.
pub fn entity_drop_keep_core<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
) -> Result<RelaxationVariant, RelaxError> {
    let labels = query.require_layer(layer)?;
    let mentions = extract_mentions(labels, RepairPolicy::Conlleval)
        .expect("conlleval repair always yields a valid sequence");
    let candidates: Vec<&Mention> = mentions
        .iter()
        .filter(|m| m.ty != CORE_PRODUCT_TYPE && m.len() < query.len())
        .collect();
    if candidates.is_empty() {
        return Err(RelaxError::NoDroppableEntity);
    }
    let victim = candidates[rng.random_range(0..candidates.len())].clone();
    let (tokens, kept_labels) =
        keep_positions(query, labels, |i| !(victim.start..victim.end).contains(&i));
    Ok(RelaxationVariant {
        original_id: query.id().to_owned(),
        strategy: Strategy::EntityDropKeepCore,
        dropped: Dropped::Entity(victim),
        tokens,
        labels: kept_labels,
    })
}

/// A query skipped by [`generate_variants`] because a strategy's
/// precondition did not hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedQuery {
    pub query_id: String,
    pub strategy: &'static str,
    pub reason: String,
}

/// Generates one variant per (query, strategy) pair where the preconditions
/// hold; the rest are skipped and logged. Per-query RNG streams are derived
/// from `(seed, strategy, query id)`, so the output is independent of query
/// order and of the other strategies requested.
pub fn generate_variants(
    corpus: &Corpus,
    layer: &str,
    strategies: &[Strategy],
    seed: u64,
) -> Result<(Vec<RelaxationVariant>, Vec<SkippedQuery>), RelaxError> {
    if strategies.is_empty() {
        return Err(RelaxError::NoStrategies);
    }
    let mut variants = Vec::new();
    let mut skipped = Vec::new();
    for strategy in strategies {
        for query in corpus.queries() {
            let mut rng = derive_rng(seed, &[strategy.name(), query.id()]);
            let result = match strategy {
                Strategy::TokenDrop { k } => token_drop(query, layer, *k, &mut rng),
                Strategy::EntityDropKeepCore => entity_drop_keep_core(query, layer, &mut rng),
            };
            match result {
                Ok(variant) => variants.push(variant),
                Err(err @ (RelaxError::TooShort { .. } | RelaxError::NoDroppableEntity)) => {
                    skipped.push(SkippedQuery {
                        query_id: query.id().to_owned(),
                        strategy: strategy.name(),
                        reason: err.to_string(),
                    });
                }
                Err(err) => return Err(err),
            }
        }
    }
    Ok((variants, skipped))
}
