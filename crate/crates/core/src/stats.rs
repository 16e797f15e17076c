//! Corpus statistics: split counts, type histogram, query/entity length
//! distributions and averages.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::eval::{extract_mentions, InvalidSequence, RepairPolicy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("query {query_id:?}: {source}")]
    InvalidSequence {
        query_id: String,
        source: InvalidSequence,
    },
}

fn round2<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_f64((value * 100.0).round() / 100.0)
}

/// Aggregate counts and length distributions for one layer of a corpus.
/// Means are kept at full precision and rounded to two decimals only in the
/// JSON serialization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_queries: u64,
    pub n_entities: u64,
    pub n_tokens: u64,
    pub type_counts: BTreeMap<String, u64>,
    pub query_length_hist: BTreeMap<usize, u64>,
    pub entity_length_hist: BTreeMap<usize, u64>,
    #[serde(serialize_with = "round2")]
    pub mean_query_len: f64,
    #[serde(serialize_with = "round2")]
    pub mean_entity_len: f64,
}

impl CorpusStats {
    fn empty() -> Self {
        CorpusStats {
            n_queries: 0,
            n_entities: 0,
            n_tokens: 0,
            type_counts: BTreeMap::new(),
            query_length_hist: BTreeMap::new(),
            entity_length_hist: BTreeMap::new(),
            mean_query_len: 0.0,
            mean_entity_len: 0.0,
        }
    }

    fn finish_means(&mut self) {
        self.mean_query_len = if self.n_queries > 0 {
            self.n_tokens as f64 / self.n_queries as f64
        } else {
            0.0
        };
        let entity_tokens: u64 = self
            .entity_length_hist
            .iter()
            .map(|(len, count)| *len as u64 * count)
            .sum();
        self.mean_entity_len = if self.n_entities > 0 {
            entity_tokens as f64 / self.n_entities as f64
        } else {
            0.0
        };
    }
}

/// Counts queries, tokens and entities (via mention extraction under the
/// given repair policy) and builds the length histograms.
pub fn corpus_stats(
    corpus: &Corpus,
    layer: &str,
    repair: RepairPolicy,
) -> Result<CorpusStats, StatsError> {
    let mut stats = CorpusStats::empty();
    for query in corpus.queries() {
        let labels = query.require_layer(layer)?;
        let mentions =
            extract_mentions(labels, repair).map_err(|source| StatsError::InvalidSequence {
                query_id: query.id().to_owned(),
                source,
            })?;
        stats.n_queries += 1;
        stats.n_tokens += query.len() as u64;
        *stats.query_length_hist.entry(query.len()).or_insert(0) += 1;
        for mention in mentions {
            stats.n_entities += 1;
            *stats.type_counts.entry(mention.ty).or_insert(0) += 1;
            *stats.entity_length_hist.entry(mention.end - mention.start).or_insert(0) += 1;
        }
    }
    stats.finish_means();
    Ok(stats)
}

/// Sums several per-split statistics into a combined view.
pub fn combine_stats<'a, I>(parts: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a CorpusStats>,
{
    let mut total = CorpusStats::empty();
    for part in parts {
        total.n_queries += part.n_queries;
        total.n_entities += part.n_entities;
        total.n_tokens += part.n_tokens;
        for (ty, count) in &part.type_counts {
            *total.type_counts.entry(ty.clone()).or_insert(0) += count;
        }
        for (len, count) in &part.query_length_hist {
            *total.query_length_hist.entry(*len).or_insert(0) += count;
        }
        for (len, count) in &part.entity_length_hist {
            *total.entity_length_hist.entry(*len).or_insert(0) += count;
        }
    }
    total.finish_means();
    total
}

/// Which length histogram to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistKind {
    QueryLen,
    EntityLen,
}

/// Renders one histogram as CSV (`length,count`), lengths ascending. Counts
/// are raw; log scaling is the plotter's job.
pub fn emit_hist(stats: &CorpusStats, which: HistKind) -> String {
    let hist = match which {
        HistKind::QueryLen => &stats.query_length_hist,
        HistKind::EntityLen => &stats.entity_length_hist,
    };
    let mut out = String::from("length,count\n");
    for (len, count) in hist {
        out.push_str(&format!("{len},{count}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conll;
    use crate::ontology::TagOntology;

    fn stats_of(text: &str) -> CorpusStats {
        let corpus = parse_conll(text, &TagOntology::default(), "gold").unwrap();
        corpus_stats(&corpus, "gold", RepairPolicy::Conlleval).unwrap()
    }

    #[test]
    fn single_query_single_mention() {
        let stats = stats_of("made B-material\nof I-material\n\n");
        assert_eq!(stats.n_queries, 1);
        assert_eq!(stats.n_entities, 1);
        assert_eq!(stats.n_tokens, 2);
        assert_eq!(stats.mean_entity_len, 2.0);
        assert_eq!(stats.mean_query_len, 2.0);
        assert_eq!(stats.type_counts["material"], 1);
        assert_eq!(stats.entity_length_hist[&2], 1);
    }

    #[test]
    fn invariants_hold_on_a_mixed_corpus() {
        let text = "red B-color\nvelvet B-material\nsofa B-core_product_type\n\nblue B-color\nhat B-core_product_type\nfor O\nher B-department\n\n";
        let stats = stats_of(text);
        assert_eq!(stats.type_counts.values().sum::<u64>(), stats.n_entities);
        let token_sum: u64 = stats
            .query_length_hist
            .iter()
            .map(|(len, count)| *len as u64 * count)
            .sum();
        assert_eq!(token_sum, stats.n_tokens);
        assert_eq!(stats.n_queries, 2);
        assert_eq!(stats.n_tokens, 7);
        assert_eq!(stats.mean_query_len, 3.5);
    }

    #[test]
    fn stats_are_invariant_under_query_reordering() {
        let a = stats_of("x B-color\n\ny B-shape\nz I-shape\n\n");
        let b = stats_of("y B-shape\nz I-shape\n\nx B-color\n\n");
        assert_eq!(a, b);
    }

    #[test]
    fn repair_policy_changes_entity_counts() {
        // An orphaned I- becomes its own mention under conlleval repair.
        let text = "x O\ny I-color\n\n";
        let stats = stats_of(text);
        assert_eq!(stats.n_entities, 1);
        let corpus = parse_conll(text, &TagOntology::default(), "gold").unwrap();
        assert!(matches!(
            corpus_stats(&corpus, "gold", RepairPolicy::None),
            Err(StatsError::InvalidSequence { .. })
        ));
    }

    #[test]
    fn combine_sums_and_recomputes_means() {
        let a = stats_of("x B-color\n\n");
        let b = stats_of("y B-shape\nz I-shape\nw O\n\n");
        let combined = combine_stats([&a, &b]);
        assert_eq!(combined.n_queries, 2);
        assert_eq!(combined.n_tokens, 4);
        assert_eq!(combined.n_entities, 2);
        assert_eq!(combined.mean_query_len, 2.0);
        assert_eq!(combined.mean_entity_len, 1.5);
    }

    #[test]
    fn histogram_csv_is_sorted_with_header() {
        let stats = stats_of("a O\n\nb O\nc O\nd O\n\ne O\n\n");
        let csv = emit_hist(&stats, HistKind::QueryLen);
        assert_eq!(csv, "length,count\n1,2\n3,1\n");
        // No entities: header-only entity histogram.
        assert_eq!(emit_hist(&stats, HistKind::EntityLen), "length,count\n");
    }

    #[test]
    fn missing_layer_is_reported() {
        let corpus = parse_conll("a O\n\n", &TagOntology::default(), "gold").unwrap();
        assert!(matches!(
            corpus_stats(&corpus, "pred", RepairPolicy::Conlleval),
            Err(StatsError::Corpus(CorpusError::MissingLayer { .. }))
        ));
    }

    #[test]
    fn means_serialize_rounded() {
        let stats = stats_of("a O\nb O\nc O\n\nd O\n\nx B-color\n\n");
        let json: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&stats).unwrap()).unwrap();
        // 5 tokens / 3 queries = 1.666... -> 1.67
        assert_eq!(json["mean_query_len"], 1.67);
    }
}
