//! Majority adjudication of multi-annotator corpora and core-product QC.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AgreementError;
use crate::corpus::{Corpus, TaggedQuery};
use crate::eval::{extract_mentions, Mention, RepairPolicy};
use crate::ontology::{Label, CORE_PRODUCT_TYPE};

/// A span some annotator proposed that did not make it into gold unchanged:
/// either only one annotator proposed it, or a majority span lost overlap
/// resolution. Proposals list every (layer, type) vote on the exact span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub query_id: String,
    pub start: usize,
    pub end: usize,
    pub proposals: Vec<ConflictProposal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictProposal {
    pub layer: String,
    #[serde(rename = "type")]
    pub ty: String,
}

/// Quality-control flag for a query's core product mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QcFlag {
    NoCoreProduct,
    MultipleCoreProducts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QcRecord {
    pub query_id: String,
    pub flag: QcFlag,
}

/// Result of majority adjudication: the merged gold corpus, the spans that
/// need human review, and core-product QC flags over the gold layer.
#[derive(Debug, Clone, Serialize)]
pub struct AdjudicationResult {
    pub gold: Corpus,
    pub conflicts: Vec<Conflict>,
    pub qc_flags: Vec<QcRecord>,
}

impl AdjudicationResult {
    /// Conflicts as CSV for human review, one row per disputed span with all
    /// proposed types joined by `|` in annotator order.
    pub fn conflicts_csv(&self) -> String {
        let mut out = String::from("query_id,start,end,types\n");
        for conflict in &self.conflicts {
            let types: Vec<&str> = conflict.proposals.iter().map(|p| p.ty.as_str()).collect();
            out.push_str(&format!(
                "{},{},{},{}\n",
                conflict.query_id,
                conflict.start,
                conflict.end,
                types.join("|")
            ));
        }
        out
    }
}

/// Renders non-overlapping mentions back to a valid BIO sequence.
fn render_bio(mentions: &[Mention], len: usize) -> Vec<Label> {
    let mut labels = vec![Label::Outside; len];
    for mention in mentions {
        labels[mention.start] = Label::begin(&mention.ty);
        for label in labels.iter_mut().take(mention.end).skip(mention.start + 1) {
            *label = Label::inside(&mention.ty);
        }
    }
    labels
}

/// Merges exactly three annotation layers into a gold standard.
///
/// A mention enters gold iff at least two layers contain the identical
/// (start, end, type). Overlapping majority spans are resolved
/// deterministically by higher vote count, then longer span, then earlier
/// start; losers are recorded as conflicts, as is every span proposed by a
/// single annotator.
pub fn adjudicate_majority(
    corpus: &Corpus,
    layers: &[String],
) -> Result<AdjudicationResult, AgreementError> {
    if layers.len() != 3 {
        return Err(AgreementError::LayerCountMismatch(layers.len()));
    }

    let mut gold_queries = Vec::with_capacity(corpus.len());
    let mut conflicts = Vec::new();
    let mut qc_flags = Vec::new();

    for query in corpus.queries() {
        // (start, end, type) -> proposing layer indices, in layer order.
        let mut votes: BTreeMap<(usize, usize, String), Vec<usize>> = BTreeMap::new();
        for (layer_idx, layer) in layers.iter().enumerate() {
            let labels = query.require_layer(layer)?;
            let mentions = extract_mentions(labels, RepairPolicy::Conlleval)
                .expect("conlleval repair always yields a valid sequence");
            for m in mentions {
                votes
                    .entry((m.start, m.end, m.ty))
                    .or_default()
                    .push(layer_idx);
            }
        }

        let mut candidates: Vec<(&(usize, usize, String), usize)> = votes
            .iter()
            .filter(|(_, layers)| layers.len() >= 2)
            .map(|(key, layers)| (key, layers.len()))
            .collect();
        candidates.sort_by(|a, b| {
            b.1.cmp(&a.1) // more votes first
                .then_with(|| (b.0 .1 - b.0 .0).cmp(&(a.0 .1 - a.0 .0))) // longer first
                .then_with(|| a.0 .0.cmp(&b.0 .0)) // earlier first
                .then_with(|| a.0 .2.cmp(&b.0 .2))
        });

        let mut accepted: Vec<Mention> = Vec::new();
        let mut rejected_spans: Vec<(usize, usize)> = Vec::new();
        for ((start, end, ty), _) in candidates {
            let overlaps = accepted
                .iter()
                .any(|m| *start < m.end && m.start < *end);
            if overlaps {
                rejected_spans.push((*start, *end));
            } else {
                accepted.push(Mention::new(*start, *end, ty.clone()));
            }
        }
        accepted.sort();

        // Conflicts: single-annotator proposals plus overlap losers, grouped
        // by span with every proposal on that span for context.
        let mut conflict_spans: Vec<(usize, usize)> = votes
            .iter()
            .filter(|(_, layers)| layers.len() == 1)
            .map(|((start, end, _), _)| (*start, *end))
            .chain(rejected_spans)
            .collect();
        conflict_spans.sort_unstable();
        conflict_spans.dedup();
        for (start, end) in conflict_spans {
            let mut proposals = Vec::new();
            for ((s, e, ty), layer_idxs) in &votes {
                if (*s, *e) == (start, end) {
                    for &layer_idx in layer_idxs {
                        proposals.push((layer_idx, ty.clone()));
                    }
                }
            }
            proposals.sort();
            conflicts.push(Conflict {
                query_id: query.id().to_owned(),
                start,
                end,
                proposals: proposals
                    .into_iter()
                    .map(|(layer_idx, ty)| ConflictProposal {
                        layer: layers[layer_idx].clone(),
                        ty,
                    })
                    .collect(),
            });
        }

        qc_flags.extend(flags_for(query.id(), &accepted));

        let labels = render_bio(&accepted, query.len());
        gold_queries.push(TaggedQuery::new(
            query.id(),
            query.tokens().to_vec(),
            "gold",
            labels,
        )?);
    }

    Ok(AdjudicationResult {
        gold: Corpus::new(corpus.split.clone(), gold_queries)?,
        conflicts,
        qc_flags,
    })
}

fn flags_for(query_id: &str, mentions: &[Mention]) -> Option<QcRecord> {
    let cores = mentions.iter().filter(|m| m.ty == CORE_PRODUCT_TYPE).count();
    let flag = match cores {
        0 => QcFlag::NoCoreProduct,
        1 => return None,
        _ => QcFlag::MultipleCoreProducts,
    };
    Some(QcRecord {
        query_id: query_id.to_owned(),
        flag,
    })
}

/// Flags queries with zero or multiple core product mentions in one layer.
pub fn qc_core_product(corpus: &Corpus, layer: &str) -> Result<Vec<QcRecord>, AgreementError> {
    let mut flags = Vec::new();
    for query in corpus.queries() {
        let labels = query.require_layer(layer)?;
        let mentions = extract_mentions(labels, RepairPolicy::Conlleval)
            .expect("conlleval repair always yields a valid sequence");
        flags.extend(flags_for(query.id(), &mentions));
    }
    Ok(flags)
}
