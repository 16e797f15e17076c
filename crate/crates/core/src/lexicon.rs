//! Mention lexicons: type-indexed pools of observed entity spans plus an
//! anchor-conditioned co-occurrence index, built from tagged corpora and
//! consumed by the augmentation transforms.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::eval::{extract_mentions, RepairPolicy};
use crate::ontology::{CORE_PRODUCT_TYPE, CREATOR_TYPE};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("no mentions of type {ty:?} available{}", .anchor.as_ref().map(|a| format!(" for anchor {}/{}", a.anchor_type, a.text)).unwrap_or_default())]
    EmptyPool { ty: String, anchor: Option<AnchorKey> },
    #[error("malformed lexicon line {0}")]
    MalformedRecord(usize),
}

/// A co-occurrence anchor: a core product type or creator mention, keyed by
/// lowercased mention text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnchorKey {
    pub anchor_type: String,
    pub text: String,
}

impl AnchorKey {
    pub fn new(anchor_type: impl Into<String>, text: &str) -> Self {
        AnchorKey {
            anchor_type: anchor_type.into(),
            text: text.to_lowercase(),
        }
    }
}

/// A multiset of mention token sequences. Draws are frequency-weighted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pool {
    counts: BTreeMap<Vec<String>, u64>,
    total: u64,
}

impl Pool {
    fn add(&mut self, mention: Vec<String>, count: u64) {
        *self.counts.entry(mention).or_insert(0) += count;
        self.total += count;
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Total multiplicity across all mentions.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn contains(&self, mention: &[String]) -> bool {
        self.counts.contains_key(mention)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, u64)> {
        self.counts.iter().map(|(m, &c)| (m, c))
    }

    /// True if the pool holds any value other than `mention`.
    pub fn has_alternative(&self, mention: &[String]) -> bool {
        self.counts.keys().any(|m| m.as_slice() != mention)
    }

    /// Frequency-weighted uniform draw; `None` on an empty pool.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Vec<String>> {
        if self.total == 0 {
            return None;
        }
        let mut draw = rng.random_range(0..self.total);
        for (mention, count) in &self.counts {
            if draw < *count {
                return Some(mention);
            }
            draw -= count;
        }
        unreachable!("draw is below the total multiplicity")
    }

    /// Frequency-weighted draw among values other than `exclude`. Falls back
    /// to `exclude` when it is the only value in the pool.
    pub fn sample_excluding<R: Rng + ?Sized>(
        &self,
        exclude: &[String],
        rng: &mut R,
    ) -> Option<&Vec<String>> {
        let excluded = self.counts.get(exclude).copied().unwrap_or(0);
        let rest = self.total - excluded;
        if rest == 0 {
            return self.counts.get_key_value(exclude).map(|(m, _)| m);
        }
        let mut draw = rng.random_range(0..rest);
        for (mention, count) in &self.counts {
            if mention.as_slice() == exclude {
                continue;
            }
            if draw < *count {
                return Some(mention);
            }
            draw -= count;
        }
        unreachable!("draw is below the remaining multiplicity")
    }
}

/// Type-indexed mention pools plus the anchor-conditioned co-occurrence
/// index. Immutable once built; safe to share across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionLexicon {
    by_type: BTreeMap<String, Pool>,
    cooccur: BTreeMap<AnchorKey, BTreeMap<String, Pool>>,
}

impl MentionLexicon {
    pub fn pool(&self, ty: &str) -> Option<&Pool> {
        self.by_type.get(ty)
    }

    pub fn anchored_pool(&self, anchor: &AnchorKey, ty: &str) -> Option<&Pool> {
        self.cooccur.get(anchor).and_then(|pools| pools.get(ty))
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.by_type.keys().map(String::as_str)
    }

    pub fn anchors(&self) -> impl Iterator<Item = &AnchorKey> {
        self.cooccur.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.by_type.is_empty()
    }

    /// Serializes the lexicon as JSON lines, one record per distinct mention
    /// per pool.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (ty, pool) in &self.by_type {
            for (mention, count) in pool.iter() {
                let record = LexiconRecord::Type {
                    ty: ty.clone(),
                    mention: mention.clone(),
                    count,
                };
                out.push_str(&serde_json::to_string(&record).expect("lexicon records serialize"));
                out.push('\n');
            }
        }
        for (anchor, pools) in &self.cooccur {
            for (ty, pool) in pools {
                for (mention, count) in pool.iter() {
                    let record = LexiconRecord::Cooccur {
                        anchor_type: anchor.anchor_type.clone(),
                        anchor: anchor.text.clone(),
                        ty: ty.clone(),
                        mention: mention.clone(),
                        count,
                    };
                    out.push_str(
                        &serde_json::to_string(&record).expect("lexicon records serialize"),
                    );
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon = MentionLexicon::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: LexiconRecord =
                serde_json::from_str(line).map_err(|_| LexiconError::MalformedRecord(idx + 1))?;
            match record {
                LexiconRecord::Type { ty, mention, count } => {
                    lexicon.by_type.entry(ty).or_default().add(mention, count);
                }
                LexiconRecord::Cooccur {
                    anchor_type,
                    anchor,
                    ty,
                    mention,
                    count,
                } => {
                    lexicon
                        .cooccur
                        .entry(AnchorKey {
                            anchor_type,
                            text: anchor,
                        })
                        .or_default()
                        .entry(ty)
                        .or_default()
                        .add(mention, count);
                }
            }
        }
        Ok(lexicon)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LexiconRecord {
    Type {
        #[serde(rename = "type")]
        ty: String,
        mention: Vec<String>,
        count: u64,
    },
    Cooccur {
        anchor_type: String,
        anchor: String,
        #[serde(rename = "type")]
        ty: String,
        mention: Vec<String>,
        count: u64,
    },
}

/// Builds a lexicon from one layer of a corpus.
///
/// Every extracted mention lands in its type pool, except color mentions
/// longer than `max_color_tokens` (likely mislabeled spans). Within a query,
/// each core product type or creator mention becomes an anchor accumulating
/// the query's other mentions by type; an anchor never accumulates mentions
/// of its own type with its own text.
pub fn build_lexicon(
    corpus: &Corpus,
    layer: &str,
    max_color_tokens: usize,
) -> Result<MentionLexicon, LexiconError> {
    let mut lexicon = MentionLexicon::default();
    for query in corpus.queries() {
        let labels = query.require_layer(layer)?;
        let mentions = extract_mentions(labels, RepairPolicy::Conlleval)
            .expect("conlleval repair always yields a valid sequence");
        let kept: Vec<(String, Vec<String>)> = mentions
            .iter()
            .filter(|m| !(m.ty == "color" && m.len() > max_color_tokens))
            .map(|m| {
                let texts: Vec<String> =
                    m.texts(query.tokens()).into_iter().map(str::to_owned).collect();
                (m.ty.clone(), texts)
            })
            .collect();

        for (ty, texts) in &kept {
            lexicon
                .by_type
                .entry(ty.clone())
                .or_default()
                .add(texts.clone(), 1);
        }

        for (anchor_ty, anchor_texts) in &kept {
            if anchor_ty != CORE_PRODUCT_TYPE && anchor_ty != CREATOR_TYPE {
                continue;
            }
            let anchor = AnchorKey::new(anchor_ty.clone(), &anchor_texts.join(" "));
            for (ty, texts) in &kept {
                if ty == anchor_ty && texts.join(" ").to_lowercase() == anchor.text {
                    continue;
                }
                lexicon
                    .cooccur
                    .entry(anchor.clone())
                    .or_default()
                    .entry(ty.clone())
                    .or_default()
                    .add(texts.clone(), 1);
            }
        }
    }
    Ok(lexicon)
}

/// Draws a mention of the requested type, uniformly over multiset
/// multiplicity, from the anchored pool when an anchor is given and from the
/// global type pool otherwise.
pub fn sample_mention<'a, R: Rng + ?Sized>(
    lexicon: &'a MentionLexicon,
    ty: &str,
    anchor: Option<&AnchorKey>,
    rng: &mut R,
) -> Result<&'a Vec<String>, LexiconError> {
    let pool = match anchor {
        Some(anchor) => lexicon.anchored_pool(anchor, ty),
        None => lexicon.pool(ty),
    };
    pool.and_then(|p| p.sample(rng))
        .ok_or_else(|| LexiconError::EmptyPool {
            ty: ty.to_owned(),
            anchor: anchor.cloned(),
        })
}
