//! The five query transformations and their fixed-order composition, applied
//! deterministically under a seed.
//!
//! Transformed queries carry a single label layer. Character spans are
//! dropped from tokens a transform rewrites or moves, since they no longer
//! point into any raw query string.

mod keyboard;

pub use keyboard::{neighbors, NUMBER_WORDS, QWERTY_NEIGHBORS};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, TaggedQuery, Token};
use crate::eval::{extract_mentions, repair_conlleval, Mention, RepairPolicy};
use crate::lexicon::{AnchorKey, LexiconError, MentionLexicon};
use crate::ontology::{Label, CORE_PRODUCT_TYPE, CREATOR_TYPE};
use crate::rng::derive_rng;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("typo probability {0} is outside [0, 1]")]
    InvalidTypoProb(f64),
    #[error("transform {0} requires a lexicon")]
    MissingLexicon(Transform),
}

/// The available transformations. `All` composes the other five in the
/// order: mention replacement, shuffle, butterfinger, numeric, color swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Shuffled,
    Butterfinger,
    Numeric,
    Color,
    MentionReplacement,
    All,
}

impl Transform {
    pub fn as_str(&self) -> &'static str {
        match self {
            Transform::Shuffled => "shuffled",
            Transform::Butterfinger => "butterfinger",
            Transform::Numeric => "numeric",
            Transform::Color => "color",
            Transform::MentionReplacement => "mention_replacement",
            Transform::All => "all",
        }
    }

    pub fn requires_lexicon(&self) -> bool {
        matches!(
            self,
            Transform::Color | Transform::MentionReplacement | Transform::All
        )
    }
}

impl std::fmt::Display for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Configuration for [`augment_corpus`].
#[derive(Debug, Clone)]
pub struct AugmentSpec {
    pub transform: Transform,
    pub seed: u64,
    /// Per-character replacement probability for butterfinger.
    pub typo_prob: f64,
    /// Required for color, mention_replacement and all.
    pub lexicon: Option<MentionLexicon>,
    /// The layer transforms read from and write to.
    pub layer: String,
    /// Emit original queries followed by transformed copies with a `+aug`
    /// id suffix instead of transformed queries only.
    pub concat: bool,
}

impl AugmentSpec {
    pub fn new(transform: Transform, seed: u64) -> Self {
        AugmentSpec {
            transform,
            seed,
            typo_prob: 0.1,
            lexicon: None,
            layer: "gold".to_owned(),
            concat: false,
        }
    }

    fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=1.0).contains(&self.typo_prob) {
            return Err(AugmentError::InvalidTypoProb(self.typo_prob));
        }
        if self.transform.requires_lexicon() && self.lexicon.is_none() {
            return Err(AugmentError::MissingLexicon(self.transform));
        }
        Ok(())
    }
}

/// A span substitution made by color swap or mention replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacedSpan {
    #[serde(rename = "type")]
    pub ty: String,
    pub original: Vec<String>,
    pub replacement: Vec<String>,
}

/// Sidecar log entry for one transformed query.
#[derive(Debug, Clone, Serialize)]
pub struct AugmentRecord {
    pub query_id: String,
    pub transform: Transform,
    /// Anchor used by mention replacement; `None` when the query had no
    /// core product or creator span and was left unchanged.
    pub anchor: Option<AnchorKey>,
    pub replaced: Vec<ReplacedSpan>,
}

fn plain_token(text: String) -> Token {
    Token::new(text).expect("transform outputs are valid tokens")
}

/// Query segmented into entity spans and individual outside tokens.
enum Unit {
    Entity { ty: String, tokens: Vec<Token> },
    Outside(Token),
}

fn segment_units(tokens: &[Token], labels: &[Label]) -> Vec<Unit> {
    let repaired = repair_conlleval(labels);
    let mentions = extract_mentions(&repaired, RepairPolicy::None)
        .expect("repaired sequence is valid");
    let mut units = Vec::new();
    let mut next_mention = mentions.iter().peekable();
    let mut i = 0;
    while i < tokens.len() {
        if let Some(mention) = next_mention.peek() {
            if mention.start == i {
                units.push(Unit::Entity {
                    ty: mention.ty.clone(),
                    tokens: tokens[mention.start..mention.end].to_vec(),
                });
                i = mention.end;
                next_mention.next();
                continue;
            }
        }
        units.push(Unit::Outside(tokens[i].clone()));
        i += 1;
    }
    units
}

fn assemble(units: Vec<Unit>) -> (Vec<Token>, Vec<Label>) {
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for unit in units {
        match unit {
            Unit::Outside(token) => {
                tokens.push(token);
                labels.push(Label::Outside);
            }
            Unit::Entity { ty, tokens: span } => {
                for (idx, mut token) in span.into_iter().enumerate() {
                    token.char_span = None;
                    labels.push(if idx == 0 {
                        Label::begin(&ty)
                    } else {
                        Label::inside(&ty)
                    });
                    tokens.push(token);
                }
            }
        }
    }
    (tokens, labels)
}

/// Permutes the entity spans of a query uniformly while outside tokens keep
/// their positions. Labels move with their spans. Queries with at most one
/// entity come back unchanged.
pub fn shuffle_entities<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
) -> Result<TaggedQuery, AugmentError> {
    let labels = query.require_layer(layer)?;
    let mut units = segment_units(query.tokens(), labels);
    let entity_count = units
        .iter()
        .filter(|u| matches!(u, Unit::Entity { .. }))
        .count();
    if entity_count <= 1 {
        return Ok(TaggedQuery::new(
            query.id(),
            query.tokens().to_vec(),
            layer,
            labels.to_vec(),
        )?);
    }

    // Fisher-Yates over the entity units only.
    let entity_positions: Vec<usize> = units
        .iter()
        .enumerate()
        .filter(|(_, u)| matches!(u, Unit::Entity { .. }))
        .map(|(i, _)| i)
        .collect();
    for i in (1..entity_positions.len()).rev() {
        let j = rng.random_range(0..=i);
        units.swap(entity_positions[i], entity_positions[j]);
    }

    let (tokens, labels) = assemble(units);
    Ok(TaggedQuery::new(query.id(), tokens, layer, labels)?)
}

/// Replaces each ASCII letter, independently with probability `typo_prob`,
/// by a uniformly chosen QWERTY-adjacent key of the same case. Token count,
/// token lengths and the label sequence are unchanged.
pub fn butterfinger<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
    typo_prob: f64,
) -> Result<TaggedQuery, AugmentError> {
    if !(0.0..=1.0).contains(&typo_prob) {
        return Err(AugmentError::InvalidTypoProb(typo_prob));
    }
    let labels = query.require_layer(layer)?.to_vec();
    let tokens = query
        .tokens()
        .iter()
        .map(|token| {
            let mut changed = false;
            let text: String = token
                .text
                .chars()
                .map(|c| {
                    let Some(adjacent) = neighbors(c) else { return c };
                    if typo_prob == 0.0 || !rng.random_bool(typo_prob) {
                        return c;
                    }
                    changed = true;
                    let choices: Vec<char> = adjacent.chars().collect();
                    let pick = choices[rng.random_range(0..choices.len())];
                    if c.is_ascii_uppercase() {
                        pick.to_ascii_uppercase()
                    } else {
                        pick
                    }
                })
                .collect();
            if changed {
                plain_token(text)
            } else {
                token.clone()
            }
        })
        .collect();
    Ok(TaggedQuery::new(query.id(), tokens, layer, labels)?)
}

/// Replaces all-digit tokens by a different uniformly random digit string of
/// equal length, and number words by a different word from the shipped
/// inventory. Labels are unchanged.
pub fn numeric_replace<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
) -> Result<TaggedQuery, AugmentError> {
    let labels = query.require_layer(layer)?.to_vec();
    let tokens = query
        .tokens()
        .iter()
        .map(|token| {
            let text = &token.text;
            if text.chars().all(|c| c.is_ascii_digit()) {
                loop {
                    let replacement: String = (0..text.len())
                        .map(|_| char::from(b'0' + rng.random_range(0..10u8)))
                        .collect();
                    if replacement != *text {
                        return plain_token(replacement);
                    }
                }
            }
            let lower = text.to_lowercase();
            if let Some(position) = NUMBER_WORDS.iter().position(|w| *w == lower) {
                let offset = rng.random_range(1..NUMBER_WORDS.len());
                let replacement = NUMBER_WORDS[(position + offset) % NUMBER_WORDS.len()];
                return plain_token(replacement.to_owned());
            }
            token.clone()
        })
        .collect();
    Ok(TaggedQuery::new(query.id(), tokens, layer, labels)?)
}

/// Rebuilds a query from its outside tokens and a final list of (possibly
/// substituted) mentions.
fn rebuild_with_replacements(
    query: &TaggedQuery,
    layer: &str,
    mentions: &[Mention],
    replacement_for: impl Fn(usize, &Mention) -> Option<Vec<String>>,
) -> Result<(TaggedQuery, Vec<ReplacedSpan>), AugmentError> {
    let mut tokens: Vec<Token> = Vec::with_capacity(query.len());
    let mut labels: Vec<Label> = Vec::with_capacity(query.len());
    let mut replaced = Vec::new();
    let mut next = mentions.iter().enumerate().peekable();
    let mut i = 0;
    while i < query.len() {
        if let Some((mention_idx, mention)) = next.peek().copied() {
            if mention.start == i {
                match replacement_for(mention_idx, mention) {
                    Some(texts) => {
                        replaced.push(ReplacedSpan {
                            ty: mention.ty.clone(),
                            original: mention
                                .texts(query.tokens())
                                .into_iter()
                                .map(str::to_owned)
                                .collect(),
                            replacement: texts.clone(),
                        });
                        for (idx, text) in texts.into_iter().enumerate() {
                            labels.push(if idx == 0 {
                                Label::begin(&mention.ty)
                            } else {
                                Label::inside(&mention.ty)
                            });
                            tokens.push(plain_token(text));
                        }
                    }
                    None => {
                        for (idx, token) in query.tokens()[mention.start..mention.end]
                            .iter()
                            .enumerate()
                        {
                            labels.push(if idx == 0 {
                                Label::begin(&mention.ty)
                            } else {
                                Label::inside(&mention.ty)
                            });
                            tokens.push(token.clone());
                        }
                    }
                }
                i = mention.end;
                next.next();
                continue;
            }
        }
        tokens.push(query.tokens()[i].clone());
        labels.push(Label::Outside);
        i += 1;
    }
    Ok((TaggedQuery::new(query.id(), tokens, layer, labels)?, replaced))
}

/// Replaces every color span by a color mention sampled from the lexicon,
/// different from the original whenever the pool has an alternative.
pub fn color_swap<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
    lexicon: &MentionLexicon,
) -> Result<(TaggedQuery, Vec<ReplacedSpan>), AugmentError> {
    let labels = query.require_layer(layer)?;
    let repaired = repair_conlleval(labels);
    let mentions = extract_mentions(&repaired, RepairPolicy::None)
        .expect("repaired sequence is valid");
    if !mentions.iter().any(|m| m.ty == "color") {
        return Ok((
            TaggedQuery::new(query.id(), query.tokens().to_vec(), layer, labels.to_vec())?,
            Vec::new(),
        ));
    }
    let pool = lexicon
        .pool("color")
        .filter(|p| !p.is_empty())
        .ok_or_else(|| LexiconError::EmptyPool {
            ty: "color".to_owned(),
            anchor: None,
        })?;

    // Pre-draw replacements in mention order so the RNG stream is stable.
    let mut picks: Vec<Option<Vec<String>>> = Vec::with_capacity(mentions.len());
    for mention in &mentions {
        if mention.ty == "color" {
            let original: Vec<String> = mention
                .texts(query.tokens())
                .into_iter()
                .map(str::to_owned)
                .collect();
            let pick = pool
                .sample_excluding(&original, rng)
                .expect("pool is non-empty")
                .clone();
            picks.push(Some(pick));
        } else {
            picks.push(None);
        }
    }
    rebuild_with_replacements(query, layer, &mentions, |idx, _| picks[idx].clone())
}

/// Trace of one mention replacement pass.
#[derive(Debug, Clone, Default)]
pub struct MentionReplaceTrace {
    pub anchor: Option<AnchorKey>,
    pub replaced: Vec<ReplacedSpan>,
}

/// Replaces the non-anchor mentions of a query with same-type mentions that
/// co-occur with its anchor (first core product span, else first creator
/// span). Core product and creator spans are preserved verbatim; types
/// without an anchored pool fall back to the global type pool, and mentions
/// with no pool at all are kept. A query without an anchor is unchanged.
pub fn mention_replace<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
    lexicon: &MentionLexicon,
) -> Result<(TaggedQuery, MentionReplaceTrace), AugmentError> {
    let labels = query.require_layer(layer)?;
    let repaired = repair_conlleval(labels);
    let mentions = extract_mentions(&repaired, RepairPolicy::None)
        .expect("repaired sequence is valid");

    let anchor_mention = mentions
        .iter()
        .find(|m| m.ty == CORE_PRODUCT_TYPE)
        .or_else(|| mentions.iter().find(|m| m.ty == CREATOR_TYPE));
    let Some(anchor_mention) = anchor_mention else {
        return Ok((
            TaggedQuery::new(query.id(), query.tokens().to_vec(), layer, labels.to_vec())?,
            MentionReplaceTrace::default(),
        ));
    };
    let anchor = AnchorKey::new(
        anchor_mention.ty.clone(),
        &anchor_mention.texts(query.tokens()).join(" "),
    );

    let mut picks: Vec<Option<Vec<String>>> = Vec::with_capacity(mentions.len());
    for mention in &mentions {
        if mention.ty == CORE_PRODUCT_TYPE || mention.ty == CREATOR_TYPE {
            picks.push(None);
            continue;
        }
        let pool = lexicon
            .anchored_pool(&anchor, &mention.ty)
            .filter(|p| !p.is_empty())
            .or_else(|| lexicon.pool(&mention.ty).filter(|p| !p.is_empty()));
        picks.push(pool.map(|p| p.sample(rng).expect("pool is non-empty").clone()));
    }

    let (transformed, replaced) =
        rebuild_with_replacements(query, layer, &mentions, |idx, _| picks[idx].clone())?;
    Ok((
        transformed,
        MentionReplaceTrace {
            anchor: Some(anchor),
            replaced,
        },
    ))
}

/// Full composition sharing one RNG stream: mention replacement, shuffle,
/// butterfinger, numeric, color swap.
pub fn apply_all<R: Rng + ?Sized>(
    query: &TaggedQuery,
    layer: &str,
    rng: &mut R,
    lexicon: &MentionLexicon,
    typo_prob: f64,
) -> Result<(TaggedQuery, MentionReplaceTrace), AugmentError> {
    let (query, mut trace) = mention_replace(query, layer, rng, lexicon)?;
    let query = shuffle_entities(&query, layer, rng)?;
    let query = butterfinger(&query, layer, rng, typo_prob)?;
    let query = numeric_replace(&query, layer, rng)?;
    let (query, color_replaced) = color_swap(&query, layer, rng, lexicon)?;
    trace.replaced.extend(color_replaced);
    Ok((query, trace))
}

fn transform_query(
    query: &TaggedQuery,
    spec: &AugmentSpec,
) -> Result<(TaggedQuery, AugmentRecord), AugmentError> {
    let mut rng = derive_rng(spec.seed, &[query.id()]);
    let layer = spec.layer.as_str();
    let lexicon = spec.lexicon.as_ref();
    let mut record = AugmentRecord {
        query_id: query.id().to_owned(),
        transform: spec.transform,
        anchor: None,
        replaced: Vec::new(),
    };
    let transformed = match spec.transform {
        Transform::Shuffled => shuffle_entities(query, layer, &mut rng)?,
        Transform::Butterfinger => butterfinger(query, layer, &mut rng, spec.typo_prob)?,
        Transform::Numeric => numeric_replace(query, layer, &mut rng)?,
        Transform::Color => {
            let (q, replaced) =
                color_swap(query, layer, &mut rng, lexicon.expect("validated"))?;
            record.replaced = replaced;
            q
        }
        Transform::MentionReplacement => {
            let (q, trace) =
                mention_replace(query, layer, &mut rng, lexicon.expect("validated"))?;
            record.anchor = trace.anchor;
            record.replaced = trace.replaced;
            q
        }
        Transform::All => {
            let (q, trace) = apply_all(
                query,
                layer,
                &mut rng,
                lexicon.expect("validated"),
                spec.typo_prob,
            )?;
            record.anchor = trace.anchor;
            record.replaced = trace.replaced;
            q
        }
    };
    Ok((transformed, record))
}

fn with_id_suffix(query: TaggedQuery, layer: &str) -> Result<TaggedQuery, CorpusError> {
    let labels = query
        .layer(layer)
        .expect("transformed query carries its layer")
        .to_vec();
    TaggedQuery::new(
        format!("{}+aug", query.id()),
        query.tokens().to_vec(),
        layer,
        labels,
    )
}

/// Applies one transform to every query of a corpus.
///
/// Each query's RNG is derived from `(spec.seed, query id)`, so the output
/// is identical regardless of query order or thread count. In concat mode
/// the originals are followed by transformed copies with a `+aug` id suffix.
/// Returns the corpus plus the sidecar audit records, one per transformed
/// query.
pub fn augment_corpus(
    corpus: &Corpus,
    spec: &AugmentSpec,
) -> Result<(Corpus, Vec<AugmentRecord>), AugmentError> {
    spec.validate()?;
    let results: Vec<(TaggedQuery, AugmentRecord)> = corpus
        .queries()
        .par_iter()
        .map(|query| transform_query(query, spec))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::with_capacity(results.len());
    let mut transformed = Vec::with_capacity(results.len());
    for (query, record) in results {
        records.push(record);
        transformed.push(query);
    }

    let queries = if spec.concat {
        let mut queries: Vec<TaggedQuery> = corpus.queries().to_vec();
        for (query, record) in transformed.into_iter().zip(&mut records) {
            let renamed = with_id_suffix(query, &spec.layer)?;
            record.query_id = renamed.id().to_owned();
            queries.push(renamed);
        }
        queries
    } else {
        transformed
    };
    Ok((Corpus::new(corpus.split.clone(), queries)?, records))
}
