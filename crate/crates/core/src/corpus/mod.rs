//! Data model for tagged query corpora, CoNLL parsing/serialization and
//! offset-file ingestion.
//!
//! All types are immutable after construction. A [`TaggedQuery`] holds the
//! tokens of one query plus one or more named label layers (annotators or
//! model runs); a [`Corpus`] is an ordered collection of queries with unique
//! ids.

mod conll;
mod offsets;

pub use conll::{parse_conll, serialize_conll};
pub use offsets::{ingest_offsets, parse_offset_records, parse_raw_queries, OffsetRecord};

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{Label, TagOntology, AUXILIARY_TAGS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {0}: expected exactly two whitespace-separated fields")]
    MalformedLine(usize),
    #[error("line {0}: invalid label {1:?}")]
    InvalidLabel(usize, String),
    #[error("line {line}: unknown entity type {ty:?}")]
    UnknownType { line: usize, ty: String },
    #[error("corpus contains no queries")]
    EmptyCorpus,
    #[error("query {query_id:?} has no layer {layer:?}")]
    MissingLayer { query_id: String, layer: String },
    #[error("duplicate query id {0:?}")]
    DuplicateQueryId(String),
    #[error("duplicate layer {0:?}")]
    DuplicateLayer(String),
    #[error("layer {layer:?} has {labels} labels for {tokens} tokens")]
    LayerLengthMismatch {
        layer: String,
        labels: usize,
        tokens: usize,
    },
    #[error("invalid token {text:?}: {reason}")]
    InvalidToken { text: String, reason: String },
    #[error("offset record references unknown query id {0:?}")]
    UnknownQueryId(String),
    #[error("query {query_id:?}: offsets {start}..{end} out of range for {len}-byte text")]
    OffsetOutOfRange {
        query_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("query {0:?}: overlapping token offsets")]
    OverlappingTokens(String),
}

/// One token of a query, optionally carrying the byte span it was sliced
/// from in the raw query string (end exclusive).
///
/// Token text is a single whitespace-free word that does not start with `#`,
/// so every corpus can be written to CoNLL and read back unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub char_span: Option<(usize, usize)>,
}

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self, CorpusError> {
        let text = text.into();
        if text.is_empty() {
            return Err(CorpusError::InvalidToken {
                text,
                reason: "empty".into(),
            });
        }
        if text.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidToken {
                text,
                reason: "contains whitespace".into(),
            });
        }
        if text.starts_with('#') {
            // Lines starting with '#' are comments in the CoNLL format, so a
            // token starting with '#' would not survive a round-trip.
            return Err(CorpusError::InvalidToken {
                text,
                reason: "starts with '#'".into(),
            });
        }
        Ok(Token {
            text,
            char_span: None,
        })
    }

    pub fn with_span(
        text: impl Into<String>,
        start: usize,
        end: usize,
    ) -> Result<Self, CorpusError> {
        let mut token = Token::new(text)?;
        token.char_span = Some((start, end));
        Ok(token)
    }
}

/// Tokens of one query plus one or more named label sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedQuery {
    id: String,
    tokens: Vec<Token>,
    layers: BTreeMap<String, Vec<Label>>,
}

impl TaggedQuery {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<Token>,
        layer: impl Into<String>,
        labels: Vec<Label>,
    ) -> Result<Self, CorpusError> {
        let mut query = TaggedQuery {
            id: id.into(),
            tokens,
            layers: BTreeMap::new(),
        };
        query.add_layer(layer, labels)?;
        Ok(query)
    }

    pub fn add_layer(
        &mut self,
        name: impl Into<String>,
        labels: Vec<Label>,
    ) -> Result<(), CorpusError> {
        let name = name.into();
        if labels.len() != self.tokens.len() {
            return Err(CorpusError::LayerLengthMismatch {
                layer: name,
                labels: labels.len(),
                tokens: self.tokens.len(),
            });
        }
        match self.layers.entry(name) {
            Entry::Occupied(e) => Err(CorpusError::DuplicateLayer(e.key().clone())),
            Entry::Vacant(e) => {
                e.insert(labels);
                Ok(())
            }
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn layer(&self, name: &str) -> Option<&[Label]> {
        self.layers.get(name).map(Vec::as_slice)
    }

    /// Like [`TaggedQuery::layer`] but with the standard missing-layer error.
    pub fn require_layer(&self, name: &str) -> Result<&[Label], CorpusError> {
        self.layer(name).ok_or_else(|| CorpusError::MissingLayer {
            query_id: self.id.clone(),
            layer: name.to_owned(),
        })
    }

    /// Layer names in lexicographic order.
    pub fn layer_names(&self) -> impl Iterator<Item = &str> {
        self.layers.keys().map(String::as_str)
    }

    pub fn has_layer(&self, name: &str) -> bool {
        self.layers.contains_key(name)
    }

    /// Token texts joined by single spaces.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&token.text);
        }
        out
    }
}

/// An ordered sequence of tagged queries with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub split: String,
    queries: Vec<TaggedQuery>,
}

impl Corpus {
    pub fn new(split: impl Into<String>, queries: Vec<TaggedQuery>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(queries.len());
        for query in &queries {
            if !seen.insert(query.id.as_str()) {
                return Err(CorpusError::DuplicateQueryId(query.id.clone()));
            }
        }
        Ok(Corpus {
            split: split.into(),
            queries,
        })
    }

    pub fn queries(&self) -> &[TaggedQuery] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TaggedQuery> {
        self.queries.iter().find(|q| q.id == id)
    }
}

/// Validates a serialized label against an ontology.
///
/// Labels whose type is missing from the ontology but is one of the
/// auxiliary tags (`no_tag`, `obscure`) normalize to `O`; any other unknown
/// type is an error.
pub(crate) fn validate_label(
    raw: &str,
    ontology: &TagOntology,
    line: usize,
) -> Result<Label, CorpusError> {
    let label: Label = raw
        .parse()
        .map_err(|_| CorpusError::InvalidLabel(line, raw.to_owned()))?;
    match label.ty() {
        None => Ok(label),
        Some(ty) if ontology.contains(ty) => Ok(label),
        Some(ty) if AUXILIARY_TAGS.contains(&ty) => Ok(Label::Outside),
        Some(ty) => Err(CorpusError::UnknownType {
            line,
            ty: ty.to_owned(),
        }),
    }
}
