//! Entity type inventories and BIO labels.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The default entity types, ordered by corpus frequency (most frequent first).
pub const DEFAULT_TYPES: [&str; 17] = [
    "core_product_type",
    "modifier",
    "creator",
    "department",
    "product_name",
    "content",
    "UoM",
    "color",
    "shape",
    "material",
    "occasion",
    "condition",
    "quantity",
    "price",
    "origin",
    "time",
    "product_number",
];

/// The type marking the main product of a query. Several operations
/// (QC flags, entity dropping, replacement anchoring) treat it specially.
pub const CORE_PRODUCT_TYPE: &str = "core_product_type";

/// The second anchor type for mention replacement.
pub const CREATOR_TYPE: &str = "creator";

/// Auxiliary tags that some exports carry for untaggable or undecipherable
/// tokens. They are not entity types; when absent from the ontology their
/// labels normalize to `O` on ingestion.
pub const AUXILIARY_TAGS: [&str; 2] = ["no_tag", "obscure"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("ontology must declare at least one type")]
    Empty,
    #[error("duplicate type name {0:?}")]
    DuplicateType(String),
    #[error("type name {0:?} contains whitespace")]
    WhitespaceInType(String),
}

/// An ordered, case-sensitive set of entity type names.
///
/// Type names never contain whitespace and matching is exact: `UoM` and
/// `uom` are different types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagOntology {
    types: Vec<String>,
    lookup: HashSet<String>,
}

impl TagOntology {
    pub fn new<I, S>(types: I) -> Result<Self, OntologyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let types: Vec<String> = types.into_iter().map(Into::into).collect();
        if types.is_empty() {
            return Err(OntologyError::Empty);
        }
        let mut lookup = HashSet::with_capacity(types.len());
        for ty in &types {
            if ty.is_empty() || ty.chars().any(char::is_whitespace) {
                return Err(OntologyError::WhitespaceInType(ty.clone()));
            }
            if !lookup.insert(ty.clone()) {
                return Err(OntologyError::DuplicateType(ty.clone()));
            }
        }
        Ok(TagOntology { types, lookup })
    }

    /// Parses the plain-text ontology file format: one type name per line,
    /// blank lines and lines starting with `#` ignored.
    pub fn from_lines(text: &str) -> Result<Self, OntologyError> {
        let types = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned);
        Self::new(types)
    }

    pub fn contains(&self, ty: &str) -> bool {
        self.lookup.contains(ty)
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

impl Default for TagOntology {
    fn default() -> Self {
        TagOntology::new(DEFAULT_TYPES).expect("default ontology is well formed")
    }
}

impl Serialize for TagOntology {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.types.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TagOntology {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let types = Vec::<String>::deserialize(deserializer)?;
        TagOntology::new(types).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid label {0:?}: expected \"O\", \"B-<type>\" or \"I-<type>\"")]
pub struct LabelParseError(pub String);

/// A per-token BIO label: outside any span, or begin/inside of a typed span.
///
/// The serialized form is exactly `O`, `B-<type>` or `I-<type>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Outside,
    Begin(String),
    Inside(String),
}

impl Label {
    pub fn begin(ty: impl Into<String>) -> Self {
        Label::Begin(ty.into())
    }

    pub fn inside(ty: impl Into<String>) -> Self {
        Label::Inside(ty.into())
    }

    /// The entity type, absent for `O`.
    pub fn ty(&self) -> Option<&str> {
        match self {
            Label::Outside => None,
            Label::Begin(ty) | Label::Inside(ty) => Some(ty),
        }
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, Label::Outside)
    }

    pub fn is_begin(&self) -> bool {
        matches!(self, Label::Begin(_))
    }

    pub fn is_inside(&self) -> bool {
        matches!(self, Label::Inside(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Outside => f.write_str("O"),
            Label::Begin(ty) => write!(f, "B-{ty}"),
            Label::Inside(ty) => write!(f, "I-{ty}"),
        }
    }
}

impl FromStr for Label {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(Label::Outside);
        }
        match s.split_once('-') {
            Some(("B", ty)) if !ty.is_empty() => Ok(Label::Begin(ty.to_owned())),
            Some(("I", ty)) if !ty.is_empty() => Ok(Label::Inside(ty.to_owned())),
            _ => Err(LabelParseError(s.to_owned())),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
