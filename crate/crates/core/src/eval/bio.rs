//! BIO sequence validation, conlleval-style repair and mention extraction.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::Label;

/// How to treat invalid BIO sequences before extraction or scoring.
///
/// `Conlleval` rewrites every stray `I-X` to `B-X`, the reading used for all
/// score reporting; `None` requires the input to already be valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairPolicy {
    #[default]
    Conlleval,
    None,
}

/// One invalid position in a BIO sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub position: usize,
    pub description: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "position {}: {}", self.position, self.description)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid BIO sequence: {} violation(s), first at position {}", .violations.len(), .violations[0].position)]
pub struct InvalidSequence {
    pub violations: Vec<Violation>,
}

/// A typed, half-open token span extracted from a label sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mention {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub ty: String,
}

impl Mention {
    pub fn new(start: usize, end: usize, ty: impl Into<String>) -> Self {
        Mention {
            start,
            end,
            ty: ty.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Token texts of this mention within its query.
    pub fn texts<'a>(&self, tokens: &'a [crate::corpus::Token]) -> Vec<&'a str> {
        tokens[self.start..self.end]
            .iter()
            .map(|t| t.text.as_str())
            .collect()
    }
}

/// Reports every position where an `I-X` label does not continue a running
/// span of type `X`. An empty result means the sequence is valid BIO.
pub fn validate_bio(labels: &[Label]) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let Label::Inside(ty) = label else { continue };
        let continues = i > 0 && labels[i - 1].ty() == Some(ty.as_str());
        if !continues {
            let prev = if i == 0 {
                "sequence start".to_owned()
            } else {
                format!("{}", labels[i - 1])
            };
            violations.push(Violation {
                position: i,
                description: format!("I-{ty} after {prev}"),
            });
        }
    }
    violations
}

/// Rewrites every violating `I-X` to `B-X`. Valid inputs come back unchanged
/// and the output always validates cleanly; the rewrite is idempotent.
pub fn repair_conlleval(labels: &[Label]) -> Vec<Label> {
    let mut repaired = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let fixed = match label {
            Label::Inside(ty) => {
                let continues = i > 0 && labels[i - 1].ty() == Some(ty.as_str());
                if continues {
                    label.clone()
                } else {
                    Label::Begin(ty.clone())
                }
            }
            other => other.clone(),
        };
        repaired.push(fixed);
    }
    repaired
}

/// Extracts maximal typed spans: a mention starts at each `B-X` (or repaired
/// `I-X`) and extends through consecutive `I-X`. Mentions are returned in
/// span order and never overlap.
pub fn extract_mentions(
    labels: &[Label],
    repair: RepairPolicy,
) -> Result<Vec<Mention>, InvalidSequence> {
    let repaired;
    let labels = match repair {
        RepairPolicy::Conlleval => {
            repaired = repair_conlleval(labels);
            repaired.as_slice()
        }
        RepairPolicy::None => {
            let violations = validate_bio(labels);
            if !violations.is_empty() {
                return Err(InvalidSequence { violations });
            }
            labels
        }
    };

    let mut mentions = Vec::new();
    let mut open: Option<Mention> = None;
    for (i, label) in labels.iter().enumerate() {
        match label {
            Label::Begin(ty) => {
                if let Some(m) = open.replace(Mention::new(i, i + 1, ty.clone())) {
                    mentions.push(m);
                }
            }
            Label::Inside(_) => {
                // Valid after repair: always continues the open mention.
                open.as_mut().expect("I-label continues an open span").end = i + 1;
            }
            Label::Outside => {
                if let Some(m) = open.take() {
                    mentions.push(m);
                }
            }
        }
    }
    if let Some(m) = open.take() {
        mentions.push(m);
    }
    Ok(mentions)
}
