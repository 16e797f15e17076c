//! Corpus engineering toolkit for BIO-tagged e-commerce search queries:
//! parsing and validation of tagged corpora, entity-level scoring,
//! inter-annotator agreement and adjudication, mention lexicons, label-aware
//! data augmentation, query relaxation and a small retrieval simulator for
//! measuring its effect.

pub mod agreement;
pub mod augment;
pub mod corpus;
pub mod eval;
pub mod lexicon;
pub mod ontology;
pub mod relax;
pub mod retrieval;
pub(crate) mod rng;
pub mod stats;

pub use corpus::{Corpus, CorpusError, TaggedQuery, Token};
pub use eval::{Mention, RepairPolicy};
pub use ontology::{Label, TagOntology};
