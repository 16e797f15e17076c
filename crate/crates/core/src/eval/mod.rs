//! BIO validation and repair, mention extraction, entity-level scoring and
//! rank-sum significance testing.

mod bio;
mod ranksum;
mod score;

pub use bio::{
    extract_mentions, repair_conlleval, validate_bio, InvalidSequence, Mention, RepairPolicy,
    Violation,
};
pub use ranksum::rank_sum_test;
pub use score::{aggregate_runs, score, EvalError, EvalReport, MicroScores, RunStats, TypeScores};
