//! Scenario variation and corpus generation.
//!
//! [`seeds`](self) holds the hand-authored scripts; [`apply_plan`] rewrites a
//! seed's surface (names, region, timing, interchangeable techniques) without
//! touching its causal structure; [`generate_corpus`] scales the seeds into a
//! sized, seeded corpus, executing every variation and rejecting any whose
//! extracted ground truth drifts from the seed's.

mod corpus;
mod seeds;
mod transform;

pub use corpus::{
    generate_corpus, validate_variation, CaseListing, CategoryMix, CorpusManifest,
    DistributionConfig, GenerationStats, CORPUS_FILE,
};
pub use seeds::{
    alert_template, all_seeds, fp_seed, fp_seeds, inject_attack, tp_seeds, FpArchetype,
};
pub use transform::{apply_plan, generate_variations, Transform, VariationPlan};

use crate::scenario::ScenarioError;

#[derive(Debug, thiserror::Error)]
pub enum VariationError {
    #[error("invalid distribution config: {reason}")]
    InvalidConfig { reason: String },

    /// The transform has nothing to act on in this scenario.
    #[error("transform {transform:?} does not apply to scenario {scenario_id}")]
    Inapplicable { scenario_id: String, transform: Transform },

    /// An executed variation failed validation against its seed.
    #[error("case {case_id} rejected: {reason}")]
    Rejected { case_id: String, reason: String },

    /// No acceptable variation was found within the retry budget.
    #[error("case {case_id} still rejected after {attempts} attempts: {reason}")]
    Exhausted { case_id: String, attempts: usize, reason: String },

    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error("corpus io: {0}")]
    Io(#[from] std::io::Error),

    #[error("corpus serialization: {0}")]
    Json(#[from] serde_json::Error),
}
