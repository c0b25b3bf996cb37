//! Scoring: finding matching, metric computation, evidence validation,
//! aggregation, and summary rendering.

mod aggregate;
mod matching;
mod metrics;
mod pipeline;
mod report;
mod validate;

pub use aggregate::{
    aggregate, evaluate_case, CaseEvaluation, EvalOptions, Evaluation, MetricBlock, TriageMode,
};
pub use matching::{match_findings, matched_count, matched_novel_count, FindingMatch};
pub use metrics::{f_beta, score_m1, threshold_curve, CurvePoint, M1Score, Rate, TriageCall};
pub use pipeline::{
    evaluate_corpus, read_evaluation, write_summary, SUMMARY_CSV, SUMMARY_JSON, SUMMARY_MD,
};
pub use report::{render_csv, render_markdown};
pub use validate::{
    validate_evidence, ClaimCheck, InvalidEvidence, ReportValidation, DEFAULT_K_MIN,
};

use crate::cloud::Category;
use crate::harness::HarnessError;
use crate::scenario::ScenarioError;

/// Default similarity threshold for counting a report claim as matching a
/// ground-truth finding. Matching is strict: a claim at exactly the
/// threshold does not count.
pub const DEFAULT_TAU: f64 = 0.42;

/// Default recall weight for the triage F-score; recall is weighted well
/// above precision because a missed incident costs more than a wasted
/// escalation.
pub const DEFAULT_BETA: f64 = 3.0;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("i/o failure")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("transcript belongs to {found:?}, expected {expected:?}")]
    TranscriptMismatch { expected: String, found: String },
    #[error("invalid evaluation options: {reason}")]
    InvalidOptions { reason: String },
}

/// Tools a competent investigation of each alert category is expected to
/// exercise; the default denominator of the tool-coverage metric. The
/// table is configuration, not a fixed rule: [`EvalOptions`] carries a
/// per-deployment override.
pub fn expected_tools(category: Category) -> &'static [&'static str] {
    match category {
        Category::BruteForce => &["lookup_events", "list_users", "get_cost_and_usage"],
        Category::UnauthorizedAccess => {
            &["lookup_events", "list_roles", "list_buckets", "get_cost_and_usage"]
        }
        Category::Misconfiguration => {
            &["lookup_events", "get_bucket_policy", "describe_security_groups", "get_cost_and_usage"]
        }
        Category::MaliciousFileExecution => {
            &["lookup_events", "describe_instances", "describe_security_groups", "get_cost_and_usage"]
        }
    }
}

/// The default expected-tool table as an owned, overridable map keyed by
/// category slug.
pub fn default_expected_tools() -> std::collections::BTreeMap<String, Vec<String>> {
    Category::ALL
        .iter()
        .map(|c| {
            (
                c.slug().to_string(),
                expected_tools(*c).iter().map(|t| t.to_string()).collect(),
            )
        })
        .collect()
}
