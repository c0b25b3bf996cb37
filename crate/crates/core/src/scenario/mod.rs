//! Scenario scripting and case generation.
//!
//! A [`ScenarioSpec`] describes an incident symbolically: which provisioned
//! identities act, what they do, and when. [`execute_scenario`] replays the
//! script against a freshly provisioned environment, producing a
//! [`CaseBundle`]: the environment snapshot, the audit log, the alert an
//! agent investigates, and rulebook-extracted ground truth. Bundles
//! serialize to a fixed directory layout (see [`bundle`](self)) and are
//! deterministic functions of `(spec, seed)`.

mod bundle;
mod execute;
mod rulebook;
#[cfg(test)]
pub(crate) mod testutil;
mod timeline;
mod types;

pub use bundle::{
    check_consistency, read_bundle, read_public_case, write_bundle, PublicCase, ALERT_FILE,
    CASE_FILE, EVENTS_FILE, GROUND_TRUTH_FILE,
};
pub use execute::execute_scenario;
pub use rulebook::{
    classify_novel, extract_ground_truth, BENIGN_EXPLANATION_RULES, EXFIL_MIN_READS,
    RULEBOOK_VERSION, TAU_ALERT,
};
pub use timeline::{compress_timeline, execution_order};
pub use types::{
    ActionTemplate, ActorSpec, Alert, AttackStep, CaseBundle, CaseManifest, EvidenceArtifact,
    EvidenceKind, ExecutionTrace, Finding, GroundTruth, Intent, IpSlot, ObjectSlot, ResourceRef,
    ScenarioSpec, TraceStep, Verdict,
};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario {scenario_id}: {reason}")]
    InvalidSpec { scenario_id: String, reason: String },

    #[error("step {step_id} references {reference}")]
    UnresolvedResource { step_id: String, reference: String },

    #[error("step {step_id} failed: {source}")]
    StepFailed {
        step_id: String,
        source: crate::cloud::CloudError,
    },

    #[error("alert template slot {{{slot}}} was never filled")]
    AlertSlot { slot: String },

    #[error("ground truth extraction failed: {reason}")]
    Extraction { reason: String },

    #[error("case {case_id} is inconsistent: {reason}")]
    Inconsistent { case_id: String, reason: String },

    #[error(transparent)]
    Telemetry(#[from] crate::telemetry::TelemetryError),

    #[error(transparent)]
    Cloud(#[from] crate::cloud::CloudError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
