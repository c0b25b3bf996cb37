//! Scenario descriptions and the case-bundle types they produce.
//!
//! A scenario is a script: an environment spec, an ordered list of steps
//! with symbolic actor/resource references, and an alert template. Steps
//! carry intent flags; the verdict of the resulting case follows from
//! them, never from a hand-written label.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::cloud::{Category, ControlAction, EnvironmentSpec, SsmCommand};
use crate::telemetry::EventLog;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Tp,
    Fp,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Tp => "TP",
            Verdict::Fp => "FP",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TP" | "tp" => Ok(Verdict::Tp),
            "FP" | "fp" => Ok(Verdict::Fp),
            other => Err(format!("unknown verdict {other:?}, expected TP or FP")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Malicious,
    Benign,
}

/// Who performs a step. Indexes refer to provision order; `CreatedUser`
/// and `Session` refer back to the step that created the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActorSpec {
    User { index: usize },
    PartnerUser,
    CreatedUser { step: String },
    Session { step: String },
    Anonymous,
}

/// Source address slot, resolved against the environment's address pools.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IpSlot {
    Internal { index: usize },
    External { index: usize },
    Fixed { ip: String },
}

/// Symbolic reference to a provisioned (or step-created) resource.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ref", rename_all = "snake_case")]
pub enum ResourceRef {
    User { index: usize },
    PartnerUser,
    CreatedUser { step: String },
    Role { index: usize },
    Bucket { index: usize },
    Instance { index: usize },
    SecurityGroup { index: usize },
}

/// Object key slot inside a bucket: an existing provisioned object
/// (index wraps) or a literal key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectSlot {
    Existing { index: usize },
    Named { key: String },
}

/// A control action with resource slots instead of concrete names; the
/// executor resolves it into a [`ControlAction`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ActionTemplate {
    ConsoleLogin { user: ResourceRef, password_ok: bool },
    AssumeRole { role: ResourceRef, session_name: String },
    GetCallerIdentity,
    CreateUser { name: String },
    CreateAccessKey { user: ResourceRef },
    CreateLoginProfile { user: ResourceRef },
    AttachUserPolicy { user: ResourceRef, policy_name: String, admin: bool },
    ListUsers,
    ListBuckets,
    ListObjects { bucket: ResourceRef },
    GetObject { bucket: ResourceRef, object: ObjectSlot },
    CopyObject { bucket: ResourceRef, object: ObjectSlot, destination: String },
    PutObject { bucket: ResourceRef, key: String, size_bytes: u64 },
    PutBucketPolicy { bucket: ResourceRef, public: bool, change_ticket: Option<String> },
    PutBucketAcl { bucket: ResourceRef, public: bool, change_ticket: Option<String> },
    GetBucketPolicy { bucket: ResourceRef },
    DescribeInstances,
    StopInstances { instance: ResourceRef },
    TerminateInstances { instance: ResourceRef },
    AuthorizeSecurityGroupIngress { group: ResourceRef, port: u16, cidr: String },
    SendCommand { instance: ResourceRef, command: SsmCommand },
    StartAutomationExecution { instance: ResourceRef, command: SsmCommand },
    StopLogging,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackStep {
    pub step_id: String,
    pub actor: ActorSpec,
    pub ip: IpSlot,
    pub action: ActionTemplate,
    /// Milliseconds after scenario start.
    pub offset_ms: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
    pub intent: Intent,
    /// Steps whose events the alert cites.
    #[serde(default)]
    pub triggers_alert: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario_id: String,
    pub category: Category,
    pub env_spec: EnvironmentSpec,
    pub steps: Vec<AttackStep>,
    /// Text with `{slot}` holes filled from the first triggering step.
    pub alert_template: String,
    pub intended_verdict: Verdict,
}

impl ScenarioSpec {
    /// The verdict the intent flags imply.
    pub fn implied_verdict(&self) -> Verdict {
        if self.steps.iter().any(|s| s.intent == Intent::Malicious) {
            Verdict::Tp
        } else {
            Verdict::Fp
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |reason: String| {
            Err(ScenarioError::InvalidSpec { scenario_id: self.scenario_id.clone(), reason })
        };
        if self.steps.is_empty() {
            return fail("steps must be non-empty".to_string());
        }
        if self.alert_template.trim().is_empty() {
            return fail("alert template must be non-empty".to_string());
        }
        self.env_spec
            .validate()
            .map_err(|e| ScenarioError::InvalidSpec {
                scenario_id: self.scenario_id.clone(),
                reason: e.to_string(),
            })?;
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for step in &self.steps {
            if step.offset_ms < 0 {
                return fail(format!("step {} has a negative offset", step.step_id));
            }
            for dep in &step.depends_on {
                if !seen.contains(dep.as_str()) {
                    return fail(format!(
                        "step {} depends on {dep}, which is not an earlier step",
                        step.step_id
                    ));
                }
            }
            if !seen.insert(&step.step_id) {
                return fail(format!("duplicate step id {}", step.step_id));
            }
        }
        if !self.steps.iter().any(|s| s.triggers_alert) {
            return fail("at least one step must trigger the alert".to_string());
        }
        if self.implied_verdict() != self.intended_verdict {
            return fail(format!(
                "intended verdict {} contradicts the step intent flags",
                self.intended_verdict
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    pub alert_id: String,
    pub category: Category,
    pub description: String,
    pub fired_at: Timestamp,
    pub triggering_event_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    EventId,
    Arn,
    Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceArtifact {
    pub kind: EvidenceKind,
    pub value: String,
}

impl EvidenceArtifact {
    pub fn event_id(value: &str) -> Self {
        EvidenceArtifact { kind: EvidenceKind::EventId, value: value.to_string() }
    }

    pub fn arn(value: &str) -> Self {
        EvidenceArtifact { kind: EvidenceKind::Arn, value: value.to_string() }
    }

    pub fn timestamp(at: Timestamp) -> Self {
        EvidenceArtifact { kind: EvidenceKind::Timestamp, value: at.to_rfc3339() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub finding_id: String,
    /// Which rulebook rule produced this finding.
    pub rule_id: String,
    pub statement: String,
    pub evidence: Vec<EvidenceArtifact>,
    /// Empty exactly when the finding is derivable from the alert alone.
    pub required_tools: Vec<String>,
    pub novel: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
    /// Ids of the findings with `novel == true`, in finding order.
    pub novel_finding_ids: Vec<String>,
}

impl GroundTruth {
    pub fn novel_findings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.novel)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseManifest {
    pub case_id: String,
    pub category: Category,
    /// Scenario the case was executed from (seed scenarios and variations
    /// carry their own ids).
    pub scenario_id: String,
    /// Seed the whole corpus was generated from.
    pub root_seed: u64,
    /// Per-case seed derived from the root seed and the case id.
    pub case_seed: u64,
    pub rulebook_version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseBundle {
    pub manifest: CaseManifest,
    pub environment: crate::cloud::Environment,
    pub log: EventLog,
    pub alert: Alert,
    pub ground_truth: GroundTruth,
}

/// One executed step joined with the event it emitted; the rulebook
/// consumes these instead of re-parsing event payloads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step_id: String,
    pub intent: Intent,
    pub triggers_alert: bool,
    pub action: ControlAction,
    pub actor: crate::cloud::Actor,
    /// Short display name for the acting principal.
    pub actor_label: String,
    pub event_id: String,
    pub event_time: Timestamp,
    pub succeeded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub category: Category,
    pub steps: Vec<TraceStep>,
}
