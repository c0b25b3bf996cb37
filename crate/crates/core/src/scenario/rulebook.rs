//! The finding rulebook.
//!
//! Ground truth is extracted by an explicit rule table rather than by
//! human review: each rule matches a pattern over the execution trace,
//! emits a single-sentence statement with canonical resource references,
//! and cites the exact events that prove it. A finding whose event
//! evidence is fully contained in the alert's triggering events needs no
//! tools to discover and is therefore never novel; everything else is
//! tagged with the tools an investigator would need.

use std::collections::{BTreeMap, BTreeSet};

use super::types::{
    Alert, EvidenceArtifact, ExecutionTrace, Finding, GroundTruth, Intent, TraceStep, Verdict,
};
use super::ScenarioError;
use crate::cloud::{ControlAction, SsmCommand};
use crate::telemetry::{CloudEvent, EventLog, IdentityKind};
use crate::text::rouge_l_text;

/// Bumped whenever a rule or statement template changes, so bundles
/// record which rule set produced them.
pub const RULEBOOK_VERSION: &str = "rules-v1";

/// Similarity ceiling against the alert text above which a finding does
/// not count as novel. Deliberately looser than the match threshold used
/// in scoring, so near-paraphrases of the alert are never novel.
pub const TAU_ALERT: f64 = 0.6;

/// Minimum object reads from one address for the exfiltration rule.
pub const EXFIL_MIN_READS: usize = 10;

/// Rules that explain away an alert as sanctioned activity. A benign case
/// is only usable when at least one of these fired, because otherwise the
/// ground truth gives an investigator nothing to exonerate with.
pub const BENIGN_EXPLANATION_RULES: &[&str] =
    &["ticketed_change", "established_admin", "pipeline_provenance", "partner_trust"];

/// A finding is novel when it is textually absent from the alert, backed
/// by evidence, and requires tools to discover.
pub fn classify_novel(finding: &Finding, alert: &Alert, tau_alert: f64) -> bool {
    rouge_l_text(&finding.statement, &alert.description) < tau_alert
        && !finding.evidence.is_empty()
        && !finding.required_tools.is_empty()
}

struct Draft {
    rule_id: &'static str,
    statement: String,
    evidence: Vec<EvidenceArtifact>,
    tools: &'static [&'static str],
}

struct Ctx<'a> {
    trace: &'a ExecutionTrace,
    log: &'a EventLog,
    alert: &'a Alert,
}

impl<'a> Ctx<'a> {
    fn event(&self, step: &TraceStep) -> &CloudEvent {
        self.log.by_id(&step.event_id).expect("trace/log consistency checked upfront")
    }

    fn successes(&self) -> impl Iterator<Item = &'a TraceStep> + '_ {
        self.trace.steps.iter().filter(|s| s.succeeded)
    }

    fn is_trigger(&self, event_id: &str) -> bool {
        self.alert.triggering_event_ids.iter().any(|id| id == event_id)
    }

    fn first_trigger(&self) -> Option<&'a TraceStep> {
        self.trace.steps.iter().find(|s| s.triggers_alert)
    }
}

pub fn extract_ground_truth(
    trace: &ExecutionTrace,
    log: &EventLog,
    alert: &Alert,
) -> Result<GroundTruth, ScenarioError> {
    for step in &trace.steps {
        if log.by_id(&step.event_id).is_none() {
            return Err(ScenarioError::Extraction {
                reason: format!("step {} cites event {} absent from the log", step.step_id, step.event_id),
            });
        }
    }
    for id in &alert.triggering_event_ids {
        if log.by_id(id).is_none() {
            return Err(ScenarioError::Extraction {
                reason: format!("alert cites event {id} absent from the log"),
            });
        }
    }

    let ctx = Ctx { trace, log, alert };
    let rules: &[fn(&Ctx) -> Vec<Draft>] = &[
        failed_login_burst,
        login_after_failures,
        persistence_established,
        privilege_escalation,
        console_access_enabled,
        audit_tampering,
        role_assumed,
        role_chain_hop,
        bucket_enumeration,
        data_exfiltration,
        cross_account_origin,
        bucket_exposed,
        anonymous_reads,
        missing_change_record,
        ingress_opened,
        remote_command,
        payload_download,
        reverse_shell,
        host_persistence,
        instance_disruption,
        ticketed_change,
        established_admin,
        pipeline_provenance,
        partner_trust,
    ];

    let triggers: BTreeSet<&str> =
        alert.triggering_event_ids.iter().map(String::as_str).collect();
    let mut findings = Vec::new();
    for rule in rules {
        for draft in rule(&ctx) {
            let derivable = draft
                .evidence
                .iter()
                .filter(|e| matches!(e.kind, super::types::EvidenceKind::EventId))
                .all(|e| triggers.contains(e.value.as_str()));
            let required_tools = if derivable {
                vec![]
            } else {
                draft.tools.iter().map(|t| t.to_string()).collect()
            };
            let mut finding = Finding {
                finding_id: format!("f-{:02}", findings.len() + 1),
                rule_id: draft.rule_id.to_string(),
                statement: draft.statement,
                evidence: draft.evidence,
                required_tools,
                novel: false,
            };
            finding.novel = classify_novel(&finding, alert, TAU_ALERT);
            findings.push(finding);
        }
    }

    let verdict = if trace.steps.iter().any(|s| s.intent == Intent::Malicious) {
        Verdict::Tp
    } else {
        Verdict::Fp
    };
    let novel_finding_ids =
        findings.iter().filter(|f| f.novel).map(|f| f.finding_id.clone()).collect();
    Ok(GroundTruth { verdict, findings, novel_finding_ids })
}

// ── Authentication rules ──

fn failed_login_burst(ctx: &Ctx) -> Vec<Draft> {
    let fails: Vec<&TraceStep> = ctx
        .trace
        .steps
        .iter()
        .filter(|s| matches!(s.action, ControlAction::ConsoleLogin { .. }) && !s.succeeded)
        .collect();
    if fails.len() < 3 {
        return vec![];
    }
    let first = fails[0];
    vec![Draft {
        rule_id: "failed_login_burst",
        statement: format!(
            "{} failed console sign-in attempts against user {} from {} preceded this alert.",
            fails.len(),
            first.actor_label,
            first.actor.source_ip
        ),
        evidence: fails.iter().map(|s| EvidenceArtifact::event_id(&s.event_id)).collect(),
        tools: &["lookup_events"],
    }]
}

fn login_after_failures(ctx: &Ctx) -> Vec<Draft> {
    let mut failed_users: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for step in &ctx.trace.steps {
        if let ControlAction::ConsoleLogin { user, .. } = &step.action {
            if !step.succeeded {
                failed_users.insert(user.name());
            } else if failed_users.contains(user.name()) {
                out.push(Draft {
                    rule_id: "login_after_failures",
                    statement: format!(
                        "The {} account eventually authenticated successfully from {} at {}.",
                        step.actor_label,
                        step.actor.source_ip,
                        step.event_time.to_rfc3339()
                    ),
                    evidence: vec![
                        EvidenceArtifact::event_id(&step.event_id),
                        EvidenceArtifact::timestamp(step.event_time),
                    ],
                    tools: &["lookup_events"],
                });
                failed_users.remove(user.name());
            }
        }
    }
    out
}

// ── Identity and privilege rules ──

fn persistence_established(ctx: &Ctx) -> Vec<Draft> {
    let mut out = Vec::new();
    for create in ctx.successes() {
        let (ControlAction::CreateUser { name }, Intent::Malicious) = (&create.action, create.intent)
        else {
            continue;
        };
        let key_step = ctx.successes().find(|s| {
            s.event_time >= create.event_time
                && matches!(&s.action, ControlAction::CreateAccessKey { user } if user.name() == name)
        });
        if let Some(key_step) = key_step {
            let key_id = ctx
                .event(key_step)
                .response_elements
                .get("access_key_id")
                .cloned()
                .unwrap_or_default();
            out.push(Draft {
                rule_id: "persistence_established",
                statement: format!(
                    "Durable access was established: a new account {name} and access key {key_id} appeared after the alert."
                ),
                evidence: vec![
                    EvidenceArtifact::event_id(&create.event_id),
                    EvidenceArtifact::event_id(&key_step.event_id),
                ],
                tools: &["lookup_events", "list_users"],
            });
        }
    }
    out
}

fn privilege_escalation(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| match (&s.action, s.intent) {
            (
                ControlAction::AttachUserPolicy { user, policy_name, admin: true },
                Intent::Malicious,
            ) => Some(Draft {
                rule_id: "privilege_escalation",
                statement: format!(
                    "Administrative policy {policy_name} was attached to {}, granting full account control.",
                    user.name()
                ),
                evidence: vec![
                    EvidenceArtifact::event_id(&s.event_id),
                    EvidenceArtifact::arn(&user.render()),
                ],
                tools: &["lookup_events", "get_user"],
            }),
            _ => None,
        })
        .collect()
}

fn console_access_enabled(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| match (&s.action, s.intent) {
            (ControlAction::CreateLoginProfile { user }, Intent::Malicious) => Some(Draft {
                rule_id: "console_access_enabled",
                statement: format!(
                    "A console password was provisioned for {}, enabling interactive sign-in.",
                    user.name()
                ),
                evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                tools: &["lookup_events"],
            }),
            _ => None,
        })
        .collect()
}

fn audit_tampering(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter(|s| matches!(s.action, ControlAction::StopLogging))
        .map(|s| Draft {
            rule_id: "audit_tampering",
            statement:
                "Audit trail recording was disabled via StopLogging, limiting subsequent visibility."
                    .to_string(),
            evidence: vec![
                EvidenceArtifact::event_id(&s.event_id),
                EvidenceArtifact::timestamp(s.event_time),
            ],
            tools: &["lookup_events"],
        })
        .collect()
}

// ── Lateral-movement rules ──

fn role_assumed(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter(|s| !matches!(s.actor.principal, crate::cloud::PrincipalRef::Session { .. }))
        .filter_map(|s| match (&s.action, s.intent) {
            (ControlAction::AssumeRole { role, .. }, Intent::Malicious) => Some(Draft {
                rule_id: "role_assumed",
                statement: format!(
                    "Role {} was assumed from {}, yielding temporary credentials.",
                    role.name(),
                    s.actor.source_ip
                ),
                evidence: vec![
                    EvidenceArtifact::event_id(&s.event_id),
                    EvidenceArtifact::arn(&role.render()),
                ],
                tools: &["lookup_events"],
            }),
            _ => None,
        })
        .collect()
}

fn role_chain_hop(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| {
            let is_session_actor =
                matches!(s.actor.principal, crate::cloud::PrincipalRef::Session { .. });
            match (&s.action, s.intent, is_session_actor) {
                (ControlAction::AssumeRole { role, .. }, Intent::Malicious, true) => Some(Draft {
                    rule_id: "role_chain_hop",
                    statement: format!(
                        "Temporary credentials pivoted again: session {} obtained {} shortly afterward.",
                        s.actor_label,
                        role.name()
                    ),
                    evidence: vec![
                        EvidenceArtifact::event_id(&s.event_id),
                        EvidenceArtifact::arn(&role.render()),
                    ],
                    tools: &["lookup_events", "list_roles"],
                }),
                _ => None,
            }
        })
        .collect()
}

fn cross_account_origin(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| {
            let (ControlAction::AssumeRole { role, .. }, Intent::Malicious) =
                (&s.action, s.intent)
            else {
                return None;
            };
            let caller_account = ctx.event(s).user_identity.account_id.clone()?;
            if caller_account == role.account_id {
                return None;
            }
            Some(Draft {
                rule_id: "cross_account_origin",
                statement: format!(
                    "The assuming principal belongs to external account {caller_account}, not the victim account {}.",
                    role.account_id
                ),
                evidence: vec![
                    EvidenceArtifact::event_id(&s.event_id),
                    EvidenceArtifact::arn(&role.render()),
                ],
                tools: &["lookup_events", "get_role"],
            })
        })
        .collect()
}

// ── Storage rules ──

fn bucket_enumeration(ctx: &Ctx) -> Vec<Draft> {
    let listings: Vec<&TraceStep> = ctx
        .successes()
        .filter(|s| {
            s.intent == Intent::Malicious
                && matches!(
                    s.action,
                    ControlAction::ListBuckets | ControlAction::ListObjects { .. }
                )
        })
        .collect();
    if listings.is_empty() {
        return vec![];
    }
    let buckets: BTreeSet<&str> = listings
        .iter()
        .filter_map(|s| match &s.action {
            ControlAction::ListObjects { bucket } => Some(bucket.as_str()),
            _ => None,
        })
        .collect();
    vec![Draft {
        rule_id: "bucket_enumeration",
        statement: format!(
            "Storage enumeration preceded the reads: {} listing calls touched {} named buckets.",
            listings.len(),
            buckets.len().max(1)
        ),
        evidence: listings.iter().map(|s| EvidenceArtifact::event_id(&s.event_id)).collect(),
        tools: &["lookup_events", "list_buckets"],
    }]
}

fn data_exfiltration(ctx: &Ctx) -> Vec<Draft> {
    let mut by_ip: BTreeMap<&str, Vec<&TraceStep>> = BTreeMap::new();
    for s in ctx.successes() {
        if s.intent == Intent::Malicious
            && matches!(
                s.action,
                ControlAction::GetObject { .. } | ControlAction::CopyObject { .. }
            )
        {
            by_ip.entry(s.actor.source_ip.as_str()).or_default().push(s);
        }
    }
    let mut out = Vec::new();
    for (ip, reads) in by_ip {
        if reads.len() < EXFIL_MIN_READS {
            continue;
        }
        let bucket = match &reads[0].action {
            ControlAction::GetObject { bucket, .. } | ControlAction::CopyObject { bucket, .. } => {
                bucket.clone()
            }
            _ => unreachable!("filtered above"),
        };
        let first = reads.first().expect("non-empty");
        let last = reads.last().expect("non-empty");
        out.push(Draft {
            rule_id: "data_exfiltration",
            statement: format!(
                "Roughly {} objects were read out of bucket {bucket} toward {ip}.",
                reads.len()
            ),
            evidence: vec![
                EvidenceArtifact::event_id(&first.event_id),
                EvidenceArtifact::event_id(&last.event_id),
                EvidenceArtifact::timestamp(last.event_time),
            ],
            tools: &["lookup_events", "list_objects"],
        });
    }
    out
}

fn bucket_exposed(ctx: &Ctx) -> Vec<Draft> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for s in ctx.successes() {
        let (bucket, public) = match &s.action {
            ControlAction::PutBucketPolicy { bucket, public, .. }
            | ControlAction::PutBucketAcl { bucket, public, .. } => (bucket.as_str(), *public),
            _ => continue,
        };
        if public && seen.insert(bucket) {
            out.push(Draft {
                rule_id: "bucket_exposed",
                statement: format!(
                    "Bucket {bucket} policy changed to allow anonymous read access at {}.",
                    s.event_time.to_rfc3339()
                ),
                evidence: vec![
                    EvidenceArtifact::event_id(&s.event_id),
                    EvidenceArtifact::timestamp(s.event_time),
                ],
                tools: &["lookup_events", "get_bucket_policy"],
            });
        }
    }
    out
}

fn anonymous_reads(ctx: &Ctx) -> Vec<Draft> {
    let reads: Vec<&TraceStep> = ctx
        .successes()
        .filter(|s| {
            matches!(s.action, ControlAction::GetObject { .. })
                && ctx.event(s).user_identity.kind == IdentityKind::Anonymous
        })
        .collect();
    if reads.is_empty() {
        return vec![];
    }
    let bucket = match &reads[0].action {
        ControlAction::GetObject { bucket, .. } => bucket.clone(),
        _ => unreachable!("filtered above"),
    };
    vec![Draft {
        rule_id: "anonymous_reads",
        statement: format!(
            "{} unauthenticated downloads pulled data out of {bucket} from {} shortly after.",
            reads.len(),
            reads[0].actor.source_ip
        ),
        evidence: reads.iter().map(|s| EvidenceArtifact::event_id(&s.event_id)).collect(),
        tools: &["lookup_events", "get_bucket_policy"],
    }]
}

fn missing_change_record(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| match (&s.action, s.intent) {
            (
                ControlAction::PutBucketPolicy { public: true, change_ticket: None, .. }
                | ControlAction::PutBucketAcl { public: true, change_ticket: None, .. },
                Intent::Malicious,
            ) => Some(Draft {
                rule_id: "missing_change_record",
                statement:
                    "No change-management ticket accompanied the policy modification, ruling out sanctioned maintenance."
                        .to_string(),
                evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                tools: &["lookup_events"],
            }),
            _ => None,
        })
        .collect()
}

// ── Network and compute rules ──

fn ingress_opened(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| match &s.action {
            ControlAction::AuthorizeSecurityGroupIngress { group_id, port, cidr }
                if cidr == "0.0.0.0/0" =>
            {
                Some(Draft {
                    rule_id: "ingress_opened",
                    statement: format!(
                        "Security group {group_id} now accepts inbound traffic on port {port} from any address."
                    ),
                    evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                    tools: &["lookup_events", "describe_security_groups"],
                })
            }
            _ => None,
        })
        .collect()
}

fn remote_command(ctx: &Ctx) -> Vec<Draft> {
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut out = Vec::new();
    for s in ctx.successes() {
        if s.intent != Intent::Malicious {
            continue;
        }
        let (instance, document) = match &s.action {
            ControlAction::SendCommand { instance_id, .. } => {
                (instance_id.as_str(), "AWS-RunShellScript")
            }
            ControlAction::StartAutomationExecution { instance_id, .. } => {
                (instance_id.as_str(), "AWS-RunAutomation")
            }
            _ => continue,
        };
        if seen.insert((instance, document)) {
            out.push(Draft {
                rule_id: "remote_command",
                statement: format!(
                    "Remote commands ran on instance {instance} through {document} with operator-supplied script content."
                ),
                evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                tools: &["lookup_events", "describe_instances"],
            });
        }
    }
    out
}

fn ssm_command_of(step: &TraceStep) -> Option<(&SsmCommand, &str)> {
    match &step.action {
        ControlAction::SendCommand { command, instance_id }
        | ControlAction::StartAutomationExecution { command, instance_id } => {
            Some((command, instance_id.as_str()))
        }
        _ => None,
    }
}

fn payload_download(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter(|s| s.intent == Intent::Malicious)
        .filter_map(|s| {
            let (SsmCommand::DownloadPayload { url }, instance) = ssm_command_of(s)? else {
                return None;
            };
            Some(Draft {
                rule_id: "payload_download",
                statement: format!(
                    "The executed script fetched an external payload from {url} onto {instance}."
                ),
                evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                tools: &["lookup_events", "describe_instances"],
            })
        })
        .collect()
}

fn reverse_shell(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter(|s| s.intent == Intent::Malicious)
        .filter_map(|s| {
            let (SsmCommand::ReverseShell { host, port }, instance) = ssm_command_of(s)? else {
                return None;
            };
            Some(Draft {
                rule_id: "reverse_shell",
                statement: format!(
                    "An interactive shell connecting back to {host}:{port} started on {instance}."
                ),
                evidence: vec![
                    EvidenceArtifact::event_id(&s.event_id),
                    EvidenceArtifact::timestamp(s.event_time),
                ],
                tools: &["lookup_events", "describe_instances"],
            })
        })
        .collect()
}

fn host_persistence(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter(|s| s.intent == Intent::Malicious)
        .filter_map(|s| {
            let (SsmCommand::InstallPersistence { mechanism }, _) = ssm_command_of(s)? else {
                return None;
            };
            Some(Draft {
                rule_id: "host_persistence",
                statement: format!(
                    "A boot persistence hook ({mechanism}) was installed on the compromised host."
                ),
                evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                tools: &["lookup_events"],
            })
        })
        .collect()
}

fn instance_disruption(ctx: &Ctx) -> Vec<Draft> {
    ctx.successes()
        .filter_map(|s| {
            let verb = match (&s.action, s.intent) {
                (ControlAction::StopInstances { .. }, Intent::Malicious) => "stopped",
                (ControlAction::TerminateInstances { .. }, Intent::Malicious) => "terminated",
                _ => return None,
            };
            let instance = match &s.action {
                ControlAction::StopInstances { instance_id }
                | ControlAction::TerminateInstances { instance_id } => instance_id,
                _ => unreachable!("matched above"),
            };
            Some(Draft {
                rule_id: "instance_disruption",
                statement: format!(
                    "Instance {instance} was later {verb}, disrupting the monitored workload."
                ),
                evidence: vec![EvidenceArtifact::event_id(&s.event_id)],
                tools: &["lookup_events", "describe_instances"],
            })
        })
        .collect()
}

// ── Benign-explanation rules ──

fn ticketed_change(ctx: &Ctx) -> Vec<Draft> {
    let mut out = Vec::new();
    for s in ctx.successes() {
        if s.intent != Intent::Benign {
            continue;
        }
        let (ticket, bucket) = match &s.action {
            ControlAction::PutBucketPolicy { change_ticket: Some(t), bucket, .. }
            | ControlAction::PutBucketAcl { change_ticket: Some(t), bucket, .. } => (t, bucket),
            _ => continue,
        };
        let mut evidence = vec![EvidenceArtifact::event_id(&s.event_id)];
        // A prior policy review by the same operator corroborates intent.
        let review = ctx.successes().find(|r| {
            r.event_time <= s.event_time
                && r.intent == Intent::Benign
                && !ctx.is_trigger(&r.event_id)
                && matches!(&r.action, ControlAction::GetBucketPolicy { bucket: b } if b == bucket)
        });
        if let Some(review) = review {
            evidence.push(EvidenceArtifact::event_id(&review.event_id));
        }
        out.push(Draft {
            rule_id: "ticketed_change",
            statement: format!(
                "Change ticket {ticket} covers the modification and was filed before the maintenance window began."
            ),
            evidence,
            tools: &["lookup_events", "get_bucket_policy"],
        });
    }
    out
}

fn established_admin(ctx: &Ctx) -> Vec<Draft> {
    let Some(first) = ctx.first_trigger() else {
        return vec![];
    };
    let login = ctx.successes().find(|s| {
        s.intent == Intent::Benign
            && !ctx.is_trigger(&s.event_id)
            && s.actor_label == first.actor_label
            && matches!(s.action, ControlAction::ConsoleLogin { .. })
    });
    let Some(login) = login else {
        return vec![];
    };
    let user_arn = match &login.action {
        ControlAction::ConsoleLogin { user, .. } => user.render(),
        _ => unreachable!("matched above"),
    };
    vec![Draft {
        rule_id: "established_admin",
        statement: format!(
            "Actor {} is an established administrator whose authenticated session predates the flagged activity.",
            first.actor_label
        ),
        evidence: vec![EvidenceArtifact::event_id(&login.event_id), EvidenceArtifact::arn(&user_arn)],
        tools: &["lookup_events", "list_users"],
    }]
}

fn pipeline_provenance(ctx: &Ctx) -> Vec<Draft> {
    let Some(first) = ctx.first_trigger() else {
        return vec![];
    };
    if !first.actor_label.starts_with("cicd-") {
        return vec![];
    }
    let provenance = ctx.successes().find(|s| {
        s.intent == Intent::Benign
            && !ctx.is_trigger(&s.event_id)
            && s.actor_label == first.actor_label
    });
    let Some(provenance) = provenance else {
        return vec![];
    };
    vec![Draft {
        rule_id: "pipeline_provenance",
        statement: format!(
            "The calling identity {} is the scheduled build pipeline running from {}.",
            first.actor_label, provenance.actor.source_ip
        ),
        evidence: vec![
            EvidenceArtifact::event_id(&provenance.event_id),
            EvidenceArtifact::timestamp(provenance.event_time),
        ],
        tools: &["lookup_events", "get_user"],
    }]
}

fn partner_trust(ctx: &Ctx) -> Vec<Draft> {
    let mut cross: Vec<(&TraceStep, String, String)> = Vec::new();
    for s in ctx.successes() {
        let (ControlAction::AssumeRole { role, .. }, Intent::Benign) = (&s.action, s.intent) else {
            continue;
        };
        let Some(caller_account) = ctx.event(s).user_identity.account_id.clone() else {
            continue;
        };
        if caller_account != role.account_id {
            cross.push((s, role.name().to_string(), role.render()));
        }
    }
    let Some((any, role_name, role_arn)) = cross.first() else {
        return vec![];
    };
    // Prefer historical (non-trigger) occurrences as evidence.
    let mut evidence: Vec<EvidenceArtifact> = cross
        .iter()
        .filter(|(s, _, _)| !ctx.is_trigger(&s.event_id))
        .map(|(s, _, _)| EvidenceArtifact::event_id(&s.event_id))
        .collect();
    if evidence.is_empty() {
        evidence.push(EvidenceArtifact::event_id(&any.event_id));
    }
    evidence.push(EvidenceArtifact::arn(role_arn));
    vec![Draft {
        rule_id: "partner_trust",
        statement: format!(
            "Cross-account access matches a provisioned trust relationship allowing {} to assume {role_name}.",
            any.actor_label
        ),
        evidence,
        tools: &["lookup_events", "get_role", "list_role_policies"],
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::scenario::types::EvidenceKind;
    use crate::time::Timestamp;

    fn finding(statement: &str, evidence: usize, tools: usize) -> Finding {
        Finding {
            finding_id: "f-01".to_string(),
            rule_id: "test".to_string(),
            statement: statement.to_string(),
            evidence: (0..evidence)
                .map(|i| EvidenceArtifact::event_id(&format!("e{i}")))
                .collect(),
            required_tools: (0..tools).map(|i| format!("tool{i}")).collect(),
            novel: false,
        }
    }

    fn alert(description: &str) -> Alert {
        Alert {
            alert_id: "a-1".to_string(),
            category: Category::BruteForce,
            description: description.to_string(),
            fired_at: Timestamp::from_millis(0),
            triggering_event_ids: vec!["t1".to_string()],
        }
    }

    #[test]
    fn verbatim_alert_text_is_not_novel() {
        let a = alert("many failed sign-ins were seen for user x from some address");
        let f = finding("many failed sign-ins were seen for user x from some address", 2, 1);
        assert!(!classify_novel(&f, &a, TAU_ALERT));
    }

    #[test]
    fn evidence_and_tools_are_both_required() {
        let a = alert("public bucket exposure alert");
        assert!(!classify_novel(
            &finding("a completely unrelated statement about persistence", 0, 1),
            &a,
            TAU_ALERT
        ));
        assert!(!classify_novel(
            &finding("a completely unrelated statement about persistence", 2, 0),
            &a,
            TAU_ALERT
        ));
        assert!(classify_novel(
            &finding("a completely unrelated statement about persistence", 2, 1),
            &a,
            TAU_ALERT
        ));
    }

    #[test]
    fn near_paraphrase_fails_the_similarity_criterion() {
        let a = alert("multiple failed console sign-in attempts detected for user avery.stone");
        let f = finding(
            "multiple failed console sign-in attempts were detected for user avery.stone",
            1,
            1,
        );
        assert!(rouge_l_text(&f.statement, &a.description) >= TAU_ALERT);
        assert!(!classify_novel(&f, &a, TAU_ALERT));
    }

    #[test]
    fn timestamp_evidence_uses_rfc3339() {
        let e = EvidenceArtifact::timestamp(Timestamp::from_millis(1_700_000_000_123));
        assert_eq!(e.kind, EvidenceKind::Timestamp);
        assert!(e.value.ends_with('Z'));
        assert!(e.value.contains('.'));
    }
}
