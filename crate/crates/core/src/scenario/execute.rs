//! Turns a scenario spec into a full case: provision, run every step
//! against the cloud model, fire the alert, extract ground truth.

use std::collections::BTreeMap;

use super::rulebook::{extract_ground_truth, RULEBOOK_VERSION};
use super::timeline::{compress_timeline, execution_order};
use super::types::{
    ActionTemplate, ActorSpec, Alert, AttackStep, CaseBundle, CaseManifest, ExecutionTrace,
    IpSlot, ObjectSlot, ResourceRef, ScenarioSpec, TraceStep,
};
use super::ScenarioError;
use crate::cloud::{
    apply_control_action, provision_environment, Actor, Arn, ControlAction, Environment,
    PrincipalRef,
};
use crate::telemetry::{CloudEvent, EventLog};

/// Delay between the end of provisioning and the first step at offset 0.
const SCENARIO_LEAD_MS: i64 = 60_000;

/// Identities minted by earlier steps, addressable by step id.
#[derive(Default)]
struct Bindings {
    created_users: BTreeMap<String, Arn>,
    sessions: BTreeMap<String, String>,
}

pub fn execute_scenario(spec: &ScenarioSpec, seed: u64) -> Result<CaseBundle, ScenarioError> {
    spec.validate()?;
    let mut env = provision_environment(&spec.env_spec, seed)?;
    // Normalization: identity for well-formed specs, and a guarantee that
    // dependent steps land strictly later even if offsets tie.
    let steps = compress_timeline(&spec.steps, 1.0);
    let start = env.clock.plus_millis(SCENARIO_LEAD_MS);

    let mut log = EventLog::new();
    let mut trace = ExecutionTrace { category: spec.category, steps: Vec::new() };
    let mut bindings = Bindings::default();

    for idx in execution_order(&steps) {
        let step = &steps[idx];
        let (principal, actor_label) = resolve_actor(&env, &bindings, step)?;
        let actor = Actor { principal, source_ip: resolve_ip(&env, step)? };
        let action = resolve_action(&env, &bindings, step)?;
        let at = start.plus_millis(step.offset_ms);
        let event = apply_control_action(&mut env, &actor, &action, at)
            .map_err(|source| ScenarioError::StepFailed { step_id: step.step_id.clone(), source })?;
        log.append_event(event.clone())?;
        let succeeded = event.succeeded();
        if succeeded {
            bind_outputs(&mut bindings, step, &action, &event)?;
        }
        trace.steps.push(TraceStep {
            step_id: step.step_id.clone(),
            intent: step.intent,
            triggers_alert: step.triggers_alert,
            action,
            actor,
            actor_label,
            event_id: event.event_id.clone(),
            event_time: event.event_time,
            succeeded,
        });
    }

    let alert = build_alert(&mut env, spec, &trace, &log)?;
    let ground_truth = extract_ground_truth(&trace, &log, &alert)?;
    let manifest = CaseManifest {
        case_id: spec.scenario_id.clone(),
        category: spec.category,
        scenario_id: spec.scenario_id.clone(),
        root_seed: seed,
        case_seed: seed,
        rulebook_version: RULEBOOK_VERSION.to_string(),
    };
    Ok(CaseBundle { manifest, environment: env, log, alert, ground_truth })
}

fn unresolved(step_id: &str, reference: String) -> ScenarioError {
    ScenarioError::UnresolvedResource { step_id: step_id.to_string(), reference }
}

fn indexed<'a>(
    list: &'a [Arn],
    index: usize,
    what: &str,
    step_id: &str,
) -> Result<&'a Arn, ScenarioError> {
    list.get(index).ok_or_else(|| {
        unresolved(step_id, format!("{what} index {index} (only {} provisioned)", list.len()))
    })
}

fn resolve_resource(
    env: &Environment,
    bindings: &Bindings,
    rf: &ResourceRef,
    step_id: &str,
) -> Result<Arn, ScenarioError> {
    let arn = match rf {
        ResourceRef::User { index } => indexed(&env.index.users, *index, "user", step_id)?.clone(),
        ResourceRef::PartnerUser => env
            .index
            .partner_user
            .clone()
            .ok_or_else(|| unresolved(step_id, "partner user (none provisioned)".to_string()))?,
        ResourceRef::CreatedUser { step } => bindings
            .created_users
            .get(step)
            .cloned()
            .ok_or_else(|| unresolved(step_id, format!("user created by step {step}")))?,
        ResourceRef::Role { index } => indexed(&env.index.roles, *index, "role", step_id)?.clone(),
        ResourceRef::Bucket { index } => {
            indexed(&env.index.buckets, *index, "bucket", step_id)?.clone()
        }
        ResourceRef::Instance { index } => {
            indexed(&env.index.instances, *index, "instance", step_id)?.clone()
        }
        ResourceRef::SecurityGroup { index } => {
            indexed(&env.index.security_groups, *index, "security group", step_id)?.clone()
        }
    };
    Ok(arn)
}

fn resolve_actor(
    env: &Environment,
    bindings: &Bindings,
    step: &AttackStep,
) -> Result<(PrincipalRef, String), ScenarioError> {
    match &step.actor {
        ActorSpec::User { index } => {
            let arn = indexed(&env.index.users, *index, "user", &step.step_id)?.clone();
            let label = arn.name().to_string();
            Ok((PrincipalRef::Iam { arn }, label))
        }
        ActorSpec::PartnerUser => {
            let arn = env.index.partner_user.clone().ok_or_else(|| {
                unresolved(&step.step_id, "partner user (none provisioned)".to_string())
            })?;
            let label = arn.name().to_string();
            Ok((PrincipalRef::Iam { arn }, label))
        }
        ActorSpec::CreatedUser { step: source } => {
            let arn = bindings.created_users.get(source).cloned().ok_or_else(|| {
                unresolved(&step.step_id, format!("user created by step {source}"))
            })?;
            let label = arn.name().to_string();
            Ok((PrincipalRef::Iam { arn }, label))
        }
        ActorSpec::Session { step: source } => {
            let key = bindings.sessions.get(source).cloned().ok_or_else(|| {
                unresolved(&step.step_id, format!("session issued by step {source}"))
            })?;
            let label = env
                .sessions
                .get(&key)
                .map(|s| s.session_arn.resource_path[1..].join("/"))
                .unwrap_or_else(|| "expired-session".to_string());
            Ok((PrincipalRef::Session { access_key_id: key }, label))
        }
        ActorSpec::Anonymous => Ok((PrincipalRef::Anonymous, "anonymous".to_string())),
    }
}

fn resolve_ip(env: &Environment, step: &AttackStep) -> Result<String, ScenarioError> {
    let pool = |list: &[String], index: usize, what: &str| {
        if list.is_empty() {
            Err(unresolved(&step.step_id, format!("{what} address pool is empty")))
        } else {
            Ok(list[index % list.len()].clone())
        }
    };
    match &step.ip {
        IpSlot::Internal { index } => pool(&env.index.internal_ips, *index, "internal"),
        IpSlot::External { index } => pool(&env.index.external_ips, *index, "external"),
        IpSlot::Fixed { ip } => Ok(ip.clone()),
    }
}

fn resolve_object(
    env: &Environment,
    bucket: &str,
    slot: &ObjectSlot,
    step_id: &str,
) -> Result<String, ScenarioError> {
    match slot {
        ObjectSlot::Named { key } => Ok(key.clone()),
        ObjectSlot::Existing { index } => {
            let found = env
                .find_bucket(bucket)
                .ok_or_else(|| unresolved(step_id, format!("bucket {bucket}")))?;
            if found.objects.is_empty() {
                return Err(unresolved(step_id, format!("bucket {bucket} has no objects")));
            }
            Ok(found.objects[index % found.objects.len()].key.clone())
        }
    }
}

fn resolve_action(
    env: &Environment,
    bindings: &Bindings,
    step: &AttackStep,
) -> Result<ControlAction, ScenarioError> {
    let sid = &step.step_id;
    let resource = |rf: &ResourceRef| resolve_resource(env, bindings, rf, sid);
    let bucket_name =
        |rf: &ResourceRef| resource(rf).map(|arn| arn.name().to_string());
    let instance_id = bucket_name;
    Ok(match &step.action {
        ActionTemplate::ConsoleLogin { user, password_ok } => ControlAction::ConsoleLogin {
            user: resource(user)?,
            password_ok: *password_ok,
        },
        ActionTemplate::AssumeRole { role, session_name } => ControlAction::AssumeRole {
            role: resource(role)?,
            session_name: session_name.clone(),
        },
        ActionTemplate::GetCallerIdentity => ControlAction::GetCallerIdentity,
        ActionTemplate::CreateUser { name } => ControlAction::CreateUser { name: name.clone() },
        ActionTemplate::CreateAccessKey { user } => {
            ControlAction::CreateAccessKey { user: resource(user)? }
        }
        ActionTemplate::CreateLoginProfile { user } => {
            ControlAction::CreateLoginProfile { user: resource(user)? }
        }
        ActionTemplate::AttachUserPolicy { user, policy_name, admin } => {
            ControlAction::AttachUserPolicy {
                user: resource(user)?,
                policy_name: policy_name.clone(),
                admin: *admin,
            }
        }
        ActionTemplate::ListUsers => ControlAction::ListUsers,
        ActionTemplate::ListBuckets => ControlAction::ListBuckets,
        ActionTemplate::ListObjects { bucket } => {
            ControlAction::ListObjects { bucket: bucket_name(bucket)? }
        }
        ActionTemplate::GetObject { bucket, object } => {
            let bucket = bucket_name(bucket)?;
            let key = resolve_object(env, &bucket, object, sid)?;
            ControlAction::GetObject { bucket, key }
        }
        ActionTemplate::CopyObject { bucket, object, destination } => {
            let bucket = bucket_name(bucket)?;
            let key = resolve_object(env, &bucket, object, sid)?;
            ControlAction::CopyObject { bucket, key, destination: destination.clone() }
        }
        ActionTemplate::PutObject { bucket, key, size_bytes } => ControlAction::PutObject {
            bucket: bucket_name(bucket)?,
            key: key.clone(),
            size_bytes: *size_bytes,
        },
        ActionTemplate::PutBucketPolicy { bucket, public, change_ticket } => {
            ControlAction::PutBucketPolicy {
                bucket: bucket_name(bucket)?,
                public: *public,
                change_ticket: change_ticket.clone(),
            }
        }
        ActionTemplate::PutBucketAcl { bucket, public, change_ticket } => {
            ControlAction::PutBucketAcl {
                bucket: bucket_name(bucket)?,
                public: *public,
                change_ticket: change_ticket.clone(),
            }
        }
        ActionTemplate::GetBucketPolicy { bucket } => {
            ControlAction::GetBucketPolicy { bucket: bucket_name(bucket)? }
        }
        ActionTemplate::DescribeInstances => ControlAction::DescribeInstances,
        ActionTemplate::StopInstances { instance } => {
            ControlAction::StopInstances { instance_id: instance_id(instance)? }
        }
        ActionTemplate::TerminateInstances { instance } => {
            ControlAction::TerminateInstances { instance_id: instance_id(instance)? }
        }
        ActionTemplate::AuthorizeSecurityGroupIngress { group, port, cidr } => {
            ControlAction::AuthorizeSecurityGroupIngress {
                group_id: instance_id(group)?,
                port: *port,
                cidr: cidr.clone(),
            }
        }
        ActionTemplate::SendCommand { instance, command } => ControlAction::SendCommand {
            instance_id: instance_id(instance)?,
            command: command.clone(),
        },
        ActionTemplate::StartAutomationExecution { instance, command } => {
            ControlAction::StartAutomationExecution {
                instance_id: instance_id(instance)?,
                command: command.clone(),
            }
        }
        ActionTemplate::StopLogging => ControlAction::StopLogging,
    })
}

/// Records identities a successful step minted so later steps can act as
/// them.
fn bind_outputs(
    bindings: &mut Bindings,
    step: &AttackStep,
    action: &ControlAction,
    event: &CloudEvent,
) -> Result<(), ScenarioError> {
    match action {
        ControlAction::CreateUser { .. } => {
            let raw = event.response_elements.get("user_arn").ok_or_else(|| {
                ScenarioError::Extraction {
                    reason: format!("step {} created no user_arn", step.step_id),
                }
            })?;
            let arn = Arn::parse(raw).map_err(|e| ScenarioError::Extraction {
                reason: format!("step {}: {e}", step.step_id),
            })?;
            bindings.created_users.insert(step.step_id.clone(), arn);
        }
        ControlAction::AssumeRole { .. } => {
            let key = event.response_elements.get("access_key_id").ok_or_else(|| {
                ScenarioError::Extraction {
                    reason: format!("step {} issued no access key", step.step_id),
                }
            })?;
            bindings.sessions.insert(step.step_id.clone(), key.clone());
        }
        _ => {}
    }
    Ok(())
}

/// Instantiates the alert from the first triggering step's event.
fn build_alert(
    env: &mut Environment,
    spec: &ScenarioSpec,
    trace: &ExecutionTrace,
    log: &EventLog,
) -> Result<Alert, ScenarioError> {
    let triggers: Vec<&TraceStep> = trace.steps.iter().filter(|s| s.triggers_alert).collect();
    let first = *triggers.first().ok_or_else(|| ScenarioError::Extraction {
        reason: "no triggering step executed".to_string(),
    })?;
    let event = log.by_id(&first.event_id).ok_or_else(|| ScenarioError::Extraction {
        reason: format!("trigger event {} missing from log", first.event_id),
    })?;

    let mut ctx: BTreeMap<&str, String> = BTreeMap::new();
    ctx.insert("user", first.actor_label.clone());
    ctx.insert("source_ip", event.source_ip.clone());
    ctx.insert("region", event.region.clone());
    ctx.insert("time", event.event_time.to_rfc3339());
    ctx.insert("trigger_count", triggers.len().to_string());
    ctx.insert(
        "account",
        event.user_identity.account_id.clone().unwrap_or_else(|| "external".to_string()),
    );
    match &first.action {
        ControlAction::AssumeRole { role, .. } => {
            ctx.insert("role", role.name().to_string());
        }
        ControlAction::ListObjects { bucket }
        | ControlAction::GetObject { bucket, .. }
        | ControlAction::CopyObject { bucket, .. }
        | ControlAction::PutObject { bucket, .. }
        | ControlAction::PutBucketPolicy { bucket, .. }
        | ControlAction::PutBucketAcl { bucket, .. }
        | ControlAction::GetBucketPolicy { bucket } => {
            ctx.insert("bucket", bucket.clone());
        }
        ControlAction::StopInstances { instance_id }
        | ControlAction::TerminateInstances { instance_id } => {
            ctx.insert("instance", instance_id.clone());
        }
        ControlAction::SendCommand { instance_id, .. } => {
            ctx.insert("instance", instance_id.clone());
            ctx.insert("document", "AWS-RunShellScript".to_string());
        }
        ControlAction::StartAutomationExecution { instance_id, .. } => {
            ctx.insert("instance", instance_id.clone());
            ctx.insert("document", "AWS-RunAutomation".to_string());
        }
        ControlAction::AuthorizeSecurityGroupIngress { group_id, port, .. } => {
            ctx.insert("sg", group_id.clone());
            ctx.insert("port", port.to_string());
        }
        _ => {}
    }

    let mut description = spec.alert_template.clone();
    for (slot, value) in &ctx {
        description = description.replace(&format!("{{{slot}}}"), value);
    }
    if let Some(open) = description.find('{') {
        let rest = &description[open + 1..];
        let slot = rest.split('}').next().unwrap_or(rest).to_string();
        return Err(ScenarioError::AlertSlot { slot });
    }

    Ok(Alert {
        alert_id: env.next_event_id(),
        category: spec.category,
        description,
        fired_at: triggers.last().expect("non-empty").event_time,
        triggering_event_ids: triggers.iter().map(|t| t.event_id.clone()).collect(),
    })
}
