//! The investigation tool surface.
//!
//! Twelve read-only tools over a public case: filtered audit-log queries,
//! the account's IAM, S3, and EC2 state as it stands after the incident,
//! and a per-service daily cost ledger derived from the log. Answers come
//! exclusively from the [`PublicCase`]; ground truth is not reachable from
//! here. Errors are returned as strings shaped to help an agent self-
//! correct: unknown tools list the catalog, bad parameters restate the
//! tool's schema.

use serde_json::{json, Map, Value};

use crate::cloud::{Account, IamPrincipal, PrincipalKind};
use crate::scenario::PublicCase;
use crate::telemetry::{lookup_events, EventQuery};
use crate::time::Timestamp;

/// Upper bound on `max_results` for log queries.
pub const MAX_LOOKUP_RESULTS: usize = 500;

/// Default page size for log queries.
pub const DEFAULT_LOOKUP_RESULTS: usize = 50;

/// Default key cap for object listings.
const DEFAULT_MAX_KEYS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    /// `"string"` or `"integer"`.
    pub kind: &'static str,
    pub required: bool,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ToolSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
}

const fn opt(name: &'static str, kind: &'static str, description: &'static str) -> ParamSpec {
    ParamSpec { name, kind, required: false, description }
}

const fn req(name: &'static str, kind: &'static str, description: &'static str) -> ParamSpec {
    ParamSpec { name, kind, required: true, description }
}

pub const TOOL_CATALOG: &[ToolSpec] = &[
    ToolSpec {
        name: "lookup_events",
        description: "Query the audit log with optional filters; paginated.",
        params: &[
            opt("start", "string", "RFC3339 inclusive lower bound; defaults to the first event"),
            opt("end", "string", "RFC3339 exclusive upper bound; defaults to just past the last event"),
            opt("event_name", "string", "exact event name, e.g. ConsoleLogin"),
            opt("principal", "string", "acting identity, as a full ARN or an access key id"),
            opt("resource", "string", "resource ARN matched against event payloads"),
            opt("max_results", "integer", "page size, 1..=500 (default 50)"),
            opt("page_token", "string", "token from a previous page"),
        ],
    },
    ToolSpec {
        name: "list_users",
        description: "IAM users in the account.",
        params: &[],
    },
    ToolSpec {
        name: "get_user",
        description: "One user's keys, console access, and attached policies.",
        params: &[req("user_name", "string", "exact user name")],
    },
    ToolSpec {
        name: "list_roles",
        description: "IAM roles in the account.",
        params: &[],
    },
    ToolSpec {
        name: "get_role",
        description: "One role's trust policy and attached policy names.",
        params: &[req("role_name", "string", "exact role name")],
    },
    ToolSpec {
        name: "list_role_policies",
        description: "Full permission statements attached to a role.",
        params: &[req("role_name", "string", "exact role name")],
    },
    ToolSpec {
        name: "list_buckets",
        description: "Storage buckets in the account.",
        params: &[],
    },
    ToolSpec {
        name: "get_bucket_policy",
        description: "One bucket's access policy and public flag.",
        params: &[req("bucket_name", "string", "exact bucket name")],
    },
    ToolSpec {
        name: "list_objects",
        description: "Object keys in a bucket.",
        params: &[
            req("bucket_name", "string", "exact bucket name"),
            opt("max_keys", "integer", "cap on returned keys (default 100)"),
        ],
    },
    ToolSpec {
        name: "describe_instances",
        description: "Compute instances and their current state.",
        params: &[],
    },
    ToolSpec {
        name: "describe_security_groups",
        description: "Security groups and their ingress rules.",
        params: &[],
    },
    ToolSpec {
        name: "get_cost_and_usage",
        description: "API call counts and cost per service per day.",
        params: &[
            opt("start", "string", "RFC3339 inclusive lower bound"),
            opt("end", "string", "RFC3339 exclusive upper bound"),
        ],
    },
];

pub fn find_tool(name: &str) -> Option<&'static ToolSpec> {
    TOOL_CATALOG.iter().find(|t| t.name == name)
}

fn tool_names() -> String {
    TOOL_CATALOG.iter().map(|t| t.name).collect::<Vec<_>>().join(", ")
}

/// `name({param: kind, optional?: kind})`, for error messages.
fn schema_hint(spec: &ToolSpec) -> String {
    let params: Vec<String> = spec
        .params
        .iter()
        .map(|p| {
            if p.required {
                format!("{}: {}", p.name, p.kind)
            } else {
                format!("{}?: {}", p.name, p.kind)
            }
        })
        .collect();
    format!("{}({{{}}})", spec.name, params.join(", "))
}

/// Answers one tool call against the public view of a case.
pub fn answer_tool_call(case: &PublicCase, tool: &str, params: &Value) -> Result<Value, String> {
    let spec = find_tool(tool)
        .ok_or_else(|| format!("unknown tool {tool:?}; available tools: {}", tool_names()))?;
    let args = checked_args(spec, params)?;
    match spec.name {
        "lookup_events" => run_lookup(case, &args),
        "list_users" => Ok(list_principals(main_account(case), PrincipalKind::User, "users")),
        "get_user" => get_user(case, &args),
        "list_roles" => Ok(list_principals(main_account(case), PrincipalKind::Role, "roles")),
        "get_role" => get_role(case, &args),
        "list_role_policies" => list_role_policies(case, &args),
        "list_buckets" => Ok(list_buckets(case)),
        "get_bucket_policy" => get_bucket_policy(case, &args),
        "list_objects" => list_objects(case, &args),
        "describe_instances" => Ok(describe_instances(case)),
        "describe_security_groups" => Ok(describe_security_groups(case)),
        "get_cost_and_usage" => cost_and_usage(case, &args),
        _ => unreachable!("catalog and dispatch cover the same names"),
    }
}

/// Validates the parameter object against the tool's schema.
fn checked_args(spec: &ToolSpec, params: &Value) -> Result<Map<String, Value>, String> {
    let bad = |problem: String| {
        Err(format!("invalid parameters for {}: {problem}; expected {}", spec.name, schema_hint(spec)))
    };
    let map = match params {
        Value::Null => Map::new(),
        Value::Object(map) => map.clone(),
        other => return bad(format!("parameters must be an object, got {other}")),
    };
    for key in map.keys() {
        if !spec.params.iter().any(|p| p.name == key) {
            return bad(format!("unknown parameter {key:?}"));
        }
    }
    for param in spec.params {
        match map.get(param.name) {
            None if param.required => return bad(format!("missing required parameter {:?}", param.name)),
            None => {}
            Some(value) => {
                let ok = match param.kind {
                    "string" => value.is_string(),
                    "integer" => value.is_u64(),
                    other => unreachable!("unknown param kind {other}"),
                };
                if !ok {
                    return bad(format!("parameter {:?} must be a {}", param.name, param.kind));
                }
            }
        }
    }
    Ok(map)
}

fn str_arg<'a>(args: &'a Map<String, Value>, key: &str) -> Option<&'a str> {
    args.get(key).and_then(Value::as_str)
}

fn time_arg(args: &Map<String, Value>, key: &str, tool: &str) -> Result<Option<Timestamp>, String> {
    match str_arg(args, key) {
        None => Ok(None),
        Some(raw) => Timestamp::parse(raw)
            .map(Some)
            .map_err(|e| format!("invalid parameters for {tool}: {key} {e}")),
    }
}

fn main_account(case: &PublicCase) -> &Account {
    case.environment.main_account()
}

fn run_lookup(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let events = case.log.events();
    let default_start =
        events.first().map(|e| e.event_time).unwrap_or(case.alert.fired_at);
    let default_end = events
        .last()
        .map(|e| e.event_time.plus_millis(1))
        .unwrap_or(case.alert.fired_at);

    let start = time_arg(args, "start", "lookup_events")?.unwrap_or(default_start);
    let end = time_arg(args, "end", "lookup_events")?.unwrap_or(default_end);
    let mut query = EventQuery::over(start, end);
    query.event_name = str_arg(args, "event_name").map(str::to_string);
    query.principal = str_arg(args, "principal").map(str::to_string);
    query.resource = str_arg(args, "resource").map(str::to_string);
    query.page_token = str_arg(args, "page_token").map(str::to_string);
    if let Some(n) = args.get("max_results").and_then(Value::as_u64) {
        if n == 0 || n as usize > MAX_LOOKUP_RESULTS {
            return Err(format!(
                "invalid parameters for lookup_events: max_results must be 1..={MAX_LOOKUP_RESULTS}"
            ));
        }
        query.max_results = n as usize;
    } else {
        query.max_results = DEFAULT_LOOKUP_RESULTS;
    }

    let page = lookup_events(&case.log, &query).map_err(|e| format!("lookup_events: {e}"))?;
    serde_json::to_value(page).map_err(|e| format!("lookup_events: {e}"))
}

fn list_principals(account: &Account, kind: PrincipalKind, label: &str) -> Value {
    let rows: Vec<Value> = account
        .principals
        .values()
        .filter(|p| p.kind == kind)
        .map(|p| {
            json!({
                "name": p.name,
                "arn": p.arn.render(),
                "created_at": p.created_at.to_rfc3339(),
            })
        })
        .collect();
    json!({ label: rows })
}

fn principal<'a>(
    case: &'a PublicCase,
    kind: PrincipalKind,
    name: &str,
    tool: &str,
) -> Result<&'a IamPrincipal, String> {
    let prefix = match kind {
        PrincipalKind::User => "user",
        PrincipalKind::Role => "role",
    };
    main_account(case)
        .principals
        .get(&format!("{prefix}/{name}"))
        .filter(|p| p.kind == kind)
        .ok_or_else(|| {
            format!(
                "{tool}: no {prefix} named {name:?} in account {}",
                case.environment.main_account_id
            )
        })
}

fn get_user(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let name = str_arg(args, "user_name").expect("schema enforces user_name");
    let user = principal(case, PrincipalKind::User, name, "get_user")?;
    let keys: Vec<Value> = user
        .access_keys
        .iter()
        .map(|k| json!({ "access_key_id": k.key_id, "created_at": k.created_at.to_rfc3339() }))
        .collect();
    Ok(json!({
        "name": user.name,
        "arn": user.arn.render(),
        "created_at": user.created_at.to_rfc3339(),
        "login_profile": user.login_profile,
        "access_keys": keys,
        "attached_policies": user.policies.keys().collect::<Vec<_>>(),
    }))
}

fn get_role(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let name = str_arg(args, "role_name").expect("schema enforces role_name");
    let role = principal(case, PrincipalKind::Role, name, "get_role")?;
    Ok(json!({
        "name": role.name,
        "arn": role.arn.render(),
        "created_at": role.created_at.to_rfc3339(),
        "trust_policy": role.trust_policy,
        "attached_policies": role.policies.keys().collect::<Vec<_>>(),
    }))
}

fn list_role_policies(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let name = str_arg(args, "role_name").expect("schema enforces role_name");
    let role = principal(case, PrincipalKind::Role, name, "list_role_policies")?;
    let policies: Vec<Value> = role
        .policies
        .iter()
        .map(|(policy_name, doc)| json!({ "policy_name": policy_name, "statements": doc.statements }))
        .collect();
    Ok(json!({ "role_name": role.name, "policies": policies }))
}

fn list_buckets(case: &PublicCase) -> Value {
    let rows: Vec<Value> = main_account(case)
        .buckets
        .values()
        .map(|b| {
            json!({
                "name": b.name,
                "arn": b.arn.render(),
                "object_count": b.objects.len(),
                "created_at": b.created_at.to_rfc3339(),
            })
        })
        .collect();
    json!({ "buckets": rows })
}

fn bucket<'a>(
    case: &'a PublicCase,
    args: &Map<String, Value>,
    tool: &str,
) -> Result<&'a crate::cloud::S3Bucket, String> {
    let name = str_arg(args, "bucket_name").expect("schema enforces bucket_name");
    main_account(case)
        .buckets
        .get(name)
        .ok_or_else(|| format!("{tool}: no bucket named {name:?}"))
}

fn get_bucket_policy(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let bucket = bucket(case, args, "get_bucket_policy")?;
    Ok(json!({
        "bucket": bucket.name,
        "public": bucket.public,
        "policy": bucket.policy,
    }))
}

fn list_objects(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let bucket = bucket(case, args, "list_objects")?;
    let cap = args.get("max_keys").and_then(Value::as_u64).map(|n| n as usize);
    let cap = cap.unwrap_or(DEFAULT_MAX_KEYS).max(1);
    let objects: Vec<Value> = bucket
        .objects
        .iter()
        .take(cap)
        .map(|o| {
            json!({
                "key": o.key,
                "size_bytes": o.size_bytes,
                "last_modified": o.last_modified.to_rfc3339(),
            })
        })
        .collect();
    Ok(json!({
        "bucket": bucket.name,
        "objects": objects,
        "truncated": bucket.objects.len() > cap,
    }))
}

fn describe_instances(case: &PublicCase) -> Value {
    let rows: Vec<Value> = main_account(case)
        .instances
        .values()
        .map(|i| {
            json!({
                "instance_id": i.instance_id,
                "arn": i.arn.render(),
                "state": i.state,
                "profile_role": i.profile_role.as_ref().map(|a| a.render()),
                "ssm_agent": i.ssm_agent,
                "launched_at": i.launched_at.to_rfc3339(),
            })
        })
        .collect();
    json!({ "instances": rows })
}

fn describe_security_groups(case: &PublicCase) -> Value {
    let rows: Vec<Value> = main_account(case)
        .security_groups
        .values()
        .map(|g| {
            json!({
                "group_id": g.group_id,
                "name": g.name,
                "ingress": g.ingress,
            })
        })
        .collect();
    json!({ "security_groups": rows })
}

/// Micro-USD charged per recorded call, by event name. Values are flat
/// and fictional; what matters downstream is that unusual activity moves
/// the per-service daily totals.
fn price_micro_usd(event_name: &str) -> u64 {
    match event_name {
        "ConsoleLogin" => 0,
        "GetCallerIdentity" => 2,
        "GetObject" => 4,
        "ListBuckets" | "ListObjects" | "GetBucketPolicy" => 6,
        "AssumeRole" => 8,
        "CopyObject" | "PutObject" => 9,
        "DescribeInstances" => 10,
        "ListUsers" => 12,
        "PutBucketPolicy" | "PutBucketAcl" => 15,
        "AuthorizeSecurityGroupIngress" => 20,
        "CreateUser" | "CreateAccessKey" | "CreateLoginProfile" | "AttachUserPolicy" => 25,
        "StopInstances" | "TerminateInstances" => 35,
        "StopLogging" => 40,
        "SendCommand" | "StartAutomationExecution" => 60,
        _ => 5,
    }
}

fn cost_and_usage(case: &PublicCase, args: &Map<String, Value>) -> Result<Value, String> {
    let start = time_arg(args, "start", "get_cost_and_usage")?;
    let end = time_arg(args, "end", "get_cost_and_usage")?;

    let mut rows: std::collections::BTreeMap<(String, String), (u64, u64)> =
        std::collections::BTreeMap::new();
    for event in case.log.events() {
        if start.is_some_and(|s| event.event_time < s) || end.is_some_and(|e| event.event_time >= e)
        {
            continue;
        }
        let service = event
            .event_source
            .strip_suffix(".amazonaws.com")
            .unwrap_or(&event.event_source)
            .to_string();
        let entry = rows.entry((service, event.event_time.day())).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += price_micro_usd(&event.event_name);
    }

    let mut total = 0u64;
    let table: Vec<Value> = rows
        .into_iter()
        .map(|((service, day), (calls, cost))| {
            total += cost;
            json!({ "service": service, "day": day, "calls": calls, "cost_micro_usd": cost })
        })
        .collect();
    Ok(json!({ "rows": table, "total_micro_usd": total }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::scenario::execute_scenario;
    use crate::variation::tp_seeds;

    fn public_case() -> PublicCase {
        let seed = &tp_seeds(Category::BruteForce)[0];
        let bundle = execute_scenario(seed, 5).unwrap();
        PublicCase::from_bundle(&bundle)
    }

    #[test]
    fn unknown_tool_names_the_catalog() {
        let case = public_case();
        let err = answer_tool_call(&case, "dump_ground_truth", &Value::Null).unwrap_err();
        assert!(err.contains("unknown tool"));
        assert!(err.contains("lookup_events"));
        assert!(err.contains("get_cost_and_usage"));
    }

    #[test]
    fn bad_parameters_restate_the_schema() {
        let case = public_case();
        let err = answer_tool_call(&case, "get_user", &json!({})).unwrap_err();
        assert!(err.contains("missing required parameter"), "{err}");
        assert!(err.contains("get_user({user_name: string})"), "{err}");

        let err =
            answer_tool_call(&case, "lookup_events", &json!({"max_result": 10})).unwrap_err();
        assert!(err.contains("unknown parameter"), "{err}");

        let err = answer_tool_call(&case, "get_user", &json!({"user_name": 4})).unwrap_err();
        assert!(err.contains("must be a string"), "{err}");
    }

    #[test]
    fn lookup_pagination_reassembles_the_whole_log() {
        let case = public_case();
        let mut collected = Vec::new();
        let mut token: Option<String> = None;
        loop {
            let mut params = json!({ "max_results": 7 });
            if let Some(t) = &token {
                params["page_token"] = json!(t);
            }
            let page = answer_tool_call(&case, "lookup_events", &params).unwrap();
            let events = page["events"].as_array().unwrap();
            collected.extend(events.iter().map(|e| e["event_id"].as_str().unwrap().to_string()));
            match page["next_page_token"].as_str() {
                Some(t) => token = Some(t.to_string()),
                None => break,
            }
        }
        let expected: Vec<String> =
            case.log.events().iter().map(|e| e.event_id.clone()).collect();
        assert_eq!(collected, expected);
    }

    #[test]
    fn lookup_filter_matches_a_linear_scan() {
        let case = public_case();
        let page = answer_tool_call(
            &case,
            "lookup_events",
            &json!({ "event_name": "ConsoleLogin", "max_results": 500 }),
        )
        .unwrap();
        let got = page["events"].as_array().unwrap().len();
        let expected =
            case.log.events().iter().filter(|e| e.event_name == "ConsoleLogin").count();
        assert_eq!(got, expected);
        assert!(got >= 18, "the spray script logs in a lot");
    }

    #[test]
    fn state_tools_reflect_the_post_incident_environment() {
        let case = public_case();

        let users = answer_tool_call(&case, "list_users", &Value::Null).unwrap();
        let names: Vec<&str> =
            users["users"].as_array().unwrap().iter().map(|u| u["name"].as_str().unwrap()).collect();
        assert!(names.contains(&"svc-metrics-agent"), "{names:?}");

        let minted =
            answer_tool_call(&case, "get_user", &json!({"user_name": "svc-metrics-agent"}))
                .unwrap();
        assert_eq!(minted["login_profile"], json!(true));
        assert_eq!(minted["access_keys"].as_array().unwrap().len(), 1);
        assert!(minted["attached_policies"]
            .as_array()
            .unwrap()
            .iter()
            .any(|p| p == "AdministratorAccess"));
    }

    #[test]
    fn bucket_tools_expose_policy_state() {
        let seed = &tp_seeds(Category::Misconfiguration)[0];
        let bundle = execute_scenario(seed, 5).unwrap();
        let case = PublicCase::from_bundle(&bundle);

        let buckets = answer_tool_call(&case, "list_buckets", &Value::Null).unwrap();
        let names: Vec<String> = buckets["buckets"]
            .as_array()
            .unwrap()
            .iter()
            .map(|b| b["name"].as_str().unwrap().to_string())
            .collect();
        let public = names
            .iter()
            .map(|name| {
                answer_tool_call(&case, "get_bucket_policy", &json!({"bucket_name": name}))
                    .unwrap()
            })
            .filter(|policy| policy["public"] == json!(true))
            .count();
        assert_eq!(public, 1, "the exposure scenario leaves one bucket public");

        let missing =
            answer_tool_call(&case, "get_bucket_policy", &json!({"bucket_name": "nope"}))
                .unwrap_err();
        assert!(missing.contains("no bucket named"));
    }

    #[test]
    fn cost_rows_fold_the_whole_log() {
        let case = public_case();
        let cost = answer_tool_call(&case, "get_cost_and_usage", &Value::Null).unwrap();
        let rows = cost["rows"].as_array().unwrap();
        assert!(!rows.is_empty());
        let calls: u64 = rows.iter().map(|r| r["calls"].as_u64().unwrap()).sum();
        assert_eq!(calls as usize, case.log.events().len());
        let total: u64 = rows.iter().map(|r| r["cost_micro_usd"].as_u64().unwrap()).sum();
        assert_eq!(cost["total_micro_usd"].as_u64().unwrap(), total);
        let s3_spend: u64 = rows
            .iter()
            .filter(|r| r["service"] == "s3")
            .map(|r| r["cost_micro_usd"].as_u64().unwrap())
            .sum();
        assert!(s3_spend > 0, "bulk reads show up in the ledger");
    }

    #[test]
    fn every_catalog_entry_dispatches() {
        let case = public_case();
        for spec in TOOL_CATALOG {
            let params = match spec.name {
                "get_user" => json!({"user_name": "no-such-user"}),
                "get_role" | "list_role_policies" => json!({"role_name": "no-such-role"}),
                "get_bucket_policy" | "list_objects" => json!({"bucket_name": "no-such-bucket"}),
                _ => Value::Null,
            };
            // Resolution errors are fine; schema or dispatch panics are not.
            let _ = answer_tool_call(&case, spec.name, &params);
        }
    }
}
