//! Reference agents.
//!
//! Deterministic investigators that calibrate the benchmark and exercise
//! the harness: a ground-truth oracle (score ceiling), an alert parrot
//! (adversarial floor), a seeded random walker, a keyword heuristic (an
//! honest mid-tier baseline), and crash/loop agents for the failure
//! paths. All of them run either in process through [`InProcessEndpoint`]
//! or over real stdio through [`run_stdio_agent`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{BufRead, Write};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde_json::{json, Value};

use crate::scenario::{Alert, CaseBundle, Verdict};
use crate::seeded::rng_from;

use super::protocol::{AgentMsg, Claim, HarnessMsg, InvestigationReport};
use super::session::{AgentEndpoint, EndState, RecvOutcome};
use super::tools::TOOL_CATALOG;
use super::HarnessError;

/// What an agent wants to do next.
#[derive(Debug, Clone)]
pub enum AgentAction {
    Call { tool: String, params: Value },
    Report(InvestigationReport),
    /// Stop cleanly without reporting.
    Quit,
    /// Fail hard: dirty exit over stdio, protocol error in process.
    Abort { reason: String },
}

/// The harness's answer to the last call, borrowed for the observer.
#[derive(Debug, Clone, Copy)]
pub struct ToolReply<'a> {
    pub ok: bool,
    pub data: Option<&'a Value>,
    pub error: Option<&'a str>,
}

/// A deterministic investigator driven by the harness.
pub trait ScriptedAgent: Send {
    fn start(&mut self, case_id: &str, category: &str, alert: &Alert);
    fn observe(&mut self, reply: ToolReply<'_>);
    fn step(&mut self) -> AgentAction;
}

/// Adapts a [`ScriptedAgent`] to the endpoint interface so sessions can
/// run without a child process. Call ids are assigned here.
pub struct InProcessEndpoint {
    agent: Box<dyn ScriptedAgent>,
    pending: Option<AgentAction>,
    calls: usize,
}

impl InProcessEndpoint {
    pub fn new(agent: Box<dyn ScriptedAgent>) -> Self {
        InProcessEndpoint { agent, pending: None, calls: 0 }
    }
}

impl AgentEndpoint for InProcessEndpoint {
    fn send(&mut self, msg: &HarnessMsg) -> Result<(), HarnessError> {
        match msg {
            HarnessMsg::CaseStart { case_id, category, alert, .. } => {
                self.agent.start(case_id, category, alert);
            }
            HarnessMsg::ToolResult { ok, data, error, .. } => {
                self.agent.observe(ToolReply {
                    ok: *ok,
                    data: data.as_ref(),
                    error: error.as_deref(),
                });
            }
        }
        self.pending = Some(self.agent.step());
        Ok(())
    }

    fn recv(&mut self, _timeout: Duration) -> Result<RecvOutcome, HarnessError> {
        match self.pending.take() {
            None => Ok(RecvOutcome::Eof),
            Some(AgentAction::Quit) => Ok(RecvOutcome::Eof),
            Some(AgentAction::Abort { reason }) => {
                Err(HarnessError::Agent(format!("agent aborted: {reason}")))
            }
            Some(AgentAction::Report(report)) => {
                Ok(RecvOutcome::Msg(AgentMsg::FinalReport { report }))
            }
            Some(AgentAction::Call { tool, params }) => {
                self.calls += 1;
                Ok(RecvOutcome::Msg(AgentMsg::ToolCall {
                    call_id: format!("call-{}", self.calls),
                    tool,
                    params,
                }))
            }
        }
    }

    fn close(&mut self) -> EndState {
        EndState::Clean
    }
}

/// Drives one agent over real stdin/stdout. Handles exactly one case and
/// returns; the factory sees the opening message so agents can load
/// per-case context first. [`AgentAction::Abort`] exits the process.
pub fn run_stdio_agent<F>(make: F) -> Result<(), HarnessError>
where
    F: FnOnce(&str, &str, &Alert) -> Result<Box<dyn ScriptedAgent>, HarnessError>,
{
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut out = std::io::stdout().lock();

    let Some(first) = lines.next() else { return Ok(()) };
    let HarnessMsg::CaseStart { case_id, category, alert, .. } =
        serde_json::from_str(&first?)?
    else {
        return Err(HarnessError::Protocol("expected case_start first".to_string()));
    };
    let mut agent = make(&case_id, &category, &alert)?;
    agent.start(&case_id, &category, &alert);

    let mut calls = 0usize;
    loop {
        match agent.step() {
            AgentAction::Call { tool, params } => {
                calls += 1;
                let msg = AgentMsg::ToolCall { call_id: format!("call-{calls}"), tool, params };
                writeln!(out, "{}", serde_json::to_string(&msg)?)?;
                out.flush()?;
                // The harness hanging up mid-call is a normal end of session.
                let Some(line) = lines.next() else { return Ok(()) };
                let HarnessMsg::ToolResult { ok, data, error, .. } =
                    serde_json::from_str(&line?)?
                else {
                    return Err(HarnessError::Protocol("expected tool_result".to_string()));
                };
                agent.observe(ToolReply { ok, data: data.as_ref(), error: error.as_deref() });
            }
            AgentAction::Report(report) => {
                let msg = AgentMsg::FinalReport { report };
                writeln!(out, "{}", serde_json::to_string(&msg)?)?;
                out.flush()?;
                return Ok(());
            }
            AgentAction::Quit => return Ok(()),
            AgentAction::Abort { reason } => {
                eprintln!("agent aborting: {reason}");
                std::process::exit(2);
            }
        }
    }
}

/// Replays the ground truth verbatim: the expected tools for the
/// category, then every finding as a claim with its evidence. This is the
/// benchmark's score ceiling, not a contestant.
pub struct OracleAgent {
    plan: VecDeque<(String, Value)>,
    report: InvestigationReport,
}

impl OracleAgent {
    pub fn from_bundle(bundle: &CaseBundle) -> Self {
        let account = bundle.environment.main_account();
        let named_params = |tool: &str| -> Value {
            let first_user = account
                .principals
                .values()
                .find(|p| p.kind == crate::cloud::PrincipalKind::User)
                .map(|p| p.name.clone())
                .unwrap_or_default();
            let first_role = account
                .principals
                .values()
                .find(|p| p.kind == crate::cloud::PrincipalKind::Role)
                .map(|p| p.name.clone())
                .unwrap_or_default();
            let first_bucket =
                account.buckets.values().next().map(|b| b.name.clone()).unwrap_or_default();
            match tool {
                "get_user" => json!({ "user_name": first_user }),
                "get_role" | "list_role_policies" => json!({ "role_name": first_role }),
                "get_bucket_policy" | "list_objects" => json!({ "bucket_name": first_bucket }),
                _ => json!({}),
            }
        };

        let mut planned = BTreeSet::new();
        let mut plan = VecDeque::new();
        let expected = crate::eval::expected_tools(bundle.manifest.category);
        let tagged = bundle
            .ground_truth
            .findings
            .iter()
            .flat_map(|f| f.required_tools.iter().map(String::as_str));
        for tool in expected.iter().copied().chain(tagged) {
            if planned.insert(tool.to_string()) {
                plan.push_back((tool.to_string(), named_params(tool)));
            }
        }

        let claims = bundle
            .ground_truth
            .findings
            .iter()
            .map(|f| Claim {
                statement: f.statement.clone(),
                evidence_refs: f.evidence.iter().map(|e| e.value.clone()).collect(),
            })
            .collect();
        let report = InvestigationReport {
            case_id: bundle.manifest.case_id.clone(),
            verdict: bundle.ground_truth.verdict,
            claims,
            narrative: "replayed the recorded incident analysis".to_string(),
        };
        OracleAgent { plan, report }
    }
}

impl ScriptedAgent for OracleAgent {
    fn start(&mut self, _case_id: &str, _category: &str, _alert: &Alert) {}

    fn observe(&mut self, _reply: ToolReply<'_>) {}

    fn step(&mut self) -> AgentAction {
        match self.plan.pop_front() {
            Some((tool, params)) => AgentAction::Call { tool, params },
            None => AgentAction::Report(self.report.clone()),
        }
    }
}

/// Calls nothing and accuses everything: verdict is always malicious and
/// the single claim restates the alert text. Exists to prove that echoing
/// the alert does not score.
#[derive(Default)]
pub struct ParrotAgent {
    report: Option<InvestigationReport>,
}

impl ScriptedAgent for ParrotAgent {
    fn start(&mut self, case_id: &str, _category: &str, alert: &Alert) {
        self.report = Some(InvestigationReport {
            case_id: case_id.to_string(),
            verdict: Verdict::Tp,
            claims: vec![Claim {
                statement: alert.description.clone(),
                evidence_refs: alert.triggering_event_ids.clone(),
            }],
            narrative: "the alert says it all".to_string(),
        });
    }

    fn observe(&mut self, _reply: ToolReply<'_>) {}

    fn step(&mut self) -> AgentAction {
        match self.report.take() {
            Some(report) => AgentAction::Report(report),
            None => AgentAction::Quit,
        }
    }
}

/// Makes a few arbitrary calls and files an arbitrary report, all from a
/// seed. Useful for fuzzing the harness and as a noise floor.
pub struct RandomAgent {
    rng: ChaCha12Rng,
    calls_left: usize,
    case_id: String,
    alert_words: Vec<String>,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        let mut rng = rng_from(seed);
        let calls_left = rng.gen_range(1..=6);
        RandomAgent { rng, calls_left, case_id: String::new(), alert_words: Vec::new() }
    }
}

impl ScriptedAgent for RandomAgent {
    fn start(&mut self, case_id: &str, _category: &str, alert: &Alert) {
        self.case_id = case_id.to_string();
        self.alert_words = alert.description.split_whitespace().map(str::to_string).collect();
    }

    fn observe(&mut self, _reply: ToolReply<'_>) {}

    fn step(&mut self) -> AgentAction {
        if self.calls_left > 0 {
            self.calls_left -= 1;
            let spec = TOOL_CATALOG.choose(&mut self.rng).expect("catalog is non-empty");
            let params = match spec.name {
                "get_user" => json!({ "user_name": "alpha" }),
                "get_role" | "list_role_policies" => json!({ "role_name": "alpha" }),
                "get_bucket_policy" | "list_objects" => json!({ "bucket_name": "alpha" }),
                _ => json!({}),
            };
            return AgentAction::Call { tool: spec.name.to_string(), params };
        }
        let verdict =
            if self.rng.gen_bool(0.5) { Verdict::Tp } else { Verdict::Fp };
        let claims = (0..self.rng.gen_range(0..=2))
            .map(|_| {
                let mut words = self.alert_words.clone();
                words.shuffle(&mut self.rng);
                words.truncate(8.min(words.len()));
                Claim { statement: words.join(" "), evidence_refs: vec![] }
            })
            .collect();
        AgentAction::Report(InvestigationReport {
            case_id: self.case_id.clone(),
            verdict,
            claims,
            narrative: "guesswork".to_string(),
        })
    }
}

/// Fails immediately; exercises the crash path end to end.
#[derive(Default)]
pub struct CrashAgent;

impl ScriptedAgent for CrashAgent {
    fn start(&mut self, _case_id: &str, _category: &str, _alert: &Alert) {}
    fn observe(&mut self, _reply: ToolReply<'_>) {}
    fn step(&mut self) -> AgentAction {
        AgentAction::Abort { reason: "simulated agent failure".to_string() }
    }
}

/// Calls the same tool forever and never reports; exercises the budget
/// refusals and the message-flood guard.
#[derive(Default)]
pub struct LoopAgent;

impl ScriptedAgent for LoopAgent {
    fn start(&mut self, _case_id: &str, _category: &str, _alert: &Alert) {}
    fn observe(&mut self, _reply: ToolReply<'_>) {}
    fn step(&mut self) -> AgentAction {
        AgentAction::Call { tool: "list_users".to_string(), params: json!({}) }
    }
}

/// Marker weights for the keyword heuristic; a case scores as malicious
/// when the summed weights reach [`KeywordAgent::TP_THRESHOLD`].
struct Signal {
    weight: i64,
    statement: String,
    evidence: Vec<String>,
}

/// An honest, tool-using baseline with no access to ground truth. It
/// sweeps the log, pulls the category's state surfaces, and scores
/// hard-coded suspicion markers. Deterministic by construction.
pub struct KeywordAgent {
    case_id: String,
    category: String,
    alert_text: String,
    queue: VecDeque<(String, Value)>,
    awaiting: Option<String>,
    events: Vec<Value>,
    pages: usize,
    bucket_arns: BTreeMap<String, String>,
    public_buckets: Vec<String>,
}

impl KeywordAgent {
    const TP_THRESHOLD: i64 = 3;
    const MAX_PAGES: usize = 5;

    pub fn new() -> Self {
        KeywordAgent {
            case_id: String::new(),
            category: String::new(),
            alert_text: String::new(),
            queue: VecDeque::new(),
            awaiting: None,
            events: Vec::new(),
            pages: 0,
            bucket_arns: BTreeMap::new(),
            public_buckets: Vec::new(),
        }
    }

    fn tally(&self) -> Vec<Signal> {
        let mut signals = Vec::new();
        let name = |e: &Value| e["event_name"].as_str().unwrap_or("").to_string();
        let succeeded = |e: &Value| e.get("error_code").map_or(true, Value::is_null);
        let id = |e: &Value| e["event_id"].as_str().unwrap_or("").to_string();
        let param = |e: &Value, key: &str| {
            e["request_parameters"][key].as_str().map(str::to_string)
        };
        let identity_kind =
            |e: &Value| e["user_identity"]["kind"].as_str().unwrap_or("").to_string();

        let mut fails: Vec<&Value> = Vec::new();
        let mut success_after_failure: Option<(String, String, String)> = None;
        let mut failed_users: BTreeSet<String> = BTreeSet::new();
        for event in &self.events {
            if name(event) != "ConsoleLogin" {
                continue;
            }
            let user = param(event, "user_name").unwrap_or_default();
            if succeeded(event) {
                if failed_users.contains(&user) && success_after_failure.is_none() {
                    let last_fail = fails.last().map(|e| id(e)).unwrap_or_default();
                    success_after_failure = Some((user.clone(), last_fail, id(event)));
                }
            } else {
                failed_users.insert(user);
                fails.push(event);
            }
        }
        if fails.len() >= 8 {
            signals.push(Signal {
                weight: 2,
                statement: format!(
                    "The window contains {} failed console sign-in attempts",
                    fails.len()
                ),
                evidence: fails.iter().take(10).map(|e| id(e)).collect(),
            });
        }
        if let Some((user, fail_id, ok_id)) = success_after_failure {
            signals.push(Signal {
                weight: 2,
                statement: format!(
                    "A console sign-in for {user} succeeded after earlier failures"
                ),
                evidence: vec![fail_id, ok_id],
            });
        }

        let mut one_per_name: BTreeMap<&'static str, Signal> = BTreeMap::new();
        let mut reads = 0usize;
        let mut read_ids = Vec::new();
        let mut anon_reads = 0usize;
        let mut anon_ids = Vec::new();
        for event in &self.events {
            if !succeeded(event) {
                continue;
            }
            let event_name = name(event);
            let eid = id(event);
            match event_name.as_str() {
                "StopLogging" => {
                    one_per_name
                        .entry("stoplog")
                        .or_insert_with(|| Signal {
                            weight: 3,
                            statement: "Audit logging was switched off during the window"
                                .to_string(),
                            evidence: vec![],
                        })
                        .evidence
                        .push(eid);
                }
                "CreateUser" => {
                    let who = param(event, "user_name").unwrap_or_default();
                    signals.push(Signal {
                        weight: 1,
                        statement: format!("A new IAM user {who} appeared mid-incident"),
                        evidence: vec![eid],
                    });
                }
                "CreateAccessKey" | "CreateLoginProfile" => {
                    let who = param(event, "user_name").unwrap_or_default();
                    signals.push(Signal {
                        weight: 1,
                        statement: format!("Fresh credentials were issued for {who}"),
                        evidence: vec![eid],
                    });
                }
                "AttachUserPolicy" => {
                    let who = param(event, "user_name").unwrap_or_default();
                    let policy = param(event, "policy_name").unwrap_or_default();
                    signals.push(Signal {
                        weight: 2,
                        statement: format!("Policy {policy} was attached to {who}"),
                        evidence: vec![eid],
                    });
                }
                "AuthorizeSecurityGroupIngress" => {
                    if param(event, "cidr_ip").as_deref() == Some("0.0.0.0/0") {
                        let port = param(event, "from_port").unwrap_or_default();
                        signals.push(Signal {
                            weight: 2,
                            statement: format!(
                                "Ingress on port {port} was opened to the entire internet"
                            ),
                            evidence: vec![eid],
                        });
                    }
                }
                "TerminateInstances" => {
                    signals.push(Signal {
                        weight: 2,
                        statement: "A compute instance was terminated during the window"
                            .to_string(),
                        evidence: vec![eid],
                    });
                }
                "SendCommand" | "StartAutomationExecution" => {
                    let text = param(event, "command_text").unwrap_or_default();
                    let instance = param(event, "instance_id").unwrap_or_default();
                    if text.contains("http") || text.contains("/dev/tcp/") {
                        signals.push(Signal {
                            weight: 3,
                            statement: format!(
                                "A remote command on {instance} pulled or opened a network payload"
                            ),
                            evidence: vec![eid],
                        });
                    } else {
                        signals.push(Signal {
                            weight: 1,
                            statement: format!("Operator commands ran on {instance}"),
                            evidence: vec![eid],
                        });
                    }
                }
                "PutBucketPolicy" | "PutBucketAcl" => {
                    let bucket = param(event, "bucket_name").unwrap_or_default();
                    match param(event, "change_ticket") {
                        Some(ticket) => signals.push(Signal {
                            weight: -3,
                            statement: format!(
                                "The policy change on {bucket} carries change ticket {ticket}"
                            ),
                            evidence: vec![eid],
                        }),
                        None => signals.push(Signal {
                            weight: 2,
                            statement: format!(
                                "The policy on {bucket} changed with no change ticket attached"
                            ),
                            evidence: vec![eid],
                        }),
                    }
                }
                "GetObject" | "CopyObject" => {
                    reads += 1;
                    read_ids.push(eid.clone());
                    if identity_kind(event) == "anonymous" {
                        anon_reads += 1;
                        anon_ids.push(eid);
                    }
                }
                "AssumeRole" => {
                    if identity_kind(event) == "assumed_role" {
                        signals.push(Signal {
                            weight: 2,
                            statement: "A temporary role session assumed a further role"
                                .to_string(),
                            evidence: vec![eid],
                        });
                    }
                }
                _ => {}
            }
        }
        signals.extend(one_per_name.into_values());
        if reads >= 8 {
            signals.push(Signal {
                weight: 2,
                statement: format!("Objects were read from storage in bulk ({reads} reads)"),
                evidence: read_ids.into_iter().take(10).collect(),
            });
        }
        if anon_reads >= 3 {
            signals.push(Signal {
                weight: 2,
                statement: format!("Anonymous principals fetched objects {anon_reads} times"),
                evidence: anon_ids.into_iter().take(10).collect(),
            });
        }
        for bucket in &self.public_buckets {
            if let Some(arn) = self.bucket_arns.get(bucket) {
                signals.push(Signal {
                    weight: 0,
                    statement: format!("Bucket {bucket} currently allows anonymous access"),
                    evidence: vec![arn.clone()],
                });
            }
        }
        signals
    }

    fn build_report(&self) -> InvestigationReport {
        let signals = self.tally();
        let score: i64 = signals.iter().map(|s| s.weight).sum();
        let verdict = if score >= Self::TP_THRESHOLD {
            Verdict::Tp
        } else {
            Verdict::Fp
        };
        let claims = signals
            .into_iter()
            .map(|s| Claim { statement: s.statement, evidence_refs: s.evidence })
            .collect();
        InvestigationReport {
            case_id: self.case_id.clone(),
            verdict,
            claims,
            narrative: format!(
                "keyword sweep over {} events scored {score} suspicion points",
                self.events.len()
            ),
        }
    }
}

impl Default for KeywordAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl ScriptedAgent for KeywordAgent {
    fn start(&mut self, case_id: &str, category: &str, alert: &Alert) {
        self.case_id = case_id.to_string();
        self.category = category.to_string();
        self.alert_text = alert.description.clone();
        self.queue.push_back(("lookup_events".to_string(), json!({ "max_results": 500 })));
        let tail: &[&str] = match category {
            "brute_force" => &["list_users", "get_cost_and_usage"],
            "unauthorized_access" => &["list_roles", "list_buckets", "get_cost_and_usage"],
            "misconfiguration" => {
                &["list_buckets", "describe_security_groups", "get_cost_and_usage"]
            }
            _ => &["describe_instances", "describe_security_groups", "get_cost_and_usage"],
        };
        for tool in tail {
            self.queue.push_back((tool.to_string(), json!({})));
        }
    }

    fn observe(&mut self, reply: ToolReply<'_>) {
        let Some(tool) = self.awaiting.take() else { return };
        let Some(data) = reply.data.filter(|_| reply.ok) else { return };
        match tool.as_str() {
            "lookup_events" => {
                if let Some(events) = data["events"].as_array() {
                    self.events.extend(events.iter().cloned());
                }
                self.pages += 1;
                if let Some(token) = data["next_page_token"].as_str() {
                    if self.pages < Self::MAX_PAGES {
                        self.queue.push_front((
                            "lookup_events".to_string(),
                            json!({ "max_results": 500, "page_token": token }),
                        ));
                    }
                }
            }
            "list_buckets" => {
                if let Some(buckets) = data["buckets"].as_array() {
                    for bucket in buckets {
                        if let (Some(name), Some(arn)) =
                            (bucket["name"].as_str(), bucket["arn"].as_str())
                        {
                            self.bucket_arns.insert(name.to_string(), arn.to_string());
                        }
                    }
                    if self.category == "misconfiguration" {
                        let named = self
                            .bucket_arns
                            .keys()
                            .find(|name| self.alert_text.contains(*name))
                            .or_else(|| self.bucket_arns.keys().next())
                            .cloned();
                        if let Some(name) = named {
                            self.queue.push_front((
                                "get_bucket_policy".to_string(),
                                json!({ "bucket_name": name }),
                            ));
                        }
                    }
                }
            }
            "get_bucket_policy" => {
                if data["public"].as_bool() == Some(true) {
                    if let Some(name) = data["bucket"].as_str() {
                        self.public_buckets.push(name.to_string());
                    }
                }
            }
            _ => {}
        }
    }

    fn step(&mut self) -> AgentAction {
        match self.queue.pop_front() {
            Some((tool, params)) => {
                self.awaiting = Some(tool.clone());
                AgentAction::Call { tool, params }
            }
            None => AgentAction::Report(self.build_report()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::harness::session::{run_session, Limits, SessionOutcome};
    use crate::scenario::{execute_scenario, PublicCase};
    use crate::variation::{fp_seeds, tp_seeds};

    fn bundles() -> Vec<CaseBundle> {
        let mut out = Vec::new();
        for category in Category::ALL {
            for seed in tp_seeds(category) {
                out.push(execute_scenario(&seed, 31).unwrap());
            }
            for seed in fp_seeds(category) {
                out.push(execute_scenario(&seed, 32).unwrap());
            }
        }
        out
    }

    fn run_in_process(
        bundle: &CaseBundle,
        agent: Box<dyn ScriptedAgent>,
    ) -> crate::harness::session::SessionTranscript {
        let case = PublicCase::from_bundle(bundle);
        let mut endpoint = InProcessEndpoint::new(agent);
        run_session(&case, &mut endpoint, Limits::default())
    }

    #[test]
    fn the_oracle_replays_ground_truth_with_full_tool_coverage() {
        for bundle in bundles() {
            let t = run_in_process(&bundle, Box::new(OracleAgent::from_bundle(&bundle)));
            assert_eq!(t.outcome, SessionOutcome::Reported, "{}", bundle.manifest.case_id);
            let report = t.report.as_ref().unwrap();
            assert_eq!(report.verdict, bundle.ground_truth.verdict);
            assert_eq!(report.claims.len(), bundle.ground_truth.findings.len());
            let invoked: BTreeSet<&str> =
                t.tool_calls.iter().map(|c| c.tool.as_str()).collect();
            for tool in crate::eval::expected_tools(bundle.manifest.category) {
                assert!(invoked.contains(tool), "oracle skipped {tool}");
            }
            assert!(t.tool_calls.iter().all(|c| c.ok), "oracle calls all succeed");
        }
    }

    #[test]
    fn the_parrot_reports_without_touching_a_tool() {
        let bundle = &bundles()[0];
        let t = run_in_process(bundle, Box::new(ParrotAgent::default()));
        assert_eq!(t.outcome, SessionOutcome::Reported);
        assert!(t.tool_calls.is_empty());
        let report = t.report.unwrap();
        assert_eq!(report.verdict, Verdict::Tp);
        assert_eq!(report.claims[0].statement, bundle.alert.description);
    }

    #[test]
    fn the_keyword_agent_separates_most_seed_verdicts() {
        let mut right = 0;
        let mut total = 0;
        for bundle in bundles() {
            let t = run_in_process(&bundle, Box::new(KeywordAgent::new()));
            assert_eq!(t.outcome, SessionOutcome::Reported, "{}", bundle.manifest.case_id);
            let report = t.report.as_ref().unwrap();
            total += 1;
            if report.verdict == bundle.ground_truth.verdict {
                right += 1;
            }
            assert!(
                t.tool_calls.iter().any(|c| c.tool == "lookup_events"),
                "heuristics must be grounded in the log"
            );
        }
        assert!(right * 10 >= total * 8, "keyword agent got {right}/{total}");
    }

    #[test]
    fn the_random_agent_is_deterministic_per_seed() {
        let bundle = &bundles()[0];
        let a = run_in_process(bundle, Box::new(RandomAgent::new(99)));
        let b = run_in_process(bundle, Box::new(RandomAgent::new(99)));
        assert_eq!(a, b);
        let c = run_in_process(bundle, Box::new(RandomAgent::new(100)));
        assert!(a != c || a.report == c.report, "different seeds may diverge");
    }

    #[test]
    fn the_crash_agent_crashes_the_session() {
        let bundle = &bundles()[0];
        let t = run_in_process(bundle, Box::new(CrashAgent));
        match t.outcome {
            SessionOutcome::Crashed { reason } => assert!(reason.contains("simulated")),
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn the_loop_agent_exhausts_its_budget_then_floods_out() {
        let bundle = &bundles()[0];
        let case = PublicCase::from_bundle(bundle);
        let mut endpoint = InProcessEndpoint::new(Box::new(LoopAgent));
        let limits = Limits { max_tool_calls: 6, timeout_secs: 30 };
        let t = run_session(&case, &mut endpoint, limits);
        match t.outcome {
            SessionOutcome::NoReport { reason } => assert!(reason.contains("flood")),
            other => panic!("wrong outcome: {other:?}"),
        }
        assert_eq!(t.tool_calls.len(), 6, "recorded calls stop at the budget");
    }
}
