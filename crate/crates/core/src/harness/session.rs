//! Drives one case against one agent and records what happened.
//!
//! The harness is defensive: an agent that stalls, floods, crashes, or
//! never reports still yields a well-formed transcript, and the failure
//! mode is preserved so scoring can handle each one differently.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenario::PublicCase;

use super::protocol::{AgentMsg, HarnessMsg, InvestigationReport, ToolInfo};
use super::tools::{answer_tool_call, TOOL_CATALOG};
use super::HarnessError;

/// File name for a per-case transcript under the reports directory.
pub const TRANSCRIPT_FILE: &str = "transcript.json";

/// File name for the standalone copy of a delivered report, written next
/// to the transcript.
pub const REPORT_FILE: &str = "report.json";

pub const ENV_MAX_TOOL_CALLS: &str = "TRAILBENCH_MAX_TOOL_CALLS";
pub const ENV_TIMEOUT_SECS: &str = "TRAILBENCH_TIMEOUT_SECS";

/// Per-session resource budget, announced to the agent in `case_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_tool_calls: usize,
    pub timeout_secs: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_tool_calls: 50, timeout_secs: 120 }
    }
}

impl Limits {
    /// Applies `TRAILBENCH_MAX_TOOL_CALLS` / `TRAILBENCH_TIMEOUT_SECS` on
    /// top of `self`. Unset or unparseable variables leave the base value.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(n) = env_parse::<usize>(ENV_MAX_TOOL_CALLS) {
            self.max_tool_calls = n;
        }
        if let Some(n) = env_parse::<u64>(ENV_TIMEOUT_SECS) {
            self.timeout_secs = n;
        }
        self
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

fn env_parse<T: std::str::FromStr>(key: &str) -> Option<T> {
    std::env::var(key).ok().and_then(|v| v.parse().ok())
}

/// What arrived (or failed to) on one receive attempt.
#[derive(Debug)]
pub enum RecvOutcome {
    Msg(AgentMsg),
    /// The agent closed its output stream.
    Eof,
    TimedOut,
}

/// How the agent's side of the channel ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndState {
    Clean,
    Crashed { reason: String },
}

/// One side of a harness/agent conversation. Implemented over a child
/// process for real agents and in process for the reference agents.
pub trait AgentEndpoint {
    fn send(&mut self, msg: &HarnessMsg) -> Result<(), HarnessError>;
    fn recv(&mut self, timeout: Duration) -> Result<RecvOutcome, HarnessError>;
    /// Tears the channel down and reports whether the agent exited cleanly.
    fn close(&mut self) -> EndState;
}

/// Terminal state of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionOutcome {
    /// The agent delivered a final report.
    Reported,
    /// The agent went quiet, ran out of time, or flooded the channel;
    /// its side of the conversation still ended in an orderly way.
    NoReport { reason: String },
    /// The agent broke the protocol or exited uncleanly.
    Crashed { reason: String },
}

/// One served tool call. Over-budget calls are answered with an error but
/// deliberately never recorded, so this list is also the usage measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCallRecord {
    pub call_id: String,
    pub tool: String,
    pub params: Value,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything scoring needs about one agent/case encounter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub case_id: String,
    pub category: String,
    pub outcome: SessionOutcome,
    pub tool_calls: Vec<ToolCallRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<InvestigationReport>,
}

impl SessionTranscript {
    pub fn write(&self, case_dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(case_dir)?;
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        std::fs::write(case_dir.join(TRANSCRIPT_FILE), body)?;
        Ok(())
    }

    pub fn read(case_dir: &Path) -> Result<Self, HarnessError> {
        let body = std::fs::read_to_string(case_dir.join(TRANSCRIPT_FILE))?;
        Ok(serde_json::from_str(&body)?)
    }
}

/// Hard cap on inbound messages per session, proportional to the tool
/// budget. Stops an agent that streams junk forever without reporting.
fn message_cap(limits: &Limits) -> usize {
    limits.max_tool_calls * 4 + 64
}

/// Runs one case to completion over the given endpoint.
pub fn run_session(
    case: &PublicCase,
    endpoint: &mut dyn AgentEndpoint,
    limits: Limits,
) -> SessionTranscript {
    let case_id = case.manifest.case_id.clone();
    let category = case.manifest.category.slug().to_string();
    let mut transcript = SessionTranscript {
        case_id: case_id.clone(),
        category,
        outcome: SessionOutcome::NoReport { reason: "session never started".to_string() },
        tool_calls: Vec::new(),
        report: None,
    };

    let opening = HarnessMsg::CaseStart {
        case_id,
        category: transcript.category.clone(),
        alert: case.alert.clone(),
        tools: TOOL_CATALOG.iter().map(ToolInfo::from).collect(),
        limits,
    };
    if let Err(e) = endpoint.send(&opening) {
        transcript.outcome = crash_outcome(endpoint, format!("send failed: {e}"));
        return transcript;
    }

    let deadline = Instant::now() + limits.timeout();
    let cap = message_cap(&limits);
    let mut inbound = 0usize;

    transcript.outcome = loop {
        let Some(remaining) = deadline.checked_duration_since_now() else {
            break SessionOutcome::NoReport {
                reason: format!("timed out after {}s", limits.timeout_secs),
            };
        };
        let received = match endpoint.recv(remaining) {
            Ok(r) => r,
            Err(e) => break crash_outcome(endpoint, e.to_string()),
        };
        let msg = match received {
            RecvOutcome::Msg(msg) => msg,
            RecvOutcome::Eof => {
                break match endpoint.close() {
                    EndState::Clean => SessionOutcome::NoReport {
                        reason: "stream closed before a report".to_string(),
                    },
                    EndState::Crashed { reason } => SessionOutcome::Crashed { reason },
                };
            }
            RecvOutcome::TimedOut => {
                break SessionOutcome::NoReport {
                    reason: format!("timed out after {}s", limits.timeout_secs),
                };
            }
        };
        inbound += 1;
        if inbound > cap {
            break SessionOutcome::NoReport {
                reason: format!("message flood: more than {cap} messages without a report"),
            };
        }
        match msg {
            AgentMsg::FinalReport { report } => {
                transcript.report = Some(report);
                break SessionOutcome::Reported;
            }
            AgentMsg::ToolCall { call_id, tool, params } => {
                let over_budget = transcript.tool_calls.len() >= limits.max_tool_calls;
                let reply = if over_budget {
                    HarnessMsg::ToolResult {
                        call_id: call_id.clone(),
                        ok: false,
                        data: None,
                        error: Some(format!(
                            "tool budget exhausted ({} calls); send final_report",
                            limits.max_tool_calls
                        )),
                    }
                } else {
                    let answer = answer_tool_call(case, &tool, &params);
                    let (ok, data, error) = match answer {
                        Ok(data) => (true, Some(data), None),
                        Err(e) => (false, None, Some(e)),
                    };
                    transcript.tool_calls.push(ToolCallRecord {
                        call_id: call_id.clone(),
                        tool,
                        params,
                        ok,
                        error: error.clone(),
                    });
                    HarnessMsg::ToolResult { call_id, ok, data, error }
                };
                if let Err(e) = endpoint.send(&reply) {
                    break crash_outcome(endpoint, format!("send failed: {e}"));
                }
            }
        }
    };

    if !matches!(transcript.outcome, SessionOutcome::Crashed { .. }) {
        // A dirty exit after a report (or after the budget ran out) still
        // counts as a crash; the report is kept but flagged unscorable.
        if let EndState::Crashed { reason } = endpoint.close() {
            transcript.outcome = SessionOutcome::Crashed { reason };
        }
    }
    transcript
}

/// A decided crash; drains the endpoint so the child reaps, preferring
/// its exit diagnosis when it has one.
fn crash_outcome(endpoint: &mut dyn AgentEndpoint, fallback: String) -> SessionOutcome {
    match endpoint.close() {
        EndState::Crashed { reason } => SessionOutcome::Crashed { reason },
        EndState::Clean => SessionOutcome::Crashed { reason: fallback },
    }
}

trait InstantExt {
    fn checked_duration_since_now(&self) -> Option<Duration>;
}

impl InstantExt for Instant {
    fn checked_duration_since_now(&self) -> Option<Duration> {
        self.checked_duration_since(Instant::now())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::scenario::{execute_scenario, Verdict};
    use crate::variation::tp_seeds;
    use serde_json::json;
    use std::collections::VecDeque;

    fn case() -> PublicCase {
        let seed = &tp_seeds(Category::BruteForce)[0];
        PublicCase::from_bundle(&execute_scenario(seed, 9).unwrap())
    }

    /// Plays back a fixed script of agent messages, ignoring what the
    /// harness says; `sent` captures the harness side for assertions.
    struct Scripted {
        script: VecDeque<RecvOutcome>,
        sent: Vec<HarnessMsg>,
        end: EndState,
    }

    impl Scripted {
        fn new(msgs: Vec<AgentMsg>, end: EndState) -> Self {
            Scripted {
                script: msgs.into_iter().map(RecvOutcome::Msg).collect(),
                sent: Vec::new(),
                end,
            }
        }
    }

    impl AgentEndpoint for Scripted {
        fn send(&mut self, msg: &HarnessMsg) -> Result<(), HarnessError> {
            self.sent.push(msg.clone());
            Ok(())
        }
        fn recv(&mut self, _timeout: Duration) -> Result<RecvOutcome, HarnessError> {
            Ok(self.script.pop_front().unwrap_or(RecvOutcome::Eof))
        }
        fn close(&mut self) -> EndState {
            self.end.clone()
        }
    }

    fn report(case_id: &str) -> AgentMsg {
        AgentMsg::FinalReport {
            report: InvestigationReport {
                case_id: case_id.to_string(),
                verdict: Verdict::Tp,
                claims: vec![],
                narrative: "looked bad".to_string(),
            },
        }
    }

    fn call(id: &str, tool: &str) -> AgentMsg {
        AgentMsg::ToolCall { call_id: id.into(), tool: tool.into(), params: json!({}) }
    }

    #[test]
    fn a_scripted_session_reaches_a_report() {
        let case = case();
        let mut agent = Scripted::new(
            vec![call("c1", "list_users"), report(&case.manifest.case_id)],
            EndState::Clean,
        );
        let t = run_session(&case, &mut agent, Limits::default());
        assert_eq!(t.outcome, SessionOutcome::Reported);
        assert_eq!(t.tool_calls.len(), 1);
        assert!(t.tool_calls[0].ok);
        assert!(t.report.is_some());
        // case_start first, then exactly one tool result.
        assert!(matches!(agent.sent[0], HarnessMsg::CaseStart { .. }));
        assert!(matches!(agent.sent[1], HarnessMsg::ToolResult { ok: true, .. }));
    }

    #[test]
    fn case_start_announces_tools_and_limits() {
        let case = case();
        let limits = Limits { max_tool_calls: 9, timeout_secs: 30 };
        let mut agent = Scripted::new(vec![report("x")], EndState::Clean);
        run_session(&case, &mut agent, limits);
        match &agent.sent[0] {
            HarnessMsg::CaseStart { tools, limits: sent, category, .. } => {
                assert_eq!(tools.len(), 12);
                assert_eq!(*sent, limits);
                assert_eq!(category, "brute_force");
            }
            other => panic!("expected case_start, got {other:?}"),
        }
    }

    #[test]
    fn silence_is_a_no_report_not_a_crash() {
        let case = case();
        let mut agent = Scripted::new(vec![], EndState::Clean);
        let t = run_session(&case, &mut agent, Limits::default());
        match t.outcome {
            SessionOutcome::NoReport { reason } => assert!(reason.contains("closed")),
            other => panic!("wrong outcome: {other:?}"),
        }
        assert!(t.report.is_none());
    }

    #[test]
    fn dirty_exit_is_a_crash() {
        let case = case();
        let mut agent =
            Scripted::new(vec![], EndState::Crashed { reason: "exit status 2".into() });
        let t = run_session(&case, &mut agent, Limits::default());
        match t.outcome {
            SessionOutcome::Crashed { reason } => assert!(reason.contains("exit status 2")),
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn timeout_yields_a_no_report() {
        let case = case();
        struct Stall;
        impl AgentEndpoint for Stall {
            fn send(&mut self, _: &HarnessMsg) -> Result<(), HarnessError> {
                Ok(())
            }
            fn recv(&mut self, _t: Duration) -> Result<RecvOutcome, HarnessError> {
                Ok(RecvOutcome::TimedOut)
            }
            fn close(&mut self) -> EndState {
                EndState::Clean
            }
        }
        let t = run_session(&case, &mut Stall, Limits { max_tool_calls: 5, timeout_secs: 1 });
        match t.outcome {
            SessionOutcome::NoReport { reason } => assert!(reason.contains("timed out")),
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn over_budget_calls_are_refused_and_unrecorded() {
        let case = case();
        let mut msgs: Vec<AgentMsg> =
            (0..7).map(|i| call(&format!("c{i}"), "list_users")).collect();
        msgs.push(report(&case.manifest.case_id));
        let mut agent = Scripted::new(msgs, EndState::Clean);
        let t = run_session(&case, &mut agent, Limits { max_tool_calls: 4, timeout_secs: 30 });
        assert_eq!(t.outcome, SessionOutcome::Reported);
        assert_eq!(t.tool_calls.len(), 4);
        let refusals = agent
            .sent
            .iter()
            .filter(|m| match m {
                HarnessMsg::ToolResult { ok: false, error: Some(e), .. } => {
                    e.contains("budget exhausted")
                }
                _ => false,
            })
            .count();
        assert_eq!(refusals, 3);
    }

    #[test]
    fn failed_calls_are_recorded_and_answered_with_errors() {
        let case = case();
        let mut agent = Scripted::new(
            vec![call("c1", "no_such_tool"), report(&case.manifest.case_id)],
            EndState::Clean,
        );
        let t = run_session(&case, &mut agent, Limits::default());
        assert_eq!(t.tool_calls.len(), 1);
        assert!(!t.tool_calls[0].ok);
        assert!(t.tool_calls[0].error.as_deref().unwrap().contains("unknown tool"));
    }

    #[test]
    fn message_floods_end_the_session() {
        let case = case();
        let limits = Limits { max_tool_calls: 2, timeout_secs: 30 };
        let n = message_cap(&limits) + 5;
        let msgs: Vec<AgentMsg> =
            (0..n).map(|i| call(&format!("c{i}"), "list_users")).collect();
        let mut agent = Scripted::new(msgs, EndState::Clean);
        let t = run_session(&case, &mut agent, limits);
        match t.outcome {
            SessionOutcome::NoReport { reason } => assert!(reason.contains("flood")),
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn transcripts_round_trip_through_disk() {
        let case = case();
        let mut agent = Scripted::new(
            vec![call("c1", "list_buckets"), report(&case.manifest.case_id)],
            EndState::Clean,
        );
        let t = run_session(&case, &mut agent, Limits::default());
        let dir = tempfile::tempdir().unwrap();
        let case_dir = dir.path().join(&t.case_id);
        t.write(&case_dir).unwrap();
        let back = SessionTranscript::read(&case_dir).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn env_overrides_take_effect() {
        // Set/unset is process-global; run both checks in one test to
        // avoid racing a parallel test over the same variables.
        std::env::set_var(ENV_MAX_TOOL_CALLS, "7");
        std::env::set_var(ENV_TIMEOUT_SECS, "11");
        let limits = Limits::default().with_env_overrides();
        assert_eq!(limits.max_tool_calls, 7);
        assert_eq!(limits.timeout_secs, 11);

        std::env::set_var(ENV_MAX_TOOL_CALLS, "not-a-number");
        std::env::remove_var(ENV_TIMEOUT_SECS);
        let limits = Limits { max_tool_calls: 3, timeout_secs: 5 }.with_env_overrides();
        assert_eq!(limits.max_tool_calls, 3);
        assert_eq!(limits.timeout_secs, 5);

        std::env::remove_var(ENV_MAX_TOOL_CALLS);
    }
}
