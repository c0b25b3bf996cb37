//! The investigation harness: tool surface, wire protocol, sessions.
//!
//! An agent sees one case at a time: an alert, a tool catalog, and a
//! budget. Everything it learns beyond the alert comes through tool
//! calls answered from the case's public slice; the session transcript
//! records the exchange for scoring.

mod agents;
mod process;
mod protocol;
mod runner;
mod session;
mod tools;

pub use agents::{
    run_stdio_agent, AgentAction, CrashAgent, InProcessEndpoint, KeywordAgent, LoopAgent,
    OracleAgent, ParrotAgent, RandomAgent, ScriptedAgent, ToolReply,
};
pub use process::ProcessEndpoint;
pub use protocol::{AgentMsg, Claim, HarnessMsg, InvestigationReport, ParamInfo, ToolInfo};
pub use runner::{run_corpus, RunSummary};
pub use session::{
    run_session, AgentEndpoint, EndState, Limits, RecvOutcome, SessionOutcome,
    SessionTranscript, ToolCallRecord, ENV_MAX_TOOL_CALLS, ENV_TIMEOUT_SECS, REPORT_FILE,
    TRANSCRIPT_FILE,
};
pub use tools::{
    answer_tool_call, find_tool, ParamSpec, ToolSpec, DEFAULT_LOOKUP_RESULTS,
    MAX_LOOKUP_RESULTS, TOOL_CATALOG,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("failed to spawn agent: {0}")]
    Spawn(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("agent failure: {0}")]
    Agent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
}
