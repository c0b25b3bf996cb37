//! Wire protocol between the harness and an agent.
//!
//! Messages travel as newline-delimited JSON, one object per line, tagged
//! by a `type` field. The harness opens with `case_start`, answers each
//! `tool_call` with a `tool_result` carrying the same `call_id`, and the
//! session ends when the agent sends `final_report` (or stops responding).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenario::Alert;

use super::session::Limits;
use super::tools::{ParamSpec, ToolSpec};

/// Messages the harness writes to the agent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HarnessMsg {
    CaseStart {
        case_id: String,
        category: String,
        alert: Alert,
        tools: Vec<ToolInfo>,
        limits: Limits,
    },
    ToolResult {
        call_id: String,
        ok: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        data: Option<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
}

/// Messages the agent writes back.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentMsg {
    ToolCall {
        call_id: String,
        tool: String,
        #[serde(default)]
        params: Value,
    },
    FinalReport {
        report: InvestigationReport,
    },
}

/// Owned mirror of a [`ToolSpec`], for serialization in `case_start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub description: String,
    pub params: Vec<ParamInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub name: String,
    pub kind: String,
    pub required: bool,
    pub description: String,
}

impl From<&ToolSpec> for ToolInfo {
    fn from(spec: &ToolSpec) -> Self {
        ToolInfo {
            name: spec.name.to_string(),
            description: spec.description.to_string(),
            params: spec.params.iter().map(ParamInfo::from).collect(),
        }
    }
}

impl From<&ParamSpec> for ParamInfo {
    fn from(p: &ParamSpec) -> Self {
        ParamInfo {
            name: p.name.to_string(),
            kind: p.kind.to_string(),
            required: p.required,
            description: p.description.to_string(),
        }
    }
}

/// What an agent concluded about a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvestigationReport {
    pub case_id: String,
    /// `"TP"` (real attack) or `"FP"` (benign alert).
    pub verdict: crate::scenario::Verdict,
    #[serde(default)]
    pub claims: Vec<Claim>,
    #[serde(default)]
    pub narrative: String,
}

/// One discrete statement of fact, tied to the events or resources that
/// back it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub statement: String,
    /// Event ids or resource ARNs the agent cites in support.
    #[serde(default)]
    pub evidence_refs: Vec<String>,
}
