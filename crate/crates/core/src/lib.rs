//! Mock-cloud incident simulation and investigation-agent evaluation.
//!
//! The crate is organized around the lifecycle of a benchmark case:
//!
//! 1. [`cloud`] models a small multi-account cloud environment and turns
//!    control-plane actions into audit events.
//! 2. [`telemetry`] keeps those events in an append-only log with a query
//!    engine and a line-delimited serialization.
//! 3. [`scenario`] executes attack and benign scripts against the cloud model
//!    and machine-extracts ground truth from the execution trace.
//! 4. [`variation`] scales seed scenarios into a corpus through surface
//!    transforms and builds false-positive cases from benign archetypes.
//! 5. [`harness`] runs investigation agents over a line-delimited stdio
//!    protocol, answers their tool calls, and records transcripts.
//! 6. [`eval`] scores reports: finding matching, triage and depth metrics,
//!    tool coverage, and adversarial evidence validation.
//!
//! Everything downstream of a seed value is deterministic: generating,
//! replaying, and scoring a corpus twice from the same seed produces
//! byte-identical artifacts.

pub mod cloud;
pub mod eval;
pub mod harness;
pub mod names;
pub mod scenario;
pub mod seeded;
pub mod telemetry;
pub mod text;
pub mod time;
pub mod variation;
