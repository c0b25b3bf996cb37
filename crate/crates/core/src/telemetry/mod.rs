//! Audit-event telemetry: the event shape, an append-only ordered log with
//! a line-delimited serialization, and a paginated query engine.

mod event;
mod log;
mod query;

pub use event::{CloudEvent, IdentityKind, UserIdentity};
pub use log::EventLog;
pub use query::{lookup_events, EventPage, EventQuery};

#[derive(Debug, thiserror::Error)]
pub enum TelemetryError {
    #[error("appended event at {attempted} precedes log tail {tail}")]
    OutOfOrder {
        tail: crate::time::Timestamp,
        attempted: crate::time::Timestamp,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid query: {reason}")]
    InvalidQuery { reason: String },

    #[error("invalid page token {token:?}")]
    BadPageToken { token: String },
}
