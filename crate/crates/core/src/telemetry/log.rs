//! Append-only event log ordered by time, with insertion order breaking
//! same-millisecond ties.

use serde::{Deserialize, Serialize};

use super::{CloudEvent, TelemetryError};
use crate::time::Timestamp;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    events: Vec<CloudEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        EventLog::default()
    }

    /// Appends an event. Its timestamp must be at or after the current
    /// tail; equal timestamps keep insertion order.
    pub fn append_event(&mut self, event: CloudEvent) -> Result<(), TelemetryError> {
        if let Some(tail) = self.events.last() {
            if event.event_time < tail.event_time {
                return Err(TelemetryError::OutOfOrder {
                    tail: tail.event_time,
                    attempted: event.event_time,
                });
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn events(&self) -> &[CloudEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn by_id(&self, event_id: &str) -> Option<&CloudEvent> {
        self.events.iter().find(|e| e.event_id == event_id)
    }

    pub fn first_time(&self) -> Option<Timestamp> {
        self.events.first().map(|e| e.event_time)
    }

    pub fn last_time(&self) -> Option<Timestamp> {
        self.events.last().map(|e| e.event_time)
    }

    /// One compact JSON object per line, trailing newline included.
    pub fn serialize_log(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`EventLog::serialize_log`]. Blank lines are rejected;
    /// errors name the offending 1-based line.
    pub fn parse_log(input: &str) -> Result<Self, TelemetryError> {
        let mut log = EventLog::new();
        for (idx, line) in input.lines().enumerate() {
            let event: CloudEvent =
                serde_json::from_str(line).map_err(|e| TelemetryError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            log.append_event(event).map_err(|e| TelemetryError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(log)
    }
}
