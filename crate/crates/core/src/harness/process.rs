//! Child-process agent endpoint.
//!
//! The agent is any program that speaks the newline-delimited JSON
//! protocol on stdin/stdout. A dedicated reader thread feeds lines into a
//! channel so receives can time out without blocking the session; stderr
//! passes through for the agent's own diagnostics.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::protocol::{AgentMsg, HarnessMsg};
use super::session::{AgentEndpoint, EndState, RecvOutcome};
use super::HarnessError;

/// How long a child gets to exit on its own after stdin closes before it
/// is killed. A kill here is the harness tidying up, not an agent crash.
const EXIT_GRACE: Duration = Duration::from_secs(1);

pub struct ProcessEndpoint {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    reader: Option<JoinHandle<()>>,
    end: Option<EndState>,
}

impl ProcessEndpoint {
    /// Spawns `argv[0]` with the remaining elements as arguments.
    pub fn spawn(argv: &[String]) -> Result<Self, HarnessError> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| HarnessError::Spawn("empty agent command".to_string()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| HarnessError::Spawn(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        let reader = std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ProcessEndpoint {
            child,
            stdin: Some(stdin),
            lines: rx,
            reader: Some(reader),
            end: None,
        })
    }

    fn wait_with_grace(&mut self) -> Result<ExitStatus, String> {
        let deadline = Instant::now() + EXIT_GRACE;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => return Ok(status),
                Ok(None) if Instant::now() < deadline => {
                    std::thread::sleep(Duration::from_millis(20));
                }
                Ok(None) => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    return Err("lingered after stdin closed".to_string());
                }
                Err(e) => return Err(format!("wait failed: {e}")),
            }
        }
    }
}

fn truncated(line: &str) -> String {
    const CAP: usize = 200;
    if line.len() <= CAP {
        return line.to_string();
    }
    let mut cut = CAP;
    while !line.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{}...", &line[..cut])
}

impl AgentEndpoint for ProcessEndpoint {
    fn send(&mut self, msg: &HarnessMsg) -> Result<(), HarnessError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| HarnessError::Protocol("agent stdin already closed".to_string()))?;
        let mut line = serde_json::to_string(msg)?;
        line.push('\n');
        stdin.write_all(line.as_bytes())?;
        stdin.flush()?;
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> Result<RecvOutcome, HarnessError> {
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return match serde_json::from_str::<AgentMsg>(&line) {
                        Ok(msg) => Ok(RecvOutcome::Msg(msg)),
                        Err(e) => Err(HarnessError::Protocol(format!(
                            "unparseable agent message {:?}: {e}",
                            truncated(&line)
                        ))),
                    };
                }
                Ok(Err(e)) => return Err(e.into()),
                Err(RecvTimeoutError::Timeout) => return Ok(RecvOutcome::TimedOut),
                Err(RecvTimeoutError::Disconnected) => return Ok(RecvOutcome::Eof),
            }
        }
    }

    fn close(&mut self) -> EndState {
        if let Some(end) = &self.end {
            return end.clone();
        }
        drop(self.stdin.take());
        let end = match self.wait_with_grace() {
            Ok(status) if status.success() => EndState::Clean,
            Ok(status) => EndState::Crashed { reason: format!("agent exited with {status}") },
            // Killed by us: deliberate teardown, not an agent failure.
            Err(reason) if reason.contains("lingered") => EndState::Clean,
            Err(reason) => EndState::Crashed { reason },
        };
        if let Some(handle) = self.reader.take() {
            let _ = handle.join();
        }
        self.end = Some(end.clone());
        end
    }
}

impl Drop for ProcessEndpoint {
    fn drop(&mut self) {
        if self.end.is_none() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::harness::session::{run_session, Limits, SessionOutcome};
    use crate::scenario::{execute_scenario, PublicCase, Verdict};
    use crate::variation::tp_seeds;

    fn case() -> PublicCase {
        let seed = &tp_seeds(Category::BruteForce)[0];
        PublicCase::from_bundle(&execute_scenario(seed, 9).unwrap())
    }

    fn sh(script: &str) -> ProcessEndpoint {
        ProcessEndpoint::spawn(&["sh".to_string(), "-c".to_string(), script.to_string()])
            .unwrap()
    }

    #[test]
    fn a_shell_agent_completes_a_full_exchange() {
        let script = r#"read -r _start
printf '%s\n' '{"type":"tool_call","call_id":"c1","tool":"list_users","params":{}}'
read -r _result
printf '%s\n' '{"type":"final_report","report":{"case_id":"x","verdict":"TP"}}'
"#;
        let mut agent = sh(script);
        let t = run_session(&case(), &mut agent, Limits::default());
        assert_eq!(t.outcome, SessionOutcome::Reported);
        assert_eq!(t.tool_calls.len(), 1);
        assert!(t.tool_calls[0].ok, "{:?}", t.tool_calls[0].error);
        assert_eq!(t.report.as_ref().unwrap().verdict, Verdict::Tp);
    }

    #[test]
    fn garbage_output_is_a_crash() {
        // cat echoes case_start back, which is not a valid agent message.
        let mut agent = ProcessEndpoint::spawn(&["cat".to_string()]).unwrap();
        let t = run_session(&case(), &mut agent, Limits::default());
        match t.outcome {
            SessionOutcome::Crashed { reason } => {
                assert!(reason.contains("unparseable"), "{reason}")
            }
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn nonzero_exit_is_a_crash() {
        let mut agent = sh("read -r _start; exit 3");
        let t = run_session(&case(), &mut agent, Limits::default());
        match t.outcome {
            SessionOutcome::Crashed { reason } => assert!(reason.contains("3"), "{reason}"),
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn clean_exit_without_a_report_is_a_no_report() {
        let mut agent = sh("read -r _start; exit 0");
        let t = run_session(&case(), &mut agent, Limits::default());
        match t.outcome {
            SessionOutcome::NoReport { reason } => assert!(reason.contains("closed"), "{reason}"),
            other => panic!("wrong outcome: {other:?}"),
        }
        assert!(t.report.is_none());
    }

    #[test]
    fn a_stalling_agent_times_out_as_no_report() {
        let mut agent = sh("read -r _start; sleep 30");
        let t =
            run_session(&case(), &mut agent, Limits { max_tool_calls: 5, timeout_secs: 1 });
        match t.outcome {
            SessionOutcome::NoReport { reason } => {
                assert!(reason.contains("timed out"), "{reason}")
            }
            other => panic!("wrong outcome: {other:?}"),
        }
    }

    #[test]
    fn spawn_failures_surface_as_errors() {
        let err = ProcessEndpoint::spawn(&["./definitely-not-a-binary".to_string()]);
        assert!(matches!(err, Err(HarnessError::Spawn(_))));
        let err = ProcessEndpoint::spawn(&[]);
        assert!(matches!(err, Err(HarnessError::Spawn(_))));
    }
}
