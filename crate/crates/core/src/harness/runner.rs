//! Batch execution: every case in a corpus against one agent, one
//! transcript per case.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scenario::{read_public_case, PublicCase};
use crate::variation::{CorpusManifest, CORPUS_FILE};

use super::session::{run_session, AgentEndpoint, Limits, SessionOutcome, REPORT_FILE};
use super::HarnessError;

/// Counts of how sessions ended across a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub cases: usize,
    pub reported: usize,
    pub no_report: usize,
    pub crashed: usize,
}

/// Runs each case in `corpus_dir` through a fresh endpoint and writes
/// `reports_dir/<case_id>/transcript.json`, plus `report.json` beside it
/// whenever the agent delivered one. The factory is called once per case
/// so agents never share state; a factory error aborts the run (it means
/// the agent cannot start at all, not that a case failed).
pub fn run_corpus<F>(
    corpus_dir: &Path,
    reports_dir: &Path,
    limits: Limits,
    jobs: usize,
    make_endpoint: F,
) -> Result<RunSummary, HarnessError>
where
    F: Fn(&PublicCase) -> Result<Box<dyn AgentEndpoint>, HarnessError> + Sync,
{
    let manifest: CorpusManifest =
        serde_json::from_str(&std::fs::read_to_string(corpus_dir.join(CORPUS_FILE))?)?;
    std::fs::create_dir_all(reports_dir)?;

    let reported = AtomicUsize::new(0);
    let no_report = AtomicUsize::new(0);
    let crashed = AtomicUsize::new(0);

    let run_one = |case_id: &str| -> Result<(), HarnessError> {
        let case = read_public_case(&corpus_dir.join("cases").join(case_id))?;
        let mut endpoint = make_endpoint(&case)?;
        let transcript = run_session(&case, endpoint.as_mut(), limits);
        match &transcript.outcome {
            SessionOutcome::Reported => reported.fetch_add(1, Ordering::Relaxed),
            SessionOutcome::NoReport { .. } => no_report.fetch_add(1, Ordering::Relaxed),
            SessionOutcome::Crashed { .. } => crashed.fetch_add(1, Ordering::Relaxed),
        };
        let case_dir = reports_dir.join(case_id);
        transcript.write(&case_dir)?;
        if let Some(report) = &transcript.report {
            let body = serde_json::to_string_pretty(report)? + "\n";
            std::fs::write(case_dir.join(REPORT_FILE), body)?;
        }
        Ok(())
    };

    let run_all =
        || manifest.cases.par_iter().try_for_each(|c| run_one(&c.case_id));
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| HarnessError::Spawn(format!("thread pool: {e}")))?
            .install(run_all)?;
    } else {
        run_all()?;
    }

    Ok(RunSummary {
        cases: manifest.cases.len(),
        reported: reported.into_inner(),
        no_report: no_report.into_inner(),
        crashed: crashed.into_inner(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::agents::{InProcessEndpoint, KeywordAgent, OracleAgent, ParrotAgent};
    use crate::harness::session::SessionTranscript;
    use crate::scenario::read_bundle;
    use crate::variation::{generate_corpus, CategoryMix, DistributionConfig};

    fn tiny_config() -> DistributionConfig {
        let mut config = DistributionConfig::default();
        config.categories = [
            ("brute_force".to_string(), CategoryMix { tp: 2, fp: 1 }),
            ("misconfiguration".to_string(), CategoryMix { tp: 1, fp: 2 }),
        ]
        .into_iter()
        .collect();
        config
    }

    #[test]
    fn a_corpus_run_writes_one_transcript_per_case() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = generate_corpus(&tiny_config(), 404, dir.path()).unwrap();
        let reports = dir.path().join("reports");

        let summary = run_corpus(dir.path(), &reports, Limits::default(), 2, |case| {
            let bundle = read_bundle(&dir.path().join("cases").join(&case.manifest.case_id))?;
            Ok(Box::new(InProcessEndpoint::new(Box::new(OracleAgent::from_bundle(&bundle)))))
        })
        .unwrap();

        assert_eq!(summary.cases, 6);
        assert_eq!(summary.reported, 6);
        assert_eq!(summary.crashed, 0);
        for case_id in manifest.case_ids() {
            let transcript = SessionTranscript::read(&reports.join(case_id)).unwrap();
            assert_eq!(transcript.case_id, case_id);
            assert_eq!(transcript.outcome, SessionOutcome::Reported);
            // The delivered report is also written standalone.
            let report = std::fs::read_to_string(reports.join(case_id).join(REPORT_FILE))
                .unwrap();
            let report: crate::harness::InvestigationReport =
                serde_json::from_str(&report).unwrap();
            assert_eq!(Some(report), transcript.report);
        }
    }

    #[test]
    fn reruns_with_a_deterministic_agent_are_identical() {
        let dir = tempfile::tempdir().unwrap();
        generate_corpus(&tiny_config(), 405, dir.path()).unwrap();
        let run = |reports: &Path| {
            run_corpus(dir.path(), reports, Limits::default(), 0, |_case| {
                Ok(Box::new(InProcessEndpoint::new(Box::new(KeywordAgent::new()))))
            })
            .unwrap()
        };
        let first = dir.path().join("r1");
        let second = dir.path().join("r2");
        assert_eq!(run(&first), run(&second));
        let manifest: CorpusManifest = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(CORPUS_FILE)).unwrap(),
        )
        .unwrap();
        for case_id in manifest.case_ids() {
            let a = std::fs::read(first.join(case_id).join("transcript.json")).unwrap();
            let b = std::fs::read(second.join(case_id).join("transcript.json")).unwrap();
            assert_eq!(a, b, "{case_id}");
        }
    }

    #[test]
    fn mixed_outcomes_are_counted_apart() {
        let dir = tempfile::tempdir().unwrap();
        generate_corpus(&tiny_config(), 406, dir.path()).unwrap();
        let counter = AtomicUsize::new(0);
        let summary = run_corpus(
            dir.path(),
            &dir.path().join("reports"),
            Limits::default(),
            0,
            |_case| {
                // Alternate parrot (reports) with silence (no report).
                let n = counter.fetch_add(1, Ordering::Relaxed);
                if n % 2 == 0 {
                    Ok(Box::new(InProcessEndpoint::new(Box::new(ParrotAgent::default()))))
                } else {
                    Ok(Box::new(InProcessEndpoint::new(Box::new(
                        crate::harness::agents::CrashAgent,
                    ))))
                }
            },
        )
        .unwrap();
        assert_eq!(summary.cases, 6);
        assert_eq!(summary.reported, 3);
        assert_eq!(summary.crashed, 3);
    }
}
