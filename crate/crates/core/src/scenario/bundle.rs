//! On-disk layout of a case bundle.
//!
//! One directory per case:
//!
//! ```text
//! <case dir>/
//!   case.json          manifest + environment snapshot
//!   events.jsonl       the audit log, one event per line
//!   alert.json         what the investigating agent is shown
//!   ground_truth.json  verdict and findings; never shown to the agent
//! ```
//!
//! The split is the access-control boundary: everything an agent may see
//! lives outside `ground_truth.json`, so a harness that never opens that
//! file cannot leak answers. All JSON is two-space pretty-printed with a
//! trailing newline, and serialization is deterministic, so regenerated
//! bundles can be compared byte for byte.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{Alert, CaseBundle, CaseManifest, EvidenceKind, GroundTruth, Verdict};
use super::ScenarioError;
use crate::cloud::{Arn, Environment};
use crate::telemetry::EventLog;
use crate::time::Timestamp;

pub const CASE_FILE: &str = "case.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const ALERT_FILE: &str = "alert.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// The agent-visible part of a bundle; reading it never touches
/// `ground_truth.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublicCase {
    pub manifest: CaseManifest,
    pub environment: Environment,
    pub log: EventLog,
    pub alert: Alert,
}

impl PublicCase {
    /// The agent-visible slice of a bundle: everything except ground truth.
    pub fn from_bundle(bundle: &CaseBundle) -> Self {
        PublicCase {
            manifest: bundle.manifest.clone(),
            environment: bundle.environment.clone(),
            log: bundle.log.clone(),
            alert: bundle.alert.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CaseFile {
    manifest: CaseManifest,
    environment: Environment,
}

fn pretty(value: &impl Serialize) -> Result<String, ScenarioError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_bundle(dir: &Path, bundle: &CaseBundle) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir)?;
    let case = CaseFile {
        manifest: bundle.manifest.clone(),
        environment: bundle.environment.clone(),
    };
    fs::write(dir.join(CASE_FILE), pretty(&case)?)?;
    fs::write(dir.join(EVENTS_FILE), bundle.log.serialize_log())?;
    fs::write(dir.join(ALERT_FILE), pretty(&bundle.alert)?)?;
    fs::write(dir.join(GROUND_TRUTH_FILE), pretty(&bundle.ground_truth)?)?;
    Ok(())
}

pub fn read_public_case(dir: &Path) -> Result<PublicCase, ScenarioError> {
    let case: CaseFile = serde_json::from_str(&fs::read_to_string(dir.join(CASE_FILE))?)?;
    let log = EventLog::parse_log(&fs::read_to_string(dir.join(EVENTS_FILE))?)?;
    let alert: Alert = serde_json::from_str(&fs::read_to_string(dir.join(ALERT_FILE))?)?;
    Ok(PublicCase { manifest: case.manifest, environment: case.environment, log, alert })
}

pub fn read_bundle(dir: &Path) -> Result<CaseBundle, ScenarioError> {
    let public = read_public_case(dir)?;
    let ground_truth: GroundTruth =
        serde_json::from_str(&fs::read_to_string(dir.join(GROUND_TRUTH_FILE))?)?;
    Ok(CaseBundle {
        manifest: public.manifest,
        environment: public.environment,
        log: public.log,
        alert: public.alert,
        ground_truth,
    })
}

/// Structural invariants every well-formed bundle satisfies. Generation
/// rejects any bundle that fails these, so downstream consumers may rely
/// on them.
pub fn check_consistency(bundle: &CaseBundle) -> Result<(), ScenarioError> {
    let case_id = &bundle.manifest.case_id;
    let fail = |reason: String| {
        Err(ScenarioError::Inconsistent { case_id: case_id.clone(), reason })
    };

    if bundle.manifest.rulebook_version.is_empty() {
        return fail("manifest has an empty rulebook version".to_string());
    }
    if bundle.alert.category != bundle.manifest.category {
        return fail("alert category disagrees with the manifest".to_string());
    }
    if bundle.alert.triggering_event_ids.is_empty() {
        return fail("alert cites no triggering events".to_string());
    }
    for id in &bundle.alert.triggering_event_ids {
        if bundle.log.by_id(id).is_none() {
            return fail(format!("alert trigger {id} is not in the log"));
        }
    }
    if !bundle
        .log
        .events()
        .iter()
        .any(|e| e.event_time == bundle.alert.fired_at)
    {
        return fail("alert fired_at matches no event time".to_string());
    }

    let truth = &bundle.ground_truth;
    if truth.verdict == Verdict::Tp && truth.findings.is_empty() {
        return fail("a TP case must carry at least one finding".to_string());
    }
    for finding in &truth.findings {
        let f = &finding.finding_id;
        if finding.statement.trim().is_empty() {
            return fail(format!("finding {f} has an empty statement"));
        }
        if finding.evidence.is_empty() {
            return fail(format!("finding {f} carries no evidence"));
        }
        for artifact in &finding.evidence {
            match artifact.kind {
                EvidenceKind::EventId => {
                    if bundle.log.by_id(&artifact.value).is_none() {
                        return fail(format!(
                            "finding {f} cites event {} absent from the log",
                            artifact.value
                        ));
                    }
                }
                EvidenceKind::Arn => {
                    if Arn::parse(&artifact.value).is_err() {
                        return fail(format!(
                            "finding {f} cites unparseable arn {:?}",
                            artifact.value
                        ));
                    }
                }
                EvidenceKind::Timestamp => {
                    let Ok(at) = Timestamp::parse(&artifact.value) else {
                        return fail(format!(
                            "finding {f} cites unparseable timestamp {:?}",
                            artifact.value
                        ));
                    };
                    if !bundle.log.events().iter().any(|e| e.event_time == at) {
                        return fail(format!(
                            "finding {f} cites timestamp {} matching no event",
                            artifact.value
                        ));
                    }
                }
            }
        }
        if finding.required_tools.is_empty() {
            let derivable = finding
                .evidence
                .iter()
                .filter(|e| e.kind == EvidenceKind::EventId)
                .all(|e| bundle.alert.triggering_event_ids.contains(&e.value));
            if !derivable {
                return fail(format!(
                    "finding {f} needs no tools yet cites non-trigger events"
                ));
            }
        }
        if finding.novel && finding.required_tools.is_empty() {
            return fail(format!("finding {f} is novel but needs no tools"));
        }
    }
    let expected_novel: Vec<&String> =
        truth.findings.iter().filter(|f| f.novel).map(|f| &f.finding_id).collect();
    let listed: Vec<&String> = truth.novel_finding_ids.iter().collect();
    if expected_novel != listed {
        return fail("novel finding ids disagree with the novel flags".to_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::execute_scenario;
    use crate::scenario::testutil::sample_spec;

    fn sample_bundle() -> CaseBundle {
        execute_scenario(&sample_spec(), 11).expect("sample executes")
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let bundle = sample_bundle();
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("one");
        write_bundle(&first, &bundle).unwrap();
        let back = read_bundle(&first).unwrap();
        let second = dir.path().join("two");
        write_bundle(&second, &back).unwrap();
        for file in [CASE_FILE, EVENTS_FILE, ALERT_FILE, GROUND_TRUTH_FILE] {
            let a = fs::read(first.join(file)).unwrap();
            let b = fs::read(second.join(file)).unwrap();
            assert_eq!(a, b, "{file} changed across a read/write cycle");
        }
    }

    #[test]
    fn verdict_only_appears_in_ground_truth() {
        let bundle = sample_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &bundle).unwrap();
        for file in [CASE_FILE, EVENTS_FILE, ALERT_FILE] {
            let text = fs::read_to_string(dir.path().join(file)).unwrap();
            assert!(
                !text.contains("verdict") && !text.contains("\"TP\"") && !text.contains("\"FP\""),
                "{file} leaks the verdict"
            );
        }
        let truth = fs::read_to_string(dir.path().join(GROUND_TRUTH_FILE)).unwrap();
        assert!(truth.contains("verdict"));
    }

    #[test]
    fn public_read_never_opens_ground_truth() {
        let bundle = sample_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &bundle).unwrap();
        fs::remove_file(dir.path().join(GROUND_TRUTH_FILE)).unwrap();
        let public = read_public_case(dir.path()).unwrap();
        assert_eq!(public.manifest.case_id, bundle.manifest.case_id);
        assert_eq!(public.log.len(), bundle.log.len());
    }

    #[test]
    fn generated_bundles_are_consistent() {
        check_consistency(&sample_bundle()).unwrap();
    }

    #[test]
    fn consistency_rejects_dangling_evidence() {
        let mut bundle = sample_bundle();
        if let Some(f) = bundle.ground_truth.findings.first_mut() {
            f.evidence = vec![super::super::types::EvidenceArtifact::event_id("no-such-event")];
        }
        let err = check_consistency(&bundle).unwrap_err().to_string();
        assert!(err.contains("no-such-event"), "{err}");
    }

    #[test]
    fn consistency_rejects_mismatched_novel_ids() {
        let mut bundle = sample_bundle();
        bundle.ground_truth.novel_finding_ids.push("f-99".to_string());
        assert!(check_consistency(&bundle).is_err());
    }

    #[test]
    fn missing_files_surface_as_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_bundle(dir.path()).is_err());
    }
}
