//! Disk-to-disk evaluation: pair every corpus bundle with its session
//! transcript and aggregate the scores.

use std::fs;
use std::path::Path;

use crate::harness::{SessionOutcome, SessionTranscript, TRANSCRIPT_FILE};
use crate::scenario::read_bundle;
use crate::variation::{CorpusManifest, CORPUS_FILE};

use super::aggregate::{aggregate, evaluate_case, CaseEvaluation, EvalOptions, Evaluation};
use super::report::{render_csv, render_markdown};
use super::EvalError;

/// The machine-readable summary, plus its rendered table files.
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_MD: &str = "summary.md";
pub const SUMMARY_CSV: &str = "summary.csv";

/// Scores every case listed in the corpus manifest against the transcript
/// under `reports_dir/<case_id>/`. A case with no transcript on disk is
/// scored as a no-report session and listed in the result; a transcript
/// naming a different case is an error (crossed wires, not a bad agent).
pub fn evaluate_corpus(
    corpus_dir: &Path,
    reports_dir: &Path,
    options: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    options.validate()?;
    let manifest: CorpusManifest =
        serde_json::from_str(&fs::read_to_string(corpus_dir.join(CORPUS_FILE))?)?;
    let cases_dir = corpus_dir.join("cases");

    let mut cases: Vec<CaseEvaluation> = Vec::with_capacity(manifest.cases.len());
    let mut missing: Vec<String> = Vec::new();
    for case_id in manifest.case_ids() {
        let bundle = read_bundle(&cases_dir.join(case_id))?;
        let case_dir = reports_dir.join(case_id);
        let transcript = if case_dir.join(TRANSCRIPT_FILE).exists() {
            let transcript = SessionTranscript::read(&case_dir)?;
            if transcript.case_id != case_id {
                return Err(EvalError::TranscriptMismatch {
                    expected: case_id.to_string(),
                    found: transcript.case_id,
                });
            }
            transcript
        } else {
            missing.push(case_id.to_string());
            SessionTranscript {
                case_id: case_id.to_string(),
                category: bundle.manifest.category.slug().to_string(),
                outcome: SessionOutcome::NoReport {
                    reason: "no transcript on disk".to_string(),
                },
                tool_calls: Vec::new(),
                report: None,
            }
        };
        cases.push(evaluate_case(&bundle, &transcript, options));
    }
    let mut evaluation = aggregate(cases, options);
    evaluation.missing_transcripts = missing;
    Ok(evaluation)
}

/// Writes `summary.json` plus the rendered markdown and CSV tables.
pub fn write_summary(summary_dir: &Path, eval: &Evaluation) -> Result<(), EvalError> {
    fs::create_dir_all(summary_dir)?;
    let json = serde_json::to_string_pretty(eval)? + "\n";
    fs::write(summary_dir.join(SUMMARY_JSON), json)?;
    fs::write(summary_dir.join(SUMMARY_MD), render_markdown(eval))?;
    fs::write(summary_dir.join(SUMMARY_CSV), render_csv(eval))?;
    Ok(())
}

pub fn read_evaluation(summary_dir: &Path) -> Result<Evaluation, EvalError> {
    let text = fs::read_to_string(summary_dir.join(SUMMARY_JSON))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_corpus, InProcessEndpoint, Limits, OracleAgent};
    use crate::variation::{generate_corpus, CategoryMix, DistributionConfig};
    use std::collections::BTreeMap;

    fn tiny_config() -> DistributionConfig {
        let mut categories = BTreeMap::new();
        categories.insert("brute_force".to_string(), CategoryMix { tp: 2, fp: 1 });
        categories.insert("misconfiguration".to_string(), CategoryMix { tp: 1, fp: 1 });
        DistributionConfig { compression_factor: 0.25, categories }
    }

    fn oracle_run(corpus_dir: &Path, reports_dir: &Path) {
        let corpus = corpus_dir.to_path_buf();
        run_corpus(corpus_dir, reports_dir, Limits::default(), 0, |case| {
            let bundle = read_bundle(&corpus.join("cases").join(&case.manifest.case_id))?;
            Ok(Box::new(InProcessEndpoint::new(Box::new(OracleAgent::from_bundle(&bundle)))))
        })
        .unwrap();
    }

    #[test]
    fn evaluates_a_generated_corpus_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_dir = dir.path().join("corpus");
        let reports_dir = dir.path().join("reports");
        generate_corpus(&tiny_config(), 404, &corpus_dir).unwrap();
        oracle_run(&corpus_dir, &reports_dir);

        let eval =
            evaluate_corpus(&corpus_dir, &reports_dir, &EvalOptions::default()).unwrap();
        assert_eq!(eval.overall.cases, 5);
        assert_eq!(eval.overall.m1_raw.f_beta, Some(1.0));
        assert_eq!(eval.per_category.len(), 2);
        assert!(eval.missing_transcripts.is_empty());

        let summary_dir = dir.path().join("summary");
        write_summary(&summary_dir, &eval).unwrap();
        let back = read_evaluation(&summary_dir).unwrap();
        assert_eq!(back, eval);
        assert!(summary_dir.join(SUMMARY_MD).exists());
        assert!(summary_dir.join(SUMMARY_CSV).exists());
    }

    #[test]
    fn missing_transcripts_score_as_no_report_and_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_dir = dir.path().join("corpus");
        let reports_dir = dir.path().join("reports");
        let manifest = generate_corpus(&tiny_config(), 405, &corpus_dir).unwrap();
        oracle_run(&corpus_dir, &reports_dir);

        let dropped = &manifest.cases[0].case_id;
        fs::remove_file(reports_dir.join(dropped).join(TRANSCRIPT_FILE)).unwrap();

        let eval =
            evaluate_corpus(&corpus_dir, &reports_dir, &EvalOptions::default()).unwrap();
        assert_eq!(eval.missing_transcripts, vec![dropped.clone()]);
        assert!(eval.no_report.contains(dropped));
        assert_eq!(eval.overall.cases, 5);
        // The dropped case (an attack case) now counts as a triage miss.
        assert!(eval.overall.m1_raw.tp.value() < Some(1.0));
    }

    #[test]
    fn an_entirely_absent_run_still_evaluates_as_all_no_report() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_dir = dir.path().join("corpus");
        generate_corpus(&tiny_config(), 407, &corpus_dir).unwrap();
        let eval = evaluate_corpus(
            &corpus_dir,
            &dir.path().join("never-ran"),
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(eval.missing_transcripts.len(), 5);
        assert_eq!(eval.overall.m1_raw.tp.value(), Some(0.0));
        // Silence counts as calling everything benign.
        assert_eq!(eval.overall.m1_raw.fp.value(), Some(1.0));
    }

    #[test]
    fn a_transcript_for_the_wrong_case_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_dir = dir.path().join("corpus");
        let reports_dir = dir.path().join("reports");
        let manifest = generate_corpus(&tiny_config(), 406, &corpus_dir).unwrap();
        oracle_run(&corpus_dir, &reports_dir);

        // Swap two transcripts on disk.
        let a = reports_dir.join(&manifest.cases[0].case_id);
        let b = reports_dir.join(&manifest.cases[1].case_id);
        let tmp = reports_dir.join("swap-tmp");
        fs::rename(&a, &tmp).unwrap();
        fs::rename(&b, &a).unwrap();
        fs::rename(&tmp, &b).unwrap();

        let err = evaluate_corpus(&corpus_dir, &reports_dir, &EvalOptions::default())
            .unwrap_err();
        assert!(matches!(err, EvalError::TranscriptMismatch { .. }), "got {err:?}");
    }

    #[test]
    fn rejects_invalid_options_before_touching_disk() {
        let bad = EvalOptions { tau: 2.0, ..EvalOptions::default() };
        let err = evaluate_corpus(Path::new("/nonexistent"), Path::new("/nonexistent"), &bad)
            .unwrap_err();
        assert!(matches!(err, EvalError::InvalidOptions { .. }));
    }
}
