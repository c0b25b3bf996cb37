//! Per-case scoring and corpus-level aggregation.
//!
//! Rates are pooled as counts rather than averaged per case, so cases
//! with many findings weigh proportionally more. Triage is scored over
//! every case (a crash is a miss); finding recall and tool coverage are
//! scored only over sessions that did not crash.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cloud::Category;
use crate::harness::{SessionOutcome, SessionTranscript};
use crate::scenario::{CaseBundle, PublicCase, Verdict};

use super::matching::{match_findings, matched_count, matched_novel_count, FindingMatch};
use super::metrics::{score_m1, threshold_curve, CurvePoint, M1Score, Rate, TriageCall};
use super::validate::{validate_evidence, ReportValidation, DEFAULT_K_MIN};
use super::{default_expected_tools, EvalError, DEFAULT_BETA, DEFAULT_TAU};

/// Which triage numbers a summary should lead with. Both are always
/// computed; the mode only picks the headline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriageMode {
    #[default]
    Raw,
    /// Malicious verdicts whose evidence failed validation count as
    /// benign calls.
    Validated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub beta: f64,
    pub tau: f64,
    pub k_min: usize,
    pub n_thresholds: Vec<usize>,
    pub mode: TriageMode,
    /// Expected-tool table keyed by category slug; the denominator of the
    /// tool-coverage metric. Shipped defaults, overridable per deployment.
    pub expected_tools: BTreeMap<String, Vec<String>>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            beta: DEFAULT_BETA,
            tau: DEFAULT_TAU,
            k_min: DEFAULT_K_MIN,
            n_thresholds: vec![3, 5, 7],
            mode: TriageMode::Raw,
            expected_tools: default_expected_tools(),
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |reason: String| Err(EvalError::InvalidOptions { reason });
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad("beta must be a positive finite number".to_string());
        }
        if !(0.0..1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1)".to_string());
        }
        if self.k_min == 0 {
            return bad("k_min must be at least 1".to_string());
        }
        if self.n_thresholds.is_empty() {
            return bad("at least one depth threshold is required".to_string());
        }
        for (slug, tools) in &self.expected_tools {
            if !Category::ALL.iter().any(|c| c.slug() == slug) {
                return bad(format!("expected-tool table names unknown category {slug:?}"));
            }
            if tools.is_empty() {
                return bad(format!("expected-tool list for {slug} is empty"));
            }
            for tool in tools {
                if crate::harness::find_tool(tool).is_none() {
                    return bad(format!(
                        "expected-tool table names unknown tool {tool:?} for {slug}"
                    ));
                }
            }
        }
        Ok(())
    }

    fn expected_for(&self, category: Category) -> &[String] {
        self.expected_tools.get(category.slug()).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Everything scored about one case/transcript pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseEvaluation {
    pub case_id: String,
    pub category: Category,
    pub ground_verdict: Verdict,
    pub outcome: SessionOutcome,
    /// False exactly when the session crashed; a crashed session's report
    /// surface (including any report it managed to emit) is not scored.
    pub scorable: bool,
    pub triage_raw: TriageCall,
    /// As `triage_raw`, but malicious verdicts lacking evidence support
    /// are treated as benign calls.
    pub triage_validated: TriageCall,
    /// Ground-truth findings matched by some claim.
    pub findings: Rate,
    /// The novel subset of the same.
    pub novel: Rate,
    /// Expected tools for the category actually invoked.
    pub tools: Rate,
    pub matches: Vec<FindingMatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ReportValidation>,
}

pub fn evaluate_case(
    bundle: &CaseBundle,
    transcript: &SessionTranscript,
    options: &EvalOptions,
) -> CaseEvaluation {
    let scorable = !matches!(transcript.outcome, SessionOutcome::Crashed { .. });
    let report = transcript.report.as_ref().filter(|_| scorable);

    let claims = report.map(|r| r.claims.as_slice()).unwrap_or(&[]);
    let matches = match_findings(&bundle.ground_truth.findings, claims, options.tau);
    let findings = Rate::new(matched_count(&matches), matches.len());
    let novel = Rate::new(
        matched_novel_count(&matches),
        matches.iter().filter(|m| m.novel).count(),
    );

    let expected = options.expected_for(bundle.manifest.category);
    let invoked: BTreeSet<&str> =
        transcript.tool_calls.iter().map(|c| c.tool.as_str()).collect();
    let tools = Rate::new(
        expected.iter().filter(|t| invoked.contains(t.as_str())).count(),
        expected.len(),
    );

    let validation = report
        .map(|r| validate_evidence(r, &PublicCase::from_bundle(bundle), options.k_min));

    let triage_raw = match (&transcript.outcome, report) {
        (SessionOutcome::Crashed { .. }, _) => TriageCall::Crashed,
        (_, Some(r)) => TriageCall::Verdict(r.verdict),
        (_, None) => TriageCall::NoReport,
    };
    let triage_validated = match (&triage_raw, &validation) {
        (TriageCall::Verdict(Verdict::Tp), Some(v)) if v.downgraded => {
            TriageCall::Verdict(Verdict::Fp)
        }
        (call, _) => *call,
    };

    CaseEvaluation {
        case_id: bundle.manifest.case_id.clone(),
        category: bundle.manifest.category,
        ground_verdict: bundle.ground_truth.verdict,
        outcome: transcript.outcome.clone(),
        scorable,
        triage_raw,
        triage_validated,
        findings,
        novel,
        tools,
        matches,
        validation,
    }
}

/// The metric set computed for one case population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBlock {
    pub cases: usize,
    pub scorable: usize,
    pub m1_raw: M1Score,
    pub m1_validated: M1Score,
    pub m2_findings: Rate,
    pub m2_novel: Rate,
    pub m3_tools: Rate,
}

fn block<'a>(cases: impl Iterator<Item = &'a CaseEvaluation> + Clone, beta: f64) -> MetricBlock {
    let m1_raw = score_m1(
        cases.clone().map(|c| (c.ground_verdict, c.triage_raw)),
        beta,
    );
    let m1_validated = score_m1(
        cases.clone().map(|c| (c.ground_verdict, c.triage_validated)),
        beta,
    );
    let mut m2_findings = Rate::default();
    let mut m2_novel = Rate::default();
    let mut m3_tools = Rate::default();
    let mut total = 0;
    let mut scorable = 0;
    for case in cases {
        total += 1;
        if !case.scorable {
            continue;
        }
        scorable += 1;
        m2_findings.merge(case.findings);
        m2_novel.merge(case.novel);
        m3_tools.merge(case.tools);
    }
    MetricBlock {
        cases: total,
        scorable,
        m1_raw,
        m1_validated,
        m2_findings,
        m2_novel,
        m3_tools,
    }
}

/// The full evaluation artifact written to the summary directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub options: EvalOptions,
    pub overall: MetricBlock,
    pub per_category: BTreeMap<String, MetricBlock>,
    /// Share of scorable attack cases where the agent matched at least
    /// `n` novel findings.
    pub novel_hit_curve: Vec<CurvePoint>,
    /// Share of attack cases whose ground truth holds at least `n` novel
    /// findings; a property of the corpus, not of the agent.
    pub novel_depth_curve: Vec<CurvePoint>,
    /// Mean ground-truth novel findings per attack case.
    pub avg_novel_per_attack_case: Option<f64>,
    pub unscorable: Vec<String>,
    pub no_report: Vec<String>,
    /// Cases whose transcript was absent on disk; scored as no-report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_transcripts: Vec<String>,
    pub cases: Vec<CaseEvaluation>,
}

pub fn aggregate(mut cases: Vec<CaseEvaluation>, options: &EvalOptions) -> Evaluation {
    cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));

    let overall = block(cases.iter(), options.beta);
    let mut per_category = BTreeMap::new();
    for category in Category::ALL {
        let slice: Vec<&CaseEvaluation> =
            cases.iter().filter(|c| c.category == category).collect();
        if !slice.is_empty() {
            per_category.insert(
                category.slug().to_string(),
                block(slice.iter().copied(), options.beta),
            );
        }
    }

    let attack_cases: Vec<&CaseEvaluation> =
        cases.iter().filter(|c| c.ground_verdict == Verdict::Tp).collect();
    let hit_counts: Vec<usize> = attack_cases
        .iter()
        .filter(|c| c.scorable)
        .map(|c| c.novel.hits)
        .collect();
    let depth_counts: Vec<usize> = attack_cases.iter().map(|c| c.novel.total).collect();
    let novel_hit_curve = threshold_curve(&hit_counts, &options.n_thresholds);
    let novel_depth_curve = threshold_curve(&depth_counts, &options.n_thresholds);
    let avg_novel_per_attack_case = (!depth_counts.is_empty())
        .then(|| depth_counts.iter().sum::<usize>() as f64 / depth_counts.len() as f64);

    let unscorable: Vec<String> = cases
        .iter()
        .filter(|c| !c.scorable)
        .map(|c| c.case_id.clone())
        .collect();
    let no_report: Vec<String> = cases
        .iter()
        .filter(|c| matches!(c.outcome, SessionOutcome::NoReport { .. }))
        .map(|c| c.case_id.clone())
        .collect();

    Evaluation {
        options: options.clone(),
        overall,
        per_category,
        novel_hit_curve,
        novel_depth_curve,
        avg_novel_per_attack_case,
        unscorable,
        no_report,
        missing_transcripts: Vec::new(),
        cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{
        run_session, InProcessEndpoint, KeywordAgent, Limits, OracleAgent, ParrotAgent,
    };
    use crate::scenario::execute_scenario;
    use crate::variation::{fp_seeds, tp_seeds};

    fn all_bundles() -> Vec<CaseBundle> {
        let mut out = Vec::new();
        for category in Category::ALL {
            for seed in tp_seeds(category) {
                out.push(execute_scenario(&seed, 71).unwrap());
            }
            for seed in fp_seeds(category) {
                out.push(execute_scenario(&seed, 72).unwrap());
            }
        }
        out
    }

    fn transcript_for(
        bundle: &CaseBundle,
        agent: Box<dyn crate::harness::ScriptedAgent>,
    ) -> SessionTranscript {
        let case = PublicCase::from_bundle(bundle);
        let mut endpoint = InProcessEndpoint::new(agent);
        run_session(&case, &mut endpoint, Limits::default())
    }

    #[test]
    fn the_oracle_scores_perfectly_in_both_modes() {
        let options = EvalOptions::default();
        let cases: Vec<CaseEvaluation> = all_bundles()
            .iter()
            .map(|b| {
                let t = transcript_for(b, Box::new(OracleAgent::from_bundle(b)));
                evaluate_case(b, &t, &options)
            })
            .collect();
        let eval = aggregate(cases, &options);
        assert_eq!(eval.overall.m1_raw.f_beta, Some(1.0));
        assert_eq!(eval.overall.m1_validated.f_beta, Some(1.0));
        assert_eq!(eval.overall.m2_findings.value(), Some(1.0));
        assert_eq!(eval.overall.m2_novel.value(), Some(1.0));
        assert_eq!(eval.overall.m3_tools.value(), Some(1.0));
        assert!(eval.unscorable.is_empty());
    }

    #[test]
    fn the_parrot_collapses_under_validation() {
        let options = EvalOptions::default();
        let cases: Vec<CaseEvaluation> = all_bundles()
            .iter()
            .map(|b| {
                let t = transcript_for(b, Box::new(ParrotAgent::default()));
                evaluate_case(b, &t, &options)
            })
            .collect();
        let eval = aggregate(cases, &options);
        // Raw: calling everything malicious aces the attack half and
        // flunks the benign half.
        assert_eq!(eval.overall.m1_raw.tp.value(), Some(1.0));
        assert_eq!(eval.overall.m1_raw.fp.value(), Some(0.0));
        // Validated: every malicious verdict rests on the alert's own
        // trigger events, so all of them downgrade.
        assert_eq!(eval.overall.m1_validated.tp.value(), Some(0.0));
        assert_eq!(eval.overall.m1_validated.fp.value(), Some(1.0));
        assert_eq!(eval.overall.m1_validated.f_beta, Some(0.0));
        // Parroted text never clears the similarity bar on novel findings.
        assert_eq!(eval.overall.m2_novel.hits, 0);
        assert_eq!(eval.overall.m3_tools.hits, 0);
    }

    #[test]
    fn scores_order_oracle_above_keyword_above_parrot() {
        let options = EvalOptions::default();
        let bundles = all_bundles();
        let run = |make: &dyn Fn(&CaseBundle) -> Box<dyn crate::harness::ScriptedAgent>| {
            let cases: Vec<CaseEvaluation> = bundles
                .iter()
                .map(|b| evaluate_case(b, &transcript_for(b, make(b)), &options))
                .collect();
            aggregate(cases, &options)
        };
        let oracle = run(&|b| Box::new(OracleAgent::from_bundle(b)));
        let keyword = run(&|_| Box::new(KeywordAgent::new()));
        let parrot = run(&|_| Box::new(ParrotAgent::default()));

        // Triage alone cannot strictly separate the top pair: the keyword
        // heuristic may go clean on the seed set too. The strict gaps are
        // in novel-finding recall and tool coverage.
        let f = |e: &Evaluation| e.overall.m1_validated.f_beta.unwrap();
        assert!(f(&oracle) >= f(&keyword), "{} vs {}", f(&oracle), f(&keyword));
        assert!(f(&keyword) > f(&parrot), "{} vs {}", f(&keyword), f(&parrot));
        assert_eq!(oracle.overall.m2_novel.value(), Some(1.0));
        assert!(
            oracle.overall.m2_novel.value() > keyword.overall.m2_novel.value(),
            "oracle must beat keyword on novel findings"
        );
        assert!(
            keyword.overall.m2_findings.value() >= parrot.overall.m2_findings.value(),
            "{:?} vs {:?}",
            keyword.overall.m2_findings,
            parrot.overall.m2_findings
        );
        let m3 = |e: &Evaluation| e.overall.m3_tools.value().unwrap();
        assert!(m3(&keyword) > 0.5, "{}", m3(&keyword));
        assert!(m3(&keyword) > m3(&parrot));
        assert_eq!(m3(&parrot), 0.0);
    }

    #[test]
    fn a_crash_is_excluded_from_depth_but_counted_in_triage() {
        let options = EvalOptions::default();
        let bundles = all_bundles();
        let cases: Vec<CaseEvaluation> = bundles
            .iter()
            .map(|b| {
                let t = transcript_for(b, Box::new(crate::harness::CrashAgent));
                evaluate_case(b, &t, &options)
            })
            .collect();
        let eval = aggregate(cases, &options);
        assert_eq!(eval.overall.scorable, 0);
        assert_eq!(eval.overall.m2_findings.total, 0);
        assert_eq!(eval.overall.m2_findings.value(), None);
        // Every case still appears in triage, as a miss on both sides.
        assert_eq!(eval.overall.m1_raw.tp.value(), Some(0.0));
        assert_eq!(eval.overall.m1_raw.fp.value(), Some(0.0));
        assert_eq!(eval.unscorable.len(), bundles.len());
    }

    #[test]
    fn per_category_blocks_sum_to_the_overall_pool() {
        let options = EvalOptions::default();
        let cases: Vec<CaseEvaluation> = all_bundles()
            .iter()
            .map(|b| {
                let t = transcript_for(b, Box::new(KeywordAgent::new()));
                evaluate_case(b, &t, &options)
            })
            .collect();
        let eval = aggregate(cases, &options);
        let summed: usize =
            eval.per_category.values().map(|b| b.m2_findings.hits).sum();
        assert_eq!(summed, eval.overall.m2_findings.hits);
        let summed: usize = eval.per_category.values().map(|b| b.cases).sum();
        assert_eq!(summed, eval.overall.cases);
        assert_eq!(eval.per_category.len(), 4);
    }

    #[test]
    fn options_are_validated() {
        assert!(EvalOptions::default().validate().is_ok());
        let bad = EvalOptions { beta: 0.0, ..EvalOptions::default() };
        assert!(bad.validate().is_err());
        let bad = EvalOptions { tau: 1.0, ..EvalOptions::default() };
        assert!(bad.validate().is_err());
        let bad = EvalOptions { k_min: 0, ..EvalOptions::default() };
        assert!(bad.validate().is_err());
        let bad = EvalOptions { n_thresholds: vec![], ..EvalOptions::default() };
        assert!(bad.validate().is_err());

        let mut bad = EvalOptions::default();
        bad.expected_tools.insert("phishing".to_string(), vec!["lookup_events".to_string()]);
        assert!(bad.validate().is_err());
        let mut bad = EvalOptions::default();
        bad.expected_tools
            .insert("brute_force".to_string(), vec!["grep_everything".to_string()]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn overridden_expected_tools_change_the_coverage_denominator() {
        let bundles = all_bundles();
        let bundle = bundles.iter().find(|b| b.manifest.category == Category::BruteForce).unwrap();
        let t = transcript_for(bundle, Box::new(OracleAgent::from_bundle(bundle)));

        let mut options = EvalOptions::default();
        options
            .expected_tools
            .insert("brute_force".to_string(), vec!["lookup_events".to_string()]);
        let case = evaluate_case(bundle, &t, &options);
        assert_eq!(case.tools, Rate::new(1, 1));

        // A category missing from the table has no denominator at all.
        options.expected_tools.remove("brute_force");
        let case = evaluate_case(bundle, &t, &options);
        assert_eq!(case.tools.value(), None);
    }

    #[test]
    fn evaluations_serialize_round_trip() {
        let options = EvalOptions::default();
        let bundle = &all_bundles()[0];
        let t = transcript_for(bundle, Box::new(ParrotAgent::default()));
        let eval = aggregate(vec![evaluate_case(bundle, &t, &options)], &options);
        let json = serde_json::to_string(&eval).unwrap();
        let back: Evaluation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, eval);
    }
}
