//! Human- and machine-readable summaries of an [`Evaluation`].
//!
//! Both renderers are deterministic: fixed section order, fixed float
//! widths, and the literal marker `undefined` wherever a denominator was
//! empty, so reruns diff cleanly.

use std::fmt::Write as _;

use super::aggregate::{Evaluation, MetricBlock, TriageMode};
use super::metrics::{CurvePoint, Rate};

/// Most case ids listed per failure line before eliding the rest.
const MAX_LISTED_IDS: usize = 10;

fn pct(value: f64) -> String {
    format!("{:.1}%", 100.0 * value)
}

fn fmt_rate(rate: Rate) -> String {
    match rate.value() {
        Some(v) => format!("{} ({}/{})", pct(v), rate.hits, rate.total),
        None => format!("undefined ({}/{})", rate.hits, rate.total),
    }
}

fn fmt_score(score: Option<f64>) -> String {
    match score {
        Some(v) => format!("{v:.3}"),
        None => "undefined".to_string(),
    }
}

fn fmt_curve(curve: &[CurvePoint]) -> String {
    let parts: Vec<String> = curve
        .iter()
        .map(|p| match p.rate.value() {
            Some(v) => format!(">={}: {}", p.n, pct(v)),
            None => format!(">={}: undefined", p.n),
        })
        .collect();
    parts.join(", ")
}

fn fmt_ids(ids: &[String]) -> String {
    if ids.is_empty() {
        return "none".to_string();
    }
    let shown: Vec<&str> = ids.iter().take(MAX_LISTED_IDS).map(String::as_str).collect();
    let hidden = ids.len().saturating_sub(shown.len());
    let mut out = format!("{}: ", ids.len());
    out.push_str(&shown.join(", "));
    if hidden > 0 {
        let _ = write!(out, " (and {hidden} more)");
    }
    out
}

pub fn render_markdown(eval: &Evaluation) -> String {
    let mut out = String::new();
    let o = &eval.overall;
    let crashed = eval.unscorable.len();
    let _ = writeln!(out, "# Evaluation summary");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "- cases: {} (scorable {}, crashed {}, no report {})",
        o.cases,
        o.scorable,
        crashed,
        eval.no_report.len()
    );
    let _ = writeln!(
        out,
        "- beta: {}, tau: {}, k_min: {}",
        eval.options.beta, eval.options.tau, eval.options.k_min
    );
    let (mode, headline) = match eval.options.mode {
        TriageMode::Raw => ("raw", o.m1_raw.f_beta),
        TriageMode::Validated => ("validated", o.m1_validated.f_beta),
    };
    let _ = writeln!(out, "- headline triage F ({mode} mode): {}", fmt_score(headline));
    let _ = writeln!(out);

    let _ = writeln!(out, "## Triage");
    let _ = writeln!(out);
    let _ = writeln!(out, "| mode | attack cases called | benign cases called | F |");
    let _ = writeln!(out, "|---|---|---|---|");
    let _ = writeln!(
        out,
        "| raw | {} | {} | {} |",
        fmt_rate(o.m1_raw.tp),
        fmt_rate(o.m1_raw.fp),
        fmt_score(o.m1_raw.f_beta)
    );
    let _ = writeln!(
        out,
        "| validated | {} | {} | {} |",
        fmt_rate(o.m1_validated.tp),
        fmt_rate(o.m1_validated.fp),
        fmt_score(o.m1_validated.f_beta)
    );
    let _ = writeln!(out);

    let _ = writeln!(out, "## Findings");
    let _ = writeln!(out);
    let _ = writeln!(out, "- matched: {}", fmt_rate(o.m2_findings));
    let _ = writeln!(out, "- novel matched: {}", fmt_rate(o.m2_novel));
    let _ = writeln!(out, "- novel hit curve: {}", fmt_curve(&eval.novel_hit_curve));
    let avg = eval
        .avg_novel_per_attack_case
        .map(|v| format!("{v:.2}"))
        .unwrap_or_else(|| "undefined".to_string());
    let _ = writeln!(out, "- corpus novel depth: avg {avg} per attack case");
    let _ = writeln!(out, "- corpus depth curve: {}", fmt_curve(&eval.novel_depth_curve));
    let _ = writeln!(out);

    let _ = writeln!(out, "## Tool coverage");
    let _ = writeln!(out);
    let _ = writeln!(out, "- expected tools invoked: {}", fmt_rate(o.m3_tools));
    let _ = writeln!(out);

    let _ = writeln!(out, "## Per category");
    let _ = writeln!(out);
    let _ = writeln!(out, "| category | cases | F raw | F validated | findings | novel | tools |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|");
    for (slug, block) in &eval.per_category {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            slug,
            block.cases,
            fmt_score(block.m1_raw.f_beta),
            fmt_score(block.m1_validated.f_beta),
            fmt_rate(block.m2_findings),
            fmt_rate(block.m2_novel),
            fmt_rate(block.m3_tools)
        );
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "## Sessions");
    let _ = writeln!(out);
    let _ = writeln!(out, "- crashed: {}", fmt_ids(&eval.unscorable));
    let _ = writeln!(out, "- no report: {}", fmt_ids(&eval.no_report));
    let _ = writeln!(out, "- missing transcripts: {}", fmt_ids(&eval.missing_transcripts));
    out
}

fn csv_rate(out: &mut String, scope: &str, metric: &str, rate: Rate) {
    let value = match rate.value() {
        Some(v) => format!("{v:.6}"),
        None => "undefined".to_string(),
    };
    let _ = writeln!(out, "{scope},{metric},{value}");
    let _ = writeln!(out, "{scope},{metric}_hits,{}", rate.hits);
    let _ = writeln!(out, "{scope},{metric}_total,{}", rate.total);
}

fn csv_score(out: &mut String, scope: &str, metric: &str, score: Option<f64>) {
    let value = match score {
        Some(v) => format!("{v:.6}"),
        None => "undefined".to_string(),
    };
    let _ = writeln!(out, "{scope},{metric},{value}");
}

fn csv_block(out: &mut String, scope: &str, block: &MetricBlock) {
    let _ = writeln!(out, "{scope},cases,{}", block.cases);
    let _ = writeln!(out, "{scope},scorable,{}", block.scorable);
    csv_rate(out, scope, "m1_raw_attack", block.m1_raw.tp);
    csv_rate(out, scope, "m1_raw_benign", block.m1_raw.fp);
    csv_score(out, scope, "m1_raw_f", block.m1_raw.f_beta);
    csv_rate(out, scope, "m1_validated_attack", block.m1_validated.tp);
    csv_rate(out, scope, "m1_validated_benign", block.m1_validated.fp);
    csv_score(out, scope, "m1_validated_f", block.m1_validated.f_beta);
    csv_rate(out, scope, "m2_findings", block.m2_findings);
    csv_rate(out, scope, "m2_novel", block.m2_novel);
    csv_rate(out, scope, "m3_tools", block.m3_tools);
}

pub fn render_csv(eval: &Evaluation) -> String {
    let mut out = String::from("scope,metric,value\n");
    let _ = writeln!(out, "options,beta,{}", eval.options.beta);
    let _ = writeln!(out, "options,tau,{}", eval.options.tau);
    let _ = writeln!(out, "options,k_min,{}", eval.options.k_min);
    csv_block(&mut out, "overall", &eval.overall);
    for point in &eval.novel_hit_curve {
        csv_rate(&mut out, "novel_hit_curve", &format!("n{}", point.n), point.rate);
    }
    for point in &eval.novel_depth_curve {
        csv_rate(&mut out, "novel_depth_curve", &format!("n{}", point.n), point.rate);
    }
    csv_score(&mut out, "corpus", "avg_novel_per_attack_case", eval.avg_novel_per_attack_case);
    for (slug, block) in &eval.per_category {
        csv_block(&mut out, &format!("category:{slug}"), block);
    }
    let _ = writeln!(out, "sessions,crashed,{}", eval.unscorable.len());
    let _ = writeln!(out, "sessions,no_report,{}", eval.no_report.len());
    let _ = writeln!(out, "sessions,missing_transcripts,{}", eval.missing_transcripts.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::eval::{aggregate, CaseEvaluation, EvalOptions, TriageCall};
    use crate::harness::SessionOutcome;
    use crate::scenario::Verdict;

    fn fake_case(id: &str, category: Category, verdict: Verdict, crashed: bool) -> CaseEvaluation {
        let (outcome, scorable, call) = if crashed {
            (
                SessionOutcome::Crashed { reason: "boom".to_string() },
                false,
                TriageCall::Crashed,
            )
        } else {
            (SessionOutcome::Reported, true, TriageCall::Verdict(verdict))
        };
        CaseEvaluation {
            case_id: id.to_string(),
            category,
            ground_verdict: verdict,
            outcome,
            scorable,
            triage_raw: call,
            triage_validated: call,
            findings: Rate::new(3, 4),
            novel: Rate::new(2, 3),
            tools: Rate::new(2, 3),
            matches: vec![],
            validation: None,
        }
    }

    fn sample() -> Evaluation {
        let cases = vec![
            fake_case("bf-tp-0000", Category::BruteForce, Verdict::Tp, false),
            fake_case("bf-fp-0000", Category::BruteForce, Verdict::Fp, false),
            fake_case("mis-tp-0000", Category::Misconfiguration, Verdict::Tp, true),
        ];
        aggregate(cases, &EvalOptions::default())
    }

    #[test]
    fn markdown_contains_the_headline_numbers() {
        let text = render_markdown(&sample());
        assert!(text.contains("cases: 3 (scorable 2, crashed 1, no report 0)"), "{text}");
        assert!(text.contains("| raw | 50.0% (1/2) | 100.0% (1/1) |"), "{text}");
        assert!(text.contains("- matched: 75.0% (6/8)"), "{text}");
        assert!(text.contains("crashed: 1: mis-tp-0000"), "{text}");
        assert!(text.contains("| brute_force | 2 |"), "{text}");
    }

    #[test]
    fn undefined_denominators_are_marked_not_faked() {
        let cases = vec![fake_case("bf-fp-0000", Category::BruteForce, Verdict::Fp, false)];
        let eval = aggregate(cases, &EvalOptions::default());
        let text = render_markdown(&eval);
        // No attack cases at all: attack-side rate, F, and both novel
        // curves have empty denominators.
        assert!(text.contains("| raw | undefined (0/0) | 100.0% (1/1) | undefined |"), "{text}");
        assert!(text.contains(">=3: undefined"), "{text}");
        let csv = render_csv(&eval);
        assert!(csv.contains("overall,m1_raw_attack,undefined"), "{csv}");
        assert!(csv.contains("overall,m1_raw_f,undefined"), "{csv}");
    }

    #[test]
    fn csv_is_one_record_per_line_with_a_header() {
        let csv = render_csv(&sample());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("scope,metric,value"));
        for line in lines {
            assert_eq!(line.split(',').count(), 3, "bad row: {line}");
        }
        assert!(csv.contains("category:brute_force,cases,2"), "{csv}");
        assert!(csv.contains("overall,m2_findings,0.750000"), "{csv}");
        assert!(csv.contains("sessions,crashed,1"), "{csv}");
    }

    #[test]
    fn renders_are_stable_across_calls() {
        let eval = sample();
        assert_eq!(render_markdown(&eval), render_markdown(&eval));
        assert_eq!(render_csv(&eval), render_csv(&eval));
    }

    #[test]
    fn long_failure_lists_are_elided() {
        let ids: Vec<String> = (0..14).map(|i| format!("bf-tp-{i:04}")).collect();
        let line = fmt_ids(&ids);
        assert!(line.starts_with("14: bf-tp-0000,"), "{line}");
        assert!(line.ends_with("(and 4 more)"), "{line}");
        assert_eq!(fmt_ids(&[]), "none");
    }
}
