//! Matching report claims against ground-truth findings.

use serde::{Deserialize, Serialize};

use crate::harness::Claim;
use crate::scenario::Finding;
use crate::text::{rouge_l, tokenize};

/// How one ground-truth finding fared against a report's claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingMatch {
    pub finding_id: String,
    pub novel: bool,
    /// Index into the report's claims of the best-scoring claim, when any
    /// claim scored above zero.
    pub best_claim: Option<usize>,
    pub score: f64,
    pub matched: bool,
}

/// Scores every finding against every claim, keeping each finding's best
/// claim. A finding counts as matched only when its best similarity
/// strictly exceeds `tau`; a claim sitting exactly at the threshold does
/// not count. One claim may cover several findings, and the first of
/// equally good claims wins, so results do not depend on claim order
/// beyond the report itself.
pub fn match_findings(findings: &[Finding], claims: &[Claim], tau: f64) -> Vec<FindingMatch> {
    let claim_tokens: Vec<Vec<String>> =
        claims.iter().map(|c| tokenize(&c.statement)).collect();
    findings
        .iter()
        .map(|finding| {
            let reference = tokenize(&finding.statement);
            let mut best_claim = None;
            let mut best = 0.0f64;
            for (index, candidate) in claim_tokens.iter().enumerate() {
                let score = rouge_l(&reference, candidate);
                if score > best {
                    best = score;
                    best_claim = Some(index);
                }
            }
            FindingMatch {
                finding_id: finding.finding_id.clone(),
                novel: finding.novel,
                best_claim,
                score: best,
                matched: best > tau,
            }
        })
        .collect()
}

pub fn matched_count(matches: &[FindingMatch]) -> usize {
    matches.iter().filter(|m| m.matched).count()
}

pub fn matched_novel_count(matches: &[FindingMatch]) -> usize {
    matches.iter().filter(|m| m.novel && m.matched).count()
}
