//! Adversarial evidence validation.
//!
//! A malicious-verdict report must point at something real beyond the
//! alert itself. Each claim's references are resolved against the case:
//! event ids must exist in the log and ARNs must name provisioned or
//! created resources. Timestamps and free text resolve to nothing. A
//! claim whose resolvable references are exactly the alert's triggering
//! events is parroting, not investigating, and does not count as support.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::harness::InvestigationReport;
use crate::scenario::{PublicCase, Verdict};

/// Minimum number of evidence-supported claims a malicious verdict needs.
pub const DEFAULT_K_MIN: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidEvidence {
    /// The claim cites nothing at all.
    NoEvidence,
    /// Nothing the claim cites exists in the case.
    UnresolvableRefs,
    /// Everything the claim resolves to is already in the alert.
    AlertOnlyEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim_index: usize,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<InvalidEvidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportValidation {
    pub checks: Vec<ClaimCheck>,
    pub supported_claims: usize,
    /// Whether the report clears the `k_min` bar.
    pub supported: bool,
    /// True when a malicious verdict lacked support. Benign verdicts are
    /// never downgraded; claiming nothing happened needs no evidence.
    pub downgraded: bool,
}

/// Checks every claim of a report against the public case.
pub fn validate_evidence(
    report: &InvestigationReport,
    case: &PublicCase,
    k_min: usize,
) -> ReportValidation {
    let event_ids: BTreeSet<&str> =
        case.log.events().iter().map(|e| e.event_id.as_str()).collect();
    let alert_ids: BTreeSet<&str> =
        case.alert.triggering_event_ids.iter().map(String::as_str).collect();
    let mut arns: BTreeSet<String> = BTreeSet::new();
    for account in case.environment.accounts.values() {
        arns.extend(account.principals.values().map(|p| p.arn.render()));
        arns.extend(account.buckets.values().map(|b| b.arn.render()));
        arns.extend(account.instances.values().map(|i| i.arn.render()));
        arns.extend(account.security_groups.values().map(|g| g.arn.render()));
    }

    let checks: Vec<ClaimCheck> = report
        .claims
        .iter()
        .enumerate()
        .map(|(claim_index, claim)| {
            let invalid = |reason| ClaimCheck { claim_index, valid: false, reason: Some(reason) };
            if claim.evidence_refs.is_empty() {
                return invalid(InvalidEvidence::NoEvidence);
            }
            let resolvable: Vec<&str> = claim
                .evidence_refs
                .iter()
                .map(String::as_str)
                .filter(|r| event_ids.contains(r) || arns.contains(*r))
                .collect();
            if resolvable.is_empty() {
                return invalid(InvalidEvidence::UnresolvableRefs);
            }
            if resolvable.iter().all(|r| alert_ids.contains(r)) {
                return invalid(InvalidEvidence::AlertOnlyEvidence);
            }
            ClaimCheck { claim_index, valid: true, reason: None }
        })
        .collect();

    let supported_claims = checks.iter().filter(|c| c.valid).count();
    let supported = supported_claims >= k_min;
    ReportValidation {
        checks,
        supported_claims,
        supported,
        downgraded: report.verdict == Verdict::Tp && !supported,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Category;
    use crate::harness::Claim;
    use crate::scenario::execute_scenario;
    use crate::variation::{fp_seed, tp_seeds, FpArchetype};

    fn case() -> PublicCase {
        let seed = &tp_seeds(Category::BruteForce)[0];
        PublicCase::from_bundle(&execute_scenario(seed, 3).unwrap())
    }

    fn report(case: &PublicCase, verdict: Verdict, claims: Vec<Claim>) -> InvestigationReport {
        InvestigationReport {
            case_id: case.manifest.case_id.clone(),
            verdict,
            claims,
            narrative: String::new(),
        }
    }

    fn claim(refs: &[&str]) -> Claim {
        Claim {
            statement: "something happened".to_string(),
            evidence_refs: refs.iter().map(|r| r.to_string()).collect(),
        }
    }

    #[test]
    fn real_event_ids_support_a_malicious_verdict() {
        let case = case();
        let non_trigger = case
            .log
            .events()
            .iter()
            .map(|e| e.event_id.clone())
            .find(|id| !case.alert.triggering_event_ids.contains(id))
            .unwrap();
        let report = report(&case, Verdict::Tp, vec![claim(&[&non_trigger])]);
        let validation = validate_evidence(&report, &case, DEFAULT_K_MIN);
        assert!(validation.supported);
        assert!(!validation.downgraded);
        assert!(validation.checks[0].valid);
    }

    #[test]
    fn parroting_the_alert_does_not_support_a_verdict() {
        let case = case();
        let triggers: Vec<&str> =
            case.alert.triggering_event_ids.iter().map(String::as_str).collect();
        let report = report(&case, Verdict::Tp, vec![claim(&triggers)]);
        let validation = validate_evidence(&report, &case, DEFAULT_K_MIN);
        assert_eq!(validation.checks[0].reason, Some(InvalidEvidence::AlertOnlyEvidence));
        assert!(validation.downgraded);
    }

    #[test]
    fn fabricated_and_missing_evidence_get_distinct_reasons() {
        let case = case();
        let report = report(
            &case,
            Verdict::Tp,
            vec![
                claim(&[]),
                claim(&["evt-totally-made-up", "2024-01-01T00:00:00.000Z"]),
            ],
        );
        let validation = validate_evidence(&report, &case, DEFAULT_K_MIN);
        assert_eq!(validation.checks[0].reason, Some(InvalidEvidence::NoEvidence));
        assert_eq!(validation.checks[1].reason, Some(InvalidEvidence::UnresolvableRefs));
        assert!(validation.downgraded);
    }

    #[test]
    fn resource_arns_resolve_as_evidence() {
        let case = case();
        let arn = case
            .environment
            .main_account()
            .buckets
            .values()
            .next()
            .unwrap()
            .arn
            .render();
        let report = report(&case, Verdict::Tp, vec![claim(&[&arn])]);
        let validation = validate_evidence(&report, &case, DEFAULT_K_MIN);
        assert!(validation.checks[0].valid);
        assert!(validation.supported);
    }

    #[test]
    fn benign_verdicts_are_never_downgraded() {
        let seed = fp_seed(Category::Misconfiguration, FpArchetype::IntentionallyPublic);
        let case = PublicCase::from_bundle(&execute_scenario(&seed, 3).unwrap());
        let report = report(&case, Verdict::Fp, vec![claim(&["nonsense"])]);
        let validation = validate_evidence(&report, &case, DEFAULT_K_MIN);
        assert!(!validation.supported);
        assert!(!validation.downgraded, "only malicious verdicts need support");
    }

    #[test]
    fn a_mixed_claim_with_one_real_ref_escapes_alert_only() {
        let case = case();
        let trigger = case.alert.triggering_event_ids[0].clone();
        let non_trigger = case
            .log
            .events()
            .iter()
            .map(|e| e.event_id.clone())
            .find(|id| !case.alert.triggering_event_ids.contains(id))
            .unwrap();
        let report =
            report(&case, Verdict::Tp, vec![claim(&[&trigger, &non_trigger, "junk"])]);
        let validation = validate_evidence(&report, &case, DEFAULT_K_MIN);
        assert!(validation.checks[0].valid);
    }

    #[test]
    fn k_min_raises_the_bar() {
        let case = case();
        let non_trigger = case
            .log
            .events()
            .iter()
            .map(|e| e.event_id.clone())
            .find(|id| !case.alert.triggering_event_ids.contains(id))
            .unwrap();
        let report = report(&case, Verdict::Tp, vec![claim(&[&non_trigger])]);
        assert!(validate_evidence(&report, &case, 1).supported);
        assert!(!validate_evidence(&report, &case, 2).supported);
    }
}
