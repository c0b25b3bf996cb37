//! Rates, the F-beta combination, and triage scoring.

use serde::{Deserialize, Serialize};

use crate::scenario::Verdict;

/// A pooled hit count. The ratio is left as integers so aggregation can
/// keep summing; `value()` is `None` when the denominator is empty, and
/// renderers print an explicit undefined marker instead of a number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: usize,
    pub total: usize,
}

impl Rate {
    pub fn new(hits: usize, total: usize) -> Self {
        Rate { hits, total }
    }

    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }

    pub fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += usize::from(hit);
    }

    pub fn merge(&mut self, other: Rate) {
        self.hits += other.hits;
        self.total += other.total;
    }
}

/// Weighted harmonic mean of the two triage rates. The first argument sits
/// in the recall slot of the standard F formula, so `beta > 1` weights
/// `tp_rate` (catching real attacks) more heavily than `fp_rate`
/// (dismissing benign alerts). Zero when the denominator vanishes.
pub fn f_beta(tp_rate: f64, fp_rate: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denominator = b2 * fp_rate + tp_rate;
    if denominator == 0.0 {
        return 0.0;
    }
    (1.0 + b2) * tp_rate * fp_rate / denominator
}

/// What the agent effectively said about one case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriageCall {
    /// A report arrived with this verdict.
    Verdict(Verdict),
    /// The session ended without a report: treated as calling the alert
    /// benign, since declining to escalate is itself a triage decision.
    NoReport,
    /// The agent crashed: no decision of any kind, scored as a miss on
    /// whichever side of the ground truth the case sits.
    Crashed,
}

impl TriageCall {
    fn effective(self) -> Option<Verdict> {
        match self {
            TriageCall::Verdict(v) => Some(v),
            TriageCall::NoReport => Some(Verdict::Fp),
            TriageCall::Crashed => None,
        }
    }
}

/// Triage quality over a case population: the hit rate on real attacks,
/// the hit rate on benign alerts, and their recall-weighted combination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct M1Score {
    /// Of the genuinely malicious cases, how many the agent called TP.
    pub tp: Rate,
    /// Of the genuinely benign cases, how many the agent called FP.
    pub fp: Rate,
    /// `f_beta(tp_rate, fp_rate, beta)`: catching attacks is weighted
    /// `beta` times as heavily as dismissing benign alerts. `None` when
    /// either population is empty.
    pub f_beta: Option<f64>,
}

pub fn score_m1(
    outcomes: impl IntoIterator<Item = (Verdict, TriageCall)>,
    beta: f64,
) -> M1Score {
    let mut tp = Rate::default();
    let mut fp = Rate::default();
    for (ground, call) in outcomes {
        let said = call.effective();
        match ground {
            Verdict::Tp => tp.add(said == Some(Verdict::Tp)),
            Verdict::Fp => fp.add(said == Some(Verdict::Fp)),
        }
    }
    let f = match (tp.value(), fp.value()) {
        (Some(tp_rate), Some(fp_rate)) => Some(f_beta(tp_rate, fp_rate, beta)),
        _ => None,
    };
    M1Score { tp, fp, f_beta: f }
}

/// One point of a depth curve: the share of cases clearing `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub rate: Rate,
}

/// For each threshold, the fraction of cases whose count reaches it.
/// Non-increasing in `n` by construction.
pub fn threshold_curve(counts: &[usize], thresholds: &[usize]) -> Vec<CurvePoint> {
    thresholds
        .iter()
        .map(|&n| CurvePoint {
            n,
            rate: Rate::new(counts.iter().filter(|&&c| c >= n).count(), counts.len()),
        })
        .collect()
}
