//! Timeline compression that preserves causal ordering.

use super::types::AttackStep;
use std::collections::BTreeMap;

/// Returns the execution order of `steps`: indexes sorted by offset,
/// declaration order breaking ties.
pub fn execution_order(steps: &[AttackStep]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&i| (steps[i].offset_ms, i));
    order
}

/// Scales every offset by `factor`, then minimally adjusts offsets so that
/// each step still runs strictly after all its dependencies and the
/// execution order of the input is preserved. With `factor` 1 on an
/// already causally-valid list this is the identity.
pub fn compress_timeline(steps: &[AttackStep], factor: f64) -> Vec<AttackStep> {
    assert!(factor > 0.0, "compression factor must be positive");
    let mut out = steps.to_vec();
    let mut assigned: BTreeMap<&str, i64> = BTreeMap::new();
    // (new offset, declaration index) of the previously placed step.
    let mut prev: Option<(i64, usize)> = None;
    for idx in execution_order(steps) {
        let step = &steps[idx];
        let mut cand = (step.offset_ms as f64 * factor).round() as i64;
        for dep in &step.depends_on {
            if let Some(&dep_offset) = assigned.get(dep.as_str()) {
                cand = cand.max(dep_offset + 1);
            }
        }
        if let Some((prev_offset, prev_idx)) = prev {
            if cand < prev_offset {
                cand = prev_offset;
            }
            // A tie is only safe when declaration order already places
            // this step after the previous one.
            if cand == prev_offset && idx < prev_idx {
                cand = prev_offset + 1;
            }
        }
        assigned.insert(&steps[idx].step_id, cand);
        out[idx].offset_ms = cand;
        prev = Some((cand, idx));
    }
    out
}
