//! Surface transforms over scenario scripts.
//!
//! Each transform rewrites how a scenario looks on the wire (names,
//! region, clock, interchangeable API techniques) while preserving its
//! causal structure. Whether a transformed script still extracts to the
//! same ground-truth shape is checked downstream by executing it, not
//! assumed here.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::VariationError;
use crate::names;
use crate::scenario::{ActionTemplate, ActorSpec, ScenarioSpec};
use crate::seeded::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Re-pin every provisioned identity and resource to a fresh alias.
    RenameResources,
    /// Move the environment to a different region.
    ShiftRegion,
    /// Slide the whole script forward in time, keeping every gap.
    ShiftTimeline,
    /// Replace each API technique with its interchangeable twin.
    SwapTechnique,
}

/// A reproducible recipe for deriving one variation from a seed script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationPlan {
    /// Identifier the produced scenario carries.
    pub scenario_id: String,
    /// Transforms applied in order.
    pub transforms: Vec<Transform>,
    /// Seed for every random choice the transforms make.
    pub seed: u64,
}

/// Applies a plan to a seed scenario, returning the rewritten script.
pub fn apply_plan(base: &ScenarioSpec, plan: &VariationPlan) -> Result<ScenarioSpec, VariationError> {
    let mut spec = base.clone();
    spec.scenario_id = plan.scenario_id.clone();
    let mut rng = rng_from(plan.seed);
    for transform in &plan.transforms {
        match transform {
            Transform::RenameResources => rename_resources(&mut spec, &mut rng),
            Transform::ShiftRegion => shift_region(&mut spec, &mut rng),
            Transform::ShiftTimeline => shift_timeline(&mut spec, &mut rng),
            Transform::SwapTechnique => swap_technique(&mut spec)?,
        }
    }
    Ok(spec)
}

/// A batch of renamed, re-clocked variations of one seed.
pub fn generate_variations(
    base: &ScenarioSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<ScenarioSpec>, VariationError> {
    (0..count)
        .map(|i| {
            let plan = VariationPlan {
                scenario_id: format!("{}-var-{i:03}", base.scenario_id),
                transforms: vec![
                    Transform::RenameResources,
                    Transform::ShiftRegion,
                    Transform::ShiftTimeline,
                ],
                seed: derive_seed(seed, &format!("{}#var{i}", base.scenario_id)),
            };
            apply_plan(base, &plan)
        })
        .collect()
}

fn fresh<R: Rng>(rng: &mut R, used: &mut BTreeSet<String>, make: fn(&mut R) -> String) -> String {
    loop {
        let candidate = make(rng);
        if used.insert(candidate.clone()) {
            return candidate;
        }
    }
}

fn rename_resources<R: Rng>(spec: &mut ScenarioSpec, rng: &mut R) {
    let mut used = BTreeSet::new();
    for user in &mut spec.env_spec.users {
        let pipeline = user.name.as_deref().is_some_and(|n| n.starts_with("cicd-"));
        user.name = Some(if pipeline {
            fresh(rng, &mut used, names::alias_pipeline_user_name::<R>)
        } else {
            fresh(rng, &mut used, names::alias_user_name::<R>)
        });
    }
    for role in &mut spec.env_spec.roles {
        role.name = Some(fresh(rng, &mut used, names::alias_role_name::<R>));
    }
    for bucket in &mut spec.env_spec.buckets {
        bucket.name = Some(fresh(rng, &mut used, names::alias_bucket_name::<R>));
    }
    for group in &mut spec.env_spec.security_groups {
        group.name = Some(fresh(rng, &mut used, names::alias_security_group_name::<R>));
    }
    if spec.env_spec.partner_account {
        spec.env_spec.partner_user_name =
            Some(format!("partner-sync-{}", names::hex_string(rng, 4)));
    }
    for step in &mut spec.steps {
        if let ActionTemplate::CreateUser { name } = &mut step.action {
            *name = format!("svc-{}", fresh(rng, &mut used, names::alias_user_name::<R>));
        }
    }
}

fn shift_region<R: Rng>(spec: &mut ScenarioSpec, rng: &mut R) {
    let current = spec.env_spec.region.clone();
    loop {
        let candidate = names::region(rng);
        if current.as_deref() != Some(candidate.as_str()) {
            spec.env_spec.region = Some(candidate);
            return;
        }
    }
}

fn shift_timeline<R: Rng>(spec: &mut ScenarioSpec, rng: &mut R) {
    // One hour to three days; gaps between steps are untouched.
    let delta = rng.gen_range(3_600_000i64..259_200_000);
    for step in &mut spec.steps {
        step.offset_ms += delta;
    }
}

fn swap_technique(spec: &mut ScenarioSpec) -> Result<(), VariationError> {
    let mut swapped = false;
    for step in &mut spec.steps {
        // Anonymous principals hold narrower grants than authenticated
        // ones, so their techniques are not interchangeable.
        if step.actor == ActorSpec::Anonymous {
            continue;
        }
        if let Some(action) = swapped_action(&step.action, &step.step_id) {
            step.action = action;
            swapped = true;
        }
    }
    if !swapped {
        return Err(VariationError::Inapplicable {
            scenario_id: spec.scenario_id.clone(),
            transform: Transform::SwapTechnique,
        });
    }
    Ok(())
}

/// The interchangeable twin of an action, when one exists: a different
/// API surface achieving the same investigative footprint.
fn swapped_action(action: &ActionTemplate, step_id: &str) -> Option<ActionTemplate> {
    match action {
        ActionTemplate::GetObject { bucket, object } => Some(ActionTemplate::CopyObject {
            bucket: bucket.clone(),
            object: object.clone(),
            destination: format!("offload/{step_id}.bin"),
        }),
        ActionTemplate::CopyObject { bucket, object, .. } => {
            Some(ActionTemplate::GetObject { bucket: bucket.clone(), object: object.clone() })
        }
        ActionTemplate::CreateAccessKey { user } => {
            Some(ActionTemplate::CreateLoginProfile { user: user.clone() })
        }
        ActionTemplate::CreateLoginProfile { user } => {
            Some(ActionTemplate::CreateAccessKey { user: user.clone() })
        }
        ActionTemplate::PutBucketPolicy { bucket, public, change_ticket } => {
            Some(ActionTemplate::PutBucketAcl {
                bucket: bucket.clone(),
                public: *public,
                change_ticket: change_ticket.clone(),
            })
        }
        ActionTemplate::PutBucketAcl { bucket, public, change_ticket } => {
            Some(ActionTemplate::PutBucketPolicy {
                bucket: bucket.clone(),
                public: *public,
                change_ticket: change_ticket.clone(),
            })
        }
        ActionTemplate::SendCommand { instance, command } => {
            Some(ActionTemplate::StartAutomationExecution {
                instance: instance.clone(),
                command: command.clone(),
            })
        }
        ActionTemplate::StartAutomationExecution { instance, command } => {
            Some(ActionTemplate::SendCommand {
                instance: instance.clone(),
                command: command.clone(),
            })
        }
        _ => None,
    }
}
