//! Small scenario fixtures shared by unit tests in this module tree.

use super::types::{
    ActionTemplate, ActorSpec, AttackStep, Intent, IpSlot, ResourceRef, ScenarioSpec, Verdict,
};
use crate::cloud::{Category, EnvironmentSpec};

pub(crate) fn login_step(id: &str, offset_ms: i64, ok: bool, triggers: bool) -> AttackStep {
    AttackStep {
        step_id: id.to_string(),
        actor: ActorSpec::User { index: 0 },
        ip: IpSlot::External { index: 0 },
        action: ActionTemplate::ConsoleLogin {
            user: ResourceRef::User { index: 0 },
            password_ok: ok,
        },
        offset_ms,
        depends_on: vec![],
        intent: Intent::Malicious,
        triggers_alert: triggers,
    }
}

/// A compact credential-stuffing script: three failed sign-ins (the
/// triggers), a success, then a persistence pair.
pub(crate) fn sample_spec() -> ScenarioSpec {
    let mut steps: Vec<AttackStep> = (0..3)
        .map(|i| login_step(&format!("fail-{i}"), i * 30_000, false, true))
        .collect();
    let mut success = login_step("success", 95_000, true, false);
    success.depends_on = vec!["fail-2".to_string()];
    steps.push(success);
    steps.push(AttackStep {
        step_id: "mint-user".to_string(),
        actor: ActorSpec::User { index: 0 },
        ip: IpSlot::External { index: 0 },
        action: ActionTemplate::CreateUser { name: "svc-telemetry-sync".to_string() },
        offset_ms: 120_000,
        depends_on: vec!["success".to_string()],
        intent: Intent::Malicious,
        triggers_alert: false,
    });
    steps.push(AttackStep {
        step_id: "mint-key".to_string(),
        actor: ActorSpec::User { index: 0 },
        ip: IpSlot::External { index: 0 },
        action: ActionTemplate::CreateAccessKey {
            user: ResourceRef::CreatedUser { step: "mint-user".to_string() },
        },
        offset_ms: 130_000,
        depends_on: vec!["mint-user".to_string()],
        intent: Intent::Malicious,
        triggers_alert: false,
    });
    ScenarioSpec {
        scenario_id: "exec-test".to_string(),
        category: Category::BruteForce,
        env_spec: EnvironmentSpec::defaults_for(Category::BruteForce),
        steps,
        alert_template:
            "Repeated failed console sign-in attempts for user {user} from {source_ip}: \
             {trigger_count} failures recorded."
                .to_string(),
        intended_verdict: Verdict::Tp,
    }
}
