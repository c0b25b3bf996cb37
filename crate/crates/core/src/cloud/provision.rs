//! Environment specs and deterministic provisioning.
//!
//! A spec pins whatever a scenario cares about (names, access levels, trust
//! relationships) and leaves the rest to seeded generation. Provisioning the
//! same spec with the same seed yields an identical environment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::{
    AccessKey, Account, Ec2Instance, Environment, IamPrincipal, InstanceState, PrincipalKind,
    S3Bucket, S3Object, SecurityGroup, SgRule, TrustEdge,
};
use super::{Arn, Category, CloudError, PolicyDoc};
use crate::time::Timestamp;
use crate::{names, seeded};

const DAY_MS: i64 = 86_400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessLevel {
    Admin,
    PowerUser,
    ReadOnly,
}

impl AccessLevel {
    fn policy(self) -> (&'static str, PolicyDoc) {
        match self {
            AccessLevel::Admin => ("AdministratorAccess", PolicyDoc::admin()),
            AccessLevel::PowerUser => ("PowerUserAccess", PolicyDoc::power_user()),
            AccessLevel::ReadOnly => ("ReadOnlyAccess", PolicyDoc::read_only()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub access: AccessLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub access: AccessLevel,
    /// Indexes into `users` that may assume this role.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trusted_user_indexes: Vec<usize>,
    /// Indexes into `roles` that may assume this role (chaining).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trusted_role_indexes: Vec<usize>,
    /// Whether the partner account's integration user may assume this role.
    #[serde(default)]
    pub external_trust: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub public: bool,
    pub object_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    /// Index into `roles` for the instance profile, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_role: Option<usize>,
    pub ssm_agent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SgSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Ports open to 0.0.0.0/0 at provision time.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub open_ports: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    pub users: Vec<UserSpec>,
    pub roles: Vec<RoleSpec>,
    pub buckets: Vec<BucketSpec>,
    pub instances: Vec<InstanceSpec>,
    pub security_groups: Vec<SgSpec>,
    #[serde(default)]
    pub partner_account: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_user_name: Option<String>,
    pub audit_logging: bool,
}

impl EnvironmentSpec {
    /// Baseline resource mix for a category; scenarios tweak from here.
    pub fn defaults_for(category: Category) -> Self {
        let spec = EnvironmentSpec {
            category,
            region: None,
            users: vec![
                UserSpec { name: None, access: AccessLevel::Admin },
                UserSpec { name: None, access: AccessLevel::ReadOnly },
                UserSpec { name: None, access: AccessLevel::ReadOnly },
            ],
            roles: vec![RoleSpec {
                name: None,
                access: AccessLevel::ReadOnly,
                trusted_user_indexes: vec![0],
                trusted_role_indexes: vec![],
                external_trust: false,
            }],
            buckets: vec![BucketSpec { name: None, public: false, object_count: 16 }],
            instances: vec![],
            security_groups: vec![SgSpec { name: None, open_ports: vec![] }],
            partner_account: false,
            partner_user_name: None,
            audit_logging: true,
        };
        match category {
            Category::BruteForce => spec,
            Category::UnauthorizedAccess => EnvironmentSpec {
                buckets: vec![
                    BucketSpec { name: None, public: false, object_count: 20 },
                    BucketSpec { name: None, public: false, object_count: 12 },
                ],
                ..spec
            },
            Category::Misconfiguration => EnvironmentSpec {
                buckets: vec![
                    BucketSpec { name: None, public: false, object_count: 16 },
                    BucketSpec { name: None, public: false, object_count: 10 },
                ],
                ..spec
            },
            Category::MaliciousFileExecution => EnvironmentSpec {
                instances: vec![
                    InstanceSpec { profile_role: Some(0), ssm_agent: true },
                    InstanceSpec { profile_role: None, ssm_agent: true },
                ],
                ..spec
            },
        }
    }

    pub fn validate(&self) -> Result<(), CloudError> {
        let invalid = |reason: String| CloudError::InvalidSpec { reason };
        let name_ok = |name: &str| {
            !name.is_empty()
                && name.len() <= 64
                && name
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b"._-".contains(&b))
        };
        for (kind, pinned) in [
            ("user", self.users.iter().map(|u| u.name.as_ref()).collect::<Vec<_>>()),
            ("role", self.roles.iter().map(|r| r.name.as_ref()).collect()),
            ("bucket", self.buckets.iter().map(|b| b.name.as_ref()).collect()),
            ("security group", self.security_groups.iter().map(|s| s.name.as_ref()).collect()),
        ] {
            let mut seen = std::collections::BTreeSet::new();
            for name in pinned.into_iter().flatten() {
                if !name_ok(name) {
                    return Err(invalid(format!("{kind} name {name:?} is not a valid name")));
                }
                if !seen.insert(name.clone()) {
                    return Err(invalid(format!("duplicate pinned {kind} name {name:?}")));
                }
            }
        }
        for (i, role) in self.roles.iter().enumerate() {
            for &u in &role.trusted_user_indexes {
                if u >= self.users.len() {
                    return Err(invalid(format!(
                        "role {i} trusts user index {u} but only {} users are declared",
                        self.users.len()
                    )));
                }
            }
            for &r in &role.trusted_role_indexes {
                if r >= self.roles.len() || r == i {
                    return Err(invalid(format!("role {i} has invalid trusted role index {r}")));
                }
            }
            if role.external_trust && !self.partner_account {
                return Err(invalid(format!(
                    "role {i} declares external trust but no partner account is provisioned"
                )));
            }
        }
        for (i, inst) in self.instances.iter().enumerate() {
            if let Some(r) = inst.profile_role {
                if r >= self.roles.len() {
                    return Err(invalid(format!(
                        "instance {i} references role index {r} but only {} roles are declared",
                        self.roles.len()
                    )));
                }
            }
        }
        for bucket in &self.buckets {
            if bucket.object_count > 500 {
                return Err(invalid(format!(
                    "bucket object_count {} exceeds the supported maximum of 500",
                    bucket.object_count
                )));
            }
        }
        Ok(())
    }
}

/// Deterministically builds the environment described by `spec`.
pub fn provision_environment(spec: &EnvironmentSpec, seed: u64) -> Result<Environment, CloudError> {
    spec.validate()?;
    let mut rng = seeded::rng_from(seed);

    // Anchor the clock somewhere plausible, derived from the seed so
    // different cases live at different times.
    let base_ms = 1_704_067_200_000 // 2024-01-01T00:00:00Z
        + (seed % 300) as i64 * DAY_MS
        + (seed % 86_400) as i64 * 1000;
    let clock = Timestamp::from_millis(base_ms);

    let region = spec
        .region
        .clone()
        .unwrap_or_else(|| names::region(&mut rng));
    let main_account_id = names::account_id(&mut rng);
    let mut env = Environment::new(&region, &main_account_id, seeded::rng_from(seed));
    env.rng = rng;
    env.clock = clock;
    env.audit_logging = spec.audit_logging;

    if spec.partner_account {
        let partner_id = loop {
            let id = names::account_id(&mut env.rng);
            if id != main_account_id {
                break id;
            }
        };
        env.accounts.insert(partner_id.clone(), Account::new(&partner_id));
        env.partner_account_id = Some(partner_id);
    }

    // Partner integration user first: role trust policies may reference it.
    if let Some(partner_id) = env.partner_account_id.clone() {
        let name = spec
            .partner_user_name
            .clone()
            .unwrap_or_else(|| format!("integration-{}", names::hex_string(&mut env.rng, 4)));
        let arn = Arn::iam_user(&partner_id, &name)?;
        let user = build_user(&mut env, arn.clone(), &name, AccessLevel::ReadOnly, clock);
        env.accounts
            .get_mut(&partner_id)
            .expect("partner account exists")
            .principals
            .insert(format!("user/{name}"), user);
        env.index.partner_user = Some(arn);
    }

    let mut used_names = std::collections::BTreeSet::new();

    for user_spec in &spec.users {
        let name = unique_name(&mut env, &mut used_names, user_spec.name.as_deref(), names::user_name);
        let arn = Arn::iam_user(&main_account_id, &name)?;
        let user = build_user(&mut env, arn.clone(), &name, user_spec.access, clock);
        env.main_account_mut().principals.insert(format!("user/{name}"), user);
        env.index.users.push(arn);
    }

    // Two passes over roles: names and policies first so trust entries can
    // reference roles declared later.
    let mut role_names = Vec::with_capacity(spec.roles.len());
    for role_spec in &spec.roles {
        let name = unique_name(&mut env, &mut used_names, role_spec.name.as_deref(), names::role_name);
        role_names.push(name);
    }
    for (role_spec, name) in spec.roles.iter().zip(&role_names) {
        let arn = Arn::iam_role(&main_account_id, name)?;
        let backdate = env.rng.gen_range(30..400) * DAY_MS;
        let (policy_name, policy) = role_spec.access.policy();
        let mut trusted: Vec<Arn> = Vec::new();
        for &u in &role_spec.trusted_user_indexes {
            trusted.push(env.index.users[u].clone());
        }
        for &r in &role_spec.trusted_role_indexes {
            trusted.push(Arn::iam_role(&main_account_id, &role_names[r])?);
        }
        if role_spec.external_trust {
            trusted.push(env.index.partner_user.clone().expect("validated partner user"));
        }
        let role = IamPrincipal {
            arn: arn.clone(),
            kind: PrincipalKind::Role,
            name: name.clone(),
            policies: [(policy_name.to_string(), policy)].into_iter().collect(),
            trust_policy: Some(PolicyDoc::trust(
                trusted.iter().map(|a| a.render()).collect(),
            )),
            access_keys: vec![],
            login_profile: false,
            created_at: clock.plus_millis(-backdate),
        };
        env.main_account_mut().principals.insert(format!("role/{name}"), role);
        for source in trusted {
            env.trust_edges.push(TrustEdge { source, target: arn.clone() });
        }
        env.index.roles.push(arn);
    }

    for bucket_spec in &spec.buckets {
        let name = unique_name(&mut env, &mut used_names, bucket_spec.name.as_deref(), names::bucket_name);
        let arn = Arn::s3_bucket(&main_account_id, &name)?;
        let backdate = env.rng.gen_range(100..500) * DAY_MS;
        let mut objects = Vec::with_capacity(bucket_spec.object_count as usize);
        let mut used_keys = std::collections::BTreeSet::new();
        for _ in 0..bucket_spec.object_count {
            let key = loop {
                let candidate = names::object_key(&mut env.rng);
                if used_keys.insert(candidate.clone()) {
                    break candidate;
                }
            };
            let size_bytes = env.rng.gen_range(1_024..50_000_000);
            let age = env.rng.gen_range(1..90) * DAY_MS;
            objects.push(S3Object {
                key,
                size_bytes,
                last_modified: clock.plus_millis(-age),
            });
        }
        let policy = if bucket_spec.public {
            PolicyDoc::anonymous_read(&arn.render())
        } else {
            PolicyDoc::account_private(&arn.render(), &main_account_id)
        };
        let mut bucket = S3Bucket {
            arn: arn.clone(),
            name: name.clone(),
            public: false,
            policy: PolicyDoc::empty(),
            objects,
            created_at: clock.plus_millis(-backdate),
        };
        bucket.set_policy(policy);
        env.main_account_mut().buckets.insert(name, bucket);
        env.index.buckets.push(arn);
    }

    for inst_spec in &spec.instances {
        let id = names::instance_id(&mut env.rng);
        let arn = Arn::ec2_instance(&region, &main_account_id, &id)?;
        let backdate = env.rng.gen_range(1..180) * DAY_MS;
        let profile_role = inst_spec.profile_role.map(|r| env.index.roles[r].clone());
        let instance = Ec2Instance {
            arn: arn.clone(),
            instance_id: id.clone(),
            state: InstanceState::Running,
            profile_role,
            ssm_agent: inst_spec.ssm_agent,
            launched_at: clock.plus_millis(-backdate),
        };
        env.main_account_mut().instances.insert(id, instance);
        env.index.instances.push(arn);
    }

    for sg_spec in &spec.security_groups {
        let id = names::security_group_id(&mut env.rng);
        let name = unique_name(&mut env, &mut used_names, sg_spec.name.as_deref(), names::security_group_name);
        let arn = Arn::security_group(&region, &main_account_id, &id)?;
        let mut ingress = vec![SgRule {
            protocol: "tcp".to_string(),
            port: 443,
            cidr: "10.0.0.0/8".to_string(),
        }];
        for &port in &sg_spec.open_ports {
            ingress.push(SgRule {
                protocol: "tcp".to_string(),
                port,
                cidr: "0.0.0.0/0".to_string(),
            });
        }
        let sg = SecurityGroup { arn: arn.clone(), group_id: id.clone(), name, ingress };
        env.main_account_mut().security_groups.insert(id, sg);
        env.index.security_groups.push(arn);
    }

    for _ in 0..4 {
        let ip = names::external_ip(&mut env.rng);
        env.index.external_ips.push(ip);
    }
    for _ in 0..4 {
        let ip = names::internal_ip(&mut env.rng);
        env.index.internal_ips.push(ip);
    }

    Ok(env)
}

fn build_user(
    env: &mut Environment,
    arn: Arn,
    name: &str,
    access: AccessLevel,
    clock: Timestamp,
) -> IamPrincipal {
    let backdate = env.rng.gen_range(30..400) * DAY_MS;
    let created_at = clock.plus_millis(-backdate);
    let key = AccessKey {
        key_id: env.next_access_key_id(false),
        created_at,
    };
    let (policy_name, policy) = access.policy();
    IamPrincipal {
        arn,
        kind: PrincipalKind::User,
        name: name.to_string(),
        policies: [(policy_name.to_string(), policy)].into_iter().collect(),
        trust_policy: None,
        access_keys: vec![key],
        login_profile: true,
        created_at,
    }
}

fn unique_name(
    env: &mut Environment,
    used: &mut std::collections::BTreeSet<String>,
    pinned: Option<&str>,
    generate: fn(&mut rand_chacha::ChaCha12Rng) -> String,
) -> String {
    if let Some(name) = pinned {
        used.insert(name.to_string());
        return name.to_string();
    }
    loop {
        let candidate = generate(&mut env.rng);
        if used.insert(candidate.clone()) {
            return candidate;
        }
    }
}
