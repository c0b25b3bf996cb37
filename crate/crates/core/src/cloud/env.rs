//! Environment state: accounts and the resources inside them, plus the
//! deterministic identifier generator used while actions execute.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::{Arn, PolicyDoc};
use crate::names;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrincipalKind {
    User,
    Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessKey {
    pub key_id: String,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IamPrincipal {
    pub arn: Arn,
    pub kind: PrincipalKind,
    pub name: String,
    /// Attached identity policies, keyed by policy name.
    pub policies: BTreeMap<String, PolicyDoc>,
    /// Roles only: who may assume this principal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trust_policy: Option<PolicyDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub access_keys: Vec<AccessKey>,
    /// Users only: whether console sign-in is enabled.
    #[serde(default)]
    pub login_profile: bool,
    pub created_at: Timestamp,
}

impl IamPrincipal {
    pub fn allows(&self, action: &str, resource: &str) -> bool {
        self.policies.values().any(|p| p.allows(action, resource))
    }

    pub fn is_admin(&self) -> bool {
        self.policies.values().any(PolicyDoc::grants_admin)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct S3Object {
    pub key: String,
    pub size_bytes: u64,
    pub last_modified: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct S3Bucket {
    pub arn: Arn,
    pub name: String,
    /// Kept in lockstep with the policy: true exactly when the policy
    /// grants anonymous read. Mutate through [`S3Bucket::set_policy`].
    pub public: bool,
    pub policy: PolicyDoc,
    pub objects: Vec<S3Object>,
    pub created_at: Timestamp,
}

impl S3Bucket {
    pub fn set_policy(&mut self, policy: PolicyDoc) {
        self.public = policy.grants_anonymous_read();
        self.policy = policy;
    }

    pub fn object(&self, key: &str) -> Option<&S3Object> {
        self.objects.iter().find(|o| o.key == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceState {
    Pending,
    Running,
    Stopped,
    Terminated,
}

impl InstanceState {
    /// Valid transitions: pending→running, running→stopped,
    /// running→terminated. Everything else is rejected.
    pub fn can_transition(self, to: InstanceState) -> bool {
        matches!(
            (self, to),
            (InstanceState::Pending, InstanceState::Running)
                | (InstanceState::Running, InstanceState::Stopped)
                | (InstanceState::Running, InstanceState::Terminated)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ec2Instance {
    pub arn: Arn,
    pub instance_id: String,
    pub state: InstanceState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_role: Option<Arn>,
    pub ssm_agent: bool,
    pub launched_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SgRule {
    pub protocol: String,
    pub port: u16,
    pub cidr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityGroup {
    pub arn: Arn,
    pub group_id: String,
    pub name: String,
    pub ingress: Vec<SgRule>,
}

/// A provisioned assume-role relationship: `source` may assume `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustEdge {
    pub source: Arn,
    pub target: Arn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub account_id: String,
    /// Users and roles keyed by `user/<name>` or `role/<name>`.
    pub principals: BTreeMap<String, IamPrincipal>,
    /// Buckets keyed by bucket name.
    pub buckets: BTreeMap<String, S3Bucket>,
    /// Instances keyed by instance id.
    pub instances: BTreeMap<String, Ec2Instance>,
    /// Security groups keyed by group id.
    pub security_groups: BTreeMap<String, SecurityGroup>,
}

impl Account {
    pub fn new(account_id: &str) -> Self {
        Account {
            account_id: account_id.to_string(),
            principals: BTreeMap::new(),
            buckets: BTreeMap::new(),
            instances: BTreeMap::new(),
            security_groups: BTreeMap::new(),
        }
    }
}

/// A live assumed-role session, keyed in the environment by its temporary
/// access key id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_arn: Arn,
    pub role_arn: Arn,
    pub access_key_id: String,
    pub issued_at: Timestamp,
    pub expires_at: Timestamp,
}

/// Provision-order index: the i-th declared user/role/bucket/... of the
/// spec, by ARN, plus the address pools scenarios draw actors from.
/// Scenario steps reference resources by these indexes, so the index is
/// part of the serialized environment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvisionIndex {
    pub users: Vec<Arn>,
    pub roles: Vec<Arn>,
    pub buckets: Vec<Arn>,
    pub instances: Vec<Arn>,
    pub security_groups: Vec<Arn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_user: Option<Arn>,
    pub external_ips: Vec<String>,
    pub internal_ips: Vec<String>,
}

fn provision_epoch() -> Timestamp {
    Timestamp::from_millis(0)
}

fn detached_rng() -> ChaCha12Rng {
    // Deserialized environments are read-only for consumers; the generator
    // state is never persisted, so a fixed placeholder seed is fine here.
    ChaCha12Rng::seed_from_u64(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub region: String,
    pub main_account_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_account_id: Option<String>,
    pub accounts: BTreeMap<String, Account>,
    pub trust_edges: Vec<TrustEdge>,
    pub audit_logging: bool,
    /// Latest action time observed; actions may never run before it.
    pub clock: Timestamp,
    /// Monotone per-environment counter breaking same-millisecond ties.
    pub sequence: u64,
    /// Live assumed-role sessions keyed by temporary access key id.
    pub sessions: BTreeMap<String, SessionRecord>,
    pub index: ProvisionIndex,
    #[serde(skip, default = "detached_rng")]
    pub(crate) rng: ChaCha12Rng,
}

impl Environment {
    pub fn new(region: &str, main_account_id: &str, rng: ChaCha12Rng) -> Self {
        let mut accounts = BTreeMap::new();
        accounts.insert(main_account_id.to_string(), Account::new(main_account_id));
        Environment {
            region: region.to_string(),
            main_account_id: main_account_id.to_string(),
            partner_account_id: None,
            accounts,
            trust_edges: Vec::new(),
            audit_logging: true,
            clock: provision_epoch(),
            sequence: 0,
            sessions: BTreeMap::new(),
            index: ProvisionIndex::default(),
            rng,
        }
    }

    pub fn main_account(&self) -> &Account {
        &self.accounts[&self.main_account_id]
    }

    pub fn main_account_mut(&mut self) -> &mut Account {
        let id = self.main_account_id.clone();
        self.accounts.get_mut(&id).expect("main account exists")
    }

    pub fn find_principal(&self, arn: &Arn) -> Option<&IamPrincipal> {
        match lookup_resource(self, arn) {
            Some(ResourceView::Principal(p)) => Some(p),
            _ => None,
        }
    }

    pub fn find_bucket(&self, name: &str) -> Option<&S3Bucket> {
        self.accounts.values().find_map(|a| a.buckets.get(name))
    }

    pub(crate) fn find_bucket_mut(&mut self, name: &str) -> Option<&mut S3Bucket> {
        self.accounts.values_mut().find_map(|a| a.buckets.get_mut(name))
    }

    pub fn find_instance(&self, id: &str) -> Option<&Ec2Instance> {
        self.accounts.values().find_map(|a| a.instances.get(id))
    }

    pub(crate) fn find_instance_mut(&mut self, id: &str) -> Option<&mut Ec2Instance> {
        self.accounts.values_mut().find_map(|a| a.instances.get_mut(id))
    }

    pub fn find_security_group(&self, id: &str) -> Option<&SecurityGroup> {
        self.accounts.values().find_map(|a| a.security_groups.get(id))
    }

    pub(crate) fn find_security_group_mut(&mut self, id: &str) -> Option<&mut SecurityGroup> {
        self.accounts.values_mut().find_map(|a| a.security_groups.get_mut(id))
    }

    /// True when a provisioned trust edge lets `source` assume `target`.
    pub fn has_trust_edge(&self, source: &Arn, target: &Arn) -> bool {
        self.trust_edges
            .iter()
            .any(|e| &e.source == source && &e.target == target)
    }

    pub(crate) fn next_event_id(&mut self) -> String {
        let bytes: [u8; 16] = self.rng.gen();
        uuid::Builder::from_random_bytes(bytes).into_uuid().to_string()
    }

    pub(crate) fn next_access_key_id(&mut self, temporary: bool) -> String {
        names::access_key_id(&mut self.rng, temporary)
    }

    pub(crate) fn next_command_id(&mut self) -> String {
        let bytes: [u8; 16] = self.rng.gen();
        uuid::Builder::from_random_bytes(bytes).into_uuid().to_string()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ResourceView<'a> {
    Principal(&'a IamPrincipal),
    Bucket(&'a S3Bucket),
    Instance(&'a Ec2Instance),
    SecurityGroup(&'a SecurityGroup),
}

/// Resolves an ARN against the environment. Assumed-role session ARNs
/// resolve to their underlying role. Unknown accounts and unknown
/// resources yield `None`.
pub fn lookup_resource<'a>(env: &'a Environment, arn: &Arn) -> Option<ResourceView<'a>> {
    let account = env.accounts.get(&arn.account_id)?;
    let head = arn.resource_path.first().map(String::as_str)?;
    match (arn.service.as_str(), head) {
        ("iam", "user") | ("iam", "role") => {
            let key = arn.resource_path.get(..2)?.join("/");
            account.principals.get(&key).map(ResourceView::Principal)
        }
        ("sts", "assumed-role") => {
            let role = arn.resource_path.get(1)?;
            account
                .principals
                .get(&format!("role/{role}"))
                .map(ResourceView::Principal)
        }
        ("s3", "bucket") => {
            let name = arn.resource_path.get(1)?;
            account.buckets.get(name).map(ResourceView::Bucket)
        }
        ("ec2", "instance") => {
            let id = arn.resource_path.get(1)?;
            account.instances.get(id).map(ResourceView::Instance)
        }
        ("ec2", "security-group") => {
            let id = arn.resource_path.get(1)?;
            account.security_groups.get(id).map(ResourceView::SecurityGroup)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_transitions() {
        use InstanceState::*;
        assert!(Pending.can_transition(Running));
        assert!(Running.can_transition(Stopped));
        assert!(Running.can_transition(Terminated));
        assert!(!Stopped.can_transition(Running));
        assert!(!Stopped.can_transition(Terminated));
        assert!(!Terminated.can_transition(Running));
        assert!(!Pending.can_transition(Stopped));
    }

    #[test]
    fn bucket_policy_keeps_public_flag_consistent() {
        let arn = Arn::s3_bucket("123456789012", "b").unwrap();
        let mut bucket = S3Bucket {
            arn: arn.clone(),
            name: "b".to_string(),
            public: false,
            policy: PolicyDoc::account_private(&arn.render(), "123456789012"),
            objects: vec![],
            created_at: Timestamp::from_millis(0),
        };
        bucket.set_policy(PolicyDoc::anonymous_read(&arn.render()));
        assert!(bucket.public);
        bucket.set_policy(PolicyDoc::account_private(&arn.render(), "123456789012"));
        assert!(!bucket.public);
    }
}
