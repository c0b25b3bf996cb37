//! Mock cloud control plane: accounts, IAM principals, storage, compute,
//! and the action interpreter that turns control-plane calls into audit
//! events.
//!
//! The model is deliberately small. Authorization is a simplified allow
//! list: an action is permitted when an attached policy grants it or, for
//! role assumption, when a trust relationship covers the caller; everything
//! else is denied. Denied actions still produce an audit event and leave the
//! environment untouched except for its clock.

mod actions;
mod arn;
mod env;
mod policy;
mod provision;

pub use actions::{apply_control_action, Actor, ControlAction, PrincipalRef, SsmCommand};
pub use arn::Arn;
pub use env::{
    lookup_resource, AccessKey, Account, Ec2Instance, Environment, IamPrincipal, InstanceState,
    PrincipalKind, ProvisionIndex, ResourceView, S3Bucket, S3Object, SecurityGroup, SgRule,
    SessionRecord, TrustEdge,
};
pub use policy::{PolicyDoc, PolicyStatement};
pub use provision::{
    provision_environment, AccessLevel, BucketSpec, EnvironmentSpec, InstanceSpec, RoleSpec,
    SgSpec, UserSpec,
};

use serde::{Deserialize, Serialize};

/// Alert categories covered by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    BruteForce,
    UnauthorizedAccess,
    Misconfiguration,
    MaliciousFileExecution,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::BruteForce,
        Category::UnauthorizedAccess,
        Category::Misconfiguration,
        Category::MaliciousFileExecution,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Category::BruteForce => "brute_force",
            Category::UnauthorizedAccess => "unauthorized_access",
            Category::Misconfiguration => "misconfiguration",
            Category::MaliciousFileExecution => "malicious_file_execution",
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for Category {
    type Err = CloudError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.slug() == s)
            .ok_or_else(|| CloudError::UnknownCategory { name: s.to_string() })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CloudError {
    #[error("malformed ARN {input:?}: {reason}")]
    MalformedArn { input: String, reason: String },

    #[error("unknown category {name:?}")]
    UnknownCategory { name: String },

    #[error("invalid environment spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("action references unknown resource {arn}")]
    UnknownResource { arn: String },

    #[error("invalid action: {reason}")]
    InvalidAction { reason: String },

    #[error("action timestamp {attempted} precedes environment clock {clock}")]
    ClockRegression {
        clock: crate::time::Timestamp,
        attempted: crate::time::Timestamp,
    },
}
