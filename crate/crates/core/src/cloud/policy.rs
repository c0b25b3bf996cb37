//! Grant-list policies.
//!
//! A policy is a list of grant statements; there are no deny statements.
//! Evaluation is "any statement grants it". Action and resource patterns
//! support a trailing `*` wildcard; principal patterns are exact ARNs,
//! an account-wide `<account-id>:*` form, or the universal `*`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyStatement {
    /// Principal patterns this statement applies to. Empty means the policy
    /// is an identity policy evaluated for whoever it is attached to.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub principals: Vec<String>,
    pub actions: Vec<String>,
    pub resources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDoc {
    pub statements: Vec<PolicyStatement>,
}

/// `pattern` matches `value` exactly or via a trailing `*`.
pub fn matches_pattern(pattern: &str, value: &str) -> bool {
    match pattern.strip_suffix('*') {
        Some(prefix) => value.starts_with(prefix),
        None => pattern == value,
    }
}

fn principal_matches(pattern: &str, principal_arn: &str, principal_account: &str) -> bool {
    if pattern == "*" {
        return true;
    }
    if let Some(account) = pattern.strip_suffix(":*") {
        return principal_account == account;
    }
    pattern == principal_arn
}

impl PolicyDoc {
    pub fn empty() -> Self {
        PolicyDoc { statements: vec![] }
    }

    /// Full access to everything.
    pub fn admin() -> Self {
        PolicyDoc {
            statements: vec![PolicyStatement {
                principals: vec![],
                actions: vec!["*".to_string()],
                resources: vec!["*".to_string()],
            }],
        }
    }

    /// Broad read access plus self-service credential management, the
    /// baseline for ordinary provisioned users.
    pub fn read_only() -> Self {
        PolicyDoc {
            statements: vec![PolicyStatement {
                principals: vec![],
                actions: vec![
                    "s3:Get*".to_string(),
                    "s3:List*".to_string(),
                    "iam:List*".to_string(),
                    "iam:Get*".to_string(),
                    "ec2:Describe*".to_string(),
                    "sts:GetCallerIdentity".to_string(),
                ],
                resources: vec!["*".to_string()],
            }],
        }
    }

    /// IAM and storage administration without the blanket `*`, the kind of
    /// over-broad grant that enables privilege escalation.
    pub fn power_user() -> Self {
        PolicyDoc {
            statements: vec![PolicyStatement {
                principals: vec![],
                actions: vec![
                    "iam:*".to_string(),
                    "s3:*".to_string(),
                    "ec2:Describe*".to_string(),
                    "sts:GetCallerIdentity".to_string(),
                ],
                resources: vec!["*".to_string()],
            }],
        }
    }

    /// Resource policy granting unauthenticated read of a bucket.
    pub fn anonymous_read(bucket_arn: &str) -> Self {
        PolicyDoc {
            statements: vec![PolicyStatement {
                principals: vec!["*".to_string()],
                actions: vec!["s3:GetObject".to_string(), "s3:ListObjects".to_string()],
                resources: vec![bucket_arn.to_string(), format!("{bucket_arn}/*")],
            }],
        }
    }

    /// Resource policy restricting a bucket to its owning account.
    pub fn account_private(bucket_arn: &str, account_id: &str) -> Self {
        PolicyDoc {
            statements: vec![PolicyStatement {
                principals: vec![format!("{account_id}:*")],
                actions: vec!["s3:*".to_string()],
                resources: vec![bucket_arn.to_string(), format!("{bucket_arn}/*")],
            }],
        }
    }

    /// Trust policy for a role: who may assume it.
    pub fn trust(principals: Vec<String>) -> Self {
        PolicyDoc {
            statements: vec![PolicyStatement {
                principals,
                actions: vec!["sts:AssumeRole".to_string()],
                resources: vec!["*".to_string()],
            }],
        }
    }

    /// Identity-policy check: does any statement grant `action` on
    /// `resource`? Principal patterns on statements are ignored here.
    pub fn allows(&self, action: &str, resource: &str) -> bool {
        self.statements.iter().any(|stmt| {
            stmt.actions.iter().any(|p| matches_pattern(p, action))
                && stmt.resources.iter().any(|p| matches_pattern(p, resource))
        })
    }

    /// Resource-policy check: does any statement grant `action` on
    /// `resource` to the given principal?
    pub fn allows_principal(
        &self,
        principal_arn: &str,
        principal_account: &str,
        action: &str,
        resource: &str,
    ) -> bool {
        self.statements.iter().any(|stmt| {
            stmt.principals
                .iter()
                .any(|p| principal_matches(p, principal_arn, principal_account))
                && stmt.actions.iter().any(|p| matches_pattern(p, action))
                && stmt.resources.iter().any(|p| matches_pattern(p, resource))
        })
    }

    /// True when the policy lets unauthenticated callers read.
    pub fn grants_anonymous_read(&self) -> bool {
        self.statements.iter().any(|stmt| {
            stmt.principals.iter().any(|p| p == "*")
                && stmt.actions.iter().any(|p| matches_pattern(p, "s3:GetObject"))
        })
    }

    /// True when any statement grants everything, the marker for
    /// administrator principals.
    pub fn grants_admin(&self) -> bool {
        self.statements
            .iter()
            .any(|stmt| stmt.actions.iter().any(|a| a == "*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wildcard_patterns() {
        assert!(matches_pattern("*", "s3:GetObject"));
        assert!(matches_pattern("s3:Get*", "s3:GetObject"));
        assert!(matches_pattern("s3:GetObject", "s3:GetObject"));
        assert!(!matches_pattern("s3:Get*", "s3:ListObjects"));
        assert!(!matches_pattern("s3:GetObject", "s3:GetObjectAcl"));
    }

    #[test]
    fn read_only_scope() {
        let p = PolicyDoc::read_only();
        assert!(p.allows("s3:GetObject", "arn:aws:s3::123456789012:bucket/b"));
        assert!(p.allows("ec2:DescribeInstances", "*"));
        assert!(!p.allows("iam:CreateUser", "*"));
        assert!(!p.allows("cloudtrail:StopLogging", "*"));
        assert!(!p.grants_admin());
    }

    #[test]
    fn admin_grants_everything() {
        let p = PolicyDoc::admin();
        assert!(p.allows("cloudtrail:StopLogging", "*"));
        assert!(p.grants_admin());
    }

    #[test]
    fn anonymous_read_detection() {
        let bucket = "arn:aws:s3::123456789012:bucket/public-assets";
        assert!(PolicyDoc::anonymous_read(bucket).grants_anonymous_read());
        assert!(!PolicyDoc::account_private(bucket, "123456789012").grants_anonymous_read());
    }

    #[test]
    fn trust_policy_principal_matching() {
        let user = "arn:aws:iam::999988887777:user/integration";
        let doc = PolicyDoc::trust(vec![user.to_string()]);
        assert!(doc.allows_principal(user, "999988887777", "sts:AssumeRole", "*"));
        assert!(!doc.allows_principal(
            "arn:aws:iam::999988887777:user/other",
            "999988887777",
            "sts:AssumeRole",
            "*"
        ));

        let account_wide = PolicyDoc::trust(vec!["123456789012:*".to_string()]);
        assert!(account_wide.allows_principal(
            "arn:aws:iam::123456789012:user/anyone",
            "123456789012",
            "sts:AssumeRole",
            "*"
        ));
    }
}
