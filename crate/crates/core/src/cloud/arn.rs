//! Resource names in `arn:partition:service:region:account:resource/...`
//! form. Parsing and rendering are exact inverses for any valid value.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CloudError;

/// A parsed resource name.
///
/// `account_id` is always present and always twelve digits, including for
/// storage resources; `resource_path` is the slash-separated tail and is
/// never empty. Path segments may not contain `:` or `/`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arn {
    pub partition: String,
    pub service: String,
    pub region: String,
    pub account_id: String,
    pub resource_path: Vec<String>,
}

impl Arn {
    pub fn new(
        service: &str,
        region: &str,
        account_id: &str,
        resource_path: &[&str],
    ) -> Result<Self, CloudError> {
        let arn = Arn {
            partition: "aws".to_string(),
            service: service.to_string(),
            region: region.to_string(),
            account_id: account_id.to_string(),
            resource_path: resource_path.iter().map(|s| s.to_string()).collect(),
        };
        arn.validate()?;
        Ok(arn)
    }

    pub fn render(&self) -> String {
        format!(
            "arn:{}:{}:{}:{}:{}",
            self.partition,
            self.service,
            self.region,
            self.account_id,
            self.resource_path.join("/")
        )
    }

    pub fn parse(input: &str) -> Result<Self, CloudError> {
        let malformed = |reason: &str| CloudError::MalformedArn {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = input.splitn(6, ':');
        let prefix = parts.next().unwrap_or_default();
        if prefix != "arn" {
            return Err(malformed("missing arn: prefix"));
        }
        let partition = parts.next().ok_or_else(|| malformed("missing partition"))?;
        let service = parts.next().ok_or_else(|| malformed("missing service"))?;
        let region = parts.next().ok_or_else(|| malformed("missing region"))?;
        let account_id = parts.next().ok_or_else(|| malformed("missing account id"))?;
        let resource = parts.next().ok_or_else(|| malformed("missing resource path"))?;
        let arn = Arn {
            partition: partition.to_string(),
            service: service.to_string(),
            region: region.to_string(),
            account_id: account_id.to_string(),
            resource_path: resource.split('/').map(|s| s.to_string()).collect(),
        };
        arn.validate().map_err(|e| match e {
            CloudError::MalformedArn { reason, .. } => malformed(&reason),
            other => other,
        })?;
        Ok(arn)
    }

    /// Final path segment: the bare resource name.
    pub fn name(&self) -> &str {
        self.resource_path.last().map(String::as_str).unwrap_or_default()
    }

    fn validate(&self) -> Result<(), CloudError> {
        let malformed = |reason: String| CloudError::MalformedArn {
            input: self.render(),
            reason,
        };
        if self.partition.is_empty() || self.service.is_empty() {
            return Err(malformed("empty partition or service".to_string()));
        }
        if self.account_id.len() != 12 || !self.account_id.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(format!(
                "account id {:?} is not twelve digits",
                self.account_id
            )));
        }
        if self.resource_path.is_empty() {
            return Err(malformed("empty resource path".to_string()));
        }
        for segment in &self.resource_path {
            if segment.is_empty() {
                return Err(malformed("empty resource path segment".to_string()));
            }
            if segment.contains(':') || segment.contains('/') {
                return Err(malformed(format!(
                    "resource path segment {segment:?} contains a separator"
                )));
            }
        }
        Ok(())
    }

    // ── Constructors for the resource kinds the model provisions ──────────

    pub fn iam_user(account_id: &str, name: &str) -> Result<Self, CloudError> {
        Arn::new("iam", "", account_id, &["user", name])
    }

    pub fn iam_role(account_id: &str, name: &str) -> Result<Self, CloudError> {
        Arn::new("iam", "", account_id, &["role", name])
    }

    pub fn s3_bucket(account_id: &str, name: &str) -> Result<Self, CloudError> {
        Arn::new("s3", "", account_id, &["bucket", name])
    }

    pub fn ec2_instance(region: &str, account_id: &str, id: &str) -> Result<Self, CloudError> {
        Arn::new("ec2", region, account_id, &["instance", id])
    }

    pub fn security_group(region: &str, account_id: &str, id: &str) -> Result<Self, CloudError> {
        Arn::new("ec2", region, account_id, &["security-group", id])
    }

    pub fn assumed_role(account_id: &str, role: &str, session: &str) -> Result<Self, CloudError> {
        Arn::new("sts", "", account_id, &["assumed-role", role, session])
    }
}

impl fmt::Display for Arn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Arn {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Arn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Arn::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn render_parse_round_trip() {
        let arn = Arn::iam_user("123456789012", "avery.stone").unwrap();
        assert_eq!(arn.render(), "arn:aws:iam::123456789012:user/avery.stone");
        assert_eq!(Arn::parse(&arn.render()).unwrap(), arn);
        assert_eq!(arn.name(), "avery.stone");
    }

    #[test]
    fn session_arns_round_trip() {
        let arn = Arn::assumed_role("210987654321", "data-sync-role", "session-ab12cd34").unwrap();
        assert_eq!(
            arn.render(),
            "arn:aws:sts::210987654321:assumed-role/data-sync-role/session-ab12cd34"
        );
        assert_eq!(Arn::parse(&arn.render()).unwrap(), arn);
    }

    #[test]
    fn rejects_bad_account_ids() {
        assert!(Arn::iam_user("12345", "a").is_err());
        assert!(Arn::iam_user("12345678901x", "a").is_err());
        assert!(Arn::parse("arn:aws:iam::123:user/a").is_err());
    }

    #[test]
    fn rejects_malformed_structure() {
        assert!(Arn::parse("not-an-arn").is_err());
        assert!(Arn::parse("arn:aws:iam::123456789012").is_err());
        assert!(Arn::parse("arn:aws:iam::123456789012:").is_err());
        assert!(Arn::parse("arn:aws:s3::123456789012:bucket//double").is_err());
    }

    #[test]
    fn serde_uses_the_string_form() {
        let arn = Arn::s3_bucket("123456789012", "payments-invoices-0a1b2c").unwrap();
        let json = serde_json::to_string(&arn).unwrap();
        assert_eq!(json, "\"arn:aws:s3::123456789012:bucket/payments-invoices-0a1b2c\"");
        let back: Arn = serde_json::from_str(&json).unwrap();
        assert_eq!(back, arn);
    }

    prop_compose! {
        fn arb_segment()(s in "[a-z0-9][a-z0-9._-]{0,12}") -> String { s }
    }

    prop_compose! {
        fn arb_arn()(
            service in "[a-z]{2,6}",
            region in proptest::option::of("[a-z]{2}-[a-z]{4}-[0-9]"),
            account in 100_000_000_000u64..=999_999_999_999,
            path in proptest::collection::vec(arb_segment(), 1..4),
        ) -> Arn {
            Arn {
                partition: "aws".to_string(),
                service,
                region: region.unwrap_or_default(),
                account_id: format!("{account:012}"),
                resource_path: path,
            }
        }
    }

    proptest! {
        #[test]
        fn parse_inverts_render(arn in arb_arn()) {
            prop_assert_eq!(Arn::parse(&arn.render()).unwrap(), arn);
        }
    }
}
