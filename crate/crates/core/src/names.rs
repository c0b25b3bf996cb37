//! Seeded generation of realistic-looking names and identifiers.
//!
//! IP addresses are drawn from documentation ranges (TEST-NET-1..3) and
//! RFC 1918 space so no generated artifact ever points at a real host.

use rand::Rng;

pub const REGIONS: &[&str] = &[
    "us-east-1",
    "us-west-2",
    "eu-west-1",
    "eu-central-1",
    "ap-southeast-2",
    "sa-east-1",
];

const TEAMS: &[&str] = &[
    "payments",
    "analytics",
    "platform",
    "mobile",
    "data",
    "infra",
    "web",
    "ops",
    "research",
    "billing",
];

const BUCKET_NOUNS: &[&str] = &[
    "invoices",
    "telemetry",
    "backups",
    "assets",
    "exports",
    "logs",
    "reports",
    "artifacts",
    "snapshots",
    "archive",
];

const FIRST_NAMES: &[&str] = &[
    "avery", "jordan", "casey", "morgan", "riley", "quinn", "harper", "rowan", "skyler", "ellis",
    "marlow", "devon",
];

const LAST_NAMES: &[&str] = &[
    "stone", "field", "brooks", "hayes", "lane", "reed", "cole", "fox", "marsh", "bell",
];

const ROLE_PURPOSES: &[&str] = &[
    "deployer",
    "readonly",
    "audit",
    "backup",
    "ingest",
    "reporting",
    "runner",
    "monitoring",
    "support",
    "sync",
];

const OBJECT_STEMS: &[&str] = &[
    "report",
    "ledger",
    "customers",
    "metrics",
    "dump",
    "config",
    "inventory",
    "statement",
    "summary",
    "export",
];

const OBJECT_EXTS: &[&str] = &["csv", "json", "parquet", "pdf", "txt"];

// Alias pools feed renaming variations. They share no words with the
// provisioning pools above, so a renamed artifact can never reproduce an
// original name no matter which indexes the generator draws.

const ALIAS_TEAMS: &[&str] = &[
    "lending",
    "catalog",
    "identity",
    "search",
    "growth",
    "core",
    "edge",
    "risk",
    "sales",
    "devrel",
];

const ALIAS_BUCKET_NOUNS: &[&str] = &[
    "records",
    "captures",
    "bundles",
    "media",
    "drops",
    "traces",
    "results",
    "payloads",
    "mirrors",
    "vault",
];

const ALIAS_FIRST_NAMES: &[&str] = &[
    "sage", "finley", "emerson", "oakley", "reese", "arden", "blake", "hollis", "lennon", "tatum",
    "peyton", "kendall",
];

const ALIAS_LAST_NAMES: &[&str] = &[
    "frost", "rhodes", "vale", "ash", "birch", "calder", "dunn", "ellery", "gale", "holt",
];

const ALIAS_ROLE_PURPOSES: &[&str] = &[
    "publisher",
    "scanner",
    "indexer",
    "archiver",
    "exporter",
    "notifier",
    "planner",
    "resolver",
    "janitor",
    "fetcher",
];

const KEY_CHARSET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

pub fn pick<'a, R: Rng>(rng: &mut R, list: &[&'a str]) -> &'a str {
    list[rng.gen_range(0..list.len())]
}

pub fn account_id<R: Rng>(rng: &mut R) -> String {
    format!("{:012}", rng.gen_range(100_000_000_000u64..=999_999_999_999u64))
}

pub fn hex_string<R: Rng>(rng: &mut R, len: usize) -> String {
    const HEX: &[u8] = b"0123456789abcdef";
    (0..len)
        .map(|_| HEX[rng.gen_range(0..16)] as char)
        .collect()
}

pub fn region<R: Rng>(rng: &mut R) -> String {
    pick(rng, REGIONS).to_string()
}

pub fn user_name<R: Rng>(rng: &mut R) -> String {
    format!("{}.{}", pick(rng, FIRST_NAMES), pick(rng, LAST_NAMES))
}

pub fn role_name<R: Rng>(rng: &mut R) -> String {
    format!("{}-{}-role", pick(rng, TEAMS), pick(rng, ROLE_PURPOSES))
}

pub fn bucket_name<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}-{}-{}",
        pick(rng, TEAMS),
        pick(rng, BUCKET_NOUNS),
        hex_string(rng, 6)
    )
}

pub fn security_group_name<R: Rng>(rng: &mut R) -> String {
    format!("{}-{}-sg", pick(rng, TEAMS), pick(rng, BUCKET_NOUNS))
}

pub fn instance_id<R: Rng>(rng: &mut R) -> String {
    format!("i-{}", hex_string(rng, 17))
}

pub fn security_group_id<R: Rng>(rng: &mut R) -> String {
    format!("sg-{}", hex_string(rng, 17))
}

pub fn access_key_id<R: Rng>(rng: &mut R, temporary: bool) -> String {
    let prefix = if temporary { "ASIA" } else { "AKIA" };
    let tail: String = (0..16)
        .map(|_| KEY_CHARSET[rng.gen_range(0..KEY_CHARSET.len())] as char)
        .collect();
    format!("{prefix}{tail}")
}

pub fn object_key<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}/{}-{}.{}",
        pick(rng, TEAMS),
        pick(rng, OBJECT_STEMS),
        rng.gen_range(2019..2025),
        pick(rng, OBJECT_EXTS)
    )
}

/// An address from one of the documentation netblocks, used for actors
/// outside the modeled network.
pub fn external_ip<R: Rng>(rng: &mut R) -> String {
    let block = ["203.0.113", "198.51.100"][rng.gen_range(0..2)];
    format!("{block}.{}", rng.gen_range(1..255))
}

/// An address inside the modeled corporate network.
pub fn internal_ip<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.5) {
        format!("10.{}.{}.{}", rng.gen_range(0..8), rng.gen_range(0..255), rng.gen_range(1..255))
    } else {
        format!("192.0.2.{}", rng.gen_range(1..255))
    }
}

pub fn change_ticket<R: Rng>(rng: &mut R) -> String {
    format!("CHG-{:05}", rng.gen_range(10_000..100_000))
}

pub fn session_name<R: Rng>(rng: &mut R) -> String {
    format!("session-{}", hex_string(rng, 8))
}

pub fn alias_user_name<R: Rng>(rng: &mut R) -> String {
    format!("{}.{}", pick(rng, ALIAS_FIRST_NAMES), pick(rng, ALIAS_LAST_NAMES))
}

pub fn alias_role_name<R: Rng>(rng: &mut R) -> String {
    format!("{}-{}-role", pick(rng, ALIAS_TEAMS), pick(rng, ALIAS_ROLE_PURPOSES))
}

pub fn alias_bucket_name<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}-{}-{}",
        pick(rng, ALIAS_TEAMS),
        pick(rng, ALIAS_BUCKET_NOUNS),
        hex_string(rng, 6)
    )
}

pub fn alias_security_group_name<R: Rng>(rng: &mut R) -> String {
    format!("{}-{}-sg", pick(rng, ALIAS_TEAMS), pick(rng, ALIAS_BUCKET_NOUNS))
}

/// Alias for pipeline service accounts. The `cicd-` marker is load-bearing
/// for benign-activity classification, so renames keep it.
pub fn alias_pipeline_user_name<R: Rng>(rng: &mut R) -> String {
    format!("cicd-{}-{}", pick(rng, ALIAS_ROLE_PURPOSES), pick(rng, ALIAS_TEAMS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded::rng_from;

    #[test]
    fn generation_is_deterministic() {
        let mut a = rng_from(11);
        let mut b = rng_from(11);
        for _ in 0..8 {
            assert_eq!(bucket_name(&mut a), bucket_name(&mut b));
            assert_eq!(external_ip(&mut a), external_ip(&mut b));
        }
    }

    #[test]
    fn account_ids_are_twelve_digits() {
        let mut rng = rng_from(3);
        for _ in 0..32 {
            let id = account_id(&mut rng);
            assert_eq!(id.len(), 12);
            assert!(id.bytes().all(|b| b.is_ascii_digit()));
        }
    }

    #[test]
    fn access_keys_have_expected_shape() {
        let mut rng = rng_from(9);
        assert!(access_key_id(&mut rng, false).starts_with("AKIA"));
        assert!(access_key_id(&mut rng, true).starts_with("ASIA"));
        assert_eq!(access_key_id(&mut rng, false).len(), 20);
    }

    #[test]
    fn alias_pools_share_no_words_with_provisioning_pools() {
        let pairs: &[(&[&str], &[&str])] = &[
            (TEAMS, ALIAS_TEAMS),
            (BUCKET_NOUNS, ALIAS_BUCKET_NOUNS),
            (FIRST_NAMES, ALIAS_FIRST_NAMES),
            (LAST_NAMES, ALIAS_LAST_NAMES),
            (ROLE_PURPOSES, ALIAS_ROLE_PURPOSES),
        ];
        for (original, alias) in pairs {
            for word in *alias {
                assert!(!original.contains(word), "{word} appears in both pools");
            }
        }
    }

    #[test]
    fn aliases_never_collide_with_originals() {
        let mut rng = rng_from(17);
        for _ in 0..64 {
            let alias = alias_bucket_name(&mut rng);
            let (team, rest) = alias.split_once('-').unwrap();
            let noun = rest.split_once('-').unwrap().0;
            assert!(ALIAS_TEAMS.contains(&team));
            assert!(!TEAMS.contains(&team));
            assert!(ALIAS_BUCKET_NOUNS.contains(&noun));
        }
        assert!(alias_pipeline_user_name(&mut rng).starts_with("cicd-"));
    }
}
