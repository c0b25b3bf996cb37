//! Sized corpus generation.
//!
//! A corpus is a directory of case bundles plus a manifest. Every case is
//! a transformed seed scenario, executed and then vetted: its extracted
//! ground truth must carry the intended verdict, reproduce the seed's
//! rule multiset, and (for attacks) keep every novel finding textually
//! clear of the alert, so that echoing the alert back can never earn
//! depth credit. Cases failing the vet are retried under a fresh derived
//! seed; generation is a pure function of `(config, root_seed)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::seeds;
use super::transform::{apply_plan, Transform, VariationPlan};
use super::VariationError;
use crate::cloud::Category;
use crate::eval::DEFAULT_TAU;
use crate::scenario::{
    check_consistency, compress_timeline, execute_scenario, write_bundle, CaseBundle,
    ScenarioSpec, Verdict, BENIGN_EXPLANATION_RULES, RULEBOOK_VERSION,
};
use crate::seeded::{derive_seed, rng_from};
use crate::text::rouge_l_text;

/// Manifest written next to the `cases/` directory.
pub const CORPUS_FILE: &str = "corpus.json";

/// Derived-seed retries per case before generation gives up.
const MAX_ATTEMPTS: usize = 16;

/// Attack cases must give an investigator at least this much to find.
const MIN_TP_FINDINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMix {
    pub tp: usize,
    pub fp: usize,
}

/// How many cases to generate per category, and how tight the timeline is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistributionConfig {
    /// Multiplier on every step offset before execution; values below one
    /// compress a scenario's span without reordering it.
    pub compression_factor: f64,
    /// Case counts keyed by category slug.
    pub categories: BTreeMap<String, CategoryMix>,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        let mut categories = BTreeMap::new();
        categories.insert("brute_force".to_string(), CategoryMix { tp: 135, fp: 59 });
        categories.insert("unauthorized_access".to_string(), CategoryMix { tp: 186, fp: 112 });
        categories.insert("misconfiguration".to_string(), CategoryMix { tp: 100, fp: 75 });
        categories
            .insert("malicious_file_execution".to_string(), CategoryMix { tp: 54, fp: 73 });
        DistributionConfig { compression_factor: 0.25, categories }
    }
}

impl DistributionConfig {
    pub fn mix(&self, category: Category) -> CategoryMix {
        self.categories.get(category.slug()).copied().unwrap_or(CategoryMix { tp: 0, fp: 0 })
    }

    pub fn total_cases(&self) -> usize {
        Category::ALL
            .iter()
            .map(|c| {
                let mix = self.mix(*c);
                mix.tp + mix.fp
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), VariationError> {
        let invalid = |reason: String| Err(VariationError::InvalidConfig { reason });
        if !self.compression_factor.is_finite() || self.compression_factor <= 0.0 {
            return invalid(format!(
                "compression_factor must be a positive number, got {}",
                self.compression_factor
            ));
        }
        for key in self.categories.keys() {
            if !Category::ALL.iter().any(|c| c.slug() == key) {
                return invalid(format!("unknown category {key:?}"));
            }
        }
        if self.total_cases() == 0 {
            return invalid("no cases requested".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// Cases written.
    pub cases: usize,
    /// Executed variations thrown away by the vet.
    pub rejected_attempts: usize,
    /// Plans that lost their technique swap, either because the seed had
    /// nothing to swap or because the swapped script failed the vet.
    pub swaps_dropped: usize,
}

/// One manifest row: where a case came from, seed-wise. The verdict is
/// deliberately absent; it lives only in the case's ground-truth file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseListing {
    pub case_id: String,
    /// Seed scenario this case was varied from, with the variation suffix.
    pub scenario_id: String,
    /// Seed the case was executed under, derived from the corpus root seed
    /// and the case id.
    pub case_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub root_seed: u64,
    pub rulebook_version: String,
    pub config: DistributionConfig,
    /// Every generated case with its seed lineage, in generation order.
    pub cases: Vec<CaseListing>,
    pub stats: GenerationStats,
}

impl CorpusManifest {
    pub fn case_ids(&self) -> impl Iterator<Item = &str> {
        self.cases.iter().map(|c| c.case_id.as_str())
    }
}

/// Short per-category prefix used in case ids.
fn short_code(category: Category) -> &'static str {
    match category {
        Category::BruteForce => "bf",
        Category::UnauthorizedAccess => "ua",
        Category::Misconfiguration => "mis",
        Category::MaliciousFileExecution => "mfe",
    }
}

/// Generates the full corpus under `out_dir` and writes its manifest.
///
/// Layout: one bundle directory per case under `out_dir/cases/<case_id>/`,
/// and the manifest at `out_dir/corpus.json`. The manifest never records
/// verdicts; those stay inside each case's ground-truth file.
pub fn generate_corpus(
    config: &DistributionConfig,
    root_seed: u64,
    out_dir: &Path,
) -> Result<CorpusManifest, VariationError> {
    config.validate()?;
    let cases_dir = out_dir.join("cases");
    fs::create_dir_all(&cases_dir)?;

    let mut baselines = BTreeMap::new();
    let mut cases: Vec<CaseListing> = Vec::new();
    let mut stats = GenerationStats::default();

    for category in Category::ALL {
        let mix = config.mix(category);
        let attack_seeds = seeds::tp_seeds(category);
        for i in 0..mix.tp {
            let case_id = format!("{}-tp-{i:04}", short_code(category));
            let seed_spec = &attack_seeds[i % attack_seeds.len()];
            let bundle = build_case(
                seed_spec,
                Verdict::Tp,
                &case_id,
                root_seed,
                config,
                &mut baselines,
                &mut stats,
            )?;
            write_bundle(&cases_dir.join(&case_id), &bundle)?;
            cases.push(CaseListing {
                case_id,
                scenario_id: bundle.manifest.scenario_id.clone(),
                case_seed: bundle.manifest.case_seed,
            });
        }
        let benign_seeds = seeds::fp_seeds(category);
        for i in 0..mix.fp {
            let case_id = format!("{}-fp-{i:04}", short_code(category));
            let seed_spec = &benign_seeds[i % benign_seeds.len()];
            let bundle = build_case(
                seed_spec,
                Verdict::Fp,
                &case_id,
                root_seed,
                config,
                &mut baselines,
                &mut stats,
            )?;
            write_bundle(&cases_dir.join(&case_id), &bundle)?;
            cases.push(CaseListing {
                case_id,
                scenario_id: bundle.manifest.scenario_id.clone(),
                case_seed: bundle.manifest.case_seed,
            });
        }
    }

    stats.cases = cases.len();
    let manifest = CorpusManifest {
        root_seed,
        rulebook_version: RULEBOOK_VERSION.to_string(),
        config: config.clone(),
        cases,
        stats,
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(out_dir.join(CORPUS_FILE), json)?;
    Ok(manifest)
}

/// Builds one vetted case, retrying under fresh derived seeds until the
/// executed variation passes or the attempt budget runs out.
fn build_case(
    seed_spec: &ScenarioSpec,
    intended: Verdict,
    case_id: &str,
    root_seed: u64,
    config: &DistributionConfig,
    baselines: &mut BTreeMap<String, Vec<String>>,
    stats: &mut GenerationStats,
) -> Result<CaseBundle, VariationError> {
    let baseline = baseline_rules(seed_spec, root_seed, baselines)?;
    let mut swap_banned = false;
    let mut last_reason = String::new();

    for attempt in 0..MAX_ATTEMPTS {
        let salt =
            if attempt == 0 { case_id.to_string() } else { format!("{case_id}#retry{attempt}") };
        let case_seed = derive_seed(root_seed, &salt);

        let mut plan_rng = rng_from(derive_seed(case_seed, "plan"));
        let mut transforms = vec![Transform::RenameResources, Transform::ShiftTimeline];
        if plan_rng.gen_bool(0.5) {
            transforms.push(Transform::ShiftRegion);
        }
        let wants_swap = plan_rng.gen_bool(0.35);
        if wants_swap && !swap_banned {
            transforms.push(Transform::SwapTechnique);
        }
        let plan = VariationPlan {
            scenario_id: format!("{}/{case_id}", seed_spec.scenario_id),
            transforms,
            seed: derive_seed(case_seed, "transforms"),
        };

        let mut spec = match apply_plan(seed_spec, &plan) {
            Ok(spec) => spec,
            Err(VariationError::Inapplicable { .. }) => {
                // The seed has nothing to swap; drop the transform and
                // rebuild the same attempt without it.
                swap_banned = true;
                stats.swaps_dropped += 1;
                let mut fallback = plan.clone();
                fallback.transforms.retain(|t| *t != Transform::SwapTechnique);
                apply_plan(seed_spec, &fallback)?
            }
            Err(other) => return Err(other),
        };
        spec.steps = compress_timeline(&spec.steps, config.compression_factor);

        let bundle = match execute_scenario(&spec, case_seed) {
            Ok(mut bundle) => {
                bundle.manifest.case_id = case_id.to_string();
                bundle.manifest.root_seed = root_seed;
                bundle
            }
            Err(err) => {
                last_reason = err.to_string();
                stats.rejected_attempts += 1;
                if plan.transforms.contains(&Transform::SwapTechnique) {
                    swap_banned = true;
                    stats.swaps_dropped += 1;
                }
                continue;
            }
        };

        match validate_variation(&bundle, intended, Some(&baseline)) {
            Ok(()) => return Ok(bundle),
            Err(reason) => {
                last_reason = reason;
                stats.rejected_attempts += 1;
                if plan.transforms.contains(&Transform::SwapTechnique) {
                    swap_banned = true;
                    stats.swaps_dropped += 1;
                }
            }
        }
    }

    Err(VariationError::Exhausted {
        case_id: case_id.to_string(),
        attempts: MAX_ATTEMPTS,
        reason: last_reason,
    })
}

/// The rule multiset the vet compares variations against, from one
/// execution of the untouched seed script.
fn baseline_rules(
    seed_spec: &ScenarioSpec,
    root_seed: u64,
    cache: &mut BTreeMap<String, Vec<String>>,
) -> Result<Vec<String>, VariationError> {
    if let Some(rules) = cache.get(&seed_spec.scenario_id) {
        return Ok(rules.clone());
    }
    let seed = derive_seed(root_seed, &format!("baseline:{}", seed_spec.scenario_id));
    let bundle = execute_scenario(seed_spec, seed)?;
    let rules = rule_multiset(&bundle);
    cache.insert(seed_spec.scenario_id.clone(), rules.clone());
    Ok(rules)
}

pub(crate) fn rule_multiset(bundle: &CaseBundle) -> Vec<String> {
    let mut rules: Vec<String> =
        bundle.ground_truth.findings.iter().map(|f| f.rule_id.clone()).collect();
    rules.sort();
    rules
}

/// Vets one executed variation. `baseline_rules`, when given, is the rule
/// multiset of the untouched seed; a variation that gained or lost rules
/// changed its substance, not just its surface.
pub fn validate_variation(
    bundle: &CaseBundle,
    intended: Verdict,
    baseline_rules: Option<&[String]>,
) -> Result<(), String> {
    check_consistency(bundle).map_err(|e| e.to_string())?;
    let gt = &bundle.ground_truth;
    if gt.verdict != intended {
        return Err(format!("verdict {} where {intended} was intended", gt.verdict));
    }
    match intended {
        Verdict::Tp => {
            if gt.findings.len() < MIN_TP_FINDINGS {
                return Err(format!(
                    "attack case has only {} findings (minimum {MIN_TP_FINDINGS})",
                    gt.findings.len()
                ));
            }
            if gt.novel_finding_ids.is_empty() {
                return Err("attack case has no novel findings".to_string());
            }
            for finding in &gt.findings {
                if !gt.novel_finding_ids.contains(&finding.finding_id) {
                    continue;
                }
                let overlap = rouge_l_text(&finding.statement, &bundle.alert.description);
                if overlap > DEFAULT_TAU {
                    return Err(format!(
                        "novel finding {} overlaps the alert text (similarity {overlap:.3}); \
                         restating the alert could earn credit for it",
                        finding.finding_id
                    ));
                }
            }
        }
        Verdict::Fp => {
            let exonerated = gt.findings.iter().any(|f| {
                BENIGN_EXPLANATION_RULES.contains(&f.rule_id.as_str()) && !f.evidence.is_empty()
            });
            if !exonerated {
                return Err("benign case lacks an evidenced exonerating finding".to_string());
            }
        }
    }
    if let Some(expected) = baseline_rules {
        let got = rule_multiset(bundle);
        if got != expected {
            return Err(format!(
                "rule multiset {got:?} differs from the seed's {expected:?}"
            ));
        }
    }
    Ok(())
}
