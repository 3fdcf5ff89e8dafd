use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{normalize_term, DescriptorError};

/// Bundled alias list covering the usual e-learning spellings and acronyms.
pub const DEFAULT_VARIANT_RULES: &str = include_str!("../../data/default_variant_rules.csv");

/// How secondary descriptors are derived from primary ones.
///
/// Alias pairs apply in both directions: whichever side is a primary term
/// absorbs the other as its variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRules {
    pub aliases: Vec<(String, String)>,
    /// Add the hyphen-free spelling ("e-learning" -> "elearning").
    pub dehyphenate: bool,
    /// Add the space-free spelling ("blended learning" -> "blendedlearning").
    pub despace: bool,
}

impl Default for VariantRules {
    fn default() -> Self {
        VariantRules {
            aliases: Vec::new(),
            dehyphenate: true,
            despace: true,
        }
    }
}

impl VariantRules {
    /// Parses a `variant,canonical` CSV (header row required). Both columns
    /// are normalized on load.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, DescriptorError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().map(str::trim).ne(["variant", "canonical"]) {
            return Err(DescriptorError::MalformedRule {
                line: 1,
                reason: "header must be `variant,canonical`".into(),
            });
        }
        let mut aliases = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let variant = normalize_term(record.get(0).unwrap_or(""));
            let canonical = normalize_term(record.get(1).unwrap_or(""));
            if variant.is_empty() || canonical.is_empty() || record.len() != 2 {
                return Err(DescriptorError::MalformedRule {
                    line,
                    reason: "expected two non-empty terms".into(),
                });
            }
            aliases.push((variant, canonical));
        }
        Ok(VariantRules {
            aliases,
            ..VariantRules::default()
        })
    }

    pub fn bundled() -> Self {
        Self::from_csv(DEFAULT_VARIANT_RULES.as_bytes()).expect("bundled rules parse")
    }
}

/// Primary descriptors plus their variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub term_core: String,
    pub primary: Vec<String>,
    /// variant -> canonical primary term
    pub secondary: BTreeMap<String, String>,
}

impl DescriptorSet {
    /// Variants folding onto `primary`, sorted.
    pub fn variants_of(&self, primary: &str) -> Vec<&str> {
        self.secondary
            .iter()
            .filter(|(_, c)| c.as_str() == primary)
            .map(|(v, _)| v.as_str())
            .collect()
    }

    /// The primary term followed by its variants: everything a per-term
    /// article count should match.
    pub fn match_terms(&self, primary: &str) -> Vec<String> {
        std::iter::once(primary.to_string())
            .chain(self.variants_of(primary).into_iter().map(str::to_string))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.primary.len() + self.secondary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty()
    }
}

/// Derives secondary descriptors for `primary` under `rules`.
///
/// Candidates identical to a primary term are dropped; a candidate claimed by
/// two different primaries is a [`DescriptorError::ConflictingAlias`].
pub fn expand_secondary(
    term_core: &str,
    primary: &[String],
    rules: &VariantRules,
) -> Result<DescriptorSet, DescriptorError> {
    let primary: Vec<String> = primary.iter().map(|p| normalize_term(p)).collect();
    let core = normalize_term(term_core);
    if !primary.contains(&core) {
        return Err(DescriptorError::CoreTermExcluded(core));
    }
    let primary_set: BTreeSet<&str> = primary.iter().map(String::as_str).collect();

    let mut candidates: Vec<(String, &str)> = Vec::new();
    for p in &primary {
        if rules.dehyphenate && p.contains('-') {
            candidates.push((p.replace('-', ""), p));
        }
        if rules.despace && p.contains(' ') {
            candidates.push((p.replace(' ', ""), p));
        }
    }
    for (variant, canonical) in &rules.aliases {
        match (
            primary_set.get(variant.as_str()),
            primary_set.get(canonical.as_str()),
        ) {
            (None, Some(&c)) => candidates.push((variant.clone(), c)),
            (Some(&v), None) => candidates.push((canonical.clone(), v)),
            _ => {}
        }
    }

    let mut secondary: BTreeMap<String, String> = BTreeMap::new();
    for (variant, canonical) in candidates {
        if variant.is_empty() || primary_set.contains(variant.as_str()) {
            continue;
        }
        match secondary.get(&variant) {
            Some(prev) if prev != canonical => {
                return Err(DescriptorError::ConflictingAlias {
                    variant,
                    first: prev.clone(),
                    second: canonical.to_string(),
                })
            }
            _ => {
                secondary.insert(variant, canonical.to_string());
            }
        }
    }
    Ok(DescriptorSet {
        term_core: core,
        primary,
        secondary,
    })
}
