//! Keyword extraction, co-occurrence analysis and descriptor selection.
//!
//! Primary descriptors are the keywords most strongly tied into the
//! co-occurrence network of documents mentioning the core term. Secondary
//! descriptors are spelling variants and aliases that fold back onto a
//! primary term when counting articles.

mod normalize;
mod variants;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::DocumentRecord;
use crate::similarity::{association_strength as normalize_counts, SimilarityMatrix};

pub(crate) use normalize::contains_sequence;
pub use normalize::{normalize_term, tokenize};
pub use variants::{expand_secondary, DescriptorSet, VariantRules, DEFAULT_VARIANT_RULES};

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("core term {0:?} does not reach the minimum occurrence")]
    CoreTermExcluded(String),
    #[error("variant {variant:?} maps to both {first:?} and {second:?}")]
    ConflictingAlias {
        variant: String,
        first: String,
        second: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("variant rules line {line}: {reason}")]
    MalformedRule { line: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A normalized keyword and the number of documents carrying it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    pub term: String,
    pub occurrences: u32,
}

/// Normalized keyword document frequencies over `docs`, sorted by term.
///
/// Author and index keywords are merged; a term counts once per document.
pub fn extract_keywords<'a, I>(docs: I) -> Vec<TermStats>
where
    I: IntoIterator<Item = &'a DocumentRecord>,
{
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for d in docs {
        for term in d.keyword_set() {
            *counts.entry(term).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(term, occurrences)| TermStats { term, occurrences })
        .collect()
}

/// Symmetric keyword co-occurrence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    terms: Vec<TermStats>,
    /// `(i, j) -> c_ij` for `i < j`, zeros omitted.
    counts: BTreeMap<(usize, usize), u32>,
}

impl CooccurrenceMatrix {
    pub fn terms(&self) -> &[TermStats] {
        &self.terms
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        if i == j {
            return 0;
        }
        let k = if i < j { (i, j) } else { (j, i) };
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// `(i, j, c_ij)` with `i < j`, non-zero only.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.counts.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn nnz(&self) -> usize {
        self.counts.len()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DescriptorError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term_i", "term_j", "count"])?;
        for (i, j, c) in self.iter() {
            w.write_record([&self.terms[i].term, &self.terms[j].term, &c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Counts, for every pair of `terms`, the documents whose keyword sets hold
/// both. Keywords outside `terms` are ignored.
pub fn build_cooccurrence<'a, I>(docs: I, terms: &[TermStats]) -> CooccurrenceMatrix
where
    I: IntoIterator<Item = &'a DocumentRecord>,
{
    let index: HashMap<&str, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.term.as_str(), i))
        .collect();
    let mut counts: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for d in docs {
        let mut ids: Vec<usize> = d
            .keyword_set()
            .iter()
            .filter_map(|t| index.get(t.as_str()).copied())
            .collect();
        ids.sort_unstable();
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                *counts.entry((i, j)).or_default() += 1;
            }
        }
    }
    CooccurrenceMatrix {
        terms: terms.to_vec(),
        counts,
    }
}

/// `s_ij = c_ij / (w_i * w_j)` with `w` the term occurrences.
pub fn association_strength(cooc: &CooccurrenceMatrix) -> SimilarityMatrix {
    let totals: Vec<f64> = cooc.terms.iter().map(|t| f64::from(t.occurrences)).collect();
    normalize_counts(
        totals.len(),
        cooc.iter().map(|(i, j, c)| (i, j, f64::from(c))),
        &totals,
    )
}

/// Picks the primary descriptors.
///
/// Terms with at least `min_occurrence` documents are ranked by total link
/// strength, then occurrences (descending), then term (ascending). The top
/// `top_n` are returned in rank order; the core term always makes the cut,
/// displacing the lowest-ranked pick if needed.
pub fn select_primary(
    sim: &SimilarityMatrix,
    stats: &[TermStats],
    term_core: &str,
    min_occurrence: u32,
    top_n: usize,
) -> Result<Vec<String>, DescriptorError> {
    if top_n == 0 {
        return Err(DescriptorError::InvalidParameter("top_n must be at least 1".into()));
    }
    if sim.n() != stats.len() {
        return Err(DescriptorError::InvalidParameter(format!(
            "similarity has {} nodes but {} terms were given",
            sim.n(),
            stats.len()
        )));
    }
    let core = normalize_term(term_core);
    let strength = sim.link_strength();
    let mut ranked: Vec<usize> = (0..stats.len())
        .filter(|&i| stats[i].occurrences >= min_occurrence)
        .collect();
    if !ranked.iter().any(|&i| stats[i].term == core) {
        return Err(DescriptorError::CoreTermExcluded(core));
    }
    ranked.sort_by(|&a, &b| {
        strength[b]
            .total_cmp(&strength[a])
            .then(stats[b].occurrences.cmp(&stats[a].occurrences))
            .then_with(|| stats[a].term.cmp(&stats[b].term))
    });
    let core_rank = ranked
        .iter()
        .position(|&i| stats[i].term == core)
        .expect("core checked above");
    let mut picked: Vec<usize> = ranked.iter().take(top_n).copied().collect();
    if core_rank >= top_n {
        picked.pop();
        picked.push(ranked[core_rank]);
    }
    Ok(picked.into_iter().map(|i| stats[i].term.clone()).collect())
}

/// Keyword statistics restricted to a term subset, in the subset's order.
pub fn stats_for<'a>(stats: &'a [TermStats], terms: &[String]) -> Vec<&'a TermStats> {
    let wanted: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
    stats.iter().filter(|s| wanted.contains(s.term.as_str())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocType;

    pub(crate) fn kw_doc(id: &str, author: &[&str], index: &[&str]) -> DocumentRecord {
        DocumentRecord {
            doc_id: id.into(),
            source_id: "s".into(),
            title: String::new(),
            abstract_text: String::new(),
            author_keywords: author.iter().map(|s| s.to_string()).collect(),
            index_keywords: index.iter().map(|s| s.to_string()).collect(),
            doc_type: DocType::Article,
            year: 2013,
            language: "English".into(),
            references: vec![],
            citation_count: 0,
        }
    }

    #[test]
    fn dedup_within_document() {
        let docs = [kw_doc("1", &["A", "a "], &[])];
        assert_eq!(
            extract_keywords(&docs),
            vec![TermStats {
                term: "a".into(),
                occurrences: 1
            }]
        );
    }

    #[test]
    fn counts_across_documents() {
        let docs = [
            kw_doc("1", &["E-learning"], &[]),
            kw_doc("2", &[], &["e-learning"]),
            kw_doc("3", &["E-Learning"], &["E-LEARNING"]),
        ];
        let stats = extract_keywords(&docs);
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].occurrences, 3);
    }

    #[test]
    fn single_keyword_docs_have_no_cooccurrence() {
        let docs = [kw_doc("1", &["x"], &[]), kw_doc("2", &["y"], &[])];
        let stats = extract_keywords(&docs);
        let c = build_cooccurrence(&docs, &stats);
        assert_eq!(c.nnz(), 0);
        assert!(association_strength(&c).is_empty());
    }

    #[test]
    fn two_docs_sharing_a_pair() {
        let docs = [kw_doc("1", &["x", "y"], &[]), kw_doc("2", &["y"], &["x"])];
        let stats = extract_keywords(&docs);
        let c = build_cooccurrence(&docs, &stats);
        assert_eq!(c.get(0, 1), 2);
        assert_eq!(c.get(1, 0), 2);
        let s = association_strength(&c);
        assert_eq!(s.get(0, 1), 0.5);
    }

    fn stat(term: &str, occurrences: u32) -> TermStats {
        TermStats {
            term: term.into(),
            occurrences,
        }
    }

    #[test]
    fn top_one_is_core() {
        let stats = vec![stat("a", 9), stat("core", 5), stat("z", 9)];
        let mut sim = SimilarityMatrix::new(3);
        sim.set(0, 2, 1.0);
        sim.set(1, 2, 0.1);
        assert_eq!(select_primary(&sim, &stats, "Core", 1, 1).unwrap(), vec!["core"]);
        assert_eq!(
            select_primary(&sim, &stats, "core", 1, 2).unwrap(),
            vec!["z", "core"]
        );
    }

    #[test]
    fn occurrence_breaks_strength_ties() {
        let stats = vec![stat("p", 3), stat("q", 5), stat("core", 4)];
        let mut sim = SimilarityMatrix::new(3);
        sim.set(0, 1, 0.5);
        let got = select_primary(&sim, &stats, "core", 1, 3).unwrap();
        assert_eq!(got, vec!["q", "p", "core"]);
    }

    #[test]
    fn core_below_threshold_is_an_error() {
        let stats = vec![stat("core", 2), stat("x", 9)];
        let sim = SimilarityMatrix::new(2);
        assert!(matches!(
            select_primary(&sim, &stats, "core", 5, 10),
            Err(DescriptorError::CoreTermExcluded(t)) if t == "core"
        ));
        assert!(matches!(
            select_primary(&sim, &stats, "core", 1, 0),
            Err(DescriptorError::InvalidParameter(_))
        ));
    }
}
