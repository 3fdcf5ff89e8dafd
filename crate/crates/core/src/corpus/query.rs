use std::collections::BTreeSet;
use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};

use super::{Corpus, DocType, DocumentRecord, SourceType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchField {
    Title,
    Abstract,
    Keywords,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryOrder {
    /// Most cited first; doc_id ascending breaks ties.
    #[default]
    CitationCountDesc,
    DocIdAsc,
}

/// Inclusive publication-year window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange(pub i32, pub i32);

impl YearRange {
    pub fn contains(&self, year: i32) -> bool {
        self.0 <= year && year <= self.1
    }
}

impl Default for YearRange {
    fn default() -> Self {
        YearRange(1900, 2100)
    }
}

/// Document filter.
///
/// An empty `term_set`, `fields`, `source_types` or `doc_types` places no
/// restriction on that dimension; an empty `fields` set searches all fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusQuery {
    pub term_set: Vec<String>,
    pub fields: BTreeSet<SearchField>,
    pub source_types: BTreeSet<SourceType>,
    pub doc_types: BTreeSet<DocType>,
    pub years: YearRange,
    pub language: Option<String>,
    pub limit: Option<NonZeroUsize>,
    pub order: QueryOrder,
}

impl Default for CorpusQuery {
    fn default() -> Self {
        CorpusQuery {
            term_set: Vec::new(),
            fields: [SearchField::Title, SearchField::Abstract, SearchField::Keywords]
                .into_iter()
                .collect(),
            source_types: BTreeSet::new(),
            doc_types: BTreeSet::new(),
            years: YearRange::default(),
            language: None,
            limit: None,
            order: QueryOrder::default(),
        }
    }
}

impl CorpusQuery {
    pub fn validate(&self) -> Result<(), String> {
        if self.years.0 > self.years.1 {
            return Err(format!(
                "empty year range {}..={}",
                self.years.0, self.years.1
            ));
        }
        Ok(())
    }

    /// Same filters, different terms.
    pub fn with_terms(&self, terms: Vec<String>) -> Self {
        CorpusQuery {
            term_set: terms,
            ..self.clone()
        }
    }

    /// Same filters and terms, no limit.
    pub fn unlimited(&self) -> Self {
        CorpusQuery {
            limit: None,
            ..self.clone()
        }
    }

    /// Checks every filter except the term set.
    pub fn passes_filters(&self, corpus: &Corpus, doc: &DocumentRecord) -> bool {
        if !self.years.contains(doc.year) {
            return false;
        }
        if !self.doc_types.is_empty() && !self.doc_types.contains(&doc.doc_type) {
            return false;
        }
        if let Some(lang) = &self.language {
            if !doc.language.trim().eq_ignore_ascii_case(lang.trim()) {
                return false;
            }
        }
        if !self.source_types.is_empty() {
            let st = corpus
                .source(&doc.source_id)
                .map(|s| s.source_type);
            if !st.is_some_and(|st| self.source_types.contains(&st)) {
                return false;
            }
        }
        true
    }
}

impl Corpus {
    /// Indices of matching documents in corpus order, before ordering/limit.
    pub(crate) fn matching_indices(&self, q: &CorpusQuery) -> Vec<usize> {
        let candidates: Vec<usize> = if q.term_set.is_empty() {
            (0..self.len()).collect()
        } else {
            self.term_hits(&q.term_set, &q.fields)
        };
        candidates
            .into_iter()
            .filter(|&i| q.passes_filters(self, &self.docs[i]))
            .collect()
    }

    /// Documents matching `q`, ordered by `q.order` (doc_id ascending breaks
    /// ties) and truncated to `q.limit`.
    pub fn query_documents(&self, q: &CorpusQuery) -> Vec<&DocumentRecord> {
        let mut docs: Vec<&DocumentRecord> = self
            .matching_indices(q)
            .into_iter()
            .map(|i| &self.docs[i])
            .collect();
        match q.order {
            QueryOrder::CitationCountDesc => docs.sort_by(|a, b| {
                b.citation_count
                    .cmp(&a.citation_count)
                    .then_with(|| a.doc_id.cmp(&b.doc_id))
            }),
            QueryOrder::DocIdAsc => docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id)),
        }
        if let Some(limit) = q.limit {
            docs.truncate(limit.get());
        }
        docs
    }

    /// Number of matches with the limit removed.
    pub fn count_documents(&self, q: &CorpusQuery) -> usize {
        self.matching_indices(q).len()
    }
}
