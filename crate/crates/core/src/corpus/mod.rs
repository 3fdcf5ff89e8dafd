//! Bibliographic corpus: documents, their sources, and filtered queries.

mod csv_v1;
mod query;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{normalize_term, tokenize};

pub use csv_v1::{load_categories, parse_corpus, read_csv_v1, write_categories, write_csv_v1, CSV_V1_HEADER};
pub use query::{CorpusQuery, QueryOrder, SearchField, YearRange};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("duplicate doc_id {0:?}")]
    DuplicateId(String),
    #[error("document {doc_id:?} references unknown source {source_id:?}")]
    UnknownSource { doc_id: String, source_id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Input formats understood by [`parse_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    CsvV1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DocType {
    Article,
    ConferencePaper,
    Review,
    ConferenceReview,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceType {
    Journal,
    Proceeding,
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for DocType {
    type Err = String;

    /// Accepts the export spellings ("Conference Paper", "conference_paper",
    /// ...). Unrecognized non-empty values map to `Other`.
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match squash(s).as_str() {
            "" => return Err("empty document type".into()),
            "article" => DocType::Article,
            "conferencepaper" => DocType::ConferencePaper,
            "review" => DocType::Review,
            "conferencereview" => DocType::ConferenceReview,
            _ => DocType::Other,
        })
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocType::Article => "Article",
            DocType::ConferencePaper => "Conference Paper",
            DocType::Review => "Review",
            DocType::ConferenceReview => "Conference Review",
            DocType::Other => "Other",
        })
    }
}

impl FromStr for SourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match squash(s).as_str() {
            "journal" => Ok(SourceType::Journal),
            "proceeding" | "proceedings" | "conferenceproceeding" | "conferenceproceedings" => {
                Ok(SourceType::Proceeding)
            }
            other => Err(format!("unknown source type {other:?}")),
        }
    }
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceType::Journal => "Journal",
            SourceType::Proceeding => "Proceeding",
        })
    }
}

/// One primary-literature item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub source_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub author_keywords: Vec<String>,
    pub index_keywords: Vec<String>,
    pub doc_type: DocType,
    pub year: i32,
    pub language: String,
    /// Cited doc_ids, or raw reference strings when unresolved.
    pub references: Vec<String>,
    pub citation_count: u64,
}

impl DocumentRecord {
    /// Normalized keyword set (author and index keywords merged, deduplicated).
    pub fn keyword_set(&self) -> BTreeSet<String> {
        self.author_keywords
            .iter()
            .chain(&self.index_keywords)
            .map(|k| normalize_term(k))
            .filter(|k| !k.is_empty())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub source_id: String,
    pub title: String,
    pub source_type: SourceType,
    pub categories: Vec<String>,
}

/// Pre-tokenized searchable fields of one document.
#[derive(Debug, Clone, Default)]
struct DocTokens {
    title: Vec<String>,
    abstract_text: Vec<String>,
    keywords: Vec<Vec<String>>,
}

/// Immutable corpus of documents and sources.
#[derive(Debug, Clone)]
pub struct Corpus {
    docs: Vec<DocumentRecord>,
    sources: BTreeMap<String, SourceRecord>,
    by_id: HashMap<String, usize>,
    tokens: Vec<DocTokens>,
    /// token -> ascending doc indices containing it in any searchable field
    postings: HashMap<String, Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct CorpusRepr {
    sources: Vec<SourceRecord>,
    documents: Vec<DocumentRecord>,
}

impl Serialize for Corpus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CorpusRepr {
            sources: self.sources.values().cloned().collect(),
            documents: self.docs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Corpus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = CorpusRepr::deserialize(d)?;
        Corpus::from_parts(repr.documents, repr.sources).map_err(serde::de::Error::custom)
    }
}

impl Corpus {
    /// Builds a corpus, checking doc_id uniqueness and that every document's
    /// source is known.
    pub fn from_parts(
        docs: Vec<DocumentRecord>,
        sources: impl IntoIterator<Item = SourceRecord>,
    ) -> Result<Self, CorpusError> {
        let sources: BTreeMap<String, SourceRecord> = sources
            .into_iter()
            .map(|s| (s.source_id.clone(), s))
            .collect();
        let mut by_id = HashMap::with_capacity(docs.len());
        for (idx, d) in docs.iter().enumerate() {
            if by_id.insert(d.doc_id.clone(), idx).is_some() {
                return Err(CorpusError::DuplicateId(d.doc_id.clone()));
            }
            if !sources.contains_key(&d.source_id) {
                return Err(CorpusError::UnknownSource {
                    doc_id: d.doc_id.clone(),
                    source_id: d.source_id.clone(),
                });
            }
        }
        let tokens: Vec<DocTokens> = docs
            .iter()
            .map(|d| DocTokens {
                title: tokenize(&d.title),
                abstract_text: tokenize(&d.abstract_text),
                keywords: d
                    .author_keywords
                    .iter()
                    .chain(&d.index_keywords)
                    .map(|k| tokenize(k))
                    .filter(|t| !t.is_empty())
                    .collect(),
            })
            .collect();
        let mut postings: HashMap<String, Vec<usize>> = HashMap::new();
        for (idx, t) in tokens.iter().enumerate() {
            let all = t
                .title
                .iter()
                .chain(&t.abstract_text)
                .chain(t.keywords.iter().flatten());
            for tok in all {
                let list = postings.entry(tok.clone()).or_default();
                if list.last() != Some(&idx) {
                    list.push(idx);
                }
            }
        }
        Ok(Corpus {
            docs,
            sources,
            by_id,
            tokens,
            postings,
        })
    }

    pub fn documents(&self) -> &[DocumentRecord] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub(crate) fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.by_id.get(doc_id).copied()
    }

    /// Sources ordered by source_id.
    pub fn sources(&self) -> impl ExactSizeIterator<Item = &SourceRecord> {
        self.sources.values()
    }

    pub fn source(&self, source_id: &str) -> Option<&SourceRecord> {
        self.sources.get(source_id)
    }

    pub fn source_ids(&self) -> Vec<String> {
        self.sources.keys().cloned().collect()
    }

    /// source_id -> categories, for sources that carry at least one.
    pub fn category_map(&self) -> BTreeMap<String, Vec<String>> {
        self.sources
            .values()
            .filter(|s| !s.categories.is_empty())
            .map(|s| (s.source_id.clone(), s.categories.clone()))
            .collect()
    }

    /// Replaces source categories from a `source_id -> categories` map.
    /// Returns the number of map entries naming sources absent from the corpus.
    pub fn attach_categories(&mut self, categories: &BTreeMap<String, Vec<String>>) -> usize {
        let mut unmatched = 0;
        for (sid, cats) in categories {
            match self.sources.get_mut(sid) {
                Some(src) => {
                    let mut cats = cats.clone();
                    cats.sort();
                    cats.dedup();
                    src.categories = cats;
                }
                None => unmatched += 1,
            }
        }
        unmatched
    }

    /// Whether `doc` contains the token sequence `term` in any of `fields`.
    fn doc_matches(&self, doc: usize, term: &[String], fields: &BTreeSet<SearchField>) -> bool {
        let t = &self.tokens[doc];
        let all = fields.is_empty();
        (all || fields.contains(&SearchField::Title))
            && crate::descriptors::contains_sequence(&t.title, term)
            || (all || fields.contains(&SearchField::Abstract))
                && crate::descriptors::contains_sequence(&t.abstract_text, term)
            || (all || fields.contains(&SearchField::Keywords))
                && t.keywords
                    .iter()
                    .any(|k| crate::descriptors::contains_sequence(k, term))
    }

    /// Ascending indices of documents matching any of `terms` in `fields`.
    /// Filters other than the term set are not applied.
    pub(crate) fn term_hits(&self, terms: &[String], fields: &BTreeSet<SearchField>) -> Vec<usize> {
        let mut hits = BTreeSet::new();
        for term in terms {
            let seq = tokenize(term);
            let Some(rarest) = seq
                .iter()
                .min_by_key(|tok| self.postings.get(*tok).map_or(0, Vec::len))
            else {
                continue;
            };
            let Some(candidates) = self.postings.get(rarest) else {
                continue;
            };
            for &doc in candidates {
                if !hits.contains(&doc) && self.doc_matches(doc, &seq, fields) {
                    hits.insert(doc);
                }
            }
        }
        hits.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_type_vocabularies() {
        assert_eq!("Conference Paper".parse::<DocType>(), Ok(DocType::ConferencePaper));
        assert_eq!("conference_review".parse::<DocType>(), Ok(DocType::ConferenceReview));
        assert_eq!("Editorial".parse::<DocType>(), Ok(DocType::Other));
        assert!("".parse::<DocType>().is_err());
        assert_eq!("Proceedings".parse::<SourceType>(), Ok(SourceType::Proceeding));
        assert_eq!("journal".parse::<SourceType>(), Ok(SourceType::Journal));
        assert!("Book".parse::<SourceType>().is_err());
    }
}
