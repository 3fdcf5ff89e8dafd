//! Source-by-descriptor article counts, participation percentages and the
//! cut-off band analysis.
//!
//! For every source the number of related articles (NRA) is the largest
//! per-descriptor article count, where a descriptor's count merges its
//! primary spelling with all its variants by distinct document. The
//! participation percentage is `PP = 100 * NRA / TNA` with TNA the source's
//! total article count under the same filters.

mod bands;
mod io;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusQuery};
use crate::descriptors::DescriptorSet;

pub use bands::{
    band_table, default_thresholds, in_band, replay_bands, select_cutoff, selected_publications,
    BandReplay, BandRow, REFERENCE_BANDS,
};
pub use io::{read_bands_csv, read_participation_csv, write_bands_csv, write_participation_csv};

#[derive(Debug, Error)]
pub enum ParticipationError {
    #[error("source {0:?} passes the threshold but has no relatedness label")]
    UnlabeledSource(String),
    #[error("no band reaches an average participation of {0}%")]
    NoBandQualifies(f64),
    #[error("thresholds must be non-empty and strictly descending")]
    UnsortedThresholds,
    #[error("descriptor set is empty")]
    EmptyDescriptors,
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Article counts per (source, descriptor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceMatrix {
    pub sources: Vec<String>,
    pub terms: Vec<String>,
    /// `counts[source][term]`
    pub counts: Vec<Vec<u64>>,
}

impl CorrespondenceMatrix {
    pub fn get(&self, source: usize, term: usize) -> u64 {
        self.counts[source][term]
    }

    pub fn row(&self, source_id: &str) -> Option<&[u64]> {
        self.sources
            .iter()
            .position(|s| s == source_id)
            .map(|i| self.counts[i].as_slice())
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), ParticipationError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["source_id".to_string()];
        header.extend(self.terms.iter().cloned());
        w.write_record(&header)?;
        for (sid, row) in self.sources.iter().zip(&self.counts) {
            let mut rec = vec![sid.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Counts, for each source and primary descriptor, the distinct documents of
/// that source matching the descriptor or any of its variants under
/// `base_query`'s filters. The query's own term set and limit are ignored.
pub fn correspondence(
    corpus: &Corpus,
    dset: &DescriptorSet,
    base_query: &CorpusQuery,
) -> Result<CorrespondenceMatrix, ParticipationError> {
    if dset.is_empty() {
        return Err(ParticipationError::EmptyDescriptors);
    }
    let sources = corpus.source_ids();
    let source_index: HashMap<&str, usize> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut counts = vec![vec![0u64; dset.primary.len()]; sources.len()];
    let docs = corpus.documents();
    for (t, term) in dset.primary.iter().enumerate() {
        let q = base_query.with_terms(dset.match_terms(term)).unlimited();
        for idx in corpus.matching_indices(&q) {
            counts[source_index[docs[idx].source_id.as_str()]][t] += 1;
        }
    }
    Ok(CorrespondenceMatrix {
        sources,
        terms: dset.primary.clone(),
        counts,
    })
}

/// TNA, NRA and PP for one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationRow {
    pub source_id: String,
    pub tna: u64,
    pub nra: u64,
    pub pp: f64,
}

impl ParticipationRow {
    pub fn new(source_id: impl Into<String>, tna: u64, nra: u64) -> Self {
        assert!(tna > 0 && nra <= tna, "need 0 <= NRA <= TNA and TNA > 0");
        ParticipationRow {
            source_id: source_id.into(),
            tna,
            nra,
            pp: participation_percent(nra, tna),
        }
    }
}

/// `100 * nra / tna`.
pub fn participation_percent(nra: u64, tna: u64) -> f64 {
    100.0 * nra as f64 / tna as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationReport {
    pub rows: Vec<ParticipationRow>,
    /// Sources with no articles under the base filters; they get no row.
    pub zero_tna: Vec<String>,
}

pub fn participation_rows(
    matrix: &CorrespondenceMatrix,
    corpus: &Corpus,
    base_query: &CorpusQuery,
) -> ParticipationReport {
    let filters = base_query.with_terms(Vec::new()).unlimited();
    let mut tna: HashMap<&str, u64> = HashMap::new();
    for idx in corpus.matching_indices(&filters) {
        *tna.entry(corpus.documents()[idx].source_id.as_str()).or_default() += 1;
    }
    let mut rows = Vec::new();
    let mut zero_tna = Vec::new();
    for (sid, counts) in matrix.sources.iter().zip(&matrix.counts) {
        let total = tna.get(sid.as_str()).copied().unwrap_or(0);
        if total == 0 {
            zero_tna.push(sid.clone());
            continue;
        }
        let nra = counts.iter().copied().max().unwrap_or(0);
        rows.push(ParticipationRow::new(sid.clone(), total, nra));
    }
    ParticipationReport { rows, zero_tna }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relatedness {
    Related,
    Unrelated,
    Unlabeled,
}

/// Manual relatedness judgments per source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelatednessLabels(pub BTreeMap<String, Relatedness>);

impl RelatednessLabels {
    pub fn get(&self, source_id: &str) -> Relatedness {
        self.0
            .get(source_id)
            .copied()
            .unwrap_or(Relatedness::Unlabeled)
    }

    /// Stand-in labeler for synthetic runs: any participation counts as
    /// related.
    pub fn heuristic(rows: &[ParticipationRow]) -> Self {
        RelatednessLabels(
            rows.iter()
                .map(|r| {
                    let label = if r.pp > 0.0 {
                        Relatedness::Related
                    } else {
                        Relatedness::Unrelated
                    };
                    (r.source_id.clone(), label)
                })
                .collect(),
        )
    }

    /// Reads `source_id,label` with label in {related, unrelated}.
    pub fn from_csv<R: std::io::Read>(input: R) -> Result<Self, ParticipationError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().map(str::trim).ne(["source_id", "label"]) {
            return Err(ParticipationError::Malformed {
                line: 1,
                reason: "labels header must be `source_id,label`".into(),
            });
        }
        let mut map = BTreeMap::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let sid = record.get(0).unwrap_or("").trim();
            let label = match record.get(1).unwrap_or("").trim().to_ascii_lowercase().as_str() {
                "related" => Relatedness::Related,
                "unrelated" => Relatedness::Unrelated,
                other => {
                    return Err(ParticipationError::Malformed {
                        line,
                        reason: format!("label {other:?} is neither related nor unrelated"),
                    })
                }
            };
            if sid.is_empty() {
                return Err(ParticipationError::Malformed {
                    line,
                    reason: "empty source_id".into(),
                });
            }
            map.insert(sid.to_string(), label);
        }
        Ok(RelatednessLabels(map))
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), ParticipationError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source_id", "label"])?;
        for (sid, label) in &self.0 {
            let l = match label {
                Relatedness::Related => "related",
                Relatedness::Unrelated => "unrelated",
                Relatedness::Unlabeled => continue,
            };
            w.write_record([sid.as_str(), l])?;
        }
        w.flush()?;
        Ok(())
    }
}
