//! Source-level citation, co-citation and bibliographic coupling networks,
//! and their fusion into one similarity.
//!
//! References resolve when they name a doc_id present in the corpus; they then
//! point at that document's source. Raw reference strings take no part in
//! source-level channels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::similarity::SimilarityMatrix;

#[derive(Debug, Error)]
pub enum SimnetError {
    #[error("channel weights must be finite, non-negative and not all zero")]
    InvalidWeights,
    #[error("channels are defined over different source lists")]
    MismatchedSources,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Citation,
    CoCitation,
    Coupling,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Citation => "citation",
            Channel::CoCitation => "cocitation",
            Channel::Coupling => "coupling",
        })
    }
}

type PairCounts = BTreeMap<(usize, usize), u64>;

/// Integer link counts between sources for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    pub channel: Channel,
    pub sources: Vec<String>,
    /// `(i, j) -> count` with `i < j`; zeros omitted.
    #[serde(with = "pair_map")]
    pub counts: PairCounts,
    /// Citation only: `(citing, cited) -> count` before symmetrization.
    #[serde(with = "pair_map")]
    pub directed: PairCounts,
}

impl ChannelMatrix {
    fn new(channel: Channel, sources: Vec<String>) -> Self {
        ChannelMatrix {
            channel,
            sources,
            counts: BTreeMap::new(),
            directed: BTreeMap::new(),
        }
    }

    fn bump(&mut self, i: usize, j: usize) {
        debug_assert!(i != j);
        let k = if i < j { (i, j) } else { (j, i) };
        *self.counts.entry(k).or_default() += 1;
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return 0;
        }
        let k = if i < j { (i, j) } else { (j, i) };
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Row sums of the full symmetric matrix.
    pub fn row_totals(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.sources.len()];
        for (&(i, j), &c) in &self.counts {
            t[i] += c as f64;
            t[j] += c as f64;
        }
        t
    }

    /// Association strength scaled by the channel total,
    /// `s_ij = c_ij * W / (w_i * w_j)` with `w` the row sums and `W = Σ w`.
    ///
    /// The `W` factor makes the result independent of the channel's overall
    /// magnitude, so channels of very different size can be mixed.
    pub fn normalized(&self) -> SimilarityMatrix {
        let totals = self.row_totals();
        let grand: f64 = totals.iter().sum();
        let mut sim = SimilarityMatrix::new(self.sources.len());
        for (&(i, j), &c) in &self.counts {
            sim.set(i, j, c as f64 * grand / (totals[i] * totals[j]));
        }
        sim
    }
}

mod pair_map {
    use super::PairCounts;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &PairCounts, s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(&(i, j), &c)| (i, j, c))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PairCounts, D::Error> {
        let v: Vec<(usize, usize, u64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(i, j, c)| ((i, j), c)).collect())
    }
}

/// How many references could be tied to a corpus document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub total: usize,
    pub resolved: usize,
}

impl ReferenceReport {
    pub fn unresolved_ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.total - self.resolved) as f64 / self.total as f64
        }
    }
}

/// Per document: its source index and the distinct corpus documents it cites.
struct Resolved {
    sources: Vec<String>,
    doc_source: Vec<usize>,
    cited: Vec<Vec<usize>>,
    report: ReferenceReport,
}

fn resolve(corpus: &Corpus) -> Resolved {
    let sources = corpus.source_ids();
    let index: HashMap<&str, usize> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let docs = corpus.documents();
    let doc_source: Vec<usize> = docs.iter().map(|d| index[d.source_id.as_str()]).collect();
    let mut report = ReferenceReport::default();
    let cited = docs
        .iter()
        .map(|d| {
            let mut set = BTreeSet::new();
            for r in &d.references {
                report.total += 1;
                if let Some(k) = corpus.doc_index(r) {
                    report.resolved += 1;
                    set.insert(k);
                }
            }
            set.into_iter().collect()
        })
        .collect();
    Resolved {
        sources,
        doc_source,
        cited,
        report,
    }
}

/// Symmetrized document-to-document citation links between sources.
pub fn citation_counts(corpus: &Corpus) -> (ChannelMatrix, ReferenceReport) {
    let r = resolve(corpus);
    let mut m = ChannelMatrix::new(Channel::Citation, r.sources);
    for (d, cited) in r.cited.iter().enumerate() {
        let from = r.doc_source[d];
        for &c in cited {
            let to = r.doc_source[c];
            if from != to {
                m.bump(from, to);
                *m.directed.entry((from, to)).or_default() += 1;
            }
        }
    }
    (m, r.report)
}

/// Citing documents whose references reach both source `i` and source `j`.
pub fn cocitation_counts(corpus: &Corpus) -> ChannelMatrix {
    let r = resolve(corpus);
    let mut m = ChannelMatrix::new(Channel::CoCitation, r.sources);
    for cited in &r.cited {
        let srcs: BTreeSet<usize> = cited.iter().map(|&c| r.doc_source[c]).collect();
        let srcs: Vec<usize> = srcs.into_iter().collect();
        for (a, &i) in srcs.iter().enumerate() {
            for &j in &srcs[a + 1..] {
                m.bump(i, j);
            }
        }
    }
    m
}

/// Distinct cited documents shared by the reference lists of two sources.
pub fn coupling_counts(corpus: &Corpus) -> ChannelMatrix {
    let r = resolve(corpus);
    let mut citing_sources: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); r.cited.len()];
    for (d, cited) in r.cited.iter().enumerate() {
        for &c in cited {
            citing_sources[c].insert(r.doc_source[d]);
        }
    }
    let mut m = ChannelMatrix::new(Channel::Coupling, r.sources);
    for srcs in &citing_sources {
        let srcs: Vec<usize> = srcs.iter().copied().collect();
        for (a, &i) in srcs.iter().enumerate() {
            for &j in &srcs[a + 1..] {
                m.bump(i, j);
            }
        }
    }
    m
}

/// Fused source similarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedSimilarity {
    pub sources: Vec<String>,
    pub matrix: SimilarityMatrix,
    /// Effective weights (citation, co-citation, coupling), summing to 1.
    pub weights: [f64; 3],
    pub warnings: Vec<String>,
}

/// Mixes the three normalized channels with `weights` and rescales so the
/// largest entry is 1.
///
/// The weight of an empty channel moves to the non-empty ones in proportion to
/// their own weights (evenly when those are all zero), and a warning is
/// recorded.
pub fn combine_channels(
    channels: [&ChannelMatrix; 3],
    weights: [f64; 3],
) -> Result<CombinedSimilarity, SimnetError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(SimnetError::InvalidWeights);
    }
    let sources = channels[0].sources.clone();
    if channels.iter().any(|c| c.sources != sources) {
        return Err(SimnetError::MismatchedSources);
    }

    let mut warnings = Vec::new();
    let mut effective = weights;
    let live: Vec<bool> = channels.iter().map(|c| !c.is_empty()).collect();
    for (k, c) in channels.iter().enumerate() {
        if !live[k] {
            warnings.push(format!("EmptyChannel: {} has no entries", c.channel));
            effective[k] = 0.0;
        }
    }
    let live_sum: f64 = effective.iter().sum();
    let n_live = live.iter().filter(|&&l| l).count();
    if live_sum > 0.0 {
        for w in &mut effective {
            *w /= live_sum;
        }
    } else if n_live > 0 {
        for (k, w) in effective.iter_mut().enumerate() {
            *w = if live[k] { 1.0 / n_live as f64 } else { 0.0 };
        }
    }

    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (k, c) in channels.iter().enumerate() {
        if effective[k] == 0.0 {
            continue;
        }
        for (i, j, s) in c.normalized().iter() {
            *acc.entry((i, j)).or_default() += effective[k] * s;
        }
    }
    let max = acc.values().copied().fold(0.0, f64::max);
    let mut matrix = SimilarityMatrix::new(sources.len());
    for ((i, j), s) in acc {
        matrix.set(i, j, if s == max { 1.0 } else { s / max });
    }
    Ok(CombinedSimilarity {
        sources,
        matrix,
        weights: effective,
        warnings,
    })
}

/// Writes `source_i,source_j,count,channel` rows. Citation channels also emit
/// their directed counts under the channel name `citation_directed`.
pub fn write_channels_csv<W: Write>(channels: &[&ChannelMatrix], out: W) -> Result<(), SimnetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source_i", "source_j", "count", "channel"])?;
    for c in channels {
        let name = c.channel.to_string();
        for (&(i, j), &n) in &c.counts {
            w.write_record([&c.sources[i], &c.sources[j], &n.to_string(), &name])?;
        }
        for (&(i, j), &n) in &c.directed {
            w.write_record([&c.sources[i], &c.sources[j], &n.to_string(), "citation_directed"])?;
        }
    }
    w.flush()?;
    Ok(())
}
