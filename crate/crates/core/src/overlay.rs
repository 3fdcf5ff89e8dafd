//! Highlighting a source subset on a frozen base map, with a permutation test
//! for its concentration and the category make-up of its core.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::layout::MapLayout;
use crate::percent::ratio_percent;
use crate::similarity::SimilarityMatrix;
use crate::svg::{SvgDoc, Viewport};
use crate::vosmap::Clustering;

pub const DEFAULT_PERMUTATIONS: usize = 1000;
pub const DEFAULT_CORE_QUANTILE: f64 = 0.88;

#[derive(Debug, thiserror::Error)]
pub enum OverlayError {
    #[error("node {0} is not on the base map")]
    UnknownNode(String),
    #[error("core set is empty")]
    EmptyCore,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A subset drawn over a base map. The base is cloned untouched; only the
/// highlight weights are new.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlaySpec {
    pub base: MapLayout,
    pub clustering: Option<Clustering>,
    pub subset: BTreeSet<String>,
    /// 1.0 for subset members, 0.0 otherwise, in base node order.
    pub highlight: Vec<f64>,
}

impl OverlaySpec {
    pub fn highlighted(&self) -> impl Iterator<Item = usize> + '_ {
        self.highlight.iter().enumerate().filter(|(_, &h)| h > 0.0).map(|(i, _)| i)
    }
}

pub fn make_overlay(
    base: &MapLayout,
    clustering: Option<&Clustering>,
    subset: &BTreeSet<String>,
) -> Result<OverlaySpec, OverlayError> {
    let index: BTreeMap<&str, usize> = base.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut highlight = vec![0.0; base.len()];
    for id in subset {
        let &i = index.get(id.as_str()).ok_or_else(|| OverlayError::UnknownNode(id.clone()))?;
        highlight[i] = 1.0;
    }
    Ok(OverlaySpec {
        base: base.clone(),
        clustering: clustering.cloned(),
        subset: subset.clone(),
        highlight,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohesionReport {
    pub subset_size: usize,
    pub within_subset_strength: f64,
    pub expected_strength: f64,
    pub ratio: f64,
    pub permutation_p: f64,
    pub permutations: usize,
    pub subset_cluster_histogram: BTreeMap<usize, usize>,
}

/// Pair sums over a node set, in a fixed node order so the result does not
/// depend on how the caller indexed the nodes.
struct PairSums {
    dense: Option<Vec<f64>>,
    adj: Vec<Vec<(usize, f64)>>,
    n: usize,
}

impl PairSums {
    fn new(sim: &SimilarityMatrix, perm: &[usize]) -> Self {
        let n = perm.len();
        // perm[k] = original index of the k-th node in canonical order
        let mut rank = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            rank[i] = k;
        }
        if n <= 4096 {
            let mut dense = vec![0.0; n * n];
            for (i, j, s) in sim.iter() {
                let (a, b) = (rank[i], rank[j]);
                dense[a * n + b] = s;
                dense[b * n + a] = s;
            }
            PairSums {
                dense: Some(dense),
                adj: Vec::new(),
                n,
            }
        } else {
            let mut adj = vec![Vec::new(); n];
            for (i, j, s) in sim.iter() {
                let (a, b) = (rank[i].min(rank[j]), rank[i].max(rank[j]));
                adj[a].push((b, s));
            }
            for list in &mut adj {
                list.sort_by_key(|e| e.0);
            }
            PairSums { dense: None, adj, n }
        }
    }

    /// `members` in canonical positions, ascending.
    fn within(&self, members: &[usize], mask: &mut [bool]) -> f64 {
        let mut sum = 0.0;
        match &self.dense {
            Some(d) => {
                for (x, &a) in members.iter().enumerate() {
                    let row = &d[a * self.n..(a + 1) * self.n];
                    for &b in &members[x + 1..] {
                        sum += row[b];
                    }
                }
            }
            None => {
                for &a in members {
                    mask[a] = true;
                }
                for &a in members {
                    for &(b, s) in &self.adj[a] {
                        if mask[b] {
                            sum += s;
                        }
                    }
                }
                for &a in members {
                    mask[a] = false;
                }
            }
        }
        sum
    }
}

/// Permutation test for the concentration of `subset` in the similarity graph.
///
/// Permutation `k` draws a uniform random subset of the same size with a
/// generator seeded by `seed + k`. Nodes are sampled in id order, so the
/// report does not depend on node indexing.
pub fn cohesion(
    sim: &SimilarityMatrix,
    ids: &[String],
    subset: &BTreeSet<String>,
    permutations: usize,
    seed: u64,
    clustering: Option<&Clustering>,
) -> Result<CohesionReport, OverlayError> {
    if permutations < 100 {
        return Err(OverlayError::InvalidParameter("permutations must be at least 100".into()));
    }
    if ids.len() != sim.n() {
        return Err(OverlayError::InvalidParameter(format!("{} ids for {} nodes", ids.len(), sim.n())));
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let sums = PairSums::new(sim, &order);
    let canon: BTreeMap<&str, usize> = order.iter().enumerate().map(|(k, &i)| (ids[i].as_str(), k)).collect();

    let mut members = Vec::with_capacity(subset.len());
    let mut histogram = BTreeMap::new();
    for id in subset {
        let &k = canon.get(id.as_str()).ok_or_else(|| OverlayError::UnknownNode(id.clone()))?;
        members.push(k);
        if let Some(c) = clustering {
            *histogram.entry(c.assignment[order[k]]).or_insert(0) += 1;
        }
    }
    members.sort_unstable();
    let mut mask = vec![false; ids.len()];
    let observed = sums.within(&members, &mut mask);

    let n = ids.len();
    let size = members.len();
    let mut total = 0.0;
    let mut at_least = 0usize;
    let mut drawn = Vec::with_capacity(size);
    for k in 0..permutations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        drawn.clear();
        drawn.extend(sample(&mut rng, n, size));
        drawn.sort_unstable();
        let s = sums.within(&drawn, &mut mask);
        total += s;
        if s >= observed {
            at_least += 1;
        }
    }
    let expected = total / permutations as f64;
    Ok(CohesionReport {
        subset_size: size,
        within_subset_strength: observed,
        expected_strength: expected,
        ratio: if expected > 0.0 { observed / expected } else { 0.0 },
        permutation_p: at_least as f64 / permutations as f64,
        permutations,
        subset_cluster_histogram: histogram,
    })
}

/// Linear interpolation between order statistics (`h = (n-1) q`).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Subset members whose link strength to the rest of the subset is at or
/// above the `q`-quantile of the subset. Returned in id order.
pub fn core_extract(
    sim: &SimilarityMatrix,
    ids: &[String],
    subset: &BTreeSet<String>,
    q: f64,
) -> Result<Vec<String>, OverlayError> {
    if !(0.0..1.0).contains(&q) {
        return Err(OverlayError::InvalidParameter("quantile must lie in [0, 1)".into()));
    }
    let mut inside = vec![false; sim.n()];
    for (i, id) in ids.iter().enumerate() {
        inside[i] = subset.contains(id);
    }
    if let Some(missing) = subset.iter().find(|s| !ids.contains(s)) {
        return Err(OverlayError::UnknownNode(missing.clone()));
    }
    let mut strength = vec![0.0; sim.n()];
    for (i, j, s) in sim.iter() {
        if inside[i] && inside[j] {
            strength[i] += s;
            strength[j] += s;
        }
    }
    let values: Vec<f64> = (0..sim.n()).filter(|&i| inside[i]).map(|i| strength[i]).collect();
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let cut = quantile(&values, q);
    let mut core: Vec<String> = (0..sim.n())
        .filter(|&i| inside[i] && strength[i] >= cut)
        .map(|i| ids[i].clone())
        .collect();
    core.sort();
    Ok(core)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub category: String,
    pub count: usize,
    pub percent: u32,
}

/// Sources carrying both categories. `percent_of_core` is relative to the whole
/// core, `percent_given_first` to the sources carrying `first`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapShare {
    pub first: String,
    pub second: String,
    pub count: usize,
    pub percent_of_core: u32,
    pub percent_given_first: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreStats {
    pub core_set: Vec<String>,
    pub shares: Vec<CategoryShare>,
    pub overlaps: Vec<OverlapShare>,
}

impl CoreStats {
    pub fn share(&self, category: &str) -> Option<u32> {
        self.shares.iter().find(|s| s.category == category).map(|s| s.percent)
    }

    pub fn overlap(&self, first: &str, second: &str) -> Option<&OverlapShare> {
        self.overlaps.iter().find(|o| o.first == first && o.second == second)
    }
}

/// Integer percentages, rounded half up. Shares are listed by descending count
/// then name; overlaps cover every ordered pair that co-occurs at least once.
pub fn category_shares(
    core: &[String],
    categories: &BTreeMap<String, Vec<String>>,
) -> Result<CoreStats, OverlayError> {
    if core.is_empty() {
        return Err(OverlayError::EmptyCore);
    }
    let n = core.len() as u64;
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pair: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for id in core {
        let cats: BTreeSet<&str> = categories.get(id).into_iter().flatten().map(String::as_str).collect();
        for &a in &cats {
            *count.entry(a).or_default() += 1;
            for &b in &cats {
                if a != b {
                    *pair.entry((a, b)).or_default() += 1;
                }
            }
        }
    }
    let mut shares: Vec<CategoryShare> = count
        .iter()
        .map(|(&c, &k)| CategoryShare {
            category: c.to_string(),
            count: k,
            percent: ratio_percent(k as u64, n),
        })
        .collect();
    shares.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
    let overlaps = pair
        .iter()
        .map(|(&(a, b), &k)| OverlapShare {
            first: a.to_string(),
            second: b.to_string(),
            count: k,
            percent_of_core: ratio_percent(k as u64, n),
            percent_given_first: ratio_percent(k as u64, count[a] as u64),
        })
        .collect();
    Ok(CoreStats {
        core_set: core.to_vec(),
        shares,
        overlaps,
    })
}

/// Base nodes muted, subset nodes highlighted, core nodes outlined larger.
pub fn render_overlay_svg(overlay: &OverlaySpec, core: &[String], size: f64) -> String {
    let mut doc = SvgDoc::new(size, size);
    let view = Viewport::fit(overlay.base.bounds(), size, 20.0);
    let core: BTreeSet<&str> = core.iter().map(String::as_str).collect();
    for (i, p) in overlay.base.positions.iter().enumerate() {
        if overlay.highlight[i] == 0.0 {
            let (x, y) = view.map(*p);
            doc.circle(x, y, 1.5, "#b0b0b0", 0.5, None);
        }
    }
    for i in overlay.highlighted() {
        let (x, y) = view.map(overlay.base.positions[i]);
        let id = &overlay.base.ids[i];
        if core.contains(id.as_str()) {
            doc.circle(x, y, 5.0, "#b30000", 0.9, Some(id));
        } else {
            doc.circle(x, y, 3.0, "#e34a33", 0.8, Some(id));
        }
    }
    doc.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlaySidecar {
    pub cohesion: CohesionReport,
    pub core: CoreStats,
}
