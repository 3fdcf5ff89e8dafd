use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VosError;
use crate::similarity::SimilarityMatrix;

const EPS: f64 = 1e-12;

/// Cluster assignment with its resolution and quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster id per node, dense from 1 in order of first appearance.
    pub assignment: Vec<usize>,
    pub resolution: f64,
    pub quality: f64,
}

impl Clustering {
    pub fn cluster_count(&self) -> usize {
        self.assignment.iter().copied().max().unwrap_or(0)
    }

    /// Node counts per cluster id, index 0 unused.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count() + 1];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

/// `V(c) = Σ_{i<j} δ(c_i, c_j) (s_ij - γ)`.
pub fn clustering_quality(sim: &SimilarityMatrix, assignment: &[usize], resolution: f64) -> f64 {
    assert_eq!(assignment.len(), sim.n());
    let inside: f64 = sim
        .iter()
        .filter(|&(i, j, _)| assignment[i] == assignment[j])
        .map(|(_, _, s)| s)
        .sum();
    let max_id = assignment.iter().copied().max().unwrap_or(0);
    let mut sizes = vec![0usize; max_id + 1];
    for &c in assignment {
        sizes[c] += 1;
    }
    let pairs: usize = sizes.iter().map(|&k| k * k.saturating_sub(1) / 2).sum();
    inside - resolution * pairs as f64
}

/// Renumbers clusters densely from 1 in order of first appearance.
fn relabel(raw: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    raw.iter()
        .map(|&c| {
            let next = map.len() + 1;
            *map.entry(c).or_insert(next)
        })
        .collect()
}

struct State<'a> {
    adj: &'a [Vec<(usize, f64)>],
    resolution: f64,
    cluster: Vec<usize>,
    size: Vec<usize>,
    free: Vec<usize>,
    // scratch: link weight from the current node to each cluster
    link: Vec<f64>,
    touched: Vec<usize>,
}

impl<'a> State<'a> {
    fn singletons(adj: &'a [Vec<(usize, f64)>], resolution: f64) -> Self {
        let n = adj.len();
        State {
            adj,
            resolution,
            cluster: (0..n).collect(),
            size: vec![1; n],
            free: Vec::new(),
            link: vec![0.0; n],
            touched: Vec::new(),
        }
    }

    /// Moves nodes one at a time to their best cluster until no move gains.
    fn local_moving(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let n = self.cluster.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut any = false;
        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                moved |= self.move_node(i);
            }
            any |= moved;
            if !moved {
                return any;
            }
        }
    }

    fn move_node(&mut self, i: usize) -> bool {
        let own = self.cluster[i];
        for &(j, s) in &self.adj[i] {
            let c = self.cluster[j];
            if self.link[c] == 0.0 {
                self.touched.push(c);
            }
            self.link[c] += s;
        }
        let stay = self.link[own] - self.resolution * (self.size[own] - 1) as f64;
        // Leaving for an empty cluster scores 0; only worth it if i has company.
        let mut best_cluster = own;
        let mut best = stay;
        if self.size[own] > 1 && 0.0 > best + EPS {
            best = 0.0;
            best_cluster = usize::MAX;
        }
        let mut candidates = self.touched.clone();
        candidates.sort_unstable();
        for c in candidates {
            if c == own {
                continue;
            }
            let gain = self.link[c] - self.resolution * self.size[c] as f64;
            if gain > best + EPS {
                best = gain;
                best_cluster = c;
            }
        }
        for &c in &self.touched {
            self.link[c] = 0.0;
        }
        self.touched.clear();

        if best_cluster == own {
            return false;
        }
        let target = if best_cluster == usize::MAX {
            self.free.pop().expect("a node sharing its cluster leaves a free id")
        } else {
            best_cluster
        };
        self.size[own] -= 1;
        if self.size[own] == 0 {
            self.free.push(own);
        }
        self.size[target] += 1;
        self.cluster[i] = target;
        true
    }

    /// Merges cluster pairs with positive joint gain, best first, each cluster
    /// at most once per pass.
    fn merge_pass(&mut self) -> bool {
        let mut between: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for (i, list) in self.adj.iter().enumerate() {
            for &(j, s) in list {
                let (a, b) = (self.cluster[i], self.cluster[j]);
                if i < j && a != b {
                    *between.entry((a.min(b), a.max(b))).or_default() += s;
                }
            }
        }
        let mut gains: Vec<(f64, usize, usize)> = between
            .into_iter()
            .map(|((a, b), s)| (s - self.resolution * (self.size[a] * self.size[b]) as f64, a, b))
            .filter(|&(g, _, _)| g > EPS)
            .collect();
        gains.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut used = vec![false; self.size.len()];
        let mut merged = false;
        for (_, a, b) in gains {
            if used[a] || used[b] {
                continue;
            }
            used[a] = true;
            used[b] = true;
            for c in self.cluster.iter_mut() {
                if *c == b {
                    *c = a;
                }
            }
            self.size[a] += self.size[b];
            self.size[b] = 0;
            self.free.push(b);
            merged = true;
        }
        merged
    }
}

/// Maximizes `Σ_{i<j} δ(c_i, c_j)(s_ij - γ)` by local moving with merge
/// passes, keeping the best of `restarts` seeded runs.
///
/// Run `r` shuffles with a generator seeded by `seed + r`. Every run ends on a
/// local-moving phase, so no single-node move improves the returned
/// assignment.
pub fn vos_cluster(
    sim: &SimilarityMatrix,
    resolution: f64,
    restarts: usize,
    seed: u64,
) -> Result<Clustering, VosError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(VosError::InvalidParameter("resolution must be positive".into()));
    }
    if restarts == 0 {
        return Err(VosError::InvalidParameter("restarts must be at least 1".into()));
    }
    let adj = sim.adjacency();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let mut state = State::singletons(&adj, resolution);
        loop {
            state.local_moving(&mut rng);
            if !state.merge_pass() {
                break;
            }
        }
        let assignment = relabel(&state.cluster);
        let q = clustering_quality(sim, &assignment, resolution);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq + EPS) {
            best = Some((q, assignment));
        }
    }
    let (quality, assignment) = best.expect("restarts >= 1");
    Ok(Clustering {
        assignment,
        resolution,
        quality,
    })
}
