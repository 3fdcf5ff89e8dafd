//! Sparse symmetric similarity matrices and the VOSviewer network format.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

/// Sparse symmetric non-negative weights between `n` nodes.
///
/// Only the upper triangle (`i < j`) is stored and zero entries are dropped,
/// so `get(i, j) == get(j, i)` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SimilarityRepr", try_from = "SimilarityRepr")]
pub struct SimilarityMatrix {
    n: usize,
    weights: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
struct SimilarityRepr {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl From<SimilarityMatrix> for SimilarityRepr {
    fn from(m: SimilarityMatrix) -> Self {
        SimilarityRepr {
            n: m.n,
            entries: m.iter().collect(),
        }
    }
}

impl TryFrom<SimilarityRepr> for SimilarityMatrix {
    type Error = String;

    fn try_from(r: SimilarityRepr) -> Result<Self, String> {
        let mut m = SimilarityMatrix::new(r.n);
        for (i, j, w) in r.entries {
            if i >= r.n || j >= r.n || i == j {
                return Err(format!("invalid entry ({i}, {j}) for {} nodes", r.n));
            }
            if !(w >= 0.0) {
                return Err(format!("negative or NaN weight at ({i}, {j})"));
            }
            m.set(i, j, w);
        }
        Ok(m)
    }
}

#[inline]
fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl SimilarityMatrix {
    pub fn new(n: usize) -> Self {
        SimilarityMatrix {
            n,
            weights: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored (non-zero) pairs.
    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sets `s_ij = s_ji = w`. Diagonal writes are ignored and a zero weight
    /// removes the pair.
    pub fn set(&mut self, i: usize, j: usize, w: f64) {
        assert!(i < self.n && j < self.n, "node index out of range");
        assert!(w >= 0.0, "similarity weights must be non-negative");
        if i == j {
            return;
        }
        if w == 0.0 {
            self.weights.remove(&key(i, j));
        } else {
            self.weights.insert(key(i, j), w);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.weights.get(&key(i, j)).copied().unwrap_or(0.0)
    }

    /// Upper-triangle entries `(i, j, s_ij)` with `i < j`, in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.values().copied().fold(0.0, f64::max)
    }

    /// Returns a copy with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        SimilarityMatrix {
            n: self.n,
            weights: self.weights.iter().map(|(&k, &w)| (k, w * factor)).collect(),
        }
    }

    /// Neighbor lists, each sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, w) in self.iter() {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        adj
    }

    /// Total link strength `Σ_j s_ij` per node.
    pub fn link_strength(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.n];
        for (i, j, w) in self.iter() {
            totals[i] += w;
            totals[j] += w;
        }
        totals
    }

    /// Connected component id per node, numbered from 0 by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Sum of `s_ij` over unordered pairs inside `members` (a membership mask).
    pub fn within_strength(&self, members: &[bool]) -> f64 {
        self.iter()
            .filter(|&(i, j, _)| members[i] && members[j])
            .map(|(_, _, w)| w)
            .sum()
    }
}

/// Association strength normalization `s_ij = c_ij / (w_i * w_j)`.
///
/// `counts` yields `(i, j, c_ij)` for `i != j`; entries with `c_ij == 0` are
/// skipped. Every node appearing in a non-zero count must have `w > 0`.
pub fn association_strength<I>(n: usize, counts: I, totals: &[f64]) -> SimilarityMatrix
where
    I: IntoIterator<Item = (usize, usize, f64)>,
{
    assert_eq!(totals.len(), n);
    let mut sim = SimilarityMatrix::new(n);
    for (i, j, c) in counts {
        if c == 0.0 || i == j {
            continue;
        }
        let denom = totals[i] * totals[j];
        assert!(denom > 0.0, "association strength needs positive totals");
        sim.set(i, j, c / denom);
    }
    sim
}

/// Writes a VOSviewer network file: `i<TAB>j<TAB>weight`, 1-based ids.
pub fn write_vos_network<W: Write>(mut out: W, sim: &SimilarityMatrix) -> io::Result<()> {
    for (i, j, w) in sim.iter() {
        writeln!(out, "{}\t{}\t{}", i + 1, j + 1, w)?;
    }
    Ok(())
}

/// Writes the companion VOSviewer map file: `id<TAB>label<TAB>weight`.
pub fn write_vos_map<W: Write>(mut out: W, labels: &[String], weights: &[f64]) -> io::Result<()> {
    assert_eq!(labels.len(), weights.len());
    writeln!(out, "id\tlabel\tweight")?;
    for (idx, (label, w)) in labels.iter().zip(weights).enumerate() {
        writeln!(out, "{}\t{}\t{}", idx + 1, label, w)?;
    }
    Ok(())
}

/// Reads a network file written by [`write_vos_network`].
pub fn read_vos_network<R: BufRead>(input: R, n: usize) -> io::Result<SimilarityMatrix> {
    let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
    let mut sim = SimilarityMatrix::new(n);
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let mut next_usize = || -> Option<usize> { parts.next()?.trim().parse().ok() };
        let (i, j) = match (next_usize(), next_usize()) {
            (Some(i), Some(j)) if i >= 1 && j >= 1 && i <= n && j <= n => (i - 1, j - 1),
            _ => return Err(bad(idx + 1, "expected two node ids within range")),
        };
        let w: f64 = line
            .rsplit('\t')
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(idx + 1, "missing weight"))?;
        if !(w >= 0.0) || i == j {
            return Err(bad(idx + 1, "invalid weight or self link"));
        }
        sim.set(i, j, w);
    }
    Ok(sim)
}
