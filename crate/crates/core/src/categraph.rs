//! Category co-assignment graph of the selected sources and its
//! force-directed layout.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::layout::{canonicalize, distance, MapLayout};
use crate::svg::{SvgDoc, Viewport, PALETTE};

pub const DEFAULT_ITERATIONS: usize = 500;

#[derive(Debug, thiserror::Error)]
pub enum CategraphError {
    #[error("layout needs at least 2 nodes, got {0}")]
    Degenerate(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEdge {
    pub a: usize,
    pub b: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryGraph {
    /// Sorted category names.
    pub categories: Vec<String>,
    /// Number of selected sources carrying each category.
    pub weights: Vec<u64>,
    /// `a < b`, sorted.
    pub edges: Vec<CategoryEdge>,
    /// Selected sources without any category.
    pub uncategorized: Vec<String>,
}

impl CategoryGraph {
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn edge(&self, a: &str, b: &str) -> u64 {
        let (Some(i), Some(j)) = (self.index_of(a), self.index_of(b)) else {
            return 0;
        };
        let (i, j) = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|e| e.a == i && e.b == j)
            .map_or(0, |e| e.count)
    }

    pub fn index_of(&self, category: &str) -> Option<usize> {
        self.categories.binary_search_by(|c| c.as_str().cmp(category)).ok()
    }
}

pub fn build_category_graph(
    selected: &[String],
    categories: &BTreeMap<String, Vec<String>>,
) -> CategoryGraph {
    let mut weight: BTreeMap<&str, u64> = BTreeMap::new();
    let mut pairs: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    let mut uncategorized = Vec::new();
    let unique: BTreeSet<&String> = selected.iter().collect();
    for id in unique {
        let cats: BTreeSet<&str> = categories.get(id).into_iter().flatten().map(String::as_str).collect();
        if cats.is_empty() {
            uncategorized.push(id.clone());
            continue;
        }
        let cats: Vec<&str> = cats.into_iter().collect();
        for (x, &a) in cats.iter().enumerate() {
            *weight.entry(a).or_default() += 1;
            for &b in &cats[x + 1..] {
                *pairs.entry((a, b)).or_default() += 1;
            }
        }
    }
    let names: Vec<String> = weight.keys().map(|s| s.to_string()).collect();
    let index: BTreeMap<&str, usize> = weight.keys().enumerate().map(|(i, &c)| (c, i)).collect();
    CategoryGraph {
        weights: weight.values().copied().collect(),
        edges: pairs
            .into_iter()
            .map(|((a, b), count)| CategoryEdge {
                a: index[a],
                b: index[b],
                count,
            })
            .collect(),
        categories: names,
        uncategorized,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrTrace {
    pub temperature: Vec<f64>,
    /// Largest single-node displacement per iteration.
    pub max_displacement: Vec<f64>,
    /// Smallest pairwise distance after each iteration.
    pub min_distance: Vec<f64>,
}

/// Fruchterman-Reingold layout with ideal distance `k`.
///
/// Attraction `w d²/k` along edges, repulsion `k²/d` between all pairs. The
/// start is uniform in a square of side `k √n`; the temperature cools
/// linearly from a tenth of that side to zero and caps each node's step.
pub fn fr_layout(graph: &CategoryGraph, k: f64, iterations: usize, seed: u64) -> Result<MapLayout, CategraphError> {
    fr_layout_traced(graph, k, iterations, seed).map(|(l, _)| l)
}

pub fn fr_layout_traced(
    graph: &CategoryGraph,
    k: f64,
    iterations: usize,
    seed: u64,
) -> Result<(MapLayout, FrTrace), CategraphError> {
    let n = graph.len();
    if n < 2 {
        return Err(CategraphError::Degenerate(n));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(CategraphError::InvalidParameter("k must be positive".into()));
    }
    if iterations == 0 {
        return Err(CategraphError::InvalidParameter("iterations must be at least 1".into()));
    }
    let side = k * (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen_range(-0.5..0.5) * side, rng.gen_range(-0.5..0.5) * side])
        .collect();
    let t0 = side / 10.0;
    let mut trace = FrTrace {
        temperature: Vec::with_capacity(iterations),
        max_displacement: Vec::with_capacity(iterations),
        min_distance: Vec::with_capacity(iterations),
    };
    let mut disp = vec![[0.0f64; 2]; n];
    for it in 0..iterations {
        let t = t0 * (1.0 - it as f64 / iterations as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
        for i in 0..n {
            for j in i + 1..n {
                let mut dx = pos[i][0] - pos[j][0];
                let mut dy = pos[i][1] - pos[j][1];
                let mut d = dx.hypot(dy);
                if d < 1e-9 * k {
                    // coincident nodes: push apart along a fixed direction
                    let a = (i * 31 + j * 17) as f64;
                    dx = a.cos() * 1e-9 * k;
                    dy = a.sin() * 1e-9 * k;
                    d = 1e-9 * k;
                }
                let f = k * k / d;
                disp[i][0] += dx / d * f;
                disp[i][1] += dy / d * f;
                disp[j][0] -= dx / d * f;
                disp[j][1] -= dy / d * f;
            }
        }
        for e in &graph.edges {
            let (i, j) = (e.a, e.b);
            let dx = pos[i][0] - pos[j][0];
            let dy = pos[i][1] - pos[j][1];
            let d = dx.hypot(dy);
            if d == 0.0 {
                continue;
            }
            let f = e.count as f64 * d * d / k;
            disp[i][0] -= dx / d * f;
            disp[i][1] -= dy / d * f;
            disp[j][0] += dx / d * f;
            disp[j][1] += dy / d * f;
        }
        let mut max_step = 0.0f64;
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(t);
                p[0] += d[0] / len * step;
                p[1] += d[1] / len * step;
                max_step = max_step.max(step);
            }
        }
        trace.temperature.push(t);
        trace.max_displacement.push(max_step);
        trace.min_distance.push(min_pairwise(&pos));
    }
    canonicalize(&mut pos);
    Ok((
        MapLayout {
            ids: graph.categories.clone(),
            positions: pos,
            converged: true,
            objective_value: 0.0,
            iterations,
        },
        trace,
    ))
}

fn min_pairwise(pos: &[[f64; 2]]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            m = m.min(distance(pos[i], pos[j]));
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExportNode {
    pub category: String,
    pub weight: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExportEdge {
    pub a: String,
    pub b: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<GraphExportNode>,
    pub edges: Vec<GraphExportEdge>,
    pub uncategorized: usize,
}

pub fn export_graph(graph: &CategoryGraph, layout: &MapLayout) -> GraphExport {
    GraphExport {
        nodes: graph
            .categories
            .iter()
            .enumerate()
            .map(|(i, c)| GraphExportNode {
                category: c.clone(),
                weight: graph.weights[i],
                x: layout.positions[i][0],
                y: layout.positions[i][1],
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| GraphExportEdge {
                a: graph.categories[e.a].clone(),
                b: graph.categories[e.b].clone(),
                count: e.count,
            })
            .collect(),
        uncategorized: graph.uncategorized.len(),
    }
}

/// Node radius grows with weight; colors come from `colors` by category name,
/// falling back to the default palette by node index.
pub fn render_graph_svg(
    graph: &CategoryGraph,
    layout: &MapLayout,
    colors: &BTreeMap<String, String>,
    size: f64,
) -> String {
    let mut doc = SvgDoc::new(size, size);
    let view = Viewport::fit(layout.bounds(), size, 60.0);
    let max_w = graph.weights.iter().copied().max().unwrap_or(1).max(1) as f64;
    let max_e = graph.edges.iter().map(|e| e.count).max().unwrap_or(1).max(1) as f64;
    for e in &graph.edges {
        let a = view.map(layout.positions[e.a]);
        let b = view.map(layout.positions[e.b]);
        doc.line(a, b, "#888888", 0.5 + 4.0 * e.count as f64 / max_e, 0.6);
    }
    for (i, cat) in graph.categories.iter().enumerate() {
        let (x, y) = view.map(layout.positions[i]);
        let r = 4.0 + 26.0 * graph.weights[i] as f64 / max_w;
        let fill = colors.get(cat).map_or(PALETTE[i % PALETTE.len()], String::as_str);
        doc.circle(x, y, r, fill, 0.8, Some(&format!("{cat} ({})", graph.weights[i])));
        doc.text(x, y - r - 3.0, 11.0, cat);
    }
    doc.finish()
}
