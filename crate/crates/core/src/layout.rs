//! 2-D node positions shared by the science map and the category graph.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapLayout {
    pub ids: Vec<String>,
    pub positions: Vec<[f64; 2]>,
    pub converged: bool,
    pub objective_value: f64,
    pub iterations: usize,
}

impl MapLayout {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.positions[i], self.positions[j])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// `(min_x, min_y, max_x, max_y)`; all zeros when empty.
    pub fn bounds(&self) -> [f64; 4] {
        bounds(&self.positions)
    }
}

pub(crate) fn bounds(points: &[[f64; 2]]) -> [f64; 4] {
    if points.is_empty() {
        return [0.0; 4];
    }
    points.iter().fold(
        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])],
    )
}

#[inline]
pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean over unordered pairs of the Euclidean distance.
pub fn mean_pairwise_distance(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += distance(points[i], points[j]);
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Removes translation, rotation and reflection freedom.
///
/// The centroid moves to the origin, the principal axis of the point cloud is
/// turned onto x, and each axis is flipped so its third moment is positive.
/// When an axis has no skew, the coordinate of largest magnitude (lowest index
/// on ties) is made positive instead.
pub fn canonicalize(points: &mut [[f64; 2]]) {
    let n = points.len();
    if n == 0 {
        return;
    }
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    for p in points.iter_mut() {
        p[0] -= cx;
        p[1] -= cy;
    }

    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points.iter() {
        sxx += p[0] * p[0];
        syy += p[1] * p[1];
        sxy += p[0] * p[1];
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (sin, cos) = theta.sin_cos();
    for p in points.iter_mut() {
        let (x, y) = (p[0], p[1]);
        p[0] = cos * x + sin * y;
        p[1] = -sin * x + cos * y;
    }

    let scale = points
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    for axis in 0..2 {
        let skew: f64 = points.iter().map(|p| (p[axis] / scale).powi(3)).sum();
        let flip = if skew.abs() > 1e-9 {
            skew < 0.0
        } else {
            let mut best = 0.0f64;
            for p in points.iter() {
                if p[axis].abs() > best.abs() * (1.0 + 1e-9) {
                    best = p[axis];
                }
            }
            best < 0.0
        };
        if flip {
            for p in points.iter_mut() {
                p[axis] = -p[axis];
            }
        }
    }
}
