use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VosError;
use crate::layout::{canonicalize, mean_pairwise_distance, MapLayout};
use crate::similarity::SimilarityMatrix;

/// Per-iteration record of the constrained objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutTrace {
    /// Objective at the start and after every iteration, each evaluated with
    /// the configuration rescaled to unit mean distance.
    pub objective: Vec<f64>,
    /// Whether a uniform similarity floor was added because the graph was
    /// disconnected.
    pub regularized: bool,
}

/// `Σ_{i<j} s_ij d_ij²` after rescaling `points` to unit mean distance.
pub fn constrained_objective(sim: &SimilarityMatrix, points: &[[f64; 2]]) -> f64 {
    let mean = mean_pairwise_distance(points);
    if mean == 0.0 {
        return f64::INFINITY;
    }
    sim.iter()
        .map(|(i, j, s)| {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            s * (dx * dx + dy * dy)
        })
        .sum::<f64>()
        / (mean * mean)
}

fn dense_objective(w: &DMatrix<f64>, x: &[[f64; 2]]) -> f64 {
    let n = x.len();
    let mean = mean_pairwise_distance(x);
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let s = w[(i, j)];
            if s != 0.0 {
                let dx = x[i][0] - x[j][0];
                let dy = x[i][1] - x[j][1];
                sum += s * (dx * dx + dy * dy);
            }
        }
    }
    sum / (mean * mean)
}

fn rescale_to_unit_mean(x: &mut [[f64; 2]]) {
    let mean = mean_pairwise_distance(x);
    if mean > 0.0 {
        for p in x.iter_mut() {
            p[0] /= mean;
            p[1] /= mean;
        }
    }
}

/// VOS mapping: minimizes `Σ s_ij d_ij²` subject to a mean pairwise distance
/// of 1, by majorization.
///
/// Each step solves `(L + J/n) X = ½ B(Y) Y`, where `L` is the Laplacian of
/// the similarities and `B(Y) Y` pushes every pair apart along its current
/// direction; the step depends only on the shape of `Y`, never its scale.
/// Disconnected graphs get a uniform floor of `1e-3` times the mean positive
/// similarity on every pair, since their unconstrained problem has no finite
/// minimum.
pub fn vos_layout(
    sim: &SimilarityMatrix,
    ids: &[String],
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<MapLayout, VosError> {
    vos_layout_traced(sim, ids, seed, max_iter, tol).map(|(layout, _)| layout)
}

pub fn vos_layout_traced(
    sim: &SimilarityMatrix,
    ids: &[String],
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(MapLayout, LayoutTrace), VosError> {
    let n = sim.n();
    if n < 2 {
        return Err(VosError::Degenerate(n));
    }
    if ids.len() != n {
        return Err(VosError::InvalidParameter(format!(
            "{} ids for {n} nodes",
            ids.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(VosError::InvalidParameter("tol must be positive".into()));
    }

    let regularized = !sim.is_connected();
    let mut w = DMatrix::<f64>::zeros(n, n);
    for (i, j, s) in sim.iter() {
        w[(i, j)] = s;
        w[(j, i)] = s;
    }
    if regularized {
        let floor = if sim.is_empty() {
            1.0
        } else {
            1e-3 * sim.iter().map(|(_, _, s)| s).sum::<f64>() / sim.nnz() as f64
        };
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w[(i, j)] += floor;
                }
            }
        }
    }

    // M = L + J/n is positive definite for a connected weight graph.
    let mut m = DMatrix::<f64>::from_element(n, n, 1.0 / n as f64);
    for i in 0..n {
        let mut deg = 0.0;
        for j in 0..n {
            if i != j {
                m[(i, j)] -= w[(i, j)];
                deg += w[(i, j)];
            }
        }
        m[(i, i)] += deg;
    }
    let chol: Cholesky<f64, Dyn> = Cholesky::new(m).ok_or(VosError::Numerical)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen_range(-0.5..=0.5), rng.gen_range(-0.5..=0.5)])
        .collect();
    rescale_to_unit_mean(&mut x);

    let mut trace = vec![dense_objective(&w, &x)];
    let mut converged = false;
    let mut iterations = 0;
    let mut rhs = DMatrix::<f64>::zeros(n, 2);
    while iterations < max_iter {
        rhs.fill(0.0);
        for i in 0..n {
            for j in i + 1..n {
                let dx = x[i][0] - x[j][0];
                let dy = x[i][1] - x[j][1];
                let d = dx.hypot(dy);
                if d > 0.0 {
                    let (ux, uy) = (0.5 * dx / d, 0.5 * dy / d);
                    rhs[(i, 0)] += ux;
                    rhs[(i, 1)] += uy;
                    rhs[(j, 0)] -= ux;
                    rhs[(j, 1)] -= uy;
                }
            }
        }
        let next = chol.solve(&rhs);
        let prev_x = x.clone();
        for (i, p) in x.iter_mut().enumerate() {
            *p = [next[(i, 0)], next[(i, 1)]];
        }
        rescale_to_unit_mean(&mut x);
        iterations += 1;
        let moved = x
            .iter()
            .zip(&prev_x)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max);

        let prev = *trace.last().expect("non-empty");
        let cur = dense_objective(&w, &x);
        trace.push(cur);
        if !cur.is_finite() {
            return Err(VosError::Numerical);
        }
        if (prev - cur).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE) && moved <= tol {
            converged = true;
            break;
        }
    }

    canonicalize(&mut x);
    let layout = MapLayout {
        ids: ids.to_vec(),
        objective_value: constrained_objective(sim, &x),
        positions: x,
        converged,
        iterations,
    };
    Ok((
        layout,
        LayoutTrace {
            objective: trace,
            regularized,
        },
    ))
}
