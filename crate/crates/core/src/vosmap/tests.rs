use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::layout::mean_pairwise_distance;
use crate::similarity::SimilarityMatrix;

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

fn random_sim(n: usize, density: f64, seed: u64) -> SimilarityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SimilarityMatrix::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                s.set(i, j, rng.gen_range(0.05..1.0));
            }
        }
    }
    s
}

/// Best quality over every set partition, via restricted growth strings.
fn brute_force_best(sim: &SimilarityMatrix, gamma: f64) -> f64 {
    let n = sim.n();
    let mut a = vec![1usize; n];
    let mut best = f64::NEG_INFINITY;
    fn rec(k: usize, max: usize, a: &mut Vec<usize>, sim: &SimilarityMatrix, g: f64, best: &mut f64) {
        if k == a.len() {
            *best = best.max(clustering_quality(sim, a, g));
            return;
        }
        for c in 1..=max + 1 {
            a[k] = c;
            rec(k + 1, max.max(c), a, sim, g, best);
        }
    }
    if n == 0 {
        return 0.0;
    }
    rec(1, 1, &mut a, sim, gamma, &mut best);
    best
}

#[test]
fn two_nodes_sit_at_unit_distance() {
    let mut s = SimilarityMatrix::new(2);
    s.set(0, 1, 0.3);
    let l = vos_layout(&s, &ids(2), 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    assert!((l.distance(0, 1) - 1.0).abs() < 1e-6);
}

#[test]
fn equal_triangle() {
    let mut s = SimilarityMatrix::new(3);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        s.set(i, j, 1.0);
    }
    for seed in 0..20 {
        let l = vos_layout(&s, &ids(3), seed, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(l.converged);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((l.distance(i, j) - 1.0).abs() < 1e-4, "seed {seed}: {}", l.distance(i, j));
        }
    }
}

#[test]
fn degenerate_and_bad_params() {
    let s = SimilarityMatrix::new(1);
    assert!(matches!(vos_layout(&s, &ids(1), 0, 10, 1e-6), Err(VosError::Degenerate(1))));
    let s = SimilarityMatrix::new(3);
    assert!(vos_layout(&s, &ids(2), 0, 10, 1e-6).is_err());
    assert!(vos_cluster(&s, 0.0, 1, 0).is_err());
    assert!(vos_cluster(&s, 1.0, 0, 0).is_err());
}

#[test]
fn objective_never_increases() {
    for seed in 0..20 {
        let s = random_sim(10, 0.4, 100 + seed);
        let (layout, trace) = vos_layout_traced(&s, &ids(10), seed, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        for w in trace.objective.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "seed {seed}: {} -> {}", w[0], w[1]);
        }
        assert!(layout.converged);
        assert!((mean_pairwise_distance(&layout.positions) - 1.0).abs() < 1e-6);
        let cx: f64 = layout.positions.iter().map(|p| p[0]).sum();
        let cy: f64 = layout.positions.iter().map(|p| p[1]).sum();
        assert!(cx.abs() < 1e-9 && cy.abs() < 1e-9);
    }
}

#[test]
fn beats_random_search() {
    let s = random_sim(10, 0.5, 7);
    let layout = vos_layout(&s, &ids(10), 3, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut best = f64::INFINITY;
    for _ in 0..1000 {
        let pts: Vec<[f64; 2]> = (0..10)
            .map(|_| [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)])
            .collect();
        best = best.min(constrained_objective(&s, &pts));
    }
    assert!(layout.objective_value <= best, "{} > {best}", layout.objective_value);
}

#[test]
fn similarity_scale_does_not_move_nodes() {
    let s = random_sim(8, 0.6, 11);
    let a = vos_layout(&s, &ids(8), 4, DEFAULT_MAX_ITER, 1e-10).unwrap();
    let b = vos_layout(&s.scaled(37.5), &ids(8), 4, DEFAULT_MAX_ITER, 1e-10).unwrap();
    for (p, q) in a.positions.iter().zip(&b.positions) {
        assert!((p[0] - q[0]).abs() < 1e-6 && (p[1] - q[1]).abs() < 1e-6);
    }
}

#[test]
fn disconnected_graph_still_lays_out() {
    let mut s = SimilarityMatrix::new(4);
    s.set(0, 1, 1.0);
    s.set(2, 3, 1.0);
    let (l, trace) = vos_layout_traced(&s, &ids(4), 0, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    assert!(trace.regularized);
    assert!(l.distance(0, 1) < l.distance(0, 2));
}

#[test]
fn layout_is_deterministic() {
    let s = random_sim(12, 0.3, 5);
    let a = vos_layout(&s, &ids(12), 8, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    let b = vos_layout(&s, &ids(12), 8, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    assert_eq!(a, b);
}

#[test]
fn low_resolution_gives_one_cluster() {
    let s = random_sim(9, 1.0, 3);
    let c = vos_cluster(&s, 0.01, 3, 0).unwrap();
    assert_eq!(c.cluster_count(), 1);
}

#[test]
fn high_resolution_gives_singletons() {
    let s = random_sim(9, 0.7, 3);
    let c = vos_cluster(&s, s.max_weight() + 0.1, 3, 0).unwrap();
    assert_eq!(c.assignment, (1..=9).collect::<Vec<_>>());
    assert_eq!(c.quality, 0.0);
}

#[test]
fn clustering_matches_enumeration_on_small_graphs() {
    let mut hits = 0;
    for t in 0..40u64 {
        let n = 3 + (t as usize % 6);
        let s = random_sim(n, 0.5, 1000 + t);
        let c = vos_cluster(&s, 0.3, 20, t).unwrap();
        let opt = brute_force_best(&s, 0.3);
        assert!(c.quality <= opt + 1e-9);
        if (c.quality - opt).abs() <= 1e-9 {
            hits += 1;
        }
    }
    assert!(hits >= 38, "{hits}/40");
}

#[test]
fn no_single_move_improves() {
    let s = random_sim(30, 0.2, 42);
    let c = vos_cluster(&s, 0.2, 5, 9).unwrap();
    assert!((c.quality - clustering_quality(&s, &c.assignment, 0.2)).abs() < 1e-9);
    let k = c.cluster_count();
    for i in 0..30 {
        for target in 1..=k + 1 {
            let mut a = c.assignment.clone();
            a[i] = target;
            assert!(clustering_quality(&s, &a, 0.2) <= c.quality + 1e-9);
        }
    }
}

#[test]
fn two_cliques_split() {
    let mut s = SimilarityMatrix::new(6);
    for &(i, j) in &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)] {
        s.set(i, j, 1.0);
    }
    s.set(2, 3, 0.1);
    let c = vos_cluster(&s, 0.5, 4, 1).unwrap();
    assert_eq!(c.assignment, vec![1, 1, 1, 2, 2, 2]);
}

fn fixed_layout(points: Vec<[f64; 2]>) -> MapLayout {
    MapLayout {
        ids: ids(points.len()),
        positions: points,
        converged: true,
        objective_value: 0.0,
        iterations: 0,
    }
}

#[test]
fn single_node_density() {
    let l = fixed_layout(vec![[0.3, -0.2]]);
    let f = density_field(&l, &[1.0], 0.1, (64, 64)).unwrap();
    assert!((f.mass() - 1.0).abs() < 1e-6);
    let peak = (0..f.values.len()).max_by(|&a, &b| f.values[a].total_cmp(&f.values[b])).unwrap();
    let (c, r) = f.cell_of([0.3, -0.2]);
    let (pc, pr) = (peak % f.width, peak / f.width);
    assert!(pc.abs_diff(c) <= 1 && pr.abs_diff(r) <= 1);
    assert!(f.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn stacked_nodes_double() {
    let one = density_field(&fixed_layout(vec![[0.0, 0.0]]), &[1.0], 0.2, (20, 30)).unwrap();
    let two = density_field(&fixed_layout(vec![[0.0, 0.0], [0.0, 0.0]]), &[1.0, 1.0], 0.2, (20, 30)).unwrap();
    for (a, b) in one.values.iter().zip(&two.values) {
        assert_eq!(2.0 * a, *b);
    }
}

#[test]
fn density_mass_and_linearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<[f64; 2]> = (0..10).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let w1: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..5.0)).collect();
    let w2: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..5.0)).collect();
    let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
    let l = fixed_layout(pts);
    let f1 = density_field(&l, &w1, 0.15, (50, 40)).unwrap();
    let f2 = density_field(&l, &w2, 0.15, (50, 40)).unwrap();
    let f12 = density_field(&l, &sum, 0.15, (50, 40)).unwrap();
    assert!((f1.mass() - w1.iter().sum::<f64>()).abs() < 1e-6);
    for k in 0..f12.values.len() {
        assert!((f12.values[k] - f1.values[k] - f2.values[k]).abs() < 1e-9);
    }
    assert!(density_field(&l, &w1, 0.0, (5, 5)).is_err());
}

#[test]
fn map_file_columns() {
    let l = fixed_layout(vec![[0.0, 0.5], [1.0, -0.25]]);
    let c = Clustering {
        assignment: vec![1, 2],
        resolution: 1.0,
        quality: 0.0,
    };
    let mut buf = Vec::new();
    write_map_file(&mut buf, &l, None, Some(&c), &[3.0, 1.5]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text,
        "id\tlabel\tx\ty\tcluster\tweight\nn0\tn0\t0.000000\t0.500000\t1\t3\nn1\tn1\t1.000000\t-0.250000\t2\t1.5\n"
    );
    let f = density_field(&l, &[1.0, 1.0], 0.2, (10, 10)).unwrap();
    let svg = render_density_svg(&f, &l, Some(&c), 200.0);
    assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
}
