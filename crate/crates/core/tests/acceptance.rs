//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p sciencemap --test acceptance`. Budgets are checked
//! against the wall time of the build under test (debug by default).

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciencemap::categraph::{build_category_graph, fr_layout, render_graph_svg};
use sciencemap::layout::mean_pairwise_distance;
use sciencemap::overlay::{category_shares, cohesion, make_overlay};
use sciencemap::participation::{read_bands_csv, replay_bands, select_cutoff, REFERENCE_BANDS};
use sciencemap::pipeline::{run_pipeline, write_synthetic_workspace, PipelineConfig};
use sciencemap::simnet::{citation_counts, cocitation_counts, coupling_counts};
use sciencemap::synth::SynthParams;
use sciencemap::vosmap::{vos_cluster, vos_layout, vos_layout_traced, DEFAULT_MAX_ITER, DEFAULT_TOL};
use sciencemap::SimilarityMatrix;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn band_replay() -> Result<String, String> {
    let published = read_bands_csv(REFERENCE_BANDS.as_bytes()).map_err(|e| e.to_string())?;
    let replay = replay_bands(&published);
    ensure(replay.mismatches.is_empty(), || format!("error% mismatches {:?}", replay.mismatches))?;
    for ((row, _, _), r) in published.iter().zip(&replay.rows) {
        ensure(row.avg_pp == r.avg_pp, || format!("band {} avg {} != {}", r.band_index, r.avg_pp, row.avg_pp))?;
    }
    let b16 = &replay.rows[15];
    ensure((b16.included, b16.errors, b16.error_percent) == (230, 11, 5), || format!("{b16:?}"))?;
    let cutoff = select_cutoff(&replay.rows, 50.0).map_err(|e| e.to_string())?;
    ensure(cutoff == 25.0, || format!("cutoff {cutoff}"))?;
    let selected = replay.rows.iter().find(|r| r.threshold_percent == cutoff).unwrap().selected();
    ensure(selected == 219, || format!("selected {selected}"))?;
    Ok(format!("{} bands reproduced, cutoff 25, 219 selected", replay.rows.len()))
}

fn pp_oracle() -> Result<String, String> {
    let rows = pp_oracle_holds(200, 20, 5);
    Ok(format!("{rows} sources match the per-document scan"))
}

fn channel_oracles() -> Result<String, String> {
    let mut cells = 0;
    for seed in 0..20u64 {
        let corpus = random_corpus(20 + (seed as usize * 7) % 31, 3 + seed as usize % 6, 1000 + seed);
        let (cit, _) = citation_counts(&corpus);
        let pairs = [
            (cit, naive_citation(&corpus)),
            (cocitation_counts(&corpus), naive_cocitation(&corpus)),
            (coupling_counts(&corpus), naive_coupling(&corpus)),
        ];
        for (m, oracle) in &pairs {
            for (i, row) in oracle.iter().enumerate() {
                for (j, &want) in row.iter().enumerate() {
                    ensure(m.get(i, j) == want, || format!("{} seed {seed} ({i},{j}): {} != {want}", m.channel, m.get(i, j)))?;
                    cells += 1;
                }
            }
        }
        let docs = corpus.documents().to_vec();
        let stats = sciencemap::descriptors::extract_keywords(&docs);
        let terms: Vec<String> = stats.iter().map(|t| t.term.clone()).collect();
        let m = sciencemap::descriptors::build_cooccurrence(&docs, &stats);
        let oracle = naive_cooccurrence(&docs, &terms);
        for (i, row) in oracle.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                ensure(m.get(i, j) == want, || format!("cooccurrence seed {seed} ({i},{j})"))?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells equal over 20 fixtures"))
}

fn vos_layout_checks() -> Result<String, String> {
    let mut two = SimilarityMatrix::new(2);
    two.set(0, 1, 0.7);
    let l = vos_layout(&two, &ids(2), 1, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure((l.distance(0, 1) - 1.0).abs() < 1e-6, || format!("2-node distance {}", l.distance(0, 1)))?;

    let mut tri = SimilarityMatrix::new(3);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        tri.set(i, j, 1.0);
    }
    let l = vos_layout(&tri, &ids(3), 1, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        ensure((l.distance(i, j) - 1.0).abs() < 1e-4, || format!("3-node distance {}", l.distance(i, j)))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut iters = 0;
    for f in 0..20 {
        let sim = random_sim(10, 0.4, &mut rng);
        let (layout, trace) = vos_layout_traced(&sim, &ids(10), f, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
        for (k, w) in trace.objective.windows(2).enumerate() {
            ensure(w[1] <= w[0] * (1.0 + 1e-12), || format!("fixture {f}: objective rose at iteration {} ({} -> {})", k + 1, w[0], w[1]))?;
        }
        ensure(layout.converged, || format!("fixture {f} did not converge"))?;
        let mean = mean_pairwise_distance(&layout.positions);
        ensure((mean - 1.0).abs() < 1e-6, || format!("fixture {f}: mean distance {mean}"))?;
        iters += layout.iterations;
    }
    Ok(format!("2-node, 3-node exact; 20 fixtures monotone, {iters} iterations total"))
}

fn vos_clustering() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut hits = 0;
    for g in 0..100u64 {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(0.3..0.9);
        let sim = random_sim(n, p, &mut rng);
        let gamma = rng.gen_range(0.05..0.6);
        let best = brute_force_optimum(&sim, gamma);
        let got = vos_cluster(&sim, gamma, 20, g).map_err(|e| e.to_string())?;
        ensure(got.quality <= best + 1e-9, || format!("graph {g}: quality {} above optimum {best}", got.quality))?;
        if (got.quality - best).abs() <= 1e-9 {
            hits += 1;
        }
    }
    ensure(hits >= 95, || format!("optimal on {hits}/100"))?;
    Ok(format!("optimal on {hits}/100, never above"))
}

fn overlay_immutability() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for f in 0..10u64 {
        let n = rng.gen_range(5..40);
        let sim = random_sim(n, 0.3, &mut rng);
        let ids = ids(n);
        let base = vos_layout(&sim, &ids, f, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let clustering = vos_cluster(&sim, 0.2, 3, f).map_err(|e| e.to_string())?;
        let before = serde_json::to_vec(&(&base, &clustering)).unwrap();
        let subset: BTreeSet<String> = ids.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        let spec = make_overlay(&base, Some(&clustering), &subset).map_err(|e| e.to_string())?;
        for i in spec.highlighted() {
            let (a, b) = (spec.base.positions[i], base.positions[i]);
            ensure(a[0].to_bits() == b[0].to_bits() && a[1].to_bits() == b[1].to_bits(), || format!("fixture {f} node {i} moved"))?;
        }
        ensure(spec.highlighted().count() == subset.len(), || "subset not fully highlighted".into())?;
        ensure(serde_json::to_vec(&(&base, &clustering)).unwrap() == before, || "base changed".into())?;
        ensure(
            serde_json::to_vec(&(&spec.base, spec.clustering.as_ref().unwrap())).unwrap() == before,
            || "overlay copy differs from base".into(),
        )?;
    }
    Ok("10 fixtures byte-identical".into())
}

fn cohesion_calibration() -> Result<String, String> {
    let (sim, ids, clique) = planted_clique(200, 15, 0.03, 77);
    let r = cohesion(&sim, &ids, &clique, 1000, 3, None).map_err(|e| e.to_string())?;
    ensure(r.permutation_p < 0.01, || format!("planted clique p = {}", r.permutation_p))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut above = 0;
    for t in 0..100u64 {
        let subset: BTreeSet<String> =
            rand::seq::index::sample(&mut rng, 200, 15).iter().map(|i| ids[i].clone()).collect();
        let q = cohesion(&sim, &ids, &subset, 1000, 100 + t, None).map_err(|e| e.to_string())?;
        if q.permutation_p > 0.01 {
            above += 1;
        }
    }
    ensure(above >= 99, || format!("random subsets with p > 0.01: {above}/100"))?;
    Ok(format!("clique p = {}, random subsets p > 0.01 in {above}/100", r.permutation_p))
}

fn core_shares() -> Result<String, String> {
    let core: Vec<String> = (0..26).map(|i| format!("S{i:02}")).collect();
    let mut cats: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, s) in core.iter().enumerate() {
        let mut c = Vec::new();
        if i < 20 {
            c.push("Education".to_string());
        }
        if i < 13 {
            c.push("Computer Science".to_string());
        }
        if i >= 20 {
            c.push("Engineering".to_string());
        }
        cats.insert(s.clone(), c);
    }
    let stats = category_shares(&core, &cats).map_err(|e| e.to_string())?;
    let got = (stats.share("Education"), stats.share("Computer Science"), stats.share("Engineering"));
    ensure(got == (Some(77), Some(50), Some(23)), || format!("{got:?}"))?;
    Ok("20/13/6 of 26 -> 77/50/23".into())
}

fn fr_checks() -> Result<String, String> {
    let cats: BTreeMap<String, Vec<String>> =
        [("S1".to_string(), vec!["A".to_string(), "B".to_string()])].into_iter().collect();
    let g = build_category_graph(&["S1".to_string()], &cats);
    for k in [0.25, 0.5, 1.0, 3.0] {
        let l = fr_layout(&g, k, 500, 9).map_err(|e| e.to_string())?;
        let d = l.distance(0, 1);
        ensure((d - k).abs() <= 0.05 * k, || format!("k = {k}: distance {d}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sources: Vec<String> = (0..30).map(|i| format!("S{i:02}")).collect();
    let cats: BTreeMap<String, Vec<String>> = sources
        .iter()
        .map(|s| {
            let n = rng.gen_range(1..4);
            (s.clone(), (0..n).map(|_| format!("C{}", rng.gen_range(0..9))).collect())
        })
        .collect();
    let g = build_category_graph(&sources, &cats);
    let colors = BTreeMap::new();
    let svg = |seed| render_graph_svg(&g, &fr_layout(&g, 0.3, 500, seed).unwrap(), &colors, 600.0);
    ensure(svg(4) == svg(4), || "SVG differs between identical runs".into())?;
    Ok(format!("equilibrium within 5% of k; {}-node SVG byte-identical", g.len()))
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn end_to_end() -> Result<String, String> {
    let ws = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = write_synthetic_workspace(ws.path(), &SynthParams::default()).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::load(&cfg_path).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = run_pipeline(&cfg, &ws.path().join("a")).map_err(|e| e.to_string())?;
    let first = start.elapsed();
    run_pipeline(&cfg, &ws.path().join("b")).map_err(|e| e.to_string())?;
    let (a, b) = (tree(&ws.path().join("a")), tree(&ws.path().join("b")));
    ensure(a.keys().eq(b.keys()), || "artifact trees list different files".into())?;
    for (name, bytes) in &a {
        ensure(&b[name] == bytes, || format!("{name} differs"))?;
    }
    ensure(report.inconsistencies().is_empty(), || format!("{:?}", report.inconsistencies()))?;
    ensure(first < Duration::from_secs(60), || format!("single run took {first:?}"))?;
    Ok(format!(
        "{} files identical; {} docs, {} sources, one run {:.1}s",
        a.len(),
        report.documents,
        report.sources,
        first.as_secs_f64()
    ))
}

fn main() {
    let checks: [(&str, Check, Option<u64>); 10] = [
        ("band table replay", band_replay, Some(1)),
        ("participation oracle", pp_oracle, Some(5)),
        ("channel oracles", channel_oracles, Some(5)),
        ("VOS layout", vos_layout_checks, Some(10)),
        ("VOS clustering", vos_clustering, Some(60)),
        ("overlay immutability", overlay_immutability, None),
        ("cohesion calibration", cohesion_calibration, None),
        ("core category shares", core_shares, None),
        ("FR layout", fr_checks, None),
        ("end-to-end determinism", end_to_end, Some(120)),
    ];
    // silence the default hook; failures are reported below
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check, budget) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if took > Duration::from_secs(b) => Err(format!("over budget: {took:?} > {b}s")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name:<24} {:>8.2}s  {detail}", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<24} {:>8.2}s  {why}", took.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
