#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciencemap::corpus::{Corpus, DocType, DocumentRecord, SourceRecord, SourceType};
use sciencemap::descriptors::{tokenize, DescriptorSet};
use sciencemap::participation::read_participation_csv;
use sciencemap::pipeline::{run_single, write_synthetic_workspace, PipelineConfig, Stage};
use sciencemap::synth::SynthParams;
use sciencemap::SimilarityMatrix;

const VOCAB: &[&str] = &[
    "e-learning",
    "online learning",
    "distance education",
    "mooc",
    "blended learning",
    "ict",
    "teacher training",
    "assessment",
    "motivation",
    "virtual reality",
    "higher education",
    "statistics",
];

/// A small random corpus with messy references: duplicates, self-citations,
/// same-source links, dangling ids and raw strings.
pub fn random_corpus(docs: usize, sources: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let srcs: Vec<SourceRecord> = (0..sources)
        .map(|s| SourceRecord {
            source_id: format!("S{s:02}"),
            title: format!("Source {s}"),
            source_type: if s % 3 == 0 { SourceType::Proceeding } else { SourceType::Journal },
            categories: vec![],
        })
        .collect();
    let ids: Vec<String> = (0..docs).map(|d| format!("D{d:03}")).collect();
    let records = (0..docs)
        .map(|d| {
            let nkw = rng.gen_range(0..5);
            let kws: Vec<String> = VOCAB.choose_multiple(&mut rng, nkw).map(|s| s.to_string()).collect();
            let mut refs = Vec::new();
            for _ in 0..rng.gen_range(0..6) {
                match rng.gen_range(0..10) {
                    0 => refs.push(format!("Smith J. (2001) Unresolved work {}", rng.gen_range(0..100))),
                    1 => refs.push("D999".to_string()),
                    _ => refs.push(ids[rng.gen_range(0..docs)].clone()),
                }
            }
            if let Some(r) = refs.first().cloned() {
                if rng.gen_bool(0.3) {
                    refs.push(r);
                }
            }
            let title_kw = VOCAB[rng.gen_range(0..VOCAB.len())];
            DocumentRecord {
                doc_id: ids[d].clone(),
                source_id: srcs[rng.gen_range(0..sources)].source_id.clone(),
                title: format!("A study of {title_kw} in practice"),
                abstract_text: if rng.gen_bool(0.5) {
                    format!("We discuss {} and related topics.", VOCAB[rng.gen_range(0..VOCAB.len())])
                } else {
                    String::new()
                },
                author_keywords: kws[..kws.len() / 2].to_vec(),
                index_keywords: kws[kws.len() / 2..].iter().map(|k| k.to_uppercase()).collect(),
                doc_type: if rng.gen_bool(0.8) { DocType::Article } else { DocType::ConferencePaper },
                year: rng.gen_range(2005..2016),
                language: "English".into(),
                references: refs,
                citation_count: rng.gen_range(0..30),
            }
        })
        .collect();
    Corpus::from_parts(records, srcs).expect("fixture corpus is valid")
}

fn source_index(corpus: &Corpus) -> BTreeMap<String, usize> {
    corpus.source_ids().into_iter().enumerate().map(|(i, s)| (s, i)).collect()
}

fn docs_by_source(corpus: &Corpus) -> Vec<Vec<&DocumentRecord>> {
    let idx = source_index(corpus);
    let mut out = vec![Vec::new(); idx.len()];
    for d in corpus.documents() {
        out[idx[&d.source_id]].push(d);
    }
    out
}

fn cites(d: &DocumentRecord, e: &DocumentRecord) -> bool {
    d.references.iter().any(|r| r == &e.doc_id)
}

/// Pairs (citing doc, cited doc) between two different sources, both directions.
pub fn naive_citation(corpus: &Corpus) -> Vec<Vec<u64>> {
    let by = docs_by_source(corpus);
    let n = by.len();
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for d in &by[i] {
                for e in &by[j] {
                    m[i][j] += u64::from(cites(d, e)) + u64::from(cites(e, d));
                }
            }
        }
    }
    m
}

/// Documents citing at least one document of each of two sources.
pub fn naive_cocitation(corpus: &Corpus) -> Vec<Vec<u64>> {
    let by = docs_by_source(corpus);
    let n = by.len();
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for d in corpus.documents() {
                if by[i].iter().any(|e| cites(d, e)) && by[j].iter().any(|e| cites(d, e)) {
                    m[i][j] += 1;
                }
            }
        }
    }
    m
}

/// Documents cited from both sources.
pub fn naive_coupling(corpus: &Corpus) -> Vec<Vec<u64>> {
    let by = docs_by_source(corpus);
    let n = by.len();
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for c in corpus.documents() {
                if by[i].iter().any(|d| cites(d, c)) && by[j].iter().any(|d| cites(d, c)) {
                    m[i][j] += 1;
                }
            }
        }
    }
    m
}

/// Keyword co-occurrence by scanning every document for every term pair.
pub fn naive_cooccurrence(docs: &[DocumentRecord], terms: &[String]) -> Vec<Vec<u32>> {
    let n = terms.len();
    let mut m = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for d in docs {
                let kw = d.keyword_set();
                if kw.contains(&terms[i]) && kw.contains(&terms[j]) {
                    m[i][j] += 1;
                }
            }
        }
    }
    m
}

/// Phrase match of `term` against title, abstract or any single keyword.
pub fn text_match(d: &DocumentRecord, term: &str) -> bool {
    let needle = tokenize(term);
    let hit = |text: &str| {
        let hay = tokenize(text);
        !needle.is_empty() && hay.len() >= needle.len() && (0..=hay.len() - needle.len()).any(|s| hay[s..s + needle.len()] == needle[..])
    };
    hit(&d.title) || hit(&d.abstract_text) || d.author_keywords.iter().chain(&d.index_keywords).any(|k| hit(k))
}

/// Random symmetric similarity on `n` nodes with edge probability `p`.
pub fn random_sim(n: usize, p: f64, rng: &mut ChaCha8Rng) -> SimilarityMatrix {
    let mut s = SimilarityMatrix::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                s.set(i, j, rng.gen_range(0.05..1.0));
            }
        }
    }
    s
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i:03}")).collect()
}

/// Best quality over every partition of `n` nodes (restricted growth strings).
pub fn brute_force_optimum(sim: &SimilarityMatrix, resolution: f64) -> f64 {
    let n = sim.n();
    let mut a = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    fn rec(k: usize, maxc: usize, a: &mut Vec<usize>, sim: &SimilarityMatrix, gamma: f64, best: &mut f64) {
        if k == a.len() {
            let mut v = 0.0;
            for i in 0..a.len() {
                for j in i + 1..a.len() {
                    if a[i] == a[j] {
                        v += sim.get(i, j) - gamma;
                    }
                }
            }
            *best = best.max(v);
            return;
        }
        for c in 0..=maxc + 1 {
            a[k] = c;
            rec(k + 1, maxc.max(c), a, sim, gamma, best);
        }
    }
    if n == 0 {
        return 0.0;
    }
    a[0] = 0;
    rec(1, 0, &mut a, sim, resolution, &mut best);
    best
}

/// Planted clique of `k` nodes in an Erdős-Rényi background.
pub fn planted_clique(n: usize, k: usize, p: f64, seed: u64) -> (SimilarityMatrix, Vec<String>, BTreeSet<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = random_sim(n, p, &mut rng);
    let ids = ids(n);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let members: Vec<usize> = nodes[..k].to_vec();
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            s.set(i, j, rng.gen_range(0.5..1.0));
        }
    }
    let subset = members.iter().map(|&i| ids[i].clone()).collect();
    (s, ids, subset)
}

/// Pipeline participation against a per-document scan.
pub fn pp_oracle_holds(documents: usize, sources: usize, seed: u64) -> usize {
    let ws = tempfile::tempdir().unwrap();
    let params = SynthParams {
        documents,
        sources,
        seed,
        ..Default::default()
    };
    let cfg_path = write_synthetic_workspace(ws.path(), &params).unwrap();
    let mut cfg = PipelineConfig::load(&cfg_path).unwrap();
    cfg.descriptors.min_occurrence = 2;
    let out = ws.path().join("out");
    for s in [Stage::Ingest, Stage::Descriptors, Stage::Participate] {
        run_single(&cfg, &out, s).unwrap();
    }
    let dset: DescriptorSet =
        serde_json::from_slice(&std::fs::read(out.join("descriptors/descriptors.json")).unwrap()).unwrap();
    assert!(!dset.primary.is_empty());
    let rows = read_participation_csv(std::fs::read(out.join("participate/participation.csv")).unwrap().as_slice())
        .unwrap();

    let corpus = sciencemap::synth::generate(&params).corpus;
    let base = cfg.query.base_query();
    let mut want: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for sid in corpus.source_ids() {
        let st = corpus.source(&sid).unwrap().source_type;
        if !base.source_types.is_empty() && !base.source_types.contains(&st) {
            continue;
        }
        let docs: Vec<_> = corpus
            .documents()
            .iter()
            .filter(|d| d.source_id == sid && base.years.contains(d.year))
            .filter(|d| base.doc_types.is_empty() || base.doc_types.contains(&d.doc_type))
            .collect();
        if docs.is_empty() {
            continue;
        }
        let nra = dset
            .primary
            .iter()
            .map(|p| {
                let terms = dset.match_terms(p);
                docs.iter().filter(|d| terms.iter().any(|t| text_match(d, t))).count() as u64
            })
            .max()
            .unwrap();
        want.insert(sid, (docs.len() as u64, nra));
    }
    assert_eq!(rows.len(), want.len());
    for r in &rows {
        let (tna, nra) = want[&r.source_id];
        assert_eq!((r.tna, r.nra), (tna, nra), "{}", r.source_id);
        // exact rational: 100 * nra / tna with integer cross-multiplication
        assert_eq!(r.pp * tna as f64, (100 * nra) as f64);
        assert_eq!(r.pp, 100.0 * nra as f64 / tna as f64);
    }
    rows.len()
}
