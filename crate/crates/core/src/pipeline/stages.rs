use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::{check_dependencies, sha256_hex, Stage, StageWriter};
use super::{PipelineConfig, PipelineError};
use crate::categraph::{build_category_graph, export_graph, fr_layout, render_graph_svg};
use crate::corpus::{load_categories, read_csv_v1, write_categories, write_csv_v1, Corpus};
use crate::descriptors::{
    association_strength, build_cooccurrence, expand_secondary, extract_keywords, select_primary,
    DescriptorSet, VariantRules,
};
use crate::layout::MapLayout;
use crate::overlay::{category_shares, cohesion, core_extract, make_overlay, render_overlay_svg, OverlaySidecar};
use crate::participation::{
    band_table, correspondence, participation_rows, read_participation_csv, select_cutoff, selected_publications,
    write_bands_csv, write_participation_csv, BandRow, Relatedness, RelatednessLabels,
};
use crate::similarity::{read_vos_network, write_vos_map, write_vos_network, SimilarityMatrix};
use crate::simnet::{citation_counts, cocitation_counts, combine_channels, coupling_counts, write_channels_csv};
use crate::vosmap::{density_field, render_density_svg, vos_cluster, vos_layout, write_map_file, Clustering};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub documents: usize,
    pub sources: usize,
    pub categorized_sources: usize,
    pub unmatched_category_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSummary {
    pub sample_size: usize,
    pub keyword_count: usize,
    pub primary_count: usize,
    pub secondary_count: usize,
    pub descriptor_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationSummary {
    pub rows: usize,
    pub zero_tna: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub labels: String,
    pub cutoff: f64,
    pub included: u64,
    pub unrelated: u64,
    pub selected_count: usize,
    pub selected: Vec<String>,
    pub table: Vec<BandRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimnetSummary {
    pub sources: usize,
    pub links: usize,
    pub weights: [f64; 3],
    pub warnings: Vec<String>,
    pub references_total: usize,
    pub references_resolved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub uncategorized: usize,
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

fn data_err(stage: Stage, input: impl Into<String>, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Data {
        stage,
        input: input.into(),
        message: e.to_string(),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(stage: Stage, rel: &str, bytes: &[u8]) -> Result<T, PipelineError> {
    serde_json::from_slice(bytes).map_err(|e| data_err(stage, rel, e))
}

fn csv_bytes<F, E>(f: F) -> Result<Vec<u8>, E>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), E>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Reads an external input named in the config, or fails with `MissingInput`.
fn read_external(cfg: &PipelineConfig, stage: Stage, path: &Path) -> Result<Vec<u8>, PipelineError> {
    let full = cfg.resolve(path);
    if !full.is_file() {
        return Err(PipelineError::MissingInput { stage, path: full });
    }
    std::fs::read(&full).map_err(|e| PipelineError::io(stage, &full, e))
}

/// Hash of the parameters (and external input contents) a stage depends on.
pub fn stage_params(cfg: &PipelineConfig, stage: Stage) -> String {
    let ext = |p: &Option<std::path::PathBuf>| -> serde_json::Value {
        match p {
            Some(p) => match std::fs::read(cfg.resolve(p)) {
                Ok(b) => sha256_hex(&b).into(),
                Err(_) => "missing".into(),
            },
            None => serde_json::Value::Null,
        }
    };
    let v = match stage {
        Stage::Ingest => serde_json::json!({
            "corpus": ext(&Some(cfg.input.corpus.clone())),
            "categories": ext(&cfg.input.categories),
        }),
        Stage::Descriptors => serde_json::json!({
            "query": cfg.query,
            "descriptors": cfg.descriptors,
            "rules": ext(&cfg.input.variant_rules),
        }),
        Stage::Participate => serde_json::json!({ "query": cfg.query }),
        Stage::Bands => serde_json::json!({
            "bands": cfg.bands,
            "labels": ext(&cfg.input.labels),
            "heuristic": cfg.input.heuristic_labels,
        }),
        Stage::Simnet => serde_json::json!({ "simnet": cfg.simnet }),
        Stage::Map => serde_json::json!({ "map": cfg.map, "seed": cfg.seeds.layout }),
        Stage::Cluster => serde_json::json!({ "cluster": cfg.cluster, "seed": cfg.seeds.cluster }),
        Stage::Overlay => serde_json::json!({ "overlay": cfg.overlay, "seed": cfg.seeds.permutation }),
        Stage::Categraph => serde_json::json!({ "categraph": cfg.categraph, "seed": cfg.seeds.categraph }),
    };
    sha256_hex(v.to_string().as_bytes())
}

fn begin<'a>(cfg: &PipelineConfig, out: &'a Path, stage: Stage) -> Result<StageWriter<'a>, PipelineError> {
    check_dependencies(out, stage, &|s| stage_params(cfg, s))?;
    StageWriter::begin(out, stage, stage_params(cfg, stage))
}

fn load_corpus(w: &mut StageWriter, stage: Stage) -> Result<Corpus, PipelineError> {
    let bytes = w.read_artifact("ingest/corpus.csv")?;
    let mut corpus = read_csv_v1(bytes.as_slice()).map_err(|e| data_err(stage, "ingest/corpus.csv", e))?;
    let cats = w.read_artifact("ingest/categories.csv")?;
    let cats = load_categories(cats.as_slice()).map_err(|e| data_err(stage, "ingest/categories.csv", e))?;
    corpus.attach_categories(&cats);
    Ok(corpus)
}

pub fn run_stage(cfg: &PipelineConfig, out: &Path, stage: Stage) -> Result<(), PipelineError> {
    match stage {
        Stage::Ingest => ingest(cfg, out),
        Stage::Descriptors => descriptors(cfg, out),
        Stage::Participate => participate(cfg, out),
        Stage::Bands => bands(cfg, out),
        Stage::Simnet => simnet(cfg, out),
        Stage::Map => map(cfg, out),
        Stage::Cluster => cluster(cfg, out),
        Stage::Overlay => overlay(cfg, out),
        Stage::Categraph => categraph(cfg, out),
    }
}

fn ingest(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Ingest;
    let corpus_path = cfg.resolve(&cfg.input.corpus);
    let corpus_bytes = read_external(cfg, S, &cfg.input.corpus)?;
    let cat_bytes = match &cfg.input.categories {
        Some(p) => Some(read_external(cfg, S, p)?),
        None => None,
    };
    let mut w = begin(cfg, out, S)?;
    w.record_input("input:corpus", &corpus_bytes);
    let mut corpus =
        read_csv_v1(corpus_bytes.as_slice()).map_err(|e| data_err(S, corpus_path.display().to_string(), e))?;
    let mut unmatched = 0;
    if let Some(bytes) = &cat_bytes {
        w.record_input("input:categories", bytes);
        let path = cfg.resolve(cfg.input.categories.as_ref().expect("set"));
        let cats = load_categories(bytes.as_slice()).map_err(|e| data_err(S, path.display().to_string(), e))?;
        unmatched = corpus.attach_categories(&cats);
    }
    let category_map = corpus.category_map();
    w.write(
        "corpus.csv",
        &csv_bytes(|b| write_csv_v1(&corpus, b)).map_err(|e| data_err(S, "ingest/corpus.csv", e))?,
    )?;
    w.write(
        "categories.csv",
        &csv_bytes(|b| write_categories(&category_map, b)).map_err(|e| data_err(S, "ingest/categories.csv", e))?,
    )?;
    w.write(
        "summary.json",
        &json(&IngestSummary {
            documents: corpus.len(),
            sources: corpus.sources().len(),
            categorized_sources: category_map.len(),
            unmatched_category_rows: unmatched,
        }),
    )?;
    w.finish()?;
    Ok(())
}

fn descriptors(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Descriptors;
    let rules_bytes = match &cfg.input.variant_rules {
        Some(p) => Some(read_external(cfg, S, p)?),
        None => None,
    };
    let mut w = begin(cfg, out, S)?;
    let corpus = load_corpus(&mut w, S)?;
    let mut rules = match &rules_bytes {
        Some(b) => {
            w.record_input("input:variant_rules", b);
            VariantRules::from_csv(b.as_slice()).map_err(|e| data_err(S, "variant_rules", e))?
        }
        None => VariantRules::bundled(),
    };
    rules.dehyphenate = cfg.descriptors.dehyphenate;
    rules.despace = cfg.descriptors.despace;

    let sample = corpus.query_documents(&cfg.query.sample_query());
    if sample.is_empty() {
        return Err(data_err(
            S,
            "ingest/corpus.csv",
            format!("no document matches the core term {:?}", cfg.query.term_core),
        ));
    }
    let stats = extract_keywords(sample.iter().copied());
    let cooc = build_cooccurrence(sample.iter().copied(), &stats);
    let sim = association_strength(&cooc);
    let primary = select_primary(
        &sim,
        &stats,
        &cfg.query.term_core,
        cfg.descriptors.min_occurrence,
        cfg.descriptors.top_n,
    )
    .map_err(|e| data_err(S, "ingest/corpus.csv", e))?;
    let dset = expand_secondary(&cfg.query.term_core, &primary, &rules).map_err(|e| data_err(S, "variant_rules", e))?;

    let mut kw = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| data_err(S, "descriptors/keywords.csv", e);
    kw.write_record(["term", "occurrences"]).map_err(io)?;
    for t in &stats {
        kw.write_record([t.term.as_str(), &t.occurrences.to_string()]).map_err(io)?;
    }
    w.write("keywords.csv", &kw.into_inner().map_err(|e| data_err(S, "descriptors/keywords.csv", e))?)?;
    w.write(
        "cooccurrence.csv",
        &csv_bytes(|b| cooc.write_csv(b)).map_err(|e| data_err(S, "descriptors/cooccurrence.csv", e))?,
    )?;
    let labels: Vec<String> = stats.iter().map(|t| t.term.clone()).collect();
    let weights: Vec<f64> = stats.iter().map(|t| f64::from(t.occurrences)).collect();
    w.write("network.txt", &csv_bytes(|b| write_vos_network(b, &sim)).map_err(|e| data_err(S, "network.txt", e))?)?;
    w.write(
        "terms.txt",
        &csv_bytes(|b| write_vos_map(b, &labels, &weights)).map_err(|e| data_err(S, "terms.txt", e))?,
    )?;
    w.write("descriptors.json", &json(&dset))?;
    w.write(
        "summary.json",
        &json(&DescriptorSummary {
            sample_size: sample.len(),
            keyword_count: stats.len(),
            primary_count: dset.primary.len(),
            secondary_count: dset.secondary.len(),
            descriptor_count: dset.len(),
        }),
    )?;
    w.finish()?;
    Ok(())
}

fn participate(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Participate;
    let mut w = begin(cfg, out, S)?;
    let corpus = load_corpus(&mut w, S)?;
    let dset: DescriptorSet = parse_json(S, "descriptors/descriptors.json", &w.read_artifact("descriptors/descriptors.json")?)?;
    let base = cfg.query.base_query();
    let matrix = correspondence(&corpus, &dset, &base).map_err(|e| data_err(S, "descriptors/descriptors.json", e))?;
    let report = participation_rows(&matrix, &corpus, &base);
    w.write(
        "correspondence.csv",
        &csv_bytes(|b| matrix.write_csv(b)).map_err(|e| data_err(S, "correspondence.csv", e))?,
    )?;
    w.write(
        "participation.csv",
        &csv_bytes(|b| write_participation_csv(&report.rows, b)).map_err(|e| data_err(S, "participation.csv", e))?,
    )?;
    w.write(
        "summary.json",
        &json(&ParticipationSummary {
            rows: report.rows.len(),
            zero_tna: report.zero_tna,
        }),
    )?;
    w.finish()?;
    Ok(())
}

fn bands(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Bands;
    let label_bytes = match &cfg.input.labels {
        Some(p) => Some(read_external(cfg, S, p)?),
        None if cfg.input.heuristic_labels => None,
        None => {
            return Err(PipelineError::Config(
                "bands: no labels file configured (set input.labels or input.heuristic_labels)".into(),
            ))
        }
    };
    let mut w = begin(cfg, out, S)?;
    let rows = read_participation_csv(w.read_artifact("participate/participation.csv")?.as_slice())
        .map_err(|e| data_err(S, "participate/participation.csv", e))?;
    let (labels, origin) = match &label_bytes {
        Some(b) => {
            w.record_input("input:labels", b);
            let path = cfg.resolve(cfg.input.labels.as_ref().expect("set"));
            let l = RelatednessLabels::from_csv(b.as_slice()).map_err(|e| data_err(S, path.display().to_string(), e))?;
            (l, "file")
        }
        None => (RelatednessLabels::heuristic(&rows), "heuristic"),
    };
    let table = band_table(&rows, &labels, &cfg.bands.thresholds).map_err(|e| data_err(S, "labels", e))?;
    let cutoff = select_cutoff(&table, cfg.bands.min_avg_pp).map_err(|e| data_err(S, "participate/participation.csv", e))?;
    let selected = selected_publications(&rows, &labels, cutoff);
    let band = table.iter().find(|b| b.threshold_percent == cutoff).expect("cutoff comes from the table");

    w.write("bands.csv", &csv_bytes(|b| write_bands_csv(&table, b)).map_err(|e| data_err(S, "bands.csv", e))?)?;
    // only the labels that matter downstream: every source with a row
    let used = RelatednessLabels(
        rows.iter()
            .map(|r| (r.source_id.clone(), labels.get(&r.source_id)))
            .filter(|(_, l)| *l != Relatedness::Unlabeled)
            .collect(),
    );
    w.write("labels.csv", &csv_bytes(|b| used.write_csv(b)).map_err(|e| data_err(S, "labels.csv", e))?)?;
    let mut sel_txt = selected.join("\n");
    sel_txt.push('\n');
    w.write("selected.txt", sel_txt.as_bytes())?;
    w.write(
        "selection.json",
        &json(&Selection {
            labels: origin.into(),
            cutoff,
            included: band.included,
            unrelated: band.errors,
            selected_count: selected.len(),
            selected,
            table: table.clone(),
        }),
    )?;
    w.finish()?;
    Ok(())
}

fn simnet(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Simnet;
    let mut w = begin(cfg, out, S)?;
    let corpus = load_corpus(&mut w, S)?;
    let (cit, refs) = citation_counts(&corpus);
    let cocit = cocitation_counts(&corpus);
    let coup = coupling_counts(&corpus);
    let combined = combine_channels([&cit, &cocit, &coup], cfg.simnet.weights).map_err(|e| data_err(S, "simnet.weights", e))?;
    w.write(
        "channels.csv",
        &csv_bytes(|b| write_channels_csv(&[&cit, &cocit, &coup], b)).map_err(|e| data_err(S, "channels.csv", e))?,
    )?;
    w.write(
        "network.txt",
        &csv_bytes(|b| write_vos_network(b, &combined.matrix)).map_err(|e| data_err(S, "network.txt", e))?,
    )?;
    let sizes = source_sizes(&corpus, &combined.sources);
    w.write(
        "sources.txt",
        &csv_bytes(|b| write_vos_map(b, &combined.sources, &sizes)).map_err(|e| data_err(S, "sources.txt", e))?,
    )?;
    w.write(
        "summary.json",
        &json(&SimnetSummary {
            sources: combined.sources.len(),
            links: combined.matrix.nnz(),
            weights: combined.weights,
            warnings: combined.warnings.clone(),
            references_total: refs.total,
            references_resolved: refs.resolved,
        }),
    )?;
    w.finish()?;
    Ok(())
}

fn source_sizes(corpus: &Corpus, sources: &[String]) -> Vec<f64> {
    let mut count: BTreeMap<&str, f64> = BTreeMap::new();
    for d in corpus.documents() {
        *count.entry(d.source_id.as_str()).or_default() += 1.0;
    }
    sources.iter().map(|s| count.get(s.as_str()).copied().unwrap_or(0.0)).collect()
}

/// Network plus node labels and weights as written by the simnet stage.
fn load_network(w: &mut StageWriter, stage: Stage) -> Result<(SimilarityMatrix, Vec<String>, Vec<f64>), PipelineError> {
    let map = w.read_artifact("simnet/sources.txt")?;
    let text = String::from_utf8(map).map_err(|e| data_err(stage, "simnet/sources.txt", e))?;
    let mut ids = Vec::new();
    let mut weights = Vec::new();
    for line in text.lines().skip(1) {
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(data_err(stage, "simnet/sources.txt", format!("bad line {line:?}")));
        }
        ids.push(parts[1].to_string());
        weights.push(parts[2].parse().map_err(|e| data_err(stage, "simnet/sources.txt", e))?);
    }
    let net = w.read_artifact("simnet/network.txt")?;
    let sim = read_vos_network(net.as_slice(), ids.len()).map_err(|e| data_err(stage, "simnet/network.txt", e))?;
    Ok((sim, ids, weights))
}

fn map(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Map;
    let mut w = begin(cfg, out, S)?;
    let (sim, ids, weights) = load_network(&mut w, S)?;
    let layout = vos_layout(&sim, &ids, cfg.seeds.layout, cfg.map.max_iter, cfg.map.tol)
        .map_err(|e| data_err(S, "simnet/network.txt", e))?;
    let [gw, gh] = cfg.map.density_grid;
    let field = density_field(&layout, &weights, cfg.map.density_bandwidth, (gw, gh))
        .map_err(|e| data_err(S, "map.density", e))?;
    w.write("layout.json", &json(&layout))?;
    w.write("density.csv", &csv_bytes(|b| field.write_csv(b)).map_err(|e| data_err(S, "density.csv", e))?)?;
    w.write("density.svg", render_density_svg(&field, &layout, None, cfg.map.svg_size).as_bytes())?;
    w.finish()?;
    Ok(())
}

fn cluster(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Cluster;
    let mut w = begin(cfg, out, S)?;
    let (sim, _, weights) = load_network(&mut w, S)?;
    let layout: MapLayout = parse_json(S, "map/layout.json", &w.read_artifact("map/layout.json")?)?;
    let clustering = vos_cluster(&sim, cfg.cluster.resolution, cfg.cluster.restarts, cfg.seeds.cluster)
        .map_err(|e| data_err(S, "simnet/network.txt", e))?;
    w.write("clustering.json", &json(&clustering))?;
    w.write(
        "map.txt",
        &csv_bytes(|b| write_map_file(b, &layout, None, Some(&clustering), &weights)).map_err(|e| data_err(S, "map.txt", e))?,
    )?;
    w.finish()?;
    Ok(())
}

fn overlay(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Overlay;
    let mut w = begin(cfg, out, S)?;
    let (sim, ids, _) = load_network(&mut w, S)?;
    let layout: MapLayout = parse_json(S, "map/layout.json", &w.read_artifact("map/layout.json")?)?;
    let clustering: Clustering = parse_json(S, "cluster/clustering.json", &w.read_artifact("cluster/clustering.json")?)?;
    let selection: Selection = parse_json(S, "bands/selection.json", &w.read_artifact("bands/selection.json")?)?;
    let cats = load_categories(w.read_artifact("ingest/categories.csv")?.as_slice())
        .map_err(|e| data_err(S, "ingest/categories.csv", e))?;
    let subset: BTreeSet<String> = selection.selected.iter().cloned().collect();

    let spec = make_overlay(&layout, Some(&clustering), &subset).map_err(|e| data_err(S, "bands/selection.json", e))?;
    let report = cohesion(&sim, &ids, &subset, cfg.overlay.permutations, cfg.seeds.permutation, Some(&clustering))
        .map_err(|e| data_err(S, "bands/selection.json", e))?;
    let core = core_extract(&sim, &ids, &subset, cfg.overlay.core_quantile).map_err(|e| data_err(S, "bands/selection.json", e))?;
    let stats = category_shares(&core, &cats).map_err(|e| data_err(S, "bands/selection.json", e))?;
    w.write("overlay.svg", render_overlay_svg(&spec, &core, cfg.overlay.svg_size).as_bytes())?;
    w.write(
        "overlay.json",
        &json(&OverlaySidecar {
            cohesion: report,
            core: stats,
        }),
    )?;
    w.finish()?;
    Ok(())
}

fn categraph(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const S: Stage = Stage::Categraph;
    let mut w = begin(cfg, out, S)?;
    let selection: Selection = parse_json(S, "bands/selection.json", &w.read_artifact("bands/selection.json")?)?;
    let cats = load_categories(w.read_artifact("ingest/categories.csv")?.as_slice())
        .map_err(|e| data_err(S, "ingest/categories.csv", e))?;
    let graph = build_category_graph(&selection.selected, &cats);
    if graph.len() >= 2 {
        let k = cfg.categraph.k.unwrap_or_else(|| (1.0 / graph.len() as f64).sqrt());
        let layout = fr_layout(&graph, k, cfg.categraph.iterations, cfg.seeds.categraph)
            .map_err(|e| data_err(S, "bands/selection.json", e))?;
        w.write("graph.json", &json(&export_graph(&graph, &layout)))?;
        w.write(
            "graph.svg",
            render_graph_svg(&graph, &layout, &cfg.categraph.colors, cfg.categraph.svg_size).as_bytes(),
        )?;
    } else {
        // nothing to lay out; keep the node list so the report stays complete
        let layout = MapLayout {
            ids: graph.categories.clone(),
            positions: vec![[0.0, 0.0]; graph.len()],
            converged: true,
            objective_value: 0.0,
            iterations: 0,
        };
        w.write("graph.json", &json(&export_graph(&graph, &layout)))?;
    }
    w.write(
        "summary.json",
        &json(&GraphSummary {
            nodes: graph.len(),
            edges: graph.edges.len(),
            uncategorized: graph.uncategorized.len(),
        }),
    )?;
    w.finish()?;
    Ok(())
}
