//! File-based orchestration of the stages.
//!
//! Every stage reads its inputs from the output directory (or, for `ingest`,
//! `descriptors` and `bands`, from files named in the config), writes its
//! artifacts under `<out>/<stage>/`, and records a `manifest.json` with the
//! content hashes of everything it read and wrote. Before a stage runs, the
//! manifests of all upstream stages are checked; a missing manifest is a
//! [`PipelineError::MissingArtifact`], a modified, superseded or
//! misconfigured upstream artifact is a [`PipelineError::StaleArtifact`].

mod artifacts;
mod config;
mod stages;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use artifacts::{hash_file, read_manifest, sha256_hex, Manifest, Stage};
pub use config::{
    BandConfig, CategraphConfig, ClusterConfig, DescriptorConfig, InputConfig, MapConfig, OverlayConfig,
    PipelineConfig, QueryConfig, Seeds, SimnetConfig,
};
pub use stages::{
    run_stage, stage_params, DescriptorSummary, GraphSummary, IngestSummary, ParticipationSummary, Selection,
    SimnetSummary,
};

use crate::corpus::{write_categories, write_csv_v1};
use crate::overlay::{CohesionReport, CoreStats, OverlaySidecar};
use crate::participation::{read_bands_csv, replay_bands, select_cutoff, BandReplay, BandRow};
use crate::synth::{generate, SynthParams, THEME_CORE};
use crate::vosmap::Clustering;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: input file {} does not exist", path.display())]
    MissingInput { stage: Stage, path: PathBuf },
    #[error("{stage}: {}: {source}", path.display())]
    Io {
        stage: Stage,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{stage}: bad data in {input}: {message}")]
    Data { stage: Stage, input: String, message: String },
    #[error("{stage}: missing artifact from stage {needs} ({}); run `{needs}` first", path.display())]
    MissingArtifact { stage: Stage, needs: Stage, path: PathBuf },
    #[error("{stage}: stale artifact from stage {needs}: {reason}")]
    StaleArtifact { stage: Stage, needs: Stage, reason: String },
}

impl PipelineError {
    pub(crate) fn io(stage: Stage, path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            stage,
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 config, 3 data, 4 stage dependency.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingInput { .. } => 2,
            PipelineError::Io { .. } | PipelineError::Data { .. } => 3,
            PipelineError::MissingArtifact { .. } | PipelineError::StaleArtifact { .. } => 4,
        }
    }
}

/// Summary written to `report.json` after a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub documents: usize,
    pub sources: usize,
    pub sample_size: usize,
    pub keyword_count: usize,
    pub primary_count: usize,
    pub secondary_count: usize,
    pub descriptor_count: usize,
    pub participation_rows: usize,
    pub zero_tna_sources: usize,
    pub band_table: Vec<BandRow>,
    pub cutoff: f64,
    pub included: u64,
    pub unrelated: u64,
    pub selected_count: usize,
    pub network_links: usize,
    pub channel_weights: [f64; 3],
    pub warnings: Vec<String>,
    pub layout_converged: bool,
    pub layout_iterations: usize,
    pub cluster_count: usize,
    pub cluster_quality: f64,
    pub cohesion: CohesionReport,
    pub core: CoreStats,
    pub category_graph: GraphSummary,
}

impl RunReport {
    /// Cross-field consistency problems, empty when the report is coherent.
    pub fn inconsistencies(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.selected_count as u64 != self.included - self.unrelated {
            out.push(format!(
                "selected {} != included {} - unrelated {}",
                self.selected_count, self.included, self.unrelated
            ));
        }
        match self.band_table.iter().find(|b| b.threshold_percent == self.cutoff) {
            Some(b) if b.included == self.included && b.errors == self.unrelated => {}
            _ => out.push("cutoff band does not match included/unrelated".into()),
        }
        if self.cohesion.subset_size != self.selected_count {
            out.push("cohesion subset size differs from the selection".into());
        }
        if self.descriptor_count != self.primary_count + self.secondary_count {
            out.push("descriptor count is not primary + secondary".into());
        }
        if self.core.core_set.len() > self.selected_count {
            out.push("core larger than the selection".into());
        }
        if self.participation_rows + self.zero_tna_sources != self.sources {
            out.push("participation rows and zero-TNA sources do not cover all sources".into());
        }
        out
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(out: &Path, rel: &str) -> Result<T, PipelineError> {
    let path = out.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| PipelineError::io(Stage::Overlay, &path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| PipelineError::Data {
        stage: Stage::Overlay,
        input: rel.into(),
        message: e.to_string(),
    })
}

/// Assembles `report.json` from the stage artifacts in `out`.
pub fn build_report(out: &Path) -> Result<RunReport, PipelineError> {
    let ingest: IngestSummary = read_json(out, "ingest/summary.json")?;
    let desc: DescriptorSummary = read_json(out, "descriptors/summary.json")?;
    let part: ParticipationSummary = read_json(out, "participate/summary.json")?;
    let sel: Selection = read_json(out, "bands/selection.json")?;
    let net: SimnetSummary = read_json(out, "simnet/summary.json")?;
    let layout: crate::layout::MapLayout = read_json(out, "map/layout.json")?;
    let clustering: Clustering = read_json(out, "cluster/clustering.json")?;
    let overlay: OverlaySidecar = read_json(out, "overlay/overlay.json")?;
    let graph: GraphSummary = read_json(out, "categraph/summary.json")?;
    Ok(RunReport {
        documents: ingest.documents,
        sources: ingest.sources,
        sample_size: desc.sample_size,
        keyword_count: desc.keyword_count,
        primary_count: desc.primary_count,
        secondary_count: desc.secondary_count,
        descriptor_count: desc.descriptor_count,
        participation_rows: part.rows,
        zero_tna_sources: part.zero_tna.len(),
        band_table: sel.table,
        cutoff: sel.cutoff,
        included: sel.included,
        unrelated: sel.unrelated,
        selected_count: sel.selected_count,
        network_links: net.links,
        channel_weights: net.weights,
        warnings: net.warnings,
        layout_converged: layout.converged,
        layout_iterations: layout.iterations,
        cluster_count: clustering.cluster_count(),
        cluster_quality: clustering.quality,
        cohesion: overlay.cohesion,
        core: overlay.core,
        category_graph: graph,
    })
}

/// Runs every stage in order and writes `report.json`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(Stage::Ingest, out, e))?;
    for stage in Stage::ALL {
        run_stage(cfg, out, stage)?;
    }
    let report = build_report(out)?;
    let mut text = serde_json::to_vec_pretty(&report).expect("report serializes");
    text.push(b'\n');
    let path = out.join("report.json");
    std::fs::write(&path, text).map_err(|e| PipelineError::io(Stage::Categraph, &path, e))?;
    Ok(report)
}

/// Runs one stage after validating the config.
pub fn run_single(cfg: &PipelineConfig, out: &Path, stage: Stage) -> Result<(), PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(stage, out, e))?;
    run_stage(cfg, out, stage)
}

/// Recomputes error% and average columns of a published band table and
/// renders it as CSV with both the printed and recomputed error%.
pub fn replay_band_file(path: &Path, min_avg_pp: f64) -> Result<(BandReplay, Option<f64>, String), PipelineError> {
    let bytes = std::fs::read(path).map_err(|_| PipelineError::MissingInput {
        stage: Stage::Participate,
        path: path.to_path_buf(),
    })?;
    let published = read_bands_csv(bytes.as_slice()).map_err(|e| PipelineError::Data {
        stage: Stage::Participate,
        input: path.display().to_string(),
        message: e.to_string(),
    })?;
    let replay = replay_bands(&published);
    let cutoff = select_cutoff(&replay.rows, min_avg_pp).ok();
    let mut text = String::from("band,threshold,publications,errors,error_percent,printed_error_percent,avg_pp\n");
    for ((row, printed, _), r) in published.iter().zip(&replay.rows) {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.band_index,
            r.threshold_percent,
            r.included,
            r.errors,
            r.error_percent,
            printed.map_or(String::new(), |p| p.to_string()),
            r.avg_pp
        ));
        debug_assert_eq!(row.band_index, r.band_index);
    }
    Ok((replay, cutoff, text))
}

/// Writes a synthetic corpus, its categories, labels and a matching config
/// into `dir`. Returns the config path.
pub fn write_synthetic_workspace(dir: &Path, params: &SynthParams) -> Result<PathBuf, PipelineError> {
    let cfg_err = |e: std::io::Error| PipelineError::io(Stage::Ingest, dir, e);
    std::fs::create_dir_all(dir).map_err(cfg_err)?;
    let synth = generate(params);
    let data = |e: crate::corpus::CorpusError| PipelineError::Data {
        stage: Stage::Ingest,
        input: "synthetic corpus".into(),
        message: e.to_string(),
    };
    let mut buf = Vec::new();
    write_csv_v1(&synth.corpus, &mut buf).map_err(data)?;
    std::fs::write(dir.join("corpus.csv"), &buf).map_err(cfg_err)?;
    let mut buf = Vec::new();
    write_categories(&synth.categories, &mut buf).map_err(data)?;
    std::fs::write(dir.join("categories.csv"), &buf).map_err(cfg_err)?;
    let mut buf = Vec::new();
    synth.labels.write_csv(&mut buf).map_err(|e| PipelineError::Data {
        stage: Stage::Bands,
        input: "synthetic labels".into(),
        message: e.to_string(),
    })?;
    std::fs::write(dir.join("labels.csv"), &buf).map_err(cfg_err)?;

    let mut cfg = PipelineConfig::default();
    cfg.input.corpus = "corpus.csv".into();
    cfg.input.categories = Some("categories.csv".into());
    cfg.input.labels = Some("labels.csv".into());
    cfg.query.term_core = THEME_CORE.into();
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml_string()).map_err(cfg_err)?;
    Ok(path)
}
