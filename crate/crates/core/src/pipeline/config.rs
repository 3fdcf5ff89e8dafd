use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{CorpusQuery, DocType, QueryOrder, SearchField, SourceType, YearRange};
use crate::participation::default_thresholds;

/// Full pipeline configuration, read from TOML. Relative paths resolve
/// against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub query: QueryConfig,
    pub descriptors: DescriptorConfig,
    pub bands: BandConfig,
    pub simnet: SimnetConfig,
    pub map: MapConfig,
    pub cluster: ClusterConfig,
    pub overlay: OverlayConfig,
    pub categraph: CategraphConfig,
    pub seeds: Seeds,
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub corpus: PathBuf,
    pub categories: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub variant_rules: Option<PathBuf>,
    /// Label every source with PP > 0 as related when no labels file is given.
    pub heuristic_labels: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    pub term_core: String,
    /// Size of the core-term sample that feeds keyword extraction.
    pub sample_limit: usize,
    pub fields: Vec<SearchField>,
    pub source_types: Vec<SourceType>,
    pub doc_types: Vec<DocType>,
    pub years: [i32; 2],
    pub language: Option<String>,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            term_core: "e-learning".into(),
            sample_limit: 2000,
            fields: vec![SearchField::Title, SearchField::Abstract, SearchField::Keywords],
            source_types: vec![SourceType::Journal, SourceType::Proceeding],
            doc_types: Vec::new(),
            years: [1900, 2100],
            language: None,
        }
    }
}

impl QueryConfig {
    /// Filters without terms or limit.
    pub fn base_query(&self) -> CorpusQuery {
        CorpusQuery {
            term_set: Vec::new(),
            fields: self.fields.iter().copied().collect(),
            source_types: self.source_types.iter().copied().collect(),
            doc_types: self.doc_types.iter().copied().collect(),
            years: YearRange(self.years[0], self.years[1]),
            language: self.language.clone(),
            limit: None,
            order: QueryOrder::CitationCountDesc,
        }
    }

    pub fn sample_query(&self) -> CorpusQuery {
        CorpusQuery {
            term_set: vec![self.term_core.clone()],
            limit: NonZeroUsize::new(self.sample_limit),
            ..self.base_query()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorConfig {
    pub min_occurrence: u32,
    pub top_n: usize,
    pub dehyphenate: bool,
    pub despace: bool,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            min_occurrence: 5,
            top_n: 51,
            dehyphenate: true,
            despace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandConfig {
    pub thresholds: Vec<f64>,
    pub min_avg_pp: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            thresholds: default_thresholds(),
            min_avg_pp: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimnetConfig {
    /// Citation, co-citation, coupling.
    pub weights: [f64; 3],
}

impl Default for SimnetConfig {
    fn default() -> Self {
        SimnetConfig {
            weights: [1.0, 1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub density_bandwidth: f64,
    pub density_grid: [usize; 2],
    pub svg_size: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            tol: crate::vosmap::DEFAULT_TOL,
            max_iter: crate::vosmap::DEFAULT_MAX_ITER,
            density_bandwidth: 0.08,
            density_grid: [160, 160],
            svg_size: 800.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub resolution: f64,
    pub restarts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            resolution: 0.01,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlayConfig {
    pub permutations: usize,
    pub core_quantile: f64,
    pub svg_size: f64,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        OverlayConfig {
            permutations: crate::overlay::DEFAULT_PERMUTATIONS,
            core_quantile: crate::overlay::DEFAULT_CORE_QUANTILE,
            svg_size: 800.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategraphConfig {
    /// Ideal edge length; `sqrt(1 / n)` when absent.
    pub k: Option<f64>,
    pub iterations: usize,
    pub colors: BTreeMap<String, String>,
    pub svg_size: f64,
}

impl Default for CategraphConfig {
    fn default() -> Self {
        CategraphConfig {
            k: None,
            iterations: crate::categraph::DEFAULT_ITERATIONS,
            colors: BTreeMap::new(),
            svg_size: 700.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub layout: u64,
    pub cluster: u64,
    pub permutation: u64,
    pub categraph: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            layout: 1,
            cluster: 2,
            permutation: 3,
            categraph: 4,
        }
    }
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Seeds {
            layout: seed,
            cluster: seed,
            permutation: seed,
            categraph: seed,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: InputConfig::default(),
            query: QueryConfig::default(),
            descriptors: DescriptorConfig::default(),
            bands: BandConfig::default(),
            simnet: SimnetConfig::default(),
            map: MapConfig::default(),
            cluster: ClusterConfig::default(),
            overlay: OverlayConfig::default(),
            categraph: CategraphConfig::default(),
            seeds: Seeds::default(),
            output_dir: None,
            base_dir: PathBuf::from("."),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks value ranges. File existence is checked by the stage that
    /// reads each file.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.input.corpus.as_os_str().is_empty() {
            return bad("input.corpus is required");
        }
        if self.query.term_core.trim().is_empty() {
            return bad("query.term_core is empty");
        }
        if self.query.years[0] > self.query.years[1] {
            return bad("query.years is an empty range");
        }
        if self.query.sample_limit == 0 {
            return bad("query.sample_limit must be positive");
        }
        if self.descriptors.top_n == 0 {
            return bad("descriptors.top_n must be positive");
        }
        let t = &self.bands.thresholds;
        if t.is_empty() || t.windows(2).any(|w| !(w[0] > w[1])) {
            return bad("bands.thresholds must be strictly descending");
        }
        let w = &self.simnet.weights;
        if w.iter().any(|x| !(*x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return bad("simnet.weights must be non-negative and not all zero");
        }
        if !(self.map.tol > 0.0) || self.map.max_iter == 0 {
            return bad("map.tol and map.max_iter must be positive");
        }
        if !(self.map.density_bandwidth > 0.0) || self.map.density_grid.contains(&0) {
            return bad("map.density_bandwidth and map.density_grid must be positive");
        }
        if !(self.cluster.resolution > 0.0) || self.cluster.restarts == 0 {
            return bad("cluster.resolution and cluster.restarts must be positive");
        }
        if self.overlay.permutations < 100 {
            return bad("overlay.permutations must be at least 100");
        }
        if !(0.0..1.0).contains(&self.overlay.core_quantile) {
            return bad("overlay.core_quantile must lie in [0, 1)");
        }
        if self.categraph.iterations == 0 || self.categraph.k.is_some_and(|k| !(k > 0.0)) {
            return bad("categraph.iterations and categraph.k must be positive");
        }
        Ok(())
    }
}
