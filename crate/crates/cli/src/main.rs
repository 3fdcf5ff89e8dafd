use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sciencemap::pipeline::{
    replay_band_file, run_pipeline, run_single, write_synthetic_workspace, PipelineConfig, PipelineError, Seeds,
    Stage,
};
use sciencemap::synth::SynthParams;

/// Descriptor extraction, participation cut-off and science mapping over a
/// bibliographic corpus.
#[derive(Parser, Debug)]
#[command(name = "sciencemap", version)]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; falls back to SCIENCEMAP_OUT, then the config's output_dir.
    #[arg(long, global = true, env = "SCIENCEMAP_OUT")]
    out: Option<PathBuf>,
    /// Use this seed for every seeded stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Per-field overrides of the config file.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    categories: Option<PathBuf>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    #[arg(long, global = true)]
    variant_rules: Option<PathBuf>,
    #[arg(long, global = true)]
    heuristic_labels: bool,
    #[arg(long, global = true)]
    term_core: Option<String>,
    #[arg(long, global = true)]
    sample_limit: Option<usize>,
    #[arg(long, global = true, num_args = 2, value_names = ["FROM", "TO"])]
    years: Option<Vec<i32>>,
    #[arg(long, global = true)]
    min_occurrence: Option<u32>,
    #[arg(long, global = true)]
    top_n: Option<usize>,
    #[arg(long, global = true)]
    min_avg_pp: Option<f64>,
    /// Citation, co-citation and coupling weights.
    #[arg(long, global = true, num_args = 3, value_names = ["CIT", "COCIT", "COUP"])]
    weights: Option<Vec<f64>>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    resolution: Option<f64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    permutations: Option<usize>,
    #[arg(long, global = true)]
    core_quantile: Option<f64>,
    #[arg(long, global = true)]
    fr_k: Option<f64>,
    #[arg(long, global = true)]
    fr_iterations: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every stage and write report.json.
    Run,
    /// Load the corpus and categories.
    Ingest,
    /// Extract keywords and pick primary and secondary descriptors.
    Descriptors,
    /// Count articles per source and descriptor; compute TNA, NRA and PP.
    Participate {
        /// Replay a published band table (band,threshold,publications,errors,error_percent,avg_pp)
        /// instead of computing participation.
        #[arg(long, value_name = "BANDS_CSV")]
        pp_only: Option<PathBuf>,
    },
    /// Tabulate PP bands against labels and select the cut-off.
    Bands,
    /// Build the citation, co-citation and coupling source network.
    Simnet,
    /// Lay out the source network and render its density map.
    Map,
    /// Cluster the source network.
    Cluster,
    /// Overlay the selected sources, test cohesion, extract the core.
    Overlay,
    /// Build and draw the category co-assignment graph.
    Categraph,
    /// Write a synthetic corpus, categories, labels and config into a directory.
    Synth {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 5000)]
        documents: usize,
        #[arg(long, default_value_t = 500)]
        sources: usize,
    },
}

fn apply(cfg: &mut PipelineConfig, o: Overrides, seed: Option<u64>) {
    if let Some(v) = o.corpus {
        cfg.input.corpus = v;
    }
    if o.categories.is_some() {
        cfg.input.categories = o.categories;
    }
    if o.labels.is_some() {
        cfg.input.labels = o.labels;
    }
    if o.variant_rules.is_some() {
        cfg.input.variant_rules = o.variant_rules;
    }
    if o.heuristic_labels {
        cfg.input.heuristic_labels = true;
    }
    if let Some(v) = o.term_core {
        cfg.query.term_core = v;
    }
    if let Some(v) = o.sample_limit {
        cfg.query.sample_limit = v;
    }
    if let Some(v) = o.years {
        cfg.query.years = [v[0], v[1]];
    }
    if let Some(v) = o.min_occurrence {
        cfg.descriptors.min_occurrence = v;
    }
    if let Some(v) = o.top_n {
        cfg.descriptors.top_n = v;
    }
    if let Some(v) = o.min_avg_pp {
        cfg.bands.min_avg_pp = v;
    }
    if let Some(v) = o.weights {
        cfg.simnet.weights = [v[0], v[1], v[2]];
    }
    if let Some(v) = o.tol {
        cfg.map.tol = v;
    }
    if let Some(v) = o.max_iter {
        cfg.map.max_iter = v;
    }
    if let Some(v) = o.resolution {
        cfg.cluster.resolution = v;
    }
    if let Some(v) = o.restarts {
        cfg.cluster.restarts = v;
    }
    if let Some(v) = o.permutations {
        cfg.overlay.permutations = v;
    }
    if let Some(v) = o.core_quantile {
        cfg.overlay.core_quantile = v;
    }
    if o.fr_k.is_some() {
        cfg.categraph.k = o.fr_k;
    }
    if let Some(v) = o.fr_iterations {
        cfg.categraph.iterations = v;
    }
    if let Some(s) = seed {
        cfg.seeds = Seeds::all(s);
    }
}

fn stage_of(cmd: &Command) -> Option<Stage> {
    Some(match cmd {
        Command::Ingest => Stage::Ingest,
        Command::Descriptors => Stage::Descriptors,
        Command::Participate { .. } => Stage::Participate,
        Command::Bands => Stage::Bands,
        Command::Simnet => Stage::Simnet,
        Command::Map => Stage::Map,
        Command::Cluster => Stage::Cluster,
        Command::Overlay => Stage::Overlay,
        Command::Categraph => Stage::Categraph,
        Command::Run | Command::Synth { .. } => return None,
    })
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Synth {
            dir,
            documents,
            sources,
        } => {
            let params = SynthParams {
                documents: *documents,
                sources: *sources,
                seed: cli.seed.unwrap_or(SynthParams::default().seed),
                ..Default::default()
            };
            if *documents < *sources || *sources == 0 {
                return Err(PipelineError::Config("synth needs at least one document per source".into()));
            }
            let path = write_synthetic_workspace(dir, &params)?;
            println!("wrote {}", path.display());
            return Ok(());
        }
        Command::Participate { pp_only: Some(file) } => {
            let min = cli.overrides.min_avg_pp.unwrap_or(50.0);
            let (replay, cutoff, table) = replay_band_file(file, min)?;
            print!("{table}");
            for (band, printed, ours) in &replay.mismatches {
                println!("# band {band}: printed error% {printed}, recomputed {ours}");
            }
            match cutoff {
                Some(c) => {
                    let row = replay.rows.iter().find(|r| r.threshold_percent == c).expect("cutoff row");
                    println!(
                        "# cutoff {c} (min avg PP {min}): {} included, {} unrelated, {} selected",
                        row.included,
                        row.errors,
                        row.selected()
                    );
                }
                None => println!("# no band reaches avg PP {min}"),
            }
            return Ok(());
        }
        _ => {}
    }

    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| PipelineError::Config("--config is required".into()))?;
    let mut cfg = PipelineConfig::load(config_path)?;
    apply(&mut cfg, cli.overrides, cli.seed);
    let out = cli
        .out
        .or_else(|| cfg.output_dir.as_ref().map(|p| cfg.resolve(p)))
        .ok_or_else(|| PipelineError::Config("no output directory: pass --out or set SCIENCEMAP_OUT".into()))?;

    match stage_of(&cli.command) {
        Some(stage) => {
            run_single(&cfg, &out, stage)?;
            println!("{stage}: ok ({})", out.join(stage.name()).display());
        }
        None => {
            let r = run_pipeline(&cfg, &out)?;
            println!(
                "{} documents, {} sources; {} keywords, {} descriptors ({} primary + {} secondary)",
                r.documents, r.sources, r.keyword_count, r.descriptor_count, r.primary_count, r.secondary_count
            );
            println!(
                "cut-off PP > {}: {} included, {} unrelated, {} selected",
                r.cutoff, r.included, r.unrelated, r.selected_count
            );
            println!(
                "{} clusters; cohesion ratio {:.2}, permutation p {}; core of {}",
                r.cluster_count,
                r.cohesion.ratio,
                r.cohesion.permutation_p,
                r.core.core_set.len()
            );
            println!("report: {}", out.join("report.json").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
