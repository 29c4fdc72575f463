use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use cesgraph::ces::classify;
use cesgraph::community::{detect, Partition};
use cesgraph::cooccur::build_network;
use cesgraph::export::{export_graph, read_any, AnnotatedGraph, ExportFormat};
use cesgraph::ingest::write_posts;
use cesgraph::pipeline::{
    load_area, partition_csv, run_areas, run_merged, AreaConfig, PartitionRow, PipelineError, RunConfig,
};
use cesgraph::synth::{derive_seed, generate_synthetic, case_study_plans, planted_plan, AREA_NAMES};

#[derive(Parser)]
#[command(name = "cesgraph", version, about = "Hashtag co-occurrence networks: clean, build, analyze, merge, export")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    k_top: Option<usize>,
    #[arg(long, global = true)]
    pair_budget: Option<usize>,
    #[arg(long, global = true, action = ArgAction::Set, value_parser = clap::value_parser!(bool))]
    weighted_betweenness: Option<bool>,
}

/// One area given directly on the command line instead of through a config.
#[derive(Args, Default)]
struct AdHocArea {
    /// JSONL post files for a single area.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    /// Cleaning rules (JSON).
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Area name; with --config, restricts the run to this area.
    #[arg(long)]
    area: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply cleaning rules and write cleaned posts plus a cleaning summary.
    Clean(AdHocArea),
    /// Build the top-k co-occurrence network of each area.
    Build(AdHocArea),
    /// Full per-area analysis: centralities, communities, CES labels, exports.
    Analyze(AdHocArea),
    /// Per-area analysis followed by the merged multi-area network.
    Merge,
    /// Label the communities of an exported graph with CES classes.
    Classify {
        #[arg(long)]
        graph: PathBuf,
        /// Lexicon JSON (defaults to the config's, then the built-in one).
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Convert an exported graph to another format.
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        format: Vec<FormatArg>,
        #[arg(long, default_value = "graph")]
        stem: String,
    },
    /// Write synthetic corpora, their rules and ledgers, and a config that runs them.
    Synth {
        #[arg(long, value_enum, default_value = "case-studies")]
        preset: Preset,
        #[arg(long, default_value_t = 14)]
        areas: usize,
        #[arg(long, default_value_t = 10_000)]
        posts: usize,
        /// Planted themes per area (planted preset only).
        #[arg(long, default_value_t = 3)]
        themes: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Graphml,
    Dot,
    EdgeCsv,
    ReportJson,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Graphml => ExportFormat::Graphml,
            FormatArg::Dot => ExportFormat::Dot,
            FormatArg::EdgeCsv => ExportFormat::EdgeCsv,
            FormatArg::ReportJson => ExportFormat::ReportJson,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    CaseStudies,
    Planted,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn input_error(message: impl std::fmt::Display) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

fn analysis_error(message: impl std::fmt::Display) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn base_config(g: &Global) -> Result<RunConfig, Failure> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(k) = g.k_top {
        cfg.k_top = k;
    }
    if let Some(b) = g.pair_budget {
        cfg.pair_budget = b;
    }
    if let Some(w) = g.weighted_betweenness {
        cfg.weighted_betweenness = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Config restricted to the areas a subcommand should touch.
fn area_config(g: &Global, adhoc: &AdHocArea) -> Result<RunConfig, Failure> {
    let mut cfg = base_config(g)?;
    if !adhoc.inputs.is_empty() {
        let name = adhoc.area.clone().unwrap_or_else(|| "area".into());
        cfg.areas = vec![AreaConfig { name, inputs: adhoc.inputs.clone(), rules: adhoc.rules.clone() }];
    } else if let Some(name) = &adhoc.area {
        cfg.areas = vec![cfg.area(name)?.clone()];
    }
    if cfg.areas.is_empty() {
        return Err(input_error("no areas: pass --config or --input"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn cmd_clean(cfg: &RunConfig) -> Result<(), Failure> {
    for area in &cfg.areas {
        let (corpus, summary) = load_area(area)?;
        let dir = cfg.area_dir(&area.name);
        create_dir(&dir)?;
        let path = dir.join("clean.jsonl");
        let file = fs::File::create(&path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        write_posts(&mut out, &corpus.raw_posts())
            .and_then(|_| out.flush())
            .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        write_file(&dir.join("cleaning_summary.json"), &json(&summary))?;
        println!("{}: {} of {} posts retained", area.name, summary.retained_posts, summary.input_posts);
    }
    Ok(())
}

fn cmd_build(cfg: &RunConfig) -> Result<(), Failure> {
    for area in &cfg.areas {
        let (corpus, _) = load_area(area)?;
        let net = build_network(&corpus, cfg.k_top).map_err(|e| analysis_error(format!("build stage failed for {}: {e}", area.name)))?;
        let dir = cfg.area_dir(&area.name);
        create_dir(&dir)?;
        let a = AnnotatedGraph::new(net.graph.clone());
        for f in [ExportFormat::Graphml, ExportFormat::EdgeCsv] {
            export_graph(&a, &dir, "network", f).map_err(input_error)?;
        }
        println!(
            "{}: {} vertices, {} edges, coverage {:.4}",
            area.name,
            net.graph.vertex_count(),
            net.graph.edge_count(),
            net.coverage
        );
    }
    Ok(())
}

fn cmd_analyze(cfg: &RunConfig) -> Result<(), Failure> {
    for run in run_areas(cfg)? {
        let r = &run.report;
        println!(
            "{}: {} vertices, {} edges, {} communities, Q = {:.4}",
            r.area, r.network.vertices, r.network.edges, r.communities.community_count, r.communities.modularity
        );
    }
    Ok(())
}

fn cmd_merge(cfg: &RunConfig) -> Result<(), Failure> {
    let (_, merged) = run_merged(cfg)?;
    let n = &merged.report.network;
    println!(
        "merged: {} areas, {} vertices, {} edges, weight coverage {:.4}, Q = {:.4}",
        n.areas.len(),
        n.vertices,
        n.edges,
        n.weight_coverage,
        merged.report.communities.modularity
    );
    Ok(())
}

fn cmd_classify(cfg: &RunConfig, graph: &Path, lexicon: Option<&Path>) -> Result<(), Failure> {
    let a = read_any(graph).map_err(input_error)?;
    let lex = match lexicon {
        Some(p) => cesgraph::ces::CesLexicon::load(p).map_err(input_error)?,
        None => cfg.lexicon()?,
    };
    let partition = match &a.community {
        Some(assignment) => Partition {
            assignment: assignment.clone(),
            q: cesgraph::community::modularity(&a.graph, assignment).map_err(analysis_error)?,
        },
        None => detect(&a.graph).1,
    };
    let labels = classify(&partition, &a.graph, &lex).map_err(analysis_error)?;
    let rows: Vec<PartitionRow> = a
        .graph
        .vertices()
        .iter()
        .zip(&partition.assignment)
        .map(|(v, &c)| PartitionRow {
            label: v.label.clone(),
            community: c,
            ces_classes: labels[c].classes.iter().map(|h| h.class.clone()).collect(),
        })
        .collect();
    create_dir(&cfg.out_dir)?;
    write_file(&cfg.out_dir.join("partition.csv"), &partition_csv(&rows))?;
    write_file(&cfg.out_dir.join("ces_labels.json"), &json(&labels))?;
    for l in &labels {
        let names = if l.unmatched { "unmatched".to_owned() } else { l.class_names().join("; ") };
        println!("community {} ({} tags): {}", l.community, l.size, names);
    }
    Ok(())
}

fn cmd_export(cfg: &RunConfig, graph: &Path, formats: &[FormatArg], stem: &str) -> Result<(), Failure> {
    let a = read_any(graph).map_err(input_error)?;
    create_dir(&cfg.out_dir)?;
    let formats: Vec<ExportFormat> = if formats.is_empty() {
        ExportFormat::ALL.to_vec()
    } else {
        formats.iter().map(|&f| f.into()).collect()
    };
    for f in formats {
        for p in export_graph(&a, &cfg.out_dir, stem, f).map_err(input_error)? {
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn cmd_synth(cfg: &RunConfig, preset: Preset, areas: usize, posts: usize, themes: usize) -> Result<(), Failure> {
    if areas == 0 || posts == 0 {
        return Err(input_error("--areas and --posts must be positive"));
    }
    let plans = match preset {
        Preset::CaseStudies => case_study_plans(areas, posts, cfg.seed),
        Preset::Planted => (0..areas)
            .map(|i| {
                let name = AREA_NAMES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("area_{i}"));
                planted_plan(i, &name, themes, posts, derive_seed(cfg.seed, i as u64))
            })
            .collect(),
    };
    let dir = &cfg.out_dir;
    create_dir(dir)?;
    let mut run = RunConfig { out_dir: PathBuf::from("results"), seed: cfg.seed, ..RunConfig::default() };
    for plan in &plans {
        let generated = generate_synthetic(plan).map_err(input_error)?;
        let stem = &plan.area_name;
        let mut buf = Vec::new();
        write_posts(&mut buf, &generated.posts).expect("in-memory write");
        write_file(&dir.join(format!("{stem}.jsonl")), &buf)?;
        write_file(&dir.join(format!("{stem}.rules.json")), &json(&generated.rules))?;
        write_file(&dir.join(format!("{stem}.ledger.json")), &json(&generated.ledger))?;
        run.areas.push(AreaConfig {
            name: stem.clone(),
            inputs: vec![PathBuf::from(format!("{stem}.jsonl"))],
            rules: Some(PathBuf::from(format!("{stem}.rules.json"))),
        });
    }
    write_file(&dir.join("config.toml"), run.to_toml().as_bytes())?;
    println!("wrote {} synthetic areas to {}", plans.len(), dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Clean(a) => cmd_clean(&area_config(g, a)?),
        Command::Build(a) => cmd_build(&area_config(g, a)?),
        Command::Analyze(a) => cmd_analyze(&area_config(g, a)?),
        Command::Merge => cmd_merge(&base_config(g)?),
        Command::Classify { graph, lexicon } => cmd_classify(&base_config(g)?, graph, lexicon.as_deref()),
        Command::Export { graph, format, stem } => cmd_export(&base_config(g)?, graph, format, stem),
        Command::Synth { preset, areas, posts, themes } => cmd_synth(&base_config(g)?, *preset, *areas, *posts, *themes),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
