//! End-to-end runs: per-area analysis, the merged network, and the files
//! each run leaves on disk.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! areas/<name>/cleaning_summary.json
//! areas/<name>/centrality.csv    label,frequency,eigenvector,betweenness
//! areas/<name>/edges.csv         u,v,weight,edge_betweenness
//! areas/<name>/partition.csv     label,community,ces_classes
//! areas/<name>/graph.graphml, graph.dot, report.json
//! merged/...                     same tables, plus an `area` column
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{
    CentralityOptions, CentralityReport, Weighting, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};
use crate::ces::{classify, CesLexicon, CommunityLabel};
use crate::community::{detect, Partition};
use crate::cooccur::{build_network, merge_networks_with, PairSource, DEFAULT_K_TOP, DEFAULT_PAIR_BUDGET};
use crate::export::{to_dot, to_graphml, AnnotatedGraph};
use crate::graph::WeightedGraph;
use crate::ingest::{clean, concat_dedup, read_posts, CleaningRules, CleaningSummary, Corpus};
use crate::layout::{force_directed, LayoutOptions};

/// Communities smaller than this are flagged in reports.
pub const SMALL_COMMUNITY: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub name: String,
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub areas: Vec<AreaConfig>,
    #[serde(default = "default_k_top")]
    pub k_top: usize,
    #[serde(default = "default_pair_budget")]
    pub pair_budget: usize,
    #[serde(default = "default_true")]
    pub weighted_betweenness: bool,
    #[serde(default = "default_tolerance")]
    pub eigen_tolerance: f64,
    #[serde(default = "default_iterations")]
    pub eigen_max_iterations: usize,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pair_source: PairSource,
    /// Attach force-directed x/y positions to GraphML and DOT exports.
    #[serde(default = "default_true")]
    pub layout: bool,
}

fn default_k_top() -> usize {
    DEFAULT_K_TOP
}
fn default_pair_budget() -> usize {
    DEFAULT_PAIR_BUDGET
}
fn default_true() -> bool {
    true
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            areas: Vec::new(),
            k_top: DEFAULT_K_TOP,
            pair_budget: DEFAULT_PAIR_BUDGET,
            weighted_betweenness: true,
            eigen_tolerance: DEFAULT_TOLERANCE,
            eigen_max_iterations: DEFAULT_MAX_ITERATIONS,
            lexicon: None,
            out_dir: default_out_dir(),
            seed: 0,
            pair_source: PairSource::AllPosts,
            layout: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a TOML config. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for area in &mut cfg.areas {
            area.inputs.iter_mut().for_each(rebase);
            if let Some(r) = &mut area.rules {
                rebase(r);
            }
        }
        if let Some(l) = &mut cfg.lexicon {
            rebase(l);
        }
        rebase(&mut cfg.out_dir);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.k_top < 2 {
            return bad(format!("k_top must be at least 2, got {}", self.k_top));
        }
        if self.pair_budget < 1 {
            return bad("pair_budget must be at least 1".into());
        }
        if !(self.eigen_tolerance > 0.0 && self.eigen_tolerance.is_finite()) {
            return bad(format!("eigen_tolerance must be positive, got {}", self.eigen_tolerance));
        }
        if self.eigen_max_iterations == 0 {
            return bad("eigen_max_iterations must be at least 1".into());
        }
        let mut seen = HashSet::new();
        for a in &self.areas {
            if a.name.is_empty() || a.name.starts_with('.') || a.name.contains(['/', '\\']) {
                return bad(format!("area name {:?} is not usable as a directory name", a.name));
            }
            if !seen.insert(a.name.as_str()) {
                return bad(format!("area name {:?} appears twice", a.name));
            }
            if a.inputs.is_empty() {
                return bad(format!("area {:?} has no input files", a.name));
            }
        }
        Ok(())
    }

    pub fn area(&self, name: &str) -> Result<&AreaConfig, PipelineError> {
        self.areas
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| PipelineError::Config(format!("no area named {name:?} in config")))
    }

    pub fn centrality_options(&self) -> CentralityOptions {
        CentralityOptions {
            weighting: Weighting::from_flag(self.weighted_betweenness),
            tolerance: self.eigen_tolerance,
            max_iterations: self.eigen_max_iterations,
        }
    }

    pub fn lexicon(&self) -> Result<CesLexicon, PipelineError> {
        match &self.lexicon {
            Some(p) => CesLexicon::load(p).map_err(|e| PipelineError::Config(e.to_string())),
            None => Ok(CesLexicon::starter()),
        }
    }

    pub fn area_dir(&self, name: &str) -> PathBuf {
        self.out_dir.join("areas").join(name)
    }

    pub fn merged_dir(&self) -> PathBuf {
        self.out_dir.join("merged")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Clean,
    Build,
    Centrality,
    Community,
    Classify,
    Merge,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::Clean => "clean",
            Stage::Build => "build",
            Stage::Centrality => "centrality",
            Stage::Community => "community",
            Stage::Classify => "classify",
            Stage::Merge => "merge",
            Stage::Export => "export",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage} stage failed for {area}: {message}")]
    Stage { stage: Stage, area: String, message: String },
}

impl PipelineError {
    fn stage(stage: Stage, area: &str, err: impl fmt::Display) -> Self {
        PipelineError::Stage { stage, area: area.to_owned(), message: err.to_string() }
    }

    /// 1 for bad input or configuration, 2 for failures during analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Stage { stage: Stage::Ingest | Stage::Clean | Stage::Export, .. } => 1,
            PipelineError::Stage { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub vertices: usize,
    pub edges: usize,
    pub total_weight: u64,
    pub k_used: usize,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub label: String,
    pub frequency: u64,
    pub eigenvector: f64,
    pub betweenness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub u: String,
    pub v: String,
    pub weight: u64,
    pub edge_betweenness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub label: String,
    pub community: usize,
    pub ces_classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub modularity: f64,
    pub community_count: usize,
    pub labels: Vec<CommunityLabel>,
    /// Ids of communities with fewer than [`SMALL_COMMUNITY`] members.
    pub small_communities: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub area: String,
    pub cleaning: CleaningSummary,
    pub network: NetworkStats,
    pub centrality: Vec<CentralityRow>,
    pub edges: Vec<EdgeRow>,
    pub partition: Vec<PartitionRow>,
    pub communities: PartitionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedStats {
    pub areas: Vec<String>,
    pub vertices: usize,
    pub edges: usize,
    pub pair_budget: usize,
    pub distinct_pairs: usize,
    pub total_pair_weight: u64,
    pub retained_pair_weight: u64,
    pub weight_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedReport {
    pub network: MergedStats,
    pub centrality: Vec<CentralityRow>,
    pub edges: Vec<EdgeRow>,
    pub partition: Vec<PartitionRow>,
    pub communities: PartitionSummary,
}

/// Everything computed for one graph; kept in memory so callers can
/// inspect it without reparsing the files.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub graph: WeightedGraph,
    pub centrality: CentralityReport,
    pub partition: Partition,
    pub labels: Vec<CommunityLabel>,
}

impl Analysis {
    pub fn run(g: &WeightedGraph, cfg: &RunConfig, lex: &CesLexicon, area: &str) -> Result<Self, PipelineError> {
        let centrality = CentralityReport::compute(g, &cfg.centrality_options())
            .map_err(|e| PipelineError::stage(Stage::Centrality, area, e))?;
        let (_, partition) = detect(g);
        if partition.assignment.len() != g.vertex_count() {
            return Err(PipelineError::stage(Stage::Community, area, "partition does not cover the graph"));
        }
        let labels = classify(&partition, g, lex).map_err(|e| PipelineError::stage(Stage::Classify, area, e))?;
        Ok(Self { graph: g.clone(), centrality, partition, labels })
    }

    fn centrality_rows(&self, area_of: Option<&[String]>) -> Vec<CentralityRow> {
        self.graph
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| CentralityRow {
                label: v.label.clone(),
                frequency: v.frequency,
                eigenvector: self.centrality.eigenvector[i],
                betweenness: self.centrality.betweenness[i],
                area: area_of.map(|a| a[i].clone()),
            })
            .collect()
    }

    fn edge_rows(&self) -> Vec<EdgeRow> {
        self.graph
            .edges()
            .zip(&self.centrality.edge_betweenness)
            .map(|(e, &eb)| EdgeRow {
                u: self.graph.label(e.u).to_owned(),
                v: self.graph.label(e.v).to_owned(),
                weight: e.weight,
                edge_betweenness: eb,
            })
            .collect()
    }

    fn partition_rows(&self) -> Vec<PartitionRow> {
        self.graph
            .vertices()
            .iter()
            .zip(&self.partition.assignment)
            .map(|(v, &c)| PartitionRow {
                label: v.label.clone(),
                community: c,
                ces_classes: self.labels[c].classes.iter().map(|h| h.class.clone()).collect(),
            })
            .collect()
    }

    fn summary(&self) -> PartitionSummary {
        PartitionSummary {
            modularity: self.partition.q,
            community_count: self.partition.community_count(),
            labels: self.labels.clone(),
            small_communities: self.labels.iter().filter(|l| l.size < SMALL_COMMUNITY).map(|l| l.community).collect(),
        }
    }

    pub fn annotated(&self, cfg: &RunConfig, area_of: Option<&[String]>) -> AnnotatedGraph {
        let mut a = AnnotatedGraph::new(self.graph.clone())
            .with_centrality(&self.centrality)
            .with_partition(&self.partition);
        if let Some(area_of) = area_of {
            a = a.with_area(area_of.to_vec());
        }
        if cfg.layout {
            a = a.with_position(force_directed(&self.graph, &LayoutOptions { seed: cfg.seed, ..Default::default() }));
        }
        a
    }
}

/// Reads, deduplicates and cleans every input of one area.
pub fn load_area(area: &AreaConfig) -> Result<(Corpus, CleaningSummary), PipelineError> {
    let batches = area
        .inputs
        .iter()
        .map(|p| read_posts(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::stage(Stage::Ingest, &area.name, e))?;
    let rules = match &area.rules {
        Some(p) => CleaningRules::load(p).map_err(|e| PipelineError::stage(Stage::Clean, &area.name, e))?,
        None => CleaningRules::default(),
    };
    let (posts, duplicates) = concat_dedup(batches);
    let (corpus, mut summary) = clean(&area.name, &posts, &rules);
    summary.duplicate_posts_merged = duplicates;
    Ok((corpus, summary))
}

pub struct AreaRun {
    pub report: AreaReport,
    pub analysis: Analysis,
    pub corpus: Corpus,
}

pub fn analyze_corpus(
    cfg: &RunConfig,
    lex: &CesLexicon,
    corpus: Corpus,
    cleaning: CleaningSummary,
) -> Result<AreaRun, PipelineError> {
    let area = corpus.area_name.clone();
    let net = build_network(&corpus, cfg.k_top).map_err(|e| PipelineError::stage(Stage::Build, &area, e))?;
    let analysis = Analysis::run(&net.graph, cfg, lex, &area)?;
    let report = AreaReport {
        area: area.clone(),
        cleaning,
        network: NetworkStats {
            vertices: net.graph.vertex_count(),
            edges: net.graph.edge_count(),
            total_weight: net.graph.total_weight(),
            k_used: net.k_used,
            coverage: net.coverage,
        },
        centrality: analysis.centrality_rows(None),
        edges: analysis.edge_rows(),
        partition: analysis.partition_rows(),
        communities: analysis.summary(),
    };
    Ok(AreaRun { report, analysis, corpus })
}

/// Full per-area run; writes the area directory and returns the report.
pub fn run_area(cfg: &RunConfig, area: &AreaConfig) -> Result<AreaRun, PipelineError> {
    let lex = cfg.lexicon()?;
    run_area_with(cfg, &lex, area)
}

fn run_area_with(cfg: &RunConfig, lex: &CesLexicon, area: &AreaConfig) -> Result<AreaRun, PipelineError> {
    let (corpus, summary) = load_area(area)?;
    let run = analyze_corpus(cfg, lex, corpus, summary)?;
    write_area(cfg, &run).map_err(|e| PipelineError::stage(Stage::Export, &area.name, e))?;
    Ok(run)
}

/// Runs every configured area in parallel. Results keep config order.
pub fn run_areas(cfg: &RunConfig) -> Result<Vec<AreaRun>, PipelineError> {
    cfg.validate()?;
    let lex = cfg.lexicon()?;
    cfg.areas.par_iter().map(|a| run_area_with(cfg, &lex, a)).collect()
}

pub struct MergedRun {
    pub report: MergedReport,
    pub analysis: Analysis,
    pub area_of: Vec<String>,
}

pub fn analyze_merged(cfg: &RunConfig, lex: &CesLexicon, corpora: &[Corpus]) -> Result<MergedRun, PipelineError> {
    let merged = merge_networks_with(corpora, cfg.pair_budget, cfg.pair_source)
        .map_err(|e| PipelineError::stage(Stage::Merge, "merged", e))?;
    let analysis = Analysis::run(&merged.graph, cfg, lex, "merged")?;
    let report = MergedReport {
        network: MergedStats {
            areas: corpora.iter().map(|c| c.area_name.clone()).collect(),
            vertices: merged.graph.vertex_count(),
            edges: merged.graph.edge_count(),
            pair_budget: merged.pair_budget,
            distinct_pairs: merged.distinct_pairs,
            total_pair_weight: merged.total_pair_weight,
            retained_pair_weight: merged.retained_pair_weight,
            weight_coverage: merged.weight_coverage,
        },
        centrality: analysis.centrality_rows(Some(&merged.area_of)),
        edges: analysis.edge_rows(),
        partition: analysis.partition_rows(),
        communities: analysis.summary(),
    };
    Ok(MergedRun { report, analysis, area_of: merged.area_of })
}

/// Per-area runs followed by the merged network over all cleaned corpora.
pub fn run_merged(cfg: &RunConfig) -> Result<(Vec<AreaRun>, MergedRun), PipelineError> {
    if cfg.areas.len() < 2 {
        return Err(PipelineError::Config(format!("merging needs at least 2 areas, config has {}", cfg.areas.len())));
    }
    let runs = run_areas(cfg)?;
    let lex = cfg.lexicon()?;
    let corpora: Vec<Corpus> = runs.iter().map(|r| r.corpus.clone()).collect();
    let merged = analyze_merged(cfg, &lex, &corpora)?;
    write_merged(cfg, &merged).map_err(|e| PipelineError::stage(Stage::Export, "merged", e))?;
    Ok((runs, merged))
}

fn float(x: f64) -> String {
    x.to_string()
}

pub fn centrality_csv(rows: &[CentralityRow]) -> Vec<u8> {
    let with_area = rows.iter().any(|r| r.area.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label", "frequency", "eigenvector", "betweenness"];
    if with_area {
        header.push("area");
    }
    w.write_record(&header).expect("in-memory CSV");
    for r in rows {
        let mut rec = vec![r.label.clone(), r.frequency.to_string(), float(r.eigenvector), float(r.betweenness)];
        if with_area {
            rec.push(r.area.clone().unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

pub fn edges_csv(rows: &[EdgeRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["u", "v", "weight", "edge_betweenness"]).expect("in-memory CSV");
    for r in rows {
        w.write_record([r.u.as_str(), r.v.as_str(), &r.weight.to_string(), &float(r.edge_betweenness)])
            .expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

/// Multiple classes are joined with `;`.
pub fn partition_csv(rows: &[PartitionRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "community", "ces_classes"]).expect("in-memory CSV");
    for r in rows {
        w.write_record([r.label.as_str(), &r.community.to_string(), &r.ces_classes.join(";")])
            .expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), String> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_tables(
    dir: &Path,
    cfg: &RunConfig,
    analysis: &Analysis,
    area_of: Option<&[String]>,
    centrality: &[CentralityRow],
    edges: &[EdgeRow],
    partition: &[PartitionRow],
) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    write(dir, "centrality.csv", &centrality_csv(centrality))?;
    write(dir, "edges.csv", &edges_csv(edges))?;
    write(dir, "partition.csv", &partition_csv(partition))?;
    let annotated = analysis.annotated(cfg, area_of);
    write(dir, "graph.graphml", to_graphml(&annotated).map_err(|e| e.to_string())?.as_bytes())?;
    write(dir, "graph.dot", to_dot(&annotated).map_err(|e| e.to_string())?.as_bytes())?;
    Ok(())
}

pub fn write_area(cfg: &RunConfig, run: &AreaRun) -> Result<(), String> {
    let dir = cfg.area_dir(&run.report.area);
    let r = &run.report;
    write_tables(&dir, cfg, &run.analysis, None, &r.centrality, &r.edges, &r.partition)?;
    write(&dir, "cleaning_summary.json", &json_bytes(&r.cleaning))?;
    write(&dir, "report.json", &json_bytes(r))
}

pub fn write_merged(cfg: &RunConfig, run: &MergedRun) -> Result<(), String> {
    let dir = cfg.merged_dir();
    let r = &run.report;
    write_tables(&dir, cfg, &run.analysis, Some(&run.area_of), &r.centrality, &r.edges, &r.partition)?;
    write(&dir, "report.json", &json_bytes(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::write_posts;
    use crate::synth::{generate_synthetic, planted_plan};

    fn write_area_inputs(dir: &Path, idx: usize, name: &str, seed: u64) -> AreaConfig {
        let g = generate_synthetic(&planted_plan(idx, name, 3, 600, seed)).unwrap();
        let input = dir.join(format!("{name}.jsonl"));
        write_posts(fs::File::create(&input).unwrap(), &g.posts).unwrap();
        let rules = dir.join(format!("{name}.rules.json"));
        fs::write(&rules, serde_json::to_string(&g.rules).unwrap()).unwrap();
        AreaConfig { name: name.into(), inputs: vec![input], rules: Some(rules) }
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = RunConfig::from_toml("[[areas]]\nname = \"a\"\ninputs = [\"a.jsonl\"]\n").unwrap();
        assert_eq!(cfg.k_top, 150);
        assert_eq!(cfg.pair_budget, 1400);
        assert!(cfg.weighted_betweenness);
        cfg.validate().unwrap();

        let mut dup = cfg.clone();
        dup.areas.push(dup.areas[0].clone());
        assert!(matches!(dup.validate(), Err(PipelineError::Config(_))));
        let small = RunConfig { k_top: 1, ..cfg.clone() };
        assert!(small.validate().is_err());
        let zero = RunConfig { pair_budget: 0, ..cfg };
        assert!(zero.validate().is_err());
        assert!(RunConfig::from_toml("k_top = 5\nbogus = 1\n").is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig {
            areas: vec![AreaConfig { name: "x".into(), inputs: vec!["x.jsonl".into()], rules: None }],
            pair_source: PairSource::AreaNetworks { k: 20 },
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn missing_input_names_stage_and_area() {
        let area = AreaConfig { name: "nowhere".into(), inputs: vec!["/nonexistent.jsonl".into()], rules: None };
        let err = run_area(&RunConfig::default(), &area).err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("ingest") && msg.contains("nowhere"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn area_run_is_consistent_and_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let area = write_area_inputs(tmp.path(), 0, "alpha", 11);
        let cfg = RunConfig { out_dir: tmp.path().join("out1"), areas: vec![area.clone()], ..RunConfig::default() };
        let run = run_area(&cfg, &area).unwrap();
        let r = &run.report;
        assert!(r.network.vertices <= cfg.k_top);
        assert_eq!(r.centrality.len(), r.network.vertices);
        assert_eq!(r.partition.len(), r.network.vertices);
        assert_eq!(r.edges.len(), r.network.edges);
        let dir = cfg.area_dir("alpha");
        for f in ["cleaning_summary.json", "centrality.csv", "edges.csv", "partition.csv", "graph.graphml", "graph.dot", "report.json"] {
            assert!(dir.join(f).is_file(), "{f}");
        }
        let cfg2 = RunConfig { out_dir: tmp.path().join("out2"), ..cfg.clone() };
        run_area(&cfg2, &area).unwrap();
        for f in ["centrality.csv", "edges.csv", "partition.csv", "graph.graphml", "report.json"] {
            assert_eq!(fs::read(dir.join(f)).unwrap(), fs::read(cfg2.area_dir("alpha").join(f)).unwrap(), "{f}");
        }
    }

    #[test]
    fn small_corpus_uses_all_hashtags() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("tiny.jsonl");
        fs::write(
            &input,
            "{\"post_id\":\"1\",\"user_id\":\"u\",\"hashtags\":[\"a\",\"b\",\"c\"],\"query\":\"q\"}\n\
             {\"post_id\":\"2\",\"user_id\":\"u\",\"hashtags\":[\"a\",\"b\"],\"query\":\"q\"}\n",
        )
        .unwrap();
        let area = AreaConfig { name: "tiny".into(), inputs: vec![input], rules: None };
        let cfg = RunConfig { out_dir: tmp.path().join("out"), ..RunConfig::default() };
        let run = run_area(&cfg, &area).unwrap();
        assert_eq!(run.report.network.k_used, 3);
        assert_eq!(run.report.network.edges, 3);
    }

    #[test]
    fn merged_run_writes_area_column() {
        let tmp = tempfile::tempdir().unwrap();
        let areas = vec![write_area_inputs(tmp.path(), 0, "a", 1), write_area_inputs(tmp.path(), 1, "b", 2)];
        let cfg = RunConfig { out_dir: tmp.path().join("out"), areas, pair_budget: 200, ..RunConfig::default() };
        let (runs, merged) = run_merged(&cfg).unwrap();
        assert_eq!(runs.len(), 2);
        assert!(merged.report.network.edges <= 200);
        let csv = fs::read_to_string(cfg.merged_dir().join("centrality.csv")).unwrap();
        assert!(csv.starts_with("label,frequency,eigenvector,betweenness,area\n"));
        let one = RunConfig { areas: cfg.areas[..1].to_vec(), ..cfg };
        assert!(matches!(run_merged(&one), Err(PipelineError::Config(_))));
    }
}
