//! Graph exports (GraphML, DOT, edge/node CSV, JSON) and the readers used
//! to load them back.
//!
//! All writers are stable-ordered: vertices by id, edges by `(u, v)`.
//! Floats are written in Rust's shortest round-trip form, so a reimport
//! reproduces every attribute bit for bit.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::CentralityReport;
use crate::community::Partition;
use crate::graph::{GraphError, VertexId, WeightedGraph};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("unknown export format {0:?} (expected graphml, dot, edge-csv or report-json)")]
    UnknownFormat(String),
    #[error("attribute {name} has {got} entries for {expected} items")]
    LengthMismatch { name: &'static str, got: usize, expected: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    Graphml,
    Dot,
    EdgeCsv,
    ReportJson,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [Self::Graphml, Self::Dot, Self::EdgeCsv, Self::ReportJson];
}

impl FromStr for ExportFormat {
    type Err = ExportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graphml" => Ok(Self::Graphml),
            "dot" => Ok(Self::Dot),
            "edge-csv" | "csv" => Ok(Self::EdgeCsv),
            "report-json" | "json" => Ok(Self::ReportJson),
            other => Err(ExportError::UnknownFormat(other.to_owned())),
        }
    }
}

/// A graph plus the per-vertex and per-edge attributes that travel with it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotatedGraph {
    pub graph: WeightedGraph,
    pub eigenvector: Option<Vec<f64>>,
    pub betweenness: Option<Vec<f64>>,
    /// Indexed like [`WeightedGraph::edges`].
    pub edge_betweenness: Option<Vec<f64>>,
    pub community: Option<Vec<usize>>,
    pub area: Option<Vec<String>>,
    pub position: Option<Vec<(f64, f64)>>,
}

impl AnnotatedGraph {
    pub fn new(graph: WeightedGraph) -> Self {
        Self { graph, ..Self::default() }
    }

    /// An edgeless graph carries no edge attribute, matching what the
    /// readers produce.
    pub fn with_centrality(mut self, c: &CentralityReport) -> Self {
        self.eigenvector = Some(c.eigenvector.clone());
        self.betweenness = Some(c.betweenness.clone());
        self.edge_betweenness = (!c.edge_betweenness.is_empty()).then(|| c.edge_betweenness.clone());
        self
    }

    pub fn with_partition(mut self, p: &Partition) -> Self {
        self.community = Some(p.assignment.clone());
        self
    }

    pub fn with_area(mut self, area: Vec<String>) -> Self {
        self.area = Some(area);
        self
    }

    pub fn with_position(mut self, position: Vec<(f64, f64)>) -> Self {
        self.position = Some(position);
        self
    }

    pub fn validate(&self) -> Result<(), ExportError> {
        let n = self.graph.vertex_count();
        let m = self.graph.edge_count();
        let check = |name, got: Option<usize>, expected| match got {
            Some(got) if got != expected => Err(ExportError::LengthMismatch { name, got, expected }),
            _ => Ok(()),
        };
        check("eigenvector", self.eigenvector.as_ref().map(Vec::len), n)?;
        check("betweenness", self.betweenness.as_ref().map(Vec::len), n)?;
        check("community", self.community.as_ref().map(Vec::len), n)?;
        check("area", self.area.as_ref().map(Vec::len), n)?;
        check("position", self.position.as_ref().map(Vec::len), n)?;
        check("edge_betweenness", self.edge_betweenness.as_ref().map(Vec::len), m)?;
        Ok(())
    }

    fn vertex_record(&self, v: usize) -> VertexRecord {
        let vx = &self.graph.vertices()[v];
        VertexRecord {
            id: v,
            label: vx.label.clone(),
            frequency: vx.frequency,
            eigenvector: self.eigenvector.as_ref().map(|x| x[v]),
            betweenness: self.betweenness.as_ref().map(|x| x[v]),
            community: self.community.as_ref().map(|x| x[v]),
            area: self.area.as_ref().map(|x| x[v].clone()),
            x: self.position.as_ref().map(|p| p[v].0),
            y: self.position.as_ref().map(|p| p[v].1),
        }
    }

    fn edge_records(&self) -> Vec<EdgeRecord> {
        self.graph
            .edges()
            .enumerate()
            .map(|(i, e)| EdgeRecord {
                u: self.graph.label(e.u).to_owned(),
                v: self.graph.label(e.v).to_owned(),
                weight: e.weight,
                edge_betweenness: self.edge_betweenness.as_ref().map(|x| x[i]),
            })
            .collect()
    }

    fn from_records(vertices: Vec<VertexRecord>, edges: Vec<EdgeRecord>) -> Result<Self, String> {
        let mut graph = WeightedGraph::with_capacity(vertices.len());
        for r in &vertices {
            graph.add_vertex(r.label.clone(), r.frequency).map_err(|e| e.to_string())?;
        }
        fn column<T: Clone>(vs: &[VertexRecord], f: impl Fn(&VertexRecord) -> Option<T>) -> Result<Option<Vec<T>>, String> {
            let values: Vec<Option<T>> = vs.iter().map(f).collect();
            match values.iter().filter(|v| v.is_some()).count() {
                0 => Ok(None),
                k if k == values.len() => Ok(Some(values.into_iter().map(Option::unwrap).collect())),
                _ => Err("attribute present on some vertices only".into()),
            }
        }
        let eigenvector = column(&vertices, |r| r.eigenvector)?;
        let betweenness = column(&vertices, |r| r.betweenness)?;
        let community = column(&vertices, |r| r.community)?;
        let area = column(&vertices, |r| r.area.clone())?;
        let xs = column(&vertices, |r| r.x)?;
        let ys = column(&vertices, |r| r.y)?;
        let position = match (xs, ys) {
            (Some(x), Some(y)) => Some(x.into_iter().zip(y).collect()),
            (None, None) => None,
            _ => return Err("x and y must appear together".into()),
        };

        let mut eb: HashMap<(VertexId, VertexId), f64> = HashMap::new();
        let mut any_eb = 0;
        for e in &edges {
            let u = graph.id_of(&e.u).ok_or_else(|| format!("edge endpoint {:?} is not a vertex", e.u))?;
            let v = graph.id_of(&e.v).ok_or_else(|| format!("edge endpoint {:?} is not a vertex", e.v))?;
            if graph.weight(u, v).is_some() {
                return Err(format!("duplicate edge {:?}-{:?}", e.u, e.v));
            }
            graph.upsert_edge(u, v, e.weight).map_err(|err| err.to_string())?;
            if let Some(x) = e.edge_betweenness {
                any_eb += 1;
                eb.insert((u.min(v), u.max(v)), x);
            }
        }
        let edge_betweenness = match any_eb {
            0 => None,
            k if k == edges.len() => Some(graph.edges().map(|e| eb[&(e.u, e.v)]).collect()),
            _ => return Err("edge_betweenness present on some edges only".into()),
        };
        Ok(Self { graph, eigenvector, betweenness, edge_betweenness, community, area, position })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub label: String,
    pub frequency: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvector: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betweenness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub community: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub weight: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_betweenness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, message: impl Into<String>) -> ExportError {
    ExportError::Parse { path: path.display().to_string(), message: message.into() }
}

fn escape(s: &str) -> Cow<'_, str> {
    quick_xml::escape::escape(s)
}

pub fn to_graphml(a: &AnnotatedGraph) -> Result<String, ExportError> {
    a.validate()?;
    let mut node_keys: Vec<(&str, &str)> = vec![("label", "string"), ("frequency", "long")];
    if a.eigenvector.is_some() {
        node_keys.push(("eigenvector", "double"));
    }
    if a.betweenness.is_some() {
        node_keys.push(("betweenness", "double"));
    }
    if a.community.is_some() {
        node_keys.push(("community", "int"));
    }
    if a.area.is_some() {
        node_keys.push(("area", "string"));
    }
    if a.position.is_some() {
        node_keys.push(("x", "double"));
        node_keys.push(("y", "double"));
    }
    let mut edge_keys = vec![("weight", "long")];
    if a.edge_betweenness.is_some() {
        edge_keys.push(("edge_betweenness", "double"));
    }

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (name, ty) in &node_keys {
        let _ = writeln!(out, "  <key id=\"{name}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>");
    }
    for (name, ty) in &edge_keys {
        let _ = writeln!(out, "  <key id=\"{name}\" for=\"edge\" attr.name=\"{name}\" attr.type=\"{ty}\"/>");
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for v in 0..a.graph.vertex_count() {
        let r = a.vertex_record(v);
        let _ = writeln!(out, "    <node id=\"n{v}\">");
        let _ = writeln!(out, "      <data key=\"label\">{}</data>", escape(&r.label));
        let _ = writeln!(out, "      <data key=\"frequency\">{}</data>", r.frequency);
        let mut data = |key: &str, value: Option<String>| {
            if let Some(value) = value {
                let _ = writeln!(out, "      <data key=\"{key}\">{}</data>", escape(&value));
            }
        };
        data("eigenvector", r.eigenvector.map(|x| x.to_string()));
        data("betweenness", r.betweenness.map(|x| x.to_string()));
        data("community", r.community.map(|x| x.to_string()));
        data("area", r.area);
        data("x", r.x.map(|x| x.to_string()));
        data("y", r.y.map(|x| x.to_string()));
        out.push_str("    </node>\n");
    }
    for (i, e) in a.graph.edges().enumerate() {
        let _ = writeln!(out, "    <edge id=\"e{i}\" source=\"n{}\" target=\"n{}\">", e.u.index(), e.v.index());
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", e.weight);
        if let Some(eb) = &a.edge_betweenness {
            let _ = writeln!(out, "      <data key=\"edge_betweenness\">{}</data>", eb[i]);
        }
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    Ok(out)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(a: &AnnotatedGraph) -> Result<String, ExportError> {
    a.validate()?;
    let mut out = String::from("graph G {\n");
    for v in 0..a.graph.vertex_count() {
        let r = a.vertex_record(v);
        let mut attrs = vec![format!("label={}", dot_quote(&r.label)), format!("frequency={}", r.frequency)];
        if let Some(x) = r.eigenvector {
            attrs.push(format!("eigenvector={x}"));
        }
        if let Some(x) = r.betweenness {
            attrs.push(format!("betweenness={x}"));
        }
        if let Some(c) = r.community {
            attrs.push(format!("community={c}"));
        }
        if let Some(area) = &r.area {
            attrs.push(format!("area={}", dot_quote(area)));
        }
        if let (Some(x), Some(y)) = (r.x, r.y) {
            attrs.push(format!("pos=\"{x},{y}!\""));
        }
        let _ = writeln!(out, "  n{v} [{}];", attrs.join(", "));
    }
    for (i, e) in a.graph.edges().enumerate() {
        let mut attrs = vec![format!("weight={}", e.weight)];
        if let Some(eb) = &a.edge_betweenness {
            attrs.push(format!("edge_betweenness={}", eb[i]));
        }
        let _ = writeln!(out, "  n{} -- n{} [{}];", e.u.index(), e.v.index(), attrs.join(", "));
    }
    out.push_str("}\n");
    Ok(out)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory CSV write");
    }
    w.into_inner().expect("in-memory CSV flush")
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    id: usize,
    label: String,
    frequency: u64,
    eigenvector: Option<f64>,
    betweenness: Option<f64>,
    community: Option<usize>,
    area: Option<String>,
    x: Option<f64>,
    y: Option<f64>,
}

/// Node and edge tables. Optional columns are always present and left
/// empty when the attribute is missing.
pub fn to_csv_tables(a: &AnnotatedGraph) -> Result<(Vec<u8>, Vec<u8>), ExportError> {
    a.validate()?;
    let nodes: Vec<NodeRow> = (0..a.graph.vertex_count())
        .map(|v| {
            let r = a.vertex_record(v);
            NodeRow {
                id: r.id,
                label: r.label,
                frequency: r.frequency,
                eigenvector: r.eigenvector,
                betweenness: r.betweenness,
                community: r.community,
                area: r.area,
                x: r.x,
                y: r.y,
            }
        })
        .collect();
    let edges = a.edge_records();
    Ok((csv_bytes(&nodes), csv_bytes(&edges)))
}

pub fn to_document(a: &AnnotatedGraph) -> Result<GraphDocument, ExportError> {
    a.validate()?;
    Ok(GraphDocument {
        vertices: (0..a.graph.vertex_count()).map(|v| a.vertex_record(v)).collect(),
        edges: a.edge_records(),
    })
}

/// File names written for `format` under `stem`.
pub fn export_paths(dir: &Path, stem: &str, format: ExportFormat) -> Vec<PathBuf> {
    match format {
        ExportFormat::Graphml => vec![dir.join(format!("{stem}.graphml"))],
        ExportFormat::Dot => vec![dir.join(format!("{stem}.dot"))],
        ExportFormat::EdgeCsv => vec![dir.join(format!("{stem}.nodes.csv")), dir.join(format!("{stem}.edges.csv"))],
        ExportFormat::ReportJson => vec![dir.join(format!("{stem}.json"))],
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExportError> {
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn export_graph(a: &AnnotatedGraph, dir: &Path, stem: &str, format: ExportFormat) -> Result<Vec<PathBuf>, ExportError> {
    let paths = export_paths(dir, stem, format);
    match format {
        ExportFormat::Graphml => write_file(&paths[0], to_graphml(a)?.as_bytes())?,
        ExportFormat::Dot => write_file(&paths[0], to_dot(a)?.as_bytes())?,
        ExportFormat::EdgeCsv => {
            let (nodes, edges) = to_csv_tables(a)?;
            write_file(&paths[0], &nodes)?;
            write_file(&paths[1], &edges)?;
        }
        ExportFormat::ReportJson => {
            let mut text = serde_json::to_string_pretty(&to_document(a)?).expect("document serializes");
            text.push('\n');
            write_file(&paths[0], text.as_bytes())?;
        }
    }
    Ok(paths)
}

pub fn parse_graphml(text: &str, path: &Path) -> Result<AnnotatedGraph, ExportError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut key_names: HashMap<String, String> = HashMap::new();
    let mut node_ids: HashMap<String, usize> = HashMap::new();
    let mut vertices: Vec<HashMap<String, String>> = Vec::new();
    let mut edges: Vec<(String, String, HashMap<String, String>)> = Vec::new();

    enum Scope {
        None,
        Node,
        Edge,
    }
    let mut scope = Scope::None;
    let mut current_key: Option<String> = None;
    let mut current_text = String::new();

    let attr = |e: &quick_xml::events::BytesStart, name: &[u8]| -> Result<Option<String>, ExportError> {
        for a in e.attributes() {
            let a = a.map_err(|err| parse_err(path, err.to_string()))?;
            if a.key.as_ref() == name {
                let v = a.unescape_value().map_err(|err| parse_err(path, err.to_string()))?;
                return Ok(Some(v.into_owned()));
            }
        }
        Ok(None)
    };

    loop {
        let event = reader.read_event().map_err(|e| parse_err(path, e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                match e.local_name().as_ref() {
                    b"key" => {
                        let id = attr(e, b"id")?.ok_or_else(|| parse_err(path, "key without id"))?;
                        let name = attr(e, b"attr.name")?.unwrap_or_else(|| id.clone());
                        key_names.insert(id, name);
                    }
                    b"node" => {
                        let id = attr(e, b"id")?.ok_or_else(|| parse_err(path, "node without id"))?;
                        node_ids.insert(id, vertices.len());
                        vertices.push(HashMap::new());
                        scope = if empty { Scope::None } else { Scope::Node };
                    }
                    b"edge" => {
                        let s = attr(e, b"source")?.ok_or_else(|| parse_err(path, "edge without source"))?;
                        let t = attr(e, b"target")?.ok_or_else(|| parse_err(path, "edge without target"))?;
                        edges.push((s, t, HashMap::new()));
                        scope = if empty { Scope::None } else { Scope::Edge };
                    }
                    b"data" if !empty => {
                        current_key = attr(e, b"key")?;
                        current_text.clear();
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if current_key.is_some() {
                    let s = t.unescape().map_err(|e| parse_err(path, e.to_string()))?;
                    current_text.push_str(&s);
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                b"data" => {
                    if let Some(key) = current_key.take() {
                        let name = key_names.get(&key).cloned().unwrap_or(key);
                        let value = std::mem::take(&mut current_text);
                        match scope {
                            Scope::Node => {
                                vertices.last_mut().expect("inside node").insert(name, value);
                            }
                            Scope::Edge => {
                                edges.last_mut().expect("inside edge").2.insert(name, value);
                            }
                            Scope::None => {}
                        }
                    }
                }
                b"node" | b"edge" => scope = Scope::None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    fn num<T: FromStr>(map: &HashMap<String, String>, key: &str, path: &Path) -> Result<Option<T>, ExportError> {
        map.get(key)
            .map(|s| s.trim().parse::<T>().map_err(|_| parse_err(path, format!("bad {key} value {s:?}"))))
            .transpose()
    }
    let mut vrecs = Vec::with_capacity(vertices.len());
    for (i, m) in vertices.iter().enumerate() {
        vrecs.push(VertexRecord {
            id: i,
            label: m.get("label").cloned().ok_or_else(|| parse_err(path, format!("node {i} has no label")))?,
            frequency: num(m, "frequency", path)?.unwrap_or(0),
            eigenvector: num(m, "eigenvector", path)?,
            betweenness: num(m, "betweenness", path)?,
            community: num(m, "community", path)?,
            area: m.get("area").cloned(),
            x: num(m, "x", path)?,
            y: num(m, "y", path)?,
        });
    }
    let mut erecs = Vec::with_capacity(edges.len());
    for (s, t, m) in &edges {
        let endpoint = |id: &String| {
            node_ids
                .get(id)
                .map(|&i| vrecs[i].label.clone())
                .ok_or_else(|| parse_err(path, format!("edge references unknown node {id:?}")))
        };
        erecs.push(EdgeRecord {
            u: endpoint(s)?,
            v: endpoint(t)?,
            weight: num(m, "weight", path)?.unwrap_or(1),
            edge_betweenness: num(m, "edge_betweenness", path)?,
        });
    }
    AnnotatedGraph::from_records(vrecs, erecs).map_err(|m| parse_err(path, m))
}

pub fn read_graphml(path: &Path) -> Result<AnnotatedGraph, ExportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_graphml(&text, path)
}

pub fn parse_csv_tables(nodes: &[u8], edges: &[u8], path: &Path) -> Result<AnnotatedGraph, ExportError> {
    let mut vrecs = Vec::new();
    for row in csv::Reader::from_reader(nodes).deserialize::<NodeRow>() {
        let r = row.map_err(|e| parse_err(path, e.to_string()))?;
        vrecs.push(VertexRecord {
            id: r.id,
            label: r.label,
            frequency: r.frequency,
            eigenvector: r.eigenvector,
            betweenness: r.betweenness,
            community: r.community,
            area: r.area,
            x: r.x,
            y: r.y,
        });
    }
    vrecs.sort_by_key(|r| r.id);
    if vrecs.iter().enumerate().any(|(i, r)| r.id != i) {
        return Err(parse_err(path, "node ids must be contiguous from 0"));
    }
    let mut erecs = Vec::new();
    for row in csv::Reader::from_reader(edges).deserialize::<EdgeRecord>() {
        erecs.push(row.map_err(|e| parse_err(path, e.to_string()))?);
    }
    AnnotatedGraph::from_records(vrecs, erecs).map_err(|m| parse_err(path, m))
}

pub fn read_csv_tables(nodes: &Path, edges: &Path) -> Result<AnnotatedGraph, ExportError> {
    let n = fs::read(nodes).map_err(io_err(nodes))?;
    let e = fs::read(edges).map_err(io_err(edges))?;
    parse_csv_tables(&n, &e, edges)
}

pub fn read_document(path: &Path) -> Result<AnnotatedGraph, ExportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let doc: GraphDocument = serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    AnnotatedGraph::from_records(doc.vertices, doc.edges).map_err(|m| parse_err(path, m))
}

/// Loads any export written by [`export_graph`], picking the reader by
/// extension (`.graphml`, `.json`, `.nodes.csv` / `.edges.csv`).
pub fn read_any(path: &Path) -> Result<AnnotatedGraph, ExportError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if name.ends_with(".graphml") {
        read_graphml(path)
    } else if name.ends_with(".json") {
        read_document(path)
    } else if let Some(stem) = name.strip_suffix(".edges.csv").or_else(|| name.strip_suffix(".nodes.csv")) {
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        read_csv_tables(&dir.join(format!("{stem}.nodes.csv")), &dir.join(format!("{stem}.edges.csv")))
    } else {
        Err(parse_err(path, "unrecognized graph file extension"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{CentralityOptions, CentralityReport};
    use crate::community::detect;

    fn triangle() -> AnnotatedGraph {
        let mut g = WeightedGraph::new();
        let a = g.add_vertex("a&b", 3).unwrap();
        let b = g.add_vertex("say \"hi\"", 2).unwrap();
        let c = g.add_vertex("c,d", 1).unwrap();
        g.upsert_edge(a, b, 2).unwrap();
        g.upsert_edge(b, c, 1).unwrap();
        g.upsert_edge(a, c, 1).unwrap();
        let report = CentralityReport::compute(&g, &CentralityOptions::default()).unwrap();
        let (_, p) = detect(&g);
        AnnotatedGraph::new(g)
            .with_centrality(&report)
            .with_partition(&p)
            .with_area(vec!["x".into(), "y".into(), "x".into()])
            .with_position(vec![(0.0, 1.5), (-2.25, 0.1), (1e-3, 7.0)])
    }

    #[test]
    fn graphml_has_all_nodes_edges_and_attributes() {
        let a = triangle();
        let text = to_graphml(&a).unwrap();
        assert_eq!(text.matches("<node ").count(), 3);
        assert_eq!(text.matches("<edge ").count(), 3);
        for key in ["label", "frequency", "eigenvector", "betweenness", "community", "area", "weight", "edge_betweenness"] {
            assert!(text.contains(&format!("attr.name=\"{key}\"")), "{key}");
        }
        assert!(text.contains("a&amp;b"));
    }

    #[test]
    fn graphml_round_trip() {
        let a = triangle();
        let back = parse_graphml(&to_graphml(&a).unwrap(), Path::new("t.graphml")).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn csv_round_trip() {
        let a = triangle();
        let (n, e) = to_csv_tables(&a).unwrap();
        assert_eq!(parse_csv_tables(&n, &e, Path::new("t")).unwrap(), a);
    }

    #[test]
    fn bare_graph_round_trips_without_attributes() {
        let mut g = WeightedGraph::new();
        let a = g.add_vertex("a", 1).unwrap();
        let b = g.add_vertex("b", 1).unwrap();
        g.add_vertex("lonely", 1).unwrap();
        g.upsert_edge(a, b, 4).unwrap();
        let a = AnnotatedGraph::new(g);
        let back = parse_graphml(&to_graphml(&a).unwrap(), Path::new("t")).unwrap();
        assert_eq!(back, a);
        let (n, e) = to_csv_tables(&a).unwrap();
        assert_eq!(parse_csv_tables(&n, &e, Path::new("t")).unwrap(), a);
    }

    #[test]
    fn dot_export_is_stable() {
        let a = triangle();
        let first = to_dot(&a).unwrap();
        assert_eq!(first, to_dot(&a).unwrap());
        assert!(first.starts_with("graph G {"));
        assert!(first.contains("n0 -- n1 [weight=2"));
        assert!(first.contains(r#"label="say \"hi\"""#));
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut a = triangle();
        a.eigenvector = Some(vec![1.0]);
        assert!(matches!(to_graphml(&a), Err(ExportError::LengthMismatch { name: "eigenvector", .. })));
    }

    #[test]
    fn unwritable_destination_reports_path() {
        let err = export_graph(&triangle(), Path::new("/nonexistent/dir"), "g", ExportFormat::Graphml).unwrap_err();
        match err {
            ExportError::Io { path, .. } => assert!(path.contains("/nonexistent/dir/g.graphml")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn formats_parse() {
        assert_eq!("edge-csv".parse::<ExportFormat>().unwrap(), ExportFormat::EdgeCsv);
        assert!("png".parse::<ExportFormat>().is_err());
    }
}
