//! C interface to cesgraph.
//!
//! Graphs and partitions are opaque handles owned by the caller and released
//! with the matching `_free` function. Fallible calls return a [`CgStatus`];
//! after a failure, [`cg_last_error_message`] describes it. The message lives
//! in thread-local storage and stays valid until the next call on the same
//! thread.
//!
//! Output arrays are caller-allocated. Each takes a capacity, and a capacity
//! smaller than required yields `CG_STATUS_BUFFER_TOO_SMALL` without writing.
//!
//! All pointer arguments must be null or valid for the stated length. Handles
//! must come from this library and not be used after being freed.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cesgraph::centrality::{brandes, eigenvector_centrality, Betweenness, Weighting};
use cesgraph::community::{detect, modularity, Partition};
use cesgraph::cooccur::build_network;
use cesgraph::graph::{VertexId, WeightedGraph};
use cesgraph::ingest::{clean, read_posts, CleaningRules, IngestError};

/// Default power-iteration tolerance for [`cg_eigenvector`].
pub const CG_DEFAULT_TOLERANCE: f64 = 1e-10;
/// Default power-iteration cap for [`cg_eigenvector`].
pub const CG_DEFAULT_MAX_ITERATIONS: usize = 10000;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    NotFound = 4,
    BufferTooSmall = 5,
    /// Rejected graph mutation: duplicate or empty label, self-loop,
    /// unknown vertex, zero increment.
    Graph = 6,
    Io = 7,
    Parse = 8,
    /// Centrality, community or network construction failed.
    Analysis = 9,
    Panic = 10,
}

/// Opaque weighted co-occurrence graph.
pub struct CgGraph {
    inner: WeightedGraph,
}

/// Opaque community partition produced by [`cg_fast_greedy`].
pub struct CgPartition {
    inner: Partition,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: CgStatus,
    message: String,
}

impl Failure {
    fn new(status: CgStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

type FfiResult = Result<(), Failure>;

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CgStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.message);
            e.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            CgStatus::Panic
        }
    }
}

fn analysis(e: impl std::fmt::Display) -> Failure {
    Failure::new(CgStatus::Analysis, e.to_string())
}

fn ingest(e: IngestError) -> Failure {
    let status = match e {
        IngestError::Io { .. } => CgStatus::Io,
        _ => CgStatus::Parse,
    };
    Failure::new(status, e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(CgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(CgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(CgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(CgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// Checks capacity and returns the first `needed` slots of `p`.
unsafe fn out_slice<'a, T>(p: *mut T, cap: usize, needed: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if cap < needed {
        return Err(Failure::new(
            CgStatus::BufferTooSmall,
            format!("{what} holds {cap} values, {needed} required"),
        ));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::new(CgStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn write_opt<T>(p: *mut T, value: T) {
    if let Some(slot) = p.as_mut() {
        *slot = value;
    }
}

fn vertex(g: &WeightedGraph, v: usize) -> Result<VertexId, Failure> {
    if v < g.vertex_count() {
        Ok(VertexId(v))
    } else {
        Err(Failure::new(CgStatus::NotFound, format!("no vertex {v}")))
    }
}

/// Message for the last failed call on this thread, or null after a
/// successful call.
#[no_mangle]
pub extern "C" fn cg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn cg_graph_new() -> *mut CgGraph {
    Box::into_raw(Box::new(CgGraph { inner: WeightedGraph::new() }))
}

#[no_mangle]
pub unsafe extern "C" fn cg_graph_free(g: *mut CgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_vertex_count(g: *const CgGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.vertex_count())
}

/// Edge count, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_edge_count(g: *const CgGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Appends a vertex. `out_id` may be null.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_add_vertex(
    g: *mut CgGraph,
    label: *const c_char,
    frequency: u64,
    out_id: *mut usize,
) -> CgStatus {
    guard(|| {
        let g = deref_mut(g, "graph")?;
        let label = text(label, "label")?;
        let id = g.inner.add_vertex(label, frequency).map_err(|e| Failure::new(CgStatus::Graph, e.to_string()))?;
        write_opt(out_id, id.index());
        Ok(())
    })
}

/// Adds `delta` to the weight of edge `u`-`v`, creating it if absent. The
/// new weight goes to `out_weight` unless it is null.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_upsert_edge(
    g: *mut CgGraph,
    u: usize,
    v: usize,
    delta: u64,
    out_weight: *mut u64,
) -> CgStatus {
    guard(|| {
        let g = deref_mut(g, "graph")?;
        let w = g
            .inner
            .upsert_edge(VertexId(u), VertexId(v), delta)
            .map_err(|e| Failure::new(CgStatus::Graph, e.to_string()))?;
        write_opt(out_weight, w);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_graph_find_vertex(g: *const CgGraph, label: *const c_char, out_id: *mut usize) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let label = text(label, "label")?;
        let id = g.inner.id_of(label).ok_or_else(|| Failure::new(CgStatus::NotFound, format!("no vertex {label:?}")))?;
        *deref_mut(out_id, "out_id")? = id.index();
        Ok(())
    })
}

/// Copies the label of `v` into `buf` with a trailing NUL. `out_len`, if not
/// null, receives the label length in bytes excluding the NUL, also when the
/// buffer is too small.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_label(
    g: *const CgGraph,
    v: usize,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let label = g.inner.label(vertex(&g.inner, v)?).as_bytes();
        write_opt(out_len, label.len());
        let dst = out_slice(buf, cap, label.len() + 1, "label buffer")?;
        for (d, &b) in dst.iter_mut().zip(label) {
            *d = b as c_char;
        }
        dst[label.len()] = 0;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_graph_frequency(g: *const CgGraph, v: usize, out: *mut u64) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let freq = g.inner.vertices()[vertex(&g.inner, v)?.index()].frequency;
        *deref_mut(out, "out")? = freq;
        Ok(())
    })
}

/// Edges in canonical order (`u < v`, sorted by `u` then `v`), the order
/// used by edge betweenness. Each array needs `cg_graph_edge_count` slots.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_edges(
    g: *const CgGraph,
    out_u: *mut usize,
    out_v: *mut usize,
    out_weight: *mut u64,
    cap: usize,
) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let m = g.inner.edge_count();
        let us = out_slice(out_u, cap, m, "out_u")?;
        let vs = out_slice(out_v, cap, m, "out_v")?;
        let ws = out_slice(out_weight, cap, m, "out_weight")?;
        for (i, e) in g.inner.edges().enumerate() {
            us[i] = e.u.index();
            vs[i] = e.v.index();
            ws[i] = e.weight;
        }
        Ok(())
    })
}

/// Eigenvector centrality on the largest component, maximum 1, zero
/// elsewhere. `out` needs one slot per vertex.
#[no_mangle]
pub unsafe extern "C" fn cg_eigenvector(
    g: *const CgGraph,
    tolerance: f64,
    max_iterations: usize,
    out: *mut f64,
    cap: usize,
) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let dst = out_slice(out, cap, g.inner.vertex_count(), "out")?;
        let scores = eigenvector_centrality(&g.inner, tolerance, max_iterations).map_err(analysis)?;
        dst.copy_from_slice(&scores);
        Ok(())
    })
}

/// Vertex and edge betweenness, each unordered pair counted once. With
/// `weighted`, an edge of weight `w` has length `1 / w`. `out_edge` may be
/// null to skip edge scores; otherwise it is filled in canonical edge order.
#[no_mangle]
pub unsafe extern "C" fn cg_betweenness(
    g: *const CgGraph,
    weighted: bool,
    out_vertex: *mut f64,
    vertex_cap: usize,
    out_edge: *mut f64,
    edge_cap: usize,
) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let vdst = out_slice(out_vertex, vertex_cap, g.inner.vertex_count(), "out_vertex")?;
        let edst = if out_edge.is_null() {
            None
        } else {
            Some(out_slice(out_edge, edge_cap, g.inner.edge_count(), "out_edge")?)
        };
        let Betweenness { vertex, edge } = brandes::<f64>(&g.inner, Weighting::from_flag(weighted)).map_err(analysis)?;
        vdst.copy_from_slice(&vertex);
        if let Some(edst) = edst {
            edst.copy_from_slice(&edge);
        }
        Ok(())
    })
}

/// Fast-greedy agglomeration cut at maximum modularity. The partition is
/// written to `*out` and must be released with [`cg_partition_free`].
#[no_mangle]
pub unsafe extern "C" fn cg_fast_greedy(g: *const CgGraph, out: *mut *mut CgPartition) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let slot = deref_mut(out, "out")?;
        let (_, partition) = detect(&g.inner);
        *slot = Box::into_raw(Box::new(CgPartition { inner: partition }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_partition_free(p: *mut CgPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cg_partition_vertex_count(p: *const CgPartition) -> usize {
    p.as_ref().map_or(0, |p| p.inner.assignment.len())
}

#[no_mangle]
pub unsafe extern "C" fn cg_partition_community_count(p: *const CgPartition) -> usize {
    p.as_ref().map_or(0, |p| p.inner.community_count())
}

/// Modularity of the partition, NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cg_partition_modularity(p: *const CgPartition) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.inner.q)
}

/// Community id per vertex; ids are dense from 0.
#[no_mangle]
pub unsafe extern "C" fn cg_partition_assignment(p: *const CgPartition, out: *mut usize, cap: usize) -> CgStatus {
    guard(|| {
        let p = deref(p, "partition")?;
        let dst = out_slice(out, cap, p.inner.assignment.len(), "out")?;
        dst.copy_from_slice(&p.inner.assignment);
        Ok(())
    })
}

/// Weighted modularity of an arbitrary assignment with one entry per vertex.
#[no_mangle]
pub unsafe extern "C" fn cg_modularity(
    g: *const CgGraph,
    assignment: *const usize,
    len: usize,
    out: *mut f64,
) -> CgStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let n = g.inner.vertex_count();
        if len != n {
            return Err(Failure::new(
                CgStatus::InvalidArgument,
                format!("assignment has {len} entries, graph has {n} vertices"),
            ));
        }
        let labels = if n == 0 {
            &[][..]
        } else if assignment.is_null() {
            return Err(Failure::new(CgStatus::NullPointer, "assignment is null"));
        } else {
            std::slice::from_raw_parts(assignment, n)
        };
        let slot = deref_mut(out, "out")?;
        *slot = modularity(&g.inner, labels).map_err(analysis)?;
        Ok(())
    })
}

/// Reads a JSONL post file, cleans it and builds the top-`k` co-occurrence
/// network. `rules_path` may be null for default rules and `area` may be null
/// for "area". The share of top-`k` tag occurrences that co-occur with another
/// top-`k` tag goes to `out_coverage` unless it is null.
#[no_mangle]
pub unsafe extern "C" fn cg_network_from_jsonl(
    posts_path: *const c_char,
    rules_path: *const c_char,
    area: *const c_char,
    k: usize,
    out_graph: *mut *mut CgGraph,
    out_coverage: *mut f64,
) -> CgStatus {
    guard(|| {
        let posts_path = text(posts_path, "posts_path")?;
        let rules = if rules_path.is_null() {
            CleaningRules::default()
        } else {
            CleaningRules::load(Path::new(text(rules_path, "rules_path")?)).map_err(ingest)?
        };
        let area = if area.is_null() { "area" } else { text(area, "area")? };
        let slot = deref_mut(out_graph, "out_graph")?;
        let posts = read_posts(Path::new(posts_path)).map_err(ingest)?;
        let (corpus, _) = clean(area, &posts, &rules);
        let net = build_network(&corpus, k).map_err(analysis)?;
        write_opt(out_coverage, net.coverage);
        *slot = Box::into_raw(Box::new(CgGraph { inner: net.graph }));
        Ok(())
    })
}
