//! Co-occurrence networks over the most frequent hashtags of a corpus, and
//! the merged network across areas.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{VertexId, WeightedGraph};
use crate::ingest::{hashtag_frequencies, Corpus};

pub const DEFAULT_K_TOP: usize = 150;
pub const DEFAULT_PAIR_BUDGET: usize = 1400;

const POSTS_PER_TASK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CooccurError {
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("corpus {area:?} has {distinct} distinct hashtags; at least 2 are needed")]
    DegenerateCorpus { area: String, distinct: usize },
    #[error("top set is empty")]
    EmptyTopSet,
    #[error("merging needs at least 2 corpora, got {0}")]
    TooFewCorpora(usize),
    #[error("pair budget must be at least 1")]
    InvalidBudget,
    #[error("merged corpora contain no hashtag pairs")]
    EmptyUnion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaNetwork {
    pub area_name: String,
    pub graph: WeightedGraph,
    pub k_used: usize,
    pub coverage: f64,
}

/// Hashtags ranked by descending frequency, ties by ascending label.
pub fn ranked_hashtags(c: &Corpus) -> Vec<(String, u64)> {
    let mut ranked: Vec<(String, u64)> = hashtag_frequencies(c).into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Network over the top-`k` hashtags; vertex ids follow frequency rank.
/// Every post adds 1 to each unordered pair of its top-`k` tags.
pub fn build_network(c: &Corpus, k: usize) -> Result<AreaNetwork, CooccurError> {
    if k < 2 {
        return Err(CooccurError::InvalidK(k));
    }
    let mut ranked = ranked_hashtags(c);
    if ranked.len() < 2 {
        return Err(CooccurError::DegenerateCorpus { area: c.area_name.clone(), distinct: ranked.len() });
    }
    ranked.truncate(k);

    let mut graph = WeightedGraph::with_capacity(ranked.len());
    for (label, freq) in &ranked {
        graph.add_vertex(label.clone(), *freq).expect("ranked labels are unique");
    }
    let ids: HashMap<&str, u32> = ranked.iter().enumerate().map(|(i, (l, _))| (l.as_str(), i as u32)).collect();
    let posts: Vec<Vec<u32>> = c
        .tag_lists()
        .map(|tags| tags.iter().filter_map(|t| ids.get(t.as_str()).copied()).collect())
        .collect();
    for ((a, b), w) in sorted_pairs(count_pairs(&posts)) {
        graph.upsert_edge(VertexId(a as usize), VertexId(b as usize), w).expect("valid pair");
    }

    let top: HashSet<&str> = ids.keys().copied().collect();
    let coverage = coverage_of(c, &top);
    Ok(AreaNetwork { area_name: c.area_name.clone(), k_used: graph.vertex_count(), graph, coverage })
}

/// Pair counts over posts given as id lists. Duplicate ids within a post are
/// counted once.
pub fn count_pairs(posts: &[Vec<u32>]) -> HashMap<(u32, u32), u64> {
    posts
        .par_chunks(POSTS_PER_TASK)
        .map(|chunk| {
            let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
            let mut scratch = Vec::new();
            for post in chunk {
                scratch.clear();
                scratch.extend_from_slice(post);
                scratch.sort_unstable();
                scratch.dedup();
                for (i, &a) in scratch.iter().enumerate() {
                    for &b in &scratch[i + 1..] {
                        *counts.entry((a, b)).or_default() += 1;
                    }
                }
            }
            counts
        })
        .reduce(HashMap::new, |mut acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_default() += v;
            }
            acc
        })
}

fn sorted_pairs(counts: HashMap<(u32, u32), u64>) -> Vec<((u32, u32), u64)> {
    let mut pairs: Vec<_> = counts.into_iter().collect();
    pairs.sort_unstable_by_key(|&(k, _)| k);
    pairs
}

/// Share of top-set tag occurrences whose post holds at least one other
/// top-set tag.
pub fn coverage_stat(c: &Corpus, top_set: &HashSet<String>) -> Result<f64, CooccurError> {
    if top_set.is_empty() {
        return Err(CooccurError::EmptyTopSet);
    }
    let top: HashSet<&str> = top_set.iter().map(String::as_str).collect();
    Ok(coverage_of(c, &top))
}

fn coverage_of(c: &Corpus, top: &HashSet<&str>) -> f64 {
    let (mut paired, mut total) = (0u64, 0u64);
    for tags in c.tag_lists() {
        let members = tags.iter().filter(|t| top.contains(t.as_str())).collect::<HashSet<_>>().len() as u64;
        total += members;
        if members >= 2 {
            paired += members;
        }
    }
    if total == 0 {
        0.0
    } else {
        paired as f64 / total as f64
    }
}

/// Where merged pair counts come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    /// Recount pairs over every cleaned post of every area.
    #[default]
    AllPosts,
    /// Sum the edges of each area's top-`k` network.
    AreaNetworks { k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedNetwork {
    pub graph: WeightedGraph,
    pub pair_budget: usize,
    /// Dominant area per vertex, indexed by vertex id.
    pub area_of: Vec<String>,
    pub weight_coverage: f64,
    pub distinct_pairs: usize,
    pub total_pair_weight: u64,
    pub retained_pair_weight: u64,
}

pub fn merge_networks(corpora: &[Corpus], pair_budget: usize) -> Result<MergedNetwork, CooccurError> {
    merge_networks_with(corpora, pair_budget, PairSource::AllPosts)
}

pub fn merge_networks_with(
    corpora: &[Corpus],
    pair_budget: usize,
    source: PairSource,
) -> Result<MergedNetwork, CooccurError> {
    if corpora.len() < 2 {
        return Err(CooccurError::TooFewCorpora(corpora.len()));
    }
    if pair_budget == 0 {
        return Err(CooccurError::InvalidBudget);
    }

    // Global interning in label order, so id order equals label order.
    let per_area: Vec<BTreeMap<String, u64>> = corpora.par_iter().map(hashtag_frequencies).collect();
    let mut labels: Vec<&str> = per_area.iter().flat_map(|f| f.keys().map(String::as_str)).collect();
    labels.sort_unstable();
    labels.dedup();
    let ids: HashMap<&str, u32> = labels.iter().enumerate().map(|(i, l)| (*l, i as u32)).collect();

    let counts = match source {
        PairSource::AllPosts => {
            let posts: Vec<Vec<u32>> = corpora
                .iter()
                .flat_map(|c| c.tag_lists())
                .map(|tags| tags.iter().map(|t| ids[t.as_str()]).collect())
                .collect();
            count_pairs(&posts)
        }
        PairSource::AreaNetworks { k } => {
            let networks: Vec<AreaNetwork> =
                corpora.par_iter().map(|c| build_network(c, k)).collect::<Result<_, _>>()?;
            let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
            for net in &networks {
                for e in net.graph.edges() {
                    let (a, b) = (ids[net.graph.label(e.u)], ids[net.graph.label(e.v)]);
                    *counts.entry((a.min(b), a.max(b))).or_default() += e.weight;
                }
            }
            counts
        }
    };
    if counts.is_empty() {
        return Err(CooccurError::EmptyUnion);
    }

    let distinct_pairs = counts.len();
    let total_pair_weight: u64 = counts.values().sum();
    let mut pairs: Vec<((u32, u32), u64)> = counts.into_iter().collect();
    pairs.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    pairs.truncate(pair_budget);
    let retained_pair_weight: u64 = pairs.iter().map(|p| p.1).sum();

    let mut frequency: HashMap<u32, u64> = HashMap::new();
    let mut area_of_label: HashMap<u32, &str> = HashMap::new();
    for &((a, b), _) in &pairs {
        for id in [a, b] {
            if frequency.contains_key(&id) {
                continue;
            }
            let label = labels[id as usize];
            let mut sum = 0;
            let mut best: Option<(u64, &str)> = None;
            for (freqs, corpus) in per_area.iter().zip(corpora) {
                let Some(&f) = freqs.get(label) else { continue };
                sum += f;
                let area = corpus.area_name.as_str();
                let better = match best {
                    None => true,
                    Some((bf, ba)) => f > bf || (f == bf && area < ba),
                };
                if better {
                    best = Some((f, area));
                }
            }
            frequency.insert(id, sum);
            area_of_label.insert(id, best.map_or("", |b| b.1));
        }
    }

    let mut members: Vec<u32> = frequency.keys().copied().collect();
    members.sort_unstable_by(|a, b| frequency[b].cmp(&frequency[a]).then_with(|| a.cmp(b)));
    let mut graph = WeightedGraph::with_capacity(members.len());
    let mut local = HashMap::with_capacity(members.len());
    let mut area_of = Vec::with_capacity(members.len());
    for id in members {
        let v = graph.add_vertex(labels[id as usize], frequency[&id]).expect("unique labels");
        local.insert(id, v);
        area_of.push(area_of_label[&id].to_owned());
    }
    for ((a, b), w) in pairs {
        graph.upsert_edge(local[&a], local[&b], w).expect("valid pair");
    }

    Ok(MergedNetwork {
        graph,
        pair_budget,
        area_of,
        weight_coverage: retained_pair_weight as f64 / total_pair_weight as f64,
        distinct_pairs,
        total_pair_weight,
        retained_pair_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(area: &str, posts: &[&[&str]]) -> Corpus {
        Corpus::from_tag_lists(area, posts.iter().map(|p| p.iter().copied()))
    }

    #[test]
    fn single_clique() {
        let net = build_network(&corpus("x", &[&["a", "b", "c"]]), 3).unwrap();
        assert_eq!(net.graph.vertex_count(), 3);
        assert_eq!(net.graph.edge_count(), 3);
        assert!(net.graph.edges().all(|e| e.weight == 1));
    }

    #[test]
    fn repeated_pairs_add_up() {
        let net = build_network(&corpus("x", &[&["a", "b"], &["a", "b"]]), 150).unwrap();
        assert_eq!(net.graph.weight(VertexId(0), VertexId(1)), Some(2));
        assert_eq!(net.k_used, 2);
    }

    #[test]
    fn top_k_ties_break_by_label() {
        let c = corpus("x", &[&["b", "c", "a"], &["d", "a"]]);
        let net = build_network(&c, 3).unwrap();
        let labels: Vec<_> = net.graph.vertices().iter().map(|v| v.label.as_str()).collect();
        assert_eq!(labels, ["a", "b", "c"]);
        // d is outside the top set so its pair with a is ignored.
        assert_eq!(net.graph.edge_count(), 3);
    }

    #[test]
    fn small_corpus_degenerate_and_invalid_k() {
        assert_eq!(
            build_network(&corpus("x", &[&["a"], &["a"]]), 150),
            Err(CooccurError::DegenerateCorpus { area: "x".into(), distinct: 1 })
        );
        assert_eq!(build_network(&corpus("x", &[&["a", "b"]]), 1), Err(CooccurError::InvalidK(1)));
    }

    #[test]
    fn isolated_top_vertices_are_kept() {
        let net = build_network(&corpus("x", &[&["a", "b"], &["c"]]), 3).unwrap();
        assert_eq!(net.graph.vertex_count(), 3);
        assert_eq!(net.graph.degree(net.graph.id_of("c").unwrap()), 0);
    }

    #[test]
    fn coverage_examples() {
        let top: HashSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let paired = corpus("x", &[&["a", "b"], &["b", "a"]]);
        assert_eq!(coverage_stat(&paired, &top).unwrap(), 1.0);
        let single = corpus("x", &[&["a"], &["b"]]);
        assert_eq!(coverage_stat(&single, &top).unwrap(), 0.0);
        assert_eq!(coverage_stat(&single, &HashSet::new()), Err(CooccurError::EmptyTopSet));
        // 3 occurrences, 2 paired.
        let mixed = corpus("x", &[&["a", "b", "z"], &["a"]]);
        assert!((coverage_stat(&mixed, &top).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn merge_disjoint_corpora() {
        let a = corpus("a", &[&["x", "y"], &["x", "y", "z"]]);
        let b = corpus("b", &[&["p", "q"]]);
        let m = merge_networks(&[a, b], 100).unwrap();
        assert_eq!(m.weight_coverage, 1.0);
        assert_eq!(m.graph.connected_components().len(), 2);
        assert_eq!(m.graph.edge_count(), 4);
    }

    #[test]
    fn merge_unifies_labels() {
        let a = corpus("a", &[&["travel", "beach"], &["travel", "sun"]]);
        let b = corpus("b", &[&["travel", "glacier"]]);
        let m = merge_networks(&[a, b], 100).unwrap();
        let t = m.graph.id_of("travel").unwrap();
        assert_eq!(m.graph.vertex(t).unwrap().frequency, 3);
        assert_eq!(m.area_of[t.index()], "a");
        assert_eq!(m.area_of[m.graph.id_of("glacier").unwrap().index()], "b");
    }

    #[test]
    fn merge_budget_one_keeps_heaviest_pair() {
        let a = corpus("a", &[&["x", "y"], &["x", "y"], &["x", "z"]]);
        let b = corpus("b", &[&["p", "q"]]);
        let m = merge_networks(&[a, b], 1).unwrap();
        assert_eq!(m.graph.edge_count(), 1);
        assert_eq!(m.graph.vertex_count(), 2);
        assert_eq!(m.graph.weight(m.graph.id_of("x").unwrap(), m.graph.id_of("y").unwrap()), Some(2));
        assert!((m.weight_coverage - 0.5).abs() < 1e-15);
    }

    #[test]
    fn merge_area_tie_goes_to_smaller_name() {
        let a = corpus("zeta", &[&["x", "y"]]);
        let b = corpus("alpha", &[&["x", "w"]]);
        let m = merge_networks(&[a, b], 10).unwrap();
        assert_eq!(m.area_of[m.graph.id_of("x").unwrap().index()], "alpha");
    }

    #[test]
    fn merge_errors() {
        let a = corpus("a", &[&["x", "y"]]);
        assert_eq!(merge_networks(std::slice::from_ref(&a), 5), Err(CooccurError::TooFewCorpora(1)));
        assert_eq!(merge_networks(&[a.clone(), a.clone()], 0), Err(CooccurError::InvalidBudget));
        let lone = corpus("b", &[&["x"]]);
        assert_eq!(merge_networks(&[lone.clone(), lone], 5), Err(CooccurError::EmptyUnion));
    }

    #[test]
    fn merge_from_area_networks() {
        let a = corpus("a", &[&["x", "y", "z"], &["x", "y"]]);
        let b = corpus("b", &[&["x", "y"], &["p", "q"]]);
        let m = merge_networks_with(&[a, b], 10, PairSource::AreaNetworks { k: 2 }).unwrap();
        // Area a keeps {x, y}; area b ties at 1 and keeps {p, q}.
        let g = &m.graph;
        assert_eq!(g.weight(g.id_of("x").unwrap(), g.id_of("y").unwrap()), Some(2));
        assert_eq!(g.edge_count(), 2);
    }
}
