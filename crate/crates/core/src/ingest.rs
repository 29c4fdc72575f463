//! Post corpora: parsing line-delimited JSON exports and applying cleaning
//! rules (exclusions, synonym merges, translations, query-tag removal).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: field `post_id` is empty")]
    EmptyPostId { line: usize },
    #[error("alias cycle: {}", .0.join(" -> "))]
    AliasCycle(Vec<String>),
    #[error("invalid cleaning rules: {0}")]
    InvalidRules(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub post_id: String,
    pub user_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub hashtags: Vec<String>,
    pub query: String,
}

const REQUIRED: [&str; 4] = ["post_id", "user_id", "hashtags", "query"];

/// One post per non-blank line, in input order.
pub fn parse_posts<R: BufRead>(source: R) -> Result<Vec<RawPost>, IngestError> {
    let mut posts = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| IngestError::Malformed { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| IngestError::Malformed { line: line_no, message: e.to_string() })?;
        let obj = value
            .as_object()
            .ok_or_else(|| IngestError::Malformed { line: line_no, message: "expected a JSON object".into() })?;
        if let Some(field) = REQUIRED.iter().find(|f| !obj.contains_key(**f)) {
            return Err(IngestError::MissingField { line: line_no, field });
        }
        let post: RawPost = serde_json::from_value(value)
            .map_err(|e| IngestError::Malformed { line: line_no, message: e.to_string() })?;
        if post.post_id.is_empty() {
            return Err(IngestError::EmptyPostId { line: line_no });
        }
        posts.push(post);
    }
    Ok(posts)
}

pub fn read_posts(path: &Path) -> Result<Vec<RawPost>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    parse_posts(std::io::BufReader::new(file))
}

pub fn write_posts<W: std::io::Write>(mut out: W, posts: &[RawPost]) -> std::io::Result<()> {
    for post in posts {
        serde_json::to_writer(&mut out, post)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Concatenates several query downloads for one area, keeping the first
/// copy of any post id. Returns the merged posts and the duplicate count.
pub fn concat_dedup(batches: Vec<Vec<RawPost>>) -> (Vec<RawPost>, usize) {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut duplicates = 0;
    for post in batches.into_iter().flatten() {
        if seen.insert(post.post_id.clone()) {
            out.push(post);
        } else {
            duplicates += 1;
        }
    }
    (out, duplicates)
}

/// Strips one leading `#`, trims and lowercases. `None` when nothing is left.
pub fn normalize_hashtag(tag: &str) -> Option<String> {
    let trimmed = tag.trim();
    let body = trimmed.strip_prefix('#').unwrap_or(trimmed).trim();
    if body.is_empty() {
        None
    } else {
        Some(body.to_lowercase())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RulesFile {
    pub exclude_hashtags: Vec<String>,
    pub exclude_users: Vec<String>,
    pub synonyms: BTreeMap<String, String>,
    pub translations: BTreeMap<String, String>,
    #[serde(default = "default_true")]
    pub drop_query_hashtags: bool,
}

fn default_true() -> bool {
    true
}

/// Validated cleaning rules with normalized terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleaningRules {
    exclude_hashtags: BTreeSet<String>,
    exclude_users: BTreeSet<String>,
    synonyms: BTreeMap<String, String>,
    translations: BTreeMap<String, String>,
    drop_query_hashtags: bool,
}

impl Default for CleaningRules {
    fn default() -> Self {
        Self::from_file(RulesFile { drop_query_hashtags: true, ..RulesFile::default() }).expect("empty rules are valid")
    }
}

impl CleaningRules {
    /// Normalizes every term, drops identity mappings and rejects alias
    /// chains that never reach a canonical term.
    pub fn from_file(file: RulesFile) -> Result<Self, IngestError> {
        let norm = |t: &str, what: &str| {
            normalize_hashtag(t).ok_or_else(|| IngestError::InvalidRules(format!("empty {what} term {t:?}")))
        };
        let exclude_hashtags = file
            .exclude_hashtags
            .iter()
            .map(|t| norm(t, "excluded"))
            .collect::<Result<_, _>>()?;
        let map = |src: &BTreeMap<String, String>, what: &str| -> Result<BTreeMap<String, String>, IngestError> {
            let mut out = BTreeMap::new();
            for (alias, canonical) in src {
                let (a, c) = (norm(alias, what)?, norm(canonical, what)?);
                if a == c {
                    continue;
                }
                if let Some(prev) = out.insert(a.clone(), c.clone()) {
                    if prev != c {
                        return Err(IngestError::InvalidRules(format!(
                            "{what} {a:?} maps to both {prev:?} and {c:?}"
                        )));
                    }
                }
            }
            Ok(out)
        };
        let synonyms = map(&file.synonyms, "synonym")?;
        let translations = map(&file.translations, "translation")?;
        let rules = Self {
            exclude_hashtags,
            exclude_users: file.exclude_users.into_iter().collect(),
            synonyms,
            translations,
            drop_query_hashtags: file.drop_query_hashtags,
        };
        rules.check_acyclic()?;
        Ok(rules)
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let file: RulesFile =
            serde_json::from_str(text).map_err(|e| IngestError::InvalidRules(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_file(&self) -> RulesFile {
        RulesFile {
            exclude_hashtags: self.exclude_hashtags.iter().cloned().collect(),
            exclude_users: self.exclude_users.iter().cloned().collect(),
            synonyms: self.synonyms.clone(),
            translations: self.translations.clone(),
            drop_query_hashtags: self.drop_query_hashtags,
        }
    }

    pub fn with_drop_query_hashtags(mut self, drop: bool) -> Self {
        self.drop_query_hashtags = drop;
        self
    }

    pub fn drop_query_hashtags(&self) -> bool {
        self.drop_query_hashtags
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(&self.to_file()).expect("rules serialize");
        hex::encode(Sha256::digest(canonical))
    }

    fn step(&self, tag: &str) -> Option<(&str, Rewrite)> {
        if let Some(c) = self.synonyms.get(tag) {
            Some((c, Rewrite::Synonym))
        } else {
            self.translations.get(tag).map(|c| (c.as_str(), Rewrite::Translation))
        }
    }

    fn check_acyclic(&self) -> Result<(), IngestError> {
        // Follow every alias; the maps are small, so a walk per key is fine.
        for start in self.synonyms.keys().chain(self.translations.keys()) {
            let mut path = vec![start.clone()];
            let mut seen: HashSet<&str> = HashSet::from([start.as_str()]);
            let mut current = start.as_str();
            while let Some((next, _)) = self.step(current) {
                path.push(next.to_owned());
                if !seen.insert(next) {
                    let from = path.iter().position(|t| t == next).unwrap_or(0);
                    return Err(IngestError::AliasCycle(path[from..].to_vec()));
                }
                current = next;
            }
        }
        Ok(())
    }

    /// Canonical form of a normalized tag: synonyms take precedence over
    /// translations at each hop, and hops repeat until neither applies.
    pub fn resolve(&self, tag: &str) -> String {
        self.resolve_counted(tag, &mut CleaningSummary::default())
    }

    fn resolve_counted(&self, tag: &str, summary: &mut CleaningSummary) -> String {
        let mut current = tag;
        while let Some((next, kind)) = self.step(current) {
            match kind {
                Rewrite::Synonym => summary.synonym_rewrites += 1,
                Rewrite::Translation => summary.translation_rewrites += 1,
            }
            current = next;
        }
        current.to_owned()
    }
}

#[derive(Clone, Copy)]
enum Rewrite {
    Synonym,
    Translation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanPost {
    pub post_id: String,
    pub user_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub query: String,
    /// Normalized, resolved and unique, in first-occurrence order.
    pub hashtags: Vec<String>,
}

impl CleanPost {
    pub fn to_raw(&self) -> RawPost {
        RawPost {
            post_id: self.post_id.clone(),
            user_id: self.user_id.clone(),
            timestamp: self.timestamp.clone(),
            hashtags: self.hashtags.clone(),
            query: self.query.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub area_name: String,
    pub posts: Vec<CleanPost>,
    pub rules_digest: String,
}

impl Corpus {
    /// Builds a corpus straight from tag lists (used for synthetic data and
    /// tests). Tags are normalized and deduplicated; nothing is excluded.
    pub fn from_tag_lists<I, P, S>(area_name: &str, posts: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let posts = posts
            .into_iter()
            .enumerate()
            .map(|(i, tags)| {
                let mut seen = HashSet::new();
                let hashtags = tags
                    .into_iter()
                    .filter_map(|t| normalize_hashtag(t.as_ref()))
                    .filter(|t| seen.insert(t.clone()))
                    .collect();
                CleanPost {
                    post_id: format!("{area_name}-{i}"),
                    user_id: String::new(),
                    timestamp: None,
                    query: String::new(),
                    hashtags,
                }
            })
            .collect();
        Self { area_name: area_name.to_owned(), posts, rules_digest: String::new() }
    }

    pub fn tag_lists(&self) -> impl Iterator<Item = &[String]> {
        self.posts.iter().map(|p| p.hashtags.as_slice())
    }

    pub fn raw_posts(&self) -> Vec<RawPost> {
        self.posts.iter().map(CleanPost::to_raw).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningSummary {
    pub area: String,
    pub rules_digest: String,
    pub input_posts: usize,
    pub dropped_posts: usize,
    pub retained_posts: usize,
    pub dropped_by_user: usize,
    pub dropped_by_hashtag: usize,
    /// Posts dropped per excluded hashtag; a post can hit several.
    pub excluded_hashtag_hits: BTreeMap<String, usize>,
    pub excluded_user_hits: BTreeMap<String, usize>,
    pub synonym_rewrites: usize,
    pub translation_rewrites: usize,
    pub query_tags_removed: usize,
    pub empty_tags_dropped: usize,
    pub duplicate_tags_merged: usize,
    pub duplicate_posts_merged: usize,
    pub posts_with_fewer_than_two_tags: usize,
}

/// Applies `rules` to `posts`. Whole posts are dropped when their author or
/// any of their tags (before or after alias resolution) is excluded.
pub fn clean(area_name: &str, posts: &[RawPost], rules: &CleaningRules) -> (Corpus, CleaningSummary) {
    let mut summary = CleaningSummary {
        area: area_name.to_owned(),
        rules_digest: rules.digest(),
        input_posts: posts.len(),
        ..CleaningSummary::default()
    };
    let mut out = Vec::with_capacity(posts.len());
    let mut query_cache: HashMap<&str, Option<String>> = HashMap::new();

    'posts: for post in posts {
        if rules.exclude_users.contains(&post.user_id) {
            summary.dropped_by_user += 1;
            *summary.excluded_user_hits.entry(post.user_id.clone()).or_default() += 1;
            continue;
        }
        let mut resolved = Vec::with_capacity(post.hashtags.len());
        let mut rewrites = CleaningSummary::default();
        let mut hits = BTreeSet::new();
        for tag in &post.hashtags {
            let Some(norm) = normalize_hashtag(tag) else {
                rewrites.empty_tags_dropped += 1;
                continue;
            };
            let canonical = rules.resolve_counted(&norm, &mut rewrites);
            for t in [&norm, &canonical] {
                if rules.exclude_hashtags.contains(t) {
                    hits.insert(t.clone());
                }
            }
            resolved.push(canonical);
        }
        if !hits.is_empty() {
            summary.dropped_by_hashtag += 1;
            for t in hits {
                *summary.excluded_hashtag_hits.entry(t).or_default() += 1;
            }
            continue 'posts;
        }
        summary.empty_tags_dropped += rewrites.empty_tags_dropped;
        summary.synonym_rewrites += rewrites.synonym_rewrites;
        summary.translation_rewrites += rewrites.translation_rewrites;

        let query_tag = query_cache
            .entry(post.query.as_str())
            .or_insert_with(|| normalize_hashtag(&post.query).map(|q| rules.resolve(&q)));
        let mut seen = HashSet::with_capacity(resolved.len());
        let mut hashtags = Vec::with_capacity(resolved.len());
        for tag in resolved {
            if rules.drop_query_hashtags && query_tag.as_deref() == Some(tag.as_str()) {
                summary.query_tags_removed += 1;
                continue;
            }
            if seen.insert(tag.clone()) {
                hashtags.push(tag);
            } else {
                summary.duplicate_tags_merged += 1;
            }
        }
        if hashtags.len() < 2 {
            summary.posts_with_fewer_than_two_tags += 1;
        }
        out.push(CleanPost {
            post_id: post.post_id.clone(),
            user_id: post.user_id.clone(),
            timestamp: post.timestamp.clone(),
            query: post.query.clone(),
            hashtags,
        });
    }

    summary.retained_posts = out.len();
    summary.dropped_posts = summary.input_posts - summary.retained_posts;
    let corpus = Corpus { area_name: area_name.to_owned(), posts: out, rules_digest: summary.rules_digest.clone() };
    (corpus, summary)
}

/// Number of posts containing each hashtag.
pub fn hashtag_frequencies(c: &Corpus) -> BTreeMap<String, u64> {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for tags in c.tag_lists() {
        let unique: HashSet<&str> = tags.iter().map(String::as_str).collect();
        for t in unique {
            *freq.entry(t).or_default() += 1;
        }
    }
    freq.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}
