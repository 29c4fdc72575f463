//! Seeded synthetic post corpora with planted themes and Zipfian tag use.
//!
//! Each post picks one theme, draws distinct terms from that theme's pool by
//! Zipf rank, and sometimes adds terms from a pool shared by every area.
//! The ledger records the ground truth the corpus was drawn from, counted
//! the way the cleaning rules written alongside it will see the data: query
//! tags, spam posts and alias spellings are already resolved away.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ces::CesLexicon;
use crate::ingest::{RawPost, RulesFile};

pub const GLOBAL_THEME: &str = "global";
/// Theme name recorded for rare tail tags.
pub const TAIL_THEME: &str = "tail";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("plan {area:?}: {reason}")]
    Degenerate { area: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemePlan {
    pub name: String,
    /// CES class whose terms were planted in this theme, if any.
    #[serde(default)]
    pub ces_class: Option<String>,
    /// Pool in Zipf rank order (first = most frequent).
    pub terms: Vec<String>,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPlan {
    pub area_name: String,
    pub query: String,
    pub themes: Vec<ThemePlan>,
    #[serde(default)]
    pub global_terms: Vec<String>,
    /// Probability that a post also carries shared terms.
    #[serde(default)]
    pub global_rate: f64,
    /// Zipf exponent over `global_terms`.
    #[serde(default = "one")]
    pub global_zipf_exponent: f64,
    pub zipf_exponent: f64,
    pub posts: usize,
    pub min_tags: usize,
    pub max_tags: usize,
    /// Extra advertising posts, all by one user and carrying `spam_tag`.
    #[serde(default)]
    pub spam_posts: usize,
    #[serde(default = "default_spam_tag")]
    pub spam_tag: String,
    /// canonical term -> alternative spellings used in raw posts.
    #[serde(default)]
    pub aliases: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub alias_rate: f64,
    /// Size of an area-specific vocabulary of rare tags, drawn uniformly.
    #[serde(default)]
    pub tail_terms: usize,
    /// Probability that a post carries one rare tag.
    #[serde(default)]
    pub tail_rate: f64,
    pub seed: u64,
}

fn default_spam_tag() -> String {
    "chocolate".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub area_name: String,
    pub posts: usize,
    pub spam_posts: usize,
    pub frequencies: BTreeMap<String, u64>,
    /// Term -> theme name (`"global"` for shared terms).
    pub term_theme: BTreeMap<String, String>,
    /// Theme name -> planted CES class.
    pub theme_class: BTreeMap<String, String>,
    /// `(a, b, count)` with `a < b`, sorted.
    pub pair_counts: Vec<(String, String, u64)>,
}

impl Ledger {
    pub fn pair_map(&self) -> HashMap<(&str, &str), u64> {
        self.pair_counts.iter().map(|(a, b, c)| ((a.as_str(), b.as_str()), *c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCorpus {
    pub posts: Vec<RawPost>,
    pub ledger: Ledger,
    /// Rules that undo the generator's noise (spam, aliases, query tag).
    pub rules: RulesFile,
}

pub const SPAM_USER: &str = "promo_account";

impl SyntheticPlan {
    fn validate(&self) -> Result<(), SynthError> {
        let fail = |reason: &str| Err(SynthError::Degenerate { area: self.area_name.clone(), reason: reason.into() });
        if self.themes.is_empty() {
            return fail("no themes");
        }
        if self.posts == 0 {
            return fail("no posts");
        }
        if self.themes.iter().any(|t| t.terms.is_empty()) {
            return fail("theme with an empty term pool");
        }
        if !self.themes.iter().all(|t| t.weight > 0.0 && t.weight.is_finite()) {
            return fail("theme weights must be positive");
        }
        if self.min_tags == 0 || self.min_tags > self.max_tags {
            return fail("tags per post must satisfy 1 <= min_tags <= max_tags");
        }
        if !(self.zipf_exponent > 0.0 && self.global_zipf_exponent > 0.0) {
            return fail("zipf exponent must be positive");
        }
        let rates = [self.global_rate, self.alias_rate, self.tail_rate];
        if !rates.iter().all(|r| (0.0..=1.0).contains(r)) {
            return fail("rates must lie in [0, 1]");
        }
        if self.global_rate > 0.0 && self.global_terms.is_empty() {
            return fail("global_rate set without global terms");
        }
        if self.tail_rate > 0.0 && self.tail_terms == 0 {
            return fail("tail_rate set without tail terms");
        }
        let mut seen = BTreeSet::new();
        for term in self.themes.iter().flat_map(|t| &t.terms).chain(&self.global_terms) {
            if !seen.insert(term.as_str()) {
                return fail(&format!("term {term:?} appears in more than one pool"));
            }
        }
        Ok(())
    }
}

/// Draws `count` distinct pool indices by Zipf rank.
fn draw_distinct(rng: &mut ChaCha8Rng, zipf: &Zipf<f64>, pool: usize, count: usize, out: &mut Vec<usize>) {
    out.clear();
    let count = count.min(pool);
    let mut attempts = 0;
    while out.len() < count {
        let idx = if attempts < 64 * count {
            zipf.sample(rng) as usize - 1
        } else {
            // Heavy skew can make the last few ranks very slow to hit.
            rng.random_range(0..pool)
        };
        attempts += 1;
        if !out.contains(&idx) {
            out.push(idx);
        }
    }
}

fn tail_term(slug: &str, j: usize) -> String {
    format!("{slug}r{j:04}")
}

fn timestamp(i: usize) -> String {
    // Counting back from the end of June 2019, four minutes per post.
    let back = i as u64 * 240;
    let end = 30 * 86_400u64;
    let t = end - 1 - back.min(end - 1);
    let day = t / 86_400 + 1;
    let rem = t % 86_400;
    format!("2019-06-{day:02}T{:02}:{:02}:{:02}Z", rem / 3600, rem % 3600 / 60, rem % 60)
}

pub fn generate_synthetic(plan: &SyntheticPlan) -> Result<GeneratedCorpus, SynthError> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let theme_pick = WeightedIndex::new(plan.themes.iter().map(|t| t.weight)).expect("validated weights");
    let zipfs: Vec<Zipf<f64>> = plan
        .themes
        .iter()
        .map(|t| Zipf::new(t.terms.len() as f64, plan.zipf_exponent).expect("validated"))
        .collect();
    let global_zipf = (!plan.global_terms.is_empty())
        .then(|| Zipf::new(plan.global_terms.len() as f64, plan.global_zipf_exponent).expect("validated"));
    let users = (plan.posts / 3).max(1);
    let slug: String = plan.area_name.to_lowercase().chars().filter(|c| c.is_alphanumeric()).collect();
    let query_tag = format!("#{}", plan.query);

    let mut posts = Vec::with_capacity(plan.posts + plan.spam_posts);
    let mut frequencies: BTreeMap<String, u64> = BTreeMap::new();
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut picks = Vec::new();
    let mut global_picks = Vec::new();
    let spam_every = plan.posts.checked_div(plan.spam_posts).map_or(usize::MAX, |d| d.max(1));
    let mut spam_left = plan.spam_posts;

    for i in 0..plan.posts {
        let theme = theme_pick.sample(&mut rng);
        let pool = &plan.themes[theme].terms;
        let count = rng.random_range(plan.min_tags..=plan.max_tags);
        draw_distinct(&mut rng, &zipfs[theme], pool.len(), count, &mut picks);
        let mut canonical: Vec<&str> = picks.iter().map(|&p| pool[p].as_str()).collect();
        if let Some(gz) = &global_zipf {
            if rng.random_bool(plan.global_rate) {
                let extra = rng.random_range(1..=2usize);
                draw_distinct(&mut rng, gz, plan.global_terms.len(), extra, &mut global_picks);
                canonical.extend(global_picks.iter().map(|&p| plan.global_terms[p].as_str()));
            }
        }
        let tail_tag;
        if plan.tail_terms > 0 && rng.random_bool(plan.tail_rate) {
            tail_tag = tail_term(&slug, rng.random_range(0..plan.tail_terms));
            canonical.push(&tail_tag);
        }

        let mut raw = Vec::with_capacity(canonical.len() + 1);
        raw.push(query_tag.clone());
        for &term in &canonical {
            let alias = plan
                .aliases
                .get(term)
                .filter(|a| !a.is_empty() && plan.alias_rate > 0.0 && rng.random_bool(plan.alias_rate))
                .map(|a| a[rng.random_range(0..a.len())].clone());
            raw.push(match alias {
                Some(a) => format!("#{a}"),
                None if rng.random_bool(0.1) => format!("#{}", term.to_uppercase()),
                None => format!("#{term}"),
            });
        }

        let mut sorted = canonical.clone();
        sorted.sort_unstable();
        for (a_idx, a) in sorted.iter().enumerate() {
            *frequencies.entry((*a).to_owned()).or_default() += 1;
            for b in &sorted[a_idx + 1..] {
                *pairs.entry(((*a).to_owned(), (*b).to_owned())).or_default() += 1;
            }
        }

        posts.push(RawPost {
            post_id: format!("{slug}-{i:06}"),
            user_id: format!("user{:05}", rng.random_range(0..users)),
            timestamp: Some(timestamp(posts.len())),
            hashtags: raw,
            query: plan.query.clone(),
        });

        if spam_left > 0 && (i + 1) % spam_every == 0 {
            spam_left -= 1;
            posts.push(RawPost {
                post_id: format!("{slug}-ad{spam_left:05}"),
                user_id: SPAM_USER.into(),
                timestamp: Some(timestamp(posts.len())),
                hashtags: vec![query_tag.clone(), format!("#{}", plan.spam_tag), "#sale".into(), "#shop".into()],
                query: plan.query.clone(),
            });
        }
    }

    let mut term_theme = BTreeMap::new();
    let mut theme_class = BTreeMap::new();
    for t in &plan.themes {
        for term in &t.terms {
            term_theme.insert(term.clone(), t.name.clone());
        }
        if let Some(c) = &t.ces_class {
            theme_class.insert(t.name.clone(), c.clone());
        }
    }
    for term in &plan.global_terms {
        term_theme.insert(term.clone(), GLOBAL_THEME.into());
    }
    for j in 0..plan.tail_terms {
        term_theme.insert(tail_term(&slug, j), TAIL_THEME.into());
    }

    let synonyms = plan
        .aliases
        .iter()
        .flat_map(|(canonical, aliases)| aliases.iter().map(move |a| (a.clone(), canonical.clone())))
        .collect();
    let rules = RulesFile {
        exclude_hashtags: if plan.spam_posts > 0 { vec![plan.spam_tag.clone()] } else { Vec::new() },
        exclude_users: if plan.spam_posts > 0 { vec![SPAM_USER.into()] } else { Vec::new() },
        synonyms,
        translations: BTreeMap::new(),
        drop_query_hashtags: true,
    };

    let ledger = Ledger {
        area_name: plan.area_name.clone(),
        posts: plan.posts,
        spam_posts: plan.spam_posts - spam_left,
        frequencies,
        term_theme,
        theme_class,
        pair_counts: pairs.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
    };
    Ok(GeneratedCorpus { posts, ledger, rules })
}

/// Mixes an area index into a base seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Case-study names used for the full-scale synthetic set.
pub const AREA_NAMES: [&str; 14] = [
    "Galapagos",
    "Glacier Bay",
    "Great Barrier Reef",
    "Isole Egadi",
    "Macquarie Island",
    "Peninsula Valdes",
    "Easter Island",
    "Sandwich Harbour",
    "Skomer",
    "Tawharanui",
    "Tayrona",
    "Togean Islands",
    "Vamizi",
    "Ytrehvaler",
];

/// Terms every area shares, most frequent first.
pub const SHARED_TERMS: [&str; 8] =
    ["travel", "nature", "photo", "travelphotography", "instagood", "picoftheday", "explore", "wanderlust"];

fn class_terms(lex: &CesLexicon, class: &str, exclude: &BTreeSet<&str>, take: usize) -> Vec<String> {
    lex.classes()[class].iter().filter(|t| !exclude.contains(t.as_str())).take(take).cloned().collect()
}

/// Planted-theme corpus: `themes` themes, each seeded with terms of a
/// distinct starter-lexicon class followed by area-specific filler terms.
pub fn planted_plan(area_index: usize, area_name: &str, themes: usize, posts: usize, seed: u64) -> SyntheticPlan {
    let lex = CesLexicon::starter();
    let shared: BTreeSet<&str> = SHARED_TERMS.iter().copied().collect();
    let classes: Vec<&String> = lex.classes().keys().collect();
    let slug: String = area_name.to_lowercase().chars().filter(|c| c.is_alphanumeric()).collect();
    let theme_plans = (0..themes)
        .map(|t| {
            let class = classes[(area_index * 3 + t * 5) % classes.len()];
            let mut terms = class_terms(&lex, class, &shared, 5);
            terms.extend((0..35).map(|j| format!("{slug}{t}x{j:02}")));
            ThemePlan { name: format!("theme{t}"), ces_class: Some(class.clone()), terms, weight: 1.0 }
        })
        .collect();
    SyntheticPlan {
        area_name: area_name.to_owned(),
        query: slug.clone(),
        themes: theme_plans,
        global_terms: SHARED_TERMS[..3].iter().map(|s| s.to_string()).collect(),
        global_rate: 0.15,
        global_zipf_exponent: 1.1,
        zipf_exponent: 1.1,
        posts,
        min_tags: 3,
        max_tags: 7,
        spam_posts: posts / 100,
        spam_tag: "chocolate".into(),
        aliases: BTreeMap::from([("travel".into(), vec!["travelgram".into(), "instatravel".into(), "travell".into()])]),
        alias_rate: 0.2,
        tail_terms: 0,
        tail_rate: 0.0,
        seed,
    }
}

/// The full synthetic set: one plan per case-study name (cycled when more
/// than 14 are asked for), each with a derived seed. Small steep theme pools
/// plus a sparse tail of rare tags, so most pair weight sits on few pairs.
pub fn case_study_plans(areas: usize, posts: usize, seed: u64) -> Vec<SyntheticPlan> {
    (0..areas)
        .map(|i| {
            let name = if i < AREA_NAMES.len() {
                AREA_NAMES[i].to_owned()
            } else {
                format!("{} {}", AREA_NAMES[i % AREA_NAMES.len()], i / AREA_NAMES.len() + 1)
            };
            let mut plan = planted_plan(i, &name, 3 + i % 3, posts, derive_seed(seed, i as u64));
            for t in &mut plan.themes {
                t.terms.truncate(10);
            }
            plan.global_terms = SHARED_TERMS.iter().map(|s| s.to_string()).collect();
            plan.global_rate = 0.7;
            plan.global_zipf_exponent = 1.6;
            plan.zipf_exponent = 2.2;
            plan.min_tags = 2;
            plan.max_tags = 4;
            plan.tail_terms = 2000;
            plan.tail_rate = 0.03;
            plan
        })
        .collect()
}
