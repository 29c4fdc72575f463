//! Cultural Ecosystem Service labels for hashtag communities by exact
//! lexicon matching.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::Partition;
use crate::graph::WeightedGraph;
use crate::ingest::normalize_hashtag;

pub const DEFAULT_MIN_OVERLAP: usize = 2;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("lexicon has no classes")]
    EmptyLexicon,
    #[error("lexicon class {0:?} has no terms")]
    EmptyClass(String),
    #[error("lexicon class {class:?} has an empty term {term:?}")]
    EmptyTerm { class: String, term: String },
    #[error("min_overlap must be at least 1")]
    InvalidMinOverlap,
    #[error("partition covers {assigned} vertices, graph has {vertices}")]
    PartitionMismatch { assigned: usize, vertices: usize },
    #[error("lexicon: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconFile {
    #[serde(default = "default_min_overlap")]
    pub min_overlap: usize,
    pub classes: BTreeMap<String, Vec<String>>,
}

fn default_min_overlap() -> usize {
    DEFAULT_MIN_OVERLAP
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CesLexicon {
    classes: BTreeMap<String, BTreeSet<String>>,
    min_overlap: usize,
}

impl CesLexicon {
    pub fn new(file: LexiconFile) -> Result<Self, ClassifyError> {
        if file.classes.is_empty() {
            return Err(ClassifyError::EmptyLexicon);
        }
        if file.min_overlap == 0 {
            return Err(ClassifyError::InvalidMinOverlap);
        }
        let mut classes = BTreeMap::new();
        for (name, terms) in file.classes {
            let set = terms
                .iter()
                .map(|t| {
                    normalize_hashtag(t).ok_or_else(|| ClassifyError::EmptyTerm { class: name.clone(), term: t.clone() })
                })
                .collect::<Result<BTreeSet<_>, _>>()?;
            if set.is_empty() {
                return Err(ClassifyError::EmptyClass(name));
            }
            classes.insert(name, set);
        }
        Ok(Self { classes, min_overlap: file.min_overlap })
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let file: LexiconFile = serde_json::from_str(text).map_err(|e| ClassifyError::Parse(e.to_string()))?;
        Self::new(file)
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ClassifyError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Lexicon assembled from the hashtag vocabulary of marine protected
    /// area posts: wildlife, beach and underwater recreation, heritage,
    /// identity, aesthetics, wellbeing and travel.
    pub fn starter() -> Self {
        Self::from_json(STARTER_LEXICON).expect("starter lexicon is valid")
    }

    pub fn with_min_overlap(mut self, min_overlap: usize) -> Result<Self, ClassifyError> {
        if min_overlap == 0 {
            return Err(ClassifyError::InvalidMinOverlap);
        }
        self.min_overlap = min_overlap;
        Ok(self)
    }

    pub fn min_overlap(&self) -> usize {
        self.min_overlap
    }

    pub fn classes(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.classes
    }

    pub fn to_file(&self) -> LexiconFile {
        LexiconFile {
            min_overlap: self.min_overlap,
            classes: self.classes.iter().map(|(k, v)| (k.clone(), v.iter().cloned().collect())).collect(),
        }
    }

    /// Classes meeting `min_overlap` for a set of member labels, ordered by
    /// hits descending then class name.
    pub fn match_terms<'a, I>(&self, members: I) -> Vec<ClassHit>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let members: HashSet<&str> = members.into_iter().collect();
        let mut hits: Vec<ClassHit> = self
            .classes
            .iter()
            .filter_map(|(name, terms)| {
                let count = members.iter().filter(|m| terms.contains(**m)).count();
                (count >= self.min_overlap).then(|| ClassHit { class: name.clone(), hits: count })
            })
            .collect();
        hits.sort_by(|a, b| b.hits.cmp(&a.hits).then_with(|| a.class.cmp(&b.class)));
        hits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassHit {
    pub class: String,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityLabel {
    pub community: usize,
    pub size: usize,
    pub classes: Vec<ClassHit>,
    pub unmatched: bool,
}

impl CommunityLabel {
    pub fn class_names(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.class.as_str()).collect()
    }
}

pub fn classify(partition: &Partition, g: &WeightedGraph, lex: &CesLexicon) -> Result<Vec<CommunityLabel>, ClassifyError> {
    if partition.assignment.len() != g.vertex_count() {
        return Err(ClassifyError::PartitionMismatch {
            assigned: partition.assignment.len(),
            vertices: g.vertex_count(),
        });
    }
    Ok(partition
        .communities()
        .iter()
        .enumerate()
        .map(|(community, members)| {
            let classes = lex.match_terms(members.iter().map(|&v| g.label(v)));
            CommunityLabel { community, size: members.len(), unmatched: classes.is_empty(), classes }
        })
        .collect())
}

const STARTER_LEXICON: &str = r#"{
  "min_overlap": 2,
  "classes": {
    "Nature and wildlife appreciation": [
      "nature", "wildlife", "wildlifephotography", "naturephotography", "naturelovers",
      "animals", "endemic", "evolution", "crab", "forest", "landscape"
    ],
    "Wildlife (iconic fauna)": [
      "penguin", "penguins", "kingpenguin", "puffin", "puffins", "whale", "whales",
      "southernrightwhale", "whalewatching", "sealion", "sealions", "seal", "birds", "bird",
      "birdwatching", "seabirds", "turtle", "iguana"
    ],
    "Wildlife conservation": [
      "conservation", "biodiversity", "science", "sustainability", "savethereef", "4ocean",
      "protect", "marineconservation", "ecology"
    ],
    "Recreational (beach)": [
      "beach", "summer", "sun", "swim", "swimming", "sand", "holidays", "holiday",
      "vacation", "caribbean", "paradise", "beachlife"
    ],
    "Recreational (underwater)": [
      "diving", "scubadiving", "scuba", "snorkelling", "snorkeling", "underwater",
      "underwaterphotography", "coral", "reef", "coralreef", "sealife", "ocean", "freediving"
    ],
    "Recreational (water activities)": [
      "sailing", "boat", "kayak", "kayaking", "surf", "surfing", "sea", "waves"
    ],
    "Recreational (fishing)": [
      "fishing", "fish", "flyfishing", "gamefishing", "catchandrelease"
    ],
    "Recreational (hiking)": [
      "hiking", "hike", "trekking", "mountains", "mountain", "outdoors", "trail", "camping",
      "adventure"
    ],
    "Cultural heritage": [
      "moai", "statue", "heritage", "history", "culture", "indigenous", "kogui",
      "archaeology", "design", "music", "food", "ahu"
    ],
    "Cultural identity": [
      "italia", "italy", "sicilia", "sicily", "norge", "norway", "newzealand", "aotearoa",
      "nz", "home", "local", "proud"
    ],
    "Aesthetic": [
      "sunset", "sunrise", "landscapephotography", "sky", "view", "scenery", "beautiful",
      "photography", "photo", "wonderful", "charming", "dunes", "desert", "glacier", "glaciers"
    ],
    "Wellbeing": [
      "happiness", "happy", "love", "friends", "relax", "peace", "wellbeing", "goodvibes",
      "smile", "family"
    ],
    "Other (travel)": [
      "travel", "travelphotography", "wanderlust", "tourist", "tourism", "travelling",
      "traveling", "trip", "explore", "luxurytravel", "privateisland", "luxury", "nationalpark"
    ]
  }
}"#;
