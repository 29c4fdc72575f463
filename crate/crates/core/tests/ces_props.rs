use std::collections::{BTreeMap, BTreeSet};

use cesgraph::ces::{classify, CesLexicon, LexiconFile};
use cesgraph::community::Partition;
use cesgraph::graph::WeightedGraph;
use proptest::prelude::*;

fn lexicon(classes: &BTreeMap<String, BTreeSet<usize>>, min_overlap: usize) -> CesLexicon {
    CesLexicon::new(LexiconFile {
        min_overlap,
        classes: classes.iter().map(|(c, t)| (c.clone(), t.iter().map(|i| format!("t{i}")).collect())).collect(),
    })
    .unwrap()
}

fn classes() -> impl Strategy<Value = BTreeMap<String, BTreeSet<usize>>> {
    prop::collection::btree_map("[A-E]", prop::collection::btree_set(0usize..20, 1..6), 1..5)
}

fn graph(n: usize) -> WeightedGraph {
    let mut g = WeightedGraph::new();
    for i in 0..n {
        g.add_vertex(format!("t{i}"), 1).unwrap();
    }
    g
}

#[test]
fn starter_lexicon_terms_are_disjoint() {
    let lex = CesLexicon::starter();
    let mut seen = BTreeMap::new();
    for (class, terms) in lex.classes() {
        for t in terms {
            if let Some(other) = seen.insert(t.clone(), class.clone()) {
                panic!("{t} in both {other} and {class}");
            }
        }
    }
    assert_eq!(lex.classes().len(), 13);
}

proptest! {
    #[test]
    fn member_order_is_irrelevant(cls in classes(), members in prop::collection::vec(0usize..20, 0..20), min in 1usize..3) {
        let lex = lexicon(&cls, min);
        let terms: Vec<String> = members.iter().map(|i| format!("t{i}")).collect();
        let mut reversed = terms.clone();
        reversed.reverse();
        prop_assert_eq!(lex.match_terms(terms.iter().map(String::as_str)), lex.match_terms(reversed.iter().map(String::as_str)));
    }

    #[test]
    fn hits_are_intersection_sizes(cls in classes(), assignment in prop::collection::vec(0usize..3, 20), min in 1usize..3) {
        let lex = lexicon(&cls, min);
        let g = graph(20);
        let mut dense = assignment.clone();
        let mut map = BTreeMap::new();
        for c in dense.iter_mut() {
            let next = map.len();
            *c = *map.entry(*c).or_insert(next);
        }
        let p = Partition { assignment: dense.clone(), q: 0.0 };
        for label in classify(&p, &g, &lex).unwrap() {
            let members: BTreeSet<usize> = (0..20).filter(|&v| dense[v] == label.community).collect();
            for (class, terms) in &cls {
                let expected = terms.intersection(&members).count();
                let got = label.classes.iter().find(|h| &h.class == class).map(|h| h.hits);
                if expected >= min {
                    prop_assert_eq!(got, Some(expected));
                } else {
                    prop_assert_eq!(got, None);
                }
            }
            prop_assert_eq!(label.unmatched, label.classes.is_empty());
        }
    }

    #[test]
    fn unrelated_class_changes_nothing(cls in classes(), assignment in prop::collection::vec(0usize..3, 20)) {
        let g = graph(20);
        let mut dense = assignment;
        let mut map = BTreeMap::new();
        for c in dense.iter_mut() {
            let next = map.len();
            *c = *map.entry(*c).or_insert(next);
        }
        let p = Partition { assignment: dense, q: 0.0 };
        let before = classify(&p, &g, &lexicon(&cls, 2)).unwrap();
        let mut more = cls.clone();
        more.insert("Z unrelated".into(), (100..104).collect());
        let after = classify(&p, &g, &lexicon(&more, 2)).unwrap();
        prop_assert_eq!(before, after);
    }
}
