mod support;

use debugscope_core::astdiff::{
    edit_distance_with_limit, exact_distance, greedy_distance, node_edit_distance, tree_edit_distance,
};
use debugscope_core::jsparse::{parse, Node};
use proptest::prelude::*;
use support::{bfs_distance, mapping_distance, random_tree, tree_from_parents, XorShift};

const ALPHABET: &[&str] = &["a", "b", "c"];

fn arb_tree(max: usize) -> impl Strategy<Value = Node> {
    (1..=max)
        .prop_flat_map(|n| {
            (
                (1..n).map(|i| 0..i).collect::<Vec<_>>(),
                proptest::collection::vec(0..ALPHABET.len(), n),
            )
        })
        .prop_map(|(parents, labels)| {
            let labels: Vec<&str> = labels.into_iter().map(|l| ALPHABET[l]).collect();
            tree_from_parents(&parents, &labels)
        })
}

#[test]
fn oracles_agree_on_tiny_trees() {
    let mut rng = XorShift(0x9e3779b97f4a7c15);
    for _ in 0..150 {
        let a = random_tree(&mut rng, 4, &ALPHABET[..2]);
        let b = random_tree(&mut rng, 4, &ALPHABET[..2]);
        assert_eq!(mapping_distance(&a, &b), bfs_distance(&a, &b), "{a:?} vs {b:?}");
    }
}

#[test]
fn exact_matches_bfs_on_tiny_trees() {
    let mut rng = XorShift(0x1234_5678_9abc_def1);
    for _ in 0..150 {
        let a = random_tree(&mut rng, 4, &ALPHABET[..2]);
        let b = random_tree(&mut rng, 4, &ALPHABET[..2]);
        assert_eq!(exact_distance(&a, &b), bfs_distance(&a, &b), "{a:?} vs {b:?}");
    }
}

#[test]
fn exact_matches_mapping_enumeration_up_to_ten_nodes() {
    let mut rng = XorShift(0xdead_beef_cafe_f00d);
    for _ in 0..500 {
        let a = random_tree(&mut rng, 10, ALPHABET);
        let b = random_tree(&mut rng, 10, ALPHABET);
        assert_eq!(exact_distance(&a, &b), mapping_distance(&a, &b), "{a:?} vs {b:?}");
    }
}

#[test]
fn worked_examples() {
    let a = parse("var x = 1;").unwrap();
    let b = parse("var x = 2;").unwrap();
    let r = tree_edit_distance(&a, &b);
    assert_eq!(r.distance, 1);
    assert_eq!(mapping_distance(&a.root, &b.root), 1);
    let a = parse("f(1);").unwrap();
    let b = parse("f(1, 2);").unwrap();
    assert_eq!(tree_edit_distance(&a, &b).distance, 1);
    assert_eq!(mapping_distance(&a.root, &b.root), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn identity(a in arb_tree(12)) {
        let r = node_edit_distance(&a, &a);
        prop_assert_eq!(r.distance, 0);
        prop_assert!(r.script.is_empty());
    }

    #[test]
    fn symmetry(a in arb_tree(12), b in arb_tree(12)) {
        prop_assert_eq!(exact_distance(&a, &b), exact_distance(&b, &a));
    }

    #[test]
    fn triangle(a in arb_tree(12), b in arb_tree(12), c in arb_tree(12)) {
        let ab = exact_distance(&a, &b);
        let bc = exact_distance(&b, &c);
        let ac = exact_distance(&a, &c);
        prop_assert!(ac <= ab + bc);
    }

    #[test]
    fn script_is_sound(a in arb_tree(12), b in arb_tree(12)) {
        let r = node_edit_distance(&a, &b);
        prop_assert_eq!(r.script.cost(), r.distance);
        prop_assert_eq!(r.script.apply(&a).unwrap(), b);
    }

    #[test]
    fn greedy_is_an_upper_bound(a in arb_tree(12), b in arb_tree(12)) {
        let g = greedy_distance(&a, &b);
        prop_assert!(g >= exact_distance(&a, &b));
        let r = edit_distance_with_limit(&a, &b, 0);
        prop_assert_eq!(r.approximate, a != b);
        prop_assert_eq!(r.distance, g);
        prop_assert_eq!(r.script.apply(&a).unwrap(), b);
    }
}

#[test]
fn scripts_apply_on_corpus_pairs() {
    let corpus = support::corpus();
    let trees: Vec<_> = corpus.iter().map(|(_, s)| parse(s).unwrap()).collect();
    for w in trees.windows(2).take(20) {
        let r = tree_edit_distance(&w[0], &w[1]);
        assert!(!r.approximate);
        assert_eq!(r.script.apply(&w[0].root).unwrap(), w[1].root);
    }
}
