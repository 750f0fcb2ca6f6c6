use cubicate::complexes::{
    subdivide_word, CombinatorialMap, LinkFailure, NpcDefect, SquareComplex,
};
use cubicate::graph::{dart, Edge, LabeledGraph};
use cubicate::{Alphabet, FreeWord};
use proptest::prelude::*;

fn w(s: &str) -> FreeWord {
    Alphabet::standard(3).parse_word(s).unwrap()
}

fn torus() -> SquareComplex {
    SquareComplex::from_words(2, &[w("a b a' b'")]).unwrap()
}

fn klein() -> SquareComplex {
    SquareComplex::from_words(2, &[w("a b a' b")]).unwrap()
}

/// Unit square on four distinct vertices.
fn disk() -> SquareComplex {
    let g = LabeledGraph::new(
        4,
        vec![
            Edge {
                src: 0,
                dst: 1,
                label: 0,
            },
            Edge {
                src: 1,
                dst: 2,
                label: 1,
            },
            Edge {
                src: 3,
                dst: 2,
                label: 0,
            },
            Edge {
                src: 0,
                dst: 3,
                label: 1,
            },
        ],
        Some(0),
    )
    .unwrap();
    SquareComplex::new(
        g,
        vec![[dart(0, true), dart(1, true), dart(2, false), dart(3, false)]],
    )
    .unwrap()
}

/// Independent link computation: adjacency from the corner rule, done by hand.
fn link_degrees(c: &SquareComplex, v: usize) -> Vec<usize> {
    let link = c.vertex_link(v).unwrap();
    link.ends
        .iter()
        .map(|&d| link.edges.iter().filter(|e| e.a == d || e.b == d).count())
        .collect()
}

#[test]
fn torus_link_is_a_four_cycle() {
    let t = torus();
    let link = t.vertex_link(0).unwrap();
    assert_eq!(link.ends.len(), 4);
    assert_eq!(link.edges.len(), 4);
    assert_eq!(link_degrees(&t, 0), vec![2, 2, 2, 2]);
    // a⁺ (dart 0) and a⁻ (dart 1) are opposite in the cycle.
    assert!(!link.adjacent(0, 1));
    assert!(!link.adjacent(2, 3));
    assert!(
        link.adjacent(0, 2) && link.adjacent(0, 3) && link.adjacent(1, 2) && link.adjacent(1, 3)
    );
    assert!(t.check_npc().passed);
}

#[test]
fn wedge_and_disk_links() {
    let wedge = SquareComplex::from_graph(LabeledGraph::bouquet(2));
    let link = wedge.vertex_link(0).unwrap();
    assert_eq!((link.ends.len(), link.edges.len()), (4, 0));
    assert!(wedge.check_npc().passed);

    let d = disk();
    let link = d.vertex_link(0).unwrap();
    assert_eq!((link.ends.len(), link.edges.len()), (2, 1));
    assert!(d.check_npc().passed);
    assert!(d.vertex_link(9).is_err());
}

#[test]
fn single_loop_square_is_not_npc() {
    let c = SquareComplex::from_words(1, &[w("a a a a")]).unwrap();
    let r = c.check_npc();
    assert!(!r.passed);
    assert!(r
        .failures
        .iter()
        .any(|f| f.kind == NpcDefect::MultiEdge && f.ends == vec![0, 1]));
}

#[test]
fn torus_and_klein_hyperplanes() {
    let hs = torus().hyperplanes();
    assert_eq!(hs.len(), 2);
    assert!(hs
        .iter()
        .all(|h| h.is_embedded() && h.is_two_sided() && h.is_clean()));
    assert!(torus().specialness().special);

    let k = klein();
    assert!(k.check_npc().passed);
    let hs = k.hyperplanes();
    assert_eq!(hs.len(), 2);
    assert!(hs.iter().any(|h| h.one_sided));
    assert!(!k.specialness().special);
}

#[test]
fn abab_square_has_a_one_sided_hyperplane() {
    let c = SquareComplex::from_words(2, &[w("a b a b")]).unwrap();
    assert!(c.hyperplanes().iter().any(|h| h.one_sided));
}

#[test]
fn wedge_hyperplanes_are_midpoints() {
    let c = SquareComplex::from_graph(LabeledGraph::bouquet(3));
    let hs = c.hyperplanes();
    assert_eq!(hs.len(), 3);
    assert!(hs.iter().all(|h| h.edges.len() == 1 && h.is_clean()));
}

#[test]
fn duplicate_squares_are_merged() {
    let c =
        SquareComplex::from_words(2, &[w("a b a' b'"), w("b a' b' a"), w("b a b' a'")]).unwrap();
    assert_eq!(c.squares().len(), 1);
}

#[test]
fn local_isometry_examples() {
    let t = torus();
    assert!(
        CombinatorialMap::identity(&t)
            .check_local_isometry(&t, &t)
            .unwrap()
            .passed
    );

    let wedge = SquareComplex::from_graph(LabeledGraph::bouquet(2));
    let r = CombinatorialMap::identity(&wedge)
        .check_local_isometry(&wedge, &t)
        .unwrap();
    assert!(!r.passed);
    assert!(r.failures.iter().all(|f| f.kind == LinkFailure::NotFull));

    let circle = SquareComplex::from_graph(LabeledGraph::bouquet(1));
    let f = CombinatorialMap {
        vertex_map: vec![0],
        dart_map: vec![dart(0, true)],
    };
    assert!(f.check_local_isometry(&circle, &t).unwrap().passed);

    // Composition: circle → torus → torus.
    let g = f.compose(&CombinatorialMap::identity(&t));
    assert!(g.check_local_isometry(&circle, &t).unwrap().passed);

    // Folding two loops onto one is not injective on links.
    let two = SquareComplex::from_graph(LabeledGraph::bouquet(2));
    let fold = CombinatorialMap {
        vertex_map: vec![0],
        dart_map: vec![dart(0, true), dart(0, true)],
    };
    let r = fold.check_local_isometry(&two, &circle).unwrap();
    assert!(r
        .failures
        .iter()
        .any(|f| f.kind == LinkFailure::NotInjective));

    let bad = CombinatorialMap {
        vertex_map: vec![0],
        dart_map: vec![dart(5, true)],
    };
    assert!(bad.check_local_isometry(&circle, &t).is_err());
}

#[test]
fn subdivision_examples() {
    let c3 = LabeledGraph::cycle(&w("a b c")).unwrap();
    let s = SquareComplex::from_graph(c3.clone()).subdivide();
    assert_eq!(s.num_edges(), 6);
    assert_eq!(s.graph().girth(), Some(6));

    let t = torus().subdivide();
    assert_eq!(t.squares().len(), 4);
    assert_eq!(t.hyperplanes().len(), 4);
    assert!(t.check_npc().passed);
    assert!(t.specialness().special);

    let k = klein().subdivide();
    assert!(k.check_npc().passed);
    // The two lifts of the one-sided curve merge into one two-sided
    // hyperplane that osculates with itself.
    let hs = k.hyperplanes();
    assert_eq!(hs.len(), 3);
    assert!(hs.iter().all(|h| h.is_two_sided()));
    assert!(hs.iter().any(|h| h.self_osculating));
    assert!(!k.specialness().special);

    assert_eq!(
        subdivide_word(&w("a b'"), 2),
        Alphabet::standard(4).parse_word("a c d' b'").unwrap()
    );
}

fn one_vertex_complex() -> impl Strategy<Value = SquareComplex> {
    let letter = (0u32..3, any::<bool>()).prop_map(|(g, i)| cubicate::Letter::new(g, i));
    prop::collection::vec(prop::collection::vec(letter, 4), 0..4).prop_filter_map(
        "valid squares",
        |sq| {
            let words: Vec<FreeWord> = sq.into_iter().map(FreeWord::new).collect();
            SquareComplex::from_words(3, &words).ok()
        },
    )
}

proptest! {
    #[test]
    fn hyperplanes_partition_edges(c in one_vertex_complex()) {
        let hs = c.hyperplanes();
        let mut all: Vec<usize> = hs.iter().flat_map(|h| h.edges.clone()).collect();
        all.sort();
        prop_assert_eq!(all, (0..c.num_edges()).collect::<Vec<_>>());
        let sub = c.subdivide();
        prop_assert_eq!(sub.num_edges(), 2 * c.num_edges() + 4 * c.squares().len());
    }

    #[test]
    fn subdivision_preserves_npc(c in one_vertex_complex()) {
        prop_assert_eq!(c.check_npc().passed, c.subdivide().check_npc().passed);
    }

    #[test]
    fn identity_is_a_local_isometry_of_npc_complexes(c in one_vertex_complex()) {
        prop_assume!(c.check_npc().passed);
        let id = CombinatorialMap::identity(&c);
        prop_assert!(id.check_local_isometry(&c, &c).unwrap().passed);
        let twice = id.compose(&id);
        prop_assert!(twice.check_local_isometry(&c, &c).unwrap().passed);
    }
}
