mod common;

use std::collections::BTreeSet;

use common::{random_connected_graph, rng};
use freefold::graphs::{bar, tighten_edges, EdgePath, Graph};
use proptest::prelude::*;
use rand::Rng;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (1usize..7, 0usize..6, any::<u64>()).prop_map(|(v, extra, seed)| random_connected_graph(&mut rng(seed), v, extra))
}

/// Cancel backtracks `e bar(e)` in a random order.
fn tighten_in_random_order(mut path: Vec<usize>, rng: &mut impl Rng) -> Vec<usize> {
    loop {
        let spots: Vec<usize> = (0..path.len().saturating_sub(1)).filter(|&i| path[i + 1] == bar(path[i])).collect();
        if spots.is_empty() {
            return path;
        }
        let i = spots[rng.gen_range(0..spots.len())];
        path.drain(i..i + 2);
    }
}

fn random_walk(g: &Graph, start: usize, len: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut at = start;
    let mut out = Vec::new();
    for _ in 0..len {
        let star = g.star(at);
        if star.is_empty() {
            break;
        }
        let e = star[rng.gen_range(0..star.len())];
        out.push(e);
        at = g.terminus(e);
    }
    out
}

proptest! {
    #[test]
    fn maximal_tree_complement_counts_rank(g in graph_strategy()) {
        let tree = g.maximal_tree().unwrap();
        prop_assert!(g.is_forest(&tree));
        prop_assert_eq!(tree.len(), g.vertex_count() - 1);
        prop_assert_eq!(g.edge_count() - tree.len(), g.rank().unwrap());
    }

    #[test]
    fn collapsing_a_maximal_tree_gives_a_rose(g in graph_strategy()) {
        let tree = g.maximal_tree().unwrap();
        let (rose, map) = g.collapse_forest(&tree).unwrap();
        prop_assert_eq!(rose.vertex_count(), 1);
        prop_assert_eq!(rose.edge_count(), g.rank().unwrap());
        prop_assert_eq!(map.edge_map.iter().filter(|e| e.is_none()).count(), 2 * tree.len());
    }

    #[test]
    fn basis_loops_are_closed_tight_and_one_per_missing_edge(g in graph_strategy()) {
        let tree = g.maximal_tree().unwrap();
        let loops = g.spanning_basis(0, &tree).unwrap();
        prop_assert_eq!(loops.len(), g.rank().unwrap());
        for l in &loops {
            prop_assert_eq!(l.end(&g), 0);
            prop_assert!(l.is_tight());
            let off_tree: Vec<usize> = l.edges.iter().filter(|&&e| !tree.contains(&(e / 2))).copied().collect();
            prop_assert_eq!(off_tree.len(), 1);
        }
    }

    #[test]
    fn core_is_a_core_of_the_same_rank(g in graph_strategy()) {
        prop_assume!(g.rank().unwrap() >= 1);
        let (core, embedding) = g.core().unwrap();
        prop_assert!(core.is_core());
        prop_assert_eq!(core.rank().unwrap(), g.rank().unwrap());
        prop_assert_eq!(embedding.vertices.len(), core.vertex_count());
        let (again, _) = core.core().unwrap();
        prop_assert_eq!(again, core);
    }

    #[test]
    fn natural_structure_keeps_rank(g in graph_strategy()) {
        prop_assume!(g.rank().unwrap() >= 2);
        let (core, _) = g.core().unwrap();
        let (natural, structure) = core.natural_graph().unwrap();
        prop_assert_eq!(natural.rank().unwrap(), core.rank().unwrap());
        prop_assert!((0..natural.vertex_count()).all(|v| natural.valence(v) >= 3));
        let covered: usize = structure.arcs.iter().map(|a| a.len()).sum();
        prop_assert_eq!(covered, core.edge_count());
    }

    #[test]
    fn tightening_is_independent_of_cancellation_order(g in graph_strategy(), seed in any::<u64>(), len in 0usize..30) {
        let mut r = rng(seed);
        let path = random_walk(&g, 0, len, &mut r);
        let tight = tighten_edges(&path);
        prop_assert_eq!(tighten_in_random_order(path.clone(), &mut r), tight.clone());
        let p = EdgePath::new(&g, 0, path).unwrap();
        prop_assert_eq!(p.tighten().edges, tight);
        prop_assert_eq!(p.reverse(&g).reverse(&g), p);
    }

    #[test]
    fn json_round_trips(g in graph_strategy()) {
        let (back, _) = Graph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn subdivision_adds_rank_neutral_vertices(g in graph_strategy(), pieces in 1usize..4) {
        prop_assume!(g.edge_count() >= 1);
        let (s, images) = g.subdivide(0, pieces).unwrap();
        prop_assert_eq!(s.rank().unwrap(), g.rank().unwrap());
        prop_assert_eq!(images[0].len(), pieces);
        let ends: BTreeSet<usize> = images[0].iter().map(|&e| s.terminus(e)).collect();
        prop_assert!(ends.contains(&g.terminus(0)));
    }
}
