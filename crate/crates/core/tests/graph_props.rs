mod common;

use common::*;
use hcycle::exact::{count_t_sigma, OrderedPartition};
use hcycle::find_heavy::cycle_upper_bound;
use hcycle::graph::{layered_graph, Coloring, Graph, Mode, VertexSet};
use hcycle::matmul::{multiply, CountMatrix, WorkCounter};
use proptest::prelude::*;
use rand::Rng;

fn mode_of(b: bool) -> Mode {
    if b {
        Mode::Directed
    } else {
        Mode::Undirected
    }
}

fn on_cycles(g: &Graph, h: usize) -> Vec<bool> {
    oracle_per_vertex(g, h).1.iter().map(|&c| c > 0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn induced_subgraph_keeps_exactly_inner_edges(seed in any::<u64>(), n in 2usize..14, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.4, mode_of(d), &mut r);
        let keep = random_subset(n, 0.6, &mut r);
        let sub = g.induced_subgraph(&keep).unwrap();
        let ids = keep.as_slice();
        prop_assert_eq!(sub.n(), ids.len());
        for i in 0..ids.len() {
            prop_assert_eq!(sub.label(i), ids[i]);
            for j in 0..ids.len() {
                prop_assert_eq!(sub.has_edge(i, j), g.has_edge(ids[i], ids[j]));
            }
        }
        let rest = g.remove_vertices(&keep).unwrap();
        prop_assert_eq!(rest.n() + sub.n(), n);
        prop_assert!((0..rest.n()).all(|i| !keep.contains(rest.label(i))));
    }

    #[test]
    fn edge_list_round_trips(seed in any::<u64>(), n in 1usize..14, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.4, mode_of(d), &mut r);
        let back = Graph::parse(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.mode(), g.mode());
        prop_assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn cycle_core_keeps_every_cycle_vertex(seed in any::<u64>(), n in 3usize..12, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, r.gen_range(0.1..0.4), mode_of(d), &mut r);
        let core = g.cycle_core();
        for h in 3..=n.min(6) {
            for (v, on) in on_cycles(&g, h).into_iter().enumerate() {
                prop_assert!(!on || core.contains(v), "vertex {} on a {}-cycle was peeled", v, h);
            }
        }
        // Survivors satisfy the local condition inside the core.
        let sub = g.induced_subgraph(&core).unwrap();
        for v in 0..sub.n() {
            match g.mode() {
                Mode::Undirected => prop_assert!(sub.out_degree(v) >= 2),
                Mode::Directed => prop_assert!(sub.out_degree(v) >= 1 && sub.in_degree(v) >= 1),
            }
        }
    }

    #[test]
    fn half_radius_ball_contains_cycles_through_center(seed in any::<u64>(), n in 3usize..11, h in 3usize..6, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.35, mode_of(d), &mut r);
        for v in 0..n {
            let ball = g.ball(v, h / 2);
            prop_assert!(ball.contains(v));
            for c in oracle_cycles(&g, h).iter().filter(|c| c.contains(&v)) {
                prop_assert!(c.iter().all(|&u| ball.contains(u)));
            }
        }
    }

    #[test]
    fn closed_walk_bound_dominates_cycle_counts(seed in any::<u64>(), n in 3usize..11, h in 3usize..6, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.5, mode_of(d), &mut r);
        let (_, per) = oracle_per_vertex(&g, h);
        let bound = cycle_upper_bound(&g, h);
        for v in 0..n {
            prop_assert!(bound[v] >= per[v] as u128);
        }
    }

    #[test]
    fn layered_graph_cycles_are_the_ordered_partition_support(seed in any::<u64>(), n in 3usize..11, h in 3usize..6, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.5, mode_of(d), &mut r);
        let phi = Coloring::random(n, h, seed).unwrap();
        let layered = layered_graph(&g, &phi).unwrap();
        for (u, v) in layered.edges() {
            prop_assert!(g.has_edge(u, v));
            prop_assert_eq!(phi.color(v), (phi.color(u) + 1) % h);
        }
        // Vertices on an h-cycle of the layered graph are exactly the
        // support of t^σ over the color classes in order.
        let on_layered = on_cycles(&layered, h);
        let sigma = OrderedPartition::new(phi.classes()).unwrap();
        let per = count_t_sigma(&g, &sigma, &mut WorkCounter::new()).unwrap();
        for v in 0..n {
            prop_assert_eq!(on_layered[v], per.get(v) > 0);
        }
    }

    #[test]
    fn multiply_matches_naive_and_counts_work(a in 1usize..6, b in 1usize..6, c in 1usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut fill = |rows: usize, cols: usize| {
            let data: Vec<Vec<u128>> = (0..rows).map(|_| (0..cols).map(|_| r.gen_range(0..5)).collect()).collect();
            CountMatrix::from_rows(&data).unwrap()
        };
        let (x, y) = (fill(a, b), fill(b, c));
        let mut wc = WorkCounter::new();
        let z = multiply(&x, &y, &mut wc).unwrap();
        for i in 0..a {
            for j in 0..c {
                let want: u128 = (0..b).map(|k| x.get(i, k) * y.get(k, j)).sum();
                prop_assert_eq!(z.get(i, j), want);
            }
        }
        prop_assert_eq!(wc.scalar_mults, (a * b * c) as u128);
        prop_assert_eq!(wc.shape_total(), wc.scalar_mults);
    }
}

#[test]
fn ball_ignores_direction() {
    let g = Graph::from_edges(4, Mode::Directed, &[(0, 1), (2, 1), (3, 2)]).unwrap();
    assert_eq!(g.ball(1, 1), VertexSet::new(vec![0, 1, 2]));
    assert_eq!(g.ball(1, 2), VertexSet::full(4));
    assert_eq!(g.ball(1, 0), VertexSet::new(vec![1]));
}

#[test]
fn path_has_empty_core_and_cycle_survives() {
    let path = Graph::from_edges(5, Mode::Undirected, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    assert!(path.cycle_core().is_empty());
    let tailed = Graph::from_edges(5, Mode::Directed, &[(0, 1), (1, 2), (2, 0), (2, 3), (4, 0)]).unwrap();
    assert_eq!(tailed.cycle_core(), VertexSet::new(vec![0, 1, 2]));
}
