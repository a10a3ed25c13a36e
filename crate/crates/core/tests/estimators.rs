mod common;

use common::*;
use hcycle::config::EstimatorConfig;
use hcycle::count_heavy::{approx_e_tk, count_heavy, HeavyBand};
use hcycle::find_heavy::{
    binomial_upper_tail, cyclic_rainbow_probability, derived_tau, find_heavy, find_heavy_report, p_discovery, product_set,
    SampleVector,
};
use hcycle::graph::{Graph, Mode, VertexSet};
use hcycle::hardness::{cycles_in_clique, plant_instance, standard_corpus, PlantSpec};
use hcycle::matmul::WorkCounter;
use hcycle::template::{doubling, recursion_depth, template, TemplateParams};
use proptest::prelude::*;

fn mode_of(b: bool) -> Mode {
    if b {
        Mode::Directed
    } else {
        Mode::Undirected
    }
}

fn cycle(h: usize, mode: Mode) -> Graph {
    let e: Vec<_> = (0..h).map(|i| (i, (i + 1) % h)).collect();
    Graph::from_edges(h, mode, &e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn discovery_reports_only_cycle_vertices(seed in any::<u64>(), n in 3usize..12, h in 3usize..6, d in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.35, mode_of(d), &mut r);
        let (_, per) = oracle_per_vertex(&g, h);
        let p = SampleVector::new((0..h).map(|i| (i % 2) as u32).collect());
        let found = p_discovery(&g, &p, seed, &mut WorkCounter::new()).unwrap();
        prop_assert!(found.iter().all(|v| per[v] > 0));
    }

    #[test]
    fn find_heavy_is_sound_and_reproducible(seed in any::<u64>(), n in 4usize..12, h in 3usize..5, d in any::<bool>(), lam in 1.0f64..40.0) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.45, mode_of(d), &mut r);
        let (_, per) = oracle_per_vertex(&g, h);
        let cfg = EstimatorConfig::tuned().resolve(n, h).unwrap();
        let a = find_heavy(&g, lam, &cfg, seed, &mut WorkCounter::new()).unwrap();
        let b = find_heavy(&g, lam, &cfg, seed, &mut WorkCounter::new()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|v| per[v] > 0));
    }

    #[test]
    fn derived_tau_is_the_smallest_safe_threshold(k in 1usize..300, rate in 0.0001f64..0.5, pairs in 1.0f64..1e5) {
        let fp = 1e-3;
        let tau = derived_tau(k, rate, pairs, fp) as usize;
        prop_assert!(tau >= 1);
        if tau <= k {
            prop_assert!(pairs * binomial_upper_tail(k, rate, tau) <= fp);
        }
        if tau > 1 {
            prop_assert!(pairs * binomial_upper_tail(k, rate, tau - 1) > fp);
        }
    }

    #[test]
    fn template_trace_is_consistent(seed in any::<u64>(), lam in 1.0f64..500.0) {
        let (g, _) = plant_instance(40, 3, Mode::Undirected, &PlantSpec::RandomCycles { cycles: 8, density: 0.08 }, 3).unwrap();
        let cfg = EstimatorConfig::tuned().resolve(g.n(), 3).unwrap();
        let params = TemplateParams::from_resolved(&cfg, lam);
        let finder = hcycle::find_heavy::ColorCodingFinder { cfg: cfg.clone() };
        let counter = hcycle::count_heavy::ColorCodingCounter { cfg: cfg.clone() };
        let tr = template(&g, lam, &params, &finder, &counter, seed, &mut WorkCounter::new()).unwrap();
        prop_assert!((tr.telescoped() - tr.estimate).abs() <= 1e-9 * tr.estimate.max(1.0));
        prop_assert!(tr.levels.len() <= params.max_depth + 1);
        prop_assert!(tr.levels.len() <= recursion_depth(lam, params.p_rec, 3) + 1);
        for (l, lev) in tr.levels.iter().enumerate() {
            prop_assert_eq!(lev.level, l);
            let want = lam * params.p_rec.powi(3 * l as i32);
            prop_assert!((lev.lambda - want).abs() <= 1e-9 * want);
            prop_assert_eq!(lev.n_after, lev.n_before - lev.heavy);
            prop_assert!(lev.estimate >= 0.0);
        }
        for w in tr.levels.windows(2) {
            prop_assert!(w[1].n_before <= w[0].n_after);
        }
    }
}

#[test]
fn discovery_rate_on_a_lone_cycle_matches_rainbow_probability() {
    for (h, mode) in [(3, Mode::Directed), (3, Mode::Undirected), (4, Mode::Undirected)] {
        let g = cycle(h, mode);
        let p = SampleVector::new(vec![0; h]);
        let trials = 20_000u64;
        let mut hits = 0u64;
        let mut wc = WorkCounter::new();
        for seed in 0..trials {
            let found = p_discovery(&g, &p, seed, &mut wc).unwrap();
            assert!(found.is_empty() || found.len() == h);
            hits += !found.is_empty() as u64;
        }
        let q = cyclic_rainbow_probability(h, mode);
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        let rate = hits as f64 / trials as f64;
        assert!((rate - q).abs() <= 5.0 * se, "h={h} {mode:?}: rate {rate} vs {q}");
    }
}

#[test]
fn discovery_with_half_probabilities_thins_the_rate() {
    let g = cycle(3, Mode::Directed);
    let p = SampleVector::new(vec![1, 1, 0]);
    let trials = 20_000u64;
    let hits = (0..trials).filter(|&s| !p_discovery(&g, &p, s, &mut WorkCounter::new()).unwrap().is_empty()).count();
    let q = cyclic_rainbow_probability(3, Mode::Directed) * p.product();
    let se = (q * (1.0 - q) / trials as f64).sqrt();
    assert!((hits as f64 / trials as f64 - q).abs() <= 5.0 * se);
}

#[test]
fn product_set_respects_grid_and_bound() {
    for h in 3..=5 {
        for lam in [1.0, 3.0, 16.0, 100.0] {
            let set = product_set(h, lam).unwrap();
            assert!(!set.is_empty());
            assert!(set.iter().all(|p| p.h() == h && p.in_grid(lam) && p.in_product_bound(lam)));
            assert!(set.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn find_heavy_report_names_its_branch() {
    let (g, truth) = plant_instance(60, 3, Mode::Undirected, &PlantSpec::Clique { size: 12, light_cycles: 5 }, 2).unwrap();
    let cfg = EstimatorConfig::tuned().resolve(g.n(), 3).unwrap();
    let mut wc = WorkCounter::new();
    let small = find_heavy_report(&g, 4.0, &cfg, 1, &mut wc).unwrap();
    assert_eq!(small.branch, hcycle::find_heavy::FindBranch::Coloring);
    let huge = find_heavy_report(&g, 1e6, &cfg, 1, &mut wc).unwrap();
    assert_eq!(huge.branch, hcycle::find_heavy::FindBranch::WalkBound);
    assert!(huge.heavy.is_empty());
    let mid = find_heavy_report(&g, 32.0, &cfg, 1, &mut wc).unwrap();
    assert_eq!(mid.branch, hcycle::find_heavy::FindBranch::Discovery);
    // Clique vertices sit on C(11, 2) = 55 triangles.
    assert!(truth.per_vertex.iter().all(|&c| c == 0 || c == 1 || c == 55));
    assert!(mid.heavy.iter().all(|v| truth.per_vertex[v] == 55));
}

#[test]
fn e_tk_estimator_is_unbiased() {
    let (g, _) = plant_instance(20, 4, Mode::Undirected, &PlantSpec::RandomCycles { cycles: 5, density: 0.2 }, 11).unwrap();
    let s = random_subset(g.n(), 0.5, &mut rng(5));
    let mut wc = WorkCounter::new();
    for k in 1..=4 {
        let (truth, _) = oracle_tk(&g, 4, &s, k);
        let trials = 20_000;
        let ys: Vec<f64> = (0..trials).map(|seed| approx_e_tk(&g, &s, k, 4, seed, &mut wc).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / trials as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!((mean - truth as f64).abs() <= 5.0 * se.max(1e-12), "k={k}: {mean} vs {truth}");
    }
}

#[test]
fn count_heavy_edge_cases() {
    let (g, _) = plant_instance(30, 3, Mode::Directed, &PlantSpec::Disjoint { cycles: 4 }, 1).unwrap();
    let cfg = EstimatorConfig::tuned().resolve(g.n(), 3).unwrap();
    let band = HeavyBand::new(1.0, 4.0).unwrap();
    let mut wc = WorkCounter::new();
    assert_eq!(count_heavy(&g, &VertexSet::empty(), band, 0.25, 3, &cfg, 0, &mut wc).unwrap(), 0.0);
    assert!(count_heavy(&g, &VertexSet::full(30), band, 0.0, 3, &cfg, 0, &mut wc).is_err());
    assert!(HeavyBand::new(4.0, 1.0).is_err());
    // Disjoint cycles: every estimate of a stratum is exact.
    let est = count_heavy(&g, &VertexSet::full(30), band, 0.25, 3, &cfg, 0, &mut wc).unwrap();
    assert!((0.0..=8.0).contains(&est));
}

#[test]
fn doubling_is_reproducible_and_reports_provenance() {
    let entry = &standard_corpus()[1];
    let (g, _) = entry.build().unwrap();
    let cfg = EstimatorConfig::tuned();
    let run = |seed| serde_json::to_string(&doubling(&g, entry.h, &cfg, seed, &mut WorkCounter::new()).unwrap()).unwrap();
    assert_eq!(run(3), run(3));
    let rep = doubling(&g, entry.h, &cfg, 3, &mut WorkCounter::new()).unwrap();
    assert_eq!(rep.medians.len(), rep.steps.len());
    assert!(rep.steps.iter().all(|s| s.runs.len() == rep.config.reps_median));
    assert!(rep.work.scalar_mults > 0);
}

#[test]
fn planted_ground_truth_matches_oracle() {
    let cases = [
        (3, Mode::Undirected, PlantSpec::Acyclic { edges: 30 }),
        (4, Mode::Directed, PlantSpec::Acyclic { edges: 40 }),
        (3, Mode::Undirected, PlantSpec::Disjoint { cycles: 5 }),
        (5, Mode::Directed, PlantSpec::Disjoint { cycles: 3 }),
        (3, Mode::Directed, PlantSpec::RandomCycles { cycles: 6, density: 0.1 }),
        (4, Mode::Undirected, PlantSpec::RandomCycles { cycles: 4, density: 0.1 }),
        (4, Mode::Directed, PlantSpec::HeavyGadget { k: 3, light_cycles: 2 }),
        (3, Mode::Undirected, PlantSpec::Clique { size: 6, light_cycles: 2 }),
        (3, Mode::Undirected, PlantSpec::Cliques { sizes: vec![4, 5], background_edges: 10 }),
        (3, Mode::Undirected, PlantSpec::DoubleCounting { shared: true }),
        (4, Mode::Directed, PlantSpec::DoubleCounting { shared: false }),
    ];
    for (i, (h, mode, spec)) in cases.iter().enumerate() {
        let (g, truth) = plant_instance(24, *h, *mode, spec, 50 + i as u64).unwrap();
        let (total, per) = oracle_per_vertex(&g, *h);
        assert_eq!(truth.total, total, "{spec:?}");
        assert_eq!(truth.per_vertex, per, "{spec:?}");
        if let PlantSpec::DoubleCounting { .. } = spec {
            assert_eq!(truth.designated.len(), 3);
            assert!(truth.designated.iter().all(|&v| per[v] == 1), "{spec:?}");
        }
    }
}

#[test]
fn clique_formula_matches_oracle() {
    for size in 3..=7 {
        for h in 3..=5 {
            for mode in [Mode::Directed, Mode::Undirected] {
                let e: Vec<_> = (0..size).flat_map(|u| (0..size).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
                let g = Graph::from_edges(size, mode, &e).unwrap();
                assert_eq!(cycles_in_clique(size, h, mode), oracle_cycles(&g, h).len() as u64);
            }
        }
    }
}

#[test]
fn corpus_counts_lie_in_range() {
    let corpus = standard_corpus();
    assert_eq!(corpus.len(), 10);
    for e in &corpus {
        let (g, truth) = e.build().unwrap();
        assert!(e.n <= 120);
        assert!(truth.total >= 1 && truth.total as usize <= e.n, "{}", e.name);
        assert_eq!(oracle_per_vertex(&g, e.h).0, truth.total);
    }
}
