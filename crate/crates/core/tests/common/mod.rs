//! Independent brute-force oracles and instance builders shared by the
//! integration suites.

#![allow(dead_code)]

use hcycle::graph::{Coloring, Graph, Mode, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(n: usize, p: f64, mode: Mode, r: &mut impl Rng) -> Graph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (mode == Mode::Undirected && v < u) {
                continue;
            }
            if r.gen::<f64>() < p {
                e.push((u, v));
            }
        }
    }
    Graph::from_edges(n, mode, &e).unwrap()
}

/// Every h-cycle copy as a vertex sequence, one representative per copy.
/// Written against `has_edge` only, independently of the library's search.
pub fn oracle_cycles(g: &Graph, h: usize) -> Vec<Vec<usize>> {
    fn rec(g: &Graph, h: usize, seq: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if seq.len() == h {
            let closes = g.has_edge(seq[h - 1], seq[0]);
            let canonical = g.mode() == Mode::Directed || seq[1] < seq[h - 1];
            if closes && canonical {
                out.push(seq.clone());
            }
            return;
        }
        for w in 0..g.n() {
            if w > seq[0] && !seq.contains(&w) && g.has_edge(*seq.last().unwrap(), w) {
                seq.push(w);
                rec(g, h, seq, out);
                seq.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..g.n() {
        rec(g, h, &mut vec![s], &mut out);
    }
    out
}

pub fn oracle_per_vertex(g: &Graph, h: usize) -> (u64, Vec<u64>) {
    let cycles = oracle_cycles(g, h);
    let mut per = vec![0u64; g.n()];
    for c in &cycles {
        for &v in c {
            per[v] += 1;
        }
    }
    (cycles.len() as u64, per)
}

/// Per-vertex counts of colorful cycles meeting `s` exactly `k` times.
pub fn oracle_colorful(g: &Graph, phi: &Coloring, s: &VertexSet, k: usize) -> Vec<u64> {
    let h = phi.num_classes();
    let mut per = vec![0u64; g.n()];
    for c in oracle_cycles(g, h) {
        let mut colors: Vec<usize> = c.iter().map(|&v| phi.color(v)).collect();
        colors.sort_unstable();
        colors.dedup();
        let hits = c.iter().filter(|&&v| s.contains(v)).count();
        if colors.len() == h && hits == k {
            for &v in &c {
                per[v] += 1;
            }
        }
    }
    per
}

/// Per-vertex ordered-partition counts: sequences `(v_1..v_h)` with
/// `v_i in parts[i]` closing into a cycle, tallied at every position.
pub fn oracle_t_sigma(g: &Graph, parts: &[VertexSet]) -> Vec<u64> {
    fn rec(g: &Graph, parts: &[VertexSet], seq: &mut Vec<usize>, per: &mut [u64]) {
        let h = parts.len();
        if seq.len() == h {
            if g.has_edge(seq[h - 1], seq[0]) {
                for &v in seq.iter() {
                    per[v] += 1;
                }
            }
            return;
        }
        for w in parts[seq.len()].iter() {
            if seq.is_empty() || g.has_edge(*seq.last().unwrap(), w) {
                seq.push(w);
                rec(g, parts, seq, per);
                seq.pop();
            }
        }
    }
    let mut per = vec![0u64; g.n()];
    rec(g, parts, &mut Vec::new(), &mut per);
    per
}

/// `t^k(v)` for all v: cycles meeting `s` exactly `k` times, per vertex.
pub fn oracle_tk(g: &Graph, h: usize, s: &VertexSet, k: usize) -> (u64, Vec<u64>) {
    let mut per = vec![0u64; g.n()];
    let mut total = 0;
    for c in oracle_cycles(g, h) {
        if c.iter().filter(|&&v| s.contains(v)).count() == k {
            total += 1;
            for &v in &c {
                per[v] += 1;
            }
        }
    }
    (total, per)
}

/// `t_G(S)`: cycles meeting `s` at least once.
pub fn oracle_t_of_set(g: &Graph, h: usize, s: &VertexSet) -> u64 {
    oracle_cycles(g, h).iter().filter(|c| c.iter().any(|&v| s.contains(v))).count() as u64
}

pub fn random_subset(n: usize, p: f64, r: &mut impl Rng) -> VertexSet {
    (0..n).filter(|_| r.gen::<f64>() < p).collect()
}

pub fn random_partition(n: usize, h: usize, r: &mut impl Rng) -> Vec<VertexSet> {
    let mut parts = vec![Vec::new(); h];
    for v in 0..n {
        let c = r.gen_range(0..=h);
        if c < h {
            parts[c].push(v);
        }
    }
    parts.into_iter().map(VertexSet::new).collect()
}
