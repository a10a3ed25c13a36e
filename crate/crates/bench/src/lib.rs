//! Fixtures shared by the kernel benchmarks.

use hcycle::hardness::{plant_instance, standard_corpus, PlantSpec};
use hcycle::{CountMatrix, Graph, Mode, VertexSet};

/// Planted random-cycle graph with background noise.
pub fn noisy_graph(n: usize, h: usize, mode: Mode, density: f64, seed: u64) -> Graph {
    plant_instance(n, h, mode, &PlantSpec::RandomCycles { cycles: n / 4, density }, seed).expect("fixture fits").0
}

/// Deterministic dense matrix with small entries.
pub fn matrix(rows: usize, cols: usize) -> CountMatrix {
    let data: Vec<Vec<u128>> = (0..rows).map(|r| (0..cols).map(|c| ((r * 31 + c * 17) % 5) as u128).collect()).collect();
    CountMatrix::from_rows(&data).expect("rectangular")
}

/// Contiguous round-robin partition of `0..n` into `h` classes.
pub fn round_robin(n: usize, h: usize) -> Vec<VertexSet> {
    (0..h).map(|c| (0..n).filter(|v| v % h == c).collect()).collect()
}

/// A corpus entry by name.
pub fn corpus_graph(name: &str) -> (Graph, usize) {
    let e = standard_corpus().into_iter().find(|e| e.name == name).expect("known corpus entry");
    (e.build().expect("corpus builds").0, e.h)
}
