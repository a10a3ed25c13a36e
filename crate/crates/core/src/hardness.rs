//! Gap-preserving gadget constructions and planted instances with
//! certified ground truth.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::brute_force_cycles;
use crate::graph::{Graph, Mode};
use crate::rng::rng_from_seed;

/// Tripartite graph on `A ⊔ B ⊔ C`. Edge endpoints are indices local to
/// their part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripartiteSpec {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub e_ab: Vec<(usize, usize)>,
    pub e_bc: Vec<(usize, usize)>,
    pub e_ca: Vec<(usize, usize)>,
}

impl TripartiteSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |edges: &[(usize, usize)], n1: usize, n2: usize, name: &str| {
            if edges.iter().any(|&(x, y)| x >= n1 || y >= n2) {
                Err(Error::invalid(format!("{name} edge out of range")))
            } else {
                Ok(())
            }
        };
        check(&self.e_ab, self.a, self.b, "A-B")?;
        check(&self.e_bc, self.b, self.c, "B-C")?;
        check(&self.e_ca, self.c, self.a, "C-A")
    }

    /// Undirected graph with `A = 0..a`, `B = a..a+b`, `C = a+b..`.
    pub fn to_graph(&self) -> Result<Graph> {
        self.validate()?;
        let (ob, oc) = (self.a, self.a + self.b);
        let mut e = Vec::new();
        e.extend(self.e_ab.iter().map(|&(x, y)| (x, ob + y)));
        e.extend(self.e_bc.iter().map(|&(x, y)| (ob + x, oc + y)));
        e.extend(self.e_ca.iter().map(|&(x, y)| (oc + x, y)));
        Graph::from_edges(self.a + self.b + self.c, Mode::Undirected, &e)
    }

    /// Each cross pair becomes an edge independently with probability `p`.
    pub fn random(a: usize, b: usize, c: usize, p: f64, seed: u64) -> TripartiteSpec {
        let mut rng = rng_from_seed(seed);
        let mut pairs = |n1: usize, n2: usize| {
            let mut out = Vec::new();
            for x in 0..n1 {
                for y in 0..n2 {
                    if rng.gen::<f64>() < p {
                        out.push((x, y));
                    }
                }
            }
            out
        };
        let e_ab = pairs(a, b);
        let e_bc = pairs(b, c);
        let e_ca = pairs(c, a);
        TripartiteSpec { a, b, c, e_ab, e_bc, e_ca }
    }

    fn adjacent_ab(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.a];
        for &(x, y) in &self.e_ab {
            adj[x].push(y);
        }
        adj
    }

    fn adjacent_cb(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.c];
        for &(x, y) in &self.e_bc {
            adj[y].push(x);
        }
        adj
    }
}

/// Replaces every `x ∈ B` by `t` copies `(x, i)`, each adjacent to the
/// `A ∪ C` neighbors of `x`; `A-C` edges are kept. Vertices are laid out
/// as `A`, then `C`, then `(x, i) -> a + c + x t + i`.
pub fn triangle_gap_blowup(g: &TripartiteSpec, t: usize) -> Result<Graph> {
    g.validate()?;
    if t == 0 {
        return Err(Error::invalid("blow-up factor t must be at least 1"));
    }
    let oc = g.a;
    let ob = g.a + g.c;
    let copy = |x: usize, i: usize| ob + x * t + i;
    let mut e = Vec::new();
    e.extend(g.e_ca.iter().map(|&(c, a)| (oc + c, a)));
    for &(a, x) in &g.e_ab {
        e.extend((0..t).map(|i| (a, copy(x, i))));
    }
    for &(x, c) in &g.e_bc {
        e.extend((0..t).map(|i| (oc + c, copy(x, i))));
    }
    Graph::from_edges(g.a + g.c + t * g.b, Mode::Undirected, &e)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayeredGadget {
    pub graph: Graph,
    /// Copies per `B` vertex in each layer.
    pub ell: usize,
    /// Cycles contributed per triangle: `ell^(h-2)`.
    pub realized_t: u64,
}

/// Smallest `ell >= 1` with `ell^e >= t`, in exact integer arithmetic.
pub fn integer_root_ceil(t: u64, e: u32) -> u64 {
    if t <= 1 || e == 0 {
        return 1;
    }
    let mut ell = ((t as f64).powf(1.0 / e as f64).round() as u64).max(1);
    while ell > 1 && (ell - 1).checked_pow(e).is_some_and(|x| x >= t) {
        ell -= 1;
    }
    while ell.checked_pow(e).is_some_and(|x| x < t) {
        ell += 1;
    }
    ell
}

/// Builds the layered `h`-cycle gadget: `A`, layers `B_1..B_{h-2}` of `ell`
/// copies of `B`, and `C`, with edges `C -> A`, `A -> B_1`, `B_{h-2} -> C`
/// and all copies of `b` in `B_j` to all copies of `b` in `B_{j+1}`.
///
/// Vertex layout: `A`, then `C`, then `(b, i, j) -> a + c + ((j b_count + b) ell + i)`.
pub fn hcycle_gap_layering(g: &TripartiteSpec, h: usize, t: u64, mode: Mode) -> Result<LayeredGadget> {
    g.validate()?;
    if h < 3 {
        return Err(Error::invalid("cycle length must be at least 3"));
    }
    if t == 0 {
        return Err(Error::invalid("target multiplicity t must be at least 1"));
    }
    if mode == Mode::Undirected && h.is_multiple_of(2) {
        return Err(Error::invalid("undirected layering requires odd h; for even h the layers admit extra cycles"));
    }
    let layers = h - 2;
    let ell = integer_root_ceil(t, layers as u32);
    let realized_t =
        ell.checked_pow(layers as u32).ok_or_else(|| Error::Overflow(format!("ell^(h-2) for ell = {ell}, h = {h}")))?;
    let ell = ell as usize;
    let (oc, ob) = (g.a, g.a + g.c);
    let node = |b: usize, i: usize, j: usize| ob + (j * g.b + b) * ell + i;
    let mut e = Vec::new();
    e.extend(g.e_ca.iter().map(|&(c, a)| (oc + c, a)));
    for (a, nb) in g.adjacent_ab().iter().enumerate() {
        for &b in nb {
            e.extend((0..ell).map(|i| (a, node(b, i, 0))));
        }
    }
    for (c, nb) in g.adjacent_cb().iter().enumerate() {
        for &b in nb {
            e.extend((0..ell).map(|i| (node(b, i, layers - 1), oc + c)));
        }
    }
    for j in 0..layers - 1 {
        for b in 0..g.b {
            for i in 0..ell {
                e.extend((0..ell).map(|i2| (node(b, i, j), node(b, i2, j + 1))));
            }
        }
    }
    let graph = Graph::from_edges(g.a + g.c + layers * ell * g.b, mode, &e)?;
    Ok(LayeredGadget { graph, ell, realized_t })
}

/// Planted-instance presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlantSpec {
    /// No cycles: a random DAG (directed) or forest (undirected).
    Acyclic { edges: usize },
    /// `cycles` vertex-disjoint planted cycles and nothing else.
    Disjoint { cycles: usize },
    /// Planted cycles on random vertex tuples plus background edges of the
    /// given density; the realized count comes from enumeration.
    RandomCycles { cycles: usize, density: f64 },
    /// Directed gadget `v -> u -> W_1 => ... => W_{h-2} -> v` with complete
    /// links between consecutive groups of size `k`, so
    /// `t(v) = t(u) = k^(h-2)`, plus `light_cycles` disjoint cycles.
    HeavyGadget { k: usize, light_cycles: usize },
    /// A complete graph on `size` vertices plus `light_cycles` disjoint cycles.
    Clique { size: usize, light_cycles: usize },
    /// Disjoint cliques of the given sizes, plus `background_edges` random
    /// edges of a bipartite graph on the remaining vertices. The background
    /// has no odd cycles, so for odd `h` every cycle lies in a clique.
    Cliques { sizes: Vec<usize>, background_edges: usize },
    /// Three designated vertices, each on exactly one cycle: one shared
    /// cycle through all three (`shared`), or three separate cycles.
    DoubleCounting { shared: bool },
}

/// Oracle-verified facts about a planted instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n: usize,
    pub h: usize,
    pub mode: Mode,
    pub seed: u64,
    pub spec: PlantSpec,
    pub total: u64,
    pub per_vertex: Vec<u64>,
    /// Vertices at or above `heavy_threshold`.
    pub heavy: Vec<usize>,
    pub heavy_threshold: Option<u64>,
    /// Vertices at or below `light_threshold` that lie on some cycle or
    /// on none, i.e. all vertices with small counts.
    pub light: Vec<usize>,
    pub light_threshold: Option<u64>,
    /// Distinguished vertex set (the three witnesses of `DoubleCounting`).
    pub designated: Vec<usize>,
}

struct Builder {
    edges: Vec<(usize, usize)>,
    perm: Vec<usize>,
    next: usize,
}

impl Builder {
    fn take(&mut self, k: usize) -> Result<Vec<usize>> {
        if self.next + k > self.perm.len() {
            return Err(Error::invalid("instance does not fit in n vertices"));
        }
        let out = self.perm[self.next..self.next + k].to_vec();
        self.next += k;
        Ok(out)
    }

    fn cycle(&mut self, vs: &[usize]) {
        for i in 0..vs.len() {
            self.edges.push((vs[i], vs[(i + 1) % vs.len()]));
        }
    }
}

fn clique_edges(edges: &mut Vec<(usize, usize)>, vs: &[usize], mode: Mode) {
    for (i, &x) in vs.iter().enumerate() {
        for (j, &y) in vs.iter().enumerate() {
            if i != j && (mode == Mode::Directed || i < j) {
                edges.push((x, y));
            }
        }
    }
}

/// `h`-cycles in the complete (di)graph on `size` vertices:
/// `C(size, h) (h-1)!`, halved when undirected.
pub fn cycles_in_clique(size: usize, h: usize, mode: Mode) -> u64 {
    if h > size {
        return 0;
    }
    let ordered: u64 = (0..h).map(|i| (size - i) as u64).product::<u64>() / h as u64;
    match mode {
        Mode::Directed => ordered,
        Mode::Undirected => ordered / 2,
    }
}

/// Generates a planted instance and certifies its counts by enumeration.
pub fn plant_instance(n: usize, h: usize, mode: Mode, spec: &PlantSpec, seed: u64) -> Result<(Graph, GroundTruth)> {
    if h < 3 {
        return Err(Error::invalid("cycle length must be at least 3"));
    }
    let mut rng = rng_from_seed(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut b = Builder { edges: Vec::new(), perm, next: 0 };
    let mut heavy_threshold = None;
    let mut light_threshold = None;
    let mut designated = Vec::new();
    let mut expect_total = None;
    let mut expect_heavy: Vec<(usize, u64)> = Vec::new();

    match *spec {
        PlantSpec::Acyclic { edges } => {
            let order = b.perm.clone();
            match mode {
                Mode::Directed => {
                    if n >= 2 {
                        for _ in 0..edges {
                            let i = rng.gen_range(0..n - 1);
                            let j = rng.gen_range(i + 1..n);
                            b.edges.push((order[i], order[j]));
                        }
                    }
                }
                Mode::Undirected => {
                    for j in 1..n.min(edges + 1) {
                        let i = rng.gen_range(0..j);
                        b.edges.push((order[i], order[j]));
                    }
                }
            }
            expect_total = Some(0);
        }
        PlantSpec::Disjoint { cycles } => {
            if cycles.checked_mul(h).is_none_or(|x| x > n) {
                return Err(Error::invalid(format!("{cycles} disjoint {h}-cycles need more than n = {n} vertices")));
            }
            for _ in 0..cycles {
                let vs = b.take(h)?;
                b.cycle(&vs);
            }
            expect_total = Some(cycles as u64);
            light_threshold = Some(1);
        }
        PlantSpec::RandomCycles { cycles, density } => {
            if n < h {
                return Err(Error::invalid("n is smaller than h"));
            }
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::invalid("density outside [0, 1]"));
            }
            for _ in 0..cycles {
                let mut vs: Vec<usize> = (0..n).collect();
                vs.shuffle(&mut rng);
                b.cycle(&vs[..h]);
            }
            for u in 0..n {
                for v in 0..n {
                    if u != v && (mode == Mode::Directed || u < v) && rng.gen::<f64>() < density {
                        b.edges.push((u, v));
                    }
                }
            }
        }
        PlantSpec::HeavyGadget { k, light_cycles } => {
            if mode == Mode::Undirected && h > 3 {
                return Err(Error::invalid("the heavy gadget is exact only for directed graphs or h = 3"));
            }
            if k == 0 {
                return Err(Error::invalid("gadget groups need k >= 1"));
            }
            let v = b.take(1)?[0];
            let u = b.take(1)?[0];
            let groups: Vec<Vec<usize>> = (0..h - 2).map(|_| b.take(k)).collect::<Result<_>>()?;
            b.edges.push((v, u));
            b.edges.extend(groups[0].iter().map(|&w| (u, w)));
            for j in 0..h - 3 {
                for &x in &groups[j] {
                    b.edges.extend(groups[j + 1].iter().map(|&y| (x, y)));
                }
            }
            b.edges.extend(groups[h - 3].iter().map(|&w| (w, v)));
            for _ in 0..light_cycles {
                let vs = b.take(h)?;
                b.cycle(&vs);
            }
            let heavy = (k as u64).pow(h as u32 - 2);
            heavy_threshold = Some(heavy);
            light_threshold = Some(1);
            expect_heavy = vec![(v, heavy), (u, heavy)];
            designated = vec![v];
        }
        PlantSpec::Clique { size, light_cycles } => {
            if size < h {
                return Err(Error::invalid("clique smaller than h"));
            }
            let vs = b.take(size)?;
            clique_edges(&mut b.edges, &vs, mode);
            for _ in 0..light_cycles {
                let cyc = b.take(h)?;
                b.cycle(&cyc);
            }
            // Through a fixed clique vertex: ordered choices of the other h-1,
            // halved when the two traversal directions coincide.
            let mut per = (1..h).map(|i| (size - i) as u64).product::<u64>();
            if mode == Mode::Undirected {
                per /= 2;
            }
            heavy_threshold = Some(per);
            light_threshold = Some(1);
            expect_heavy = vs.iter().map(|&x| (x, per)).collect();
        }
        PlantSpec::Cliques { ref sizes, background_edges } => {
            for &size in sizes {
                let vs = b.take(size)?;
                clique_edges(&mut b.edges, &vs, mode);
            }
            let rest = b.take(n - b.next)?;
            let (left, right) = rest.split_at(rest.len() / 2);
            let capacity = left.len() * right.len() * if mode == Mode::Directed { 2 } else { 1 };
            if background_edges > capacity {
                return Err(Error::invalid(format!("{background_edges} background edges exceed the {capacity} available")));
            }
            let mut pairs = std::collections::BTreeSet::new();
            while pairs.len() < background_edges {
                let (x, y) = (left[rng.gen_range(0..left.len())], right[rng.gen_range(0..right.len())]);
                let e = if mode == Mode::Directed && rng.gen::<bool>() { (y, x) } else { (x, y) };
                pairs.insert(e);
            }
            b.edges.extend(pairs);
            if h % 2 == 1 {
                expect_total = Some(sizes.iter().map(|&k| cycles_in_clique(k, h, mode)).sum());
            }
        }
        PlantSpec::DoubleCounting { shared } => {
            if shared {
                let vs = b.take(h)?;
                b.cycle(&vs);
                designated = vs[..3].to_vec();
                expect_total = Some(1);
            } else {
                for _ in 0..3 {
                    let vs = b.take(h)?;
                    b.cycle(&vs);
                    designated.push(vs[0]);
                }
                expect_total = Some(3);
            }
            designated.sort_unstable();
        }
    }

    let g = Graph::from_edges(n, mode, &b.edges)?;
    let counts = brute_force_cycles(&g, h, crate::exact::DEFAULT_BUDGET)?;
    if let Some(t) = expect_total {
        if counts.total != t {
            return Err(Error::invariant(format!("planted {t} cycles but enumeration found {}", counts.total)));
        }
    }
    for &(v, t) in &expect_heavy {
        if counts.per_vertex.get(v) != t {
            return Err(Error::invariant(format!(
                "vertex {v} should lie on {t} cycles, enumeration found {}",
                counts.per_vertex.get(v)
            )));
        }
    }
    let per = counts.per_vertex.counts;
    let heavy = heavy_threshold.map_or(Vec::new(), |th| (0..n).filter(|&v| per[v] >= th).collect());
    let light = light_threshold.map_or(Vec::new(), |th| (0..n).filter(|&v| per[v] <= th).collect());
    let truth = GroundTruth {
        n,
        h,
        mode,
        seed,
        spec: spec.clone(),
        total: counts.total,
        per_vertex: per,
        heavy,
        heavy_threshold,
        light,
        light_threshold,
        designated,
    };
    Ok((g, truth))
}

/// A named planted instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub n: usize,
    pub h: usize,
    pub mode: Mode,
    pub spec: PlantSpec,
    pub seed: u64,
}

impl CorpusEntry {
    fn new(name: &str, n: usize, h: usize, mode: Mode, spec: PlantSpec, seed: u64) -> CorpusEntry {
        CorpusEntry { name: name.to_string(), n, h, mode, spec, seed }
    }

    pub fn build(&self) -> Result<(Graph, GroundTruth)> {
        plant_instance(self.n, self.h, self.mode, &self.spec, self.seed)
    }
}

/// Ten small instances with between 1 and `n` cycles, mixing modes and
/// cycle lengths 3 and 4.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    use Mode::{Directed as D, Undirected as U};
    vec![
        CorpusEntry::new("single-triangle", 60, 3, U, PlantSpec::Disjoint { cycles: 1 }, 100),
        CorpusEntry::new("disjoint-triangles", 60, 3, U, PlantSpec::Disjoint { cycles: 12 }, 101),
        CorpusEntry::new("random-triangles", 100, 3, U, PlantSpec::RandomCycles { cycles: 25, density: 0.03 }, 102),
        CorpusEntry::new("two-k5", 80, 3, U, PlantSpec::Cliques { sizes: vec![5, 5], background_edges: 60 }, 103),
        CorpusEntry::new("random-triangles-dense", 120, 3, U, PlantSpec::RandomCycles { cycles: 40, density: 0.035 }, 104),
        CorpusEntry::new("random-directed-triangles", 80, 3, D, PlantSpec::RandomCycles { cycles: 30, density: 0.03 }, 105),
        CorpusEntry::new("disjoint-directed-triangles", 120, 3, D, PlantSpec::Disjoint { cycles: 40 }, 106),
        CorpusEntry::new("directed-gadget", 60, 4, D, PlantSpec::HeavyGadget { k: 4, light_cycles: 6 }, 107),
        CorpusEntry::new("disjoint-squares", 60, 4, U, PlantSpec::Disjoint { cycles: 10 }, 108),
        CorpusEntry::new("random-directed-squares", 80, 4, D, PlantSpec::RandomCycles { cycles: 12, density: 0.03 }, 109),
    ]
}
