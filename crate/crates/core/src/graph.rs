//! Graph representation, vertex sets, colorings and the derived graphs
//! (induced subgraphs, vertex samples, layered colorings) used by the
//! counting routines.

use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Directed,
    Undirected,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Directed => "directed",
            Mode::Undirected => "undirected",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "directed" | "d" => Ok(Mode::Directed),
            "undirected" | "u" => Ok(Mode::Undirected),
            other => Err(Error::invalid(format!("unknown graph mode `{other}`"))),
        }
    }
}

/// Simple graph on vertices `0..n` with bit-packed adjacency rows.
///
/// Out- and in-neighbor lists are kept alongside the bit rows so kernels can
/// iterate neighbors without scanning whole rows. In undirected mode both
/// lists coincide. Values are immutable once built.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    mode: Mode,
    words: usize,
    bits: Vec<u64>,
    out_off: Vec<u32>,
    out_tgt: Vec<u32>,
    in_off: Vec<u32>,
    in_tgt: Vec<u32>,
    labels: Option<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.mode == other.mode && self.bits == other.bits && self.labels == other.labels
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn empty(n: usize, mode: Mode) -> Graph {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            mode,
            words,
            bits: vec![0; n * words],
            out_off: vec![0; n + 1],
            out_tgt: Vec::new(),
            in_off: vec![0; n + 1],
            in_tgt: Vec::new(),
            labels: None,
        }
    }

    /// Builds a graph from an edge list. In undirected mode each pair may be
    /// given in either orientation; repeated edges are merged.
    pub fn from_edges(n: usize, mode: Mode, edges: &[(usize, usize)]) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::invalid("vertex count exceeds u32 range"));
        }
        let mut g = Graph::empty(n, mode);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            g.set_bit(u, v);
            if mode == Mode::Undirected {
                g.set_bit(v, u);
            }
        }
        g.rebuild_lists();
        Ok(g)
    }

    fn set_bit(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1u64 << (v % 64);
    }

    fn rebuild_lists(&mut self) {
        let n = self.n;
        self.out_tgt.clear();
        let mut in_deg = vec![0u32; n + 1];
        for u in 0..n {
            self.out_off[u] = self.out_tgt.len() as u32;
            let row = &self.bits[u * self.words..(u + 1) * self.words];
            for (w, &word) in row.iter().enumerate() {
                let mut x = word;
                while x != 0 {
                    let v = w * 64 + x.trailing_zeros() as usize;
                    self.out_tgt.push(v as u32);
                    in_deg[v + 1] += 1;
                    x &= x - 1;
                }
            }
        }
        self.out_off[n] = self.out_tgt.len() as u32;
        for v in 0..n {
            in_deg[v + 1] += in_deg[v];
        }
        self.in_off.copy_from_slice(&in_deg);
        let mut fill = in_deg;
        self.in_tgt = vec![0; self.out_tgt.len()];
        for u in 0..n {
            for i in self.out_off[u]..self.out_off[u + 1] {
                let v = self.out_tgt[i as usize] as usize;
                self.in_tgt[fill[v] as usize] = u as u32;
                fill[v] += 1;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_directed(&self) -> bool {
        self.mode == Mode::Directed
    }

    /// Edge `u -> v` (or `{u, v}` in undirected mode).
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn out_neighbors(&self, u: usize) -> &[u32] {
        &self.out_tgt[self.out_off[u] as usize..self.out_off[u + 1] as usize]
    }

    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.in_tgt[self.in_off[v] as usize..self.in_off[v + 1] as usize]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        (self.out_off[u + 1] - self.out_off[u]) as usize
    }

    pub fn in_degree(&self, v: usize) -> usize {
        (self.in_off[v + 1] - self.in_off[v]) as usize
    }

    /// Largest out- or in-degree.
    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.out_degree(v).max(self.in_degree(v))).max().unwrap_or(0)
    }

    /// Number of edges; undirected edges count once.
    pub fn edge_count(&self) -> usize {
        let arcs = self.out_tgt.len();
        match self.mode {
            Mode::Directed => arcs,
            Mode::Undirected => arcs / 2,
        }
    }

    /// Edges in lexicographic order; undirected edges listed once with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in self.out_neighbors(u) {
                let v = v as usize;
                if self.mode == Mode::Directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Identifier of `v` in the root graph this graph was derived from.
    pub fn label(&self, v: usize) -> usize {
        match &self.labels {
            Some(l) => l[v],
            None => v,
        }
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Graph> {
        if labels.len() != self.n {
            return Err(Error::invalid("label count does not match vertex count"));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("labels must be distinct"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Subgraph induced by `keep`. Vertex `i` of the result is `keep[i]` of
    /// `self`, and labels are composed so they keep pointing at the root.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> Result<Graph> {
        if let Some(&last) = keep.as_slice().last() {
            if last >= self.n {
                return Err(Error::invalid(format!("vertex {last} out of range for n = {}", self.n)));
            }
        }
        let members = keep.as_slice();
        let mut pos = vec![u32::MAX; self.n];
        for (i, &v) in members.iter().enumerate() {
            pos[v] = i as u32;
        }
        let mut sub = Graph::empty(members.len(), self.mode);
        for (i, &u) in members.iter().enumerate() {
            for &v in self.out_neighbors(u) {
                let j = pos[v as usize];
                if j != u32::MAX {
                    sub.set_bit(i, j as usize);
                }
            }
        }
        sub.rebuild_lists();
        sub.labels = Some(members.iter().map(|&v| self.label(v)).collect());
        Ok(sub)
    }

    /// Vertices within `radius` steps of `v`, ignoring edge directions.
    pub fn ball(&self, v: usize, radius: usize) -> VertexSet {
        let mut dist = vec![usize::MAX; self.n];
        dist[v] = 0;
        let mut frontier = vec![v];
        let mut all = vec![v];
        for d in 1..=radius {
            let mut next = Vec::new();
            for &u in &frontier {
                let nbrs = self.out_neighbors(u).iter().chain(if self.mode == Mode::Directed {
                    self.in_neighbors(u).iter()
                } else {
                    [].iter()
                });
                for &w in nbrs {
                    let w = w as usize;
                    if dist[w] == usize::MAX {
                        dist[w] = d;
                        next.push(w);
                    }
                }
            }
            all.extend_from_slice(&next);
            frontier = next;
        }
        VertexSet::new(all)
    }

    /// Vertices that survive repeated peeling of those that cannot lie on a
    /// cycle: undirected vertices of degree below 2, directed vertices with
    /// no in- or no out-neighbor. Every cycle of the graph lies inside.
    pub fn cycle_core(&self) -> VertexSet {
        let n = self.n;
        let mut alive = vec![true; n];
        let mut dout: Vec<usize> = (0..n).map(|v| self.out_degree(v)).collect();
        let mut din: Vec<usize> = (0..n).map(|v| self.in_degree(v)).collect();
        let dead = |v: usize, dout: &[usize], din: &[usize]| match self.mode {
            Mode::Undirected => dout[v] < 2,
            Mode::Directed => dout[v] == 0 || din[v] == 0,
        };
        let mut stack: Vec<usize> = (0..n).filter(|&v| dead(v, &dout, &din)).collect();
        for &v in &stack {
            alive[v] = false;
        }
        while let Some(v) = stack.pop() {
            for &u in self.out_neighbors(v) {
                let u = u as usize;
                din[u] -= 1;
                if self.mode == Mode::Undirected {
                    dout[u] -= 1;
                }
                if alive[u] && dead(u, &dout, &din) {
                    alive[u] = false;
                    stack.push(u);
                }
            }
            if self.mode == Mode::Directed {
                for &u in self.in_neighbors(v) {
                    let u = u as usize;
                    dout[u] -= 1;
                    if alive[u] && dead(u, &dout, &din) {
                        alive[u] = false;
                        stack.push(u);
                    }
                }
            }
        }
        VertexSet::from_sorted_unchecked((0..n).filter(|&v| alive[v]).collect())
    }

    /// `G[p]`: keeps each vertex independently with probability `p`.
    pub fn bernoulli_sample(&self, p: f64, seed: u64) -> Result<Graph> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("keep probability {p} outside [0, 1]")));
        }
        let mut rng = rng_from_seed(seed);
        let keep: Vec<usize> = (0..self.n).filter(|_| rng.gen::<f64>() < p).collect();
        self.induced_subgraph(&VertexSet::from_sorted_unchecked(keep))
    }

    /// Removes the vertices of `drop`.
    pub fn remove_vertices(&self, drop: &VertexSet) -> Result<Graph> {
        self.induced_subgraph(&drop.complement(self.n))
    }

    /// Parses the interchange format: a header `n mode`, then one `u v` pair
    /// per line. Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut lines =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header `n mode`".into() })?;
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse { line: hline, msg: "bad vertex count".into() })?;
        let mode: Mode = parts
            .next()
            .ok_or_else(|| Error::Parse { line: hline, msg: "missing mode".into() })?
            .parse()
            .map_err(|e: Error| Error::Parse { line: hline, msg: e.to_string() })?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: hline, msg: "trailing tokens in header".into() });
        }
        let mut edges = Vec::new();
        for (line, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::Parse { line, msg: format!("expected `u v`, got `{l}`") });
            }
            let parse = |t: &str| t.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("bad vertex id `{t}`") });
            let (u, v) = (parse(toks[0])?, parse(toks[1])?);
            if u >= n || v >= n {
                return Err(Error::Parse { line, msg: format!("vertex out of range in `{l}`") });
            }
            if u == v {
                return Err(Error::Parse { line, msg: format!("self-loop at {u}") });
            }
            edges.push((u, v));
        }
        Graph::from_edges(n, mode, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.mode.as_str());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

/// Sorted, duplicate-free set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> VertexSet {
        members.sort_unstable();
        members.dedup();
        VertexSet { members }
    }

    fn from_sorted_unchecked(members: Vec<usize>) -> VertexSet {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        VertexSet { members }
    }

    pub fn empty() -> VertexSet {
        VertexSet::default()
    }

    pub fn full(n: usize) -> VertexSet {
        VertexSet { members: (0..n).collect() }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.members.iter().chain(&other.members).copied().collect())
    }

    /// `{0..n} \ self`.
    pub fn complement(&self, n: usize) -> VertexSet {
        VertexSet::from_sorted_unchecked((0..n).filter(|&v| !self.contains(v)).collect())
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.members {
            if v < n {
                m[v] = true;
            }
        }
        m
    }

    /// Checks that every member lies in `0..n`.
    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.members.last() {
            Some(&v) if v >= n => Err(Error::invalid(format!("vertex {v} out of range for n = {n}"))),
            _ => Ok(()),
        }
    }

    /// Parses whitespace-separated vertex ids.
    pub fn parse(text: &str) -> Result<VertexSet> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            for tok in line.split_whitespace() {
                let v = tok.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad vertex id `{tok}`") })?;
                out.push(v);
            }
        }
        Ok(VertexSet::new(out))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Vertex coloring with classes `0..num_classes`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<usize>,
    num_classes: usize,
}

impl Coloring {
    pub fn new(colors: Vec<usize>, num_classes: usize) -> Result<Coloring> {
        if num_classes == 0 {
            return Err(Error::invalid("a coloring needs at least one class"));
        }
        if let Some(&c) = colors.iter().find(|&&c| c >= num_classes) {
            return Err(Error::invalid(format!("color {c} outside 0..{num_classes}")));
        }
        Ok(Coloring { colors, num_classes })
    }

    /// Colors drawn i.i.d. uniformly from `0..num_classes`.
    pub fn random(n: usize, num_classes: usize, seed: u64) -> Result<Coloring> {
        if num_classes == 0 {
            return Err(Error::invalid("a coloring needs at least one class"));
        }
        let mut rng = rng_from_seed(seed);
        let colors = (0..n).map(|_| rng.gen_range(0..num_classes)).collect();
        Ok(Coloring { colors, num_classes })
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.colors
    }

    /// Members of every class, in class order.
    pub fn classes(&self) -> Vec<VertexSet> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c].push(v);
        }
        out.into_iter().map(VertexSet::from_sorted_unchecked).collect()
    }
}

pub fn random_coloring(n: usize, num_classes: usize, seed: u64) -> Result<Coloring> {
    Coloring::random(n, num_classes, seed)
}

/// Directed graph keeping only edges from class `i` to class `i + 1 mod h`.
/// In undirected mode either stored orientation of an edge may qualify.
pub fn layered_graph(g: &Graph, phi: &Coloring) -> Result<Graph> {
    if phi.len() != g.n() {
        return Err(Error::invalid("coloring length does not match vertex count"));
    }
    let h = phi.num_classes();
    let mut out = Graph::empty(g.n(), Mode::Directed);
    for u in 0..g.n() {
        let next = (phi.color(u) + 1) % h;
        for &v in g.out_neighbors(u) {
            let v = v as usize;
            if phi.color(v) == next && phi.color(v) != phi.color(u) {
                out.set_bit(u, v);
            }
        }
    }
    out.rebuild_lists();
    out.labels = g.labels.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> Graph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Graph::from_edges(n, Mode::Undirected, &e).unwrap()
    }

    #[test]
    fn undirected_is_symmetric_and_loop_free() {
        let g = k(5);
        for u in 0..5 {
            assert!(!g.has_edge(u, u));
            for v in 0..5 {
                assert_eq!(g.has_edge(u, v), g.has_edge(v, u));
            }
        }
        assert_eq!(g.edge_count(), 10);
        assert!(Graph::from_edges(3, Mode::Directed, &[(1, 1)]).is_err());
    }

    #[test]
    fn induced_subgraph_of_triangle() {
        let g = k(3);
        let sub = g.induced_subgraph(&VertexSet::new(vec![0, 1])).unwrap();
        assert_eq!(sub.edges(), vec![(0, 1)]);
        assert_eq!(g.induced_subgraph(&VertexSet::full(3)).unwrap().edges(), g.edges());
        assert!(g.induced_subgraph(&VertexSet::new(vec![5])).is_err());
    }

    #[test]
    fn induced_labels_compose() {
        let g = Graph::from_edges(4, Mode::Directed, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let a = g.induced_subgraph(&VertexSet::new(vec![1, 2, 3])).unwrap();
        let b = a.induced_subgraph(&VertexSet::new(vec![1, 2])).unwrap();
        assert_eq!(b.labels(), Some(&[2, 3][..]));
        assert_eq!(b.edges(), vec![(0, 1)]);
    }

    #[test]
    fn bernoulli_extremes() {
        let g = k(6);
        assert_eq!(g.bernoulli_sample(1.0, 3).unwrap().n(), 6);
        assert_eq!(g.bernoulli_sample(0.0, 3).unwrap().n(), 0);
        assert!(g.bernoulli_sample(1.5, 3).is_err());
    }

    #[test]
    fn round_trip_file_format() {
        let g = Graph::from_edges(4, Mode::Directed, &[(0, 1), (2, 3), (3, 2)]).unwrap();
        let back = Graph::parse(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
        assert!(matches!(Graph::parse("3 directed\n0 5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(Graph::parse("").is_err());
    }

    #[test]
    fn layered_triangle_keeps_cycle_edges() {
        let g = Graph::from_edges(3, Mode::Directed, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let phi = Coloring::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(layered_graph(&g, &phi).unwrap().edge_count(), 3);
        let mono = Coloring::new(vec![0, 0, 0], 3).unwrap();
        assert_eq!(layered_graph(&g, &mono).unwrap().edge_count(), 0);
    }

    #[test]
    fn coloring_single_class_and_determinism() {
        let c = Coloring::random(20, 1, 9).unwrap();
        assert!(c.as_slice().iter().all(|&x| x == 0));
        assert_eq!(Coloring::random(50, 4, 9).unwrap(), Coloring::random(50, 4, 9).unwrap());
    }
}
