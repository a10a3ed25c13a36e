//! Exact counts: brute-force cycle enumeration, the ordered-partition matrix
//! chain `t^sigma`, and per-vertex colorful counts `t^k_phi(v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Coloring, Graph, Mode, VertexSet};
use crate::matmul::{column_dots, diagonal_of_block_product, multiply_block, CountMatrix, WorkCounter, ZeroOneBlock};

/// Default step budget for [`brute_force_cycles`].
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Largest cycle length the colorful machinery accepts.
pub const MAX_H: usize = 10;

/// Per-vertex counts indexed by vertex id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerVertexCounts {
    pub counts: Vec<u64>,
}

impl PerVertexCounts {
    pub fn zeros(n: usize) -> PerVertexCounts {
        PerVertexCounts { counts: vec![0; n] }
    }

    pub fn get(&self, v: usize) -> u64 {
        self.counts[v]
    }

    pub fn sum(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// Vertices with a nonzero count.
    pub fn support(&self) -> VertexSet {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(v, _)| v).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub total: u64,
    pub per_vertex: PerVertexCounts,
}

/// Sequence `(U_1, ..., U_h)` of pairwise disjoint vertex sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    parts: Vec<VertexSet>,
}

impl OrderedPartition {
    pub fn new(parts: Vec<VertexSet>) -> Result<OrderedPartition> {
        if parts.len() < 3 {
            return Err(Error::invalid("an ordered partition needs h >= 3 parts"));
        }
        let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter()).collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != total {
            return Err(Error::invalid("partition parts are not disjoint"));
        }
        Ok(OrderedPartition { parts })
    }

    pub fn h(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }
}

fn check_h(h: usize) -> Result<()> {
    if !(3..=MAX_H).contains(&h) {
        return Err(Error::invalid(format!("cycle length h = {h} outside 3..={MAX_H}")));
    }
    Ok(())
}

fn to_u64(x: u128, n: usize, h: usize) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::Overflow(format!("per-vertex count exceeds 64 bits (n = {n}, h = {h})")))
}

fn with_dims(e: Error, n: usize, h: usize) -> Error {
    match e {
        Error::Overflow(m) => Error::Overflow(format!("{m} (n = {n}, h = {h})")),
        other => other,
    }
}

/// Number of ordered closed walks that realize one cycle copy.
pub fn automorphism_divisor(mode: Mode, h: usize) -> u128 {
    match mode {
        Mode::Directed => h as u128,
        Mode::Undirected => 2 * h as u128,
    }
}

/// Enumerates every `h`-cycle copy by depth-first search.
///
/// Each copy is rooted at its smallest vertex; in undirected mode the two
/// traversal directions are told apart by comparing the second and last
/// vertex. `budget` bounds the number of search steps.
pub fn brute_force_cycles(g: &Graph, h: usize, budget: u64) -> Result<CycleCounts> {
    if h < 3 {
        return Err(Error::invalid("cycle length must be at least 3"));
    }
    let n = g.n();
    let mut per = vec![0u64; n];
    let mut total = 0u64;
    let mut path = Vec::with_capacity(h);
    let mut on_path = vec![false; n];
    let mut steps = 0u64;

    struct Ctx<'a> {
        g: &'a Graph,
        h: usize,
        budget: u64,
        undirected: bool,
    }

    fn dfs(
        cx: &Ctx,
        start: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        steps: &mut u64,
        per: &mut [u64],
        total: &mut u64,
    ) -> Result<()> {
        let last = *path.last().unwrap();
        if path.len() == cx.h {
            if cx.g.has_edge(last, start) && (!cx.undirected || path[1] < path[cx.h - 1]) {
                *total += 1;
                for &v in path.iter() {
                    per[v] += 1;
                }
            }
            return Ok(());
        }
        for &w in cx.g.out_neighbors(last) {
            let w = w as usize;
            if w <= start || on_path[w] {
                continue;
            }
            *steps += 1;
            if *steps > cx.budget {
                return Err(Error::BudgetExceeded { budget: cx.budget });
            }
            path.push(w);
            on_path[w] = true;
            dfs(cx, start, path, on_path, steps, per, total)?;
            on_path[w] = false;
            path.pop();
        }
        Ok(())
    }

    let cx = Ctx { g, h, budget, undirected: g.mode() == Mode::Undirected };
    for s in 0..n {
        path.push(s);
        on_path[s] = true;
        dfs(&cx, s, &mut path, &mut on_path, &mut steps, &mut per, &mut total)?;
        on_path[s] = false;
        path.pop();
    }
    Ok(CycleCounts { total, per_vertex: PerVertexCounts { counts: per } })
}

/// Vertex classes with a reverse index, shared by all orderings of them.
struct ClassIndex {
    members: Vec<Vec<usize>>,
    class_of: Vec<u32>,
    pos: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl ClassIndex {
    fn new(n: usize, members: Vec<Vec<usize>>) -> ClassIndex {
        let mut class_of = vec![NONE; n];
        let mut pos = vec![NONE; n];
        for (c, m) in members.iter().enumerate() {
            for (i, &v) in m.iter().enumerate() {
                class_of[v] = c as u32;
                pos[v] = i as u32;
            }
        }
        ClassIndex { members, class_of, pos }
    }

    fn any_empty(&self) -> bool {
        self.members.iter().any(Vec::is_empty)
    }
}

/// Block `A[U_r, U_c]` of the adjacency matrix read in place. With
/// `backward` set the entry `(x, y)` is the edge `y -> x`, i.e. the block of
/// the transposed adjacency.
struct AdjBlock<'a> {
    g: &'a Graph,
    idx: &'a ClassIndex,
    row_class: usize,
    col_class: usize,
    backward: bool,
}

impl ZeroOneBlock for AdjBlock<'_> {
    fn rows(&self) -> usize {
        self.idx.members[self.row_class].len()
    }

    fn cols(&self) -> usize {
        self.idx.members[self.col_class].len()
    }

    fn for_each_one(&self, r: usize, f: &mut dyn FnMut(usize)) {
        let u = self.idx.members[self.row_class][r];
        let nbrs = if self.backward { self.g.in_neighbors(u) } else { self.g.out_neighbors(u) };
        let want = self.col_class as u32;
        for &w in nbrs {
            if self.idx.class_of[w as usize] == want {
                f(self.idx.pos[w as usize] as usize);
            }
        }
    }

    fn contains(&self, r: usize, c: usize) -> bool {
        let u = self.idx.members[self.row_class][r];
        let w = self.idx.members[self.col_class][c];
        if self.backward {
            self.g.has_edge(w, u)
        } else {
            self.g.has_edge(u, w)
        }
    }
}

fn block<'a>(g: &'a Graph, idx: &'a ClassIndex, from: usize, to: usize, backward: bool) -> AdjBlock<'a> {
    AdjBlock { g, idx, row_class: from, col_class: to, backward }
}

/// `t^sigma` for every class of `idx`, visiting classes in `order`.
///
/// Returns `None` when every count is zero, otherwise per-class count
/// vectors indexed by position within the class. The sequence is rotated so
/// that the smallest class comes first; counts are rotation invariant.
fn t_sigma_indexed(g: &Graph, idx: &ClassIndex, order: &[usize], wc: &mut WorkCounter) -> Result<Option<Vec<Vec<u128>>>> {
    let h = order.len();
    if idx.any_empty() {
        return Ok(None);
    }
    let start = (0..h).min_by_key(|&i| idx.members[order[i]].len()).unwrap();
    let o: Vec<usize> = (0..h).map(|i| order[(start + i) % h]).collect();

    // fwd[i]: walks U_1 -> ... -> U_{i+2}, sized |U_1| x |U_{i+2}|.
    let mut fwd: Vec<CountMatrix> = Vec::with_capacity(h - 1);
    fwd.push(block(g, idx, o[0], o[1], false).to_dense());
    if fwd[0].is_zero() {
        return Ok(None);
    }
    for i in 1..h - 1 {
        let next = multiply_block(&fwd[i - 1], &block(g, idx, o[i], o[i + 1], false), wc)?;
        if next.is_zero() {
            return Ok(None);
        }
        fwd.push(next);
    }
    let first = diagonal_of_block_product(&fwd[h - 2], &block(g, idx, o[h - 1], o[0], false), wc)?;

    // rev[m]: backward walks from U_1 through U_h, U_{h-1}, ... ending in
    // U_{h-m}; entry (x, y) counts paths y -> ... -> x.
    let mut rev: Vec<CountMatrix> = Vec::with_capacity(h - 1);
    rev.push(block(g, idx, o[0], o[h - 1], true).to_dense());
    for m in 1..h - 1 {
        let next = multiply_block(&rev[m - 1], &block(g, idx, o[h - m], o[h - m - 1], true), wc)?;
        rev.push(next);
    }

    let mut out = vec![Vec::new(); idx.members.len()];
    out[o[0]] = first;
    for p in 1..h {
        // Class U_{p+1}: forward walks from U_1 to it, backward walks from U_1 to it.
        out[o[p]] = column_dots(&fwd[p - 1], &rev[h - 1 - p], wc)?;
    }
    Ok(Some(out))
}

/// `t^sigma(v)` for a single vertex `v` of class `order[0]`, running the
/// forward chain from `{v}` only.
fn t_sigma_at_indexed(g: &Graph, idx: &ClassIndex, order: &[usize], v: usize, wc: &mut WorkCounter) -> Result<u128> {
    let h = order.len();
    if idx.any_empty() {
        return Ok(0);
    }
    let mut cur = CountMatrix::zeros(1, idx.members[order[1]].len());
    let want = order[1] as u32;
    for &w in g.out_neighbors(v) {
        if idx.class_of[w as usize] == want {
            cur.set(0, idx.pos[w as usize] as usize, 1);
        }
    }
    if cur.is_zero() {
        return Ok(0);
    }
    for i in 1..h - 1 {
        cur = multiply_block(&cur, &block(g, idx, order[i], order[i + 1], false), wc)?;
        if cur.is_zero() {
            return Ok(0);
        }
    }
    let last = &idx.members[order[h - 1]];
    wc.record(1, last.len(), 1);
    let mut acc = 0u128;
    for (k, &w) in last.iter().enumerate() {
        let x = cur.get(0, k);
        if x != 0 && g.has_edge(w, v) {
            acc = acc.checked_add(x).ok_or_else(|| Error::Overflow("closing dot product".into()))?;
        }
    }
    Ok(acc)
}

/// Per-vertex counts of ordered cycles `(v_1, ..., v_h)` with `v_i` in
/// `U_i`, reported at the vertex of each position.
pub fn count_t_sigma(g: &Graph, sigma: &OrderedPartition, wc: &mut WorkCounter) -> Result<PerVertexCounts> {
    let (n, h) = (g.n(), sigma.h());
    for p in sigma.parts() {
        p.check_range(n)?;
    }
    let idx = ClassIndex::new(n, sigma.parts().iter().map(|p| p.as_slice().to_vec()).collect());
    let order: Vec<usize> = (0..h).collect();
    let mut out = PerVertexCounts::zeros(n);
    if let Some(per_class) = t_sigma_indexed(g, &idx, &order, wc).map_err(|e| with_dims(e, n, h))? {
        for (c, counts) in per_class.iter().enumerate() {
            for (i, &x) in counts.iter().enumerate() {
                out.counts[idx.members[c][i]] = to_u64(x, n, h)?;
            }
        }
    }
    Ok(out)
}

/// Vertices with a nonzero [`count_t_sigma`] count, for classes given as
/// plain member lists (each sorted, pairwise disjoint).
pub(crate) fn t_sigma_support(g: &Graph, classes: Vec<Vec<usize>>, wc: &mut WorkCounter) -> Result<Vec<usize>> {
    let (n, h) = (g.n(), classes.len());
    let idx = ClassIndex::new(n, classes);
    let order: Vec<usize> = (0..h).collect();
    let mut out = Vec::new();
    if let Some(per_class) = t_sigma_indexed(g, &idx, &order, wc).map_err(|e| with_dims(e, n, h))? {
        for (c, counts) in per_class.iter().enumerate() {
            out.extend(counts.iter().enumerate().filter(|&(_, &x)| x > 0).map(|(i, _)| idx.members[c][i]));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// [`count_t_sigma`] evaluated at a single vertex.
pub fn count_t_sigma_at(g: &Graph, sigma: &OrderedPartition, v: usize, wc: &mut WorkCounter) -> Result<u64> {
    let (n, h) = (g.n(), sigma.h());
    let Some(j) = sigma.parts().iter().position(|p| p.contains(v)) else {
        return Ok(0);
    };
    let idx = ClassIndex::new(n, sigma.parts().iter().map(|p| p.as_slice().to_vec()).collect());
    let order: Vec<usize> = (0..h).map(|i| (j + i) % h).collect();
    let x = t_sigma_at_indexed(g, &idx, &order, v, wc).map_err(|e| with_dims(e, n, h))?;
    to_u64(x, n, h)
}

/// Calls `f` on every permutation of `0..h` whose first entry is `first`.
fn for_each_perm_from(h: usize, first: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut rest: Vec<usize> = (0..h).filter(|&c| c != first).collect();
    let mut perm = Vec::with_capacity(h);
    loop {
        perm.clear();
        perm.push(first);
        perm.extend_from_slice(&rest);
        f(&perm)?;
        if !next_permutation(&mut rest) {
            return Ok(());
        }
    }
}

fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Bit patterns over `h` classes with exactly `k` ones.
fn patterns(h: usize, k: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << h).filter(move |x| x.count_ones() as usize == k)
}

fn restricted_classes(phi: &Coloring, in_s: &[bool], x: u32) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); phi.num_classes()];
    for (v, &c) in phi.as_slice().iter().enumerate() {
        if in_s[v] == (x >> c & 1 == 1) {
            members[c].push(v);
        }
    }
    members
}

fn check_colorful_args(g: &Graph, phi: &Coloring, s: &VertexSet, k: usize) -> Result<usize> {
    let h = phi.num_classes();
    check_h(h)?;
    if phi.len() != g.n() {
        return Err(Error::invalid("coloring length does not match vertex count"));
    }
    if !(1..=h).contains(&k) {
        return Err(Error::invalid(format!("intersection size k = {k} outside 1..={h}")));
    }
    s.check_range(g.n())?;
    Ok(h)
}

fn divide_exact(sum: u128, c_aut: u128, what: &str) -> Result<u128> {
    if !sum.is_multiple_of(c_aut) {
        return Err(Error::invariant(format!("{what}: {sum} is not divisible by {c_aut}")));
    }
    Ok(sum / c_aut)
}

/// Per-vertex counts of `phi`-colorful `h`-cycles meeting `s` in exactly
/// `k` vertices, where `h = phi.num_classes()`.
///
/// For each pattern `x` of `k` classes drawn from `s`, every ordering of
/// the restricted classes is fed to the `t^sigma` chain and the sum is
/// divided by the automorphism count. Orderings that are rotations of one
/// another give identical per-vertex counts, so one representative per
/// rotation class is evaluated and weighted by `h`.
pub fn count_colorful_k(g: &Graph, phi: &Coloring, s: &VertexSet, k: usize, wc: &mut WorkCounter) -> Result<PerVertexCounts> {
    let h = check_colorful_args(g, phi, s, k)?;
    let n = g.n();
    let in_s = s.mask(n);
    let mut sum = vec![0u128; n];
    for x in patterns(h, k) {
        let idx = ClassIndex::new(n, restricted_classes(phi, &in_s, x));
        if idx.any_empty() {
            continue;
        }
        for_each_perm_from(h, 0, |perm| {
            if let Some(per_class) = t_sigma_indexed(g, &idx, perm, wc).map_err(|e| with_dims(e, n, h))? {
                for (c, counts) in per_class.iter().enumerate() {
                    for (i, &t) in counts.iter().enumerate() {
                        let v = idx.members[c][i];
                        sum[v] =
                            sum[v].checked_add(t).ok_or_else(|| Error::Overflow(format!("colorful sum (n = {n}, h = {h})")))?;
                    }
                }
            }
            Ok(())
        })?;
    }
    let c_aut = automorphism_divisor(g.mode(), h);
    let mut out = PerVertexCounts::zeros(n);
    for v in 0..n {
        let walks = sum[v] * h as u128;
        out.counts[v] = to_u64(divide_exact(walks, c_aut, "colorful walk count")?, n, h)?;
    }
    Ok(out)
}

/// `t^k_phi(v)` for one vertex, using single-row chains.
pub fn count_colorful_k_at(g: &Graph, phi: &Coloring, s: &VertexSet, k: usize, v: usize, wc: &mut WorkCounter) -> Result<u64> {
    let h = check_colorful_args(g, phi, s, k)?;
    let n = g.n();
    if v >= n {
        return Err(Error::invalid(format!("vertex {v} out of range")));
    }
    let in_s = s.mask(n);
    let cv = phi.color(v);
    let mut sum = 0u128;
    for x in patterns(h, k) {
        if (x >> cv & 1 == 1) != in_s[v] {
            continue;
        }
        let idx = ClassIndex::new(n, restricted_classes(phi, &in_s, x));
        if idx.any_empty() {
            continue;
        }
        for_each_perm_from(h, cv, |perm| {
            let t = t_sigma_at_indexed(g, &idx, perm, v, wc).map_err(|e| with_dims(e, n, h))?;
            sum = sum.checked_add(t).ok_or_else(|| Error::Overflow(format!("colorful sum (n = {n}, h = {h})")))?;
            Ok(())
        })?;
    }
    let walks = sum * h as u128;
    to_u64(divide_exact(walks, automorphism_divisor(g.mode(), h), "colorful walk count")?, n, h)
}

/// Number of `phi`-colorful cycles meeting `s` exactly `k` times.
pub fn count_colorful_total(g: &Graph, phi: &Coloring, s: &VertexSet, k: usize, wc: &mut WorkCounter) -> Result<u64> {
    let per = count_colorful_k(g, phi, s, k, wc)?;
    let sum: u128 = s.iter().map(|v| per.get(v) as u128).sum();
    let total = divide_exact(sum, k as u128, "colorful total")?;
    to_u64(total, g.n(), phi.num_classes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        let e: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_edges(n, Mode::Undirected, &e).unwrap()
    }

    #[test]
    fn brute_force_small_cases() {
        let k4 = brute_force_cycles(&complete(4), 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(k4.total, 4);
        assert!(k4.per_vertex.counts.iter().all(|&c| c == 3));
        let c5 = Graph::from_edges(5, Mode::Directed, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(brute_force_cycles(&c5, 5, DEFAULT_BUDGET).unwrap().total, 1);
        assert_eq!(brute_force_cycles(&complete(5), 5, DEFAULT_BUDGET).unwrap().total, 12);
        assert!(matches!(brute_force_cycles(&complete(8), 5, 10), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn t_sigma_directed_triangle() {
        let g = Graph::from_edges(3, Mode::Directed, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let sigma =
            OrderedPartition::new(vec![VertexSet::new(vec![0]), VertexSet::new(vec![1]), VertexSet::new(vec![2])]).unwrap();
        let mut wc = WorkCounter::new();
        assert_eq!(count_t_sigma(&g, &sigma, &mut wc).unwrap().counts, vec![1, 1, 1]);
        assert_eq!(count_t_sigma_at(&g, &sigma, 2, &mut wc).unwrap(), 1);
        let empty = OrderedPartition::new(vec![VertexSet::new(vec![0, 1]), VertexSet::empty(), VertexSet::new(vec![2])]).unwrap();
        assert_eq!(count_t_sigma(&g, &empty, &mut wc).unwrap().counts, vec![0, 0, 0]);
    }

    #[test]
    fn colorful_rainbow_triangle() {
        let g = complete(3);
        let phi = Coloring::new(vec![0, 1, 2], 3).unwrap();
        let s = VertexSet::full(3);
        let mut wc = WorkCounter::new();
        assert_eq!(count_colorful_k(&g, &phi, &s, 3, &mut wc).unwrap().counts, vec![1, 1, 1]);
        assert_eq!(count_colorful_total(&g, &phi, &s, 3, &mut wc).unwrap(), 1);
        assert_eq!(count_colorful_k(&g, &phi, &VertexSet::empty(), 2, &mut wc).unwrap().counts, vec![0, 0, 0]);
        assert_eq!(count_colorful_total(&g, &phi, &VertexSet::empty(), 1, &mut wc).unwrap(), 0);
        for v in 0..3 {
            assert_eq!(count_colorful_k_at(&g, &phi, &s, 3, v, &mut wc).unwrap(), 1);
        }
    }

    #[test]
    fn permutations_cover_rotation_classes() {
        let mut seen = 0;
        for_each_perm_from(4, 2, |p| {
            assert_eq!(p[0], 2);
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, 6);
    }
}
