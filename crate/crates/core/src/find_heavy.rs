//! Finding a superset of the `Λ`-heavy vertices that avoids light ones.
//!
//! Small thresholds use plain random colorings on the whole graph. Larger
//! thresholds run P-discovery experiments for every dyadic sample vector
//! `P` whose coordinate product is at most `1 / Λ̃`, and keep the vertices
//! discovered at least `τ` times under some `P`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::Resolved;
use crate::error::{Error, Result};
use crate::exact::{count_colorful_k, t_sigma_support};
use crate::graph::{Coloring, Graph, Mode, VertexSet};
use crate::matmul::WorkCounter;
use crate::rng::{labeled_seed, rng_from_seed, Rng};

/// Per-class keep probabilities `p_i = 2^(-j_i)`, stored as exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleVector {
    pub exps: Vec<u32>,
}

impl SampleVector {
    pub fn new(exps: Vec<u32>) -> SampleVector {
        SampleVector { exps }
    }

    pub fn h(&self) -> usize {
        self.exps.len()
    }

    pub fn p(&self, i: usize) -> f64 {
        0.5f64.powi(self.exps[i] as i32)
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.h()).map(|i| self.p(i)).collect()
    }

    /// `prod p_i = 2^(-sum j_i)`.
    pub fn product(&self) -> f64 {
        0.5f64.powi(self.exps.iter().sum::<u32>() as i32)
    }

    /// Membership in the dyadic grid: every `j_i <= floor(log2 Λ + 1)`.
    pub fn in_grid(&self, lambda: f64) -> bool {
        let jmax = max_exponent(lambda);
        self.exps.iter().all(|&j| j <= jmax)
    }

    /// Membership in the product constraint `prod p_i <= 1 / Λ`.
    pub fn in_product_bound(&self, lambda: f64) -> bool {
        self.product() * lambda <= 1.0
    }
}

fn max_exponent(lambda: f64) -> u32 {
    (lambda.log2() + 1.0).floor().max(0.0) as u32
}

/// All sample vectors of the product set for `(h, Λ)`, in lexicographic
/// exponent order.
pub fn product_set(h: usize, lambda: f64) -> Result<Vec<SampleVector>> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("product set needs a finite Λ >= 1, got {lambda}")));
    }
    let jmax = max_exponent(lambda);
    let base = jmax as u64 + 1;
    let count = base
        .checked_pow(h as u32)
        .filter(|&c| c <= 50_000_000)
        .ok_or_else(|| Error::invalid(format!("product set for h = {h}, Λ = {lambda} is too large to enumerate")))?;
    let mut out = Vec::new();
    let mut exps = vec![0u32; h];
    for _ in 0..count {
        let v = SampleVector { exps: exps.clone() };
        if v.in_product_bound(lambda) {
            out.push(v);
        }
        for j in (0..h).rev() {
            if exps[j] < jmax {
                exps[j] += 1;
                break;
            }
            exps[j] = 0;
        }
    }
    Ok(out)
}

/// One P-discovery experiment: a uniform `h`-coloring, class `i` thinned
/// with probability `p_i`, edges layered along the color order, and every
/// vertex on a colorful cycle of the result reported (as ids of `g`).
///
/// The colorful cycles of the layered sample are exactly the cycles that
/// visit the kept color classes in the order `0, 1, ..., h - 1`, so a single
/// `t^sigma` chain over the classes replaces building the layered graph.
pub fn p_discovery(g: &Graph, p: &SampleVector, seed: u64, wc: &mut WorkCounter) -> Result<VertexSet> {
    if p.h() < 3 {
        return Err(Error::invalid("sample vectors need h >= 3 entries"));
    }
    let mut classes = vec![Vec::new(); p.h()];
    discovery_into(g, p, seed, &mut classes, wc)
}

fn discovery_into(g: &Graph, p: &SampleVector, seed: u64, classes: &mut [Vec<usize>], wc: &mut WorkCounter) -> Result<VertexSet> {
    let mut rng = rng_from_seed(seed);
    sample_classes(g.n(), &p.probs(), &mut rng, classes);
    if classes.iter().any(Vec::is_empty) {
        return Ok(VertexSet::empty());
    }
    Ok(VertexSet::new(t_sigma_support(g, classes.to_vec(), wc)?))
}

/// Each vertex independently lands in class `c` with probability
/// `p_c / h` and is dropped otherwise, which is the law of a uniform
/// coloring followed by per-class thinning. Kept vertices are reached by
/// geometric skips, so the cost follows the expected sample size.
fn sample_classes(n: usize, probs: &[f64], rng: &mut Rng, classes: &mut [Vec<usize>]) {
    for c in classes.iter_mut() {
        c.clear();
    }
    let h = probs.len() as f64;
    let total: f64 = probs.iter().sum::<f64>() / h;
    let log_miss = (1.0 - total).ln();
    let mut v = 0usize;
    loop {
        if total < 1.0 {
            let u: f64 = rng.gen();
            let skip = ((1.0 - u).ln() / log_miss).floor();
            if skip >= (n - v) as f64 {
                break;
            }
            v += skip as usize;
        }
        if v >= n {
            break;
        }
        let mut r = rng.gen::<f64>() * total * h;
        let mut c = 0;
        while c + 1 < probs.len() && r >= probs[c] {
            r -= probs[c];
            c += 1;
        }
        classes[c].push(v);
        v += 1;
    }
}

/// Probability that a uniform `h`-coloring of a fixed cycle follows the
/// color order `0, 1, ..., h - 1` around it, from some starting vertex and
/// (undirected) in some direction.
pub fn cyclic_rainbow_probability(h: usize, mode: Mode) -> f64 {
    let ways = match mode {
        Mode::Directed => h,
        Mode::Undirected => 2 * h,
    };
    ways as f64 / (h as f64).powi(h as i32)
}

/// `P[Bin(k, p) >= t]`.
pub fn binomial_upper_tail(k: usize, p: f64, t: usize) -> f64 {
    if t == 0 {
        return 1.0;
    }
    if t > k || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    // Sum the pmf in log space from `t` upward; terms past the mode shrink.
    let ln_choose = |j: usize| -> f64 { (0..j).map(|i| ((k - i) as f64).ln() - ((i + 1) as f64).ln()).sum() };
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut term = ln_choose(t) + t as f64 * lp + (k - t) as f64 * lq;
    let mut sum = 0.0;
    for j in t..=k {
        sum += term.exp();
        if j < k {
            term += ((k - j) as f64).ln() - ((j + 1) as f64).ln() + lp - lq;
        }
    }
    sum.min(1.0)
}

/// Smallest tally threshold `τ >= 1` for which `pairs` independent
/// `Bin(k, rate)` tallies all stay below `τ` except with probability `fp`
/// (union bound).
///
/// A `Λ/czlog`-light vertex is discovered under a sample vector `P` with
/// probability at most `t(v) · q · prod p_i <= q · slack / czlog`, where `q` is
/// [`cyclic_rainbow_probability`], so `rate` is that bound and `pairs` is
/// the number of (vertex, vector) pairs.
pub fn derived_tau(k: usize, rate: f64, pairs: f64, fp: f64) -> f64 {
    let mut t = 1;
    while t <= k && pairs * binomial_upper_tail(k, rate, t) > fp {
        t += 1;
    }
    t as f64
}

/// Upper bound on the number of `h`-cycles through each vertex: closed
/// walks of length `h` from `v`, computed by sparse propagation. Every
/// cycle through `v` gives such a walk (two in undirected graphs, one per
/// direction), so the undirected bound is halved.
pub fn cycle_upper_bound(g: &Graph, h: usize) -> Vec<u128> {
    let n = g.n();
    let mut cur = vec![0u128; n];
    let mut next = vec![0u128; n];
    let mut touched = Vec::new();
    (0..n)
        .map(|v| {
            if g.out_degree(v) == 0 || g.in_degree(v) == 0 {
                return 0;
            }
            // cur[u] = walks v -> ... -> u with `step` edges.
            let mut front = vec![v];
            cur[v] = 1;
            for _ in 1..h {
                touched.clear();
                for &u in &front {
                    for &w in g.out_neighbors(u) {
                        let w = w as usize;
                        if next[w] == 0 {
                            touched.push(w);
                        }
                        next[w] = next[w].saturating_add(cur[u]);
                    }
                }
                for &u in &front {
                    cur[u] = 0;
                }
                front.clear();
                for &w in &touched {
                    cur[w] = next[w];
                    next[w] = 0;
                    front.push(w);
                }
            }
            let mut walks = 0u128;
            for &u in g.in_neighbors(v) {
                walks = walks.saturating_add(cur[u as usize]);
            }
            for &u in &front {
                cur[u] = 0;
            }
            match g.mode() {
                Mode::Directed => walks,
                Mode::Undirected => walks / 2,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindBranch {
    /// No vertex can reach the threshold by the closed-walk bound.
    WalkBound,
    /// Small threshold: plain colorings.
    Coloring,
    /// Sample-vector search.
    Discovery,
}

/// Discovery tallies for one sample vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscoveryTally {
    pub vector: SampleVector,
    pub reps: usize,
    pub counts: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FindHeavyReport {
    pub heavy: VertexSet,
    pub branch: FindBranch,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub tau: f64,
    pub tallies: Vec<DiscoveryTally>,
}

/// [`find_heavy`] with the vote tallies kept for inspection.
///
/// All branches run on the cycle core of `g`; vertices outside it lie on
/// no cycle and are never reported. Ids in the report refer to `g`.
pub fn find_heavy_report(g: &Graph, lambda: f64, cfg: &Resolved, seed: u64, wc: &mut WorkCounter) -> Result<FindHeavyReport> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("threshold Λ = {lambda} must be positive")));
    }
    let core = g.cycle_core();
    let ids = core.as_slice();
    let sub = if core.len() == g.n() { g.clone() } else { g.induced_subgraph(&core)? };
    let mut report = report_on_core(&sub, lambda, cfg, seed, wc)?;
    report.heavy = report.heavy.iter().map(|i| ids[i]).collect();
    for t in &mut report.tallies {
        let mut counts = vec![0u32; g.n()];
        for (i, &c) in t.counts.iter().enumerate() {
            counts[ids[i]] = c;
        }
        t.counts = counts;
    }
    Ok(report)
}

fn report_on_core(g: &Graph, lambda: f64, cfg: &Resolved, seed: u64, wc: &mut WorkCounter) -> Result<FindHeavyReport> {
    let h = cfg.h;
    let k = cfg.reps_discovery;
    let mut report = FindHeavyReport {
        heavy: VertexSet::empty(),
        branch: FindBranch::Coloring,
        lambda,
        lambda_tilde: lambda,
        tau: cfg.tau.unwrap_or(0.0),
        tallies: Vec::new(),
    };

    if lambda < cfg.const_branch_max {
        let mut found = vec![false; g.n()];
        if g.edge_count() >= h {
            for r in 0..cfg.reps_coloring as u64 {
                let phi = Coloring::random(g.n(), h, labeled_seed(seed, "coloring", r))?;
                let per = count_colorful_k(g, &phi, &VertexSet::full(g.n()), h, wc)?;
                for v in per.support().iter() {
                    found[v] = true;
                }
            }
        }
        report.heavy = (0..g.n()).filter(|&v| found[v]).collect();
        return Ok(report);
    }

    let bound = cycle_upper_bound(g, h);
    if bound.iter().all(|&b| (b as f64) < lambda) {
        report.branch = FindBranch::WalkBound;
        return Ok(report);
    }

    report.branch = FindBranch::Discovery;
    let lt = (lambda / cfg.lambda_slack).max(1.0);
    report.lambda_tilde = lt;
    let vectors = product_set(h, lt)?;
    let tau = match cfg.tau {
        Some(t) => t,
        None => {
            let rate = cyclic_rainbow_probability(h, g.mode()) * cfg.lambda_slack / cfg.czlog;
            derived_tau(k, rate, (g.n() * vectors.len()) as f64, cfg.tau_fp)
        }
    };
    report.tau = tau;
    let mut heavy = vec![false; g.n()];
    let mut scratch = vec![Vec::new(); h];
    for (pi, p) in vectors.into_iter().enumerate() {
        let mut counts = vec![0u32; g.n()];
        for r in 0..k as u64 {
            let found = discovery_into(g, &p, labeled_seed(seed, "discovery", (pi as u64) << 32 | r), &mut scratch, wc)?;
            for v in found.iter() {
                counts[v] += 1;
            }
        }
        for (v, &c) in counts.iter().enumerate() {
            if c as f64 >= tau {
                heavy[v] = true;
            }
        }
        report.tallies.push(DiscoveryTally { vector: p, reps: k, counts });
    }
    report.heavy = (0..g.n()).filter(|&v| heavy[v]).collect();
    Ok(report)
}

/// A superset of the `Λ`-heavy vertices of `g` with no `Λ/czlog`-light ones.
pub fn find_heavy(g: &Graph, lambda: f64, cfg: &Resolved, seed: u64, wc: &mut WorkCounter) -> Result<VertexSet> {
    Ok(find_heavy_report(g, lambda, cfg, seed, wc)?.heavy)
}

/// The heavy-finding black box as used by the template.
pub trait HeavyFinder {
    fn find(&self, g: &Graph, lambda: f64, seed: u64, wc: &mut WorkCounter) -> Result<VertexSet>;
}

/// [`find_heavy`] with fixed constants.
#[derive(Clone, Debug)]
pub struct ColorCodingFinder {
    pub cfg: Resolved,
}

impl HeavyFinder for ColorCodingFinder {
    fn find(&self, g: &Graph, lambda: f64, seed: u64, wc: &mut WorkCounter) -> Result<VertexSet> {
        find_heavy(g, lambda, &self.cfg, seed, wc)
    }
}
