//! Estimating `t_G(S)`, the number of cycles meeting a set `S`, when every
//! vertex of `S` lies on between `a` and `b` cycles.
//!
//! Cycles are stratified by `k = |C ∩ S|`. For each stratum a single-vertex
//! colorful count gives an unbiased estimate, which is averaged in batches
//! and boosted by a median.

use std::collections::hash_map::{Entry, HashMap};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::{vertex_rainbow_probability, Resolved};
use crate::error::{Error, Result};
use crate::exact::count_colorful_k_at;
use crate::graph::{Coloring, Graph, VertexSet};
use crate::matmul::WorkCounter;
use crate::rng::{child_seed, labeled_seed, rng_from_seed};
use crate::template::median_of;

/// Bounds `a <= t_G(v) <= b` promised for every vertex of the counted set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyBand {
    pub a: f64,
    pub b: f64,
}

impl HeavyBand {
    pub fn new(a: f64, b: f64) -> Result<HeavyBand> {
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(Error::invalid(format!("band requires 0 < a <= b, got a = {a}, b = {b}")));
        }
        Ok(HeavyBand { a, b })
    }

    pub fn ratio(&self) -> f64 {
        self.b / self.a
    }
}

/// The part of `g` that can matter for cycles through `v`: every vertex of
/// such a cycle is within `floor(h / 2)` steps of `v`.
struct LocalView {
    sub: Graph,
    s_local: VertexSet,
    v_local: usize,
}

fn local_view(g: &Graph, s: &VertexSet, v: usize, h: usize) -> Result<Option<LocalView>> {
    let ball = g.ball(v, h / 2);
    let sub = g.induced_subgraph(&ball)?;
    let core = sub.cycle_core();
    let ids = ball.as_slice();
    let v_ball = ids.binary_search(&v).expect("ball contains its center");
    if !core.contains(v_ball) || core.len() < h {
        return Ok(None);
    }
    let sub = sub.induced_subgraph(&core)?;
    let s_local = core.iter().enumerate().filter(|&(_, b)| s.contains(ids[b])).map(|(i, _)| i).collect();
    let v_local = core.as_slice().binary_search(&v_ball).expect("core contains v");
    Ok(Some(LocalView { sub, s_local, v_local }))
}

fn vertex_tk_on(view: &Option<LocalView>, k: usize, h: usize, seed: u64, wc: &mut WorkCounter) -> Result<f64> {
    let Some(view) = view else { return Ok(0.0) };
    let mut rng = rng_from_seed(seed);
    let colors: Vec<usize> = (0..view.sub.n()).map(|u| if u == view.v_local { h - 1 } else { rng.gen_range(0..h - 1) }).collect();
    let phi = Coloring::new(colors, h)?;
    let t = count_colorful_k_at(&view.sub, &phi, &view.s_local, k, view.v_local, wc)?;
    Ok(t as f64 / vertex_rainbow_probability(h))
}

fn check_vertex(g: &Graph, s: &VertexSet, v: usize, h: usize) -> Result<()> {
    if v >= g.n() || !s.contains(v) {
        return Err(Error::invalid(format!("vertex {v} is not in S")));
    }
    if h < 3 {
        return Err(Error::invalid("cycle length must be at least 3"));
    }
    Ok(())
}

/// Unbiased estimate of `t^k(v)`: colors `V \ {v}` uniformly with `h - 1`
/// colors, gives `v` the last color, and rescales the colorful count.
///
/// Only vertices near `v` that can lie on a cycle are colored; the others
/// cannot affect the count.
pub fn approx_vertex_tk(g: &Graph, s: &VertexSet, k: usize, v: usize, h: usize, seed: u64, wc: &mut WorkCounter) -> Result<f64> {
    check_vertex(g, s, v, h)?;
    vertex_tk_on(&local_view(g, s, v, h)?, k, h, seed, wc)
}

/// Local views built so far, by vertex.
type ViewCache = HashMap<usize, Option<LocalView>>;

fn approx_e_tk_cached(
    g: &Graph,
    s: &VertexSet,
    k: usize,
    h: usize,
    seed: u64,
    cache: &mut ViewCache,
    wc: &mut WorkCounter,
) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::invalid("cannot sample from an empty set"));
    }
    let mut rng = rng_from_seed(seed);
    let u = s.as_slice()[rng.gen_range(0..s.len())];
    check_vertex(g, s, u, h)?;
    let view = match cache.entry(u) {
        Entry::Occupied(e) => e.into_mut(),
        Entry::Vacant(e) => e.insert(local_view(g, s, u, h)?),
    };
    let y = vertex_tk_on(view, k, h, child_seed(seed, 1), wc)?;
    Ok(y * s.len() as f64 / k as f64)
}

/// Unbiased estimate of `t^k`: a uniform vertex of `S`, scaled by `|S| / k`.
pub fn approx_e_tk(g: &Graph, s: &VertexSet, k: usize, h: usize, seed: u64, wc: &mut WorkCounter) -> Result<f64> {
    approx_e_tk_cached(g, s, k, h, seed, &mut ViewCache::new(), wc)
}

/// Median of batch means of [`approx_e_tk`].
#[allow(clippy::too_many_arguments)]
pub fn approx_tk(
    g: &Graph,
    s: &VertexSet,
    k: usize,
    h: usize,
    band: HeavyBand,
    delta: f64,
    cfg: &Resolved,
    seed: u64,
    wc: &mut WorkCounter,
) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("delta = {delta} outside (0, 1]")));
    }
    if s.is_empty() {
        return Ok(0.0);
    }
    let per_batch = cfg.samples_per_batch(band.a, band.b, delta);
    let batches = cfg.count_batches;
    if per_batch * batches as f64 > cfg.sample_budget as f64 {
        return Err(Error::BudgetExceeded { budget: cfg.sample_budget });
    }
    let per_batch = per_batch as u64;
    let mut means = Vec::with_capacity(batches);
    let mut cache = ViewCache::new();
    for b in 0..batches as u64 {
        let mut sum = 0.0;
        for j in 0..per_batch {
            sum += approx_e_tk_cached(g, s, k, h, labeled_seed(seed, "sample", b * per_batch + j), &mut cache, wc)?;
        }
        means.push(sum / per_batch as f64);
    }
    median_of(&means)
}

/// Estimate of `t_G(S)`: the stratified sum over `k = 1..=h` of
/// [`approx_tk`] with `delta = eps / (2k)`.
#[allow(clippy::too_many_arguments)]
pub fn count_heavy(
    g: &Graph,
    s: &VertexSet,
    band: HeavyBand,
    eps: f64,
    h: usize,
    cfg: &Resolved,
    seed: u64,
    wc: &mut WorkCounter,
) -> Result<f64> {
    s.check_range(g.n())?;
    if s.is_empty() {
        return Ok(0.0);
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let eps = eps.min(1.0);
    let mut total = 0.0;
    for k in 1..=h {
        let delta = eps / (2.0 * k as f64);
        total += approx_tk(g, s, k, h, band, delta, cfg, labeled_seed(seed, "stratum", k as u64), wc)?;
    }
    Ok(total)
}

/// The heavy-counting black box as used by the template.
pub trait HeavyCounter {
    fn count(&self, g: &Graph, s: &VertexSet, band: HeavyBand, eps: f64, seed: u64, wc: &mut WorkCounter) -> Result<f64>;
}

/// [`count_heavy`] with fixed constants.
#[derive(Clone, Debug)]
pub struct ColorCodingCounter {
    pub cfg: Resolved,
}

impl HeavyCounter for ColorCodingCounter {
    fn count(&self, g: &Graph, s: &VertexSet, band: HeavyBand, eps: f64, seed: u64, wc: &mut WorkCounter) -> Result<f64> {
        count_heavy(g, s, band, eps, self.cfg.h, &self.cfg, seed, wc)
    }
}
