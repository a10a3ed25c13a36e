//! Benchmark sweeps over planted `(n, t)` cells.

use clap::ValueEnum;
use hcycle::hardness::{cycles_in_clique, plant_instance, PlantSpec};
use hcycle::{doubling, median_of, Mode, Result, WorkCounter};
use serde::Serialize;

use crate::commands::config;
use crate::output::{emit, render};
use crate::{Common, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Disjoint cliques on a bipartite background; exact for odd h.
    Cliques,
    /// `t` vertex-disjoint cycles.
    Disjoint,
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub ns: Vec<usize>,
    pub ts: Vec<u64>,
    pub h: usize,
    pub mode: Mode,
    pub eps: f64,
    pub seed: u64,
    pub seeds: u64,
    pub family: Family,
    pub background: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    n: usize,
    t: u64,
    h: usize,
    mode: Mode,
    eps: f64,
    seeds: u64,
    estimate: Option<f64>,
    oracle: Option<u64>,
    scalar_mults: Option<u128>,
    mm_calls: Option<u64>,
    distinct_shapes: Option<usize>,
    max_min_dim: Option<usize>,
    success_rate: Option<f64>,
    success: bool,
    fallbacks: u64,
    status: String,
}

/// Clique sizes whose cycle counts sum to `t`, largest first. `None` when
/// greedy packing cannot hit `t`: unless `h = 3` and the graph is
/// undirected, the smallest clique already
/// holds several cycles.
pub fn clique_sizes(t: u64, h: usize, mode: Mode) -> Option<Vec<usize>> {
    let mut left = t;
    let mut sizes = Vec::new();
    while left > 0 {
        if cycles_in_clique(h, h, mode) > left {
            return None;
        }
        let mut s = h;
        while cycles_in_clique(s + 1, h, mode) <= left {
            s += 1;
        }
        left -= cycles_in_clique(s, h, mode);
        sizes.push(s);
    }
    Some(sizes)
}

fn spec_for(grid: &Grid, t: u64) -> std::result::Result<PlantSpec, String> {
    match grid.family {
        Family::Cliques => clique_sizes(t, grid.h, grid.mode)
            .map(|sizes| PlantSpec::Cliques { sizes, background_edges: grid.background })
            .ok_or_else(|| format!("t = {t} is not a sum of clique cycle counts for h = {}", grid.h)),
        Family::Disjoint => Ok(PlantSpec::Disjoint { cycles: t as usize }),
    }
}

fn median_u(values: &[u128]) -> u128 {
    let mut v = values.to_vec();
    v.sort_unstable();
    v[(v.len() - 1) / 2]
}

fn cell(grid: &Grid, n: usize, t: u64, common: &Common) -> Result<Row> {
    let mut row = Row {
        n,
        t,
        h: grid.h,
        mode: grid.mode,
        eps: grid.eps,
        seeds: grid.seeds,
        estimate: None,
        oracle: None,
        scalar_mults: None,
        mm_calls: None,
        distinct_shapes: None,
        max_min_dim: None,
        success_rate: None,
        success: false,
        fallbacks: 0,
        status: String::new(),
    };
    let planted =
        spec_for(grid, t).and_then(|spec| plant_instance(n, grid.h, grid.mode, &spec, grid.seed).map_err(|e| e.to_string()));
    let (g, truth) = match planted {
        Ok(x) => x,
        Err(e) => {
            row.status = format!("infeasible: {e}");
            return Ok(row);
        }
    };
    let mut cfg = config(common)?;
    cfg.eps = Some(grid.eps);
    let oracle = truth.total as f64;
    let (mut ests, mut mults, mut calls) = (Vec::new(), Vec::new(), Vec::new());
    let (mut shapes, mut dim, mut hits) = (0, 0, 0u64);
    for r in 0..grid.seeds {
        let rep = doubling(&g, grid.h, &cfg, grid.seed + r, &mut WorkCounter::new())?;
        let est = rep.estimate.unwrap_or(f64::NAN);
        hits += ((est - oracle).abs() <= grid.eps * oracle) as u64;
        row.fallbacks += rep.fallback as u64;
        ests.push(est);
        mults.push(rep.work.scalar_mults);
        calls.push(rep.work.mm_calls as u128);
        shapes = shapes.max(rep.work.distinct_shapes);
        dim = dim.max(rep.work.max_min_dim);
    }
    row.oracle = Some(truth.total);
    if grid.seeds > 0 {
        let med = if ests.iter().any(|e| e.is_nan()) { None } else { Some(median_of(&ests)?) };
        row.estimate = med;
        row.scalar_mults = Some(median_u(&mults));
        row.mm_calls = Some(median_u(&calls) as u64);
        row.distinct_shapes = Some(shapes);
        row.max_min_dim = Some(dim);
        row.success_rate = Some(hits as f64 / grid.seeds as f64);
        row.success = med.is_some_and(|m| (m - oracle).abs() <= grid.eps * oracle);
    }
    row.status = if grid.seeds > 0 && row.fallbacks == grid.seeds { "exact-fallback".into() } else { "ok".into() };
    Ok(row)
}

/// Runs every cell in `n`-major order and writes one row per cell.
pub fn run(grid: &Grid, common: &Common) -> Result<()> {
    let mut rows = Vec::new();
    for &n in &grid.ns {
        for &t in &grid.ts {
            rows.push(cell(grid, n, t, common)?);
        }
    }
    let text = render(common.format.unwrap_or(Format::Csv), &rows, &rows)?;
    emit(&text, common.out.as_deref())
}
