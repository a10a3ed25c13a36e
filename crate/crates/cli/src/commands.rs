use std::path::{Path, PathBuf};

use clap::Args;
use hcycle::exact::DEFAULT_BUDGET;
use hcycle::find_heavy::find_heavy_report;
use hcycle::hardness::{hcycle_gap_layering, plant_instance, standard_corpus, triangle_gap_blowup, PlantSpec, TripartiteSpec};
use hcycle::template::WorkSummary;
use hcycle::{brute_force_cycles, doubling, Error, EstimatorConfig, Graph, HeavyBand, Mode, Result, VertexSet, WorkCounter};
use serde::Serialize;

use crate::output::{emit, json, read, render};
use crate::{Common, Format};

/// Base configuration for the scale mode, then `--cfg` overrides in order.
pub fn config(common: &Common) -> Result<EstimatorConfig> {
    let mut cfg = EstimatorConfig { scale_mode: common.scale_mode, ..EstimatorConfig::default() };
    for kv in &common.cfg {
        cfg.apply(kv)?;
    }
    Ok(cfg)
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    Graph::parse(&read(path)?)
}

#[derive(Serialize)]
struct ExactReport {
    n: usize,
    h: usize,
    mode: Mode,
    total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_vertex: Option<Vec<u64>>,
}

#[derive(Serialize)]
struct ExactRow {
    n: usize,
    h: usize,
    mode: Mode,
    total: u64,
}

pub fn exact(input: &Path, h: usize, per_vertex: bool, common: &Common) -> Result<()> {
    let g = load_graph(input)?;
    let cfg = config(common)?;
    let budget = cfg.budget.unwrap_or(DEFAULT_BUDGET);
    let c = brute_force_cycles(&g, h, budget)?;
    let row = ExactRow { n: g.n(), h, mode: g.mode(), total: c.total };
    let report =
        ExactReport { n: g.n(), h, mode: g.mode(), total: c.total, per_vertex: per_vertex.then(|| c.per_vertex.counts.clone()) };
    let text = render(common.format.unwrap_or(Format::Json), &report, &[row])?;
    emit(&text, common.out.as_deref())
}

#[derive(Serialize)]
struct ApproxRow {
    n: usize,
    h: usize,
    eps: f64,
    seed: u64,
    scale_mode: hcycle::ScaleMode,
    estimate: Option<f64>,
    stopping_i: Option<usize>,
    fallback: bool,
    inconclusive: bool,
    scalar_mults: u128,
    mm_calls: u64,
    distinct_shapes: usize,
    max_min_dim: usize,
}

pub fn approx(input: &Path, h: usize, eps: Option<f64>, seed: u64, common: &Common) -> Result<()> {
    let g = load_graph(input)?;
    let mut cfg = config(common)?;
    if let Some(e) = eps {
        cfg.eps = Some(e);
    }
    let report = doubling(&g, h, &cfg, seed, &mut WorkCounter::new())?;
    let row = ApproxRow {
        n: report.n,
        h,
        eps: report.eps,
        seed,
        scale_mode: report.scale_mode,
        estimate: report.estimate,
        stopping_i: report.stopping_i,
        fallback: report.fallback,
        inconclusive: report.inconclusive,
        scalar_mults: report.work.scalar_mults,
        mm_calls: report.work.mm_calls,
        distinct_shapes: report.work.distinct_shapes,
        max_min_dim: report.work.max_min_dim,
    };
    let text = render(common.format.unwrap_or(Format::Json), &report, &[row])?;
    emit(&text, common.out.as_deref())
}

#[derive(Serialize)]
struct HeavyRow {
    vertex: usize,
    branch: hcycle::find_heavy::FindBranch,
    lambda: f64,
    tau: f64,
}

pub fn find_heavy(input: &Path, h: usize, lambda: f64, seed: u64, tallies: bool, common: &Common) -> Result<()> {
    let g = load_graph(input)?;
    let cfg = config(common)?.resolve(g.n(), h)?;
    let mut report = find_heavy_report(&g, lambda, &cfg, seed, &mut WorkCounter::new())?;
    if !tallies {
        report.tallies.clear();
    }
    let rows: Vec<HeavyRow> =
        report.heavy.iter().map(|vertex| HeavyRow { vertex, branch: report.branch, lambda, tau: report.tau }).collect();
    let text = render(common.format.unwrap_or(Format::Json), &report, &rows)?;
    emit(&text, common.out.as_deref())
}

#[derive(Serialize)]
struct CountHeavyReport {
    n: usize,
    h: usize,
    set_size: usize,
    a: f64,
    b: f64,
    eps: f64,
    seed: u64,
    estimate: f64,
    work: WorkSummary,
}

#[derive(Serialize)]
struct CountHeavyRow {
    n: usize,
    h: usize,
    set_size: usize,
    a: f64,
    b: f64,
    eps: f64,
    seed: u64,
    estimate: f64,
    scalar_mults: u128,
    mm_calls: u64,
}

pub fn count_heavy(input: &Path, h: usize, set: &Path, (a, b): (f64, f64), eps: f64, seed: u64, common: &Common) -> Result<()> {
    let g = load_graph(input)?;
    let s = VertexSet::parse(&read(set)?)?;
    s.check_range(g.n())?;
    let cfg = config(common)?.resolve(g.n(), h)?;
    let band = HeavyBand::new(a, b)?;
    let mut wc = WorkCounter::new();
    let estimate = hcycle::count_heavy(&g, &s, band, eps, h, &cfg, seed, &mut wc)?;
    let work = WorkSummary::from(&wc);
    let row = CountHeavyRow {
        n: g.n(),
        h,
        set_size: s.len(),
        a,
        b,
        eps,
        seed,
        estimate,
        scalar_mults: work.scalar_mults,
        mm_calls: work.mm_calls,
    };
    let report = CountHeavyReport { n: g.n(), h, set_size: s.len(), a, b, eps, seed, estimate, work };
    let text = render(common.format.unwrap_or(Format::Json), &report, &[row])?;
    emit(&text, common.out.as_deref())
}

/// Parameters of a random tripartite base graph.
#[derive(Args, Clone, Debug)]
pub struct TripartiteArgs {
    #[arg(long = "part-a")]
    pub a: usize,
    #[arg(long = "part-b")]
    pub b: usize,
    #[arg(long = "part-c")]
    pub c: usize,
    /// Edge probability for each cross pair.
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub seed: u64,
}

impl TripartiteArgs {
    fn spec(&self) -> Result<TripartiteSpec> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("edge probability {} outside [0, 1]", self.p)));
        }
        Ok(TripartiteSpec::random(self.a, self.b, self.c, self.p, self.seed))
    }
}

/// Sidecar for gadget graphs. `total` is enumerated on the gadget itself.
#[derive(Serialize)]
struct GadgetTruth {
    kind: &'static str,
    h: usize,
    mode: Mode,
    base: TripartiteSpec,
    base_triangles: u64,
    multiplier: u64,
    total: u64,
}

#[derive(Serialize)]
struct ManifestRow {
    name: String,
    graph: PathBuf,
    truth: PathBuf,
    n: usize,
    h: usize,
    mode: Mode,
    total: u64,
}

fn write_pair<T: Serialize>(prefix: &Path, g: &Graph, truth: &T) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let graph = PathBuf::from(format!("{}.txt", prefix.display()));
    let side = PathBuf::from(format!("{}.truth.json", prefix.display()));
    std::fs::write(&graph, g.to_edge_list())?;
    std::fs::write(&side, json(truth)?)?;
    Ok((graph, side))
}

fn manifest(rows: &[ManifestRow], format: Option<Format>) -> Result<()> {
    emit(&render(format.unwrap_or(Format::Json), rows, rows)?, None)
}

fn name_of(prefix: &Path) -> String {
    prefix.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn gen_planted(n: usize, h: usize, mode: Mode, spec: &str, seed: u64, out: &Path, format: Option<Format>) -> Result<()> {
    let spec: PlantSpec =
        serde_json::from_str(spec).map_err(|e| Error::Parse { line: e.line(), msg: format!("bad instance spec: {e}") })?;
    let (g, truth) = plant_instance(n, h, mode, &spec, seed)?;
    let (graph, side) = write_pair(out, &g, &truth)?;
    manifest(&[ManifestRow { name: name_of(out), graph, truth: side, n, h, mode, total: truth.total }], format)
}

pub fn gen_corpus(dir: &Path, format: Option<Format>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for entry in standard_corpus() {
        let (g, truth) = entry.build()?;
        let (graph, side) = write_pair(&dir.join(&entry.name), &g, &truth)?;
        rows.push(ManifestRow {
            name: entry.name,
            graph,
            truth: side,
            n: entry.n,
            h: entry.h,
            mode: entry.mode,
            total: truth.total,
        });
    }
    manifest(&rows, format)
}

fn gadget(
    kind: &'static str,
    base: TripartiteSpec,
    g: &Graph,
    h: usize,
    multiplier: u64,
    out: &Path,
    format: Option<Format>,
) -> Result<()> {
    let base_triangles = brute_force_cycles(&base.to_graph()?, 3, DEFAULT_BUDGET)?.total;
    let total = brute_force_cycles(g, h, DEFAULT_BUDGET)?.total;
    if Some(total) != base_triangles.checked_mul(multiplier) {
        return Err(Error::invariant(format!("{kind}: {total} cycles, expected {multiplier} x {base_triangles}")));
    }
    let truth = GadgetTruth { kind, h, mode: g.mode(), base, base_triangles, multiplier, total };
    let (graph, side) = write_pair(out, g, &truth)?;
    manifest(&[ManifestRow { name: name_of(out), graph, truth: side, n: g.n(), h, mode: g.mode(), total }], format)
}

pub fn gen_blowup(tri: &TripartiteArgs, t: usize, out: &Path, format: Option<Format>) -> Result<()> {
    let base = tri.spec()?;
    let g = triangle_gap_blowup(&base, t)?;
    gadget("blowup", base, &g, 3, t as u64, out, format)
}

pub fn gen_layering(tri: &TripartiteArgs, h: usize, t: u64, mode: Mode, out: &Path, format: Option<Format>) -> Result<()> {
    let base = tri.spec()?;
    let lay = hcycle_gap_layering(&base, h, t, mode)?;
    gadget("layering", base, &lay.graph, h, lay.realized_t, out, format)
}
