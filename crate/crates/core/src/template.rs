//! The recursive estimator and the threshold-halving driver around it.
//!
//! One template run at threshold `Λ` counts the cycles through a heavy set
//! `V_Λ` directly, removes `V_Λ`, keeps every remaining vertex with
//! probability `p`, and recurses on the sample at threshold `Λ p^h`,
//! rescaling that estimate by `p^-h`. The driver starts from `Λ = n^h ε²/Q`
//! and halves until an estimate clears the matching scale `n^h / 2^i`.

use serde::{Deserialize, Serialize};

use crate::config::{EstimatorConfig, Resolved, ScaleMode};
use crate::count_heavy::{ColorCodingCounter, HeavyBand, HeavyCounter};
use crate::error::{Error, Result};
use crate::exact::brute_force_cycles;
use crate::find_heavy::{ColorCodingFinder, HeavyFinder};
use crate::graph::Graph;
use crate::matmul::WorkCounter;
use crate::rng::{child_seed, labeled_seed};

/// Lower median; `NaN` entries are rejected.
pub fn median_of(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median of an empty list"));
    }
    if values.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("median of a list containing NaN"));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v[(v.len() - 1) / 2])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateLevel {
    pub level: usize,
    pub lambda: f64,
    /// Vertices at this level (before removal).
    pub n_before: usize,
    pub heavy: usize,
    /// Vertices left after removing the heavy set.
    pub n_after: usize,
    pub estimate: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateTrace {
    pub lambda0: f64,
    pub p_rec: f64,
    pub h: usize,
    pub levels: Vec<TemplateLevel>,
    pub estimate: f64,
}

impl TemplateTrace {
    /// `Σ_l t̂_l / p^(h l)`, recomputed from the per-level records.
    pub fn telescoped(&self) -> f64 {
        self.levels.iter().map(|l| l.estimate / self.p_rec.powi((self.h * l.level) as i32)).sum()
    }
}

/// Constants a template run needs besides the black boxes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateParams {
    pub h: usize,
    pub eps: f64,
    pub eps_inner: f64,
    pub q: f64,
    pub czlog: f64,
    pub p_rec: f64,
    pub max_depth: usize,
}

/// `max(ceil(log_{1/p^h} Λ), 0)`.
pub fn recursion_depth(lambda: f64, p_rec: f64, h: usize) -> usize {
    if lambda <= 1.0 || p_rec >= 1.0 {
        return 0;
    }
    (lambda.ln() / -(p_rec.powi(h as i32)).ln()).ceil().max(0.0) as usize
}

impl TemplateParams {
    pub fn from_resolved(cfg: &Resolved, lambda0: f64) -> TemplateParams {
        let depth_cap = (cfg.log_n.ceil() as usize + 2).max(recursion_depth(lambda0, cfg.p_rec, cfg.h) + 2);
        TemplateParams {
            h: cfg.h,
            eps: cfg.eps,
            eps_inner: cfg.eps_inner(),
            q: cfg.q,
            czlog: cfg.czlog,
            p_rec: cfg.p_rec,
            max_depth: depth_cap,
        }
    }
}

/// One run of the recursive estimator from threshold `lambda`.
pub fn template(
    g: &Graph,
    lambda: f64,
    params: &TemplateParams,
    finder: &dyn HeavyFinder,
    counter: &dyn HeavyCounter,
    seed: u64,
    wc: &mut WorkCounter,
) -> Result<TemplateTrace> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("threshold Λ = {lambda} must be positive")));
    }
    let h = params.h;
    let mut trace = TemplateTrace { lambda0: lambda, p_rec: params.p_rec, h, levels: Vec::new(), estimate: 0.0 };
    let mut cur = g.clone();
    let mut level = 0usize;
    loop {
        if level > params.max_depth {
            return Err(Error::invariant(format!("template recursion exceeded depth {} at Λ = {lambda}", params.max_depth)));
        }
        let lam = lambda * params.p_rec.powi((h * level) as i32);
        let lseed = labeled_seed(seed, "level", level as u64);
        let heavy = finder.find(&cur, lam, child_seed(lseed, 0), wc)?;
        let band = HeavyBand::new(lam / params.czlog, lam * 8.0 * params.q / (params.eps * params.eps))?;
        let est = counter.count(&cur, &heavy, band, params.eps_inner, child_seed(lseed, 1), wc)?;
        let rest = cur.remove_vertices(&heavy)?;
        trace.levels.push(TemplateLevel {
            level,
            lambda: lam,
            n_before: cur.n(),
            heavy: heavy.len(),
            n_after: rest.n(),
            estimate: est,
            seed: lseed,
        });
        if lam <= 1.0 || rest.edge_count() == 0 {
            break;
        }
        cur = rest.bernoulli_sample(params.p_rec, child_seed(lseed, 2))?;
        level += 1;
    }
    trace.estimate = trace.telescoped();
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingStep {
    pub i: usize,
    pub lambda: f64,
    /// The scale `n^h / 2^i` the median must reach to stop.
    pub scale: f64,
    pub median: f64,
    pub runs: Vec<TemplateTrace>,
}

/// Work totals without the shape multiset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkSummary {
    pub scalar_mults: u128,
    pub mm_calls: u64,
    pub distinct_shapes: usize,
    pub max_min_dim: usize,
}

impl From<&WorkCounter> for WorkSummary {
    fn from(wc: &WorkCounter) -> Self {
        WorkSummary {
            scalar_mults: wc.scalar_mults,
            mm_calls: wc.calls,
            distinct_shapes: wc.mm_calls.len(),
            max_min_dim: wc.max_min_dim(),
        }
    }
}

/// Result of the doubling driver with full provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    /// `None` only when the run is inconclusive.
    pub estimate: Option<f64>,
    pub n: usize,
    pub h: usize,
    pub eps: f64,
    pub seed: u64,
    pub scale_mode: ScaleMode,
    pub stopping_i: Option<usize>,
    pub medians: Vec<f64>,
    pub steps: Vec<DoublingStep>,
    /// The enumeration fallback produced the estimate.
    pub fallback: bool,
    /// The fallback ran out of budget.
    pub inconclusive: bool,
    pub work: WorkSummary,
    pub config: Resolved,
}

/// Doubling driver with the color-coding black boxes.
pub fn doubling(g: &Graph, h: usize, cfg: &EstimatorConfig, seed: u64, wc: &mut WorkCounter) -> Result<CountReport> {
    let resolved = cfg.resolve(g.n(), h)?;
    let finder = ColorCodingFinder { cfg: resolved.clone() };
    let counter = ColorCodingCounter { cfg: resolved.clone() };
    doubling_with(g, &resolved, &finder, &counter, seed, wc)
}

/// Doubling driver over arbitrary black boxes.
pub fn doubling_with(
    g: &Graph,
    cfg: &Resolved,
    finder: &dyn HeavyFinder,
    counter: &dyn HeavyCounter,
    seed: u64,
    wc: &mut WorkCounter,
) -> Result<CountReport> {
    let (n, h) = (g.n(), cfg.h);
    let w = (n as f64).powi(h as i32);
    let lambda0 = w * cfg.eps * cfg.eps / cfg.q;
    let params = TemplateParams::from_resolved(cfg, lambda0);
    let iterations = (h as f64 * cfg.log_n).floor() as usize;
    let mut report = CountReport {
        estimate: None,
        n,
        h,
        eps: cfg.eps,
        seed,
        scale_mode: cfg.scale_mode,
        stopping_i: None,
        medians: Vec::new(),
        steps: Vec::new(),
        fallback: false,
        inconclusive: false,
        work: WorkSummary::default(),
        config: cfg.clone(),
    };
    let start_work = wc.clone();
    if n >= h && g.edge_count() >= h {
        for i in 0..=iterations {
            let lam = lambda0 / 2f64.powi(i as i32);
            let scale = w / 2f64.powi(i as i32);
            let mut runs = Vec::with_capacity(cfg.reps_median);
            for r in 0..cfg.reps_median {
                let s = labeled_seed(labeled_seed(seed, "step", i as u64), "run", r as u64);
                runs.push(template(g, lam, &params, finder, counter, s, wc)?);
            }
            let ests: Vec<f64> = runs.iter().map(|t| t.estimate).collect();
            let med = median_of(&ests)?;
            report.medians.push(med);
            report.steps.push(DoublingStep { i, lambda: lam, scale, median: med, runs });
            if med >= scale {
                report.estimate = Some(med);
                report.stopping_i = Some(i);
                break;
            }
        }
    }
    if report.estimate.is_none() {
        report.fallback = true;
        match brute_force_cycles(g, h, cfg.budget) {
            Ok(c) => report.estimate = Some(c.total as f64),
            Err(Error::BudgetExceeded { .. }) => report.inconclusive = true,
            Err(e) => return Err(e),
        }
    }
    let mut delta = wc.clone();
    delta.scalar_mults -= start_work.scalar_mults;
    delta.calls -= start_work.calls;
    for (shape, k) in &start_work.mm_calls {
        if let Some(x) = delta.mm_calls.get_mut(shape) {
            *x -= k;
        }
    }
    delta.mm_calls.retain(|_, k| *k > 0);
    report.work = WorkSummary::from(&delta);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mode;

    #[test]
    fn median_examples() {
        assert_eq!(median_of(&[5.0]).unwrap(), 5.0);
        assert_eq!(median_of(&[1.0, 100.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median_of(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.0);
        assert!(median_of(&[]).is_err());
        assert!(median_of(&[f64::NAN]).is_err());
    }

    #[test]
    fn depth_formula() {
        assert_eq!(recursion_depth(1.0, 0.5, 3), 0);
        assert_eq!(recursion_depth(8.0, 0.5, 3), 1);
        assert_eq!(recursion_depth(9.0, 0.5, 3), 2);
    }

    #[test]
    fn cycle_free_graph_falls_back_to_zero() {
        let g = Graph::from_edges(6, Mode::Undirected, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let mut wc = WorkCounter::new();
        let r = doubling(&g, 3, &EstimatorConfig::tuned(), 1, &mut wc).unwrap();
        assert_eq!(r.estimate, Some(0.0));
        assert!(r.fallback);
    }
}
