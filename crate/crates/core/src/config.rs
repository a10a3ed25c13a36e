//! Estimator constants.
//!
//! Every constant has a literal polylogarithmic formula (`ScaleMode::Paper`)
//! and a desk-scale default (`ScaleMode::Tuned`). Explicit overrides win in
//! both modes. [`EstimatorConfig::resolve`] turns the configuration into
//! concrete numbers for a graph with `n` vertices and cycle length `h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::DEFAULT_BUDGET;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMode {
    Paper,
    #[default]
    Tuned,
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(ScaleMode::Paper),
            "tuned" => Ok(ScaleMode::Tuned),
            other => Err(Error::invalid(format!("unknown scale mode `{other}`"))),
        }
    }
}

/// User-facing configuration. `None` fields fall back to the formula of
/// the selected scale mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub scale_mode: ScaleMode,
    pub eps: Option<f64>,
    /// Heaviness slack `Q`.
    pub q: Option<f64>,
    /// Concentration constant used in the template's additive error bound.
    pub kappa: Option<f64>,
    /// Recursion keep-probability.
    pub p_rec: Option<f64>,
    /// Template runs per doubling step.
    pub reps_median: Option<usize>,
    /// Batches per stratified estimate.
    pub count_batches: Option<usize>,
    /// Samples per batch. Unset in paper mode means `ceil(3 C b / (a delta))`.
    pub batch_size: Option<usize>,
    /// Variance constant `C`; defaults to `1 / q_v^2`.
    pub variance_c: Option<f64>,
    /// Discovery experiments per sample vector.
    pub reps_discovery: Option<usize>,
    /// Plain colorings in the small-threshold branch.
    pub reps_coloring: Option<usize>,
    /// Light-threshold exponent: the divisor is `(log n)^czlog_exp`.
    pub czlog_exp: Option<f64>,
    /// Light-threshold divisor, overriding `czlog_exp`.
    pub czlog: Option<f64>,
    /// Divisor turning the heaviness threshold into the sampling threshold.
    pub lambda_slack: Option<f64>,
    /// Tally threshold for a discovery vote, in experiments. Unset in tuned
    /// mode means it is derived from `tau_fp` when the product set is known.
    pub tau: Option<f64>,
    /// Allowed probability that some light vertex reaches the derived tally
    /// threshold under some sample vector.
    pub tau_fp: Option<f64>,
    /// Thresholds strictly below this use plain colorings.
    pub const_branch_max: Option<f64>,
    /// Step budget for the enumeration fallback.
    pub budget: Option<u64>,
    /// Cap on the number of samples one stratified estimate may draw.
    pub sample_budget: Option<u64>,
}

/// Concrete constants for one `(n, h)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub scale_mode: ScaleMode,
    pub n: usize,
    pub h: usize,
    pub log_n: f64,
    pub eps: f64,
    pub q: f64,
    pub kappa: f64,
    pub p_rec: f64,
    pub reps_median: usize,
    pub count_batches: usize,
    pub batch_size: Option<usize>,
    pub variance_c: f64,
    pub reps_discovery: usize,
    pub reps_coloring: usize,
    pub czlog: f64,
    pub lambda_slack: f64,
    /// `None` means derived per call, see `find_heavy::derived_tau`.
    pub tau: Option<f64>,
    pub tau_fp: f64,
    pub const_branch_max: f64,
    pub budget: u64,
    pub sample_budget: u64,
}

/// `log2 n`, clamped below at 1.
pub fn log_n(n: usize) -> f64 {
    (n.max(2) as f64).log2().max(1.0)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Probability that a uniform coloring of a fixed `h`-cycle is colorful.
pub fn rainbow_probability(h: usize) -> f64 {
    factorial(h) / (h as f64).powi(h as i32)
}

/// `q_v = (h-1)! / (h-1)^(h-1)`: the probability that a cycle through the
/// designated vertex is colorful when only the other `h - 1` vertices are
/// colored at random.
pub fn vertex_rainbow_probability(h: usize) -> f64 {
    factorial(h - 1) / ((h - 1) as f64).powi(h as i32 - 1)
}

pub const DEFAULT_EPS: f64 = 0.25;
const DEFAULT_SAMPLE_BUDGET: u64 = 50_000_000;

impl EstimatorConfig {
    pub fn paper() -> EstimatorConfig {
        EstimatorConfig { scale_mode: ScaleMode::Paper, ..Default::default() }
    }

    pub fn tuned() -> EstimatorConfig {
        EstimatorConfig::default()
    }

    pub fn with_eps(mut self, eps: f64) -> EstimatorConfig {
        self.eps = Some(eps);
        self
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::invalid(format!("bad value `{value}` for config key `{key}`"));
        let f = || value.parse::<f64>().map_err(|_| bad()).and_then(|x| if x.is_finite() { Ok(x) } else { Err(bad()) });
        let u = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "scale_mode" => self.scale_mode = value.parse()?,
            "eps" => self.eps = Some(f()?),
            "q" | "Q" => self.q = Some(f()?),
            "kappa" | "K" => self.kappa = Some(f()?),
            "p_rec" | "p" => self.p_rec = Some(f()?),
            "reps_median" => self.reps_median = Some(u()?),
            "count_batches" => self.count_batches = Some(u()?),
            "batch_size" => self.batch_size = Some(u()?),
            "variance_c" | "C" => self.variance_c = Some(f()?),
            "reps_discovery" => self.reps_discovery = Some(u()?),
            "reps_coloring" => self.reps_coloring = Some(u()?),
            "czlog_exp" => self.czlog_exp = Some(f()?),
            "czlog" => self.czlog = Some(f()?),
            "lambda_slack" => self.lambda_slack = Some(f()?),
            "tau" => self.tau = Some(f()?),
            "tau_fp" => self.tau_fp = Some(f()?),
            "const_branch_max" => self.const_branch_max = Some(f()?),
            "budget" => self.budget = Some(value.parse().map_err(|_| bad())?),
            "sample_budget" => self.sample_budget = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parses and applies a `key=value` string.
    pub fn apply(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::invalid(format!("expected key=value, got `{kv}`")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn resolve(&self, n: usize, h: usize) -> Result<Resolved> {
        if h < 3 {
            return Err(Error::invalid("cycle length must be at least 3"));
        }
        let paper = self.scale_mode == ScaleMode::Paper;
        let ln = log_n(n);
        let hf = h as f64;
        let eps = self.eps.unwrap_or(DEFAULT_EPS);
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps = {eps} must be positive")));
        }
        let eps = eps.min(0.5);

        let q = self.q.unwrap_or(if paper { 8.0 * ln.powi(4) } else { 1.0 });
        let kappa = self.kappa.unwrap_or(ln * ln / 16.0);
        let p_rec = self.p_rec.unwrap_or(0.5);
        let reps_median = self.reps_median.unwrap_or(if paper { (400.0 * ln).ceil() as usize } else { 3 });
        let count_batches = self.count_batches.unwrap_or(if paper { (400.0 * ln).ceil() as usize } else { 5 });
        let batch_size = self.batch_size.or(if paper { None } else { Some(60) });
        let qv = vertex_rainbow_probability(h);
        let variance_c = self.variance_c.unwrap_or(1.0 / (qv * qv));
        let reps_discovery = self.reps_discovery.unwrap_or(if paper { ln.powi(4).ceil() as usize } else { TUNED_DISCOVERY_REPS });
        let reps_coloring = self.reps_coloring.unwrap_or(if paper { reps_discovery } else { tuned_coloring_reps(n, h) });
        let czlog = match (self.czlog, self.czlog_exp) {
            (Some(c), _) => c,
            (None, Some(e)) => ln.powf(e),
            (None, None) if paper => ln.powf(hf * hf),
            (None, None) => 16.0,
        };
        let s = 1.0 / hf.powi(h as i32);
        let lambda_slack =
            self.lambda_slack.unwrap_or(if paper { (2.0 * hf * ln).powf((hf - 1.0) * (hf - 1.0)) * 2.0 / s } else { 1.0 });
        let tau = self.tau.or(if paper {
            Some(reps_discovery as f64 * (1.0 - (-1.0f64).exp()).powi(h as i32 - 1) * s / 4.0)
        } else {
            None
        });
        let tau_fp = self.tau_fp.unwrap_or(DEFAULT_TAU_FP);
        if !(tau_fp > 0.0 && tau_fp < 1.0) {
            return Err(Error::invalid(format!("tau_fp = {tau_fp} outside (0, 1)")));
        }
        let const_branch_max = self.const_branch_max.unwrap_or(czlog);

        let positive = [("q", q), ("kappa", kappa), ("variance_c", variance_c), ("czlog", czlog), ("lambda_slack", lambda_slack)];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::invalid(format!("config value {name} = {v} must be positive")));
        }
        if !(p_rec > 0.0 && p_rec <= 1.0) {
            return Err(Error::invalid(format!("p_rec = {p_rec} outside (0, 1]")));
        }
        if reps_median == 0 || count_batches == 0 || reps_discovery == 0 || reps_coloring == 0 || batch_size == Some(0) {
            return Err(Error::invalid("repetition counts must be at least 1"));
        }
        Ok(Resolved {
            scale_mode: self.scale_mode,
            n,
            h,
            log_n: ln,
            eps,
            q,
            kappa,
            p_rec,
            reps_median,
            count_batches,
            batch_size,
            variance_c,
            reps_discovery,
            reps_coloring,
            czlog,
            lambda_slack,
            tau: tau.map(|t| t.max(0.0)),
            tau_fp,
            const_branch_max,
            budget: self.budget.unwrap_or(DEFAULT_BUDGET),
            sample_budget: self.sample_budget.unwrap_or(DEFAULT_SAMPLE_BUDGET),
        })
    }
}

const TUNED_DISCOVERY_REPS: usize = 120;
const DEFAULT_TAU_FP: f64 = 1e-3;

/// Enough plain colorings that a vertex on a single cycle is missed with
/// probability at most `1 / n^2`.
fn tuned_coloring_reps(n: usize, h: usize) -> usize {
    let miss = 1.0 - rainbow_probability(h);
    let n = n.max(8) as f64;
    ((2.0 * n.ln()) / -miss.ln()).ceil() as usize
}

impl Resolved {
    /// Samples per batch for a band ratio `b / a` and accuracy `delta`.
    pub fn samples_per_batch(&self, a: f64, b: f64, delta: f64) -> f64 {
        match self.batch_size {
            Some(l) => l as f64,
            None => (3.0 * self.variance_c * b / (a * delta)).ceil().max(1.0),
        }
    }

    /// Precision handed to the heavy counter inside one template run.
    pub fn eps_inner(&self) -> f64 {
        self.eps / (4.0 * self.log_n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_formulas() {
        let r = EstimatorConfig::paper().resolve(256, 3).unwrap();
        assert_eq!(r.log_n, 8.0);
        assert_eq!(r.q, 8.0 * 8f64.powi(4));
        assert_eq!(r.kappa, 4.0);
        assert_eq!(r.reps_median, 3200);
        assert_eq!(r.czlog, 8f64.powi(9));
        assert_eq!(r.variance_c, 4.0);
        assert_eq!(r.const_branch_max, r.czlog);
    }

    #[test]
    fn vertex_probability_for_triangles() {
        assert_eq!(vertex_rainbow_probability(3), 0.5);
        assert!((rainbow_probability(3) - 6.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn eps_clamped_and_overrides() {
        let mut c = EstimatorConfig::tuned().with_eps(0.9);
        c.apply("q=4").unwrap();
        c.apply("reps_median = 7").unwrap();
        let r = c.resolve(100, 3).unwrap();
        assert_eq!(r.eps, 0.5);
        assert_eq!(r.q, 4.0);
        assert_eq!(r.reps_median, 7);
        assert!(c.apply("nope=1").is_err());
        assert!(c.apply("q").is_err());
        assert!(c.apply("q=abc").is_err());
    }
}
