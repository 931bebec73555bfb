//! Grid search for the access scale `beta` that maximizes the peak expected
//! throughput over the number of slots.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisOptions, AnalysisResult, Analyzer, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::SystemParams;

/// How the throughput peak over `m` is located for one `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotSearch {
    /// Evaluate every integer `m` in the range.
    #[default]
    Grid,
    /// Ascend from a starting `m` to the nearest local maximum inside the
    /// range. Matches `Grid` when the throughput curve is unimodal in `m`,
    /// at a fraction of the cost.
    Climb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub beta: f64,
    pub t_max: f64,
    pub m: usize,
    pub per: f64,
    pub pruned_mass: f64,
    /// Number of analyses run to find this peak.
    pub evaluations: usize,
    /// Largest per-stage mass-conservation error over those analyses.
    pub max_mass_drift: f64,
}

impl Peak {
    fn from_result(beta: f64, r: &AnalysisResult, evaluations: usize, max_mass_drift: f64) -> Self {
        Self {
            beta,
            t_max: r.throughput,
            m: r.params.m(),
            per: r.per,
            pruned_mass: r.pruned_mass,
            evaluations,
            max_mass_drift,
        }
    }
}

fn check_m_range(m_range: &RangeInclusive<usize>) -> Result<()> {
    if m_range.is_empty() || *m_range.start() == 0 {
        return Err(Error::InvalidParams(format!(
            "m range must be non-empty and start at 1 or above, got {}..={}",
            m_range.start(),
            m_range.end()
        )));
    }
    Ok(())
}

/// Peak throughput over every integer `m` in `m_range`; the smallest `m`
/// wins exact ties.
pub fn peak_throughput(
    n: usize,
    k: usize,
    beta: f64,
    m_range: RangeInclusive<usize>,
    epsilon: f64,
    exec: Execution,
) -> Result<Peak> {
    check_m_range(&m_range)?;
    let params = SystemParams::new(n, *m_range.start(), k, beta)?;
    let analyzer = Analyzer::new(&params, AnalysisOptions::with_epsilon(epsilon))?;
    let ms: Vec<usize> = m_range.collect();
    let results = exec.map_indexed(ms.len(), |i| analyzer.run_slots(ms[i]));
    let drift = results.iter().map(|r| r.max_mass_drift).fold(0.0, f64::max);
    let mut best = &results[0];
    for r in &results[1..] {
        if r.throughput > best.throughput {
            best = r;
        }
    }
    Ok(Peak::from_result(beta, best, results.len(), drift))
}

/// Local ascent over `m` starting at `start` (clamped into the range).
pub fn climb_peak(
    analyzer: &Analyzer,
    m_range: RangeInclusive<usize>,
    start: usize,
) -> Result<Peak> {
    check_m_range(&m_range)?;
    let (lo, hi) = (*m_range.start(), *m_range.end());
    let mut evaluations = 0;
    let mut drift: f64 = 0.0;
    let mut eval = |m: usize| {
        evaluations += 1;
        let r = analyzer.run_slots(m);
        drift = drift.max(r.max_mass_drift);
        r
    };
    let mut best = eval(start.clamp(lo, hi));

    // Prefer moving down first so that plateaus resolve to the smallest m.
    while best.params.m() > lo {
        let left = eval(best.params.m() - 1);
        if left.throughput >= best.throughput {
            best = left;
        } else {
            break;
        }
    }
    while best.params.m() < hi {
        let right = eval(best.params.m() + 1);
        if right.throughput > best.throughput {
            best = right;
        } else {
            break;
        }
    }
    let beta = analyzer.params().beta();
    Ok(Peak::from_result(beta, &best, evaluations, drift))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub n: usize,
    pub k: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub coarse_step: f64,
    pub refine_step: f64,
    pub m_min: usize,
    pub m_max: usize,
    pub epsilon: f64,
    pub search: SlotSearch,
    /// Starting point for [`SlotSearch::Climb`] in the coarse stage; the
    /// middle of the m range when absent.
    pub m_hint: Option<usize>,
    pub exec: Execution,
}

impl OptimizeConfig {
    /// Defaults: `beta` over `[0.1, min(10, n)]`, steps 0.1 / 0.01, and `m/n`
    /// over `[0.1, 2.0]`.
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            beta_min: 0.1,
            beta_max: (n as f64).min(10.0),
            coarse_step: 0.1,
            refine_step: 0.01,
            m_min: ((0.1 * n as f64).ceil() as usize).max(1),
            m_max: ((2.0 * n as f64).floor() as usize).max(1),
            epsilon: DEFAULT_EPSILON,
            search: SlotSearch::Grid,
            m_hint: None,
            exec: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta_max && self.beta_max <= self.n as f64) {
            return bad(format!(
                "beta range must satisfy 0 < beta_min <= beta_max <= n, got [{}, {}] with n = {}",
                self.beta_min, self.beta_max, self.n
            ));
        }
        if !(self.coarse_step > 0.0 && self.refine_step > 0.0 && self.refine_step <= self.coarse_step) {
            return bad(format!(
                "steps must satisfy 0 < refine_step <= coarse_step, got {} / {}",
                self.coarse_step, self.refine_step
            ));
        }
        check_m_range(&(self.m_min..=self.m_max))?;
        SystemParams::new(self.n, self.m_min, self.k, self.beta_min)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub n: usize,
    pub k: usize,
    pub beta_opt: f64,
    pub t_max: f64,
    pub m_at_peak: usize,
    pub m_over_n: f64,
    pub per_at_peak: f64,
    pub pruned_mass: f64,
    /// Peak per coarse-grid `beta`, ascending.
    pub coarse: Vec<Peak>,
    /// Peak per refinement-grid `beta`, ascending.
    pub refine: Vec<Peak>,
    pub config: OptimizeConfig,
}

/// Multiples of `step` from `lo` to `hi` (inclusive, with a little slack
/// for rounding), snapped to 1e-9.
fn beta_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| snap(lo + i as f64 * step)).collect()
}

fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn best_of(peaks: &[Peak]) -> &Peak {
    let mut best = &peaks[0];
    for p in &peaks[1..] {
        if p.t_max > best.t_max {
            best = p;
        }
    }
    best
}

fn peaks_for(cfg: &OptimizeConfig, betas: &[f64], start: usize) -> Result<Vec<Peak>> {
    let peaks = cfg.exec.map_indexed(betas.len(), |i| -> Result<Peak> {
        let params = SystemParams::new(cfg.n, cfg.m_min, cfg.k, betas[i])?;
        let analyzer = Analyzer::new(&params, AnalysisOptions::with_epsilon(cfg.epsilon))?;
        match cfg.search {
            SlotSearch::Grid => {
                let ms: Vec<usize> = (cfg.m_min..=cfg.m_max).collect();
                let mut best: Option<AnalysisResult> = None;
                let mut drift: f64 = 0.0;
                for &m in &ms {
                    let r = analyzer.run_slots(m);
                    drift = drift.max(r.max_mass_drift);
                    if best.as_ref().is_none_or(|b| r.throughput > b.throughput) {
                        best = Some(r);
                    }
                }
                Ok(Peak::from_result(betas[i], &best.expect("non-empty m range"), ms.len(), drift))
            }
            SlotSearch::Climb => climb_peak(&analyzer, cfg.m_min..=cfg.m_max, start),
        }
    });
    peaks.into_iter().collect()
}

/// Coarse grid over `beta`, then a fine grid within one coarse step of the
/// coarse winner. The smallest `beta` wins exact ties.
pub fn optimize_beta(cfg: &OptimizeConfig) -> Result<Optimum> {
    cfg.validate()?;
    let start = cfg.m_hint.unwrap_or((cfg.m_min + cfg.m_max) / 2);
    let coarse = peaks_for(cfg, &beta_grid(cfg.beta_min, cfg.beta_max, cfg.coarse_step), start)?;
    let incumbent = *best_of(&coarse);

    let lo = (incumbent.beta - cfg.coarse_step).max(cfg.beta_min);
    let hi = (incumbent.beta + cfg.coarse_step).min(cfg.beta_max);
    let offsets = ((incumbent.beta - lo) / cfg.refine_step + 1e-9).floor() as usize;
    let fine_lo = snap(incumbent.beta - offsets as f64 * cfg.refine_step);
    let fine: Vec<f64> = beta_grid(fine_lo, hi, cfg.refine_step);
    let refine = peaks_for(cfg, &fine, incumbent.m)?;

    // The coarse winner sits on the fine grid, but keep it in contention in
    // case rounding moved the fine-grid copy.
    let mut best = *best_of(&refine);
    if incumbent.t_max > best.t_max || (incumbent.t_max == best.t_max && incumbent.beta < best.beta) {
        best = incumbent;
    }
    Ok(Optimum {
        n: cfg.n,
        k: cfg.k,
        beta_opt: best.beta,
        t_max: best.t_max,
        m_at_peak: best.m,
        m_over_n: best.m as f64 / cfg.n as f64,
        per_at_peak: best.per,
        pruned_mass: best.pruned_mass,
        coarse,
        refine,
        config: cfg.clone(),
    })
}
