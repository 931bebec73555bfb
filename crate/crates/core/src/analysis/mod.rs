//! Exact finite-length analysis of the k-MUD peeling decoder.
//!
//! The decoder is a finite-state machine over cloud/ripple cardinalities. The
//! initial state law is multinomial over the `m` slots; every resolved user
//! moves the state by a product of independent binomials (cloud exits with
//! probability `q_u`, ripple-`h` exits with probability `h/u`, the served
//! ripple losing one slot deterministically). Iterating from `u = n` down to
//! `u = 0` gives the probability of halting with each number of unresolved
//! users, hence the packet error rate.
//!
//! The only approximation is pruning: any branch or successor whose
//! probability falls below `epsilon` is dropped, and its mass is accounted for
//! in [`AnalysisResult::pruned_mass`]. The true error rate lies within
//! `per ± pruned_mass`.

mod state;

use log::warn;
use rustc_hash::FxHashMap;
use serde::Serialize;

pub use state::{DecoderState, StateDistribution, TransitionDelta, MAX_K, MAX_SLOTS};

use crate::error::{Error, Result};
use crate::model::{
    binomial_pmf, degree_distribution, CompensatedSum, DegreeDistribution, LnBinomialTable,
    SystemParams,
};

/// Default per-branch and per-state pruning threshold.
pub const DEFAULT_EPSILON: f64 = 1e-15;

/// Cloud probability below which `q_u` is defined as 0.
const CLOUD_GUARD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Pruning threshold; 0 disables pruning.
    pub epsilon: f64,
    /// Record a [`StageSummary`] per decoding step.
    pub trace: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            trace: false,
        }
    }
}

impl AnalysisOptions {
    pub fn exact() -> Self {
        Self {
            epsilon: 0.0,
            trace: false,
        }
    }

    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub u: usize,
    pub q_u: f64,
    pub states: usize,
    pub active_mass: f64,
    pub halted_here: f64,
    pub pruned_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisResult {
    pub params: SystemParams,
    /// Expected fraction of users unresolved when decoding halts.
    pub per: f64,
    /// `n (1 - per) / (k m)`; reported as 0 when `m = 0`.
    pub throughput: f64,
    /// Probability mass discarded by pruning; bounds `|per - exact per|`.
    pub pruned_mass: f64,
    /// Largest `|total mass - 1|` seen over all stages.
    pub max_mass_drift: f64,
    /// `halt_mass[u]`: probability decoding stopped with `u` users unresolved.
    pub halt_mass: Vec<f64>,
    pub trace: Option<Vec<StageSummary>>,
}

/// Evaluates the decoder recursion for fixed `(n, k, beta)`.
///
/// The slot-degree law and the cloud-exit probabilities `q_u` do not depend on
/// `m`, so one analyzer can serve a whole sweep over the number of slots.
#[derive(Debug, Clone)]
pub struct Analyzer {
    params: SystemParams,
    options: AnalysisOptions,
    omega: DegreeDistribution,
    /// `q[u]` for `u = 0..=n` (`q[0]` unused).
    q: Vec<f64>,
}

impl Analyzer {
    pub fn new(params: &SystemParams, options: AnalysisOptions) -> Result<Self> {
        check_analysis_params(params, &options)?;
        let omega = degree_distribution(params);
        let table = LnBinomialTable::new(params.n());
        let q = (0..=params.n())
            .map(|u| {
                if u == 0 {
                    0.0
                } else {
                    cloud_exit_with_table(params, &omega, &table, u)
                }
            })
            .collect();
        Ok(Self {
            params: *params,
            options,
            omega,
            q,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn options(&self) -> &AnalysisOptions {
        &self.options
    }

    pub fn degree_distribution(&self) -> &DegreeDistribution {
        &self.omega
    }

    /// `q_u`, the probability that a cloud slot enters ripple `k` when one of
    /// `u` unresolved users is resolved.
    pub fn cloud_exit_probability(&self, u: usize) -> f64 {
        self.q.get(u).copied().unwrap_or(0.0)
    }

    /// Multinomial law of the state before decoding (`u = n`) over `m` slots.
    pub fn initial_state_distribution(&self, m: usize) -> StateDistribution {
        initial_distribution(&self.params, &self.omega, m, self.options.epsilon)
    }

    /// One decoding step: stage `u` to stage `u - 1`.
    pub fn evolve(&self, dist: &StateDistribution) -> StateDistribution {
        evolve_stage(dist, self.params.n(), self.cloud_exit_probability(dist.u), self.options.epsilon)
    }

    /// Full analysis at the analyzer's own `m`.
    pub fn run(&self) -> AnalysisResult {
        self.run_slots(self.params.m())
    }

    /// Full analysis over `m` slots (other parameters fixed).
    pub fn run_slots(&self, m: usize) -> AnalysisResult {
        let params = self.params.with_m(m);
        let n = params.n();
        let mut dist = self.initial_state_distribution(m);
        let mut drift = (dist.total_mass() - 1.0).abs();
        let mut trace = self.options.trace.then(Vec::new);
        while dist.u > 0 {
            let u = dist.u;
            let next = self.evolve(&dist);
            drift = drift.max((next.total_mass() - 1.0).abs());
            if let Some(t) = trace.as_mut() {
                t.push(StageSummary {
                    u,
                    q_u: self.cloud_exit_probability(u),
                    states: dist.len(),
                    active_mass: dist.active_mass(),
                    halted_here: next.terminal_mass(u),
                    pruned_mass: next.pruned_mass(),
                });
            }
            dist = next;
        }
        let per = packet_error_rate(&dist);
        let throughput = if m == 0 {
            0.0
        } else {
            n as f64 * (1.0 - per) / (params.k() as f64 * m as f64)
        };
        AnalysisResult {
            params,
            per,
            throughput,
            pruned_mass: dist.pruned_mass(),
            max_mass_drift: drift,
            halt_mass: (0..=n).map(|u| dist.terminal_mass(u)).collect(),
            trace,
        }
    }
}

fn check_analysis_params(params: &SystemParams, options: &AnalysisOptions) -> Result<()> {
    if params.k() > MAX_K {
        return Err(Error::InvalidParams(format!(
            "analysis supports k <= {MAX_K}, got k = {}",
            params.k()
        )));
    }
    if params.m() > MAX_SLOTS {
        return Err(Error::InvalidParams(format!(
            "analysis supports m <= {MAX_SLOTS}, got m = {}",
            params.m()
        )));
    }
    if !(options.epsilon >= 0.0 && options.epsilon < 1.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must lie in [0, 1), got {}",
            options.epsilon
        )));
    }
    Ok(())
}

/// Analysis with the default pruning threshold.
pub fn analyze(params: &SystemParams) -> Result<AnalysisResult> {
    analyze_with(params, AnalysisOptions::default())
}

pub fn analyze_with(params: &SystemParams, options: AnalysisOptions) -> Result<AnalysisResult> {
    Ok(Analyzer::new(params, options)?.run())
}

/// Initial multinomial state law (`u = n`) for `params.m()` slots.
pub fn initial_state_distribution(
    params: &SystemParams,
    omega: &DegreeDistribution,
    epsilon: f64,
) -> Result<StateDistribution> {
    check_analysis_params(params, &AnalysisOptions::with_epsilon(epsilon))?;
    Ok(initial_distribution(params, omega, params.m(), epsilon))
}

/// `q_u` from scratch; prefer [`Analyzer::cloud_exit_probability`] in loops.
pub fn cloud_exit_probability(params: &SystemParams, omega: &DegreeDistribution, u: usize) -> f64 {
    assert!(u >= 1 && u <= params.n(), "u must lie in 1..=n");
    let table = LnBinomialTable::new(params.n());
    cloud_exit_with_table(params, omega, &table, u)
}

fn cloud_exit_with_table(
    params: &SystemParams,
    omega: &DegreeDistribution,
    table: &LnBinomialTable,
    u: usize,
) -> f64 {
    let (n, k) = (params.n() as i64, params.k() as i64);
    let u = u as i64;
    let ln_omega: Vec<f64> = omega.omega().iter().map(|w| w.ln()).collect();

    // Slot in the cloud at step u and in ripple k at step u - 1.
    let ln_users = table.ln(u - 1, k) - table.ln(n - 1, k);
    let mut numerator = CompensatedSum::default();
    if ln_users.is_finite() {
        for d in (k + 1)..=n {
            let lw = ln_omega[d as usize];
            if !lw.is_finite() {
                continue;
            }
            let ln_rest = table.ln(n - u, d - k - 1) - table.ln(n - k - 1, d - k - 1);
            if !ln_rest.is_finite() {
                continue;
            }
            let ln_term = (d as f64 / n as f64).ln() + table.ln(d - 1, k) + ln_users + ln_rest;
            numerator.add((lw + ln_term).exp());
        }
    }
    let numerator = numerator.value();
    if numerator <= 0.0 {
        return 0.0;
    }

    // Slot in the cloud at step u: reduced degree above k. Summed directly
    // over h > k rather than as 1 - P{red <= k} to avoid cancellation.
    let mut cloud = CompensatedSum::default();
    for h in (k + 1)..=u {
        let ln_h = table.ln(u, h);
        for d in h..=n {
            let lw = ln_omega[d as usize];
            let ln_rest = table.ln(n - u, d - h);
            if !lw.is_finite() || !ln_rest.is_finite() {
                continue;
            }
            cloud.add((lw + ln_h + ln_rest - table.ln(n, d)).exp());
        }
    }
    let cloud = cloud.value();
    if cloud <= CLOUD_GUARD {
        return 0.0;
    }
    let q = numerator / cloud;
    let clamped = q.clamp(0.0, 1.0);
    if (clamped - q).abs() > 1e-9 {
        warn!("q_u clamped from {q} to {clamped} (n={n}, k={k}, u={u})");
    }
    clamped
}

fn initial_distribution(
    params: &SystemParams,
    omega: &DegreeDistribution,
    m: usize,
    epsilon: f64,
) -> StateDistribution {
    let (n, k) = (params.n(), params.k());
    let mut dist = StateDistribution::empty(n, k, n);

    // Category probabilities in the order cloud, ripple k, …, ripple 1,
    // degree 0, with tail sums `rest[i]` = P(category >= i).
    let mut cats = Vec::with_capacity(k + 2);
    cats.push(omega.omega().iter().skip(k + 1).copied().collect::<CompensatedSum>().value());
    for h in (1..=k).rev() {
        cats.push(omega.get(h));
    }
    cats.push(omega.get(0));
    let mut rest = vec![0.0; cats.len() + 1];
    for i in (0..cats.len()).rev() {
        rest[i] = rest[i + 1] + cats[i];
    }

    let mut counts = vec![0u32; k + 1];
    let mut pruned = CompensatedSum::default();
    let mut emit = |counts: &[u32], p: f64| {
        let ripples: Vec<u32> = counts[1..].iter().rev().copied().collect();
        let s = DecoderState::new(counts[0], &ripples);
        dist.mass.insert(s.pack(), p);
    };
    split_slots(&cats, &rest, 0, m, 1.0, epsilon, &mut counts, &mut emit, &mut pruned);
    dist.pruned = pruned;
    dist
}

/// Sequential conditional-binomial expansion of the multinomial law: the
/// category-`i` count is Binomial(remaining, cats[i] / rest[i]).
#[allow(clippy::too_many_arguments)]
fn split_slots<F: FnMut(&[u32], f64)>(
    cats: &[f64],
    rest: &[f64],
    i: usize,
    remaining: usize,
    partial: f64,
    epsilon: f64,
    counts: &mut [u32],
    emit: &mut F,
    pruned: &mut CompensatedSum,
) {
    if i == counts.len() {
        emit(counts, partial);
        return;
    }
    let ratio = if rest[i] > 0.0 {
        (cats[i] / rest[i]).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pmf = binomial_pmf(remaining, ratio);
    for (x, w) in pmf.into_iter().enumerate() {
        let p = partial * w;
        if p == 0.0 {
            continue;
        }
        if p < epsilon {
            pruned.add(p);
            continue;
        }
        counts[i] = x as u32;
        split_slots(cats, rest, i + 1, remaining - x, p, epsilon, counts, emit, pruned);
    }
    counts[i] = 0;
}

/// Binomial pmf rows `Bin(len, p)` for one fixed `p`, built on demand.
struct PmfRows {
    p: f64,
    rows: Vec<Option<Vec<f64>>>,
}

impl PmfRows {
    fn new(p: f64) -> Self {
        Self { p, rows: Vec::new() }
    }

    fn ensure(&mut self, len: usize) {
        if self.rows.len() <= len {
            self.rows.resize(len + 1, None);
        }
        if self.rows[len].is_none() {
            self.rows[len] = Some(binomial_pmf(len, self.p));
        }
    }

    #[inline]
    fn get(&self, len: usize) -> &[f64] {
        self.rows[len].as_deref().expect("row prepared")
    }
}

/// Binomial laws shared by every state at one decoding step.
struct StageLaws {
    k: usize,
    cloud: PmfRows,
    ripple: Vec<PmfRows>,
}

impl StageLaws {
    fn new(k: usize, u: usize, q_u: f64) -> Self {
        Self {
            k,
            cloud: PmfRows::new(q_u),
            ripple: (1..=k).map(|h| PmfRows::new((h as f64 / u as f64).min(1.0))).collect(),
        }
    }

    /// Trial counts `l^(h)` per ripple and the index of the served ripple.
    fn prepare(&mut self, state: &DecoderState) -> ([usize; MAX_K], usize) {
        let served = state.min_nonempty_ripple().expect("non-empty ripple");
        let mut trials = [0usize; MAX_K];
        for h in 1..=self.k {
            let r = state.ripple(h) as usize;
            trials[h - 1] = if h == served { r - 1 } else { r };
            self.ripple[h - 1].ensure(trials[h - 1]);
        }
        self.cloud.ensure(state.cloud as usize);
        (trials, served)
    }
}

/// Absolute probability of a partial transition and its conditional factor
/// (the product of the binomial terms chosen so far).
#[derive(Clone, Copy)]
struct Branch {
    weight: f64,
    factor: f64,
}

/// Walks the product law of one transition. Branches whose binomial factor
/// drops below `epsilon` are skipped whole (the remaining factors sum to 1, so
/// the skipped mass is exactly the running product) and added to `pruned`.
#[allow(clippy::too_many_arguments)]
fn for_each_transition<F>(
    laws: &StageLaws,
    state: &DecoderState,
    trials: &[usize; MAX_K],
    served: usize,
    weight: f64,
    epsilon: f64,
    emit: &mut F,
    pruned: &mut CompensatedSum,
) where
    F: FnMut(&TransitionDelta, &DecoderState, f64),
{
    let k = laws.k;
    let cloud_law = laws.cloud.get(state.cloud as usize);
    let mut delta = TransitionDelta::default();
    let mut next = DecoderState::default();
    for (b, &wb) in cloud_law.iter().enumerate() {
        let p = weight * wb;
        if p == 0.0 {
            continue;
        }
        if wb < epsilon {
            pruned.add(p);
            continue;
        }
        delta.b = b as u32;
        next.cloud = state.cloud - b as u32;
        let branch = Branch { weight: p, factor: wb };
        descend_ripples(laws, state, trials, served, k, b as u32, branch, epsilon, &mut delta, &mut next, emit, pruned);
    }
}

#[allow(clippy::too_many_arguments)]
fn descend_ripples<F>(
    laws: &StageLaws,
    state: &DecoderState,
    trials: &[usize; MAX_K],
    served: usize,
    h: usize,
    incoming: u32,
    partial: Branch,
    epsilon: f64,
    delta: &mut TransitionDelta,
    next: &mut DecoderState,
    emit: &mut F,
    pruned: &mut CompensatedSum,
) where
    F: FnMut(&TransitionDelta, &DecoderState, f64),
{
    let law = laws.ripple[h - 1].get(trials[h - 1]);
    let shift = u32::from(h == served);
    let r = state.ripple(h);
    for (s, &w) in law.iter().enumerate() {
        let p = partial.weight * w;
        if p == 0.0 {
            continue;
        }
        let factor = partial.factor * w;
        if factor < epsilon {
            pruned.add(p);
            continue;
        }
        let leaving = s as u32 + shift;
        delta.a[h - 1] = leaving;
        next.ripples[h - 1] = r + incoming - leaving;
        if h == 1 {
            emit(delta, next, p);
        } else {
            let branch = Branch { weight: p, factor };
            descend_ripples(laws, state, trials, served, h - 1, leaving, branch, epsilon, delta, next, emit, pruned);
        }
    }
    delta.a[h - 1] = 0;
}

/// Exact transition law out of `state` while `u` users are unresolved.
///
/// Errors with [`Error::EmptyRipples`] if every ripple is empty: such a state
/// is absorbing and has no successor.
pub fn transition_distribution(
    state: &DecoderState,
    u: usize,
    q_u: f64,
    params: &SystemParams,
) -> Result<Vec<(TransitionDelta, f64)>> {
    let k = params.k();
    if k > MAX_K {
        return Err(Error::InvalidParams(format!("k = {k} exceeds {MAX_K}")));
    }
    if state.ripples[..k].iter().all(|&r| r == 0) {
        return Err(Error::EmptyRipples);
    }
    if u == 0 {
        return Err(Error::InvalidParams("u must be at least 1".into()));
    }
    let mut laws = StageLaws::new(k, u, q_u);
    let (trials, served) = laws.prepare(state);
    let mut out = Vec::new();
    let mut pruned = CompensatedSum::default();
    for_each_transition(&laws, state, &trials, served, 1.0, 0.0, &mut |d, _, p| out.push((*d, p)), &mut pruned);
    Ok(out)
}

/// One step of the recursion from stage `u` to `u - 1`. States with every
/// ripple empty are absorbed into the halt mass of stage `u`.
pub fn evolve(
    dist: &StateDistribution,
    params: &SystemParams,
    omega: &DegreeDistribution,
    epsilon: f64,
) -> StateDistribution {
    let q = if dist.u == 0 { 0.0 } else { cloud_exit_probability(params, omega, dist.u) };
    evolve_stage(dist, params.n(), q, epsilon)
}

fn split_active(dist: &StateDistribution) -> (FxHashMap<u64, CompensatedSum>, CompensatedSum) {
    let mut active = FxHashMap::default();
    active.reserve(dist.mass.len());
    let mut halted = CompensatedSum::default();
    for (&key, &p) in &dist.mass {
        if DecoderState::unpack(key).ripple_total() == 0 {
            halted.add(p);
        } else {
            active.insert(key, CompensatedSum::from_iter([p]));
        }
    }
    (active, halted)
}

fn warn_stranded_cloud(dist: &StateDistribution, q_u: f64, epsilon: f64) {
    if q_u != 0.0 || dist.u <= dist.k {
        return;
    }
    let stranded: f64 = dist
        .mass
        .iter()
        .filter(|(&key, _)| {
            let s = DecoderState::unpack(key);
            s.cloud > 0 && s.ripple_total() > 0
        })
        .map(|(_, &p)| p)
        .sum();
    if stranded > epsilon.max(CLOUD_GUARD) {
        warn!("q_u = 0 at u = {} but states with a non-empty cloud carry mass {stranded}", dist.u);
    }
}

/// Marks an intermediate state whose served ripple has already been chosen.
const SERVED: u64 = 1 << 63;

/// Stage `u -> u - 1`, applying the independent binomial factors of the
/// transition law one dimension at a time: ripples `1..=k` in ascending
/// order, then the cloud. Ripple `h` is read before any later factor touches
/// it, and the [`SERVED`] bit records whether a lower ripple was non-empty.
fn evolve_stage(dist: &StateDistribution, n: usize, q_u: f64, epsilon: f64) -> StateDistribution {
    let u = dist.u;
    assert!(u >= 1, "cannot evolve past u = 0");
    let k = dist.k;
    warn_stranded_cloud(dist, q_u, epsilon);
    let (mut current, halted) = split_active(dist);
    let mut pruned = CompensatedSum::default();

    for h in 1..=k {
        let mut law = PmfRows::new((h as f64 / u as f64).min(1.0));
        let mut stepped: FxHashMap<u64, CompensatedSum> = FxHashMap::default();
        stepped.reserve(current.len() * 2);
        for (key, acc) in current {
            let p = acc.value();
            let served = key & SERVED;
            let state = DecoderState::unpack(key & !SERVED);
            let r = state.ripple(h);
            let (trials, shift, served) = if served == 0 && r > 0 {
                (r - 1, 1, SERVED)
            } else {
                (r, 0, served)
            };
            if trials == 0 && shift == 0 {
                stepped.entry(key | served).or_default().add(p);
                continue;
            }
            law.ensure(trials as usize);
            let mut next = state;
            for (s, &w) in law.get(trials as usize).iter().enumerate() {
                let pw = p * w;
                if pw == 0.0 {
                    continue;
                }
                if w < epsilon {
                    pruned.add(pw);
                    continue;
                }
                let leaving = s as u32 + shift;
                next.ripples[h - 1] = r - leaving;
                if h > 1 {
                    next.ripples[h - 2] = state.ripples[h - 2] + leaving;
                }
                stepped.entry(next.pack() | served).or_default().add(pw);
            }
        }
        current = stepped;
    }

    let mut law = PmfRows::new(q_u);
    let mut acc: FxHashMap<u64, CompensatedSum> = FxHashMap::default();
    acc.reserve(current.len() * 2);
    for (key, s) in current {
        let p = s.value();
        let state = DecoderState::unpack(key & !SERVED);
        let c = state.cloud as usize;
        law.ensure(c);
        let mut next = state;
        for (b, &w) in law.get(c).iter().enumerate() {
            let pw = p * w;
            if pw == 0.0 {
                continue;
            }
            if w < epsilon {
                pruned.add(pw);
                continue;
            }
            next.cloud = state.cloud - b as u32;
            next.ripples[k - 1] = state.ripples[k - 1] + b as u32;
            acc.entry(next.pack()).or_default().add(pw);
        }
    }
    finish_stage(dist, n, acc, halted, pruned, epsilon)
}

/// Stage `u -> u - 1` by enumerating the full product law of every state.
/// Slower than [`evolve_stage`]; kept as an independent route for tests.
#[cfg(test)]
pub(crate) fn evolve_stage_product(
    dist: &StateDistribution,
    n: usize,
    q_u: f64,
    epsilon: f64,
) -> StateDistribution {
    assert!(dist.u >= 1, "cannot evolve past u = 0");
    warn_stranded_cloud(dist, q_u, epsilon);
    let mut laws = StageLaws::new(dist.k, dist.u, q_u);
    let (active, halted) = split_active(dist);
    let mut acc: FxHashMap<u64, CompensatedSum> = FxHashMap::default();
    let mut pruned = CompensatedSum::default();
    for (key, p) in active {
        let state = DecoderState::unpack(key);
        let (trials, served) = laws.prepare(&state);
        for_each_transition(
            &laws,
            &state,
            &trials,
            served,
            p.value(),
            epsilon,
            &mut |_, succ, w| acc.entry(succ.pack()).or_default().add(w),
            &mut pruned,
        );
    }
    finish_stage(dist, n, acc, halted, pruned, epsilon)
}

fn finish_stage(
    dist: &StateDistribution,
    n: usize,
    acc: FxHashMap<u64, CompensatedSum>,
    halted: CompensatedSum,
    mut pruned: CompensatedSum,
    epsilon: f64,
) -> StateDistribution {
    let u = dist.u;
    let mut next = StateDistribution::empty(n, dist.k, u - 1);
    next.terminal.clone_from(&dist.terminal);
    next.pruned = dist.pruned;
    next.terminal[u].add(halted.value());
    next.mass.reserve(acc.len());
    for (key, s) in acc {
        let p = s.value();
        if p < epsilon {
            pruned.add(p);
        } else {
            next.mass.insert(key, p);
        }
    }
    next.pruned.add(pruned.value());

    if next.u == 0 {
        // Every user resolved: all remaining mass is success.
        let mut keys: Vec<u64> = next.mass.keys().copied().collect();
        keys.sort_unstable();
        let done: CompensatedSum = keys.iter().map(|k| next.mass[k]).collect();
        next.terminal[0].add(done.value());
        next.mass.clear();
    }
    next
}

/// `P_e = Σ_u (u/n) P{halt with u unresolved}` from a fully evolved
/// distribution.
pub fn packet_error_rate(dist: &StateDistribution) -> f64 {
    let n = dist.terminal.len() - 1;
    let acc: CompensatedSum = (1..=n)
        .map(|u| u as f64 / n as f64 * dist.terminal_mass(u))
        .collect();
    acc.value().clamp(0.0, 1.0)
}

/// `T = n (1 - P_e) / (k m)`.
pub fn throughput(per: f64, params: &SystemParams) -> Result<f64> {
    if params.m() == 0 {
        return Err(Error::ZeroSlots);
    }
    Ok(params.n() as f64 * (1.0 - per) / (params.k() as f64 * params.m() as f64))
}
