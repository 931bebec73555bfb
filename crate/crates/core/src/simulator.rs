//! Monte Carlo contention periods decoded by SIC with a k-MUD receiver.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`): run `i` of a
//! simulation seeded with `seed` uses `ChaCha8Rng::seed_from_u64(seed)` with
//! its stream set to `i`, so every run is reproducible on its own and results
//! do not depend on the number of worker threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{CompensatedSum, SystemParams};

/// Bipartite graph of users and the slots they transmitted in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentionGraph {
    n: usize,
    slot_users: Vec<Vec<u32>>,
    user_slots: Vec<Vec<u32>>,
}

impl ContentionGraph {
    /// Builds a graph from per-slot user lists. Users are `0..n`; duplicate
    /// entries within a slot are ignored.
    pub fn from_slots(n: usize, slots: Vec<Vec<u32>>) -> Self {
        let mut user_slots = vec![Vec::new(); n];
        let mut slot_users = Vec::with_capacity(slots.len());
        for (s, mut users) in slots.into_iter().enumerate() {
            users.sort_unstable();
            users.dedup();
            for &v in &users {
                assert!((v as usize) < n, "user {v} out of range 0..{n}");
                user_slots[v as usize].push(s as u32);
            }
            slot_users.push(users);
        }
        Self {
            n,
            slot_users,
            user_slots,
        }
    }

    pub fn users(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> usize {
        self.slot_users.len()
    }

    /// Original degree of slot `s`.
    pub fn degree(&self, s: usize) -> usize {
        self.slot_users[s].len()
    }

    pub fn slot_users(&self, s: usize) -> &[u32] {
        &self.slot_users[s]
    }

    pub fn edges(&self) -> usize {
        self.slot_users.iter().map(Vec::len).sum()
    }
}

/// Draws a contention graph: every (user, slot) edge is present
/// independently with probability `p`.
///
/// Sampled slot by slot: the degree is Binomial(n, p) and, given the degree,
/// the set of users is uniform; this is the same law as independent edges.
pub fn generate_graph<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ContentionGraph {
    let (n, m) = (params.n(), params.m());
    let degree = Binomial::new(n as u64, params.p()).expect("p lies in [0, 1]");
    let slots = (0..m)
        .map(|_| {
            let d = degree.sample(rng) as usize;
            index::sample(rng, n, d).into_iter().map(|v| v as u32).collect()
        })
        .collect();
    ContentionGraph::from_slots(n, slots)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub resolved: usize,
    pub resolved_users: Vec<bool>,
    /// `(slot, user)` in decoding order.
    pub steps: Vec<(u32, u32)>,
}

/// Slots with reduced degree `1..=k`, bucketed by reduced degree.
struct Buckets {
    lists: Vec<Vec<u32>>,
    /// Position of each slot inside its bucket; `usize::MAX` when parked.
    pos: Vec<usize>,
    k: usize,
}

impl Buckets {
    fn new(slots: usize, k: usize) -> Self {
        Self {
            lists: vec![Vec::new(); k + 1],
            pos: vec![usize::MAX; slots],
            k,
        }
    }

    fn insert(&mut self, s: u32, red: u32) {
        let red = red as usize;
        if (1..=self.k).contains(&red) {
            self.pos[s as usize] = self.lists[red].len();
            self.lists[red].push(s);
        }
    }

    fn remove(&mut self, s: u32, red: u32) {
        let red = red as usize;
        let at = self.pos[s as usize];
        if at == usize::MAX {
            return;
        }
        let list = &mut self.lists[red];
        list.swap_remove(at);
        if let Some(&moved) = list.get(at) {
            self.pos[moved as usize] = at;
        }
        self.pos[s as usize] = usize::MAX;
    }

    fn lowest(&self) -> Option<usize> {
        (1..=self.k).find(|&h| !self.lists[h].is_empty())
    }
}

/// Peels `graph` with a k-MUD receiver, one user per iteration.
///
/// Each iteration takes a slot of minimum reduced degree `h <= k` (uniform
/// among ties), resolves a uniformly chosen unresolved user in it, and
/// cancels that user from every slot it transmitted in. Stops when no slot
/// has reduced degree in `1..=k`.
pub fn sic_decode<R: Rng + ?Sized>(graph: &ContentionGraph, k: usize, rng: &mut R) -> DecodeOutcome {
    let m = graph.slots();
    let mut red: Vec<u32> = (0..m).map(|s| graph.degree(s) as u32).collect();
    let mut resolved_users = vec![false; graph.users()];
    let mut buckets = Buckets::new(m, k);
    for (s, &r) in red.iter().enumerate() {
        buckets.insert(s as u32, r);
    }
    let mut steps = Vec::new();
    let mut live = Vec::with_capacity(k);

    while let Some(h) = buckets.lowest() {
        let list = &buckets.lists[h];
        let slot = list[rng.random_range(0..list.len())];
        live.clear();
        live.extend(
            graph.slot_users[slot as usize]
                .iter()
                .copied()
                .filter(|&v| !resolved_users[v as usize]),
        );
        debug_assert_eq!(live.len(), h);
        let user = live[rng.random_range(0..live.len())];
        resolved_users[user as usize] = true;
        steps.push((slot, user));
        for &t in &graph.user_slots[user as usize] {
            let r = red[t as usize];
            buckets.remove(t, r);
            red[t as usize] = r - 1;
            buckets.insert(t, r - 1);
        }
    }
    DecodeOutcome {
        resolved: steps.len(),
        resolved_users,
        steps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub params: SystemParams,
    pub runs: usize,
    pub seed: u64,
    /// Mean unresolved fraction.
    pub per_estimate: f64,
    /// Sample standard deviation over `sqrt(runs)`; 0 for a single run.
    pub per_stderr: f64,
    pub throughput_estimate: f64,
    pub throughput_stderr: f64,
}

/// RNG for run `run` of a simulation seeded with `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

pub fn simulate(params: &SystemParams, runs: usize, seed: u64) -> Result<SimStats> {
    simulate_with(params, runs, seed, Execution::default())
}

pub fn simulate_with(
    params: &SystemParams,
    runs: usize,
    seed: u64,
    exec: Execution,
) -> Result<SimStats> {
    if runs == 0 {
        return Err(Error::InvalidParams("runs must be at least 1".into()));
    }
    let n = params.n();
    let unresolved = exec.map_indexed(runs, |run| {
        let mut rng = run_rng(seed, run as u64);
        let graph = generate_graph(params, &mut rng);
        let out = sic_decode(&graph, params.k(), &mut rng);
        (n - out.resolved) as f64 / n as f64
    });

    let mean = unresolved.iter().copied().collect::<CompensatedSum>().value() / runs as f64;
    let stderr = if runs > 1 {
        let ss: CompensatedSum = unresolved.iter().map(|x| (x - mean) * (x - mean)).collect();
        (ss.value() / (runs - 1) as f64).sqrt() / (runs as f64).sqrt()
    } else {
        0.0
    };
    let scale = if params.m() == 0 {
        0.0
    } else {
        n as f64 / (params.k() as f64 * params.m() as f64)
    };
    Ok(SimStats {
        params: *params,
        runs,
        seed,
        per_estimate: mean,
        per_stderr: stderr,
        throughput_estimate: scale * (1.0 - mean),
        throughput_stderr: scale * stderr,
    })
}
