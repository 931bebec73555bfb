//! System parameters, the slot-degree distribution, and the combinatorics
//! kernel shared by the analysis, the simulator and the oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `a` for which `C(a, a/2)` is finite in `f64`.
const MAX_FINITE_ROW: usize = 1029;

/// Contention setup: `n` users, `m` slots, receiver resolves collisions of
/// size `<= k`, per-slot access probability `p = beta / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    n: usize,
    m: usize,
    k: usize,
    beta: f64,
}

impl SystemParams {
    pub fn new(n: usize, m: usize, k: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if beta > n as f64 {
            return Err(Error::InvalidParams(format!(
                "beta = {beta} exceeds n = {n} (access probability above 1)"
            )));
        }
        Ok(Self { n, m, k, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Per-slot transmit probability `beta / n`, clamped to 1 against rounding.
    pub fn p(&self) -> f64 {
        (self.beta / self.n as f64).min(1.0)
    }

    /// Same users, detector and access scale over a different number of slots.
    pub fn with_m(&self, m: usize) -> Self {
        Self { m, ..*self }
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.n, self.m, k, self.beta)
    }
}

/// Probability `omega[i]` that a slot has degree `i`, for `i = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    omega: Vec<f64>,
}

impl DegreeDistribution {
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn get(&self, i: usize) -> f64 {
        self.omega.get(i).copied().unwrap_or(0.0)
    }

    /// Largest degree represented, i.e. `n`.
    pub fn max_degree(&self) -> usize {
        self.omega.len() - 1
    }

    /// Probability that a slot has degree at most `k`.
    pub fn cdf(&self, k: usize) -> f64 {
        let mut acc = CompensatedSum::default();
        for &w in self.omega.iter().take(k + 1) {
            acc.add(w);
        }
        acc.value()
    }
}

/// Binomial(n, p) law of the slot degree.
pub fn degree_distribution(params: &SystemParams) -> DegreeDistribution {
    DegreeDistribution {
        omega: binomial_pmf(params.n(), params.p()),
    }
}

/// Binomial(`trials`, `p`) pmf over `0..=trials`, evaluated term by term in
/// log domain.
pub fn binomial_pmf(trials: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; trials + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[trials] = 1.0;
        return pmf;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    for (i, slot) in pmf.iter_mut().enumerate() {
        let ln = ln_binom(trials as i64, i as i64) + i as f64 * ln_p + (trials - i) as f64 * ln_q;
        *slot = ln.exp();
    }
    pmf
}

/// Binomial coefficient `C(a, b)` as a real number.
///
/// Out-of-support arguments (`b < 0`, `b > a`, `a < 0`) give 0. Rows up to
/// `a = 64` are computed exactly in integer arithmetic; larger rows use a
/// running product, and rows past `f64` range fall back to the log domain
/// (yielding `inf` once the value itself overflows).
pub fn binom(a: i64, b: i64) -> f64 {
    if a < 0 || b < 0 || b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    if a <= 64 {
        let mut acc: u128 = 1;
        for i in 0..b as u128 {
            acc = acc * (a as u128 - i) / (i + 1);
        }
        return acc as f64;
    }
    if a as usize <= MAX_FINITE_ROW {
        return binom_product(a as u64, b as u64);
    }
    ln_binom(a, b).exp()
}

fn binom_product(a: u64, b: u64) -> f64 {
    let mut acc = 1.0f64;
    let base = (a - b) as f64;
    for i in 1..=b {
        acc = acc * (base + i as f64) / i as f64;
    }
    acc
}

/// Natural log of `C(a, b)`; `-inf` outside the support.
pub fn ln_binom(a: i64, b: i64) -> f64 {
    if a < 0 || b < 0 || b > a {
        return f64::NEG_INFINITY;
    }
    let b = b.min(a - b);
    if a as usize <= MAX_FINITE_ROW {
        return binom(a, b).ln();
    }
    ln_factorial(a as u64) - ln_factorial(b as u64) - ln_factorial((a - b) as u64)
}

/// `ln(x!)`: compensated running sum for small `x`, Stirling series beyond.
pub fn ln_factorial(x: u64) -> f64 {
    if x < 2 {
        return 0.0;
    }
    if x <= 4096 {
        let mut acc = CompensatedSum::default();
        for i in 2..=x {
            acc.add((i as f64).ln());
        }
        return acc.value();
    }
    let x = x as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Table of `ln C(a, b)` for all `0 <= b <= a <= max_a`.
///
/// Rows that fit in `f64` come from Pascal's rule (every step adds two
/// positive numbers, so the relative error stays within `a` ulps) and are
/// logged once; wider rows use log-factorials.
#[derive(Debug, Clone)]
pub struct LnBinomialTable {
    max_a: usize,
    rows: Vec<Vec<f64>>,
    ln_fact: Vec<f64>,
}

impl LnBinomialTable {
    pub fn new(max_a: usize) -> Self {
        let pascal_max = max_a.min(MAX_FINITE_ROW);
        let mut rows = Vec::with_capacity(pascal_max + 1);
        let mut row = vec![1.0f64];
        for a in 0..=pascal_max {
            if a > 0 {
                let mut next = vec![1.0f64; a + 1];
                for b in 1..a {
                    next[b] = row[b - 1] + row[b];
                }
                row = next;
            }
            rows.push(row.iter().map(|v| v.ln()).collect());
        }
        let ln_fact = if max_a > pascal_max {
            let mut acc = CompensatedSum::default();
            let mut out = Vec::with_capacity(max_a + 1);
            out.push(0.0);
            for i in 1..=max_a {
                acc.add((i as f64).ln());
                out.push(acc.value());
            }
            out
        } else {
            Vec::new()
        };
        Self { max_a, rows, ln_fact }
    }

    pub fn max_a(&self) -> usize {
        self.max_a
    }

    /// `ln C(a, b)`, `-inf` when out of support. Panics if `a > max_a`.
    #[inline]
    pub fn ln(&self, a: i64, b: i64) -> f64 {
        if a < 0 || b < 0 || b > a {
            return f64::NEG_INFINITY;
        }
        let (a, b) = (a as usize, b as usize);
        if a < self.rows.len() {
            self.rows[a][b]
        } else {
            assert!(a <= self.max_a, "binomial row {a} beyond table size {}", self.max_a);
            self.ln_fact[a] - self.ln_fact[b] - self.ln_fact[a - b]
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
