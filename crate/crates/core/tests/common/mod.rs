#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

/// C(a, b) by a plain running product; 0 outside the support.
pub fn choose(a: i64, b: i64) -> f64 {
    if b < 0 || a < 0 || b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
}

pub fn binomial_row(trials: usize, p: f64) -> Vec<f64> {
    (0..=trials)
        .map(|i| choose(trials as i64, i as i64) * p.powi(i as i32) * (1.0 - p).powi((trials - i) as i32))
        .collect()
}

/// Packet error rate of the collision channel (k = 1), written directly on a
/// dense (cloud, ripple) grid with no pruning.
pub fn collision_channel_per(n: usize, m: usize, beta: f64) -> f64 {
    let p = beta / n as f64;
    let omega = binomial_row(n, p);
    let (w0, w1) = (omega[0], omega[1]);
    let wc = (1.0 - w0 - w1).max(0.0);

    // Initial law: (empty, ripple, cloud) counts are multinomial.
    let mut dist = vec![vec![0.0; m + 1]; m + 1];
    for c in 0..=m {
        for r in 0..=(m - c) {
            let e = m - c - r;
            let coef = choose(m as i64, c as i64) * choose((m - c) as i64, r as i64);
            dist[c][r] = coef * wc.powi(c as i32) * w1.powi(r as i32) * w0.powi(e as i32);
        }
    }

    let mut halted = vec![0.0; n + 1];
    for u in (1..=n).rev() {
        let q = collision_q(n, u, &omega);
        let mut next = vec![vec![0.0; m + 1]; m + 1];
        for c in 0..=m {
            for r in 0..=(m - c) {
                let w = dist[c][r];
                if w == 0.0 {
                    continue;
                }
                if r == 0 {
                    halted[u] += w;
                    continue;
                }
                let cloud = binomial_row(c, q);
                let ripple = binomial_row(r - 1, 1.0 / u as f64);
                for (b, pb) in cloud.iter().enumerate() {
                    for (s, ps) in ripple.iter().enumerate() {
                        let a = s + 1;
                        next[c - b][r - a + b] += w * pb * ps;
                    }
                }
            }
        }
        dist = next;
    }
    (1..=n).map(|u| u as f64 / n as f64 * halted[u]).sum()
}

/// Probability that a slot with reduced degree >= 2 drops to reduced degree
/// 1 when one of `u` unresolved users is resolved.
fn collision_q(n: usize, u: usize, omega: &[f64]) -> f64 {
    let (n, u) = (n as i64, u as i64);
    let mut num = 0.0;
    let mut den = 0.0;
    for d in 2..=n {
        let w = omega[d as usize];
        // Exactly two unresolved neighbours, one of them the resolved user.
        let two = choose(u, 2) * choose(n - u, d - 2) / choose(n, d);
        num += w * two * 2.0 / u as f64;
        for h in 2..=d.min(u) {
            den += w * choose(u, h) * choose(n - u, d - h) / choose(n, d);
        }
    }
    if den <= 1e-15 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// Exact stage occupancies of the randomized one-user-per-step decoder,
/// found by enumerating every incidence pattern and every decoder choice.
///
/// Result `[u]` maps `(cloud, r1, .., rk)` to the probability the decoder
/// reaches stage `u` in that state (halted states included at the stage they
/// halt).
pub fn enumerate_stage_occupancy(n: usize, m: usize, k: usize, p: f64) -> Vec<BTreeMap<Vec<u32>, f64>> {
    let cells = n * m;
    assert!(cells <= 20);
    let mut stages = vec![BTreeMap::new(); n + 1];
    for pattern in 0u32..(1 << cells) {
        let edges = pattern.count_ones() as i32;
        let weight = p.powi(edges) * (1.0 - p).powi(cells as i32 - edges);
        if weight == 0.0 {
            continue;
        }
        let slots: Vec<u32> = (0..m).map(|s| (pattern >> (s * n)) & ((1 << n) - 1)).collect();
        walk(&slots, n, k, 0, weight, &mut stages);
    }
    stages
}

fn state_of(slots: &[u32], k: usize, resolved: u32) -> Vec<u32> {
    let mut key = vec![0u32; k + 1];
    for &s in slots {
        let red = (s & !resolved).count_ones() as usize;
        if red > k {
            key[0] += 1;
        } else if red > 0 {
            key[red] += 1;
        }
    }
    key
}

fn walk(slots: &[u32], n: usize, k: usize, resolved: u32, weight: f64, stages: &mut [BTreeMap<Vec<u32>, f64>]) {
    let u = n - resolved.count_ones() as usize;
    let key = state_of(slots, k, resolved);
    *stages[u].entry(key.clone()).or_insert(0.0) += weight;
    let Some(h) = (1..=k).find(|&h| key[h] > 0) else {
        return;
    };
    let candidates: Vec<u32> = slots
        .iter()
        .copied()
        .filter(|&s| (s & !resolved).count_ones() as usize == h)
        .collect();
    let share = weight / candidates.len() as f64 / h as f64;
    for s in candidates {
        let live = s & !resolved;
        for v in 0..n {
            if live & (1 << v) != 0 {
                walk(slots, n, k, resolved | (1 << v), share, stages);
            }
        }
    }
}
