//! Exact packet error rate for tiny instances by enumerating every
//! user × slot incidence pattern.
//!
//! Each pattern is decoded with the peeling closure: resolve every user of any
//! slot whose reduced degree is at most `k`, until nothing changes. The
//! closure is order-independent, so it yields the same resolved set as the
//! randomized one-user-at-a-time decoder without any averaging.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{CompensatedSum, SystemParams};

/// Largest `n * m` accepted (2^24 patterns).
pub const MAX_ORACLE_CELLS: usize = 24;

const CHUNK_BITS: u32 = 12;

/// Resolved-user bitmask after peeling `slots` (one user bitmask per slot).
pub fn peel_closure(slots: &[u32], k: usize) -> u32 {
    let mut resolved = 0u32;
    loop {
        let mut changed = false;
        for &mask in slots {
            let live = mask & !resolved;
            if live != 0 && live.count_ones() as usize <= k {
                resolved |= live;
                changed = true;
            }
        }
        if !changed {
            return resolved;
        }
    }
}

pub fn exact_per(params: &SystemParams) -> Result<f64> {
    exact_per_with(params, Execution::default())
}

pub fn exact_per_with(params: &SystemParams, exec: Execution) -> Result<f64> {
    let (n, m, k) = (params.n(), params.m(), params.k());
    let cells = n * m;
    if cells > MAX_ORACLE_CELLS {
        return Err(Error::OracleBudget {
            nm: cells,
            max: MAX_ORACLE_CELLS,
        });
    }
    if m == 0 {
        return Ok(1.0);
    }

    // unresolved[e]: total unresolved users over all patterns with e edges.
    let total_bits = cells as u32;
    let chunk_bits = CHUNK_BITS.min(total_bits);
    let chunks = 1usize << (total_bits - chunk_bits);
    let partials = exec.map_indexed(chunks, |chunk| {
        let mut unresolved = vec![0u64; cells + 1];
        let mut slots = vec![0u32; m];
        let user_mask = (1u32 << n) - 1;
        let base = (chunk as u64) << chunk_bits;
        for low in 0..(1u64 << chunk_bits) {
            let pattern = base | low;
            for (s, slot) in slots.iter_mut().enumerate() {
                *slot = (pattern >> (s * n)) as u32 & user_mask;
            }
            let resolved = peel_closure(&slots, k);
            unresolved[pattern.count_ones() as usize] += (n - resolved.count_ones() as usize) as u64;
        }
        unresolved
    });
    let mut unresolved = vec![0u64; cells + 1];
    for part in partials {
        for (acc, v) in unresolved.iter_mut().zip(part) {
            *acc += v;
        }
    }

    let p = params.p();
    let mut acc = CompensatedSum::default();
    for (edges, &count) in unresolved.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let weight = p.powi(edges as i32) * (1.0 - p).powi((cells - edges) as i32);
        acc.add(count as f64 * weight);
    }
    Ok((acc.value() / n as f64).clamp(0.0, 1.0))
}
