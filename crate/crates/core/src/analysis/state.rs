use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::model::CompensatedSum;

/// Largest detector order the packed state key supports.
pub const MAX_K: usize = 3;

/// Bits per packed component.
const COMPONENT_BITS: u32 = 16;
const COMPONENT_MASK: u64 = (1 << COMPONENT_BITS) - 1;

/// The top bit of a packed key is reserved, so the cloud count gets 15 bits.
pub const MAX_SLOTS: usize = (COMPONENT_MASK >> 1) as usize;

/// Cloud and ripple cardinalities `(c, r^(k), …, r^(1))` at one decoding step.
///
/// `ripples[h - 1]` holds `r^(h)`; entries above `k` stay zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct DecoderState {
    pub cloud: u32,
    pub ripples: [u32; MAX_K],
}

impl DecoderState {
    /// `ripples` is ordered `r^(1), r^(2), …`.
    pub fn new(cloud: u32, ripples: &[u32]) -> Self {
        assert!(ripples.len() <= MAX_K, "at most {MAX_K} ripples supported");
        let mut r = [0; MAX_K];
        r[..ripples.len()].copy_from_slice(ripples);
        Self { cloud, ripples: r }
    }

    /// `r^(h)` for `h >= 1`.
    #[inline]
    pub fn ripple(&self, h: usize) -> u32 {
        self.ripples[h - 1]
    }

    pub fn ripple_total(&self) -> u32 {
        self.ripples.iter().sum()
    }

    /// Index `h` of the lowest non-empty ripple; the decoder serves it next.
    pub fn min_nonempty_ripple(&self) -> Option<usize> {
        self.ripples.iter().position(|&r| r > 0).map(|i| i + 1)
    }

    pub fn occupied_slots(&self) -> u32 {
        self.cloud + self.ripple_total()
    }

    #[inline]
    pub(crate) fn pack(&self) -> u64 {
        let mut key = self.cloud as u64;
        for &r in &self.ripples {
            key = (key << COMPONENT_BITS) | r as u64;
        }
        key
    }

    #[inline]
    pub(crate) fn unpack(mut key: u64) -> Self {
        let mut ripples = [0; MAX_K];
        for r in ripples.iter_mut() {
            *r = (key & COMPONENT_MASK) as u32;
            key >>= COMPONENT_BITS;
        }
        ripples.reverse();
        Self {
            cloud: (key & COMPONENT_MASK) as u32,
            ripples,
        }
    }
}

/// Slots moving between sets when one user is resolved: `b` leave the cloud
/// for ripple `k`, `a[h - 1]` leave ripple `h` (for ripple 1: leave the graph).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct TransitionDelta {
    pub b: u32,
    pub a: [u32; MAX_K],
}

impl TransitionDelta {
    /// Successor of `state` under this delta, or `None` if a component would
    /// go negative.
    pub fn apply(&self, state: &DecoderState, k: usize) -> Option<DecoderState> {
        let mut next = DecoderState {
            cloud: state.cloud.checked_sub(self.b)?,
            ripples: [0; MAX_K],
        };
        for h in 1..=k {
            let incoming = if h == k { self.b } else { self.a[h] };
            next.ripples[h - 1] = (state.ripples[h - 1] + incoming).checked_sub(self.a[h - 1])?;
        }
        Some(next)
    }
}

/// Probability law over decoder states while `u` users are unresolved, plus
/// the mass that already halted, succeeded, or was pruned.
#[derive(Debug, Clone)]
pub struct StateDistribution {
    pub(crate) k: usize,
    pub(crate) u: usize,
    pub(crate) mass: FxHashMap<u64, f64>,
    /// Index `u'`: probability the decoder halted with `u'` users unresolved.
    /// Index 0 is the success mass.
    pub(crate) terminal: Vec<CompensatedSum>,
    pub(crate) pruned: CompensatedSum,
}

impl StateDistribution {
    pub(crate) fn empty(n: usize, k: usize, u: usize) -> Self {
        Self {
            k,
            u,
            mass: FxHashMap::default(),
            terminal: vec![CompensatedSum::default(); n + 1],
            pruned: CompensatedSum::default(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Unresolved users at this stage.
    pub fn u(&self) -> usize {
        self.u
    }

    /// Number of states carrying mass.
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn probability(&self, state: &DecoderState) -> f64 {
        self.mass.get(&state.pack()).copied().unwrap_or(0.0)
    }

    /// States and probabilities in ascending packed-key order.
    pub fn states(&self) -> Vec<(DecoderState, f64)> {
        let mut out: Vec<(u64, f64)> = self.mass.iter().map(|(&k, &p)| (k, p)).collect();
        out.sort_unstable_by_key(|e| e.0);
        out.into_iter().map(|(k, p)| (DecoderState::unpack(k), p)).collect()
    }

    pub fn active_mass(&self) -> f64 {
        let mut keys: Vec<&u64> = self.mass.keys().collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| self.mass[k]).collect::<CompensatedSum>().value()
    }

    /// Probability that decoding halted with exactly `u` users unresolved
    /// (`u >= 1`); `terminal_mass(0)` is the success mass.
    pub fn terminal_mass(&self, u: usize) -> f64 {
        self.terminal.get(u).map_or(0.0, |s| s.value())
    }

    pub fn success_mass(&self) -> f64 {
        self.terminal_mass(0)
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned.value()
    }

    /// Active + terminal + success + pruned; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        let mut acc: CompensatedSum = self.terminal.iter().map(|s| s.value()).collect();
        acc.add(self.active_mass());
        acc.add(self.pruned_mass());
        acc.value()
    }
}
