//! Shared instance builders for the benchmarks.

use qpsi_core::harness::SessionConfig;
use qpsi_core::hqpsi::{PrivateSet, UniversalSet};

/// A session over a universe of `n` elements with interleaved half-full
/// private sets.
pub fn session_of_size(n: usize, decoys: usize, seed: u64) -> SessionConfig {
    let elements: Vec<u64> = (0..n as u64).map(|i| i * 3 + 1).collect();
    let universe = UniversalSet::new(elements.clone()).expect("distinct by construction");
    let set_a: PrivateSet = elements.iter().copied().step_by(2).collect();
    let set_b: PrivateSet = elements.iter().copied().skip(1).step_by(2).chain(set_a.iter().take(n / 4)).collect();
    let mut cfg = SessionConfig::new(universe, set_a, set_b, seed);
    cfg.decoys_per_hop = decoys;
    cfg
}
