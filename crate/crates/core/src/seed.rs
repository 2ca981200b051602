//! Deterministic seed derivation.
//!
//! Per-run seeds are `mix(mix(master ^ key_hash) ^ run)` where `mix` is the
//! SplitMix64 finaliser and `key_hash` is 64-bit FNV-1a over a canonical cell
//! key. Seeds therefore depend on what a cell *is*, not on where it sits in
//! the grid, so extending a sweep never changes the streams of cells that
//! were already there.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stream tag for network instance generation.
pub const NETWORK_STREAM: u64 = 0x6e65_7477_6f72_6b73;

/// SplitMix64 output function.
pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |hash, byte| {
        (hash ^ byte as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for run `run_index` of the cell identified by `cell_key`.
pub fn run_seed(master: u64, cell_key: &str, run_index: u64) -> u64 {
    mix(mix(master ^ fnv1a(cell_key)) ^ run_index)
}

/// Seed for a sub-stream (e.g. network generation) of a run seed.
pub fn substream(seed: u64, stream: u64) -> u64 {
    mix(seed ^ stream)
}
