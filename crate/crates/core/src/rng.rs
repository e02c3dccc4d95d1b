//! Deterministic random streams.
//!
//! Every stochastic draw comes from a small PCG stream whose seed is a hash of
//! `(master_seed, purpose, entity, index...)`. Streams are independent of each
//! other, so changing how many draws one consumer makes (for instance the
//! number of physics substeps) never shifts the values seen by another.
//!
//! The seed hash is the SplitMix64 finalizer folded over the key parts. The
//! generator is `Pcg64Mcg`, whose output is stable across `rand_pcg` releases.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type StreamRng = Pcg64Mcg;

/// Stream purposes. Distinct tags keep unrelated streams apart.
pub mod purpose {
    pub const PLACEMENT: u64 = 0x01;
    pub const SENSOR: u64 = 0x02;
    pub const ACTUATOR: u64 = 0x03;
    pub const CONTROLLER: u64 = 0x04;
    pub const WHEEL_BIAS: u64 = 0x05;
    pub const RACE_SEED: u64 = 0x10;
    pub const RACE_SAMPLE: u64 = 0x11;
    pub const ES_SEED: u64 = 0x12;
    pub const ES_VARIATION: u64 = 0x13;
    pub const DESIGN_SEED: u64 = 0x20;
    pub const EVAL_SEED: u64 = 0x21;
    pub const BASELINE: u64 = 0x22;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a master seed together with an ordered list of key parts.
#[inline]
pub fn derive(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix64(master), |acc, &p| mix64(acc ^ mix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}

#[inline]
pub fn stream(master: u64, parts: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive(master, parts))
}
