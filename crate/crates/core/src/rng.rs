//! Deterministic seed derivation.
//!
//! Every stochastic component draws from its own ChaCha stream whose seed is
//! derived from `(master seed, domain, index)`. Replicas, channels, and scan
//! points therefore get independent streams whose contents do not depend on
//! execution order.

use rand::SeedableRng;

/// RNG used throughout the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Domain tags keeping unrelated consumers of the same master seed apart.
pub mod domain {
    pub const EMISSION: u64 = 0x01;
    pub const THINNING: u64 = 0x02;
    pub const DARK: u64 = 0x03;
    pub const COUNTS: u64 = 0x04;
    pub const BOOTSTRAP: u64 = 0x05;
    pub const PHASE_SCAN: u64 = 0x06;
    pub const WITNESS: u64 = 0x07;
    pub const STABILITY: u64 = 0x08;
    pub const DRIFT: u64 = 0x09;
    pub const BENCH: u64 = 0x0A;
    pub const TOMO: u64 = 0x0B;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed, a domain tag, and an index.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(master) ^ domain) ^ index)
}

/// ChaCha stream for `(master, domain, index)`.
pub fn rng_for(master: u64, domain: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, domain, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(42, domain::EMISSION, 0);
        let b = derive_seed(42, domain::EMISSION, 1);
        let c = derive_seed(42, domain::DARK, 0);
        assert_eq!(a, derive_seed(42, domain::EMISSION, 0));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }
}
