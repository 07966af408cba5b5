//! Stable seed derivation.
//!
//! Every random stream in an experiment is keyed by a tuple of integers and
//! labels folded through SplitMix64. Labels are hashed with 64-bit FNV-1a.
//! Both functions are fixed forever: changing them changes every output file.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random source used everywhere in the crate.
pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a of a label.
pub fn label_hash(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into a single seed, starting from `base`.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from(derive_seed(base, parts))`.
pub fn sub_rng(base: u64, parts: &[u64]) -> Rng {
    rng_from(derive_seed(base, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn derivation_is_stable() {
        // Frozen values: any change here changes every persisted output.
        assert_eq!(label_hash(""), FNV_OFFSET);
        assert_eq!(label_hash("a"), 0xaf63_dc4c_8601_ec8c);
        let s = derive_seed(42, &[1, 2, 3]);
        assert_eq!(s, derive_seed(42, &[1, 2, 3]));
        assert_ne!(s, derive_seed(42, &[1, 3, 2]));
        assert_ne!(s, derive_seed(43, &[1, 2, 3]));
    }

    #[test]
    fn streams_reproduce() {
        let mut a = sub_rng(7, &[9]);
        let mut b = sub_rng(7, &[9]);
        for _ in 0..10 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }
}
