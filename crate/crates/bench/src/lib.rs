//! Seeded inputs shared by the benchmarks.

use cayley_affine::attack::subset_sum::SubsetSumInstance;
use cayley_affine::{hash_h, BitString, HashOutput, Modulus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn random_message(len: usize, seed: u64) -> BitString {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen::<bool>()).collect()
}

/// Digest of a random balanced message of `4 * n_min` bits.
pub fn desk_target(p: &Modulus, seed: u64) -> (HashOutput, usize) {
    let len = 4 * SubsetSumInstance::dense_threshold(p);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let m = cayley_affine::forge::random_balanced(len, &mut rng);
    (hash_h(&m, p), len)
}
