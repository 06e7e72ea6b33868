use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform sample without replacement of `min(n, len)` items.
///
/// Shuffles a copy with a generator seeded from `seed` and takes the
/// first `n`, so the result depends only on `seed` and the input order.
pub fn sample_entities<T: Clone>(candidates: &[T], n: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = candidates.to_vec();
    pool.shuffle(&mut rng);
    pool.truncate(n);
    pool
}
