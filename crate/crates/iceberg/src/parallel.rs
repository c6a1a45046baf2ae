//! Shot sharding with deterministic per-shard seeds.
//!
//! Shard boundaries depend only on the shot count, so results are identical with
//! or without the `parallel` feature and for any worker count.

/// Shots per shard.
pub const SHARD: u64 = 1 << 14;

/// SplitMix64 finalizer over `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn shard_sizes(shots: u64) -> Vec<(usize, u64)> {
    let full = shots / SHARD;
    let mut v: Vec<(usize, u64)> = (0..full as usize).map(|i| (i, SHARD)).collect();
    if !shots.is_multiple_of(SHARD) {
        v.push((full as usize, shots % SHARD));
    }
    v
}

/// Maps `f` over shards, in parallel when the feature is enabled; output order
/// follows shard order.
pub fn map_shards<T, F>(shards: Vec<(usize, u64)>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn((usize, u64)) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        shards.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        shards.into_iter().map(f).collect()
    }
}

/// Runs `f` on a dedicated pool of `workers` threads when the feature is enabled.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Some(w) = workers {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = workers;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shards_cover_all_shots() {
        for shots in [0u64, 1, SHARD, SHARD + 5, 10 * SHARD - 1] {
            assert_eq!(shard_sizes(shots).iter().map(|s| s.1).sum::<u64>(), shots);
        }
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }
}
