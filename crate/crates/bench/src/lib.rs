//! Synthetic inputs shared by the benchmarks.

use imgclust_core::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A noisy image at the benchmark corpus resolution (256 rows x 384 columns).
pub fn corpus_sized_image(seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..256 * 384).map(|_| rng.random::<[u8; 3]>()).collect();
    RgbImage::new(256, 384, pixels).expect("fixed dimensions")
}

/// `n` rows of dimension `dim` scattered around `centers` cluster centers.
pub fn clustered_rows(n: usize, dim: usize, centers: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..255.0)).collect())
        .collect();
    (0..n)
        .map(|i| {
            means[i % centers]
                .iter()
                .map(|m| m + rng.random_range(-20.0..20.0))
                .collect()
        })
        .collect()
}
