//! Shared test helpers: straight-from-the-formula oracles and synthetic corpora.
//!
//! The oracles here deliberately avoid the library's code paths: they index
//! pixels by (row, col), use `powi`/`powf` instead of the library's
//! incremental products and `cbrt`, and enumerate partitions exhaustively.

#![allow(dead_code)]

use std::path::Path;

use imgclust_core::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mean, SD and signed-cube-root skewness of a list, computed directly.
pub fn oracle_moments(values: &[f64], fallback: f64) -> [f64; 3] {
    if values.is_empty() {
        return [fallback, 0.0, 0.0];
    }
    let n = values.len() as f64;
    let mut total = 0.0;
    for v in values {
        total += *v;
    }
    let e = total / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    for v in values {
        m2 += (v - e).powi(2);
        m3 += (v - e).powi(3);
    }
    let m3 = m3 / n;
    let skew = if m3 < 0.0 {
        -(-m3).powf(1.0 / 3.0)
    } else {
        m3.powf(1.0 / 3.0)
    };
    [e, (m2 / n).sqrt(), skew]
}

fn channel(image: &RgbImage, k: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..image.height() {
        for j in 0..image.width() {
            out.push(f64::from(image.pixel(i, j)[k]));
        }
    }
    out
}

pub fn oracle_color_moments(image: &RgbImage) -> Vec<f64> {
    (0..3)
        .flat_map(|k| oracle_moments(&channel(image, k), 0.0))
        .collect()
}

pub fn oracle_btc(image: &RgbImage) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..3 {
        let plane = channel(image, k);
        let avg = plane.iter().sum::<f64>() / plane.len() as f64;
        let above: Vec<f64> = plane.iter().copied().filter(|&v| v > avg).collect();
        let rest: Vec<f64> = plane.iter().copied().filter(|&v| v <= avg).collect();
        out.extend(oracle_moments(&above, avg));
        out.extend(oracle_moments(&rest, avg));
    }
    out
}

pub fn random_image(rng: &mut ChaCha8Rng, max_side: usize) -> RgbImage {
    let h = rng.random_range(1..=max_side);
    let w = rng.random_range(1..=max_side);
    let pixels = (0..h * w).map(|_| rng.random::<[u8; 3]>()).collect();
    RgbImage::new(h, w, pixels).unwrap()
}

/// All set partitions of `0..n` into exactly `k` non-empty blocks, as
/// restricted growth strings.
pub fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(
        i: usize,
        n: usize,
        k: usize,
        used: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == n {
            if used == k {
                out.push(cur.clone());
            }
            return;
        }
        if k - used > n - i {
            return;
        }
        for b in 0..=used.min(k - 1) {
            cur.push(b);
            rec(i + 1, n, k, used.max(b + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Centroids (block means) and SSE of a labeling.
pub fn partition_cost(points: &[Vec<f64>], labels: &[usize], k: usize) -> (Vec<Vec<f64>>, f64) {
    let dim = points[0].len();
    let mut centroids = vec![vec![0.0; dim]; k];
    let mut counts = vec![0.0; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1.0;
        for d in 0..dim {
            centroids[l][d] += p[d];
        }
    }
    for (c, n) in centroids.iter_mut().zip(&counts) {
        for x in c.iter_mut() {
            *x /= n;
        }
    }
    let mut sse = 0.0;
    for (p, &l) in points.iter().zip(labels) {
        for d in 0..dim {
            sse += (p[d] - centroids[l][d]).powi(2);
        }
    }
    (centroids, sse)
}

/// Brute-force minimum SSE over all partitions into exactly `k` blocks.
pub fn optimal_partition(points: &[Vec<f64>], k: usize) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    partitions(points.len(), k)
        .into_iter()
        .map(|labels| {
            let (c, sse) = partition_cost(points, &labels, k);
            (labels, c, sse)
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap()
}

/// Write `image` as a binary PPM.
pub fn write_ppm(path: &Path, image: &RgbImage) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, image.to_ppm()).unwrap();
}

/// Ten pairwise distinct colors.
pub const CLASS_COLORS: [[u8; 3]; 10] = [
    [200, 30, 30],
    [30, 200, 30],
    [30, 30, 200],
    [220, 220, 40],
    [40, 220, 220],
    [220, 40, 220],
    [10, 10, 10],
    [245, 245, 245],
    [128, 64, 0],
    [90, 140, 170],
];

/// `classes` directories of `per_class` constant-color images each.
pub fn constant_corpus(root: &Path, classes: usize, per_class: usize) {
    for (c, color) in CLASS_COLORS.iter().enumerate().take(classes) {
        for i in 0..per_class {
            let img = RgbImage::filled(8, 12, *color).unwrap();
            write_ppm(&root.join(format!("class{c:02}/{i}.ppm")), &img);
        }
    }
}

/// Noisy images around per-class base colors.
pub fn noisy_corpus(root: &Path, classes: usize, per_class: usize, seed: u64) {
    let mut rng = rng(seed);
    for (c, base) in CLASS_COLORS.iter().enumerate().take(classes) {
        for i in 0..per_class {
            let (h, w) = (rng.random_range(6..=16), rng.random_range(6..=16));
            let pixels = (0..h * w)
                .map(|_| {
                    let mut px = *base;
                    for ch in &mut px {
                        *ch = (i32::from(*ch) + rng.random_range(-60..=60)).clamp(0, 255) as u8;
                    }
                    px
                })
                .collect();
            let img = RgbImage::new(h, w, pixels).unwrap();
            write_ppm(&root.join(format!("class{c:02}/{i:03}.ppm")), &img);
        }
    }
}
