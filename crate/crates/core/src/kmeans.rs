//! Lloyd-style k-means with seeded initialization.
//!
//! Assignment uses squared Euclidean distance with ties going to the lowest
//! centroid index. Centroids are recomputed as member means accumulated in
//! row order, so results are bit-identical whatever the thread count.
//! Iteration stops once a pass moves no row, or after `max_iterations`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row count above which the assignment step fans out over rayon.
const PARALLEL_ROWS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Init {
    #[default]
    KMeansPlusPlus,
    RandomPoints,
}

impl Init {
    pub fn as_str(self) -> &'static str {
        match self {
            Init::KMeansPlusPlus => "kmeanspp",
            Init::RandomPoints => "random_points",
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeanspp" => Ok(Init::KMeansPlusPlus),
            "random_points" => Ok(Init::RandomPoints),
            other => Err(Error::Input(format!(
                "unknown init {other:?} (expected kmeanspp or random_points)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub init: Init,
    pub max_iterations: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            init: Init::default(),
            max_iterations: 100,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Within-cluster SSE after the initial assignment and after every
    /// subsequent update and assignment step. Non-increasing.
    pub sse_trace: Vec<f64>,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Within-cluster SSE of the final assignment against the final centroids.
    pub fn sse<R: AsRef<[f64]>>(&self, rows: &[R]) -> f64 {
        within_sse(rows, &self.centroids, &self.assignments)
    }

    /// Member count of every cluster.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Index of the centroid closest to `point`; exact ties resolve to the lowest index.
pub fn nearest_centroid<C: AsRef<[f64]>>(point: &[f64], centroids: &[C]) -> Result<usize> {
    if centroids.is_empty() {
        return Err(Error::Input("no centroids".into()));
    }
    if let Some((j, c)) = centroids
        .iter()
        .enumerate()
        .find(|(_, c)| c.as_ref().len() != point.len())
    {
        return Err(Error::Input(format!(
            "centroid {j} has dimension {}, point has {}",
            c.as_ref().len(),
            point.len()
        )));
    }
    Ok(nearest_unchecked(point, centroids).0)
}

fn nearest_unchecked<C: AsRef<[f64]>>(point: &[f64], centroids: &[C]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(point, c.as_ref());
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Sum over rows of squared distance to the assigned centroid.
pub fn within_sse<R: AsRef<[f64]>, C: AsRef<[f64]>>(
    rows: &[R],
    centroids: &[C],
    assignments: &[usize],
) -> f64 {
    rows.iter()
        .zip(assignments)
        .map(|(r, &a)| squared_distance(r.as_ref(), centroids[a].as_ref()))
        .sum()
}

fn validate<R: AsRef<[f64]>>(rows: &[R], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    if rows.is_empty() {
        return Err(Error::Input("no rows to cluster".into()));
    }
    if k > rows.len() {
        return Err(Error::Input(format!(
            "k = {k} exceeds the number of rows ({})",
            rows.len()
        )));
    }
    let dim = rows[0].as_ref().len();
    if dim == 0 {
        return Err(Error::Input("row 0 has dimension 0".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != dim {
            return Err(Error::Input(format!(
                "row {i} has dimension {}, expected {dim}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "row {i} has a non-finite value at component {j}"
            )));
        }
    }
    Ok(dim)
}

/// Seeded initial centroids.
///
/// `KMeansPlusPlus` draws the first centroid uniformly and each further one
/// with probability proportional to squared distance from the nearest chosen
/// centroid (uniformly if every row coincides with a chosen one).
/// `RandomPoints` samples k distinct row indices without replacement and
/// requires at least k distinct rows.
pub fn init_centroids<R: AsRef<[f64]>>(rows: &[R], config: &KMeansConfig) -> Result<Vec<Vec<f64>>> {
    validate(rows, config.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = rows.len();
    let k = config.k;
    let indices = match config.init {
        Init::RandomPoints => {
            let distinct = count_distinct(rows, k);
            if distinct < k {
                return Err(Error::Input(format!(
                    "random_points init needs {k} distinct rows, found {distinct}"
                )));
            }
            rand::seq::index::sample(&mut rng, n, k).into_vec()
        }
        Init::KMeansPlusPlus => {
            let mut chosen = vec![rng.random_range(0..n)];
            let mut d2: Vec<f64> = rows
                .iter()
                .map(|r| squared_distance(r.as_ref(), rows[chosen[0]].as_ref()))
                .collect();
            while chosen.len() < k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let target = rng.random::<f64>() * total;
                    let mut acc = 0.0;
                    let mut pick = None;
                    for (i, &w) in d2.iter().enumerate() {
                        acc += w;
                        if w > 0.0 && acc > target {
                            pick = Some(i);
                            break;
                        }
                    }
                    // rounding can leave target just above the final sum
                    pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
                } else {
                    let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                    free[rng.random_range(0..free.len())]
                };
                chosen.push(next);
                for (i, r) in rows.iter().enumerate() {
                    let d = squared_distance(r.as_ref(), rows[next].as_ref());
                    if d < d2[i] {
                        d2[i] = d;
                    }
                }
            }
            chosen
        }
    };
    Ok(indices
        .into_iter()
        .map(|i| rows[i].as_ref().to_vec())
        .collect())
}

/// Number of distinct rows, counting no further than `cap`.
fn count_distinct<R: AsRef<[f64]>>(rows: &[R], cap: usize) -> usize {
    let mut seen: Vec<&[f64]> = Vec::new();
    for r in rows {
        let r = r.as_ref();
        if !seen.contains(&r) {
            seen.push(r);
            if seen.len() >= cap {
                break;
            }
        }
    }
    seen.len()
}

/// Cluster `rows` into `config.k` groups.
pub fn kmeans<R: AsRef<[f64]> + Sync>(rows: &[R], config: &KMeansConfig) -> Result<KMeansModel> {
    if config.max_iterations == 0 {
        return Err(Error::Input("max_iterations must be positive".into()));
    }
    let centroids = init_centroids(rows, config)?;
    lloyd(rows, centroids, config.max_iterations)
}

/// Lloyd iterations from explicit starting centroids.
pub fn lloyd<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    mut centroids: Vec<Vec<f64>>,
    max_iterations: usize,
) -> Result<KMeansModel> {
    let k = centroids.len();
    let dim = validate(rows, k)?;
    if let Some(j) = centroids.iter().position(|c| c.len() != dim) {
        return Err(Error::Input(format!(
            "initial centroid {j} has dimension {}, expected {dim}",
            centroids[j].len()
        )));
    }

    let mut assignments = assign(rows, &centroids);
    repair_empty(rows, &mut centroids, &mut assignments);
    let mut sse_trace = vec![within_sse(rows, &centroids, &assignments)];
    let mut iterations_run = 0;
    let mut converged = false;

    while iterations_run < max_iterations {
        iterations_run += 1;
        update_centroids(rows, &assignments, &mut centroids);
        sse_trace.push(within_sse(rows, &centroids, &assignments));
        let mut next = assign(rows, &centroids);
        repair_empty(rows, &mut centroids, &mut next);
        sse_trace.push(within_sse(rows, &centroids, &next));
        let moved = next != assignments;
        assignments = next;
        if !moved {
            converged = true;
            break;
        }
    }

    Ok(KMeansModel {
        centroids,
        assignments,
        iterations_run,
        converged,
        sse_trace,
    })
}

fn assign<R: AsRef<[f64]> + Sync>(rows: &[R], centroids: &[Vec<f64>]) -> Vec<usize> {
    if rows.len() >= PARALLEL_ROWS {
        rows.par_iter()
            .map(|r| nearest_unchecked(r.as_ref(), centroids).0)
            .collect()
    } else {
        rows.iter()
            .map(|r| nearest_unchecked(r.as_ref(), centroids).0)
            .collect()
    }
}

/// Reseat every empty cluster on the row farthest from its own centroid,
/// taking rows only from clusters with more than one member.
fn repair_empty<R: AsRef<[f64]>>(
    rows: &[R],
    centroids: &mut [Vec<f64>],
    assignments: &mut [usize],
) {
    let mut sizes = vec![0usize; centroids.len()];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for j in 0..centroids.len() {
        if sizes[j] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            let owner = assignments[i];
            if sizes[owner] < 2 {
                continue;
            }
            let d = squared_distance(r.as_ref(), &centroids[owner]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        // k <= rows guarantees a donor cluster with two or more members
        let (i, _) = far.expect("empty cluster with no donor row");
        sizes[assignments[i]] -= 1;
        sizes[j] = 1;
        assignments[i] = j;
        centroids[j].copy_from_slice(rows[i].as_ref());
    }
}

fn update_centroids<R: AsRef<[f64]>>(
    rows: &[R],
    assignments: &[usize],
    centroids: &mut [Vec<f64>],
) {
    let dim = centroids[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (r, &a) in rows.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(r.as_ref()) {
            *s += v;
        }
    }
    for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
        if n > 0 {
            let n = n as f64;
            for (ci, si) in c.iter_mut().zip(s) {
                *ci = si / n;
            }
        }
    }
}
