//! Subset-construction strategies over an embedded dataset.
//!
//! The centerpiece is greedy max-min (farthest-point) selection, which grows
//! a subset by repeatedly adding the point farthest from everything chosen so
//! far — the rule that drives minimum pairwise distance up and with it the
//! uniformity of the subset. The baselines it is compared against are uniform
//! random sampling, its dual (min-distance, which deliberately crowds points
//! together), a half-random/half-crowded mix, and a plain prefix.
//!
//! Everything here is deterministic given `(dataset, k, seed, metric)`:
//! randomness flows through a seeded ChaCha8 stream, ties break toward the
//! smallest index, and the parallel argmax reduces in a schedule-independent
//! order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DistanceCtx, EmbeddedDataset, Metric};

/// Strategy tags, matching the CLI tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Greedy max-min (farthest-point) selection.
    Maxmin,
    /// Uniform sample without replacement.
    Random,
    /// Greedy dual: start from the closest pair, keep adding the most crowded
    /// point.
    Mindist,
    /// Half random, half min-distance over the complement.
    Mixed,
    /// First `k` points in dataset order.
    Head,
}

/// A selected subset: ordered distinct indices plus per-pick diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub strategy: Strategy,
    /// Dataset indices in pick order; distinct, each < N, length = requested k.
    pub indices: Vec<usize>,
    pub metric: Metric,
    /// Seed that produced this selection; 0 for strategies that use none.
    pub seed: u64,
    /// For `Maxmin` only: entry `j` is the maximized min-distance achieved by
    /// pick `j+1` (the first pick has no distance). Nonincreasing.
    pub step_min_dist: Vec<f64>,
}

fn check_k(k: usize, n: usize, min_k: usize) -> Result<()> {
    if k < min_k {
        return Err(Error::InvalidInput(format!(
            "k must be at least {min_k} for this strategy, got {k}"
        )));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    Ok(())
}

/// Larger distance wins; equal distances fall to the smaller index. A total
/// order, so the parallel reduction is schedule-independent.
fn farther(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Smaller distance wins; equal distances fall to the smaller index.
fn nearer(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Extreme unselected candidate by `pick` over the current nearest-selected
/// distances.
fn extreme_candidate(
    dist: &[f64],
    selected: &[bool],
    pick: fn((usize, f64), (usize, f64)) -> (usize, f64),
) -> Option<(usize, f64)> {
    dist.par_iter()
        .enumerate()
        .filter(|(i, _)| !selected[*i])
        .map(|(i, &d)| (i, d))
        .reduce_with(|a, b| pick(a, b))
}

/// After selecting `p`, shrink each point's nearest-selected distance.
fn relax(dist: &mut [f64], ctx: &DistanceCtx, p: usize) {
    dist.par_iter_mut().enumerate().for_each(|(i, d)| {
        let nd = ctx.dist(i, p);
        if nd < *d {
            *d = nd;
        }
    });
}

/// Greedy max-min selection: start from a uniformly drawn point, then `k−1`
/// times add the point whose distance to the selected set is largest.
///
/// Runs in O(N·k) via an incremental nearest-selected-distance array. Ties
/// break toward the smallest index, so the result is a pure function of the
/// arguments.
pub fn greedy_maxmin(
    ds: &EmbeddedDataset,
    k: usize,
    seed: u64,
    metric: Metric,
) -> Result<Selection> {
    check_k(k, ds.len(), 1)?;
    let ctx = DistanceCtx::new(ds, metric)?;
    let n = ds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.random_range(0..n);

    let mut selected = vec![false; n];
    let mut indices = Vec::with_capacity(k);
    let mut step_min_dist = Vec::with_capacity(k.saturating_sub(1));
    selected[start] = true;
    indices.push(start);
    let mut dist: Vec<f64> = (0..n).map(|i| ctx.dist(i, start)).collect();

    for _ in 1..k {
        let (best, d) = extreme_candidate(&dist, &selected, farther)
            .expect("k ≤ N leaves at least one candidate");
        selected[best] = true;
        indices.push(best);
        step_min_dist.push(d);
        relax(&mut dist, &ctx, best);
    }
    for w in step_min_dist.windows(2) {
        assert!(
            w[1] <= w[0],
            "max-min step distances must be nonincreasing: {} then {}",
            w[0],
            w[1]
        );
    }
    Ok(Selection { strategy: Strategy::Maxmin, indices, metric, seed, step_min_dist })
}

/// Uniform sample of `k` distinct indices via a seeded Fisher–Yates prefix.
pub fn random_subset(ds: &EmbeddedDataset, k: usize, seed: u64) -> Result<Selection> {
    check_k(k, ds.len(), 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = fisher_yates_prefix(ds.len(), k, &mut rng);
    Ok(Selection {
        strategy: Strategy::Random,
        indices,
        metric: ds.metric_hint(),
        seed,
        step_min_dist: Vec::new(),
    })
}

fn fisher_yates_prefix(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Greedy dual of max-min: seed with the closest pair (ties by lexicographic
/// index pair), then repeatedly add the point nearest to the selected set
/// (ties by smallest index). Produces deliberately crowded subsets.
pub fn min_distance_subset(ds: &EmbeddedDataset, k: usize, metric: Metric) -> Result<Selection> {
    check_k(k, ds.len(), 2)?;
    let ctx = DistanceCtx::new(ds, metric)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let indices = min_distance_over(&ctx, &all, k);
    Ok(Selection { strategy: Strategy::Mindist, indices, metric, seed: 0, step_min_dist: Vec::new() })
}

/// Min-distance rule restricted to the points listed in `pool` (dataset
/// indices, strictly increasing). `k = 1` degenerates to the smaller index of
/// the pool's closest pair; `pool.len() == 1` returns the single point.
fn min_distance_over(ctx: &DistanceCtx, pool: &[usize], k: usize) -> Vec<usize> {
    debug_assert!(k >= 1 && k <= pool.len());
    if pool.len() == 1 {
        return vec![pool[0]];
    }
    // Closest pair over the pool; ties fall to the lexicographically smallest
    // (i, j). Sequential scan in index order keeps this deterministic.
    let mut best: Option<(f64, usize, usize)> = None;
    for (a, &i) in pool.iter().enumerate() {
        for &j in &pool[a + 1..] {
            let d = ctx.dist(i, j);
            let cand = (d, i, j);
            best = Some(match best {
                None => cand,
                Some(cur) => {
                    if cand.0 < cur.0 || (cand.0 == cur.0 && (cand.1, cand.2) < (cur.1, cur.2)) {
                        cand
                    } else {
                        cur
                    }
                }
            });
        }
    }
    let (_, i, j) = best.expect("pool has at least two points");
    if k == 1 {
        return vec![i];
    }

    let n = ctx_len(ctx);
    let mut in_pool = vec![false; n];
    for &p in pool {
        in_pool[p] = true;
    }
    let mut selected = vec![false; n];
    let mut indices = vec![i, j];
    selected[i] = true;
    selected[j] = true;
    // Nearest-selected distances; points outside the pool are fenced off with
    // +∞ so the shared argmin helper never picks them.
    let mut dist: Vec<f64> = (0..n)
        .map(|p| {
            if in_pool[p] {
                ctx.dist(p, i).min(ctx.dist(p, j))
            } else {
                f64::INFINITY
            }
        })
        .collect();
    while indices.len() < k {
        let (best, _) = extreme_candidate(&dist, &selected, nearer)
            .expect("k ≤ pool size leaves at least one candidate");
        selected[best] = true;
        indices.push(best);
        relax(&mut dist, ctx, best);
        // Refence the outside after relaxation so it stays unpickable.
        for p in 0..n {
            if !in_pool[p] {
                dist[p] = f64::INFINITY;
            }
        }
    }
    indices
}

fn ctx_len(ctx: &DistanceCtx) -> usize {
    ctx.dataset_len()
}

/// Half random, half crowded: ⌈k/2⌉ indices by uniform sampling, then ⌊k/2⌋
/// by the min-distance rule over the complement, concatenated. Distinctness
/// holds by construction.
pub fn mixed_subset(ds: &EmbeddedDataset, k: usize, seed: u64, metric: Metric) -> Result<Selection> {
    check_k(k, ds.len(), 2)?;
    let ctx = DistanceCtx::new(ds, metric)?;
    let m_rand = k.div_ceil(2);
    let m_min = k / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = fisher_yates_prefix(ds.len(), m_rand, &mut rng);
    if m_min > 0 {
        let taken: std::collections::HashSet<usize> = indices.iter().copied().collect();
        let pool: Vec<usize> = (0..ds.len()).filter(|i| !taken.contains(i)).collect();
        indices.extend(min_distance_over(&ctx, &pool, m_min));
    }
    Ok(Selection { strategy: Strategy::Mixed, indices, metric, seed, step_min_dist: Vec::new() })
}

/// First `k` points in dataset order (the trivial prefix baseline).
pub fn head_subset(ds: &EmbeddedDataset, k: usize) -> Result<Selection> {
    check_k(k, ds.len(), 1)?;
    Ok(Selection {
        strategy: Strategy::Head,
        indices: (0..k).collect(),
        metric: ds.metric_hint(),
        seed: 0,
        step_min_dist: Vec::new(),
    })
}
