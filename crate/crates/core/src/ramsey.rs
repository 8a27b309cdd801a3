//! Ultrametric skeletons of finite metrics via hierarchical random partitions,
//! and the extension of an approximate ultrametric from a subset to the whole
//! space.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{FiniteMetric, Metric, TRIANGLE_TOLERANCE};
use crate::ultrametric::HstTree;

/// Ratio between consecutive partition scales.
pub const SCALE_RATIO: f64 = 8.0;

/// Certified distortion of a skeleton extracted with parameter `epsilon`.
pub fn certified_distortion(epsilon: f64) -> f64 {
    16.0 * SCALE_RATIO / epsilon
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonResult {
    /// Padded points, ascending.
    pub subset: Vec<usize>,
    /// Dominating tree over every input point.
    pub tree: HstTree,
    pub certified_distortion: f64,
    /// Largest `rho/d` over pairs with an endpoint in the subset.
    pub measured_distortion: f64,
    /// Scale of each partition level, level 0 first.
    pub scales: Vec<f64>,
    pub epsilon: f64,
    pub seed: u64,
}

impl SkeletonResult {
    pub fn contains(&self, x: usize) -> bool {
        self.subset.binary_search(&x).is_ok()
    }
}

/// Hierarchical random partition at scales `diam * 8^-l`. Each level uses a
/// fresh permutation and one radius drawn from `[scale/4, scale/2]`; clusters
/// are claimed in permutation order inside their parent cluster. A point is
/// kept when its ball of radius `(epsilon/16) * scale` stays inside its
/// cluster at every level.
pub fn extract_skeleton(m: &FiniteMetric, epsilon: f64, seed: u64) -> Result<SkeletonResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidParameter("metric has no points".into()));
    }
    let certified = certified_distortion(epsilon);
    if n == 1 {
        return Ok(SkeletonResult {
            subset: vec![0],
            tree: HstTree::singleton(),
            certified_distortion: certified,
            measured_distortion: 1.0,
            scales: vec![0.0],
            epsilon,
            seed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diam = m.diameter();
    let pad = epsilon / 16.0;
    let mut assign = vec![vec![0usize; n]];
    let mut scales = vec![diam];
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut padded = vec![true; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut level = 0usize;
    while clusters.len() < n {
        level += 1;
        let scale = diam / SCALE_RATIO.powi(level as i32);
        let radius = rng.random_range(scale / 4.0..=scale / 2.0);
        perm.shuffle(&mut rng);
        let parent = &assign[level - 1];
        let mut next = vec![usize::MAX; n];
        let mut next_clusters: Vec<Vec<usize>> = Vec::new();
        let mut open: Vec<usize> = clusters.iter().map(Vec::len).collect();
        for &c in &perm {
            let pc = parent[c];
            if open[pc] == 0 {
                continue;
            }
            let mut claimed = Vec::new();
            for &y in &clusters[pc] {
                if next[y] == usize::MAX && m.dist(c, y) <= radius {
                    next[y] = next_clusters.len();
                    claimed.push(y);
                }
            }
            if !claimed.is_empty() {
                open[pc] -= claimed.len();
                claimed.sort_unstable();
                next_clusters.push(claimed);
            }
        }
        let ball = pad * scale;
        for x in 0..n {
            if padded[x] {
                padded[x] = clusters[parent[x]]
                    .iter()
                    .all(|&y| next[y] == next[x] || m.dist(x, y) > ball);
            }
        }
        assign.push(next);
        scales.push(scale);
        clusters = next_clusters;
    }
    let tree = HstTree::from_partitions(&assign, &scales)?;
    let subset: Vec<usize> = (0..n).filter(|&x| padded[x]).collect();
    let mut measured: f64 = 1.0;
    for &x in &subset {
        for y in 0..n {
            if y != x {
                measured = measured.max(tree.dist(x, y) / m.dist(x, y));
            }
        }
    }
    Ok(SkeletonResult {
        subset,
        tree,
        certified_distortion: certified,
        measured_distortion: measured,
        scales,
        epsilon,
        seed,
    })
}

/// Nearest point of `subset` to every point, ties broken by the smaller id.
pub fn nearest_in(m: &impl Metric, subset: &[usize]) -> Vec<usize> {
    (0..m.len())
        .map(|x| {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for &s in subset {
                let d = m.dist(x, s);
                if d < best_d || (d == best_d && s < best) {
                    best = s;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Extends an ultrametric `rho0` on `subset` (indexed by position in
/// `subset`) to all points, after checking `d <= rho0 <= D d` on the subset
/// and the ultra-triangle inequality for `rho0`.
pub fn extend_ultrametric(
    m: &FiniteMetric,
    subset: &[usize],
    rho0: &impl Metric,
    distortion: f64,
) -> Result<FiniteMetric> {
    check_subset(m, subset, rho0)?;
    if !(distortion >= 1.0) {
        return Err(Error::InvalidParameter(format!("distortion must be at least 1, got {distortion}")));
    }
    let k = subset.len();
    let scale = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .map(|(a, b)| rho0.dist(a, b))
        .fold(0.0, f64::max);
    let tol = TRIANGLE_TOLERANCE * scale;
    for a in 0..k {
        for b in a + 1..k {
            let (d, r) = (m.dist(subset[a], subset[b]), rho0.dist(a, b));
            if r < d - tol || r > distortion * d + tol {
                return Err(Error::PreconditionViolated(format!(
                    "rho0({}, {}) = {r} is outside [{d}, {}]",
                    subset[a],
                    subset[b],
                    distortion * d
                )));
            }
            for c in 0..k {
                if c != a && c != b && r > rho0.dist(a, c).max(rho0.dist(b, c)) + tol {
                    return Err(Error::PreconditionViolated(format!(
                        "rho0 fails the ultra-triangle inequality on ({}, {}, {})",
                        subset[a], subset[b], subset[c]
                    )));
                }
            }
        }
    }
    Ok(extend_ultrametric_unchecked(m, subset, rho0, distortion))
}

fn check_subset(m: &FiniteMetric, subset: &[usize], rho0: &impl Metric) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("subset is empty".into()));
    }
    if rho0.len() != subset.len() {
        return Err(Error::InvalidParameter(format!(
            "rho0 has {} points for a subset of {}",
            rho0.len(),
            subset.len()
        )));
    }
    let mut seen = vec![false; m.len()];
    for &s in subset {
        if s >= m.len() {
            return Err(Error::UnknownPoint(s));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidParameter(format!("point {s} repeated in subset")));
        }
    }
    Ok(())
}

/// The extension `rho(x,y) = max(rho0(pi x, pi y), a(x), a(y))` with `pi` the
/// nearest-point map and `a(x) = 2D d(x, pi x)`, without precondition checks.
pub fn extend_ultrametric_unchecked(
    m: &FiniteMetric,
    subset: &[usize],
    rho0: &impl Metric,
    distortion: f64,
) -> FiniteMetric {
    let n = m.len();
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in subset.iter().enumerate() {
        pos[s] = i;
    }
    let near = nearest_in(m, subset);
    let proj: Vec<usize> = near.iter().map(|&s| pos[s]).collect();
    let lift: Vec<f64> = (0..n).map(|x| 2.0 * distortion * m.dist(x, near[x])).collect();
    FiniteMetric::from_fn(n, |x, y| {
        let base = if proj[x] == proj[y] { 0.0 } else { rho0.dist(proj[x], proj[y]) };
        base.max(lift[x]).max(lift[y])
    })
    .expect("extension separates distinct points")
}
