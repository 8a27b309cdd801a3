//! Approximate distance oracle and approximate ranking built from iterated
//! ultrametric skeletons.
//!
//! Level `k` extracts a skeleton `S_k` from the points `R_k` not yet covered
//! by earlier levels and keeps the dominating tree over `R_k`. A pair is
//! answered by the tree of the earlier of its two levels.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lca::LcaIndex;
use crate::metric::FiniteMetric;
use crate::ramsey::{certified_distortion, extend_ultrametric_unchecked, extract_skeleton};
use crate::ultrametric::{hst_from_ultrametric, HstTree};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleLevel {
    /// Global ids of `R_k`, ascending; tree point `i` is `members[i]`.
    pub members: Vec<usize>,
    /// Global ids of `S_k`, ascending.
    pub subset: Vec<usize>,
    pub tree: HstTree,
    /// Seed the skeleton at this level was drawn with.
    pub seed: u64,
    /// The skeleton came back empty twice and `S_k` was forced.
    pub forced: bool,
    lca: LcaIndex,
    labels: Vec<f64>,
}

impl OracleLevel {
    pub fn new(members: Vec<usize>, subset: Vec<usize>, tree: HstTree, seed: u64, forced: bool) -> Result<Self> {
        if tree.point_count() != members.len() {
            return Err(Error::InvalidParameter(format!(
                "level tree has {} points for {} members",
                tree.point_count(),
                members.len()
            )));
        }
        let lca = LcaIndex::new(&tree);
        let labels = tree.nodes().iter().map(|v| v.diameter).collect();
        Ok(OracleLevel {
            members,
            subset,
            tree,
            seed,
            forced,
            lca,
            labels,
        })
    }

    pub fn lca_index(&self) -> &LcaIndex {
        &self.lca
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStructure {
    n: usize,
    epsilon: f64,
    seed: u64,
    distortion: f64,
    levels: Vec<OracleLevel>,
    level_of: Vec<u32>,
    /// Leaf node of point `x` in the tree of level `k <= level_of[x]` sits at
    /// `leaf_nodes[leaf_offset[x] + k]`.
    leaf_offset: Vec<u32>,
    leaf_nodes: Vec<u32>,
}

/// Seeds for level `k`: the primary draw and the single reseed.
pub fn level_seeds(seed: u64, level: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    (rng.next_u64(), rng.next_u64())
}

/// Ultrametric over `members` centred at `members[0]`:
/// `rho(y, z) = 2 max(d(c, y), d(c, z))`, with `d(c, c) = 0`.
fn forced_tree(m: &FiniteMetric, members: &[usize]) -> Result<HstTree> {
    if members.len() == 1 {
        return Ok(HstTree::singleton());
    }
    let c = members[0];
    let r: Vec<f64> = members.iter().map(|&y| m.dist(c, y)).collect();
    let rho = FiniteMetric::from_fn(members.len(), |a, b| 2.0 * r[a].max(r[b]))?;
    hst_from_ultrametric(&rho)
}

impl OracleStructure {
    pub fn build(m: &FiniteMetric, epsilon: f64, seed: u64) -> Result<Self> {
        let n = m.len();
        if n == 0 {
            return Err(Error::InvalidParameter("metric has no points".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut levels = Vec::new();
        while !remaining.is_empty() {
            let sub = m.submetric(&remaining);
            let (primary, backup) = level_seeds(seed, levels.len());
            let mut sk = extract_skeleton(&sub, epsilon, primary)?;
            let mut level_seed = primary;
            if sk.subset.is_empty() {
                sk = extract_skeleton(&sub, epsilon, backup)?;
                level_seed = backup;
            }
            let level = if sk.subset.is_empty() {
                let tree = forced_tree(m, &remaining)?;
                OracleLevel::new(remaining.clone(), vec![remaining[0]], tree, level_seed, true)?
            } else {
                let subset = sk.subset.iter().map(|&i| remaining[i]).collect();
                OracleLevel::new(remaining.clone(), subset, sk.tree, level_seed, false)?
            };
            remaining.retain(|x| level.subset.binary_search(x).is_err());
            levels.push(level);
        }
        Self::from_levels(n, epsilon, seed, levels)
    }

    /// Reassembles an oracle from its levels, checking that the subsets
    /// partition the points and that each level covers exactly the points
    /// left over by the previous ones.
    pub fn from_levels(n: usize, epsilon: f64, seed: u64, levels: Vec<OracleLevel>) -> Result<Self> {
        let mut level_of = vec![u32::MAX; n];
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut per_point: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (k, level) in levels.iter().enumerate() {
            if level.members != remaining {
                return Err(Error::InvalidParameter(format!(
                    "level {k} does not cover exactly the remaining points"
                )));
            }
            if level.subset.is_empty() {
                return Err(Error::InvalidParameter(format!("level {k} has an empty subset")));
            }
            for (i, &x) in level.members.iter().enumerate() {
                per_point[x].push(level.tree.leaf(i) as u32);
            }
            for &x in &level.subset {
                if x >= n || level_of[x] != u32::MAX || level.members.binary_search(&x).is_err() {
                    return Err(Error::InvalidParameter(format!("point {x} misplaced at level {k}")));
                }
                level_of[x] = k as u32;
            }
            remaining.retain(|&x| level_of[x] == u32::MAX);
        }
        if !remaining.is_empty() {
            return Err(Error::InvalidParameter(format!("{} points are not covered", remaining.len())));
        }
        let mut leaf_offset = Vec::with_capacity(n);
        let mut leaf_nodes = Vec::new();
        for leaves in per_point {
            leaf_offset.push(leaf_nodes.len() as u32);
            leaf_nodes.extend(leaves);
        }
        Ok(OracleStructure {
            n,
            epsilon,
            seed,
            distortion: certified_distortion(epsilon),
            levels,
            level_of,
            leaf_offset,
            leaf_nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Certified stretch `D = 128 / epsilon`.
    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn levels(&self) -> &[OracleLevel] {
        &self.levels
    }

    pub fn level_of(&self, x: usize) -> usize {
        self.level_of[x] as usize
    }

    /// Estimate `E(i,j)` with `d(i,j) <= E(i,j) <= D d(i,j)`.
    pub fn query(&self, i: usize, j: usize) -> Result<f64> {
        for p in [i, j] {
            if p >= self.n {
                return Err(Error::UnknownPoint(p));
            }
        }
        Ok(self.query_counted(i, j).0)
    }

    /// Query together with the number of array reads it took.
    pub fn query_counted(&self, i: usize, j: usize) -> (f64, u32) {
        if i == j {
            return (0.0, 0);
        }
        let (li, lj) = (self.level_of[i], self.level_of[j]);
        let k = li.min(lj) as usize;
        let u = self.leaf_nodes[(self.leaf_offset[i] as usize) + k] as usize;
        let v = self.leaf_nodes[(self.leaf_offset[j] as usize) + k] as usize;
        let level = &self.levels[k];
        let (node, lca_probes) = level.lca.lca_counted(u, v);
        (level.labels[node], 8 + lca_probes)
    }

    /// Number of stored scalars across all tables.
    pub fn size_in_scalars(&self) -> usize {
        let per_level: usize = self
            .levels
            .iter()
            .map(|l| l.lca.size_in_scalars() + l.labels.len())
            .sum();
        per_level + self.level_of.len() + self.leaf_offset.len() + self.leaf_nodes.len()
    }
}

/// For every point `x`, all points ordered by the extended tree distance of
/// `x`'s level, ties broken by id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingStructure {
    n: usize,
    order: Vec<u32>,
    inverse: Vec<u32>,
    factor: f64,
}

impl RankingStructure {
    /// Extends each level's tree from `R_k` to all points and sorts every
    /// `x in S_k` against it.
    pub fn build(o: &OracleStructure, m: &FiniteMetric) -> Result<Self> {
        let n = o.len();
        if m.len() != n {
            return Err(Error::InvalidParameter(format!(
                "metric has {} points, oracle has {n}",
                m.len()
            )));
        }
        let mut order = vec![0u32; n * n];
        let mut inverse = vec![0u32; n * n];
        for level in o.levels() {
            let rho0 = level.tree.to_metric();
            let ext = extend_ultrametric_unchecked(m, &level.members, &rho0, o.distortion());
            for &x in &level.subset {
                let row = &mut order[x * n..(x + 1) * n];
                for (y, slot) in row.iter_mut().enumerate() {
                    *slot = y as u32;
                }
                row.sort_by(|&a, &b| {
                    ext.dist(x, a as usize)
                        .total_cmp(&ext.dist(x, b as usize))
                        .then(a.cmp(&b))
                });
                for (pos, &y) in row.iter().enumerate() {
                    inverse[x * n + y as usize] = pos as u32;
                }
            }
        }
        Ok(RankingStructure {
            n,
            order,
            inverse,
            factor: 6.0 * o.distortion(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Certified factor `F = 6D`.
    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// The `i`-th point (1-based) in the order of `x`.
    pub fn rank_query(&self, x: usize, i: usize) -> Result<usize> {
        if x >= self.n {
            return Err(Error::UnknownPoint(x));
        }
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                range: format!("1..={}", self.n),
            });
        }
        Ok(self.order[x * self.n + i - 1] as usize)
    }

    /// Position (1-based) of `u` in the order of `x`.
    pub fn rank_inverse(&self, x: usize, u: usize) -> Result<usize> {
        for p in [x, u] {
            if p >= self.n {
                return Err(Error::UnknownPoint(p));
            }
        }
        Ok(self.inverse[x * self.n + u] as usize + 1)
    }
}
