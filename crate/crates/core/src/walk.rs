//! Markov chains on finite state spaces and the exact expectations behind
//! Markov type, drift and Markov convexity.
//!
//! Every expectation is computed by pushing probability vectors through the
//! transition rows, so no sampling noise enters.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{gen_tree, laakso_oriented, tree_layout, Graph};
use crate::metric::Metric;

const ROW_TOLERANCE: f64 = 1e-12;
const STATIONARY_TOLERANCE: f64 = 1e-10;

/// Sparse row-stochastic chain with a start distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    rows: Vec<Vec<(usize, f64)>>,
    start: Vec<f64>,
    stationary: bool,
    reversible: bool,
}

impl MarkovChain {
    /// Chain with the given rows started from `start`. The chain is flagged
    /// stationary when `start A = start` and reversible when detailed balance
    /// holds as well.
    pub fn new(rows: Vec<Vec<(usize, f64)>>, start: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidChain("chain has no states".into()));
        }
        if start.len() != m {
            return Err(Error::InvalidChain(format!("start has {} entries for {m} states", start.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(j, p) in row {
                if j >= m || !(p.is_finite() && p >= 0.0) {
                    return Err(Error::InvalidChain(format!("row {i} has an invalid entry ({j}, {p})")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidChain(format!("row {i} sums to {sum}")));
            }
        }
        if start.iter().any(|&p| !(p.is_finite() && p >= 0.0)) || (start.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidChain("start is not a probability vector".into()));
        }
        let mut chain = MarkovChain {
            rows,
            start,
            stationary: false,
            reversible: false,
        };
        let next = chain.step(&chain.start);
        chain.stationary = next.iter().zip(&chain.start).all(|(a, b)| (a - b).abs() <= STATIONARY_TOLERANCE);
        chain.reversible = chain.stationary && chain.detailed_balance_holds();
        Ok(chain)
    }

    /// Chain from a dense matrix.
    pub fn from_dense(matrix: &[Vec<f64>], start: Vec<f64>) -> Result<Self> {
        let rows = matrix
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(_, &p)| p != 0.0).map(|(j, &p)| (j, p)).collect())
            .collect();
        Self::new(rows, start)
    }

    fn detailed_balance_holds(&self) -> bool {
        let m = self.len();
        let mut dense: HashMap<(usize, usize), f64> = HashMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                *dense.entry((i, j)).or_default() += p;
            }
        }
        dense.iter().all(|(&(i, j), &p)| {
            let back = dense.get(&(j, i)).copied().unwrap_or(0.0);
            (self.start[i] * p - self.start[j] * back).abs() <= STATIONARY_TOLERANCE
        }) && m > 0
    }

    /// Same transitions, different start distribution.
    pub fn with_start(&self, start: Vec<f64>) -> Result<Self> {
        Self::new(self.rows.clone(), start)
    }

    /// Same transitions started deterministically at `state`.
    pub fn started_at(&self, state: usize) -> Result<Self> {
        if state >= self.len() {
            return Err(Error::UnknownPoint(state));
        }
        let mut start = vec![0.0; self.len()];
        start[state] = 1.0;
        self.with_start(start)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// Dense transition matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let m = self.len();
        let mut out = vec![vec![0.0; m]; m];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                out[i][j] += p;
            }
        }
        out
    }

    /// One step of the distribution: `dist A`.
    pub fn step(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, &w) in dist.iter().enumerate() {
            if w != 0.0 {
                for &(j, p) in &self.rows[i] {
                    out[j] += w * p;
                }
            }
        }
        out
    }

    /// Distribution of `Z_t` for `t = 0..=t_max`.
    pub fn distributions(&self, t_max: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(t_max + 1);
        out.push(self.start.clone());
        for t in 0..t_max {
            let next = self.step(&out[t]);
            out.push(next);
        }
        out
    }

    /// `E[c(Z_0, Z_t)]` for `t = 0..=t_max` with `Z_0` drawn from the start.
    pub fn cost_profile(&self, t_max: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let m = self.len();
        let mut profile = vec![0.0; t_max + 1];
        for (i, &w) in self.start.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut dist = vec![0.0; m];
            dist[i] = 1.0;
            for (t, slot) in profile.iter_mut().enumerate() {
                if t > 0 {
                    dist = self.step(&dist);
                }
                let mut e = 0.0;
                for (j, &q) in dist.iter().enumerate() {
                    if q != 0.0 {
                        e += q * cost(i, j);
                    }
                }
                *slot += w * e;
            }
        }
        profile
    }
}

/// Simple random walk on a connected graph, started from its stationary
/// distribution `deg / 2|E|`.
pub fn stationary_walk(g: &Graph) -> Result<MarkovChain> {
    let n = g.vertex_count();
    if g.edge_count() == 0 {
        return Err(Error::InvalidParameter("graph has no edges".into()));
    }
    if !g.is_connected() {
        let d = g.bfs(0);
        let far = d.iter().position(|&x| x == crate::graph::UNREACHABLE).unwrap();
        return Err(Error::DisconnectedGraph(0, far));
    }
    let two_e = 2.0 * g.edge_count() as f64;
    let rows = (0..n)
        .map(|v| {
            let deg = g.degree(v) as f64;
            g.neighbors(v).map(|u| (u, 1.0 / deg)).collect()
        })
        .collect();
    let pi = (0..n).map(|v| g.degree(v) as f64 / two_e).collect();
    MarkovChain::new(rows, pi)
}

/// Random walk on a seeded random symmetric weighted graph, started
/// stationary. Each pair is joined with probability `density`, and the path
/// `i -- i+1` is always present so the chain is irreducible.
pub fn random_reversible_chain(states: usize, density: f64, seed: u64) -> Result<MarkovChain> {
    if states == 0 || !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("states {states}, density {density}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![vec![0.0; states]; states];
    for i in 0..states {
        for j in i..states {
            if i == j || j == i + 1 || rng.random_bool(density) {
                let x: f64 = rng.random_range(0.05..1.0);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
    }
    let rowsum: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = rowsum.iter().sum();
    let p: Vec<Vec<f64>> = w.iter().zip(&rowsum).map(|(r, s)| r.iter().map(|x| x / s).collect()).collect();
    MarkovChain::from_dense(&p, rowsum.iter().map(|s| s / total).collect())
}

/// Walk on `subset` moving uniformly to the subset points at graph distance
/// exactly `m`, started from the degree-proportional distribution. States are
/// positions in `subset`; isolated states carry no mass and hold in place.
pub fn subset_walk(g: &Graph, subset: &[usize], m: usize) -> Result<MarkovChain> {
    if subset.is_empty() {
        return Err(Error::EmptyInducedGraph);
    }
    if let Some(&bad) = subset.iter().find(|&&v| v >= g.vertex_count()) {
        return Err(Error::UnknownPoint(bad));
    }
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(subset.len());
    for &v in subset {
        let d = g.bfs(v);
        adj.push((0..subset.len()).filter(|&b| d[subset[b]] as usize == m).collect());
    }
    let two_e: usize = adj.iter().map(Vec::len).sum();
    if two_e == 0 {
        return Err(Error::EmptyInducedGraph);
    }
    let rows = adj
        .iter()
        .enumerate()
        .map(|(a, nb)| {
            if nb.is_empty() {
                vec![(a, 1.0)]
            } else {
                nb.iter().map(|&b| (b, 1.0 / nb.len() as f64)).collect()
            }
        })
        .collect();
    let pi = adj.iter().map(|nb| nb.len() as f64 / two_e as f64).collect();
    MarkovChain::new(rows, pi)
}

/// Smallest jump length for the subset walk that meets both density
/// conditions of the girth argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpLength {
    pub m: usize,
    /// Number of steps `t >= 1` with `t m < g/4`; zero when the walk leaves
    /// the tree range immediately.
    pub steps: usize,
    pub feasible: bool,
}

/// Smallest `m`, divisible by 6, with `|S|/n >= (2m+2)/(k-1)^(m/2)` and
/// `|S|/n >= 16/(k (k-1)^(m/3))`. Feasible when `6 <= m < g/4`.
pub fn subset_jump_length(n: usize, subset_size: usize, k: usize, girth: usize) -> Option<JumpLength> {
    if subset_size == 0 || subset_size > n || k < 3 {
        return None;
    }
    let density = subset_size as f64 / n as f64;
    let base = (k - 1) as f64;
    let m = (1..=200).map(|j| 6 * j).find(|&m| {
        let mf = m as f64;
        density >= (2.0 * mf + 2.0) / base.powf(mf / 2.0) && density >= 16.0 / (k as f64 * base.powf(mf / 3.0))
    })?;
    let steps = (1..).take_while(|&t| 4 * t * m < girth).count();
    Some(JumpLength {
        m,
        steps,
        feasible: steps > 0,
    })
}

fn pow_cost(m: &(impl Metric + ?Sized), p: f64) -> impl Fn(usize, usize) -> f64 + '_ {
    move |i, j| if i == j { 0.0 } else { m.dist(i, j).powf(p) }
}

fn check_states(c: &MarkovChain, f: &(impl Metric + ?Sized)) -> Result<()> {
    if f.len() != c.len() {
        return Err(Error::InvalidParameter(format!(
            "metric has {} points for a chain with {} states",
            f.len(),
            c.len()
        )));
    }
    Ok(())
}

/// `E[d(Z_t,Z_0)^p] / (t E[d(Z_1,Z_0)^p])` for a stationary chain, where
/// `f` gives the distance between the images of two states.
pub fn markov_type_ratio(c: &MarkovChain, f: &impl Metric, p: f64, t: usize) -> Result<f64> {
    check_states(c, f)?;
    if t == 0 {
        return Err(Error::InvalidParameter("time must be at least 1".into()));
    }
    if !c.is_stationary() {
        return Err(Error::InvalidChain("Markov type needs a stationary start".into()));
    }
    let profile = c.cost_profile(t, pow_cost(f, p));
    if profile[1] <= 0.0 {
        return Err(Error::DegenerateChain);
    }
    Ok(profile[t] / (t as f64 * profile[1]))
}

/// `max_{1 <= t <= t_max} (E[d(Z_t,Z_0)^p] / (M^p t E[d(Z_1,Z_0)^p]))^(1/p)`:
/// a lower bound on the distortion of the state metric into any space of
/// Markov type `p` with constant `M`. Zero for a single state.
pub fn distortion_lower_bound(c: &MarkovChain, m: &impl Metric, p: f64, mtype: f64, t_max: usize) -> Result<f64> {
    check_states(c, m)?;
    if m.len() <= 1 {
        return Ok(0.0);
    }
    let profile = c.cost_profile(t_max.max(1), pow_cost(m, p));
    if profile[1] <= 0.0 {
        return Err(Error::DegenerateChain);
    }
    let best = (1..=t_max)
        .map(|t| profile[t] / (mtype.powf(p) * t as f64 * profile[1]))
        .fold(0.0, f64::max);
    Ok(best.powf(1.0 / p))
}

/// `E[d(Z_t,Z_0)]` for `t = 0..=t_max` from the chain's start.
pub fn drift_profile(c: &MarkovChain, m: &impl Metric, t_max: usize) -> Result<Vec<f64>> {
    check_states(c, m)?;
    Ok(c.cost_profile(t_max, |i, j| m.dist(i, j)))
}

/// Both sides of the Markov convexity inequality over `0 <= t <= horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexitySums {
    pub lhs: f64,
    pub rhs: f64,
    /// `(lhs/rhs)^(1/p)`, a lower bound on the Markov convexity constant.
    pub pi_lower: f64,
}

impl ConvexitySums {
    fn from_sides(lhs: f64, rhs: f64, p: f64) -> Result<Self> {
        if rhs <= 0.0 {
            return Err(Error::DegenerateChain);
        }
        Ok(ConvexitySums {
            lhs,
            rhs,
            pi_lower: (lhs / rhs).powf(1.0 / p),
        })
    }
}

/// Exact Markov convexity sums for the chain from its start distribution:
/// `lhs = sum_s sum_t E[d(Z_t, Z~_t(t - 2^s))^p] / 2^(sp)` over fork times
/// `t - 2^s >= 0`, and `rhs = sum_{1 <= t <= horizon} E[d(Z_t, Z_{t-1})^p]`.
pub fn markov_convexity_functional(c: &MarkovChain, f: &impl Metric, p: f64, horizon: usize) -> Result<ConvexitySums> {
    check_states(c, f)?;
    let cost = pow_cost(f, p);
    let dists = c.distributions(horizon);
    let m = c.len();
    let mut rhs = 0.0;
    for dist in &dists[..horizon] {
        for (w, &q) in dist.iter().enumerate() {
            if q != 0.0 {
                rhs += q * c.row(w).iter().map(|&(u, a)| a * cost(w, u)).sum::<f64>();
            }
        }
    }
    let mut lhs = 0.0;
    let mut s = 0;
    while (1usize << s) <= horizon {
        let h = 1usize << s;
        let mut fork: HashMap<usize, f64> = HashMap::new();
        let mut level = 0.0;
        for dist in &dists[..=horizon - h] {
            for (w, &q) in dist.iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let g = *fork.entry(w).or_insert_with(|| {
                    let mut row = vec![0.0; m];
                    row[w] = 1.0;
                    for _ in 0..h {
                        row = c.step(&row);
                    }
                    let support: Vec<(usize, f64)> =
                        row.iter().enumerate().filter(|&(_, &x)| x != 0.0).map(|(u, &x)| (u, x)).collect();
                    let mut acc = 0.0;
                    for (a, &(u, pu)) in support.iter().enumerate() {
                        for &(v, pv) in &support[a + 1..] {
                            acc += 2.0 * pu * pv * cost(u, v);
                        }
                    }
                    acc
                });
                level += q * g;
            }
        }
        lhs += level / (h as f64).powf(p);
        s += 1;
    }
    ConvexitySums::from_sides(lhs, rhs, p)
}

/// Outward walk on `T_depth^k` started at the root: each step moves to a
/// uniform child and leaves absorb. States follow [`gen_tree`] numbering.
pub fn outward_tree_chain(k: usize, depth: usize) -> Result<MarkovChain> {
    let t = tree_layout(k, depth)?;
    let rows = (0..t.len())
        .map(|v| {
            let ch = &t.children[v];
            if ch.is_empty() {
                vec![(v, 1.0)]
            } else {
                ch.iter().map(|&c| (c, 1.0 / ch.len() as f64)).collect()
            }
        })
        .collect();
    let mut start = vec![0.0; t.len()];
    start[0] = 1.0;
    MarkovChain::new(rows, start)
}

/// Convexity sums of the outward walk on `T_depth^k` under the tree metric,
/// evaluated through the depth structure instead of the state space.
///
/// After `tau` steps the walk sits at depth `min(tau, depth)`. Two copies
/// forked at depth `delta` descend `H = min(h, depth - delta)` further levels
/// and agree on their first `J` choices with `P[J >= j]` the product of the
/// reciprocal branching numbers, so their distance is `2 (H - J)`.
pub fn tree_convexity_exact(k: usize, depth: usize, p: f64, horizon: usize) -> Result<ConvexitySums> {
    if k < 3 || depth == 0 {
        return Err(Error::InvalidParameter(format!("need k >= 3 and depth >= 1, got ({k}, {depth})")));
    }
    let branching = |d: usize| if d == 0 { k as f64 } else { (k - 1) as f64 };
    let fork = |delta: usize, h: usize| {
        let big_h = h.min(depth - delta);
        let mut at_least = 1.0;
        let mut e = 0.0;
        for j in 0..big_h {
            let next = at_least / branching(delta + j);
            e += (at_least - next) * (2.0 * (big_h - j) as f64).powf(p);
            at_least = next;
        }
        e
    };
    let rhs = horizon.min(depth) as f64;
    let mut lhs = 0.0;
    let mut s = 0;
    while (1usize << s) <= horizon {
        let h = 1usize << s;
        let level: f64 = (h..=horizon).map(|t| fork((t - h).min(depth), h)).sum();
        lhs += level / (h as f64).powf(p);
        s += 1;
    }
    ConvexitySums::from_sides(lhs, rhs, p)
}

/// Left-to-right walk on the Laakso graph `G_k`: from the leftmost vertex
/// (0) each step moves to a uniform out-neighbour; the rightmost vertex (1)
/// absorbs. States follow [`crate::graph::gen_laakso`] numbering.
pub fn laakso_chain(k: usize) -> Result<MarkovChain> {
    if k == 0 {
        return Err(Error::InvalidParameter("Laakso chain needs k >= 1".into()));
    }
    let (n, edges) = laakso_oriented(k);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in edges {
        out[u].push(v);
    }
    let rows = out
        .iter()
        .enumerate()
        .map(|(v, o)| {
            if o.is_empty() {
                vec![(v, 1.0)]
            } else {
                o.iter().map(|&w| (w, 1.0 / o.len() as f64)).collect()
            }
        })
        .collect();
    let mut start = vec![0.0; n];
    start[0] = 1.0;
    MarkovChain::new(rows, start)
}

/// `T_depth^k` outward walk together with its tree metric, for the generic
/// evaluator.
pub fn tree_chain_with_metric(k: usize, depth: usize) -> Result<(MarkovChain, crate::metric::FiniteMetric)> {
    let chain = outward_tree_chain(k, depth)?;
    let metric = crate::graph::metric_from_graph(&gen_tree(k, depth)?)?;
    Ok((chain, metric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, gen_laakso, hypercube_graph, metric_from_graph, petersen};
    use crate::metric::{gen_hypercube, FiniteMetric};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stationary_distributions() {
        let p3 = Graph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let c = stationary_walk(&p3).unwrap();
        assert_eq!(c.start(), &[0.25, 0.5, 0.25]);
        assert!(c.is_reversible());
        let pc = stationary_walk(&petersen()).unwrap();
        assert!(pc.start().iter().all(|&p| close(p, 0.1, 1e-15)));
        assert!(matches!(
            stationary_walk(&Graph::unweighted(4, &[(0, 1), (2, 3)]).unwrap()),
            Err(Error::DisconnectedGraph(0, 2))
        ));
    }

    #[test]
    fn subset_walks() {
        let g = petersen();
        let all: Vec<usize> = (0..10).collect();
        let (sw, full) = (subset_walk(&g, &all, 1).unwrap(), stationary_walk(&g).unwrap());
        assert_eq!(sw.dense(), full.dense());
        assert_eq!(sw.start(), full.start());
        let c6 = cycle(6).unwrap();
        let all6: Vec<usize> = (0..6).collect();
        let w = subset_walk(&c6, &all6, 3).unwrap();
        for i in 0..6 {
            assert_eq!(w.row(i), &[((i + 3) % 6, 1.0)]);
            assert!(close(w.start()[i], 1.0 / 6.0, 1e-15));
        }
        assert!(matches!(subset_walk(&c6, &[0, 1], 3), Err(Error::EmptyInducedGraph)));
    }

    #[test]
    fn invalid_chains() {
        assert!(MarkovChain::from_dense(&[vec![0.5, 0.4], vec![0.0, 1.0]], vec![0.5, 0.5]).is_err());
        assert!(MarkovChain::from_dense(&[vec![1.0]], vec![2.0]).is_err());
    }

    #[test]
    fn type_ratio_basics() {
        let m = FiniteMetric::random_cloud(6, 2, 1).unwrap();
        let c = stationary_walk(&cycle(6).unwrap()).unwrap();
        assert!(close(markov_type_ratio(&c, &m, 2.0, 1).unwrap(), 1.0, 1e-12));
        let flip = MarkovChain::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let two = FiniteMetric::new(2, vec![3.0]).unwrap();
        assert_eq!(markov_type_ratio(&flip, &two, 2.0, 2).unwrap(), 0.0);
        let still = MarkovChain::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5]).unwrap();
        assert!(matches!(markov_type_ratio(&still, &two, 2.0, 3), Err(Error::DegenerateChain)));
    }

    #[test]
    fn distortion_bounds() {
        let single = MarkovChain::from_dense(&[vec![1.0]], vec![1.0]).unwrap();
        assert_eq!(
            distortion_lower_bound(&single, &FiniteMetric::new(1, vec![]).unwrap(), 2.0, 1.0, 5).unwrap(),
            0.0
        );
        let c4 = cycle(4).unwrap();
        let v = distortion_lower_bound(&stationary_walk(&c4).unwrap(), &metric_from_graph(&c4).unwrap(), 2.0, 1.0, 1)
            .unwrap();
        assert!(close(v, 1.0, 1e-12));

        // Petersen: every step has length 1, the two-step term comes from A^2
        let g = petersen();
        let pm = metric_from_graph(&g).unwrap();
        let chain = stationary_walk(&g).unwrap();
        let a = chain.dense();
        let mut e2 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let a2: f64 = (0..10).map(|l| a[i][l] * a[l][j]).sum();
                e2 += 0.1 * a2 * pm.dist(i, j).powi(2);
            }
        }
        let expected = (e2 / 2.0).sqrt().max(1.0);
        let got = distortion_lower_bound(&chain, &pm, 2.0, 1.0, 2).unwrap();
        assert!(close(got, expected, 1e-12), "{got} vs {expected}");
        assert!(got >= 1.0);
    }

    #[test]
    fn scaling_invariance() {
        let g = petersen();
        let pm = metric_from_graph(&g).unwrap();
        let chain = stationary_walk(&g).unwrap();
        let a = distortion_lower_bound(&chain, &pm, 2.0, 1.0, 6).unwrap();
        let b = distortion_lower_bound(&chain, &pm.scaled(8.0), 2.0, 1.0, 6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hypercube_drift_closed_form() {
        for n in [2usize, 3, 5] {
            let chain = stationary_walk(&hypercube_graph(n).unwrap()).unwrap();
            let m = gen_hypercube(n).unwrap();
            let prof = drift_profile(&chain, &m, 16).unwrap();
            for (t, &e) in prof.iter().enumerate() {
                let nf = n as f64;
                let closed = nf * (1.0 - (1.0 - 2.0 / nf).powi(t as i32));
                assert!(close(e, closed, 1e-9), "n={n} t={t}: {e} vs {closed}");
            }
        }
        let c2 = stationary_walk(&hypercube_graph(2).unwrap()).unwrap();
        assert!(close(drift_profile(&c2, &gen_hypercube(2).unwrap(), 1).unwrap()[1], 2.0, 1e-15));
    }

    #[test]
    fn outward_chain_probabilities() {
        let c = outward_tree_chain(3, 1).unwrap();
        assert_eq!(c.row(0), &[(1, 1.0 / 3.0), (2, 1.0 / 3.0), (3, 1.0 / 3.0)]);
        let c2 = outward_tree_chain(3, 2).unwrap();
        let d = c2.distributions(2);
        // vertex 4 is the first grandchild
        assert!(close(d[2][4], 1.0 / 6.0, 1e-15));
        assert!(close(d[2].iter().sum::<f64>(), 1.0, 1e-15));
    }

    #[test]
    fn laakso_chain_shape() {
        let c = laakso_chain(1).unwrap();
        let d = c.distributions(4);
        assert_eq!(d[4][1], 1.0);
        let branch_states: Vec<usize> = (0..c.len()).filter(|&v| c.row(v).len() == 2).collect();
        assert_eq!(branch_states.len(), 1);
        for k in 1..=3 {
            let c = laakso_chain(k).unwrap();
            let t = 4usize.pow(k as u32);
            let d = c.distributions(t);
            assert!(close(d[t][1], 1.0, 1e-12));
            assert_eq!(c.len(), gen_laakso(k).vertex_count());
        }
    }

    #[test]
    fn convexity_degenerate_cases() {
        let single = MarkovChain::from_dense(&[vec![1.0]], vec![1.0]).unwrap();
        assert!(matches!(
            markov_convexity_functional(&single, &FiniteMetric::new(1, vec![]).unwrap(), 2.0, 4),
            Err(Error::DegenerateChain)
        ));
    }

    #[test]
    fn tree_recursion_matches_generic_evaluator() {
        for depth in 2..=6 {
            let (chain, metric) = tree_chain_with_metric(3, depth).unwrap();
            for horizon in [depth, 2 * depth] {
                let generic = markov_convexity_functional(&chain, &metric, 2.0, horizon).unwrap();
                let exact = tree_convexity_exact(3, depth, 2.0, horizon).unwrap();
                assert!(close(generic.lhs, exact.lhs, 1e-9 * exact.lhs), "{generic:?} {exact:?}");
                assert!(close(generic.rhs, exact.rhs, 1e-12));
            }
        }
    }

    #[test]
    fn jump_length_helper() {
        let j = subset_jump_length(1000, 1000, 3, 200).unwrap();
        assert_eq!(j.m % 6, 0);
        assert!(j.feasible);
        assert!(!subset_jump_length(30, 30, 3, 8).unwrap().feasible);
        assert!(subset_jump_length(10, 0, 3, 5).is_none());
    }
}
