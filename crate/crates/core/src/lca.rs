//! Constant-time lowest common ancestors via an Euler tour and a sparse table
//! of range minima.

use crate::ultrametric::HstTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcaIndex {
    euler: Vec<u32>,
    first: Vec<u32>,
    depth: Vec<u32>,
    /// `table[j * len + i]` is the shallowest node among `euler[i..i + 2^j]`.
    table: Vec<u32>,
    len: usize,
}

impl LcaIndex {
    pub fn new(t: &HstTree) -> Self {
        let nodes = t.node_count();
        let depth: Vec<u32> = (0..nodes).map(|v| t.depth(v)).collect();
        let mut euler = Vec::with_capacity(2 * nodes - 1);
        let mut first = vec![0u32; nodes];
        let mut stack = vec![(t.root(), 0usize)];
        while let Some((v, next_child)) = stack.pop() {
            if next_child == 0 {
                first[v] = euler.len() as u32;
            }
            euler.push(v as u32);
            let children = &t.node(v).children;
            if next_child < children.len() {
                stack.push((v, next_child + 1));
                stack.push((children[next_child], 0));
            }
        }
        let len = euler.len();
        let levels = (usize::BITS - len.leading_zeros()) as usize;
        let mut table = Vec::with_capacity(levels * len);
        table.extend_from_slice(&euler);
        for j in 1..levels {
            let half = 1 << (j - 1);
            let prev = (j - 1) * len;
            for i in 0..len {
                let a = table[prev + i];
                let b = if i + half < len { table[prev + i + half] } else { a };
                table.push(if depth[b as usize] < depth[a as usize] { b } else { a });
            }
        }
        LcaIndex {
            euler,
            first,
            depth,
            table,
            len,
        }
    }

    #[inline]
    pub fn lca(&self, u: usize, v: usize) -> usize {
        self.lca_counted(u, v).0
    }

    /// LCA together with the number of array reads it took.
    #[inline]
    pub fn lca_counted(&self, u: usize, v: usize) -> (usize, u32) {
        let mut probes = 0u32;
        let mut read = |s: &[u32], i: usize| {
            probes += 1;
            s[i]
        };
        let (mut lo, mut hi) = (read(&self.first, u) as usize, read(&self.first, v) as usize);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let span = hi - lo + 1;
        let j = (usize::BITS - 1 - span.leading_zeros()) as usize;
        let a = read(&self.table, j * self.len + lo);
        let b = read(&self.table, j * self.len + hi + 1 - (1 << j));
        let node = if read(&self.depth, b as usize) < read(&self.depth, a as usize) { b } else { a };
        (node as usize, probes)
    }

    pub fn euler_tour(&self) -> &[u32] {
        &self.euler
    }

    /// Number of stored integers.
    pub fn size_in_scalars(&self) -> usize {
        self.euler.len() + self.first.len() + self.depth.len() + self.table.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ultrametric::{hst_from_ultrametric, random_hst};
    use crate::FiniteMetric;

    #[test]
    fn two_leaves_meet_at_root() {
        let t = hst_from_ultrametric(&FiniteMetric::new(2, vec![4.0]).unwrap()).unwrap();
        let idx = LcaIndex::new(&t);
        assert_eq!(idx.lca(t.leaf(0), t.leaf(1)), t.root());
        assert_eq!(idx.euler_tour().len(), 2 * t.node_count() - 1);
    }

    #[test]
    fn path_shaped_tree() {
        // caterpillar: point i splits off at diameter 2^(n-i)
        let n = 9;
        let m = FiniteMetric::from_fn(n, |i, j| 2f64.powi((n - i.min(j)) as i32)).unwrap();
        let t = hst_from_ultrametric(&m).unwrap();
        let idx = LcaIndex::new(&t);
        for a in 0..t.node_count() {
            for b in 0..t.node_count() {
                assert_eq!(idx.lca(a, b), t.lca_naive(a, b));
            }
        }
    }

    #[test]
    fn matches_naive_on_random_trees() {
        for seed in 0..10 {
            let t = random_hst(50 + seed as usize * 13, seed).unwrap();
            let idx = LcaIndex::new(&t);
            for a in 0..t.node_count() {
                for b in 0..t.node_count() {
                    let (node, probes) = idx.lca_counted(a, b);
                    assert_eq!(node, t.lca_naive(a, b));
                    assert!(probes <= 8);
                }
            }
        }
    }
}
