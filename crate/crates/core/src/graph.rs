//! Graphs, their shortest-path metrics, girth, and the generators used as
//! fixtures throughout the crate.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;

/// Marker for unreachable pairs in [`HopDistances`].
pub const UNREACHABLE: u32 = u32::MAX;

/// Default attempt budget for [`gen_random_regular`].
pub const DEFAULT_ATTEMPTS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Simple undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {}", e.u)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.u, e.v, e.weight
                )));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidParameter(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
        }
        Ok(Graph { n, edges, adj })
    }

    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(u, v)| Edge { u, v, weight: 1.0 }).collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    /// Common degree when every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.bfs(0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Hop distances from `src`, [`UNREACHABLE`] where no path exists.
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn hop_distances(&self) -> HopDistances {
        let mut data = Vec::with_capacity(self.n * self.n);
        for s in 0..self.n {
            data.extend(self.bfs(s));
        }
        HopDistances { n: self.n, data }
    }

    /// Dense 0/1 adjacency matrix in row-major order.
    pub fn adjacency(&self) -> Vec<i64> {
        let mut a = vec![0i64; self.n * self.n];
        for e in &self.edges {
            a[e.u * self.n + e.v] = 1;
            a[e.v * self.n + e.u] = 1;
        }
        a
    }

    fn dijkstra_integer(&self, src: usize) -> Vec<Option<u64>> {
        let mut dist: Vec<Option<u64>> = vec![None; self.n];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(0);
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u].is_some_and(|x| x < d) {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w as u64;
                if dist[v].is_none_or(|x| nd < x) {
                    dist[v] = Some(nd);
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }

    fn dijkstra_real(&self, src: usize) -> Vec<Option<f64>> {
        #[derive(PartialEq)]
        struct Key(f64, usize);
        impl Eq for Key {}
        impl PartialOrd for Key {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Key {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
            }
        }
        let mut dist: Vec<Option<f64>> = vec![None; self.n];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(0.0);
        heap.push(Key(0.0, src));
        while let Some(Key(d, u)) = heap.pop() {
            if dist[u].is_some_and(|x| x < d) {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if dist[v].is_none_or(|x| nd < x) {
                    dist[v] = Some(nd);
                    heap.push(Key(nd, v));
                }
            }
        }
        dist
    }
}

/// All-pairs hop distances, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopDistances {
    n: usize,
    data: Vec<u32>,
}

impl HopDistances {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.data[u * self.n + v]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn diameter(&self) -> u32 {
        self.data.iter().copied().filter(|&d| d != UNREACHABLE).max().unwrap_or(0)
    }
}

/// Shortest-path metric. Integer weights are accumulated exactly.
pub fn metric_from_graph(g: &Graph) -> Result<FiniteMetric> {
    let n = g.vertex_count();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    if g.is_unit_weight() {
        for s in 0..n {
            let d = g.bfs(s);
            for (t, &dt) in d.iter().enumerate().skip(s + 1) {
                if dt == UNREACHABLE {
                    return Err(Error::DisconnectedGraph(s, t));
                }
                upper.push(f64::from(dt));
            }
        }
    } else if g.edges().iter().all(|e| e.weight.fract() == 0.0 && e.weight < 2f64.powi(52)) {
        for s in 0..n {
            let d = g.dijkstra_integer(s);
            for (t, dt) in d.iter().enumerate().skip(s + 1) {
                let dt = dt.ok_or(Error::DisconnectedGraph(s, t))?;
                upper.push(dt as f64);
            }
        }
    } else {
        for s in 0..n {
            let d = g.dijkstra_real(s);
            for (t, dt) in d.iter().enumerate().skip(s + 1) {
                upper.push(dt.ok_or(Error::DisconnectedGraph(s, t))?);
            }
        }
    }
    FiniteMetric::new_trusted(n, upper)
}

/// Length of the shortest cycle, `None` for forests.
pub fn girth(g: &Graph) -> Option<usize> {
    let n = g.vertex_count();
    let mut best = usize::MAX;
    let mut dist = vec![UNREACHABLE; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        dist.fill(UNREACHABLE);
        parent.fill(usize::MAX);
        queue.clear();
        dist[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] as usize + 1 >= best {
                break;
            }
            for v in g.neighbors(u) {
                if dist[v] == UNREACHABLE {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v {
                    best = best.min((dist[u] + dist[v] + 1) as usize);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

/// Parent/depth description of a rooted tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<u32>,
    pub children: Vec<Vec<usize>>,
}

impl RootedTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }
}

/// The complete tree `T_n^k`: the root has `k` children, every other internal
/// vertex `k - 1`, and every root-to-leaf path has length `depth`.
/// Vertices are numbered in breadth-first order with the root at 0.
pub fn gen_tree(k: usize, depth: usize) -> Result<Graph> {
    let t = tree_layout(k, depth)?;
    let pairs: Vec<(usize, usize)> = (1..t.len()).map(|v| (t.parent[v].unwrap(), v)).collect();
    Graph::unweighted(t.len(), &pairs)
}

/// Rooted structure of [`gen_tree`] with identical vertex numbering.
pub fn tree_layout(k: usize, depth: usize) -> Result<RootedTree> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("tree branching must be at least 3, got {k}")));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("tree depth must be at least 1".into()));
    }
    let mut parent = vec![None];
    let mut depths = vec![0u32];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let c = if v == 0 { k } else { k - 1 };
            for _ in 0..c {
                let id = parent.len();
                parent.push(Some(v));
                depths.push(level as u32);
                children.push(Vec::new());
                children[v].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(RootedTree {
        parent,
        depth: depths,
        children,
    })
}

/// Laakso graph `G_k` with its edges oriented left to right. Vertex 0 is the
/// leftmost vertex and vertex 1 the rightmost.
pub fn laakso_oriented(k: usize) -> (usize, Vec<(usize, usize)>) {
    let mut n = 2;
    let mut edges = vec![(0usize, 1usize)];
    for _ in 0..k {
        let mut next = Vec::with_capacity(edges.len() * 6);
        for &(u, v) in &edges {
            let (a, b1, b2, c) = (n, n + 1, n + 2, n + 3);
            n += 4;
            next.extend([(u, a), (a, b1), (a, b2), (b1, c), (b2, c), (c, v)]);
        }
        edges = next;
    }
    (n, edges)
}

/// Laakso graph `G_k`: each edge of `G_{k-1}` becomes a path with a
/// quadrilateral replacing its middle third.
pub fn gen_laakso(k: usize) -> Graph {
    let (n, edges) = laakso_oriented(k);
    Graph::unweighted(n, &edges).expect("Laakso construction yields a simple graph")
}

pub fn cycle(m: usize) -> Result<Graph> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!("cycle length must be at least 3, got {m}")));
    }
    let pairs: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    Graph::unweighted(m, &pairs)
}

/// Product of cycles `C_a x C_b`.
pub fn torus(a: usize, b: usize) -> Result<Graph> {
    if a < 3 || b < 3 {
        return Err(Error::InvalidParameter(format!("torus sides must be at least 3, got {a}x{b}")));
    }
    let id = |i: usize, j: usize| i * b + j;
    let mut pairs = Vec::with_capacity(2 * a * b);
    for i in 0..a {
        for j in 0..b {
            pairs.push((id(i, j), id((i + 1) % a, j)));
            pairs.push((id(i, j), id(i, (j + 1) % b)));
        }
    }
    Graph::unweighted(a * b, &pairs)
}

/// The graph of `{-1,1}^dim`; vertices differing in one bit are adjacent.
pub fn hypercube_graph(dim: usize) -> Result<Graph> {
    if dim == 0 || dim > crate::metric::MAX_CUBE_DIM {
        return Err(Error::InvalidParameter(format!("hypercube dimension {dim} out of range")));
    }
    let n = 1usize << dim;
    let pairs: Vec<_> = (0..n)
        .flat_map(|v| (0..dim).map(move |i| (v, v ^ (1 << i))).filter(|&(u, w)| u < w))
        .collect();
    Graph::unweighted(n, &pairs)
}

fn from_lcf(n: usize, shifts: &[isize]) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for i in 0..n {
        let j = (i as isize + shifts[i % shifts.len()]).rem_euclid(n as isize) as usize;
        if i < j {
            pairs.push((i, j));
        }
    }
    Graph::unweighted(n, &pairs).expect("LCF notation yields a simple cubic graph")
}

pub fn petersen() -> Graph {
    let mut pairs = Vec::with_capacity(15);
    for i in 0..5 {
        pairs.push((i, (i + 1) % 5));
        pairs.push((i, i + 5));
        pairs.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::unweighted(10, &pairs).expect("Petersen graph is simple")
}

/// The (3,6)-cage on 14 vertices.
pub fn heawood() -> Graph {
    from_lcf(14, &[5, -5])
}

/// The (3,8)-cage on 30 vertices.
pub fn tutte_coxeter() -> Graph {
    from_lcf(30, &[-13, -9, 7, -7, 9, 13])
}

fn parse_args(s: &str, name: &str) -> Result<Vec<usize>> {
    let inner = s
        .strip_prefix(name)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::UnknownName(s.to_string()))?;
    inner
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::UnknownName(s.to_string())))
        .collect()
}

/// Named fixtures: `petersen`, `heawood`, `tutte_coxeter`, `cycle(m)`,
/// `torus(a,b)` and `hypercube(d)`.
pub fn gen_named(name: &str) -> Result<Graph> {
    let name = name.trim();
    match name {
        "petersen" => Ok(petersen()),
        "heawood" => Ok(heawood()),
        "tutte_coxeter" => Ok(tutte_coxeter()),
        _ if name.starts_with("cycle(") => match parse_args(name, "cycle")?.as_slice() {
            [m] => cycle(*m),
            _ => Err(Error::UnknownName(name.to_string())),
        },
        _ if name.starts_with("torus(") => match parse_args(name, "torus")?.as_slice() {
            [a, b] => torus(*a, *b),
            _ => Err(Error::UnknownName(name.to_string())),
        },
        _ if name.starts_with("hypercube(") => match parse_args(name, "hypercube")?.as_slice() {
            [d] => hypercube_graph(*d),
            _ => Err(Error::UnknownName(name.to_string())),
        },
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// Seeded configuration-model sampler for simple `k`-regular graphs with girth
/// at least `girth_min`, rejecting loops, multi-edges and short cycles.
pub fn gen_random_regular(n: usize, k: usize, girth_min: usize, seed: u64) -> Result<Graph> {
    gen_random_regular_with_budget(n, k, girth_min, seed, DEFAULT_ATTEMPTS)
}

pub fn gen_random_regular_with_budget(
    n: usize,
    k: usize,
    girth_min: usize,
    seed: u64,
    attempts: u64,
) -> Result<Graph> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("degree must be at least 3, got {k}")));
    }
    if !(n * k).is_multiple_of(2) || n <= k {
        return Err(Error::InvalidParameter(format!("no simple {k}-regular graph on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    let mut seen = HashSet::with_capacity(n * k / 2);
    'attempt: for _ in 0..attempts {
        stubs.shuffle(&mut rng);
        seen.clear();
        let mut pairs = Vec::with_capacity(n * k / 2);
        for ch in stubs.chunks_exact(2) {
            let (u, v) = (ch[0].min(ch[1]), ch[0].max(ch[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            pairs.push((u, v));
        }
        let g = Graph::unweighted(n, &pairs)?;
        if girth(&g).is_none_or(|gi| gi >= girth_min) {
            return Ok(g);
        }
    }
    Err(Error::GenerationTimeout { attempts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_metrics() {
        let c4 = cycle(4).unwrap();
        assert_eq!(metric_from_graph(&c4).unwrap().dist(0, 2), 2.0);
        let e = Graph::unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(metric_from_graph(&e).unwrap().dist(0, 1), 1.0);
        assert_eq!(metric_from_graph(&petersen()).unwrap().diameter(), 2.0);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = Graph::unweighted(3, &[(0, 1)]).unwrap();
        assert!(matches!(metric_from_graph(&g), Err(Error::DisconnectedGraph(0, 2))));
    }

    #[test]
    fn weighted_metrics() {
        let g = Graph::new(
            3,
            vec![
                Edge { u: 0, v: 1, weight: 2.0 },
                Edge { u: 1, v: 2, weight: 3.0 },
                Edge { u: 0, v: 2, weight: 7.0 },
            ],
        )
        .unwrap();
        assert_eq!(metric_from_graph(&g).unwrap().dist(0, 2), 5.0);
        let h = Graph::new(
            3,
            vec![Edge { u: 0, v: 1, weight: 0.25 }, Edge { u: 1, v: 2, weight: 0.5 }],
        )
        .unwrap();
        assert_eq!(metric_from_graph(&h).unwrap().dist(0, 2), 0.75);
    }

    #[test]
    fn malformed_graphs() {
        assert!(Graph::unweighted(2, &[(0, 0)]).is_err());
        assert!(Graph::unweighted(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::unweighted(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn tree_sizes() {
        assert_eq!(gen_tree(3, 1).unwrap().vertex_count(), 4);
        assert_eq!(gen_tree(3, 2).unwrap().vertex_count(), 10);
        assert_eq!(gen_tree(4, 2).unwrap().vertex_count(), 17);
        assert!(gen_tree(2, 3).is_err());
        let t = gen_tree(3, 3).unwrap();
        assert_eq!(t.degree(0), 3);
        assert_eq!(t.degree(1), 3);
    }

    #[test]
    fn laakso_counts() {
        let g0 = gen_laakso(0);
        assert_eq!((g0.vertex_count(), g0.edge_count()), (2, 1));
        let g1 = gen_laakso(1);
        assert_eq!((g1.vertex_count(), g1.edge_count()), (6, 6));
        assert_eq!(metric_from_graph(&g1).unwrap().diameter(), 4.0);
        assert_eq!(gen_laakso(2).edge_count(), 36);
    }

    #[test]
    fn laakso_endpoint_distance_scales_by_four() {
        for k in 0..=4 {
            let d = gen_laakso(k).bfs(0)[1];
            assert_eq!(d, 4u32.pow(k as u32));
        }
    }

    #[test]
    fn named_graphs() {
        let p = gen_named("petersen").unwrap();
        assert_eq!((p.vertex_count(), p.edge_count()), (10, 15));
        assert_eq!(girth(&p), Some(5));
        let h = gen_named("heawood").unwrap();
        assert_eq!(h.vertex_count(), 14);
        assert_eq!(girth(&h), Some(6));
        let tc = gen_named("tutte_coxeter").unwrap();
        assert_eq!((tc.vertex_count(), tc.edge_count()), (30, 45));
        assert_eq!(tc.regular_degree(), Some(3));
        assert_eq!(girth(&tc), Some(8));
        assert_eq!(girth(&gen_named("cycle(5)").unwrap()), Some(5));
        assert_eq!(girth(&gen_named("cycle(7)").unwrap()), Some(7));
        assert_eq!(girth(&gen_named("torus(4,5)").unwrap()), Some(4));
        assert_eq!(girth(&gen_named("hypercube(3)").unwrap()), Some(4));
        assert!(matches!(gen_named("dodecahedron"), Err(Error::UnknownName(_))));
        assert!(gen_named("cycle(x)").is_err());
    }

    #[test]
    fn forests_have_no_girth() {
        assert_eq!(girth(&gen_tree(3, 2).unwrap()), None);
    }

    #[test]
    fn random_regular_graphs() {
        let g = gen_random_regular(10, 3, 5, 11).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        assert!(girth(&g).unwrap() >= 5);

        let k4 = gen_random_regular(4, 3, 3, 1).unwrap();
        assert_eq!(k4.edge_count(), 6);

        // the prism has triangles, so only K_{3,3} survives the girth filter
        let k33 = gen_random_regular(6, 3, 4, 2).unwrap();
        assert_eq!(girth(&k33), Some(4));
        let hop = k33.hop_distances();
        assert_eq!(hop.diameter(), 2);

        let again = gen_random_regular(10, 3, 5, 11).unwrap();
        assert_eq!(g, again);
        assert!(matches!(
            gen_random_regular_with_budget(8, 3, 7, 0, 50),
            Err(Error::GenerationTimeout { attempts: 50 })
        ));
    }

    #[test]
    fn tree_leaf_distances_match_lca_depth() {
        for k in 3..=4 {
            for depth in 1..=5 {
                if k == 4 && depth == 5 {
                    continue;
                }
                let g = gen_tree(k, depth).unwrap();
                let t = tree_layout(k, depth).unwrap();
                let leaves: Vec<usize> = (0..t.len()).filter(|&v| t.is_leaf(v)).collect();
                for &a in leaves.iter().step_by(3) {
                    let d = g.bfs(a);
                    for &b in &leaves {
                        let (mut x, mut y) = (a, b);
                        while x != y {
                            if t.depth[x] >= t.depth[y] {
                                x = t.parent[x].unwrap();
                            } else {
                                y = t.parent[y].unwrap();
                            }
                        }
                        let expected = 2 * depth as u32 - 2 * t.depth[x];
                        assert_eq!(d[b], expected);
                    }
                }
            }
        }
    }

    #[test]
    fn generator_metrics_are_valid() {
        let graphs = vec![
            petersen(),
            heawood(),
            tutte_coxeter(),
            gen_tree(3, 4).unwrap(),
            gen_laakso(3),
            torus(8, 8).unwrap(),
            hypercube_graph(6).unwrap(),
            gen_random_regular(64, 3, 5, 3).unwrap(),
        ];
        for g in graphs {
            assert!(g.vertex_count() <= 512);
            metric_from_graph(&g).unwrap().validate().unwrap();
        }
    }
}
