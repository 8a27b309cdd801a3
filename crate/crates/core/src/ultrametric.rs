//! Hierarchically separated trees, the ultrametrics they realise, the
//! isometric embedding into a Hilbert sphere, the compatible linear order and
//! the Hölder surjection onto the unit square.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Embedding, FiniteMetric, Metric};

/// Default order of the Hilbert curve used by [`holder_surjection`].
pub const DEFAULT_CURVE_ORDER: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct HstNode {
    pub parent: Option<usize>,
    pub diameter: f64,
    pub children: Vec<usize>,
    /// Point carried by a leaf.
    pub point: Option<usize>,
}

/// Rooted tree with strictly decreasing diameter labels whose leaves are the
/// points `0..n`. The distance between two points is the label of their least
/// common ancestor.
#[derive(Debug, Clone, PartialEq)]
pub struct HstTree {
    nodes: Vec<HstNode>,
    leaf_of: Vec<usize>,
    depth: Vec<u32>,
    root: usize,
}

impl HstTree {
    /// Assembles a tree from explicit nodes and checks every structural
    /// invariant.
    pub fn from_nodes(nodes: Vec<HstNode>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let roots: Vec<usize> = (0..nodes.len()).filter(|&v| nodes[v].parent.is_none()).collect();
        if roots.len() != 1 {
            return bad(format!("tree must have exactly one root, found {}", roots.len()));
        }
        let root = roots[0];
        let n_points = nodes.iter().filter(|v| v.point.is_some()).count();
        let mut leaf_of = vec![usize::MAX; n_points];
        for (id, node) in nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if p >= nodes.len() || !nodes[p].children.contains(&id) {
                    return bad(format!("node {id} is not listed among the children of {p}"));
                }
            }
            for &c in &node.children {
                if c >= nodes.len() || nodes[c].parent != Some(id) {
                    return bad(format!("child {c} of node {id} does not point back"));
                }
            }
            match node.point {
                Some(x) => {
                    if !node.children.is_empty() {
                        return bad(format!("leaf {id} has children"));
                    }
                    if node.diameter != 0.0 {
                        return bad(format!("leaf {id} has nonzero diameter"));
                    }
                    if x >= n_points || leaf_of[x] != usize::MAX {
                        return bad(format!("point {x} is not a valid unique leaf label"));
                    }
                    leaf_of[x] = id;
                }
                None => {
                    if node.children.len() < 2 {
                        return bad(format!("internal node {id} has fewer than two children"));
                    }
                    if !(node.diameter.is_finite() && node.diameter > 0.0) {
                        return bad(format!("internal node {id} has diameter {}", node.diameter));
                    }
                }
            }
            if let Some(p) = node.parent {
                if node.diameter >= nodes[p].diameter {
                    return bad(format!("diameter does not decrease from node {p} to {id}"));
                }
            }
        }
        let mut depth = vec![u32::MAX; nodes.len()];
        let mut stack = vec![root];
        depth[root] = 0;
        let mut seen = 1;
        while let Some(v) = stack.pop() {
            for &c in &nodes[v].children {
                if depth[c] != u32::MAX {
                    return bad("tree contains a cycle".into());
                }
                depth[c] = depth[v] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != nodes.len() {
            return bad("tree is not connected".into());
        }
        Ok(HstTree {
            nodes,
            leaf_of,
            depth,
            root,
        })
    }

    /// Builds a tree from nested partitions. `assign[l][x]` is the cluster of
    /// point `x` at level `l`, each level refines the previous one, level 0 is
    /// a single cluster and clusters at `labels[l]` have diameter label
    /// `labels[l]`. Chains of identical clusters are collapsed to their
    /// deepest label and singletons become leaves.
    pub fn from_partitions(assign: &[Vec<usize>], labels: &[f64]) -> Result<Self> {
        let n = assign.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::InvalidParameter("partition hierarchy is empty".into()));
        }
        let mut nodes = Vec::new();
        let all: Vec<usize> = (0..n).collect();
        build_from_partitions(&all, 0, None, assign, labels, &mut nodes)?;
        Self::from_nodes(nodes)
    }

    /// Single-point tree.
    pub fn singleton() -> Self {
        Self::from_nodes(vec![HstNode {
            parent: None,
            diameter: 0.0,
            children: Vec::new(),
            point: Some(0),
        }])
        .expect("a single leaf is a valid tree")
    }

    pub fn point_count(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &HstNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[HstNode] {
        &self.nodes
    }

    pub fn leaf(&self, point: usize) -> usize {
        self.leaf_of[point]
    }

    pub fn depth(&self, node: usize) -> u32 {
        self.depth[node]
    }

    pub fn diameter(&self) -> f64 {
        self.nodes[self.root].diameter
    }

    /// Least common ancestor by walking parent pointers.
    pub fn lca_naive(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.nodes[a].parent.unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.nodes[b].parent.unwrap();
        }
        while a != b {
            a = self.nodes[a].parent.unwrap();
            b = self.nodes[b].parent.unwrap();
        }
        a
    }

    /// Points below `node` in depth-first order.
    pub fn points_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            if let Some(p) = self.nodes[v].point {
                out.push(p);
            }
            stack.extend(self.nodes[v].children.iter().rev());
        }
        out
    }

    /// Induced ultrametric as a packed metric.
    pub fn to_metric(&self) -> FiniteMetric {
        let n = self.point_count();
        let mut full = vec![0.0; n * n];
        let mut under: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for v in self.post_order() {
            let node = &self.nodes[v];
            if let Some(p) = node.point {
                under[v].push(p);
                continue;
            }
            for (a, &ca) in node.children.iter().enumerate() {
                for &cb in &node.children[a + 1..] {
                    for &x in &under[ca] {
                        for &y in &under[cb] {
                            full[x * n + y] = node.diameter;
                            full[y * n + x] = node.diameter;
                        }
                    }
                }
            }
            let mut merged = Vec::new();
            for &c in &node.children {
                merged.append(&mut under[c]);
            }
            under[v] = merged;
        }
        FiniteMetric::from_fn(n, |i, j| full[i * n + j]).expect("distinct leaves have positive labels")
    }

    fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                order.push(v);
            } else {
                stack.push((v, true));
                stack.extend(self.nodes[v].children.iter().rev().map(|&c| (c, false)));
            }
        }
        order
    }
}

impl Metric for HstTree {
    fn len(&self) -> usize {
        self.point_count()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.nodes[self.lca_naive(self.leaf_of[i], self.leaf_of[j])].diameter
    }
}

fn build_from_partitions(
    set: &[usize],
    mut level: usize,
    parent: Option<usize>,
    assign: &[Vec<usize>],
    labels: &[f64],
    nodes: &mut Vec<HstNode>,
) -> Result<usize> {
    let id = nodes.len();
    nodes.push(HstNode {
        parent,
        diameter: 0.0,
        children: Vec::new(),
        point: None,
    });
    if set.len() == 1 {
        nodes[id].point = Some(set[0]);
        return Ok(id);
    }
    loop {
        let next = level + 1;
        if next >= assign.len() {
            return Err(Error::InvalidParameter(
                "finest partition level still has a non-singleton cluster".into(),
            ));
        }
        let c0 = assign[next][set[0]];
        if set.iter().any(|&x| assign[next][x] != c0) {
            break;
        }
        level = next;
    }
    nodes[id].diameter = labels[level];
    // set is sorted, so groups come out ordered by their minimum point
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &x in set {
        let c = assign[level + 1][x];
        match groups.iter_mut().find(|(g, _)| *g == c) {
            Some((_, members)) => members.push(x),
            None => groups.push((c, vec![x])),
        }
    }
    for (_, members) in groups {
        let child = build_from_partitions(&members, level + 1, Some(id), assign, labels, nodes)?;
        nodes[id].children.push(child);
    }
    Ok(id)
}

/// Recovers the tree of an ultrametric from its nested equivalence classes.
/// Children are ordered by their minimum point id.
pub fn hst_from_ultrametric(m: &FiniteMetric) -> Result<HstTree> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidParameter("metric has no points".into()));
    }
    let tol = crate::metric::TRIANGLE_TOLERANCE * m.diameter();
    for x in 0..n {
        for y in x + 1..n {
            let dxy = m.dist(x, y);
            for z in 0..n {
                if z != x && z != y && dxy > m.dist(x, z).max(m.dist(y, z)) + tol {
                    return Err(Error::NotUltrametric { x, y, z });
                }
            }
        }
    }
    let mut nodes = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    split_classes(m, &all, None, tol, &mut nodes);
    HstTree::from_nodes(nodes)
}

fn split_classes(m: &FiniteMetric, set: &[usize], parent: Option<usize>, tol: f64, nodes: &mut Vec<HstNode>) -> usize {
    let id = nodes.len();
    nodes.push(HstNode {
        parent,
        diameter: 0.0,
        children: Vec::new(),
        point: None,
    });
    if set.len() == 1 {
        nodes[id].point = Some(set[0]);
        return id;
    }
    let mut diam: f64 = 0.0;
    for (a, &x) in set.iter().enumerate() {
        for &y in &set[a + 1..] {
            diam = diam.max(m.dist(x, y));
        }
    }
    nodes[id].diameter = diam;
    let mut class = vec![usize::MAX; set.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in 0..set.len() {
        if class[a] != usize::MAX {
            continue;
        }
        let c = classes.len();
        let mut members = Vec::new();
        for b in a..set.len() {
            if class[b] == usize::MAX && (a == b || m.dist(set[a], set[b]) < diam - tol) {
                class[b] = c;
                members.push(set[b]);
            }
        }
        classes.push(members);
    }
    for members in classes {
        let child = split_classes(m, &members, Some(id), tol, nodes);
        nodes[id].children.push(child);
    }
    id
}

/// Label of the least common ancestor of two points.
pub fn ultra_distance(t: &HstTree, x: usize, y: usize) -> Result<f64> {
    for p in [x, y] {
        if p >= t.point_count() {
            return Err(Error::UnknownPoint(p));
        }
    }
    Ok(t.dist(x, y))
}

/// Isometric embedding into the Euclidean sphere of radius `diam/sqrt(2)`.
/// Every non-root node `v` owns a coordinate, and a point picks up
/// `sqrt((diam(parent v)^2 - diam(v)^2)/2)` on each of its ancestors.
pub fn hilbert_embed(t: &HstTree) -> Embedding {
    let root = t.root();
    let mut coord = vec![usize::MAX; t.node_count()];
    let mut dim = 0;
    for (v, c) in coord.iter_mut().enumerate() {
        if v != root {
            *c = dim;
            dim += 1;
        }
    }
    let images = (0..t.point_count())
        .map(|x| {
            let mut img = vec![0.0; dim];
            let mut v = t.leaf(x);
            while let Some(p) = t.node(v).parent {
                let (dp, dv) = (t.node(p).diameter, t.node(v).diameter);
                img[coord[v]] = ((dp * dp - dv * dv) / 2.0).sqrt();
                v = p;
            }
            img
        })
        .collect();
    Embedding::new(images).expect("all images share one dimension")
}

/// Leaves in depth-first order, children visited in stored order.
pub fn linear_order(t: &HstTree) -> Vec<usize> {
    t.points_under(t.root())
}

/// Image of the Hölder surjection together with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderMap {
    /// Cumulative measure of the points strictly before each point.
    pub phi: Vec<f64>,
    /// Point of the unit square assigned to each point.
    pub images: Vec<[f64; 2]>,
    /// Smallest `K` with `mu(A) <= K diam(A)^2` over internal subtrees `A`.
    pub constant: f64,
    pub curve_order: u32,
}

/// Cumulative measure along the linear order composed with the Hilbert curve.
pub fn holder_surjection(t: &HstTree, mu: &[f64], curve_order: u32) -> Result<HolderMap> {
    let n = t.point_count();
    if mu.len() != n {
        return Err(Error::InvalidMeasure(format!("expected {n} weights, got {}", mu.len())));
    }
    if mu.iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
        return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
    }
    if curve_order == 0 || curve_order > 31 {
        return Err(Error::InvalidParameter(format!("curve order {curve_order} outside 1..=31")));
    }
    let mut phi = vec![0.0; n];
    let mut acc = 0.0;
    for x in linear_order(t) {
        phi[x] = acc;
        acc += mu[x];
    }
    let mut mass = vec![0.0; t.node_count()];
    let mut constant: f64 = 0.0;
    for v in t.post_order() {
        let node = t.node(v);
        mass[v] = match node.point {
            Some(x) => mu[x],
            None => node.children.iter().map(|&c| mass[c]).sum(),
        };
        if node.point.is_none() {
            constant = constant.max(mass[v] / (node.diameter * node.diameter));
        }
    }
    let images = phi.iter().map(|&s| hilbert_point(s, curve_order)).collect();
    Ok(HolderMap {
        phi,
        images,
        constant,
        curve_order,
    })
}

/// Cell `d` of the order-`order` Hilbert curve on the `2^order` grid.
pub fn hilbert_d2xy(order: u32, d: u64) -> (u64, u64) {
    let side = 1u64 << order;
    let (mut x, mut y) = (0u64, 0u64);
    let mut t = d;
    let mut s = 1u64;
    while s < side {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x, y)
}

/// Hilbert curve at parameter `s` in `[0,1]`, scaled so that the curve starts
/// at `(0,0)` and ends at `(1,0)`.
pub fn hilbert_point(s: f64, order: u32) -> [f64; 2] {
    let cells = 1u64 << (2 * order);
    let d = (s.clamp(0.0, 1.0) * (cells - 1) as f64).round() as u64;
    let (x, y) = hilbert_d2xy(order, d.min(cells - 1));
    let scale = ((1u64 << order) - 1) as f64;
    [x as f64 / scale, y as f64 / scale]
}

/// Random tree on `n` points: each internal node splits its points into two
/// to four nonempty groups, and child labels shrink by a random factor in
/// `[0.1, 0.9]`.
pub fn random_hst(n: usize, seed: u64) -> Result<HstTree> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree needs at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
    let mut nodes = Vec::new();
    grow_random(&mut perm, None, 1.0 + rng.random::<f64>(), &mut rng, &mut nodes);
    HstTree::from_nodes(nodes)
}

fn grow_random(points: &mut [usize], parent: Option<usize>, diam: f64, rng: &mut ChaCha8Rng, nodes: &mut Vec<HstNode>) -> usize {
    let id = nodes.len();
    nodes.push(HstNode {
        parent,
        diameter: 0.0,
        children: Vec::new(),
        point: None,
    });
    if points.len() == 1 {
        nodes[id].point = Some(points[0]);
        return id;
    }
    nodes[id].diameter = diam;
    let parts = rng.random_range(2..=4usize).min(points.len());
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, points.len() - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(points.len());
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(parts);
    let mut start = 0;
    for &end in &cuts {
        let mut g = points[start..end].to_vec();
        g.sort_unstable();
        groups.push(g);
        start = end;
    }
    groups.sort_by_key(|g| g[0]);
    for mut g in groups {
        let child_diam = diam * rng.random_range(0.1..0.9);
        let child = grow_random(&mut g, Some(id), child_diam, rng, nodes);
        nodes[id].children.push(child);
    }
    id
}
