//! Finite metric spaces and distortion of maps between them.
//!
//! [`FiniteMetric`] stores the strict upper triangle of the distance matrix in
//! row-major order. Hamming cubes are stored implicitly so that dimensions up
//! to 16 remain addressable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative slack allowed in triangle-inequality checks.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Largest supported Hamming cube dimension.
pub const MAX_CUBE_DIM: usize = 16;

/// Anything that can report a distance between indexed points.
pub trait Metric {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Packed(Vec<f64>),
    /// `{-1,1}^dim` with the l1 metric, i.e. twice the Hamming distance.
    Cube { dim: u32 },
}

/// Symmetric, positive-definite distance table over `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    storage: Storage,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl FiniteMetric {
    /// Builds a metric from its packed upper triangle and validates every
    /// invariant (positivity and the triangle inequality).
    pub fn new(n: usize, upper: Vec<f64>) -> Result<Self> {
        let m = Self::new_trusted(n, upper)?;
        m.validate()?;
        Ok(m)
    }

    /// Builds a metric checking only shape and positivity. Use for inputs that
    /// satisfy the triangle inequality by construction (norms, graph metrics).
    pub fn new_trusted(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::InvalidMetric(format!(
                "expected {expected} distances for {n} points, got {}",
                upper.len()
            )));
        }
        let m = FiniteMetric {
            n,
            storage: Storage::Packed(upper),
        };
        for i in 0..n {
            for j in i + 1..n {
                let d = m.dist(i, j);
                if !(d.is_finite() && d > 0.0) {
                    return Err(Error::InvalidMetric(format!(
                        "distance between {i} and {j} must be positive and finite, got {d}"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Builds a metric from any distance function over `n` points.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(f(i, j));
            }
        }
        Self::new_trusted(n, upper)
    }

    /// Euclidean distances between the given points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        Self::from_fn(points.len(), |i, j| euclidean(&points[i], &points[j]))
    }

    /// `n` points drawn uniformly from `[0,1]^dim` under the l2 metric.
    pub fn random_cloud(n: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::from_points(&random_points(n, dim, seed))
    }

    /// Copies another metric into packed storage.
    pub fn from_metric(m: &impl Metric) -> Result<Self> {
        Self::from_fn(m.len(), |i, j| m.dist(i, j))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        match &self.storage {
            Storage::Packed(v) => v[packed_index(self.n, a, b)],
            Storage::Cube { .. } => 2.0 * f64::from((a ^ b).count_ones()),
        }
    }

    /// The packed upper triangle, materialised for implicit storage.
    pub fn upper_triangle(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Packed(v) => v.clone(),
            Storage::Cube { .. } => {
                let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
                for i in 0..self.n {
                    for j in i + 1..self.n {
                        out.push(self.dist(i, j));
                    }
                }
                out
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        self.pairs().map(|(_, _, d)| d).fold(0.0, f64::max)
    }

    pub fn min_distance(&self) -> Option<f64> {
        self.pairs().map(|(_, _, d)| d).reduce(f64::min)
    }

    /// Iterates `(i, j, d(i,j))` over `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.dist(i, j))))
    }

    /// Checks positivity and the triangle inequality with relative slack
    /// [`TRIANGLE_TOLERANCE`].
    pub fn validate(&self) -> Result<()> {
        if let Storage::Cube { .. } = self.storage {
            return Ok(());
        }
        let tol = TRIANGLE_TOLERANCE * self.diameter();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let dij = self.dist(i, j);
                if !(dij > 0.0) {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) = {dij} is not positive")));
                }
                for k in 0..self.n {
                    if k == i || k == j {
                        continue;
                    }
                    if dij > self.dist(i, k) + self.dist(k, j) + tol {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Restriction to `points`, reindexed in the given order.
    pub fn submetric(&self, points: &[usize]) -> FiniteMetric {
        let k = points.len();
        let mut upper = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for a in 0..k {
            for b in a + 1..k {
                upper.push(self.dist(points[a], points[b]));
            }
        }
        FiniteMetric {
            n: k,
            storage: Storage::Packed(upper),
        }
    }

    /// Multiplies every distance by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> FiniteMetric {
        let upper = self.upper_triangle().into_iter().map(|d| d * factor).collect();
        FiniteMetric {
            n: self.n,
            storage: Storage::Packed(upper),
        }
    }
}

impl Metric for FiniteMetric {
    fn len(&self) -> usize {
        self.n
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        FiniteMetric::dist(self, i, j)
    }
}

/// `{-1,1}^dim` with the l1 metric; point `b` has `eps_i = -1` iff bit `i` of
/// `b` is set.
pub fn gen_hypercube(dim: usize) -> Result<FiniteMetric> {
    if dim == 0 || dim > MAX_CUBE_DIM {
        return Err(Error::InvalidParameter(format!(
            "hypercube dimension must lie in 1..={MAX_CUBE_DIM}, got {dim}"
        )));
    }
    Ok(FiniteMetric {
        n: 1 << dim,
        storage: Storage::Cube { dim: dim as u32 },
    })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

/// Vectors in Euclidean space, one per domain point.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    images: Vec<Vec<f64>>,
    dim: usize,
}

impl Embedding {
    pub fn new(images: Vec<Vec<f64>>) -> Result<Self> {
        let dim = images.first().map_or(0, Vec::len);
        if images.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter("embedding images differ in dimension".into()));
        }
        Ok(Embedding { images, dim })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, i: usize) -> &[f64] {
        &self.images[i]
    }

    pub fn images(&self) -> &[Vec<f64>] {
        &self.images
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.images[i].iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Metric for Embedding {
    fn len(&self) -> usize {
        self.images.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.images[i], &self.images[j])
    }
}

/// The pullback `d(f(i), f(j))` of a metric along a point map.
#[derive(Debug, Clone, Copy)]
pub struct Pullback<'a, M: ?Sized> {
    pub base: &'a M,
    pub map: &'a [usize],
}

impl<M: Metric + ?Sized> Metric for Pullback<'_, M> {
    fn len(&self) -> usize {
        self.map.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.base.dist(self.map[i], self.map[j])
    }
}

/// Worst expansion, worst contraction and their product for a fixed map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub expansion: f64,
    pub contraction: f64,
    pub distortion: f64,
}

/// Distortion of `f: src -> dst`, given as the point map `f[i]`.
pub fn distortion_of_map(src: &impl Metric, dst: &impl Metric, f: &[usize]) -> Result<Distortion> {
    if f.len() != src.len() {
        return Err(Error::InvalidParameter(format!(
            "map has {} entries for {} points",
            f.len(),
            src.len()
        )));
    }
    if let Some(&bad) = f.iter().find(|&&y| y >= dst.len()) {
        return Err(Error::UnknownPoint(bad));
    }
    distortion_between(src, &Pullback { base: dst, map: f })
}

/// Distortion of the map `i -> i` between two metrics on the same index set.
/// Fails with [`Error::NonInjective`] when two points collapse.
pub fn distortion_between(src: &impl Metric, image: &impl Metric) -> Result<Distortion> {
    let n = src.len();
    let mut expansion: f64 = 0.0;
    let mut contraction: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let ds = src.dist(i, j);
            let dd = image.dist(i, j);
            if dd <= 0.0 {
                return Err(Error::NonInjective(i, j));
            }
            expansion = expansion.max(dd / ds);
            contraction = contraction.max(ds / dd);
        }
    }
    if n < 2 {
        expansion = 1.0;
        contraction = 1.0;
    }
    Ok(Distortion {
        expansion,
        contraction,
        distortion: expansion * contraction,
    })
}
