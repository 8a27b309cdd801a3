//! Vector-valued Walsh analysis on the discrete cube, the heat semigroup,
//! Pisier's inequality, and the type and cotype functionals of metric maps.
//!
//! Sign patterns and subsets are bit masks: bit `b` of `eps` is set when
//! `eps_b = -1`, bit `b` of `A` when `b` belongs to `A`. Coordinates are
//! 0-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Metric, MAX_CUBE_DIM};

/// Largest dimension for computations over all pairs of sign patterns.
pub const MAX_PAIR_DIM: usize = 12;

/// Largest `m^n 3^n` accepted by the cotype functional.
pub const MAX_TORUS_TERMS: usize = 1 << 22;

/// Norm on the codomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// `l_p` with `1 <= p < inf`.
    Lp(f64),
    Sup,
}

impl Norm {
    pub fn of(&self, v: &[f64]) -> f64 {
        match *self {
            Norm::Sup => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::Lp(p) if p == 1.0 => v.iter().map(|x| x.abs()).sum(),
            Norm::Lp(p) if p == 2.0 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Lp(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Norm::Sup => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Norm::Lp(p) if p == 1.0 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::Lp(p) if p == 2.0 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Norm::Lp(p) => a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Norm::Lp(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::InvalidParameter(format!("norm exponent must lie in [1, inf), got {p}")))
            }
            _ => Ok(()),
        }
    }
}

/// `eps_i` for the sign pattern `eps`.
pub fn sign(eps: usize, i: usize) -> f64 {
    if eps >> i & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// The character `W_A(eps) = prod_{i in A} eps_i`.
pub fn walsh_character(a: usize, eps: usize) -> f64 {
    if (a & eps).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn check_dim(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::DimensionTooLarge { n, max });
    }
    Ok(())
}

/// `f: {-1,1}^n -> R^d`, stored as `2^n` rows of length `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFunction {
    n: usize,
    d: usize,
    values: Vec<f64>,
    norm: Norm,
}

impl CubeFunction {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(n, MAX_CUBE_DIM)?;
        if d == 0 {
            return Err(Error::InvalidParameter("codomain dimension must be positive".into()));
        }
        if values.len() != d << n {
            return Err(Error::InvalidParameter(format!(
                "expected {} values for n = {n}, d = {d}, got {}",
                d << n,
                values.len()
            )));
        }
        Ok(CubeFunction {
            n,
            d,
            values,
            norm: Norm::Lp(2.0),
        })
    }

    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(usize) -> Vec<f64>) -> Result<Self> {
        check_dim(n, MAX_CUBE_DIM)?;
        let mut values = Vec::with_capacity(d << n);
        for eps in 0..1usize << n {
            let v = f(eps);
            if v.len() != d {
                return Err(Error::InvalidParameter(format!("value at {eps} has length {}, expected {d}", v.len())));
            }
            values.extend(v);
        }
        Self::new(n, d, values)
    }

    pub fn scalar(n: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(n, 1, values)
    }

    pub fn constant(n: usize, c: &[f64]) -> Result<Self> {
        Self::from_fn(n, c.len(), |_| c.to_vec())
    }

    /// The scalar character `W_A`.
    pub fn character(n: usize, a: usize) -> Result<Self> {
        Self::from_fn(n, 1, |eps| vec![walsh_character(a, eps)])
    }

    /// The linear map `eps -> sum_i eps_i x_i`.
    pub fn linear(xs: &[Vec<f64>]) -> Result<Self> {
        let d = xs.first().map_or(1, Vec::len);
        Self::from_fn(xs.len(), d, |eps| {
            let mut v = vec![0.0; d];
            for (i, x) in xs.iter().enumerate() {
                let s = sign(eps, i);
                for (vk, xk) in v.iter_mut().zip(x) {
                    *vk += s * xk;
                }
            }
            v
        })
    }

    /// Independent uniform entries in `[-1, 1]`.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        check_dim(n, MAX_CUBE_DIM)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(n, d, (0..d << n).map(|_| rng.random_range(-1.0..=1.0)).collect())
    }

    pub fn with_norm(mut self, norm: Norm) -> Result<Self> {
        norm.validate()?;
        self.norm = norm;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn codim(&self) -> usize {
        self.d
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, eps: usize) -> &[f64] {
        &self.values[eps * self.d..(eps + 1) * self.d]
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        CubeFunction {
            n: self.n,
            d: self.d,
            values,
            norm: self.norm,
        }
    }

    /// `E_eps f(eps)`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for row in self.values.chunks(self.d) {
            for (mk, x) in m.iter_mut().zip(row) {
                *mk += x;
            }
        }
        let scale = (1usize << self.n) as f64;
        m.iter_mut().for_each(|x| *x /= scale);
        m
    }

    /// `E_eps ||f(eps)||^q`.
    pub fn mean_norm_pow(&self, q: f64) -> f64 {
        let s: f64 = self.values.chunks(self.d).map(|v| self.norm.of(v).powf(q)).sum();
        s / (1usize << self.n) as f64
    }

    pub fn mean_norm(&self) -> f64 {
        self.mean_norm_pow(1.0)
    }

    /// Pointwise product with `W_A`.
    pub fn times_character(&self, a: usize) -> Self {
        let mut values = self.values.clone();
        for (eps, row) in values.chunks_mut(self.d).enumerate() {
            if walsh_character(a, eps) < 0.0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
        }
        self.with_values(values)
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &CubeFunction) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Coefficients `f^(A)`, `2^n` rows of length `d` indexed by subset masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    d: usize,
    coeffs: Vec<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, a: usize) -> &[f64] {
        &self.coeffs[a * self.d..(a + 1) * self.d]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multiplies `f^(A)` by `g(A)`.
    pub fn multiplied(&self, g: impl Fn(usize) -> f64) -> Spectrum {
        let mut coeffs = self.coeffs.clone();
        for (a, row) in coeffs.chunks_mut(self.d).enumerate() {
            let s = g(a);
            row.iter_mut().for_each(|x| *x *= s);
        }
        Spectrum { coeffs, ..*self }
    }
}

/// In-place unnormalized Walsh-Hadamard butterflies on rows of length `d`.
fn fwht(values: &mut [f64], n: usize, d: usize) {
    for b in 0..n {
        let h = 1usize << b;
        for block in (0..1usize << n).step_by(2 * h) {
            for i in block..block + h {
                for k in 0..d {
                    let (x, y) = (values[i * d + k], values[(i + h) * d + k]);
                    values[i * d + k] = x + y;
                    values[(i + h) * d + k] = x - y;
                }
            }
        }
    }
}

/// `f^(A) = E_eps f(eps) W_A(eps)` by fast butterflies.
pub fn walsh_transform(f: &CubeFunction) -> Spectrum {
    let mut coeffs = f.values.clone();
    fwht(&mut coeffs, f.n, f.d);
    let scale = (1usize << f.n) as f64;
    coeffs.iter_mut().for_each(|x| *x /= scale);
    Spectrum { n: f.n, d: f.d, coeffs }
}

/// The same coefficients from the defining sum, in `O(4^n d)`.
pub fn walsh_transform_naive(f: &CubeFunction) -> Result<Spectrum> {
    check_dim(f.n, MAX_PAIR_DIM)?;
    let size = 1usize << f.n;
    let mut coeffs = vec![0.0; f.d * size];
    for a in 0..size {
        for eps in 0..size {
            let w = walsh_character(a, eps);
            for k in 0..f.d {
                coeffs[a * f.d + k] += w * f.values[eps * f.d + k];
            }
        }
    }
    coeffs.iter_mut().for_each(|x| *x /= size as f64);
    Ok(Spectrum { n: f.n, d: f.d, coeffs })
}

/// `f = sum_A f^(A) W_A`.
pub fn inverse_walsh(s: &Spectrum) -> CubeFunction {
    let mut values = s.coeffs.clone();
    fwht(&mut values, s.n, s.d);
    CubeFunction {
        n: s.n,
        d: s.d,
        values,
        norm: Norm::Lp(2.0),
    }
}

fn check_coordinate(f: &CubeFunction, j: usize) -> Result<()> {
    if j >= f.n {
        return Err(Error::IndexOutOfRange {
            index: j,
            range: format!("0..{}", f.n),
        });
    }
    Ok(())
}

/// `d_j f(eps) = (f(eps) - f(eps with coordinate j flipped)) / 2`.
pub fn partial_derivative(f: &CubeFunction, j: usize) -> Result<CubeFunction> {
    check_coordinate(f, j)?;
    let mut values = vec![0.0; f.values.len()];
    for eps in 0..1usize << f.n {
        let (a, b) = (f.value(eps), f.value(eps ^ 1 << j));
        for k in 0..f.d {
            values[eps * f.d + k] = (a[k] - b[k]) / 2.0;
        }
    }
    Ok(f.with_values(values))
}

/// `d_j f` as the projection onto the characters `W_A` with `j in A`.
pub fn partial_derivative_fourier(f: &CubeFunction, j: usize) -> Result<CubeFunction> {
    check_coordinate(f, j)?;
    let s = walsh_transform(f).multiplied(|a| (a >> j & 1) as f64);
    inverse_walsh(&s).with_norm(f.norm)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `e^{-t Laplacian} f = sum_A e^{-t|A|} f^(A) W_A`.
pub fn heat_semigroup(f: &CubeFunction, t: f64) -> Result<CubeFunction> {
    check_time(t)?;
    let s = walsh_transform(f).multiplied(|a| (-t * a.count_ones() as f64).exp());
    inverse_walsh(&s).with_norm(f.norm)
}

/// The heat semigroup as convolution with `R_t(delta) = prod (1 + e^{-t} delta_i)`.
pub fn heat_semigroup_kernel(f: &CubeFunction, t: f64) -> Result<CubeFunction> {
    check_time(t)?;
    check_dim(f.n, MAX_PAIR_DIM)?;
    let size = 1usize << f.n;
    let r = (-t).exp();
    let kernel: Vec<f64> = (0..size)
        .map(|delta| {
            let flips = delta.count_ones() as i32;
            (1.0 + r).powi(f.n as i32 - flips) * (1.0 - r).powi(flips) / size as f64
        })
        .collect();
    let mut values = vec![0.0; f.values.len()];
    for eps in 0..size {
        for (delta, &w) in kernel.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let src = f.value(eps ^ delta);
            for k in 0..f.d {
                values[eps * f.d + k] += w * src[k];
            }
        }
    }
    Ok(f.with_values(values))
}

/// Both sides of Pisier's inequality for exponent `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PisierRatio {
    /// `(E ||f - E f||^q)^{1/q}`.
    pub lhs: f64,
    /// `(E_eps E_delta ||sum_i delta_i d_i f(eps)||^q)^{1/q}`.
    pub rhs: f64,
    /// `lhs / rhs`, or 0 when both vanish.
    pub ratio: f64,
}

/// Exact evaluation over all `(eps, delta)`; `delta` runs in Gray-code order
/// so each step updates the inner sum by one coordinate.
pub fn pisier_ratio(f: &CubeFunction, q: f64) -> Result<PisierRatio> {
    check_dim(f.n, MAX_PAIR_DIM)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must lie in [1, inf), got {q}")));
    }
    let (n, d) = (f.n, f.d);
    let size = 1usize << n;
    let mean = f.mean();
    let centered: f64 = f
        .values
        .chunks(d)
        .map(|v| {
            let c: Vec<f64> = v.iter().zip(&mean).map(|(x, m)| x - m).collect();
            f.norm.of(&c).powf(q)
        })
        .sum::<f64>()
        / size as f64;
    let partials: Vec<CubeFunction> = (0..n).map(|j| partial_derivative(f, j)).collect::<Result<_>>()?;
    let mut total = 0.0;
    let mut g = vec![0.0; d];
    for eps in 0..size {
        // delta = all ones
        g.iter_mut().for_each(|x| *x = 0.0);
        for p in &partials {
            for (gk, x) in g.iter_mut().zip(p.value(eps)) {
                *gk += x;
            }
        }
        let mut inner = f.norm.of(&g).powf(q);
        let mut gray = 0usize;
        for step in 1..size {
            let j = step.trailing_zeros() as usize;
            gray ^= 1 << j;
            let s = if gray >> j & 1 == 1 { -2.0 } else { 2.0 };
            for (gk, x) in g.iter_mut().zip(partials[j].value(eps)) {
                *gk += s * x;
            }
            inner += f.norm.of(&g).powf(q);
        }
        total += inner / size as f64;
    }
    let lhs = centered.powf(1.0 / q);
    let rhs = (total / size as f64).powf(1.0 / q);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(PisierRatio { lhs, rhs, ratio })
}

/// `e^{ns} log(e^s / (e^s - 1))`, the constant obtained from the heat
/// semigroup at time `s`.
pub fn pisier_factor(n: usize, s: f64) -> f64 {
    (n as f64 * s).exp() * -(-(-s).exp()).ln_1p()
}

/// Minimizer of [`pisier_factor`] over `s > 0`: a logarithmic grid scan
/// refined by golden-section search. Returns `(s, factor)`.
pub fn pisier_factor_sweep(n: usize) -> (f64, f64) {
    let grid: Vec<f64> = (0..=400).map(|i| 10f64.powf(-8.0 + 10.0 * i as f64 / 400.0)).collect();
    let best = (0..grid.len())
        .min_by(|&a, &b| pisier_factor(n, grid[a]).total_cmp(&pisier_factor(n, grid[b])))
        .unwrap();
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if pisier_factor(n, a) < pisier_factor(n, b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let s = (lo + hi) / 2.0;
    (s, pisier_factor(n, s))
}

/// Which diagonal-versus-edge inequality defines the type constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeVariant {
    /// `E d(f(eps), f(-eps)) <= T (sum_i E d(f(eps), f(eps^i))^p)^{1/p}`.
    Plain,
    /// `E d(f(eps), f(-eps))^p <= T^p sum_i E d(f(eps), f(eps^i))^p`.
    Enflo,
    /// `E d(f(eps), f(-eps))^2 <= T^2 n^{2/p-1} sum_i E d(f(eps), f(eps^i))^2`.
    Bmw,
}

/// Smallest `T` for which the chosen inequality holds for the cube map whose
/// distances are `dist(eps, delta)`. Equivalently, averaged diagonal lengths
/// against averaged `p`-th powers of edge lengths of the geometric cube.
pub fn metric_type_constant_with(
    n: usize,
    p: f64,
    variant: TypeVariant,
    dist: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    check_dim(n, MAX_CUBE_DIM)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must lie in [1, inf), got {p}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let size = 1usize << n;
    let full = size - 1;
    let edge_pow = match variant {
        TypeVariant::Bmw => 2.0,
        _ => p,
    };
    let (mut diag, mut edges) = (0.0, 0.0);
    for eps in 0..size {
        let dd = dist(eps, eps ^ full);
        diag += match variant {
            TypeVariant::Plain => dd,
            TypeVariant::Enflo => dd.powf(p),
            TypeVariant::Bmw => dd * dd,
        };
        for i in 0..n {
            edges += dist(eps, eps ^ 1 << i).powf(edge_pow);
        }
    }
    let (diag, edges) = (diag / size as f64, edges / size as f64);
    if diag == 0.0 {
        return Ok(0.0);
    }
    Ok(match variant {
        TypeVariant::Plain => diag / edges.powf(1.0 / p),
        TypeVariant::Enflo => (diag / edges).powf(1.0 / p),
        TypeVariant::Bmw => (diag / ((n as f64).powf(2.0 / p - 1.0) * edges)).sqrt(),
    })
}

/// The type constant of a vector-valued cube function under its norm.
pub fn metric_type_constant(f: &CubeFunction, p: f64, variant: TypeVariant) -> Result<f64> {
    metric_type_constant_with(f.n, p, variant, |a, b| f.norm.dist(f.value(a), f.value(b)))
}

/// The type constant of `eps -> images[eps]` into a finite metric.
pub fn metric_type_constant_in(m: &impl Metric, images: &[usize], p: f64, variant: TypeVariant) -> Result<f64> {
    let n = images.len().trailing_zeros() as usize;
    if !images.len().is_power_of_two() {
        return Err(Error::InvalidParameter(format!("{} images is not a power of two", images.len())));
    }
    if let Some(&bad) = images.iter().find(|&&x| x >= m.len()) {
        return Err(Error::UnknownPoint(bad));
    }
    metric_type_constant_with(n, p, variant, |a, b| m.dist(images[a], images[b]))
}

/// `n^{1 - 1/p} / T`: the distortion forced on any embedding of the Hamming
/// cube into a space of metric type `p` with constant `T > 0`.
pub fn cube_distortion_lower(n: usize, p: f64, t: f64) -> f64 {
    (n as f64).powf(1.0 - 1.0 / p) / t
}

/// A map from the discrete torus `Z_m^n` (`m` even) into a finite metric,
/// with points indexed in mixed radix, coordinate 0 least significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusMap {
    n: usize,
    m: usize,
    images: Vec<usize>,
}

impl TorusMap {
    pub fn new(n: usize, m: usize, images: Vec<usize>) -> Result<Self> {
        if m == 0 || m % 2 == 1 {
            return Err(Error::InvalidParameter(format!("torus side must be even and positive, got {m}")));
        }
        let size = torus_size(n, m)?;
        if images.len() != size {
            return Err(Error::InvalidParameter(format!("expected {size} images, got {}", images.len())));
        }
        Ok(TorusMap { n, m, images })
    }

    /// Each point sent to 0 or 1 uniformly at random.
    pub fn random_two_valued(n: usize, m: usize, seed: u64) -> Result<Self> {
        let size = torus_size(n, m)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(n, m, (0..size).map(|_| rng.random_range(0..2)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

fn torus_size(n: usize, m: usize) -> Result<usize> {
    let size = m.checked_pow(n as u32).ok_or(Error::DimensionTooLarge { n, max: 0 })?;
    let terms = size.checked_mul(3usize.pow(n.min(20) as u32));
    match terms {
        Some(t) if t <= MAX_TORUS_TERMS && n <= 20 => Ok(size),
        _ => {
            let max = (1..=n).take_while(|&k| m.pow(k as u32) * 3usize.pow(k as u32) <= MAX_TORUS_TERMS).count();
            Err(Error::DimensionTooLarge { n, max })
        }
    }
}

/// Smallest `C` with
/// `sum_j sum_x d(f(x + (m/2) e_j), f(x))^q <= (C m)^q / 3^n sum_eps sum_x d(f(x + eps), f(x))^q`,
/// `eps` ranging over `{-1, 0, 1}^n`.
pub fn metric_cotype_constant(f: &TorusMap, m: &impl Metric, q: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must lie in [1, inf), got {q}")));
    }
    if let Some(&bad) = f.images.iter().find(|&&x| x >= m.len()) {
        return Err(Error::UnknownPoint(bad));
    }
    let (n, side) = (f.n, f.m);
    let size = f.images.len();
    let stride: Vec<usize> = (0..n).map(|j| side.pow(j as u32)).collect();
    let shift = |x: usize, j: usize, by: usize| {
        let c = x / stride[j] % side;
        x - c * stride[j] + (c + by) % side * stride[j]
    };
    let d = |x: usize, y: usize| m.dist(f.images[x], f.images[y]).powf(q);
    let mut lhs = 0.0;
    for x in 0..size {
        for j in 0..n {
            lhs += d(shift(x, j, side / 2), x);
        }
    }
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let directions = 3usize.pow(n as u32);
    let mut rhs = 0.0;
    for code in 0..directions {
        for x in 0..size {
            let mut y = x;
            let mut c = code;
            for j in 0..n {
                let step = match c % 3 {
                    0 => 0,
                    1 => 1,
                    _ => side - 1,
                };
                c /= 3;
                y = shift(y, j, step);
            }
            rhs += d(y, x);
        }
    }
    Ok((lhs * directions as f64 / (side as f64).powf(q) / rhs).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gen_hypercube, FiniteMetric};

    #[test]
    fn constant_and_character_spectra() {
        let c = CubeFunction::constant(3, &[2.0, -1.0]).unwrap();
        let s = walsh_transform(&c);
        assert_eq!(s.coefficient(0), &[2.0, -1.0]);
        assert!(s.coeffs()[2..].iter().all(|&x| x == 0.0));
        let w = CubeFunction::character(4, 0b0001).unwrap();
        let s = walsh_transform(&w);
        for a in 0..16 {
            assert_eq!(s.coefficient(a)[0], if a == 1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn fast_matches_naive_and_inverts() {
        for n in [1, 3, 6, 9] {
            let f = CubeFunction::random(n, 2, n as u64).unwrap();
            let fast = walsh_transform(&f);
            let slow = walsh_transform_naive(&f).unwrap();
            let err = fast.coeffs().iter().zip(slow.coeffs()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-12);
            assert!(inverse_walsh(&fast).max_abs_diff(&f) < 1e-10);
        }
        assert!(matches!(
            walsh_transform_naive(&CubeFunction::random(13, 1, 0).unwrap()),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn derivatives() {
        let w = CubeFunction::character(4, 0b0110).unwrap();
        assert_eq!(partial_derivative(&w, 1).unwrap(), w);
        assert!(partial_derivative(&w, 0).unwrap().values().iter().all(|&x| x == 0.0));
        let f = CubeFunction::random(7, 3, 5).unwrap();
        for j in 0..7 {
            let a = partial_derivative(&f, j).unwrap();
            let b = partial_derivative_fourier(&f, j).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
        assert!(matches!(partial_derivative(&f, 7), Err(Error::IndexOutOfRange { index: 7, .. })));
    }

    #[test]
    fn heat_basics() {
        let f = CubeFunction::random(5, 2, 8).unwrap();
        assert!(heat_semigroup(&f, 0.0).unwrap().max_abs_diff(&f) < 1e-12);
        let w = CubeFunction::character(5, 0b10101).unwrap();
        let hw = heat_semigroup(&w, 0.7).unwrap();
        for eps in 0..32 {
            assert!((hw.value(eps)[0] - (-2.1f64).exp() * w.value(eps)[0]).abs() < 1e-12);
        }
        assert!(matches!(heat_semigroup(&f, -0.5), Err(Error::NegativeTime(_))));
        for t in [0.0, 0.1, 1.0, 10.0] {
            let a = heat_semigroup(&f, t).unwrap();
            let b = heat_semigroup_kernel(&f, t).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10);
        }
    }

    #[test]
    fn pisier_examples() {
        let c = CubeFunction::constant(4, &[3.0]).unwrap();
        let r = pisier_ratio(&c, 2.0).unwrap();
        assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
        let w = CubeFunction::character(5, 1).unwrap();
        let r = pisier_ratio(&w, 2.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12);
        // Gray-code accumulation against a direct double sum
        let f = CubeFunction::random(4, 2, 1).unwrap().with_norm(Norm::Lp(3.0)).unwrap();
        let parts: Vec<_> = (0..4).map(|j| partial_derivative(&f, j).unwrap()).collect();
        let mut direct = 0.0;
        for eps in 0..16 {
            for delta in 0..16 {
                let mut g = vec![0.0; 2];
                for (j, p) in parts.iter().enumerate() {
                    for k in 0..2 {
                        g[k] += sign(delta, j) * p.value(eps)[k];
                    }
                }
                direct += Norm::Lp(3.0).of(&g).powf(1.5);
            }
        }
        let r = pisier_ratio(&f, 1.5).unwrap();
        assert!((r.rhs - (direct / 256.0).powf(1.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn factor_sweep_finds_interior_minimum() {
        for n in [2, 10, 1000] {
            let (s, v) = pisier_factor_sweep(n);
            assert!(s > 0.0);
            assert!(v <= pisier_factor(n, s * 1.1) && v <= pisier_factor(n, s * 0.9));
        }
        let (_, big) = pisier_factor_sweep(1 << 20);
        assert!(big < (20.0 * 2f64.ln()) + 3.0 * (20.0 * 2f64.ln()).ln() + 3.0);
    }

    #[test]
    fn type_constants() {
        let f = CubeFunction::random(6, 3, 2).unwrap();
        assert!(metric_type_constant(&f, 1.0, TypeVariant::Plain).unwrap() <= 1.0 + 1e-12);
        let lin = CubeFunction::linear(&[vec![1.0, 0.5], vec![-2.0, 1.0], vec![0.3, 0.3]]).unwrap();
        let t = metric_type_constant(&lin, 2.0, TypeVariant::Enflo).unwrap();
        assert!((t - 1.0).abs() < 1e-10);
        for n in 1..=6 {
            let cube = gen_hypercube(n).unwrap();
            let id: Vec<usize> = (0..1 << n).collect();
            let t = metric_type_constant_in(&cube, &id, 2.0, TypeVariant::Enflo).unwrap();
            assert!((t - (n as f64).sqrt()).abs() < 1e-12);
            let b = metric_type_constant_in(&cube, &id, 2.0, TypeVariant::Bmw).unwrap();
            assert!((b - t).abs() < 1e-12);
        }
        let c = CubeFunction::constant(3, &[1.0]).unwrap();
        assert_eq!(metric_type_constant(&c, 2.0, TypeVariant::Plain).unwrap(), 0.0);
    }

    #[test]
    fn distortion_lower_formula() {
        assert_eq!(cube_distortion_lower(4, 2.0, 1.0), 2.0);
        assert_eq!(cube_distortion_lower(7, 1.0, 1.0), 1.0);
        assert!((cube_distortion_lower(9, 2.0, 1.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cotype_examples() {
        let c4 = FiniteMetric::from_fn(4, |a, b| {
            let d = a.abs_diff(b);
            d.min(4 - d) as f64
        })
        .unwrap();
        let id = TorusMap::new(1, 4, vec![0, 1, 2, 3]).unwrap();
        let c = metric_cotype_constant(&id, &c4, 2.0).unwrap();
        assert!((c * c - 3.0 / 8.0).abs() < 1e-12);
        let constant = TorusMap::new(2, 4, vec![1; 16]).unwrap();
        assert_eq!(metric_cotype_constant(&constant, &c4, 2.0).unwrap(), 0.0);
        assert!(TorusMap::new(1, 3, vec![0, 1, 2]).is_err());
        assert!(matches!(TorusMap::random_two_valued(8, 16, 0), Err(Error::DimensionTooLarge { .. })));
    }
}
