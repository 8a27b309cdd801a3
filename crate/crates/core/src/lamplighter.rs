//! The lamplighter group over the integers with integer lamps: its word
//! metric for the generators "move left/right" and "lamp up/down", and the
//! drift of its simple random walk.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Finitely supported lamp values plus the lamplighter position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampConfig {
    lamps: BTreeMap<i64, i64>,
    pub pos: i64,
}

/// The four generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Left,
    Right,
    Up,
    Down,
}

pub const GENERATORS: [Generator; 4] = [Generator::Left, Generator::Right, Generator::Up, Generator::Down];

impl LampConfig {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(lamps: impl IntoIterator<Item = (i64, i64)>, pos: i64) -> Self {
        let lamps = lamps.into_iter().filter(|&(_, v)| v != 0).collect();
        LampConfig { lamps, pos }
    }

    pub fn lamp(&self, site: i64) -> i64 {
        self.lamps.get(&site).copied().unwrap_or(0)
    }

    /// Nonzero lamps in increasing site order.
    pub fn lamps(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.lamps.iter().map(|(&s, &v)| (s, v))
    }

    fn add_lamp(&mut self, site: i64, delta: i64) {
        let v = self.lamp(site) + delta;
        if v == 0 {
            self.lamps.remove(&site);
        } else {
            self.lamps.insert(site, v);
        }
    }

    /// Right multiplication by a generator.
    pub fn apply(&mut self, g: Generator) {
        match g {
            Generator::Left => self.pos -= 1,
            Generator::Right => self.pos += 1,
            Generator::Up => self.add_lamp(self.pos, 1),
            Generator::Down => self.add_lamp(self.pos, -1),
        }
    }

    pub fn applied(&self, g: Generator) -> Self {
        let mut c = self.clone();
        c.apply(g);
        c
    }
}

/// Shortest walk on the line from `a` to `b` that visits every site in
/// `[lo, hi]`, where `lo <= min(a, b)` and `hi >= max(a, b)`.
fn line_tour(a: i64, b: i64, lo: i64, hi: i64) -> i64 {
    let span = hi - lo;
    ((a - lo).abs() + span + (hi - b).abs()).min((a - hi).abs() + span + (lo - b).abs())
}

/// Word distance: total lamp adjustment plus the shortest tour from `a.pos`
/// to `b.pos` through every site where the lamps differ.
pub fn lamplighter_distance(a: &LampConfig, b: &LampConfig) -> i64 {
    let mut adjust = 0;
    let (mut lo, mut hi) = (a.pos.min(b.pos), a.pos.max(b.pos));
    let mut sites: Vec<i64> = a.lamps.keys().chain(b.lamps.keys()).copied().collect();
    sites.sort_unstable();
    sites.dedup();
    for s in sites {
        let diff = (a.lamp(s) - b.lamp(s)).abs();
        if diff != 0 {
            adjust += diff;
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    adjust + line_tour(a.pos, b.pos, lo, hi)
}

/// Every element within word distance `radius` of the identity, with its
/// breadth-first distance.
pub fn cayley_ball(radius: usize) -> HashMap<LampConfig, usize> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(LampConfig::identity(), 0);
    queue.push_back(LampConfig::identity());
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        if d == radius {
            continue;
        }
        for g in GENERATORS {
            let next = c.applied(g);
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Monte Carlo estimate of `E[d(W_t, e)]` for the uniform walk on the four
/// generators, `t = 0..=t_max`. Trial `i` uses seed `seed + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

pub fn lamplighter_drift(t_max: usize, trials: usize, seed: u64) -> Result<DriftEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut sum = vec![0.0; t_max + 1];
    let mut sum_sq = vec![0.0; t_max + 1];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
        let mut lamps: BTreeMap<i64, i64> = BTreeMap::new();
        let mut pos = 0i64;
        let mut adjust = 0i64;
        for t in 1..=t_max {
            match GENERATORS[rng.random_range(0..4)] {
                Generator::Left => pos -= 1,
                Generator::Right => pos += 1,
                step => {
                    let delta = if step == Generator::Up { 1 } else { -1 };
                    let old = lamps.get(&pos).copied().unwrap_or(0);
                    let new = old + delta;
                    adjust += new.abs() - old.abs();
                    if new == 0 {
                        lamps.remove(&pos);
                    } else {
                        lamps.insert(pos, new);
                    }
                }
            }
            let lo = lamps.keys().next().map_or(0, |&s| s.min(0)).min(pos);
            let hi = lamps.keys().next_back().map_or(0, |&s| s.max(0)).max(pos);
            let d = (adjust + line_tour(0, pos, lo, hi)) as f64;
            sum[t] += d;
            sum_sq[t] += d * d;
        }
    }
    let nt = trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nt).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| {
            if trials < 2 {
                0.0
            } else {
                ((sq / nt - m * m).max(0.0) * nt / (nt - 1.0) / nt).sqrt()
            }
        })
        .collect();
    Ok(DriftEstimate {
        mean,
        std_error,
        trials,
        seed,
    })
}

/// Least-squares slope of `log mean` against `log t` at `points` times spaced
/// geometrically over `[t_lo, t_hi]`.
pub fn log_log_slope(mean: &[f64], t_lo: usize, t_hi: usize, points: usize) -> f64 {
    let ratio = (t_hi as f64 / t_lo as f64).ln();
    let mut ts: Vec<usize> = (0..points)
        .map(|i| (t_lo as f64 * (ratio * i as f64 / (points - 1) as f64).exp()).round() as usize)
        .collect();
    ts.dedup();
    let xs: Vec<f64> = ts.iter().map(|&t| (t as f64).ln()).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| mean[t].ln()).collect();
    let nx = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / nx, ys.iter().sum::<f64>() / nx);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
