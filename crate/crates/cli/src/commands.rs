use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ribe_core::cube::{self, CubeFunction, Norm, TorusMap, TypeVariant};
use ribe_core::graph::{self, Graph};
use ribe_core::io::{self, SkeletonFile};
use ribe_core::lamplighter::{lamplighter_drift, log_log_slope};
use ribe_core::metric::{gen_hypercube, random_points, Embedding};
use ribe_core::ramsey::extract_skeleton;
use ribe_core::spectral::{self, MixingContext};
use ribe_core::ultrametric::random_hst;
use ribe_core::walk::{self, MarkovChain};
use ribe_core::{FiniteMetric, Metric, OracleStructure, RankingStructure};

use crate::report::Report;
use crate::*;

const MAX_MIXING_SCAN: usize = 24;
const BENCH_BATCH: usize = 1000;

pub struct Output {
    pub text: String,
    pub report: Option<Report>,
}

pub fn parse_norm(s: &str) -> Result<Norm, String> {
    match s {
        "inf" | "sup" => Ok(Norm::Sup),
        _ => match s.parse::<f64>() {
            Ok(p) if p >= 1.0 && p.is_finite() => Ok(Norm::Lp(p)),
            _ => Err(format!("expected p >= 1 or `inf`, got `{s}`")),
        },
    }
}

fn load<T>(path: &Path, parse: fn(&str) -> ribe_core::Result<T>) -> Result<T, CliError> {
    let wrap = |source| CliError::File {
        path: path.to_path_buf(),
        source,
    };
    parse(&io::read_file(path).map_err(wrap)?).map_err(wrap)
}

fn save(path: &Path, text: &str) -> Result<(), CliError> {
    io::write_file(path, text).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Starts a report with a command line that reproduces it, making the seed
/// explicit when it came from the environment or the default.
fn header(argv: &[String], seed: Option<u64>) -> Report {
    let mut words = vec!["ribe".to_string()];
    words.extend(argv.iter().skip(1).cloned());
    if let Some(s) = seed {
        if !argv.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
            words.push(format!("--seed {s}"));
        }
    }
    let mut r = Report::new();
    r.put("command", words.join(" "));
    if let Some(s) = seed {
        r.put("seed", s);
    }
    r
}

/// Writes `data` to `out` and reports it, or prints the data alone.
fn emit(data: String, out: &Option<std::path::PathBuf>, mut report: Report, format: Format) -> Result<Output, CliError> {
    match out {
        Some(path) => {
            save(path, &data)?;
            report.put("out", path.display());
            Ok(done(report, format))
        }
        None => Ok(Output { text: data, report: None }),
    }
}

fn done(report: Report, format: Format) -> Output {
    Output {
        text: report.render(format),
        report: Some(report),
    }
}

fn reports(report: Report, format: Format) -> Result<Output, CliError> {
    Ok(done(report, format))
}

pub fn dispatch(cli: &Cli, argv: &[String]) -> Result<Output, CliError> {
    let f = cli.format;
    match &cli.command {
        Command::Gen(a) => gen(a, argv, f),
        Command::Metric(a) => metric(a, argv, f),
        Command::BuildOracle(a) => {
            let m = load(&a.metric, io::parse_metric)?;
            let o = OracleStructure::build(&m, a.epsilon, a.seed.seed)?;
            let mut r = header(argv, Some(a.seed.seed));
            r.put("points", o.len())
                .put("epsilon", o.epsilon())
                .put("distortion_bound", o.distortion())
                .put("levels", o.levels().len())
                .put("size_scalars", o.size_in_scalars());
            emit(io::write_oracle(&o), &a.out, r, f)
        }
        Command::Query(a) => {
            let o = load(&a.oracle, io::parse_oracle)?;
            let e = o.query(a.i, a.j)?;
            let mut r = header(argv, None);
            r.put("estimate", e);
            if let Some(path) = &a.metric {
                let m = load(path, io::parse_metric)?;
                check_points(&m, &[a.i, a.j])?;
                let d = m.dist(a.i, a.j);
                r.put("distance", d);
                if d > 0.0 {
                    r.put("stretch", e / d);
                }
                r.check("sandwich", d <= e && e <= o.distortion() * d);
            }
            reports(r, f)
        }
        Command::Rank(a) => {
            let o = load(&a.oracle, io::parse_oracle)?;
            let m = load(&a.metric, io::parse_metric)?;
            if m.len() != o.len() {
                return Err(CliError::Usage(format!("oracle has {} points, metric has {}", o.len(), m.len())));
            }
            if a.i.is_none() && a.u.is_none() {
                return Err(CliError::Usage("give --i, --u or both".into()));
            }
            let rk = RankingStructure::build(&o, &m)?;
            let mut r = header(argv, None);
            r.put("factor", rk.factor());
            if let Some(i) = a.i {
                r.put("point", rk.rank_query(a.x, i)?);
            }
            if let Some(u) = a.u {
                r.put("rank", rk.rank_inverse(a.x, u)?);
            }
            reports(r, f)
        }
        Command::Verify(a) => verify(a, argv, f),
        Command::Bench(a) => bench(a, argv, f),
        Command::Walk(w) => walk_cmd(w, argv, f),
        Command::Spectral(s) => spectral_cmd(s, argv, f),
        Command::Cube(c) => cube_cmd(c, argv, f),
        Command::Skeleton(a) => {
            let m = load(&a.metric, io::parse_metric)?;
            let sk = extract_skeleton(&m, a.epsilon, a.seed.seed)?;
            let mut r = header(argv, Some(a.seed.seed));
            r.put("points", m.len())
                .put("epsilon", a.epsilon)
                .put("subset_size", sk.subset.len())
                .put("scales", sk.scales.len())
                .put("certified_distortion", sk.certified_distortion)
                .put("measured_distortion", sk.measured_distortion)
                .check("certified", sk.measured_distortion <= sk.certified_distortion);
            emit(io::write_skeleton(&SkeletonFile::from(&sk)), &a.out, r, f)
        }
    }
}

fn check_points(m: &FiniteMetric, pts: &[usize]) -> Result<(), CliError> {
    match pts.iter().find(|&&p| p >= m.len()) {
        Some(&p) => Err(ribe_core::Error::UnknownPoint(p).into()),
        None => Ok(()),
    }
}

fn gen(a: &GenArgs, argv: &[String], f: Format) -> Result<Output, CliError> {
    let seed = a.seed.seed;
    let mut r = header(argv, Some(seed));
    let graph_out = |g: Graph, mut r: Report| {
        r.put("kind", "graph").put("vertices", g.vertex_count()).put("edges", g.edge_count());
        emit(io::write_graph(&g), &a.out, r, f)
    };
    if let Some(name) = &a.named {
        graph_out(graph::gen_named(name)?, r)
    } else if let Some(n) = a.regular {
        graph_out(graph::gen_random_regular(n, a.degree, a.girth, seed)?, r)
    } else if let Some(k) = a.laakso {
        graph_out(graph::gen_laakso(k), r)
    } else if let Some(k) = a.tree {
        graph_out(graph::gen_tree(k, a.depth)?, r)
    } else if let Some(n) = a.cloud {
        let m = FiniteMetric::random_cloud(n, a.dim, seed)?;
        r.put("kind", "metric").put("points", n).put("diameter", m.diameter());
        emit(io::write_metric(&m), &a.out, r, f)
    } else if let Some(n) = a.hst {
        let t = random_hst(n, seed)?;
        r.put("kind", "hst").put("points", n).put("nodes", t.node_count());
        emit(io::write_hst(&t), &a.out, r, f)
    } else if let Some(n) = a.cube_function {
        let c = CubeFunction::random(n, a.codim, seed)?;
        r.put("kind", "cube").put("dimension", n).put("codimension", a.codim);
        emit(io::write_cube_function(&c), &a.out, r, f)
    } else if let Some(n) = a.chain {
        let c = walk::random_reversible_chain(n, 0.4, seed)?;
        r.put("kind", "chain").put("states", n);
        emit(io::write_chain(&c), &a.out, r, f)
    } else {
        unreachable!("clap requires one source")
    }
}

fn metric(a: &MetricArgs, argv: &[String], f: Format) -> Result<Output, CliError> {
    let mut r = header(argv, None);
    if let Some(path) = &a.graph {
        let g = load(path, io::parse_graph)?;
        let m = graph::metric_from_graph(&g)?;
        r.put("points", m.len()).put("diameter", m.diameter());
        return emit(io::write_metric(&m), &a.out, r, f);
    }
    let path = a.input.as_ref().expect("clap requires one input");
    let m = load(path, io::parse_metric)?;
    r.put("points", m.len()).put("diameter", m.diameter());
    if let Some(d) = m.min_distance() {
        r.put("min_distance", d).put("aspect_ratio", m.diameter() / d);
    }
    r.check("metric", m.validate().is_ok());
    if let Some(out) = &a.out {
        save(out, &io::write_metric(&m))?;
        r.put("out", out.display());
    }
    reports(r, f)
}

fn load_pair(oracle: &Path, metric: &Path) -> Result<(OracleStructure, FiniteMetric), CliError> {
    let o = load(oracle, io::parse_oracle)?;
    let m = load(metric, io::parse_metric)?;
    if m.len() != o.len() {
        return Err(CliError::Usage(format!("oracle has {} points, metric has {}", o.len(), m.len())));
    }
    Ok((o, m))
}

fn verify(a: &VerifyArgs, argv: &[String], f: Format) -> Result<Output, CliError> {
    let (o, m) = load_pair(&a.oracle, &a.metric)?;
    let (mut below, mut above, mut max_probes) = (0usize, 0usize, 0u32);
    let mut worst: f64 = 1.0;
    for (i, j, d) in m.pairs() {
        let (e, probes) = o.query_counted(i, j);
        below += (e < d) as usize;
        above += (e > o.distortion() * d) as usize;
        max_probes = max_probes.max(probes);
        worst = worst.max(e / d);
    }
    let mut r = header(argv, None);
    r.put("points", m.len())
        .put("pairs", m.len() * m.len().saturating_sub(1) / 2)
        .put("distortion_bound", o.distortion())
        .put("max_stretch", worst)
        .put("max_probes", max_probes)
        .put("below_distance", below)
        .put("above_bound", above)
        .check("sandwich", below == 0 && above == 0);
    reports(r, f)
}

fn bench(a: &BenchArgs, argv: &[String], f: Format) -> Result<Output, CliError> {
    let (o, m) = load_pair(&a.oracle, &a.metric)?;
    let n = o.len();
    let mut r = header(argv, Some(a.seed.seed));
    r.put("points", n).put("size_scalars", o.size_in_scalars());
    if n == 0 {
        return reports(r, f);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.seed);
    let queries: Vec<(usize, usize)> = (0..a.queries)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
        .collect();
    let mut per_query: Vec<f64> = queries
        .chunks(BENCH_BATCH)
        .map(|batch| {
            let start = Instant::now();
            let mut acc = 0.0;
            for &(i, j) in batch {
                acc += o.query_counted(std::hint::black_box(i), std::hint::black_box(j)).0;
            }
            std::hint::black_box(acc);
            start.elapsed().as_nanos() as f64 / batch.len() as f64
        })
        .collect();
    per_query.sort_by(f64::total_cmp);
    let pick = |q: f64| per_query.get(((per_query.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0.0);
    r.put("queries", a.queries)
        .put("latency_median_ns", format!("{:.1}", pick(0.5)))
        .put("latency_p99_ns", format!("{:.1}", pick(0.99)));

    // stretch histogram over every pair, bucket b holding stretch in [2^b, 2^(b+1))
    let mut hist: Vec<usize> = Vec::new();
    let mut worst: f64 = 1.0;
    for (i, j, d) in m.pairs() {
        let s = o.query(i, j)? / d;
        worst = worst.max(s);
        let b = s.max(1.0).log2().floor() as usize;
        if hist.len() <= b {
            hist.resize(b + 1, 0);
        }
        hist[b] += 1;
    }
    r.put("max_stretch", worst);
    for (b, c) in hist.iter().enumerate() {
        r.put(format!("stretch_hist.{}", 1u64 << b), c);
    }
    r.check("sandwich", worst <= o.distortion());
    reports(r, f)
}

fn walk_cmd(w: &WalkCommand, argv: &[String], f: Format) -> Result<Output, CliError> {
    match w {
        WalkCommand::Drift(a) => drift(a, argv, f),
        WalkCommand::Type(a) => {
            let chain = match (&a.chain, a.states) {
                (Some(path), _) => load(path, io::parse_chain)?,
                (None, Some(n)) => walk::random_reversible_chain(n, 0.4, a.seed.seed)?,
                _ => unreachable!("clap requires one chain source"),
            };
            let mut r = header(argv, Some(a.seed.seed));
            r.put("states", chain.len()).put("reversible", chain.is_reversible()).put("p", a.p);
            let ratios: Vec<f64> = match (&a.metric, a.euclidean) {
                (Some(path), _) => {
                    let m = load(path, io::parse_metric)?;
                    type_ratios(&chain, &m, a.p, a.t_max)?
                }
                (None, Some(d)) => {
                    let e = Embedding::new(random_points(chain.len(), d, a.seed.seed ^ 1))?;
                    type_ratios(&chain, &e, a.p, a.t_max)?
                }
                _ => unreachable!("clap requires one target"),
            };
            let (t, max) = ratios
                .iter()
                .enumerate()
                .fold((1, 0.0f64), |acc, (i, &x)| if x > acc.1 { (i + 1, x) } else { acc });
            r.put("t_max", a.t_max).put("max_ratio", max).put("argmax_t", t);
            if a.euclidean.is_some() && a.p == 2.0 && chain.is_reversible() && chain.is_stationary() {
                r.check("euclidean_type_two", max <= 1.0 + 1e-9);
            }
            reports(r, f)
        }
        WalkCommand::Convexity(a) => {
            let mut r = header(argv, None);
            let sums = if let Some(k) = a.tree {
                let h = a.horizon.unwrap_or(a.depth);
                r.put("space", format!("tree k={k} depth={}", a.depth)).put("horizon", h);
                walk::tree_convexity_exact(k, a.depth, a.p, h)?
            } else if let Some(k) = a.laakso {
                let h = a.horizon.unwrap_or(4usize.pow(k as u32));
                let m = graph::metric_from_graph(&graph::gen_laakso(k))?;
                r.put("space", format!("laakso k={k}")).put("horizon", h);
                walk::markov_convexity_functional(&walk::laakso_chain(k)?, &m, a.p, h)?
            } else {
                let c = load(a.chain.as_ref().expect("clap requires one space"), io::parse_chain)?;
                let m = load(a.metric.as_ref().expect("clap requires --metric"), io::parse_metric)?;
                let h = a.horizon.ok_or_else(|| CliError::Usage("--horizon is required with --chain".into()))?;
                r.put("space", "chain").put("horizon", h);
                walk::markov_convexity_functional(&c, &m, a.p, h)?
            };
            r.put("p", a.p).put("lhs", sums.lhs).put("rhs", sums.rhs).put("pi_lower", sums.pi_lower);
            reports(r, f)
        }
    }
}

fn type_ratios(c: &MarkovChain, m: &impl Metric, p: f64, t_max: usize) -> Result<Vec<f64>, CliError> {
    if m.len() != c.len() {
        return Err(CliError::Usage(format!("chain has {} states, metric has {} points", c.len(), m.len())));
    }
    (1..=t_max).map(|t| Ok(walk::markov_type_ratio(c, m, p, t)?)).collect()
}

fn drift(a: &DriftArgs, argv: &[String], f: Format) -> Result<Output, CliError> {
    let put_profile = |r: &mut Report, prof: &[f64]| {
        for (t, e) in prof.iter().enumerate() {
            r.put(format!("drift.{t}"), e);
        }
    };
    if a.lamplighter {
        let mut r = header(argv, Some(a.seed.seed));
        let est = lamplighter_drift(a.t_max, a.trials, a.seed.seed)?;
        r.put("space", "lamplighter").put("trials", a.trials).put("t_max", a.t_max);
        if a.t_max >= 200 {
            r.put("slope_100_to_t_max", log_log_slope(&est.mean, 100, a.t_max, 41));
        }
        put_profile(&mut r, &est.mean);
        return reports(r, f);
    }
    let mut r = header(argv, None);
    if let Some(path) = &a.graph {
        let g = load(path, io::parse_graph)?;
        let prof = walk::drift_profile(&walk::stationary_walk(&g)?, &graph::metric_from_graph(&g)?, a.t_max)?;
        r.put("space", "graph");
        put_profile(&mut r, &prof);
    } else if let Some(n) = a.hypercube {
        let c = walk::stationary_walk(&graph::hypercube_graph(n)?)?.started_at(0)?;
        let prof = walk::drift_profile(&c, &gen_hypercube(n)?, a.t_max)?;
        let worst = prof
            .iter()
            .enumerate()
            .map(|(t, e)| (e - n as f64 * (1.0 - (1.0 - 2.0 / n as f64).powi(t as i32))).abs())
            .fold(0.0, f64::max);
        r.put("space", format!("hypercube n={n}")).put("closed_form_deviation", worst);
        put_profile(&mut r, &prof);
        r.check("closed_form", worst <= 1e-9);
    } else if let Some(k) = a.tree {
        let (c, m) = walk::tree_chain_with_metric(k, a.depth)?;
        let prof = walk::drift_profile(&c, &m, a.t_max.min(a.depth))?;
        r.put("space", format!("tree k={k} depth={}", a.depth));
        put_profile(&mut r, &prof);
        let slope = 1.0 - 2.0 / k as f64;
        r.check("linear_drift", prof.iter().enumerate().all(|(t, &e)| e >= slope * t as f64 - 1e-12));
    }
    reports(r, f)
}

fn spectral_cmd(s: &SpectralCommand, argv: &[String], f: Format) -> Result<Output, CliError> {
    let mut r = header(argv, None);
    let degree = |g: &Graph, k: Option<usize>| k.or(g.regular_degree()).ok_or(ribe_core::Error::NotRegular);
    match s {
        SpectralCommand::Geronimus { k, m } => {
            let p = spectral::geronimus(*k, *m)?;
            let roots = spectral::geronimus_roots(*k, *m)?;
            let edge = 2.0 * ((*k - 1) as f64).sqrt();
            let list = roots.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" ");
            r.put("polynomial", &p)
                .put("coefficients", p.coeffs().iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
                .put("roots", list)
                .check("roots_in_spectrum_window", roots.iter().all(|x| x.abs() <= edge + 1e-9));
        }
        SpectralCommand::Identity(a) => {
            let g = load(&a.graph, io::parse_graph)?;
            let k = degree(&g, a.k)?;
            let c = spectral::verify_geronimus_identity(&g, k, a.m)?;
            r.put("vertices", g.vertex_count())
                .put("k", k)
                .put("m", a.m)
                .put("max_deviation", c.max_deviation)
                .check("identity", c.holds);
        }
        SpectralCommand::Floor(a) => {
            let g = load(&a.graph, io::parse_graph)?;
            let k = degree(&g, a.k)?;
            let c = spectral::lambda_min_floor(&g, k, a.m)?;
            r.put("vertices", g.vertex_count())
                .put("k", k)
                .put("m", a.m)
                .put("lambda_min", c.lambda_min)
                .put("floor", c.floor)
                .check("floor", c.holds);
        }
        SpectralCommand::Mixing { graph, subset } => {
            let g = load(graph, io::parse_graph)?;
            let ctx = MixingContext::new(&g)?;
            let n = g.vertex_count();
            r.put("vertices", n).put("lambda_min", ctx.lambda_min());
            match subset {
                Some(s) => {
                    let c = ctx.check(s)?;
                    r.put("edges_in_subset", c.edges_in_subset).put("bound", c.bound).check("mixing", c.holds);
                }
                None if n <= MAX_MIXING_SCAN => {
                    let mut violations = 0usize;
                    for mask in 0u64..1 << n {
                        let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                        violations += !ctx.check(&s)?.holds as usize;
                    }
                    r.put("subsets", 1u64 << n).put("violations", violations).check("mixing", violations == 0);
                }
                None => {
                    return Err(CliError::Usage(format!(
                        "{n} vertices is too many to scan every subset (limit {MAX_MIXING_SCAN}); pass --subset"
                    )))
                }
            }
        }
    }
    reports(r, f)
}

fn load_function(path: &Path, norm: Norm) -> Result<CubeFunction, CliError> {
    Ok(load(path, io::parse_cube_function)?.with_norm(norm)?)
}

fn cube_cmd(c: &CubeCommand, argv: &[String], f: Format) -> Result<Output, CliError> {
    match c {
        CubeCommand::Transform { function, out } => {
            let g = load(function, io::parse_cube_function)?;
            let s = cube::walsh_transform(&g);
            let coeffs = CubeFunction::new(g.dim(), g.codim(), s.coeffs().to_vec())?;
            let mut r = header(argv, None);
            r.put("dimension", g.dim()).put("codimension", g.codim());
            emit(io::write_cube_function(&coeffs), out, r, f)
        }
        CubeCommand::Heat { function, t, norm, out } => {
            let g = load_function(function, *norm)?;
            let h = cube::heat_semigroup(&g, *t)?;
            let (before, after) = (g.mean_norm(), h.mean_norm());
            let floor = (-(g.dim() as f64) * t).exp() * before;
            let mut r = header(argv, None);
            r.put("dimension", g.dim())
                .put("t", t)
                .put("mean_norm", before)
                .put("mean_norm_after", after)
                .check("contraction", after <= before * (1.0 + 1e-12) + 1e-15)
                .check("lower_bound", after >= floor * (1.0 - 1e-12));
            if g.dim() <= cube::MAX_PAIR_DIM {
                let k = cube::heat_semigroup_kernel(&g, *t)?;
                r.put("kernel_deviation", h.max_abs_diff(&k)).check("kernel", h.max_abs_diff(&k) <= 1e-10);
            }
            emit_or_report(io::write_cube_function(&h), out, r, f)
        }
        CubeCommand::Pisier { function, q, norm } => {
            let g = load_function(function, *norm)?;
            let p = cube::pisier_ratio(&g, *q)?;
            let (s, factor) = cube::pisier_factor_sweep(g.dim());
            let mut r = header(argv, None);
            r.put("dimension", g.dim())
                .put("q", q)
                .put("lhs", p.lhs)
                .put("rhs", p.rhs)
                .put("ratio", p.ratio)
                .put("best_s", s)
                .put("heat_factor", factor)
                .check("below_heat_factor", p.ratio <= factor + 1e-12);
            reports(r, f)
        }
        CubeCommand::Type { function, p, variant, norm } => {
            let g = load_function(function, *norm)?;
            let v = match variant {
                VariantArg::Plain => TypeVariant::Plain,
                VariantArg::Enflo => TypeVariant::Enflo,
                VariantArg::Bmw => TypeVariant::Bmw,
            };
            let t = cube::metric_type_constant(&g, *p, v)?;
            let mut r = header(argv, None);
            r.put("dimension", g.dim()).put("p", p).put("variant", format!("{variant:?}").to_lowercase()).put("constant", t);
            reports(r, f)
        }
        CubeCommand::Cotype { n, m, q, trials, seed } => {
            let two = FiniteMetric::new(2, vec![1.0])?;
            let mut r = header(argv, Some(seed.seed));
            let mut sum = 0.0;
            for i in 0..*trials as u64 {
                let map = TorusMap::random_two_valued(*n, *m, seed.seed.wrapping_add(i))?;
                sum += cube::metric_cotype_constant(&map, &two, *q)?;
            }
            let mean = sum / *trials.max(&1) as f64;
            r.put("n", n)
                .put("m", m)
                .put("q", q)
                .put("trials", trials)
                .put("mean_constant", mean)
                .put("normalized", mean * *m as f64 / (*n as f64).powf(1.0 / q));
            reports(r, f)
        }
    }
}

/// Like `emit`, but the report is printed whether or not the data is saved.
fn emit_or_report(data: String, out: &Option<std::path::PathBuf>, mut r: Report, f: Format) -> Result<Output, CliError> {
    if let Some(path) = out {
        save(path, &data)?;
        r.put("out", path.display());
    }
    reports(r, f)
}
