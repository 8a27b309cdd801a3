use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ribe_core::graph::{cycle, gen_random_regular, girth, heawood, hypercube_graph, petersen, torus, tutte_coxeter};
use ribe_core::spectral::*;

#[test]
fn parity_and_monic_leading_coefficient() {
    for k in 3..=6 {
        for m in 0..=20 {
            let p = geronimus(k, m).unwrap();
            assert_eq!(p.degree(), m);
            assert_eq!(p.leading(), 1);
            for (d, &c) in p.coeffs().iter().enumerate() {
                if (d + m) % 2 == 1 {
                    assert_eq!(c, 0, "k={k} m={m} degree {d}");
                }
            }
        }
    }
}

fn trig(k: usize, m: usize, theta: f64) -> f64 {
    let km1 = (k - 1) as f64;
    km1.powf(m as f64 / 2.0 - 1.0) * (km1 * ((m + 1) as f64 * theta).sin() - ((m as f64 - 1.0) * theta).sin())
        / theta.sin()
}

#[test]
fn trigonometric_form_matches_coefficients() {
    for k in 3..=5 {
        for m in 1..=12 {
            let p = geronimus(k, m).unwrap();
            for i in 1..50 {
                let theta = std::f64::consts::PI * i as f64 / 50.0;
                let x = 2.0 * ((k - 1) as f64).sqrt() * theta.cos();
                let (a, b) = (p.eval(x), trig(k, m, theta));
                assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "k={k} m={m} theta={theta}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn roots_lie_in_the_ramanujan_interval() {
    for k in 3..=5 {
        let edge = 2.0 * ((k - 1) as f64).sqrt();
        for m in 1..=12 {
            let roots = geronimus_roots(k, m).unwrap();
            assert_eq!(roots.len(), m);
            for r in &roots {
                assert!(r.abs() <= edge + 1e-9, "k={k} m={m} root {r}");
            }
            // sign changes at theta_q = (pi/2 + q pi)/(m+1) bracket every root
            let xs: Vec<f64> = (0..=m)
                .map(|q| edge * ((std::f64::consts::FRAC_PI_2 + q as f64 * std::f64::consts::PI) / (m + 1) as f64).cos())
                .collect();
            let p = geronimus(k, m).unwrap();
            for w in xs.windows(2) {
                let (hi, lo) = (w[0], w[1]);
                assert!(p.eval(hi) * p.eval(lo) < 0.0);
                assert_eq!(roots.iter().filter(|&&r| r > lo && r < hi).count(), 1);
            }
        }
    }
}

#[test]
fn identity_on_every_cage_below_half_girth() {
    for g in [petersen(), heawood(), tutte_coxeter()] {
        let gi = girth(&g).unwrap();
        for m in 0..gi.div_ceil(2) {
            let r = verify_geronimus_identity(&g, 3, m).unwrap();
            assert!(r.holds, "girth {gi} m={m}: {r:?}");
        }
    }
    let petersen_a = petersen().adjacency();
    let sq = IntPolynomial::new(vec![-3, 0, 1]).eval_matrix(&petersen_a, 10).unwrap();
    assert_eq!(sq, distance_m_adjacency(&petersen(), 2));
}

#[test]
fn identity_on_tori_and_cubes() {
    let t = torus(6, 6).unwrap();
    assert!(verify_geronimus_identity(&t, 4, 1).unwrap().holds);
    let q = hypercube_graph(4).unwrap();
    assert!(verify_geronimus_identity(&q, 4, 1).unwrap().holds);
    assert!(!geronimus_deviation(&q, 4, 2).unwrap().holds);
}

#[test]
fn distance_graph_degrees() {
    for (g, k) in [(heawood(), 3), (tutte_coxeter(), 3), (gen_random_regular(40, 3, 5, 5).unwrap(), 3)] {
        let gi = girth(&g).unwrap();
        for m in 1..gi.div_ceil(2) {
            let gm = distance_m_graph(&g, m).unwrap();
            assert_eq!(gm.regular_degree(), Some(k * (k - 1usize).pow(m as u32 - 1)), "m={m}");
        }
    }
}

#[test]
fn floors_on_large_girth_graphs() {
    for seed in 0..5 {
        let g = gen_random_regular(50, 3, 5, seed).unwrap();
        let f = lambda_min_floor(&g, 3, 2).unwrap();
        assert!(f.holds, "{f:?}");
    }
}

#[test]
fn self_mixing_on_petersen_exhaustively() {
    let p = petersen();
    let ctx = MixingContext::new(&p).unwrap();
    for mask in 0u32..1 << 10 {
        let s: Vec<usize> = (0..10).filter(|&i| mask >> i & 1 == 1).collect();
        assert!(ctx.check(&s).unwrap().holds, "{s:?}");
    }
}

#[test]
fn self_mixing_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let graphs: Vec<_> = (0..20)
        .map(|i| {
            let n = [10, 16, 24, 30, 40][i % 5];
            let k = [3, 4][i % 2];
            gen_random_regular(n, k, 0, i as u64).unwrap()
        })
        .chain([petersen(), heawood(), tutte_coxeter(), cycle(9).unwrap(), torus(4, 5).unwrap()])
        .collect();
    for g in &graphs {
        let ctx = MixingContext::new(g).unwrap();
        for _ in 0..4000 {
            let s: Vec<usize> = (0..g.vertex_count()).filter(|_| rng.random_bool(0.5)).collect();
            let r = ctx.check(&s).unwrap();
            assert!(r.holds, "{r:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 100_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parses_back(k in 3usize..7, m in 0usize..15) {
        let p = geronimus(k, m).unwrap();
        let s = p.to_string();
        let mut coeffs = vec![0i64; m + 1];
        for term in s.replace(" - ", " + -").split(" + ") {
            let (c, d) = match term.split_once('x') {
                None => (term.parse::<i64>().unwrap(), 0),
                Some((c, d)) => {
                    let c = match c { "" => 1, "-" => -1, c => c.parse().unwrap() };
                    let d = d.strip_prefix('^').map_or(1, |d| d.parse().unwrap());
                    (c, d)
                }
            };
            coeffs[d] = c;
        }
        prop_assert_eq!(coeffs, p.coeffs().to_vec());
    }
}
