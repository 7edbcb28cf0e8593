use fdr::divergences::Builtin;
use fdr::equivalence::{risk_transform, verify_equivalence, verify_equivalence_shifted};
use fdr::oracle::{admissible_lambda, certify, oracle_stationarity, random_instance, simplex_minimize, DEFAULT_MAX_ITERS};
use fdr::solver::{posterior, DISCRETE_TOL};
use fdr::{DivergenceSpec, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [3, 8, 16];

#[test]
fn closed_form_matches_the_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut worst_mass = 0.0f64;
    for b in Builtin::ALL {
        for i in 0..20 {
            let s = random_instance(&mut rng, SIZES[i % 3]).unwrap();
            let lambda = admissible_lambda(&b, &s, DISCRETE_TOL).unwrap();
            let post = posterior(&b.into(), &s, lambda, DISCRETE_TOL).unwrap();
            let oracle = simplex_minimize(&s, lambda, &b, DEFAULT_MAX_ITERS, 1e-15).unwrap();
            let cert = certify(&s, lambda, &b, &post.masses(), &oracle, 1e-6).unwrap();
            assert!(cert.pass, "{b} #{i}: {cert:?}");
            assert!(cert.mass_gap <= 1e-4, "{b} #{i}: {cert:?}");
            assert!(oracle_stationarity(&oracle, &s, lambda, &b) <= 1e-3);
            worst_mass = worst_mass.max(cert.mass_gap);
        }
    }
    println!("worst mass gap {worst_mass:e}");
}

#[test]
fn every_ordered_pair_reproduces_the_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = random_instance(&mut rng, 8).unwrap();
    let mut checked = 0;
    for f in Builtin::ALL {
        for g in Builtin::ALL {
            if f == g {
                continue;
            }
            let r = verify_equivalence(&f.into(), &g.into(), 1.0, &s, DISCRETE_TOL).unwrap();
            assert!(r.gap <= 1e-6, "{f} -> {g}: {r:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 30);
}

#[test]
fn example4_transform_up_to_a_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_instance(&mut rng, 16).unwrap();
    for lambda in [0.3, 1.0, 4.0] {
        let post = posterior(&Builtin::Kl.into(), &s, lambda, DISCRETE_TOL).unwrap();
        let t = risk_transform(&post, &Builtin::ReverseKl.into()).unwrap();
        let z: f64 = s.weights().iter().zip(s.risks()).map(|(q, l)| q * (-l / lambda).exp()).sum();
        let closed: Vec<f64> = s.risks().iter().map(|l| lambda * (l / lambda).exp() * z).collect();
        let c = t.values.iter().zip(&closed).map(|(v, c)| v - c).sum::<f64>() / closed.len() as f64;
        for (v, w) in t.values.iter().zip(&closed) {
            assert!((v - w - c).abs() <= 1e-6 * w.abs(), "lambda {lambda}: {v} vs {w} + {c}");
        }
    }
}

#[test]
fn shifted_transforms_give_the_same_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = random_instance(&mut rng, 8).unwrap();
    for (f, g) in [(Builtin::Kl, Builtin::Chi2), (Builtin::ReverseKl, Builtin::Jeffrey)] {
        let (_, _, base) = verify_equivalence_shifted(&f.into(), &g.into(), 1.0, &s, DISCRETE_TOL, 0.0).unwrap();
        for c in [-2.0, 3.5] {
            let (_, _, moved) = verify_equivalence_shifted(&f.into(), &g.into(), 1.0, &s, DISCRETE_TOL, c).unwrap();
            let gap = base.rn.iter().zip(&moved.rn).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap <= 1e-10, "{f} -> {g} shifted by {c}: {gap}");
        }
    }
}

#[test]
fn affine_generators_match_their_base() {
    // adding a(x − 1) to f shifts every multiplier by −λa and leaves P* alone
    let base: DivergenceSpec = Builtin::Hellinger.into();
    let custom = DivergenceSpec::custom(fdr::divergences::Affine::new("scaled", base.clone(), 2.0, 0.3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_instance(&mut rng, 8).unwrap();
    let a = posterior(&base, &s, 2.0, DISCRETE_TOL).unwrap();
    let b = posterior(&custom, &s, 1.0, DISCRETE_TOL).unwrap();
    for (x, y) in a.rn.iter().zip(&b.rn) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!(matches!(
        posterior(&Builtin::Chi2.into(), &s, 1e-3, DISCRETE_TOL),
        Err(Error::NoFeasibleBeta { .. })
    ));
}
