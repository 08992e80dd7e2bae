mod common;

use common::q;
use lmck::certify;
use lmck::{homology, reducing, sampler, ComplexSpec, DComplex, Seed};
use proptest::prelude::*;

fn arb_complex(max_n: u32) -> impl Strategy<Value = DComplex> {
    (1u32..=3, any::<u64>()).prop_flat_map(move |(d, seed)| {
        (d + 2..=max_n.max(d + 2)).prop_flat_map(move |n| {
            let spec = ComplexSpec::new(n, d).unwrap();
            (0..=spec.face_count()).prop_map(move |m| sampler::sample_uniform_m(&spec, m, Seed::new(seed)).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(y in arb_complex(12)) {
        prop_assert_eq!(DComplex::from_text(&y.to_text()).unwrap(), y);
    }

    #[test]
    fn ranking_round_trips(n in 2u32..200, d in 1u32..6, seed in any::<u64>()) {
        prop_assume!(n >= d + 2);
        let spec = ComplexSpec::new(n, d).unwrap();
        let id = seed % spec.face_count();
        let v = spec.unrank(id).unwrap();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]) && *v.last().unwrap() < n);
        prop_assert_eq!(spec.rank(&v).unwrap(), id);
    }

    #[test]
    fn universal_coefficients(y in arb_complex(9)) {
        let primes = [q(2), q(3), q(5)];
        let s = homology::summary(&y, &primes).unwrap();
        let divs = s.divisors.as_ref().unwrap();
        for (p, b) in &s.betti_mod {
            prop_assert_eq!(*b, s.betti_rational + divs.count_divisible_by(p) as u64);
            prop_assert!(*b >= s.betti_rational);
        }
    }

    #[test]
    fn reducing_set_ignores_insertion_order(y in arb_complex(8), shuffle in any::<u64>()) {
        let modulus = q(3);
        let mut faces = y.faces().to_vec();
        let order = sampler::sample_ordering(y.spec(), Seed::new(shuffle)).unwrap();
        faces.sort_by_key(|f| order.iter().position(|g| g == f));
        let mut basis = lmck::gf::ModBasis::for_spec(y.spec(), &modulus);
        for f in faces {
            basis.insert_face(y.spec(), f).unwrap();
        }
        let shuffled: Vec<u64> = (0..y.spec().face_count())
            .filter(|&f| basis.is_reducing(y.spec(), f).unwrap())
            .collect();
        prop_assert_eq!(shuffled, reducing::reducing_set(&y, &modulus));
    }
}

#[test]
fn union_density_is_bernoulli() {
    let spec = ComplexSpec::new(20, 2).unwrap();
    let p = 0.2;
    let pu = 1.0 - (1.0 - p) * (1.0 - p);
    let n = spec.face_count() as f64;
    let sd = (n * pu * (1.0 - pu)).sqrt();
    let trials = 200;
    let mean = (0..trials)
        .map(|i| certify::samples(&spec, p, Seed::new(40).trial(i)).unwrap().union.face_count() as f64)
        .sum::<f64>()
        / trials as f64;
    assert!((mean - n * pu).abs() <= 4.0 * sd / (trials as f64).sqrt(), "mean {mean} vs {}", n * pu);
}

#[test]
fn certified_zero_is_sound() {
    let spec = ComplexSpec::new(12, 2).unwrap();
    let mut certified = 0;
    for i in 0..60 {
        let p = 0.1 + 0.3 * (i % 4) as f64 / 3.0;
        let c = certify::certify_zero(&spec, p, Seed::new(41).trial(i)).unwrap();
        let u = certify::samples(&spec, p, c.seed).unwrap().union;
        if c.verdict.asserts_zero() {
            certified += 1;
            assert!(homology::is_zero_integer(&u).unwrap());
        }
        assert_eq!(c, certify::certify_zero(&spec, p, Seed::new(41).trial(i)).unwrap());
    }
    assert!(certified > 0);
}

#[test]
fn probe_faces_are_reducing_at_most_half_the_time() {
    for (n, modulus) in [(12, q(2)), (15, q(3))] {
        let spec = ComplexSpec::new(n, 2).unwrap();
        let e = reducing::estimate_mtilde(&spec, &modulus, 100, Seed::new(42)).unwrap();
        for p in &e.probes {
            let se = (0.25f64 / e.trials as f64).sqrt();
            assert!(p.frequency <= 0.5 + 3.0 * se, "{p:?}");
        }
        assert_eq!(e, reducing::estimate_mtilde(&spec, &modulus, 100, Seed::new(42)).unwrap());
    }
}

#[test]
fn reducing_sets_shrink_along_a_process() {
    let spec = ComplexSpec::new(8, 2).unwrap();
    let order = sampler::sample_ordering(&spec, Seed::new(43)).unwrap();
    let mut prev = reducing::reducing_set(&DComplex::empty(&spec), &q(2));
    for k in (5..=order.len()).step_by(5) {
        let y = DComplex::from_faces(&spec, order[..k].to_vec()).unwrap();
        let cur = reducing::reducing_set(&y, &q(2));
        assert!(cur.iter().all(|f| prev.binary_search(f).is_ok()));
        prev = cur;
    }
    assert!(prev.is_empty());
}
