#![allow(dead_code)]

use lmck::{sampler, ComplexSpec, DComplex, PrimeModulus, Seed};
use num_bigint::BigUint;
use rand::Rng;

pub const MERSENNE_61: u64 = (1 << 61) - 1;

pub fn q(v: u64) -> PrimeModulus {
    PrimeModulus::new(v).unwrap()
}

pub fn big(q: &PrimeModulus) -> BigUint {
    q.value()
}

/// Uniform random complex: `n` in `n_range`, then `m` uniform in
/// `0..=C(n, d+1)`.
pub fn random_complex(seed: Seed, d: u32, n_range: std::ops::RangeInclusive<u32>) -> DComplex {
    let mut rng = seed.rng();
    let n = rng.random_range(n_range);
    let spec = ComplexSpec::new(n, d).unwrap();
    let m = rng.random_range(0..=spec.face_count());
    sampler::sample_uniform_m(&spec, m, seed.derive(1)).unwrap()
}

/// 500 complexes with `d = 2, n <= 8` followed by 100 with `d = 3, n <= 7`.
pub fn small_corpus() -> Vec<DComplex> {
    let root = Seed::new(0x5eed_c0de);
    let mut out: Vec<DComplex> = (0..500).map(|i| random_complex(root.trial(i), 2, 4..=8)).collect();
    out.extend((0..100).map(|i| random_complex(root.trial(1000 + i), 3, 5..=7)));
    out
}
