//! One-sided certificates that `H_{d-1}(Y; ℤ) = 0` for `Y = Y₁ ∪ Y₂`, built
//! from two independent Bernoulli samples without a Smith form of the union.
//!
//! Since `Y ⊇ Y₁`, a vanishing rational Betti number of `Y₁` carries over to
//! `Y`, and so does vanishing mod every prime that divides no elementary
//! divisor of `Y₁`. The finitely many remaining primes are checked on `Y₂`.

use serde::Serialize;

use crate::complex::DComplex;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::faces::ComplexSpec;
use crate::gf::PrimeModulus;
use crate::homology;
use crate::rng::Seed;
use crate::sampler;
use crate::snf::{self, TorsionPrimes};

const LABEL_Y1: u64 = 1;
const LABEL_Y2: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedZero,
    /// Says nothing about whether the homology vanishes.
    NotCertified,
    /// Factoring the torsion of `Y₁` was incomplete; the union was settled by
    /// its own Smith form, which vanished.
    FallbackSnfZero,
    FallbackSnfNonzero,
}

impl Verdict {
    /// Whether the verdict asserts `H_{d-1}(Y; ℤ) = 0`.
    pub fn asserts_zero(self) -> bool {
        matches!(self, Verdict::CertifiedZero | Verdict::FallbackSnfZero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeCheck {
    pub q: PrimeModulus,
    /// `H_{d-1}(Y₂; GF(q)) = 0`.
    pub vanishes_on_y2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub n: u32,
    pub d: u32,
    /// Density of each half-sample.
    pub p: f64,
    /// Density of the union, `1 - (1-p)^2`.
    pub p_union: f64,
    pub seed: Seed,
    pub seed_y1: Seed,
    pub seed_y2: Seed,
    pub faces_y1: usize,
    pub faces_y2: usize,
    pub faces_union: usize,
    pub betti_rational_y1: u64,
    /// Primes dividing the torsion of `Y₁`; absent when `Y₁` already fails
    /// rationally.
    pub torsion_primes_y1: Option<TorsionPrimes>,
    pub checks: Vec<PrimeCheck>,
    pub verdict: Verdict,
}

/// The samples behind a certificate, regenerated from its seed.
pub struct Samples {
    pub y1: DComplex,
    pub y2: DComplex,
    pub union: DComplex,
}

pub fn samples(spec: &ComplexSpec, p: f64, seed: Seed) -> Result<Samples> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::validation(format!("half-sample density must lie in [0, 1/2], got {p}")));
    }
    let y1 = sampler::sample_bernoulli(spec, p, seed.derive(LABEL_Y1))?;
    let y2 = sampler::sample_bernoulli(spec, p, seed.derive(LABEL_Y2))?;
    let union = y1.union(&y2)?;
    Ok(Samples { y1, y2, union })
}

/// Samples `Y₁, Y₂` independently at density `p` and tries to certify that the
/// integer homology of their union vanishes.
pub fn certify_zero(spec: &ComplexSpec, p: f64, seed: Seed) -> Result<Certificate> {
    certify_zero_with(spec, p, seed, Execution::default())
}

pub fn certify_zero_with(spec: &ComplexSpec, p: f64, seed: Seed, exec: Execution) -> Result<Certificate> {
    let Samples { y1, y2, union } = samples(spec, p, seed)?;
    let divs = snf::smith_normal_form(&y1)?;
    let betti1 = spec.cycle_dim() - divs.rank() as u64;
    let mut cert = Certificate {
        n: spec.n(),
        d: spec.d(),
        p,
        p_union: 1.0 - (1.0 - p) * (1.0 - p),
        seed,
        seed_y1: seed.derive(LABEL_Y1),
        seed_y2: seed.derive(LABEL_Y2),
        faces_y1: y1.face_count(),
        faces_y2: y2.face_count(),
        faces_union: union.face_count(),
        betti_rational_y1: betti1,
        torsion_primes_y1: None,
        checks: Vec::new(),
        verdict: Verdict::NotCertified,
    };
    if betti1 > 0 {
        return Ok(cert);
    }
    let tp = snf::torsion_primes(&divs);
    if !tp.complete {
        cert.verdict = if homology::is_zero_integer(&union)? {
            Verdict::FallbackSnfZero
        } else {
            Verdict::FallbackSnfNonzero
        };
        cert.torsion_primes_y1 = Some(tp);
        return Ok(cert);
    }
    let moduli = tp
        .primes
        .iter()
        .map(|q| PrimeModulus::from_biguint(q.clone()))
        .collect::<Result<Vec<_>>>()?;
    cert.checks = exec::map_trials(exec, moduli.len() as u64, |i| {
        let q = &moduli[i as usize];
        PrimeCheck {
            q: q.clone(),
            vanishes_on_y2: homology::is_zero_mod_q(&y2, q),
        }
    });
    if cert.checks.iter().all(|c| c.vanishes_on_y2) {
        cert.verdict = Verdict::CertifiedZero;
    }
    cert.torsion_primes_y1 = Some(tp);
    Ok(cert)
}

/// Certificates for trials `0..trials`, trial `i` seeded by `seed.trial(i)`.
pub fn certify_trials(spec: &ComplexSpec, p: f64, trials: u64, seed: Seed, exec: Execution) -> Result<Vec<Certificate>> {
    exec::try_map_trials(exec, trials, |i| certify_zero_with(spec, p, seed.trial(i), Execution::Sequential))
}
