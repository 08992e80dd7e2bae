//! Degree-(d-1) homology summaries over ℚ, GF(q) and ℤ.

use serde::{Serialize, Serializer};

use crate::complex::DComplex;
use crate::error::{Error, Result};
use crate::faces::ComplexSpec;
use crate::gf::{self, PrimeModulus};
use crate::rng::Seed;
use crate::snf::{self, ElementaryDivisors};

/// Fixed seed for the primes used by modular consensus.
const CONSENSUS_SEED: u64 = 0x636f_6e73_656e_7375;

/// `dim Z_{d-1}` of the complete (d-1)-skeleton: `C(n-1, d)`.
pub fn cycle_dim(spec: &ComplexSpec) -> u64 {
    spec.cycle_dim()
}

pub fn betti_mod(y: &DComplex, q: &PrimeModulus) -> u64 {
    cycle_dim(y.spec()) - gf::boundary_rank(y, q) as u64
}

/// `H_{d-1}(Y; GF(q)) = 0`.
pub fn is_zero_mod_q(y: &DComplex, q: &PrimeModulus) -> bool {
    gf::boundary_rank(y, q) as u64 == cycle_dim(y.spec())
}

/// `H_{d-1}(Y; ℤ) = 0`: rational Betti number zero and every elementary
/// divisor equal to one.
pub fn is_zero_integer(y: &DComplex) -> Result<bool> {
    let divs = snf::smith_normal_form(y)?;
    Ok(integer_vanishes(y.spec(), &divs))
}

pub(crate) fn integer_vanishes(spec: &ComplexSpec, divs: &ElementaryDivisors) -> bool {
    divs.rank() as u64 == spec.cycle_dim() && divs.torsion().is_empty()
}

/// Largest boundary rank over three fixed random 62-bit primes, and whether
/// all three agreed. Never exceeds the rational rank and equals it unless
/// every prime divides the torsion.
pub fn consensus_rank(y: &DComplex) -> (usize, bool) {
    let mut rng = Seed::new(CONSENSUS_SEED).rng();
    let full = cycle_dim(y.spec()) as usize;
    let mut ranks = Vec::with_capacity(3);
    for _ in 0..3 {
        let r = gf::boundary_rank(y, &gf::random_word_prime(&mut rng, 62));
        ranks.push(r);
        if r == full {
            break;
        }
    }
    let agreed = ranks.windows(2).all(|w| w[0] == w[1]);
    (*ranks.iter().max().expect("at least one rank"), agreed)
}

/// `H_{d-1}(Y; ℚ) = 0`, from modular ranks. A `true` answer is exact; `false`
/// is wrong only if all three consensus primes divide the torsion.
pub fn is_zero_rational(y: &DComplex) -> bool {
    consensus_rank(y).0 as u64 == cycle_dim(y.spec())
}

/// How the rational Betti number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RationalMethod {
    /// Exact, from the integer Smith form.
    Snf,
    /// Largest GF(q) rank over three random 62-bit primes. Exact unless all
    /// three primes divide the torsion.
    ModularConsensus {
        /// Whether the three ranks agreed.
        agreed: bool,
    },
}

#[derive(Clone, Debug)]
pub struct HomologySummary {
    pub n: u32,
    pub d: u32,
    pub face_count: usize,
    pub cycle_dim: u64,
    pub betti_rational: u64,
    pub rational_method: RationalMethod,
    /// Elementary divisors of ∂_d; `None` above the integer budget.
    pub divisors: Option<ElementaryDivisors>,
    /// `dim H_{d-1}(Y; GF(q))` for each requested prime, in request order.
    pub betti_mod: Vec<(PrimeModulus, u64)>,
}

impl HomologySummary {
    pub fn betti_mod_at(&self, q: &PrimeModulus) -> Option<u64> {
        self.betti_mod.iter().find(|(p, _)| p == q).map(|(_, b)| *b)
    }

    /// `H_{d-1}(Y; ℤ) = 0`, when the divisors are known.
    pub fn integer_vanishes(&self) -> Option<bool> {
        self.divisors
            .as_ref()
            .map(|d| self.betti_rational == 0 && d.torsion().is_empty())
    }
}

impl Serialize for HomologySummary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HomologySummary", 8)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("face_count", &self.face_count)?;
        st.serialize_field("cycle_dim", &self.cycle_dim)?;
        st.serialize_field("betti_rational", &self.betti_rational)?;
        st.serialize_field("rational_method", &self.rational_method)?;
        st.serialize_field("divisors", &self.divisors)?;
        let map: serde_json::Map<String, serde_json::Value> = self
            .betti_mod
            .iter()
            .map(|(q, b)| (q.to_string(), serde_json::Value::from(*b)))
            .collect();
        st.serialize_field("betti_mod", &map)?;
        st.end()
    }
}

/// Rational Betti number, mod-q Betti numbers and (within budget) the integer
/// elementary divisors of `H_{d-1}(Y)`.
pub fn summary(y: &DComplex, primes: &[PrimeModulus]) -> Result<HomologySummary> {
    summary_with(y, primes, true)
}

/// As [`summary`]; with `integer` false the Smith form is skipped and the
/// rational Betti number comes from modular consensus.
pub fn summary_with(y: &DComplex, primes: &[PrimeModulus], integer: bool) -> Result<HomologySummary> {
    let spec = y.spec();
    let cycle = cycle_dim(spec);
    let snf = if integer {
        snf::smith_normal_form(y)
    } else {
        Err(Error::Budget("integer homology not requested".into()))
    };
    let (betti_rational, rational_method, divisors) = match snf {
        Ok(divs) => (cycle - divs.rank() as u64, RationalMethod::Snf, Some(divs)),
        Err(Error::Budget(_)) => {
            let (best, agreed) = consensus_rank(y);
            (
                cycle - best as u64,
                RationalMethod::ModularConsensus { agreed },
                None,
            )
        }
        Err(e) => return Err(e),
    };
    let betti_mod = primes
        .iter()
        .map(|q| (q.clone(), betti_mod(y, q)))
        .collect::<Vec<_>>();
    let out = HomologySummary {
        n: spec.n(),
        d: spec.d(),
        face_count: y.face_count(),
        cycle_dim: cycle,
        betti_rational,
        rational_method,
        divisors,
        betti_mod,
    };
    if let Some(divs) = &out.divisors {
        for (q, b) in &out.betti_mod {
            // universal coefficients
            if *b != out.betti_rational + divs.count_divisible_by(q) as u64 {
                return Err(Error::Invariant(format!(
                    "mod-{q} Betti number {b} disagrees with integer homology"
                )));
            }
        }
    }
    Ok(out)
}
