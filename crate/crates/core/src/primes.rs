//! Primality testing and integer factorization.
//!
//! Word-sized inputs use a deterministic Miller–Rabin witness set. Larger
//! inputs run 64 Miller–Rabin rounds with bases drawn from a fixed SplitMix64
//! sequence, so verdicts are reproducible.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::rng::splitmix64;

/// Trial division bound used before Pollard rho.
pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;

/// Total Pollard rho iterations spent on one cofactor before giving up.
pub const RHO_ITERATION_BUDGET: u64 = 10_000_000;

/// Miller–Rabin rounds above 64 bits.
pub const PROBABLE_PRIME_ROUNDS: usize = 64;

const WORD_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for all 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WORD_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WORD_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Outcome of a primality test on an arbitrary-precision integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primality {
    Composite,
    /// Proven prime (deterministic witnesses, `n < 2^64`).
    Prime,
    /// Passed [`PROBABLE_PRIME_ROUNDS`] Miller–Rabin rounds.
    ProbablePrime,
}

pub fn primality(n: &BigUint) -> Primality {
    if let Some(w) = n.to_u64() {
        return if is_prime_u64(w) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for &p in &small_primes()[..64] {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let span = n - 3u32;
    let mut state = 0x0005_EED0_FB16_u64 ^ n.bits();
    'round: for _ in 0..PROBABLE_PRIME_ROUNDS {
        let mut r = BigUint::zero();
        for _ in 0..n.bits().div_ceil(64) + 1 {
            r = (r << 64) + splitmix64(&mut state);
        }
        let a = r % &span + 2u32;
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'round;
            }
        }
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_DIVISION_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                (i * i..=n).step_by(i).for_each(|j| sieve[j] = false);
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

/// Brent's variant of Pollard rho with `x -> x^2 + c`.
/// Returns a nontrivial factor, or `None` after `budget` iterations.
fn rho_u64(n: u64, c: u64, budget: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
    let (mut x, mut ys) = (0u64, 0u64);
    let mut spent = 0u64;
    const BATCH: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += BATCH;
            spent += BATCH;
            if spent > budget {
                return None;
            }
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn rho_big(n: &BigUint, c: u64, budget: u64) -> Option<BigUint> {
    let f = |x: &BigUint| (x * x + c) % n;
    let one = BigUint::one();
    let (mut y, mut r, mut q, mut g) = (BigUint::from(2u32), 1u64, one.clone(), one.clone());
    let (mut x, mut ys) = (BigUint::zero(), BigUint::zero());
    let mut spent = 0u64;
    const BATCH: u64 = 128;
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g == one {
            ys = y.clone();
            for _ in 0..BATCH.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += BATCH;
            spent += BATCH;
            if spent > budget {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if g > one {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Splits a composite with rho, trying `c = 1, 2, ...` until the shared
/// iteration budget runs out.
fn split(n: &BigUint) -> Option<BigUint> {
    let per_try = RHO_ITERATION_BUDGET / 8;
    for c in 1..=8u64 {
        let found = match n.to_u64() {
            Some(w) => rho_u64(w, c, per_try).map(BigUint::from),
            None => rho_big(n, c, per_try),
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Distinct prime factors of `n`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub primes: Vec<BigUint>,
    /// False when some composite cofactor could not be split within budget.
    pub complete: bool,
    /// Cofactors that resisted splitting.
    pub unfactored: Vec<BigUint>,
}

pub fn distinct_prime_factors(n: &BigUint) -> Factorization {
    let mut primes = Vec::new();
    let mut rest = n.clone();
    if rest.is_zero() {
        return Factorization {
            primes,
            complete: false,
            unfactored: vec![rest],
        };
    }
    for &p in small_primes() {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if (&rest % &pb).is_zero() {
            primes.push(pb.clone());
            while (&rest % &pb).is_zero() {
                rest /= &pb;
            }
        }
        if (&pb * &pb) > rest {
            break;
        }
    }
    let mut unfactored = Vec::new();
    let mut stack = Vec::new();
    if !rest.is_one() {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        let lim = BigUint::from(TRIAL_DIVISION_LIMIT);
        if m <= &lim * &lim || primality(&m) != Primality::Composite {
            primes.push(m);
            continue;
        }
        match split(&m) {
            Some(f) => {
                let g = &m / &f;
                stack.push(f);
                stack.push(g);
            }
            None => unfactored.push(m),
        }
    }
    primes.sort();
    primes.dedup();
    Factorization {
        primes,
        complete: unfactored.is_empty(),
        unfactored,
    }
}
