//! Integer Smith normal form of boundary matrices, the Hadamard torsion
//! bounds, and the set of torsion primes.
//!
//! The elementary divisors of the boundary matrix ∂_d determine the torsion of
//! `C_{d-1}/B_{d-1}`. Because `Z_{d-1}/B_{d-1}` is a subgroup of that quotient
//! with torsion-free cokernel `C_{d-1}/Z_{d-1}` (a subgroup of the free group
//! `C_{d-2}`), both quotients have the same torsion, which is the torsion of
//! `H_{d-1}`.
//!
//! Elimination pivots on a nonzero entry of minimum magnitude. Unit pivots are
//! taken first on the sparse matrix, in Markowitz order, with machine-word
//! entries (restarting on big integers if a word overflows). Whatever
//! remains once no unit entry is left is finished densely on big integers.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::DComplex;
use crate::error::{Error, Result};
use crate::faces::ComplexSpec;
use crate::primes;

/// Largest `rows × faces` product handed to the integer elimination.
pub const SNF_ENTRY_BUDGET: u64 = 100_000_000;

/// Diagonal `d_1 | d_2 | ... | d_r` of a Smith normal form, all positive.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ElementaryDivisors {
    divisors: Vec<BigUint>,
}

impl ElementaryDivisors {
    /// Checks positivity and the divisibility chain.
    pub fn new(divisors: Vec<BigUint>) -> Result<Self> {
        if divisors.iter().any(|d| d.is_zero()) {
            return Err(Error::Invariant("zero elementary divisor".into()));
        }
        if divisors.windows(2).any(|w| !(&w[1] % &w[0]).is_zero()) {
            return Err(Error::Invariant("elementary divisors do not form a chain".into()));
        }
        Ok(ElementaryDivisors { divisors })
    }

    pub fn as_slice(&self) -> &[BigUint] {
        &self.divisors
    }

    /// Rational rank of the matrix.
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    /// Divisors greater than one.
    pub fn torsion(&self) -> &[BigUint] {
        let k = self.divisors.partition_point(|d| d.is_one());
        &self.divisors[k..]
    }

    pub fn torsion_order(&self) -> BigUint {
        self.torsion().iter().product()
    }

    /// Number of divisors that `q` divides.
    pub fn count_divisible_by(&self, q: &crate::gf::PrimeModulus) -> usize {
        self.torsion().iter().filter(|d| q.divides(d)).count()
    }
}

#[derive(Serialize, Deserialize)]
struct DivisorsRepr {
    rank: usize,
    torsion: Vec<String>,
}

impl Serialize for ElementaryDivisors {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DivisorsRepr {
            rank: self.rank(),
            torsion: self.torsion().iter().map(|d| d.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElementaryDivisors {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = DivisorsRepr::deserialize(de)?;
        let torsion = r
            .torsion
            .iter()
            .map(|t| t.parse::<BigUint>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if torsion.len() > r.rank {
            return Err(serde::de::Error::custom("more torsion divisors than rank"));
        }
        let mut divisors = vec![BigUint::one(); r.rank - torsion.len()];
        divisors.extend(torsion);
        ElementaryDivisors::new(divisors).map_err(serde::de::Error::custom)
    }
}

/// Entry type for the sparse phase; arithmetic may refuse on overflow.
trait Entry: Clone + PartialEq + std::fmt::Debug {
    fn from_i8(v: i8) -> Self;
    fn vanishes(&self) -> bool;
    fn is_unit(&self) -> bool;
    /// `a - c*b`, or `None` on overflow.
    fn sub_mul(a: &Self, c: &Self, b: &Self) -> Option<Self>;
    /// `-c*b` (the result when `a` is absent).
    fn neg_mul(c: &Self, b: &Self) -> Option<Self>;
    fn mul(a: &Self, b: &Self) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
}

impl Entry for i64 {
    fn from_i8(v: i8) -> Self {
        v as i64
    }
    fn vanishes(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn sub_mul(a: &Self, c: &Self, b: &Self) -> Option<Self> {
        a.checked_sub(c.checked_mul(*b)?)
    }
    fn neg_mul(c: &Self, b: &Self) -> Option<Self> {
        c.checked_mul(*b)?.checked_neg()
    }
    fn mul(a: &Self, b: &Self) -> Option<Self> {
        a.checked_mul(*b)
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Entry for BigInt {
    fn from_i8(v: i8) -> Self {
        BigInt::from(v)
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn sub_mul(a: &Self, c: &Self, b: &Self) -> Option<Self> {
        Some(a - c * b)
    }
    fn neg_mul(c: &Self, b: &Self) -> Option<Self> {
        Some(-(c * b))
    }
    fn mul(a: &Self, b: &Self) -> Option<Self> {
        Some(a * b)
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

struct Overflow;

/// Sparse integer matrix stored by columns, with a row → columns index.
struct SparseCols<T> {
    cols: Vec<Vec<(u32, T)>>,
    alive: Vec<bool>,
    row_cols: Vec<BTreeSet<u32>>,
}

impl<T: Entry> SparseCols<T> {
    fn from_complex(y: &DComplex) -> Self {
        let spec = y.spec();
        let rows = spec.row_count() as usize;
        let mut row_cols = vec![BTreeSet::new(); rows];
        let cols: Vec<Vec<(u32, T)>> = y
            .faces()
            .iter()
            .enumerate()
            .map(|(c, &f)| {
                let b = spec.boundary_rows(f).expect("stored ids are in range");
                for &(r, _) in &b {
                    row_cols[r as usize].insert(c as u32);
                }
                b.into_iter().map(|(r, s)| (r, T::from_i8(s))).collect()
            })
            .collect();
        let alive = vec![true; cols.len()];
        SparseCols {
            cols,
            alive,
            row_cols,
        }
    }

    /// Unit entry `(row, col)` with the least Markowitz cost.
    fn unit_pivot(&self) -> Option<(u32, u32)> {
        let mut best: Option<(usize, u32, u32)> = None;
        for (c, col) in self.cols.iter().enumerate() {
            if !self.alive[c] || col.is_empty() {
                continue;
            }
            for (r, v) in col {
                if !v.is_unit() {
                    continue;
                }
                let cost = (col.len() - 1) * (self.row_cols[*r as usize].len() - 1);
                if best.is_none_or(|b| cost < b.0) {
                    best = Some((cost, *r, c as u32));
                    if cost == 0 {
                        return Some((*r, c as u32));
                    }
                }
            }
        }
        best.map(|(_, r, c)| (r, c))
    }

    /// Clears row `r` outside column `c` by column operations, then drops both.
    fn eliminate(&mut self, r: u32, c: u32) -> std::result::Result<(), Overflow> {
        let pivot_col = std::mem::take(&mut self.cols[c as usize]);
        let u = pivot_col
            .iter()
            .find(|e| e.0 == r)
            .map(|e| e.1.clone())
            .expect("pivot entry present");
        let others: Vec<u32> = self.row_cols[r as usize]
            .iter()
            .copied()
            .filter(|&k| k != c)
            .collect();
        for k in others {
            let col = &self.cols[k as usize];
            let a = col
                .iter()
                .find(|e| e.0 == r)
                .map(|e| e.1.clone())
                .expect("row index is exact");
            // u is ±1, so u^{-1} = u
            let factor = T::mul(&a, &u).ok_or(Overflow)?;
            let merged = merge_sub(col, &factor, &pivot_col)?;
            for (row, _) in col {
                if !merged.iter().any(|e| e.0 == *row) {
                    self.row_cols[*row as usize].remove(&k);
                }
            }
            for (row, _) in &merged {
                self.row_cols[*row as usize].insert(k);
            }
            self.cols[k as usize] = merged;
        }
        for (row, _) in &pivot_col {
            self.row_cols[*row as usize].remove(&c);
        }
        self.alive[c as usize] = false;
        debug_assert!(self.row_cols[r as usize].is_empty());
        Ok(())
    }
}

/// `a - f*b` on sorted sparse columns.
fn merge_sub<T: Entry>(a: &[(u32, T)], f: &T, b: &[(u32, T)]) -> std::result::Result<Vec<(u32, T)>, Overflow> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ra = a.get(i).map(|e| e.0).unwrap_or(u32::MAX);
        let rb = b.get(j).map(|e| e.0).unwrap_or(u32::MAX);
        if ra < rb {
            out.push(a[i].clone());
            i += 1;
        } else if rb < ra {
            out.push((rb, T::neg_mul(f, &b[j].1).ok_or(Overflow)?));
            j += 1;
        } else {
            let v = T::sub_mul(&a[i].1, f, &b[j].1).ok_or(Overflow)?;
            if !v.vanishes() {
                out.push((ra, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

/// Unit-pivot phase. Returns the number of unit divisors and the leftover
/// nonzero columns.
fn sparse_phase<T: Entry>(y: &DComplex) -> std::result::Result<(usize, Vec<Vec<(u32, BigInt)>>), Overflow> {
    let mut m = SparseCols::<T>::from_complex(y);
    let mut ones = 0;
    while let Some((r, c)) = m.unit_pivot() {
        m.eliminate(r, c)?;
        ones += 1;
    }
    let rest = m
        .cols
        .iter()
        .zip(&m.alive)
        .filter(|(col, &alive)| alive && !col.is_empty())
        .map(|(col, _)| col.iter().map(|(r, v)| (*r, v.to_bigint())).collect())
        .collect();
    Ok((ones, rest))
}

/// Smith form of a dense integer matrix by minimum-magnitude pivoting.
/// Returns the nonzero diagonal, a divisibility chain.
pub(crate) fn dense_snf(mut a: Vec<Vec<BigInt>>) -> Vec<BigUint> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_entry(&a, t, t..rows, t..cols) else {
            break;
        };
        a.swap(t, pi);
        a.iter_mut().for_each(|row| row.swap(t, pj));
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = &a[i][t] / &a[t][t];
                    if !q.is_zero() {
                        for j in t..cols {
                            let v = &q * &a[t][j];
                            a[i][j] -= v;
                        }
                    }
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = &a[t][j] / &a[t][t];
                    if !q.is_zero() {
                        for row in a.iter_mut().skip(t) {
                            let v = &q * &row[t];
                            row[j] -= v;
                        }
                    }
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                // a remainder smaller than the pivot survived; pivot on it
                let (pi, pj) = min_in_cross(&a, t, rows, cols);
                a.swap(t, pi);
                a.iter_mut().for_each(|row| row.swap(t, pj));
                continue;
            }
            // the pivot must divide the remaining block
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero())
            });
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].magnitude().clone());
    }
    out
}

fn min_entry(
    a: &[Vec<BigInt>],
    _t: usize,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in rows {
        for j in cols.clone() {
            let v = &a[i][j];
            if v.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| v.magnitude() < a[bi][bj].magnitude()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smallest nonzero entry in row `t` or column `t` of the active block.
fn min_in_cross(a: &[Vec<BigInt>], t: usize, rows: usize, cols: usize) -> (usize, usize) {
    let mut best = (t, t);
    for i in t..rows {
        if !a[i][t].is_zero() && a[i][t].magnitude() < a[best.0][best.1].magnitude() {
            best = (i, t);
        }
    }
    for j in t..cols {
        if !a[t][j].is_zero() && a[t][j].magnitude() < a[best.0][best.1].magnitude() {
            best = (t, j);
        }
    }
    best
}

fn check_budget(y: &DComplex) -> Result<()> {
    let entries = y.spec().row_count().saturating_mul(y.face_count() as u64);
    if entries > SNF_ENTRY_BUDGET {
        return Err(Error::Budget(format!(
            "integer elimination on {} x {} boundary matrix exceeds {SNF_ENTRY_BUDGET} entries; \
             use mod-q homology instead",
            y.spec().row_count(),
            y.face_count()
        )));
    }
    Ok(())
}

/// Elementary divisors of the boundary matrix restricted to the faces of `y`.
pub fn smith_normal_form(y: &DComplex) -> Result<ElementaryDivisors> {
    check_budget(y)?;
    let (ones, rest) = match sparse_phase::<i64>(y) {
        Ok(v) => v,
        Err(Overflow) => sparse_phase::<BigInt>(y)
            .unwrap_or_else(|_| unreachable!("big integers do not overflow")),
    };
    let mut divisors = vec![BigUint::one(); ones];
    if !rest.is_empty() {
        let mut rows: Vec<u32> = rest.iter().flatten().map(|e| e.0).collect();
        rows.sort_unstable();
        rows.dedup();
        if (rows.len() as u64).saturating_mul(rest.len() as u64) > SNF_ENTRY_BUDGET {
            return Err(Error::Budget("dense remainder of integer elimination too large".into()));
        }
        let mut dense = vec![vec![BigInt::zero(); rest.len()]; rows.len()];
        for (j, col) in rest.iter().enumerate() {
            for (r, v) in col {
                let i = rows.binary_search(r).expect("row collected above");
                dense[i][j] = v.clone();
            }
        }
        divisors.extend(dense_snf(dense));
    }
    ElementaryDivisors::new(divisors)
}

/// `⌈sqrt(x)⌉`.
fn ceil_sqrt(x: &BigUint) -> BigUint {
    let s = x.sqrt();
    if &(&s * &s) == x {
        s
    } else {
        s + 1u32
    }
}

/// `⌈(d+1)^{C(n,d)/2}⌉`: bound on the torsion of `H_{d-1}` for any d-complex on
/// `n` vertices.
pub fn torsion_order_bound(n: u64, d: u32) -> BigUint {
    let e = binom_u64(n, d as u64);
    let base = BigUint::from(d as u64 + 1);
    if e.is_multiple_of(2) {
        Pow::pow(&base, e / 2)
    } else {
        ceil_sqrt(&Pow::pow(&base, e))
    }
}

/// `log2` of [`torsion_order_bound`], for reporting when the integer is huge.
pub fn torsion_order_bound_log2(n: u64, d: u32) -> f64 {
    binom_u64(n, d as u64) as f64 / 2.0 * ((d + 1) as f64).log2()
}

fn binom_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as u64
}

impl ComplexSpec {
    pub fn torsion_order_bound(&self) -> BigUint {
        torsion_order_bound(self.n() as u64, self.d())
    }
}

/// Product of the Euclidean lengths of the `rank` longest boundary columns of
/// `y`, rounded up. With `rank` the rational rank this bounds the torsion
/// order: the torsion is the determinant of an invertible `rank × rank` block
/// of the Smith form, which divides a `rank × rank` minor of the matrix.
pub fn hadamard_bound_for_rank(y: &DComplex, rank: usize) -> BigUint {
    let spec = y.spec();
    let mut sq: Vec<u64> = y
        .faces()
        .iter()
        .map(|&f| {
            spec.boundary_rows(f)
                .expect("stored ids are in range")
                .iter()
                .map(|&(_, s)| (s as i64 * s as i64) as u64)
                .sum()
        })
        .collect();
    sq.sort_unstable_by(|a, b| b.cmp(a));
    let product: BigUint = sq.iter().take(rank).map(|&v| BigUint::from(v)).product();
    ceil_sqrt(&product)
}

/// Hadamard column bound of `y` using its rational rank.
pub fn hadamard_column_bound(y: &DComplex) -> Result<BigUint> {
    let divs = smith_normal_form(y)?;
    Ok(hadamard_bound_for_rank(y, divs.rank()))
}

/// Primes dividing some elementary divisor.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TorsionPrimes {
    pub primes: Vec<BigUint>,
    /// False if a composite cofactor resisted factoring.
    pub complete: bool,
}

impl Serialize for TorsionPrimes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TorsionPrimes", 2)?;
        let primes: Vec<String> = self.primes.iter().map(|p| p.to_string()).collect();
        st.serialize_field("primes", &primes)?;
        st.serialize_field("complete", &self.complete)?;
        st.end()
    }
}

pub fn torsion_primes(divs: &ElementaryDivisors) -> TorsionPrimes {
    let mut primes = Vec::new();
    let mut complete = true;
    let mut seen: Vec<BigUint> = Vec::new();
    for d in divs.torsion() {
        if seen.contains(d) {
            continue;
        }
        seen.push(d.clone());
        let f = primes::distinct_prime_factors(d);
        complete &= f.complete;
        primes.extend(f.primes);
    }
    primes.sort();
    primes.dedup();
    TorsionPrimes { primes, complete }
}

/// Bits in a nonnegative integer's magnitude; used for `log2` comparisons.
pub fn log2_floor(x: &BigUint) -> u64 {
    x.bits().saturating_sub(1)
}
