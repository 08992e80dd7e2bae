//! Exact linear algebra over GF(q).
//!
//! [`EliminationBasis`] keeps a fully reduced basis of the span of the inserted
//! vectors: every basis vector has coefficient 1 at its pivot row and 0 at the
//! pivot row of every other basis vector. Reducing a vector is then a single
//! pass over the basis vectors whose pivots it touches, and the residual is
//! canonical, so span membership is a zero test.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::DComplex;
use crate::error::{Error, Result};
use crate::faces::{ComplexSpec, FaceId, RowId};
use crate::primes::{self, Primality};

/// Moduli below this bound use machine-word arithmetic.
pub const WORD_LIMIT: u64 = 1 << 62;

/// A prime field characteristic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum PrimeModulus {
    Word(u64),
    Big {
        q: Arc<BigUint>,
        /// Passed probabilistic Miller–Rabin only.
        probable: bool,
    },
}

impl PrimeModulus {
    pub fn new(q: u64) -> Result<Self> {
        if !primes::is_prime_u64(q) {
            return Err(Error::validation(format!("{q} is not prime")));
        }
        Ok(if q < WORD_LIMIT {
            PrimeModulus::Word(q)
        } else {
            PrimeModulus::Big {
                q: Arc::new(BigUint::from(q)),
                probable: false,
            }
        })
    }

    pub fn from_biguint(q: BigUint) -> Result<Self> {
        if let Some(w) = q.to_u64() {
            return Self::new(w);
        }
        match primes::primality(&q) {
            Primality::Composite => Err(Error::validation(format!("{q} is not prime"))),
            p => Ok(PrimeModulus::Big {
                q: Arc::new(q),
                probable: p == Primality::ProbablePrime,
            }),
        }
    }

    /// Same prime, arbitrary-precision arithmetic regardless of size.
    pub fn to_big_regime(&self) -> Self {
        match self {
            PrimeModulus::Word(q) => PrimeModulus::Big {
                q: Arc::new(BigUint::from(*q)),
                probable: false,
            },
            big => big.clone(),
        }
    }

    pub fn value(&self) -> BigUint {
        match self {
            PrimeModulus::Word(q) => BigUint::from(*q),
            PrimeModulus::Big { q, .. } => (**q).clone(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            PrimeModulus::Word(q) => Some(*q),
            PrimeModulus::Big { q, .. } => q.to_u64(),
        }
    }

    pub fn is_probable(&self) -> bool {
        matches!(self, PrimeModulus::Big { probable: true, .. })
    }

    /// True when `q` divides `x`.
    pub fn divides(&self, x: &BigUint) -> bool {
        match self {
            PrimeModulus::Word(q) => (x % *q).is_zero(),
            PrimeModulus::Big { q, .. } => (x % &**q).is_zero(),
        }
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeModulus::Word(q) => write!(f, "{q}"),
            PrimeModulus::Big { q, .. } => write!(f, "{q}"),
        }
    }
}

impl fmt::Debug for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeModulus({self})")
    }
}

impl FromStr for PrimeModulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let q: BigUint = s
            .trim()
            .parse()
            .map_err(|_| Error::validation(format!("`{s}` is not an integer")))?;
        Self::from_biguint(q)
    }
}

impl Serialize for PrimeModulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PrimeModulus {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Arithmetic in a prime field.
pub trait Field: Clone + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Inverse of a nonzero element.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// Image of a small integer.
    fn from_i64(&self, v: i64) -> Self::Elem;
    /// True for representatives in `[0, q-1]`.
    fn is_canonical(&self, a: &Self::Elem) -> bool;
}

/// GF(2) with XOR addition.
#[derive(Clone, Copy, Debug, Default)]
pub struct Gf2;

impl Field for Gf2 {
    type Elem = u8;

    #[inline]
    fn zero(&self) -> u8 {
        0
    }
    #[inline]
    fn one(&self) -> u8 {
        1
    }
    #[inline]
    fn is_zero(&self, a: &u8) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u8, b: &u8) -> u8 {
        a ^ b
    }
    #[inline]
    fn sub(&self, a: &u8, b: &u8) -> u8 {
        a ^ b
    }
    #[inline]
    fn mul(&self, a: &u8, b: &u8) -> u8 {
        a & b
    }
    #[inline]
    fn neg(&self, a: &u8) -> u8 {
        *a
    }
    #[inline]
    fn inv(&self, a: &u8) -> u8 {
        debug_assert_eq!(*a, 1);
        1
    }
    fn from_i64(&self, v: i64) -> u8 {
        (v & 1) as u8
    }
    fn is_canonical(&self, a: &u8) -> bool {
        *a < 2
    }
}

/// GF(q) for `q < 2^62` on machine words.
#[derive(Clone, Copy, Debug)]
pub struct WordField {
    q: u64,
}

impl WordField {
    pub fn new(q: u64) -> Self {
        assert!((2..WORD_LIMIT).contains(&q));
        WordField { q }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }
}

impl Field for WordField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        if self.q <= u32::MAX as u64 {
            a * b % self.q
        } else {
            primes::mul_mod(*a, *b, self.q)
        }
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        debug_assert!(*a != 0);
        primes::pow_mod(*a, self.q - 2, self.q)
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }
    fn is_canonical(&self, a: &u64) -> bool {
        *a < self.q
    }
}

/// GF(q) for arbitrary `q` on big integers.
#[derive(Clone, Debug)]
pub struct BigField {
    q: Arc<BigUint>,
}

impl BigField {
    pub fn new(q: BigUint) -> Self {
        BigField { q: Arc::new(q) }
    }
}

impl Field for BigField {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one()
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= *self.q {
            s - &*self.q
        } else {
            s
        }
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            a + &*self.q - b
        }
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &*self.q
    }
    fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &*self.q - a
        }
    }
    fn inv(&self, a: &BigUint) -> BigUint {
        // extended Euclid
        let q = BigInt::from((*self.q).clone());
        let g = BigInt::from(a.clone()).extended_gcd(&q);
        debug_assert!(g.gcd.is_one());
        let x = g.x.mod_floor(&q);
        debug_assert!(!x.is_negative());
        x.to_biguint().expect("reduced representative is nonnegative")
    }
    fn from_i64(&self, v: i64) -> BigUint {
        let q = BigInt::from((*self.q).clone());
        BigInt::from(v)
            .mod_floor(&q)
            .to_biguint()
            .expect("reduced representative is nonnegative")
    }
    fn is_canonical(&self, a: &BigUint) -> bool {
        a < &*self.q
    }
}

/// Sparse vector: strictly increasing row indices, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseVec<E> {
    entries: Vec<(RowId, E)>,
}

impl<E> SparseVec<E> {
    pub fn new() -> Self {
        SparseVec {
            entries: Vec::new(),
        }
    }

    /// Builds a vector from entries, checking order and canonical nonzero
    /// coefficients in `field`.
    pub fn from_entries<F: Field<Elem = E>>(field: &F, entries: Vec<(RowId, E)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::validation("sparse vector rows not strictly increasing"));
        }
        if entries
            .iter()
            .any(|(_, c)| field.is_zero(c) || !field.is_canonical(c))
        {
            return Err(Error::validation("sparse vector coefficient not in [1, q-1]"));
        }
        Ok(SparseVec { entries })
    }

    pub fn entries(&self) -> &[(RowId, E)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<E> Default for SparseVec<E> {
    fn default() -> Self {
        Self::new()
    }
}

/// `a - c * b` on sorted sparse entry lists.
fn axpy<F: Field>(field: &F, a: &[(RowId, F::Elem)], c: &F::Elem, b: &[(RowId, F::Elem)]) -> Vec<(RowId, F::Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0, field.neg(&field.mul(c, &b[j].1))));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = field.sub(&a[i].1, &field.mul(c, &b[j].1));
                if !field.is_zero(&v) {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for e in &b[j..] {
        out.push((e.0, field.neg(&field.mul(c, &e.1))));
    }
    out
}

/// One basis vector: implicit 1 at `pivot`, explicit entries elsewhere.
#[derive(Clone, Debug)]
struct BasisVec<E> {
    pivot: RowId,
    tail: Vec<(RowId, E)>,
}

const NO_PIVOT: u32 = u32::MAX;

/// Fully reduced basis of a subspace of `GF(q)^rows`, grown by insertion.
#[derive(Clone, Debug)]
pub struct EliminationBasis<F: Field> {
    field: F,
    rows: usize,
    pivot_of_row: Vec<u32>,
    vecs: Vec<BasisVec<F::Elem>>,
}

impl<F: Field> EliminationBasis<F> {
    pub fn new(field: F, rows: usize) -> Self {
        EliminationBasis {
            field,
            rows,
            pivot_of_row: vec![NO_PIVOT; rows],
            vecs: Vec::new(),
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn rank(&self) -> usize {
        self.vecs.len()
    }

    /// Pivot rows in insertion order.
    pub fn pivots(&self) -> impl Iterator<Item = RowId> + '_ {
        self.vecs.iter().map(|v| v.pivot)
    }

    /// Basis vector `k` in full (pivot entry included).
    pub fn vector(&self, k: usize) -> SparseVec<F::Elem> {
        let v = &self.vecs[k];
        let mut entries = v.tail.clone();
        let pos = entries.partition_point(|e| e.0 < v.pivot);
        entries.insert(pos, (v.pivot, self.field.one()));
        SparseVec { entries }
    }

    fn check(&self, v: &SparseVec<F::Elem>) -> Result<()> {
        if let Some(&(r, _)) = v.entries.last() {
            if r as usize >= self.rows {
                return Err(Error::Invariant(format!(
                    "row {r} outside the basis row space of dimension {}",
                    self.rows
                )));
            }
        }
        if v
            .entries
            .iter()
            .any(|(_, c)| self.field.is_zero(c) || !self.field.is_canonical(c))
        {
            return Err(Error::Invariant(
                "coefficient not reduced modulo the basis modulus".into(),
            ));
        }
        Ok(())
    }

    /// Residual of `v` after removing its component in the span: no entry at
    /// any pivot row, and zero iff `v` lies in the span.
    pub fn reduce(&self, v: &SparseVec<F::Elem>) -> Result<SparseVec<F::Elem>> {
        self.check(v)?;
        Ok(SparseVec {
            entries: self.reduce_entries(&v.entries),
        })
    }

    pub fn contains(&self, v: &SparseVec<F::Elem>) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }

    /// Inserts `v`; returns whether it was independent of the span.
    pub fn insert(&mut self, v: &SparseVec<F::Elem>) -> Result<bool> {
        self.check(v)?;
        Ok(self.insert_entries(&v.entries))
    }

    pub(crate) fn reduce_entries(&self, v: &[(RowId, F::Elem)]) -> Vec<(RowId, F::Elem)> {
        let f = &self.field;
        let mut free: Vec<(RowId, F::Elem)> = Vec::with_capacity(v.len());
        let mut hits: Vec<(usize, &F::Elem)> = Vec::new();
        let mut terms = 0usize;
        for (r, c) in v {
            let k = self.pivot_of_row[*r as usize];
            if k == NO_PIVOT {
                free.push((*r, c.clone()));
            } else {
                terms += self.vecs[k as usize].tail.len();
                hits.push((k as usize, c));
            }
        }
        match hits.len() {
            0 => free,
            1 => {
                let (k, c) = hits[0];
                axpy(f, &free, c, &self.vecs[k].tail)
            }
            _ if terms * 4 > self.rows => self.reduce_dense(free, &hits),
            _ => {
                let mut acc = free;
                for (k, c) in hits {
                    acc = axpy(f, &acc, c, &self.vecs[k].tail);
                }
                acc
            }
        }
    }

    /// Same as the sparse path, accumulating into a dense row buffer.
    fn reduce_dense(
        &self,
        free: Vec<(RowId, F::Elem)>,
        hits: &[(usize, &F::Elem)],
    ) -> Vec<(RowId, F::Elem)> {
        let f = &self.field;
        let mut dense = vec![f.zero(); self.rows];
        let mut touched: Vec<RowId> = Vec::new();
        let mut mark = vec![false; self.rows];
        for (r, c) in free {
            dense[r as usize] = c;
            mark[r as usize] = true;
            touched.push(r);
        }
        for &(k, c) in hits {
            for (r, b) in &self.vecs[k].tail {
                let i = *r as usize;
                dense[i] = f.sub(&dense[i], &f.mul(c, b));
                if !mark[i] {
                    mark[i] = true;
                    touched.push(*r);
                }
            }
        }
        touched.sort_unstable();
        let mut out = Vec::with_capacity(touched.len());
        for r in touched {
            let c = std::mem::replace(&mut dense[r as usize], f.zero());
            if !f.is_zero(&c) {
                out.push((r, c));
            }
        }
        out
    }

    pub(crate) fn insert_entries(&mut self, v: &[(RowId, F::Elem)]) -> bool {
        let residual = self.reduce_entries(v);
        let Some((pivot, lead)) = residual.first().cloned() else {
            return false;
        };
        let f = self.field.clone();
        let scale = f.inv(&lead);
        let tail: Vec<(RowId, F::Elem)> = residual[1..]
            .iter()
            .map(|(r, c)| (*r, f.mul(&scale, c)))
            .collect();
        // clear the new pivot row from every existing basis vector
        for bv in &mut self.vecs {
            if let Ok(pos) = bv.tail.binary_search_by_key(&pivot, |e| e.0) {
                let c = bv.tail.remove(pos).1;
                bv.tail = axpy(&f, &bv.tail, &c, &tail);
            }
        }
        self.pivot_of_row[pivot as usize] = self.vecs.len() as u32;
        self.vecs.push(BasisVec { pivot, tail });
        true
    }
}

/// Uniform random prime in `[2^(bits-1), 2^bits)`, for `bits` in `3..=62`.
pub fn random_word_prime(rng: &mut crate::rng::Rng, bits: u32) -> PrimeModulus {
    use rand::Rng as _;
    assert!((3..=62).contains(&bits));
    let lo = 1u64 << (bits - 1);
    loop {
        let c = rng.random_range(lo..lo << 1) | 1;
        if primes::is_prime_u64(c) {
            return PrimeModulus::Word(c);
        }
    }
}

/// Which arithmetic backs a [`ModBasis`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    /// GF(2) XOR path for q = 2, machine words below 2^62, big integers above.
    Auto,
    /// Machine words even for q = 2.
    Word,
    /// Big integers for every q.
    Big,
}

/// An elimination basis over the boundary row space of a spec, for any modulus.
#[derive(Clone, Debug)]
pub enum ModBasis {
    Gf2(EliminationBasis<Gf2>),
    Word(EliminationBasis<WordField>),
    Big(EliminationBasis<BigField>),
}

macro_rules! each {
    ($self:expr, $b:ident => $body:expr) => {
        match $self {
            ModBasis::Gf2($b) => $body,
            ModBasis::Word($b) => $body,
            ModBasis::Big($b) => $body,
        }
    };
}

fn boundary_entries<F: Field>(field: &F, spec: &ComplexSpec, verts: &[u32]) -> Vec<(RowId, F::Elem)> {
    spec.boundary_rows_of(verts)
        .into_iter()
        .map(|(r, s)| (r, field.from_i64(s as i64)))
        .collect()
}

impl ModBasis {
    pub fn new(q: &PrimeModulus, rows: usize) -> Self {
        Self::with_arithmetic(q, rows, Arithmetic::Auto).expect("auto arithmetic fits every modulus")
    }

    pub fn with_arithmetic(q: &PrimeModulus, rows: usize, arith: Arithmetic) -> Result<Self> {
        Ok(match (arith, q) {
            (Arithmetic::Auto, PrimeModulus::Word(2)) => ModBasis::Gf2(EliminationBasis::new(Gf2, rows)),
            (Arithmetic::Auto | Arithmetic::Word, PrimeModulus::Word(w)) => {
                ModBasis::Word(EliminationBasis::new(WordField::new(*w), rows))
            }
            (Arithmetic::Word, PrimeModulus::Big { .. }) => {
                return Err(Error::validation(format!("modulus {q} does not fit machine words")))
            }
            (_, q) => ModBasis::Big(EliminationBasis::new(BigField::new(q.value()), rows)),
        })
    }

    /// Empty basis over the (d-1)-face rows of `spec`.
    pub fn for_spec(spec: &ComplexSpec, q: &PrimeModulus) -> Self {
        Self::new(q, spec.row_count() as usize)
    }

    pub fn rank(&self) -> usize {
        each!(self, b => b.rank())
    }

    /// Inserts the boundary of face `id`; returns whether it raised the rank.
    pub fn insert_face(&mut self, spec: &ComplexSpec, id: FaceId) -> Result<bool> {
        let verts = spec.unrank(id)?;
        Ok(each!(self, b => {
            let v = boundary_entries(b.field(), spec, &verts);
            b.insert_entries(&v)
        }))
    }

    /// True when the boundary of face `id` is not in the span.
    pub fn is_reducing(&self, spec: &ComplexSpec, id: FaceId) -> Result<bool> {
        let verts = spec.unrank(id)?;
        Ok(each!(self, b => {
            let v = boundary_entries(b.field(), spec, &verts);
            !b.reduce_entries(&v).is_empty()
        }))
    }

    /// Residual of the boundary of face `id`, coefficients as integers in `[1, q-1]`.
    pub fn boundary_residual(&self, spec: &ComplexSpec, id: FaceId) -> Result<Vec<(RowId, BigUint)>> {
        let verts = spec.unrank(id)?;
        Ok(match self {
            ModBasis::Gf2(b) => {
                let v = boundary_entries(b.field(), spec, &verts);
                b.reduce_entries(&v).into_iter().map(|(r, c)| (r, BigUint::from(c))).collect()
            }
            ModBasis::Word(b) => {
                let v = boundary_entries(b.field(), spec, &verts);
                b.reduce_entries(&v).into_iter().map(|(r, c)| (r, BigUint::from(c))).collect()
            }
            ModBasis::Big(b) => {
                let v = boundary_entries(b.field(), spec, &verts);
                b.reduce_entries(&v)
            }
        })
    }
}

/// Rank over GF(q) of the boundary map restricted to the faces of `y`.
pub fn boundary_rank(y: &DComplex, q: &PrimeModulus) -> usize {
    boundary_rank_with(y, q, Arithmetic::Auto).expect("auto arithmetic fits every modulus")
}

pub fn boundary_rank_with(y: &DComplex, q: &PrimeModulus, arith: Arithmetic) -> Result<usize> {
    let spec = y.spec();
    let mut basis = ModBasis::with_arithmetic(q, spec.row_count() as usize, arith)?;
    let full = spec.cycle_dim() as usize;
    for &f in y.faces() {
        basis.insert_face(spec, f)?;
        if basis.rank() == full {
            break;
        }
    }
    Ok(basis.rank())
}

/// Basis spanned by the boundaries of the faces of `y`.
pub fn boundary_basis(y: &DComplex, q: &PrimeModulus) -> ModBasis {
    let spec = y.spec();
    let mut basis = ModBasis::for_spec(spec, q);
    let full = spec.cycle_dim() as usize;
    for &f in y.faces() {
        if basis.rank() == full {
            break;
        }
        basis
            .insert_face(spec, f)
            .expect("stored face ids are in range");
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng;

    fn wf(q: u64) -> WordField {
        WordField::new(q)
    }

    fn sv(q: u64, e: &[(RowId, i64)]) -> SparseVec<u64> {
        let f = wf(q);
        SparseVec::from_entries(&f, e.iter().map(|&(r, c)| (r, f.from_i64(c))).collect()).unwrap()
    }

    /// Rank by dense Gaussian elimination mod q.
    fn dense_rank(mut m: Vec<Vec<u64>>, q: u64) -> usize {
        let f = wf(q);
        let cols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
                continue;
            };
            m.swap(rank, p);
            let inv = f.inv(&m[rank][c]);
            for r in 0..m.len() {
                if r != rank && m[r][c] != 0 {
                    let k = f.mul(&m[r][c], &inv);
                    for j in 0..cols {
                        let t = f.mul(&k, &m[rank][j]);
                        m[r][j] = f.sub(&m[r][j], &t);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn rand_entries(rng: &mut crate::rng::Rng, rows: u32, density: f64, q: u64) -> Vec<(RowId, i64)> {
        let mut out = Vec::new();
        for r in 0..rows {
            if rng.random_bool(density) {
                out.push((r, rng.random_range(1..q as i64)));
            }
        }
        out
    }

    #[test]
    fn modulus_construction() {
        assert!(PrimeModulus::new(4).is_err());
        assert!(PrimeModulus::new(1).is_err());
        assert_eq!(PrimeModulus::new(7).unwrap(), PrimeModulus::Word(7));
        let big = PrimeModulus::new(18446744073709551557).unwrap();
        assert!(matches!(big, PrimeModulus::Big { probable: false, .. }));
        let m127: PrimeModulus = "170141183460469231731687303715884105727".parse().unwrap();
        assert!(m127.is_probable());
        assert!("170141183460469231731687303715884105725".parse::<PrimeModulus>().is_err());
        let json = serde_json::to_string(&PrimeModulus::Word(5)).unwrap();
        assert_eq!(json, "\"5\"");
        assert_eq!(serde_json::from_str::<PrimeModulus>(&json).unwrap(), PrimeModulus::Word(5));
    }

    #[test]
    fn field_inverses() {
        for q in [2u64, 3, 7, 1_000_003, (1 << 61) - 1] {
            let f = wf(q);
            let bf = BigField::new(BigUint::from(q));
            for a in [1u64, 2, q - 1, q / 2 + 1] {
                let a = a % q;
                if a == 0 {
                    continue;
                }
                assert_eq!(f.mul(&a, &f.inv(&a)), 1);
                let ab = BigUint::from(a);
                assert_eq!(bf.inv(&ab), BigUint::from(f.inv(&a)));
            }
        }
        assert_eq!(Gf2.inv(&1), 1);
    }

    #[test]
    fn reduce_and_insert_basics() {
        let mut b = EliminationBasis::new(wf(7), 5);
        let v = sv(7, &[(1, 3), (4, 2)]);
        assert_eq!(b.reduce(&v).unwrap(), v);
        assert!(b.insert(&v).unwrap());
        assert!(!b.insert(&v).unwrap());
        assert!(b.reduce(&v).unwrap().is_zero());
        assert!(b.insert(&sv(7, &[(0, 1), (1, 1)])).unwrap());
        assert!(b.insert(&sv(7, &[(2, 5)])).unwrap());
        assert_eq!(b.rank(), 3);
        // residual has no entry at any pivot row
        let r = b.reduce(&sv(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])).unwrap();
        let pivots: Vec<_> = b.pivots().collect();
        assert!(r.entries().iter().all(|(row, _)| !pivots.contains(row)));
    }

    #[test]
    fn reduce_rejects_foreign_vectors() {
        let b = EliminationBasis::new(wf(5), 3);
        let bad = SparseVec {
            entries: vec![(0, 6u64)],
        };
        assert!(matches!(b.reduce(&bad), Err(Error::Invariant(_))));
        let out_of_range = SparseVec {
            entries: vec![(3, 1u64)],
        };
        assert!(matches!(b.reduce(&out_of_range), Err(Error::Invariant(_))));
        assert!(SparseVec::from_entries(&wf(5), vec![(1, 1), (0, 1)]).is_err());
        assert!(SparseVec::from_entries(&wf(5), vec![(1, 0)]).is_err());
    }

    #[test]
    fn fully_reduced_invariant_holds() {
        let mut rng = Seed::new(77).rng();
        for q in [2u64, 3, 13] {
            let mut b = EliminationBasis::new(wf(q), 12);
            for _ in 0..20 {
                let e = rand_entries(&mut rng, 12, 0.3, q);
                b.insert(&sv(q, &e)).unwrap();
                let pivots: Vec<RowId> = b.pivots().collect();
                for k in 0..b.rank() {
                    let v = b.vector(k);
                    for (r, c) in v.entries() {
                        if *r == pivots[k] {
                            assert_eq!(*c, 1);
                        } else {
                            assert!(!pivots.contains(r));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn random_6x10_mod_7_matches_dense_rank() {
        let mut rng = Seed::new(1).rng();
        for _ in 0..200 {
            let rows = 6;
            let cols: Vec<Vec<u64>> = (0..10)
                .map(|_| (0..rows).map(|_| if rng.random_bool(0.4) { rng.random_range(0..7) } else { 0 }).collect())
                .collect();
            let mut b = EliminationBasis::new(wf(7), rows);
            let mut dense: Vec<Vec<u64>> = Vec::new();
            for col in &cols {
                let e: Vec<(RowId, i64)> = col
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(r, &c)| (r as RowId, c as i64))
                    .collect();
                let v = sv(7, &e);
                let before = dense_rank(dense.clone(), 7);
                dense.push(col.clone());
                let after = dense_rank(dense.clone(), 7);
                // residual zero iff appending leaves the oracle rank unchanged
                assert_eq!(b.reduce(&v).unwrap().is_zero(), before == after);
                b.insert(&v).unwrap();
            }
            assert_eq!(b.rank(), dense_rank(dense, 7));
        }
    }

    #[test]
    fn dense_and_sparse_accumulators_agree() {
        let mut rng = Seed::new(3).rng();
        let f = wf(101);
        let mut b = EliminationBasis::new(f, 40);
        for _ in 0..25 {
            let e = rand_entries(&mut rng, 40, 0.5, 101);
            b.insert(&sv(101, &e)).unwrap();
        }
        for _ in 0..50 {
            let e: Vec<(RowId, u64)> = rand_entries(&mut rng, 40, 0.5, 101)
                .into_iter()
                .map(|(r, c)| (r, c as u64))
                .collect();
            let mut free = Vec::new();
            let mut hits = Vec::new();
            for (r, c) in &e {
                let k = b.pivot_of_row[*r as usize];
                if k == NO_PIVOT {
                    free.push((*r, *c));
                } else {
                    hits.push((k as usize, c));
                }
            }
            let dense = b.reduce_dense(free.clone(), &hits);
            let mut sparse = free;
            for (k, c) in hits {
                sparse = axpy(&f, &sparse, c, &b.vecs[k].tail);
            }
            assert_eq!(dense, sparse);
        }
    }

    fn rp2() -> DComplex {
        let s = ComplexSpec::new(6, 2).unwrap();
        let tris: [[u32; 3]; 10] = [
            [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
            [1, 2, 4], [1, 3, 4], [1, 3, 5], [2, 3, 5], [2, 4, 5],
        ];
        DComplex::from_faces(&s, tris.iter().map(|t| s.rank(t).unwrap()).collect()).unwrap()
    }

    #[test]
    fn boundary_rank_examples() {
        let s4 = ComplexSpec::new(4, 2).unwrap();
        let q5 = PrimeModulus::new(5).unwrap();
        assert_eq!(boundary_rank(&DComplex::empty(&s4), &q5), 0);
        assert_eq!(boundary_rank(&DComplex::full(&s4), &q5), 3);
        let y = rp2();
        assert_eq!(boundary_rank(&y, &PrimeModulus::new(2).unwrap()), 9);
        assert_eq!(boundary_rank(&y, &PrimeModulus::new(3).unwrap()), 10);
    }

    #[test]
    fn arithmetic_regimes_agree() {
        let s = ComplexSpec::new(8, 2).unwrap();
        for i in 0..30 {
            let y = crate::sampler::sample_bernoulli(&s, 0.1 + 0.02 * i as f64, Seed::new(8).trial(i)).unwrap();
            for q in [2u64, 3, (1 << 61) - 1] {
                let q = PrimeModulus::new(q).unwrap();
                let auto = boundary_rank_with(&y, &q, Arithmetic::Auto).unwrap();
                assert_eq!(auto, boundary_rank_with(&y, &q, Arithmetic::Word).unwrap());
                assert_eq!(auto, boundary_rank_with(&y, &q, Arithmetic::Big).unwrap());
            }
        }
        let big = PrimeModulus::new(18446744073709551557).unwrap();
        assert!(boundary_rank_with(&rp2(), &big, Arithmetic::Word).is_err());
        assert_eq!(boundary_rank(&rp2(), &big), 10);
    }

    #[test]
    fn insertion_order_does_not_change_rank() {
        use rand::seq::SliceRandom;
        let s = ComplexSpec::new(9, 2).unwrap();
        let y = crate::sampler::sample_bernoulli(&s, 0.25, Seed::new(4)).unwrap();
        let q = PrimeModulus::new(3).unwrap();
        let want = boundary_rank(&y, &q);
        let mut rng = Seed::new(5).rng();
        for _ in 0..20 {
            let mut order = y.faces().to_vec();
            order.shuffle(&mut rng);
            let mut b = ModBasis::for_spec(&s, &q);
            for f in order {
                b.insert_face(&s, f).unwrap();
            }
            assert_eq!(b.rank(), want);
        }
    }
}
