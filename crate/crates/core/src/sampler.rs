//! Seeded sampling of random d-complexes in the Bernoulli model `Y_d(n,p)` and
//! the uniform model `Y_d(n,m)`, uniform orderings of all faces, and block
//! couplings.

use std::collections::HashMap;

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};

use crate::complex::DComplex;
use crate::error::{Error, Result};
use crate::faces::{ComplexSpec, FaceId};
use crate::rng::Seed;

/// Largest face count for which a full ordering is materialized.
pub const ORDERING_BUDGET: u64 = 1 << 28;

/// Each face present independently with probability `p`.
///
/// Faces are produced in increasing id order by geometric skips, so the cost
/// is proportional to the number of faces drawn.
pub fn sample_bernoulli(spec: &ComplexSpec, p: f64, seed: Seed) -> Result<DComplex> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::validation(format!("probability {p} outside [0, 1]")));
    }
    let total = spec.face_count();
    if p == 0.0 {
        return Ok(DComplex::empty(spec));
    }
    if p == 1.0 {
        return Ok(DComplex::full(spec));
    }
    let geo = Geometric::new(p).map_err(|e| Error::validation(e.to_string()))?;
    let mut rng = seed.rng();
    let mut faces = Vec::with_capacity((p * total as f64 * 1.05) as usize + 16);
    let mut next = 0u64;
    loop {
        let skip = geo.sample(&mut rng);
        next = match next.checked_add(skip) {
            Some(v) if v < total => v,
            _ => break,
        };
        faces.push(next);
        next += 1;
    }
    Ok(DComplex::from_sorted_unchecked(spec, faces))
}

/// Forward Fisher–Yates over the implicit array `0..len`.
///
/// Positions that were swapped are held in a map, so drawing a prefix of
/// length `m` costs `O(m)` memory; the output sequence is the same as a dense
/// shuffle of `0..len` with the same RNG.
struct PartialShuffle {
    len: u64,
    pos: u64,
    moved: HashMap<u64, u64>,
    rng: crate::rng::Rng,
}

impl PartialShuffle {
    fn new(len: u64, seed: Seed) -> Self {
        PartialShuffle {
            len,
            pos: 0,
            moved: HashMap::new(),
            rng: seed.rng(),
        }
    }
}

impl Iterator for PartialShuffle {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.len {
            return None;
        }
        let i = self.pos;
        let j = self.rng.random_range(i..self.len);
        let at_i = self.moved.remove(&i).unwrap_or(i);
        let out = if j == i {
            at_i
        } else {
            let at_j = self.moved.get(&j).copied().unwrap_or(j);
            self.moved.insert(j, at_i);
            at_j
        };
        self.pos += 1;
        Some(out)
    }
}

fn dense_shuffle(len: u64, seed: Seed) -> Vec<FaceId> {
    let mut rng = seed.rng();
    let mut v: Vec<FaceId> = (0..len).collect();
    for i in 0..len {
        let j = rng.random_range(i..len);
        v.swap(i as usize, j as usize);
    }
    v
}

/// Uniform random subset of exactly `m` faces.
///
/// The faces are the first `m` entries of [`sample_ordering`] with the same seed.
pub fn sample_uniform_m(spec: &ComplexSpec, m: u64, seed: Seed) -> Result<DComplex> {
    let total = spec.face_count();
    if m > total {
        return Err(Error::validation(format!(
            "m={m} exceeds the number of faces {total}"
        )));
    }
    let mut faces: Vec<FaceId> = PartialShuffle::new(total, seed).take(m as usize).collect();
    faces.sort_unstable();
    Ok(DComplex::from_sorted_unchecked(spec, faces))
}

/// Uniformly random permutation of all face ids.
pub fn sample_ordering(spec: &ComplexSpec, seed: Seed) -> Result<Vec<FaceId>> {
    let total = spec.face_count();
    if total > ORDERING_BUDGET {
        return Err(Error::Budget(format!(
            "ordering of {total} faces exceeds the budget of {ORDERING_BUDGET}"
        )));
    }
    Ok(dense_shuffle(total, seed))
}

/// First `m` entries of the ordering for `seed`, without materializing the rest.
pub fn ordering_prefix(spec: &ComplexSpec, m: u64, seed: Seed) -> Result<Vec<FaceId>> {
    let total = spec.face_count();
    if m > total {
        return Err(Error::validation(format!(
            "prefix length {m} exceeds the number of faces {total}"
        )));
    }
    Ok(PartialShuffle::new(total, seed).take(m as usize).collect())
}

/// Block coupling of complexes `Y^1..Y^k` of sizes `m_1..m_k` with `Y`.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub blocks: Vec<DComplex>,
    pub union: DComplex,
}

/// Draws one random ordering; block `i` is the next `m_i` entries and `Y` is
/// the first `sum m_i`. Each block is marginally uniform of its size and
/// `F_d(Y^i) ⊆ F_d(Y)` holds on every draw.
pub fn couple_blocks(spec: &ComplexSpec, sizes: &[u64], seed: Seed) -> Result<Coupling> {
    let total_m = sizes
        .iter()
        .try_fold(0u64, |a, &m| a.checked_add(m))
        .filter(|&t| t <= spec.face_count())
        .ok_or_else(|| {
            Error::validation(format!(
                "block sizes {sizes:?} exceed the number of faces {}",
                spec.face_count()
            ))
        })?;
    let prefix = ordering_prefix(spec, total_m, seed)?;
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut start = 0usize;
    for &m in sizes {
        let mut b = prefix[start..start + m as usize].to_vec();
        b.sort_unstable();
        blocks.push(DComplex::from_sorted_unchecked(spec, b));
        start += m as usize;
    }
    let mut all = prefix;
    all.sort_unstable();
    let union = DComplex::from_sorted_unchecked(spec, all);
    for b in &blocks {
        if !b.is_subcomplex_of(&union) {
            return Err(Error::Invariant("block not contained in coupled complex".into()));
        }
    }
    Ok(Coupling { blocks, union })
}
