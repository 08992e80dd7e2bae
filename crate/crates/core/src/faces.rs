//! Colex indexing of d-faces and signed boundaries.
//!
//! A d-face is a strictly increasing (d+1)-tuple of vertices in `0..n`. Its id
//! is the combinatorial-number-system rank `sum_i C(v_i, i+1)`, so ids are
//! stable when `n` grows. The (d-1)-faces (rows of the boundary matrix) are
//! indexed the same way with tuples of length d.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Identifier of a d-face: its colex rank.
pub type FaceId = u64;

/// Identifier of a (d-1)-face, i.e. a row of the boundary matrix.
pub type RowId = u32;

/// Sorted vertex tuple; d is small, so it lives inline.
pub type Simplex = SmallVec<[u32; 8]>;

/// Pascal table `C(i, k)` for `i <= n`, `k <= d + 1`.
#[derive(Debug)]
struct BinomTable {
    width: usize,
    data: Vec<u64>,
}

impl BinomTable {
    fn build(n: u32, kmax: u32) -> Result<Self> {
        let width = kmax as usize + 1;
        let rows = n as usize + 1;
        let mut data = vec![0u64; rows * width];
        for i in 0..rows {
            data[i * width] = 1;
            for k in 1..width.min(i + 1) {
                let a = data[(i - 1) * width + k - 1];
                let b = if k < i { data[(i - 1) * width + k] } else { 0 };
                let s = a
                    .checked_add(b)
                    .filter(|s| *s <= i64::MAX as u64)
                    .ok_or_else(|| {
                        Error::validation(format!(
                            "C({i},{k}) overflows 63 bits; n={n} is too large for this dimension"
                        ))
                    })?;
                data[i * width + k] = s;
            }
        }
        Ok(BinomTable { width, data })
    }

    #[inline]
    fn get(&self, i: u32, k: u32) -> u64 {
        if k as usize >= self.width || i < k {
            return 0;
        }
        self.data[i as usize * self.width + k as usize]
    }
}

/// Vertex count and dimension of a d-complex with complete (d-1)-skeleton.
///
/// Cheap to clone; the binomial table is shared.
#[derive(Clone)]
pub struct ComplexSpec {
    n: u32,
    d: u32,
    binom: Arc<BinomTable>,
}

impl ComplexSpec {
    pub fn new(n: u32, d: u32) -> Result<Self> {
        if d < 1 {
            return Err(Error::validation("dimension d must be at least 1"));
        }
        if n < d + 2 {
            return Err(Error::validation(format!(
                "need n >= d+2 vertices, got n={n}, d={d}"
            )));
        }
        let binom = BinomTable::build(n, d + 1)?;
        // rows are addressed with u32
        if binom.get(n, d) > u32::MAX as u64 {
            return Err(Error::validation(format!(
                "C({n},{d}) rows do not fit a 32-bit row index"
            )));
        }
        Ok(ComplexSpec {
            n,
            d,
            binom: Arc::new(binom),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `C(i, k)` for `i <= n`, `k <= d+1`.
    pub fn binom(&self, i: u32, k: u32) -> u64 {
        self.binom.get(i, k)
    }

    /// Number of possible d-faces, `C(n, d+1)`.
    pub fn face_count(&self) -> u64 {
        self.binom(self.n, self.d + 1)
    }

    /// Number of (d-1)-faces, `C(n, d)`: the row count of the boundary matrix.
    pub fn row_count(&self) -> u64 {
        self.binom(self.n, self.d)
    }

    /// Dimension of the (d-1)-cycle space of the complete skeleton, `C(n-1, d)`.
    pub fn cycle_dim(&self) -> u64 {
        self.binom(self.n - 1, self.d)
    }

    /// Vertices of face `id`, strictly increasing.
    pub fn unrank(&self, id: FaceId) -> Result<Simplex> {
        if id >= self.face_count() {
            return Err(Error::validation(format!(
                "face id {id} out of range 0..{}",
                self.face_count()
            )));
        }
        Ok(self.unrank_k(id, self.d + 1))
    }

    /// Colex rank of a strictly increasing (d+1)-tuple.
    pub fn rank(&self, verts: &[u32]) -> Result<FaceId> {
        self.validate(verts, self.d as usize + 1)?;
        Ok(self.rank_k(verts))
    }

    /// Colex rank of a strictly increasing d-tuple (a row of the boundary matrix).
    pub fn row_rank(&self, verts: &[u32]) -> Result<RowId> {
        self.validate(verts, self.d as usize)?;
        Ok(self.rank_k(verts) as RowId)
    }

    /// Vertices of (d-1)-face `row`.
    pub fn row_unrank(&self, row: RowId) -> Result<Simplex> {
        if row as u64 >= self.row_count() {
            return Err(Error::validation(format!(
                "row id {row} out of range 0..{}",
                self.row_count()
            )));
        }
        Ok(self.unrank_k(row as u64, self.d))
    }

    fn validate(&self, verts: &[u32], len: usize) -> Result<()> {
        if verts.len() != len {
            return Err(Error::validation(format!(
                "expected {len} vertices, got {}",
                verts.len()
            )));
        }
        if let Some(&v) = verts.iter().find(|&&v| v >= self.n) {
            return Err(Error::validation(format!(
                "vertex {v} out of range 0..{}",
                self.n
            )));
        }
        if verts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "vertices {verts:?} are not strictly increasing"
            )));
        }
        Ok(())
    }

    #[inline]
    fn rank_k(&self, verts: &[u32]) -> u64 {
        verts
            .iter()
            .enumerate()
            .map(|(i, &v)| self.binom(v, i as u32 + 1))
            .sum()
    }

    fn unrank_k(&self, mut id: u64, k: u32) -> Simplex {
        let mut out: Simplex = SmallVec::from_elem(0, k as usize);
        let mut hi = self.n;
        for i in (0..k).rev() {
            // largest v < hi with C(v, i+1) <= id
            let (mut lo, mut top) = (i, hi - 1);
            while lo < top {
                let mid = (lo + top).div_ceil(2);
                if self.binom(mid, i + 1) <= id {
                    lo = mid;
                } else {
                    top = mid - 1;
                }
            }
            out[i as usize] = lo;
            id -= self.binom(lo, i + 1);
            hi = lo;
        }
        out
    }

    /// Signed facets of a face: facet `i` drops vertex `i` and carries `(-1)^i`.
    pub fn boundary(&self, face: &[u32]) -> Result<Vec<(i8, Simplex)>> {
        self.validate(face, self.d as usize + 1)?;
        Ok(facets(face))
    }

    /// Boundary of face `id` as `(row, sign)` pairs sorted by row.
    pub fn boundary_rows(&self, id: FaceId) -> Result<SmallVec<[(RowId, i8); 8]>> {
        let verts = self.unrank(id)?;
        Ok(self.boundary_rows_of(&verts))
    }

    /// As [`boundary_rows`](Self::boundary_rows) for an already validated tuple.
    pub(crate) fn boundary_rows_of(&self, verts: &[u32]) -> SmallVec<[(RowId, i8); 8]> {
        // rank of the facet without vertex i:
        //   sum_{j<i} C(v_j, j+1) + sum_{j>i} C(v_j, j)
        let k = verts.len();
        let mut suffix: SmallVec<[u64; 9]> = SmallVec::from_elem(0, k + 1);
        for j in (0..k).rev() {
            suffix[j] = suffix[j + 1] + self.binom(verts[j], j as u32);
        }
        let mut prefix = 0u64;
        let mut out: SmallVec<[(RowId, i8); 8]> = SmallVec::with_capacity(k);
        for i in 0..k {
            let r = prefix + suffix[i + 1];
            out.push((r as RowId, if i % 2 == 0 { 1 } else { -1 }));
            prefix += self.binom(verts[i], i as u32 + 1);
        }
        out.sort_unstable_by_key(|e| e.0);
        out
    }
}

/// Signed facets of any simplex, independent of a [`ComplexSpec`].
pub fn facets(face: &[u32]) -> Vec<(i8, Simplex)> {
    (0..face.len())
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let facet: Simplex = face
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect();
            (sign, facet)
        })
        .collect()
}

impl fmt::Debug for ComplexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexSpec")
            .field("n", &self.n)
            .field("d", &self.d)
            .finish()
    }
}

impl PartialEq for ComplexSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d
    }
}

impl Eq for ComplexSpec {}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    n: u32,
    d: u32,
}

impl Serialize for ComplexSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecRepr {
            n: self.n,
            d: self.d,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = SpecRepr::deserialize(de)?;
        ComplexSpec::new(r.n, r.d).map_err(serde::de::Error::custom)
    }
}
