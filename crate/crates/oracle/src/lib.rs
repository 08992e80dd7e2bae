//! Slow, obviously-correct reference computations for the test suites.
//!
//! Nothing here shares an algorithm with the production path: boundary
//! matrices are assembled densely from vertex tuples, ranks come from
//! fraction-free (Bareiss) elimination or plain dense elimination mod q, Smith
//! forms from Bezout row/column steps, and reducing sets from recomputing the
//! homology once per candidate face.

use std::collections::BTreeMap;

use lmck::{ComplexSpec, DComplex, FaceId};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<BigInt>>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![vec![BigInt::zero(); cols]; rows],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows
                .iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        }
    }

    /// Boundary matrix whose columns are the listed k-simplices and whose rows
    /// are all (k-1)-subsets of `0..n` in lexicographic order.
    pub fn boundary_of(n: u32, simplices: &[Vec<u32>]) -> Self {
        let k = simplices.first().map_or(1, |s| s.len());
        let row_faces = subsets(n, k - 1);
        let index: BTreeMap<&Vec<u32>, usize> =
            row_faces.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut m = Self::zeros(row_faces.len(), simplices.len());
        for (j, s) in simplices.iter().enumerate() {
            for i in 0..s.len() {
                let mut facet = s.clone();
                facet.remove(i);
                let sign = if i % 2 == 0 { 1 } else { -1 };
                m.data[index[&facet]][j] += sign;
            }
        }
        m
    }

    /// Boundary matrix of the d-faces of `y`.
    pub fn boundary(y: &DComplex) -> Self {
        Self::boundary_of(y.spec().n(), &face_tuples(y))
    }
}

/// All k-subsets of `0..n`, lexicographic.
pub fn subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, k: usize, start: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(n, k, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn face_tuples(y: &DComplex) -> Vec<Vec<u32>> {
    y.faces()
        .iter()
        .map(|&f| y.spec().unrank(f).expect("valid id").to_vec())
        .collect()
}

/// Rank over ℚ by fraction-free Gaussian elimination.
pub fn bareiss_rank(m: &DenseMatrix) -> usize {
    let mut a = m.data.clone();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..m.cols {
        let Some(p) = (rank..m.rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..m.rows {
            for j in c + 1..m.cols {
                let v = &a[i][j] * &a[rank][c] - &a[i][c] * &a[rank][j];
                debug_assert!((&v % &prev).is_zero());
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Rank over GF(q) by dense elimination.
pub fn rank_mod(m: &DenseMatrix, q: &BigUint) -> usize {
    match q.to_u64() {
        Some(w) => rank_mod_word(m, w),
        None => rank_mod_big(m, q),
    }
}

fn rank_mod_word(m: &DenseMatrix, q: u64) -> usize {
    let q = q as u128;
    let qi = BigInt::from(q);
    let mut a: Vec<Vec<u128>> = m
        .data
        .iter()
        .map(|r| r.iter().map(|v| v.mod_floor(&qi).to_u128().expect("reduced")).collect())
        .collect();
    let pow = |mut b: u128, mut e: u128| {
        let mut r = 1u128;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % q;
            }
            b = b * b % q;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..m.cols {
        let Some(p) = (rank..m.rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let inv = pow(a[rank][c], q - 2);
        for i in 0..m.rows {
            if i != rank && a[i][c] != 0 {
                let k = a[i][c] * inv % q;
                for j in c..m.cols {
                    let t = k * a[rank][j] % q;
                    a[i][j] = (a[i][j] + q - t) % q;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn rank_mod_big(m: &DenseMatrix, q: &BigUint) -> usize {
    let q = BigInt::from(q.clone());
    let mut a: Vec<Vec<BigInt>> = m
        .data
        .iter()
        .map(|r| r.iter().map(|v| v.mod_floor(&q)).collect())
        .collect();
    let mut rank = 0;
    for c in 0..m.cols {
        let Some(p) = (rank..m.rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = a[rank][c].modpow(&(&q - 2), &q);
        for i in 0..m.rows {
            if i != rank && !a[i][c].is_zero() {
                let k = (&a[i][c] * &inv).mod_floor(&q);
                for j in c..m.cols {
                    let t = &k * &a[rank][j];
                    a[i][j] = (&a[i][j] - t).mod_floor(&q);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `(x, y, p/g, r/g)` with `x p + y r = g = gcd(p, r)`, taking `x = 1, y = 0`
/// whenever `p | r` so that divisible entries are cleared in place.
fn bezout(p: &BigInt, r: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    if !p.is_zero() && (r % p).is_zero() {
        return (BigInt::one(), BigInt::zero(), BigInt::one(), r / p);
    }
    let e = p.extended_gcd(r);
    (e.x, e.y, p / &e.gcd, r / &e.gcd)
}

/// Textbook Smith normal form: Bezout row and column steps until the matrix is
/// diagonal, then gcd/lcm normalization of the diagonal.
pub fn naive_snf(m: &DenseMatrix) -> Vec<BigUint> {
    let mut a = m.data.clone();
    let (rows, cols) = (m.rows, m.cols);
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !a[i][j].is_zero())
        else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                changed = true;
                let (x, y, pg, rg) = bezout(&a[t][t], &a[i][t]);
                for j in 0..cols {
                    let (u, v) = (a[t][j].clone(), a[i][j].clone());
                    a[t][j] = &x * &u + &y * &v;
                    a[i][j] = &rg * &u - &pg * &v;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                changed = true;
                let (x, y, pg, rg) = bezout(&a[t][t], &a[t][j]);
                for row in a.iter_mut() {
                    let (u, v) = (row[t].clone(), row[j].clone());
                    row[t] = &x * &u + &y * &v;
                    row[j] = &rg * &u - &pg * &v;
                }
            }
            if !changed {
                break;
            }
        }
        t += 1;
    }
    let mut diag: Vec<BigUint> = (0..rows.min(cols))
        .map(|i| a[i][i].abs().to_biguint().expect("nonnegative"))
        .filter(|v| !v.is_zero())
        .collect();
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = diag[i].gcd(&diag[j]);
            let l = &diag[i] / &g * &diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

/// `C(n,d) - rank ∂_{d-1}` on the complete (d-1)-skeleton, computed densely.
pub fn cycle_dim(n: u32, d: u32) -> usize {
    let ridges = subsets(n, d as usize);
    let m = DenseMatrix::boundary_of(n, &ridges);
    ridges.len() - bareiss_rank(&m)
}

/// Betti number of `H_{d-1}(y; GF(q))` from dense ranks.
pub fn betti_mod(y: &DComplex, q: &BigUint) -> usize {
    cycle_dim(y.spec().n(), y.spec().d()) - rank_mod(&DenseMatrix::boundary(y), q)
}

/// Faces whose addition changes `dim H_{d-1}(·; GF(q))`, by recomputing the
/// rank of the enlarged boundary matrix for every candidate face.
pub fn brute_reducing_set(y: &DComplex, q: &BigUint) -> Vec<FaceId> {
    let spec: &ComplexSpec = y.spec();
    let base = face_tuples(y);
    let rank0 = rank_mod(&DenseMatrix::boundary_of(spec.n(), &base), q);
    let mut out = Vec::new();
    for f in 0..spec.face_count() {
        let t = spec.unrank(f).expect("valid id").to_vec();
        if base.contains(&t) {
            continue;
        }
        let mut ext = base.clone();
        ext.push(t);
        if rank_mod(&DenseMatrix::boundary_of(spec.n(), &ext), q) != rank0 {
            out.push(f);
        }
    }
    out
}

/// The 6-vertex triangulation of the real projective plane.
pub fn projective_plane() -> DComplex {
    let spec = ComplexSpec::new(6, 2).expect("valid spec");
    let tris: [[u32; 3]; 10] = [
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 5],
        [0, 1, 5],
        [1, 2, 4],
        [1, 3, 4],
        [1, 3, 5],
        [2, 3, 5],
        [2, 4, 5],
    ];
    let ids = tris.iter().map(|t| spec.rank(t).expect("valid tuple")).collect();
    DComplex::from_faces(&spec, ids).expect("distinct faces")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn bareiss_examples() {
        assert_eq!(bareiss_rank(&DenseMatrix::identity(5)), 5);
        assert_eq!(bareiss_rank(&DenseMatrix::zeros(3, 4)), 0);
        // boundary of the 3-simplex: 6 edges x 4 triangles
        let tris = subsets(4, 3);
        let m = DenseMatrix::boundary_of(4, &tris);
        assert_eq!((m.rows, m.cols), (6, 4));
        assert_eq!(bareiss_rank(&m), 3);
    }

    #[test]
    fn naive_snf_examples() {
        assert_eq!(naive_snf(&DenseMatrix::from_rows(&[vec![2, 0], vec![0, 6]])), big(&[2, 6]));
        assert_eq!(naive_snf(&DenseMatrix::from_rows(&[vec![2, 0], vec![0, 3]])), big(&[1, 6]));
        assert_eq!(
            naive_snf(&DenseMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]])),
            big(&[2, 6, 12])
        );
        let rp2 = naive_snf(&DenseMatrix::boundary(&projective_plane()));
        assert_eq!(rp2, big(&[1, 1, 1, 1, 1, 1, 1, 1, 1, 2]));
    }

    #[test]
    fn cycle_dims() {
        assert_eq!(cycle_dim(4, 2), 3);
        assert_eq!(cycle_dim(6, 2), 10);
        assert_eq!(cycle_dim(6, 3), 10);
    }

    #[test]
    fn reducing_set_extremes() {
        let spec = ComplexSpec::new(5, 2).unwrap();
        let two = BigUint::from(2u32);
        assert_eq!(brute_reducing_set(&DComplex::empty(&spec), &two), (0..10).collect::<Vec<_>>());
        assert!(brute_reducing_set(&DComplex::full(&spec), &two).is_empty());
    }

    #[test]
    fn projective_plane_mod_ranks() {
        let m = DenseMatrix::boundary(&projective_plane());
        assert_eq!(rank_mod(&m, &BigUint::from(2u32)), 9);
        assert_eq!(rank_mod(&m, &BigUint::from(3u32)), 10);
        assert_eq!(bareiss_rank(&m), 10);
        let big = BigUint::from(2u32).pow(89) - 1u32;
        assert_eq!(rank_mod(&m, &big), 10);
        assert_eq!(rank_mod_big(&m, &BigUint::from(2u32)), 9);
    }
}
