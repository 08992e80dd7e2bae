//! The d-complex value type and the `lmck v1` text format.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::faces::{ComplexSpec, FaceId};

/// Membership bitset is kept when faces exceed this fraction of all faces.
const DENSE_FRACTION: u64 = 64;

/// A d-complex on `n` vertices with complete (d-1)-skeleton, identified with
/// its set of d-faces.
#[derive(Clone)]
pub struct DComplex {
    spec: ComplexSpec,
    faces: Vec<FaceId>,
    bits: Option<Vec<u64>>,
}

impl DComplex {
    pub fn empty(spec: &ComplexSpec) -> Self {
        DComplex {
            spec: spec.clone(),
            faces: Vec::new(),
            bits: None,
        }
    }

    /// Every possible d-face.
    pub fn full(spec: &ComplexSpec) -> Self {
        Self::from_sorted_unchecked(spec, (0..spec.face_count()).collect())
    }

    /// Builds a complex from ids in any order; duplicates are an error.
    pub fn from_faces(spec: &ComplexSpec, mut faces: Vec<FaceId>) -> Result<Self> {
        faces.sort_unstable();
        if let Some(w) = faces.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!("duplicate face id {}", w[0])));
        }
        if let Some(&last) = faces.last() {
            if last >= spec.face_count() {
                return Err(Error::validation(format!(
                    "face id {last} out of range 0..{}",
                    spec.face_count()
                )));
            }
        }
        Ok(Self::from_sorted_unchecked(spec, faces))
    }

    pub(crate) fn from_sorted_unchecked(spec: &ComplexSpec, faces: Vec<FaceId>) -> Self {
        debug_assert!(faces.windows(2).all(|w| w[0] < w[1]));
        let mut c = DComplex {
            spec: spec.clone(),
            faces,
            bits: None,
        };
        c.refresh_bits();
        c
    }

    fn refresh_bits(&mut self) {
        let total = self.spec.face_count();
        if (self.faces.len() as u64) * DENSE_FRACTION > total {
            let mut bits = vec![0u64; total.div_ceil(64) as usize];
            for &f in &self.faces {
                bits[(f / 64) as usize] |= 1 << (f % 64);
            }
            self.bits = Some(bits);
        } else {
            self.bits = None;
        }
    }

    pub fn spec(&self) -> &ComplexSpec {
        &self.spec
    }

    /// Sorted face ids.
    pub fn faces(&self) -> &[FaceId] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, f: FaceId) -> bool {
        match &self.bits {
            Some(bits) => {
                f < self.spec.face_count() && bits[(f / 64) as usize] & (1 << (f % 64)) != 0
            }
            None => self.faces.binary_search(&f).is_ok(),
        }
    }

    /// `Y ∪ f`. Idempotent when `f` is already present.
    pub fn add_face(&self, f: FaceId) -> Result<Self> {
        if f >= self.spec.face_count() {
            return Err(Error::validation(format!(
                "face id {f} out of range 0..{}",
                self.spec.face_count()
            )));
        }
        match self.faces.binary_search(&f) {
            Ok(_) => Ok(self.clone()),
            Err(pos) => {
                let mut faces = Vec::with_capacity(self.faces.len() + 1);
                faces.extend_from_slice(&self.faces[..pos]);
                faces.push(f);
                faces.extend_from_slice(&self.faces[pos..]);
                Ok(Self::from_sorted_unchecked(&self.spec, faces))
            }
        }
    }

    /// Face-set union of two complexes over the same spec.
    pub fn union(&self, other: &DComplex) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::validation("union of complexes with different (n, d)"));
        }
        let (a, b) = (&self.faces, &other.faces);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Self::from_sorted_unchecked(&self.spec, out))
    }

    /// True when every face of `self` is a face of `other`.
    pub fn is_subcomplex_of(&self, other: &DComplex) -> bool {
        self.spec == other.spec && self.faces.iter().all(|&f| other.contains(f))
    }

    /// Serializes to the `lmck v1` format, faces in colex order.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.faces.len() * 12);
        out.push_str("lmck v1\n");
        let _ = writeln!(out, "n={} d={}", self.spec.n(), self.spec.d());
        for &f in &self.faces {
            let verts = self.spec.unrank(f).expect("stored ids are in range");
            let mut first = true;
            for v in verts {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `lmck v1` format. Face order in the input is irrelevant.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (ln, magic) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
        if magic != "lmck v1" {
            return Err(Error::parse(ln, format!("expected `lmck v1`, found `{magic}`")));
        }
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(ln + 1, "missing `n=<n> d=<d>` header"))?;
        let (n, d) = parse_header(header).ok_or_else(|| {
            Error::parse(ln, format!("malformed header `{header}`, expected `n=<n> d=<d>`"))
        })?;
        let spec = ComplexSpec::new(n, d).map_err(|e| Error::parse(ln, e.to_string()))?;

        let mut faces = Vec::new();
        for (ln, line) in lines {
            let verts = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(ln, format!("bad vertex in `{line}`: {e}")))?;
            let id = spec
                .rank(&verts)
                .map_err(|e| Error::parse(ln, e.to_string()))?;
            faces.push((id, ln));
        }
        faces.sort_unstable();
        if let Some(w) = faces.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::parse(
                w[0].1.max(w[1].1),
                format!("duplicate face (first seen on line {})", w[0].1.min(w[1].1)),
            ));
        }
        Ok(Self::from_sorted_unchecked(
            &spec,
            faces.into_iter().map(|(id, _)| id).collect(),
        ))
    }
}

fn parse_header(h: &str) -> Option<(u32, u32)> {
    let mut n = None;
    let mut d = None;
    for tok in h.split_whitespace() {
        let (k, v) = tok.split_once('=')?;
        let v: u32 = v.parse().ok()?;
        match k {
            "n" if n.is_none() => n = Some(v),
            "d" if d.is_none() => d = Some(v),
            _ => return None,
        }
    }
    Some((n?, d?))
}

impl PartialEq for DComplex {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.faces == other.faces
    }
}

impl Eq for DComplex {}

impl std::fmt::Debug for DComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DComplex")
            .field("n", &self.spec.n())
            .field("d", &self.spec.d())
            .field("faces", &self.faces)
            .finish()
    }
}
