//! Random d-dimensional simplicial complexes with complete (d-1)-skeleton,
//! their degree-(d-1) homology over ℚ, GF(q) and ℤ, reducing sets, and
//! reproducible threshold experiments.

pub mod certify;
pub mod complex;
pub mod error;
pub mod exec;
pub mod faces;
pub mod gf;
pub mod harness;
pub mod homology;
pub mod primes;
pub mod reducing;
pub mod rng;
pub mod sampler;
pub mod snf;

pub use complex::DComplex;
pub use error::{Error, Result};
pub use faces::{ComplexSpec, FaceId, RowId};
pub use gf::{boundary_rank, PrimeModulus};
pub use rng::Seed;
