//! q-reducing sets, the face-by-face addition process, and Monte Carlo
//! estimates of the expected reducing-set size and of the crossing point
//! `mtilde_hat`.

use std::collections::HashSet;

use rand::Rng as _;
use serde::Serialize;

use crate::complex::DComplex;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::faces::{ComplexSpec, FaceId};
use crate::gf::{self, ModBasis, PrimeModulus};
use crate::rng::Seed;
use crate::sampler;

/// Faces whose addition to `y` lowers `dim H_{d-1}(·; GF(q))`, ascending.
///
/// A face qualifies iff its boundary is not in the span of the boundaries of
/// `y`, so faces of `y` itself never qualify.
pub fn reducing_set(y: &DComplex, q: &PrimeModulus) -> Vec<FaceId> {
    let spec = y.spec();
    let basis = gf::boundary_basis(y, q);
    reducing_faces(spec, &basis)
}

pub fn reducing_set_size(y: &DComplex, q: &PrimeModulus) -> u64 {
    let basis = gf::boundary_basis(y, q);
    count_reducing(y.spec(), &basis)
}

fn is_reducing(spec: &ComplexSpec, basis: &ModBasis, f: FaceId) -> bool {
    basis.is_reducing(spec, f).expect("face id in range")
}

fn reducing_faces(spec: &ComplexSpec, basis: &ModBasis) -> Vec<FaceId> {
    if basis.rank() as u64 == spec.cycle_dim() {
        return Vec::new();
    }
    (0..spec.face_count()).filter(|&f| is_reducing(spec, basis, f)).collect()
}

fn count_reducing(spec: &ComplexSpec, basis: &ModBasis) -> u64 {
    if basis.rank() as u64 == spec.cycle_dim() {
        return 0;
    }
    (0..spec.face_count()).filter(|&f| is_reducing(spec, basis, f)).count() as u64
}

/// Reducing-set size estimated from `k` faces drawn uniformly with
/// replacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampledSize {
    pub sampled: u64,
    pub hits: u64,
    pub estimate: f64,
    /// Binomial standard error of `estimate`.
    pub stderr: f64,
}

pub fn reducing_set_size_sampled(y: &DComplex, q: &PrimeModulus, k: u64, seed: Seed) -> Result<SampledSize> {
    if k == 0 {
        return Err(Error::validation("--sample-faces must be positive"));
    }
    let spec = y.spec();
    let basis = gf::boundary_basis(y, q);
    let total = spec.face_count();
    let mut rng = seed.rng();
    let hits = (0..k)
        .filter(|_| is_reducing(spec, &basis, rng.random_range(0..total)))
        .count() as u64;
    let frac = hits as f64 / k as f64;
    Ok(SampledSize {
        sampled: k,
        hits,
        estimate: frac * total as f64,
        stderr: total as f64 * (frac * (1.0 - frac) / k as f64).sqrt(),
    })
}

/// Faces added one at a time; `indicators[i]` records whether face
/// `ordering[i]` was reducing for the complex before it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcessTrace {
    pub q: PrimeModulus,
    pub ordering: Vec<FaceId>,
    pub indicators: Vec<bool>,
    /// `dims[i] = dim H_{d-1}(Y_i; GF(q))`, with `dims[0]` the empty complex.
    pub dims: Vec<u64>,
}

impl ProcessTrace {
    pub fn drops(&self) -> u64 {
        self.indicators.iter().filter(|&&z| z).count() as u64
    }

    pub fn final_dim(&self) -> u64 {
        *self.dims.last().expect("dims is never empty")
    }
}

/// Runs the addition process over `ordering`, stopping after `stop_at` faces
/// when given.
pub fn run_process(
    spec: &ComplexSpec,
    ordering: &[FaceId],
    q: &PrimeModulus,
    stop_at: Option<u64>,
) -> Result<ProcessTrace> {
    let len = stop_at.map_or(ordering.len(), |m| (m as usize).min(ordering.len()));
    let ordering = &ordering[..len];
    let mut seen = HashSet::with_capacity(len);
    for &f in ordering {
        if f >= spec.face_count() {
            return Err(Error::validation(format!("face id {f} out of range")));
        }
        if !seen.insert(f) {
            return Err(Error::validation(format!("face {f} appears twice in the ordering")));
        }
    }
    let mut basis = ModBasis::for_spec(spec, q);
    let mut dims = Vec::with_capacity(len + 1);
    let mut indicators = Vec::with_capacity(len);
    dims.push(spec.cycle_dim());
    for &f in ordering {
        let z = basis.insert_face(spec, f)?;
        let prev = *dims.last().expect("nonempty");
        if z && prev == 0 {
            return Err(Error::Invariant("homology dimension dropped below zero".into()));
        }
        indicators.push(z);
        dims.push(prev - z as u64);
    }
    Ok(ProcessTrace {
        q: q.clone(),
        ordering: ordering.to_vec(),
        indicators,
        dims,
    })
}

/// [`run_process`] over a uniformly random ordering drawn from `seed`.
pub fn sample_process(spec: &ComplexSpec, q: &PrimeModulus, seed: Seed, stop_at: Option<u64>) -> Result<ProcessTrace> {
    let ordering = match stop_at {
        Some(m) => sampler::ordering_prefix(spec, m.min(spec.face_count()), seed)?,
        None => sampler::sample_ordering(spec, seed)?,
    };
    run_process(spec, &ordering, q, None)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let t = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / t;
        let stderr = if xs.len() < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
            (var / t).sqrt()
        };
        MeanEstimate {
            mean,
            stderr,
            trials: xs.len() as u64,
        }
    }
}

/// Monte Carlo mean of `|reducing_set(Y(n, m), q)|`; trial `i` samples from
/// `seed.trial(i)`.
pub fn mean_reducing_size(spec: &ComplexSpec, m: u64, q: &PrimeModulus, trials: u64, seed: Seed) -> Result<MeanEstimate> {
    mean_reducing_size_with(spec, m, q, trials, seed, Execution::default())
}

pub fn mean_reducing_size_with(
    spec: &ComplexSpec,
    m: u64,
    q: &PrimeModulus,
    trials: u64,
    seed: Seed,
    exec: Execution,
) -> Result<MeanEstimate> {
    if trials == 0 {
        return Err(Error::validation("trials must be positive"));
    }
    let sizes = exec::try_map_trials(exec, trials, |i| {
        let y = sampler::sample_uniform_m(spec, m, seed.trial(i))?;
        Ok::<_, Error>(reducing_set_size(&y, q) as f64)
    })?;
    Ok(MeanEstimate::from_samples(&sizes))
}

/// One evaluated point of the `mtilde_hat` scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub m: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Membership frequency of one fixed face in the reducing set at
/// `mtilde_hat`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeFrequency {
    pub face: FaceId,
    pub frequency: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MTildeEstimate {
    pub n: u32,
    pub d: u32,
    pub q: PrimeModulus,
    pub trials: u64,
    pub master_seed: u64,
    /// `C(n, d+1) / 2`.
    pub target: f64,
    /// Smallest scanned `m` whose estimated mean is at most `target`.
    pub mtilde_hat: u64,
    /// Standard error of `mtilde_hat`, propagated from the mean through the
    /// local slope of the mean curve.
    pub mtilde_stderr: f64,
    pub mean_at: MeanEstimate,
    /// The mean at `mtilde_hat - 1`; absent when `mtilde_hat` is 0.
    pub mean_before: Option<MeanEstimate>,
    pub probes: Vec<ProbeFrequency>,
    pub scan: Vec<ScanPoint>,
}

/// Trial state during the scan: its ordering and the basis after the first
/// `at` faces.
#[derive(Clone)]
struct Walker {
    ordering: Vec<FaceId>,
    at: u64,
    basis: ModBasis,
}

/// Per-trial result at one grid point.
#[derive(Clone)]
struct Sample {
    size: u64,
    probes: Vec<bool>,
}

impl Walker {
    fn advance_to(&mut self, spec: &ComplexSpec, m: u64) {
        let full = spec.cycle_dim() as usize;
        for &f in &self.ordering[self.at as usize..m as usize] {
            if self.basis.rank() == full {
                break;
            }
            self.basis.insert_face(spec, f).expect("face ids come from the sampler");
        }
        self.at = m;
    }

    /// Evaluates the points of `grid` (ascending, none below `at`) without
    /// moving the walker itself.
    fn evaluate(&self, spec: &ComplexSpec, grid: &[u64], probes: &[FaceId]) -> Vec<Sample> {
        let mut w = self.clone();
        grid.iter()
            .map(|&m| {
                w.advance_to(spec, m);
                Sample {
                    size: count_reducing(spec, &w.basis),
                    probes: probes.iter().map(|&f| is_reducing(spec, &w.basis, f)).collect(),
                }
            })
            .collect()
    }
}

/// Evaluates `grid` on every walker; returns the per-point means and the
/// per-trial samples, indexed `[trial][point]`.
fn scan(
    spec: &ComplexSpec,
    walkers: &[Walker],
    grid: &[u64],
    probes: &[FaceId],
    exec: Execution,
) -> (Vec<MeanEstimate>, Vec<Vec<Sample>>) {
    let samples = exec::map_trials(exec, walkers.len() as u64, |i| walkers[i as usize].evaluate(spec, grid, probes));
    let means = (0..grid.len())
        .map(|j| {
            let xs: Vec<f64> = samples.iter().map(|s| s[j].size as f64).collect();
            MeanEstimate::from_samples(&xs)
        })
        .collect();
    (means, samples)
}

/// Estimates the smallest `m` with `E|reducing_set(Y(n, m), q)| <= C(n, d+1)/2`.
///
/// Each trial draws one random ordering; its complex at size `m` is the
/// length-`m` prefix, so the per-trial sizes and hence the estimated mean are
/// non-increasing in `m`. The scan runs over a doubling grid and then refines
/// the bracketing interval linearly, at most eight points at a time, down to
/// step 1.
pub fn estimate_mtilde(spec: &ComplexSpec, q: &PrimeModulus, trials: u64, seed: Seed) -> Result<MTildeEstimate> {
    estimate_mtilde_with(spec, q, trials, seed, Execution::default())
}

pub fn estimate_mtilde_with(
    spec: &ComplexSpec,
    q: &PrimeModulus,
    trials: u64,
    seed: Seed,
    exec: Execution,
) -> Result<MTildeEstimate> {
    if trials < 30 {
        return Err(Error::validation("estimate_mtilde needs at least 30 trials"));
    }
    let total = spec.face_count();
    let target = total as f64 / 2.0;
    let probes = vec![0, total / 2, total - 1];
    let mut walkers = exec::try_map_trials(exec, trials, |i| {
        Ok::<_, Error>(Walker {
            ordering: sampler::sample_ordering(spec, seed.trial(i))?,
            at: 0,
            basis: ModBasis::for_spec(spec, q),
        })
    })?;
    let mut points: Vec<(u64, MeanEstimate)> = Vec::new();

    let mut grid = vec![0u64];
    let mut m = 1;
    while m < total {
        grid.push(m);
        m *= 2;
    }
    grid.push(total);
    let (means, samples) = scan(spec, &walkers, &grid, &probes, exec);
    points.extend(grid.iter().copied().zip(means.iter().copied()));
    let h = means
        .iter()
        .position(|e| e.mean <= target)
        .ok_or_else(|| Error::Invariant("mean reducing-set size never reaches the target".into()))?;
    let mut hi = grid[h];
    let mut hi_samples: Vec<Sample> = samples.iter().map(|s| s[h].clone()).collect();
    let mut lo = if h == 0 { 0 } else { grid[h - 1] };
    let mut slope_bracket = None;
    while hi - lo > 1 {
        exec::for_each_mut(exec, &mut walkers, |_, w| w.advance_to(spec, lo));
        if hi - lo >= 8 {
            slope_bracket = Some((lo, hi));
        }
        let step = (hi - lo).div_ceil(8);
        let grid: Vec<u64> = (1..).map(|k| lo + k * step).take_while(|&m| m < hi).collect();
        let (means, samples) = scan(spec, &walkers, &grid, &probes, exec);
        points.extend(grid.iter().copied().zip(means.iter().copied()));
        match means.iter().position(|e| e.mean <= target) {
            Some(j) => {
                hi = grid[j];
                hi_samples = samples.iter().map(|s| s[j].clone()).collect();
                if j > 0 {
                    lo = grid[j - 1];
                }
            }
            None => lo = *grid.last().expect("step < hi - lo"),
        }
    }
    let mtilde_hat = hi;
    points.sort_by_key(|p| p.0);
    points.dedup_by_key(|p| p.0);
    let mean_of = |m: u64| points.iter().find(|p| p.0 == m).map(|p| p.1);
    let mean_at = mean_of(mtilde_hat).expect("evaluated");
    let mean_before = mtilde_hat.checked_sub(1).and_then(mean_of);

    let mtilde_stderr = match slope_bracket.and_then(|(a, b)| Some((a, b, mean_of(a)?, mean_of(b)?))) {
        Some((a, b, ea, eb)) if ea.mean > eb.mean => mean_at.stderr * (b - a) as f64 / (ea.mean - eb.mean),
        _ => 0.0,
    };
    let t = trials as f64;
    let probes = probes
        .iter()
        .enumerate()
        .map(|(k, &face)| {
            let freq = hi_samples.iter().filter(|s| s.probes[k]).count() as f64 / t;
            ProbeFrequency {
                face,
                frequency: freq,
                stderr: (freq * (1.0 - freq) / t).sqrt(),
            }
        })
        .collect();
    Ok(MTildeEstimate {
        n: spec.n(),
        d: spec.d(),
        q: q.clone(),
        trials,
        master_seed: seed.master,
        target,
        mtilde_hat,
        mtilde_stderr,
        mean_at,
        mean_before,
        probes,
        scan: points
            .into_iter()
            .map(|(m, e)| ScanPoint {
                m,
                mean: e.mean,
                stderr: e.stderr,
            })
            .collect(),
    })
}
