//! Experiment drivers: vanishing-threshold sweeps, torsion census and the
//! face-count check, with run manifests and CSV output.
//!
//! Every driver seeds trial `i` of grid point `k` from
//! `seed.derive(k).trial(i)`, so rows do not depend on the worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::faces::ComplexSpec;
use crate::gf::PrimeModulus;
use crate::homology;
use crate::rng::{Seed, RNG_ALGORITHM};
use crate::sampler;
use crate::snf;

/// Version of the CSV and JSON output layout.
pub const SCHEMA_VERSION: &str = "lmck-results/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Coefficients for a vanishing test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coefficient {
    Rational,
    Integer,
    Prime(PrimeModulus),
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Rational => f.write_str("Q"),
            Coefficient::Integer => f.write_str("Z"),
            Coefficient::Prime(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Q" | "q" => Ok(Coefficient::Rational),
            "Z" | "z" => Ok(Coefficient::Integer),
            t => Ok(Coefficient::Prime(t.parse()?)),
        }
    }
}

impl Serialize for Coefficient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Sampling model for an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    /// Bernoulli with face probability `p`.
    P(f64),
    /// Bernoulli with `p = c·ln(n)/n`, clamped to `[0, 1]`.
    C(f64),
    /// Uniform with exactly `m` faces.
    M(u64),
}

impl Density {
    /// Face probability in Bernoulli mode.
    pub fn probability(self, spec: &ComplexSpec) -> Option<f64> {
        match self {
            Density::P(p) => Some(p),
            Density::C(c) => Some(c_to_p(spec, c)),
            Density::M(_) => None,
        }
    }

    pub fn sample(self, spec: &ComplexSpec, seed: Seed) -> Result<crate::DComplex> {
        match self {
            Density::M(m) => sampler::sample_uniform_m(spec, m, seed),
            _ => sampler::sample_bernoulli(spec, self.probability(spec).expect("bernoulli mode"), seed),
        }
    }
}

pub fn c_to_p(spec: &ComplexSpec, c: f64) -> f64 {
    let n = spec.n() as f64;
    (c * n.ln() / n).clamp(0.0, 1.0)
}

/// Wilson score interval for `k` successes in `n` trials at 95%.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let phat = k / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (centre - half).clamp(0.0, phat) };
    let hi = if k == n { 1.0 } else { (centre + half).clamp(phat, 1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub d: u32,
    pub coefficient: Coefficient,
    pub c: f64,
    pub p: f64,
    pub trials: u64,
    pub vanish_count: u64,
    pub vanish_fraction: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// `ok`, or `skipped: budget` when integer elimination was out of budget.
    pub status: String,
    /// Seconds for the whole grid point; only filled when timing is requested.
    pub wall_time: Option<f64>,
}

/// Arithmetic grid `c_min, c_min + step, ...` up to `c_max` inclusive.
pub fn c_grid(c_min: f64, c_max: f64, step: f64) -> Result<Vec<f64>> {
    let ordered = step > 0.0 && c_max >= c_min;
    if !ordered || !c_min.is_finite() || !c_max.is_finite() {
        return Err(Error::validation("c grid needs finite c_min <= c_max and step > 0"));
    }
    let count = ((c_max - c_min) / step + 1e-9).floor() as u64 + 1;
    Ok((0..count).map(|k| c_min + k as f64 * step).collect())
}

pub fn threshold_sweep(
    spec: &ComplexSpec,
    c_grid: &[f64],
    coefficients: &[Coefficient],
    trials: u64,
    seed: Seed,
) -> Result<Vec<SweepRow>> {
    threshold_sweep_with(spec, c_grid, coefficients, trials, seed, Execution::default(), false)
}

/// One row per `(c, coefficient)`, `c` outermost. Each trial's complex is
/// shared by all coefficients at its grid point.
pub fn threshold_sweep_with(
    spec: &ComplexSpec,
    c_grid: &[f64],
    coefficients: &[Coefficient],
    trials: u64,
    seed: Seed,
    exec: Execution,
    timing: bool,
) -> Result<Vec<SweepRow>> {
    if c_grid.is_empty() || c_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::validation("c grid must be nonempty and strictly ascending"));
    }
    if coefficients.is_empty() {
        return Err(Error::validation("at least one coefficient is required"));
    }
    if trials == 0 {
        return Err(Error::validation("trials must be positive"));
    }
    let mut rows = Vec::new();
    for (k, &c) in c_grid.iter().enumerate() {
        let start = Instant::now();
        let p = c_to_p(spec, c);
        let point = seed.derive(k as u64);
        // per trial, per coefficient: Some(vanishes) or None when out of budget
        let outcomes = exec::try_map_trials(exec, trials, |i| {
            let y = sampler::sample_bernoulli(spec, p, point.trial(i))?;
            coefficients
                .iter()
                .map(|coef| match coef {
                    Coefficient::Prime(q) => Ok(Some(homology::is_zero_mod_q(&y, q))),
                    Coefficient::Rational => Ok(Some(homology::is_zero_rational(&y))),
                    Coefficient::Integer => match homology::is_zero_integer(&y) {
                        Ok(v) => Ok(Some(v)),
                        Err(Error::Budget(_)) => Ok(None),
                        Err(e) => Err(e),
                    },
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let wall = timing.then(|| start.elapsed().as_secs_f64());
        for (j, coef) in coefficients.iter().enumerate() {
            let skipped = outcomes.iter().any(|o| o[j].is_none());
            let count = outcomes.iter().filter(|o| o[j] == Some(true)).count() as u64;
            let (count, status) = if skipped { (0, "skipped: budget") } else { (count, "ok") };
            let (lo, hi) = wilson_interval(count, trials);
            rows.push(SweepRow {
                n: spec.n(),
                d: spec.d(),
                coefficient: coef.clone(),
                c,
                p,
                trials,
                vanish_count: count,
                vanish_fraction: count as f64 / trials as f64,
                wilson_lo: lo,
                wilson_hi: hi,
                status: status.into(),
                wall_time: wall,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub trial: u64,
    pub faces: usize,
    pub betti_rational: u64,
    pub torsion_order: String,
    /// Semicolon-separated.
    pub torsion_primes: String,
    pub primes_complete: bool,
    /// `log2` of the column-length bound on the torsion order, rounded down.
    pub hadamard_bound_log2: u64,
    pub within_hadamard_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSummary {
    pub trials: u64,
    pub with_torsion: u64,
    pub max_torsion_order: String,
    pub torsion_order_bound_log2: f64,
    pub within_torsion_order_bound: bool,
    pub all_within_hadamard_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Census {
    pub rows: Vec<CensusRow>,
    pub summary: CensusSummary,
}

/// Exact integer homology of `trials` sampled complexes.
pub fn torsion_census(spec: &ComplexSpec, density: Density, trials: u64, seed: Seed) -> Result<Census> {
    torsion_census_with(spec, density, trials, seed, Execution::default())
}

pub fn torsion_census_with(
    spec: &ComplexSpec,
    density: Density,
    trials: u64,
    seed: Seed,
    exec: Execution,
) -> Result<Census> {
    let point = seed.derive(0);
    let rows = exec::try_map_trials(exec, trials, |i| {
        let y = density.sample(spec, point.trial(i))?;
        let divs = snf::smith_normal_form(&y)?;
        let order = divs.torsion_order();
        let tp = snf::torsion_primes(&divs);
        let hadamard = snf::hadamard_bound_for_rank(&y, divs.rank());
        Ok::<_, Error>(CensusRow {
            trial: i,
            faces: y.face_count(),
            betti_rational: spec.cycle_dim() - divs.rank() as u64,
            torsion_order: order.to_string(),
            torsion_primes: tp.primes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"),
            primes_complete: tp.complete,
            hadamard_bound_log2: snf::log2_floor(&hadamard),
            within_hadamard_bound: order <= hadamard,
        })
    })?;
    let max = rows
        .iter()
        .map(|r| r.torsion_order.parse::<BigUint>().expect("decimal"))
        .max()
        .unwrap_or_else(|| BigUint::from(1u32));
    let summary = CensusSummary {
        trials,
        with_torsion: rows.iter().filter(|r| r.torsion_order != "1").count() as u64,
        torsion_order_bound_log2: snf::torsion_order_bound_log2(spec.n() as u64, spec.d()),
        within_torsion_order_bound: max <= spec.torsion_order_bound(),
        max_torsion_order: max.to_string(),
        all_within_hadamard_bound: rows.iter().all(|r| r.within_hadamard_bound),
    };
    Ok(Census { rows, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceCountReport {
    pub n: u32,
    pub d: u32,
    /// Requested probability before clamping.
    pub p_requested: f64,
    pub p: f64,
    pub total_faces: u64,
    pub expected_faces: f64,
    /// `(12d + 12)·ln(n)·C(n, d)`.
    pub threshold: f64,
    pub trials: u64,
    pub meeting: u64,
    pub fraction: f64,
    pub min_faces: u64,
    pub max_faces: u64,
    /// Chernoff bound `exp(-δ²μ/2)` on the chance one trial falls short; 1
    /// when the threshold is not below the mean.
    pub chernoff_failure_bound: f64,
}

/// `40·d·ln(n)/n`, before clamping.
pub fn supercritical_p(spec: &ComplexSpec) -> f64 {
    let n = spec.n() as f64;
    40.0 * spec.d() as f64 * n.ln() / n
}

/// How often a Bernoulli complex at `p` (default [`supercritical_p`]) has at
/// least `(12d+12)·ln(n)·C(n,d)` faces.
pub fn face_count_check(spec: &ComplexSpec, p: Option<f64>, trials: u64, seed: Seed) -> Result<FaceCountReport> {
    face_count_check_with(spec, p, trials, seed, Execution::default())
}

pub fn face_count_check_with(
    spec: &ComplexSpec,
    p: Option<f64>,
    trials: u64,
    seed: Seed,
    exec: Execution,
) -> Result<FaceCountReport> {
    if trials == 0 {
        return Err(Error::validation("trials must be positive"));
    }
    let requested = p.unwrap_or_else(|| supercritical_p(spec));
    if requested.is_nan() || requested < 0.0 {
        return Err(Error::validation(format!("probability must be nonnegative, got {requested}")));
    }
    let p = requested.min(1.0);
    let n = spec.n() as f64;
    let total = spec.face_count();
    let threshold = (12.0 * spec.d() as f64 + 12.0) * n.ln() * spec.row_count() as f64;
    let point = seed.derive(0);
    let counts = exec::try_map_trials(exec, trials, |i| {
        Ok::<_, Error>(sampler::sample_bernoulli(spec, p, point.trial(i))?.face_count() as u64)
    })?;
    let meeting = counts.iter().filter(|&&c| c as f64 >= threshold).count() as u64;
    let mu = p * total as f64;
    let chernoff = if threshold < mu {
        let delta = 1.0 - threshold / mu;
        (-delta * delta * mu / 2.0).exp()
    } else {
        1.0
    };
    Ok(FaceCountReport {
        n: spec.n(),
        d: spec.d(),
        p_requested: requested,
        p,
        total_faces: total,
        expected_faces: mu,
        threshold,
        trials,
        meeting,
        fraction: meeting as f64 / trials as f64,
        min_faces: counts.iter().copied().min().unwrap_or(0),
        max_faces: counts.iter().copied().max().unwrap_or(0),
        chernoff_failure_bound: chernoff,
    })
}

/// Everything needed to regenerate a run's results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub rng_algorithm: String,
    pub master_seed: u64,
    pub command: String,
    /// The command's full parameter set.
    pub params: serde_json::Value,
    /// Omitted from the copy embedded in result files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, params: serde_json::Value) -> Self {
        RunManifest {
            schema: SCHEMA_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            rng_algorithm: RNG_ALGORITHM.into(),
            master_seed,
            command: command.into(),
            params,
            timestamp: None,
        }
    }

    /// Copy without the timestamp.
    pub fn reproducible(&self) -> Self {
        RunManifest {
            timestamp: None,
            ..self.clone()
        }
    }
}

/// CSV with the manifest on a leading `#` line.
pub fn write_csv<T: Serialize, W: Write>(out: W, manifest: &RunManifest, rows: &[T]) -> Result<()> {
    let mut out = out;
    let line = serde_json::to_string(&manifest.reproducible()).expect("manifest serializes");
    writeln!(out, "# {line}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        k => Error::Invariant(format!("csv serialization failed: {k:?}")),
    }
}

/// `{"manifest": ..., "results": ...}`, pretty-printed with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(mut out: W, manifest: &RunManifest, results: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T: ?Sized> {
        manifest: RunManifest,
        results: &'a T,
    }
    let doc = Doc {
        manifest: manifest.reproducible(),
        results,
    };
    serde_json::to_writer_pretty(&mut out, &doc).expect("results serialize");
    writeln!(out)?;
    Ok(())
}
