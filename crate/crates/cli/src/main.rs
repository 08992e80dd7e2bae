//! `lmck`: sample random d-complexes, compute their homology and run the
//! threshold experiments.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmck::certify::{self, Certificate};
use lmck::exec::{self, Execution};
use lmck::harness::{self, Coefficient, Density, RunManifest};
use lmck::{homology, reducing, ComplexSpec, DComplex, Error, PrimeModulus, Result, Seed};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "lmck", version, about = "Random d-complexes and the vanishing of their homology")]
struct Cli {
    /// Worker threads for trial-level parallelism [default: available parallelism]
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format [default: csv for tables, json otherwise]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Experiment output root; each run gets `<out-dir>/<timestamp>-<tag>/`
    #[arg(long, global = true, default_value = "runs")]
    out_dir: PathBuf,

    /// Run directory suffix [default: the subcommand name]
    #[arg(long, global = true)]
    tag: Option<String>,

    /// Print experiment results to stdout instead of writing a run directory
    #[arg(long, global = true)]
    stdout: bool,

    /// Record wall-clock times (makes results differ between runs)
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Sample a complex and write it in lmck text format
    Sample(SampleArgs),
    /// Homology summary of a complex file
    Homology(HomologyArgs),
    /// q-reducing set of a complex file
    ReducingSet(ReducingArgs),
    /// Trace of the face-by-face addition process
    Process(ProcessArgs),
    /// Estimate the crossing point where the mean reducing set halves
    Mtilde(MtildeArgs),
    /// Certify vanishing integer homology from two half-density samples
    CertifyZ(CertifyArgs),
    /// Vanishing frequency over a grid of c, with p = c·ln(n)/n
    Sweep(SweepArgs),
    /// Exact torsion of sampled complexes
    Census(CensusArgs),
    /// Fraction of samples meeting the supercritical face-count floor
    FaceCount(FaceCountArgs),
    /// Re-run the experiment recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SpecArgs {
    /// Vertices
    #[arg(long)]
    n: u32,
    /// Face dimension
    #[arg(long)]
    d: u32,
}

impl SpecArgs {
    fn spec(&self) -> Result<ComplexSpec> {
        ComplexSpec::new(self.n, self.d)
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[group(required = true, multiple = false)]
struct DensityArgs {
    /// Bernoulli face probability
    #[arg(long)]
    p: Option<f64>,
    /// Exact face count (uniform model)
    #[arg(long)]
    m: Option<u64>,
    /// Bernoulli with p = c·ln(n)/n
    #[arg(long)]
    c: Option<f64>,
}

impl DensityArgs {
    fn density(&self) -> Density {
        match (self.p, self.m, self.c) {
            (Some(p), _, _) => Density::P(p),
            (_, Some(m), _) => Density::M(m),
            (_, _, Some(c)) => Density::C(c),
            _ => unreachable!("clap requires one of --p, --m, --c"),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SampleArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    density: DensityArgs,
    #[arg(long)]
    seed: u64,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct HomologyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated primes
    #[arg(long, value_delimiter = ',')]
    primes: Vec<PrimeModulus>,
    /// Also compute integer homology (Smith normal form)
    #[arg(long)]
    integer: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ReducingArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    q: PrimeModulus,
    /// Estimate the size from K uniformly sampled faces
    #[arg(long)]
    sample_faces: Option<u64>,
    /// Seed for --sample-faces
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// List the face ids
    #[arg(long)]
    ids: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ProcessArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    q: PrimeModulus,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    stop_at: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct MtildeArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    q: PrimeModulus,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CertifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Density of each half-sample, at most 1/2
    #[arg(long)]
    p: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SweepArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    c_min: f64,
    #[arg(long)]
    c_max: f64,
    #[arg(long)]
    c_step: f64,
    /// Comma-separated: a prime, Q or Z
    #[arg(long, value_delimiter = ',', required = true)]
    coeff: Vec<Coefficient>,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CensusArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    density: DensityArgs,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct FaceCountArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Face probability [default: 40·d·ln(n)/n]
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

/// What a manifest records: enough to regenerate the results byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunParams {
    format: Format,
    timing: bool,
    command: Command,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Homology(_) => "homology",
            Command::ReducingSet(_) => "reducing-set",
            Command::Process(_) => "process",
            Command::Mtilde(_) => "mtilde",
            Command::CertifyZ(_) => "certify-z",
            Command::Sweep(_) => "sweep",
            Command::Census(_) => "census",
            Command::FaceCount(_) => "face-count",
            Command::Replay(_) => "replay",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Process(_) | Command::Sweep(_) | Command::Census(_) => Format::Csv,
            _ => Format::Json,
        }
    }

    fn seed(&self) -> u64 {
        match self {
            Command::Sample(a) => a.seed,
            Command::ReducingSet(a) => a.seed,
            Command::Process(a) => a.seed,
            Command::Mtilde(a) => a.seed,
            Command::CertifyZ(a) => a.seed,
            Command::Sweep(a) => a.seed,
            Command::Census(a) => a.seed,
            Command::FaceCount(a) => a.seed,
            Command::Homology(_) | Command::Replay(_) => 0,
        }
    }
}

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    face: Option<u64>,
    simplex: String,
    indicator: Option<u8>,
    dim: u64,
}

#[derive(Serialize)]
struct CertificateRow {
    trial: u64,
    faces_y1: usize,
    faces_y2: usize,
    faces_union: usize,
    betti_rational_y1: u64,
    torsion_primes_y1: String,
    primes_complete: Option<bool>,
    verdict: certify::Verdict,
}

impl From<&Certificate> for CertificateRow {
    fn from(c: &Certificate) -> Self {
        let tp = c.torsion_primes_y1.as_ref();
        CertificateRow {
            trial: c.seed.stream,
            faces_y1: c.faces_y1,
            faces_y2: c.faces_y2,
            faces_union: c.faces_union,
            betti_rational_y1: c.betti_rational_y1,
            torsion_primes_y1: tp
                .map(|t| t.primes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            primes_complete: tp.map(|t| t.complete),
            verdict: c.verdict,
        }
    }
}

const NOT_CERTIFIED_CAVEAT: &str =
    "note: not-certified is one-sided; it is not evidence that the integer homology is nonzero";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lmck: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    exec::with_threads(threads, move || dispatch(cli))?
}

fn dispatch(cli: Cli) -> Result<()> {
    let (command, format, timing) = match &cli.command {
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.manifest)?;
            let m: RunManifest = serde_json::from_str(&text)
                .map_err(|e| Error::Validation(format!("{}: {e}", a.manifest.display())))?;
            let params: RunParams = serde_json::from_value(m.params)
                .map_err(|e| Error::Validation(format!("manifest parameters: {e}")))?;
            (params.command, params.format, params.timing)
        }
        c => (c.clone(), cli.format.unwrap_or_else(|| c.default_format()), cli.timing),
    };
    let mut out = io::stdout().lock();
    match &command {
        Command::Sample(a) => {
            let y = a.density.density().sample(&a.spec.spec()?, Seed::new(a.seed))?;
            match &a.out {
                Some(path) => fs::write(path, y.to_text())?,
                None => out.write_all(y.to_text().as_bytes())?,
            }
            Ok(())
        }
        Command::Homology(a) => {
            let y = read_complex(&a.input)?;
            let s = homology::summary_with(&y, &a.primes, a.integer)?;
            print_json(&mut out, &s)
        }
        Command::ReducingSet(a) => {
            let y = read_complex(&a.input)?;
            let v = match a.sample_faces {
                Some(k) => serde_json::to_value(reducing::reducing_set_size_sampled(&y, &a.q, k, Seed::new(a.seed))?),
                None => {
                    let set = reducing::reducing_set(&y, &a.q);
                    let mut v = serde_json::json!({ "q": a.q, "size": set.len() });
                    if a.ids {
                        v["ids"] = serde_json::to_value(&set).expect("ids serialize");
                    }
                    Ok(v)
                }
            }
            .expect("serializable");
            print_json(&mut out, &v)
        }
        _ => {
            let params = RunParams {
                format,
                timing,
                command: command.clone(),
            };
            let manifest = RunManifest::new(
                command.name(),
                command.seed(),
                serde_json::to_value(&params).expect("parameters serialize"),
            );
            let mut buf = Vec::new();
            experiment(&command, format, timing, &manifest, &mut buf)?;
            if cli.stdout {
                out.write_all(&buf)?;
            } else {
                let tag = cli.tag.as_deref().unwrap_or(command.name());
                let dir = write_run(&cli.out_dir, tag, &manifest, format, &buf)?;
                writeln!(out, "{}", dir.display())?;
            }
            Ok(())
        }
    }
}

fn experiment(command: &Command, format: Format, timing: bool, m: &RunManifest, out: &mut Vec<u8>) -> Result<()> {
    let exec = Execution::default();
    match command {
        Command::Process(a) => {
            let spec = a.spec.spec()?;
            let t = reducing::sample_process(&spec, &a.q, Seed::new(a.seed), a.stop_at)?;
            match format {
                Format::Json => harness::write_json(out, m, &t),
                Format::Csv => {
                    let mut rows = vec![TraceRow {
                        step: 0,
                        face: None,
                        simplex: String::new(),
                        indicator: None,
                        dim: t.dims[0],
                    }];
                    for (i, &f) in t.ordering.iter().enumerate() {
                        let v = spec.unrank(f)?;
                        rows.push(TraceRow {
                            step: i + 1,
                            face: Some(f),
                            simplex: v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                            indicator: Some(t.indicators[i] as u8),
                            dim: t.dims[i + 1],
                        });
                    }
                    harness::write_csv(out, m, &rows)
                }
            }
        }
        Command::Mtilde(a) => {
            let e = reducing::estimate_mtilde_with(&a.spec.spec()?, &a.q, a.trials, Seed::new(a.seed), exec)?;
            match format {
                Format::Json => harness::write_json(out, m, &e),
                Format::Csv => harness::write_csv(out, m, &e.scan),
            }
        }
        Command::CertifyZ(a) => {
            let certs = certify::certify_trials(&a.spec.spec()?, a.p, a.trials, Seed::new(a.seed), exec)?;
            if certs.iter().any(|c| !c.verdict.asserts_zero()) {
                eprintln!("{NOT_CERTIFIED_CAVEAT}");
            }
            match format {
                Format::Json => harness::write_json(out, m, &certs),
                Format::Csv => {
                    let rows: Vec<CertificateRow> = certs.iter().map(CertificateRow::from).collect();
                    harness::write_csv(out, m, &rows)
                }
            }
        }
        Command::Sweep(a) => {
            let grid = harness::c_grid(a.c_min, a.c_max, a.c_step)?;
            let rows =
                harness::threshold_sweep_with(&a.spec.spec()?, &grid, &a.coeff, a.trials, Seed::new(a.seed), exec, timing)?;
            match format {
                Format::Json => harness::write_json(out, m, &rows),
                Format::Csv => harness::write_csv(out, m, &rows),
            }
        }
        Command::Census(a) => {
            let c = harness::torsion_census_with(&a.spec.spec()?, a.density.density(), a.trials, Seed::new(a.seed), exec)?;
            match format {
                Format::Json => harness::write_json(out, m, &c),
                Format::Csv => {
                    eprintln!("{}", serde_json::to_string(&c.summary).expect("summary serializes"));
                    harness::write_csv(out, m, &c.rows)
                }
            }
        }
        Command::FaceCount(a) => {
            let r = harness::face_count_check_with(&a.spec.spec()?, a.p, a.trials, Seed::new(a.seed), exec)?;
            match format {
                Format::Json => harness::write_json(out, m, &r),
                Format::Csv => harness::write_csv(out, m, std::slice::from_ref(&r)),
            }
        }
        Command::Sample(_) | Command::Homology(_) | Command::ReducingSet(_) | Command::Replay(_) => {
            unreachable!("handled by dispatch")
        }
    }
}

fn read_complex(path: &Path) -> Result<DComplex> {
    DComplex::from_text(&fs::read_to_string(path)?)
}

fn print_json<T: Serialize>(out: &mut impl Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v).expect("serializable");
    writeln!(out)?;
    Ok(())
}

/// Creates `<root>/<timestamp>-<tag>[-k]/` holding `manifest.json` and the
/// results file.
fn write_run(root: &Path, tag: &str, manifest: &RunManifest, format: Format, results: &[u8]) -> Result<PathBuf> {
    if tag.is_empty() || tag.contains(['/', '\\']) {
        return Err(Error::Validation(format!("invalid tag {tag:?}")));
    }
    let now = chrono::Utc::now();
    let stamp = now.format("%Y%m%dT%H%M%SZ");
    fs::create_dir_all(root)?;
    let mut dir = root.join(format!("{stamp}-{tag}"));
    let mut k = 2;
    loop {
        match fs::create_dir(&dir) {
            Ok(()) => break,
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                dir = root.join(format!("{stamp}-{tag}-{k}"));
                k += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let full = RunManifest {
        timestamp: Some(now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        ..manifest.clone()
    };
    let mut text = serde_json::to_string_pretty(&full).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    let name = match format {
        Format::Csv => "results.csv",
        Format::Json => "results.json",
    };
    fs::write(dir.join(name), results)?;
    Ok(dir)
}

