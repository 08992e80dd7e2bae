//! Exit criteria. Run with `cargo test --test acceptance`; pass criterion
//! numbers after `--` to run a subset. Prints one PASS/FAIL line each.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{big, q, small_corpus, MERSENNE_61};
use lmck::certify::{self, Verdict};
use lmck::exec::{self, Execution};
use lmck::harness::{self, Coefficient, Density, RunManifest};
use lmck::{boundary_rank, homology, reducing, sampler, snf, ComplexSpec, DComplex, Seed};
use lmck_oracle as oracle;
use num_bigint::BigUint;
use num_traits::Zero;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.1?}, limit {limit:?}"))?;
    Ok(t)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let corpus = small_corpus();
    let moduli = [q(2), q(3), q(5), q(MERSENNE_61)];
    let mut mismatches = Vec::new();
    for (k, y) in corpus.iter().enumerate() {
        let naive = oracle::naive_snf(&oracle::DenseMatrix::boundary(y));
        let divs = snf::smith_normal_form(y).map_err(|e| e.to_string())?;
        if divs.as_slice() != naive.as_slice() {
            mismatches.push(format!("complex {k}: smith form {:?} vs {:?}", divs.as_slice(), naive));
        }
        for m in &moduli {
            let expect = naive.iter().filter(|d| !(*d % big(m)).is_zero()).count();
            let got = boundary_rank(y, m);
            if got != expect {
                mismatches.push(format!("complex {k}: rank mod {m} {got} vs {expect}"));
            }
        }
        let m = &moduli[k % moduli.len()];
        if reducing::reducing_set(y, m) != oracle::brute_reducing_set(y, &big(m)) {
            mismatches.push(format!("complex {k}: reducing set mod {m}"));
        }
    }
    ensure(mismatches.is_empty(), || format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))?;
    let t = within(Duration::from_secs(120), start)?;
    Ok(format!("{} complexes, 0 mismatches in {t:.1?}", corpus.len()))
}

fn projective_plane_torsion() -> Outcome {
    let y = oracle::projective_plane();
    let s = homology::summary(&y, &[q(2), q(3)]).map_err(|e| e.to_string())?;
    let divs = s.divisors.as_ref().expect("within budget");
    ensure(s.betti_rational == 0, || format!("betti_rational {}", s.betti_rational))?;
    ensure(divs.as_slice().last() == Some(&BigUint::from(2u32)), || format!("divisors {:?}", divs.as_slice()))?;
    ensure(!homology::is_zero_mod_q(&y, &q(2)), || "vanishes mod 2".into())?;
    ensure(homology::is_zero_mod_q(&y, &q(3)), || "does not vanish mod 3".into())?;
    ensure(!homology::is_zero_integer(&y).unwrap(), || "integer homology vanishes".into())?;
    Ok(format!("divisors {:?}", divs.as_slice().iter().map(|d| d.to_string()).collect::<Vec<_>>()))
}

fn torsion_bounds() -> Outcome {
    let corpus = small_corpus();
    let mut nontrivial = 0;
    for (k, y) in corpus.iter().enumerate() {
        let divs = snf::smith_normal_form(y).map_err(|e| e.to_string())?;
        let order = divs.torsion_order();
        let hadamard = snf::hadamard_column_bound(y).map_err(|e| e.to_string())?;
        let global = y.spec().torsion_order_bound();
        ensure(order <= hadamard, || format!("complex {k}: torsion {order} above column bound {hadamard}"))?;
        ensure(hadamard <= global, || format!("complex {k}: column bound {hadamard} above {global}"))?;
        nontrivial += (order > BigUint::from(1u32)) as usize;
    }
    Ok(format!("{} complexes ({nontrivial} with torsion), 0 violations", corpus.len()))
}

fn drop_count() -> Outcome {
    let mut runs = 0;
    for (n, d) in [(5, 2), (6, 2), (7, 2), (6, 3)] {
        let spec = ComplexSpec::new(n, d).unwrap();
        for modulus in [q(2), q(1_000_003)] {
            for i in 0..50 {
                let t = reducing::sample_process(&spec, &modulus, Seed::new(4).trial(i), None)
                    .map_err(|e| e.to_string())?;
                ensure(t.drops() == spec.cycle_dim() && t.final_dim() == 0, || {
                    format!("n={n} d={d} q={modulus} trial {i}: {} drops, final dim {}", t.drops(), t.final_dim())
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} orderings, drops = C(n-1, d) in all"))
}

fn reducing_set_properties() -> Outcome {
    let root = Seed::new(5);
    for i in 0..100 {
        let mut rng = root.trial(i).rng();
        use rand::Rng;
        let n = rng.random_range(4..=8);
        let spec = ComplexSpec::new(n, 2).unwrap();
        let total = spec.face_count();
        let small = rng.random_range(0..=total);
        let large = rng.random_range(small..=total);
        let c = sampler::couple_blocks(&spec, &[small, large - small], root.trial(i).derive(1))
            .map_err(|e| e.to_string())?;
        let (y, y2) = (&c.blocks[0], &c.union);
        ensure(y.is_subcomplex_of(y2), || format!("pair {i} not nested"))?;
        let modulus = if i % 2 == 0 { q(2) } else { q(3) };
        let outer = reducing::reducing_set(y2, &modulus);
        let inner = reducing::reducing_set(y, &modulus);
        ensure(outer.iter().all(|f| inner.binary_search(f).is_ok()), || {
            format!("pair {i}: reducing set grew from {} to {} faces", inner.len(), outer.len())
        })?;
    }
    let mut vanishing = 0;
    for i in 0..200u64 {
        let n = 6 + (i % 5) as u32;
        let spec = ComplexSpec::new(n, 2).unwrap();
        // sizes from half to three times the cycle dimension straddle the threshold
        let cd = spec.cycle_dim();
        let m = (cd / 2 + (i * 7919) % (5 * cd / 2 + 1)).min(spec.face_count());
        let y = sampler::sample_uniform_m(&spec, m, Seed::new(6).trial(i)).map_err(|e| e.to_string())?;
        let modulus = if i % 2 == 0 { q(2) } else { q(3) };
        let empty = reducing::reducing_set(&y, &modulus).is_empty();
        ensure(empty == homology::is_zero_mod_q(&y, &modulus), || format!("complex {i}: emptiness disagrees"))?;
        vanishing += empty as usize;
    }
    ensure((20..=180).contains(&vanishing), || format!("only {vanishing}/200 vanish; sizes do not straddle"))?;
    Ok(format!("100 nested pairs, 200 complexes ({vanishing} vanishing), 0 violations"))
}

fn mtilde_bound() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for n in [20, 30, 40] {
        let spec = ComplexSpec::new(n, 2).unwrap();
        let bound = 4.0 * spec.row_count() as f64;
        for modulus in [q(2), q(MERSENNE_61)] {
            let e = reducing::estimate_mtilde(&spec, &modulus, 200, Seed::new(n as u64)).map_err(|e| e.to_string())?;
            let upper = e.mtilde_hat as f64 + 3.0 * e.mtilde_stderr;
            ensure(upper <= bound, || {
                format!("n={n} q={modulus}: {} + 3·{:.1} > {bound}", e.mtilde_hat, e.mtilde_stderr)
            })?;
            parts.push(format!("n={n} q={modulus}: {}±{:.1} <= {bound}", e.mtilde_hat, e.mtilde_stderr));
        }
    }
    let t = within(Duration::from_secs(600), start)?;
    Ok(format!("{} in {t:.1?}", parts.join("; ")))
}

fn threshold_curve() -> Outcome {
    let start = Instant::now();
    let spec = ComplexSpec::new(50, 2).unwrap();
    let grid = [1.0, 1.5, 2.0, 2.5, 3.0];
    let rows = harness::threshold_sweep(&spec, &grid, &[Coefficient::Prime(q(2))], 100, Seed::new(7))
        .map_err(|e| e.to_string())?;
    let fr: Vec<f64> = rows.iter().map(|r| r.vanish_fraction).collect();
    ensure(fr[0] <= 0.15, || format!("fraction {} at c=1", fr[0]))?;
    ensure(fr[4] >= 0.85, || format!("fraction {} at c=3", fr[4]))?;
    for w in rows.windows(2) {
        ensure(w[1].wilson_hi >= w[0].wilson_lo, || {
            format!("fraction drops from c={} to c={} beyond the Wilson bands", w[0].c, w[1].c)
        })?;
    }
    let t = within(Duration::from_secs(900), start)?;
    Ok(format!("fractions {fr:?} in {t:.1?}"))
}

fn certifier_soundness() -> Outcome {
    let spec = ComplexSpec::new(30, 2).unwrap();
    let p = 3.0 * 30f64.ln() / 30.0;
    let seed = Seed::new(8);
    let certs = certify::certify_trials(&spec, p, 100, seed, Execution::default()).map_err(|e| e.to_string())?;
    let agree = exec::try_map_trials(Execution::default(), 100, |i| {
        let u = certify::samples(&spec, p, seed.trial(i))?.union;
        Ok::<_, lmck::Error>(homology::is_zero_integer(&u)? == certs[i as usize].verdict.asserts_zero())
    })
    .map_err(|e| e.to_string())?;
    let agreeing = agree.iter().filter(|&&a| a).count();
    let certified = certs.iter().filter(|c| c.verdict == Verdict::CertifiedZero).count();
    ensure(agreeing == 100, || format!("verdict agrees with the union's Smith form in {agreeing}/100"))?;
    ensure(certified >= 80, || format!("certified in only {certified}/100"))?;
    Ok(format!("agreement 100/100, certified-zero {certified}/100"))
}

fn face_count_floor() -> Outcome {
    let spec = ComplexSpec::new(100, 2).unwrap();
    let p = 80.0 * 100f64.ln() / 100.0;
    let r = harness::face_count_check(&spec, Some(p), 100, Seed::new(9)).map_err(|e| e.to_string())?;
    ensure(r.fraction == 1.0, || {
        format!(
            "fraction {} (p clamped from {:.3} to {}; {} faces in the full complex vs floor {:.0})",
            r.fraction, r.p_requested, r.p, r.total_faces, r.threshold
        )
    })?;
    Ok(format!("fraction 1 over {} trials", r.trials))
}

/// Serialized results of every experiment at a fixed seed.
fn experiment_bytes(exec: Execution) -> Vec<Vec<u8>> {
    let s12 = ComplexSpec::new(12, 2).unwrap();
    let m = RunManifest::new("determinism", 10, serde_json::Value::Null);
    let mut out = Vec::new();
    let mut push = |f: &dyn Fn(&mut Vec<u8>) -> lmck::Result<()>| {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        out.push(buf);
    };
    let coefs = [Coefficient::Prime(q(2)), Coefficient::Rational, Coefficient::Integer];
    push(&|b| {
        let rows = harness::threshold_sweep_with(&s12, &[1.0, 2.0, 3.0], &coefs, 30, Seed::new(10), exec, false)?;
        harness::write_csv(b, &m, &rows)
    });
    push(&|b| harness::write_csv(b, &m, &harness::torsion_census_with(&s12, Density::C(2.0), 30, Seed::new(10), exec)?.rows));
    push(&|b| harness::write_json(b, &m, &harness::face_count_check_with(&s12, None, 30, Seed::new(10), exec)?));
    push(&|b| harness::write_json(b, &m, &reducing::estimate_mtilde_with(&s12, &q(3), 30, Seed::new(10), exec)?));
    push(&|b| harness::write_json(b, &m, &certify::certify_trials(&s12, 0.3, 10, Seed::new(10), exec)?));
    push(&|b| harness::write_json(b, &m, &reducing::sample_process(&s12, &q(2), Seed::new(10), None)?));
    push(&|b| {
        let e = reducing::mean_reducing_size_with(&s12, 30, &q(2), 30, Seed::new(10), exec)?;
        harness::write_json(b, &m, &e)
    });
    out
}

fn determinism_and_performance() -> Outcome {
    let reference = experiment_bytes(Execution::Sequential);
    for threads in [1, 2, 4, 7] {
        let got = exec::with_threads(Some(threads), || experiment_bytes(Execution::Parallel)).unwrap();
        for (k, (a, b)) in reference.iter().zip(&got).enumerate() {
            ensure(a == b, || format!("experiment {k} differs at {threads} threads"))?;
        }
    }
    let spec = ComplexSpec::new(100, 2).unwrap();
    let y: DComplex = sampler::sample_bernoulli(&spec, 3.0 * 100f64.ln() / 100.0, Seed::new(10)).unwrap();
    let start = Instant::now();
    let rank = exec::with_threads(Some(1), || boundary_rank(&y, &q(2))).unwrap();
    let t = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "{} experiments byte-identical at 1/2/4/7 threads; rank {rank} of {} faces x {} rows in {t:.2?}",
        reference.len(),
        y.face_count(),
        spec.row_count()
    ))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "oracle equivalence", oracle_equivalence),
    (2, "projective plane torsion", projective_plane_torsion),
    (3, "torsion order bounds", torsion_bounds),
    (4, "process drop count", drop_count),
    (5, "reducing-set monotonicity and emptiness", reducing_set_properties),
    (6, "mtilde_hat <= 4 C(n,d)", mtilde_bound),
    (7, "vanishing threshold S-curve", threshold_curve),
    (8, "certifier soundness", certifier_soundness),
    (9, "supercritical face-count floor", face_count_floor),
    (10, "determinism and performance", determinism_and_performance),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in CRITERIA {
            println!("criterion_{id}: test ({name})");
        }
        return;
    }
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {id:>2} {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

