//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use commspec::criterion::{commutator_membership, CriterionInput, CriterionOptions, Verdict};
use commspec::cutoffs::{laplacian_grid_check, laplacian_grid_min, CutoffPair};
use commspec::ideals::{EigenLaw, IdealSpec, MembershipStatus, SpectrumSource};
use commspec::verify::{run_suite, SuiteConfig, SuiteReport, QUADRATURE_TOLERANCE};
use commspec::Result;

const SEED: u64 = 7;
const SUITE_TRIALS: usize = 10_000;
const MUTANT_TRIALS: usize = 1_000;
const MAX_DIM: usize = 12;
const WEYL_HORN_BUDGET: Duration = Duration::from_secs(120);
const GRID: usize = 400;
const LAPLACIAN_FLOOR: f64 = -1e-6;
const CONTROL_CEILING: f64 = -1e-3;
const MEAN_TRIALS: usize = 200;
const MEAN_DIM: usize = 6;
const MEAN_NODES: usize = 512;
const DOUBLING_LIMIT: f64 = 1e-7;
const CYCLE_TRIALS: usize = 1_000;
const STABILITY_TRIALS: usize = 100;
const PREFIX: usize = 1_000_000;
const LN2_TOLERANCE: f64 = 1e-5;
const LOG_RATE_TOLERANCE: f64 = 1e-3;

const THRESHOLD_SUITES: [&str; 6] = [
    "log-mass-domination",
    "threshold-count-subadditivity",
    "normal-real-part",
    "dilation",
    "normal-zero-sum",
    "smoothing-defect",
];

type Check = fn() -> Result<Outcome>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn suite(name: &str, trials: usize, max_dim: usize) -> Result<SuiteReport> {
    run_suite(&SuiteConfig::new(name, trials, max_dim, SEED)?)
}

fn constant(report: &SuiteReport, key: &str) -> f64 {
    report
        .empirical_constants
        .get(key)
        .copied()
        .unwrap_or(f64::NAN)
}

fn weyl_horn() -> Result<Outcome> {
    let start = Instant::now();
    let r = suite("weyl-horn", SUITE_TRIALS, MAX_DIM)?;
    let elapsed = start.elapsed();
    Ok(outcome(
        r.passed() && elapsed <= WEYL_HORN_BUDGET,
        format!(
            "{} trials, {} violations, worst slack {:.3e}, {:.1}s",
            r.trials,
            r.violation_count,
            r.worst_slack,
            elapsed.as_secs_f64()
        ),
    ))
}

fn threshold_suites() -> Result<Outcome> {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in THRESHOLD_SUITES {
        let base = suite(name, SUITE_TRIALS, MAX_DIM)?;
        let mutant = suite(&format!("{name}-mutant"), MUTANT_TRIALS, MAX_DIM)?;
        passed &= base.passed() && mutant.violation_count > 0;
        parts.push(format!(
            "{name} {}/{} ({} informative), mutant {}",
            base.violation_count, base.trials, base.informative_trials, mutant.violation_count
        ));
    }
    Ok(outcome(passed, parts.join("; ")))
}

fn subharmonic_cutoff() -> Result<Outcome> {
    let pair = CutoffPair::new()?;
    let min = laplacian_grid_check(&pair, 0.5, 10.0, GRID)?;
    let control = laplacian_grid_min(|z| -pair.h(z), 0.5, 10.0, GRID)?;
    Ok(outcome(
        min >= LAPLACIAN_FLOOR && control <= CONTROL_CEILING,
        format!("min Laplacian of h {min:.3e}, of -h {control:.3e} on a {GRID}^2 grid"),
    ))
}

fn circle_mean() -> Result<Outcome> {
    let mut config = SuiteConfig::new("plurisubharmonic-mean", MEAN_TRIALS, MEAN_DIM, SEED)?;
    config.nodes = MEAN_NODES;
    config.tolerance = Some(QUADRATURE_TOLERANCE);
    let r = run_suite(&config)?;
    let change = constant(&r, "maxDoublingChange");
    let smooth = constant(&r, "smoothTrials");
    Ok(outcome(
        r.passed() && change < DOUBLING_LIMIT && smooth > 0.0,
        format!(
            "{} violations in {} trials; doubling change {change:.3e} over {smooth} smooth trials ({:.3e} over all)",
            r.violation_count,
            r.trials,
            constant(&r, "maxDoublingChangeAll")
        ),
    ))
}

fn hermitian_deviation() -> Result<Outcome> {
    let pair = CutoffPair::new()?;
    let c2 = commspec::criterion::derived_c2(pair.c1);
    let r = suite("hermitian-deviation", SUITE_TRIALS, MAX_DIM)?;
    let ratio = constant(&r, "deviationRatio");
    Ok(outcome(
        r.passed() && ratio < c2,
        format!(
            "C1 {:.6}, C2 {c2:.6}, {} violations, max ratio {ratio:.4}",
            pair.c1, r.violation_count
        ),
    ))
}

fn cesaro_cycle() -> Result<Outcome> {
    let r = suite("cesaro-cycle", CYCLE_TRIALS, MAX_DIM)?;
    Ok(outcome(
        r.passed(),
        format!(
            "{} failures in {} random spectra",
            r.violation_count, r.trials
        ),
    ))
}

fn geometric_stability() -> Result<Outcome> {
    let r = suite("geometric-stability", STABILITY_TRIALS, MAX_DIM)?;
    let c = constant(&r, "maxEmpiricalConstant");
    Ok(outcome(
        r.passed() && c.is_finite(),
        format!(
            "{} violations in {} laws, empirical C {c:.4}, proof constant {:.1}",
            r.violation_count,
            r.trials,
            constant(&r, "maxProofConstant")
        ),
    ))
}

fn cesaro_instances() -> Result<Outcome> {
    let pair = CutoffPair::new()?;
    let options = CriterionOptions {
        prefix_len: PREFIX,
        witness_len: 200,
    };
    let law = |alternating| {
        CriterionInput::Spectrum(SpectrumSource::Law(EigenLaw::Power {
            c: 1.0,
            a: 1.0,
            alternating,
        }))
    };
    let s1 = IdealSpec::schatten(1.0)?;
    let s2 = IdealSpec::schatten(2.0)?;
    let alt1 = commutator_membership(&law(true), &s1, &pair, options)?;
    let alt2 = commutator_membership(&law(true), &s2, &pair, options)?;
    let harm = commutator_membership(&law(false), &s1, &pair, options)?;
    let alt_limit = alt1.cesaro.fitted_limit().map_or(f64::NAN, |f| f.0);
    let alt_last = alt1.cesaro.value(PREFIX).unwrap_or(f64::NAN) * PREFIX as f64;
    let harm_limit = harm.cesaro.fitted_limit().map_or(f64::NAN, |f| f.0);
    let n = PREFIX as f64;
    let harm_last = harm.cesaro.value(PREFIX).unwrap_or(f64::NAN) * n / n.ln();
    let ln2 = std::f64::consts::LN_2;
    let passed = alt1.condition2.status == MembershipStatus::Out
        && alt1.verdict == Verdict::NotInComJ
        && (alt_limit - ln2).abs() <= LN2_TOLERANCE
        && (alt_last - ln2).abs() <= LN2_TOLERANCE
        && alt2.condition2.status == MembershipStatus::In
        && harm.condition2.status == MembershipStatus::Out
        && (harm_limit - 1.0).abs() <= LOG_RATE_TOLERANCE;
    Ok(outcome(
        passed,
        format!(
            "alternating: S1 {:?}, S2 {:?}, n c_n {alt_last:.8} at 1e6, fitted {alt_limit:.10}; \
             1/n: S1 {:?}, n c_n/ln n {harm_last:.5} at 1e6, fitted {harm_limit:.7}",
            alt1.condition2.status, alt2.condition2.status, harm.condition2.status
        ),
    ))
}

fn invoke(bin: &str, args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(bin)
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs");
    let mut bytes = out.stdout;
    bytes.extend_from_slice(format!("exit {:?}", out.status.code()).as_bytes());
    bytes
}

fn determinism() -> Result<Outcome> {
    let bin = env!("CARGO_BIN_EXE_commspec");
    let dir = tempfile::tempdir().expect("temp dir");
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).expect("write input");
        path.to_string_lossy().into_owned()
    };
    let matrix = write(
        "m.json",
        r#"{"n": 3, "entries": [[1,0],[2,1],[0,0],[0,-1],[0.5,0],[1,0],[0.25,0],[0,0],[-2,0.5]]}"#,
    );
    let alt = write(
        "alt.json",
        r#"{"kind": "power", "c": 1, "a": 1, "alternating": true}"#,
    );
    let geo = write("geo.json", r#"{"kind": "geometric", "c": 2, "q": 0.5}"#);
    let runs: Vec<Vec<&str>> = vec![
        vec!["spectrum", "-i", &matrix],
        vec!["functional", "-i", &matrix],
        vec!["cutoff-report"],
        vec!["criterion", "-i", &matrix, "--ideal", "schatten:p=1"],
        vec!["criterion", "-i", &alt, "--ideal", "schatten:p=1"],
        vec!["stability", "-i", &geo, "--ideal", "schatten:p=0.5"],
        vec![
            "verify",
            "--suite",
            "weyl-horn",
            "--trials",
            "1000",
            "--seed",
            "7",
        ],
        vec![
            "verify",
            "--suite",
            "plurisubharmonic-mean",
            "--trials",
            "50",
            "--max-dim",
            "4",
            "--seed",
            "7",
        ],
        vec![
            "verify",
            "--suite",
            "dilation-mutant",
            "--trials",
            "300",
            "--seed",
            "7",
        ],
    ];
    let mut mismatched = Vec::new();
    for args in &runs {
        let first = invoke(bin, args, "1");
        let again = invoke(bin, args, "1");
        let wide = invoke(bin, args, "4");
        let other = invoke(bin, args, "3");
        if first != again || first != wide || first != other {
            mismatched.push(args[0..2].join(" "));
        }
    }
    Ok(outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!(
                "{} invocations byte-identical across reruns and 1, 3, 4 threads",
                runs.len()
            )
        } else {
            format!("differing output: {}", mismatched.join(", "))
        },
    ))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("weyl-horn majorization", weyl_horn),
        ("threshold functional suites and mutants", threshold_suites),
        ("subharmonic cutoff", subharmonic_cutoff),
        ("circle mean domination", circle_mean),
        ("hermitian deviation bound", hermitian_deviation),
        ("constructive witness cycle", cesaro_cycle),
        ("geometric-mean stability", geometric_stability),
        ("cesaro criterion instances", cesaro_instances),
        ("cli determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match check() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!(
            "{} {}. {name}: {detail} [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
