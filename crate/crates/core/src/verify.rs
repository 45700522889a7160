//! Randomized inequality suites with seeded, thread-count independent reports.
//!
//! Every suite draws its inputs for trial `i` from a ChaCha8 stream keyed by
//! `(seed, i)`, evaluates one or more `lhs <= rhs` checks and records a
//! violation when `(lhs - rhs) / (1 + |rhs|)` exceeds the tolerance. Each suite
//! has a `-mutant` variant with a deliberately broken inequality that must fail.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::{cesaro_bound_check, minimal_condition4_witness, witness_cycle};
use crate::cutoffs::{laplacian_at, CutoffPair};
use crate::functionals::{chi, chi_phi, circle_mean, f_hat, mu, nu};
use crate::ideals::{check_geometric_stability, IdealSpec, MembershipStatus};
use crate::numeric::{reaches_unit, Neumaier};
use crate::spectral::{
    eigenvalue_sequence, hermitian_split, singular_sequence, ComplexMatrix, EigenSequence,
    ScalarSequence,
};
use crate::{Error, Result, C64};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Tolerance for the quadrature and finite-difference suites.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_NODES: usize = 512;
/// Violations stored in a report; the total is always counted.
pub const MAX_RECORDED_VIOLATIONS: usize = 1000;
const MAX_SEQUENCE_LEN: usize = 50;
const MAX_MEAN_DIM: usize = 6;
const STABILITY_N_MAX: usize = 100_000;
/// A circle-mean trial counts as smooth when, at every node, eigenvalues are at
/// least this far apart and `log|lambda|` is this far from 0 and 1, where the
/// cutoffs stop being analytic.
const SMOOTH_GAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    WeylHorn,
    LogMassDomination,
    ThresholdCountSubadditivity,
    NormalRealPart,
    Dilation,
    NormalZeroSum,
    SmoothingDefect,
    SubharmonicCutoff,
    PlurisubharmonicMean,
    HermitianDeviation,
    CesaroCycle,
    GeometricStability,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::WeylHorn,
        Suite::LogMassDomination,
        Suite::ThresholdCountSubadditivity,
        Suite::NormalRealPart,
        Suite::Dilation,
        Suite::NormalZeroSum,
        Suite::SmoothingDefect,
        Suite::SubharmonicCutoff,
        Suite::PlurisubharmonicMean,
        Suite::HermitianDeviation,
        Suite::CesaroCycle,
        Suite::GeometricStability,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::WeylHorn => "weyl-horn",
            Self::LogMassDomination => "log-mass-domination",
            Self::ThresholdCountSubadditivity => "threshold-count-subadditivity",
            Self::NormalRealPart => "normal-real-part",
            Self::Dilation => "dilation",
            Self::NormalZeroSum => "normal-zero-sum",
            Self::SmoothingDefect => "smoothing-defect",
            Self::SubharmonicCutoff => "subharmonic-cutoff",
            Self::PlurisubharmonicMean => "plurisubharmonic-mean",
            Self::HermitianDeviation => "hermitian-deviation",
            Self::CesaroCycle => "cesaro-cycle",
            Self::GeometricStability => "geometric-stability",
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            Self::SubharmonicCutoff | Self::PlurisubharmonicMean => QUADRATURE_TOLERANCE,
            _ => DEFAULT_TOLERANCE,
        }
    }

    /// Key of `empirical_constants` returned by [`estimate_constant`].
    pub fn primary_constant(&self) -> &'static str {
        match self {
            Self::HermitianDeviation => "deviationRatio",
            Self::SubharmonicCutoff => "minLaplacian",
            Self::GeometricStability => "maxEmpiricalConstant",
            _ => "maxRatio",
        }
    }
}

/// A suite and whether its mutated control is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteName {
    pub suite: Suite,
    pub mutant: bool,
}

impl SuiteName {
    pub fn all() -> Vec<SuiteName> {
        Suite::ALL
            .iter()
            .flat_map(|&suite| [false, true].map(|mutant| SuiteName { suite, mutant }))
            .collect()
    }
}

impl std::fmt::Display for SuiteName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.mutant {
            write!(f, "{}-mutant", self.suite.name())
        } else {
            f.write_str(self.suite.name())
        }
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, mutant) = match s.strip_suffix("-mutant") {
            Some(base) => (base, true),
            None => (s, false),
        };
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == base)
            .map(|&suite| SuiteName { suite, mutant })
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
    /// `None` selects the suite default.
    pub tolerance: Option<f64>,
    /// Quadrature nodes for circle means.
    pub nodes: usize,
}

impl SuiteConfig {
    pub fn new(suite: &str, trials: usize, max_dim: usize, seed: u64) -> Result<Self> {
        let config = Self {
            suite: suite.parse()?,
            trials,
            max_dim,
            seed,
            tolerance: None,
            nodes: DEFAULT_NODES,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.max_dim < 2 {
            return Err(Error::Domain(format!(
                "maxDim must be at least 2, got {}",
                self.max_dim
            )));
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!(
                    "tolerance must be nonnegative, got {t}"
                )));
            }
        }
        if self.nodes < 8 {
            return Err(Error::Domain(format!(
                "need at least 8 nodes, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    pub fn effective_tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or(self.suite.suite.default_tolerance())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub trial_index: usize,
    pub fingerprint: String,
    #[serde(deserialize_with = "crate::io::nullable_f64")]
    pub lhs: f64,
    #[serde(deserialize_with = "crate::io::nullable_f64")]
    pub rhs: f64,
    #[serde(deserialize_with = "crate::io::nullable_f64")]
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Trials whose right-hand side was nonzero.
    pub informative_trials: usize,
    pub violation_count: usize,
    /// The first [`MAX_RECORDED_VIOLATIONS`] violations, worst check per trial.
    pub violations: Vec<Violation>,
    #[serde(deserialize_with = "crate::io::nullable_f64")]
    pub worst_slack: f64,
    pub empirical_constants: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Random matrix ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    General,
    Hermitian,
    NormalDiagonal,
    Nilpotent,
    Jordan,
    Scaled,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 6] = [
        MatrixKind::General,
        MatrixKind::Hermitian,
        MatrixKind::NormalDiagonal,
        MatrixKind::Nilpotent,
        MatrixKind::Jordan,
        MatrixKind::Scaled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::General => "general",
            Self::Hermitian => "hermitian",
            Self::NormalDiagonal => "normal-diagonal",
            Self::Nilpotent => "nilpotent",
            Self::Jordan => "jordan",
            Self::Scaled => "scaled",
        }
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown matrix kind {s:?}")))
    }
}

/// Deterministic random matrix of the given kind.
///
/// Entries start as complex standard normals (real and imaginary parts with
/// variance 1/2). `general` divides by `sqrt(dim)`, `hermitian` is
/// `(G + G*) / (2 sqrt(dim))`, `normal-diagonal` is `U D U*` with Haar-like `U`
/// and complex normal `D`, `nilpotent` keeps the strict upper triangle of `G`,
/// `jordan` is `U (c I + J) U*` and `scaled` multiplies a general matrix by
/// `e^x` with `x` uniform on `[-3, 3]`.
pub fn gen_matrix(kind: MatrixKind, dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_matrix(kind, dim.max(1), &mut rng)
}

fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian(dim: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    // row-major draw order
    let entries: Vec<C64> = (0..dim * dim).map(|_| complex_normal(rng)).collect();
    DMatrix::from_row_slice(dim, dim, &entries)
}

fn haar_unitary(dim: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let qr = gaussian(dim, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&r.diagonal().map(|d| {
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }));
    q * phases
}

fn sample_matrix(kind: MatrixKind, dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let root = (dim as f64).sqrt();
    let inner = match kind {
        MatrixKind::General => gaussian(dim, rng) / C64::new(root, 0.0),
        MatrixKind::Hermitian => {
            let g = gaussian(dim, rng);
            (&g + g.adjoint()) / C64::new(2.0 * root, 0.0)
        }
        MatrixKind::NormalDiagonal => {
            let u = haar_unitary(dim, rng);
            let d: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
            &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * u.adjoint()
        }
        MatrixKind::Nilpotent => strict_upper(gaussian(dim, rng)),
        MatrixKind::Jordan => {
            let c = complex_normal(rng);
            let mut j = DMatrix::from_diagonal_element(dim, dim, c);
            for i in 0..dim.saturating_sub(1) {
                j[(i, i + 1)] = C64::new(1.0, 0.0);
            }
            let u = haar_unitary(dim, rng);
            &u * j * u.adjoint()
        }
        MatrixKind::Scaled => {
            let factor = rng.random_range(-3.0..=3.0f64).exp();
            gaussian(dim, rng) * C64::new(factor / root, 0.0)
        }
    };
    ComplexMatrix::from_dmatrix(inner).expect("finite gaussian entries")
}

fn strict_upper(mut m: DMatrix<C64>) -> DMatrix<C64> {
    for i in 0..m.nrows() {
        for j in 0..=i {
            m[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    m
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn random_dim(rng: &mut impl Rng, max_dim: usize) -> usize {
    rng.random_range(2..=max_dim)
}

fn random_kind(rng: &mut impl Rng, kinds: &[MatrixKind]) -> MatrixKind {
    kinds[rng.random_range(0..kinds.len())]
}

#[derive(Debug, Clone, Copy)]
enum Agg {
    Max,
    Min,
    Sum,
}

#[derive(Debug, Default)]
struct Trial {
    fingerprint: String,
    checks: Vec<(f64, f64)>,
    informative: bool,
    stats: Vec<(&'static str, f64, Agg)>,
}

impl Trial {
    fn new(fingerprint: String) -> Self {
        Self {
            fingerprint,
            ..Self::default()
        }
    }

    fn check(&mut self, lhs: f64, rhs: f64) {
        self.checks.push((lhs, rhs));
    }

    fn stat(&mut self, key: &'static str, value: f64, agg: Agg) {
        self.stats.push((key, value, agg));
    }
}

fn slack(lhs: f64, rhs: f64) -> f64 {
    let s = (lhs - rhs) / (1.0 + rhs.abs());
    if s.is_nan() {
        f64::INFINITY
    } else {
        s
    }
}

fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(singular_sequence(m)?.prefix(m.dim()))
}

/// `nu(factor |X|)` from the singular values of `X`.
fn nu_abs(s: &[f64], factor: f64) -> f64 {
    s.iter().filter(|&&x| reaches_unit(factor * x)).count() as f64
}

/// `mu(factor |X|)` from the singular values of `X`.
fn mu_abs(s: &[f64], factor: f64) -> f64 {
    let mut acc = Neumaier::default();
    for &x in s {
        if factor * x > 1.0 {
            acc.add((factor * x).ln());
        }
    }
    acc.value()
}

struct Context {
    pair: Option<CutoffPair>,
}

impl Context {
    fn pair(&self) -> &CutoffPair {
        self.pair
            .as_ref()
            .expect("cutoff pair built for this suite")
    }
}

/// Runs the suite across all trials in parallel and assembles the report in trial order.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let name = config.suite;
    let needs_pair = matches!(
        name.suite,
        Suite::SmoothingDefect
            | Suite::SubharmonicCutoff
            | Suite::PlurisubharmonicMean
            | Suite::HermitianDeviation
    );
    let ctx = Context {
        pair: if needs_pair {
            Some(CutoffPair::new()?)
        } else {
            None
        },
    };
    let trials: Vec<Trial> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(config.seed, i);
            run_trial(name, config, &ctx, &mut rng)
        })
        .collect::<Result<_>>()?;
    let tolerance = config.effective_tolerance();
    let mut report = SuiteReport {
        suite: name.to_string(),
        trials: config.trials,
        max_dim: config.max_dim,
        seed: config.seed,
        tolerance,
        informative_trials: 0,
        violation_count: 0,
        violations: Vec::new(),
        worst_slack: f64::NEG_INFINITY,
        empirical_constants: BTreeMap::new(),
    };
    let mut max_ratio: Option<f64> = None;
    for (index, trial) in trials.into_iter().enumerate() {
        report.informative_trials += usize::from(trial.informative);
        let mut worst: Option<(f64, f64, f64)> = None;
        for &(lhs, rhs) in &trial.checks {
            let s = slack(lhs, rhs);
            if worst.is_none_or(|(w, _, _)| s > w) {
                worst = Some((s, lhs, rhs));
            }
            if rhs > 0.0 {
                let r = lhs / rhs;
                max_ratio = Some(max_ratio.map_or(r, |m| m.max(r)));
            }
        }
        if let Some((s, lhs, rhs)) = worst {
            report.worst_slack = report.worst_slack.max(s);
            if s > tolerance {
                report.violation_count += 1;
                if report.violations.len() < MAX_RECORDED_VIOLATIONS {
                    report.violations.push(Violation {
                        trial_index: index,
                        fingerprint: trial.fingerprint.clone(),
                        lhs,
                        rhs,
                        slack: s,
                    });
                }
            }
        }
        for (key, value, agg) in trial.stats {
            let entry = report.empirical_constants.entry(key.to_string());
            match entry {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(value);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let old = *o.get();
                    *o.get_mut() = match agg {
                        Agg::Max => old.max(value),
                        Agg::Min => old.min(value),
                        Agg::Sum => old + value,
                    };
                }
            }
        }
    }
    if let Some(r) = max_ratio {
        report.empirical_constants.insert("maxRatio".into(), r);
    }
    Ok(report)
}

/// Largest observed constant of the suite, e.g. `sup |chi(H) - Re chi(T)| / mu(2|T|)`.
pub fn estimate_constant(config: &SuiteConfig) -> Result<f64> {
    let report = run_suite(config)?;
    let key = config.suite.suite.primary_constant();
    report.empirical_constants.get(key).copied().ok_or_else(|| {
        Error::Unsupported(format!(
            "suite {} observed no value for {key}",
            config.suite
        ))
    })
}

fn run_trial(
    name: SuiteName,
    config: &SuiteConfig,
    ctx: &Context,
    rng: &mut ChaCha8Rng,
) -> Result<Trial> {
    let mutant = name.mutant;
    match name.suite {
        Suite::WeylHorn => weyl_horn(config, rng, mutant),
        Suite::LogMassDomination => log_mass(config, rng, mutant),
        Suite::ThresholdCountSubadditivity => threshold_count(config, rng, mutant),
        Suite::NormalRealPart => normal_real_part(config, rng, mutant),
        Suite::Dilation => dilation(config, rng, mutant),
        Suite::NormalZeroSum => normal_zero_sum(config, rng, mutant),
        Suite::SmoothingDefect => smoothing_defect(config, ctx, rng, mutant),
        Suite::SubharmonicCutoff => subharmonic_cutoff(ctx, rng, mutant),
        Suite::PlurisubharmonicMean => plurisubharmonic_mean(config, ctx, rng, mutant),
        Suite::HermitianDeviation => hermitian_deviation(config, ctx, rng, mutant),
        Suite::CesaroCycle => cesaro_cycle(rng, mutant),
        Suite::GeometricStability => geometric_stability(rng, mutant),
    }
}

fn random_matrix(
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
    kinds: &[MatrixKind],
) -> ComplexMatrix {
    let dim = random_dim(rng, config.max_dim);
    let kind = random_kind(rng, kinds);
    sample_matrix(kind, dim, rng)
}

/// Random matrix times `e^x`, `x` uniform on `[-0.5, 1.5]`, so that some
/// eigenvalues usually sit above the unit threshold.
fn threshold_matrix(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let base = random_matrix(config, rng, &MatrixKind::ALL);
    base.scale_real(rng.random_range(-0.5..=1.5f64).exp())
}

fn random_pair(
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
    max_dim: usize,
) -> (ComplexMatrix, ComplexMatrix) {
    let dim = random_dim(rng, max_dim);
    let (ka, kb) = (
        random_kind(rng, &MatrixKind::ALL),
        random_kind(rng, &MatrixKind::ALL),
    );
    let _ = config;
    (sample_matrix(ka, dim, rng), sample_matrix(kb, dim, rng))
}

fn pair_fingerprint(a: &ComplexMatrix, b: &ComplexMatrix) -> String {
    format!("{}:{}", a.fingerprint(), b.fingerprint())
}

/// `s_{m+n-1}(S+T) <= s_m(S) + s_n(T)` and `prod_{j<=k} |lambda_j| <= prod_{j<=k} s_j`.
fn weyl_horn(config: &SuiteConfig, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let (s, t) = random_pair(config, rng, config.max_dim);
    let mut trial = Trial::new(pair_fingerprint(&s, &t));
    let sum = &s + &t;
    let (ss, st, ssum) = (
        singular_values(&s)?,
        singular_values(&t)?,
        singular_values(&sum)?,
    );
    let d = s.dim();
    for m in 1..=d {
        for n in 1..=(d + 1 - m) {
            let rhs = if mutant {
                ss[m - 1].max(st[n - 1])
            } else {
                ss[m - 1] + st[n - 1]
            };
            trial.check(ssum[m + n - 2], rhs);
        }
    }
    for (x, sv) in [(&s, &ss), (&t, &st), (&sum, &ssum)] {
        let moduli = eigenvalue_sequence(x)?.moduli();
        let (mut lp, mut sp) = (1.0, 1.0);
        for k in 0..d {
            lp *= moduli[k];
            sp *= sv[k];
            trial.check(lp, sp);
        }
    }
    trial.informative = ssum[0] > 0.0;
    Ok(trial)
}

/// `0 <= mu(T) <= mu(|T|)`.
fn log_mass(config: &SuiteConfig, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let t = random_matrix(config, rng, &MatrixKind::ALL);
    let mut trial = Trial::new(t.fingerprint());
    let mu_t = mu(&eigenvalue_sequence(&t)?);
    let mu_abs_t = mu_abs(&singular_values(&t)?, 1.0);
    trial.check(-mu_t, 0.0);
    if mutant {
        trial.check(mu_abs_t, mu_t);
    } else {
        trial.check(mu_t, mu_abs_t);
    }
    trial.informative = mu_abs_t > 0.0;
    Ok(trial)
}

/// `nu(|S+T|) <= nu(2|S|) + nu(2|T|)` and `nu(H) <= 2 nu(|T|)`.
fn threshold_count(config: &SuiteConfig, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let (s, t) = random_pair(config, rng, config.max_dim);
    let mut trial = Trial::new(pair_fingerprint(&s, &t));
    let factor = if mutant { 1.0 } else { 2.0 };
    let (ss, st) = (singular_values(&s)?, singular_values(&t)?);
    let ssum = singular_values(&(&s + &t))?;
    let rhs = nu_abs(&ss, factor) + nu_abs(&st, factor);
    trial.check(nu_abs(&ssum, 1.0), rhs);
    let (h, _) = hermitian_split(&t);
    let nu_h = nu(&eigenvalue_sequence(&h)?) as f64;
    trial.check(nu_h, factor * nu_abs(&st, 1.0));
    trial.informative = rhs > 0.0;
    Ok(trial)
}

const NORMAL_KINDS: [MatrixKind; 2] = [MatrixKind::NormalDiagonal, MatrixKind::Hermitian];
const NON_NORMAL_KINDS: [MatrixKind; 4] = [
    MatrixKind::General,
    MatrixKind::Nilpotent,
    MatrixKind::Jordan,
    MatrixKind::Scaled,
];

/// `|chi(H) - Re chi(T)| <= nu(T)` for normal `T`; the mutant feeds non-normal `T`.
fn normal_real_part(config: &SuiteConfig, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let kinds: &[MatrixKind] = if mutant {
        &NON_NORMAL_KINDS
    } else {
        &NORMAL_KINDS
    };
    let base = random_matrix(config, rng, kinds);
    // log-uniform scale around the unit threshold
    let t = base.scale_real(rng.random_range(-1.0..=1.0f64).exp());
    let mut trial = Trial::new(t.fingerprint());
    let lambda = eigenvalue_sequence(&t)?;
    let (h, _) = hermitian_split(&t);
    let lhs = (chi(&eigenvalue_sequence(&h)?).re - chi(&lambda).re).abs();
    let rhs = nu(&lambda) as f64;
    trial.check(lhs, rhs);
    trial.informative = rhs > 0.0;
    Ok(trial)
}

/// `|alpha chi(T) - chi(alpha T)| <= nu(T)` for `|alpha| <= 1`; the mutant takes `|alpha|` in `(1, 3]`.
fn dilation(config: &SuiteConfig, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let t = threshold_matrix(config, rng);
    let lambda = eigenvalue_sequence(&t)?;
    let moduli = lambda.moduli();
    let big: Vec<f64> = moduli
        .iter()
        .copied()
        .filter(|&r| reaches_unit(r))
        .collect();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = if mutant {
        rng.random_range(1.0..=3.0f64).max(1.0 + 1e-9)
    } else if !big.is_empty() && rng.random_bool(0.5) {
        // just above a breakpoint 1/|lambda_k|, where the bound is nearly tight
        let k = rng.random_range(0..big.len());
        (1.0 / big[k] * (1.0 + 1e-6 * rng.random::<f64>())).min(1.0)
    } else {
        1.0 - rng.random::<f64>()
    };
    let alpha = C64::from_polar(radius, theta);
    let mut trial = Trial::new(format!("{}@{radius:.6}", t.fingerprint()));
    let lhs = (alpha * chi(&lambda) - chi(&lambda.scaled(alpha))).norm();
    let rhs = nu(&lambda) as f64;
    trial.check(lhs, rhs);
    trial.informative = rhs > 0.0;
    Ok(trial)
}

/// Commuting diagonal `T_1 + ... + T_n = 0`:
/// `|chi(T_1) + ... + chi(T_n)| <= (n - 1)(nu(T_1) + ... + nu(T_n))`.
fn normal_zero_sum(config: &SuiteConfig, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let dim = random_dim(rng, config.max_dim);
    let count = rng.random_range(2..=4usize);
    let mut diagonals: Vec<Vec<C64>> = (0..count - 1)
        .map(|_| {
            let scale = rng.random_range(-1.0..=1.0f64).exp();
            (0..dim).map(|_| complex_normal(rng) * scale).collect()
        })
        .collect();
    let closing: Vec<C64> = (0..dim)
        .map(|k| -diagonals.iter().map(|d| d[k]).sum::<C64>())
        .collect();
    diagonals.push(closing);
    let all: Vec<C64> = diagonals.iter().flatten().copied().collect();
    let mut trial = Trial::new(ComplexMatrix::diagonal(&all)?.fingerprint());
    let mut chi_sum = C64::new(0.0, 0.0);
    let mut nu_sum = 0.0;
    for d in &diagonals {
        let lambda = EigenSequence::from_values(d.clone())?;
        chi_sum += chi(&lambda);
        nu_sum += nu(&lambda) as f64;
    }
    let factor = if mutant { 0.25 } else { (count - 1) as f64 };
    trial.check(chi_sum.norm(), factor * nu_sum);
    trial.informative = nu_sum > 0.0;
    Ok(trial)
}

/// `|chi(T) - chi_phi(T)| <= e nu(T)`; the mutant drops the factor `e`.
fn smoothing_defect(
    config: &SuiteConfig,
    ctx: &Context,
    rng: &mut ChaCha8Rng,
    mutant: bool,
) -> Result<Trial> {
    let t = threshold_matrix(config, rng);
    let mut trial = Trial::new(t.fingerprint());
    let lambda = eigenvalue_sequence(&t)?;
    let lhs = (chi(&lambda) - chi_phi(&lambda, ctx.pair())).norm();
    let factor = if mutant { 1.0 } else { std::f64::consts::E };
    let rhs = factor * nu(&lambda) as f64;
    trial.check(lhs, rhs);
    trial.informative = rhs > 0.0;
    Ok(trial)
}

/// `Delta h(z) >= 0` at a random point of the annulus `0.5 <= |z| <= 10`; the mutant uses `-h`.
fn subharmonic_cutoff(ctx: &Context, rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let r = 0.5 * 20f64.powf(rng.random::<f64>());
    let z = C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU));
    let pair = ctx.pair();
    let sign = if mutant { -1.0 } else { 1.0 };
    let lap = laplacian_at(|w| sign * pair.h(w), z);
    let mut trial = Trial::new(format!("z=({:.17e},{:.17e})", z.re, z.im));
    trial.check(-lap, 0.0);
    trial.stat("minLaplacian", lap, Agg::Min);
    trial.informative = r > 1.0;
    Ok(trial)
}

/// `f_hat(S) <= mean over theta of f_hat(S + e^{i theta} T)` for `f` among `h`, `g`
/// and the smoothed `log_+`; the mutant uses `-f`.
fn plurisubharmonic_mean(
    config: &SuiteConfig,
    ctx: &Context,
    rng: &mut ChaCha8Rng,
    mutant: bool,
) -> Result<Trial> {
    let (s, t) = random_pair(config, rng, config.max_dim.min(MAX_MEAN_DIM));
    let pair = ctx.pair();
    let which = rng.random_range(0..3);
    let sign = if mutant { -1.0 } else { 1.0 };
    let f = |z: C64| {
        sign * match which {
            0 => pair.h(z),
            1 => pair.g(z),
            _ => pair.soft_log_plus(z),
        }
    };
    let mut trial = Trial::new(pair_fingerprint(&s, &t));
    let lhs = f_hat(&eigenvalue_sequence(&s)?, &f, 1.0)?;
    let rhs = circle_mean(&s, &t, &f, 1.0, config.nodes)?;
    trial.check(lhs, rhs);
    trial.informative = lhs != 0.0 || rhs != 0.0;
    // node doubling on trials whose eigenvalues stay separated along the circle
    let doubled = 2 * config.nodes;
    let mut gap = f64::INFINITY;
    let mut acc = Neumaier::default();
    for k in 0..doubled {
        let theta = std::f64::consts::TAU * k as f64 / doubled as f64;
        let lambda = eigenvalue_sequence(&(&s + &t.scale(C64::from_polar(1.0, theta))))?;
        let values = lambda.values();
        for i in 0..values.len() {
            let log_r = values[i].norm().ln();
            gap = gap.min(log_r.abs()).min((log_r - 1.0).abs());
            for j in (i + 1)..values.len() {
                gap = gap.min((values[i] - values[j]).norm());
            }
        }
        acc.add(f_hat(&lambda, &f, 1.0)?);
    }
    let change = (acc.value() / doubled as f64 - rhs).abs();
    trial.stat("maxDoublingChangeAll", change, Agg::Max);
    if gap >= SMOOTH_GAP {
        trial.stat("smoothTrials", 1.0, Agg::Sum);
        trial.stat("maxDoublingChange", change, Agg::Max);
    } else {
        trial.stat("smoothTrials", 0.0, Agg::Sum);
    }
    Ok(trial)
}

/// `|chi(H) - Re chi(T)| <= C2 mu(2|T|)` and `|chi(K) - Im chi(T)| <= C2 mu(2|T|)`
/// with `C2 = 4 C1 + 52 / ln 2`; the mutant shrinks `C2` to `1e-3`.
fn hermitian_deviation(
    config: &SuiteConfig,
    ctx: &Context,
    rng: &mut ChaCha8Rng,
    mutant: bool,
) -> Result<Trial> {
    let t = random_matrix(config, rng, &MatrixKind::ALL);
    let mut trial = Trial::new(t.fingerprint());
    let c2 = if mutant {
        1e-3
    } else {
        crate::criterion::derived_c2(ctx.pair().c1)
    };
    let (h, k) = hermitian_split(&t);
    let chi_t = chi(&eigenvalue_sequence(&t)?);
    let dev_h = (chi(&eigenvalue_sequence(&h)?).re - chi_t.re).abs();
    let dev_k = (chi(&eigenvalue_sequence(&k)?).re - chi_t.im).abs();
    let mu2 = mu_abs(&singular_values(&t)?, 2.0);
    trial.check(dev_h, c2 * mu2);
    trial.check(dev_k, c2 * mu2);
    if mu2 > 0.0 {
        trial.stat("deviationRatio", dev_h.max(dev_k) / mu2, Agg::Max);
    }
    trial.stat("c2", c2, Agg::Max);
    trial.informative = mu2 > 0.0;
    Ok(trial)
}

fn random_spectrum(rng: &mut ChaCha8Rng) -> Result<EigenSequence> {
    let len = rng.random_range(1..=MAX_SEQUENCE_LEN);
    let scale = rng.random_range(-2.0..=2.0f64).exp();
    let mut values: Vec<C64> = (0..len).map(|_| complex_normal(rng) * scale).collect();
    if len > 1 && rng.random_bool(0.5) {
        let rest: C64 = values[..len - 1].iter().sum();
        values[len - 1] = -rest;
    }
    EigenSequence::from_values(values)
}

/// Witness chain for a random finite spectrum; the mutant checks the minimal
/// condition-(4) witness against `c_n <= s_n(T)` without the factor 2.
fn cesaro_cycle(rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let lambda = random_spectrum(rng)?;
    let fingerprint = ComplexMatrix::diagonal(lambda.values())?.fingerprint();
    let mut trial = Trial::new(fingerprint);
    if mutant {
        let t = minimal_condition4_witness(&lambda);
        let check = cesaro_bound_check(&lambda, &t, 1.0)?;
        trial.check(check.worst_ratio, 1.0);
        trial.informative = check.worst_ratio > 0.0;
        return Ok(trial);
    }
    let w = witness_cycle(&lambda, "random finite spectrum".into())?;
    let flag = |holds: bool| if holds { 0.0 } else { 1.0 };
    trial.check(w.condition3.worst_ratio, 1.0);
    trial.check(flag(w.condition3.holds), 0.0);
    trial.check(w.condition4.worst_ratio, 1.0);
    trial.check(flag(w.condition4.holds), 0.0);
    trial.check(w.condition5.worst_ratio, 1.0);
    trial.check(flag(w.condition5.holds), 0.0);
    trial.check(w.condition3_from_4.worst_ratio, 1.0);
    trial.check(flag(w.condition3_from_4.holds), 0.0);
    trial.stat(
        "condition4Points",
        w.condition4.checked_points as f64,
        Agg::Max,
    );
    trial.informative = w.condition4.checked_points > 0;
    Ok(trial)
}

/// Geometric means `t_n = (s_1 ... s_n)^(1/n)` of random power and geometric laws
/// in Schatten classes: `t_n <= C u_n` with the dyadic envelope `u` and `t` in the
/// same ideal. The mutant asserts `t_n <= s_n`.
fn geometric_stability(rng: &mut ChaCha8Rng, mutant: bool) -> Result<Trial> {
    let p = [0.5, 1.0, 2.0][rng.random_range(0..3)];
    let c = rng.random_range(-1.0..=1.0f64).exp();
    let s = if rng.random_bool(0.5) {
        let a = 1.0 / p + rng.random_range(0.05..=2.0);
        ScalarSequence::power(c, a)?
    } else {
        ScalarSequence::geometric(c, rng.random_range(0.05..=0.95))?
    };
    let ideal = IdealSpec::schatten(p)?;
    let mut trial = Trial::new(format!("{s:?} in {ideal}"));
    let report = check_geometric_stability(&s, &ideal, STABILITY_N_MAX)?;
    if mutant {
        let worst = report
            .table
            .iter()
            .filter(|row| row.1 > 0.0)
            .map(|row| row.2 / row.1)
            .fold(0.0, f64::max);
        trial.check(worst, 1.0);
    } else {
        trial.check(report.empirical_constant, report.proof_constant);
        trial.check(report.violations.len() as f64, 0.0);
        let matches = report.means.status == MembershipStatus::In;
        trial.check(if matches { 0.0 } else { 1.0 }, 0.0);
        trial.check(
            if report.empirical_constant.is_finite() {
                0.0
            } else {
                1.0
            },
            0.0,
        );
    }
    trial.stat("maxEmpiricalConstant", report.empirical_constant, Agg::Max);
    trial.stat("maxProofConstant", report.proof_constant, Agg::Max);
    trial.informative = report.empirical_constant > 0.0;
    Ok(trial)
}
