//! Ideal families, membership, Cesaro means and the sequence transforms used
//! for geometric stability.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numeric::{eta, linear_fit, ln_factorial, log_spaced, zeta, ComplexNeumaier, Neumaier};
use crate::spectral::{DecayProfile, EigenSequence, ScalarSequence};
use crate::{Error, Result, C64};

/// Relative tolerance used when comparing decay exponents with a threshold.
const EXPONENT_TOL: f64 = 1e-12;

pub type ProfilePredicate = fn(&DecayProfile) -> Option<bool>;

#[derive(Debug, Clone)]
pub enum IdealSpec {
    Schatten {
        p: f64,
    },
    WeakLp {
        p: f64,
    },
    /// Named predicate on decay profiles; `None` means undecidable.
    Custom {
        name: String,
        predicate: ProfilePredicate,
        geometrically_stable: bool,
    },
}

impl IdealSpec {
    pub fn schatten(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self::Schatten { p })
    }

    pub fn weak_lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self::WeakLp { p })
    }

    pub fn is_quasi_banach(&self) -> bool {
        matches!(self, Self::Schatten { .. } | Self::WeakLp { .. })
    }

    pub fn is_geometrically_stable(&self) -> bool {
        match self {
            Self::Custom {
                geometrically_stable,
                ..
            } => *geometrically_stable,
            _ => true,
        }
    }

    /// Exponent `r` with `||S + T||^r <= ||S||^r + ||T||^r` for the usual quasi-norm.
    pub fn quasi_norm_exponent(&self) -> Option<f64> {
        match self {
            Self::Schatten { p } => Some(p.min(1.0)),
            Self::WeakLp { p } => Some(if *p > 1.0 { 1.0 } else { p / 2.0 }),
            Self::Custom { .. } => None,
        }
    }

    /// Dyadic envelope exponent `2 / r`.
    pub fn default_theta(&self) -> Option<f64> {
        self.quasi_norm_exponent().map(|r| 2.0 / r)
    }

    pub fn contains_profile(&self, profile: &DecayProfile) -> Option<bool> {
        let poly = |e: f64, l: f64, threshold: f64, log_ok: &dyn Fn(f64) -> bool| {
            if e > threshold * (1.0 + EXPONENT_TOL) {
                true
            } else if e < threshold * (1.0 - EXPONENT_TOL) {
                false
            } else {
                log_ok(l)
            }
        };
        match (self, profile) {
            (Self::Custom { predicate, .. }, _) => predicate(profile),
            (_, DecayProfile::FiniteSupport | DecayProfile::Exponential) => Some(true),
            (
                Self::Schatten { p },
                DecayProfile::Polynomial {
                    exponent,
                    log_power,
                },
            ) => Some(poly(*exponent, *log_power, 1.0 / p, &|l| l * p < -1.0)),
            (
                Self::WeakLp { p },
                DecayProfile::Polynomial {
                    exponent,
                    log_power,
                },
            ) => Some(poly(*exponent, *log_power, 1.0 / p, &|l| l <= 0.0)),
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidIdeal(format!(
            "exponent p must be finite and positive, got {p}"
        )))
    }
}

impl fmt::Display for IdealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Schatten { p } => write!(f, "schatten:p={p}"),
            Self::WeakLp { p } => write!(f, "weaklp:p={p}"),
            Self::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for IdealSpec {
    type Err = Error;

    /// Parses `schatten:p=<v>` or `weaklp:p=<v>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidIdeal(s.to_string());
        let (family, params) = s.trim().split_once(':').ok_or_else(bad)?;
        let value = params
            .trim()
            .strip_prefix("p=")
            .ok_or_else(bad)?
            .trim()
            .parse::<f64>()
            .map_err(|_| bad())?;
        match family.trim().to_ascii_lowercase().as_str() {
            "schatten" => Self::schatten(value),
            "weaklp" => Self::weak_lp(value),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipStatus {
    In,
    Out,
    UndecidedAtScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    /// Number of stored terms examined; 0 for purely symbolic decisions.
    pub scale: usize,
    pub evidence: BTreeMap<String, f64>,
}

fn profile_evidence(profile: &DecayProfile, evidence: &mut BTreeMap<String, f64>) {
    if let DecayProfile::Polynomial {
        exponent,
        log_power,
    } = profile
    {
        evidence.insert("decayExponent".into(), *exponent);
        evidence.insert("logPower".into(), *log_power);
    }
}

fn finite_evidence(values: &[f64], ideal: &IdealSpec, evidence: &mut BTreeMap<String, f64>) {
    match ideal {
        IdealSpec::Schatten { p } => {
            let mut acc = Neumaier::default();
            values.iter().for_each(|x| acc.add(x.powf(*p)));
            evidence.insert("partialPSum".into(), acc.value());
            evidence.insert("partialQuasiNorm".into(), acc.value().powf(1.0 / p));
        }
        IdealSpec::WeakLp { p } => {
            let sup = values
                .iter()
                .enumerate()
                .map(|(k, x)| ((k + 1) as f64).powf(1.0 / p) * x)
                .fold(0.0, f64::max);
            evidence.insert("partialWeakNorm".into(), sup);
        }
        IdealSpec::Custom { .. } => {}
    }
}

/// Membership of `diag(s)` in `ideal`, decided from the decay profile.
pub fn membership(s: &ScalarSequence, ideal: &IdealSpec) -> MembershipVerdict {
    let profile = s.decay_profile();
    let mut evidence = BTreeMap::new();
    profile_evidence(&profile, &mut evidence);
    let scale = match s {
        ScalarSequence::Finite { values } => {
            finite_evidence(values, ideal, &mut evidence);
            values.len()
        }
        ScalarSequence::Harmonic { head, .. } => head.len(),
        _ => 0,
    };
    let status = match ideal.contains_profile(&profile) {
        Some(true) => MembershipStatus::In,
        Some(false) => MembershipStatus::Out,
        None => MembershipStatus::UndecidedAtScale,
    };
    MembershipVerdict {
        status,
        scale,
        evidence,
    }
}

/// Symbolic real eigenvalue laws with known partial-sum asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EigenLaw {
    /// `lambda_n = (+-1) c n^(-a)`, sign `(-1)^(n+1)` when alternating.
    Power {
        c: f64,
        a: f64,
        #[serde(default)]
        alternating: bool,
    },
    /// `lambda_n = (+-1) c q^n`.
    Geometric {
        c: f64,
        q: f64,
        #[serde(default)]
        alternating: bool,
    },
}

/// Correction term used when extrapolating a prefix to its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correction {
    InverseLog,
    Power(f64),
}

impl Correction {
    fn at(&self, n: f64) -> f64 {
        match self {
            Self::InverseLog => 1.0 / n.ln(),
            Self::Power(e) => n.powf(*e),
        }
    }
}

/// `c_n ~ coeff n^(-exponent) (ln n)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLaw {
    pub coeff: f64,
    pub exponent: f64,
    pub log_power: f64,
    pub correction: Correction,
}

impl TailLaw {
    pub fn profile(&self) -> DecayProfile {
        if self.coeff == 0.0 {
            DecayProfile::FiniteSupport
        } else {
            DecayProfile::Polynomial {
                exponent: self.exponent,
                log_power: self.log_power,
            }
        }
    }

    /// `c_n n^exponent / (ln n)^log_power`, which tends to `coeff`.
    pub fn normalize(&self, n: f64, c_n: f64) -> f64 {
        c_n * n.powf(self.exponent) / n.ln().powf(self.log_power)
    }
}

impl EigenLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Power { c, a, .. } => c.is_finite() && c > 0.0 && a.is_finite() && a > 0.0,
            Self::Geometric { c, q, .. } => c.is_finite() && c > 0.0 && q > 0.0 && q < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSequence(format!(
                "invalid eigenvalue law {self:?}"
            )))
        }
    }

    pub fn term(&self, n: u64) -> f64 {
        let (alternating, magnitude) = match *self {
            Self::Power { c, a, alternating } => (alternating, c * (n as f64).powf(-a)),
            Self::Geometric { c, q, alternating } => (alternating, c * q.powf(n as f64)),
        };
        if alternating && n.is_multiple_of(2) {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Asymptotics of `|lambda_1 + ... + lambda_n| / n`.
    pub fn cesaro_tail(&self) -> TailLaw {
        let harmonic = |coeff: f64, correction| TailLaw {
            coeff,
            exponent: 1.0,
            log_power: 0.0,
            correction,
        };
        match *self {
            Self::Power {
                c,
                a,
                alternating: true,
            } => harmonic(c * eta(a), Correction::Power(-1.0)),
            Self::Power { c, a, .. } if (a - 1.0).abs() <= EXPONENT_TOL => TailLaw {
                coeff: c,
                exponent: 1.0,
                log_power: 1.0,
                correction: Correction::InverseLog,
            },
            Self::Power { c, a, .. } if a < 1.0 => TailLaw {
                coeff: c / (1.0 - a),
                exponent: a,
                log_power: 0.0,
                correction: Correction::Power(a - 1.0),
            },
            Self::Power { c, a, .. } => harmonic(c * zeta(a), Correction::Power(1.0 - a)),
            Self::Geometric {
                c,
                q,
                alternating: true,
            } => harmonic(c * q / (1.0 + q), Correction::Power(-1.0)),
            Self::Geometric { c, q, .. } => harmonic(c * q / (1.0 - q), Correction::Power(-1.0)),
        }
    }

    /// Singular values of `diag(lambda)`.
    pub fn moduli(&self) -> ScalarSequence {
        match *self {
            Self::Power { c, a, .. } => ScalarSequence::PowerLaw { c, a },
            Self::Geometric { c, q, .. } => ScalarSequence::GeometricLaw { c, q },
        }
    }
}

/// Eigenvalue data fed to the Cesaro criterion.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    /// Finite spectrum followed by zeros.
    Finite(EigenSequence),
    /// Leading eigenvalues of an operator whose tail is unknown, in the given order.
    Prefix(Vec<C64>),
    Law(EigenLaw),
}

impl SpectrumSource {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Finite(_) => Ok(()),
            Self::Prefix(values) => {
                if let Some(k) = values
                    .iter()
                    .position(|z| !z.re.is_finite() || !z.im.is_finite())
                {
                    return Err(Error::InvalidSequence(format!(
                        "non-finite value at index {k}"
                    )));
                }
                let moduli: Vec<f64> = values
                    .iter()
                    .map(|z| crate::numeric::round_sig(z.norm()))
                    .collect();
                if let Some(k) = moduli.windows(2).position(|w| w[1] > w[0]) {
                    return Err(Error::InvalidSequence(format!(
                        "moduli increase at index {}",
                        k + 1
                    )));
                }
                Ok(())
            }
            Self::Law(law) => law.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CesaroTail {
    /// `c_n = coeff / n` past the prefix (finite spectrum, `coeff = |trace|`).
    Harmonic {
        coeff: f64,
    },
    Asymptotic(TailLaw),
    Unknown,
}

/// `c_n = |lambda_1 + ... + lambda_n| / n` for a stored prefix plus a tail model.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroSequence {
    /// `c_1, ..., c_N` in index order (not necessarily monotone).
    pub prefix: Vec<f64>,
    pub tail: CesaroTail,
    /// `lambda_1 + ... + lambda_N`.
    pub partial_sum: C64,
}

/// Fraction of `sum |lambda_n|` below which a finite trace counts as zero.
pub const ZERO_TRACE_TOL: f64 = 1e-10;
pub const DEFAULT_PREFIX: usize = 1_000_000;

pub fn cesaro_sequence(source: &SpectrumSource, prefix_len: usize) -> Result<CesaroSequence> {
    cesaro_sequence_with_scale(source, prefix_len, None)
}

/// As [`cesaro_sequence`]; a finite trace is zeroed when it is below
/// [`ZERO_TRACE_TOL`] times `scale` (default `sum |lambda_n|`).
pub fn cesaro_sequence_with_scale(
    source: &SpectrumSource,
    prefix_len: usize,
    scale: Option<f64>,
) -> Result<CesaroSequence> {
    source.validate()?;
    let (prefix, partial_sum, abs_sum) = match source {
        SpectrumSource::Finite(seq) => running_means(seq.values().iter().copied()),
        SpectrumSource::Prefix(values) => running_means(values.iter().copied()),
        SpectrumSource::Law(law) => {
            if prefix_len < 2 {
                return Err(Error::Domain(format!(
                    "prefix length must be at least 2, got {prefix_len}"
                )));
            }
            running_means((1..=prefix_len as u64).map(|n| C64::new(law.term(n), 0.0)))
        }
    };
    let tail = match source {
        SpectrumSource::Finite(_) => {
            let threshold = ZERO_TRACE_TOL * scale.unwrap_or(abs_sum);
            let coeff = partial_sum.norm();
            CesaroTail::Harmonic {
                coeff: if coeff <= threshold { 0.0 } else { coeff },
            }
        }
        SpectrumSource::Prefix(_) => CesaroTail::Unknown,
        SpectrumSource::Law(law) => CesaroTail::Asymptotic(law.cesaro_tail()),
    };
    Ok(CesaroSequence {
        prefix,
        tail,
        partial_sum,
    })
}

fn running_means(values: impl Iterator<Item = C64>) -> (Vec<f64>, C64, f64) {
    let mut sum = ComplexNeumaier::default();
    let mut abs = Neumaier::default();
    let mut out = Vec::new();
    for (k, z) in values.enumerate() {
        sum.add(z);
        abs.add(z.norm());
        out.push(sum.value().norm() / (k + 1) as f64);
    }
    (out, sum.value(), abs.value())
}

impl CesaroSequence {
    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    /// `c_n` for 1-based `n`, using the tail model past the prefix when it is exact.
    pub fn value(&self, n: usize) -> Option<f64> {
        if n >= 1 && n <= self.prefix.len() {
            return Some(self.prefix[n - 1]);
        }
        match self.tail {
            CesaroTail::Harmonic { coeff } if n > 0 => Some(coeff / n as f64),
            _ => None,
        }
    }

    /// Nonincreasing rearrangement, available when the tail is exact.
    pub fn sorted(&self) -> Option<ScalarSequence> {
        let CesaroTail::Harmonic { coeff } = self.tail else {
            return None;
        };
        let mut head = self.prefix.clone();
        head.sort_by(|a, b| b.total_cmp(a));
        let head = ScalarSequence::Finite { values: head };
        if coeff == 0.0 {
            return Some(head);
        }
        Some(ScalarSequence::DirectSum {
            parts: vec![
                head,
                ScalarSequence::Harmonic {
                    head: Vec::new(),
                    coeff,
                    offset: -(self.prefix.len() as i64),
                },
            ],
        })
    }

    /// Least-squares extrapolation of `c_n n^e / (ln n)^L` to its limit, using
    /// consecutive-pair averages over the last two decades of the prefix.
    /// Returns `(limit, stderr)`.
    pub fn fitted_limit(&self) -> Option<(f64, f64)> {
        let CesaroTail::Asymptotic(law) = &self.tail else {
            return None;
        };
        let n_max = self.prefix.len();
        if n_max < 64 {
            return None;
        }
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for n in log_spaced((n_max / 100).max(8), n_max - 1, 200) {
            let y0 = law.normalize(n as f64, self.prefix[n - 1]);
            let y1 = law.normalize((n + 1) as f64, self.prefix[n]);
            xs.push(law.correction.at(n as f64 + 0.5));
            ys.push(0.5 * (y0 + y1));
        }
        let fit = linear_fit(&xs, &ys);
        Some((fit.intercept, fit.intercept_stderr))
    }

    /// Log-log slope of the prefix over its last two decades: `(exponent, stderr)`.
    pub fn fitted_decay_exponent(&self) -> Option<(f64, f64)> {
        let n_max = self.prefix.len();
        if n_max < 16 {
            return None;
        }
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for n in log_spaced((n_max / 100).max(2), n_max, 200) {
            let c = self.prefix[n - 1];
            if c > 0.0 {
                xs.push((n as f64).ln());
                ys.push(c.ln());
            }
        }
        if xs.len() < 3 {
            return None;
        }
        let fit = linear_fit(&xs, &ys);
        Some((-fit.slope, fit.slope_stderr))
    }

    /// Membership of `diag(c)` in `ideal`; ideals here are rearrangement invariant.
    pub fn membership(&self, ideal: &IdealSpec) -> MembershipVerdict {
        let n = self.prefix.len();
        let mut sorted_prefix = self.prefix.clone();
        sorted_prefix.sort_by(|a, b| b.total_cmp(a));
        let mut evidence = BTreeMap::new();
        finite_evidence(&sorted_prefix, ideal, &mut evidence);
        if n > 0 {
            evidence.insert("lastTimesN".into(), self.prefix[n - 1] * n as f64);
        }
        let decision = match &self.tail {
            CesaroTail::Harmonic { coeff } => {
                evidence.insert("tailCoefficient".into(), *coeff);
                let sorted = self.sorted().expect("harmonic tail is exact");
                let profile = sorted.decay_profile();
                profile_evidence(&profile, &mut evidence);
                ideal.contains_profile(&profile)
            }
            CesaroTail::Asymptotic(law) => {
                evidence.insert("tailCoefficient".into(), law.coeff);
                if let Some((limit, stderr)) = self.fitted_limit() {
                    evidence.insert("fittedCoefficient".into(), limit);
                    evidence.insert("fittedCoefficientStderr".into(), stderr);
                }
                let profile = law.profile();
                profile_evidence(&profile, &mut evidence);
                ideal.contains_profile(&profile)
            }
            CesaroTail::Unknown => {
                if let Some((e, stderr)) = self.fitted_decay_exponent() {
                    evidence.insert("fittedExponent".into(), e);
                    evidence.insert("fittedExponentStderr".into(), stderr);
                }
                None
            }
        };
        let status = match decision {
            Some(true) => MembershipStatus::In,
            Some(false) => MembershipStatus::Out,
            None => MembershipStatus::UndecidedAtScale,
        };
        MembershipVerdict {
            status,
            scale: n,
            evidence,
        }
    }
}

/// `u_n = max_{m >= n} |lambda_1 + ... + lambda_m| / m` for a finite spectrum,
/// as a harmonic sequence with tail `|S_N| / n`.
pub fn max_envelope(lambda: &EigenSequence) -> ScalarSequence {
    let (c, total, _) = running_means(lambda.values().iter().copied());
    let n = c.len();
    let coeff = total.norm();
    let mut head = vec![0.0; n];
    let mut running = coeff / (n + 1) as f64;
    for k in (0..n).rev() {
        running = running.max(c[k]);
        head[k] = running;
    }
    ScalarSequence::Harmonic {
        head,
        coeff,
        offset: 0,
    }
}

/// Running geometric means `t_n = (s_1 ... s_n)^(1/n)`.
pub fn geometric_mean_seq(s: &ScalarSequence) -> Result<ScalarSequence> {
    s.validate()?;
    match s {
        ScalarSequence::Finite { values } => {
            let mut log_sum = Neumaier::default();
            let mut out = Vec::with_capacity(values.len());
            for (k, &x) in values.iter().enumerate() {
                if x == 0.0 {
                    out.resize(values.len(), 0.0);
                    break;
                }
                log_sum.add(x.ln());
                out.push((log_sum.value() / (k + 1) as f64).exp());
            }
            // rounding in exp/ln must not break monotonicity
            for k in 1..out.len() {
                out[k] = out[k].min(out[k - 1]);
            }
            Ok(ScalarSequence::Finite { values: out })
        }
        ScalarSequence::PowerLaw { c, a } => Ok(ScalarSequence::Factorial { c: *c, a: *a }),
        ScalarSequence::GeometricLaw { c, q } => Ok(ScalarSequence::GeometricLaw {
            c: c * q.sqrt(),
            q: q.sqrt(),
        }),
        other => Err(Error::Unsupported(format!(
            "geometric means of {} sequences",
            variant_name(other)
        ))),
    }
}

fn variant_name(s: &ScalarSequence) -> &'static str {
    match s {
        ScalarSequence::Finite { .. } => "finite",
        ScalarSequence::PowerLaw { .. } => "power",
        ScalarSequence::GeometricLaw { .. } => "geometric",
        ScalarSequence::Factorial { .. } => "factorial",
        ScalarSequence::Harmonic { .. } => "harmonic",
        ScalarSequence::DirectSum { .. } => "direct sum",
    }
}

/// `u_n = sum_k 2^(-theta k) s_{n / 2^k}` with fractional indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicEnvelope {
    pub base: ScalarSequence,
    pub theta: f64,
}

pub fn dyadic_series_envelope(s: &ScalarSequence, theta: f64) -> Result<DyadicEnvelope> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::Domain(format!(
            "theta must be positive, got {theta}"
        )));
    }
    s.validate()?;
    Ok(DyadicEnvelope {
        base: s.clone(),
        theta,
    })
}

impl DyadicEnvelope {
    pub fn value(&self, n: u64) -> f64 {
        dyadic_term(n.max(1), self.theta, |m| self.base.value(m))
    }

    /// `u_1, ..., u_len` computed from one pass over `s_1, ..., s_len`.
    pub fn prefix(&self, len: usize) -> Vec<f64> {
        let s = self.base.prefix(len);
        (1..=len as u64)
            .map(|n| dyadic_term(n, self.theta, |m| s[(m - 1) as usize]))
            .collect()
    }
}

fn dyadic_term(n: u64, theta: f64, s: impl Fn(u64) -> f64) -> f64 {
    let ratio = 2f64.powf(-theta);
    let mut acc = 0.0;
    let mut weight = 1.0;
    let mut k = 0u32;
    while k < 64 && (1u64 << k) <= n {
        let div = 1u64 << k;
        // s_{n / 2^k} with s_r = s_{floor(r) + 1} off the integers
        let index = n.div_ceil(div);
        acc += weight * s(index);
        weight *= ratio;
        k += 1;
    }
    // from here on n / 2^k < 1, so every term reads s_1
    acc + s(1) * weight / (1.0 - ratio)
}

/// Nonincreasing rearrangement of the union of two sequences.
pub fn merge_decreasing(a: &ScalarSequence, b: &ScalarSequence) -> ScalarSequence {
    use ScalarSequence::{DirectSum, Finite};
    match (a, b) {
        (Finite { values: x }, Finite { values: y }) => {
            let mut values = x.clone();
            values.extend_from_slice(y);
            values.sort_by(|p, q| q.total_cmp(p));
            Finite { values }
        }
        _ => {
            let mut parts = Vec::new();
            for s in [a, b] {
                match s {
                    DirectSum { parts: inner } => parts.extend(inner.iter().cloned()),
                    Finite { values } if values.is_empty() => {}
                    other => parts.push(other.clone()),
                }
            }
            if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                DirectSum { parts }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub source: MembershipVerdict,
    pub means: MembershipVerdict,
    pub geometric_means: ScalarSequence,
    pub theta: f64,
    pub n_max: usize,
    /// `sup t_n / u_n` over `n <= n_max`.
    pub empirical_constant: f64,
    /// `sup 2^theta n^theta (n!)^(-theta/n)` over `n <= n_max`.
    pub proof_constant: f64,
    /// Indices where `t_n > 2^theta n^theta (n!)^(-theta/n) u_n`.
    pub violations: Vec<usize>,
    /// Rows `(n, s_n, t_n, u_n)`.
    pub table: Vec<(usize, f64, f64, f64)>,
}

/// Geometric means of `s` and the dyadic-envelope comparison behind the
/// stability of quasi-Banach ideals, checked for `n <= n_max`.
pub fn check_geometric_stability(
    s: &ScalarSequence,
    ideal: &IdealSpec,
    n_max: usize,
) -> Result<StabilityReport> {
    let source = membership(s, ideal);
    if source.status != MembershipStatus::In {
        return Err(Error::Precondition(format!(
            "sequence is not in {ideal} (status {:?})",
            source.status
        )));
    }
    let theta = ideal
        .default_theta()
        .ok_or_else(|| Error::Unsupported(format!("{ideal} has no quasi-norm exponent")))?;
    if n_max == 0 {
        return Err(Error::Domain("n_max must be positive".into()));
    }
    let t = geometric_mean_seq(s)?;
    let means = membership(&t, ideal);
    let s_prefix = s.prefix(n_max);
    let t_prefix = t.prefix(n_max);
    let u_prefix = dyadic_series_envelope(s, theta)?.prefix(n_max);
    let mut empirical: f64 = 0.0;
    let mut proof: f64 = 0.0;
    let mut violations = Vec::new();
    let mut table = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (sn, tn, un) = (s_prefix[n - 1], t_prefix[n - 1], u_prefix[n - 1]);
        let factor =
            (theta * (2.0 * n as f64).ln() - theta * ln_factorial(n as u64) / n as f64).exp();
        proof = proof.max(factor);
        if un > 0.0 {
            empirical = empirical.max(tn / un);
        }
        if tn > factor * un * (1.0 + 1e-12) {
            violations.push(n);
        }
        table.push((n, sn, tn, un));
    }
    Ok(StabilityReport {
        source,
        means,
        geometric_means: t,
        theta,
        n_max,
        empirical_constant: empirical,
        proof_constant: proof,
        violations,
        table,
    })
}
