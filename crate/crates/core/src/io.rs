//! JSON input schemas, report documents and CSV tables.
//!
//! Every emitted document carries `"schema": "commspec/v1"`. Floats are
//! written with 17 significant digits so they re-parse to the same bits;
//! non-finite values become `null`. Complex numbers are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::criterion::{derived_c2, BoundCheck, ConditionCheck, CriterionReport, Verdict};
use crate::cutoffs::{laplacian_grid_check, CutoffPair};
use crate::functionals::FunctionalReport;
use crate::ideals::{
    CesaroTail, EigenLaw, MembershipStatus, MembershipVerdict, SpectrumSource, StabilityReport,
};
use crate::numeric::log_spaced;
use crate::spectral::{ComplexMatrix, EigenSequence, ScalarSequence};
use crate::{Error, Result, C64, SCHEMA_VERSION};

/// Rows written for long tables; shorter tables are written in full.
pub const TABLE_ROWS: usize = 2000;

/// `{:.16e}`: 17 significant digits, enough for an exact round trip.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct RoundTripFormatter;

impl serde_json::ser::Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with round-trip floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RoundTripFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Invariant(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Invariant(e.to_string()))
}

/// Deserializes `null` as NaN, the inverse of how non-finite floats are written.
pub fn nullable_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Wraps a report body with the schema tag and command name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: String,
    pub command: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(command: &str, body: T) -> Self {
        Self {
            schema: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            body,
        }
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

// ---------------------------------------------------------------- inputs

/// A parsed input file.
#[derive(Debug, Clone, PartialEq)]
pub enum InputDocument {
    Matrix(ComplexMatrix),
    Spectrum(SpectrumSource),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    #[serde(default)]
    schema: Option<String>,
    n: usize,
    entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Finite,
    Prefix,
    Power,
    Geometric,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Real(f64),
    Complex([f64; 2]),
}

impl RawValue {
    fn complex(self) -> C64 {
        match self {
            Self::Real(x) => C64::new(x, 0.0),
            Self::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    #[serde(default)]
    schema: Option<String>,
    kind: RawKind,
    #[serde(default)]
    values: Option<Vec<RawValue>>,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    q: Option<f64>,
    #[serde(default)]
    alternating: bool,
}

fn malformed_json(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    Error::Malformed(format!("at `{}`: {}", e.path(), e.inner()))
}

fn parse_as<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(malformed_json)?;
    de.end().map_err(|e| Error::Malformed(e.to_string()))?;
    Ok(value)
}

fn check_schema(schema: &Option<String>) -> Result<()> {
    match schema {
        Some(s) if s != SCHEMA_VERSION => Err(Error::Malformed(format!(
            "at `schema`: expected {SCHEMA_VERSION:?}, got {s:?}"
        ))),
        _ => Ok(()),
    }
}

fn require(field: Option<f64>, name: &str, kind: &str) -> Result<f64> {
    field.ok_or_else(|| {
        Error::Malformed(format!(
            "at `{name}`: kind {kind:?} requires field `{name}`"
        ))
    })
}

fn forbid(present: bool, name: &str, kind: &str) -> Result<()> {
    if present {
        Err(Error::Malformed(format!(
            "at `{name}`: not allowed for kind {kind:?}"
        )))
    } else {
        Ok(())
    }
}

/// Parses a matrix document `{"n", "entries"}` or a spectrum document with a `kind`.
pub fn parse_input(text: &str) -> Result<InputDocument> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let is_spectrum = value.as_object().is_some_and(|o| o.contains_key("kind"));
    if is_spectrum {
        parse_spectrum(text).map(InputDocument::Spectrum)
    } else {
        parse_matrix(text).map(InputDocument::Matrix)
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let raw: RawMatrix = parse_as(text)?;
    check_schema(&raw.schema)?;
    if raw.n == 0 {
        return Err(Error::Malformed(
            "at `n`: dimension must be at least 1".into(),
        ));
    }
    let expected = raw
        .n
        .checked_mul(raw.n)
        .ok_or_else(|| Error::Malformed(format!("at `n`: dimension {} is too large", raw.n)))?;
    if raw.entries.len() != expected {
        return Err(Error::Malformed(format!(
            "at `entries`: expected n^2 = {expected} entries, got {}",
            raw.entries.len()
        )));
    }
    let entries = raw
        .entries
        .iter()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    ComplexMatrix::new(raw.n, entries)
}

pub fn parse_spectrum(text: &str) -> Result<SpectrumSource> {
    let raw: RawSpectrum = parse_as(text)?;
    check_schema(&raw.schema)?;
    let name = match raw.kind {
        RawKind::Finite => "finite",
        RawKind::Prefix => "prefix",
        RawKind::Power => "power",
        RawKind::Geometric => "geometric",
    };
    let source = match raw.kind {
        RawKind::Finite | RawKind::Prefix => {
            for (present, field) in [
                (raw.c.is_some(), "c"),
                (raw.a.is_some(), "a"),
                (raw.q.is_some(), "q"),
                (raw.alternating, "alternating"),
            ] {
                forbid(present, field, name)?;
            }
            let values: Vec<C64> = raw
                .values
                .ok_or_else(|| {
                    Error::Malformed(format!(
                        "at `values`: kind {name:?} requires field `values`"
                    ))
                })?
                .into_iter()
                .map(RawValue::complex)
                .collect();
            if matches!(raw.kind, RawKind::Finite) {
                SpectrumSource::Finite(EigenSequence::from_values(values)?)
            } else {
                SpectrumSource::Prefix(values)
            }
        }
        RawKind::Power => {
            forbid(raw.values.is_some(), "values", name)?;
            forbid(raw.q.is_some(), "q", name)?;
            SpectrumSource::Law(EigenLaw::Power {
                c: require(raw.c, "c", name)?,
                a: require(raw.a, "a", name)?,
                alternating: raw.alternating,
            })
        }
        RawKind::Geometric => {
            forbid(raw.values.is_some(), "values", name)?;
            forbid(raw.a.is_some(), "a", name)?;
            SpectrumSource::Law(EigenLaw::Geometric {
                c: require(raw.c, "c", name)?,
                q: require(raw.q, "q", name)?,
                alternating: raw.alternating,
            })
        }
    };
    source.validate()?;
    Ok(source)
}

pub fn read_input(path: &Path) -> Result<InputDocument> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_input(&text)
}

/// Nonincreasing nonnegative sequence described by a spectrum document:
/// the moduli of a finite spectrum or of a law.
pub fn singular_model(source: &SpectrumSource) -> Result<ScalarSequence> {
    match source {
        SpectrumSource::Finite(lambda) => ScalarSequence::finite(lambda.moduli()),
        SpectrumSource::Prefix(values) => {
            ScalarSequence::finite(values.iter().map(|z| z.norm()).collect())
        }
        SpectrumSource::Law(law) => Ok(law.moduli()),
    }
}

// ---------------------------------------------------------------- outputs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpectrumDoc {
    pub dim: usize,
    pub fingerprint: String,
    pub eigenvalues: Vec<[f64; 2]>,
    pub singular_values: Vec<f64>,
}

impl SpectrumDoc {
    pub fn new(m: &ComplexMatrix, lambda: &EigenSequence, singular: &ScalarSequence) -> Self {
        Self {
            dim: m.dim(),
            fingerprint: m.fingerprint(),
            eigenvalues: lambda.values().iter().map(|&z| pair(z)).collect(),
            singular_values: singular.prefix(m.dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FunctionalDoc {
    pub nu: usize,
    pub mu: f64,
    pub chi: [f64; 2],
    pub chi_phi: [f64; 2],
}

impl From<&FunctionalReport> for FunctionalDoc {
    fn from(r: &FunctionalReport) -> Self {
        Self {
            nu: r.nu,
            mu: r.mu,
            chi: pair(r.chi),
            chi_phi: pair(r.chi_phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CutoffDoc {
    pub c1: f64,
    pub c2: f64,
    pub psi_at1: f64,
    pub psi_slope: f64,
    pub min_laplacian: f64,
    pub grid_size: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl CutoffDoc {
    /// Constants of the shipped cutoff pair and the minimum discrete
    /// Laplacian of `h` over the annulus `r_min <= |z| <= r_max`.
    pub fn new(pair: &CutoffPair, grid_size: usize, r_min: f64, r_max: f64) -> Result<Self> {
        Ok(Self {
            c1: pair.c1,
            c2: derived_c2(pair.c1),
            psi_at1: pair.psi.value(1.0),
            psi_slope: pair.psi.slope(),
            min_laplacian: laplacian_grid_check(pair, r_min, r_max, grid_size)?,
            grid_size,
            r_min,
            r_max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MembershipDoc {
    pub status: MembershipStatus,
    pub scale: usize,
    pub evidence: BTreeMap<String, f64>,
}

impl From<&MembershipVerdict> for MembershipDoc {
    fn from(v: &MembershipVerdict) -> Self {
        Self {
            status: v.status,
            scale: v.scale,
            evidence: v
                .evidence
                .iter()
                .filter(|(_, x)| x.is_finite())
                .map(|(k, x)| (k.clone(), *x))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CesaroDoc {
    pub prefix_length: usize,
    pub partial_sum: [f64; 2],
    /// `harmonic`, `asymptotic` or `unknown`.
    pub tail: String,
    pub tail_coefficient: Option<f64>,
    pub tail_exponent: Option<f64>,
    pub tail_log_power: Option<f64>,
    /// Least-squares limit of the normalized means and its standard error.
    pub fitted_limit: Option<f64>,
    pub fitted_limit_stderr: Option<f64>,
    /// `(n, c_n)` at the end of the prefix.
    pub last: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BoundDoc {
    pub holds: bool,
    pub worst_ratio: Option<f64>,
    pub failing_n: Option<usize>,
    pub scanned: usize,
}

impl From<&BoundCheck> for BoundDoc {
    fn from(b: &BoundCheck) -> Self {
        Self {
            holds: b.holds,
            worst_ratio: finite_or_none(b.worst_ratio),
            failing_n: b.failing_n,
            scanned: b.scanned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConditionDoc {
    pub holds: bool,
    pub worst_ratio: Option<f64>,
    pub witness_scale: usize,
    pub failing_alpha: Option<f64>,
    pub checked_points: usize,
}

impl From<&ConditionCheck> for ConditionDoc {
    fn from(c: &ConditionCheck) -> Self {
        Self {
            holds: c.holds,
            worst_ratio: finite_or_none(c.worst_ratio),
            witness_scale: c.witness_scale,
            failing_alpha: c.failing_alpha,
            checked_points: c.checked_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WitnessDoc {
    pub model: String,
    pub envelope_head: Vec<f64>,
    pub envelope_tail_coefficient: f64,
    pub condition3: BoundDoc,
    pub condition4: ConditionDoc,
    pub condition5: ConditionDoc,
    pub condition3_from4: BoundDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HermitianDoc {
    pub hermitian_part: MembershipDoc,
    pub skew_part: MembershipDoc,
    pub real_deviation: f64,
    pub imag_deviation: f64,
    pub bound: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CriterionDoc {
    pub ideal: String,
    pub verdict: Verdict,
    pub note: String,
    pub condition2: MembershipDoc,
    pub cesaro: CesaroDoc,
    pub witnesses: Option<WitnessDoc>,
    pub hermitian: Option<HermitianDoc>,
}

impl From<&CriterionReport> for CriterionDoc {
    fn from(r: &CriterionReport) -> Self {
        let c = &r.cesaro;
        let (tail, coeff, exponent, log_power) = match &c.tail {
            CesaroTail::Harmonic { coeff } => ("harmonic", Some(*coeff), Some(1.0), Some(0.0)),
            CesaroTail::Asymptotic(law) => (
                "asymptotic",
                Some(law.coeff),
                Some(law.exponent),
                Some(law.log_power),
            ),
            CesaroTail::Unknown => ("unknown", None, None, None),
        };
        let fitted = c.fitted_limit();
        let cesaro = CesaroDoc {
            prefix_length: c.len(),
            partial_sum: pair(c.partial_sum),
            tail: tail.to_string(),
            tail_coefficient: coeff,
            tail_exponent: exponent,
            tail_log_power: log_power,
            fitted_limit: fitted.map(|f| f.0),
            fitted_limit_stderr: fitted.map(|f| f.1),
            last: c.prefix.last().map(|&x| (c.len(), x)),
        };
        let witnesses = r.witnesses.as_ref().map(|w| {
            let (head, coeff) = match &w.envelope {
                ScalarSequence::Harmonic { head, coeff, .. } => (head.clone(), *coeff),
                other => (other.prefix(other.support_len().unwrap_or(0)), 0.0),
            };
            WitnessDoc {
                model: w.model.clone(),
                envelope_head: head,
                envelope_tail_coefficient: coeff,
                condition3: (&w.condition3).into(),
                condition4: (&w.condition4).into(),
                condition5: (&w.condition5).into(),
                condition3_from4: (&w.condition3_from_4).into(),
            }
        });
        let hermitian = r.hermitian.as_ref().map(|h| HermitianDoc {
            hermitian_part: (&h.hermitian_condition2).into(),
            skew_part: (&h.skew_condition2).into(),
            real_deviation: h.real_deviation,
            imag_deviation: h.imag_deviation,
            bound: h.bound,
            c2: h.c2,
        });
        Self {
            ideal: r.ideal.clone(),
            verdict: r.verdict,
            note: r.note.clone(),
            condition2: (&r.condition2).into(),
            cesaro,
            witnesses,
            hermitian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StabilityDoc {
    pub ideal: String,
    pub source: MembershipDoc,
    pub geometric_means: MembershipDoc,
    pub theta: f64,
    pub n_max: usize,
    pub empirical_constant: f64,
    pub proof_constant: f64,
    pub violation_count: usize,
    /// First few indices with `t_n > C u_n`.
    pub violations: Vec<usize>,
}

impl StabilityDoc {
    pub fn new(ideal: &str, r: &StabilityReport) -> Self {
        Self {
            ideal: ideal.to_string(),
            source: (&r.source).into(),
            geometric_means: (&r.means).into(),
            theta: r.theta,
            n_max: r.n_max,
            empirical_constant: r.empirical_constant,
            proof_constant: r.proof_constant,
            violation_count: r.violations.len(),
            violations: r.violations.iter().take(100).copied().collect(),
        }
    }
}

// ---------------------------------------------------------------- tables

fn table_indices(len: usize) -> Vec<usize> {
    if len <= TABLE_ROWS {
        (1..=len).collect()
    } else {
        log_spaced(1, len, TABLE_ROWS)
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `(n, c_n, u_n)` with `u_n = max_{n <= k <= N} c_k` over the stored prefix.
pub fn cesaro_table(report: &CriterionReport) -> Vec<(usize, f64, f64)> {
    let c = &report.cesaro.prefix;
    let mut envelope = c.clone();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    table_indices(c.len())
        .into_iter()
        .map(|n| (n, c[n - 1], envelope[n - 1]))
        .collect()
}

pub fn write_cesaro_table(path: &Path, report: &CriterionReport) -> Result<()> {
    let rows = cesaro_table(report)
        .into_iter()
        .map(|(n, c, u)| vec![n.to_string(), format_f64(c), format_f64(u)]);
    write_csv(path, &["n", "c_n", "u_n"], rows)
}

/// `(n, s_n, t_n, u_n)` rows of a stability report.
pub fn write_stability_table(path: &Path, report: &StabilityReport) -> Result<()> {
    let rows = table_indices(report.table.len()).into_iter().map(|n| {
        let (k, s, t, u) = report.table[n - 1];
        vec![k.to_string(), format_f64(s), format_f64(t), format_f64(u)]
    });
    write_csv(path, &["n", "s_n", "t_n", "u_n"], rows)
}
