use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::numeric::{ln_factorial, reaches_unit, round_sig};
use crate::{Error, Result, C64};

/// Deterministic order: modulus descending (after 12-digit rounding), then
/// argument in `[0, 2pi)` ascending, then real part descending.
pub fn eigen_order(a: &C64, b: &C64) -> Ordering {
    let (ma, mb) = (round_sig(a.norm()), round_sig(b.norm()));
    mb.total_cmp(&ma)
        .then_with(|| principal_arg(a).total_cmp(&principal_arg(b)))
        .then_with(|| b.re.total_cmp(&a.re))
}

fn principal_arg(z: &C64) -> f64 {
    if *z == C64::new(0.0, 0.0) {
        return 0.0;
    }
    let t = z.im.atan2(z.re);
    if t < 0.0 {
        t + TAU
    } else {
        t
    }
}

/// Complex eigenvalues in the canonical order, zero beyond the stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSequence {
    values: Vec<C64>,
    logical_length: usize,
}

impl EigenSequence {
    pub fn new(mut values: Vec<C64>, logical_length: usize) -> Result<Self> {
        if logical_length < values.len() {
            return Err(Error::InvalidSequence(format!(
                "logical length {logical_length} is shorter than the {} stored values",
                values.len()
            )));
        }
        if let Some(k) = values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidSequence(format!(
                "non-finite eigenvalue at index {k}"
            )));
        }
        values.sort_by(eigen_order);
        Ok(Self {
            values,
            logical_length,
        })
    }

    pub fn from_values(values: Vec<C64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, n)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_values(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn logical_length(&self) -> usize {
        self.logical_length
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `lambda_n` with 1-based `n`; zero past the stored values.
    pub fn get(&self, n: usize) -> C64 {
        if n == 0 {
            return C64::new(0.0, 0.0);
        }
        self.values.get(n - 1).copied().unwrap_or_default()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn scaled(&self, alpha: C64) -> Self {
        let mut values: Vec<C64> = self.values.iter().map(|z| z * alpha).collect();
        values.sort_by(eigen_order);
        Self {
            values,
            logical_length: self.logical_length,
        }
    }

    /// Union of two spectra, re-sorted.
    pub fn merged(&self, other: &Self) -> Self {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        values.sort_by(eigen_order);
        Self {
            values,
            logical_length: self.logical_length + other.logical_length,
        }
    }
}

/// Coarse asymptotic class of a nonincreasing sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayProfile {
    /// Eventually zero.
    FiniteSupport,
    /// Bounded by `C q^n` for some `q < 1`.
    Exponential,
    /// `s_n` comparable to `n^(-exponent) (ln n)^log_power`.
    Polynomial { exponent: f64, log_power: f64 },
}

/// Affine lower bound `nu(alpha s) >= slope * alpha + intercept`, valid for
/// `alpha >= valid_from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCountBound {
    pub slope: f64,
    pub intercept: f64,
    pub valid_from: f64,
}

/// Nonnegative nonincreasing real sequence, indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarSequence {
    /// Stored values followed by zeros.
    Finite { values: Vec<f64> },
    /// `c n^(-a)`.
    #[serde(rename = "power")]
    PowerLaw { c: f64, a: f64 },
    /// `c q^n`.
    #[serde(rename = "geometric")]
    GeometricLaw { c: f64, q: f64 },
    /// `c (n!)^(-a/n)`.
    Factorial { c: f64, a: f64 },
    /// `head` followed by `coeff / (n - offset)`.
    Harmonic {
        head: Vec<f64>,
        coeff: f64,
        offset: i64,
    },
    /// Nonincreasing rearrangement of the union of the parts.
    DirectSum { parts: Vec<ScalarSequence> },
}

/// Ceiling for galloping searches over symbolic sequences.
const COUNT_CAP: u64 = 1 << 62;

impl ScalarSequence {
    pub fn finite(values: Vec<f64>) -> Result<Self> {
        let s = Self::Finite { values };
        s.validate()?;
        Ok(s)
    }

    pub fn power(c: f64, a: f64) -> Result<Self> {
        let s = Self::PowerLaw { c, a };
        s.validate()?;
        Ok(s)
    }

    pub fn geometric(c: f64, q: f64) -> Result<Self> {
        let s = Self::GeometricLaw { c, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSequence(msg));
        let positive = |name: &str, x: f64| -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSequence(format!(
                    "{name} must be finite and positive, got {x}"
                )))
            }
        };
        match self {
            Self::Finite { values } => check_nonincreasing(values),
            Self::PowerLaw { c, a } | Self::Factorial { c, a } => {
                positive("c", *c)?;
                positive("a", *a)
            }
            Self::GeometricLaw { c, q } => {
                positive("c", *c)?;
                if !(q.is_finite() && *q > 0.0 && *q < 1.0) {
                    return bad(format!("ratio q must lie in (0, 1), got {q}"));
                }
                Ok(())
            }
            Self::Harmonic {
                head,
                coeff,
                offset,
            } => {
                check_nonincreasing(head)?;
                if !(coeff.is_finite() && *coeff >= 0.0) {
                    return bad(format!("coeff must be finite and nonnegative, got {coeff}"));
                }
                let first_tail = head.len() as i64 + 1 - offset;
                if first_tail < 1 {
                    return bad(format!(
                        "offset {offset} leaves a nonpositive denominator after a head of {}",
                        head.len()
                    ));
                }
                if let Some(&last) = head.last() {
                    let tail = coeff / first_tail as f64;
                    if tail > last * (1.0 + 1e-12) {
                        return bad(format!(
                            "tail value {tail} exceeds the last head value {last}"
                        ));
                    }
                }
                Ok(())
            }
            Self::DirectSum { parts } => {
                if parts.is_empty() {
                    return bad("direct sum needs at least one part".into());
                }
                parts.iter().try_for_each(Self::validate)
            }
        }
    }

    /// `s_n` for 1-based `n`; `s_0` is treated as `s_1`.
    pub fn value(&self, n: u64) -> f64 {
        let n = n.max(1);
        match self {
            Self::Finite { values } => values.get((n - 1) as usize).copied().unwrap_or(0.0),
            Self::PowerLaw { c, a } => c * (n as f64).powf(-a),
            Self::GeometricLaw { c, q } => c * q.powf(n as f64),
            Self::Factorial { c, a } => c * (-a * ln_factorial(n) / n as f64).exp(),
            Self::Harmonic {
                head,
                coeff,
                offset,
            } => {
                if (n as usize) <= head.len() {
                    head[(n - 1) as usize]
                } else {
                    coeff / (n as i64 - offset) as f64
                }
            }
            Self::DirectSum { .. } => self.iter().nth((n - 1) as usize).unwrap_or(0.0),
        }
    }

    /// `s_r` with the convention `s_r = s_{floor(r)+1}` for non-integer `r`.
    pub fn frac_index(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("index must be positive, got {r}")));
        }
        let n = if r.fract() == 0.0 {
            r as u64
        } else {
            r.floor() as u64 + 1
        };
        Ok(self.value(n))
    }

    /// Infinite iterator over `s_1, s_2, ...` (zeros after a finite support).
    pub fn iter(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            Self::Finite { values } => {
                Box::new(values.iter().copied().chain(std::iter::repeat(0.0)))
            }
            Self::Harmonic {
                head,
                coeff,
                offset,
            } => {
                let start = head.len() as i64 + 1;
                let (coeff, offset) = (*coeff, *offset);
                Box::new(
                    head.iter()
                        .copied()
                        .chain((start..).map(move |n| coeff / (n - offset) as f64)),
                )
            }
            Self::DirectSum { parts } => Box::new(MergeIter::new(
                parts.iter().map(|p| p.iter().peekable()).collect(),
            )),
            _ => Box::new((1u64..).map(move |n| self.value(n))),
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<f64> {
        self.iter().take(n).collect()
    }

    /// Number of nonzero terms, or `None` for an infinite support.
    pub fn support_len(&self) -> Option<usize> {
        match self {
            Self::Finite { values } => Some(values.iter().take_while(|&&x| x > 0.0).count()),
            Self::Harmonic { head, coeff, .. } if *coeff == 0.0 => {
                Some(head.iter().take_while(|&&x| x > 0.0).count())
            }
            Self::DirectSum { parts } => parts.iter().map(Self::support_len).sum(),
            _ => None,
        }
    }

    pub fn first(&self) -> f64 {
        match self {
            Self::DirectSum { parts } => parts.iter().map(Self::first).fold(0.0, f64::max),
            _ => self.value(1),
        }
    }

    /// `nu(alpha s)`: how many `alpha s_n` reach 1 after 12-digit rounding.
    /// Saturates at `2^62` for sequences that stay above the threshold that long.
    pub fn count_at_least_scaled(&self, alpha: f64) -> u64 {
        if alpha <= 0.0 {
            return 0;
        }
        match self {
            Self::Finite { values } => values.partition_point(|&x| reaches_unit(alpha * x)) as u64,
            Self::DirectSum { parts } => parts
                .iter()
                .map(|p| p.count_at_least_scaled(alpha))
                .fold(0u64, u64::saturating_add),
            _ => gallop(|n| reaches_unit(alpha * self.value(n))),
        }
    }

    /// `mu(alpha s) = sum_n log_+(alpha s_n)`.
    pub fn log_mass(&self, alpha: f64) -> Result<f64> {
        if alpha <= 0.0 {
            return Ok(0.0);
        }
        let log_plus = |x: f64| if x > 1.0 { x.ln() } else { 0.0 };
        match self {
            Self::Finite { values } => Ok(values.iter().map(|&x| log_plus(alpha * x)).sum()),
            Self::PowerLaw { c, a } => {
                // terms with n <= (alpha c)^(1/a)
                let l = (alpha * c).ln();
                if l <= 0.0 {
                    return Ok(0.0);
                }
                let n = (l / a).exp().floor();
                if n >= COUNT_CAP as f64 {
                    return Err(Error::Unsupported(format!(
                        "log mass with more than 2^62 contributing terms (alpha = {alpha})"
                    )));
                }
                Ok((n * l - a * ln_factorial(n as u64)).max(0.0))
            }
            Self::GeometricLaw { c, q } => {
                let l = (alpha * c).ln();
                if l <= 0.0 {
                    return Ok(0.0);
                }
                let n = (l / -q.ln()).floor();
                Ok((n * l + q.ln() * n * (n + 1.0) / 2.0).max(0.0))
            }
            Self::Factorial { .. } => {
                const LIMIT: u64 = 50_000_000;
                let n = self.count_at_least_scaled(alpha);
                if n > LIMIT {
                    return Err(Error::Unsupported(format!(
                        "log mass of a factorial law with {n} contributing terms"
                    )));
                }
                Ok((1..=n + 1).map(|k| log_plus(alpha * self.value(k))).sum())
            }
            Self::Harmonic {
                head,
                coeff,
                offset,
            } => {
                let head_mass: f64 = head.iter().map(|&x| log_plus(alpha * x)).sum();
                let ak = alpha * coeff;
                // tail terms m = n - offset run from first_tail up to floor(alpha coeff)
                let first_tail = (head.len() as i64 + 1 - offset) as f64;
                let last = ak.floor();
                if last < first_tail {
                    return Ok(head_mass);
                }
                if last >= COUNT_CAP as f64 {
                    return Err(Error::Unsupported(format!(
                        "log mass with more than 2^62 contributing terms (alpha = {alpha})"
                    )));
                }
                let count = last - first_tail + 1.0;
                let tail = count * ak.ln()
                    - (ln_factorial(last as u64) - ln_factorial(first_tail as u64 - 1));
                Ok(head_mass + tail.max(0.0))
            }
            Self::DirectSum { parts } => parts.iter().map(|p| p.log_mass(alpha)).sum(),
        }
    }

    pub fn decay_profile(&self) -> DecayProfile {
        match self {
            Self::Finite { .. } => DecayProfile::FiniteSupport,
            Self::PowerLaw { a, .. } | Self::Factorial { a, .. } => DecayProfile::Polynomial {
                exponent: *a,
                log_power: 0.0,
            },
            Self::GeometricLaw { .. } => DecayProfile::Exponential,
            Self::Harmonic { coeff, .. } => {
                if *coeff > 0.0 {
                    DecayProfile::Polynomial {
                        exponent: 1.0,
                        log_power: 0.0,
                    }
                } else {
                    DecayProfile::FiniteSupport
                }
            }
            Self::DirectSum { parts } => parts
                .iter()
                .map(Self::decay_profile)
                .fold(DecayProfile::FiniteSupport, slower),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Self::Finite { values } => Self::Finite {
                values: values.iter().map(|x| x * k).collect(),
            },
            Self::PowerLaw { c, a } => Self::PowerLaw { c: c * k, a: *a },
            Self::GeometricLaw { c, q } => Self::GeometricLaw { c: c * k, q: *q },
            Self::Factorial { c, a } => Self::Factorial { c: c * k, a: *a },
            Self::Harmonic {
                head,
                coeff,
                offset,
            } => Self::Harmonic {
                head: head.iter().map(|x| x * k).collect(),
                coeff: coeff * k,
                offset: *offset,
            },
            Self::DirectSum { parts } => Self::DirectSum {
                parts: parts.iter().map(|p| p.scaled(k)).collect(),
            },
        }
    }

    /// Pointwise maximum of two finite or harmonic sequences.
    pub fn pointwise_max(&self, other: &Self) -> Result<Self> {
        use ScalarSequence::{Finite, Harmonic};
        match (self, other) {
            (Finite { values: a }, Finite { values: b }) => {
                let n = a.len().max(b.len());
                Ok(Finite {
                    values: (1..=n as u64)
                        .map(|k| self.value(k).max(other.value(k)))
                        .collect(),
                })
            }
            (
                Harmonic {
                    head,
                    coeff,
                    offset,
                },
                Finite { values },
            )
            | (
                Finite { values },
                Harmonic {
                    head,
                    coeff,
                    offset,
                },
            ) => {
                let harmonic = Harmonic {
                    head: head.clone(),
                    coeff: *coeff,
                    offset: *offset,
                };
                let n = head.len().max(values.len());
                let merged: Vec<f64> = (1..=n)
                    .map(|k| {
                        let k = k as u64;
                        harmonic
                            .value(k)
                            .max(values.get(k as usize - 1).copied().unwrap_or(0.0))
                    })
                    .collect();
                Ok(Harmonic {
                    head: merged,
                    coeff: *coeff,
                    offset: *offset,
                })
            }
            _ => Err(Error::Unsupported(
                "pointwise max is implemented for finite and harmonic sequences".into(),
            )),
        }
    }

    pub fn linear_count_bound(&self) -> LinearCountBound {
        const NONE: LinearCountBound = LinearCountBound {
            slope: 0.0,
            intercept: 0.0,
            valid_from: 0.0,
        };
        match self {
            Self::Harmonic {
                head,
                coeff,
                offset,
            } if *coeff > 0.0 => {
                // all tail indices n <= offset + alpha coeff count once alpha
                // reaches the first tail value
                let first_tail = (head.len() as i64 + 1 - offset) as f64;
                LinearCountBound {
                    slope: *coeff,
                    intercept: *offset as f64 - 1.0,
                    valid_from: first_tail / coeff,
                }
            }
            Self::PowerLaw { c, a } | Self::Factorial { c, a } if *a <= 1.0 => {
                // c (n!)^(-a/n) >= c n^(-a) >= c / n
                LinearCountBound {
                    slope: *c,
                    intercept: -1.0,
                    valid_from: 1.0 / c,
                }
            }
            Self::DirectSum { parts } => {
                parts
                    .iter()
                    .map(Self::linear_count_bound)
                    .fold(NONE, |acc, b| LinearCountBound {
                        slope: acc.slope + b.slope,
                        intercept: acc.intercept + b.intercept,
                        valid_from: acc.valid_from.max(b.valid_from),
                    })
            }
            _ => NONE,
        }
    }
}

fn slower(a: DecayProfile, b: DecayProfile) -> DecayProfile {
    use DecayProfile::*;
    match (a, b) {
        (FiniteSupport, x) | (x, FiniteSupport) => x,
        (Exponential, x) | (x, Exponential) => x,
        (
            Polynomial {
                exponent: e1,
                log_power: l1,
            },
            Polynomial {
                exponent: e2,
                log_power: l2,
            },
        ) => {
            if e1 < e2 || (e1 == e2 && l1 >= l2) {
                a
            } else {
                b
            }
        }
    }
}

fn check_nonincreasing(values: &[f64]) -> Result<()> {
    if let Some(k) = values.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidSequence(format!(
            "value at index {k} is negative or non-finite: {}",
            values[k]
        )));
    }
    if let Some(k) = values.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::InvalidSequence(format!(
            "values increase at index {}: {} < {}",
            k + 1,
            values[k],
            values[k + 1]
        )));
    }
    Ok(())
}

/// Largest `n` with `pred(n)` true, for a predicate that is true on an initial
/// segment of the positive integers.
fn gallop(pred: impl Fn(u64) -> bool) -> u64 {
    if !pred(1) {
        return 0;
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while pred(hi) {
        lo = hi;
        if hi >= COUNT_CAP {
            return COUNT_CAP;
        }
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

struct MergeIter<'a> {
    parts: Vec<std::iter::Peekable<Box<dyn Iterator<Item = f64> + 'a>>>,
}

impl<'a> MergeIter<'a> {
    fn new(parts: Vec<std::iter::Peekable<Box<dyn Iterator<Item = f64> + 'a>>>) -> Self {
        Self { parts }
    }
}

impl Iterator for MergeIter<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.parts.iter_mut().enumerate() {
            if let Some(&x) = p.peek() {
                if best.is_none_or(|(_, b)| x > b) {
                    best = Some((i, x));
                }
            }
        }
        let (i, _) = best?;
        self.parts[i].next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_order_breaks_ties_by_argument() {
        let seq =
            EigenSequence::from_values(vec![c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0)])
                .unwrap();
        assert_eq!(
            seq.values(),
            &[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]
        );
        assert_eq!(seq.get(5), c(0.0, 0.0));
    }

    #[test]
    fn frac_index_convention() {
        let s = ScalarSequence::finite(vec![4.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.frac_index(2.0).unwrap(), 2.0);
        assert_eq!(s.frac_index(1.5).unwrap(), 2.0);
        assert_eq!(s.frac_index(3.5).unwrap(), 0.0);
        assert_eq!(s.frac_index(0.5).unwrap(), 4.0);
        assert!(s.frac_index(0.0).is_err());
        assert!(s.frac_index(-1.0).is_err());
    }

    #[test]
    fn validation_rejects_bad_sequences() {
        assert!(ScalarSequence::finite(vec![1.0, 2.0]).is_err());
        assert!(ScalarSequence::finite(vec![1.0, -0.5]).is_err());
        assert!(ScalarSequence::power(0.0, 1.0).is_err());
        assert!(ScalarSequence::geometric(1.0, 1.0).is_err());
        let bad_tail = ScalarSequence::Harmonic {
            head: vec![1.0, 0.1],
            coeff: 1.0,
            offset: 0,
        };
        assert!(bad_tail.validate().is_err());
        let bad_offset = ScalarSequence::Harmonic {
            head: vec![],
            coeff: 1.0,
            offset: 1,
        };
        assert!(bad_offset.validate().is_err());
    }

    #[test]
    fn harmonic_values_and_iter_agree() {
        let s = ScalarSequence::Harmonic {
            head: vec![2.0, 1.0],
            coeff: 1.5,
            offset: 1,
        };
        s.validate().unwrap();
        assert_eq!(s.prefix(5), vec![2.0, 1.0, 0.75, 0.5, 0.375]);
        for n in 1..=5 {
            assert_eq!(s.value(n), s.prefix(5)[n as usize - 1]);
        }
    }

    #[test]
    fn direct_sum_merges_by_size() {
        let s = ScalarSequence::DirectSum {
            parts: vec![
                ScalarSequence::finite(vec![3.0, 1.0]).unwrap(),
                ScalarSequence::finite(vec![2.0]).unwrap(),
            ],
        };
        assert_eq!(s.prefix(4), vec![3.0, 2.0, 1.0, 0.0]);
        assert_eq!(s.count_at_least_scaled(1.0), 3);
        assert_eq!(s.support_len(), Some(3));
    }

    #[test]
    fn counts_match_brute_force_for_laws() {
        let laws = [
            ScalarSequence::power(3.0, 0.7).unwrap(),
            ScalarSequence::geometric(5.0, 0.8).unwrap(),
            ScalarSequence::Factorial { c: 4.0, a: 1.2 },
            ScalarSequence::Harmonic {
                head: vec![9.0],
                coeff: 7.0,
                offset: 0,
            },
        ];
        for s in &laws {
            for alpha in [0.1, 0.5, 1.0, 2.0, 7.5] {
                let brute = s
                    .prefix(10_000)
                    .iter()
                    .filter(|&&x| reaches_unit(alpha * x))
                    .count();
                assert_eq!(
                    s.count_at_least_scaled(alpha),
                    brute as u64,
                    "{s:?} at {alpha}"
                );
            }
        }
    }

    #[test]
    fn log_mass_matches_direct_sums() {
        let laws = [
            ScalarSequence::power(3.0, 0.7).unwrap(),
            ScalarSequence::geometric(5.0, 0.8).unwrap(),
            ScalarSequence::Factorial { c: 4.0, a: 1.2 },
            ScalarSequence::Harmonic {
                head: vec![9.0, 8.0],
                coeff: 7.0,
                offset: -1,
            },
        ];
        for s in &laws {
            for alpha in [0.1, 0.5, 1.0, 2.0, 7.5] {
                let direct: f64 = s
                    .prefix(100_000)
                    .iter()
                    .map(|&x| (alpha * x).ln().max(0.0))
                    .sum();
                let got = s.log_mass(alpha).unwrap();
                assert!(
                    (got - direct).abs() < 1e-9 * (1.0 + direct),
                    "{s:?}: {got} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn decay_profile_of_direct_sum_is_slowest() {
        let s = ScalarSequence::DirectSum {
            parts: vec![
                ScalarSequence::geometric(1.0, 0.5).unwrap(),
                ScalarSequence::power(1.0, 2.0).unwrap(),
                ScalarSequence::power(1.0, 1.5).unwrap(),
            ],
        };
        assert_eq!(
            s.decay_profile(),
            DecayProfile::Polynomial {
                exponent: 1.5,
                log_power: 0.0
            }
        );
    }

    #[test]
    fn serde_tags() {
        let s: ScalarSequence = serde_json::from_str(r#"{"kind":"power","c":1,"a":0.5}"#).unwrap();
        assert_eq!(s, ScalarSequence::PowerLaw { c: 1.0, a: 0.5 });
        let s: ScalarSequence =
            serde_json::from_str(r#"{"kind":"finite","values":[2,1]}"#).unwrap();
        assert_eq!(s.prefix(3), vec![2.0, 1.0, 0.0]);
    }

    proptest! {
        #[test]
        fn linear_count_bound_holds(
            head in proptest::collection::vec(0.5f64..5.0, 0..6),
            coeff in 0.1f64..5.0,
            alpha in 0.01f64..50.0,
        ) {
            let mut head = head;
            head.sort_by(|a, b| b.total_cmp(a));
            let first_tail = head.len() as f64 + 1.0;
            let floor_needed = coeff / first_tail;
            for x in head.iter_mut() {
                *x = x.max(floor_needed);
            }
            let s = ScalarSequence::Harmonic { head, coeff, offset: 0 };
            s.validate().unwrap();
            let b = s.linear_count_bound();
            if alpha >= b.valid_from {
                let count = s.count_at_least_scaled(alpha) as f64;
                prop_assert!(count >= b.slope * alpha + b.intercept - 1e-9);
            }
        }

        #[test]
        fn eigen_order_is_total_and_nonincreasing(
            raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 0..20)
        ) {
            let seq = EigenSequence::from_values(raw.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let m = seq.moduli();
            for w in m.windows(2) {
                prop_assert!(round_sig(w[0]) >= round_sig(w[1]));
            }
            let mut reversed: Vec<C64> = seq.values().iter().rev().copied().collect();
            reversed.sort_by(eigen_order);
            prop_assert_eq!(reversed.as_slice(), seq.values());
        }
    }
}
