//! Cesaro criterion for commutator-subspace membership, with constructive
//! witnesses for the equivalent threshold conditions.
//!
//! For a spectrum `lambda` and `alpha > 0`, `chi(alpha lambda) = alpha P(alpha)`
//! where `P(alpha)` sums the `lambda_k` with `alpha |lambda_k| >= 1`. `P` is a step
//! function with jumps at `1 / |lambda_k|`, so `|chi|` is increasing and linear
//! between those breakpoints. `nu(alpha T)` is a step function with jumps at
//! `1 / T_n` and `mu(alpha T)` is `k ln(alpha) + const` between the same points.
//! Checking the appropriate endpoints of the merged breakpoint grid is therefore
//! exhaustive; far enough out, a linear lower bound on `nu(alpha T)` certifies the rest.

use serde::{Deserialize, Serialize};

use crate::cutoffs::CutoffPair;
use crate::functionals::{chi, mu};
use crate::ideals::{
    cesaro_sequence_with_scale, max_envelope, merge_decreasing, CesaroSequence, IdealSpec,
    MembershipStatus, MembershipVerdict, SpectrumSource, DEFAULT_PREFIX,
};
use crate::numeric::{reaches_unit, ComplexNeumaier};
use crate::spectral::{
    abs_operator, eigenvalue_sequence, hermitian_split, ComplexMatrix, EigenSequence,
    ScalarSequence,
};
use crate::{Error, Result, C64};

/// Additive slack for `|chi| <= nu` and `|chi| <= mu`: `TOL * (1 + rhs)`.
pub const CONDITION_TOL: f64 = 1e-9;
/// T-breakpoints examined past the explicit region before giving up on
/// certifying an unbounded tail.
const EXTRA_BREAKPOINTS: usize = 64;

/// Outcome of a threshold-condition scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub holds: bool,
    /// Largest `lhs / max(rhs, 1)` over the checked points.
    pub worst_ratio: f64,
    /// Number of terms of the witness sequence that were examined.
    pub witness_scale: usize,
    pub failing_alpha: Option<f64>,
    pub checked_points: usize,
}

/// Outcome of `c_n <= factor * s_n(T)` over all `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub holds: bool,
    /// `sup c_n / (factor s_n(T))` over the scanned range.
    pub worst_ratio: f64,
    pub failing_n: Option<usize>,
    /// Indices scanned explicitly; beyond them the bound is certified analytically.
    pub scanned: usize,
}

/// Spectrum with prefix sums over the canonical order.
struct Breakpoints {
    /// Ascending distinct `1 / |lambda_k|` for nonzero `lambda_k`.
    alphas: Vec<f64>,
    prefix_sums: Vec<C64>,
    values: Vec<C64>,
    total: C64,
}

impl Breakpoints {
    fn new(lambda: &EigenSequence) -> Self {
        let values: Vec<C64> = lambda
            .values()
            .iter()
            .copied()
            .filter(|z| z.norm() > 0.0)
            .collect();
        let mut acc = ComplexNeumaier::default();
        let mut prefix_sums = vec![C64::new(0.0, 0.0)];
        for z in &values {
            acc.add(*z);
            prefix_sums.push(acc.value());
        }
        let mut alphas: Vec<f64> = values.iter().map(|z| 1.0 / z.norm()).collect();
        alphas.dedup();
        Self {
            alphas,
            total: acc.value(),
            prefix_sums,
            values,
        }
    }

    /// `P(alpha)`: sum of the `lambda_k` with `alpha |lambda_k| >= 1`.
    fn partial(&self, alpha: f64) -> C64 {
        let k = self
            .values
            .partition_point(|z| reaches_unit(alpha * z.norm()));
        self.prefix_sums[k]
    }

    fn last(&self) -> f64 {
        self.alphas.last().copied().unwrap_or(0.0)
    }
}

/// Ascending distinct `1 / T_n` for the first `count` terms of `t`.
fn witness_breakpoints(t: &ScalarSequence, count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = t
        .iter()
        .take(count)
        .take_while(|&x| x > 0.0)
        .map(|x| 1.0 / x)
        .collect();
    out.dedup();
    out
}

fn merged_grid(a: &[f64], b: &[f64], upto: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = a.iter().chain(b).copied().filter(|&x| x <= upto).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn to_usize(n: u64) -> usize {
    usize::try_from(n).unwrap_or(usize::MAX)
}

/// Smallest `alpha >= 0` past which `slope alpha + intercept >= s alpha`.
fn linear_crossing(slope: f64, intercept: f64, s: f64) -> Option<f64> {
    if slope > s * (1.0 + 1e-12) {
        Some((-intercept / (slope - s)).max(0.0))
    } else if slope >= s * (1.0 - 1e-12) && intercept >= 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// `|chi(alpha lambda)| <= nu(alpha T)` for every `alpha > 0`.
pub fn condition4_check(lambda: &EigenSequence, t: &ScalarSequence) -> Result<ConditionCheck> {
    t.validate()?;
    let bp = Breakpoints::new(lambda);
    let mut check = ConditionCheck {
        holds: true,
        worst_ratio: 0.0,
        witness_scale: 0,
        failing_alpha: None,
        checked_points: 0,
    };
    if bp.alphas.is_empty() {
        return Ok(check);
    }
    let s_abs = bp.total.norm();
    let bound = t.linear_count_bound();
    let zero_total = s_abs == 0.0;
    // explicit region [first lambda breakpoint, end)
    let certified_from = if zero_total {
        Some(bp.last())
    } else {
        linear_crossing(bound.slope, bound.intercept, s_abs)
            .map(|cross| cross.max(bound.valid_from).max(bp.last()))
    };
    let end = certified_from.unwrap_or_else(|| bp.last().max(bound.valid_from));
    let mut t_count = to_usize(t.count_at_least_scaled(end));
    if certified_from.is_none() {
        t_count = t_count.saturating_add(EXTRA_BREAKPOINTS);
    }
    let t_alphas = witness_breakpoints(t, t_count);
    check.witness_scale = t_count.min(t.support_len().unwrap_or(t_count));
    let scan_end = match certified_from {
        Some(e) => e,
        None => t_alphas.last().copied().unwrap_or(0.0).max(end),
    };
    let mut grid = merged_grid(&bp.alphas, &t_alphas, scan_end);
    if let Some(e) = certified_from {
        if grid.last().is_none_or(|&g| g < e) {
            grid.push(e);
        }
    }
    let record = |alpha_lhs: f64, p: C64, alpha_rhs: f64, check: &mut ConditionCheck| {
        let lhs = alpha_lhs * p.norm();
        let rhs = t.count_at_least_scaled(alpha_rhs) as f64;
        check.checked_points += 1;
        check.worst_ratio = check.worst_ratio.max(lhs / rhs.max(1.0));
        if lhs > rhs + CONDITION_TOL * (1.0 + rhs) && check.holds {
            check.holds = false;
            check.failing_alpha = Some(alpha_lhs);
        }
    };
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        // sup of |chi| on [a, b) is the left limit at b
        record(b, bp.partial(a), a, &mut check);
    }
    if certified_from.is_none() {
        // unbounded last interval or an uncertifiable tail
        let last = *grid.last().expect("nonempty grid");
        match t.support_len() {
            Some(len) => {
                let nu_max = t.count_at_least_scaled(last).max(len as u64) as f64;
                let alpha = last.max((nu_max + 1.0) / s_abs);
                record(alpha, bp.total, alpha, &mut check);
            }
            None if check.holds => {
                return Err(Error::Unsupported(format!(
                    "cannot certify |chi(alpha lambda)| <= nu(alpha T) beyond alpha = {last}: \
                     the witness grows too slowly relative to |trace| = {s_abs}"
                )));
            }
            None => {}
        }
    }
    Ok(check)
}

/// `|chi(alpha lambda)| <= mu(alpha T)` for every `alpha > 0`.
pub fn condition5_check(lambda: &EigenSequence, t: &ScalarSequence) -> Result<ConditionCheck> {
    t.validate()?;
    let bp = Breakpoints::new(lambda);
    let mut check = ConditionCheck {
        holds: true,
        worst_ratio: 0.0,
        witness_scale: 0,
        failing_alpha: None,
        checked_points: 0,
    };
    if bp.alphas.is_empty() {
        return Ok(check);
    }
    let s_abs = bp.total.norm();
    let bound = t.linear_count_bound();
    let e = std::f64::consts::E;
    // mu(alpha T) >= nu(alpha T / e) >= slope alpha / e + intercept
    let certified_from = if s_abs == 0.0 {
        Some(bp.last())
    } else {
        linear_crossing(bound.slope / e, bound.intercept, s_abs)
            .map(|cross| cross.max(e * bound.valid_from).max(bp.last()))
    };
    let end = certified_from.unwrap_or_else(|| bp.last().max(e * bound.valid_from));
    let mut t_count = to_usize(t.count_at_least_scaled(end));
    if certified_from.is_none() {
        t_count = t_count.saturating_add(EXTRA_BREAKPOINTS);
    }
    let t_alphas = witness_breakpoints(t, t_count);
    check.witness_scale = t_count.min(t.support_len().unwrap_or(t_count));
    let scan_end = match certified_from {
        Some(c) => c,
        None => t_alphas.last().copied().unwrap_or(0.0).max(end),
    };
    let mut grid = merged_grid(&bp.alphas, &t_alphas, scan_end);
    if let Some(c) = certified_from {
        if grid.last().is_none_or(|&g| g < c) {
            grid.push(c);
        }
    }
    let record = |alpha: f64, p: C64, check: &mut ConditionCheck| -> Result<()> {
        let lhs = alpha * p.norm();
        let rhs = t.log_mass(alpha)?;
        check.checked_points += 1;
        check.worst_ratio = check.worst_ratio.max(lhs / rhs.max(1.0));
        if lhs > rhs + CONDITION_TOL * (1.0 + rhs) && check.holds {
            check.holds = false;
            check.failing_alpha = Some(alpha);
        }
        Ok(())
    };
    // alpha -> mu(alpha T) - alpha |P| is concave between grid points, so the
    // endpoints of every interval suffice
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let p = bp.partial(a);
        record(a, p, &mut check)?;
        record(b, p, &mut check)?;
    }
    if grid.len() == 1 {
        record(grid[0], bp.partial(grid[0]), &mut check)?;
    }
    if certified_from.is_none() {
        let last = *grid.last().expect("nonempty grid");
        match t.support_len() {
            Some(_) => {
                // mu grows like ln(alpha); double until the linear side overtakes it
                let mut alpha = last.max(1.0 / s_abs);
                for _ in 0..2000 {
                    let lhs = alpha * s_abs;
                    let rhs = t.log_mass(alpha)?;
                    if lhs > rhs + CONDITION_TOL * (1.0 + rhs) {
                        break;
                    }
                    alpha *= 2.0;
                }
                record(alpha, bp.total, &mut check)?;
            }
            None if check.holds => {
                return Err(Error::Unsupported(format!(
                    "cannot certify |chi(alpha lambda)| <= mu(alpha T) beyond alpha = {last}"
                )));
            }
            None => {}
        }
    }
    Ok(check)
}

/// Max-envelope witness `u` with `c_n <= u_n`; the bound is re-checked.
pub fn condition3_witness(lambda: &EigenSequence) -> Result<ScalarSequence> {
    let u = max_envelope(lambda);
    let check = cesaro_bound_check(lambda, &u, 1.0)?;
    if !check.holds {
        return Err(Error::Invariant(format!(
            "max envelope falls below the Cesaro means at n = {:?}",
            check.failing_n
        )));
    }
    Ok(u)
}

/// Pointwise maximum of a witness with `|lambda_n|`.
pub fn dominate_moduli(lambda: &EigenSequence, t: &ScalarSequence) -> Result<ScalarSequence> {
    let moduli = ScalarSequence::Finite {
        values: lambda.moduli(),
    };
    t.pointwise_max(&moduli)
}

/// Four copies of `T`, merged.
pub fn witness_3_to_4(t: &ScalarSequence) -> ScalarSequence {
    let two = merge_decreasing(t, t);
    merge_decreasing(&two, &two)
}

/// `c_n <= factor * s_n(T)` for every `n >= 1`.
pub fn cesaro_bound_check(
    lambda: &EigenSequence,
    t: &ScalarSequence,
    factor: f64,
) -> Result<BoundCheck> {
    t.validate()?;
    let c = cesaro_sequence_with_scale(&SpectrumSource::Finite(lambda.clone()), 0, Some(0.0))?;
    let n = c.len();
    let s_abs = c.partial_sum.norm();
    let mut check = BoundCheck {
        holds: true,
        worst_ratio: 0.0,
        failing_n: None,
        scanned: n,
    };
    let visit = |k: usize, cn: f64, tn: f64, check: &mut BoundCheck| {
        let rhs = factor * tn;
        if cn > 0.0 {
            check.worst_ratio =
                check
                    .worst_ratio
                    .max(if rhs > 0.0 { cn / rhs } else { f64::INFINITY });
        }
        if cn > rhs * (1.0 + 1e-12) && check.holds {
            check.holds = false;
            check.failing_n = Some(k);
        }
    };
    let mut t_iter = t.iter();
    for (k, &cn) in c.prefix.iter().enumerate() {
        visit(k + 1, cn, t_iter.next().unwrap_or(0.0), &mut check);
    }
    if s_abs == 0.0 {
        return Ok(check);
    }
    // past the spectrum c_k = |S| / k; T_k >= K / (k - I) once the linear count
    // bound applies, so factor K / (k - I) >= |S| / k for k >= k_star
    let bound = t.linear_count_bound();
    let k_star = if let Some(k) = exact_harmonic_crossing(t, factor, s_abs) {
        Some(k)
    } else if factor * bound.slope * (1.0 - 1e-10) > s_abs {
        let from_bound = bound.slope * bound.valid_from + bound.intercept;
        let crossing = -s_abs * bound.intercept / (factor * bound.slope * (1.0 - 1e-10) - s_abs);
        Some(from_bound.max(crossing).max(0.0).ceil() as usize + 1)
    } else {
        None
    };
    let scan_to = match (k_star, t.support_len()) {
        (Some(k), _) => k.max(n),
        (None, Some(len)) => len.max(n) + 1,
        (None, None) => n + EXTRA_BREAKPOINTS * 16,
    };
    for k in (n + 1)..=scan_to {
        visit(
            k,
            s_abs / k as f64,
            t_iter.next().unwrap_or(0.0),
            &mut check,
        );
    }
    check.scanned = scan_to;
    if k_star.is_none() && t.support_len().is_none() && check.holds {
        return Err(Error::Unsupported(format!(
            "cannot certify c_n <= {factor} s_n(T) beyond n = {scan_to}"
        )));
    }
    Ok(check)
}

/// For `T_n = coeff / (n - offset)` past the head, the index from which
/// `factor T_n >= |S| / n` holds for good.
fn exact_harmonic_crossing(t: &ScalarSequence, factor: f64, s_abs: f64) -> Option<usize> {
    let ScalarSequence::Harmonic {
        head,
        coeff,
        offset,
    } = t
    else {
        return None;
    };
    let fc = factor * coeff;
    let offset = *offset as f64;
    if fc > s_abs * (1.0 + 1e-12) {
        Some(head.len() + (-s_abs * offset / (fc - s_abs)).max(0.0).ceil() as usize + 1)
    } else if fc >= s_abs * (1.0 - 1e-12) && offset >= 0.0 {
        Some(head.len() + 1)
    } else {
        None
    }
}

/// `2T`, after checking the preconditions `s_n(T) >= |lambda_n|` and condition (4),
/// and the conclusion `c_n <= 2 s_n(T)`.
pub fn witness_4_to_3(lambda: &EigenSequence, t: &ScalarSequence) -> Result<ScalarSequence> {
    let mut t_iter = t.iter();
    for (k, z) in lambda.values().iter().enumerate() {
        let tk = t_iter.next().unwrap_or(0.0);
        if z.norm() > tk * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "s_{}(T) = {tk} is below |lambda_{}| = {}",
                k + 1,
                k + 1,
                z.norm()
            )));
        }
    }
    let c4 = condition4_check(lambda, t)?;
    if !c4.holds {
        return Err(Error::Precondition(format!(
            "condition (4) fails at alpha = {:?}",
            c4.failing_alpha
        )));
    }
    let check = cesaro_bound_check(lambda, t, 2.0)?;
    if !check.holds {
        return Err(Error::Precondition(format!(
            "c_n > 2 s_n(T) at n = {}",
            check.failing_n.expect("failing index")
        )));
    }
    Ok(t.scaled(2.0))
}

/// Smallest nonincreasing `T >= |lambda|` satisfying condition (4):
/// `T_k = max(|lambda_k|, 1 / alpha_k)` with `alpha_k = inf{alpha : |chi(alpha lambda)| > k - 1}`.
pub fn minimal_condition4_witness(lambda: &EigenSequence) -> ScalarSequence {
    let bp = Breakpoints::new(lambda);
    let moduli = lambda.moduli();
    let s_abs = bp.total.norm();
    let alpha_k = |k: usize| -> f64 {
        let level = (k - 1) as f64;
        for (i, &a) in bp.alphas.iter().enumerate() {
            let p = bp.partial(a).norm();
            if p == 0.0 {
                continue;
            }
            let candidate = a.max(level / p);
            let next = bp.alphas.get(i + 1).copied().unwrap_or(f64::INFINITY);
            // |chi| exceeds the level strictly after `candidate` within [a, next)
            if candidate < next {
                return candidate;
            }
        }
        f64::INFINITY
    };
    let head_len = if s_abs > 0.0 {
        moduli
            .len()
            .max((1.0 + s_abs * bp.last()).ceil() as usize + 1)
    } else {
        moduli.len().max(
            (1..)
                .find(|&k| alpha_k(k).is_infinite())
                .map(|k| k - 1)
                .unwrap_or(0),
        )
    };
    let mut head: Vec<f64> = (1..=head_len)
        .map(|k| {
            let from_chi = 1.0 / alpha_k(k);
            moduli.get(k - 1).copied().unwrap_or(0.0).max(from_chi)
        })
        .collect();
    for k in 1..head.len() {
        head[k] = head[k].min(head[k - 1]);
    }
    if s_abs > 0.0 {
        ScalarSequence::Harmonic {
            head,
            coeff: s_abs,
            offset: 1,
        }
    } else {
        ScalarSequence::Finite { values: head }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    InComJ,
    NotInComJ,
    UndecidedAtScale,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::InComJ => "InComJ",
            Self::NotInComJ => "NotInComJ",
            Self::UndecidedAtScale => "UndecidedAtScale",
        }
    }
}

/// Hermitian-part comparison for matrix inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCrossCheck {
    pub hermitian_condition2: MembershipVerdict,
    pub skew_condition2: MembershipVerdict,
    /// `|chi(H) - Re chi(T)|`.
    pub real_deviation: f64,
    /// `|chi(K) - Im chi(T)|`.
    pub imag_deviation: f64,
    /// `C2 mu(2|T|)`.
    pub bound: f64,
    pub c2: f64,
}

/// Witness cycle on a finite spectrum model.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCycle {
    /// Description of the finite model the witnesses were built on.
    pub model: String,
    pub envelope: ScalarSequence,
    pub condition3: BoundCheck,
    pub condition4: ConditionCheck,
    pub condition5: ConditionCheck,
    pub condition3_from_4: BoundCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub ideal: String,
    pub condition2: MembershipVerdict,
    pub cesaro: CesaroSequence,
    pub witnesses: Option<WitnessCycle>,
    pub verdict: Verdict,
    pub note: String,
    pub hermitian: Option<HermitianCrossCheck>,
}

pub enum CriterionInput {
    Matrix(ComplexMatrix),
    Spectrum(SpectrumSource),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionOptions {
    /// Terms generated for symbolic laws.
    pub prefix_len: usize,
    /// Terms of a symbolic law used for the finite witness model.
    pub witness_len: usize,
}

impl Default for CriterionOptions {
    fn default() -> Self {
        Self {
            prefix_len: DEFAULT_PREFIX,
            witness_len: 200,
        }
    }
}

/// `diag(c) in J` for the Cesaro means of the spectrum.
pub fn condition2(
    source: &SpectrumSource,
    ideal: &IdealSpec,
    prefix_len: usize,
) -> Result<MembershipVerdict> {
    Ok(crate::ideals::cesaro_sequence(source, prefix_len)?.membership(ideal))
}

/// `C2 = 4 C1 + 52 / ln 2`.
pub fn derived_c2(c1: f64) -> f64 {
    4.0 * c1 + 52.0 / std::f64::consts::LN_2
}

/// Builds and checks the witness chain (3) -> (4) -> (5) and (4) -> (3).
pub fn witness_cycle(lambda: &EigenSequence, model: String) -> Result<WitnessCycle> {
    let envelope = condition3_witness(lambda)?;
    let condition3 = cesaro_bound_check(lambda, &envelope, 1.0)?;
    let normalized = dominate_moduli(lambda, &envelope)?;
    let t4 = witness_3_to_4(&normalized);
    let condition4 = condition4_check(lambda, &t4)?;
    let condition5 = condition5_check(lambda, &t4.scaled(std::f64::consts::E))?;
    let condition3_from_4 = cesaro_bound_check(lambda, &t4, 2.0)?;
    Ok(WitnessCycle {
        model,
        envelope,
        condition3,
        condition4,
        condition5,
        condition3_from_4,
    })
}

pub fn commutator_membership(
    input: &CriterionInput,
    ideal: &IdealSpec,
    pair: &CutoffPair,
    options: CriterionOptions,
) -> Result<CriterionReport> {
    let (source, scale, matrix) = match input {
        CriterionInput::Matrix(m) => {
            let lambda = eigenvalue_sequence(m)?;
            (
                SpectrumSource::Finite(lambda),
                Some(m.frobenius_norm()),
                Some(m),
            )
        }
        CriterionInput::Spectrum(s) => (s.clone(), None, None),
    };
    let scale = scale.map(|f| f.max(abs_sum(&source)));
    let cesaro = cesaro_sequence_with_scale(&source, options.prefix_len, scale)?;
    let condition2 = cesaro.membership(ideal);
    let finite_model = match &source {
        SpectrumSource::Finite(lambda) => Some((lambda.clone(), "finite spectrum".to_string())),
        SpectrumSource::Prefix(values) => Some((
            EigenSequence::from_values(values.clone())?,
            format!("prefix of {} eigenvalues with zero tail", values.len()),
        )),
        SpectrumSource::Law(law) => {
            let n = options.witness_len.max(1);
            let values = (1..=n as u64).map(|k| C64::new(law.term(k), 0.0)).collect();
            Some((
                EigenSequence::from_values(values)?,
                format!("first {n} terms of the law with zero tail"),
            ))
        }
    };
    let witnesses = match finite_model {
        Some((lambda, model)) => Some(witness_cycle(&lambda, model)?),
        None => None,
    };
    let (verdict, note) = if !ideal.is_geometrically_stable() {
        (
            Verdict::UndecidedAtScale,
            format!(
                "{ideal} is not known to be geometrically stable; the Cesaro condition is {:?} \
                 but need not characterize the commutator subspace",
                condition2.status
            ),
        )
    } else {
        match condition2.status {
            MembershipStatus::In => (Verdict::InComJ, "Cesaro means lie in the ideal".to_string()),
            MembershipStatus::Out => (
                Verdict::NotInComJ,
                "Cesaro means fall outside the ideal".to_string(),
            ),
            MembershipStatus::UndecidedAtScale => (
                Verdict::UndecidedAtScale,
                "tail of the spectrum is unknown; prefix evidence only".to_string(),
            ),
        }
    };
    let hermitian = match matrix {
        Some(m) => Some(hermitian_cross_check(m, ideal, pair)?),
        None => None,
    };
    Ok(CriterionReport {
        ideal: ideal.to_string(),
        condition2,
        cesaro,
        witnesses,
        verdict,
        note,
        hermitian,
    })
}

fn abs_sum(source: &SpectrumSource) -> f64 {
    match source {
        SpectrumSource::Finite(l) => l.moduli().iter().sum(),
        _ => 0.0,
    }
}

fn hermitian_cross_check(
    t: &ComplexMatrix,
    ideal: &IdealSpec,
    pair: &CutoffPair,
) -> Result<HermitianCrossCheck> {
    let (h, k) = hermitian_split(t);
    let lt = eigenvalue_sequence(t)?;
    let lh = eigenvalue_sequence(&h)?;
    let lk = eigenvalue_sequence(&k)?;
    let verdict_of = |m: &ComplexMatrix, l: &EigenSequence| -> Result<MembershipVerdict> {
        let scale = m.frobenius_norm().max(l.moduli().iter().sum());
        Ok(
            cesaro_sequence_with_scale(&SpectrumSource::Finite(l.clone()), 0, Some(scale))?
                .membership(ideal),
        )
    };
    let abs2 = eigenvalue_sequence(&abs_operator(t)?.scale_real(2.0))?;
    let c2 = derived_c2(pair.c1);
    let chi_t = chi(&lt);
    Ok(HermitianCrossCheck {
        hermitian_condition2: verdict_of(&h, &lh)?,
        skew_condition2: verdict_of(&k, &lk)?,
        real_deviation: (chi(&lh).re - chi_t.re).abs(),
        imag_deviation: (chi(&lk).re - chi_t.im).abs(),
        bound: c2 * mu(&abs2),
        c2,
    })
}

/// Singular-value model `|lambda_n|` of the diagonal operator.
pub fn moduli_sequence(lambda: &EigenSequence) -> ScalarSequence {
    ScalarSequence::Finite {
        values: lambda.moduli(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::EigenLaw;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn pair() -> &'static CutoffPair {
        static PAIR: OnceLock<CutoffPair> = OnceLock::new();
        PAIR.get_or_init(|| CutoffPair::new().unwrap())
    }

    fn real(values: &[f64]) -> EigenSequence {
        EigenSequence::from_real(values).unwrap()
    }

    fn finite(values: &[f64]) -> ScalarSequence {
        ScalarSequence::finite(values.to_vec()).unwrap()
    }

    #[test]
    fn condition4_single_unit_value() {
        // chi(alpha) = alpha for alpha >= 1 outgrows nu(alpha T) = 1 once alpha > 1
        let check = condition4_check(&real(&[1.0]), &finite(&[1.0])).unwrap();
        assert!(!check.holds);
        assert!(check.failing_alpha.unwrap() > 1.0);
        // with a harmonic tail T_n = 1/n the count keeps up
        let harmonic = ScalarSequence::Harmonic {
            head: vec![],
            coeff: 1.0,
            offset: 0,
        };
        let tight = condition4_check(&real(&[1.0]), &harmonic);
        assert!(tight.is_err() || !tight.unwrap().holds);
        let doubled = witness_3_to_4(&harmonic);
        assert!(condition4_check(&real(&[1.0]), &doubled).unwrap().holds);
    }

    #[test]
    fn condition4_constructed_failure() {
        let check = condition4_check(&real(&[2.0, 2.0]), &finite(&[1.0, 0.0])).unwrap();
        assert!(!check.holds);
        let alpha = check.failing_alpha.unwrap();
        assert!(alpha <= 1.0 + 1e-12, "{alpha}");
    }

    #[test]
    fn condition5_examples() {
        let zero = condition5_check(&real(&[0.0, 0.0]), &finite(&[1.0])).unwrap();
        assert!(zero.holds);
        let fail = condition5_check(&real(&[10.0]), &finite(&[1.0])).unwrap();
        assert!(!fail.holds);
        assert!((fail.failing_alpha.unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn envelope_witness_examples() {
        let u = condition3_witness(&real(&[1.0, -1.0, 0.5])).unwrap();
        let p = u.prefix(3);
        assert_eq!(p[0], 1.0);
        assert!((p[1] - 1.0 / 6.0).abs() < 1e-15 && (p[2] - 1.0 / 6.0).abs() < 1e-15);
        let single = condition3_witness(&real(&[1.0])).unwrap();
        assert_eq!(single.prefix(3), vec![1.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn four_copies_layout() {
        let t = finite(&[1.0, 0.5]);
        let t4 = witness_3_to_4(&t);
        assert_eq!(
            t4.prefix(9),
            vec![1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.0]
        );
        for alpha in [0.5, 1.0, 1.5, 2.0, 3.0] {
            assert_eq!(
                t4.count_at_least_scaled(alpha),
                4 * t.count_at_least_scaled(alpha)
            );
        }
    }

    #[test]
    fn witness_4_to_3_examples() {
        let doubled = witness_4_to_3(
            &real(&[1.0]),
            &witness_3_to_4(&ScalarSequence::Harmonic {
                head: vec![],
                coeff: 1.0,
                offset: 0,
            }),
        )
        .unwrap();
        assert_eq!(doubled.value(1), 2.0);
        // precondition: T must dominate the moduli
        assert!(matches!(
            witness_4_to_3(&real(&[3.0]), &finite(&[1.0, 1.0, 1.0])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn minimal_witness_shows_factor_two_is_needed() {
        let lambda = real(&[1.998, 1.0, 1.0]);
        let t = minimal_condition4_witness(&lambda);
        t.validate().unwrap();
        assert!(condition4_check(&lambda, &t).unwrap().holds);
        let tight = cesaro_bound_check(&lambda, &t, 1.0).unwrap();
        assert!(!tight.holds);
        assert_eq!(tight.failing_n, Some(3));
        assert!(cesaro_bound_check(&lambda, &t, 2.0).unwrap().holds);
    }

    #[test]
    fn matrix_verdicts_follow_the_trace() {
        let p = pair();
        let s1 = IdealSpec::schatten(1.0).unwrap();
        let s2 = IdealSpec::schatten(2.0).unwrap();
        let opts = CriterionOptions::default();
        let traced = ComplexMatrix::real_diagonal(&[2.0, 1.0]).unwrap();
        let r =
            commutator_membership(&CriterionInput::Matrix(traced.clone()), &s1, p, opts).unwrap();
        assert_eq!(r.verdict, Verdict::NotInComJ);
        let r = commutator_membership(&CriterionInput::Matrix(traced), &s2, p, opts).unwrap();
        assert_eq!(r.verdict, Verdict::InComJ);
        let nilpotent = ComplexMatrix::new(
            3,
            vec![
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(3.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let r = commutator_membership(&CriterionInput::Matrix(nilpotent), &s1, p, opts).unwrap();
        assert_eq!(r.verdict, Verdict::InComJ);
        let w = r.witnesses.unwrap();
        assert!(w.condition4.holds && w.condition5.holds && w.condition3_from_4.holds);
        let h = r.hermitian.unwrap();
        assert!(h.real_deviation <= h.bound + 1e-9);
    }

    #[test]
    fn symbolic_laws() {
        let p = pair();
        let s1 = IdealSpec::schatten(1.0).unwrap();
        let opts = CriterionOptions {
            prefix_len: 10_000,
            witness_len: 50,
        };
        let alt = CriterionInput::Spectrum(SpectrumSource::Law(EigenLaw::Power {
            c: 1.0,
            a: 1.0,
            alternating: true,
        }));
        let r = commutator_membership(&alt, &s1, p, opts).unwrap();
        assert_eq!(r.verdict, Verdict::NotInComJ);
        let w = r.witnesses.unwrap();
        assert!(w.condition4.holds && w.condition5.holds);
        let pos = CriterionInput::Spectrum(SpectrumSource::Law(EigenLaw::Power {
            c: 1.0,
            a: 1.0,
            alternating: false,
        }));
        assert_eq!(
            commutator_membership(&pos, &s1, p, opts).unwrap().verdict,
            Verdict::NotInComJ
        );
        let zero = CriterionInput::Spectrum(SpectrumSource::Finite(real(&[0.0, 0.0])));
        for ideal in [s1.clone(), IdealSpec::weak_lp(0.3).unwrap()] {
            assert_eq!(
                commutator_membership(&zero, &ideal, p, opts)
                    .unwrap()
                    .verdict,
                Verdict::InComJ
            );
        }
    }

    #[test]
    fn unstable_custom_ideal_is_undecided() {
        fn everything(_: &crate::spectral::DecayProfile) -> Option<bool> {
            Some(true)
        }
        let custom = IdealSpec::Custom {
            name: "all".into(),
            predicate: everything,
            geometrically_stable: false,
        };
        let input = CriterionInput::Spectrum(SpectrumSource::Finite(real(&[1.0])));
        let r =
            commutator_membership(&input, &custom, pair(), CriterionOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::UndecidedAtScale);
        assert_eq!(r.condition2.status, MembershipStatus::In);
    }

    proptest! {
        #[test]
        fn cycle_on_random_spectra(raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..25)) {
            let lambda = EigenSequence::from_values(raw.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let w = witness_cycle(&lambda, "test".into()).unwrap();
            prop_assert!(w.condition3.holds);
            prop_assert!(w.condition4.holds, "{:?}", w.condition4);
            prop_assert!(w.condition4.worst_ratio <= 1.0 + 1e-9);
            prop_assert!(w.condition5.holds, "{:?}", w.condition5);
            prop_assert!(w.condition3_from_4.holds);
        }

        #[test]
        fn minimal_witness_satisfies_condition4(raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..15)) {
            let lambda = EigenSequence::from_values(raw.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let t = minimal_condition4_witness(&lambda);
            prop_assert!(t.validate().is_ok());
            prop_assert!(condition4_check(&lambda, &t).unwrap().holds);
            prop_assert!(cesaro_bound_check(&lambda, &t, 2.0).unwrap().holds);
        }

        #[test]
        fn normal_split_slack(raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..15), alpha in 0.05f64..5.0) {
            // diagonal N with H = diag(Re lambda): |chi(alpha H) - Re chi(alpha N)| <= nu(alpha N)
            let values: Vec<C64> = raw.iter().map(|&(a, b)| C64::new(a, b)).collect();
            let n = EigenSequence::from_values(values.iter().map(|z| z * alpha).collect()).unwrap();
            let h = EigenSequence::from_values(values.iter().map(|z| C64::new(z.re * alpha, 0.0)).collect()).unwrap();
            let lhs = (chi(&h).re - chi(&n).re).abs();
            prop_assert!(lhs <= crate::functionals::nu(&n) as f64 + 1e-9);
        }
    }
}
