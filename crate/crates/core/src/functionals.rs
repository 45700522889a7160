//! Threshold functionals of an eigenvalue sequence.
//!
//! `nu` counts eigenvalues of modulus at least 1, `mu` sums `log_+|lambda|`,
//! `chi` sums the eigenvalues of modulus at least 1 and `chi_phi` is its
//! smoothed version. Moduli are compared with 1 after 12-digit rounding.

use rayon::prelude::*;

use crate::cutoffs::CutoffPair;
use crate::numeric::{reaches_unit, ComplexNeumaier, Neumaier};
use crate::spectral::{eigenvalue_sequence, ComplexMatrix, EigenSequence};
use crate::{Error, Result, C64};

pub fn nu(lambda: &EigenSequence) -> usize {
    lambda
        .values()
        .iter()
        .filter(|z| reaches_unit(z.norm()))
        .count()
}

pub fn mu(lambda: &EigenSequence) -> f64 {
    let mut acc = Neumaier::default();
    for z in lambda.values() {
        let r = z.norm();
        if r > 1.0 {
            acc.add(r.ln());
        }
    }
    acc.value()
}

pub fn chi(lambda: &EigenSequence) -> C64 {
    let mut acc = ComplexNeumaier::default();
    for z in lambda.values().iter().filter(|z| reaches_unit(z.norm())) {
        acc.add(*z);
    }
    acc.value()
}

/// `sum lambda_n phi(log|lambda_n|)`.
pub fn chi_phi(lambda: &EigenSequence, pair: &CutoffPair) -> C64 {
    let mut acc = ComplexNeumaier::default();
    for z in lambda.values() {
        let r = z.norm();
        if r > 1.0 {
            acc.add(z * pair.phi.value(r.ln()));
        }
    }
    acc.value()
}

/// `sum f(lambda_n)` over eigenvalues with `|lambda_n| > delta`, for `f`
/// vanishing on the disc of radius `delta`.
pub fn f_hat(lambda: &EigenSequence, f: &dyn Fn(C64) -> f64, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!(
            "vanishing radius must be positive and finite, got {delta}"
        )));
    }
    let mut acc = Neumaier::default();
    for z in lambda.values().iter().filter(|z| z.norm() > delta) {
        acc.add(f(*z));
    }
    Ok(acc.value())
}

/// Trapezoid average of `f_hat(S + e^{i theta} T)` over `nodes` equispaced angles.
/// Node values are reduced in index order, so the result does not depend on
/// the thread count.
pub fn circle_mean(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    f: &(dyn Fn(C64) -> f64 + Sync),
    delta: f64,
    nodes: usize,
) -> Result<f64> {
    if nodes < 8 {
        return Err(Error::Domain(format!("need at least 8 nodes, got {nodes}")));
    }
    if s.dim() != t.dim() {
        return Err(Error::InvalidMatrix(format!(
            "dimensions differ: {} vs {}",
            s.dim(),
            t.dim()
        )));
    }
    let values: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / nodes as f64;
            let m = s + &t.scale(C64::from_polar(1.0, theta));
            f_hat(&eigenvalue_sequence(&m)?, f, delta)
        })
        .collect::<Result<_>>()?;
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    Ok(acc.value() / nodes as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalReport {
    pub nu: usize,
    pub mu: f64,
    pub chi: C64,
    pub chi_phi: C64,
}

impl FunctionalReport {
    /// All four functionals, checking `|chi - chi_phi| <= e nu`.
    pub fn new(lambda: &EigenSequence, pair: &CutoffPair) -> Result<Self> {
        let report = Self {
            nu: nu(lambda),
            mu: mu(lambda),
            chi: chi(lambda),
            chi_phi: chi_phi(lambda, pair),
        };
        let gap = (report.chi - report.chi_phi).norm();
        let bound = std::f64::consts::E * report.nu as f64;
        if gap > bound + 1e-9 * (1.0 + bound) {
            return Err(Error::Invariant(format!(
                "|chi - chi_phi| = {gap} exceeds e nu = {bound}"
            )));
        }
        Ok(report)
    }
}
