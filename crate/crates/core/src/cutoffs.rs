//! Smooth step `phi`, convex corrector `psi`, and the functions `g` and `h`.
//!
//! `phi(x) = b(x) / (b(x) + b(1 - x))` with `b(t) = exp(-1/t)` for `t > 0`.
//! `psi` is the double primitive of `psi'' = e^x (|phi''| + 2 phi')` on
//! `[0, 1]`, vanishing for `x <= 0` and affine for `x >= 1`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::{Error, Result, C64};

/// Cached nodes of `psi` on `[0, 1]` sit at multiples of `1 / NODE_COUNT`.
const NODE_COUNT: usize = 64;
/// Absolute tolerance for the cached primitives.
pub const PSI_TOLERANCE: f64 = 1e-10;
const GL_ORDER: usize = 16;

/// Exponent `w = 1/x - 1/(1-x)` with `phi = 1 / (1 + e^w)`.
fn exponent(x: f64) -> f64 {
    1.0 / x - 1.0 / (1.0 - x)
}

/// The canonical C-infinity step, 0 on `(-inf, 0]` and 1 on `[1, inf)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothStep;

impl SmoothStep {
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            0.5 * (1.0 - (0.5 * exponent(x)).tanh())
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let w = exponent(x);
        if w.abs() > 700.0 {
            return 0.0;
        }
        let g = 1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x));
        bump(w) * g
    }

    pub fn d2(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let w = exponent(x);
        if w.abs() > 700.0 {
            return 0.0;
        }
        let y = 1.0 - x;
        let g = 1.0 / (x * x) + 1.0 / (y * y);
        let dg = -2.0 / (x * x * x) + 2.0 / (y * y * y);
        let p = bump(w);
        // phi' (1 - 2 phi) g + phi (1 - phi) g'
        p * g * g * (0.5 * w).tanh() + p * dg
    }
}

/// `phi (1 - phi)` written without cancellation.
fn bump(w: f64) -> f64 {
    let c = (0.5 * w).cosh();
    0.25 / (c * c)
}

pub fn make_phi() -> SmoothStep {
    SmoothStep
}

/// `psi''` on the whole line.
pub fn psi_second(phi: &SmoothStep, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        x.exp() * (phi.d2(x).abs() + 2.0 * phi.d1(x))
    }
}

/// Convex corrector with `psi = psi' = 0` at the origin.
#[derive(Debug, Clone)]
pub struct ConvexCorrector {
    phi: SmoothStep,
    rule: GaussLegendre,
    value_nodes: Vec<f64>,
    slope_nodes: Vec<f64>,
}

/// Builds `psi` by integrating `psi''` twice between cached nodes.
pub fn make_psi(phi: &SmoothStep) -> Result<ConvexCorrector> {
    let rule = gl_rule();
    let step = 1.0 / NODE_COUNT as f64;
    let local_tol = PSI_TOLERANCE / (4.0 * NODE_COUNT as f64);
    let mut value_nodes = vec![0.0; NODE_COUNT + 1];
    let mut slope_nodes = vec![0.0; NODE_COUNT + 1];
    for i in 1..=NODE_COUNT {
        let (a, b) = ((i - 1) as f64 * step, i as f64 * step);
        let slope_gain = adaptive_gl(&rule, &|u| psi_second(phi, u), a, b, local_tol)?;
        let curvature = adaptive_gl(&rule, &|u| (b - u) * psi_second(phi, u), a, b, local_tol)?;
        slope_nodes[i] = slope_nodes[i - 1] + slope_gain;
        value_nodes[i] = value_nodes[i - 1] + slope_nodes[i - 1] * step + curvature;
    }
    Ok(ConvexCorrector {
        phi: *phi,
        rule,
        value_nodes,
        slope_nodes,
    })
}

impl ConvexCorrector {
    fn locate(&self, x: f64) -> (usize, f64) {
        let i = ((x * NODE_COUNT as f64).floor() as usize).min(NODE_COUNT - 1);
        (i, i as f64 / NODE_COUNT as f64)
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.value_nodes[NODE_COUNT] + self.slope_nodes[NODE_COUNT] * (x - 1.0);
        }
        let (i, xi) = self.locate(x);
        if x == xi {
            return self.value_nodes[i];
        }
        let phi = self.phi;
        let curvature = self
            .rule
            .integrate(xi, x, |u| (x - u) * psi_second(&phi, u));
        self.value_nodes[i] + self.slope_nodes[i] * (x - xi) + curvature
    }

    pub fn d1(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.slope_nodes[NODE_COUNT];
        }
        let (i, xi) = self.locate(x);
        let phi = self.phi;
        self.slope_nodes[i] + self.rule.integrate(xi, x, |u| psi_second(&phi, u))
    }

    pub fn d2(&self, x: f64) -> f64 {
        psi_second(&self.phi, x)
    }

    /// Constant slope of `psi` on `[1, inf)`.
    pub fn slope(&self) -> f64 {
        self.slope_nodes[NODE_COUNT]
    }
}

/// `sup_{x > 0} psi(x) / x`: a scan of `(0, 10]` together with the slope `psi'(1)`,
/// which is the limit of `psi(x) / x`.
pub fn c1_constant(psi: &ConvexCorrector) -> f64 {
    const SAMPLES: usize = 10_000;
    (1..=SAMPLES)
        .map(|k| {
            let x = 10.0 * k as f64 / SAMPLES as f64;
            psi.value(x) / x
        })
        .fold(psi.slope(), f64::max)
}

/// `phi`, `psi` and `C1` bundled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CutoffPair {
    pub phi: SmoothStep,
    pub psi: ConvexCorrector,
    pub c1: f64,
    soft_log_nodes: Vec<f64>,
}

impl CutoffPair {
    pub fn new() -> Result<Self> {
        let phi = make_phi();
        let psi = make_psi(&phi)?;
        let c1 = c1_constant(&psi);
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::Invariant(format!("C1 must be positive, got {c1}")));
        }
        let step = 1.0 / NODE_COUNT as f64;
        let tol = PSI_TOLERANCE / NODE_COUNT as f64;
        let mut soft_log_nodes = vec![0.0; NODE_COUNT + 1];
        for i in 1..=NODE_COUNT {
            let (a, b) = ((i - 1) as f64 * step, i as f64 * step);
            soft_log_nodes[i] =
                soft_log_nodes[i - 1] + adaptive_gl(&psi.rule, &|u| phi.value(u), a, b, tol)?;
        }
        Ok(Self {
            phi,
            psi,
            c1,
            soft_log_nodes,
        })
    }

    /// `g(z) = psi(log|z|)`, zero on the closed unit disc.
    pub fn g(&self, z: C64) -> f64 {
        let r = z.norm();
        if r <= 1.0 {
            0.0
        } else {
            self.psi.value(r.ln())
        }
    }

    /// `h(z) = psi(log|z|) - Re(z) phi(log|z|)`, zero on the closed unit disc.
    pub fn h(&self, z: C64) -> f64 {
        let r = z.norm();
        if r <= 1.0 {
            0.0
        } else {
            let t = r.ln();
            self.psi.value(t) - z.re * self.phi.value(t)
        }
    }

    /// Smoothed `log_+|z|`: the primitive of `phi` evaluated at `log|z|`.
    pub fn soft_log_plus(&self, z: C64) -> f64 {
        let r = z.norm();
        if r <= 1.0 {
            return 0.0;
        }
        let t = r.ln();
        if t >= 1.0 {
            return self.soft_log_nodes[NODE_COUNT] + (t - 1.0);
        }
        let (i, ti) = self.psi.locate(t);
        let phi = self.phi;
        self.soft_log_nodes[i] + self.psi.rule.integrate(ti, t, |u| phi.value(u))
    }
}

pub fn eval_g(pair: &CutoffPair, z: C64) -> f64 {
    pair.g(z)
}

pub fn eval_h(pair: &CutoffPair, z: C64) -> f64 {
    pair.h(z)
}

/// Relative step of the five-point stencil: `delta = LAPLACIAN_STEP * |z|`.
pub const LAPLACIAN_STEP: f64 = 1e-4;

/// Five-point Laplacian of `f` at `z` with step `LAPLACIAN_STEP * |z|`.
pub fn laplacian_at(f: impl Fn(C64) -> f64, z: C64) -> f64 {
    let d = LAPLACIAN_STEP * z.norm();
    (f(z + d) + f(z - d) + f(z + C64::new(0.0, d)) + f(z - C64::new(0.0, d)) - 4.0 * f(z)) / (d * d)
}

/// Minimum of the five-point Laplacian of `f` over the points of a
/// `grid_size x grid_size` grid on `[-r_max, r_max]^2` lying in the annulus
/// `r_min <= |z| <= r_max`.
pub fn laplacian_grid_min(
    f: impl Fn(C64) -> f64,
    r_min: f64,
    r_max: f64,
    grid_size: usize,
) -> Result<f64> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::Domain(format!(
            "annulus needs 0 < rMin < rMax, got [{r_min}, {r_max}]"
        )));
    }
    if grid_size < 16 {
        return Err(Error::Domain(format!(
            "grid size must be at least 16, got {grid_size}"
        )));
    }
    let spacing = 2.0 * r_max / (grid_size - 1) as f64;
    let mut min = f64::INFINITY;
    for i in 0..grid_size {
        for j in 0..grid_size {
            let z = C64::new(-r_max + i as f64 * spacing, -r_max + j as f64 * spacing);
            let r = z.norm();
            if r < r_min || r > r_max {
                continue;
            }
            min = min.min(laplacian_at(&f, z));
        }
    }
    if min.is_infinite() {
        return Err(Error::Domain(
            "no grid point falls inside the annulus".into(),
        ));
    }
    Ok(min)
}

/// Minimum discrete Laplacian of `h` over the annulus.
pub fn laplacian_grid_check(
    pair: &CutoffPair,
    r_min: f64,
    r_max: f64,
    grid_size: usize,
) -> Result<f64> {
    laplacian_grid_min(|z| pair.h(z), r_min, r_max, grid_size)
}

fn gl_rule() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero order"))
}

fn adaptive_gl(
    rule: &GaussLegendre,
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    fn go(
        rule: &GaussLegendre,
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, f);
        let right = rule.integrate(m, b, f);
        if (left + right - whole).abs() <= tol {
            return Ok(left + right);
        }
        if depth == 0 {
            return Err(Error::Quadrature {
                a,
                b,
                tolerance: tol,
            });
        }
        Ok(go(rule, f, a, m, left, 0.5 * tol, depth - 1)?
            + go(rule, f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    let whole = rule.integrate(a, b, f);
    go(rule, f, a, b, whole, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn pair() -> &'static CutoffPair {
        static PAIR: OnceLock<CutoffPair> = OnceLock::new();
        PAIR.get_or_init(|| CutoffPair::new().unwrap())
    }

    /// Composite Simpson on a fixed grid.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for k in 1..panels {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn phi_boundary_values_and_symmetry() {
        let phi = make_phi();
        assert_eq!(phi.value(-1.0), 0.0);
        assert_eq!(phi.value(2.0), 1.0);
        assert_eq!(phi.value(0.5), 0.5);
        for x in [0.1, 0.3, 0.45] {
            assert!((phi.value(x) + phi.value(1.0 - x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_derivatives_match_finite_differences() {
        let phi = make_phi();
        let h = 1e-5;
        for x in [0.2, 0.5, 0.8] {
            let fd1 = (phi.value(x + h) - phi.value(x - h)) / (2.0 * h);
            assert!((phi.d1(x) - fd1).abs() < 1e-6, "phi' at {x}");
            let fd2 = (phi.d1(x + h) - phi.d1(x - h)) / (2.0 * h);
            assert!((phi.d2(x) - fd2).abs() < 1e-6, "phi'' at {x}");
        }
    }

    #[test]
    fn psi_at_one_matches_simpson_double_integral() {
        let phi = make_phi();
        // psi(1) = int_0^1 (1 - u) psi''(u) du; split at the kink of |phi''|
        let f = |u: f64| (1.0 - u) * psi_second(&phi, u);
        let oracle = simpson(f, 0.0, 0.5, 20_000) + simpson(f, 0.5, 1.0, 20_000);
        let p = pair();
        assert!(
            (p.psi.value(1.0) - oracle).abs() < 1e-8,
            "{} vs {oracle}",
            p.psi.value(1.0)
        );
        let slope_oracle = simpson(|u| psi_second(&phi, u), 0.0, 0.5, 20_000)
            + simpson(|u| psi_second(&phi, u), 0.5, 1.0, 20_000);
        assert!((p.psi.slope() - slope_oracle).abs() < 1e-8);
    }

    #[test]
    fn psi_is_affine_beyond_one() {
        let p = pair();
        assert_eq!(p.psi.value(-3.0), 0.0);
        let lhs = p.psi.value(2.0) - p.psi.value(1.5);
        assert!((lhs - 0.5 * p.psi.slope()).abs() < 1e-12);
        for x in [1.0, 1.3, 4.0, 17.0] {
            let affine = p.psi.value(1.0) + (x - 1.0) * p.psi.slope();
            assert!((p.psi.value(x) - affine).abs() < 1e-10);
        }
    }

    #[test]
    fn psi_is_continuous_across_nodes() {
        let p = pair();
        for i in 1..NODE_COUNT {
            let x = i as f64 / NODE_COUNT as f64;
            let below = p.psi.value(x - 1e-13);
            assert!((p.psi.value(x) - below).abs() < 1e-11, "jump at node {i}");
            let slope_below = p.psi.d1(x - 1e-13);
            assert!(
                (p.psi.d1(x) - slope_below).abs() < 1e-10,
                "slope jump at node {i}"
            );
        }
    }

    #[test]
    fn c1_dominates_psi_on_a_grid() {
        let p = pair();
        assert!(p.c1 >= p.psi.value(1.0));
        assert!(p.c1 >= p.psi.slope());
        let violations = (1..=10_000)
            .map(|k| 20.0 * k as f64 / 10_000.0)
            .filter(|&x| p.psi.value(x) > p.c1 * x * (1.0 + 1e-12))
            .count();
        assert_eq!(violations, 0);
        assert!(p.psi.slope() > 0.0);
    }

    #[test]
    fn g_and_h_special_values() {
        let p = pair();
        let e2 = 2f64.exp();
        assert_eq!(eval_g(p, C64::new(0.5, 0.0)), 0.0);
        assert_eq!(eval_g(p, C64::new(0.0, 0.0)), 0.0);
        assert!((eval_g(p, C64::new(e2, 0.0)) - p.psi.value(2.0)).abs() < 1e-12);
        assert_eq!(eval_h(p, C64::new(0.3, 0.2)), 0.0);
        assert!((eval_h(p, C64::new(-e2, 0.0)) - (p.psi.value(2.0) + e2)).abs() < 1e-12);
        let y = 1.7;
        assert!((eval_h(p, C64::new(0.0, y)) - p.psi.value(y.ln())).abs() < 1e-14);
    }

    #[test]
    fn laplacian_inside_unit_disc_is_zero() {
        let p = pair();
        assert_eq!(laplacian_grid_check(p, 0.1, 0.9, 64).unwrap(), 0.0);
        assert!(laplacian_grid_check(p, 0.9, 0.1, 64).is_err());
        assert!(laplacian_grid_check(p, 0.1, 0.9, 8).is_err());
    }

    #[test]
    fn soft_log_plus_tracks_log_plus() {
        let p = pair();
        // the primitive of phi over [0, 1] is 1/2 by symmetry
        let at_e = p.soft_log_plus(C64::new(std::f64::consts::E, 0.0));
        assert!((at_e - 0.5).abs() < 1e-10);
        let z = C64::new(0.0, 10f64.exp());
        assert!((p.soft_log_plus(z) - 9.5).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn phi_nondecreasing(x in -0.5f64..1.5, dx in 0.0f64..0.5) {
            let phi = make_phi();
            prop_assert!(phi.value(x) <= phi.value(x + dx));
        }

        #[test]
        fn psi_midpoint_convexity(a in -1.0f64..3.0, b in -1.0f64..3.0) {
            let p = pair();
            let mid = p.psi.value(0.5 * (a + b));
            prop_assert!(mid <= 0.5 * (p.psi.value(a) + p.psi.value(b)) + 1e-12);
        }

        #[test]
        fn g_minus_h_is_real_part_times_phi(re in -20.0f64..20.0, im in -20.0f64..20.0) {
            let p = pair();
            let z = C64::new(re, im);
            let expected = if z.norm() <= 1.0 { 0.0 } else { re * p.phi.value(z.norm().ln()) };
            prop_assert!((p.g(z) - p.h(z) - expected).abs() < 1e-12 * (1.0 + expected.abs()));
        }
    }
}
