//! Small numerical helpers shared across modules.

use crate::C64;

/// Significant digits kept when comparing moduli against thresholds.
pub const THRESHOLD_DIGITS: i32 = 12;

/// Rounds `x` to [`THRESHOLD_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-280..=280).contains(&magnitude) {
        return x;
    }
    let scale = 10f64.powi(THRESHOLD_DIGITS - 1 - magnitude);
    (x * scale).round() / scale
}

/// `x >= 1` after rounding to [`THRESHOLD_DIGITS`] significant digits.
#[inline]
pub fn reaches_unit(x: f64) -> bool {
    round_sig(x) >= 1.0
}

/// Neumaier compensated accumulator. Summation order is the call order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// Riemann zeta by Euler-Maclaurin summation; valid for real `s > 0`, `s != 1`.
pub fn zeta(s: f64) -> f64 {
    const N: usize = 32;
    // B_{2k} / (2k)!
    const COEFFS: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let n = N as f64;
    let mut acc = Neumaier::default();
    for k in 1..N {
        acc.add((k as f64).powf(-s));
    }
    acc.add(n.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * n.powf(-s));
    // rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (k, coeff) in COEFFS.iter().enumerate() {
        acc.add(coeff * rising * power);
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        power /= n * n;
    }
    acc.value()
}

/// Dirichlet eta, the alternating zeta sum, for real `s > 0`.
pub fn eta(s: f64) -> f64 {
    if (s - 1.0).abs() < 1e-15 {
        std::f64::consts::LN_2
    } else {
        (1.0 - 2f64.powf(1.0 - s)) * zeta(s)
    }
}

/// Ordinary least squares fit of `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_stderr: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let (intercept_stderr, slope_stderr) = if xs.len() > 2 && sxx > 0.0 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let sigma2 = rss / (n - 2.0);
        (
            (sigma2 * (1.0 / n + mx * mx / sxx)).sqrt(),
            (sigma2 / sxx).sqrt(),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    LinearFit {
        intercept,
        slope,
        intercept_stderr,
        slope_stderr,
    }
}

/// `count` integers spread log-uniformly over `[lo, hi]`, deduplicated.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let lo = lo.max(1);
    if hi <= lo {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1).max(1) as f64;
            ((a + t * (b - a)).exp().round() as usize).clamp(lo, hi)
        })
        .collect();
    out.dedup();
    out
}
