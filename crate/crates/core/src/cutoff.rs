//! Cutoff-window and error-budget analysis for the timer gadget.
//!
//! The last timer qubit relaxes at `t_N(x) = (N + x sqrt(N)) / gamma` with
//! deviation from stationarity `1 - Phi(x)` up to an `O(1/sqrt(N))`
//! remainder. This module samples that profile, checks the sharp-threshold
//! limits, evaluates the trigger-concatenation tails against their
//! exponential bounds, bounds truncated-normal inputs of the initializer,
//! and quantifies the first-order effect of imperfect initialization.

use serde::Serialize;

use crate::classical::{evolve_classical, timer_bitstring_generator, timer_occupation};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, normal_cdf, regularized_gamma_lower, regularized_gamma_upper};

/// One sampled point of a cutoff profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSample {
    pub x: f64,
    pub time: f64,
    /// `1/2 || tr_{N-1} rho(t_N(x)) - |0><0| ||_1 = 1 - occupation`
    pub deviation: f64,
    /// `1 - Phi(x)`
    pub tail: f64,
    /// `|deviation - tail|`
    pub remainder: f64,
}

/// Sampled deviation-from-stationarity profile across the cutoff window.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffProfile {
    pub timer_qubits: usize,
    pub rate: f64,
    pub samples: Vec<CutoffSample>,
    /// `sup_x |deviation - (1 - Phi(x))|` over the sampled grid.
    pub sup_remainder: f64,
    /// `sup_remainder * sqrt(N)`: the fitted constant of the
    /// `O(1/sqrt(N))` remainder.
    pub fitted_constant: f64,
}

/// `t_N(x) = (N + x sqrt(N)) / gamma`
pub fn window_time(qubits: usize, x: f64, gamma: f64) -> f64 {
    let n = qubits as f64;
    (n + x * n.sqrt()) / gamma
}

pub fn cutoff_profile(qubits: usize, gamma: f64, x_grid: &[f64]) -> Result<CutoffProfile> {
    if qubits < 2 {
        return Err(Error::InvalidConfig("timer needs at least two qubits".into()));
    }
    let mut samples = Vec::with_capacity(x_grid.len());
    let mut sup = 0.0f64;
    for &x in x_grid {
        let t = window_time(qubits, x, gamma).max(0.0);
        let deviation = 1.0 - timer_occupation(qubits, t, gamma)?;
        let tail = 1.0 - normal_cdf(x);
        let remainder = (deviation - tail).abs();
        sup = sup.max(remainder);
        samples.push(CutoffSample { x, time: t, deviation, tail, remainder });
    }
    Ok(CutoffProfile {
        timer_qubits: qubits,
        rate: gamma,
        samples,
        sup_remainder: sup,
        fitted_constant: sup * (qubits as f64).sqrt(),
    })
}

/// Occupation of the trigger qubit at `c` times the cutoff time `N/gamma`.
pub fn sharp_threshold(c: f64, qubits: usize, gamma: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain("threshold factor must be positive".into()));
    }
    timer_occupation(qubits, c * qubits as f64 / gamma, gamma)
}

/// Upper incomplete gamma bound `Gamma(a, x) < e^{-x} x^a / (x - a + 1)`,
/// valid for `x > a - 1`, together with the exact value and the margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TricomiBound {
    pub bound: f64,
    pub exact: f64,
    pub margin: f64,
}

pub fn tricomi_bound(a: f64, x: f64) -> Result<TricomiBound> {
    if !(a > 0.0) || !(x > a - 1.0) {
        return Err(Error::Domain(format!("bound requires x > a - 1 (a={a}, x={x})")));
    }
    let bound = (-x + a * x.ln() - (x - a + 1.0).ln()).exp();
    let q = regularized_gamma_upper(a, x)?;
    let exact = if q > 0.0 { (q.ln() + ln_gamma(a)).exp() } else { 0.0 };
    Ok(TricomiBound { bound, exact, margin: bound - exact })
}

/// Per-step trigger windows `[N(l - 1/2)/gamma, N(l + 1/2)/gamma]` for `L`
/// successive operations of an `N`-qubit timer each.
#[derive(Debug, Clone, Serialize)]
pub struct TriggerSchedule {
    pub steps: usize,
    pub timer_qubits: usize,
    pub rate: f64,
    pub windows: Vec<(f64, f64)>,
}

impl TriggerSchedule {
    pub fn new(steps: usize, timer_qubits: usize, rate: f64) -> Result<Self> {
        if steps < 1 || timer_qubits < 2 || !(rate > 0.0) {
            return Err(Error::InvalidConfig("schedule needs steps >= 1, N >= 2, rate > 0".into()));
        }
        let n = timer_qubits as f64;
        let windows = (1..=steps)
            .map(|l| {
                let lf = l as f64;
                (n * (lf - 0.5) / rate, n * (lf + 0.5) / rate)
            })
            .collect();
        Ok(Self { steps, timer_qubits, rate, windows })
    }
}

/// Mis-trigger tails of step `l`: the probability of firing before
/// `t_1(l)` (early) or after `t_2(l)` (late), as exact regularized
/// incomplete gammas, with the exponential rates `alpha(l)`, `beta(l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcatenationError {
    pub step: usize,
    pub timer_qubits: usize,
    /// `P(N l, N (l - 1/2))`
    pub early: f64,
    /// `Q(N l, N (l + 1/2))`
    pub late: f64,
    /// `(1/2 - l (ln(l + 1/2) - ln l)) / gamma`
    pub alpha: f64,
    /// `-(1/2 + l (ln(l - 1/2) - ln l)) / gamma`
    pub beta: f64,
}

pub fn concatenation_error(step: usize, qubits: usize, gamma: f64) -> Result<ConcatenationError> {
    if step < 1 || qubits < 2 || !(gamma > 0.0) {
        return Err(Error::InvalidConfig("needs step >= 1, N >= 2, gamma > 0".into()));
    }
    let l = step as f64;
    let n = qubits as f64;
    let early = regularized_gamma_lower(n * l, n * (l - 0.5))?;
    let late = regularized_gamma_upper(n * l, n * (l + 0.5))?;
    let alpha = (0.5 - l * ((l + 0.5).ln() - l.ln())) / gamma;
    let beta = -(0.5 + l * ((l - 0.5).ln() - l.ln())) / gamma;
    Ok(ConcatenationError { step, timer_qubits: qubits, early, late, alpha, beta })
}

/// Smallest integer degree `d <= max_degree` such that every case satisfies
/// both `early <= e^{-beta N} (N(1+l))^d` and `late <= e^{-alpha N} (N(1+l))^d`
/// (rates taken at `gamma = 1` so the exponents are dimensionless).
pub fn fit_poly_degree(cases: &[ConcatenationError], max_degree: u32) -> Option<u32> {
    'outer: for d in 0..=max_degree {
        for c in cases {
            let n = c.timer_qubits as f64;
            let poly = (n * (1.0 + c.step as f64)).powi(d as i32);
            // alpha/beta are stored per unit gamma when gamma = 1
            if c.late > (-c.alpha * n).exp() * poly || c.early > (-c.beta * n).exp() * poly {
                continue 'outer;
            }
        }
        return Some(d);
    }
    None
}

/// Union bound on the probability that any of `steps` successive
/// operations fires outside its window.
pub fn total_mistrigger(steps: usize, qubits: usize, gamma: f64) -> Result<f64> {
    let mut total = 0.0;
    for l in 1..=steps {
        let c = concatenation_error(l, qubits, gamma)?;
        total += c.early + c.late;
    }
    Ok(total)
}

/// Truncated-normal input overlap: the integral
/// `int_0^N phi^tr(x) xi^{-x} dx` with mean `alpha N`, variance `beta N`
/// and `xi = 1 + Gamma/omega`, against the proof bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedNormalOverlap {
    pub numeric: f64,
    /// Final-display bound `sqrt(beta) / (sqrt(N) |alpha - beta ln xi|)
    /// * e^{-N alpha^2 / (2 beta)}`; valid in the `z2 < 0` regime.
    pub mills_bound: f64,
    /// Intermediate bound `e^{-(ln xi / 2) z2} / D` from bounding the
    /// completed-square Gaussian integral by one; valid in either regime.
    pub early_bound: f64,
    /// `z1 = N (alpha - beta ln xi)`
    pub z1: f64,
    /// `z2 = N (2 alpha - beta ln xi)`; the proof's final display requires
    /// `z2 < 0`.
    pub z2: f64,
}

impl TruncatedNormalOverlap {
    pub fn mills_regime(&self) -> bool {
        self.z2 < 0.0
    }

    /// The bound that is actually valid for these parameters.
    pub fn valid_bound(&self) -> f64 {
        if self.mills_regime() {
            self.mills_bound
        } else {
            self.early_bound
        }
    }
}

pub fn truncated_normal_overlap(
    n: usize,
    alpha: f64,
    beta: f64,
    omega: f64,
    gamma_cp: f64,
) -> Result<TruncatedNormalOverlap> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0) {
        return Err(Error::InvalidConfig("need alpha in (0, 1] and beta > 0".into()));
    }
    if !(omega > 0.0) || !(gamma_cp > 0.0) {
        return Err(Error::InvalidConfig("rates must be positive".into()));
    }
    let nf = n as f64;
    let ln_xi = (1.0 + gamma_cp / omega).ln();
    let mu = alpha * nf;
    let sigma = (beta * nf).sqrt();
    let z1 = nf * (alpha - beta * ln_xi);
    let z2 = nf * (2.0 * alpha - beta * ln_xi);

    // log-integrand g(x) = -(x - mu)^2 / (2 sigma^2) - x ln xi, integrated
    // against the truncated-normal normalization.
    let denom = normal_cdf((nf - mu) / sigma) - normal_cdf(-mu / sigma);
    let g = |x: f64| -0.5 * ((x - mu) / sigma).powi(2) - x * ln_xi;
    // concave quadratic: peak at z1 clamped into the domain
    let x_star = z1.clamp(0.0, nf);
    let g_star = g(x_star);
    let scaled = |x: f64| (g(x) - g_star).exp();
    let integral = adaptive_simpson(&scaled, 0.0, nf, 1e-11, 40)?;
    let numeric = g_star.exp() * integral / (sigma * (2.0 * std::f64::consts::PI).sqrt()) / denom;

    let mills_bound = if z1.abs() > 0.0 {
        beta.sqrt() / (nf.sqrt() * (alpha - beta * ln_xi).abs())
            * (-nf * alpha * alpha / (2.0 * beta)).exp()
    } else {
        f64::INFINITY
    };
    let early_bound = (-0.5 * ln_xi * z2).exp() / denom;
    Ok(TruncatedNormalOverlap { numeric, mills_bound, early_bound, z1, z2 })
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(Error::IntegratorFailure("quadrature depth exhausted".into()));
        }
        Ok(recurse(f, a, lm, m, left, tol / 2.0, depth - 1)?
            + recurse(f, m, rm, b, right, tol / 2.0, depth - 1)?)
    }
    // seed with a few panels so a narrow peak cannot hide from the estimator
    let panels = 32;
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        let x1 = x0 + h;
        let m = 0.5 * (x0 + x1);
        let whole = simpson(f, x0, m, x1);
        acc += recurse(f, x0, m, x1, whole, tol / panels as f64, depth)?;
    }
    Ok(acc)
}

/// Effect of imperfect initialization on the timer trigger probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImperfectInitShift {
    /// Trigger probability from the ideal input.
    pub ideal_occupation: f64,
    /// Trigger probability from the product-perturbed input.
    pub exact_occupation: f64,
    /// `exact - ideal`
    pub shift: f64,
    /// The naive first-order estimate `N epsilon`.
    pub naive_first_order: f64,
    /// Exact first derivative in epsilon: the summed single-flip responses.
    pub derivative: f64,
    /// `shift - epsilon * derivative`, the second-order residual.
    pub residual: f64,
}

/// Computes the exact trigger-probability shift for the product-perturbed
/// timer input (each qubit independently flipped with probability
/// `epsilon`) via the classical bit-string chain, along with the exact
/// first derivative assembled from the `N` single-flip inputs.
pub fn imperfect_init_shift(
    qubits: usize,
    epsilon: f64,
    t: f64,
    gamma: f64,
) -> Result<ImperfectInitShift> {
    if !(0.0..=0.1).contains(&epsilon) {
        return Err(Error::InvalidConfig("epsilon must lie in [0, 0.1]".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain("needs t >= 0".into()));
    }
    let gen = timer_bitstring_generator(qubits, gamma)?;
    let n = qubits;
    let dim = 1usize << n;
    let ideal_idx = (1usize << (n - 1)) - 1; // 0 1 1 ... 1

    let occupation = |p0: &[f64]| -> Result<f64> {
        let p = evolve_classical(&gen, p0, t)?;
        // last qubit is bit 0
        Ok((0..dim).filter(|s| s & 1 == 0).map(|s| p[s]).sum())
    };

    // ideal and single-flip responses
    let mut point = vec![0.0; dim];
    point[ideal_idx] = 1.0;
    let ideal = occupation(&point)?;
    let mut derivative = 0.0;
    for k in 0..n {
        let mut p = vec![0.0; dim];
        p[ideal_idx ^ (1 << (n - 1 - k))] = 1.0;
        derivative += occupation(&p)? - ideal;
    }

    // exact product distribution
    let mut p0 = vec![0.0; dim];
    for (s, slot) in p0.iter_mut().enumerate() {
        let flips = (s ^ ideal_idx).count_ones() as f64;
        *slot = epsilon.powf(flips) * (1.0 - epsilon).powf(n as f64 - flips);
    }
    let exact = occupation(&p0)?;

    let shift = exact - ideal;
    Ok(ImperfectInitShift {
        ideal_occupation: ideal,
        exact_occupation: exact,
        shift,
        naive_first_order: n as f64 * epsilon,
        derivative,
        residual: shift - epsilon * derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_time_formula() {
        assert!((window_time(64, 0.0, 2.0) - 32.0).abs() < 1e-12);
        assert!((window_time(64, 1.0, 1.0) - 72.0).abs() < 1e-12);
    }

    #[test]
    fn profile_limits_and_center() {
        let grid: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.25).collect();
        let p = cutoff_profile(256, 1.0, &grid).unwrap();
        // deviation monotone nonincreasing in x
        for w in p.samples.windows(2) {
            assert!(w[1].deviation <= w[0].deviation + 1e-13);
        }
        // x -> +inf edge of the grid: deviation nearly 0
        assert!(p.samples.last().unwrap().deviation < 2e-3);
        // x = 0: deviation = 1/2 + O(1/sqrt(N))
        let center = p.samples.iter().find(|s| s.x == 0.0).unwrap();
        assert!((center.deviation - 0.5).abs() < 2.0 / (256.0f64).sqrt());
    }

    #[test]
    fn sharp_threshold_examples() {
        assert!(sharp_threshold(0.5, 1024, 1.0).unwrap() < 1e-10);
        assert!(sharp_threshold(2.0, 1024, 1.0).unwrap() > 1.0 - 1e-10);
        let v = sharp_threshold(1.0, 4096, 1.0).unwrap();
        assert!((v - 0.5).abs() < 0.02);
        // monotone trends in N at c = 0.9 / 1.1
        let lo: Vec<f64> =
            [64, 256, 1024].iter().map(|&n| sharp_threshold(0.9, n, 1.0).unwrap()).collect();
        assert!(lo[0] > lo[1] && lo[1] > lo[2]);
        let hi: Vec<f64> =
            [64, 256, 1024].iter().map(|&n| sharp_threshold(1.1, n, 1.0).unwrap()).collect();
        assert!(hi[0] < hi[1] && hi[1] < hi[2]);
    }

    #[test]
    fn tricomi_examples() {
        let b = tricomi_bound(5.0, 10.0).unwrap();
        assert!((b.exact - 0.7021).abs() < 5e-4);
        assert!((b.bound - 0.7567).abs() < 5e-4);
        assert!(b.margin > 0.0);
        // a = 1 is the equality case
        let b = tricomi_bound(1.0, 2.5).unwrap();
        assert!(b.margin.abs() < 1e-15);
        // strictly positive margin across the sampled validity region
        for &a in &[2.0, 5.0, 20.0, 100.0] {
            let mut x = a + 1.0 + 1e-6;
            while x <= 3.0 * a {
                let b = tricomi_bound(a, x).unwrap();
                assert!(b.margin > 0.0, "a={a} x={x}");
                x += a / 4.0;
            }
        }
        assert!(tricomi_bound(5.0, 3.0).is_err());
    }

    #[test]
    fn schedule_windows_ordered() {
        let s = TriggerSchedule::new(5, 100, 2.0).unwrap();
        assert_eq!(s.windows.len(), 5);
        for w in s.windows.windows(2) {
            assert!(w[0].1 <= w[1].0 + 1e-12);
            assert!(w[0].0 < w[0].1);
        }
    }

    #[test]
    fn concatenation_alpha_beta_and_degree() {
        let c = concatenation_error(1, 100, 1.0).unwrap();
        assert!((c.alpha - (0.5 - 1.5f64.ln())).abs() < 1e-12);
        assert!((c.beta - -(0.5 + 0.5f64.ln())).abs() < 1e-12);
        let mut cases = Vec::new();
        for l in 1..=20 {
            for &n in &[100usize, 400, 1600] {
                cases.push(concatenation_error(l, n, 1.0).unwrap());
            }
        }
        let d = fit_poly_degree(&cases, 2).expect("bounded by degree <= 2");
        assert!(d <= 2);
        let total = total_mistrigger(10, 10_000, 1.0).unwrap();
        assert!(total < 1e-6);
    }

    #[test]
    fn truncated_normal_regimes() {
        // valid (z2 < 0) regime: numeric under the final-display bound,
        // both tiny
        let o = truncated_normal_overlap(100, 0.5, 0.25, 1.0, 6f64.exp() - 1.0).unwrap();
        assert!(o.mills_regime());
        assert!(o.numeric <= o.mills_bound);
        assert!(o.numeric < 1e-20 && o.mills_bound < 1e-20);

        // xi = 2 with these (alpha, beta) sits in the z2 > 0 regime where
        // only the intermediate bound applies
        let o = truncated_normal_overlap(100, 0.5, 0.25, 1.0, 1.0).unwrap();
        assert!(!o.mills_regime());
        assert!(o.numeric <= o.early_bound * (1.0 + 1e-9));
        assert!((o.numeric / 3.604e-13 - 1.0).abs() < 1e-2);
        // degenerate-width limit: integral approaches xi^{-alpha N}
        let o = truncated_normal_overlap(50, 0.5, 1e-4, 1.0, 1.0).unwrap();
        let point_mass = (-(0.5 * 50.0) * 2f64.ln()).exp();
        assert!((o.numeric / point_mass - 1.0).abs() < 0.02);
    }

    #[test]
    fn imperfect_init_first_order() {
        let s0 = imperfect_init_shift(8, 0.0, 8.0, 1.0).unwrap();
        assert_eq!(s0.shift, 0.0);
        let s = imperfect_init_shift(8, 1e-3, 8.0, 1.0).unwrap();
        assert!(s.shift.abs() <= s.naive_first_order + 10.0 * 1e-6 * 64.0);
        assert!(s.derivative.abs() <= 8.0);
        // residual drops by ~4x when epsilon halves
        let h = imperfect_init_shift(8, 5e-4, 8.0, 1.0).unwrap();
        let ratio = s.residual / h.residual;
        assert!((2.0..=8.0).contains(&ratio), "ratio {ratio}");
        assert!(imperfect_init_shift(8, 0.5, 1.0, 1.0).is_err());
    }
}
