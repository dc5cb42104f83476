//! Exact classical reduction of the initializer and timer gadgets.
//!
//! Both gadgets act only on diagonal, permutation-symmetric degrees of
//! freedom, so their dynamics project onto a continuous-time Markov chain
//! over `(central value a, excitation count k)`. This module holds that
//! chain, a sparse uniformization integrator that scales to very large `M`,
//! and the closed forms it is checked against: the per-excitation overlap
//! `(1 - e^{-t(w+G)})^k (w/(w+G))^k`, the iterated-generator coefficient
//! table `f^k_m(j)`, the contraction bound `eta`, and the timer occupation
//! as a truncated Poisson sum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gadgets::InitializerConfig;
use crate::lindblad::DensityMatrix;
use crate::special::ln_gamma;

/// Probabilities over `(a, k)`: central qubit value `a`, `k` excited
/// auxiliary qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedState {
    aux_count: usize,
    /// `probs[a][k]`, `a` in `{0, 1}`, `k` in `0..=aux_count`.
    probs: [Vec<f64>; 2],
}

impl SymmetrizedState {
    pub fn new(aux_count: usize, probs: [Vec<f64>; 2]) -> Result<Self> {
        if probs[0].len() != aux_count + 1 || probs[1].len() != aux_count + 1 {
            return Err(Error::DimensionMismatch("symmetrized state shape".into()));
        }
        let total: f64 = probs[0].iter().chain(probs[1].iter()).sum();
        if probs.iter().flatten().any(|&p| p < -1e-10) || (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("not a distribution (total {total})")));
        }
        Ok(Self { aux_count, probs })
    }

    pub fn aux_count(&self) -> usize {
        self.aux_count
    }

    pub fn prob(&self, a: usize, k: usize) -> f64 {
        self.probs[a][k]
    }

    /// Flat vector in chain index order (`a * (M+1) + k`).
    pub fn to_vec(&self) -> Vec<f64> {
        self.probs[0].iter().chain(self.probs[1].iter()).copied().collect()
    }

    pub fn from_vec(aux_count: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 2 * (aux_count + 1) {
            return Err(Error::DimensionMismatch("flat symmetrized vector".into()));
        }
        Self::new(aux_count, [v[..aux_count + 1].to_vec(), v[aux_count + 1..].to_vec()])
    }

    /// Total variation distance.
    pub fn tv_distance(&self, other: &SymmetrizedState) -> Result<f64> {
        if self.aux_count != other.aux_count {
            return Err(Error::DimensionMismatch("symmetrized states".into()));
        }
        let mut acc = 0.0;
        for a in 0..2 {
            for k in 0..=self.aux_count {
                acc += (self.probs[a][k] - other.probs[a][k]).abs();
            }
        }
        Ok(0.5 * acc)
    }
}

/// Projection of an initializer-register state onto the symmetrized
/// diagonal algebra: `p[a][k]` sums the diagonal over all basis states with
/// central value `a` and `k` auxiliary excitations.
pub fn symmetrize(rho: &DensityMatrix) -> Result<SymmetrizedState> {
    let n = rho.register().n_sites();
    if n < 2 {
        return Err(Error::DimensionMismatch("initializer register needs a central + auxiliaries".into()));
    }
    let m = n - 1;
    let mut probs = [vec![0.0; m + 1], vec![0.0; m + 1]];
    let diag = rho.diagonal();
    for (idx, &p) in diag.iter().enumerate() {
        let a = rho.register().site_value(idx, 0);
        let mut k = 0usize;
        for site in 1..n {
            k += rho.register().site_value(idx, site);
        }
        probs[a][k] += p;
    }
    SymmetrizedState::new(m, probs)
}

/// Sparse CTMC rate matrix `Q` in the column convention `dp/dt = Q p`:
/// off-diagonal entries are nonnegative rates, columns sum to zero.
#[derive(Debug, Clone)]
pub struct ClassicalGenerator {
    dim: usize,
    /// Off-diagonal rates `(to, from, rate)`.
    off: Vec<(u32, u32, f64)>,
    /// Exit rate per state (the negated diagonal), accumulated exactly from
    /// the off-diagonal sums so columns cancel to zero.
    exit: Vec<f64>,
}

impl ClassicalGenerator {
    pub fn from_rates(dim: usize, rates: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut off = Vec::new();
        let mut exit = vec![0.0; dim];
        for (to, from, rate) in rates {
            if to >= dim || from >= dim {
                return Err(Error::DimensionMismatch("rate entry out of range".into()));
            }
            if to == from || !(rate >= 0.0) {
                return Err(Error::InvalidConfig("rates must be nonnegative and off-diagonal".into()));
            }
            if rate == 0.0 {
                continue;
            }
            off.push((to as u32, from as u32, rate));
            exit[from] += rate;
        }
        Ok(Self { dim, off, exit })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn off_diagonal(&self) -> &[(u32, u32, f64)] {
        &self.off
    }

    pub fn exit_rate(&self, state: usize) -> f64 {
        self.exit[state]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// `out = Q x`
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, (&xi, &e)) in out.iter_mut().zip(x.iter().zip(self.exit.iter())) {
            *o = -e * xi;
        }
        for &(to, from, r) in &self.off {
            out[to as usize] += r * x[from as usize];
        }
    }

    /// Column sums of `Q`; identically zero by construction up to the exact
    /// float cancellation of each column's accumulated exit rate.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums: Vec<f64> = self.exit.iter().map(|e| -e).collect();
        for &(_, from, r) in &self.off {
            sums[from as usize] += r;
        }
        sums
    }
}

/// Chain index for `(a, k)` with `M` auxiliaries.
pub fn chain_index(a: usize, k: usize, aux_count: usize) -> usize {
    a * (aux_count + 1) + k
}

/// Reduced initializer dynamics on `2(M+1)` states:
/// from `(1, k)`: rate `k * Gamma` to `(0, k)` and `k * omega` to `(1, k-1)`;
/// from `(0, k)`: rate `k * omega` to `(0, k-1)`. `(0, 0)` and `(1, 0)` are
/// absorbing.
pub fn initializer_generator(aux_count: usize, omega: f64, gamma_cp: f64) -> Result<ClassicalGenerator> {
    if aux_count < 1 {
        return Err(Error::InvalidConfig("need at least one auxiliary qubit".into()));
    }
    if !(omega > 0.0) || !(gamma_cp > 0.0) {
        return Err(Error::InvalidConfig("rates must be positive".into()));
    }
    let mut rates = Vec::with_capacity(3 * aux_count);
    for k in 1..=aux_count {
        let kf = k as f64;
        rates.push((chain_index(1, k - 1, aux_count), chain_index(1, k, aux_count), kf * omega));
        rates.push((chain_index(0, k, aux_count), chain_index(1, k, aux_count), kf * gamma_cp));
        rates.push((chain_index(0, k - 1, aux_count), chain_index(0, k, aux_count), kf * omega));
    }
    ClassicalGenerator::from_rates(2 * (aux_count + 1), rates)
}

/// Classical reduction of the timer chain over `2^N` bit strings: bit
/// `j+1` decays at rate `gamma` while bit `j` is zero.
pub fn timer_bitstring_generator(qubits: usize, gamma: f64) -> Result<ClassicalGenerator> {
    if !(2..=20).contains(&qubits) {
        return Err(Error::InvalidConfig("bitstring timer chain supports 2..=20 qubits".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidConfig("rate must be positive".into()));
    }
    let n = qubits;
    let dim = 1usize << n;
    let mut rates = Vec::new();
    for s in 0..dim {
        for j in 0..n - 1 {
            let bj = (s >> (n - 1 - j)) & 1;
            let bj1 = (s >> (n - 2 - j)) & 1;
            if bj == 0 && bj1 == 1 {
                let t = s & !(1 << (n - 2 - j));
                rates.push((t, s, gamma));
            }
        }
    }
    ClassicalGenerator::from_rates(dim, rates)
}

const UNIFORMIZATION_TAIL: f64 = 1e-13;
const UNIFORMIZATION_MAX_STEP: f64 = 512.0;
// Poisson weights in f64 cannot cumulate closer to one than a few ulps of
// rounding, so the per-substep tail target is floored; the remainder is
// folded back onto the last iterate, which conserves mass exactly.
const UNIFORMIZATION_TAIL_FLOOR: f64 = 3e-14;

/// Evolves `p0` for time `t` under `gen` by uniformization: substeps keep
/// `q * dt` bounded so Poisson weights stay representable, and each substep
/// truncates when the remaining Poisson tail mass drops below `1e-13`.
pub fn evolve_classical(gen: &ClassicalGenerator, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    if p0.len() != gen.dim {
        return Err(Error::DimensionMismatch("distribution length".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("negative time {t}")));
    }
    let total: f64 = p0.iter().sum();
    if p0.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState("input is not a probability vector".into()));
    }
    let q = gen.max_exit_rate();
    if t == 0.0 || q == 0.0 {
        return Ok(p0.to_vec());
    }

    let substeps = ((q * t) / UNIFORMIZATION_MAX_STEP).ceil().max(1.0) as usize;
    let dt = t / substeps as f64;
    let qdt = q * dt;
    let tail = (UNIFORMIZATION_TAIL / substeps as f64).max(UNIFORMIZATION_TAIL_FLOOR);

    let mut p = p0.to_vec();
    let mut v = vec![0.0; gen.dim];
    let mut qv = vec![0.0; gen.dim];
    for _ in 0..substeps {
        // out = sum_m Poisson(m; qdt) P^m p with P = I + Q/q
        let mut out = vec![0.0; gen.dim];
        let mut weight = (-qdt).exp();
        let mut cum = weight;
        v.copy_from_slice(&p);
        axpy(&mut out, weight, &v);
        let mut m = 0usize;
        let max_terms = (qdt + 16.0 * qdt.sqrt() + 90.0) as usize;
        while 1.0 - cum > tail {
            m += 1;
            if m > max_terms {
                return Err(Error::IntegratorFailure(format!(
                    "uniformization did not meet the tail bound after {m} terms"
                )));
            }
            // v <- P v
            gen.apply(&v, &mut qv);
            for (vi, qi) in v.iter_mut().zip(qv.iter()) {
                *vi += qi / q;
            }
            weight *= qdt / m as f64;
            cum += weight;
            axpy(&mut out, weight, &v);
        }
        // fold the truncated tail into the last iterate so mass is conserved
        let missing = 1.0 - cum;
        if missing > 0.0 {
            axpy(&mut out, missing, &v);
        }
        p = out;
    }
    for x in p.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    Ok(p)
}

fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, &xi) in out.iter_mut().zip(x.iter()) {
        *o += a * xi;
    }
}

/// Closed-form overlap of the evolved `k`-excitation state with the
/// all-relaxed, central-excited state:
/// `(1 - e^{-t(w+G)})^k * (w/(w+G))^k`.
pub fn overlap_formula(k: usize, t: f64, omega: f64, gamma_cp: f64) -> Result<f64> {
    if !(t >= 0.0) || !(omega > 0.0) || !(gamma_cp > 0.0) {
        return Err(Error::Domain("overlap formula needs t >= 0 and positive rates".into()));
    }
    let xi = omega / (omega + gamma_cp);
    Ok(((1.0 - (-t * (omega + gamma_cp)).exp()) * xi).powi(k as i32))
}

/// Exact integer table of the iterated-generator coefficients `f^k_m(j)`
/// defined by `(L_ini)^m phi_k = (-Gamma)^m sum_j f^k_m(j) phi_j` in the
/// equal-rate regime, generated by
/// `f^k_{m+1}(j) = -(j+1) f^k_m(j+1) + 2j f^k_m(j)` from `f^k_0(j) = delta_jk`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    k: usize,
    /// `rows[m][j]` for `m <= m_max`, `j <= k`.
    rows: Vec<Vec<BigInt>>,
}

pub fn recurrence_f(k: usize, m_max: usize) -> Result<CoefficientTable> {
    if k > 40 || m_max > 400 {
        return Err(Error::InvalidConfig("coefficient table limited to k <= 40, m <= 400".into()));
    }
    let mut rows = Vec::with_capacity(m_max + 1);
    let mut row: Vec<BigInt> =
        (0..=k).map(|j| if j == k { BigInt::one() } else { BigInt::zero() }).collect();
    rows.push(row.clone());
    for _ in 0..m_max {
        let mut next = vec![BigInt::zero(); k + 1];
        for (j, target) in next.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            if j + 1 <= k {
                acc -= BigInt::from((j + 1) as i64) * &row[j + 1];
            }
            acc += BigInt::from(2 * j as i64) * &row[j];
            *target = acc;
        }
        rows.push(next.clone());
        row = next;
    }
    Ok(CoefficientTable { k, rows })
}

impl CoefficientTable {
    pub fn excitations(&self) -> usize {
        self.k
    }

    pub fn m_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn value(&self, m: usize, j: usize) -> &BigInt {
        &self.rows[m][j]
    }

    /// Conversion that refuses to round: errors once the integer exceeds
    /// the exactly representable f64 range.
    pub fn value_f64(&self, m: usize, j: usize) -> Result<f64> {
        let v = &self.rows[m][j];
        if v.abs() > BigInt::from(1i64 << 53) {
            return Err(Error::PrecisionLoss(format!(
                "f^{}_{m}({j}) = {v} exceeds exact f64 range",
                self.k
            )));
        }
        Ok(v.to_f64().expect("within f64 range"))
    }
}

/// `sum_m (-Gamma t)^m f^k_m(0) / m!` evaluated in exact rational
/// arithmetic until the tail bound drops below `1e-14` of the partial sum;
/// equals `(1 - e^{-2 Gamma t})^k / 2^k` in the equal-rate regime. The
/// alternating terms grow to `O((2k Gamma t)^m / m!)` before they decay, so
/// float accumulation would cancel catastrophically.
pub fn overlap_series(k: usize, gamma_t: f64) -> Result<f64> {
    if !(gamma_t >= 0.0) {
        return Err(Error::Domain("needs gamma_t >= 0".into()));
    }
    let q = BigRational::from_float(gamma_t)
        .ok_or_else(|| Error::Domain("gamma_t not finite".into()))?;
    let mut m_max = (8.0 * (k as f64 + 1.0) * gamma_t.max(1.0)) as usize + 40;
    m_max = m_max.min(400);
    let table = recurrence_f(k, m_max)?;

    let mut sum = BigRational::zero();
    let mut qpow = BigRational::one(); // (-q)^m
    let mut mfact = BigInt::one();
    let mut last_term_abs = 0.0f64;
    for m in 0..=m_max {
        if m > 0 {
            qpow *= -q.clone();
            mfact *= BigInt::from(m as i64);
        }
        let term = &qpow * BigRational::new(table.value(m, 0).clone(), mfact.clone());
        sum += &term;
        last_term_abs = term.abs().to_f64().unwrap_or(f64::INFINITY);
        // once the term ratio is below 1/2 the tail is under 2x the term
        let ratio = 2.0 * k as f64 * gamma_t / (m as f64 + 1.0);
        if ratio < 0.5 && 2.0 * last_term_abs < 1e-14 * (1.0 + sum.abs().to_f64().unwrap_or(0.0)) {
            return sum.to_f64().ok_or_else(|| Error::PrecisionLoss("series sum".into()));
        }
    }
    Err(Error::IntegratorFailure(format!(
        "coefficient series did not converge (last term {last_term_abs:.3e})"
    )))
}

/// The exact two-qubit contraction coefficient
/// `eta(t) = e^{-t w} (2 + e^{-t G} w / (w + G))` together with the global
/// bound `3 M e^{-t w}` on `||(e^{tL} - T_inf)(rho_D)||_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaBound {
    pub two_qubit: f64,
    pub global: f64,
}

pub fn eta_bound(t: f64, aux_count: usize, omega: f64, gamma_cp: f64) -> Result<EtaBound> {
    if !(t >= 0.0) {
        return Err(Error::Domain("eta bound needs t >= 0".into()));
    }
    let xi = omega / (omega + gamma_cp);
    let two_qubit = (-t * omega).exp() * (2.0 + (-t * gamma_cp).exp() * xi);
    let global = 3.0 * aux_count as f64 * (-t * omega).exp();
    Ok(EtaBound { two_qubit, global })
}

/// Initialization certificate: worst admissible residual excitation bound
/// `M (3 e^{-t w} + e^{-mu M})` where `mu` is extracted from the largest
/// summand `(1-delta)^{max(cM-k,0)} xi^k` over `k = 0..M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Certificate {
    pub mu: f64,
    pub bound: f64,
}

pub fn theorem1_certificate(
    cfg: &InitializerConfig,
    delta: f64,
    c: f64,
    t: f64,
) -> Result<Theorem1Certificate> {
    cfg.validate()?;
    if !(delta > 0.0 && delta <= 1.0) || !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidConfig("need 0 < delta <= 1 and 0 < c <= 1".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain("certificate needs t >= 0".into()));
    }
    let m = cfg.aux_qubits as f64;
    let ln_xi = cfg.xi().ln();
    let ln_one_minus_delta = if delta < 1.0 { (1.0 - delta).ln() } else { f64::NEG_INFINITY };
    let mut best = f64::NEG_INFINITY;
    for k in 0..=cfg.aux_qubits {
        let kf = k as f64;
        let deficit = (c * m - kf).max(0.0);
        let ln_summand =
            if deficit > 0.0 { deficit * ln_one_minus_delta + kf * ln_xi } else { kf * ln_xi };
        best = best.max(ln_summand);
    }
    let mu = -best / m;
    let bound = m * (3.0 * (-t * cfg.damping_rate).exp() + (-mu * m).exp());
    Ok(Theorem1Certificate { mu, bound })
}

/// Worst admissible product input for given `(delta, c)`: the central qubit
/// excited, `floor(cM)` auxiliaries at excitation probability exactly
/// `delta`, the rest relaxed. Returned in chain-vector form.
pub fn admissible_worst_input(aux_count: usize, delta: f64, c: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta <= 1.0) || !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidConfig("need 0 < delta <= 1 and 0 < c <= 1".into()));
    }
    let s = ((c * aux_count as f64).floor() as usize).max(1).min(aux_count);
    let mut p = vec![0.0; 2 * (aux_count + 1)];
    // binomial(s, delta) over excitation count
    let mut ln_choose = 0.0f64;
    for k in 0..=s {
        if k > 0 {
            ln_choose += ((s - k + 1) as f64).ln() - (k as f64).ln();
        }
        let w = if delta >= 1.0 {
            if k == s {
                1.0
            } else {
                0.0
            }
        } else {
            let mut ln_w = ln_choose + k as f64 * delta.ln();
            if s > k {
                ln_w += (s - k) as f64 * (1.0 - delta).ln();
            }
            ln_w.exp()
        };
        p[chain_index(1, k, aux_count)] = w;
    }
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok(p)
}

/// Excited-central-qubit population of a chain distribution.
pub fn excited_population(p: &[f64], aux_count: usize) -> f64 {
    (0..=aux_count).map(|k| p[chain_index(1, k, aux_count)]).sum()
}

/// Exact long-time limit of a chain distribution: mass `sum_k p_k xi^k`
/// survives at `(1, 0)`, the rest is absorbed at `(0, 0)`.
pub fn chain_stationary_limit(p0: &[f64], aux_count: usize, omega: f64, gamma_cp: f64) -> Vec<f64> {
    let xi = omega / (omega + gamma_cp);
    let mut keep = 0.0;
    for k in 0..=aux_count {
        keep += p0[chain_index(1, k, aux_count)] * xi.powi(k as i32);
    }
    let mut out = vec![0.0; 2 * (aux_count + 1)];
    out[chain_index(1, 0, aux_count)] = keep;
    out[chain_index(0, 0, aux_count)] = 1.0 - keep;
    out
}

/// Smallest `t` at which the chain is within `tv_tol` of its stationary
/// limit in total variation, located by doubling plus bisection.
pub fn equilibration_time(
    aux_count: usize,
    omega: f64,
    gamma_cp: f64,
    p0: &[f64],
    tv_tol: f64,
) -> Result<f64> {
    let gen = initializer_generator(aux_count, omega, gamma_cp)?;
    let pinf = chain_stationary_limit(p0, aux_count, omega, gamma_cp);
    let tv = |t: f64| -> Result<f64> {
        let p = evolve_classical(&gen, p0, t)?;
        Ok(0.5 * p.iter().zip(pinf.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>())
    };
    let mut hi = 1.0 / (omega + gamma_cp);
    let mut guard = 0;
    while tv(hi)? > tv_tol {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::IntegratorFailure("equilibration time out of range".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if tv(mid)? > tv_tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Probability that the last timer qubit has relaxed by time `t`:
/// `1 - e^{-t g} sum_{k=0}^{N-2} (t g)^k / k!`, the regularized lower
/// incomplete gamma at integer shape `N - 1`.
///
/// The finite Poisson sum is factored by its `(N-1)`-shape prefactor so
/// that only well-conditioned term ratios remain; the prefactor exponent is
/// the shared [`crate::special`] expression, keeping this route consistent
/// with the series/continued-fraction gamma evaluation to full precision
/// even at `N ~ 1e5`.
pub fn timer_occupation(qubits: usize, t: f64, gamma: f64) -> Result<f64> {
    if qubits < 2 {
        return Err(Error::InvalidConfig("timer needs at least two qubits".into()));
    }
    if !(t >= 0.0) || !(gamma > 0.0) {
        return Err(Error::Domain("needs t >= 0 and gamma > 0".into()));
    }
    let x = t * gamma;
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = (qubits - 1) as f64;
    let pref = crate::special::ln_gamma_prefactor(a, x).exp();
    if x >= a {
        // survival mass: e^{-x} sum_{k<=N-2} x^k/k! factored by the k = N-2
        // term; ratios (a-j)/x are all below one in this branch
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for j in 1..qubits - 1 {
            term *= (a - j as f64) / x;
            sum += term;
            if term < 1e-20 * sum {
                break;
            }
        }
        Ok(1.0 - pref * sum / x)
    } else {
        // absorbed mass: the Poisson tail e^{-x} sum_{k>=N-1} x^k/k!
        // factored by its first term
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut i = 1.0f64;
        loop {
            let ratio = x / (a + i);
            term *= ratio;
            sum += term;
            if term * ratio / (1.0 - ratio) < 1e-17 * sum {
                break;
            }
            i += 1.0;
            if i > 1e8 {
                return Err(Error::IntegratorFailure("poisson tail did not converge".into()));
            }
        }
        Ok(pref * sum / a)
    }
}

/// Weights of the evolved timer state over the moving-front states `phi_k`
/// (first `k+1` qubits relaxed, the rest excited) plus the absorbing
/// all-relaxed state.
#[derive(Debug, Clone, PartialEq)]
pub struct TimerDistribution {
    /// Truncated Poisson weights for `phi_0 .. phi_{N-2}`.
    pub front_weights: Vec<f64>,
    /// Mass on the absorbing all-zero state.
    pub absorbed: f64,
}

pub fn timer_distribution(qubits: usize, t: f64, gamma: f64) -> Result<TimerDistribution> {
    if qubits < 2 {
        return Err(Error::InvalidConfig("timer needs at least two qubits".into()));
    }
    if !(t >= 0.0) || !(gamma > 0.0) {
        return Err(Error::Domain("needs t >= 0 and gamma > 0".into()));
    }
    let x = t * gamma;
    let mut weights = Vec::with_capacity(qubits - 1);
    // Kahan-compensated sum of Poisson pmf values, each from log space.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 0..=(qubits - 2) {
        let w = if x == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-x + k as f64 * x.ln() - ln_gamma(k as f64 + 1.0)).exp()
        };
        weights.push(w);
        let y = w - comp;
        let t2 = sum + y;
        comp = (t2 - sum) - y;
        sum = t2;
    }
    let absorbed = (1.0 - sum).clamp(0.0, 1.0);
    Ok(TimerDistribution { front_weights: weights, absorbed })
}
