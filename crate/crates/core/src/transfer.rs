//! End-to-end dissipative state transfer.
//!
//! Cluster preparation is unitary preprocessing; the transfer itself runs
//! the staged Liouvillians of [`crate::gadgets`] to equilibrium one after
//! another, or as a single timer-triggered composite at small scale. A
//! pure-state measurement path (projective X measurements plus the Pauli
//! byproduct correction) provides the exact bookkeeping oracle.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gadgets::{
    build_transfer_3qubit, build_transfer_nqubit, timer_initial_state, transfer3_register,
    transfer_n_register, TimerConfig, TransferStage,
};
use crate::lindblad::{evolve, fidelity_with_pure, DensityMatrix, Liouvillian, QubitRegister};
use crate::C64;

/// `|phi_in> (x) |+>^{n-1}` entangled by the controlled-phase chain
/// `S_j = |0_j><0_j| + |1_j><1_j| (x) sigma^z_{j+1}`.
pub fn prepare_cluster(phi_in: &DVector<C64>, n: usize) -> Result<DVector<C64>> {
    if n < 1 || n % 2 == 0 {
        return Err(Error::InvalidConfig(format!("chain length must be odd, got {n}")));
    }
    if phi_in.len() != 2 {
        return Err(Error::DimensionMismatch("input must be a single-qubit state".into()));
    }
    if (phi_in.norm_squared() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("input state not normalized".into()));
    }
    let dim = 1usize << n;
    let mut v = DVector::<C64>::zeros(dim);
    // product state: site 0 = phi_in, the rest |+>
    let amp = (1.0 / 2f64.powi((n as i32) - 1)).sqrt();
    for idx in 0..dim {
        let b0 = idx >> (n - 1);
        v[idx] = phi_in[b0] * C64::new(amp, 0.0);
    }
    // controlled-phase on neighbors: sign flip when both bits are 1
    for j in 0..n - 1 {
        let bj = n - 1 - j;
        let bj1 = n - 2 - j;
        for (idx, entry) in v.iter_mut().enumerate() {
            if (idx >> bj) & 1 == 1 && (idx >> bj1) & 1 == 1 {
                *entry = -*entry;
            }
        }
    }
    Ok(v)
}

/// Projects qubits `1..n-1` of a cluster-chain state onto the X-basis
/// outcomes `s_j` (0 = `|+>`, 1 = `|->`) and returns the normalized state
/// left on the last qubit.
pub fn apply_x_measurements(state: &DVector<C64>, outcomes: &[u8]) -> Result<DVector<C64>> {
    let n = outcomes.len() + 1;
    if state.len() != 1 << n {
        return Err(Error::DimensionMismatch("outcome count does not match state size".into()));
    }
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut out = DVector::<C64>::zeros(2);
    for idx in 0..state.len() {
        let mut coeff = C64::new(1.0, 0.0);
        for (j, &s) in outcomes.iter().enumerate() {
            let bit = (idx >> (n - 1 - j)) & 1;
            // <x_s| component: (-1)^(s * bit) / sqrt(2)
            if s == 1 && bit == 1 {
                coeff = -coeff;
            }
            coeff *= inv_sqrt2;
        }
        out[idx & 1] += coeff * state[idx];
    }
    let norm = out.norm();
    if norm < 1e-12 {
        return Err(Error::InvalidState("measurement branch has vanishing weight".into()));
    }
    Ok(out.unscale(norm))
}

/// Byproduct parities of the X-measurement pattern: `gamma_x` collects the
/// even-numbered outcomes (`s_2, s_4, ...`), `gamma_z` the odd-numbered
/// ones (`s_1, s_3, ...`), so the output reads
/// `sigma_x^{gamma_x} sigma_z^{gamma_z} |phi_in>`.
pub fn byproduct_parities(outcomes: &[u8]) -> (u8, u8) {
    let mut gx = 0u8;
    let mut gz = 0u8;
    for (j, &s) in outcomes.iter().enumerate() {
        // j is zero-based; outcome s_{j+1}
        if j % 2 == 1 {
            gx ^= s & 1;
        } else {
            gz ^= s & 1;
        }
    }
    (gx, gz)
}

/// Applies the inverse byproduct `(sigma_x^gx sigma_z^gz)^+` to a qubit.
pub fn undo_byproduct(phi: &DVector<C64>, gx: u8, gz: u8) -> DVector<C64> {
    let mut v = phi.clone();
    if gx == 1 {
        v = DVector::from_vec(vec![v[1], v[0]]);
    }
    if gz == 1 {
        v[1] = -v[1];
    }
    v
}

/// Options for staged equilibration runs.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Stage stopping criterion: an upper bound on the trace norm of the
    /// generator action (`sqrt(D) ||G(rho)||_F`) must drop below this.
    pub eq_tol: f64,
    /// Per-stage time budget in units of `1 / min_rate`.
    pub budget_factor: f64,
    /// Integrator tolerance; dimension default when `None`.
    pub integrator_tol: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { eq_tol: 1e-9, budget_factor: 100.0, integrator_tol: None }
    }
}

/// Result of running staged Liouvillians sequentially to equilibrium.
#[derive(Debug, Clone)]
pub struct SequentialRun {
    pub rho_final: DensityMatrix,
    /// Time spent inside each stage before the equilibrium criterion held.
    pub stage_times: Vec<f64>,
}

/// Evolves each stage until the generator action on the state is below
/// `eq_tol` in trace norm, in declared order.
pub fn run_sequential(
    stages: &[TransferStage],
    rho0: &DensityMatrix,
    eq_tol: f64,
) -> Result<SequentialRun> {
    run_sequential_with(stages, rho0, &RunOptions { eq_tol, ..RunOptions::default() })
}

pub fn run_sequential_with(
    stages: &[TransferStage],
    rho0: &DensityMatrix,
    opts: &RunOptions,
) -> Result<SequentialRun> {
    if !(opts.eq_tol > 0.0) {
        return Err(Error::InvalidConfig("equilibrium tolerance must be positive".into()));
    }
    let mut rho = rho0.clone();
    let mut stage_times = Vec::with_capacity(stages.len());
    for stage in stages {
        if stage.liouvillian.register() != rho.register() {
            return Err(Error::RegisterMismatch(format!("stage '{}'", stage.name)));
        }
        let (next, t) = equilibrate(&stage.liouvillian, &rho, opts, &stage.name)?;
        rho = next;
        stage_times.push(t);
    }
    Ok(SequentialRun { rho_final: rho, stage_times })
}

fn equilibrate(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    opts: &RunOptions,
    name: &str,
) -> Result<(DensityMatrix, f64)> {
    let min_rate = l.min_rate();
    if !(min_rate > 0.0) {
        return Err(Error::InvalidConfig(format!("stage '{name}' has a zero-rate operator")));
    }
    let dim_sqrt = (l.dimension() as f64).sqrt();
    // keep integration noise well under the equilibrium threshold, else the
    // frobenius monitor floors out above it
    let tol = opts
        .integrator_tol
        .unwrap_or_else(|| crate::default_tol(l.dimension()).min(opts.eq_tol * 1e-2));
    let budget = opts.budget_factor / min_rate;
    let mut rho = rho0.clone();
    let mut t_total = 0.0f64;
    let mut chunk = 1.0 / min_rate;
    loop {
        // sqrt(D) ||G||_F bounds the trace norm of the generator action
        if dim_sqrt * l.generator_frobenius(&rho)? <= opts.eq_tol {
            return Ok((rho, t_total));
        }
        if t_total >= budget {
            return Err(Error::IntegratorFailure(format!(
                "stage '{name}' did not reach equilibrium within t = {budget:.3e}"
            )));
        }
        let step = chunk.min(budget - t_total);
        rho = evolve(l, &rho, step, tol)?;
        t_total += step;
        chunk = (chunk * 1.5).min(8.0 / min_rate);
    }
}

/// A completed state-transfer run.
#[derive(Debug, Clone)]
pub struct TransferRun {
    pub n: usize,
    pub phi_in: DVector<C64>,
    pub stage_names: Vec<String>,
    pub stage_times: Vec<f64>,
    pub rho_final: DensityMatrix,
    pub output_site: String,
    pub fidelity: f64,
}

/// Fidelity of the traced-out output qubit with the input state.
pub fn transfer_fidelity(run: &TransferRun) -> f64 {
    run.fidelity
}

fn output_fidelity(
    rho: &DensityMatrix,
    phi_in: &DVector<C64>,
    output_site: &str,
) -> Result<f64> {
    let reduced = rho.partial_trace(&[output_site])?;
    fidelity_with_pure(&reduced, phi_in)
}

/// Full dissipative 3-qubit transfer on the compact 5-qubit register.
pub fn run_transfer_3qubit(
    phi_in: &DVector<C64>,
    omega: f64,
    opts: &RunOptions,
) -> Result<TransferRun> {
    let (stage_a, stage_b) = build_transfer_3qubit(omega)?;
    let stages = vec![
        TransferStage::new("measure", stage_a),
        TransferStage::new("recover", stage_b),
    ];
    let register = transfer3_register();
    let cluster = prepare_cluster(phi_in, 3)?;
    // registry starts in |00>
    let mut full = DVector::<C64>::zeros(register.dimension());
    for i in 0..cluster.len() {
        full[i << 2] = cluster[i];
    }
    let rho0 = DensityMatrix::from_pure(register, &full)?;
    let run = run_sequential_with(&stages, &rho0, opts)?;
    let fidelity = output_fidelity(&run.rho_final, phi_in, "l3")?;
    Ok(TransferRun {
        n: 3,
        phi_in: phi_in.clone(),
        stage_names: stages.iter().map(|s| s.name.clone()).collect(),
        stage_times: run.stage_times,
        rho_final: run.rho_final,
        output_site: "l3".into(),
        fidelity,
    })
}

/// Full dissipative odd-n transfer on the paper layout
/// (`n` logical + `n` measurement + `2(n-1)` bus qubits).
pub fn run_transfer_nqubit(
    n: usize,
    phi_in: &DVector<C64>,
    omega: f64,
    opts: &RunOptions,
) -> Result<TransferRun> {
    let stages = build_transfer_nqubit(n, omega)?;
    let register = transfer_n_register(n)?;
    let cluster = prepare_cluster(phi_in, n)?;
    let aux_sites = register.n_sites() - n;
    let mut full = DVector::<C64>::zeros(register.dimension());
    for i in 0..cluster.len() {
        full[i << aux_sites] = cluster[i];
    }
    let rho0 = DensityMatrix::from_pure(register.clone(), &full)?;
    let run = run_sequential_with(&stages, &rho0, opts)?;
    let output_site = format!("l{n}");
    let fidelity = output_fidelity(&run.rho_final, phi_in, &output_site)?;
    Ok(TransferRun {
        n,
        phi_in: phi_in.clone(),
        stage_names: stages.iter().map(|s| s.name.clone()).collect(),
        stage_times: run.stage_times,
        rho_final: run.rho_final,
        output_site,
        fidelity,
    })
}

/// Result of a timer-triggered composite evolution.
#[derive(Debug, Clone)]
pub struct TimerTriggeredRun {
    /// Final state on the composite register (protocol + timers).
    pub rho_full: DensityMatrix,
    /// Final state reduced to the protocol register.
    pub rho_protocol: DensityMatrix,
}

/// Builds one time-independent composite: every operator of stage `i`
/// conditioned on the last qubit of its own timer being `|0>`, plus the
/// timer generators themselves, all evolved together from
/// `rho0 (x) phi_0 (x) ... (x) phi_0` for time `t`.
pub fn run_timer_triggered(
    stages: &[TransferStage],
    timers: &[TimerConfig],
    rho0: &DensityMatrix,
    t: f64,
    integrator_tol: Option<f64>,
) -> Result<TimerTriggeredRun> {
    if stages.len() != timers.len() {
        return Err(Error::InvalidConfig("one timer per stage".into()));
    }
    if stages.is_empty() {
        return Err(Error::InvalidConfig("no stages".into()));
    }
    // composite register: protocol sites then per-stage timer sites
    let mut register = rho0.register().clone();
    let mut trigger_labels = Vec::with_capacity(timers.len());
    for (i, cfg) in timers.iter().enumerate() {
        cfg.validate()?;
        let prefix = format!("tmr{}_", i + 1);
        let timer_reg = QubitRegister::new((1..=cfg.qubits).map(|j| format!("{prefix}{j}")))?;
        trigger_labels.push(format!("{prefix}{}", cfg.qubits));
        register = register.concat(&timer_reg)?;
    }
    if register.dimension() > 1 << 12 {
        return Err(Error::RegisterTooLarge(format!(
            "composite register of {} sites exceeds the dense evolution cap",
            register.n_sites()
        )));
    }

    let mut ops = Vec::new();
    for ((stage, cfg), trigger) in stages.iter().zip(timers).zip(&trigger_labels) {
        if stage.liouvillian.register() != rho0.register() {
            return Err(Error::RegisterMismatch(format!("stage '{}'", stage.name)));
        }
        for op in stage.liouvillian.operators() {
            ops.push(op.transplanted(&register)?.conditioned(trigger, false)?);
        }
        let _ = cfg;
    }
    for (i, cfg) in timers.iter().enumerate() {
        let timer = crate::gadgets::build_timer(cfg)?;
        for op in timer.operators() {
            let mut renamed = Vec::new();
            for label in op.support_labels() {
                renamed.push(format!("tmr{}_{}", i + 1, &label[1..]));
            }
            let refs: Vec<&str> = renamed.iter().map(|s| s.as_str()).collect();
            ops.push(crate::lindblad::LindbladOperator::new(
                register.clone(),
                &refs,
                op.local().clone(),
                format!("tmr{}_{}", i + 1, op.tag()),
            )?);
        }
    }
    let composite = Liouvillian::new(register.clone(), ops)?;

    // initial state: rho0 (x) timer ground configurations
    let mut matrix = rho0.matrix().clone();
    for cfg in timers {
        let phi0 = timer_initial_state(cfg.qubits)?;
        matrix = matrix.kronecker(phi0.matrix());
    }
    let rho_init = DensityMatrix::new(register, matrix, 1e-8)?;
    let tol = integrator_tol.unwrap_or_else(|| crate::default_tol(rho_init.dimension()));
    let rho_full = evolve(&composite, &rho_init, t, tol)?;
    let protocol_labels: Vec<&str> =
        rho0.register().labels().iter().map(|s| s.as_str()).collect();
    let rho_protocol = rho_full.partial_trace(&protocol_labels)?;
    Ok(TimerTriggeredRun { rho_full, rho_protocol })
}

/// Exact pure-state oracle: prepare, measure every pattern, undo the
/// byproduct, and return the worst-case overlap deficit with `phi_in`.
pub fn bookkeeping_worst_deficit(phi_in: &DVector<C64>, n: usize) -> Result<f64> {
    let cluster = prepare_cluster(phi_in, n)?;
    let mut worst = 0.0f64;
    for pattern in 0..(1usize << (n - 1)) {
        let outcomes: Vec<u8> =
            (0..n - 1).map(|j| ((pattern >> (n - 2 - j)) & 1) as u8).collect();
        let out = apply_x_measurements(&cluster, &outcomes)?;
        let (gx, gz) = byproduct_parities(&outcomes);
        let recovered = undo_byproduct(&out, gx, gz);
        let overlap = (phi_in.adjoint() * &recovered)[(0, 0)].norm();
        worst = worst.max(1.0 - overlap);
    }
    Ok(worst)
}

/// Deterministic single-qubit states from Bloch angles.
pub fn bloch_state(theta: f64, phi: f64) -> DVector<C64> {
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    DVector::from_vec(vec![C64::new(c, 0.0), C64::from_polar(s, phi)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{mats, trace_distance, LindbladOperator};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cluster_n1_is_input() {
        let phi = bloch_state(1.1, 0.4);
        let v = prepare_cluster(&phi, 1).unwrap();
        assert!((v - phi).norm() < 1e-14);
    }

    #[test]
    fn cluster_n3_zero_input() {
        // |0> control: first entangler acts trivially, so the state is
        // |0> (x) CZ_23 |+>|+>
        let phi = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let v = prepare_cluster(&phi, 3).unwrap();
        for idx in 0..8 {
            let expect = if idx < 4 {
                let b1 = (idx >> 1) & 1;
                let b2 = idx & 1;
                let sign = if b1 == 1 && b2 == 1 { -1.0 } else { 1.0 };
                0.5 * sign
            } else {
                0.0
            };
            assert!((v[idx] - c(expect, 0.0)).norm() < 1e-14, "idx={idx}");
        }
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cluster_norm_and_parity_args() {
        let phi = bloch_state(2.0, -0.7);
        assert!((prepare_cluster(&phi, 5).unwrap().norm() - 1.0).abs() < 1e-13);
        assert!(prepare_cluster(&phi, 2).is_err());
        let unnorm = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(prepare_cluster(&unnorm, 3).is_err());
    }

    #[test]
    fn cluster_entanglers_invert_to_the_product_state() {
        // applying the controlled-phase chain twice undoes it; projecting
        // the auxiliaries onto |+> then recovers the input exactly
        let n = 5;
        let phi = bloch_state(0.73, 2.1);
        let mut v = prepare_cluster(&phi, n).unwrap();
        for j in 0..n - 1 {
            let bj = n - 1 - j;
            let bj1 = n - 2 - j;
            for (idx, entry) in v.iter_mut().enumerate() {
                if (idx >> bj) & 1 == 1 && (idx >> bj1) & 1 == 1 {
                    *entry = -*entry;
                }
            }
        }
        // contract |+> on qubits 2..n
        let mut out = DVector::<C64>::zeros(2);
        let scale = (2f64.powi((n as i32) - 1)).sqrt();
        for (idx, &a) in v.iter().enumerate() {
            out[idx >> (n - 1)] += a / C64::new(scale, 0.0);
        }
        assert!((out - phi).norm() < 1e-13);
    }

    #[test]
    fn bookkeeping_oracle_exact_for_small_chains() {
        for n in [3usize, 5] {
            let phi = bloch_state(1.234, 0.567);
            let deficit = bookkeeping_worst_deficit(&phi, n).unwrap();
            assert!(deficit < 1e-12, "n={n}: deficit {deficit}");
        }
    }

    #[test]
    fn fidelity_invariant_under_global_phase() {
        let phi = bloch_state(0.9, 1.2);
        let phase = C64::from_polar(1.0, 0.77);
        let phi2: DVector<C64> = &phi * phase;
        let opts = RunOptions { eq_tol: 1e-8, ..Default::default() };
        let a = run_transfer_3qubit(&phi, 1.0, &opts).unwrap();
        let b = run_transfer_3qubit(&phi2, 1.0, &opts).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-7);
    }

    #[test]
    fn single_stage_converges_at_log_rate() {
        // amplitude damping on |1>: equilibrium in ~ ln(1/tol)/omega
        let r = QubitRegister::new(["q1"]).unwrap();
        let op = LindbladOperator::new(r.clone(), &["q1"], mats::ket_bra(0, 1), "ad").unwrap();
        let l = Liouvillian::new(r.clone(), vec![op]).unwrap();
        let rho = DensityMatrix::basis_state(r, "1").unwrap();
        let stages = [TransferStage::new("damp", l)];
        let opts = RunOptions { eq_tol: 1e-9, ..Default::default() };
        let run = run_sequential_with(&stages, &rho, &opts).unwrap();
        let t = run.stage_times[0];
        // population decays as e^{-t}; criterion includes rate factors, so
        // allow a factorish window around ln(1e9) ~ 20.7
        assert!(t > 10.0 && t < 80.0, "t = {t}");
        assert!(run.rho_final.matrix()[(0, 0)].re > 1.0 - 1e-8);
    }

    #[test]
    fn wrong_stage_order_fails_transfer() {
        let phi = bloch_state(1.0, 0.3);
        let (a, b) = crate::gadgets::build_transfer_3qubit(1.0).unwrap();
        let register = transfer3_register();
        let cluster = prepare_cluster(&phi, 3).unwrap();
        let mut full = DVector::<C64>::zeros(register.dimension());
        for i in 0..cluster.len() {
            full[i << 2] = cluster[i];
        }
        let rho0 = DensityMatrix::from_pure(register, &full).unwrap();
        let stages = [TransferStage::new("recover", b), TransferStage::new("measure", a)];
        let run = run_sequential(&stages, &rho0, 1e-8).unwrap();
        let fid = output_fidelity(&run.rho_final, &phi, "l3").unwrap();
        assert!(fid < 1.0 - 1e-3, "reversed stages still gave fidelity {fid}");
    }

    #[test]
    fn timer_triggered_traces_to_unit_protocol_state() {
        let r = QubitRegister::new(["q1"]).unwrap();
        let op = LindbladOperator::new(r.clone(), &["q1"], mats::ket_bra(0, 1), "ad").unwrap();
        let stage = TransferStage::new("damp", Liouvillian::new(r.clone(), vec![op]).unwrap());
        let rho0 = DensityMatrix::basis_state(r, "1").unwrap();
        let timers = [TimerConfig { qubits: 2, rate: 0.02 }];
        let run = run_timer_triggered(&[stage], &timers, &rho0, 3.0, None).unwrap();
        assert!((run.rho_protocol.trace().re - 1.0).abs() < 1e-8);
        assert_eq!(run.rho_protocol.register().n_sites(), 1);
        // early on, the damping is suppressed: fidelity to rho0 >= 1 - 3 t gamma
        let early = trace_distance(&run.rho_protocol, &rho0).unwrap();
        assert!(early <= 3.0 * 3.0 * 0.02, "early action {early}");
    }
}
