//! Constructors for the concrete dissipative gadgets.
//!
//! - the star-shaped initializer: unconditional amplitude damping on `M`
//!   auxiliary qubits plus conditional preparation of the central qubit,
//! - the cutoff timer: a chain whose last qubit flips sharply at `N/gamma`,
//! - dissipative measurements with a classical registry,
//! - conditional (triggered) operators,
//! - the measurement-driven state-transfer protocols (3-qubit compact form
//!   and the general odd-n form with measurement and bus rows).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{mats, DensityMatrix, LindbladOperator, Liouvillian, QubitRegister};
use crate::C64;

/// Parameters of the star-shaped initializer gadget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitializerConfig {
    /// Number of auxiliary qubits (`M`).
    pub aux_qubits: usize,
    /// Amplitude-damping rate on each auxiliary qubit (`omega`).
    pub damping_rate: f64,
    /// Conditional-preparation rate on the central qubit (`Gamma`).
    pub preparation_rate: f64,
}

impl InitializerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.aux_qubits < 1 {
            return Err(Error::InvalidConfig("initializer needs at least one auxiliary qubit".into()));
        }
        if !(self.damping_rate > 0.0) || !(self.preparation_rate > 0.0) {
            return Err(Error::InvalidConfig("initializer rates must be strictly positive".into()));
        }
        Ok(())
    }

    /// `omega / (omega + Gamma)`, the per-excitation stationary overlap.
    pub fn xi(&self) -> f64 {
        self.damping_rate / (self.damping_rate + self.preparation_rate)
    }
}

/// Parameters of the timer chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimerConfig {
    /// Number of timer qubits (`N`).
    pub qubits: usize,
    /// Conditional damping rate along the chain (`gamma`).
    pub rate: f64,
}

impl TimerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubits < 2 {
            return Err(Error::InvalidConfig("timer needs at least two qubits".into()));
        }
        if !(self.rate > 0.0) {
            return Err(Error::InvalidConfig("timer rate must be strictly positive".into()));
        }
        Ok(())
    }
}

/// Initializer register: central qubit `c` first, then `a1 ... aM`.
pub fn initializer_register(aux_qubits: usize) -> Result<QubitRegister> {
    QubitRegister::new(
        std::iter::once("c".to_string()).chain((1..=aux_qubits).map(|k| format!("a{k}"))),
    )
}

/// `L_ini = L_ad + L_cp` on `M + 1` qubits: for each auxiliary qubit `k`,
/// `sqrt(omega)|0_k><1_k|` and `sqrt(Gamma)|0_c><1_c| (x) |1_k><1_k|`.
pub fn build_initializer(cfg: &InitializerConfig) -> Result<Liouvillian> {
    cfg.validate()?;
    let register = initializer_register(cfg.aux_qubits)?;
    let mut ops = Vec::with_capacity(2 * cfg.aux_qubits);
    for k in 1..=cfg.aux_qubits {
        let a = format!("a{k}");
        ops.push(LindbladOperator::new(
            register.clone(),
            &[a.as_str()],
            mats::ket_bra(0, 1).scale(cfg.damping_rate.sqrt()),
            format!("ad_{k}"),
        )?);
        ops.push(LindbladOperator::new(
            register.clone(),
            &["c", a.as_str()],
            mats::ket_bra(0, 1)
                .kronecker(&mats::projector(1))
                .scale(cfg.preparation_rate.sqrt()),
            format!("cp_{k}"),
        )?);
    }
    Liouvillian::new(register, ops)
}

/// Timer register `t1 ... tN`.
pub fn timer_register(qubits: usize) -> Result<QubitRegister> {
    QubitRegister::numbered("t", qubits)
}

/// `N - 1` nearest-neighbor operators
/// `sqrt(gamma)|0_j><0_j| (x) |0_{j+1}><1_{j+1}|`.
pub fn build_timer(cfg: &TimerConfig) -> Result<Liouvillian> {
    cfg.validate()?;
    let register = timer_register(cfg.qubits)?;
    let mut ops = Vec::with_capacity(cfg.qubits - 1);
    for j in 1..cfg.qubits {
        let a = format!("t{j}");
        let b = format!("t{}", j + 1);
        ops.push(LindbladOperator::new(
            register.clone(),
            &[a.as_str(), b.as_str()],
            mats::projector(0).kronecker(&mats::ket_bra(0, 1)).scale(cfg.rate.sqrt()),
            format!("cut_{j}"),
        )?);
    }
    Liouvillian::new(register, ops)
}

/// `|0 1 1 ... 1>`: first qubit relaxed, the rest excited.
pub fn timer_initial_state(qubits: usize) -> Result<DensityMatrix> {
    if qubits < 2 {
        return Err(Error::InvalidConfig("timer needs at least two qubits".into()));
    }
    let register = timer_register(qubits)?;
    let bits: String =
        std::iter::once('0').chain(std::iter::repeat('1').take(qubits - 1)).collect();
    DensityMatrix::basis_state(register, &bits)
}

/// Dissipative projective measurement of the `measured` sites in the given
/// orthonormal `basis`, recorded onto computational-basis states of the
/// `registry` sites.
///
/// One jump operator per (outcome, registry source) pair:
/// `sqrt(rate) |xi_k><xi_k| (x) |k><b|` for every registry state `b != k`.
/// Fixed points carry the measurement statistics of the measured subsystem
/// copied onto the registry.
pub fn build_measurement(
    register: &QubitRegister,
    measured: &[&str],
    registry: &[&str],
    basis: &[DVector<C64>],
    rate: f64,
) -> Result<Liouvillian> {
    if !(rate > 0.0) {
        return Err(Error::InvalidConfig("measurement rate must be positive".into()));
    }
    let ds = 1usize << measured.len();
    let dr = 1usize << registry.len();
    if basis.len() != ds {
        return Err(Error::InvalidConfig(format!(
            "basis has {} elements, measured subsystem needs {ds}",
            basis.len()
        )));
    }
    if dr < basis.len() {
        return Err(Error::InvalidConfig(format!(
            "registry dimension {dr} cannot record {} outcomes",
            basis.len()
        )));
    }
    for (i, a) in basis.iter().enumerate() {
        if a.len() != ds {
            return Err(Error::InvalidConfig("basis vector dimension mismatch".into()));
        }
        for (j, b) in basis.iter().enumerate() {
            let ip = (a.adjoint() * b)[(0, 0)];
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - C64::new(want, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidConfig("measurement basis is not orthonormal".into()));
            }
        }
    }

    let support: Vec<&str> = measured.iter().chain(registry.iter()).copied().collect();
    let mut ops = Vec::new();
    for (k, xi) in basis.iter().enumerate() {
        let pk = xi * xi.adjoint();
        for b in 0..dr {
            if b == k {
                continue;
            }
            let mut reg = DMatrix::<C64>::zeros(dr, dr);
            reg[(k, b)] = C64::new(1.0, 0.0);
            let local = pk.kronecker(&reg).scale(rate.sqrt());
            ops.push(LindbladOperator::new(
                register.clone(),
                &support,
                local,
                format!("meas_{k}_from_{b}"),
            )?);
        }
    }
    Liouvillian::new(register.clone(), ops)
}

/// Tensor `target` with a projector onto `trigger_state` at `trigger_site`,
/// so the operator acts only while the trigger qubit sits in that state.
pub fn build_conditional(
    target: &LindbladOperator,
    trigger_site: &str,
    trigger_state: bool,
) -> Result<LindbladOperator> {
    target.conditioned(trigger_site, trigger_state)
}

/// Register of the compact 3-qubit transfer: logical `l1 l2 l3`, registry
/// `r1 r2`.
pub fn transfer3_register() -> QubitRegister {
    QubitRegister::new(["l1", "l2", "l3", "r1", "r2"]).expect("fixed labels")
}

/// The two stages of the 3-qubit transfer.
///
/// Stage A measures logical qubits 1 and 2 in the X basis onto the registry
/// (4 operators). Stage B rotates each recorded branch back onto the input
/// state on qubit 3 while resetting the registry to `|00>` (3 operators).
/// The branch recorded as `(s1, s2)` carries the byproduct
/// `sigma_x^{s2} sigma_z^{s1}`, so the recovery applies `sigma_x` for
/// registry `|01>`, `sigma_z` for `|10>` and `sigma_z sigma_x` for `|11>`.
pub fn build_transfer_3qubit(omega: f64) -> Result<(Liouvillian, Liouvillian)> {
    if !(omega > 0.0) {
        return Err(Error::InvalidConfig("transfer rate must be positive".into()));
    }
    let register = transfer3_register();
    let sq = omega.sqrt();

    let mut a_ops = Vec::with_capacity(4);
    for j in 1..=2usize {
        let lj = format!("l{j}");
        let rj = format!("r{j}");
        a_ops.push(LindbladOperator::new(
            register.clone(),
            &[lj.as_str(), rj.as_str()],
            mats::x_projector(false).kronecker(&mats::ket_bra(0, 1)).scale(sq),
            format!("A_plus_{j}"),
        )?);
        a_ops.push(LindbladOperator::new(
            register.clone(),
            &[lj.as_str(), rj.as_str()],
            mats::x_projector(true).kronecker(&mats::ket_bra(1, 0)).scale(sq),
            format!("A_minus_{j}"),
        )?);
    }
    let stage_a = Liouvillian::new(register.clone(), a_ops)?;

    let mut b_ops = Vec::with_capacity(3);
    for (pattern, correction, name) in [
        (0b01usize, mats::sigma_x(), "B_x"),
        (0b10usize, mats::sigma_z(), "B_z"),
        (0b11usize, mats::sigma_z() * mats::sigma_x(), "B_zx"),
    ] {
        let mut reg = DMatrix::<C64>::zeros(4, 4);
        reg[(0, pattern)] = C64::new(1.0, 0.0);
        b_ops.push(LindbladOperator::new(
            register.clone(),
            &["l3", "r1", "r2"],
            correction.kronecker(&reg).scale(sq),
            name,
        )?);
    }
    let stage_b = Liouvillian::new(register, b_ops)?;
    Ok((stage_a, stage_b))
}

/// One named stage of a staged dissipative protocol.
#[derive(Debug, Clone)]
pub struct TransferStage {
    pub name: String,
    pub liouvillian: Liouvillian,
}

impl TransferStage {
    pub fn new(name: impl Into<String>, liouvillian: Liouvillian) -> Self {
        Self { name: name.into(), liouvillian }
    }
}

/// Register of the general odd-n transfer: logical `l1..ln`, measurement
/// `m1..mn`, two bus rows `b1_1..b1_{n-1}` and `b2_1..b2_{n-1}`.
pub fn transfer_n_register(n: usize) -> Result<QubitRegister> {
    let labels = (1..=n)
        .map(|j| format!("l{j}"))
        .chain((1..=n).map(|j| format!("m{j}")))
        .chain((1..=n - 1).map(|j| format!("b1_{j}")))
        .chain((1..=n - 1).map(|j| format!("b2_{j}")));
    QubitRegister::new(labels)
}

/// Ordered stage list of the general odd-n state transfer.
///
/// For each step `j = 1..n-1`, performed successively:
/// 1. dissipative X-measurement of logical `j` onto measurement qubit `j`,
/// 2. bus update: the measurement qubit is damped while flipping the parity
///    bit of row `b1` (odd `j`) or `b2` (even `j`) at column `j`,
/// 3. for `j < n-1`, both bus rows shift their column-`j` content one
///    column to the right (clean, then move — the two displayed shift
///    operators race if run concurrently, so they form successive stages).
///
/// The final recovery is conditioned on the last two bus qubits, mirroring
/// the 3-qubit stage B.
pub fn build_transfer_nqubit(n: usize, omega: f64) -> Result<Vec<TransferStage>> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidConfig(format!("transfer length must be odd and >= 3, got {n}")));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidConfig("transfer rate must be positive".into()));
    }
    let register = transfer_n_register(n)?;
    let sq = omega.sqrt();
    let mut stages = Vec::new();

    for j in 1..n {
        let lj = format!("l{j}");
        let mj = format!("m{j}");

        let measure = vec![
            LindbladOperator::new(
                register.clone(),
                &[lj.as_str(), mj.as_str()],
                mats::x_projector(false).kronecker(&mats::ket_bra(0, 1)).scale(sq),
                format!("m_plus_{j}"),
            )?,
            LindbladOperator::new(
                register.clone(),
                &[lj.as_str(), mj.as_str()],
                mats::x_projector(true).kronecker(&mats::ket_bra(1, 0)).scale(sq),
                format!("m_minus_{j}"),
            )?,
        ];
        stages.push(TransferStage::new(
            format!("measure-{j}"),
            Liouvillian::new(register.clone(), measure)?,
        ));

        // parity rows: b1 accumulates odd-step outcomes, b2 even-step ones
        let row = if j % 2 == 1 { "b1" } else { "b2" };
        let bus = format!("{row}_{j}");
        let update = vec![LindbladOperator::new(
            register.clone(),
            &[mj.as_str(), bus.as_str()],
            mats::ket_bra(0, 1).kronecker(&mats::sigma_x()).scale(sq),
            format!("mt_{j}"),
        )?];
        stages.push(TransferStage::new(
            format!("bus-update-{j}"),
            Liouvillian::new(register.clone(), update)?,
        ));

        if j < n - 1 {
            let mut clean = Vec::new();
            let mut shift = Vec::new();
            for row in ["b1", "b2"] {
                let src = format!("{row}_{j}");
                let dst = format!("{row}_{}", j + 1);
                clean.push(LindbladOperator::new(
                    register.clone(),
                    &[src.as_str(), dst.as_str()],
                    mats::projector(0).kronecker(&mats::ket_bra(0, 1)).scale(sq),
                    format!("{row}_clean_{j}"),
                )?);
                shift.push(LindbladOperator::new(
                    register.clone(),
                    &[src.as_str(), dst.as_str()],
                    {
                        // |0_j 1_{j+1}><1_j 0_{j+1}|
                        let mut m = DMatrix::<C64>::zeros(4, 4);
                        m[(0b01, 0b10)] = C64::new(1.0, 0.0);
                        m.scale(sq)
                    },
                    format!("{row}_shift_{j}"),
                )?);
            }
            stages.push(TransferStage::new(
                format!("bus-clean-{j}"),
                Liouvillian::new(register.clone(), clean)?,
            ));
            stages.push(TransferStage::new(
                format!("bus-shift-{j}"),
                Liouvillian::new(register.clone(), shift)?,
            ));
        }
    }

    // recovery conditioned on the last two bus qubits; row b1 carries the
    // sigma_z parity, row b2 the sigma_x parity
    let ln = format!("l{n}");
    let b1 = format!("b1_{}", n - 1);
    let b2 = format!("b2_{}", n - 1);
    let mut recover = Vec::with_capacity(3);
    for (pattern, correction, name) in [
        (0b01usize, mats::sigma_x(), "B_x"),
        (0b10usize, mats::sigma_z(), "B_z"),
        (0b11usize, mats::sigma_z() * mats::sigma_x(), "B_zx"),
    ] {
        let mut reg = DMatrix::<C64>::zeros(4, 4);
        reg[(0, pattern)] = C64::new(1.0, 0.0);
        recover.push(LindbladOperator::new(
            register.clone(),
            &[ln.as_str(), b1.as_str(), b2.as_str()],
            correction.kronecker(&reg).scale(sq),
            name,
        )?);
    }
    stages.push(TransferStage::new("recover", Liouvillian::new(register, recover)?));
    Ok(stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::QubitRegister;

    #[test]
    fn initializer_counts_and_supports() {
        let cfg = InitializerConfig { aux_qubits: 1, damping_rate: 1.0, preparation_rate: 2.0 };
        let l = build_initializer(&cfg).unwrap();
        assert_eq!(l.register().n_sites(), 2);
        assert_eq!(l.operators().len(), 2);

        let cfg = InitializerConfig { aux_qubits: 3, damping_rate: 1.0, preparation_rate: 2.0 };
        let l = build_initializer(&cfg).unwrap();
        assert_eq!(l.operators().len(), 6);
        for op in l.operators() {
            if op.tag().starts_with("cp") {
                assert_eq!(op.support_labels()[0], "c");
                assert_eq!(op.support().len(), 2);
            } else {
                assert_eq!(op.support().len(), 1);
            }
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(build_initializer(&InitializerConfig {
            aux_qubits: 0,
            damping_rate: 1.0,
            preparation_rate: 1.0
        })
        .is_err());
        assert!(build_timer(&TimerConfig { qubits: 1, rate: 1.0 }).is_err());
        assert!(build_timer(&TimerConfig { qubits: 3, rate: 0.0 }).is_err());
    }

    #[test]
    fn timer_counts_and_neighbor_supports() {
        let l = build_timer(&TimerConfig { qubits: 2, rate: 0.5 }).unwrap();
        assert_eq!(l.operators().len(), 1);
        let l = build_timer(&TimerConfig { qubits: 4, rate: 0.5 }).unwrap();
        assert_eq!(l.operators().len(), 3);
        for (j, op) in l.operators().iter().enumerate() {
            assert_eq!(op.support(), &[j, j + 1]);
        }
    }

    #[test]
    fn timer_initial_state_is_pure_product() {
        let rho = timer_initial_state(5).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        let idx = rho.register().basis_index("01111").unwrap();
        assert!((rho.matrix()[(idx, idx)].re - 1.0).abs() < 1e-14);

        let rho = timer_initial_state(2).unwrap();
        let idx = rho.register().basis_index("01").unwrap();
        assert!((rho.matrix()[(idx, idx)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measurement_registry_must_fit_outcomes() {
        use nalgebra::DVector;
        let r = QubitRegister::new(["s1", "s2", "r"]).unwrap();
        // four outcomes cannot fit a single registry qubit
        let basis: Vec<DVector<C64>> = (0..4)
            .map(|k| {
                let mut v = DVector::zeros(4);
                v[k] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        assert!(build_measurement(&r, &["s1", "s2"], &["r"], &basis, 1.0).is_err());
    }

    #[test]
    fn transfer3_operator_counts() {
        let (a, b) = build_transfer_3qubit(1.0).unwrap();
        assert_eq!(a.operators().len(), 4);
        assert_eq!(b.operators().len(), 3);
    }

    #[test]
    fn transfer_n_register_sizes() {
        assert_eq!(transfer_n_register(3).unwrap().n_sites(), 10);
        assert!(build_transfer_nqubit(4, 1.0).is_err());
        assert!(build_transfer_nqubit(1, 1.0).is_err());
        let stages = build_transfer_nqubit(3, 1.0).unwrap();
        // per step: measure + update (+ clean + shift for j=1), then recovery
        assert_eq!(stages.len(), 7);
        assert_eq!(stages.last().unwrap().name, "recover");
    }

    #[test]
    fn every_built_operator_is_local() {
        let mut all = Vec::new();
        all.extend(
            build_initializer(&InitializerConfig {
                aux_qubits: 4,
                damping_rate: 1.0,
                preparation_rate: 2.0,
            })
            .unwrap()
            .operators()
            .to_vec(),
        );
        all.extend(build_timer(&TimerConfig { qubits: 5, rate: 1.0 }).unwrap().operators().to_vec());
        let (a, b) = build_transfer_3qubit(1.0).unwrap();
        all.extend(a.operators().to_vec());
        all.extend(b.operators().to_vec());
        for st in build_transfer_nqubit(5, 1.0).unwrap() {
            all.extend(st.liouvillian.operators().to_vec());
        }
        for op in all {
            assert!(op.support().len() <= 3, "operator {} has support {}", op.tag(), op.support().len());
        }
    }
}
