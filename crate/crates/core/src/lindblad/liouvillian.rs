use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lindblad::{DensityMatrix, LindbladOperator, QubitRegister, SparseOp};
use crate::C64;

/// A purely dissipative generator: a set of Lindblad operators over one
/// register (no Hamiltonian term).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    register: QubitRegister,
    ops: Vec<LindbladOperator>,
    compiled: Vec<CompiledOp>,
}

#[derive(Debug, Clone)]
struct CompiledOp {
    /// The jump operator in global sparse form.
    l: SparseOp,
    /// `L^+ L` in global sparse form.
    k: SparseOp,
}

impl Liouvillian {
    pub fn new(register: QubitRegister, ops: Vec<LindbladOperator>) -> Result<Self> {
        for op in &ops {
            if op.register() != &register {
                return Err(Error::RegisterMismatch(format!(
                    "operator '{}' attached to a different register",
                    op.tag()
                )));
            }
        }
        let compiled = ops.iter().map(compile).collect();
        Ok(Self { register, ops, compiled })
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn operators(&self) -> &[LindbladOperator] {
        &self.ops
    }

    pub fn dimension(&self) -> usize {
        self.register.dimension()
    }

    /// Union of two generators on the same register.
    pub fn merged(&self, other: &Liouvillian) -> Result<Liouvillian> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch("merging Liouvillians".into()));
        }
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        Liouvillian::new(self.register.clone(), ops)
    }

    /// Re-attach every operator to a larger register (labels must exist).
    pub fn transplanted(&self, new_register: &QubitRegister) -> Result<Liouvillian> {
        let ops = self
            .ops
            .iter()
            .map(|o| o.transplanted(new_register))
            .collect::<Result<Vec<_>>>()?;
        Liouvillian::new(new_register.clone(), ops)
    }

    /// Largest per-operator rate (squared 2-norm of the local matrix).
    pub fn max_rate(&self) -> f64 {
        self.ops.iter().map(|o| o.rate_scale()).fold(0.0, f64::max)
    }

    /// Smallest per-operator rate; the time-budget unit for equilibration.
    pub fn min_rate(&self) -> f64 {
        self.ops.iter().map(|o| o.rate_scale()).fold(f64::INFINITY, f64::min)
    }

    /// Generator action on a raw matrix (no state validation).
    pub(crate) fn apply_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dimension();
        let mut out = DMatrix::zeros(d, d);
        let mut t1 = DMatrix::zeros(d, d);
        let mut t3 = DMatrix::zeros(d, d);
        for cop in &self.compiled {
            t1.fill(C64::new(0.0, 0.0));
            cop.l.mul_dense_add(m, &mut t1); // t1 = L m
            cop.l.dense_mul_adjoint_add(&t1, &mut out); // out += L m L^+
            t3.fill(C64::new(0.0, 0.0));
            cop.k.mul_dense_add(m, &mut t3); // t3 = K m, K = L^+ L
            // out -= (K m + m K)/2 ; m hermitian is not assumed, so use m K = (K^+ m^+)^+
            // directly: (m K)[i,j] = conj((K^+ m^+)[j,i]); for hermitian K this is conj(t3[j,i])
            // only when m is hermitian. Apply the general right-product instead.
            cop.k.dense_mul_adjoint_add(m, &mut t3); // t3 += m K^+ = m K (K hermitian)
            out.zip_apply(&t3, |o, t| *o -= t * 0.5);
        }
        out
    }

    /// Frobenius norm of the generator action; cheap convergence monitor.
    pub fn generator_frobenius(&self, rho: &DensityMatrix) -> Result<f64> {
        self.check_register(rho)?;
        Ok(self.apply_matrix(rho.matrix()).norm())
    }

    /// Trace norm of the generator action.
    pub fn generator_trace_norm(&self, rho: &DensityMatrix) -> Result<f64> {
        self.check_register(rho)?;
        let g = self.apply_matrix(rho.matrix());
        let herm = (g.clone() + g.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(herm);
        Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
    }

    fn check_register(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.register() != &self.register {
            return Err(Error::RegisterMismatch("state register differs from generator".into()));
        }
        Ok(())
    }
}

fn compile(op: &LindbladOperator) -> CompiledOp {
    let dim = op.register().dimension();
    let l = SparseOp::from_triplets(dim, op.embedded_triplets());
    // K = L^+ L computed on the local block, then embedded.
    let klocal = op.local().adjoint() * op.local();
    let kop = LindbladOperator::new(
        op.register().clone(),
        &op.support_labels(),
        klocal,
        format!("{}^+{}", op.tag(), op.tag()),
    )
    .expect("local K inherits a valid support");
    let k = SparseOp::from_triplets(dim, kop.embedded_triplets());
    CompiledOp { l, k }
}

/// `sum_j (L_j rho L_j^+ - 1/2 {L_j^+ L_j, rho})` as a dense matrix.
///
/// The result is Hermitian and traceless (to rounding) for any valid state.
pub fn apply_generator(l: &Liouvillian, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    if rho.register() != l.register() {
        return Err(Error::RegisterMismatch("apply_generator".into()));
    }
    let defect = rho.hermiticity_defect();
    if defect > 1e-7 {
        return Err(Error::InvalidState(format!("input not hermitian, defect {defect:.2e}")));
    }
    Ok(l.apply_matrix(rho.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::operator::mats::*;

    fn damping(rate: f64) -> (QubitRegister, Liouvillian) {
        let r = QubitRegister::new(["q1"]).unwrap();
        let op =
            LindbladOperator::new(r.clone(), &["q1"], ket_bra(0, 1).scale(rate.sqrt()), "ad").unwrap();
        let l = Liouvillian::new(r.clone(), vec![op]).unwrap();
        (r, l)
    }

    #[test]
    fn empty_generator_is_zero() {
        let r = QubitRegister::new(["q1"]).unwrap();
        let l = Liouvillian::new(r.clone(), vec![]).unwrap();
        let rho = DensityMatrix::basis_state(r, "1").unwrap();
        let g = apply_generator(&l, &rho).unwrap();
        assert!(g.norm() < 1e-15);
    }

    #[test]
    fn single_qubit_damping_generator() {
        // L = sqrt(w)|0><1| on |1><1| gives w(|0><0| - |1><1|)
        let w = 1.7;
        let (r, l) = damping(w);
        let rho = DensityMatrix::basis_state(r, "1").unwrap();
        let g = apply_generator(&l, &rho).unwrap();
        assert!((g[(0, 0)].re - w).abs() < 1e-12);
        assert!((g[(1, 1)].re + w).abs() < 1e-12);
        assert!(g[(0, 1)].norm() < 1e-15);
        assert!(g.trace().norm() < 1e-12);
    }

    #[test]
    fn generator_annihilates_trace_on_random_states() {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        let op1 = LindbladOperator::new(r.clone(), &["a"], ket_bra(0, 1), "d1").unwrap();
        let op2 = LindbladOperator::new(
            r.clone(),
            &["a", "b"],
            ket_bra(0, 1).kronecker(&projector(1)).scale(1.3),
            "cp",
        )
        .unwrap();
        let l = Liouvillian::new(r.clone(), vec![op1, op2]).unwrap();
        // a mixed but structured state
        let rho = DensityMatrix::from_diagonal(r, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = apply_generator(&l, &rho).unwrap();
        assert!(g.trace().norm() < 1e-13);
        // hermitian result
        assert!((g.clone() - g.adjoint()).norm() < 1e-13);
    }

    #[test]
    fn register_mismatch_rejected() {
        let (_, l) = damping(1.0);
        let other = QubitRegister::new(["z"]).unwrap();
        let rho = DensityMatrix::basis_state(other, "1").unwrap();
        assert!(apply_generator(&l, &rho).is_err());
    }
}
