use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lindblad::{evolve, DensityMatrix, Liouvillian};
use crate::{C64, DENSE_SUPEROP_CAP};

pub const DEFAULT_KERNEL_CAP: usize = 32;

const SVD_REL_THRESHOLD: f64 = 1e-9;

/// Dense superoperator in column-stacking convention:
/// `vec(L rho L^+ - 1/2 {L^+L, rho}) = S vec(rho)`.
pub(crate) fn superoperator_dense(l: &Liouvillian) -> Result<DMatrix<C64>> {
    let d = l.dimension();
    if d * d > DENSE_SUPEROP_CAP {
        return Err(Error::RegisterTooLarge(format!(
            "superoperator dimension {} exceeds the dense cap {DENSE_SUPEROP_CAP}",
            d * d
        )));
    }
    let eye = DMatrix::<C64>::identity(d, d);
    let mut s = DMatrix::<C64>::zeros(d * d, d * d);
    for op in l.operators() {
        let lf = op.to_global_dense();
        let k = lf.adjoint() * &lf;
        s += lf.map(|v| v.conj()).kronecker(&lf);
        s -= (eye.kronecker(&k) + k.transpose().kronecker(&eye)).scale(0.5);
    }
    Ok(s)
}

/// Basis of the stationary space of `l`, returned as valid density matrices.
///
/// The kernel of the dense superoperator is extracted by SVD, hermitized,
/// and each basis direction is shifted by a reference stationary state (the
/// long-time limit of the maximally mixed state) until positive.
pub fn steady_state(l: &Liouvillian, tol: f64) -> Result<Vec<DensityMatrix>> {
    steady_state_capped(l, tol, DEFAULT_KERNEL_CAP)
}

pub fn steady_state_capped(l: &Liouvillian, tol: f64, cap: usize) -> Result<Vec<DensityMatrix>> {
    if l.operators().is_empty() {
        return Err(Error::InvalidConfig("stationary space of an empty generator".into()));
    }
    let d = l.dimension();
    let s = superoperator_dense(l)?;
    let svd = s.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let thresh = SVD_REL_THRESHOLD * smax.max(1.0);

    let mut kernel: Vec<DMatrix<C64>> = Vec::new();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= thresh {
            let row = v_t.row(i);
            let vec: DVector<C64> = row.adjoint();
            kernel.push(DMatrix::from_column_slice(d, d, vec.as_slice()));
        }
    }
    if kernel.is_empty() {
        return Err(Error::IntegratorFailure("no stationary direction found".into()));
    }
    if kernel.len() > cap {
        return Err(Error::KernelCapExceeded { found: kernel.len(), cap });
    }

    // Hermitian basis of the kernel by Gram-Schmidt over candidate parts.
    let mut herm_basis: Vec<DMatrix<C64>> = Vec::new();
    let push_candidate = |cand: DMatrix<C64>, basis: &mut Vec<DMatrix<C64>>| {
        let mut v = cand;
        for b in basis.iter() {
            let ip = hs_inner(b, &v);
            v.zip_apply(b, |o, bv| *o -= bv * ip);
        }
        let n = v.norm();
        if n > 1e-7 {
            basis.push(v.unscale(n));
        }
    };
    // seed with the reference stationary state so it is inside the span
    let rho_ref = reference_stationary(l, tol)?;
    push_candidate(rho_ref.matrix().clone(), &mut herm_basis);
    for x in &kernel {
        let h = (x + x.adjoint()).scale(0.5);
        let a = ((x - x.adjoint()) * C64::new(0.0, -0.5)).clone();
        push_candidate(h, &mut herm_basis);
        push_candidate(a, &mut herm_basis);
    }
    if herm_basis.len() != kernel.len() {
        return Err(Error::InvalidState(format!(
            "stationary space is not closed under conjugation: complex dim {}, hermitian dim {}",
            kernel.len(),
            herm_basis.len()
        )));
    }

    // smallest positive eigenvalue of the reference state
    let ref_eig = SymmetricEigen::new(rho_ref.matrix().clone());
    let p_min = ref_eig
        .eigenvalues
        .iter()
        .filter(|&&e| e > 1e-10)
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if !p_min.is_finite() {
        return Err(Error::InvalidState("reference stationary state is numerically null".into()));
    }

    let mut out = Vec::with_capacity(herm_basis.len());
    out.push(rho_ref.clone());
    for b in herm_basis.iter().skip(1) {
        let eig = SymmetricEigen::new(b.clone());
        let lam_min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        let mut c = if lam_min >= -1e-12 { 0.0 } else { 1.1 * (-lam_min) / p_min };
        let mut state = None;
        for _ in 0..60 {
            let m = b + rho_ref.matrix().scale(c);
            let lam = SymmetricEigen::new(m.clone()).eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
            let tr = m.trace().re;
            if lam >= -1e-10 && tr > 1e-9 {
                state = Some(m.unscale(tr));
                break;
            }
            c = if c == 0.0 { 1.0 } else { c * 2.0 };
        }
        let m = state.ok_or_else(|| {
            Error::InvalidState("stationary direction admits no density-matrix representative".into())
        })?;
        out.push(DensityMatrix::from_parts_unchecked(l.register().clone(), m));
    }
    Ok(out)
}

fn hs_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

/// Long-time limit of the maximally mixed state: a faithful stationary
/// state on the recurrent subspace.
fn reference_stationary(l: &Liouvillian, tol: f64) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::maximally_mixed(l.register().clone());
    let rate = l.max_rate();
    if rate <= 0.0 {
        return Err(Error::InvalidConfig("generator has zero rates".into()));
    }
    let mut step = 2.0 / rate;
    for _ in 0..60 {
        if l.generator_frobenius(&rho)? <= (tol * 1e-1).max(1e-13) {
            return Ok(rho);
        }
        rho = evolve(l, &rho, step, (tol * 1e-2).max(1e-13))?;
        step *= 2.0;
    }
    Err(Error::IntegratorFailure("reference stationary state did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::apply_generator;
    use crate::lindblad::operator::mats::*;
    use crate::lindblad::{LindbladOperator, QubitRegister};

    #[test]
    fn single_qubit_damping_has_unique_ground_state() {
        let r = QubitRegister::new(["q1"]).unwrap();
        let op = LindbladOperator::new(r.clone(), &["q1"], ket_bra(0, 1), "ad").unwrap();
        let l = Liouvillian::new(r, vec![op]).unwrap();
        let basis = steady_state(&l, 1e-10).unwrap();
        assert_eq!(basis.len(), 1);
        let rho = &basis[0];
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-8);
        let g = apply_generator(&l, rho).unwrap();
        assert!(g.norm() < 1e-9);
    }

    #[test]
    fn kernel_cap_error_triggers() {
        // no dissipation on one of two qubits: kernel is 4-dimensional on
        // the free qubit (times the dark state of the damped one)
        let r = QubitRegister::new(["a", "b"]).unwrap();
        let op = LindbladOperator::new(r.clone(), &["a"], ket_bra(0, 1), "ad").unwrap();
        let l = Liouvillian::new(r, vec![op]).unwrap();
        match steady_state_capped(&l, 1e-10, 2) {
            Err(Error::KernelCapExceeded { found, cap }) => {
                assert_eq!(found, 4);
                assert_eq!(cap, 2);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
        // and with a big enough cap each element is a stationary state
        let basis = steady_state_capped(&l, 1e-10, 8).unwrap();
        assert_eq!(basis.len(), 4);
        for rho in &basis {
            rho.check(Some(1e-7)).unwrap();
            assert!(apply_generator(&l, rho).unwrap().norm() < 1e-7);
        }
    }
}
