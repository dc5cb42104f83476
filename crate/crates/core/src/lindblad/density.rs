use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lindblad::QubitRegister;
use crate::{default_tol, C64};

/// A trace-one positive operator over a labeled qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    register: QubitRegister,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace against `tol`. Positivity is
    /// only checked by [`DensityMatrix::check`] since it needs an
    /// eigendecomposition.
    pub fn new(register: QubitRegister, matrix: DMatrix<C64>, tol: f64) -> Result<Self> {
        let d = register.dimension();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, register dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dm = Self { register, matrix };
        let h = dm.hermiticity_defect();
        if h > tol {
            return Err(Error::InvalidState(format!("hermiticity defect {h:.3e} > {tol:.3e}")));
        }
        let t = dm.trace();
        if (t.re - 1.0).abs() > tol || t.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {t} deviates from 1 beyond {tol:.3e}")));
        }
        Ok(dm)
    }

    /// Wraps a matrix that is trusted to be a valid state (integrator
    /// internals); invariants are still enforced by the test suite.
    pub(crate) fn from_parts_unchecked(register: QubitRegister, matrix: DMatrix<C64>) -> Self {
        Self { register, matrix }
    }

    pub fn from_pure(register: QubitRegister, psi: &DVector<C64>) -> Result<Self> {
        let d = register.dimension();
        if psi.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "state vector length {} vs register dimension {d}",
                psi.len()
            )));
        }
        let n2 = psi.norm_squared();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("state vector norm^2 = {n2}")));
        }
        let matrix = psi * psi.adjoint();
        Ok(Self { register, matrix })
    }

    /// `|bits><bits|` for a computational-basis ket given as a bit string.
    pub fn basis_state(register: QubitRegister, bits: &str) -> Result<Self> {
        let idx = register.basis_index(bits)?;
        let d = register.dimension();
        let mut m = DMatrix::zeros(d, d);
        m[(idx, idx)] = C64::new(1.0, 0.0);
        Ok(Self { register, matrix: m })
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(register: QubitRegister) -> Self {
        let d = register.dimension();
        let m = DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        Self { register, matrix: m }
    }

    /// Diagonal state from a classical probability vector.
    pub fn from_diagonal(register: QubitRegister, probs: &[f64]) -> Result<Self> {
        let d = register.dimension();
        if probs.len() != d {
            return Err(Error::DimensionMismatch("probability vector length".into()));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState("not a probability vector".into()));
        }
        let mut m = DMatrix::zeros(d, d);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        Ok(Self { register, matrix: m })
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.register.dimension()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dimension()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.matrix.nrows() {
            for j in i..self.matrix.ncols() {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.matrix.clone() + self.matrix.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(herm);
        eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Full validity check including positivity to `tol` (default per
    /// dimension when `None`).
    pub fn check(&self, tol: Option<f64>) -> Result<()> {
        let tol = tol.unwrap_or_else(|| default_tol(self.dimension()));
        let h = self.hermiticity_defect();
        if h > tol {
            return Err(Error::InvalidState(format!("hermiticity defect {h:.3e}")));
        }
        let t = self.trace();
        if (t.re - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {:.3e} off unity", t.re)));
        }
        let lam = self.min_eigenvalue();
        if lam < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {lam:.3e}")));
        }
        Ok(())
    }

    /// Reduced density matrix on the sites named in `keep` (register order).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidConfig("cannot trace out every site".into()));
        }
        let mut keep_sites = Vec::with_capacity(keep.len());
        for label in keep {
            keep_sites.push(self.register.site_index(label)?);
        }
        let mut sorted = keep_sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep_sites.len() {
            return Err(Error::InvalidConfig("duplicate sites in keep set".into()));
        }
        let n = self.register.n_sites();
        let keep_bits: Vec<usize> = sorted.iter().map(|&s| self.register.bit_of_site(s)).collect();
        let rest_bits: Vec<usize> = (0..n)
            .filter(|&s| !sorted.contains(&s))
            .map(|s| self.register.bit_of_site(s))
            .collect();

        let new_register =
            QubitRegister::new(sorted.iter().map(|&s| self.register.labels()[s].clone()))?;
        let dk = 1 << sorted.len();
        let mut out = DMatrix::zeros(dk, dk);
        for i in 0..dk {
            let gi = super::register::spread_bits(i, &keep_bits);
            for j in 0..dk {
                let gj = super::register::spread_bits(j, &keep_bits);
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..(1usize << rest_bits.len()) {
                    let gr = super::register::spread_bits(r, &rest_bits);
                    acc += self.matrix[(gi | gr, gj | gr)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix { register: new_register, matrix: out })
    }

    /// The same state viewed with register sites reordered as `new_order`
    /// (a list of existing labels).
    pub fn permute_sites(&self, new_order: &[&str]) -> Result<DensityMatrix> {
        let n = self.register.n_sites();
        if new_order.len() != n {
            return Err(Error::DimensionMismatch("permutation must list every site".into()));
        }
        let mut old_sites = Vec::with_capacity(n);
        for label in new_order {
            old_sites.push(self.register.site_index(label)?);
        }
        let new_register = QubitRegister::new(new_order.iter().map(|s| s.to_string()))?;
        let d = self.dimension();
        // index map: new index -> old index
        let map: Vec<usize> = (0..d)
            .map(|idx| {
                let mut old = 0usize;
                for (new_site, &old_site) in old_sites.iter().enumerate() {
                    let bit = (idx >> (n - 1 - new_site)) & 1;
                    old |= bit << (n - 1 - old_site);
                }
                old
            })
            .collect();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.matrix[(map[i], map[j])];
            }
        }
        Ok(DensityMatrix { register: new_register, matrix: m })
    }
}

/// Trace distance `1/2 ||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.register != sigma.register {
        return Err(Error::RegisterMismatch("trace_distance operands".into()));
    }
    let diff = (rho.matrix.clone() - &sigma.matrix + (rho.matrix.adjoint() - sigma.matrix.adjoint()))
        .scale(0.5);
    let eig = SymmetricEigen::new(diff);
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// `<psi| rho |psi>` for a normalized pure state.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &DVector<C64>) -> Result<f64> {
    if psi.len() != rho.dimension() {
        return Err(Error::DimensionMismatch("fidelity state vector".into()));
    }
    let n2 = psi.norm_squared();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("unnormalized state vector, norm^2 = {n2}")));
    }
    Ok((psi.adjoint() * &rho.matrix * psi)[(0, 0)].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qubit() -> QubitRegister {
        QubitRegister::new(["q1"]).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let r = qubit();
        let zero = DensityMatrix::basis_state(r.clone(), "0").unwrap();
        let one = DensityMatrix::basis_state(r.clone(), "1").unwrap();
        let mixed = DensityMatrix::maximally_mixed(r);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-14);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        // |0><0| vs I/2: eigenvalues of the difference are +-1/2
        assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn fidelity_examples() {
        let r = qubit();
        let psi = dvector![c(1.0, 0.0), c(0.0, 0.0)];
        let orth = dvector![c(0.0, 0.0), c(1.0, 0.0)];
        let rho = DensityMatrix::from_pure(r.clone(), &psi).unwrap();
        assert!((fidelity_with_pure(&rho, &psi).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity_with_pure(&rho, &orth).unwrap().abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(r);
        let s = 0.5f64.sqrt();
        let plus = dvector![c(s, 0.0), c(s, 0.0)];
        assert!((fidelity_with_pure(&mixed, &plus).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        // product |0><0| x |1><1|
        let rho = DensityMatrix::basis_state(r.clone(), "01").unwrap();
        let ra = rho.partial_trace(&["a"]).unwrap();
        assert!((ra.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);

        let s = 0.5f64.sqrt();
        let bell = dvector![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let rho = DensityMatrix::from_pure(r, &bell).unwrap();
        let rb = rho.partial_trace(&["b"]).unwrap();
        assert!((rb.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((rb.matrix()[(1, 1)].re - 0.5).abs() < 1e-14);
        assert!(rb.matrix()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn empty_keep_rejected() {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        let rho = DensityMatrix::maximally_mixed(r);
        assert!(rho.partial_trace(&[]).is_err());
    }

    #[test]
    fn validation_rejects_bad_states() {
        let r = qubit();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.7, 0.0);
        m[(1, 1)] = c(0.7, 0.0);
        assert!(DensityMatrix::new(r.clone(), m, 1e-10).is_err()); // trace 1.4
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        m[(0, 1)] = c(0.3, 0.0); // not hermitian
        assert!(DensityMatrix::new(r, m, 1e-10).is_err());
    }

    #[test]
    fn permute_sites_roundtrip() {
        let r = QubitRegister::new(["a", "b", "c"]).unwrap();
        let rho = DensityMatrix::basis_state(r, "011").unwrap();
        let p = rho.permute_sites(&["c", "a", "b"]).unwrap();
        // site values preserved under relabeling
        assert!((p.matrix()[(0b101, 0b101)].re - 1.0).abs() < 1e-14);
        let back = p.permute_sites(&["a", "b", "c"]).unwrap();
        assert!((back.matrix() - rho_matrix(&back, "011")).norm() < 1e-14);
    }

    fn rho_matrix(d: &DensityMatrix, bits: &str) -> DMatrix<C64> {
        DensityMatrix::basis_state(d.register().clone(), bits).unwrap().matrix().clone()
    }
}
