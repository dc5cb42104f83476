use nalgebra::DMatrix;

use crate::C64;

/// Minimal sparse operator: a triplet list over a fixed dimension.
///
/// Only the two products needed by the generator are implemented; both keep
/// the dense operand in column-major order so the inner loops stay on
/// contiguous memory.
#[derive(Debug, Clone)]
pub(crate) struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(u32, u32, C64)>,
}

impl SparseOp {
    pub fn from_triplets(dim: usize, mut entries: Vec<(u32, u32, C64)>) -> Self {
        entries.retain(|e| e.2.norm_sqr() > 0.0);
        entries.sort_by_key(|e| (e.0, e.1));
        Self { dim, entries }
    }

    /// `out += self * x`
    pub fn mul_dense_add(&self, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let d = self.dim;
        for c in 0..d {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for &(r, k, v) in &self.entries {
                oc[r as usize] += v * xc[k as usize];
            }
        }
    }

    /// `out += x * self^+` (conjugate transpose on the right).
    pub fn dense_mul_adjoint_add(&self, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        // (x S^+)[:, r] += conj(v) * x[:, k] for each entry S[r, k] = v.
        for &(r, k, v) in &self.entries {
            let vc = v.conj();
            let src = x.column(k as usize);
            let mut dst = out.column_mut(r as usize);
            for i in 0..self.dim {
                dst[i] += vc * src[i];
            }
        }
    }

    #[cfg(test)]
    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] += v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn products_match_dense() {
        let s = SparseOp::from_triplets(
            3,
            vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-0.5, 0.0)), (1, 1, c(0.0, 1.0))],
        );
        let sd = s.to_dense();
        let x = DMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.3, j as f64 - 1.1));

        let mut left = DMatrix::zeros(3, 3);
        s.mul_dense_add(&x, &mut left);
        assert!((left.clone() - &sd * &x).norm() < 1e-14);

        let mut right = DMatrix::zeros(3, 3);
        s.dense_mul_adjoint_add(&x, &mut right);
        assert!((right - &x * sd.adjoint()).norm() < 1e-14);
    }
}
