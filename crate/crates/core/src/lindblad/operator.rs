use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lindblad::register::spread_bits;
use crate::lindblad::QubitRegister;
use crate::C64;

/// A single Lindblad (jump) operator with the rate already folded in as a
/// square-root prefactor.
///
/// The operator acts nontrivially only on its recorded `support` sites; the
/// `local` matrix is dense over those sites (in register order) and stays
/// independent of the register size.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladOperator {
    register: QubitRegister,
    support: Vec<usize>,
    local: DMatrix<C64>,
    tag: String,
}

impl LindbladOperator {
    /// Builds an operator from a local matrix given over `support_labels`
    /// (any order; the matrix is permuted into register order internally).
    pub fn new(
        register: QubitRegister,
        support_labels: &[&str],
        local: DMatrix<C64>,
        tag: impl Into<String>,
    ) -> Result<Self> {
        if support_labels.is_empty() {
            return Err(Error::InvalidOperator("empty support".into()));
        }
        let mut sites = Vec::with_capacity(support_labels.len());
        for l in support_labels {
            sites.push(register.site_index(l)?);
        }
        {
            let mut s = sites.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != sites.len() {
                return Err(Error::InvalidOperator("repeated support site".into()));
            }
        }
        let dim = 1usize << sites.len();
        if local.nrows() != dim || local.ncols() != dim {
            return Err(Error::InvalidOperator(format!(
                "local matrix is {}x{}, support of {} sites needs {dim}x{dim}",
                local.nrows(),
                local.ncols(),
                sites.len()
            )));
        }
        if local.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }

        // Reorder the support into register order, permuting local to match.
        let mut order: Vec<usize> = (0..sites.len()).collect();
        order.sort_by_key(|&a| sites[a]);
        let sorted_sites: Vec<usize> = order.iter().map(|&a| sites[a]).collect();
        let local = if order.iter().enumerate().all(|(i, &a)| i == a) {
            local
        } else {
            let s = sites.len();
            let map = |idx: usize| -> usize {
                let mut out = 0usize;
                for (new_pos, &old_pos) in order.iter().enumerate() {
                    let bit = (idx >> (s - 1 - old_pos)) & 1;
                    out |= bit << (s - 1 - new_pos);
                }
                out
            };
            let mut m = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    m[(map(i), map(j))] = local[(i, j)];
                }
            }
            m
        };

        Ok(Self { register, support: sorted_sites, local, tag: tag.into() })
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    /// Support site indices, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn support_labels(&self) -> Vec<&str> {
        self.support.iter().map(|&s| self.register.labels()[s].as_str()).collect()
    }

    pub fn local(&self) -> &DMatrix<C64> {
        &self.local
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Largest squared singular value of the local matrix; for a jump
    /// operator `sqrt(rate) * V` with contraction `V` this is the rate.
    pub fn rate_scale(&self) -> f64 {
        let svd = self.local.clone().svd(false, false);
        svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s * s))
    }

    /// The same operator tensored with a projector onto `trigger_state`
    /// (false = |0>, true = |1>) at `trigger_label`.
    pub fn conditioned(&self, trigger_label: &str, trigger_state: bool) -> Result<Self> {
        let t = self.register.site_index(trigger_label)?;
        if self.support.contains(&t) {
            return Err(Error::InvalidOperator(format!(
                "trigger site '{trigger_label}' overlaps the target support"
            )));
        }
        let b = usize::from(trigger_state);
        let mut proj = DMatrix::zeros(2, 2);
        proj[(b, b)] = C64::new(1.0, 0.0);
        let local = self.local.kronecker(&proj);
        let mut labels = self.support_labels();
        labels.push(trigger_label);
        let labels_owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let label_refs: Vec<&str> = labels_owned.iter().map(|s| s.as_str()).collect();
        Self::new(
            self.register.clone(),
            &label_refs,
            local,
            format!("{}|{}={}", self.tag, trigger_label, b),
        )
    }

    /// Re-attach the operator to a larger register containing the same
    /// support labels.
    pub fn transplanted(&self, new_register: &QubitRegister) -> Result<Self> {
        let labels = self.support_labels();
        Self::new(new_register.clone(), &labels, self.local.clone(), self.tag.clone())
    }

    /// Triplets of the operator embedded in the full register dimension.
    pub(crate) fn embedded_triplets(&self) -> Vec<(u32, u32, C64)> {
        let n = self.register.n_sites();
        let sup_bits: Vec<usize> = self.support.iter().map(|&s| self.register.bit_of_site(s)).collect();
        let free_bits: Vec<usize> = (0..n)
            .filter(|s| !self.support.contains(s))
            .map(|s| self.register.bit_of_site(s))
            .collect();
        let dim_local = self.local.nrows();
        let mut out = Vec::new();
        for i in 0..dim_local {
            let gi = spread_bits(i, &sup_bits);
            for j in 0..dim_local {
                let v = self.local[(i, j)];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let gj = spread_bits(j, &sup_bits);
                for r in 0..(1usize << free_bits.len()) {
                    let gr = spread_bits(r, &free_bits);
                    out.push(((gi | gr) as u32, (gj | gr) as u32, v));
                }
            }
        }
        out
    }

    /// Dense full-register matrix (small registers only; used by the
    /// stationary-space builder and tests).
    pub fn to_global_dense(&self) -> DMatrix<C64> {
        let d = self.register.dimension();
        let mut m = DMatrix::zeros(d, d);
        for (r, c, v) in self.embedded_triplets() {
            m[(r as usize, c as usize)] += v;
        }
        m
    }
}

/// 2x2 building blocks used by the gadget constructors.
pub mod mats {
    use super::*;

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// `|a><b|`
    pub fn ket_bra(a: usize, b: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(2, 2);
        m[(a, b)] = c(1.0, 0.0);
        m
    }

    pub fn projector(b: usize) -> DMatrix<C64> {
        ket_bra(b, b)
    }

    pub fn sigma_x() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn sigma_z() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    /// `|+><+|` or `|-><-|`
    pub fn x_projector(minus: bool) -> DMatrix<C64> {
        let s = if minus { -0.5 } else { 0.5 };
        DMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(s, 0.), c(s, 0.), c(0.5, 0.)])
    }
}

#[cfg(test)]
mod tests {
    use super::mats::*;
    use super::*;

    #[test]
    fn support_normalized_to_register_order() {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        // |0_b 1_a><1_b 0_a| given in order [b, a]
        let m = {
            let mut m = DMatrix::zeros(4, 4);
            m[(0b01, 0b10)] = c(1.0, 0.0);
            m
        };
        let op = LindbladOperator::new(r, &["b", "a"], m, "t").unwrap();
        assert_eq!(op.support(), &[0, 1]);
        // in register order [a, b] the entry must be |1_a 0_b><0_a 1_b|
        assert!((op.local()[(0b10, 0b01)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn embedding_matches_kron_for_contiguous_support() {
        let r = QubitRegister::new(["a", "b", "c"]).unwrap();
        let op = LindbladOperator::new(r, &["b"], ket_bra(0, 1), "damp").unwrap();
        let full = op.to_global_dense();
        let eye = DMatrix::identity(2, 2);
        let expect = eye.kronecker(&ket_bra(0, 1)).kronecker(&DMatrix::identity(2, 2));
        assert!((full - expect).norm() < 1e-15);
    }

    #[test]
    fn conditioning_rejects_overlap_and_appends_projector() {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        let op = LindbladOperator::new(r, &["a"], ket_bra(0, 1), "damp").unwrap();
        assert!(op.conditioned("a", true).is_err());
        let cond = op.conditioned("b", true).unwrap();
        assert_eq!(cond.support(), &[0, 1]);
        // |0_a 1_b><1_a 1_b|
        assert!((cond.local()[(0b01, 0b11)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((cond.local().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_scale_reads_the_folded_rate() {
        let r = QubitRegister::new(["a"]).unwrap();
        let op = LindbladOperator::new(r, &["a"], ket_bra(0, 1).scale(2.0f64.sqrt()), "d").unwrap();
        assert!((op.rate_scale() - 2.0).abs() < 1e-12);
    }
}
