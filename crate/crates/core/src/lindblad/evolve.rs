use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lindblad::{DensityMatrix, Liouvillian};
use crate::{default_tol, C64};

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Evolves `rho0` for time `t` under `l` with adaptive Dormand-Prince
/// stepping. The per-step error control is tightened two orders below
/// `tol` so that refining the step sequence moves the result by less than
/// `tol` in trace norm.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t: f64, tol: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("negative or NaN evolution time {t}")));
    }
    if rho0.register() != l.register() {
        return Err(Error::RegisterMismatch("evolve state/generator".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    if t == 0.0 || l.operators().is_empty() {
        return Ok(rho0.clone());
    }

    let d = l.dimension();
    let atol = (tol * 1e-2).max(1e-15);
    let rtol = (tol * 1e-2).max(1e-15);

    let mut y = rho0.matrix().clone();
    let mut ks: Vec<DMatrix<C64>> = Vec::with_capacity(7);
    ks.push(l.apply_matrix(&y));
    for _ in 1..7 {
        ks.push(DMatrix::zeros(d, d));
    }
    let mut ytmp = DMatrix::zeros(d, d);

    // initial step from the generator scale
    let scale = l.max_rate().max(1e-300);
    let mut h = (0.05 / scale).min(t);
    let mut time = 0.0f64;
    let mut steps = 0usize;

    while time < t {
        if steps > MAX_STEPS {
            return Err(Error::IntegratorFailure(format!(
                "step budget exhausted at t = {time:.6e} of {t:.6e}"
            )));
        }
        steps += 1;
        if time + h > t {
            h = t - time;
        }

        // stages 2..7 (k1 is fresh from the previous step, FSAL)
        for s in 0..6 {
            ytmp.copy_from(&y);
            for (j, k) in ks.iter().take(s + 1).enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    ytmp.zip_apply(k, |o, kv| *o += kv * (a * h));
                }
            }
            ks[s + 1] = l.apply_matrix(&ytmp);
        }

        // 5th-order candidate and embedded error
        ytmp.copy_from(&y);
        for (j, k) in ks.iter().enumerate() {
            if B5[j] != 0.0 {
                ytmp.zip_apply(k, |o, kv| *o += kv * (B5[j] * h));
            }
        }
        let mut err_sq = 0.0f64;
        {
            let mut count = 0usize;
            // scaled RMS of h * sum (b5 - b4)_j k_j
            for idx in 0..y.len() {
                let mut e = C64::new(0.0, 0.0);
                for (j, k) in ks.iter().enumerate() {
                    let w = B5[j] - B4[j];
                    if w != 0.0 {
                        e += k[idx] * w;
                    }
                }
                let e = e * h;
                let sc = atol + rtol * y[idx].norm().max(ytmp[idx].norm());
                let r = e.norm() / sc;
                err_sq += r * r;
                count += 1;
            }
            err_sq /= count as f64;
        }
        let err = err_sq.sqrt();

        if err <= 1.0 {
            time += h;
            std::mem::swap(&mut y, &mut ytmp);
            let knew = l.apply_matrix(&y);
            ks[0] = knew;
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::IntegratorFailure("step size underflow".into()));
        }
    }

    // keep the state numerically hermitian; the dynamics preserve it and
    // this only folds in rounding noise
    let herm = (y.clone() + y.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_parts_unchecked(rho0.register().clone(), herm))
}

/// [`evolve`] with the dimension-dependent default tolerance.
pub fn evolve_default(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    evolve(l, rho0, t, default_tol(l.dimension()))
}
