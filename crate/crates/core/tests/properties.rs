//! Property tests: evolution invariants (trace, positivity, semigroup,
//! contractivity), generator annihilation on stationary outputs, and
//! serialization round-trips, over randomized small instances.

use nalgebra::DMatrix;
use proptest::prelude::*;

use dqip_core::lindblad::{
    apply_generator, evolve, steady_state, trace_distance, DensityMatrix, LindbladOperator,
    Liouvillian, QubitRegister,
};
use dqip_core::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A random two-qubit dissipative generator assembled from damping,
/// raising and conditional pieces with bounded rates.
fn random_liouvillian(seeds: [f64; 6]) -> Liouvillian {
    let r = QubitRegister::new(["a", "b"]).unwrap();
    let damp = |to: usize, from: usize| {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(to, from)] = c(1.0, 0.0);
        m
    };
    let ops = vec![
        LindbladOperator::new(r.clone(), &["a"], damp(0, 1).scale(0.2 + seeds[0]), "da").unwrap(),
        LindbladOperator::new(r.clone(), &["b"], damp(0, 1).scale(0.2 + seeds[1]), "db").unwrap(),
        LindbladOperator::new(
            r.clone(),
            &["a", "b"],
            damp(0, 1).kronecker(&damp(1, 1)).scale(0.2 + seeds[2]),
            "cond",
        )
        .unwrap(),
        LindbladOperator::new(
            r.clone(),
            &["b"],
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
                .scale(0.1 + seeds[3] * 0.5),
            "deph",
        )
        .unwrap(),
        LindbladOperator::new(r.clone(), &["a"], damp(1, 0).scale(0.1 + seeds[4] * 0.3), "raise")
            .unwrap(),
    ];
    let _ = seeds[5];
    Liouvillian::new(r, ops).unwrap()
}

fn random_diag_state(register: QubitRegister, seeds: [f64; 4]) -> DensityMatrix {
    let total: f64 = seeds.iter().map(|s| s + 0.05).sum();
    let probs: Vec<f64> = seeds.iter().map(|s| (s + 0.05) / total).collect();
    DensityMatrix::from_diagonal(register, &probs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolve_preserves_trace_and_positivity(
        seeds in prop::array::uniform6(0.0f64..1.0),
        probs in prop::array::uniform4(0.0f64..1.0),
        t in 0.0f64..6.0,
    ) {
        let tol = 1e-10;
        let l = random_liouvillian(seeds);
        let rho0 = random_diag_state(l.register().clone(), probs);
        let rho = evolve(&l, &rho0, t, tol).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() <= 10.0 * tol);
        prop_assert!(rho.min_eigenvalue() >= -10.0 * tol);
        prop_assert!(rho.hermiticity_defect() <= 10.0 * tol);
    }

    #[test]
    fn evolve_semigroup_property(
        seeds in prop::array::uniform6(0.0f64..1.0),
        probs in prop::array::uniform4(0.0f64..1.0),
        s in 0.05f64..3.0,
        t in 0.05f64..3.0,
    ) {
        let tol = 1e-10;
        let l = random_liouvillian(seeds);
        let rho0 = random_diag_state(l.register().clone(), probs);
        let two_leg = evolve(&l, &evolve(&l, &rho0, s, tol).unwrap(), t, tol).unwrap();
        let one_leg = evolve(&l, &rho0, s + t, tol).unwrap();
        prop_assert!(trace_distance(&two_leg, &one_leg).unwrap() <= 10.0 * tol);
    }

    #[test]
    fn evolve_is_a_trace_distance_contraction(
        seeds in prop::array::uniform6(0.0f64..1.0),
        pa in prop::array::uniform4(0.0f64..1.0),
        pb in prop::array::uniform4(0.0f64..1.0),
        t in 0.0f64..5.0,
    ) {
        let tol = 1e-10;
        let l = random_liouvillian(seeds);
        let rho = random_diag_state(l.register().clone(), pa);
        let sigma = random_diag_state(l.register().clone(), pb);
        let before = trace_distance(&rho, &sigma).unwrap();
        let after = trace_distance(
            &evolve(&l, &rho, t, tol).unwrap(),
            &evolve(&l, &sigma, t, tol).unwrap(),
        )
        .unwrap();
        prop_assert!(after <= before + 10.0 * tol);
    }

    #[test]
    fn generator_annihilates_stationary_basis(
        seeds in prop::array::uniform6(0.0f64..1.0),
    ) {
        let tol = 1e-10;
        let l = random_liouvillian(seeds);
        for rho in steady_state(&l, tol).unwrap() {
            let g = apply_generator(&l, &rho).unwrap();
            // operator (trace) norm bounded by the nuclear sum
            let herm = (g.clone() + g.adjoint()).scale(0.5);
            let nuclear: f64 = nalgebra::SymmetricEigen::new(herm)
                .eigenvalues
                .iter()
                .map(|e| e.abs())
                .sum();
            prop_assert!(nuclear <= 1e-6);
        }
    }

    #[test]
    fn density_json_roundtrip(
        probs in prop::array::uniform4(0.0f64..1.0),
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        let rho = random_diag_state(r.clone(), probs);
        // add a small coherence and rehermitize
        let mut m = rho.matrix().clone();
        let z = C64::from_polar(0.1 * probs[0].min(probs[3]), phase);
        m[(0, 3)] += z;
        m[(3, 0)] += z.conj();
        let rho = DensityMatrix::new(r, m, 1e-8).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        prop_assert!((back.matrix() - rho.matrix()).norm() < 1e-14);
        prop_assert_eq!(back.register(), rho.register());
    }

    #[test]
    fn liouvillian_json_roundtrip(seeds in prop::array::uniform6(0.0f64..1.0)) {
        let l = random_liouvillian(seeds);
        let back = Liouvillian::from_json(&l.to_json()).unwrap();
        prop_assert_eq!(back.operators().len(), l.operators().len());
        for (a, b) in back.operators().iter().zip(l.operators()) {
            prop_assert!((a.local() - b.local()).norm() < 1e-15);
            prop_assert_eq!(a.support(), b.support());
        }
    }
}
