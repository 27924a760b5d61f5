mod common;

use bellzoo::entanglement::{
    is_product_family, is_product_measurement, is_product_state, is_product_unitary, operator_schmidt_rank, realign,
    refine_by_witnesses, schmidt_decompose, outcome_factorization_check, DEFAULT_PRODUCT_TOL,
};
use bellzoo::linalg::{kron, spectral_decomposition, svd, tensor_product, ComplexMatrix, ProductIsomorphism, DEFAULT_CLUSTER_TOL};
use bellzoo::sample::{
    product_family, random_hermitian, random_hermitian_with_spectrum, random_iso, random_product_state,
    random_qubit_projectors, random_state, random_unitary,
};
use common::rng;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Product state and product measurement under a random identification:
    /// the outcome probabilities factorize.
    #[test]
    fn product_state_product_measurement_factorizes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let iso = random_iso(&mut r);
        let local_state = random_product_state(&mut r);
        let local_family = product_family(&random_qubit_projectors(&mut r), &random_qubit_projectors(&mut r));
        let state = iso.pull_back_vector(&local_state).unwrap();
        let projectors: Vec<ComplexMatrix> =
            local_family.projectors().iter().map(|p| iso.pull_back_matrix(p).unwrap()).collect();
        let family = bellzoo::SpectralFamily::new(local_family.eigenvalues().to_vec(), projectors).unwrap();
        let report = outcome_factorization_check(&state, &family, &iso, DEFAULT_PRODUCT_TOL).unwrap();
        prop_assert!(report.residual < 1e-10, "residual {}", report.residual);
        prop_assert!(report.factorizes && report.state_is_product && report.family_is_product);
    }

    /// A product measurement, refined by the eigenprojectors of its
    /// witness factors, consists of product projectors.
    #[test]
    fn product_measurement_refines_to_product_projectors(seed in any::<u64>(), degenerate in any::<bool>()) {
        let mut r = rng(seed);
        let iso = random_iso(&mut r);
        let (x, y) = if degenerate {
            (random_hermitian_with_spectrum(&mut r, &[1.0, -1.0]), random_hermitian_with_spectrum(&mut r, &[1.0, -1.0]))
        } else {
            (random_hermitian(&mut r, 2), random_hermitian(&mut r, 2))
        };
        let m = iso.pull_back_matrix(&kron(&x, &y).unwrap()).unwrap();
        let report = is_product_measurement(&m, &iso, DEFAULT_PRODUCT_TOL).unwrap();
        prop_assert!(report.is_product, "residual {}", report.residual);
        let witnesses = report.witnesses.unwrap();
        let family = spectral_decomposition(&m, DEFAULT_CLUSTER_TOL).unwrap();
        let pieces = refine_by_witnesses(&family, &witnesses, &iso).unwrap();
        let mut total = ComplexMatrix::zeros(4).unwrap();
        for p in &pieces {
            prop_assert!((p * p).max_abs_diff(p) < 1e-9);
            let os = operator_schmidt_rank(p, &iso, 1e-9).unwrap();
            prop_assert!(os.residual < 1e-9, "piece residual {}", os.residual);
            total = &total + p;
        }
        prop_assert!(total.max_abs_diff(&ComplexMatrix::identity(4).unwrap()) < 1e-9);
    }

    /// Every state is a product state for an identification whose basis
    /// contains it.
    #[test]
    fn entanglement_is_relative(seed in any::<u64>()) {
        let s = random_state(&mut rng(seed), 4);
        let iso = ProductIsomorphism::containing(&s).unwrap();
        let report = is_product_state(&s, &iso, DEFAULT_PRODUCT_TOL).unwrap();
        prop_assert!(report.is_product, "residual {}", report.residual);
    }

    #[test]
    fn schmidt_invariant_under_local_unitaries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_state(&mut r, 4);
        let iso = random_iso(&mut r);
        let local = kron(&random_unitary(&mut r, 2), &random_unitary(&mut r, 2)).unwrap();
        // I' = (Ua ⊗ Ub) I, i.e. W' = W (Ua ⊗ Ub)†.
        let moved = ProductIsomorphism::from_unitary(iso.unitary() * &local.adjoint()).unwrap();
        let a = schmidt_decompose(&s, &iso).unwrap();
        let b = schmidt_decompose(&s, &moved).unwrap();
        for k in 0..2 {
            prop_assert!((a.coefficients[k] - b.coefficients[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn schmidt_reconstructs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_state(&mut r, 4);
        let iso = random_iso(&mut r);
        let sd = schmidt_decompose(&s, &iso).unwrap();
        let norm: f64 = sd.coefficients.iter().map(|c| c * c).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        prop_assert!(sd.coefficients[0] >= sd.coefficients[1] && sd.coefficients[1] >= 0.0);
        prop_assert!(sd.reconstruct().max_abs_diff(&iso.apply_vector(&s).unwrap()) < 1e-9);
    }

    #[test]
    fn product_states_detected(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = tensor_product(&random_state(&mut r, 2), &random_state(&mut r, 2)).unwrap();
        let report = is_product_state(&s, &ProductIsomorphism::identity(), DEFAULT_PRODUCT_TOL).unwrap();
        prop_assert!(report.is_product && report.residual < 1e-12);
    }

    #[test]
    fn operator_schmidt_reconstructs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = &random_hermitian(&mut r, 4) * &random_unitary(&mut r, 4);
        let rr = realign(&m).unwrap();
        prop_assert_eq!(&realign(&rr).unwrap(), &m);
        let s = svd(&rr);
        let mut total = ComplexMatrix::zeros(4).unwrap();
        for k in 0..4 {
            let (u, v) = (s.u.column(k), s.v.column(k).conj());
            let x = ComplexMatrix::from_rows(vec![vec![u.get(0), u.get(1)], vec![u.get(2), u.get(3)]]).unwrap();
            let y = ComplexMatrix::from_rows(vec![vec![v.get(0), v.get(1)], vec![v.get(2), v.get(3)]]).unwrap();
            total = &total + &kron(&x, &y).unwrap().scale_real(s.singular_values[k]);
        }
        prop_assert!(total.max_abs_diff(&m) < 1e-9);
    }

    #[test]
    fn local_unitaries_are_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (ua, ub) = (random_unitary(&mut r, 2), random_unitary(&mut r, 2));
        let report = is_product_unitary(&kron(&ua, &ub).unwrap(), &ProductIsomorphism::identity(), DEFAULT_PRODUCT_TOL).unwrap();
        prop_assert!(report.is_product, "residual {}", report.residual);
        let (x, y) = report.witnesses.unwrap();
        prop_assert!(kron(&x, &y).unwrap().max_abs_diff(&kron(&ua, &ub).unwrap()) < 1e-9);
    }

    #[test]
    fn random_measurements_are_entangled(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_hermitian(&mut r, 4);
        prop_assert!(!is_product_measurement(&m, &ProductIsomorphism::identity(), DEFAULT_PRODUCT_TOL).unwrap().is_product);
    }

    #[test]
    fn product_families_pass_grid_test(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = product_family(&random_qubit_projectors(&mut r), &random_qubit_projectors(&mut r));
        let report = is_product_family(&f, &ProductIsomorphism::identity(), DEFAULT_PRODUCT_TOL).unwrap();
        prop_assert!(report.is_product && report.residual < 1e-10);
    }
}
