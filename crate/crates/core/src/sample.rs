//! Random states, operators and coincidence data for property testing and
//! benchmarking. Unitaries are Haar-distributed (Gram-Schmidt of a complex
//! Ginibre matrix).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bell::BellData;
use crate::linalg::{kron, ComplexMatrix, ComplexVector, ProductIsomorphism, SpectralFamily, C64};
use crate::models::{born_table, DensityOperator, QuantumBellModel, GRID_LABELS};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    let v = ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect()).expect("nonzero dimension");
    v.normalized().expect("gaussian vector is nonzero")
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut columns: Vec<ComplexVector> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v = random_state(rng, dim);
        for q in &columns {
            v = &v - &q.scale(q.inner(&v));
        }
        if v.norm() > 1e-6 {
            columns.push(v.normalized().expect("nonzero"));
        }
    }
    ComplexMatrix::from_columns(&columns).expect("square")
}

/// Hermitian matrix with Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim).expect("nonzero dimension");
    for i in 0..dim {
        m.set(i, i, C64::new(rng.sample(StandardNormal), 0.0));
        for j in i + 1..dim {
            let z = gaussian(rng);
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

/// Hermitian matrix with prescribed eigenvalues in a random eigenbasis.
pub fn random_hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[f64]) -> ComplexMatrix {
    let u = random_unitary(rng, eigenvalues.len());
    let d = ComplexMatrix::diag_real(eigenvalues).expect("nonzero dimension");
    &(&u * &d) * &u.adjoint()
}

pub fn random_iso<R: Rng + ?Sized>(rng: &mut R) -> ProductIsomorphism {
    ProductIsomorphism::from_unitary(random_unitary(rng, 4)).expect("unitary")
}

/// Uniform on the probability simplex.
pub fn random_probability_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let mut e = [0.0; 4];
    for x in &mut e {
        *x = -(1.0 - rng.random::<f64>()).ln();
    }
    let total: f64 = e.iter().sum();
    e.map(|x| x / total)
}

pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R) -> ComplexVector {
    crate::linalg::tensor_product(&random_state(rng, 2), &random_state(rng, 2)).expect("qubits")
}

/// Mixture of up to four random pure states with random weights.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityOperator {
    let n = rng.random_range(1..=4);
    let weights = random_probability_vector(rng);
    let total: f64 = weights[..n].iter().sum();
    let components: Vec<(f64, ComplexVector)> =
        weights[..n].iter().map(|w| (w / total, random_state(rng, 4))).collect();
    DensityOperator::mixture(&components).expect("valid mixture")
}

/// Rank-1 projectors onto the columns of a random qubit unitary.
pub fn random_qubit_projectors<R: Rng + ?Sized>(rng: &mut R) -> [ComplexMatrix; 2] {
    let u = random_unitary(rng, 2);
    [u.column(0).projector(), u.column(1).projector()]
}

/// Grid family `{P_i ⊗ Q_j}` with `±1` product labels.
pub fn product_family(a: &[ComplexMatrix; 2], b: &[ComplexMatrix; 2]) -> SpectralFamily {
    let mut projectors = Vec::with_capacity(4);
    for p in a {
        for q in b {
            projectors.push(kron(p, q).expect("qubits"));
        }
    }
    SpectralFamily::new(GRID_LABELS.to_vec(), projectors).expect("product family")
}

/// A quantum model whose four measurements are products of local qubit
/// measurements, with the same local measurement reused across contexts.
pub fn random_product_measurement_model<R: Rng + ?Sized>(rng: &mut R, state: DensityOperator) -> QuantumBellModel {
    let a = random_qubit_projectors(rng);
    let ap = random_qubit_projectors(rng);
    let b = random_qubit_projectors(rng);
    let bp = random_qubit_projectors(rng);
    QuantumBellModel {
        state,
        measurements: [product_family(&a, &b), product_family(&a, &bp), product_family(&ap, &b), product_family(&ap, &bp)],
        phases: None,
    }
}

pub fn random_product_measurement_data<R: Rng + ?Sized>(rng: &mut R) -> BellData {
    let state = random_density(rng);
    random_product_measurement_model(rng, state).born_tables().expect("valid model")
}

/// Any four tables, each uniform on the simplex.
pub fn random_bell_data<R: Rng + ?Sized>(rng: &mut R) -> BellData {
    BellData::from_grids([(); 4].map(|_| random_probability_vector(rng))).expect("normalized")
}

/// Born tables of a single state measured on a random family per context.
pub fn born_data(state: &DensityOperator, families: &[SpectralFamily; 4]) -> BellData {
    BellData::new(families.each_ref().map(|f| born_table(state, f).expect("grid family")))
}
