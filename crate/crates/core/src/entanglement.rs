//! Product / entangled tests for states, measurements and evolutions,
//! always relative to a chosen [`ProductIsomorphism`].
//!
//! States are decided through the Schmidt decomposition of their 2×2
//! amplitude matrix. Operators are decided through their operator Schmidt
//! rank: the realigned matrix `R[(i,k),(j,l)] = M[(i,j),(k,l)]` has rank one
//! exactly when `M = X ⊗ Y`, and its leading singular pair returns the
//! factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, kron, partial_trace_a, partial_trace_b, spectral_decomposition, svd, ComplexMatrix,
    ComplexVector, ProductIsomorphism, SpectralFamily, DEFAULT_CLUSTER_TOL,
};

/// Default tolerance for every product test.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    /// Descending, nonnegative.
    pub coefficients: [f64; 2],
    pub left_vectors: [ComplexVector; 2],
    pub right_vectors: [ComplexVector; 2],
}

impl SchmidtDecomposition {
    /// Σ_k c_k u_k ⊗ v_k, in the tensor-product frame (i.e. equal to `I|state⟩`).
    pub fn reconstruct(&self) -> ComplexVector {
        let mut out = ComplexVector::zeros(4).expect("dimension 4 is supported");
        for k in 0..2 {
            let t = crate::linalg::tensor_product(&self.left_vectors[k], &self.right_vectors[k])
                .expect("factors are two-dimensional");
            out = &out + &t.scale(c(self.coefficients[k], 0.0));
        }
        out
    }
}

/// Outcome of a product test. `is_product` holds exactly when
/// `residual <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTestReport<W> {
    pub is_product: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub witnesses: Option<W>,
}

impl<W> ProductTestReport<W> {
    fn decide(residual: f64, tolerance: f64, witnesses: W) -> Self {
        let is_product = residual <= tolerance;
        Self { is_product, residual, tolerance, witnesses: is_product.then_some(witnesses) }
    }
}

fn amplitude_matrix(v: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_rows(vec![
        vec![v.get(0), v.get(1)],
        vec![v.get(2), v.get(3)],
    ])
    .expect("2x2 is supported")
}

pub fn schmidt_decompose(
    state: &ComplexVector,
    iso: &ProductIsomorphism,
) -> Result<SchmidtDecomposition> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: state.dim() });
    }
    state.ensure_normalized()?;
    let amps = amplitude_matrix(&iso.apply_vector(state)?);
    let s = svd(&amps);
    // A = U Σ V†  ⇒  A_ij = Σ_k σ_k U_ik conj(V_jk)
    let left = [s.u.column(0), s.u.column(1)];
    let right = [s.v.column(0).conj(), s.v.column(1).conj()];
    Ok(SchmidtDecomposition {
        coefficients: [s.singular_values[0], s.singular_values[1]],
        left_vectors: left,
        right_vectors: right,
    })
}

/// Definition-level test for states. The residual is the second Schmidt
/// coefficient, which is also the distance to the nearest product vector.
pub fn is_product_state(
    state: &ComplexVector,
    iso: &ProductIsomorphism,
    tol: f64,
) -> Result<ProductTestReport<(ComplexVector, ComplexVector)>> {
    let sd = schmidt_decompose(state, iso)?;
    let [u, _] = sd.left_vectors;
    let [v, _] = sd.right_vectors;
    Ok(ProductTestReport::decide(sd.coefficients[1], tol, (u, v)))
}

/// R[(i,k),(j,l)] = M[(i,j),(k,l)]
pub fn realign(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.dim() });
    }
    let mut r = ComplexMatrix::zeros(4)?;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r.set(2 * i + k, 2 * j + l, m.get(2 * i + j, 2 * k + l));
                }
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSchmidt {
    /// Number of singular values of the realigned matrix above the tolerance.
    pub rank: usize,
    /// Frobenius distance to the nearest product operator.
    pub residual: f64,
    pub singular_values: Vec<f64>,
    /// Leading factors with `X ⊗ Y` the best product approximation, each
    /// scaled to Frobenius norm √σ₁. Phases are not canonicalized.
    pub leading_factors: (ComplexMatrix, ComplexMatrix),
}

/// Operator Schmidt rank of `I M I⁻¹`.
pub fn operator_schmidt_rank(
    m: &ComplexMatrix,
    iso: &ProductIsomorphism,
    tol: f64,
) -> Result<OperatorSchmidt> {
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.dim() });
    }
    let r = realign(&iso.apply_matrix(m)?)?;
    let s = svd(&r);
    let rank = s.singular_values.iter().filter(|&&x| x > tol).count();
    let residual = s.singular_values[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    let root = s.singular_values[0].sqrt();
    let u = s.u.column(0);
    let v = s.v.column(0);
    let mut x = ComplexMatrix::zeros(2)?;
    let mut y = ComplexMatrix::zeros(2)?;
    for a in 0..2 {
        for b in 0..2 {
            x.set(a, b, u.get(2 * a + b) * root);
            y.set(a, b, v.get(2 * a + b).conj() * root);
        }
    }
    Ok(OperatorSchmidt { rank, residual, singular_values: s.singular_values, leading_factors: (x, y) })
}

/// Index of the largest-magnitude entry, preferring the first among ties.
fn dominant_entry(x: &ComplexMatrix) -> (usize, usize) {
    let max = x.max_abs();
    for i in 0..x.dim() {
        for j in 0..x.dim() {
            if x.get(i, j).norm() >= max * (1.0 - 1e-12) {
                return (i, j);
            }
        }
    }
    (0, 0)
}

/// Fix the scalar freedom `X⊗Y = (zX)⊗(Y/z)` so that both factors come out
/// Hermitian when the product is. For `X = e^{iθ}H`, the ratio
/// `X_kl / conj(X_lk)` at the dominant entry equals `e^{2iθ}`; dividing by
/// `e^{iθ}` leaves `H`, with the sign chosen so the dominant entry has a
/// nonnegative real part.
fn canonicalize_hermitian(x: &ComplexMatrix, y: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (k, l) = dominant_entry(x);
    let xkl = x.get(k, l);
    let xlk = x.get(l, k);
    if xkl.norm() == 0.0 {
        return (x.clone(), y.clone());
    }
    let phase = if xlk.norm() == 0.0 {
        xkl / xkl.norm()
    } else {
        let ratio = xkl / xlk.conj();
        (ratio / ratio.norm()).sqrt()
    };
    let mut phase = phase;
    let trial = xkl / phase;
    if trial.re < 0.0 || (trial.re.abs() < 1e-14 && trial.im < 0.0) {
        phase = -phase;
    }
    (x.scale(phase.inv()), y.scale(phase))
}

/// Scale `X` into SU(2)-normalized form (Frobenius norm √2, unit
/// determinant phase) and push the compensation into `Y`.
fn canonicalize_unitary(x: &ComplexMatrix, y: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let nx = x.frobenius_norm();
    if nx == 0.0 {
        return (x.clone(), y.clone());
    }
    let x1 = x.scale_real(2f64.sqrt() / nx);
    let y1 = y.scale_real(nx / 2f64.sqrt());
    let det = x1.get(0, 0) * x1.get(1, 1) - x1.get(0, 1) * x1.get(1, 0);
    if det.norm() == 0.0 {
        return (x1, y1);
    }
    let half = (det / det.norm()).sqrt();
    (x1.scale(half.inv()), y1.scale(half))
}

/// Definition-level test for measurements: `I E I⁻¹ = E_a ⊗ E_b` with
/// Hermitian factors.
pub fn is_product_measurement(
    m: &ComplexMatrix,
    iso: &ProductIsomorphism,
    tol: f64,
) -> Result<ProductTestReport<(ComplexMatrix, ComplexMatrix)>> {
    m.ensure_hermitian()?;
    let os = operator_schmidt_rank(m, iso, tol)?;
    let (x, y) = canonicalize_hermitian(&os.leading_factors.0, &os.leading_factors.1);
    let second = os.singular_values[1];
    let residual = second.max(x.hermiticity_defect()).max(y.hermiticity_defect());
    Ok(ProductTestReport::decide(residual, tol, (x, y)))
}

/// Definition-level test for evolutions: `I U I⁻¹ = U_a ⊗ U_b` with unitary
/// factors.
pub fn is_product_unitary(
    u: &ComplexMatrix,
    iso: &ProductIsomorphism,
    tol: f64,
) -> Result<ProductTestReport<(ComplexMatrix, ComplexMatrix)>> {
    u.ensure_unitary()?;
    let os = operator_schmidt_rank(u, iso, tol)?;
    let (x, y) = canonicalize_unitary(&os.leading_factors.0, &os.leading_factors.1);
    let second = os.singular_values[1];
    let residual = second.max(x.unitarity_defect()).max(y.unitarity_defect());
    Ok(ProductTestReport::decide(residual, tol, (x, y)))
}

/// Local projector pairs `([Π^A_1, Π^A_2], [Π^B_1, Π^B_2])`.
pub type LocalProjectors = ([ComplexMatrix; 2], [ComplexMatrix; 2]);

fn ensure_grid(family: &SpectralFamily) -> Result<()> {
    if family.len() != 4 || family.dim() != 4 {
        return Err(Error::InvalidSpectralFamily(format!(
            "expected 4 projectors on C4 in (11, 12, 21, 22) order, found {} on C{}",
            family.len(),
            family.dim()
        )));
    }
    Ok(())
}

/// Projector-family test for a four-outcome coincidence measurement on the
/// (11, 12, 21, 22) grid: every `P_ij` must equal `Π^A_i ⊗ Π^B_j` for local
/// spectral families `Π^A`, `Π^B`. The local projectors are read off by
/// partial traces, `Π^A_i = tr_B(P_i1 + P_i2) / 2`.
///
/// Unlike [`is_product_measurement`] this ignores the outcome labels, so a
/// measurement whose ±1 operator happens to factor can still be entangled
/// here.
pub fn is_product_family(
    family: &SpectralFamily,
    iso: &ProductIsomorphism,
    tol: f64,
) -> Result<ProductTestReport<LocalProjectors>> {
    ensure_grid(family)?;
    let q: Vec<ComplexMatrix> = family
        .projectors()
        .iter()
        .map(|p| iso.apply_matrix(p))
        .collect::<Result<_>>()?;
    let half = c(0.5, 0.0);
    let pa = [
        partial_trace_b(&(&q[0] + &q[1]))?.scale(half),
        partial_trace_b(&(&q[2] + &q[3]))?.scale(half),
    ];
    let pb = [
        partial_trace_a(&(&q[0] + &q[2]))?.scale(half),
        partial_trace_a(&(&q[1] + &q[3]))?.scale(half),
    ];
    let mut residual: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let local = kron(&pa[i], &pb[j])?;
            residual = residual.max(q[2 * i + j].max_abs_diff(&local));
        }
    }
    for p in pa.iter().chain(pb.iter()) {
        residual = residual.max((p * p).max_abs_diff(p));
    }
    Ok(ProductTestReport::decide(residual, tol, (pa, pb)))
}

/// Refine each projector of `family` by the products of the eigenprojectors
/// of the witness factors `(E_a, E_b)`, all expressed in the C⁴ frame.
/// Zero pieces are dropped. For a genuine product measurement every piece
/// is itself a product projector.
pub fn refine_by_witnesses(
    family: &SpectralFamily,
    witnesses: &(ComplexMatrix, ComplexMatrix),
    iso: &ProductIsomorphism,
) -> Result<Vec<ComplexMatrix>> {
    let fa = spectral_decomposition(&witnesses.0, DEFAULT_CLUSTER_TOL)?;
    let fb = spectral_decomposition(&witnesses.1, DEFAULT_CLUSTER_TOL)?;
    let mut pieces = Vec::new();
    for p in family.projectors() {
        let tp = iso.apply_matrix(p)?;
        for a in fa.projectors() {
            for b in fb.projectors() {
                let piece = &tp * &kron(a, b)?;
                if piece.max_abs() > 1e-9 {
                    pieces.push(iso.pull_back_matrix(&piece)?);
                }
            }
        }
    }
    Ok(pieces)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFactorization {
    /// Collapse probabilities on the (11, 12, 21, 22) grid.
    pub probabilities: [f64; 4],
    pub marginal_a: [f64; 2],
    pub marginal_b: [f64; 2],
    /// max |p(Y_ij) - p(A_i) p(B_j)|
    pub residual: f64,
    pub factorizes: bool,
    pub state_is_product: bool,
    pub family_is_product: bool,
}

/// Collapse probabilities of a pure state under a four-outcome family and
/// whether they factor as `p(A_i) p(B_j)`.
pub fn outcome_factorization_check(
    state: &ComplexVector,
    family: &SpectralFamily,
    iso: &ProductIsomorphism,
    tol: f64,
) -> Result<OutcomeFactorization> {
    ensure_grid(family)?;
    state.ensure_normalized()?;
    let mut probabilities = [0.0; 4];
    for (k, p) in family.projectors().iter().enumerate() {
        probabilities[k] = p.expectation(state)?.re.max(0.0);
    }
    let marginal_a = [probabilities[0] + probabilities[1], probabilities[2] + probabilities[3]];
    let marginal_b = [probabilities[0] + probabilities[2], probabilities[1] + probabilities[3]];
    let mut residual: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            residual = residual.max((probabilities[2 * i + j] - marginal_a[i] * marginal_b[j]).abs());
        }
    }
    Ok(OutcomeFactorization {
        probabilities,
        marginal_a,
        marginal_b,
        residual,
        factorizes: residual <= tol,
        state_is_product: is_product_state(state, iso, tol)?.is_product,
        family_is_product: is_product_family(family, iso, tol)?.is_product,
    })
}

/// Unitary `Σ_k |to_k⟩⟨from_k|` carrying one measurement's eigenbasis onto
/// another's, in grid order.
pub fn connecting_unitary(from: &[ComplexVector], to: &[ComplexVector]) -> Result<ComplexMatrix> {
    if from.len() != 4 || to.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: from.len().min(to.len()) });
    }
    let mut u = ComplexMatrix::zeros(4)?;
    for (f, t) in from.iter().zip(to) {
        u = &u + &t.outer(f);
    }
    u.ensure_unitary()?;
    Ok(u)
}
