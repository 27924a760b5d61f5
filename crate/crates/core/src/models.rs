//! Explicit Hilbert-space models on C⁴: density operators, Born tables and
//! Lüders updates, the nonlocal-box model of the vessels / cats examples,
//! and measurement bases built to reproduce prescribed coincidence tables.

use serde::{Deserialize, Serialize};

use crate::bell::{BellData, Context, JointTable};
use crate::entanglement::{is_product_family, is_product_measurement};
use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh, partial_trace_a, partial_trace_b, ComplexMatrix, ComplexVector, ProductIsomorphism,
    SpectralFamily, C64, HERMITIAN_TOL,
};

/// Outcome labels λ on the (11, 12, 21, 22) grid for every constructed
/// coincidence observable.
pub const GRID_LABELS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Tolerance for the probability-vector precondition of
/// [`basis_for_probabilities`].
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity (min eigenvalue
    /// ≥ −1e-10).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: matrix.dim() });
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidDensityOperator(format!("not hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::InvalidDensityOperator(format!("trace {tr} != 1")));
        }
        let (values, _) = eigh(&matrix)?;
        if values[0] < -HERMITIAN_TOL {
            return Err(Error::InvalidDensityOperator(format!(
                "negative eigenvalue {}",
                values[0]
            )));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &ComplexVector) -> Result<Self> {
        state.ensure_normalized()?;
        Self::new(state.projector())
    }

    /// Σ w_k |v_k⟩⟨v_k|
    pub fn mixture(components: &[(f64, ComplexVector)]) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(4)?;
        for (w, v) in components {
            v.ensure_normalized()?;
            m = &m + &v.projector().scale_real(*w);
        }
        Self::new(m)
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: ComplexMatrix::identity(4).expect("dimension 4").scale_real(0.25),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// tr(ρ M), real part.
    pub fn expectation(&self, m: &ComplexMatrix) -> f64 {
        (&self.matrix * m).trace().re
    }
}

fn ensure_grid_family(m: &SpectralFamily) -> Result<()> {
    if m.len() != 4 || m.dim() != 4 {
        return Err(Error::InvalidSpectralFamily(format!(
            "expected a four-outcome family on C4, found {} projectors on C{}",
            m.len(),
            m.dim()
        )));
    }
    Ok(())
}

/// p_k = tr(ρ P_k), laid out on the (11, 12, 21, 22) grid.
pub fn born_table(state: &DensityOperator, m: &SpectralFamily) -> Result<JointTable> {
    ensure_grid_family(m)?;
    let mut q = [0.0; 4];
    for (k, p) in m.projectors().iter().enumerate() {
        // Round-off can leave -1e-17 on impossible outcomes.
        q[k] = state.expectation(p).max(0.0);
    }
    JointTable::from_grid(q)
}

/// Nonselective update ρ′ = Σ_k P_k ρ P_k.
pub fn luders_update(rho: &DensityOperator, m: &SpectralFamily) -> Result<DensityOperator> {
    if m.dim() != rho.matrix.dim() {
        return Err(Error::DimensionMismatch { expected: rho.matrix.dim(), found: m.dim() });
    }
    let mut out = ComplexMatrix::zeros(4)?;
    for p in m.projectors() {
        out = &out + &(&(p * &rho.matrix) * p);
    }
    DensityOperator::new(out)
}

/// A state and four coincidence observables in context order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumBellModel {
    pub state: DensityOperator,
    pub measurements: [SpectralFamily; 4],
    /// Free phases (α, β) when the model has them.
    pub phases: Option<(f64, f64)>,
}

impl QuantumBellModel {
    pub fn measurement(&self, context: Context) -> &SpectralFamily {
        &self.measurements[context.index()]
    }

    pub fn born_tables(&self) -> Result<BellData> {
        let mut tables = Vec::with_capacity(4);
        for m in &self.measurements {
            tables.push(born_table(&self.state, m)?);
        }
        Ok(BellData::new(tables.try_into().expect("four tables")))
    }

    /// Self-adjoint operators Σ λ P for each context.
    pub fn operators(&self) -> [ComplexMatrix; 4] {
        self.measurements.each_ref().map(SpectralFamily::operator)
    }

    /// B = E_A′B′ + E_A′B + E_AB′ − E_AB
    pub fn chsh_operator(&self) -> ComplexMatrix {
        let [ab, abp, apb, apbp] = self.operators();
        &(&(&apbp + &apb) + &abp) - &ab
    }

    pub fn luders_updates(&self) -> Result<[DensityOperator; 4]> {
        let mut out = Vec::with_capacity(4);
        for m in &self.measurements {
            out.push(luders_update(&self.state, m)?);
        }
        Ok(out.try_into().expect("four states"))
    }

    /// For each setting shared by two contexts, the max-entry distance
    /// between the reduced states (tr_B for A-side settings, tr_A for
    /// B-side) of the two Lüders-updated states. Order: A, A′, B, B′.
    pub fn luders_reduced_state_gaps(&self) -> Result<[f64; 4]> {
        let [ab, abp, apb, apbp] = self.luders_updates()?;
        let left = |x: &DensityOperator, y: &DensityOperator| -> Result<f64> {
            Ok(partial_trace_b(x.matrix())?.max_abs_diff(&partial_trace_b(y.matrix())?))
        };
        let right = |x: &DensityOperator, y: &DensityOperator| -> Result<f64> {
            Ok(partial_trace_a(x.matrix())?.max_abs_diff(&partial_trace_a(y.matrix())?))
        };
        Ok([left(&ab, &abp)?, left(&apb, &apbp)?, right(&ab, &apb)?, right(&abp, &apbp)?])
    }
}

/// The transparent / non-transparent water states
/// `|p⟩ = (0, √½ e^{iα}, √½ e^{iβ}, 0)` and `|q⟩ = (0, √½ e^{iα}, −√½ e^{iβ}, 0)`.
pub fn nonlocal_box_states(alpha: f64, beta: f64) -> (ComplexVector, ComplexVector) {
    let h = 0.5f64.sqrt();
    let ea = C64::from_polar(h, alpha);
    let eb = C64::from_polar(h, beta);
    let z = C64::default();
    (
        ComplexVector::new(vec![z, ea, eb, z]).expect("dimension 4"),
        ComplexVector::new(vec![z, ea, -eb, z]).expect("dimension 4"),
    )
}

/// Eigenbasis of AB′ on the grid: `r_{A1B′1} = p`, `r_{A1B′2} = e₁`,
/// `r_{A2B′1} = e₄`, `r_{A2B′2} = q`.
pub fn nonlocal_box_ab_prime_basis(alpha: f64, beta: f64) -> [ComplexVector; 4] {
    let (p, q) = nonlocal_box_states(alpha, beta);
    [
        p,
        ComplexVector::basis(4, 0).expect("dimension 4"),
        ComplexVector::basis(4, 3).expect("dimension 4"),
        q,
    ]
}

/// E_AB′ for arbitrary grid labels `[λ11, λ12, λ21, λ22]`, written out
/// entry by entry.
pub fn nonlocal_box_ab_prime_operator(alpha: f64, beta: f64, labels: [f64; 4]) -> ComplexMatrix {
    let [l11, l12, l21, l22] = labels;
    let mut m = ComplexMatrix::zeros(4).expect("dimension 4");
    let off = C64::from_polar(0.5 * (l11 - l22), alpha - beta);
    m.set(0, 0, c(l12, 0.0));
    m.set(1, 1, c(0.5 * (l11 + l22), 0.0));
    m.set(2, 2, c(0.5 * (l11 + l22), 0.0));
    m.set(1, 2, off);
    m.set(2, 1, off.conj());
    m.set(3, 3, c(l21, 0.0));
    m
}

/// ρ = ½|p⟩⟨p| + ½|q⟩⟨q| with AB measured in the standard basis and AB′,
/// A′B, A′B′ all measured in the (p, e₁, e₄, q) basis.
pub fn nonlocal_box_model(alpha: f64, beta: f64) -> QuantumBellModel {
    let (p, q) = nonlocal_box_states(alpha, beta);
    let state = DensityOperator::mixture(&[(0.5, p), (0.5, q)]).expect("mixture of unit vectors");
    let standard: Vec<ComplexVector> =
        (0..4).map(|k| ComplexVector::basis(4, k).expect("dimension 4")).collect();
    let ab = SpectralFamily::from_basis(&standard, &GRID_LABELS).expect("standard basis");
    let primed = SpectralFamily::from_basis(&nonlocal_box_ab_prime_basis(alpha, beta), &GRID_LABELS)
        .expect("orthonormal basis");
    QuantumBellModel {
        state,
        measurements: [ab, primed.clone(), primed.clone(), primed],
        phases: Some((alpha, beta)),
    }
}

fn validate_probability_vector(q: &[f64; 4]) -> Result<()> {
    if q.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidProbabilities(format!("negative or non-finite entry in {q:?}")));
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// Orthonormal basis `{e_k}` with `|⟨e_k|ψ⟩|² = q_k`.
///
/// A single Householder reflection `H` carries `e^{-iφ}ψ` onto the target
/// amplitudes `t = (√q₁, …, √q₄)`, where φ makes `⟨t|e^{-iφ}ψ⟩` real; with
/// `U = e^{-iφ}H`, `Uψ = t` and the basis is the columns of `U†`.
pub fn basis_for_probabilities(state: &ComplexVector, q: [f64; 4]) -> Result<SpectralFamily> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: state.dim() });
    }
    state.ensure_normalized()?;
    validate_probability_vector(&q)?;
    let sum: f64 = q.iter().sum();
    let target = ComplexVector::from_real(&q.map(|x| (x / sum).sqrt()))?;
    let overlap = target.inner(state);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    let rotated = state.scale(phase.conj());
    let w = &rotated - &target;
    let w_norm_sqr = w.norm_sqr();
    let identity = ComplexMatrix::identity(4)?;
    let householder = if w_norm_sqr < 1e-30 {
        identity
    } else {
        &identity - &w.outer(&w).scale_real(2.0 / w_norm_sqr)
    };
    // U = phase* H, U† = phase H (H is self-adjoint).
    let u_dagger = householder.scale(phase);
    let basis: Vec<ComplexVector> = (0..4).map(|k| u_dagger.column(k)).collect();
    SpectralFamily::from_basis(&basis, &GRID_LABELS)
}

/// Product/entangled verdicts for one constructed context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextEntanglement {
    pub context: Context,
    /// Operator Σ λ P factors as E_a ⊗ E_b.
    pub operator_product: bool,
    pub operator_residual: f64,
    /// Projectors factor on the grid as Π^A_i ⊗ Π^B_j.
    pub family_product: bool,
    pub family_residual: f64,
}

impl ContextEntanglement {
    pub fn evaluate(
        context: Context,
        family: &SpectralFamily,
        iso: &ProductIsomorphism,
        tol: f64,
    ) -> Result<Self> {
        let op = is_product_measurement(&family.operator(), iso, tol)?;
        let fam = is_product_family(family, iso, tol)?;
        Ok(Self {
            context,
            operator_product: op.is_product,
            operator_residual: op.residual,
            family_product: fam.is_product,
            family_residual: fam.residual,
        })
    }

    /// Entangled as a four-outcome measurement, i.e. the projector family
    /// does not factor on the grid.
    pub fn is_entangled(&self) -> bool {
        !self.family_product
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructedModel {
    pub pure_state: ComplexVector,
    pub model: QuantumBellModel,
    /// Max |born − target| over all sixteen probabilities.
    pub reproduction_residual: f64,
    pub contexts: [ContextEntanglement; 4],
}

/// Default state for constructed models: (½, ½, ½, ½), a product state, so
/// every bit of entanglement has to live in the measurements.
pub fn default_model_state() -> ComplexVector {
    ComplexVector::from_real(&[0.5; 4]).expect("dimension 4")
}

/// Per-context measurement bases reproducing every table of `data` from a
/// single pure state.
pub fn construct_model(
    data: &BellData,
    state: Option<ComplexVector>,
    iso: &ProductIsomorphism,
    tol_product: f64,
) -> Result<ConstructedModel> {
    let pure_state = state.unwrap_or_else(default_model_state);
    let rho = DensityOperator::pure(&pure_state)?;
    let mut families = Vec::with_capacity(4);
    let mut contexts = Vec::with_capacity(4);
    let mut residual: f64 = 0.0;
    for ctx in Context::ALL {
        let target = data.table(ctx).grid();
        let family = basis_for_probabilities(&pure_state, target)?;
        let born = born_table(&rho, &family)?.grid();
        for (b, t) in born.iter().zip(&target) {
            residual = residual.max((b - t).abs());
        }
        contexts.push(ContextEntanglement::evaluate(ctx, &family, iso, tol_product)?);
        families.push(family);
    }
    Ok(ConstructedModel {
        pure_state,
        model: QuantumBellModel {
            state: rho,
            measurements: families.try_into().expect("four families"),
            phases: None,
        },
        reproduction_residual: residual,
        contexts: contexts.try_into().expect("four contexts"),
    })
}

/// Model reproducing the sixteen Animal Acts probabilities.
pub fn animal_acts_model(state: Option<ComplexVector>) -> Result<ConstructedModel> {
    construct_model(
        &crate::datasets::animal_acts(),
        state,
        &ProductIsomorphism::identity(),
        crate::entanglement::DEFAULT_PRODUCT_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{classify, Verdict, DEFAULT_TOL_BELL, DEFAULT_TOL_MARGINAL};
    use crate::linalg::{spectral_decomposition, DEFAULT_CLUSTER_TOL};

    fn standard_family() -> SpectralFamily {
        let basis: Vec<ComplexVector> = (0..4).map(|k| ComplexVector::basis(4, k).unwrap()).collect();
        SpectralFamily::from_basis(&basis, &GRID_LABELS).unwrap()
    }

    #[test]
    fn density_operator_validation() {
        let bad_trace = ComplexMatrix::identity(4).unwrap();
        assert!(matches!(DensityOperator::new(bad_trace), Err(Error::InvalidDensityOperator(_))));
        let negative = ComplexMatrix::diag_real(&[1.5, -0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(DensityOperator::new(negative), Err(Error::InvalidDensityOperator(_))));
        let unnormalized = ComplexVector::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(DensityOperator::pure(&unnormalized).is_err());
    }

    #[test]
    fn box_state_born_table_for_ab() {
        let model = nonlocal_box_model(0.0, 0.0);
        let t = born_table(&model.state, &model.measurements[0]).unwrap();
        let g = t.grid();
        let expected = [0.0, 0.5, 0.5, 0.0];
        for (a, b) in g.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn trivial_born_tables() {
        let e0 = ComplexVector::basis(4, 0).unwrap();
        let t = born_table(&DensityOperator::pure(&e0).unwrap(), &standard_family()).unwrap();
        assert_eq!(t.grid(), [1.0, 0.0, 0.0, 0.0]);
        let mixed = DensityOperator::maximally_mixed();
        let fam = basis_for_probabilities(&default_model_state(), [0.1, 0.2, 0.3, 0.4]).unwrap();
        for p in born_table(&mixed, &fam).unwrap().grid() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn born_table_requires_four_outcomes() {
        let zz = ComplexMatrix::diag_real(&GRID_LABELS).unwrap();
        let fam = spectral_decomposition(&zz, DEFAULT_CLUSTER_TOL).unwrap();
        assert!(matches!(
            born_table(&DensityOperator::maximally_mixed(), &fam),
            Err(Error::InvalidSpectralFamily(_))
        ));
    }

    #[test]
    fn luders_leaves_box_state_invariant() {
        let model = nonlocal_box_model(0.0, 0.0);
        for m in &model.measurements {
            let updated = luders_update(&model.state, m).unwrap();
            assert!(updated.matrix().max_abs_diff(model.state.matrix()) < 1e-15);
        }
        let e0 = ComplexVector::basis(4, 0).unwrap();
        let pure = DensityOperator::pure(&e0).unwrap();
        assert_eq!(luders_update(&pure, &standard_family()).unwrap(), pure);
    }

    #[test]
    fn ab_prime_operator_matches_family_for_unit_labels() {
        for (alpha, beta) in [(0.0, 0.0), (0.3, -1.2), (2.0, 0.5)] {
            let model = nonlocal_box_model(alpha, beta);
            let from_family = model.measurements[1].operator();
            let written = nonlocal_box_ab_prime_operator(alpha, beta, GRID_LABELS);
            assert!(from_family.max_abs_diff(&written) < 1e-15);
            let diag = ComplexMatrix::diag_real(&[-1.0, 1.0, 1.0, -1.0]).unwrap();
            assert!(written.max_abs_diff(&diag) < 1e-15);
        }
    }

    #[test]
    fn ab_prime_operator_with_general_labels_has_expected_eigenvectors() {
        let labels = [0.7, -1.3, 2.1, -0.4];
        let (alpha, beta) = (0.4, 1.1);
        let m = nonlocal_box_ab_prime_operator(alpha, beta, labels);
        for (v, l) in nonlocal_box_ab_prime_basis(alpha, beta).iter().zip(labels) {
            let mv = m.mul_vec(v).unwrap();
            assert!(mv.max_abs_diff(&v.scale(c(l, 0.0))) < 1e-15);
        }
    }

    #[test]
    fn chsh_operator_is_diagonal_four() {
        let model = nonlocal_box_model(0.0, 0.0);
        let b = model.chsh_operator();
        let expected = ComplexMatrix::diag_real(&[-4.0, 4.0, 4.0, -4.0]).unwrap();
        assert!(b.max_abs_diff(&expected) < 1e-14);
        assert!((model.state.expectation(&b) - 4.0).abs() < 1e-14);
        let data = model.born_tables().unwrap();
        assert_eq!(classify(&data, DEFAULT_TOL_BELL, DEFAULT_TOL_MARGINAL).verdict, Verdict::Type4);
    }

    #[test]
    fn basis_for_probabilities_examples() {
        let e0 = ComplexVector::basis(4, 0).unwrap();
        let fam = basis_for_probabilities(&e0, [1.0, 0.0, 0.0, 0.0]).unwrap();
        let t = born_table(&DensityOperator::pure(&e0).unwrap(), &fam).unwrap();
        assert!((t.grid()[0] - 1.0).abs() < 1e-15);

        let s = default_model_state();
        let fam = basis_for_probabilities(&s, [0.25; 4]).unwrap();
        for p in fam.projectors() {
            let overlap = p.expectation(&s).unwrap().re;
            assert!((overlap - 0.25).abs() < 1e-15);
        }

        let q = [0.049, 0.630, 0.259, 0.062];
        let fam = basis_for_probabilities(&s, q).unwrap();
        let t = born_table(&DensityOperator::pure(&s).unwrap(), &fam).unwrap();
        for (a, b) in t.grid().iter().zip(q) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn basis_for_probabilities_rejects_bad_targets() {
        let s = default_model_state();
        assert!(matches!(
            basis_for_probabilities(&s, [0.5, 0.5, 0.5, -0.5]),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            basis_for_probabilities(&s, [0.5, 0.5, 0.5, 0.0]),
            Err(Error::InvalidProbabilities(_))
        ));
    }

    #[test]
    fn orthogonal_target_still_works() {
        // ⟨t|ψ⟩ = 0 leaves the phase undetermined.
        let s = ComplexVector::basis(4, 3).unwrap();
        let fam = basis_for_probabilities(&s, [1.0, 0.0, 0.0, 0.0]).unwrap();
        let t = born_table(&DensityOperator::pure(&s).unwrap(), &fam).unwrap();
        assert!((t.grid()[0] - 1.0).abs() < 1e-15);
    }
}
