//! Dense complex linear algebra on C² and C⁴.
//!
//! Everything here works on tiny matrices, so the algorithms favour accuracy
//! over speed: Hermitian eigenproblems use cyclic complex Jacobi rotations
//! and singular values come from one-sided (Hestenes) Jacobi, which keeps
//! small singular values accurate to roughly machine epsilon times the norm.
//!
//! Index convention for C²⊗C² ≅ C⁴ is row-major: the tensor index `(i, j)`
//! maps to the flat index `2 * i + j`. Every module in the crate shares it.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for the `normalized` tag on state vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance for hermiticity / unitarity preconditions.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default eigenvalue clustering tolerance for spectral decompositions.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const JACOBI_MAX_SWEEPS: usize = 100;

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A state vector in C² or C⁴.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector {
    entries: Vec<C64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        check_dim(entries.len())?;
        Ok(Self { entries })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Standard basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: k + 1 });
        }
        let mut entries = vec![C64::default(); dim];
        entries[k] = c(1.0, 0.0);
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { entries: vec![C64::default(); dim] })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, k: usize) -> C64 {
        self.entries[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Errors unless Σ|v_i|² = 1 within [`NORMALIZATION_TOL`].
    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized(NORMALIZATION_TOL) {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm_sqr: self.norm_sqr() })
        }
    }

    /// Rescaled copy with unit norm. Fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: self.norm_sqr() });
        }
        Ok(self.scale(c(1.0 / n, 0.0)))
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    /// |self⟩⟨other|
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros_unchecked(n);
        for i in 0..n {
            for j in 0..n {
                m.entries[i * n + j] = self.entries[i] * other.entries[j].conj();
            }
        }
        m
    }

    /// Rank-1 projector |v⟩⟨v|.
    pub fn projector(&self) -> ComplexMatrix {
        self.outer(self)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: Self) -> ComplexVector {
        ComplexVector {
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: Self) -> ComplexVector {
        ComplexVector {
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A square complex matrix of dimension 2 or 4, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    fn zeros_unchecked(dim: usize) -> Self {
        Self { dim, entries: vec![C64::default(); dim * dim] }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::zeros_unchecked(dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.entries[i * dim + i] = c(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend(row);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * m.dim + i] = c(v, 0.0);
        }
        Ok(m)
    }

    /// Matrix whose k-th column is `columns[k]`.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let dim = columns.len();
        check_dim(dim)?;
        let mut m = Self::zeros_unchecked(dim);
        for (k, col) in columns.iter().enumerate() {
            if col.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: col.dim() });
            }
            for i in 0..dim {
                m.entries[i * dim + k] = col.entries[i];
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.entries[i * self.dim + j] = z;
    }

    pub fn column(&self, k: usize) -> ComplexVector {
        ComplexVector { entries: (0..self.dim).map(|i| self.get(i, k)).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros_unchecked(n);
        for i in 0..n {
            for j in 0..n {
                m.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rhs.dim });
        }
        Ok(self * rhs)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        let n = self.dim;
        Ok(ComplexVector {
            entries: (0..n)
                .map(|i| (0..n).map(|j| self.entries[i * n + j] * v.entries[j]).sum())
                .collect(),
        })
    }

    /// ⟨v|M|v⟩
    pub fn expectation(&self, v: &ComplexVector) -> Result<C64> {
        Ok(v.inner(&self.mul_vec(v)?))
    }

    /// max |M - M†|
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// max |U†U - I|
    pub fn unitarity_defect(&self) -> f64 {
        let id = Self::identity(self.dim).expect("dimension already validated");
        (&self.adjoint() * self).max_abs_diff(&id)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect <= HERMITIAN_TOL {
            Ok(())
        } else {
            Err(Error::NotHermitian { defect })
        }
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect <= HERMITIAN_TOL {
            Ok(())
        } else {
            Err(Error::NotUnitary { defect })
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut m = ComplexMatrix::zeros_unchecked(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C64::default() {
                    continue;
                }
                for j in 0..n {
                    m.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        m
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    if z.im.abs() < 1e-12 {
                        format!("{:>8.4}", z.re)
                    } else {
                        format!("{:>8.4}{:+.4}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// a ⊗ b with entry `2i + j` equal to `a_i b_j`.
pub fn tensor_product(a: &ComplexVector, b: &ComplexVector) -> Result<ComplexVector> {
    for v in [a, b] {
        if v.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: v.dim() });
        }
    }
    let mut entries = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            entries.push(a.entries[i] * b.entries[j]);
        }
    }
    Ok(ComplexVector { entries })
}

/// X ⊗ Y, consistent with [`tensor_product`]: (X⊗Y)(a⊗b) = (Xa)⊗(Yb).
pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [x, y] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: m.dim });
        }
    }
    let mut m = ComplexMatrix::zeros_unchecked(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.entries[(2 * i + j) * 4 + (2 * k + l)] = x.get(i, k) * y.get(j, l);
                }
            }
        }
    }
    Ok(m)
}

/// tr_B of an operator on C²⊗C².
pub fn partial_trace_b(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.dim });
    }
    let mut out = ComplexMatrix::zeros_unchecked(2);
    for i in 0..2 {
        for k in 0..2 {
            out.entries[i * 2 + k] = (0..2).map(|j| m.get(2 * i + j, 2 * k + j)).sum();
        }
    }
    Ok(out)
}

/// tr_A of an operator on C²⊗C².
pub fn partial_trace_a(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.dim });
    }
    let mut out = ComplexMatrix::zeros_unchecked(2);
    for j in 0..2 {
        for l in 0..2 {
            out.entries[j * 2 + l] = (0..2).map(|i| m.get(2 * i + j, 2 * i + l)).sum();
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.ensure_hermitian()?;
    let n = m.dim;
    // Symmetrize so the iteration starts from an exactly Hermitian matrix.
    let mut a = (m + &m.adjoint()).scale_real(0.5);
    let mut v = ComplexMatrix::identity(n)?;
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag <= f64::EPSILON * 1e-3 * scale {
                    continue;
                }
                // Phase so that the (p, q) entry becomes real positive, then a
                // real symmetric rotation annihilates it.
                let phase = apq / mag;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // G acts on columns p, q: col_p' = c col_p - s phase* col_q,
                // col_q' = s phase col_p + c col_q.
                let g_pp = c(cs, 0.0);
                let g_qp = -phase.conj() * sn;
                let g_pq = phase * sn;
                let g_qq = c(cs, 0.0);
                // A ← A G
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * g_pp + aiq * g_qp);
                    a.set(i, q, aip * g_pq + aiq * g_qq);
                }
                // A ← G† A
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, g_pp.conj() * apj + g_qp.conj() * aqj);
                    a.set(q, j, g_pq.conj() * apj + g_qq.conj() * aqj);
                }
                a.set(p, q, C64::default());
                a.set(q, p, C64::default());
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * g_pp + viq * g_qp);
                    v.set(i, q, vip * g_pq + viq * g_qq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let columns: Vec<ComplexVector> = order.iter().map(|&i| v.column(i)).collect();
    Ok((sorted_values, ComplexMatrix::from_columns(&columns)?))
}

/// Singular value decomposition M = U Σ V†.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided Jacobi SVD. Both `u` and `v` are unitary; columns of `u`
/// belonging to zero singular values are completed to an orthonormal basis.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let n = m.dim;
    let mut cols: Vec<Vec<C64>> = (0..n).map(|k| m.column(k).entries).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|k| (0..n).map(|i| if i == k { c(1.0, 0.0) } else { C64::default() }).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                // Rotate (col_p, phase* col_q) by a real Jacobi rotation.
                for target in [&mut cols, &mut vcols] {
                    #[allow(clippy::needless_range_loop)]
                    for i in 0..n {
                        let xp = target[p][i];
                        let xq = target[q][i] * phase.conj();
                        target[p][i] = xp * cs - xq * sn;
                        target[q][i] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let mut ucols: Vec<ComplexVector> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &k) in order.iter().enumerate() {
        if norms[k] > max_norm * 1e3 * f64::EPSILON && norms[k] > 0.0 {
            let col = ComplexVector { entries: cols[k].iter().map(|z| z / norms[k]).collect() };
            ucols.push(col);
        } else {
            ucols.push(ComplexVector { entries: vec![C64::default(); n] });
            pending.push(slot);
        }
    }
    // Complete U with Gram-Schmidt against the standard basis.
    for slot in pending {
        for e in 0..n {
            let mut cand = ComplexVector::basis(n, e).expect("dimension already validated");
            for (other, u) in ucols.iter().enumerate() {
                if other == slot || u.norm_sqr() == 0.0 {
                    continue;
                }
                let proj = u.inner(&cand);
                cand = &cand - &u.scale(proj);
            }
            let nrm = cand.norm();
            if nrm > 0.5 {
                ucols[slot] = cand.scale(c(1.0 / nrm, 0.0));
                break;
            }
        }
    }

    let singular_values = order.iter().map(|&k| norms[k]).collect();
    let vcols_sorted: Vec<ComplexVector> =
        order.iter().map(|&k| ComplexVector { entries: vcols[k].clone() }).collect();
    Svd {
        u: ComplexMatrix::from_columns(&ucols).expect("dimension already validated"),
        singular_values,
        v: ComplexMatrix::from_columns(&vcols_sorted).expect("dimension already validated"),
    }
}

/// Outcome values with orthogonal projectors summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFamily {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
    multiplicities: Vec<usize>,
}

impl SpectralFamily {
    /// Validates orthogonality, idempotence and completeness within `1e-10`.
    pub fn new(eigenvalues: Vec<f64>, projectors: Vec<ComplexMatrix>) -> Result<Self> {
        if eigenvalues.len() != projectors.len() || projectors.is_empty() {
            return Err(Error::InvalidSpectralFamily(format!(
                "{} eigenvalues for {} projectors",
                eigenvalues.len(),
                projectors.len()
            )));
        }
        let dim = projectors[0].dim();
        let multiplicities = projectors.iter().map(|p| p.trace().re.round() as usize).collect();
        let family = Self { eigenvalues, projectors, multiplicities };
        let residual = family.validity_residual()?;
        if residual > HERMITIAN_TOL {
            return Err(Error::InvalidSpectralFamily(format!(
                "projector residual {residual:e} on dimension {dim}"
            )));
        }
        Ok(family)
    }

    /// Rank-1 family built from an orthonormal basis. Labels may repeat; the
    /// projectors are kept separate so the family keeps one outcome per vector.
    pub fn from_basis(vectors: &[ComplexVector], labels: &[f64]) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::InvalidSpectralFamily(format!(
                "{} vectors for {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        let residual = orthonormality_residual(vectors)?;
        if residual > HERMITIAN_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Self::new(labels.to_vec(), vectors.iter().map(ComplexVector::projector).collect())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// Σ λ_k P_k
    pub fn operator(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros_unchecked(self.dim());
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m = &m + &p.scale_real(*lambda);
        }
        m
    }

    /// Largest violation among P_k P_l = δ_kl P_k, P_k = P_k† and Σ P_k = I.
    pub fn validity_residual(&self) -> Result<f64> {
        let dim = self.dim();
        check_dim(dim)?;
        let mut residual: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros_unchecked(dim);
        for (k, pk) in self.projectors.iter().enumerate() {
            if pk.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: pk.dim() });
            }
            residual = residual.max(pk.hermiticity_defect());
            for (l, pl) in self.projectors.iter().enumerate() {
                let prod = pk * pl;
                let target = if k == l { pk.clone() } else { ComplexMatrix::zeros_unchecked(dim) };
                residual = residual.max(prod.max_abs_diff(&target));
            }
            sum = &sum + pk;
        }
        residual = residual.max(sum.max_abs_diff(&ComplexMatrix::identity(dim)?));
        Ok(residual)
    }
}

/// max |⟨v_i|v_j⟩ - δ_ij| over the list.
pub fn orthonormality_residual(vectors: &[ComplexVector]) -> Result<f64> {
    let mut residual: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        check_dim(a.dim())?;
        for (j, b) in vectors.iter().enumerate() {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
            }
            let target = if i == j { c(1.0, 0.0) } else { C64::default() };
            residual = residual.max((a.inner(b) - target).norm());
        }
    }
    Ok(residual)
}

/// Spectral family of a Hermitian matrix. Eigenvalues closer than
/// `cluster_tol` to their neighbour are merged into one higher-rank
/// projector; clusters are listed in descending eigenvalue order.
pub fn spectral_decomposition(m: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralFamily> {
    let (values, vectors) = eigh(m)?;
    let n = values.len();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(cl) if values[k] - values[*cl.last().unwrap()] <= cluster_tol => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    clusters.reverse();
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let mean = cl.iter().map(|&k| values[k]).sum::<f64>() / cl.len() as f64;
        let mut p = ComplexMatrix::zeros_unchecked(n);
        for &k in &cl {
            p = &p + &vectors.column(k).projector();
        }
        eigenvalues.push(mean);
        projectors.push(p);
        multiplicities.push(cl.len());
    }
    Ok(SpectralFamily { eigenvalues, projectors, multiplicities })
}

/// The identification I: C⁴ → C²⊗C². The four `image_basis` vectors of C⁴
/// are the ones identified with |c₁⟩⊗|d₁⟩, |c₁⟩⊗|d₂⟩, |c₂⟩⊗|d₁⟩, |c₂⟩⊗|d₂⟩;
/// internally the map is stored as the unitary W with those vectors as
/// columns, so that I = W†.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductIsomorphism {
    basis: ComplexMatrix,
}

impl ProductIsomorphism {
    pub fn identity() -> Self {
        Self { basis: ComplexMatrix::identity(4).expect("dimension 4 is supported") }
    }

    pub fn new(image_basis: &[ComplexVector]) -> Result<Self> {
        if image_basis.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: image_basis.len() });
        }
        let residual = orthonormality_residual(image_basis)?;
        if residual > NORMALIZATION_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { basis: ComplexMatrix::from_columns(image_basis)? })
    }

    /// From a 4×4 unitary whose columns are the image basis.
    pub fn from_unitary(w: ComplexMatrix) -> Result<Self> {
        if w.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: w.dim() });
        }
        let defect = w.unitarity_defect();
        if defect > NORMALIZATION_TOL {
            return Err(Error::NotOrthonormal { residual: defect });
        }
        Ok(Self { basis: w })
    }

    /// Any orthonormal basis whose first element is `state`; under the
    /// resulting identification the state maps to |c₁⟩⊗|d₁⟩.
    pub fn containing(state: &ComplexVector) -> Result<Self> {
        state.ensure_normalized()?;
        let mut basis = vec![state.clone()];
        for e in 0..4 {
            if basis.len() == 4 {
                break;
            }
            let mut cand = ComplexVector::basis(4, e)?;
            for b in &basis {
                let proj = b.inner(&cand);
                cand = &cand - &b.scale(proj);
            }
            let nrm = cand.norm();
            if nrm > 1e-6 {
                basis.push(cand.scale(c(1.0 / nrm, 0.0)));
            }
        }
        // Second Gram-Schmidt pass tightens orthogonality.
        let mut refined: Vec<ComplexVector> = Vec::with_capacity(4);
        for v in basis {
            let mut cand = v;
            for b in &refined {
                let proj = b.inner(&cand);
                cand = &cand - &b.scale(proj);
            }
            refined.push(cand.normalized()?);
        }
        Self::new(&refined)
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn image_basis(&self) -> Vec<ComplexVector> {
        (0..4).map(|k| self.basis.column(k)).collect()
    }

    /// I v
    pub fn apply_vector(&self, v: &ComplexVector) -> Result<ComplexVector> {
        self.basis.adjoint().mul_vec(v)
    }

    /// I M I⁻¹
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: m.dim() });
        }
        Ok(&(&self.basis.adjoint() * m) * &self.basis)
    }

    /// I⁻¹ v
    pub fn pull_back_vector(&self, v: &ComplexVector) -> Result<ComplexVector> {
        self.basis.mul_vec(v)
    }

    /// I⁻¹ M I
    pub fn pull_back_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: m.dim() });
        }
        Ok(&(&self.basis * m) * &self.basis.adjoint())
    }
}
