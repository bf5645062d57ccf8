//! Local unitary transformations and their induced action on Bloch tensors.
//!
//! Conjugating a qubit by `u` in SU(2) rotates its Pauli coefficients by the
//! adjoint rotation `O_ij = tr(s_i u s_j u^dagger) / 2`. [`lift_rotation`]
//! inverts that map up to the sign of the double cover.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bloch::{pauli, BlochTensor, Triple};
use crate::error::{Error, Result};
use crate::states::{self, CMatrix, DensityMatrix, SystemShape};

pub const UNITARY_TOL: f64 = 1e-12;
pub const ORTHOGONAL_TOL: f64 = 1e-12;
/// Tolerance on the determinant and orthogonality of inputs to the
/// SU(2) <-> SO(3) maps.
pub const COVER_TOL: f64 = 1e-10;

fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = u.nrows();
    (u * u.adjoint() - CMatrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn det2(u: &CMatrix) -> Complex64 {
    u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]
}

/// One unitary per site.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    shape: SystemShape,
    factors: Vec<CMatrix>,
}

impl LocalUnitary {
    pub fn new(shape: SystemShape, factors: Vec<CMatrix>) -> Result<Self> {
        if factors.len() != shape.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors for shape {shape}",
                factors.len()
            )));
        }
        for (r, (u, &d)) in factors.iter().zip(shape.dims()).enumerate() {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "factor {r} is {}x{}, site dimension is {d}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let defect = unitarity_defect(u);
            if defect > UNITARY_TOL {
                return Err(Error::ShapeMismatch(format!(
                    "factor {r} is not unitary (|U U^dagger - 1| = {defect:e})"
                )));
            }
        }
        Ok(Self { shape, factors })
    }

    pub fn identity(shape: SystemShape) -> Self {
        let factors = shape.dims().iter().map(|&d| CMatrix::identity(d, d)).collect();
        Self { shape, factors }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    /// The full `D x D` operator `U_1 ⊗ ... ⊗ U_n`.
    pub fn full(&self) -> CMatrix {
        states::kron_all(&self.factors)
    }

    /// Per-site adjoint rotations (qubit shapes only).
    pub fn rotations(&self) -> Result<RotationTriple> {
        if !self.shape.is_qubits() {
            return Err(Error::UnsupportedShape(format!(
                "adjoint rotations need qubit sites, got {}",
                self.shape
            )));
        }
        let rotations = self
            .factors
            .iter()
            .map(|u| adjoint_rotation(&special_unitary(u)))
            .collect::<Result<Vec<_>>>()?;
        RotationTriple::new(rotations)
    }

    /// Composition `self * other` (apply `other` first).
    pub fn compose(&self, other: &LocalUnitary) -> Result<LocalUnitary> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{} vs {}",
                self.shape, other.shape
            )));
        }
        let factors = self.factors.iter().zip(&other.factors).map(|(a, b)| a * b).collect();
        Ok(Self { shape: self.shape.clone(), factors })
    }

    pub fn inverse(&self) -> LocalUnitary {
        Self {
            shape: self.shape.clone(),
            factors: self.factors.iter().map(|u| u.adjoint()).collect(),
        }
    }
}

/// Rescale a 2x2 unitary by a phase so that its determinant is one.
fn special_unitary(u: &CMatrix) -> CMatrix {
    let phase = det2(u).sqrt();
    u.map(|z| z / phase)
}

/// `(⊗ U_r) rho (⊗ U_r)^dagger`.
pub fn apply(u: &LocalUnitary, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if u.shape() != rho.shape() {
        return Err(Error::ShapeMismatch(format!(
            "unitary over {} applied to state over {}",
            u.shape(),
            rho.shape()
        )));
    }
    let full = u.full();
    let out = &full * rho.matrix() * full.adjoint();
    let herm = (&out + out.adjoint()).scale(0.5);
    states::validate(herm, rho.shape().clone())
}

/// Haar-distributed unitary of size `d` from a QR factorisation of a complex
/// Ginibre matrix, with the phases fixed by a positive diagonal of `R`.
fn haar_unitary(d: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for c in 0..d {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 { rc / rc.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..d {
            u[(row, c)] *= phase;
        }
    }
    u
}

/// Independent Haar factors per site, qubit factors normalised to `det = 1`.
pub fn haar_local(shape: &SystemShape, seed: u64) -> LocalUnitary {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let factors = shape
        .dims()
        .iter()
        .map(|&d| {
            let u = haar_unitary(d, &mut rng);
            if d == 2 {
                special_unitary(&u)
            } else {
                u
            }
        })
        .collect();
    LocalUnitary { shape: shape.clone(), factors }
}

/// Per-site special orthogonal matrices acting on Bloch tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationTriple {
    rotations: Vec<Matrix3<f64>>,
}

fn orthogonality_defect(o: &Matrix3<f64>) -> (f64, f64) {
    let orth = (o.transpose() * o - Matrix3::identity()).abs().max();
    (orth, (o.determinant() - 1.0).abs())
}

impl RotationTriple {
    pub fn new(rotations: Vec<Matrix3<f64>>) -> Result<Self> {
        if !(1..=3).contains(&rotations.len()) {
            return Err(Error::ShapeMismatch(format!(
                "{} rotations (need 1 to 3)",
                rotations.len()
            )));
        }
        for (r, o) in rotations.iter().enumerate() {
            let (orth, det) = orthogonality_defect(o);
            if orth > ORTHOGONAL_TOL || det > ORTHOGONAL_TOL {
                return Err(Error::NotSpecialOrthogonal(format!(
                    "rotation {r}: |O^T O - 1| = {orth:e}, |det - 1| = {det:e}"
                )));
            }
        }
        Ok(Self { rotations })
    }

    pub fn identity(n: usize) -> Self {
        Self { rotations: vec![Matrix3::identity(); n] }
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotations(&self) -> &[Matrix3<f64>] {
        &self.rotations
    }

    /// The local unitary realising these rotations through [`lift_rotation`].
    pub fn lift(&self) -> Result<LocalUnitary> {
        let factors = self
            .rotations
            .iter()
            .map(lift_rotation)
            .collect::<Result<Vec<_>>>()?;
        LocalUnitary::new(SystemShape::qubits(self.len()), factors)
    }

    /// Site-wise product `self * other`.
    pub fn compose(&self, other: &RotationTriple) -> Result<RotationTriple> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} vs {} rotations",
                self.len(),
                other.len()
            )));
        }
        Ok(Self {
            rotations: self.rotations.iter().zip(&other.rotations).map(|(a, b)| a * b).collect(),
        })
    }
}

/// `O_ij = tr(s_i u s_j u^dagger) / 2` for `u` in SU(2).
pub fn adjoint_rotation(u: &CMatrix) -> Result<Matrix3<f64>> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::NotSpecialUnitary(format!(
            "{}x{} matrix",
            u.nrows(),
            u.ncols()
        )));
    }
    let unit = unitarity_defect(u);
    let det = (det2(u) - Complex64::new(1.0, 0.0)).norm();
    if unit > COVER_TOL || det > COVER_TOL {
        return Err(Error::NotSpecialUnitary(format!(
            "|U U^dagger - 1| = {unit:e}, |det - 1| = {det:e}"
        )));
    }
    let ud = u.adjoint();
    let conj: Vec<CMatrix> = (1..=3).map(|j| u * pauli(j) * &ud).collect();
    Ok(Matrix3::from_fn(|i, j| {
        (pauli(i + 1) * &conj[j]).trace().re / 2.0
    }))
}

/// The SU(2) element `q0 - i (q1 s_1 + q2 s_2 + q3 s_3)` whose adjoint
/// rotation is `o`, with the first non-negligible quaternion component positive.
pub fn lift_rotation(o: &Matrix3<f64>) -> Result<CMatrix> {
    let (orth, det) = orthogonality_defect(o);
    if orth > COVER_TOL || det > COVER_TOL {
        return Err(Error::NotSpecialOrthogonal(format!(
            "|O^T O - 1| = {orth:e}, |det - 1| = {det:e}"
        )));
    }
    let tr = o.trace();
    let diag = [o[(0, 0)], o[(1, 1)], o[(2, 2)]];
    let mut q = [0.0f64; 4];
    // Shepperd: pivot on the largest of the four squared components.
    let largest_diag = (0..3).max_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap();
    if tr >= diag[largest_diag] {
        q[0] = (1.0 + tr).max(0.0).sqrt() / 2.0;
        let s = 4.0 * q[0];
        q[1] = (o[(2, 1)] - o[(1, 2)]) / s;
        q[2] = (o[(0, 2)] - o[(2, 0)]) / s;
        q[3] = (o[(1, 0)] - o[(0, 1)]) / s;
    } else {
        match largest_diag {
            0 => {
                q[1] = (1.0 + diag[0] - diag[1] - diag[2]).max(0.0).sqrt() / 2.0;
                let s = 4.0 * q[1];
                q[0] = (o[(2, 1)] - o[(1, 2)]) / s;
                q[2] = (o[(0, 1)] + o[(1, 0)]) / s;
                q[3] = (o[(0, 2)] + o[(2, 0)]) / s;
            }
            1 => {
                q[2] = (1.0 - diag[0] + diag[1] - diag[2]).max(0.0).sqrt() / 2.0;
                let s = 4.0 * q[2];
                q[0] = (o[(0, 2)] - o[(2, 0)]) / s;
                q[1] = (o[(0, 1)] + o[(1, 0)]) / s;
                q[3] = (o[(1, 2)] + o[(2, 1)]) / s;
            }
            _ => {
                q[3] = (1.0 - diag[0] - diag[1] + diag[2]).max(0.0).sqrt() / 2.0;
                let s = 4.0 * q[3];
                q[0] = (o[(1, 0)] - o[(0, 1)]) / s;
                q[1] = (o[(0, 2)] + o[(2, 0)]) / s;
                q[2] = (o[(1, 2)] + o[(2, 1)]) / s;
            }
        }
    }
    let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut q = q.map(|c| c / norm);
    if let Some(first) = q.iter().copied().find(|c| c.abs() > 1e-12) {
        if first < 0.0 {
            q = q.map(|c| -c);
        }
    }
    let mi = Complex64::new(0.0, -1.0);
    let mut u = CMatrix::identity(2, 2).scale(q[0]);
    for (k, &qk) in q.iter().enumerate().skip(1) {
        u += pauli(k).map(|z| z * mi * qk);
    }
    Ok(u)
}

fn rotate_pair(m: &Matrix3<f64>, left: &Matrix3<f64>, right: &Matrix3<f64>) -> Matrix3<f64> {
    left * m * right.transpose()
}

/// Rotate every index of the tensor by its site's rotation:
/// `alpha -> L alpha`, `R -> L R M^T`, `S -> L S N^T`, `T -> M T N^T`,
/// `Q_ijk -> L_im M_jn N_kp Q_mnp`.
pub fn transform_bloch(t: &BlochTensor, rotations: &RotationTriple) -> Result<BlochTensor> {
    if rotations.len() != t.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} rotations for a {}-qubit tensor",
            rotations.len(),
            t.n()
        )));
    }
    let r = rotations.rotations();
    let mut out = t.clone();
    out.alpha = r[0] * t.alpha;
    if t.n() >= 2 {
        out.beta = r[1] * t.beta;
        out.pair_12 = rotate_pair(&t.pair_12, &r[0], &r[1]);
    }
    if t.n() == 3 {
        out.gamma = r[2] * t.gamma;
        out.pair_13 = rotate_pair(&t.pair_13, &r[0], &r[2]);
        out.pair_23 = rotate_pair(&t.pair_23, &r[1], &r[2]);
        out.triple = rotate_triple(&t.triple, &r[0], &r[1], &r[2]);
    }
    Ok(out)
}

pub(crate) fn rotate_triple(
    q: &Triple,
    l: &Matrix3<f64>,
    m: &Matrix3<f64>,
    n: &Matrix3<f64>,
) -> Triple {
    // one index at a time: 3 * 81 flops instead of 729
    let mut a = Triple::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                a[(i, j, k)] = (0..3).map(|p| l[(i, p)] * q[(p, j, k)]).sum();
            }
        }
    }
    let mut b = Triple::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                b[(i, j, k)] = (0..3).map(|p| m[(j, p)] * a[(i, p, k)]).sum();
            }
        }
    }
    Triple::from_fn(|i, j, k| (0..3).map(|p| n[(k, p)] * b[(i, j, p)]).sum())
}
