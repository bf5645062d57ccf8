//! Real Pauli-basis coefficients of 1-, 2- and 3-qubit density matrices.
//!
//! For three qubits
//!
//! ```text
//! rho = 1/8 + alpha_i s_i 1 1 + beta_i 1 s_i 1 + gamma_i 1 1 s_i
//!     + R_ij s_i s_j 1 + S_ij s_i 1 s_j + T_ij 1 s_i s_j + Q_ijk s_i s_j s_k
//! ```
//!
//! and the one- and two-qubit cases keep the leading terms with `1/2` and
//! `1/4`. The coefficient of any Pauli word `W` is `tr(rho W) / 2^n`.

use std::ops::{Index, IndexMut};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format;
use crate::states::{self, CMatrix, DensityMatrix, SystemShape};

/// Imaginary residue above which an expansion coefficient is reported.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-12;

/// Dense 3x3x3 real tensor indexed `[(i, j, k)]`, site order (1, 2, 3).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Triple(pub [f64; 27]);

impl Triple {
    pub fn zeros() -> Self {
        Self([0.0; 27])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = [0.0; 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t[9 * i + 3 * j + k] = f(i, j, k);
                }
            }
        }
        Self(t)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    fn to_nested(self) -> Vec<Vec<Vec<f64>>> {
        (0..3)
            .map(|i| (0..3).map(|j| (0..3).map(|k| self[(i, j, k)]).collect()).collect())
            .collect()
    }

    fn from_nested(v: &[Vec<Vec<f64>>], field: &str) -> Result<Self> {
        let ok = v.len() == 3 && v.iter().all(|m| m.len() == 3 && m.iter().all(|r| r.len() == 3));
        if !ok {
            return Err(shape_error(field, "3x3x3"));
        }
        Ok(Self::from_fn(|i, j, k| v[i][j][k]))
    }
}

impl Index<(usize, usize, usize)> for Triple {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.0[9 * i + 3 * j + k]
    }
}

impl IndexMut<(usize, usize, usize)> for Triple {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.0[9 * i + 3 * j + k]
    }
}

/// Pauli coefficients of an `n`-qubit state, `n` in 1..=3.
///
/// Components that do not exist for the given `n` are kept at zero:
/// `beta` needs `n >= 2`, `gamma`, `pair_13`, `pair_23` and `triple` need `n = 3`,
/// and `pair_12` needs `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochTensor {
    n: usize,
    pub alpha: Vector3<f64>,
    pub beta: Vector3<f64>,
    pub gamma: Vector3<f64>,
    pub pair_12: Matrix3<f64>,
    pub pair_13: Matrix3<f64>,
    pub pair_23: Matrix3<f64>,
    pub triple: Triple,
}

impl BlochTensor {
    pub fn zero(n: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedShape(format!(
                "Bloch tensors cover 1 to 3 qubits, not {n}"
            )));
        }
        Ok(Self {
            n,
            alpha: Vector3::zeros(),
            beta: Vector3::zeros(),
            gamma: Vector3::zeros(),
            pair_12: Matrix3::zeros(),
            pair_13: Matrix3::zeros(),
            pair_23: Matrix3::zeros(),
            triple: Triple::zeros(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of real coordinates: 3, 15 or 63.
    pub fn coord_len(n: usize) -> usize {
        4usize.pow(n as u32) - 1
    }

    /// Flatten to coordinates in the order alpha, beta, gamma, pair_12,
    /// pair_13, pair_23 (row-major), triple (row-major), skipping absent parts.
    pub fn to_coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::coord_len(self.n));
        out.extend(self.alpha.iter());
        if self.n >= 2 {
            out.extend(self.beta.iter());
        }
        if self.n == 3 {
            out.extend(self.gamma.iter());
        }
        if self.n >= 2 {
            push_row_major(&mut out, &self.pair_12);
        }
        if self.n == 3 {
            push_row_major(&mut out, &self.pair_13);
            push_row_major(&mut out, &self.pair_23);
            out.extend(self.triple.0.iter());
        }
        out
    }

    pub fn from_coords(n: usize, coords: &[f64]) -> Result<Self> {
        let mut t = Self::zero(n)?;
        if coords.len() != Self::coord_len(n) {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates for a {n}-qubit tensor",
                coords.len()
            )));
        }
        let mut it = coords.iter().copied();
        let vec3 = |it: &mut dyn Iterator<Item = f64>| {
            Vector3::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
        };
        t.alpha = vec3(&mut it);
        if n >= 2 {
            t.beta = vec3(&mut it);
        }
        if n == 3 {
            t.gamma = vec3(&mut it);
        }
        let mat3 = |it: &mut dyn Iterator<Item = f64>| {
            Matrix3::from_row_iterator(it.take(9).collect::<Vec<_>>())
        };
        if n >= 2 {
            t.pair_12 = mat3(&mut it);
        }
        if n == 3 {
            t.pair_13 = mat3(&mut it);
            t.pair_23 = mat3(&mut it);
            for slot in t.triple.0.iter_mut() {
                *slot = it.next().unwrap();
            }
        }
        Ok(t)
    }

    /// Euclidean norm of all coefficients.
    pub fn norm(&self) -> f64 {
        self.to_coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest componentwise absolute difference (tensors must share `n`).
    pub fn max_abs_diff(&self, other: &BlochTensor) -> f64 {
        assert_eq!(self.n, other.n, "tensors over different qubit counts");
        self.to_coords()
            .iter()
            .zip(other.to_coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> BlochTensor {
        let coords: Vec<f64> = self.to_coords().iter().map(|c| c * factor).collect();
        Self::from_coords(self.n, &coords).expect("same length")
    }
}

fn push_row_major(out: &mut Vec<f64>, m: &Matrix3<f64>) {
    for i in 0..3 {
        for j in 0..3 {
            out.push(m[(i, j)]);
        }
    }
}

/// `sigma_1..sigma_3` for `index` 1..=3, identity for 0.
pub fn pauli(index: usize) -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let entries = match index {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -i, i, z],
        3 => [o, z, z, -o],
        _ => panic!("Pauli index {index} out of range"),
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

/// Tensor product of Paulis, `word[s]` acting on site `s`.
pub fn pauli_word(word: &[usize]) -> CMatrix {
    let factors: Vec<CMatrix> = word.iter().map(|&p| pauli(p)).collect();
    states::kron_all(&factors)
}

fn qubit_count(shape: &SystemShape) -> Result<usize> {
    if !shape.is_qubits() || shape.n() > 3 {
        return Err(Error::UnsupportedShape(format!(
            "Bloch expansion needs 1 to 3 qubits, got {shape}"
        )));
    }
    Ok(shape.n())
}

/// All non-identity words for `n` qubits together with their slot setter,
/// in coordinate order.
fn words(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let single = |site: usize, p: usize| {
        let mut w = vec![0; n];
        w[site] = p;
        w
    };
    for site in 0..n {
        for p in 1..=3 {
            out.push(single(site, p));
        }
    }
    let pairs: &[(usize, usize)] = match n {
        2 => &[(0, 1)],
        3 => &[(0, 1), (0, 2), (1, 2)],
        _ => &[],
    };
    for &(a, b) in pairs {
        for p in 1..=3 {
            for q in 1..=3 {
                let mut w = vec![0; n];
                w[a] = p;
                w[b] = q;
                out.push(w);
            }
        }
    }
    if n == 3 {
        for p in 1..=3 {
            for q in 1..=3 {
                for r in 1..=3 {
                    out.push(vec![p, q, r]);
                }
            }
        }
    }
    out
}

/// Pauli coefficients of `rho`.
pub fn expand(rho: &DensityMatrix) -> Result<BlochTensor> {
    let n = qubit_count(rho.shape())?;
    let norm = (1usize << n) as f64;
    let m = rho.matrix();
    let mut coords = Vec::with_capacity(BlochTensor::coord_len(n));
    for w in words(n) {
        let tr = (m * pauli_word(&w)).trace() / norm;
        debug_assert!(
            tr.im.abs() <= IMAGINARY_RESIDUE_TOL,
            "imaginary residue {} on word {w:?}",
            tr.im
        );
        coords.push(tr.re);
    }
    BlochTensor::from_coords(n, &coords)
}

/// `1/2^n + sum coefficient * word`, Hermitian and unit trace by construction
/// but not checked for positivity.
pub fn reconstruct_matrix(t: &BlochTensor) -> CMatrix {
    let n = t.n();
    let d = 1usize << n;
    let mut m = CMatrix::identity(d, d).unscale(d as f64);
    for (w, c) in words(n).iter().zip(t.to_coords()) {
        if c != 0.0 {
            m += pauli_word(w).scale(c);
        }
    }
    m
}

/// Density matrix with the given coefficients; fails with
/// [`Error::NotPositive`] outside the state body.
pub fn reconstruct(t: &BlochTensor) -> Result<DensityMatrix> {
    states::validate(reconstruct_matrix(t), SystemShape::qubits(t.n()))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub(crate) struct BlochFile {
    pub n: usize,
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_12: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_13: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_23: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<Vec<Vec<Vec<f64>>>>,
}

pub(crate) fn mat_rows(m: &Matrix3<f64>) -> Vec<Vec<f64>> {
    (0..3).map(|i| (0..3).map(|j| m[(i, j)]).collect()).collect()
}

pub(crate) fn rows_mat(rows: &[Vec<f64>], field: &str) -> Result<Matrix3<f64>> {
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(shape_error(field, "3x3"));
    }
    Ok(Matrix3::from_fn(|i, j| rows[i][j]))
}

fn shape_error(field: &str, want: &str) -> Error {
    Error::Parse {
        location: format!("field `{field}`"),
        message: format!("expected a {want} array"),
    }
}

fn vec3(v: &[f64], field: &str) -> Result<Vector3<f64>> {
    if v.len() != 3 {
        return Err(shape_error(field, "length-3"));
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

fn required<'a, T>(v: &'a Option<T>, field: &str, n: usize) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Parse {
        location: format!("field `{field}`"),
        message: format!("required for n = {n}"),
    })
}

impl BlochFile {
    pub(crate) fn from_tensor(t: &BlochTensor) -> Self {
        let n = t.n();
        let mut f = BlochFile {
            n,
            alpha: t.alpha.iter().copied().collect(),
            ..Default::default()
        };
        if n >= 2 {
            f.beta = Some(t.beta.iter().copied().collect());
            f.pair_12 = Some(mat_rows(&t.pair_12));
        }
        if n == 3 {
            f.gamma = Some(t.gamma.iter().copied().collect());
            f.pair_13 = Some(mat_rows(&t.pair_13));
            f.pair_23 = Some(mat_rows(&t.pair_23));
            f.triple = Some(t.triple.to_nested());
        }
        f
    }

    pub(crate) fn to_tensor(&self) -> Result<BlochTensor> {
        let n = self.n;
        let mut t = BlochTensor::zero(n).map_err(|e| Error::Parse {
            location: "field `n`".into(),
            message: e.to_string(),
        })?;
        t.alpha = vec3(&self.alpha, "alpha")?;
        if n >= 2 {
            t.beta = vec3(required(&self.beta, "beta", n)?, "beta")?;
            t.pair_12 = rows_mat(required(&self.pair_12, "pair_12", n)?, "pair_12")?;
        }
        if n == 3 {
            t.gamma = vec3(required(&self.gamma, "gamma", n)?, "gamma")?;
            t.pair_13 = rows_mat(required(&self.pair_13, "pair_13", n)?, "pair_13")?;
            t.pair_23 = rows_mat(required(&self.pair_23, "pair_23", n)?, "pair_23")?;
            t.triple = Triple::from_nested(required(&self.triple, "triple", n)?, "triple")?;
        }
        Ok(t)
    }
}

pub fn bloch_to_string(t: &BlochTensor) -> Result<String> {
    format::to_json(&BlochFile::from_tensor(t))
}

pub fn bloch_from_str(text: &str) -> Result<BlochTensor> {
    format::from_json::<BlochFile>(text)?.to_tensor()
}

pub fn write_bloch(t: &BlochTensor, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, bloch_to_string(t)?)?;
    Ok(())
}

pub fn read_bloch(path: impl AsRef<Path>) -> Result<BlochTensor> {
    bloch_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random_full_rank;

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let a = Complex64::new(s, 0.0);
        DensityMatrix::pure(SystemShape::qubits(2), &[a, z, z, a]).unwrap()
    }

    #[test]
    fn pure_up_state() {
        let rho = states::validate(
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])),
            SystemShape::qubits(1),
        )
        .unwrap();
        let t = expand(&rho).unwrap();
        assert_eq!(t.alpha, Vector3::new(0.0, 0.0, 0.5));
    }

    #[test]
    fn maximally_mixed_has_zero_coefficients() {
        let t = expand(&DensityMatrix::maximally_mixed(SystemShape::qubits(3))).unwrap();
        assert!(t.to_coords().iter().all(|&c| c == 0.0));
        assert_eq!(t.to_coords().len(), 63);
    }

    #[test]
    fn bell_state_correlations() {
        // tr(rho s_i s_j)/4 with <XX> = 1, <YY> = -1, <ZZ> = 1
        let t = expand(&bell()).unwrap();
        assert!(t.alpha.norm() < 1e-15 && t.beta.norm() < 1e-15);
        let want = Matrix3::from_diagonal(&Vector3::new(0.25, -0.25, 0.25));
        assert!((t.pair_12 - want).norm() < 1e-15);
    }

    #[test]
    fn zero_tensor_reconstructs_identity() {
        let rho = reconstruct(&BlochTensor::zero(2).unwrap()).unwrap();
        assert_eq!(rho, DensityMatrix::maximally_mixed(SystemShape::qubits(2)));
    }

    #[test]
    fn round_trip_three_qubits() {
        let rho = random_full_rank(&SystemShape::qubits(3), 3);
        let back = reconstruct(&expand(&rho).unwrap()).unwrap();
        let err = (back.matrix() - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn outside_bloch_ball_is_not_positive() {
        let mut t = BlochTensor::zero(1).unwrap();
        t.alpha = Vector3::new(0.0, 0.0, 1.0);
        assert_eq!(reconstruct(&t).unwrap_err(), Error::NotPositive { margin: -0.5 });
    }

    #[test]
    fn qudits_are_unsupported() {
        let rho = random_full_rank(&SystemShape::new(vec![2, 3]).unwrap(), 1);
        assert!(matches!(expand(&rho), Err(Error::UnsupportedShape(_))));
        let rho = random_full_rank(&SystemShape::qubits(4), 1);
        assert!(matches!(expand(&rho), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn triple_index_order_follows_sites() {
        // |0><0| on site 1 and 3, Bloch vector along x on site 2.
        let plus = CMatrix::from_element(2, 2, Complex64::new(0.5, 0.0));
        let up = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        let m = states::kron_all(&[up.clone(), plus, up]);
        let t = expand(&states::validate(m, SystemShape::qubits(3)).unwrap()).unwrap();
        // Q_ijk = a_i b_j c_k / ... with a = c = z/2, b = x/2 times 8/8
        assert!((t.triple[(2, 0, 2)] - 0.125).abs() < 1e-15);
        assert!(t.triple[(0, 2, 2)].abs() < 1e-15);
        assert!((t.pair_13[(2, 2)] - 0.125).abs() < 1e-15);
        assert!((t.pair_12[(2, 0)] - 0.125).abs() < 1e-15);
        assert!((t.pair_23[(0, 2)] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn file_round_trip_and_missing_fields() {
        let t = expand(&random_full_rank(&SystemShape::qubits(3), 9)).unwrap();
        let text = bloch_to_string(&t).unwrap();
        assert_eq!(bloch_from_str(&text).unwrap(), t);
        let err = bloch_from_str(r#"{"n": 2, "alpha": [0, 0, 0]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location.contains("beta")));
        let t1 = expand(&random_full_rank(&SystemShape::qubits(1), 2)).unwrap();
        let text = bloch_to_string(&t1).unwrap();
        assert!(!text.contains("beta"));
    }
}
