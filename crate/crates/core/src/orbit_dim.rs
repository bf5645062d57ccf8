//! Orbit dimensions from the tangent frame `i[1 ⊗ .. ⊗ T ⊗ .. ⊗ 1, rho]`,
//! and the count of non-local parameters it implies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::states::{self, generator_basis, CMatrix, DensityMatrix, SystemShape};

/// Default relative singular-value threshold for the frame rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Below this largest singular value the frame is treated as identically zero.
const ZERO_FRAME: f64 = 1e-14;

/// One real vector of length `2 D^2` per generator per site, in site-major
/// order: the real parts of `i[G, rho]` (row-major) followed by the imaginary parts.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    base: DensityMatrix,
    vectors: Vec<Vec<f64>>,
    /// Largest Hermiticity or trace defect over all frame matrices.
    pub defect: f64,
}

impl TangentFrame {
    pub fn base(&self) -> &DensityMatrix {
        &self.base
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Frame vectors as the columns of a `2 D^2 x K` matrix.
    pub fn as_matrix(&self) -> DMatrix<f64> {
        let rows = self.vectors.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, self.vectors.len(), |r, c| self.vectors[c][r])
    }
}

fn embed(shape: &SystemShape, site: usize, op: &CMatrix) -> CMatrix {
    let factors: Vec<CMatrix> = shape
        .dims()
        .iter()
        .enumerate()
        .map(|(s, &d)| if s == site { op.clone() } else { CMatrix::identity(d, d) })
        .collect();
    states::kron_all(&factors)
}

pub fn tangent_frame(rho: &DensityMatrix) -> TangentFrame {
    let shape = rho.shape();
    let m = rho.matrix();
    let d = shape.total_dim();
    let i = Complex64::new(0.0, 1.0);
    let mut vectors = Vec::new();
    let mut defect = 0.0f64;
    for (site, &dim) in shape.dims().iter().enumerate() {
        let basis = generator_basis(dim);
        for t in basis.generators() {
            let g = embed(shape, site, t);
            let delta = (&g * m - m * &g).map(|z| z * i);
            let herm = (&delta - delta.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            defect = defect.max(herm).max(delta.trace().norm());
            let mut v = Vec::with_capacity(2 * d * d);
            for r in 0..d {
                for c in 0..d {
                    v.push(delta[(r, c)].re);
                }
            }
            for r in 0..d {
                for c in 0..d {
                    v.push(delta[(r, c)].im);
                }
            }
            vectors.push(v);
        }
    }
    TangentFrame { base: rho.clone(), vectors, defect }
}

/// Rank of the tangent frame together with its full singular spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDimension {
    pub dimension: usize,
    /// Singular values sorted decreasing.
    pub singular_values: Vec<f64>,
    /// Threshold actually applied (`tol * sigma_max`).
    pub cutoff: f64,
}

impl OrbitDimension {
    /// `sigma_min(retained) / sigma_max`, or `None` when nothing is retained.
    pub fn retained_ratio(&self) -> Option<f64> {
        (self.dimension > 0)
            .then(|| self.singular_values[self.dimension - 1] / self.singular_values[0])
    }
}

fn sorted_singular_values(a: DMatrix<f64>) -> Vec<f64> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn orbit_dimension(rho: &DensityMatrix) -> OrbitDimension {
    orbit_dimension_with(rho, DEFAULT_RANK_TOL)
}

pub fn orbit_dimension_with(rho: &DensityMatrix, tol: f64) -> OrbitDimension {
    let singular_values = sorted_singular_values(tangent_frame(rho).as_matrix());
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    if sigma_max <= ZERO_FRAME {
        return OrbitDimension { dimension: 0, singular_values, cutoff: 0.0 };
    }
    let cutoff = tol * sigma_max;
    let dimension = singular_values.iter().filter(|&&s| s > cutoff).count();
    OrbitDimension { dimension, singular_values, cutoff }
}

/// Unit vectors `eta` (one weight per frame vector) with `sum eta_k v_k ~ 0`.
pub fn frame_kernel(rho: &DensityMatrix, tol: f64) -> Vec<DVector<f64>> {
    // 2 D^2 >= K, so the thin SVD yields one singular value per frame vector
    let svd = tangent_frame(rho).as_matrix().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    (0..sv.len())
        .filter(|&i| sv[i] <= tol * sigma_max)
        .map(|i| v_t.row(i).transpose())
        .collect()
}

/// Count of local-unitary invariants predicted by
/// `prod d_r^2 - sum d_r^2 + n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvariantCount {
    pub value: u128,
    /// `false` for a single site, where the count is the `d - 1` independent
    /// eigenvalues instead of the multi-site formula.
    pub formula_applies: bool,
}

pub fn invariant_count_formula(shape: &SystemShape) -> InvariantCount {
    let dims = shape.dims();
    if dims.len() == 1 {
        return InvariantCount { value: dims[0] as u128 - 1, formula_applies: false };
    }
    let prod: u128 = dims.iter().map(|&d| (d * d) as u128).product();
    let sum: u128 = dims.iter().map(|&d| (d * d) as u128).sum();
    InvariantCount {
        value: prod + dims.len() as u128 - 1 - sum,
        formula_applies: true,
    }
}

/// `(D^2 - 1) - orbit_dimension(rho)`.
pub fn invariant_count_numeric(rho: &DensityMatrix) -> usize {
    invariant_count_numeric_with(rho, DEFAULT_RANK_TOL)
}

pub fn invariant_count_numeric_with(rho: &DensityMatrix, tol: f64) -> usize {
    let d = rho.shape().total_dim();
    d * d - 1 - orbit_dimension_with(rho, tol).dimension
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::expand;
    use crate::local_action::{apply, haar_local};
    use crate::states::random_full_rank;

    fn shape(d: &[usize]) -> SystemShape {
        SystemShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn maximally_mixed_frame_vanishes() {
        for dims in [&[2][..], &[2, 3], &[2, 2, 2]] {
            let rho = DensityMatrix::maximally_mixed(shape(dims));
            let frame = tangent_frame(&rho);
            assert!(frame.vectors().iter().flatten().all(|&x| x == 0.0));
            assert_eq!(orbit_dimension(&rho).dimension, 0);
        }
    }

    #[test]
    fn frame_layout_and_hermiticity() {
        let rho = random_full_rank(&shape(&[2, 3]), 5);
        let frame = tangent_frame(&rho);
        assert_eq!(frame.vectors().len(), 3 + 8);
        assert!(frame.vectors().iter().all(|v| v.len() == 2 * 36));
        assert!(frame.defect <= 1e-12);
    }

    #[test]
    fn one_qubit_relation_uses_alpha() {
        let rho = random_full_rank(&SystemShape::qubits(1), 17);
        let alpha = expand(&rho).unwrap().alpha;
        let frame = tangent_frame(&rho);
        let mut combo = vec![0.0; frame.vectors()[0].len()];
        for (k, v) in frame.vectors().iter().enumerate() {
            for (c, x) in combo.iter_mut().zip(v) {
                *c += alpha[k] * x;
            }
        }
        assert!(combo.iter().all(|c| c.abs() < 1e-15));
        let kernel = frame_kernel(&rho, DEFAULT_RANK_TOL);
        assert_eq!(kernel.len(), 1);
        let cos = kernel[0].dot(&DVector::from_column_slice(alpha.as_slice())).abs() / alpha.norm();
        assert!(cos > 1.0 - 1e-9);
    }

    #[test]
    fn generic_orbit_dimensions() {
        assert_eq!(orbit_dimension(&random_full_rank(&SystemShape::qubits(1), 3)).dimension, 2);
        let two = orbit_dimension(&random_full_rank(&SystemShape::qubits(2), 3));
        assert_eq!(two.dimension, 6);
        assert_eq!(two.singular_values.len(), 6);
        assert!(two.retained_ratio().unwrap() > 1e-6);
        assert_eq!(orbit_dimension(&random_full_rank(&shape(&[2, 3]), 3)).dimension, 11);
    }

    #[test]
    fn formula_values() {
        assert_eq!(invariant_count_formula(&shape(&[2, 2])).value, 9);
        assert_eq!(invariant_count_formula(&shape(&[2, 2, 2])).value, 54);
        assert_eq!(invariant_count_formula(&shape(&[3, 3])).value, 64);
        assert_eq!(invariant_count_formula(&shape(&[2, 3])).value, 24);
        let single = invariant_count_formula(&shape(&[5]));
        assert_eq!(single, InvariantCount { value: 4, formula_applies: false });
    }

    #[test]
    fn numeric_count_matches_formula_on_mixed_dims() {
        let rho = random_full_rank(&shape(&[2, 3]), 8);
        assert_eq!(invariant_count_numeric(&rho), 24);
    }

    #[test]
    fn product_pure_state_has_smaller_orbit() {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let rho = DensityMatrix::pure(SystemShape::qubits(2), &[o, z, z, z]).unwrap();
        assert!(invariant_count_numeric(&rho) > 9);
        // |00><00| is fixed by rotations about z on either site
        assert_eq!(orbit_dimension(&rho).dimension, 4);
    }

    #[test]
    fn dimension_is_lu_invariant() {
        let s = SystemShape::qubits(3);
        let rho = random_full_rank(&s, 21);
        let moved = apply(&haar_local(&s, 22), &rho).unwrap();
        assert_eq!(orbit_dimension(&rho).dimension, orbit_dimension(&moved).dimension);
    }
}
