//! Multi-particle density matrices: validation, generator bases, seeded
//! random states and the state file format.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format;

pub type CMatrix = DMatrix<Complex64>;

/// Relative Hermiticity tolerance (scaled by the largest entry magnitude).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute trace tolerance.
pub const TRACE_TOL: f64 = 1e-12;
/// Lowest admissible eigenvalue.
pub const POSITIVITY_TOL: f64 = -1e-10;
/// Largest supported total dimension.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Per-site Hilbert space dimensions of a multi-particle system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("at least one site is required".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::ShapeMismatch(format!(
                "site dimension {d} is below 2"
            )));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= MAX_TOTAL_DIM)
            .ok_or_else(|| {
                Error::UnsupportedShape(format!(
                    "total dimension exceeds {MAX_TOTAL_DIM}"
                ))
            })?;
        debug_assert!(total >= 2);
        Ok(Self { dims })
    }

    /// `n` spin-1/2 particles.
    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("qubit shape")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Options for [`validate_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Replace an in-tolerance candidate by its Hermitian part with the
    /// trace renormalised to one.
    pub repair: bool,
}

/// A Hermitian, unit-trace, positive semidefinite matrix over a declared shape.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    shape: SystemShape,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// The maximally mixed state `1/D`.
    pub fn maximally_mixed(shape: SystemShape) -> Self {
        let d = shape.total_dim();
        let matrix = CMatrix::identity(d, d).scale(1.0 / d as f64);
        Self { shape, matrix }
    }

    /// Projector onto a (not necessarily normalised) pure state vector.
    pub fn pure(shape: SystemShape, amplitudes: &[Complex64]) -> Result<Self> {
        let d = shape.total_dim();
        if amplitudes.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for total dimension {d}",
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let psi = nalgebra::DVector::from_column_slice(amplitudes).unscale(norm2.sqrt());
        validate(&psi * psi.adjoint(), shape)
    }

    /// Eigenvalues sorted increasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Reduced state on the listed sites (kept in increasing site order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let dims = self.shape.dims();
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::ShapeMismatch(format!(
                "cannot keep sites {keep:?} of shape {}",
                self.shape
            )));
        }
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let kept_total: usize = kept_dims.iter().product();
        let total = self.shape.total_dim();
        let mut out = CMatrix::zeros(kept_total, kept_total);
        let digits = |mut idx: usize| {
            let mut ds = vec![0usize; dims.len()];
            for s in (0..dims.len()).rev() {
                ds[s] = idx % dims[s];
                idx /= dims[s];
            }
            ds
        };
        let kept_index = |ds: &[usize]| keep.iter().fold(0usize, |acc, &k| acc * dims[k] + ds[k]);
        for row in 0..total {
            let dr = digits(row);
            for col in 0..total {
                let dc = digits(col);
                let traced_equal = (0..dims.len())
                    .filter(|s| !keep.contains(s))
                    .all(|s| dr[s] == dc[s]);
                if traced_equal {
                    out[(kept_index(&dr), kept_index(&dc))] += self.matrix[(row, col)];
                }
            }
        }
        Ok(DensityMatrix {
            shape: SystemShape::new(kept_dims)?,
            matrix: out,
        })
    }
}

/// Sorted (increasing) eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Kronecker product of a list of square matrices, first factor most significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Validate `candidate` as a density matrix on `shape` with default options.
pub fn validate(candidate: CMatrix, shape: SystemShape) -> Result<DensityMatrix> {
    validate_with(candidate, shape, ValidateOptions::default())
}

pub fn validate_with(
    candidate: CMatrix,
    shape: SystemShape,
    options: ValidateOptions,
) -> Result<DensityMatrix> {
    let d = shape.total_dim();
    if candidate.nrows() != d || candidate.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix for shape {shape} (needs {d}x{d})",
            candidate.nrows(),
            candidate.ncols()
        )));
    }
    if candidate.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotHermitian { margin: f64::NAN });
    }

    let scale = candidate.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asym = (&candidate - candidate.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { margin: asym });
    }

    let trace = candidate.trace();
    let trace_err = (trace - Complex64::new(1.0, 0.0)).norm();
    if trace_err > TRACE_TOL {
        return Err(Error::TraceNotOne { margin: trace_err });
    }

    let min_ev = hermitian_eigenvalues(&candidate)[0];
    if min_ev < POSITIVITY_TOL {
        return Err(Error::NotPositive { margin: min_ev });
    }

    let matrix = if options.repair {
        let h = (&candidate + candidate.adjoint()).scale(0.5);
        let tr = h.trace().re;
        h.unscale(tr)
    } else {
        candidate
    };
    Ok(DensityMatrix { shape, matrix })
}

/// Traceless Hermitian generators of SU(d), normalised to `tr(T_i T_j) = 2 δ_ij`,
/// together with their structure constants `[T_i, T_j] = i c_ijk T_k`.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<CMatrix>,
    structure: Vec<f64>,
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `c_ijk` (zero-based indices).
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let m = self.generators.len();
        self.structure[(i * m + j) * m + k]
    }
}

/// Generalised Gell-Mann basis in the standard order: for each `k = 1..d`,
/// the symmetric and antisymmetric off-diagonal pairs `(j, k)` for `j < k`,
/// then the `k`-th diagonal generator. `d = 2` gives the Pauli matrices.
pub fn generator_basis(d: usize) -> GeneratorBasis {
    assert!(d >= 2, "generator_basis needs d >= 2");
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut generators = Vec::with_capacity(d * d - 1);
    for k in 1..d {
        for j in 0..k {
            let mut sym = CMatrix::from_element(d, d, zero);
            sym[(j, k)] = one;
            sym[(k, j)] = one;
            generators.push(sym);
            let mut anti = CMatrix::from_element(d, d, zero);
            anti[(j, k)] = -i;
            anti[(k, j)] = i;
            generators.push(anti);
        }
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut diag = CMatrix::from_element(d, d, zero);
        for j in 0..k {
            diag[(j, j)] = Complex64::new(norm, 0.0);
        }
        diag[(k, k)] = Complex64::new(-(k as f64) * norm, 0.0);
        generators.push(diag);
    }

    let m = generators.len();
    let mut structure = vec![0.0; m * m * m];
    for a in 0..m {
        for b in (a + 1)..m {
            let comm = &generators[a] * &generators[b] - &generators[b] * &generators[a];
            for c in 0..m {
                // tr([T_a, T_b] T_c) = 2i c_abc
                let tr = (&comm * &generators[c]).trace();
                let value = (tr / Complex64::new(0.0, 2.0)).re;
                structure[(a * m + b) * m + c] = value;
                structure[(b * m + a) * m + c] = -value;
            }
        }
    }
    GeneratorBasis {
        dim: d,
        generators,
        structure,
    }
}

/// `rho = A A^dagger / tr(A A^dagger)` with `A` a `D x rank` complex Gaussian matrix.
pub fn random_state(shape: &SystemShape, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let d = shape.total_dim();
    if rank == 0 || rank > d {
        return Err(Error::BadRank { rank, dim: d });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(d, rank, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let aa = &a * a.adjoint();
    let tr = aa.trace().re;
    let mut m = aa.unscale(tr);
    // exact Hermiticity
    for r in 0..d {
        m[(r, r)].im = 0.0;
        for c in (r + 1)..d {
            m[(c, r)] = m[(r, c)].conj();
        }
    }
    validate(m, shape.clone())
}

/// Full-rank random state.
pub fn random_full_rank(shape: &SystemShape, seed: u64) -> DensityMatrix {
    random_state(shape, shape.total_dim(), seed).expect("full rank is always valid")
}

#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// Square complex matrix as rows of `[re, im]` pairs.
pub(crate) fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<[f64; 2]>], field: &str) -> Result<CMatrix> {
    let n = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse {
                location: format!("field `{field}` row {r}"),
                message: format!("expected {n} entries, found {}", row.len()),
            });
        }
    }
    Ok(CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

/// Render a state (with optional label) in the state file format.
pub fn state_to_string(rho: &DensityMatrix, label: Option<&str>) -> Result<String> {
    format::to_json(&StateFile {
        dims: rho.shape.dims.clone(),
        matrix: matrix_to_rows(&rho.matrix),
        label: label.map(str::to_owned),
    })
}

/// Parse and validate a state file's contents.
pub fn state_from_str(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = format::from_json(text)?;
    let shape = SystemShape::new(file.dims).map_err(|e| Error::Parse {
        location: "field `dims`".into(),
        message: e.to_string(),
    })?;
    let matrix = rows_to_matrix(&file.matrix, "matrix")?;
    validate(matrix, shape)
}

pub fn write_state(rho: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, state_to_string(rho, None)?)?;
    Ok(())
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    state_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        let rho = validate(diag(&[0.5, 0.5]), SystemShape::qubits(1)).unwrap();
        assert_eq!(rho.eigenvalues(), vec![0.5, 0.5]);
    }

    #[test]
    fn pure_diagonal_is_valid() {
        let rho = validate(diag(&[1.0, 0.0]), SystemShape::qubits(1)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_eigenvalue_is_rejected_with_margin() {
        let err = validate(diag(&[1.5, -0.5]), SystemShape::qubits(1)).unwrap_err();
        assert_eq!(err, Error::NotPositive { margin: -0.5 });
    }

    #[test]
    fn trace_and_hermiticity_violations() {
        let err = validate(diag(&[0.45, 0.45]), SystemShape::qubits(1)).unwrap_err();
        assert!(matches!(err, Error::TraceNotOne { margin } if (margin - 0.1).abs() < 1e-12));

        let mut m = diag(&[0.5, 0.5]);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        let err = validate(m, SystemShape::qubits(1)).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { margin } if (margin - 0.1).abs() < 1e-12));

        let err = validate(diag(&[0.5, 0.5]), SystemShape::qubits(2)).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn repair_projects_in_tolerance_candidates() {
        let mut m = diag(&[0.5, 0.5 + 5e-13]);
        m[(0, 1)] = Complex64::new(0.1, 2e-14);
        m[(1, 0)] = Complex64::new(0.1, -1e-14);
        let rho = validate_with(m, SystemShape::qubits(1), ValidateOptions { repair: true })
            .unwrap();
        let h = rho.matrix();
        assert_eq!(h[(0, 1)], h[(1, 0)].conj());
        assert!((h.trace().re - 1.0).abs() < 1e-16);
    }

    #[test]
    fn bad_shapes_are_rejected() {
        assert!(SystemShape::new(vec![]).is_err());
        assert!(SystemShape::new(vec![2, 1]).is_err());
        assert!(matches!(
            SystemShape::new(vec![2; 13]),
            Err(Error::UnsupportedShape(_))
        ));
        assert_eq!(SystemShape::new(vec![2, 3]).unwrap().total_dim(), 6);
    }

    #[test]
    fn pauli_basis() {
        let b = generator_basis(2);
        let i = Complex64::new(0.0, 1.0);
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(b.generators()[0], CMatrix::from_row_slice(2, 2, &[z, o, o, z]));
        assert_eq!(b.generators()[1], CMatrix::from_row_slice(2, 2, &[z, -i, i, z]));
        assert_eq!(b.generators()[2], CMatrix::from_row_slice(2, 2, &[o, z, z, -o]));
        for (a, bb, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            assert_eq!(b.structure_constant(a, bb, c), 2.0);
            assert_eq!(b.structure_constant(bb, a, c), -2.0);
        }
        assert_eq!(b.structure_constant(0, 0, 2), 0.0);
    }

    #[test]
    fn su3_structure_constants_are_twice_gell_mann_f() {
        // Standard SU(3) f-constants (1-based): f123 = 1, f147 = f246 = f257 =
        // f345 = 1/2, f156 = f367 = -1/2, f458 = f678 = sqrt(3)/2.
        let h = 0.5;
        let r = 3f64.sqrt() / 2.0;
        let table = [
            ((1, 2, 3), 1.0),
            ((1, 4, 7), h),
            ((2, 4, 6), h),
            ((2, 5, 7), h),
            ((3, 4, 5), h),
            ((1, 5, 6), -h),
            ((3, 6, 7), -h),
            ((4, 5, 8), r),
            ((6, 7, 8), r),
        ];
        let b = generator_basis(3);
        assert_eq!(b.len(), 8);
        for ((i, j, k), f) in table {
            let c = b.structure_constant(i - 1, j - 1, k - 1);
            assert!((c - 2.0 * f).abs() < 1e-12, "c_{i}{j}{k} = {c}");
        }
    }

    #[test]
    fn generator_algebra_up_to_d6() {
        for d in 2..=6 {
            let b = generator_basis(d);
            let g = b.generators();
            let m = g.len();
            assert_eq!(m, d * d - 1);
            for a in 0..m {
                assert!(g[a].trace().norm() < 1e-12);
                assert_eq!(g[a], g[a].adjoint());
                for bb in 0..m {
                    let tr = (&g[a] * &g[bb]).trace();
                    let want = if a == bb { 2.0 } else { 0.0 };
                    assert!((tr - Complex64::new(want, 0.0)).norm() < 1e-12);
                    // commutator reproduced by the constants
                    let comm = &g[a] * &g[bb] - &g[bb] * &g[a];
                    let mut rebuilt = CMatrix::zeros(d, d);
                    for c in 0..m {
                        rebuilt += g[c].scale(b.structure_constant(a, bb, c))
                            * Complex64::new(0.0, 1.0);
                    }
                    assert!((comm - rebuilt).norm() < 1e-12);
                }
            }
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            let mut s = 0.0;
                            for n in 0..m {
                                s += b.structure_constant(i, j, n) * b.structure_constant(n, k, l)
                                    + b.structure_constant(j, k, n) * b.structure_constant(n, i, l)
                                    + b.structure_constant(k, i, n) * b.structure_constant(n, j, l);
                            }
                            assert!(s.abs() < 1e-10, "Jacobi d={d} ({i},{j},{k},{l}) = {s}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn random_states_have_requested_rank() {
        let shape = SystemShape::qubits(3);
        let rho = random_state(&shape, 8, 11).unwrap();
        assert!(rho.eigenvalues()[0] > 0.0);
        for rank in 1..=8 {
            let rho = random_state(&shape, rank, 100 + rank as u64).unwrap();
            let above = rho.eigenvalues().iter().filter(|&&e| e > 1e-10).count();
            assert_eq!(above, rank);
        }
        let pure = random_state(&shape, 1, 5).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        assert!(matches!(
            random_state(&shape, 0, 1),
            Err(Error::BadRank { rank: 0, dim: 8 })
        ));
        assert!(random_state(&shape, 9, 1).is_err());
    }

    #[test]
    fn random_states_are_deterministic() {
        let shape = SystemShape::new(vec![2, 3]).unwrap();
        let a = random_state(&shape, 6, 42).unwrap();
        let b = random_state(&shape, 6, 42).unwrap();
        let c = random_state(&shape, 6, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = random_full_rank(&SystemShape::qubits(1), 1);
        let b = random_full_rank(&SystemShape::new(vec![3]).unwrap(), 2);
        let ab = validate(
            a.matrix().kronecker(b.matrix()),
            SystemShape::new(vec![2, 3]).unwrap(),
        )
        .unwrap();
        let ra = ab.partial_trace(&[0]).unwrap();
        let rb = ab.partial_trace(&[1]).unwrap();
        assert!((ra.matrix() - a.matrix()).norm() < 1e-14);
        assert!((rb.matrix() - b.matrix()).norm() < 1e-14);
    }
}
