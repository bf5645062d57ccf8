//! Local-unitary equivalence decisions, and a numerical search for a
//! connecting local unitary that serves as an independent cross-check.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::bloch::{expand, pauli};
use crate::canonical::{canonicalize, genericity, GenericityReport};
use crate::error::{Error, Result};
use crate::invariants::{first_difference, record, Tolerance, TwoQubitSet};
use crate::local_action::{apply, haar_local, LocalUnitary};
use crate::orbit_dim::tangent_frame;
use crate::states::{CMatrix, DensityMatrix};

/// Canonical tensors closer than this (max component) are the same point.
pub const CANONICAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Distinct,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::Distinct => "distinct",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Evidence behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// The `index`-th sorted global eigenvalue differs.
    Spectrum { index: usize, left: f64, right: f64 },
    /// The named invariant differs after degree normalisation by `scale^degree`.
    Invariant { name: String, left: f64, right: f64, degree: u32, scale: f64 },
    /// Largest component deviation between the two canonical tensors.
    Canonical { max_deviation: f64 },
}

impl Witness {
    pub fn describe(&self) -> String {
        match self {
            Witness::Spectrum { index, left, right } => {
                format!("eigenvalue {index}: {left:.12e} vs {right:.12e}")
            }
            Witness::Invariant { name, left, right, .. } => {
                format!("{name}: {left:.12e} vs {right:.12e}")
            }
            Witness::Canonical { max_deviation } => {
                format!("canonical tensors differ by at most {max_deviation:.3e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Genericity of the two inputs; empty when the spectra already differ.
    pub genericity: Vec<GenericityReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecideOptions {
    pub tol: Tolerance,
    pub canonical_tol: f64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self { tol: Tolerance::default(), canonical_tol: CANONICAL_TOL }
    }
}

fn check_pair(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.shape(), b.shape())));
    }
    let n = a.shape().n();
    if !a.shape().is_qubits() || !(2..=3).contains(&n) {
        return Err(Error::UnsupportedShape(format!(
            "equivalence needs 2 or 3 qubits, got {}",
            a.shape()
        )));
    }
    Ok(())
}

pub fn decide(a: &DensityMatrix, b: &DensityMatrix) -> Result<EquivalenceVerdict> {
    decide_with(a, b, &DecideOptions::default())
}

pub fn decide_with(
    a: &DensityMatrix,
    b: &DensityMatrix,
    opts: &DecideOptions,
) -> Result<EquivalenceVerdict> {
    check_pair(a, b)?;
    let (ea, eb) = (a.eigenvalues(), b.eigenvalues());
    if let Some(index) = (0..ea.len()).find(|&i| !opts.tol.agrees(ea[i], eb[i], 1, 1.0)) {
        return Ok(EquivalenceVerdict {
            verdict: Verdict::Distinct,
            witness: Some(Witness::Spectrum { index, left: ea[index], right: eb[index] }),
            genericity: Vec::new(),
        });
    }

    let (ta, tb) = (expand(a)?, expand(b)?);
    let reports = vec![genericity(&ta)?, genericity(&tb)?];
    let (ra, rb) = (record(&ta, TwoQubitSet::Full)?, record(&tb, TwoQubitSet::Full)?);
    let scale = ta.norm().max(tb.norm());
    if let Some(i) = first_difference(&ra.values, &rb.values, &ra.degrees, scale, opts.tol) {
        return Ok(EquivalenceVerdict {
            verdict: Verdict::Distinct,
            witness: Some(Witness::Invariant {
                name: ra.names[i].clone(),
                left: ra.values[i],
                right: rb.values[i],
                degree: ra.degrees[i],
                scale,
            }),
            genericity: reports,
        });
    }

    if !(reports[0].generic && reports[1].generic) {
        return Ok(EquivalenceVerdict {
            verdict: Verdict::Inconclusive,
            witness: None,
            genericity: reports,
        });
    }
    let dev = canonicalize(&ta)?.tensor.max_abs_diff(&canonicalize(&tb)?.tensor);
    let verdict = if dev <= opts.canonical_tol { Verdict::Equivalent } else { Verdict::Distinct };
    Ok(EquivalenceVerdict {
        verdict,
        witness: Some(Witness::Canonical { max_deviation: dev }),
        genericity: reports,
    })
}

/// `exp(-i (w . sigma) / 2)`.
pub fn su2_exp(w: &Vector3<f64>) -> CMatrix {
    let theta = w.norm();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut u = CMatrix::identity(2, 2).scale(c);
    if theta > 0.0 {
        for k in 0..3 {
            u += pauli(k + 1) * Complex64::new(0.0, -s * w[k] / theta);
        }
    }
    u
}

/// Best local unitary found by [`oracle_search`].
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// `|| U rho1 U^dagger - rho2 ||_F` at the best point.
    pub residual: f64,
    pub unitary: LocalUnitary,
    /// Index of the start that produced the best point (0 is the identity).
    pub restart: usize,
    /// Per-start final residuals, in start order.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub max_iterations: usize,
    /// Later starts are skipped once the best residual is below this.
    pub stop_below: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { max_iterations: 200, stop_below: 1e-13 }
    }
}

fn residual_vector(m: &CMatrix, target: &CMatrix) -> DVector<f64> {
    let d = m.nrows();
    let mut r = DVector::zeros(2 * d * d);
    for row in 0..d {
        for c in 0..d {
            let z = m[(row, c)] - target[(row, c)];
            r[row * d + c] = z.re;
            r[d * d + row * d + c] = z.im;
        }
    }
    r
}

/// Levenberg-Marquardt on `U -> exp(-i w . sigma / 2) U`, re-centred after each accepted step.
fn descend(
    rho: &DensityMatrix,
    target: &CMatrix,
    start: LocalUnitary,
    opts: &OracleOptions,
) -> Result<(f64, LocalUnitary)> {
    let n = start.factors().len();
    let mut u = start;
    let mut moved = apply(&u, rho)?;
    let mut r = residual_vector(moved.matrix(), target);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..opts.max_iterations {
        if cost.sqrt() <= opts.stop_below {
            break;
        }
        // d(rho')/dw_k = -i/2 [sigma_k, rho'] = -1/2 (frame vector)
        let jac: DMatrix<f64> = tangent_frame(&moved).as_matrix() * -0.5;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for k in 0..lhs.nrows() {
                lhs[(k, k)] += mu * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&grad))) else {
                mu *= 10.0;
                continue;
            };
            let factors = (0..n)
                .map(|s| {
                    let w = Vector3::new(step[3 * s], step[3 * s + 1], step[3 * s + 2]);
                    su2_exp(&w) * &u.factors()[s]
                })
                .collect();
            let trial_u = LocalUnitary::new(u.shape().clone(), factors)?;
            let trial = apply(&trial_u, rho)?;
            let trial_r = residual_vector(trial.matrix(), target);
            let trial_cost = trial_r.norm_squared();
            if trial_cost < cost {
                u = trial_u;
                moved = trial;
                r = trial_r;
                cost = trial_cost;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            mu *= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Ok((cost.sqrt(), u))
}

fn restart_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Multi-start local search for `U` minimising `|| U rho1 U^dagger - rho2 ||_F`.
/// Start 0 is the identity; start `k > 0` is a seeded Haar local unitary.
pub fn oracle_search(
    a: &DensityMatrix,
    b: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<OracleResult> {
    oracle_search_with(a, b, restarts, seed, &OracleOptions::default())
}

pub fn oracle_search_with(
    a: &DensityMatrix,
    b: &DensityMatrix,
    restarts: usize,
    seed: u64,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if a.shape() != b.shape() || !a.shape().is_qubits() {
        return Err(Error::ShapeMismatch(format!(
            "oracle needs matching qubit shapes, got {} and {}",
            a.shape(),
            b.shape()
        )));
    }
    let shape = a.shape().clone();
    let mut best: Option<(f64, LocalUnitary, usize)> = None;
    let mut residuals = Vec::new();
    for k in 0..restarts.max(1) {
        let start = if k == 0 {
            LocalUnitary::identity(shape.clone())
        } else {
            haar_local(&shape, restart_seed(seed, k))
        };
        let (res, u) = descend(a, b.matrix(), start, opts)?;
        residuals.push(res);
        if best.as_ref().is_none_or(|(r, _, _)| res < *r) {
            best = Some((res, u, k));
        }
        if best.as_ref().is_some_and(|(r, _, _)| *r <= opts.stop_below) {
            break;
        }
    }
    let (residual, unitary, restart) = best.expect("at least one start");
    Ok(OracleResult { residual, unitary, restart, residuals })
}
