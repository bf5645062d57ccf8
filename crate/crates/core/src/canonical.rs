//! Canonical representatives of generic two- and three-qubit orbits.
//!
//! Three qubits: rotate each site into the eigenframe of its Gram matrix
//! (eigenvalues decreasing), then use the residual Klein group to make the
//! local Bloch vector uniform in sign. Two qubits: signed SVD of `R`, then a
//! fixed lexicographic choice among the 16 residual sign pairs.

use std::cmp::Ordering;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bloch::{mat_rows, rows_mat, BlochFile, BlochTensor};
use crate::error::{Error, Result};
use crate::format;
use crate::invariants::{gram, sign_invariant, GramTriple};
use crate::local_action::{transform_bloch, RotationTriple};

/// An eigengap counts as distinct above this fraction of the Gram trace.
pub const EIGENGAP_REL: f64 = 1e-8;
/// Smallest admissible canonical-frame component magnitude.
pub const MIN_COMPONENT: f64 = 1e-8;
/// Smallest admissible `|A9|`, `|B9|`, `|C9|` (absolute, degree-9 scale).
pub const MIN_SIGN_INVARIANT: f64 = 1e-24;

/// The residual group left after diagonalising a Gram matrix.
pub const KLEIN: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Per-site genericity margins; vectors have one entry per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    /// Smallest gap between consecutive sorted Gram eigenvalues.
    pub eigengaps: Vec<f64>,
    /// Gram traces that scale the eigengap threshold.
    pub gram_traces: Vec<f64>,
    /// Smallest component magnitude of the site vector in the Gram eigenframe.
    pub min_components: Vec<f64>,
    /// `|A9|`, `|B9|`, `|C9|`.
    pub sign_invariants: Vec<f64>,
    pub generic: bool,
}

impl GenericityReport {
    /// Human-readable list of the margins that fail their thresholds.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in 0..self.eigengaps.len() {
            let site = s + 1;
            if !(self.eigengaps[s] > EIGENGAP_REL * self.gram_traces[s]) {
                out.push(format!(
                    "site {site}: eigengap {:e} <= {EIGENGAP_REL:e} * tr {:e}",
                    self.eigengaps[s], self.gram_traces[s]
                ));
            }
            if !(self.min_components[s] > MIN_COMPONENT) {
                out.push(format!("site {site}: min component {:e}", self.min_components[s]));
            }
            if !(self.sign_invariants[s] > MIN_SIGN_INVARIANT) {
                out.push(format!("site {site}: sign invariant {:e}", self.sign_invariants[s]));
            }
        }
        out
    }
}

fn site_vectors(t: &BlochTensor) -> [Vector3<f64>; 3] {
    [t.alpha, t.beta, t.gamma]
}

fn report_from(t: &BlochTensor, g: &GramTriple) -> GenericityReport {
    let sites = t.n();
    let vecs = site_vectors(t);
    let mats = g.matrices();
    let mut rep = GenericityReport {
        eigengaps: Vec::with_capacity(sites),
        gram_traces: Vec::with_capacity(sites),
        min_components: Vec::with_capacity(sites),
        sign_invariants: Vec::with_capacity(sites),
        generic: false,
    };
    for s in 0..sites {
        let sp = &g.spectra[s];
        rep.eigengaps.push((sp[0] - sp[1]).min(sp[1] - sp[2]));
        rep.gram_traces.push(mats[s].trace());
        let local = g.frames[s].transpose() * vecs[s];
        rep.min_components.push(local.abs().min());
        rep.sign_invariants.push(sign_invariant(&vecs[s], mats[s]).abs());
    }
    rep.generic = rep.failures().is_empty();
    rep
}

pub fn genericity(t: &BlochTensor) -> Result<GenericityReport> {
    Ok(report_from(t, &gram(t)?))
}

/// A canonical tensor, the rotations that produced it, and its margins.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPoint {
    pub tensor: BlochTensor,
    /// `None` when the point was rebuilt from invariants rather than reached by rotation.
    pub gauge: Option<RotationTriple>,
    pub report: GenericityReport,
}

fn sign_of(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// The Klein element turning `v` into a uniform-sign vector.
pub fn uniform_sign_element(v: &Vector3<f64>) -> [f64; 3] {
    let s = [sign_of(v[0]), sign_of(v[1]), sign_of(v[2])];
    let c = s[0] * s[1] * s[2];
    [s[0] * c, s[1] * c, s[2] * c]
}

/// Rows of the returned rotation are the eigenvectors, so it diagonalises `G`.
fn eigen_rotation(frame: &Matrix3<f64>) -> Matrix3<f64> {
    let mut v = *frame;
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
    }
    v.transpose()
}

fn klein(k: &[f64; 3]) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(k[0], k[1], k[2]))
}

pub fn canonicalize3(t: &BlochTensor) -> Result<CanonicalPoint> {
    if t.n() != 3 {
        return Err(Error::UnsupportedShape(format!(
            "canonicalize3 needs 3 qubits, got {}",
            t.n()
        )));
    }
    let g = gram(t)?;
    let report = report_from(t, &g);
    let vecs = site_vectors(t);
    let rotations = (0..3)
        .map(|s| {
            let l = eigen_rotation(&g.frames[s]);
            klein(&uniform_sign_element(&(l * vecs[s]))) * l
        })
        .collect();
    let gauge = RotationTriple::new(rotations)?;
    let tensor = transform_bloch(t, &gauge)?;
    Ok(CanonicalPoint { tensor, gauge: Some(gauge), report })
}

/// `R = O1 diag(sigma) O2^T` with `O1, O2` special orthogonal, `|sigma|`
/// decreasing, and any sign carried by `sigma[2]`.
pub fn signed_svd(r: &Matrix3<f64>) -> (Matrix3<f64>, Vector3<f64>, Matrix3<f64>) {
    let svd = r.svd(true, true);
    let u = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").transpose();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut o1 = Matrix3::from_fn(|row, c| u[(row, order[c])]);
    let mut o2 = Matrix3::from_fn(|row, c| v[(row, order[c])]);
    let mut sigma = Vector3::from_fn(|i, _| svd.singular_values[order[i]]);
    if o1.determinant() < 0.0 {
        o1.column_mut(2).neg_mut();
        sigma[2] = -sigma[2];
    }
    if o2.determinant() < 0.0 {
        o2.column_mut(2).neg_mut();
        sigma[2] = -sigma[2];
    }
    (o1, sigma, o2)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn canonicalize2(t: &BlochTensor) -> Result<CanonicalPoint> {
    if t.n() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "canonicalize2 needs 2 qubits, got {}",
            t.n()
        )));
    }
    let report = genericity(t)?;
    let (o1, sigma, o2) = signed_svd(&t.pair_12);
    let (l, m) = (o1.transpose(), o2.transpose());
    let (la, mb) = (l * t.alpha, m * t.beta);
    // key: sign pattern of alpha, of beta, then the diagonal of sigma, each negated
    let mut best: Option<(Vec<f64>, Matrix3<f64>, Matrix3<f64>)> = None;
    for k1 in &KLEIN {
        for k2 in &KLEIN {
            let mut key = Vec::with_capacity(9);
            key.extend((0..3).map(|i| -signum0(k1[i] * la[i])));
            key.extend((0..3).map(|i| -signum0(k2[i] * mb[i])));
            key.extend((0..3).map(|i| -(k1[i] * sigma[i] * k2[i])));
            if best.as_ref().is_none_or(|(b, _, _)| lex_cmp(&key, b).is_lt()) {
                best = Some((key, klein(k1) * l, klein(k2) * m));
            }
        }
    }
    let (_, l, m) = best.expect("16 candidates");
    let gauge = RotationTriple::new(vec![l, m])?;
    let tensor = transform_bloch(t, &gauge)?;
    Ok(CanonicalPoint { tensor, gauge: Some(gauge), report })
}

/// `canonicalize2` or `canonicalize3` by qubit count.
pub fn canonicalize(t: &BlochTensor) -> Result<CanonicalPoint> {
    match t.n() {
        2 => canonicalize2(t),
        3 => canonicalize3(t),
        n => Err(Error::UnsupportedShape(format!(
            "canonical forms need 2 or 3 qubits, got {n}"
        ))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CanonicalFile {
    #[serde(flatten)]
    bloch: BlochFile,
    report: GenericityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gauge: Option<Vec<Vec<Vec<f64>>>>,
}

pub fn canonical_to_string(p: &CanonicalPoint) -> Result<String> {
    format::to_json(&CanonicalFile {
        bloch: BlochFile::from_tensor(&p.tensor),
        report: p.report.clone(),
        gauge: p.gauge.as_ref().map(|g| g.rotations().iter().map(mat_rows).collect()),
    })
}

pub fn canonical_from_str(text: &str) -> Result<CanonicalPoint> {
    let file: CanonicalFile = format::from_json(text)?;
    let tensor = file.bloch.to_tensor()?;
    let gauge = match file.gauge {
        None => None,
        Some(rows) => {
            let mats = rows
                .iter()
                .enumerate()
                .map(|(s, r)| rows_mat(r, &format!("gauge[{s}]")))
                .collect::<Result<Vec<_>>>()?;
            Some(RotationTriple::new(mats)?)
        }
    };
    Ok(CanonicalPoint { tensor, gauge, report: file.report })
}

pub fn write_canonical(p: &CanonicalPoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, canonical_to_string(p)?)?;
    Ok(())
}

pub fn read_canonical(path: impl AsRef<Path>) -> Result<CanonicalPoint> {
    canonical_from_str(&std::fs::read_to_string(path)?)
}
