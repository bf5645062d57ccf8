//! Gram matrices of the correlation tensors and the finite polynomial
//! invariant families for one, two and three qubits.
//!
//! Three qubits (75 numbers, in this order):
//!
//! * `tr X^r`, `tr Y^r`, `tr Z^r` for `r = 1..3`
//! * `alpha^T X^(r-1) alpha`, `beta^T Y^(r-1) beta`, `gamma^T Z^(r-1) gamma`
//! * `A9 = alpha . (X alpha) x (X^2 alpha)` and its analogues `B9`, `C9`
//! * `(X^(r-1) alpha)_i (Y^(s-1) beta)_j R_ij`, then the `S` (sites 1, 3) and
//!   `T` (sites 2, 3) analogues, each row-major in `(r, s)`
//! * `(X^(r-1) alpha)_i (Y^(s-1) beta)_j (Z^(t-1) gamma)_k Q_ijk`, row-major in `(r, s, t)`
//!
//! where `X_ii' = Q_ijk Q_i'jk`, `Y_jj' = Q_ijk Q_ij'k`, `Z_kk' = Q_ijk Q_ijk'`.

use std::path::Path;

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bloch::{reconstruct_matrix, BlochTensor};
use crate::error::{Error, Result};
use crate::format;

/// Symmetric 3x3 eigen-decomposition with eigenvalues sorted decreasing;
/// eigenvectors are the columns of the returned matrix.
pub fn sorted_eigen(m: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = Vector3::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let vectors = Matrix3::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Per-site Gram matrices with their sorted spectra and eigenframes.
#[derive(Debug, Clone, PartialEq)]
pub struct GramTriple {
    n: usize,
    pub x: Matrix3<f64>,
    pub y: Matrix3<f64>,
    /// Zero for two qubits.
    pub z: Matrix3<f64>,
    /// Eigenvalues of X, Y, Z sorted decreasing.
    pub spectra: [Vector3<f64>; 3],
    /// Matching eigenvectors (columns).
    pub frames: [Matrix3<f64>; 3],
}

impl GramTriple {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> [&Matrix3<f64>; 3] {
        [&self.x, &self.y, &self.z]
    }
}

pub fn gram(t: &BlochTensor) -> Result<GramTriple> {
    let (x, y, z) = match t.n() {
        2 => (
            t.pair_12 * t.pair_12.transpose(),
            t.pair_12.transpose() * t.pair_12,
            Matrix3::zeros(),
        ),
        3 => {
            let q = &t.triple;
            let mut x = Matrix3::zeros();
            let mut y = Matrix3::zeros();
            let mut z = Matrix3::zeros();
            for a in 0..3 {
                for b in 0..3 {
                    let mut sx = 0.0;
                    let mut sy = 0.0;
                    let mut sz = 0.0;
                    for u in 0..3 {
                        for v in 0..3 {
                            sx += q[(a, u, v)] * q[(b, u, v)];
                            sy += q[(u, a, v)] * q[(u, b, v)];
                            sz += q[(u, v, a)] * q[(u, v, b)];
                        }
                    }
                    x[(a, b)] = sx;
                    y[(a, b)] = sy;
                    z[(a, b)] = sz;
                }
            }
            (x, y, z)
        }
        n => {
            return Err(Error::UnsupportedShape(format!(
                "Gram matrices need 2 or 3 qubits, got {n}"
            )))
        }
    };
    let ex = sorted_eigen(&x);
    let ey = sorted_eigen(&y);
    let ez = sorted_eigen(&z);
    Ok(GramTriple {
        n: t.n(),
        x,
        y,
        z,
        spectra: [ex.0, ey.0, ez.0],
        frames: [ex.1, ey.1, ez.1],
    })
}

/// `v . (G v) x (G^2 v)`.
pub fn sign_invariant(v: &Vector3<f64>, g: &Matrix3<f64>) -> f64 {
    let gv = g * v;
    let ggv = g * gv;
    v.dot(&gv.cross(&ggv))
}

/// `[v, G v, G^2 v]`.
fn krylov(v: &Vector3<f64>, g: &Matrix3<f64>) -> [Vector3<f64>; 3] {
    let v1 = g * v;
    let v2 = g * v1;
    [*v, v1, v2]
}

/// Comparison tolerance for invariant values after degree normalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-12 }
    }
}

impl Tolerance {
    /// Do two values agree once degree-`degree` invariants are divided by `scale^degree`?
    pub fn agrees(&self, a: f64, b: f64, degree: u32, scale: f64) -> bool {
        let s = if scale > 0.0 { scale.powi(degree as i32) } else { 1.0 };
        let (na, nb) = (a / s, b / s);
        (na - nb).abs() <= (self.rel * na.abs().max(nb.abs())).max(self.abs)
    }
}

/// Normalisation scale of a tensor: the Euclidean norm of all coefficients.
/// It is itself invariant (`tr rho^2 = 2^-n + 2^n |c|^2`).
pub fn coefficient_scale(t: &BlochTensor) -> f64 {
    t.norm()
}

/// First index where two invariant lists disagree under `tol`.
pub fn first_difference(
    a: &[f64],
    b: &[f64],
    degrees: &[u32],
    scale: f64,
    tol: Tolerance,
) -> Option<usize> {
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), degrees.len());
    (0..a.len()).find(|&i| !tol.agrees(a[i], b[i], degrees[i], scale))
}

/// The 75 three-qubit invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet3 {
    /// `traces[site][r - 1] = tr G_site^r`.
    pub traces: [[f64; 3]; 3],
    /// `quadratics[site][r - 1] = v_site^T G_site^(r-1) v_site` (`A2, A4, A6`, ...).
    pub quadratics: [[f64; 3]; 3],
    /// `A9, B9, C9`.
    pub signs: [f64; 3],
    /// `pairs[p][r - 1][s - 1]` for the site pairs (1,2), (1,3), (2,3).
    pub pairs: [[[f64; 3]; 3]; 3],
    /// `triples[(r - 1, s - 1, t - 1)]`.
    pub triples: crate::bloch::Triple,
}

pub const THREE_QUBIT_COUNT: usize = 75;
const SITE: [&str; 3] = ["X", "Y", "Z"];
const QUAD: [&str; 3] = ["A", "B", "C"];
const PAIR: [&str; 3] = ["12", "13", "23"];

impl InvariantSet3 {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(THREE_QUBIT_COUNT);
        self.traces.iter().for_each(|s| out.extend(s));
        self.quadratics.iter().for_each(|s| out.extend(s));
        out.extend(self.signs);
        for p in &self.pairs {
            p.iter().for_each(|row| out.extend(row));
        }
        out.extend(self.triples.as_slice());
        out
    }

    pub fn from_vec(v: &[f64]) -> Result<Self> {
        if v.len() != THREE_QUBIT_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "{} values for the {THREE_QUBIT_COUNT}-member set",
                v.len()
            )));
        }
        let take3 = |o: usize| [v[o], v[o + 1], v[o + 2]];
        let mut pairs = [[[0.0; 3]; 3]; 3];
        for (p, pair) in pairs.iter_mut().enumerate() {
            for (r, row) in pair.iter_mut().enumerate() {
                *row = take3(21 + 9 * p + 3 * r);
            }
        }
        let mut triples = crate::bloch::Triple::zeros();
        triples.0.copy_from_slice(&v[48..75]);
        Ok(Self {
            traces: [take3(0), take3(3), take3(6)],
            quadratics: [take3(9), take3(12), take3(15)],
            signs: take3(18),
            pairs,
            triples,
        })
    }

    pub fn names() -> Vec<String> {
        let mut out = Vec::with_capacity(THREE_QUBIT_COUNT);
        for s in SITE {
            out.extend((1..=3).map(|r| format!("tr{s}^{r}")));
        }
        for q in QUAD {
            out.extend((1..=3).map(|r| format!("{q}{}", 2 * r)));
        }
        out.extend(QUAD.iter().map(|q| format!("{q}9")));
        for p in PAIR {
            for r in 1..=3 {
                out.extend((1..=3).map(|s| format!("I{p}_{r}{s}")));
            }
        }
        for r in 1..=3 {
            for s in 1..=3 {
                out.extend((1..=3).map(|t| format!("I_{r}{s}{t}")));
            }
        }
        out
    }

    /// Polynomial degree of each member in the Bloch coefficients.
    pub fn degrees() -> Vec<u32> {
        let mut out = Vec::with_capacity(THREE_QUBIT_COUNT);
        for _ in 0..3 {
            out.extend([2, 4, 6]);
        }
        for _ in 0..3 {
            out.extend([2, 4, 6]);
        }
        out.extend([9, 9, 9]);
        for _ in 0..3 {
            for r in 1..=3u32 {
                out.extend((1..=3u32).map(|s| 2 * (r + s) - 1));
            }
        }
        for r in 1..=3u32 {
            for s in 1..=3u32 {
                out.extend((1..=3u32).map(|t| 2 * (r + s + t) - 2));
            }
        }
        out
    }
}

pub fn invariants3(t: &BlochTensor) -> Result<InvariantSet3> {
    if t.n() != 3 {
        return Err(Error::UnsupportedShape(format!(
            "the 75-member family needs 3 qubits, got {}",
            t.n()
        )));
    }
    let g = gram(t)?;
    let grams = [g.x, g.y, g.z];
    let vecs = [t.alpha, t.beta, t.gamma];

    let mut traces = [[0.0; 3]; 3];
    let mut quadratics = [[0.0; 3]; 3];
    let mut signs = [0.0; 3];
    let mut kry = [[Vector3::zeros(); 3]; 3];
    for s in 0..3 {
        let m2 = grams[s] * grams[s];
        traces[s] = [grams[s].trace(), m2.trace(), (m2 * grams[s]).trace()];
        kry[s] = krylov(&vecs[s], &grams[s]);
        for r in 0..3 {
            quadratics[s][r] = vecs[s].dot(&kry[s][r]);
        }
        signs[s] = kry[s][0].dot(&kry[s][1].cross(&kry[s][2]));
    }

    let pair_mats = [t.pair_12, t.pair_13, t.pair_23];
    let pair_sites = [(0, 1), (0, 2), (1, 2)];
    let mut pairs = [[[0.0; 3]; 3]; 3];
    for (p, &(a, b)) in pair_sites.iter().enumerate() {
        for r in 0..3 {
            for s in 0..3 {
                pairs[p][r][s] = kry[a][r].dot(&(pair_mats[p] * kry[b][s]));
            }
        }
    }

    let q = &t.triple;
    let triples = crate::bloch::Triple::from_fn(|r, s, u| {
        let (va, vb, vc) = (&kry[0][r], &kry[1][s], &kry[2][u]);
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    acc += va[i] * vb[j] * vc[k] * q[(i, j, k)];
                }
            }
        }
        acc
    });

    Ok(InvariantSet3 { traces, quadratics, signs, pairs, triples })
}

/// Two-qubit invariants: the minimal ten plus the redundant `beta` members.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet2 {
    pub tr_x: f64,
    pub tr_x2: f64,
    pub det_r: f64,
    /// `alpha^T X^(r-1) alpha`.
    pub alpha_quadratics: [f64; 3],
    /// `alpha^T X^(r-1) R beta`.
    pub mixed: [f64; 3],
    pub a9: f64,
    /// `beta^T Y^(p-1) beta`.
    pub beta_quadratics: [f64; 3],
    pub b9: f64,
}

/// Which members of the two-qubit family to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwoQubitSet {
    /// The ten-member separating family.
    Minimal,
    /// Minimal plus `beta^T Y^(p-1) beta` and `B9`.
    #[default]
    Full,
}

impl InvariantSet2 {
    pub fn to_vec(&self, set: TwoQubitSet) -> Vec<f64> {
        let mut out = vec![self.tr_x, self.tr_x2, self.det_r];
        out.extend(self.alpha_quadratics);
        out.extend(self.mixed);
        out.push(self.a9);
        if set == TwoQubitSet::Full {
            out.extend(self.beta_quadratics);
            out.push(self.b9);
        }
        out
    }

    pub fn names(set: TwoQubitSet) -> Vec<String> {
        let mut out: Vec<String> = ["trX^1", "trX^2", "detR", "A2", "A4", "A6", "M1", "M2", "M3", "A9"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if set == TwoQubitSet::Full {
            out.extend(["B2", "B4", "B6", "B9"].iter().map(|s| s.to_string()));
        }
        out
    }

    pub fn degrees(set: TwoQubitSet) -> Vec<u32> {
        let mut out = vec![2, 4, 3, 2, 4, 6, 3, 5, 7, 9];
        if set == TwoQubitSet::Full {
            out.extend([2, 4, 6, 9]);
        }
        out
    }
}

pub fn invariants2(t: &BlochTensor) -> Result<InvariantSet2> {
    if t.n() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "the two-qubit family needs 2 qubits, got {}",
            t.n()
        )));
    }
    let g = gram(t)?;
    let ka = krylov(&t.alpha, &g.x);
    let kb = krylov(&t.beta, &g.y);
    let r_beta = t.pair_12 * t.beta;
    Ok(InvariantSet2 {
        tr_x: g.x.trace(),
        tr_x2: (g.x * g.x).trace(),
        det_r: t.pair_12.determinant(),
        alpha_quadratics: [0, 1, 2].map(|r| t.alpha.dot(&ka[r])),
        mixed: [0, 1, 2].map(|r| ka[r].dot(&r_beta)),
        a9: ka[0].dot(&ka[1].cross(&ka[2])),
        beta_quadratics: [0, 1, 2].map(|r| t.beta.dot(&kb[r])),
        b9: kb[0].dot(&kb[1].cross(&kb[2])),
    })
}

/// The single one-qubit invariant with its independent spectral check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubitInvariant {
    /// `I = alpha . alpha`.
    pub invariant: f64,
    /// `tr(rho^2)` from the reconstructed matrix.
    pub purity: f64,
    /// `tr(rho^2) - (1/2 + 2 I)`.
    pub identity_residual: f64,
}

/// With `rho = 1/2 + alpha . sigma` one has `tr(rho^2) = 1/2 + 2 |alpha|^2`,
/// so `tr(rho^2) - 1/2` is twice `I`, not `I` itself.
pub const ONE_QUBIT_NOTE: &str = "tr(rho^2) = 1/2 + 2*(alpha.alpha); the form I = tr(rho^2) - 1/2 \
     is off by a factor of 2 under rho = 1/2 + alpha.sigma";

pub fn invariant1(t: &BlochTensor) -> Result<OneQubitInvariant> {
    if t.n() != 1 {
        return Err(Error::UnsupportedShape(format!(
            "the one-qubit invariant needs 1 qubit, got {}",
            t.n()
        )));
    }
    let invariant = t.alpha.norm_squared();
    let purity: f64 = reconstruct_matrix(t).iter().map(|z| z.norm_sqr()).sum();
    Ok(OneQubitInvariant {
        invariant,
        purity,
        identity_residual: purity - (0.5 + 2.0 * invariant),
    })
}

/// A named invariant list for any supported qubit count, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantRecord {
    pub n: usize,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub degrees: Vec<u32>,
}

impl InvariantRecord {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Evaluate the family appropriate to `t.n()`.
pub fn record(t: &BlochTensor, set: TwoQubitSet) -> Result<InvariantRecord> {
    Ok(match t.n() {
        1 => InvariantRecord {
            n: 1,
            names: vec!["I".into()],
            values: vec![invariant1(t)?.invariant],
            degrees: vec![2],
        },
        2 => InvariantRecord {
            n: 2,
            names: InvariantSet2::names(set),
            values: invariants2(t)?.to_vec(set),
            degrees: InvariantSet2::degrees(set),
        },
        _ => InvariantRecord {
            n: 3,
            names: InvariantSet3::names(),
            values: invariants3(t)?.to_vec(),
            degrees: InvariantSet3::degrees(),
        },
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct InvariantFile {
    n: usize,
    names: Vec<String>,
    values: Vec<f64>,
}

pub fn invariants_to_string(rec: &InvariantRecord) -> Result<String> {
    format::to_json(&InvariantFile {
        n: rec.n,
        names: rec.names.clone(),
        values: rec.values.clone(),
    })
}

pub fn invariants_from_str(text: &str) -> Result<InvariantRecord> {
    let file: InvariantFile = format::from_json(text)?;
    if file.names.len() != file.values.len() {
        return Err(Error::Parse {
            location: "field `values`".into(),
            message: format!("{} values for {} names", file.values.len(), file.names.len()),
        });
    }
    let candidates: Vec<(Vec<String>, Vec<u32>)> = match file.n {
        1 => vec![(vec!["I".into()], vec![2])],
        2 => [TwoQubitSet::Minimal, TwoQubitSet::Full]
            .iter()
            .map(|&s| (InvariantSet2::names(s), InvariantSet2::degrees(s)))
            .collect(),
        3 => vec![(InvariantSet3::names(), InvariantSet3::degrees())],
        n => {
            return Err(Error::Parse {
                location: "field `n`".into(),
                message: format!("no invariant family for n = {n}"),
            })
        }
    };
    let (names, degrees) = candidates
        .into_iter()
        .find(|(names, _)| *names == file.names)
        .ok_or_else(|| Error::Parse {
            location: "field `names`".into(),
            message: format!("not a canonical name list for n = {}", file.n),
        })?;
    Ok(InvariantRecord { n: file.n, names, values: file.values, degrees })
}

pub fn write_invariants(rec: &InvariantRecord, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, invariants_to_string(rec)?)?;
    Ok(())
}

pub fn read_invariants(path: impl AsRef<Path>) -> Result<InvariantRecord> {
    invariants_from_str(&std::fs::read_to_string(path)?)
}

/// Central-difference Jacobian of `eval` with respect to the Bloch coordinates.
pub fn coordinate_jacobian(
    t: &BlochTensor,
    step: f64,
    eval: impl Fn(&BlochTensor) -> Vec<f64>,
) -> DMatrix<f64> {
    let base = t.to_coords();
    let rows = eval(t).len();
    let mut jac = DMatrix::zeros(rows, base.len());
    for c in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[c] += step;
        minus[c] -= step;
        let fp = eval(&BlochTensor::from_coords(t.n(), &plus).expect("same n"));
        let fm = eval(&BlochTensor::from_coords(t.n(), &minus).expect("same n"));
        for r in 0..rows {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    jac
}

/// Count of singular values before the first consecutive ratio
/// `sigma_(k+1) / sigma_k` below `gap`; `sv` must be sorted decreasing.
pub fn gap_rank(sv: &[f64], gap: f64) -> usize {
    if sv.first().is_none_or(|&s| s <= 0.0) {
        return 0;
    }
    (1..sv.len()).find(|&k| sv[k] < gap * sv[k - 1]).unwrap_or(sv.len())
}

/// Numerical rank of the invariant Jacobian, with the decreasing singular values.
///
/// Evaluated at `t / |t|` with unit-normalised rows: both are invertible
/// rescalings, and they keep members of degree 2 through 9 comparable.
pub fn jacobian_rank(
    t: &BlochTensor,
    step: f64,
    gap: f64,
    eval: impl Fn(&BlochTensor) -> Vec<f64>,
) -> (usize, Vec<f64>) {
    let norm = t.norm();
    let unit = if norm > 0.0 { t.scaled(1.0 / norm) } else { t.clone() };
    let mut jac = coordinate_jacobian(&unit, step, eval);
    for r in 0..jac.nrows() {
        let n = jac.row(r).norm();
        if n > 0.0 {
            jac.row_mut(r).unscale_mut(n);
        }
    }
    let mut sv: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    (gap_rank(&sv, gap), sv)
}
