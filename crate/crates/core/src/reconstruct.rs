//! Rebuilding the three-qubit canonical point from its 75 invariants.
//!
//! In the canonical frame `X = diag(l)`, so `A_{2r} = sum_i a_i^2 l_i^(r-1)`
//! is a Vandermonde system for the squares `a_i^2`, and the mixed families
//! are `I12 = (Lambda F) R (M G)^T` and `I = ((Lambda F) x (M G) x (N H)) Q`.

use nalgebra::{Matrix3, Vector3};

use crate::bloch::{BlochTensor, Triple};
use crate::canonical::{genericity, CanonicalPoint, EIGENGAP_REL, MIN_SIGN_INVARIANT};
use crate::error::{Error, Result};
use crate::invariants::{gram, InvariantSet3};
use crate::local_action::rotate_triple;

/// Relative tolerance on `A9 = a1 a2 a3 det(Lambda)` after the sign is fixed.
pub const SIGN_CONSISTENCY: f64 = 1e-6;
/// Negative squares above `-NEGATIVE_SQUARE * A2` are clipped to zero.
pub const NEGATIVE_SQUARE: f64 = 1e-6;
/// Off-diagonal Gram entries allowed in the recovered `Q`, relative to the largest diagonal.
pub const DIAGONALITY: f64 = 1e-6;
/// Roots below `-NEGATIVE_ROOT * tr` make a trace triple inconsistent.
const NEGATIVE_ROOT: f64 = 1e-10;

/// Roots of `x^3 - tr x^2 + e2 x - e3` from power sums via Newton's identities,
/// sorted decreasing.
pub fn spectra_from_traces(p1: f64, p2: f64, p3: f64) -> Result<Vector3<f64>> {
    if p1 == 0.0 && p2 == 0.0 && p3 == 0.0 {
        return Ok(Vector3::zeros());
    }
    if !(p1 > 0.0) {
        return Err(Error::InconsistentTraces(format!("tr = {p1:e} is not positive")));
    }
    // scale to unit trace so thresholds are relative
    let (q2, q3) = (p2 / (p1 * p1), p3 / (p1 * p1 * p1));
    let e1 = 1.0;
    let e2 = (1.0 - q2) / 2.0;
    let e3 = (1.0 - 3.0 * q2 + 2.0 * q3) / 6.0;
    // depressed cubic y^3 + p y + q with x = y + 1/3
    let p = e2 - e1 * e1 / 3.0;
    let q = -2.0 * e1.powi(3) / 27.0 + e1 * e2 / 3.0 - e3;
    let roots = if p >= -1e-15 {
        if p > 1e-12 || q.abs() > 1e-12 {
            return Err(Error::InconsistentTraces(format!(
                "complex roots (p = {p:e}, q = {q:e})"
            )));
        }
        [1.0 / 3.0; 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = 3.0 * q / (p * m);
        if arg.abs() > 1.0 + 1e-9 {
            return Err(Error::InconsistentTraces(format!(
                "complex roots (cos argument {arg:e})"
            )));
        }
        let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| 1.0 / 3.0 + m * (theta - tau * k).cos())
    };
    let mut out = Vector3::from_fn(|i, _| roots[i]);
    if out.min() < -NEGATIVE_ROOT {
        return Err(Error::InconsistentTraces(format!("negative root {:e}", out.min() * p1)));
    }
    out.iter_mut().for_each(|x| *x = x.max(0.0) * p1);
    out.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// `Lambda[(r, i)] = l_i^r` for `r = 0..2`.
pub fn vandermonde(spectrum: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|r, i| spectrum[i].powi(r as i32))
}

/// Vandermonde factors and canonical components for all three sites.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeSystem {
    /// Gram spectra (decreasing) for X, Y, Z.
    pub spectra: [Vector3<f64>; 3],
    /// Diagonals of F, G, H: the canonical `alpha`, `beta`, `gamma`.
    pub components: [Vector3<f64>; 3],
}

impl VandermondeSystem {
    /// Lambda, M or N.
    pub fn vandermonde(&self, site: usize) -> Matrix3<f64> {
        vandermonde(&self.spectra[site])
    }

    /// Lambda F, M G or N H.
    pub fn weighted(&self, site: usize) -> Matrix3<f64> {
        self.vandermonde(site) * Matrix3::from_diagonal(&self.components[site])
    }

    /// `(l1 - l2)(l2 - l3)(l3 - l1)`.
    pub fn product_form_det(&self, site: usize) -> f64 {
        let l = &self.spectra[site];
        (l[0] - l[1]) * (l[1] - l[2]) * (l[2] - l[0])
    }

    /// Inverse of the weighted factor, solved on trace-normalised nodes.
    pub fn weighted_inverse(&self, site: usize) -> Result<Matrix3<f64>> {
        let det = self.weighted(site).determinant();
        if !(det.abs() > MIN_SIGN_INVARIANT) {
            return Err(Error::SingularSystem { det });
        }
        let tr = self.spectra[site].sum();
        let unit = vandermonde(&(self.spectra[site] / tr));
        let inv = unit.try_inverse().ok_or(Error::SingularSystem { det })?;
        let c = &self.components[site];
        let f_inv = Matrix3::from_diagonal(&Vector3::new(1.0 / c[0], 1.0 / c[1], 1.0 / c[2]));
        let d_inv = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / tr, 1.0 / (tr * tr)));
        Ok(f_inv * inv * d_inv)
    }
}

/// Canonical site vector from `A2, A4, A6, A9` and the Gram spectrum.
pub fn vector_from_quadratics(
    quadratics: [f64; 3],
    sign_invariant: f64,
    spectrum: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    if !(sign_invariant.abs() > MIN_SIGN_INVARIANT) {
        return Err(Error::ZeroSignInvariant { name: "A9".into(), value: sign_invariant });
    }
    let tr = spectrum.sum();
    let gap = (spectrum[0] - spectrum[1]).min(spectrum[1] - spectrum[2]);
    let det = vandermonde(spectrum).determinant();
    if !(tr > 0.0 && gap > EIGENGAP_REL * tr) {
        return Err(Error::DegenerateSpectrum { det });
    }
    let unit = vandermonde(&(spectrum / tr));
    let rhs = Vector3::new(quadratics[0], quadratics[1] / tr, quadratics[2] / (tr * tr));
    let squares = unit.lu().solve(&rhs).ok_or(Error::DegenerateSpectrum { det })?;
    let floor = NEGATIVE_SQUARE * quadratics[0].abs();
    let mut mags = Vector3::zeros();
    for i in 0..3 {
        if squares[i] < -floor {
            return Err(Error::NegativeSquare { index: i, value: squares[i] });
        }
        mags[i] = squares[i].max(0.0).sqrt();
    }
    let product = mags.product() * det;
    let s = if sign_invariant / product < 0.0 { -1.0 } else { 1.0 };
    let margin = (sign_invariant - s * product).abs() / sign_invariant.abs();
    if !(margin <= SIGN_CONSISTENCY) {
        return Err(Error::ConstraintViolation {
            what: "A9 = a1 a2 a3 det(Lambda)".into(),
            margin,
        });
    }
    Ok(mags * s)
}

/// `R = (Lambda F)^-1 I (M G)^-T` for the pair of sites `(a, b)`;
/// `mixed` is row-major in `(r, s)`.
pub fn pair_from_mixed(
    mixed: &[[f64; 3]; 3],
    system: &VandermondeSystem,
    sites: (usize, usize),
) -> Result<Matrix3<f64>> {
    let left = system.weighted_inverse(sites.0)?;
    let right = system.weighted_inverse(sites.1)?;
    let i = Matrix3::from_fn(|r, s| mixed[r][s]);
    Ok(left * i * right.transpose())
}

/// `Q` from the 27 triple invariants by inverting each factor separately.
pub fn triple_from_mixed(mixed: &Triple, system: &VandermondeSystem) -> Result<Triple> {
    let inv = [
        system.weighted_inverse(0)?,
        system.weighted_inverse(1)?,
        system.weighted_inverse(2)?,
    ];
    let q = rotate_triple(mixed, &inv[0], &inv[1], &inv[2]);
    let mut probe = BlochTensor::zero(3)?;
    probe.triple = q.clone();
    let g = gram(&probe)?;
    for (name, m) in ["X", "Y", "Z"].iter().zip(g.matrices()) {
        let scale = m.diagonal().abs().max();
        let mut off = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    off = off.max(m[(r, c)].abs());
                }
            }
        }
        let margin = if scale > 0.0 { off / scale } else { off };
        if margin > DIAGONALITY {
            return Err(Error::ConstraintViolation {
                what: format!("{name} of the recovered triple tensor is not diagonal"),
                margin,
            });
        }
    }
    Ok(q)
}

/// Spectra and site vectors for all three sites.
pub fn vandermonde_system(inv: &InvariantSet3) -> Result<VandermondeSystem> {
    let mut spectra = [Vector3::zeros(); 3];
    let mut components = [Vector3::zeros(); 3];
    for s in 0..3 {
        let [t1, t2, t3] = inv.traces[s];
        spectra[s] = spectra_from_traces(t1, t2, t3)?;
        components[s] = vector_from_quadratics(inv.quadratics[s], inv.signs[s], &spectra[s])
            .map_err(|e| match e {
                Error::ZeroSignInvariant { value, .. } => Error::ZeroSignInvariant {
                    name: ["A9", "B9", "C9"][s].into(),
                    value,
                },
                other => other,
            })?;
    }
    Ok(VandermondeSystem { spectra, components })
}

pub fn reconstruct_canonical(inv: &InvariantSet3) -> Result<CanonicalPoint> {
    let system = vandermonde_system(inv)?;
    let mut t = BlochTensor::zero(3)?;
    t.alpha = system.components[0];
    t.beta = system.components[1];
    t.gamma = system.components[2];
    t.pair_12 = pair_from_mixed(&inv.pairs[0], &system, (0, 1))?;
    t.pair_13 = pair_from_mixed(&inv.pairs[1], &system, (0, 2))?;
    t.pair_23 = pair_from_mixed(&inv.pairs[2], &system, (1, 2))?;
    t.triple = triple_from_mixed(&inv.triples, &system)?;
    let report = genericity(&t)?;
    Ok(CanonicalPoint { tensor: t, gauge: None, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::expand;
    use crate::canonical::canonicalize3;
    use crate::invariants::invariants3;
    use crate::local_action::{apply, haar_local};
    use crate::states::{random_full_rank, DensityMatrix, SystemShape};

    #[test]
    fn trivial_spectra() {
        assert_eq!(spectra_from_traces(0.0, 0.0, 0.0).unwrap(), Vector3::zeros());
        let s = spectra_from_traces(6.0, 14.0, 36.0).unwrap();
        assert!((s - Vector3::new(3.0, 2.0, 1.0)).abs().max() < 1e-12);
        let triple = spectra_from_traces(3.0, 3.0, 3.0).unwrap();
        assert!((triple - Vector3::repeat(1.0)).abs().max() < 1e-6);
        assert!(matches!(spectra_from_traces(1.0, 2.0, 0.0), Err(Error::InconsistentTraces(_))));
    }

    #[test]
    fn spectra_match_direct_eigenvalues() {
        let t = expand(&random_full_rank(&SystemShape::qubits(3), 12)).unwrap();
        let g = gram(&t).unwrap();
        for (m, sp) in g.matrices().iter().zip(&g.spectra) {
            let m2 = *m * *m;
            let got = spectra_from_traces(m.trace(), m2.trace(), (m2 * *m).trace()).unwrap();
            assert!((got - sp).abs().max() <= 1e-9 * sp[0]);
        }
    }

    #[test]
    fn quadratic_errors() {
        let sp = Vector3::new(3.0, 2.0, 1.0);
        assert!(matches!(
            vector_from_quadratics([0.0; 3], 0.0, &sp),
            Err(Error::ZeroSignInvariant { .. })
        ));
        assert!(matches!(
            vector_from_quadratics([1.0, 2.0, 3.0], 1.0, &Vector3::new(1.0, 1.0, 0.5)),
            Err(Error::DegenerateSpectrum { .. })
        ));
        // a^2 = (1, 1, -1) gives A = (1, 4, 12)
        assert!(matches!(
            vector_from_quadratics([1.0, 4.0, 12.0], 1.0, &sp),
            Err(Error::NegativeSquare { index: 2, .. })
        ));
    }

    #[test]
    fn quadratics_solve_known_vector() {
        let sp: Vector3<f64> = Vector3::new(0.5, 0.3, 0.1);
        let a = Vector3::new(-0.2, -0.1, -0.3);
        let quads = [0, 1, 2].map(|r| (0..3).map(|i| a[i] * a[i] * sp[i].powi(r)).sum::<f64>());
        let a9 = a.product() * vandermonde(&sp).determinant();
        let got = vector_from_quadratics(quads, a9, &sp).unwrap();
        assert!((got - a).abs().max() < 1e-14);
    }

    #[test]
    fn pair_system_edges() {
        let sys = VandermondeSystem {
            spectra: [Vector3::new(0.5, 0.3, 0.1); 3],
            components: [Vector3::new(0.2, 0.1, 0.3); 3],
        };
        assert_eq!(pair_from_mixed(&[[0.0; 3]; 3], &sys, (0, 1)).unwrap(), Matrix3::zeros());
        assert_eq!(triple_from_mixed(&Triple::zeros(), &sys).unwrap(), Triple::zeros());
        let mut bad = sys.clone();
        bad.components[1] = Vector3::new(0.2, 0.0, 0.3);
        assert!(matches!(
            pair_from_mixed(&[[1.0; 3]; 3], &bad, (0, 1)),
            Err(Error::SingularSystem { .. })
        ));
        let direct = sys.vandermonde(0).determinant();
        assert!((direct - sys.product_form_det(0)).abs() <= 1e-10 * direct.abs());
    }

    #[test]
    fn round_trip_matches_canonical_point() {
        let s3 = SystemShape::qubits(3);
        for seed in 0..5 {
            let rho = random_full_rank(&s3, seed);
            let canon = canonicalize3(&expand(&rho).unwrap()).unwrap();
            let inv = invariants3(&canon.tensor).unwrap();
            let sys = vandermonde_system(&inv).unwrap();
            for (site, a9) in inv.signs.iter().enumerate() {
                let d = sys.weighted(site).determinant();
                assert!((d - a9).abs() <= 1e-8 * a9.abs());
            }
            let rec = reconstruct_canonical(&inv).unwrap();
            assert!(rec.tensor.max_abs_diff(&canon.tensor) <= 1e-5);
            // invariants of any orbit point give the same result
            let moved = expand(&apply(&haar_local(&s3, 40 + seed), &rho).unwrap()).unwrap();
            let rec2 = reconstruct_canonical(&invariants3(&moved).unwrap()).unwrap();
            assert!(rec2.tensor.max_abs_diff(&canon.tensor) <= 1e-5);
        }
    }

    #[test]
    fn perturbed_triple_invariant_is_rejected() {
        let t = expand(&random_full_rank(&SystemShape::qubits(3), 3)).unwrap();
        let mut inv = invariants3(&t).unwrap();
        inv.triples[(1, 0, 2)] *= 1.1;
        assert!(matches!(reconstruct_canonical(&inv), Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn maximally_mixed_has_no_sign_invariant() {
        let t = expand(&DensityMatrix::maximally_mixed(SystemShape::qubits(3))).unwrap();
        let inv = invariants3(&t).unwrap();
        assert!(matches!(reconstruct_canonical(&inv), Err(Error::ZeroSignInvariant { .. })));
    }
}
