use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

use lueq::bloch::{expand, reconstruct_matrix, BlochTensor};
use lueq::canonical::{canonicalize2, canonicalize3};
use lueq::invariants::{first_difference, invariants3, InvariantSet3, Tolerance};
use lueq::local_action::{apply, haar_local, transform_bloch, RotationTriple};
use lueq::reconstruct::spectra_from_traces;
use lueq::states::{random_full_rank, random_state, SystemShape};

/// Rotation from a rotation vector via Rodrigues' formula.
fn rotation(w: [f64; 3]) -> Matrix3<f64> {
    nalgebra::Rotation3::from_scaled_axis(Vector3::from(w)).into_inner()
}

fn rotation_vec() -> impl Strategy<Value = [f64; 3]> {
    [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansion_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, p in 0.0..1.0f64) {
        let shape = SystemShape::qubits(3);
        let (a, b) = (random_full_rank(&shape, s1), random_full_rank(&shape, s2));
        let mix = lueq::states::validate(
            a.matrix().scale(p) + b.matrix().scale(1.0 - p),
            shape,
        ).unwrap();
        let want: Vec<f64> = expand(&a).unwrap().to_coords().iter()
            .zip(expand(&b).unwrap().to_coords())
            .map(|(x, y)| p * x + (1.0 - p) * y)
            .collect();
        let got = expand(&mix).unwrap().to_coords();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn coordinates_round_trip(seed in 0u64..10_000, n in 1usize..=3) {
        let t = expand(&random_full_rank(&SystemShape::qubits(n), seed)).unwrap();
        let back = BlochTensor::from_coords(n, &t.to_coords()).unwrap();
        prop_assert_eq!(&back, &t);
        let m = reconstruct_matrix(&t);
        let diff = (&m - random_full_rank(&SystemShape::qubits(n), seed).matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        prop_assert!(diff < 1e-14);
    }

    #[test]
    fn reduced_vectors_scale_by_traced_dimension(seed in 0u64..10_000) {
        let rho = random_full_rank(&SystemShape::qubits(3), seed);
        let t = expand(&rho).unwrap();
        let one = expand(&rho.partial_trace(&[0]).unwrap()).unwrap();
        prop_assert!((one.alpha - t.alpha * 4.0).abs().max() < 1e-14);
        let two = expand(&rho.partial_trace(&[1, 2]).unwrap()).unwrap();
        prop_assert!((two.alpha - t.beta * 2.0).abs().max() < 1e-14);
        prop_assert!((two.pair_12 - t.pair_23 * 2.0).abs().max() < 1e-14);
    }

    #[test]
    fn rotation_action_matches_conjugation(
        seed in 0u64..10_000,
        w1 in rotation_vec(), w2 in rotation_vec(), w3 in rotation_vec(),
    ) {
        let rho = random_full_rank(&SystemShape::qubits(3), seed);
        let rots = RotationTriple::new(vec![rotation(w1), rotation(w2), rotation(w3)]).unwrap();
        let via_bloch = transform_bloch(&expand(&rho).unwrap(), &rots).unwrap();
        let via_matrix = expand(&apply(&rots.lift().unwrap(), &rho).unwrap()).unwrap();
        prop_assert!(via_bloch.max_abs_diff(&via_matrix) < 1e-13);
    }

    #[test]
    fn invariants_survive_rotations(
        seed in 0u64..10_000,
        w1 in rotation_vec(), w2 in rotation_vec(), w3 in rotation_vec(),
    ) {
        let t = expand(&random_full_rank(&SystemShape::qubits(3), seed)).unwrap();
        let rots = RotationTriple::new(vec![rotation(w1), rotation(w2), rotation(w3)]).unwrap();
        let moved = transform_bloch(&t, &rots).unwrap();
        let a = invariants3(&t).unwrap().to_vec();
        let b = invariants3(&moved).unwrap().to_vec();
        let tol = Tolerance { rel: 1e-9, abs: 1e-12 };
        prop_assert_eq!(first_difference(&a, &b, &InvariantSet3::degrees(), t.norm(), tol), None);
    }

    #[test]
    fn canonical_forms_are_orbit_constant(seed in 0u64..10_000, u in 0u64..10_000) {
        for n in [2usize, 3] {
            let shape = SystemShape::qubits(n);
            let rho = random_full_rank(&shape, seed);
            let moved = apply(&haar_local(&shape, u), &rho).unwrap();
            let (p, q) = if n == 2 {
                (canonicalize2(&expand(&rho).unwrap()).unwrap(), canonicalize2(&expand(&moved).unwrap()).unwrap())
            } else {
                (canonicalize3(&expand(&rho).unwrap()).unwrap(), canonicalize3(&expand(&moved).unwrap()).unwrap())
            };
            if p.report.generic {
                prop_assert!(p.tensor.max_abs_diff(&q.tensor) < 1e-8);
            }
        }
    }

    #[test]
    fn cubic_recovers_distinct_spectra(a in 0.01..1.0f64, b in 0.01..1.0f64, c in 0.01..1.0f64) {
        let p = |k: i32| a.powi(k) + b.powi(k) + c.powi(k);
        let got = spectra_from_traces(p(1), p(2), p(3)).unwrap();
        let mut want = [a, b, c];
        want.sort_by(|x, y| y.total_cmp(x));
        // root accuracy degrades like sqrt(eps) near double roots
        let gap = (want[0] - want[1]).min(want[1] - want[2]);
        let tol = if gap > 1e-3 { 1e-10 } else { 1e-6 };
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() < tol, "{:?} vs {:?}", got, want);
        }
    }

    #[test]
    fn low_rank_states_have_expected_spectrum(seed in 0u64..10_000, rank in 1usize..=8) {
        let rho = random_state(&SystemShape::qubits(3), rank, seed).unwrap();
        let ev = rho.eigenvalues();
        let zeros = ev.iter().filter(|&&x| x.abs() < 1e-12).count();
        prop_assert_eq!(zeros, 8 - rank);
    }
}
