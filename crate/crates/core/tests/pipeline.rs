use lueq::bloch::{expand, read_bloch, write_bloch};
use lueq::canonical::{canonicalize3, read_canonical, write_canonical};
use lueq::equivalence::{decide, Verdict};
use lueq::invariants::{read_invariants, record, write_invariants, InvariantSet3, TwoQubitSet};
use lueq::local_action::{apply, haar_local};
use lueq::reconstruct::reconstruct_canonical;
use lueq::states::{random_full_rank, read_state, write_state, SystemShape};

#[test]
fn files_carry_the_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = SystemShape::qubits(3);
    let rho = random_full_rank(&s3, 31);

    let state_path = dir.path().join("rho.state");
    write_state(&rho, &state_path).unwrap();
    let rho_back = read_state(&state_path).unwrap();
    assert_eq!(rho_back.matrix(), rho.matrix());

    let t = expand(&rho_back).unwrap();
    let bloch_path = dir.path().join("rho.bloch");
    write_bloch(&t, &bloch_path).unwrap();
    assert_eq!(read_bloch(&bloch_path).unwrap(), t);

    let inv_path = dir.path().join("rho.inv");
    write_invariants(&record(&t, TwoQubitSet::Full).unwrap(), &inv_path).unwrap();
    let rec = read_invariants(&inv_path).unwrap();
    let rebuilt = reconstruct_canonical(&InvariantSet3::from_vec(&rec.values).unwrap()).unwrap();

    let canon = canonicalize3(&t).unwrap();
    let canon_path = dir.path().join("rho.canon");
    write_canonical(&canon, &canon_path).unwrap();
    let canon_back = read_canonical(&canon_path).unwrap();
    assert_eq!(canon_back, canon);
    assert!(rebuilt.tensor.max_abs_diff(&canon.tensor) <= 1e-5);
    assert!(rebuilt.report.generic);

    // the rebuilt point is a state with the same global spectrum
    let rho_canon = lueq::bloch::reconstruct(&rebuilt.tensor).unwrap();
    for (a, b) in rho_canon.eigenvalues().iter().zip(rho.eigenvalues()) {
        assert!((a - b).abs() <= 1e-6);
    }
    assert_eq!(decide(&rho_canon, &rho).unwrap().verdict, Verdict::Equivalent);
}

#[test]
fn reconstruction_is_orbit_invariant() {
    let s3 = SystemShape::qubits(3);
    for seed in 0..10 {
        let rho = random_full_rank(&s3, 500 + seed);
        let moved = apply(&haar_local(&s3, 600 + seed), &rho).unwrap();
        let a = reconstruct_canonical(&lueq::invariants::invariants3(&expand(&rho).unwrap()).unwrap()).unwrap();
        let b = reconstruct_canonical(&lueq::invariants::invariants3(&expand(&moved).unwrap()).unwrap()).unwrap();
        assert!(a.tensor.max_abs_diff(&b.tensor) <= 1e-5);
    }
}

#[test]
fn equivalence_is_symmetric() {
    for n in [2, 3] {
        let s = SystemShape::qubits(n);
        for seed in 0..10 {
            let a = random_full_rank(&s, 700 + seed);
            let b = if seed % 2 == 0 {
                apply(&haar_local(&s, 800 + seed), &a).unwrap()
            } else {
                random_full_rank(&s, 900 + seed)
            };
            assert_eq!(decide(&a, &b).unwrap().verdict, decide(&b, &a).unwrap().verdict);
        }
    }
}
