"""Smoke test for the pylueq extension module.

Run after `maturin develop` (or with the built library on PYTHONPATH):

    python crates/python/python/smoke_test.py
"""

import math
import os
import sys
import tempfile

import pylueq


def check(cond, what):
    if not cond:
        sys.exit(f"FAIL: {what}")
    print(f"ok   {what}")


def main():
    check(pylueq.invariant_count([2, 2, 2]) == 54, "three-qubit invariant count is 54")
    check(pylueq.invariant_count([2, 2]) == 9, "two-qubit invariant count is 9")

    rho = pylueq.DensityMatrix.random([2, 2, 2], seed=7)
    check(rho.dims == [2, 2, 2], "random state keeps its dims")
    check(abs(sum(rho.eigenvalues()) - 1.0) < 1e-12, "eigenvalues sum to one")

    dim, sv = pylueq.orbit_dimension(rho)
    check(dim == 9 and len(sv) == 9, "generic three-qubit orbit has dimension 9")
    check(pylueq.invariant_count_numeric(rho) == 54, "numeric count matches the formula")

    t = pylueq.expand(rho)
    check(t.n == 3 and len(t.coords()) == 63, "Bloch tensor has 63 coordinates")
    back = t.to_state()
    diff = max(abs(a - b) for ra, rb in zip(rho.matrix(), back.matrix()) for a, b in zip(ra, rb))
    check(diff < 1e-14, "expand and rebuild round trip")

    inv = pylueq.invariants(rho)
    check(len(inv) == 75 and list(inv) == pylueq.INVARIANT_NAMES_3, "75 named invariants in order")

    moved = rho.haar_rotated(3)
    inv_moved = pylueq.invariants(moved)
    worst = max(abs(inv[k] - inv_moved[k]) / max(abs(inv[k]), 1e-30) for k in inv if abs(inv[k]) > 1e-14)
    check(worst < 1e-8, "invariants unchanged by a local unitary")

    verdict, witness = pylueq.decide(rho, moved)
    check(verdict == "equivalent", "on-orbit pair is equivalent")
    residual, _ = pylueq.oracle_search(rho, moved, restarts=20, seed=1)
    check(residual < 1e-6, "oracle finds the connecting unitary")

    other = pylueq.DensityMatrix.random([2, 2, 2], seed=8)
    verdict, witness = pylueq.decide(rho, other)
    check(verdict == "distinct" and witness, "independent pair is distinct with a witness")

    canon = pylueq.canonicalize(rho)
    check(canon.generic and canon.gauge is not None, "canonical point is generic with a gauge")
    rebuilt = pylueq.reconstruct_canonical(list(inv.values()))
    check(rebuilt.tensor.max_abs_diff(canon.tensor) < 1e-5, "invariants rebuild the canonical point")

    s = 1 / math.sqrt(2)
    ghz = pylueq.DensityMatrix.pure([2, 2, 2], [s, 0, 0, 0, 0, 0, 0, s])
    check(not pylueq.canonicalize(ghz).generic, "GHZ is flagged non-generic")

    q = pylueq.DensityMatrix.random([2], seed=4)
    i1, purity = pylueq.one_qubit_invariant(q)
    check(abs(purity - (0.5 + 2 * i1)) < 1e-12, "tr rho^2 = 1/2 + 2 I")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "a.state")
        rho.write(path)
        check(pylueq.DensityMatrix.read(path).matrix() == rho.matrix(), "state file round trip")

    try:
        pylueq.DensityMatrix([2], [[1, 1], [0, 0]])
    except ValueError as e:
        check("Hermitian" in str(e), "invalid matrix raises ValueError")
    else:
        sys.exit("FAIL: invalid matrix accepted")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
