"""Acceptance criteria 1-11, each at its stated trial count and tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (also collected into the
pytest terminal summary). Run alone with::

    pytest tests/test_acceptance.py -v -s
"""

import math
import time

import numpy as np

from chronoreverse import classical as cl
from chronoreverse import harmonic as hm
from chronoreverse import suite
from conftest import ACCEPTANCE_LINES

SEED = 20240601


def _report(n, title, results, extra=""):
    ok = all(r.ok for r in results)
    detail = "; ".join(f"{r.name} {r.passed}/{r.trials} worst={r.worst:.3g} ({r.relation} {r.tolerance:g})"
                       for r in results)
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} :: {detail}{(' ' + extra) if extra else ''}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def _line(n, title, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} :: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_criterion_01_reversal_recovery():
    t0 = time.perf_counter()
    rec = suite.quantum_reversal(SEED, 500)[0]
    elapsed = time.perf_counter() - t0
    assert rec.trials == 500
    assert _report(1, "reversal recovery, 500 trials, dims 2-6, half rank-deficient", [rec], f"[{elapsed:.1f}s]")


def test_criterion_02_double_reversal():
    res = suite.quantum_double_reversal(SEED, 200)
    assert res.trials == 200
    assert _report(2, "double reversal on spanning states, 200 full-rank trials", [res])


def test_criterion_03_adjointness():
    classical = suite.classical_adjointness(SEED, 500)
    quantum = suite.quantum_adjointness(SEED, 500)
    assert all(r.trials == 500 for r in classical + [quantum])
    assert _report(3, "space-time adjointness and integration by parts", classical + [quantum])


def test_criterion_04_bayes_consistency():
    res = suite.classical_bayes(SEED, 500)
    assert res[0].tolerance == 1e-10
    assert _report(4, "Bayes consistency and row-stochastic reverse matrix (with null rows)", res)


def test_criterion_05_ratio_harmonicity():
    res = suite.ratio_harmonicity(SEED, 500)
    assert res.trials == 500
    assert _report(5, "ratio process reverse-harmonic, 500 dual flows, dims 2-4, length <= 6", [res])


def test_criterion_06_operator_jensen():
    res = suite.operator_jensen(SEED, 500)
    ops = [r for r in res if r.name.startswith("jensen.operator.")]
    assert {r.name.rsplit(".", 1)[1] for r in ops} == {"square", "xlogx", "neg_log", "inverse"}
    assert all(r.trials == 500 for r in res)
    assert _report(6, "operator, trace and expectation Jensen", res)


def test_criterion_07_entropy_ordering_and_monotonicity():
    res = suite.entropy_monotonicity(SEED, 500)
    # direct arithmetic for the diagonal pair
    oracle = 0.75 * math.log(0.75 / 0.5) + 0.25 * math.log(0.25 / 0.5)
    rho, sigma = np.diag([0.75, 0.25]), np.diag([0.5, 0.5])
    du, dbs = hm.d_umegaki(rho, sigma), hm.d_belavkin_staszewski(rho, sigma)
    hand_ok = max(abs(du - 0.130812), abs(dbs - 0.130812), abs(oracle - 0.130812)) <= 1e-6
    ok = _report(7, "D_BS >= D_U >= 0 and both nonincreasing, 500 dual flows", res,
                 f"hand value D_U={du:.6f} D_BS={dbs:.6f} vs 0.130812 {'ok' if hand_ok else 'MISMATCH'}")
    assert ok and hand_ok


def test_criterion_08_classical_h_theorem():
    p = np.array([[0.9, 0.1], [0.2, 0.8]])
    seq = cl.classical_h_theorem_report(p, [1.0, 0.0], [2 / 3, 1 / 3], 15)
    # direct iteration oracle
    a, oracle = 1.0, []
    for _ in range(16):
        oracle.append(sum(x * math.log(x / y) for x, y in ((a, 2 / 3), (1 - a, 1 / 3)) if x > 0))
        a = 0.9 * a + 0.2 * (1 - a)
    start_ok = abs(seq[0] - 0.405465) <= 1e-6 and abs(seq[0] - math.log(1.5)) <= 1e-12
    strict = all(y < x for x, y in zip(seq, seq[1:]))
    match = max(abs(x - y) for x, y in zip(seq, oracle))
    ok = _line(8, "classical H-theorem on the 2-state chain", start_ok and strict and match <= 1e-12,
               f"D_0={seq[0]:.6f} strictly decreasing={strict} max|oracle diff|={match:.2g}")
    assert ok


def test_criterion_09_path_normalization():
    res = suite.path_normalization(SEED, 200)
    emb = [r for r in suite.commuting_embedding(SEED, 200) if r.name == "embedding.path_weights_product_form"]
    assert res[0].trials == 200 and emb[0].tolerance == 1e-10
    assert _report(9, "path-space total mass and diagonal product form", res + emb)


def test_criterion_10_max_entropy():
    res = suite.max_entropy(SEED, 20, eps_grid=(0.05, 0.1, 0.2))
    # two families per reference
    assert res[0].trials == 40 and res[2].trials == 20
    assert _report(10, "max-entropy verification, 20 qubit references x 2 families", res)


def test_criterion_11_commuting_embedding():
    res = suite.commuting_embedding(SEED, 200)
    assert all(r.tolerance == 1e-10 for r in res)
    assert _report(11, "commuting embedding cross-checks", res)
