"""Seeded randomized property batteries.

Each battery draws its random instances from a generator derived from the
caller's seed and the battery name, so batteries are reproducible on their
own and independent of the order in which they run. A battery returns a
:class:`PropertyResult` carrying the number of trials, the number that
passed, the worst observed value and the tolerance it was judged against.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import channels as qc
from . import classical as cl
from . import harmonic as hm
from . import pathspace as ps
from .linalg import (
    NONNEGATIVE,
    Tolerances,
    _tol,
    dag,
    matrix_function,
    op_norm,
    pseudo_inverse,
    psd_order_holds,
    spectral_decompose,
    support_projector,
)
from .randomgen import (
    haar_isometry,
    haar_unitary,
    random_density,
    random_distribution,
    random_hermitian,
    random_kraus,
    random_positive_definite,
    random_psd,
    random_stochastic,
)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    trials: int
    passed: int
    worst: float
    tolerance: float
    relation: str  # how ``worst`` is compared with ``tolerance``

    @property
    def ok(self) -> bool:
        return self.trials > 0 and self.passed == self.trials

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def battery_rng(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return np.random.default_rng([seed, int.from_bytes(digest[:8], "little")])


def _upper(name: str, values, tol: float) -> PropertyResult:
    """All values must be <= tol."""
    v = np.asarray(values, dtype=float)
    return PropertyResult(name, v.size, int(np.sum(v <= tol)), float(np.max(v)) if v.size else 0.0, tol, "<=")


def _lower(name: str, values, tol: float) -> PropertyResult:
    """All values must be >= -tol."""
    v = np.asarray(values, dtype=float)
    return PropertyResult(name, v.size, int(np.sum(v >= -tol)), float(np.min(v)) if v.size else 0.0, -tol, ">=")


def _flags(name: str, flags, worst: float = 0.0, tol: float = 0.0) -> PropertyResult:
    f = np.asarray(flags, dtype=bool)
    return PropertyResult(name, f.size, int(f.sum()), worst, tol, "flag")


def _rank_reduced_state(rng, dim: int) -> np.ndarray:
    """Full-rank state compressed by a random projector of rank < dim."""
    r = int(rng.integers(1, dim))
    v = haar_isometry(rng, dim, r)
    proj = v @ dag(v)
    rho = proj @ random_density(rng, dim) @ proj
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + dag(rho))


def _random_channel(rng, dim: int, max_rank: int = 4) -> qc.KrausMap:
    return qc.KrausMap(tuple(random_kraus(rng, dim, int(rng.integers(1, max_rank + 1)))))


def _random_dual(rng, dims=(2, 4), max_len=6) -> hm.DualChannelFlow:
    d = int(rng.integers(dims[0], dims[1] + 1))
    steps = int(rng.integers(1, max_len + 1))
    chans = [_random_channel(rng, d) for _ in range(steps)]
    return hm.DualChannelFlow.evolve(random_density(rng, d), random_density(rng, d), chans)


# ---------------------------------------------------------------------------
# matrix kernel


def kernel_sqrt(seed: int, trials: int = 500, tol: Tolerances | None = None) -> PropertyResult:
    rng = battery_rng(seed, "kernel_sqrt")
    res = []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        a = random_psd(rng, d, int(rng.integers(1, d + 1)))
        b = matrix_function(a, np.sqrt, NONNEGATIVE, tol)
        res.append(op_norm(b @ b - a))
    return _upper("kernel.sqrt_squares_back", res, 1e-9)


def kernel_penrose(seed: int, trials: int = 500, tol: Tolerances | None = None) -> PropertyResult:
    rng = battery_rng(seed, "kernel_penrose")
    res = []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        a = random_psd(rng, d, int(rng.integers(1, d)))
        p = pseudo_inverse(a, tol)
        res.append(max(
            op_norm(a @ p @ a - a),
            op_norm(p @ a @ p - p),
            op_norm(dag(a @ p) - a @ p),
            op_norm(dag(p @ a) - p @ a),
        ) / max(1.0, op_norm(p)))
    return _upper("kernel.penrose_conditions", res, 1e-9)


def kernel_support_and_spectrum(seed: int, trials: int = 500, tol: Tolerances | None = None) -> PropertyResult:
    rng = battery_rng(seed, "kernel_support")
    res = []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        a = random_psd(rng, d, int(rng.integers(1, d + 1)))
        pi = support_projector(a, tol)
        sd = spectral_decompose(random_hermitian(rng, d), tol)
        v = sd.eigenvectors
        ok_order = psd_order_holds(a, a, tol)
        res.append(max(
            op_norm(pi @ pi - pi),
            op_norm(pi @ a @ pi - a),
            op_norm(dag(v) @ v - np.eye(d)),
            0.0 if ok_order else 1.0,
        ))
    return _upper("kernel.support_idempotent_and_unitary_eigenvectors", res, 1e-10)


# ---------------------------------------------------------------------------
# classical kinematics


def classical_bayes(seed: int, trials: int = 500, tol: Tolerances | None = None) -> list[PropertyResult]:
    rng = battery_rng(seed, "classical_bayes")
    bayes, rows = [], []
    for k in range(trials):
        n = int(rng.integers(2, 7))
        p = random_stochastic(rng, n)
        if k % 2:
            # kill some columns so pi_{t+1} has zeros
            dead = rng.random(n) < 0.4
            dead[0] = False
            p[:, dead] = 0.0
            p = p / p.sum(axis=1, keepdims=True)
        pi = random_distribution(rng, n)
        q = cl.reverse_transition_matrix(p, pi)
        nxt = cl.evolve_forward(p, pi)
        live = nxt > 0
        lhs = p * pi[:, None]
        rhs = (q * nxt[:, None]).T
        bayes.append(float(np.max(np.abs(lhs - rhs)[:, live])))
        rows.append(float(max(np.max(np.abs(q.sum(axis=1) - 1.0)), -min(q.min(), 0.0))))
    return [
        _upper("classical.bayes_consistency", bayes, 1e-10),
        _upper("classical.reverse_row_stochastic", rows, 1e-12),
    ]


def _random_flow(rng, n_range=(2, 6), max_steps=8) -> cl.ChainFlow:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    steps = int(rng.integers(1, max_steps + 1))
    return cl.ChainFlow.from_initial([random_stochastic(rng, n) for _ in range(steps)], random_distribution(rng, n))


def classical_adjointness(seed: int, trials: int = 500, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "classical_adjointness")
    adj, ibp = [], []
    for _ in range(trials):
        flow = _random_flow(rng, max_steps=7)  # window of at most 8 times
        shape = (flow.steps + 1, flow.n)
        f, g = rng.standard_normal(shape), rng.standard_normal(shape)
        adj.append(cl.check_space_time_adjointness(flow, f, g))
        ibp.append(cl.integration_by_parts_residual(flow, f, g))
    return [
        _upper("classical.space_time_adjointness", adj, t.check),
        _upper("classical.integration_by_parts", ibp, t.check),
    ]


def classical_harmonic(seed: int, trials: int = 500, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "classical_harmonic")
    doob, mart, sub = [], [], []
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        steps = int(rng.integers(1, 8))
        ps_ = [random_stochastic(rng, n) for _ in range(steps)]
        fp = cl.ChainFlow.from_initial(ps_, random_distribution(rng, n))
        fpi = cl.ChainFlow.from_initial(ps_, random_distribution(rng, n))
        theta = cl.doob_ratio(fp, fpi)
        doob.append(cl.reverse_harmonic_residual(theta, fpi))
        # space-time harmonic function pulled back from a terminal one
        h = np.zeros((steps + 1, n))
        h[-1] = rng.standard_normal(n)
        for k in range(steps - 1, -1, -1):
            h[k] = ps_[k] @ h[k + 1]
        e = cl.expectation_sequence(h, fp)
        mart.append(max(float(np.ptp(e)), cl.martingale_conditional_residual(h, fp)))
        sub.append(float(np.min(cl.reverse_submartingale_gaps(theta, fpi))))
    return [
        _upper("classical.doob_ratio_reverse_harmonic", doob, t.check),
        _upper("classical.harmonic_martingale", mart, t.check),
        _lower("classical.neg_log_reverse_submartingale", sub, t.check),
    ]


def classical_h_theorem(seed: int, trials: int = 200, tol: Tolerances | None = None) -> PropertyResult:
    t = _tol(tol)
    rng = battery_rng(seed, "classical_h_theorem")
    worst = []
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        p = random_stochastic(rng, n)
        pibar = cl.stationary_distribution(p)
        seq = cl.classical_h_theorem_report(p, random_distribution(rng, n), pibar, 10)
        worst.append(float(np.max(np.diff(seq))))
    return _upper("classical.h_theorem_nonincreasing", worst, t.check)


# ---------------------------------------------------------------------------
# quantum channel


def quantum_reversal(seed: int, trials: int = 500, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "quantum_reversal")
    rec, comp, remix, lemma = [], [], [], []
    for k in range(trials):
        d = int(rng.integers(2, 7))
        m = _random_channel(rng, d)
        rho = random_density(rng, d) if k % 2 == 0 else _rank_reduced_state(rng, d)
        rev = qc.time_reversal(m, rho, t)
        nxt = qc.apply_schrodinger(m, rho, t)
        rec.append(qc.trace_norm(qc.apply_schrodinger(rev, nxt, t) - rho))
        comp.append(op_norm(rev.completeness() - support_projector(nxt, t)))
        u = haar_unitary(rng, len(m))
        rev2 = qc.time_reversal(qc.remix(m, u), rho, t)
        probe = random_density(rng, d)
        remix.append(qc.trace_norm(qc.apply_schrodinger(rev, probe, t) - qc.apply_schrodinger(rev2, probe, t)))
        lemma.append(qc.lemma_support_residual(m, rho, random_hermitian(rng, d), t))
    return [
        _upper("quantum.reversal_recovery", rec, t.check),
        _upper("quantum.reversal_completeness_is_support", comp, t.check),
        _upper("quantum.kraus_representation_independence", remix, t.check),
        _upper("quantum.support_lemma", lemma, t.check),
    ]


def quantum_double_reversal(seed: int, trials: int = 200, tol: Tolerances | None = None) -> PropertyResult:
    t = _tol(tol)
    rng = battery_rng(seed, "quantum_double_reversal")
    res = []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        res.append(qc.double_reversal_residual(_random_channel(rng, d), random_density(rng, d), t))
    return _upper("quantum.double_reversal_identity", res, t.check)


def quantum_consistency(seed: int, trials: int = 200, tol: Tolerances | None = None) -> PropertyResult:
    t = _tol(tol)
    rng = battery_rng(seed, "quantum_consistency")
    res = []
    for k in range(trials):
        d = int(rng.integers(2, 7))
        rho = random_density(rng, d) if k % 2 == 0 else _rank_reduced_state(rng, d)
        # sigma inside supp(rho)
        proj = support_projector(rho, t)
        sigma = proj @ random_density(rng, d) @ proj
        sigma = sigma / np.trace(sigma).real
        res.append(qc.check_consistency(_random_channel(rng, d), rho, 0.5 * (sigma + dag(sigma)), t))
    return _upper("quantum.consistency_on_support", res, t.check)


def quantum_adjointness(seed: int, trials: int = 500, tol: Tolerances | None = None) -> PropertyResult:
    t = _tol(tol)
    rng = battery_rng(seed, "quantum_adjointness")
    res = []
    for k in range(trials):
        d = int(rng.integers(2, 7))
        rho = random_density(rng, d) if k % 2 == 0 else _rank_reduced_state(rng, d)
        res.append(qc.check_space_time_adjointness_q(
            _random_channel(rng, d), rho, random_hermitian(rng, d), random_hermitian(rng, d), t))
    return _upper("quantum.space_time_adjointness", res, t.check)


def quantum_transition_probabilities(seed: int, trials: int = 300, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "quantum_two_time")
    two, meas = [], []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        m = _random_channel(rng, d)
        rho = random_density(rng, d)
        tt = qc.two_time_probabilities(m, rho, t)
        two.append(max(tt.residual, abs(tt.forward.sum() - 1.0)))
        f, b = qc.measurement_probability_reversal(m, rho, t)
        meas.append(float(np.max(np.abs(f - b))))
    return [
        _upper("quantum.two_time_probabilities_reverse", two, t.check),
        _upper("quantum.measurement_probability_reversal", meas, t.check),
    ]


def quantum_augmentation(seed: int, trials: int = 200, tol: Tolerances | None = None) -> PropertyResult:
    t = _tol(tol)
    rng = battery_rng(seed, "quantum_augmentation")
    res = []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        # a channel whose outputs all live on a proper subspace
        m = qc.KrausMap(tuple(_compressing_kraus(rng, d, int(rng.integers(1, d)))))
        rho = random_density(rng, d)
        nxt = qc.apply_schrodinger(m, rho, t)
        rev = qc.time_reversal(m, rho, t)
        aug = qc.augment_to_tpcp(rev, nxt, t)
        proj = support_projector(nxt, t)
        probe = proj @ random_density(rng, d) @ proj
        probe = probe / np.trace(probe).real
        res.append(max(
            qc.validate(aug, t).completeness_residual,
            qc.trace_norm(qc.apply_schrodinger(aug, probe, t) - qc.apply_schrodinger(rev, probe, t)),
            qc.trace_norm(qc.apply_schrodinger(aug, nxt, t) - rho),
        ))
    return _upper("quantum.augmentation_trace_preserving_and_local", res, 1e-9)


def _compressing_kraus(rng, d: int, r: int) -> list[np.ndarray]:
    """Kraus operators of a TP channel on C^d whose range is an r-dimensional subspace."""
    v = haar_isometry(rng, d, r)  # target subspace
    k = int(rng.integers(1, 4))
    w = haar_isometry(rng, d * r * k, d)  # isometry C^d -> C^r (x) C^{d k}
    ops = []
    for j in range(d * k):
        block = w[j * r:(j + 1) * r, :]  # r x d
        ops.append(v @ block)
    return ops


# ---------------------------------------------------------------------------
# harmonic processes and entropies


def ratio_harmonicity(seed: int, trials: int = 500, tol: Tolerances | None = None) -> PropertyResult:
    t = _tol(tol)
    rng = battery_rng(seed, "ratio_harmonicity")
    return _upper("harmonic.ratio_process_reverse_harmonic",
                  [hm.ratio_harmonic_residual(_random_dual(rng), t) for _ in range(trials)], t.check)


def operator_jensen(seed: int, trials: int = 500, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    out = []
    for name in ("square", "xlogx", "neg_log", "inverse"):
        rng = battery_rng(seed, f"jensen_{name}")
        op_res, tr_res, ex_res = [], [], []
        for _ in range(trials):
            d = int(rng.integers(2, 7))
            ops = random_kraus(rng, d, int(rng.integers(1, 5)))
            if name == "square":
                xs = [random_hermitian(rng, d) for _ in ops]
            else:
                xs = [random_positive_definite(rng, d) for _ in ops]
            op_res.append(hm.operator_jensen_residual(name, ops, xs, t))
            tr_res.append(hm.trace_jensen_residual(name, ops, xs, t))
            ex_res.append(hm.expectation_jensen_residual(name, random_density(rng, d), xs[0], t))
        out += [
            _lower(f"jensen.operator.{name}", op_res, t.check),
            _lower(f"jensen.trace.{name}", tr_res, t.check),
            _lower(f"jensen.expectation.{name}", ex_res, t.check),
        ]
    rng = battery_rng(seed, "jensen_exp")
    tr_res, ex_res = [], []
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        ops = random_kraus(rng, d, int(rng.integers(1, 5)))
        xs = [random_hermitian(rng, d) for _ in ops]
        tr_res.append(hm.trace_jensen_residual("exp", ops, xs, t))
        ex_res.append(hm.expectation_jensen_residual("exp", random_density(rng, d), xs[0], t))
    out += [_lower("jensen.trace.exp", tr_res, t.check), _lower("jensen.expectation.exp", ex_res, t.check)]
    return out


def entropy_monotonicity(seed: int, trials: int = 500, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "entropy_monotonicity")
    order, du_pos, mono_bs, mono_du, op_sub, zexp = [], [], [], [], [], []
    for _ in range(trials):
        dual = _random_dual(rng)
        e = hm.h_theorem_trace_check(dual, t)
        order.append(e.worst_ordering_gap())
        du_pos.append(min(e.umegaki))
        mono_bs.append(e.bs_worst_increase())
        mono_du.append(e.umegaki_worst_increase())
        op_sub.append(min(hm.h_theorem_operator_check(dual, t)))
        z = hm.ratio_process(dual, t).map("xlogx")
        seq = hm.constant_expectation_check(z, dual.sigma)
        zexp.append(float(np.max(np.diff(seq))))
    return [
        _lower("entropy.bs_at_least_umegaki", order, t.check),
        _lower("entropy.umegaki_nonnegative", du_pos, t.check),
        _upper("entropy.bs_nonincreasing", mono_bs, t.check),
        _upper("entropy.umegaki_nonincreasing", mono_du, t.check),
        _lower("entropy.operator_subharmonic", op_sub, t.check),
        _upper("entropy.subharmonic_expectation_nonincreasing", zexp, t.check),
    ]


def entropy_identity(seed: int, trials: int = 200, tol: Tolerances | None = None) -> PropertyResult:
    """Both divergences vanish exactly on coinciding pairs and are positive on distinct ones."""
    t = _tol(tol)
    rng = battery_rng(seed, "entropy_identity")
    flags = []
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        r = random_density(rng, d)
        s = random_density(rng, d)
        same = max(hm.d_umegaki(r, r, t), hm.d_belavkin_staszewski(r, r, t)) <= t.check
        differ = qc.trace_norm(r - s) > t.check and min(hm.d_umegaki(r, s, t), hm.d_belavkin_staszewski(r, s, t)) > t.check
        flags.append(same and differ)
    return _flags("entropy.vanish_iff_equal", flags)


def harmonic_transforms(seed: int, trials: int = 200, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "harmonic_transforms")
    const, ident = [], []
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        steps = int(rng.integers(1, 6))
        chans = [_random_channel(rng, d) for _ in range(steps)]
        flow = qc.ChannelFlow.evolve(random_density(rng, d), chans, t)
        proc = hm.pullback_process(random_positive_definite(rng, d), chans)
        const.append(float(np.ptp(hm.constant_expectation_check(proc, flow))))
        maps = hm.multiplicative_transform(proc, chans, tol=t)
        dual = hm.DualChannelFlow(flow, qc.ChannelFlow.evolve(random_density(rng, d), chans, t))
        ratio = hm.ratio_process(hm.DualChannelFlow(dual.sigma, dual.rho), t)
        maps_r = hm.multiplicative_transform(ratio, chans, dual.rho.states, t)
        ident.append(max(hm.identity_preservation_residual(m) for m in maps + maps_r))
    return [
        _upper("harmonic.constant_expectation", const, t.check),
        _upper("harmonic.multiplicative_transform_identity_preserving", ident, t.check),
    ]


# ---------------------------------------------------------------------------
# path space


def random_family(rng, d: int) -> ps.ProjectorFamily:
    u = haar_unitary(rng, d)
    cuts = sorted(set(int(c) for c in rng.integers(1, d, size=int(rng.integers(0, d)))))
    bounds = [0, *cuts, d]
    return ps.ProjectorFamily.from_basis(u, [list(range(a, b)) for a, b in zip(bounds[:-1], bounds[1:])])


def random_path_spec(rng, dims=(2, 3), max_steps=3) -> ps.PathSpaceSpec:
    d = int(rng.integers(dims[0], dims[1] + 1))
    steps = int(rng.integers(0, max_steps + 1))
    return ps.PathSpaceSpec(
        tuple(random_family(rng, d) for _ in range(steps + 1)),
        tuple(_random_channel(rng, d) for _ in range(steps)),
        random_density(rng, d),
    )


def path_normalization(seed: int, trials: int = 200, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "path_normalization")
    mass, marg = [], []
    for _ in range(trials):
        spec = random_path_spec(rng)
        w = ps.path_weights(spec)
        mass.append(abs(w.total() - 1.0))
    for _ in range(trials):
        d = int(rng.integers(2, 4))
        sigma = random_density(rng, d)
        _, projs, _ = qc.eigenprojector_family(sigma, t)
        m = _random_channel(rng, d)
        fam1 = random_family(rng, d)
        spec = ps.PathSpaceSpec((ps.ProjectorFamily(projs), fam1), (m,), sigma)
        got = ps.path_weights(spec).marginal(1)
        nxt = qc.apply_schrodinger(m, sigma, t)
        want = np.array([np.trace(p @ nxt).real for p in fam1.projectors])
        marg.append(float(np.max(np.abs(got - want))))
    return [
        _upper("path.total_mass_one", mass, t.check),
        _upper("path.marginal_matches_evolved_state", marg, t.check),
    ]


def max_entropy(seed: int, trials: int = 20, tol: Tolerances | None = None, eps_grid=(0.05, 0.1, 0.2)) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "max_entropy")
    minimal, bounded, invariant = [], [], []
    gaps, bound_gaps = [], []
    families = (ps.ProjectorFamily.computational(2), ps.hadamard_family())
    for _ in range(trials):
        steps = 2
        chans = tuple(_random_channel(rng, 2) for _ in range(steps))
        sigma0 = random_density(rng, 2)
        rho0 = random_density(rng, 2)
        perts = ps.perturbation_grid(chans, eps_grid)
        verdicts = []
        for fam in families:
            spec = ps.PathSpaceSpec((fam,) * (steps + 1), chans, sigma0)
            rep = ps.verify_max_entropy_theorem(spec, rho0, perts, t)
            minimal.append(rep.minimal)
            bounded.append(rep.bounded)
            gaps.append(min(rep.d_perturbed) - rep.d_star)
            bound_gaps.append(rep.d_umegaki_initial - rep.d_star)
            verdicts.append(rep.passed)
        invariant.append(len(set(verdicts)) == 1)
    return [
        _flags("path.max_entropy_minimal", minimal, float(min(gaps)), t.check),
        _flags("path.max_entropy_bounded_by_umegaki", bounded, float(min(bound_gaps)), t.check),
        _flags("path.max_entropy_family_invariant", invariant),
    ]


# ---------------------------------------------------------------------------
# commuting embedding


def _basis_order(projs) -> list[int]:
    return [int(np.argmax(np.real(np.diag(p)))) for p in projs]


def commuting_embedding(seed: int, trials: int = 200, tol: Tolerances | None = None) -> list[PropertyResult]:
    t = _tol(tol)
    rng = battery_rng(seed, "commuting_embedding")
    rev_q, two_t, ent, paths, ratio, hth = [], [], [], [], [], []
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        p = random_stochastic(rng, n)
        pi = random_distribution(rng, n)
        rho = np.diag(pi).astype(complex)
        k = qc.classical_embedding(p)
        q = cl.reverse_transition_matrix(p, pi)
        rev_q.append(float(np.max(np.abs(qc.induced_stochastic_matrix(qc.time_reversal(k, rho, t)) - q))))

        tt = qc.two_time_probabilities(k, rho, t)
        oi, oj = _basis_order(tt.projectors_t), _basis_order(tt.projectors_next)
        table = np.zeros((n, n))
        table[np.ix_(oi, oj)] = tt.forward
        two_t.append(float(np.max(np.abs(table - pi[:, None] * p))))

        other = random_distribution(rng, n)
        kl = cl.kl_divergence(pi, other)
        sig = np.diag(other).astype(complex)
        ent.append(max(abs(hm.d_umegaki(rho, sig, t) - kl), abs(hm.d_belavkin_staszewski(rho, sig, t) - kl)))

        steps = int(rng.integers(1, 4))
        ps_ = [random_stochastic(rng, n) for _ in range(steps)]
        fam = ps.ProjectorFamily.computational(n)
        spec = ps.PathSpaceSpec((fam,) * (steps + 1), tuple(qc.classical_embedding(m) for m in ps_), rho)
        w = ps.path_weights(spec).weights
        want = np.zeros_like(w)
        for idx in np.ndindex(*w.shape):
            v = pi[idx[0]]
            for s in range(steps):
                v *= ps_[s][idx[s], idx[s + 1]]
            want[idx] = v
        paths.append(float(np.max(np.abs(w - want))))

        chans = [qc.classical_embedding(m) for m in ps_]
        dual = hm.DualChannelFlow.evolve(sig, rho, chans, t)
        fp = cl.ChainFlow.from_initial(ps_, other)
        fpi = cl.ChainFlow.from_initial(ps_, pi)
        theta = cl.doob_ratio(fp, fpi)
        y = hm.ratio_process(dual, t).values
        ratio.append(max(op_norm(yt - np.diag(th)) for yt, th in zip(y, theta)))

        pbar = cl.stationary_distribution(ps_[0])
        seq_c = cl.classical_h_theorem_report(ps_[0], other, pbar, steps)
        dual_s = hm.DualChannelFlow.evolve(sig, np.diag(pbar).astype(complex), [chans[0]] * steps, t)
        e = hm.h_theorem_trace_check(dual_s, t)
        hth.append(max(float(np.max(np.abs(np.subtract(e.belavkin_staszewski, seq_c)))),
                       float(np.max(np.abs(np.subtract(e.umegaki, seq_c))))))
    tol_c = 1e-10
    return [
        _upper("embedding.reversal_equals_Q", rev_q, tol_c),
        _upper("embedding.two_time_probabilities", two_t, tol_c),
        _upper("embedding.entropies_equal_kl", ent, tol_c),
        _upper("embedding.path_weights_product_form", paths, tol_c),
        _upper("embedding.ratio_process_equals_doob_ratio", ratio, tol_c),
        _upper("embedding.h_theorem_matches_classical", hth, tol_c),
    ]


BATTERIES: dict[str, Callable] = {
    "kernel_sqrt": kernel_sqrt,
    "kernel_penrose": kernel_penrose,
    "kernel_support": kernel_support_and_spectrum,
    "classical_bayes": classical_bayes,
    "classical_adjointness": classical_adjointness,
    "classical_harmonic": classical_harmonic,
    "classical_h_theorem": classical_h_theorem,
    "quantum_reversal": quantum_reversal,
    "quantum_double_reversal": quantum_double_reversal,
    "quantum_consistency": quantum_consistency,
    "quantum_adjointness": quantum_adjointness,
    "quantum_two_time": quantum_transition_probabilities,
    "quantum_augmentation": quantum_augmentation,
    "ratio_harmonicity": ratio_harmonicity,
    "operator_jensen": operator_jensen,
    "entropy_monotonicity": entropy_monotonicity,
    "entropy_identity": entropy_identity,
    "harmonic_transforms": harmonic_transforms,
    "path_normalization": path_normalization,
    "max_entropy": max_entropy,
    "commuting_embedding": commuting_embedding,
}


def run_all(seed: int, scale: float = 1.0, tol: Tolerances | None = None) -> list[PropertyResult]:
    """Run every battery in a fixed order; ``scale`` multiplies the default trial counts."""
    import inspect

    out = []
    for fn in BATTERIES.values():
        default = inspect.signature(fn).parameters["trials"].default
        res = fn(seed, max(1, int(round(default * scale))), tol)
        out.extend(res if isinstance(res, list) else [res])
    return out
