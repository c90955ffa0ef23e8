"""Kraus-represented quantum operations and their time reversal.

A :class:`KrausMap` stores operators ``M_k`` in the Schroedinger
orientation: ``rho -> sum_k M_k rho M_k^dag`` acts on states and
``X -> sum_k M_k^dag X M_k`` is its Heisenberg dual on observables.

The reversal of a channel with respect to an input state ``rho_t`` is stored
the same way, with operators ``rho_t^{1/2} M_k^dag rho_{t+1}^{-1/2}``, so
applying it to ``rho_{t+1}`` recovers ``rho_t`` directly. Inverse square roots
are Moore-Penrose pseudo-inverses, which is what makes the construction work
for rank-deficient states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InputError,
    NotReversalShaped,
    NotTracePreserving,
    SupportViolation,
)
from .linalg import (
    Tolerances,
    _tol,
    as_square,
    dag,
    hermitian,
    inv_sqrt_psd,
    kernel_basis,
    min_eigenvalue,
    op_norm,
    psd_eigh,
    spectral_decompose,
    sqrt_psd,
    support_projector,
    trace_norm,
)

TRACE_PRESERVING = "trace_preserving"
TRACE_NON_INCREASING = "trace_non_increasing"
IDENTITY_PRESERVING = "identity_preserving"
KINDS = (TRACE_PRESERVING, TRACE_NON_INCREASING, IDENTITY_PRESERVING)


@dataclass(frozen=True)
class KrausMap:
    operators: tuple
    kind: str = TRACE_PRESERVING

    def __post_init__(self):
        ops = tuple(as_square(m, f"Kraus operator {k}") for k, m in enumerate(self.operators))
        if not ops:
            raise InputError("a Kraus map needs at least one operator")
        if len({m.shape for m in ops}) != 1:
            raise DimensionMismatch("Kraus operators have different shapes")
        if self.kind not in KINDS:
            raise InputError(f"unknown Kraus map kind {self.kind!r}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def stacked(self) -> np.ndarray:
        return np.stack(self.operators)

    def completeness(self) -> np.ndarray:
        """``sum_k M_k^dag M_k``."""
        m = self.stacked()
        return np.einsum("kji,kjl->il", m.conj(), m)

    def retag(self, kind: str) -> "KrausMap":
        return KrausMap(self.operators, kind)


def kraus(*operators, kind: str = TRACE_PRESERVING) -> KrausMap:
    if len(operators) == 1 and not isinstance(operators[0], np.ndarray):
        operators = tuple(operators[0])
    return KrausMap(tuple(operators), kind)


@dataclass(frozen=True)
class ChannelReport:
    kind: str
    completeness_residual: float  # ||sum M^dag M - I||
    contraction_slack: float  # min eigenvalue of I - sum M^dag M
    unital_residual: float  # ||sum M M^dag - I||, i.e. identity preservation of the state-side map
    passed: bool


def validate(kmap: KrausMap, tol: Tolerances | None = None) -> ChannelReport:
    """Measure completeness and classify the map.

    ``kind`` is ``trace_preserving`` when ``sum M^dag M = I`` within
    ``tol_recon``, ``trace_non_increasing`` when ``sum M^dag M <= I``, and
    ``invalid`` otherwise. ``passed`` says whether the declared kind holds.
    """
    t = _tol(tol)
    eye = np.eye(kmap.dim)
    c = kmap.completeness()
    residual = op_norm(c - eye)
    slack = min_eigenvalue(eye - c)
    m = kmap.stacked()
    unital = op_norm(np.einsum("kij,klj->il", m, m.conj()) - eye)
    if residual <= t.tol_recon:
        found = TRACE_PRESERVING
    elif slack >= -t.tol_psd:
        found = TRACE_NON_INCREASING
    else:
        found = "invalid"
    if kmap.kind == TRACE_NON_INCREASING:
        passed = found != "invalid"
    else:
        passed = found == TRACE_PRESERVING
    return ChannelReport(found, residual, slack, unital, passed)


def _require_kind(kmap: KrausMap, t: Tolerances):
    r = validate(kmap, t)
    if not r.passed:
        if kmap.kind == TRACE_NON_INCREASING:
            raise NotTracePreserving(f"Kraus map is trace-increasing (slack {r.contraction_slack:.3g})")
        raise NotTracePreserving(f"Kraus map is not trace preserving (residual {r.completeness_residual:.3g})")


def _check_dims(kmap: KrausMap, *mats: np.ndarray):
    for m in mats:
        if m.shape != (kmap.dim, kmap.dim):
            raise DimensionMismatch(f"operand of shape {m.shape} does not match map dimension {kmap.dim}")


def _sandwich(ops: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.einsum("kij,jl,kml->im", ops, x, ops.conj())
    return 0.5 * (out + dag(out)) if np.allclose(x, dag(x), atol=1e-14, rtol=0) else out


def as_density(rho, tol: Tolerances | None = None, name: str = "rho") -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD within ``tol_psd``, unit trace)."""
    t = _tol(tol)
    h = hermitian(rho, t, name)
    if min_eigenvalue(h) < -t.tol_psd:
        raise InputError(f"{name} is not positive semidefinite")
    tr = np.trace(h).real
    if abs(tr - 1.0) > 1e-12:
        raise InputError(f"{name} has trace {tr:.15g}, expected 1")
    return h


def apply_schrodinger(kmap: KrausMap, rho, tol: Tolerances | None = None) -> np.ndarray:
    """``sum_k M_k rho M_k^dag``.

    The map must satisfy its declared kind: trace preserving for the default
    tag, contractive for ``trace_non_increasing`` (reversal maps on
    rank-deficient states).
    """
    t = _tol(tol)
    r = as_square(rho, "rho")
    _check_dims(kmap, r)
    _require_kind(kmap, t)
    return _sandwich(kmap.stacked(), r)


def apply_heisenberg(kmap: KrausMap, x, tol: Tolerances | None = None) -> np.ndarray:
    """Dual action ``sum_k M_k^dag X M_k`` on an observable."""
    xm = as_square(x, "X")
    _check_dims(kmap, xm)
    return _sandwich(dag(kmap.stacked()), xm)


def weighted_inner_product(x, y, rho, tol: Tolerances | None = None) -> float:
    """``trace(X rho^{1/2} Y rho^{1/2})``.

    For PSD ``X`` this equals ``trace(X^{1/2} rho^{1/2} Y rho^{1/2} X^{1/2})``
    by cyclicity; the cyclic form is used so any Hermitian ``X`` is accepted.
    The value is real and symmetric in ``X`` and ``Y``.
    """
    t = _tol(tol)
    xm, ym = hermitian(x, t, "X"), hermitian(y, t, "Y")
    s = sqrt_psd(rho, t)
    if not xm.shape == ym.shape == s.shape:
        raise DimensionMismatch("X, Y and rho must have the same dimension")
    return float(np.trace(xm @ s @ ym @ s).real)


# ---------------------------------------------------------------------------
# reversal


def reversal_transform(kmap: KrausMap, rho, tol: Tolerances | None = None) -> KrausMap:
    """The transform ``F -> {rho^{1/2} F_k^dag F(rho)^{-1/2}}`` on quantum operations.

    Applied to a channel and its input state this is the time reversal; applied
    to a reversal and the forward output state it gives back the forward
    channel on the support of ``rho``.
    """
    t = _tol(tol)
    r = as_square(rho, "rho")
    _check_dims(kmap, r)
    out = _sandwich(kmap.stacked(), hermitian(r, t, "rho"))
    s = sqrt_psd(r, t)
    inv = inv_sqrt_psd(out, t)
    ops = tuple(s @ dag(m) @ inv for m in kmap.operators)
    full = bool(np.all(psd_eigh(out, t)[2]))
    return KrausMap(ops, TRACE_PRESERVING if full else TRACE_NON_INCREASING)


def time_reversal(kmap: KrausMap, rho_t, tol: Tolerances | None = None) -> KrausMap:
    """Reversal of a trace-preserving channel for input state ``rho_t``.

    The result sends ``rho_{t+1}`` back to ``rho_t``. Its completeness sum is
    the support projector of ``rho_{t+1}``, so it is tagged
    ``trace_non_increasing`` unless ``rho_{t+1}`` has full rank; see
    :func:`augment_to_tpcp`.
    """
    t = _tol(tol)
    if kmap.kind != TRACE_PRESERVING:
        raise NotTracePreserving("time reversal is defined for trace-preserving channels")
    _require_kind(kmap, t)
    rho = as_density(rho_t, t, "rho_t")
    _check_dims(kmap, rho)
    return reversal_transform(kmap, rho, t)


def augment_to_tpcp(reversal: KrausMap, rho_next, tol: Tolerances | None = None) -> KrausMap:
    """Append ``|b><b|`` for an orthonormal kernel basis of ``rho_next``.

    The input's completeness sum must be the support projector of
    ``rho_next``; the result is trace preserving and acts identically on
    states supported in ``supp(rho_next)``.
    """
    t = _tol(tol)
    rn = hermitian(rho_next, t, "rho_next")
    _check_dims(reversal, rn)
    c = reversal.completeness()
    proj = support_projector(rn, t)
    dev = op_norm(c - proj)
    if dev > t.tol_recon:
        idem = op_norm(c @ c - c)
        what = "not a projector" if idem > t.tol_recon else "not the support projector of rho_next"
        raise NotReversalShaped(f"completeness sum is {what} (deviation {dev:.3g})")
    kb = kernel_basis(rn, t)
    extra = tuple(np.outer(kb[:, j], kb[:, j].conj()) for j in range(kb.shape[1]))
    return KrausMap(reversal.operators + extra, TRACE_PRESERVING)


def check_consistency(kmap: KrausMap, rho_t, sigma_t, tol: Tolerances | None = None) -> float:
    """Trace-norm distance between the reversal of the reversal applied to ``sigma_t`` and the channel.

    ``sigma_t`` must be supported inside ``supp(rho_t)``.
    """
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    sigma = as_density(sigma_t, t, "sigma_t")
    _check_dims(kmap, rho, sigma)
    outside = np.eye(kmap.dim) - support_projector(rho, t)
    leak = float(np.trace(outside @ sigma).real)
    if leak > t.tol_recon:
        raise SupportViolation(f"sigma_t has weight {leak:.3g} outside supp(rho_t)")
    rev = time_reversal(kmap, rho, t)
    rho_next = apply_schrodinger(kmap, rho, t)
    back = reversal_transform(rev, rho_next, t)
    return trace_norm(_sandwich(back.stacked(), sigma) - apply_schrodinger(kmap, sigma, t))


def spanning_states(dim: int) -> list[np.ndarray]:
    """``dim**2`` density matrices spanning the Hermitian matrices."""
    e = np.eye(dim)
    states = [np.outer(e[i], e[i]).astype(complex) for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            for phase in (1.0, 1j):
                v = (e[i] + phase * e[j]) / np.sqrt(2)
                states.append(np.outer(v, v.conj()))
    return states


def double_reversal_residual(kmap: KrausMap, rho_t, tol: Tolerances | None = None) -> float:
    """Max trace-norm gap between the twice-reversed channel and the channel on a spanning set."""
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    rev = time_reversal(kmap, rho, t)
    back = reversal_transform(rev, apply_schrodinger(kmap, rho, t), t)
    ops_b, ops_m = back.stacked(), kmap.stacked()
    return max(trace_norm(_sandwich(ops_b, s) - _sandwich(ops_m, s)) for s in spanning_states(kmap.dim))


def recovery_residual(kmap: KrausMap, rho_t, tol: Tolerances | None = None) -> float:
    """``||R(E(rho_t)) - rho_t||_1``."""
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    rev = time_reversal(kmap, rho, t)
    return trace_norm(apply_schrodinger(rev, apply_schrodinger(kmap, rho, t), t) - rho)


def check_space_time_adjointness_q(kmap: KrausMap, rho_t, x, y, tol: Tolerances | None = None) -> float:
    """``|<E(X), Y>_{rho_t} - <X, R(Y)>_{rho_{t+1}}|`` with ``E`` and ``R`` on observables."""
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    xm, ym = hermitian(x, t, "X"), hermitian(y, t, "Y")
    _check_dims(kmap, rho, xm, ym)
    rho_next = apply_schrodinger(kmap, rho, t)
    rev = time_reversal(kmap, rho, t)
    lhs = weighted_inner_product(apply_heisenberg(kmap, xm), ym, rho, t)
    rhs = weighted_inner_product(xm, apply_heisenberg(rev, ym), rho_next, t)
    return abs(lhs - rhs)


def lemma_support_residual(kmap: KrausMap, rho_t, y, tol: Tolerances | None = None) -> float:
    """Operator-norm change when ``sum_j M_j rho^{1/2} Y rho^{1/2} M_j^dag`` is compressed to ``supp(rho_{t+1})``."""
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    s = sqrt_psd(rho, t)
    inner = _sandwich(kmap.stacked(), s @ as_square(y, "Y") @ s)
    proj = support_projector(apply_schrodinger(kmap, rho, t), t)
    return op_norm(proj @ inner @ proj - inner)


# ---------------------------------------------------------------------------
# transition probabilities between spectral events


@dataclass(frozen=True)
class TwoTimeProbabilities:
    forward: np.ndarray  # P[i, j] from the forward channel
    reverse: np.ndarray  # the same table evaluated through the reversal
    p: np.ndarray  # eigenvalues of rho_t, one per eigenspace
    q: np.ndarray  # eigenvalues of rho_{t+1}, one per eigenspace
    projectors_t: tuple
    projectors_next: tuple
    degenerate: bool

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.forward - self.reverse)))


def eigenprojector_family(rho, tol: Tolerances | None = None) -> tuple[np.ndarray, tuple, bool]:
    """Eigenvalues and eigenspace projectors of a state, grouping eigenvalues within the rank cutoff."""
    t = _tol(tol)
    sd = spectral_decompose(rho, t)
    atol = max(t.rank_cutoff_rel * max(float(sd.eigenvalues[0]), 0.0), t.tol_psd)
    groups = sd.eigenspaces(atol)
    vals = np.array([max(v, 0.0) for v, _ in groups])
    projs = tuple(p for _, p in groups)
    return vals, projs, len(groups) < sd.eigenvalues.size


def two_time_probabilities(kmap: KrausMap, rho_t, tol: Tolerances | None = None) -> TwoTimeProbabilities:
    """Joint probabilities of spectral events of ``rho_t`` then ``rho_{t+1}``.

    ``forward[i, j] = p_i trace(Pi_j (sum_k M_k Pi_i M_k^dag) Pi_j)``;
    ``reverse[i, j] = q_j trace(Pi_i R(Pi_j) Pi_i)`` with ``R`` the reversal on
    states. The two tables agree for the reversal and each sums to one.
    """
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    _check_dims(kmap, rho)
    rho_next = apply_schrodinger(kmap, rho, t)
    p, pis_t, deg_t = eigenprojector_family(rho, t)
    q, pis_n, deg_n = eigenprojector_family(rho_next, t)
    ops = kmap.stacked()
    rev = time_reversal(kmap, rho, t).stacked()
    fwd = np.zeros((len(p), len(q)))
    bwd = np.zeros_like(fwd)
    for i, pi_i in enumerate(pis_t):
        pushed = _sandwich(ops, pi_i)
        for j, pi_j in enumerate(pis_n):
            fwd[i, j] = p[i] * np.trace(pi_j @ pushed @ pi_j).real
    for j, pi_j in enumerate(pis_n):
        pulled = _sandwich(rev, pi_j)
        for i, pi_i in enumerate(pis_t):
            bwd[i, j] = q[j] * np.trace(pi_i @ pulled @ pi_i).real
    return TwoTimeProbabilities(fwd, bwd, p, q, pis_t, pis_n, deg_t or deg_n)


def measurement_probability_reversal(kmap: KrausMap, rho_t, tol: Tolerances | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Outcome probabilities ``trace(M_k^dag M_k rho_t)`` and ``trace(R_k R_k^dag rho_{t+1})``.

    ``R_k = rho_{t+1}^{-1/2} M_k rho_t^{1/2}`` is computed here independently of
    :func:`time_reversal`.
    """
    t = _tol(tol)
    rho = as_density(rho_t, t, "rho_t")
    _check_dims(kmap, rho)
    rho_next = apply_schrodinger(kmap, rho, t)
    s, inv = sqrt_psd(rho, t), inv_sqrt_psd(rho_next, t)
    fwd = np.array([np.trace(dag(m) @ m @ rho).real for m in kmap.operators])
    r = [inv @ m @ s for m in kmap.operators]
    bwd = np.array([np.trace(rk @ dag(rk) @ rho_next).real for rk in r])
    return fwd, bwd


# ---------------------------------------------------------------------------
# flows and embeddings


@dataclass(frozen=True)
class ChannelFlow:
    channels: tuple
    states: tuple  # rho_0 .. rho_T

    @classmethod
    def evolve(cls, initial, channels: Sequence[KrausMap], tol: Tolerances | None = None) -> "ChannelFlow":
        t = _tol(tol)
        states = [as_density(initial, t, "rho_0")]
        for c in channels:
            _check_dims(c, states[-1])
            states.append(apply_schrodinger(c, states[-1], t))
        return cls(tuple(channels), tuple(states))

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def steps(self) -> int:
        return len(self.channels)

    def consistency_residual(self) -> float:
        res = [op_norm(_sandwich(c.stacked(), a) - b) for c, a, b in
               zip(self.channels, self.states[:-1], self.states[1:])]
        return float(max(res, default=0.0))


def classical_embedding(p) -> KrausMap:
    """Channel ``sqrt(p_ij) |j><i|`` that acts on diagonal states as the chain ``P``."""
    from .classical import as_stochastic

    pm = as_stochastic(p)
    n = pm.shape[0]
    ops = []
    for i in range(n):
        for j in range(n):
            if pm[i, j] > 0:
                m = np.zeros((n, n), complex)
                m[j, i] = np.sqrt(pm[i, j])
                ops.append(m)
    return KrausMap(tuple(ops))


def induced_stochastic_matrix(kmap: KrausMap) -> np.ndarray:
    """``S[i, j] = <j| E(|i><i|) |j>``: the channel restricted to the computational basis."""
    n = kmap.dim
    ops = kmap.stacked()
    s = np.zeros((n, n))
    for i in range(n):
        e = np.zeros((n, n), complex)
        e[i, i] = 1.0
        s[i] = np.real(np.diag(_sandwich(ops, e)))
    return s


def unitary_channel(u) -> KrausMap:
    return KrausMap((as_square(u, "U"),))


def amplitude_damping(gamma: float) -> KrausMap:
    m0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1 - gamma)]], complex)
    m1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], complex)
    return KrausMap((m0, m1))


def depolarizing(dim: int) -> KrausMap:
    """Completely depolarising channel ``rho -> trace(rho) I / d``."""
    ops = []
    for i in range(dim):
        for j in range(dim):
            m = np.zeros((dim, dim), complex)
            m[i, j] = 1.0 / np.sqrt(dim)
            ops.append(m)
    return KrausMap(tuple(ops))


def mix(kmap: KrausMap, other: KrausMap, eps: float) -> KrausMap:
    """Kraus form of ``(1 - eps) E + eps N``."""
    if kmap.dim != other.dim:
        raise DimensionMismatch("channels act on different dimensions")
    ops = tuple(np.sqrt(1 - eps) * m for m in kmap.operators) + tuple(np.sqrt(eps) * m for m in other.operators)
    return KrausMap(ops, kmap.kind)


def remix(kmap: KrausMap, u: np.ndarray) -> KrausMap:
    """Equivalent Kraus representation ``M'_i = sum_j u_ij M_j`` for a unitary (or isometric) ``u``."""
    ops = np.einsum("ij,jab->iab", u, kmap.stacked())
    return KrausMap(tuple(ops), kmap.kind)
