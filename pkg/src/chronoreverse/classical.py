"""Finite-state Markov chains in discrete time.

Forward evolution of distributions, the reverse-time (Bayes) transition
matrix, the space-time inner product and its adjointness relation,
space-time harmonic functions, Doob ratios and the classical H-theorem.

Conventions: ``P[i, j] = P(X(t+1) = j | X(t) = i)``; distributions are 1-D
arrays; a space-time function over a window of ``T + 1`` times is an array of
shape ``(T + 1, n)`` whose row ``t`` is ``f_t``. Conditional expectations are
evaluated exactly from joint two-time distributions, never by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotDistribution, NotStationary, NotStochastic, SupportViolation

ROW_SUM_TOL = 1e-12
NEG_TOL = 1e-12


def as_stochastic(p, name: str = "P") -> np.ndarray:
    """Validate a row-stochastic matrix; tiny negative entries are clipped."""
    m = np.asarray(p, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotStochastic(f"{name} has non-finite entries")
    if np.any(m < -NEG_TOL):
        i, j = np.argwhere(m < -NEG_TOL)[0]
        raise NotStochastic(f"entry ({i},{j}) of {name} is negative ({m[i, j]:.6g})")
    m = np.clip(m, 0.0, None)
    sums = m.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotStochastic(f"row {i} of {name} sums to {sums[i]:.12g}")
    return m


def as_distribution(pi, n: int | None = None, name: str = "pi") -> np.ndarray:
    v = np.asarray(pi, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"{name} must be a non-empty vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise DimensionMismatch(f"{name} has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)) or np.any(v < -NEG_TOL):
        raise NotDistribution(f"{name} has negative or non-finite entries")
    v = np.clip(v, 0.0, None)
    if abs(v.sum() - 1.0) > ROW_SUM_TOL:
        raise NotDistribution(f"{name} sums to {v.sum():.12g}")
    return v


@dataclass(frozen=True)
class ChainFlow:
    """Transition matrices ``P(0..T-1)`` with the distributions ``pi_0..pi_T`` they generate."""

    transitions: tuple
    distributions: tuple

    @classmethod
    def from_initial(cls, transitions: Sequence, pi0) -> "ChainFlow":
        ps = tuple(as_stochastic(p, f"P({t})") for t, p in enumerate(transitions))
        pis = [as_distribution(pi0, ps[0].shape[0] if ps else None, "pi_0")]
        for p in ps:
            pis.append(evolve_forward(p, pis[-1]))
        return cls(ps, tuple(pis))

    @classmethod
    def homogeneous(cls, p, pi0, steps: int) -> "ChainFlow":
        return cls.from_initial([p] * steps, pi0)

    @property
    def n(self) -> int:
        return self.distributions[0].size

    @property
    def steps(self) -> int:
        return len(self.transitions)

    def reverse_transitions(self) -> list[np.ndarray]:
        return [reverse_transition_matrix(p, pi) for p, pi in zip(self.transitions, self.distributions)]

    def joint(self, t: int) -> np.ndarray:
        """Two-time joint law ``J[i, j] = P(X(t) = i, X(t+1) = j)``."""
        return self.distributions[t][:, None] * self.transitions[t]

    def consistency_residual(self) -> float:
        res = [np.max(np.abs(p.T @ a - b)) for p, a, b in
               zip(self.transitions, self.distributions[:-1], self.distributions[1:])]
        return float(max(res, default=0.0))


def evolve_forward(p, pi) -> np.ndarray:
    """One step of the forward equation ``pi_{t+1} = P^T pi_t``."""
    pm = as_stochastic(p)
    v = as_distribution(pi, pm.shape[0])
    out = np.clip(pm.T @ v, 0.0, None)
    return out


def reverse_transition_matrix(p, pi_t) -> np.ndarray:
    """Reverse-time transition matrix ``Q[j, i] = P[i, j] pi_t(i) / pi_{t+1}(j)``.

    Rows ``j`` with ``pi_{t+1}(j) = 0`` are filled with the uniform
    distribution so that ``Q`` is always row-stochastic.
    """
    pm = as_stochastic(p)
    v = as_distribution(pi_t, pm.shape[0])
    n = pm.shape[0]
    joint = v[:, None] * pm
    mass = joint.sum(axis=0)
    q = np.full((n, n), 1.0 / n)
    live = mass > 0
    q[live] = (joint[:, live] / mass[live]).T
    return q


def _stf(f, flow: ChainFlow, name: str) -> np.ndarray:
    a = np.asarray(f, dtype=float)
    if a.shape != (flow.steps + 1, flow.n):
        raise DimensionMismatch(f"{name} has shape {a.shape}, expected {(flow.steps + 1, flow.n)}")
    return a


def space_time_inner_product(f, g, flow: ChainFlow) -> float:
    """``sum_t f_t^T D_{pi_t} g_t`` over the flow's window."""
    fa, ga = _stf(f, flow, "f"), _stf(g, flow, "g")
    pis = np.asarray(flow.distributions)
    return float(np.sum(fa * ga * pis))


def forward_difference(f, flow: ChainFlow) -> np.ndarray:
    """``Delta+ f_t = P(t) f_{t+1} - f_t`` with ``f`` extended by zero past the window."""
    fa = _stf(f, flow, "f")
    out = -fa.copy()
    for t, p in enumerate(flow.transitions):
        out[t] += p @ fa[t + 1]
    return out


def backward_difference(g, flow: ChainFlow) -> np.ndarray:
    """``Delta- g_{t+1} = Q(t) g_t - g_{t+1}`` with ``g`` extended by zero before the window."""
    ga = _stf(g, flow, "g")
    out = -ga.copy()
    for t, q in enumerate(flow.reverse_transitions()):
        out[t + 1] += q @ ga[t]
    return out


def check_space_time_adjointness(flow: ChainFlow, f, g) -> float:
    """``|<Delta+ f, g>_pi - <f, Delta- g>_pi|`` for functions supported in the window.

    Outside the window ``f`` and ``g`` are taken to vanish, which makes them
    finite-support functions of the whole time axis; the boundary terms that
    this produces are exactly the ``-f_t`` and ``-g_t`` parts of the
    differences at the window edges.
    """
    lhs = space_time_inner_product(forward_difference(f, flow), g, flow)
    rhs = space_time_inner_product(f, backward_difference(g, flow), flow)
    return abs(lhs - rhs)


def integration_by_parts_residual(flow: ChainFlow, f, g) -> float:
    """Residual of the discrete integration-by-parts formula for ``X = f(t, X_t)``, ``Y = g(t, X_t)``.

    Every expectation is computed from the exact joint law of
    ``(X(t), X(t+1))`` without forming ``Q``::

        E[X(T)Y(T) - X(0)Y(0)] = sum_t E[Delta+X(t) Y(t) - X(t+1) Delta-Y(t+1)]
    """
    fa, ga = _stf(f, flow, "f"), _stf(g, flow, "g")
    pis = flow.distributions
    lhs = float(pis[-1] @ (fa[-1] * ga[-1]) - pis[0] @ (fa[0] * ga[0]))
    rhs = 0.0
    for t in range(flow.steps):
        j = flow.joint(t)
        # E[(X(t+1) - X(t)) Y(t)] and E[X(t+1) (Y(t) - Y(t+1))] under the joint law
        rhs += float(np.sum(j * (fa[t + 1][None, :] - fa[t][:, None]) * ga[t][:, None]))
        rhs -= float(np.sum(j * fa[t + 1][None, :] * (ga[t][:, None] - ga[t + 1][None, :])))
    return abs(lhs - rhs)


def harmonic_residual(h, transitions: Sequence) -> float:
    """Max over the window of ``|h_t - P(t) h_{t+1}|``."""
    ps = [as_stochastic(p) for p in transitions]
    ha = np.asarray(h, dtype=float)
    if ha.ndim != 2 or ha.shape[0] != len(ps) + 1 or any(p.shape[0] != ha.shape[1] for p in ps):
        raise DimensionMismatch(f"h has shape {ha.shape}, incompatible with {len(ps)} transitions")
    res = [np.max(np.abs(ha[t] - p @ ha[t + 1])) for t, p in enumerate(ps)]
    return float(max(res, default=0.0))


def is_space_time_harmonic(h, transitions: Sequence, tol: float = 1e-9) -> bool:
    return harmonic_residual(h, transitions) <= tol


def reverse_harmonic_residual(theta, flow: ChainFlow) -> float:
    """Max of ``|theta_{t+1}(j) - sum_i Q_ji(t) theta_t(i)|`` over ``j`` with ``pi_{t+1}(j) > 0``.

    Rows of ``Q`` with zero mass are an arbitrary fill, so they are not judged.
    """
    th = _stf(theta, flow, "theta")
    res = 0.0
    for t, q in enumerate(flow.reverse_transitions()):
        live = flow.distributions[t + 1] > 0
        if np.any(live):
            res = max(res, float(np.max(np.abs(th[t + 1] - q @ th[t])[live])))
    return res


def is_reverse_time_harmonic(theta, flow: ChainFlow, tol: float = 1e-9) -> bool:
    return reverse_harmonic_residual(theta, flow) <= tol


def doob_ratio(flow_p: ChainFlow, flow_pi: ChainFlow) -> np.ndarray:
    """``theta(t, i) = p_t(i) / pi_t(i)`` for two flows sharing their transitions.

    Where both distributions vanish the ratio is set to 0.
    """
    if flow_p.steps != flow_pi.steps or flow_p.n != flow_pi.n:
        raise DimensionMismatch("flows cover different windows or state spaces")
    for a, b in zip(flow_p.transitions, flow_pi.transitions):
        if not np.array_equal(a, b):
            raise DimensionMismatch("flows must share their transition matrices")
    p = np.asarray(flow_p.distributions)
    pi = np.asarray(flow_pi.distributions)
    bad = (pi <= 0) & (p > 0)
    if np.any(bad):
        t, i = np.argwhere(bad)[0]
        raise SupportViolation(f"pi_{t}({i}) = 0 while p_{t}({i}) = {p[t, i]:.6g}")
    theta = np.zeros_like(p)
    np.divide(p, pi, out=theta, where=pi > 0)
    return theta


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence in nats; ``inf`` when ``supp(p)`` is not inside ``supp(q)``."""
    pv = as_distribution(p, name="p")
    qv = as_distribution(q, pv.size, name="q")
    on = pv > 0
    if np.any(qv[on] <= 0):
        return float("inf")
    return float(np.sum(pv[on] * np.log(pv[on] / qv[on])))


def stationary_distribution(p) -> np.ndarray:
    """A stationary vector of ``P`` from the eigenvector of ``P^T`` closest to eigenvalue 1."""
    pm = as_stochastic(p)
    w, v = np.linalg.eig(pm.T)
    k = int(np.argmin(np.abs(w - 1.0)))
    s = np.abs(np.real(v[:, k]))
    return s / s.sum()


def classical_h_theorem_report(p, pi0, pibar, steps: int, tol: float = 1e-9) -> list[float]:
    """``[D(pi_t || pibar)]`` for ``t = 0..steps`` under a homogeneous chain with stationary ``pibar``."""
    pm = as_stochastic(p)
    pb = as_distribution(pibar, pm.shape[0], "pibar")
    drift = float(np.max(np.abs(pm.T @ pb - pb)))
    if drift > tol:
        raise NotStationary(f"pibar is not stationary for P (|P^T pibar - pibar| = {drift:.3g})")
    flow = ChainFlow.homogeneous(pm, pi0, steps)
    return [kl_divergence(pi, pb) for pi in flow.distributions]


def expectation_sequence(h, flow: ChainFlow) -> np.ndarray:
    """``E[h(t, X(t))]`` at every time of the window."""
    ha = _stf(h, flow, "h")
    return np.einsum("ti,ti->t", ha, np.asarray(flow.distributions))


def martingale_conditional_residual(h, flow: ChainFlow) -> float:
    """Max of ``|E[h(t+1, X(t+1)) | X(t) = i] - h(t, i)|`` over states with positive mass."""
    ha = _stf(h, flow, "h")
    res = 0.0
    for t in range(flow.steps):
        j = flow.joint(t)
        mass = j.sum(axis=1)
        live = mass > 0
        cond = (j @ ha[t + 1])[live] / mass[live]
        if np.any(live):
            res = max(res, float(np.max(np.abs(cond - ha[t][live]))))
    return res


def reverse_submartingale_gaps(
    theta, flow: ChainFlow, phi: Callable[[np.ndarray], np.ndarray] = lambda x: -np.log(x)
) -> np.ndarray:
    """``E[phi(theta_t(X_t)) | X_{t+1} = j] - phi(theta_{t+1}(j))`` for each ``t`` and live ``j``.

    For a reverse-time harmonic ``theta`` and convex ``phi`` every gap is
    non-negative. Dead states (``pi_{t+1}(j) = 0``) are reported as 0.
    """
    th = _stf(theta, flow, "theta")
    gaps = np.zeros((flow.steps, flow.n))
    for t in range(flow.steps):
        j = flow.joint(t)
        mass = j.sum(axis=0)
        live = mass > 0
        cond = (j.T @ phi(th[t]))[live] / mass[live]
        gaps[t, live] = cond - phi(th[t + 1][live])
    return gaps
