"""Space-time harmonic operator processes, operator Jensen inequalities and relative entropies.

Orientation of processes:

* ``forward``: ``Y_t = E_t(Y_{t+1})`` with ``E_t`` the observable-side channel;
* ``reverse``: ``Y_{t+1} = R_t(Y_t)`` with ``R_t`` the observable side of the
  reversal of ``E_t`` with respect to the reference state ``rho_t``.

For the ratio process ``Y_t = sigma_t^{-1/2} rho_t sigma_t^{-1/2}`` of two flows
sharing their channels, the reference flow is the ``sigma`` flow, and
``Z_t = Y_t log Y_t`` is reverse-time subharmonic: ``Z_{t+1} <= R_t(Z_t)``.
Taking ``sigma_{t+1}``-expectations of that operator inequality gives
``D_BS(rho_{t+1} || sigma_{t+1}) <= D_BS(rho_t || sigma_t)``, i.e. the
expectation of ``Z`` is non-increasing forward in time.

All entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import (
    ChannelFlow,
    KrausMap,
    _check_dims,
    apply_heisenberg,
    as_density,
    time_reversal,
)
from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    InputError,
    SingularProcess,
    SingularSigma,
    SingularState,
)
from .linalg import (
    NONNEGATIVE,
    POSITIVE,
    REALS,
    Interval,
    Tolerances,
    _tol,
    as_square,
    dag,
    hermitian,
    inv_sqrt_psd,
    log_on_support,
    matrix_function,
    min_eigenvalue,
    op_norm,
    psd_eigh,
    support_projector,
    xlogx,
)

FORWARD = "forward"
REVERSE = "reverse"


@dataclass(frozen=True)
class ScalarFunction:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    domain: Interval
    operator_convex: bool

    def __call__(self, x):
        return self.f(x)


FUNCTIONS = {
    "square": ScalarFunction("square", np.square, REALS, True),
    "xlogx": ScalarFunction("xlogx", xlogx, NONNEGATIVE, True),
    "neg_log": ScalarFunction("neg_log", lambda x: -np.log(x), POSITIVE, True),
    "inverse": ScalarFunction("inverse", lambda x: 1.0 / np.asarray(x, dtype=float), POSITIVE, True),
    # convex but not operator convex; valid for the trace and expectation forms only
    "exp": ScalarFunction("exp", np.exp, REALS, False),
}


def get_function(f) -> ScalarFunction:
    if isinstance(f, ScalarFunction):
        return f
    try:
        return FUNCTIONS[f]
    except KeyError:
        raise InputError(f"unknown function {f!r}; choose from {sorted(FUNCTIONS)}") from None


# ---------------------------------------------------------------------------
# processes


@dataclass(frozen=True)
class OperatorProcess:
    values: tuple
    orientation: str = FORWARD

    def __post_init__(self):
        vals = tuple(hermitian(v, name=f"Y_{t}") for t, v in enumerate(self.values))
        if len({v.shape for v in vals}) > 1:
            raise DimensionMismatch("process values have different dimensions")
        if self.orientation not in (FORWARD, REVERSE):
            raise InputError(f"orientation must be 'forward' or 'reverse', got {self.orientation!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def map(self, f) -> "OperatorProcess":
        sf = get_function(f)
        return OperatorProcess(tuple(matrix_function(y, sf.f, sf.domain) for y in self.values), self.orientation)


@dataclass(frozen=True)
class DualChannelFlow:
    """Two state flows driven by the same channel sequence."""

    rho: ChannelFlow
    sigma: ChannelFlow

    @classmethod
    def evolve(cls, rho0, sigma0, channels: Sequence[KrausMap], tol: Tolerances | None = None) -> "DualChannelFlow":
        return cls(ChannelFlow.evolve(rho0, channels, tol), ChannelFlow.evolve(sigma0, channels, tol))

    @property
    def channels(self) -> tuple:
        return self.rho.channels

    @property
    def steps(self) -> int:
        return self.rho.steps


def _check_lengths(proc: OperatorProcess, channels: Sequence[KrausMap], states=None):
    if len(proc) != len(channels) + 1:
        raise DimensionMismatch(f"process of length {len(proc)} needs {len(proc) - 1} channels, got {len(channels)}")
    if states is not None and len(states) < len(channels):
        raise DimensionMismatch("not enough reference states for the channel sequence")
    for c in channels:
        _check_dims(c, *proc.values)


def harmonic_residual_q(
    proc: OperatorProcess, channels: Sequence[KrausMap], states=None, tol: Tolerances | None = None
) -> float:
    """Largest operator-norm defect of the defining identity over the window.

    Reverse orientation needs the reference states ``rho_t`` that define the
    reversal of each channel.
    """
    t = _tol(tol)
    _check_lengths(proc, channels, states)
    y = proc.values
    res = 0.0
    for k, c in enumerate(channels):
        if proc.orientation == FORWARD:
            d = y[k] - apply_heisenberg(c, y[k + 1])
        else:
            if states is None:
                raise InputError("reverse-time harmonicity needs the reference states")
            d = y[k + 1] - apply_heisenberg(time_reversal(c, states[k], t), y[k])
        res = max(res, op_norm(d))
    return res


def is_space_time_harmonic_q(
    proc: OperatorProcess, channels: Sequence[KrausMap], states=None, tol: Tolerances | None = None
) -> bool:
    t = _tol(tol)
    return harmonic_residual_q(proc, channels, states, t) <= t.check


def pullback_process(y_final, channels: Sequence[KrausMap]) -> OperatorProcess:
    """Forward-harmonic process ending at ``y_final``: ``Y_t = E_t(Y_{t+1})``."""
    ys = [hermitian(y_final, name="Y_T")]
    for c in reversed(channels):
        ys.append(apply_heisenberg(c, ys[-1]))
    return OperatorProcess(tuple(reversed(ys)), FORWARD)


def pushforward_process(y0, channels: Sequence[KrausMap], states, tol: Tolerances | None = None) -> OperatorProcess:
    """Reverse-harmonic process starting at ``y0``: ``Y_{t+1} = R_t(Y_t)``."""
    t = _tol(tol)
    ys = [hermitian(y0, name="Y_0")]
    for k, c in enumerate(channels):
        ys.append(apply_heisenberg(time_reversal(c, states[k], t), ys[-1]))
    return OperatorProcess(tuple(ys), REVERSE)


def _full_rank(m: np.ndarray, t: Tolerances) -> bool:
    return bool(np.all(psd_eigh(m, t)[2]))


def ratio_process(dual: DualChannelFlow, tol: Tolerances | None = None) -> OperatorProcess:
    """``Y_t = sigma_t^{-1/2} rho_t sigma_t^{-1/2}``, reverse-harmonic for the sigma flow."""
    t = _tol(tol)
    ys = []
    for k, (r, s) in enumerate(zip(dual.rho.states, dual.sigma.states)):
        if not _full_rank(s, t):
            raise SingularSigma(f"sigma_{k} is rank deficient")
        inv = inv_sqrt_psd(s, t)
        ys.append(inv @ r @ inv)
    return OperatorProcess(tuple(ys), REVERSE)


def ratio_harmonic_residual(dual: DualChannelFlow, tol: Tolerances | None = None) -> float:
    t = _tol(tol)
    return harmonic_residual_q(ratio_process(dual, t), dual.channels, dual.sigma.states, t)


def constant_expectation_check(proc: OperatorProcess, flow: ChannelFlow) -> list[float]:
    """``[trace(rho_t Y_t)]`` along the reference flow.

    Constant for harmonic processes of either orientation. For the
    reverse-subharmonic ``Z_t`` of the ratio process it is non-increasing in
    ``t``; for a forward-subharmonic process it is non-decreasing.
    """
    if len(proc) != len(flow.states):
        raise DimensionMismatch(f"process has {len(proc)} values, flow has {len(flow.states)} states")
    return [float(np.trace(r @ y).real) for r, y in zip(flow.states, proc.values)]


def multiplicative_transform(
    proc: OperatorProcess, channels: Sequence[KrausMap], states=None, tol: Tolerances | None = None
) -> list[KrausMap]:
    """Change of measure by a positive definite harmonic process, ``N_t = Y_t^{1/2}``.

    Forward orientation: ``F_t`` has observable action
    ``X -> N_t^{-1} E_t(N_{t+1} X N_{t+1}) N_t^{-1}``. Reverse orientation uses
    the reversal ``R_t`` and ``X -> N_{t+1}^{-1} R_t(N_t X N_t) N_{t+1}^{-1}``.
    Either way ``F_t(I) = I``; maps are returned tagged ``identity_preserving``.
    """
    t = _tol(tol)
    _check_lengths(proc, channels, states)
    roots, inv_roots = [], []
    for k, y in enumerate(proc.values):
        w, v = np.linalg.eigh(y)
        if w[0] <= t.rank_cutoff_rel * max(w[-1], 0.0):
            raise SingularProcess(f"Y_{k} is not positive definite")
        roots.append((v * np.sqrt(w)) @ dag(v))
        inv_roots.append((v / np.sqrt(w)) @ dag(v))
    out = []
    for k, c in enumerate(channels):
        if proc.orientation == FORWARD:
            ops = tuple(roots[k + 1] @ m @ inv_roots[k] for m in c.operators)
        else:
            if states is None:
                raise InputError("reverse orientation needs the reference states")
            rev = time_reversal(c, states[k], t)
            ops = tuple(roots[k] @ m @ inv_roots[k + 1] for m in rev.operators)
        out.append(KrausMap(ops, "identity_preserving"))
    return out


def identity_preservation_residual(kmap: KrausMap) -> float:
    return op_norm(apply_heisenberg(kmap, np.eye(kmap.dim)) - np.eye(kmap.dim))


# ---------------------------------------------------------------------------
# Jensen inequalities


def _jensen_inputs(f, operators, x_list, t: Tolerances):
    sf = get_function(f)
    ops = [as_square(m, f"M_{k}") for k, m in enumerate(operators)]
    xs = [hermitian(x, t, f"X_{k}") for k, x in enumerate(x_list)]
    if not ops or len(ops) != len(xs):
        raise DimensionMismatch(f"{len(ops)} operators but {len(xs)} observables")
    if len({m.shape for m in ops + xs}) != 1:
        raise DimensionMismatch("operators and observables must share one dimension")
    eye = np.eye(ops[0].shape[0])
    comp = sum(dag(m) @ m for m in ops)
    if op_norm(comp - eye) > 1e-10:
        raise CompletenessViolation(f"sum M^dag M deviates from I by {op_norm(comp - eye):.3g}")
    fx = [matrix_function(x, sf.f, sf.domain, t) for x in xs]
    mean = sum(dag(m) @ x @ m for m, x in zip(ops, xs))
    f_mean = matrix_function(mean, sf.f, sf.domain, t)
    f_avg = sum(dag(m) @ y @ m for m, y in zip(ops, fx))
    return f_mean, f_avg


def operator_jensen_residual(f, operators, x_list, tol: Tolerances | None = None) -> float:
    """Smallest eigenvalue of ``sum_k M_k^dag f(X_k) M_k - f(sum_k M_k^dag X_k M_k)``.

    Non-negative (up to rounding) whenever ``f`` is operator convex.
    """
    f_mean, f_avg = _jensen_inputs(f, operators, x_list, _tol(tol))
    return min_eigenvalue(f_avg - f_mean)


def trace_jensen_residual(f, operators, x_list, tol: Tolerances | None = None) -> float:
    """``trace(sum_k M_k^dag f(X_k) M_k) - trace(f(sum_k M_k^dag X_k M_k))``; convexity of ``f`` suffices."""
    f_mean, f_avg = _jensen_inputs(f, operators, x_list, _tol(tol))
    return float(np.trace(f_avg - f_mean).real)


def expectation_jensen_residual(f, rho, x, tol: Tolerances | None = None) -> float:
    """``trace(rho f(X)) - f(trace(rho X))``."""
    t = _tol(tol)
    sf = get_function(f)
    r = as_density(rho, t)
    xm = hermitian(x, t, "X")
    if r.shape != xm.shape:
        raise DimensionMismatch("rho and X must have the same dimension")
    fx = matrix_function(xm, sf.f, sf.domain, t)
    mean = float(np.trace(r @ xm).real)
    return float(np.trace(r @ fx).real) - float(sf.f(np.array([mean]))[0])


# ---------------------------------------------------------------------------
# relative entropies


def _support_leak(rho: np.ndarray, sigma: np.ndarray, t: Tolerances) -> float:
    outside = np.eye(rho.shape[0]) - support_projector(sigma, t)
    return float(np.trace(outside @ rho).real)


def d_umegaki(rho, sigma, tol: Tolerances | None = None) -> float:
    """``trace(rho (log rho - log sigma))`` in nats, ``inf`` unless ``supp(rho) <= supp(sigma)``."""
    t = _tol(tol)
    r, s = as_density(rho, t, "rho"), as_density(sigma, t, "sigma")
    if r.shape != s.shape:
        raise DimensionMismatch("rho and sigma must have the same dimension")
    if _support_leak(r, s, t) > t.tol_psd:
        return float("inf")
    w, _, _ = psd_eigh(r, t)
    return float(np.sum(xlogx(w)) - np.trace(r @ log_on_support(s, t)).real)


def d_belavkin_staszewski(rho, sigma, tol: Tolerances | None = None) -> float:
    """``trace(sigma g(sigma^{-1/2} rho sigma^{-1/2}))`` with ``g(x) = x log x``, in nats.

    Inverse square roots are pseudo-inverses on ``supp(sigma)``; ``inf``
    unless ``supp(rho) <= supp(sigma)``.
    """
    t = _tol(tol)
    r, s = as_density(rho, t, "rho"), as_density(sigma, t, "sigma")
    if r.shape != s.shape:
        raise DimensionMismatch("rho and sigma must have the same dimension")
    if _support_leak(r, s, t) > t.tol_psd:
        return float("inf")
    inv = inv_sqrt_psd(s, t)
    y = matrix_function(inv @ r @ inv, xlogx, NONNEGATIVE, t)
    return float(np.trace(s @ y).real)


@dataclass(frozen=True)
class EntropyTrace:
    belavkin_staszewski: list
    umegaki: list

    @staticmethod
    def _worst_increase(seq) -> float:
        a = np.asarray(seq, dtype=float)
        return float(np.max(np.diff(a), initial=-np.inf)) if a.size > 1 else -np.inf

    def bs_worst_increase(self) -> float:
        return self._worst_increase(self.belavkin_staszewski)

    def umegaki_worst_increase(self) -> float:
        return self._worst_increase(self.umegaki)

    def worst_ordering_gap(self) -> float:
        """Smallest ``D_BS - D_U`` along the flow."""
        return float(np.min(np.subtract(self.belavkin_staszewski, self.umegaki)))


def _require_invertible(dual: DualChannelFlow, t: Tolerances):
    for k, (r, s) in enumerate(zip(dual.rho.states, dual.sigma.states)):
        if not _full_rank(r, t):
            raise SingularState(f"rho_{k} is rank deficient")
        if not _full_rank(s, t):
            raise SingularState(f"sigma_{k} is rank deficient")


def h_theorem_operator_check(dual: DualChannelFlow, tol: Tolerances | None = None) -> list[float]:
    """Smallest eigenvalue of ``R_t(Z_t) - Z_{t+1}`` for each step, ``Z_t = Y_t log Y_t``."""
    t = _tol(tol)
    _require_invertible(dual, t)
    z = ratio_process(dual, t).map("xlogx").values
    out = []
    for k, c in enumerate(dual.channels):
        rev = time_reversal(c, dual.sigma.states[k], t)
        out.append(min_eigenvalue(apply_heisenberg(rev, z[k]) - z[k + 1]))
    return out


def h_theorem_trace_check(dual: DualChannelFlow, tol: Tolerances | None = None) -> EntropyTrace:
    """Belavkin-Staszewski and Umegaki relative entropies along the dual flow."""
    t = _tol(tol)
    _require_invertible(dual, t)
    pairs = list(zip(dual.rho.states, dual.sigma.states))
    return EntropyTrace(
        [d_belavkin_staszewski(r, s, t) for r, s in pairs],
        [d_umegaki(r, s, t) for r, s in pairs],
    )
