"""Dense Hermitian linear algebra shared by every other module.

Spectral decompositions, functional calculus on Hermitian matrices,
Moore-Penrose pseudoinverses, support projectors and the PSD (Loewner)
order. All routines take and return plain ``numpy`` arrays and never
mutate their inputs.

Two numerical conventions are applied uniformly:

* eigenvalues in ``[-tol_psd * scale, 0)`` are clipped to zero before a
  PSD-only function is evaluated;
* eigenvalues below ``rank_cutoff_rel * lambda_max`` are treated as zero by
  the pseudoinverse, the support projector and inverse square roots.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, DomainViolation, InputError, NotHermitian, NotPSD

TOL_ENV_VAR = "CHRONO_REVERSE_TOL"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances.

    ``check`` is the verdict tolerance used by the residual checks (the
    ``1e-9`` that most identities are judged against); the remaining fields
    steer the linear-algebra kernel itself.
    """

    tol_herm: float = 1e-10
    tol_recon: float = 1e-9
    tol_psd: float = 1e-10
    rank_cutoff_rel: float = 1e-10
    check: float = 1e-9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v < 0:
                raise InputError(f"tolerance {f.name} must be finite and >= 0, got {v!r}")
        if self.rank_cutoff_rel >= 1:
            raise InputError("rank_cutoff_rel must be < 1")

    def override(self, **changes) -> "Tolerances":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def default_tolerances() -> Tolerances:
    """Defaults, with the verdict tolerance optionally taken from the environment."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None or raw.strip() == "":
        return Tolerances()
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"{TOL_ENV_VAR}={raw!r} is not a decimal float") from None
    return Tolerances(check=value)


def _tol(tol: Tolerances | None) -> Tolerances:
    return default_tolerances() if tol is None else tol


# ---------------------------------------------------------------------------
# basic helpers


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def as_square(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex square matrix."""
    m = np.asarray(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    m = m.astype(complex)
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def same_dim(*mats: np.ndarray) -> int:
    dims = {m.shape for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"shape mismatch: {sorted(dims)}")
    return mats[0].shape[0]


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)


def is_hermitian(a, tol: Tolerances | None = None) -> bool:
    m = as_square(a)
    return bool(np.max(np.abs(m - dag(m))) <= _tol(tol).tol_herm * _scale(m))


def hermitian(a, tol: Tolerances | None = None, name: str = "matrix") -> np.ndarray:
    """Validate Hermitian symmetry and return the exactly symmetrised matrix."""
    m = as_square(a, name)
    dev = np.abs(m - dag(m))
    if np.max(dev) > _tol(tol).tol_herm * _scale(m):
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        raise NotHermitian(
            f"{name} is not Hermitian: entries ({i},{j}) and ({j},{i}) differ by {dev[i, j]:.3g}"
        )
    return 0.5 * (m + dag(m))


def trace_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if np.allclose(a, dag(a), atol=1e-14, rtol=0):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (a + dag(a))))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def op_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a), 2))


# ---------------------------------------------------------------------------
# spectral calculus


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns, unitary

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dag(v)

    def eigenspaces(self, atol: float) -> list[tuple[float, np.ndarray]]:
        """Group eigenvalues closer than ``atol`` into eigenspace projectors."""
        groups: list[list[int]] = []
        for k, lam in enumerate(self.eigenvalues):
            if groups and abs(self.eigenvalues[groups[-1][0]] - lam) <= atol:
                groups[-1].append(k)
            else:
                groups.append([k])
        out = []
        for g in groups:
            v = self.eigenvectors[:, g]
            out.append((float(np.mean(self.eigenvalues[g])), v @ dag(v)))
        return out


def spectral_decompose(a, tol: Tolerances | None = None) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending."""
    h = hermitian(a, tol)
    w, v = np.linalg.eigh(h)
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


@dataclass(frozen=True)
class Interval:
    lo: float = -np.inf
    hi: float = np.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x: np.ndarray) -> np.ndarray:
        lo_ok = x >= self.lo if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi if self.hi_closed else x < self.hi
        return lo_ok & hi_ok

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


REALS = Interval()
NONNEGATIVE = Interval(0.0, np.inf, lo_closed=True)
POSITIVE = Interval(0.0, np.inf)


def matrix_function(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    domain: Interval = REALS,
    tol: Tolerances | None = None,
) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix by functional calculus.

    Eigenvalues just below a closed lower endpoint (within ``tol_psd``, relative
    to the spectral scale) are clipped onto it; anything else outside ``domain``
    raises :class:`DomainViolation`.
    """
    t = _tol(tol)
    sd = spectral_decompose(a, t)
    w = sd.eigenvalues.copy()
    slack = t.tol_psd * max(1.0, float(np.max(np.abs(w))))
    if domain.lo_closed and np.isfinite(domain.lo):
        near = (w < domain.lo) & (w >= domain.lo - slack)
        w[near] = domain.lo
    if domain.hi_closed and np.isfinite(domain.hi):
        near = (w > domain.hi) & (w <= domain.hi + slack)
        w[near] = domain.hi
    bad = ~domain.contains(w)
    if np.any(bad):
        raise DomainViolation(f"eigenvalue {w[bad][0]:.6g} outside domain {domain}")
    fw = np.asarray(f(w), dtype=float)
    v = sd.eigenvectors
    out = (v * fw) @ dag(v)
    return 0.5 * (out + dag(out))


def xlogx(x: np.ndarray) -> np.ndarray:
    """``x log x`` with the convention ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def psd_eigh(a, tol: Tolerances | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigen-pairs of a PSD matrix after clipping and rank cutoff.

    Returns ``(w, v, support_mask)``; entries of ``w`` outside the support are
    exactly zero.
    """
    t = _tol(tol)
    h = hermitian(a, t)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -t.tol_psd * scale:
        raise NotPSD(f"matrix has eigenvalue {w[0]:.6g} below -tol_psd")
    w = np.clip(w, 0.0, None)
    lam_max = float(w[-1])
    support = w > t.rank_cutoff_rel * lam_max if lam_max > 0 else np.zeros(w.shape, bool)
    w = np.where(support, w, 0.0)
    return w, v, support


def _from_eig(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = (v * w) @ dag(v)
    return 0.5 * (out + dag(out))


def sqrt_psd(a, tol: Tolerances | None = None) -> np.ndarray:
    w, v, _ = psd_eigh(a, tol)
    return _from_eig(np.sqrt(w), v)


def inv_sqrt_psd(a, tol: Tolerances | None = None) -> np.ndarray:
    """Pseudo-inverse of the PSD square root (zero off the support)."""
    w, v, s = psd_eigh(a, tol)
    inv = np.zeros_like(w)
    inv[s] = 1.0 / np.sqrt(w[s])
    return _from_eig(inv, v)


def pseudo_inverse(a, tol: Tolerances | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a PSD matrix."""
    w, v, s = psd_eigh(a, tol)
    inv = np.zeros_like(w)
    inv[s] = 1.0 / w[s]
    return _from_eig(inv, v)


def support_projector(a, tol: Tolerances | None = None) -> np.ndarray:
    """Orthogonal projector onto the support (complement of the kernel)."""
    _, v, s = psd_eigh(a, tol)
    vs = v[:, s]
    return vs @ dag(vs)


def kernel_basis(a, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormal basis of the kernel of a PSD matrix, as columns."""
    _, v, s = psd_eigh(a, tol)
    return v[:, ~s]


def rank_psd(a, tol: Tolerances | None = None) -> int:
    return int(np.count_nonzero(psd_eigh(a, tol)[2]))


def log_on_support(a, tol: Tolerances | None = None) -> np.ndarray:
    """Matrix logarithm restricted to the support; zero on the kernel."""
    w, v, s = psd_eigh(a, tol)
    lw = np.zeros_like(w)
    lw[s] = np.log(w[s])
    return _from_eig(lw, v)


def psd_order_holds(a, b, tol: Tolerances | None = None) -> bool:
    """``A <= B`` in the Loewner order, judged by the smallest eigenvalue of B - A."""
    t = _tol(tol)
    am, bm = hermitian(a, t, "A"), hermitian(b, t, "B")
    same_dim(am, bm)
    return bool(min_eigenvalue(bm - am) >= -t.tol_psd * max(1.0, _scale(am), _scale(bm)))


def min_eigenvalue(a) -> float:
    h = np.asarray(a, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (h + dag(h)))[0])
