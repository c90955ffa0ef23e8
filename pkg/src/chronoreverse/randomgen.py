"""Seeded random instances for property batteries and scenario generation.

Everything takes an explicit ``numpy.random.Generator`` so that a seed fully
determines the output.
"""

from __future__ import annotations

import numpy as np

from .linalg import dag


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Haar-distributed isometry ``V`` with ``V^dag V = I`` (``rows >= cols``)."""
    q, r = np.linalg.qr(ginibre(rng, rows, cols))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return haar_isometry(rng, dim, dim)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = ginibre(rng, dim, dim)
    return 0.5 * (g + dag(g))


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    g = ginibre(rng, dim, dim if rank is None else rank)
    return g @ dag(g)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random state of the given rank (full rank by default)."""
    p = random_psd(rng, dim, rank)
    p = p / np.trace(p).real
    return 0.5 * (p + dag(p))


def random_kraus(rng: np.random.Generator, dim: int, rank: int) -> list[np.ndarray]:
    """Kraus operators of a random channel, cut from a Haar isometry ``C^d -> C^d (x) C^r``."""
    v = haar_isometry(rng, dim * rank, dim)
    return [v[k * dim:(k + 1) * dim, :] for k in range(rank)]


def random_stochastic(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.random((n, n)) + 1e-3
    return p / p.sum(axis=1, keepdims=True)


def random_distribution(rng: np.random.Generator, n: int, full_support: bool = True) -> np.ndarray:
    p = rng.random(n) + (1e-3 if full_support else 0.0)
    return p / p.sum()


def random_positive_definite(rng: np.random.Generator, dim: int, lo: float = 0.1, hi: float = 3.0) -> np.ndarray:
    """Hermitian matrix with spectrum drawn uniformly from ``[lo, hi]``."""
    u = haar_unitary(rng, dim)
    w = rng.uniform(lo, hi, dim)
    out = (u * w) @ dag(u)
    return 0.5 * (out + dag(out))
