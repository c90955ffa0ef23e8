"""Quantum path spaces: joint weights of time-ordered projective events.

A path ``(i_0, ..., i_T)`` picks one projector from each time's family. Its
weight is obtained by projecting the initial state on ``Pi_{i_0}(0)``, then
alternately applying the channel of each step and compressing with the next
projector, and finally taking the trace. Intermediate projections are
two-sided (``Pi rho Pi``), which keeps every weight non-negative and makes
the weights of complete families sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channels import KrausMap, as_density, depolarizing, mix, validate
from .errors import (
    DimensionMismatch,
    EnumerationCapExceeded,
    FamilyMismatch,
    InvalidFamily,
    NotTracePreserving,
    SupportViolation,
)
from .harmonic import d_umegaki
from .linalg import Tolerances, _tol, dag, hermitian, op_norm, support_projector

DEFAULT_CAP = 10**6
# weights this small are rounding noise from products of orthogonal projectors
ZERO_WEIGHT = 1e-14
FAMILY_TOL = 1e-10


@dataclass(frozen=True)
class ProjectorFamily:
    projectors: tuple

    def __post_init__(self):
        ps = tuple(hermitian(p, name=f"Pi_{k}") for k, p in enumerate(self.projectors))
        if not ps:
            raise InvalidFamily("a projector family needs at least one projector")
        if len({p.shape for p in ps}) != 1:
            raise InvalidFamily("projectors have different dimensions")
        d = ps[0].shape[0]
        for k, p in enumerate(ps):
            if op_norm(p @ p - p) > FAMILY_TOL:
                raise InvalidFamily(f"Pi_{k} is not idempotent")
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                if op_norm(ps[a] @ ps[b]) > FAMILY_TOL:
                    raise InvalidFamily(f"Pi_{a} and Pi_{b} are not orthogonal")
        if op_norm(sum(ps) - np.eye(d)) > FAMILY_TOL:
            raise InvalidFamily("projectors do not resolve the identity")
        object.__setattr__(self, "projectors", ps)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self):
        return len(self.projectors)

    def ranks(self) -> list[int]:
        return [int(round(np.trace(p).real)) for p in self.projectors]

    @classmethod
    def from_basis(cls, u, groups: Sequence[Sequence[int]] | None = None) -> "ProjectorFamily":
        """Projectors onto spans of columns of the unitary ``u`` (one per column by default)."""
        u = np.asarray(u, dtype=complex)
        groups = [[k] for k in range(u.shape[1])] if groups is None else groups
        return cls(tuple(u[:, g] @ dag(u[:, g]) for g in groups))

    @classmethod
    def computational(cls, dim: int) -> "ProjectorFamily":
        return cls.from_basis(np.eye(dim))

    def same_as(self, other: "ProjectorFamily", atol: float = 1e-12) -> bool:
        return len(self) == len(other) and all(
            np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.projectors, other.projectors)
        )


def hadamard_family() -> ProjectorFamily:
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    return ProjectorFamily.from_basis(h)


@dataclass(frozen=True)
class PathSpaceSpec:
    families: tuple  # T + 1 ProjectorFamily
    channels: tuple  # T KrausMap
    initial: np.ndarray = field(repr=False)

    def __post_init__(self):
        fams, chans = tuple(self.families), tuple(self.channels)
        if len(fams) != len(chans) + 1:
            raise DimensionMismatch(f"{len(fams)} families need {len(fams) - 1} channels, got {len(chans)}")
        init = as_density(self.initial, name="sigma_0")
        dims = {f.dim for f in fams} | {c.dim for c in chans} | {init.shape[0]}
        if len(dims) != 1:
            raise DimensionMismatch(f"inconsistent dimensions {sorted(dims)}")
        object.__setattr__(self, "families", fams)
        object.__setattr__(self, "channels", chans)
        object.__setattr__(self, "initial", init)

    @property
    def steps(self) -> int:
        return len(self.channels)

    @property
    def shape(self) -> tuple:
        return tuple(len(f) for f in self.families)

    def with_initial(self, rho) -> "PathSpaceSpec":
        return replace(self, initial=rho)

    def with_channels(self, channels) -> "PathSpaceSpec":
        return replace(self, channels=tuple(channels))

    def with_families(self, families) -> "PathSpaceSpec":
        return replace(self, families=tuple(families))


@dataclass(frozen=True)
class PathDistribution:
    weights: np.ndarray  # shape (m_0, ..., m_T)

    def total(self) -> float:
        return float(self.weights.sum())

    def as_dict(self) -> dict:
        return {idx: float(w) for idx, w in np.ndenumerate(self.weights)}

    def marginal(self, t: int) -> np.ndarray:
        axes = tuple(a for a in range(self.weights.ndim) if a != t)
        return self.weights.sum(axis=axes)


def path_weights(spec: PathSpaceSpec, cap: int = DEFAULT_CAP) -> PathDistribution:
    """Weights of every path, enumerated level by level with shared prefixes."""
    n_paths = int(np.prod(spec.shape, dtype=object))
    if n_paths > cap:
        raise EnumerationCapExceeded(f"{n_paths} paths exceed the enumeration cap {cap}")
    for k, c in enumerate(spec.channels):
        if not validate(c).passed:
            raise NotTracePreserving(f"channel {k} is not trace preserving")
    d = spec.initial.shape[0]
    states = spec.initial[None, :, :]
    for t, fam in enumerate(spec.families):
        projs = np.stack(fam.projectors)
        if t == spec.steps:
            w = np.einsum("mij,nji->nm", projs, states).real
            break
        # (N, d, d) -> (N * m, d, d): compress every prefix with every projector
        states = np.einsum("mij,njk,mkl->nmil", projs, states, projs).reshape(-1, d, d)
        ops = spec.channels[t].stacked()
        states = np.einsum("kij,njl,kml->nim", ops, states, ops.conj())
    w = np.where(np.abs(w) <= ZERO_WEIGHT, 0.0, w)
    if np.any(w < -1e-12):
        raise ArithmeticError(f"negative path weight {w.min():.3g}")
    return PathDistribution(np.clip(w, 0.0, None).reshape(spec.shape))


def _check_families(spec_f: PathSpaceSpec, spec_e: PathSpaceSpec):
    if len(spec_f.families) != len(spec_e.families) or not all(
        a.same_as(b) for a, b in zip(spec_f.families, spec_e.families)
    ):
        raise FamilyMismatch("path spaces are built on different projector families")


def path_kl(spec_f: PathSpaceSpec, spec_e: PathSpaceSpec, cap: int = DEFAULT_CAP) -> float:
    """KL divergence (nats) between the path distributions of two specs on the same families."""
    _check_families(spec_f, spec_e)
    p = path_weights(spec_f, cap).weights.ravel()
    q = path_weights(spec_e, cap).weights.ravel()
    on = p > 0
    if np.any(q[on] <= 0):
        return float("inf")
    return float(np.sum(p[on] * np.log(p[on] / q[on])))


def perturbation_grid(channels: Sequence[KrausMap], eps_grid=(0.05, 0.1, 0.2), noise: KrausMap | None = None) -> list[tuple]:
    """Channel sequences ``(1 - eps) E_t + eps N`` around a reference.

    For each ``eps``: one sequence with every step perturbed, then one per
    step with only that step perturbed. ``N`` defaults to complete
    depolarisation.
    """
    chans = list(channels)
    noise = depolarizing(chans[0].dim) if noise is None else noise
    out = []
    for eps in eps_grid:
        out.append(tuple(mix(c, noise, eps) for c in chans))
        if len(chans) > 1:
            for s in range(len(chans)):
                out.append(tuple(mix(c, noise, eps) if k == s else c for k, c in enumerate(chans)))
    return out


@dataclass(frozen=True)
class MaxEntropyReport:
    d_star: float
    d_perturbed: list
    d_umegaki_initial: float
    minimal: bool
    bounded: bool
    nondegenerate_initial_family: bool
    tolerance: float
    note: str = "grid evidence at the evaluated perturbations, not a proof of global optimality"

    @property
    def passed(self) -> bool:
        return self.minimal and self.bounded


def verify_max_entropy_theorem(
    spec_e: PathSpaceSpec,
    rho0,
    perturbations: Sequence[Sequence[KrausMap]],
    tol: Tolerances | None = None,
    cap: int = DEFAULT_CAP,
) -> MaxEntropyReport:
    """Compare the path-space divergence of the reference dynamics against perturbed dynamics.

    ``D*`` uses the reference channels started from ``rho0``; each ``D_p``
    uses a perturbed channel sequence from the same ``rho0``. The report
    records whether ``D* <= D_p`` for all perturbations and whether ``D*`` is
    bounded by the Umegaki divergence of the initial states. The
    non-degeneracy of the time-0 family (rank-one projectors) is recorded, not
    required.
    """
    t = _tol(tol)
    rho = as_density(rho0, t, "rho0")
    leak = float(np.trace((np.eye(rho.shape[0]) - support_projector(spec_e.initial, t)) @ rho).real)
    if leak > t.tol_psd:
        raise SupportViolation(f"rho0 has weight {leak:.3g} outside supp(sigma_0)")
    d_star = path_kl(spec_e.with_initial(rho), spec_e, cap)
    d_p = []
    for k, seq in enumerate(perturbations):
        if len(seq) != spec_e.steps:
            raise DimensionMismatch(f"perturbation {k} has {len(seq)} channels, expected {spec_e.steps}")
        d_p.append(path_kl(spec_e.with_channels(seq).with_initial(rho), spec_e, cap))
    du = d_umegaki(rho, spec_e.initial, t)
    return MaxEntropyReport(
        d_star=d_star,
        d_perturbed=d_p,
        d_umegaki_initial=du,
        minimal=all(d_star <= d + t.check for d in d_p),
        bounded=d_star <= du + t.check,
        nondegenerate_initial_family=all(r == 1 for r in spec_e.families[0].ranks()),
        tolerance=t.check,
    )
