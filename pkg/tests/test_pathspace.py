import itertools
import math

import numpy as np
import pytest

from chronoreverse import channels as qc
from chronoreverse import pathspace as ps
from chronoreverse.errors import DimensionMismatch, EnumerationCapExceeded, FamilyMismatch, InvalidFamily, SupportViolation
from chronoreverse.randomgen import haar_unitary, random_density, random_kraus, random_stochastic


def _weights_oracle(spec):
    """Path weights by brute force over index tuples, one path at a time."""
    out = np.zeros(spec.shape)
    for idx in itertools.product(*(range(n) for n in spec.shape)):
        p0 = spec.families[0].projectors[idx[0]]
        state = p0 @ spec.initial @ p0
        for t, c in enumerate(spec.channels):
            state = sum(k @ state @ k.conj().T for k in c.operators)
            p = spec.families[t + 1].projectors[idx[t + 1]]
            state = p @ state @ p
        out[idx] = np.trace(state).real
    return out


def test_family_validation():
    with pytest.raises(InvalidFamily):
        ps.ProjectorFamily((np.diag([1.0, 0.0]),))
    with pytest.raises(InvalidFamily):
        ps.ProjectorFamily((np.diag([1.0, 0.0]), np.diag([1.0, 1.0])))
    fam = ps.ProjectorFamily.from_basis(haar_unitary(np.random.default_rng(0), 3), [[0, 1], [2]])
    assert fam.ranks() == [2, 1]


def test_identity_channel_weights():
    spec = ps.PathSpaceSpec((ps.ProjectorFamily.computational(2),) * 2, (qc.kraus(np.eye(2)),), np.diag([0.7, 0.3]))
    assert np.allclose(ps.path_weights(spec).weights, [[0.7, 0.0], [0.0, 0.3]])


def test_weights_against_brute_force():
    rng = np.random.default_rng(60)
    for _ in range(30):
        d = int(rng.integers(2, 4))
        steps = int(rng.integers(0, 4))
        fams = tuple(ps.ProjectorFamily.from_basis(haar_unitary(rng, d)) for _ in range(steps + 1))
        chans = tuple(qc.KrausMap(tuple(random_kraus(rng, d, 2))) for _ in range(steps))
        spec = ps.PathSpaceSpec(fams, chans, random_density(rng, d))
        w = ps.path_weights(spec)
        assert np.allclose(w.weights, _weights_oracle(spec), atol=1e-12)
        assert abs(w.total() - 1.0) <= 1e-9


def test_diagonal_spec_matches_chain_products():
    rng = np.random.default_rng(61)
    for _ in range(30):
        n = int(rng.integers(2, 4))
        steps = int(rng.integers(1, 4))
        p = [random_stochastic(rng, n) for _ in range(steps)]
        pi = rng.dirichlet(np.ones(n))
        spec = ps.PathSpaceSpec((ps.ProjectorFamily.computational(n),) * (steps + 1),
                                tuple(qc.classical_embedding(m) for m in p), np.diag(pi))
        w = ps.path_weights(spec).weights
        for idx in itertools.product(range(n), repeat=steps + 1):
            expected = pi[idx[0]] * math.prod(p[t][idx[t], idx[t + 1]] for t in range(steps))
            assert abs(w[idx] - expected) <= 1e-10


def test_enumeration_cap():
    fam = ps.ProjectorFamily.computational(2)
    spec = ps.PathSpaceSpec((fam,) * 4, (qc.amplitude_damping(0.2),) * 3, np.eye(2) / 2)
    with pytest.raises(EnumerationCapExceeded):
        ps.path_weights(spec, cap=15)


def test_spec_shape_checks():
    fam = ps.ProjectorFamily.computational(2)
    with pytest.raises(DimensionMismatch):
        ps.PathSpaceSpec((fam, fam), (), np.eye(2) / 2)
    with pytest.raises(DimensionMismatch):
        ps.PathSpaceSpec((fam, ps.ProjectorFamily.computational(3)), (qc.amplitude_damping(0.1),), np.eye(2) / 2)


def test_path_kl_requires_same_families():
    fam = ps.ProjectorFamily.computational(2)
    a = ps.PathSpaceSpec((fam, fam), (qc.amplitude_damping(0.2),), np.eye(2) / 2)
    b = a.with_families((fam, ps.hadamard_family()))
    with pytest.raises(FamilyMismatch):
        ps.path_kl(a, b)
    assert ps.path_kl(a, a) == 0.0


def test_max_entropy_qubit_references():
    rng = np.random.default_rng(62)
    for _ in range(5):
        chans = tuple(qc.KrausMap(tuple(random_kraus(rng, 2, 3))) for _ in range(2))
        sigma0, rho0 = random_density(rng, 2), random_density(rng, 2)
        for fam in (ps.ProjectorFamily.computational(2), ps.hadamard_family()):
            spec = ps.PathSpaceSpec((fam,) * 3, chans, sigma0)
            rep = ps.verify_max_entropy_theorem(spec, rho0, ps.perturbation_grid(chans))
            assert rep.passed and rep.nondegenerate_initial_family
            assert len(rep.d_perturbed) == 9


def test_max_entropy_requires_support():
    fam = ps.ProjectorFamily.computational(2)
    spec = ps.PathSpaceSpec((fam, fam), (qc.amplitude_damping(0.2),), np.diag([1.0, 0.0]))
    with pytest.raises(SupportViolation):
        ps.verify_max_entropy_theorem(spec, np.eye(2) / 2, [])


def test_perturbation_grid_layout():
    chans = (qc.amplitude_damping(0.2), qc.amplitude_damping(0.4))
    grid = ps.perturbation_grid(chans, (0.1,))
    assert len(grid) == 3
    # second entry perturbs only the first step
    assert grid[1][1] is chans[1] and grid[1][0] is not chans[0]


def test_marginals():
    rng = np.random.default_rng(63)
    fam = ps.ProjectorFamily.computational(3)
    m = qc.KrausMap(tuple(random_kraus(rng, 3, 2)))
    rho = np.diag([0.5, 0.3, 0.2])
    w = ps.path_weights(ps.PathSpaceSpec((fam, fam), (m,), rho))
    assert np.allclose(w.marginal(0), [0.5, 0.3, 0.2])
    assert np.allclose(w.marginal(1), np.real(np.diag(qc.apply_schrodinger(m, rho))))


def test_single_time_is_born_rule():
    rng = np.random.default_rng(64)
    rho = random_density(rng, 3)
    fam = ps.ProjectorFamily.from_basis(haar_unitary(rng, 3), [[0, 1], [2]])
    w = ps.path_weights(ps.PathSpaceSpec((fam,), (), rho)).weights
    assert np.allclose(w, [np.trace(p @ rho).real for p in fam.projectors])


def test_path_kl_of_diagonal_initial_states_with_identity_channels():
    fam = ps.ProjectorFamily.computational(2)
    ident = qc.kraus(np.eye(2))
    a = ps.PathSpaceSpec((fam,) * 3, (ident, ident), np.diag([0.75, 0.25]))
    b = a.with_initial(np.diag([0.5, 0.5]))
    assert abs(ps.path_kl(a, b) - (0.75 * math.log(1.5) + 0.25 * math.log(0.5))) <= 1e-14


def test_max_entropy_at_reference_initial_state_is_zero():
    rng = np.random.default_rng(65)
    chans = tuple(qc.KrausMap(tuple(random_kraus(rng, 2, 2))) for _ in range(2))
    sigma0 = random_density(rng, 2)
    spec = ps.PathSpaceSpec((ps.ProjectorFamily.computational(2),) * 3, chans, sigma0)
    rep = ps.verify_max_entropy_theorem(spec, sigma0, ps.perturbation_grid(chans))
    assert abs(rep.d_star) <= 1e-14 and min(rep.d_perturbed) >= 0 and rep.passed


def test_max_entropy_amplitude_damping_reference():
    chans = (qc.amplitude_damping(0.3),) * 2
    rng = np.random.default_rng(66)
    sigma0, rho0 = random_density(rng, 2), random_density(rng, 2)
    for fam in (ps.ProjectorFamily.computational(2), ps.hadamard_family()):
        spec = ps.PathSpaceSpec((fam,) * 3, chans, sigma0)
        rep = ps.verify_max_entropy_theorem(spec, rho0, ps.perturbation_grid(chans))
        assert rep.passed


def test_joint_matches_two_time_probabilities_on_eigenfamilies():
    rng = np.random.default_rng(67)
    for _ in range(20):
        sigma = random_density(rng, 3)
        m = qc.KrausMap(tuple(random_kraus(rng, 3, 2)))
        tt = qc.two_time_probabilities(m, sigma)
        spec = ps.PathSpaceSpec((ps.ProjectorFamily(tt.projectors_t), ps.ProjectorFamily(tt.projectors_next)),
                                (m,), sigma)
        assert np.allclose(ps.path_weights(spec).weights, tt.forward, atol=1e-12)
