import numpy as np
import pytest

from chronoreverse import channels as qc
from chronoreverse.errors import (
    DimensionMismatch,
    InputError,
    NotReversalShaped,
    NotTracePreserving,
    SupportViolation,
)
from chronoreverse.linalg import op_norm, support_projector, trace_norm
from chronoreverse.randomgen import haar_isometry, haar_unitary, random_density, random_hermitian, random_kraus

HALF = np.eye(2) / 2


def _channel(rng, d, rank=None):
    return qc.KrausMap(tuple(random_kraus(rng, d, rank or int(rng.integers(1, 4)))))


def test_amplitude_damping_validates():
    rep = qc.validate(qc.amplitude_damping(0.3))
    assert rep.passed and rep.kind == qc.TRACE_PRESERVING
    assert rep.completeness_residual <= 1e-15


def test_incomplete_kraus_rejected_on_use():
    km = qc.KrausMap((np.eye(2) * 0.9,))
    assert not qc.validate(km).passed
    with pytest.raises(NotTracePreserving):
        qc.apply_schrodinger(km, HALF)
    km = qc.KrausMap((np.eye(2) * 0.9,), qc.TRACE_NON_INCREASING)
    assert qc.validate(km).passed


def test_mismatched_kraus_shapes():
    with pytest.raises(DimensionMismatch):
        qc.KrausMap((np.eye(2), np.eye(3)))


def test_amplitude_damping_reversal_hand_values():
    rev = qc.time_reversal(qc.amplitude_damping(0.5), HALF)
    s0, s1 = rev.operators
    assert np.allclose(s0, np.diag([np.sqrt(2 / 3), 1.0]), atol=1e-14)
    assert np.allclose(s1, [[0, 0], [1 / np.sqrt(3), 0]], atol=1e-14)
    assert rev.kind == qc.TRACE_PRESERVING
    nxt = qc.apply_schrodinger(qc.amplitude_damping(0.5), HALF)
    assert np.allclose(nxt, np.diag([0.75, 0.25]))
    assert trace_norm(qc.apply_schrodinger(rev, nxt) - HALF) <= 1e-15


def test_reversal_against_direct_formula():
    rng = np.random.default_rng(20)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        m = _channel(rng, d)
        rho = random_density(rng, d)
        nxt = sum(k @ rho @ k.conj().T for k in m.operators)
        # oracle via scipy-free eigen routines
        w, v = np.linalg.eigh(rho)
        s = v @ np.diag(np.sqrt(w)) @ v.conj().T
        w2, v2 = np.linalg.eigh(nxt)
        inv = v2 @ np.diag(w2 ** -0.5) @ v2.conj().T
        rev = qc.time_reversal(m, rho)
        for got, k in zip(rev.operators, m.operators):
            assert op_norm(got - s @ k.conj().T @ inv) <= 1e-9


def test_recovery_on_rank_deficient_state():
    rng = np.random.default_rng(21)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        v = haar_isometry(rng, d, int(rng.integers(1, d)))
        rho = v @ v.conj().T
        rho /= np.trace(rho).real
        assert qc.recovery_residual(_channel(rng, d), rho) <= 1e-9


def test_reversal_kind_and_augmentation_on_rank_deficient_output():
    # E(rho) = |0><0| for every rho: reset channel
    reset = qc.kraus(np.array([[1, 0], [0, 0]], complex), np.array([[0, 1], [0, 0]], complex))
    rho = random_density(np.random.default_rng(22), 2)
    rev = qc.time_reversal(reset, rho)
    assert rev.kind == qc.TRACE_NON_INCREASING
    nxt = qc.apply_schrodinger(reset, rho)
    assert op_norm(rev.completeness() - support_projector(nxt)) <= 1e-12
    aug = qc.augment_to_tpcp(rev, nxt)
    assert qc.validate(aug).passed
    assert trace_norm(qc.apply_schrodinger(aug, nxt) - rho) <= 1e-12
    # |1><1| is outside supp(E(rho)); the augmented map leaves it in place
    one = np.diag([0.0, 1.0]).astype(complex)
    assert np.allclose(qc.apply_schrodinger(aug, one), one)


def test_augment_rejects_wrong_shape():
    with pytest.raises(NotReversalShaped):
        qc.augment_to_tpcp(qc.amplitude_damping(0.3), np.diag([1.0, 0.0]))


def test_time_reversal_needs_trace_preserving_input():
    km = qc.KrausMap((np.eye(2) * 0.9,), qc.TRACE_NON_INCREASING)
    with pytest.raises(NotTracePreserving):
        qc.time_reversal(km, HALF)


def test_state_validation():
    with pytest.raises(InputError):
        qc.time_reversal(qc.amplitude_damping(0.3), np.eye(2))
    with pytest.raises(InputError):
        qc.time_reversal(qc.amplitude_damping(0.3), np.diag([1.2, -0.2]))


def test_double_reversal_full_rank():
    rng = np.random.default_rng(23)
    for _ in range(50):
        d = int(rng.integers(2, 6))
        assert qc.double_reversal_residual(_channel(rng, d), random_density(rng, d)) <= 1e-9


def test_consistency_support_violation():
    rho = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(SupportViolation):
        qc.check_consistency(qc.amplitude_damping(0.3), rho, HALF)


def test_reversal_independent_of_kraus_representation():
    rng = np.random.default_rng(24)
    for _ in range(50):
        d = int(rng.integers(2, 5))
        m = _channel(rng, d, 3)
        rho = random_density(rng, d)
        a = qc.time_reversal(m, rho)
        b = qc.time_reversal(qc.remix(m, haar_unitary(rng, 3)), rho)
        x = random_hermitian(rng, d)
        assert op_norm(qc.apply_heisenberg(a, x) - qc.apply_heisenberg(b, x)) <= 1e-10


def test_weighted_inner_product_symmetry():
    rng = np.random.default_rng(25)
    for _ in range(50):
        rho = random_density(rng, 3)
        x, y = random_hermitian(rng, 3), random_hermitian(rng, 3)
        a = qc.weighted_inner_product(x, y, rho)
        assert abs(a - qc.weighted_inner_product(y, x, rho)) <= 1e-12
        assert qc.weighted_inner_product(x, x, rho) >= -1e-12


def test_quantum_adjointness():
    rng = np.random.default_rng(26)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        m = _channel(rng, d)
        rho = random_density(rng, d, int(rng.integers(1, d + 1)))
        x, y = random_hermitian(rng, d), random_hermitian(rng, d)
        assert qc.check_space_time_adjointness_q(m, rho, x, y) <= 1e-9


def test_two_time_probabilities_sum_to_one_and_reverse():
    rng = np.random.default_rng(27)
    for _ in range(50):
        d = int(rng.integers(2, 5))
        tt = qc.two_time_probabilities(_channel(rng, d), random_density(rng, d))
        assert abs(tt.forward.sum() - 1.0) <= 1e-12
        assert tt.residual <= 1e-10


def test_measurement_probabilities_amplitude_damping():
    f, b = qc.measurement_probability_reversal(qc.amplitude_damping(0.5), HALF)
    assert np.allclose(f, [0.75, 0.25]) and np.allclose(b, [0.75, 0.25])


def test_classical_embedding_round_trip():
    rng = np.random.default_rng(28)
    from chronoreverse.randomgen import random_stochastic

    for _ in range(20):
        p = random_stochastic(rng, 4)
        assert np.allclose(qc.induced_stochastic_matrix(qc.classical_embedding(p)), p, atol=1e-14)


def test_depolarizing_and_mix():
    rng = np.random.default_rng(29)
    rho = random_density(rng, 3)
    assert np.allclose(qc.apply_schrodinger(qc.depolarizing(3), rho), np.eye(3) / 3)
    m = qc.unitary_channel(haar_unitary(rng, 3))
    mixed = qc.mix(m, qc.depolarizing(3), 0.25)
    expected = 0.75 * qc.apply_schrodinger(m, rho) + 0.25 * np.eye(3) / 3
    assert np.allclose(qc.apply_schrodinger(mixed, rho), expected)


def test_spanning_states_span():
    states = qc.spanning_states(3)
    mat = np.array([s.ravel() for s in states])
    assert len(states) == 9 and np.linalg.matrix_rank(mat) == 9


def test_channel_flow():
    rng = np.random.default_rng(30)
    chans = [_channel(rng, 3) for _ in range(4)]
    flow = qc.ChannelFlow.evolve(random_density(rng, 3), chans)
    assert flow.steps == 4 and flow.consistency_residual() <= 1e-14
