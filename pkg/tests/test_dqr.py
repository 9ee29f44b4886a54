import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relyap.dqr import DqrState, dqr_run, orthonormality_defect, qr_pos, random_unitary
from relyap.errors import InvalidArgument, NumericFailure
from relyap.evolution import assemble_T
from relyap.mesh import CollocationMesh
from relyap.model import constant_kernel


def test_random_unitary_scalar():
    assert abs(random_unitary(1, 7)[0, 0]) == 1.0


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_random_unitary_contract(m, seed):
    Q = random_unitary(m, seed)
    np.testing.assert_array_equal(Q, random_unitary(m, seed))
    assert orthonormality_defect(Q) <= 1e-12


def test_qr_pos_examples():
    Q, R = qr_pos(np.eye(3))
    np.testing.assert_array_equal(Q, np.eye(3))
    np.testing.assert_array_equal(R, np.eye(3))
    Q, R = qr_pos(np.diag([-2.0, 3.0]))
    np.testing.assert_allclose(Q, np.diag([-1.0, 1.0]), atol=1e-15)
    np.testing.assert_allclose(R, np.diag([2.0, 3.0]), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_qr_pos_random(seed):
    A = np.random.default_rng(seed).standard_normal((12, 12))
    Q, R = qr_pos(A)
    assert np.max(np.abs(Q @ R - A)) <= 1e-12
    assert not np.tril(R, -1).any()
    assert np.min(np.diag(R)) >= 0.0


def test_qr_pos_rank_deficient():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    Q, R = qr_pos(A)
    assert np.max(np.abs(Q @ R - A)) <= 1e-12
    assert np.all(np.diag(R) >= 0) and abs(R[1, 1]) < 1e-14


@pytest.mark.parametrize("a", [0.3, 1.0, 2.7])
def test_scalar_constant_operator(a):
    est = dqr_run(lambda n: np.array([[a]]), 1, 1.5, 30.0, seed=3)
    assert est.exponents[0] == pytest.approx(np.log(a) / 1.5, abs=1e-15)


def test_scalar_alternating():
    est = dqr_run(lambda n: np.array([[2.0 if n % 2 == 0 else 0.5]]), 1, 1.0, 20.0)
    assert np.all(est.history[1::2, 0] == 0.0)
    assert est.exponents[0] == 0.0
    assert est.history[0, 0] == pytest.approx(np.log(2))


def test_autonomous_matches_spectrum():
    T = assemble_T(constant_kernel(0.25), 0.0, CollocationMesh(16, 16, 3.0)).entries
    est = dqr_run(lambda n: T, 17, 3.0, 1000.0, seed=0)
    mu = np.max(np.abs(np.linalg.eigvals(T)))
    assert abs(est.dominant - np.log(mu) / 3) <= 5e-3


def test_autonomous_full_spectrum():
    # diagonalizable matrix with known moduli
    rng = np.random.default_rng(1)
    V = rng.standard_normal((4, 4))
    mus = np.array([1.5, 0.9, 0.4, 0.1])
    T = V @ np.diag(mus) @ np.linalg.inv(V)
    est = dqr_run(lambda n: T, 4, 1.0, 3000.0, seed=2)
    np.testing.assert_allclose(est.sorted, np.log(mus), atol=5e-3)


def test_seed_determinism():
    T = assemble_T(constant_kernel(0.4), 0.0, CollocationMesh(8, 8, 3.0)).entries
    a = dqr_run(lambda n: T, 9, 3.0, 90.0, seed=11)
    b = dqr_run(lambda n: T, 9, 3.0, 90.0, seed=11)
    np.testing.assert_array_equal(a.history, b.history)
    c = dqr_run(lambda n: T, 9, 3.0, 90.0, seed=12)
    assert not np.array_equal(a.history, c.history)


def test_orthonormality_preserved():
    rng = np.random.default_rng(5)
    state = DqrState.start(10, 0)
    for _ in range(200):
        state.advance(rng.standard_normal((10, 10)) * 10.0 ** rng.uniform(-3, 3), 1.0)
        assert orthonormality_defect(state.Q) <= 1e-10


def test_history_and_exponent_consistency():
    T = np.diag([2.0, 0.5, 1.0])
    est = dqr_run(lambda n: T, 3, 2.0, 21.0, seed=4)
    assert len(est.history) == 10 and est.t_f == 20.0
    np.testing.assert_array_equal(est.history[-1], est.exponents)
    np.testing.assert_allclose(est.times, 2.0 * np.arange(1, 11))


def test_collapse_gives_minus_inf():
    est = dqr_run(lambda n: np.zeros((3, 3)), 3, 1.0, 5.0)
    assert np.all(est.exponents == -np.inf)


def test_nonfinite_operator():
    def source(n):
        return np.full((2, 2), np.nan) if n == 4 else np.eye(2)

    with pytest.raises(NumericFailure, match="window 4"):
        dqr_run(source, 2, 1.0, 10.0)


def test_tf_shorter_than_window():
    with pytest.raises(InvalidArgument):
        dqr_run(lambda n: np.eye(2), 2, 3.0, 2.0)
