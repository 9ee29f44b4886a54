"""Discrete QR iteration for Lyapunov exponents of a sequence of matrices."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NumericFailure

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-10


def qr_pos(A):
    """QR factorization with a non-negative diagonal in ``R``.

    Zero diagonal entries (rank deficiency) are left at zero; their
    logarithm is ``-inf`` downstream.
    """
    A = np.asarray(A, dtype=float)
    Q, R = np.linalg.qr(A)
    signs = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def random_unitary(m, seed):
    """Orthonormal ``m x m`` matrix from the QR factor of a seeded Gaussian matrix."""
    if m < 1:
        raise InvalidArgument(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    Q, _ = qr_pos(rng.standard_normal((m, m)))
    return Q


def orthonormality_defect(Q):
    return float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1]))))


@dataclass
class DqrState:
    Q: np.ndarray
    log_sums: np.ndarray
    elapsed: float = 0.0
    steps: int = 0
    seed: int = 0
    reorthonormalizations: int = 0

    @classmethod
    def start(cls, m, seed):
        return cls(Q=random_unitary(m, seed), log_sums=np.zeros(m), seed=seed)

    def advance(self, T, h):
        """One step ``Q_{n+1} R_n = T_n Q_n``; returns ``diag(R_n)``."""
        Q, R = qr_pos(T @ self.Q)
        if orthonormality_defect(Q) > ORTHO_TOL:
            Q, _ = qr_pos(Q)
            self.reorthonormalizations += 1
        diag = np.diag(R).copy()
        with np.errstate(divide="ignore"):
            self.log_sums += np.log(diag)
        self.Q = Q
        self.steps += 1
        self.elapsed += h
        return diag

    @property
    def exponents(self):
        return self.log_sums / self.elapsed


@dataclass
class LyapunovEstimate:
    """Finite-time exponents in QR-diagonal order and their running history.

    ``history[n]`` holds the estimates after ``n + 1`` steps, at time
    ``times[n]`` measured from the start of the iteration.
    """

    exponents: np.ndarray
    history: np.ndarray
    times: np.ndarray
    t_f: float
    reorthonormalizations: int = 0
    seed: int = 0

    @property
    def sorted(self):
        return np.sort(self.exponents)[::-1]

    @property
    def dominant(self):
        return float(np.max(self.exponents))


def dqr_run(op_source, m, tau, t_f, seed=0):
    """Run the discrete QR method over ``floor(t_f / tau)`` windows of length `tau`.

    Parameters
    ----------
    op_source : callable
        ``op_source(n)`` returns the ``m x m`` matrix (or an object exposing
        ``.entries``) of the ``n``-th window.
    m : int
    tau : float
    t_f : float
        Final time; must be at least `tau`.
    seed : int
        Seed of the random initial orthonormal frame.

    Returns
    -------
    LyapunovEstimate
    """
    if not t_f >= tau:
        raise InvalidArgument(f"t_f = {t_f} must be >= tau = {tau}")
    n_steps = int(np.floor(t_f / tau + 1e-12))
    state = DqrState.start(m, seed)
    history = np.empty((n_steps, m))
    for n in range(n_steps):
        T = op_source(n)
        T = np.asarray(getattr(T, "entries", T), dtype=float)
        if T.shape != (m, m):
            raise InvalidArgument(f"window {n}: expected {m}x{m} matrix, got {T.shape}")
        if not np.all(np.isfinite(T)):
            raise NumericFailure(f"non-finite operator entries in window {n}")
        state.advance(T, tau)
        history[n] = state.exponents
    if state.reorthonormalizations:
        log.info("re-orthonormalized %d times", state.reorthonormalizations)
    return LyapunovEstimate(
        exponents=state.exponents.copy(),
        history=history,
        times=tau * np.arange(1, n_steps + 1),
        t_f=n_steps * tau,
        reorthonormalizations=state.reorthonormalizations,
        seed=seed,
    )
