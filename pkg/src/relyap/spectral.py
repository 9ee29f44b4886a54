"""Reference values: eigenvalues of evolution matrices and real characteristic roots.

For an autonomous scalar kernel equal to ``c`` on ``[a, b]`` the exponential
``exp(lam t)`` solves the RE iff ``1 = c * int_a^b exp(lam theta) dtheta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericFailure


@dataclass(frozen=True)
class CharacteristicProblem:
    c: float
    support: tuple = (-3.0, -1.0)

    def function(self, lam):
        """``c * int_support exp(lam theta) dtheta``, continuous at ``lam = 0``."""
        a, b = self.support
        lam = float(lam)
        if abs(lam) < 1e-8:
            # second-order Taylor expansion around 0
            return self.c * ((b - a) + lam * (b * b - a * a) / 2.0)
        return self.c * (math.exp(lam * b) - math.exp(lam * a)) / lam


def dominant_real_root(problem, bracket=(-10.0, 10.0), tol=1e-12):
    """Bisection root of ``function(lam) = 1`` in `bracket`, or ``None`` without a sign change."""
    lo, hi = map(float, bracket)
    if not lo < hi or not tol > 0:
        raise InvalidArgument(f"invalid bracket {bracket} or tolerance {tol}")
    g = lambda lam: problem.function(lam) - 1.0  # noqa: E731
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if np.sign(g_lo) == np.sign(g_hi):
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if np.sign(g_mid) == np.sign(g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def operator_eigs(T):
    """All eigenvalues of a dense real evolution matrix."""
    A = np.asarray(getattr(T, "entries", T), dtype=float)
    if not np.all(np.isfinite(A)):
        raise NumericFailure("non-finite matrix entries")
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"eigensolver failed: {exc}") from exc


def le_from_eigs(eigs, h):
    """``log|mu| / h`` sorted descending; zero multipliers give ``-inf``."""
    if not h > 0:
        raise InvalidArgument(f"h must be positive, got {h}")
    with np.errstate(divide="ignore"):
        le = np.log(np.abs(np.asarray(eigs))) / h
    return np.sort(le)[::-1]
