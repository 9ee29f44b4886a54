"""Chebyshev meshes, barycentric Lagrange interpolation and Clenshaw-Curtis quadrature.

All node arrays follow the ``cos`` ordering, i.e. they are decreasing: the
first node is the right endpoint of the interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument


def _check_interval(interval):
    a, b = map(float, interval)
    if not a < b:
        raise InvalidArgument(f"empty interval [{a}, {b}]")
    return a, b


def _to_interval(x, a, b):
    y = 0.5 * (b - a) * x + 0.5 * (a + b)
    # endpoints must land exactly: kernels are cut off at closed supports
    y[x == 1.0] = b
    y[x == -1.0] = a
    return y


def cheb_extrema(M, interval=(-1.0, 1.0)):
    """Chebyshev type II points ``cos(j pi / M)``, ``j = 0..M``, mapped to `interval`."""
    if M < 1:
        raise InvalidArgument(f"M must be >= 1, got {M}")
    a, b = _check_interval(interval)
    x = np.cos(np.pi * np.arange(M + 1) / M)
    # cos() does not hit 0 and -1 exactly
    x[0], x[-1] = 1.0, -1.0
    if M % 2 == 0:
        x[M // 2] = 0.0
    return _to_interval(x, a, b)


def cheb_zeros(N, interval=(-1.0, 1.0)):
    """Chebyshev type I points ``cos((2i - 1) pi / (2N))``, ``i = 1..N``, mapped to `interval`."""
    if N < 1:
        raise InvalidArgument(f"N must be >= 1, got {N}")
    a, b = _check_interval(interval)
    x = np.cos(np.pi * (2 * np.arange(1, N + 1) - 1) / (2 * N))
    if N % 2 == 1:
        x[N // 2] = 0.0
    return _to_interval(x, a, b)


def barycentric_weights(nodes):
    """Barycentric weights ``w_j = 1 / prod_{k != j} (x_j - x_k)``.

    The weights are rescaled so that the largest has unit modulus; the
    second-kind barycentric formula is invariant under a common factor.
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgument("nodes must be a non-empty 1-d array")
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise InvalidArgument("nodes must be pairwise distinct")
    # scale differences by the interval length to keep the products in range
    scale = np.ptp(x) / 4.0 if x.size > 1 else 1.0
    w = 1.0 / np.prod(diff / scale, axis=1)
    return w / np.max(np.abs(w))


def interp_matrix(nodes, weights, t):
    """Matrix ``L`` with ``L[p, j] = l_j(t_p)``, the Lagrange basis at points `t`.

    Points that coincide with a node get the corresponding unit row, so the
    stored value is returned exactly.
    """
    x = np.asarray(nodes, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    diff = t[:, None] - x[None, :]
    hit = diff == 0.0
    rows = hit.any(axis=1)
    diff[hit] = 1.0
    L = weights / diff
    L /= L.sum(axis=1, keepdims=True)
    if rows.any():
        L[rows] = hit[rows].astype(float)
    return L


def interp_eval(nodes, weights, values, t):
    """Evaluate the barycentric interpolant of `values` at `t` (scalar or array)."""
    values = np.asarray(values, dtype=float)
    scalar = np.ndim(t) == 0
    out = interp_matrix(nodes, weights, t) @ values
    return out[0] if scalar else out


@lru_cache(maxsize=64)
def _cc_rule(Q):
    # Trefethen, Spectral Methods in MATLAB, clencurt.m
    theta = np.pi * np.arange(Q + 1) / Q
    x = np.cos(theta)
    w = np.zeros(Q + 1)
    v = np.ones(Q - 1)
    ii = np.arange(1, Q)
    if Q % 2 == 0:
        w[0] = w[Q] = 1.0 / (Q * Q - 1)
        for k in range(1, Q // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(Q * theta[ii]) / (Q * Q - 1)
    else:
        w[0] = w[Q] = 1.0 / (Q * Q)
        for k in range(1, (Q - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2.0 * v / Q
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def cc_rule(Q, interval=(-1.0, 1.0)):
    """Nodes and weights of the ``Q + 1`` point Clenshaw-Curtis rule on `interval`."""
    if Q < 2:
        raise InvalidArgument(f"Q must be >= 2, got {Q}")
    a, b = map(float, interval)
    x, w = _cc_rule(int(Q))
    return _to_interval(x, a, b), 0.5 * (b - a) * w


def quad_cc(f, interval, Q):
    """Clenshaw-Curtis approximation of the integral of vectorized `f` over `interval`."""
    a, b = _check_interval(interval)
    x, w = cc_rule(Q, (a, b))
    return float(w @ np.asarray(f(x), dtype=float))


def default_quad_order(M, N):
    return 2 * max(M, N) + 8


@dataclass(frozen=True)
class CollocationMesh:
    """State nodes on ``[-tau, 0]`` (type II) and step nodes on ``[0, h]`` (type I)."""

    M: int
    N: int
    tau: float
    h: float = None
    state_nodes: np.ndarray = field(init=False, repr=False)
    step_nodes: np.ndarray = field(init=False, repr=False)
    state_bary_weights: np.ndarray = field(init=False, repr=False)
    step_bary_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.tau <= 0:
            raise InvalidArgument(f"tau must be positive, got {self.tau}")
        if self.h is None:
            object.__setattr__(self, "h", float(self.tau))
        if self.h != self.tau:
            raise InvalidArgument("only h == tau is supported")
        arrays = {
            "state_nodes": cheb_extrema(self.M, (-self.tau, 0.0)),
            "step_nodes": cheb_zeros(self.N, (0.0, self.h)),
        }
        arrays["state_bary_weights"] = barycentric_weights(arrays["state_nodes"])
        arrays["step_bary_weights"] = barycentric_weights(arrays["step_nodes"])
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def state_basis(self, t):
        """Lagrange basis of the state nodes evaluated at `t`."""
        return interp_matrix(self.state_nodes, self.state_bary_weights, t)

    def step_basis(self, t):
        return interp_matrix(self.step_nodes, self.step_bary_weights, t)
