"""Renewal-equation models: linear kernels and the quadratic nonlinear RE."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class Kernel:
    """Linear RE kernel ``C(t, theta)``, zero for ``theta`` outside `support`.

    `func` receives broadcastable arrays ``t`` and ``theta`` (already
    restricted to the closed support) and returns an array of shape
    ``broadcast(t, theta).shape + (d, d)``.
    """

    d: int
    tau: float
    support: tuple
    func: Callable

    def __post_init__(self):
        lo, hi = self.support
        if not -self.tau <= lo <= hi <= 0.0:
            raise InvalidArgument(f"support {self.support} not inside [-tau, 0]")

    def eval(self, t, theta):
        t, theta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
        lo, hi = self.support
        inside = (theta >= lo) & (theta <= hi)
        out = np.zeros(t.shape + (self.d, self.d))
        if inside.any():
            out[inside] = self.func(t[inside], theta[inside])
        return out


def constant_kernel(c, support=(-3.0, -1.0), tau=3.0):
    """Autonomous scalar kernel equal to `c` on `support`."""
    c = float(c)

    def func(t, theta):
        return np.full(t.shape + (1, 1), c)

    return Kernel(d=1, tau=tau, support=tuple(map(float, support)), func=func)


@dataclass(frozen=True)
class NonlinearRE:
    """``x(t) = int_{lag_support} integrand(t, theta, x(t + theta)) dtheta``.

    `integrand` maps arrays ``t, theta`` of shape ``(k,)`` and states of shape
    ``(k, d)`` to ``(k, d)``; `jacobian_integrand` returns ``(k, d, d)``.
    """

    d: int
    tau: float
    lag_support: tuple
    integrand: Callable
    jacobian_integrand: Callable
    gamma: float = None


def quad_re(gamma):
    """``x(t) = gamma/2 * int_{-3}^{-1} x(t+theta) (1 - x(t+theta)) dtheta``."""
    gamma = float(gamma)
    if not gamma > 0:
        raise InvalidArgument(f"gamma must be positive, got {gamma}")
    lo, hi = -3.0, -1.0
    half = 0.5 * gamma

    def on_support(theta, val):
        theta = np.asarray(theta)
        inside = (theta >= lo) & (theta <= hi)
        return np.where(inside.reshape(inside.shape + (1,) * (val.ndim - theta.ndim)), val, 0.0)

    def integrand(t, theta, x):
        x = np.asarray(x, dtype=float)
        return on_support(theta, half * x * (1.0 - x))

    def jacobian_integrand(t, theta, x):
        x = np.asarray(x, dtype=float)
        return on_support(theta, (half * (1.0 - 2.0 * x))[..., None])

    return NonlinearRE(
        d=1,
        tau=3.0,
        lag_support=(lo, hi),
        integrand=integrand,
        jacobian_integrand=jacobian_integrand,
        gamma=gamma,
    )


def equilibria(gamma):
    """Constant solutions of the quadratic RE: ``x = gamma x (1 - x)``."""
    return {"trivial": 0.0, "nontrivial": 1.0 - 1.0 / float(gamma)}


def linearize(model, xbar):
    """Kernel of the RE linearized along `xbar`.

    `xbar` is either a constant (equilibrium) or any object with an
    ``eval(t)`` method returning shape ``t.shape + (d,)``, e.g. a
    :class:`~relyap.ivp.Trajectory`. Coverage errors from it propagate.
    """
    d = model.d
    if np.ndim(xbar) == 0 and not hasattr(xbar, "eval"):
        const = np.full(d, float(xbar))

        def state(u):
            return np.broadcast_to(const, np.shape(u) + (d,))
    elif not hasattr(xbar, "eval"):
        const = np.asarray(xbar, dtype=float).reshape(d)

        def state(u):
            return np.broadcast_to(const, np.shape(u) + (d,))
    else:
        state = xbar.eval

    def func(t, theta):
        return model.jacobian_integrand(t, theta, state(t + theta))

    return Kernel(d=d, tau=model.tau, support=tuple(model.lag_support), func=func)
