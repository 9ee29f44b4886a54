"""Composite trapezoidal integration of a nonlinear RE on a uniform grid.

The RE is treated as a Volterra equation of the second kind on
``[t_start, t_end]``: the part of the integral that falls on the initial
function is integrated over the history samples, the rest over the computed
solution. The solution may jump at ``t_start`` (the history is arbitrary),
so the two pieces are integrated separately and ``values[0]`` holds the
right limit ``x(t_start+)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CoverageError, InvalidArgument, SolverFailure

log = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAXITER = 100


def _history_callable(phi, d):
    if callable(phi):
        return phi
    const = np.broadcast_to(np.asarray(phi, dtype=float), (d,)).copy()

    def history(t):
        return np.broadcast_to(const, np.shape(t) + (d,))

    return history


@dataclass(frozen=True)
class Trajectory:
    """Solution samples on the grid ``t_start + k * delta``, ``k = 0..K``.

    Off-grid values are piecewise linear; times before `t_start` are taken
    from `history` (``[t_start - tau, t_start)``).
    """

    delta: float
    t_start: float
    tau: float
    values: np.ndarray
    history: Callable

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def times(self):
        return self.t_start + self.delta * np.arange(len(self.values))

    @property
    def t_end(self):
        return self.t_start + self.delta * (len(self.values) - 1)

    def eval(self, t):
        """Values at times `t`, shape ``np.shape(t) + (d,)``."""
        t = np.asarray(t, dtype=float)
        eps = 1e-9 * self.delta
        if t.size and (t.min() < self.t_start - self.tau - eps or t.max() > self.t_end + eps):
            raise CoverageError(
                f"trajectory covers [{self.t_start - self.tau}, {self.t_end}], "
                f"queried [{t.min()}, {t.max()}]"
            )
        out = np.empty(t.shape + (self.d,))
        past = t < self.t_start
        if past.any():
            out[past] = self.history(t[past])
        now = ~past
        if now.any():
            s = (t[now] - self.t_start) / self.delta
            k = np.clip(np.floor(s).astype(int), 0, len(self.values) - 2)
            frac = (s - k)[:, None]
            lo, hi = self.values[k], self.values[np.minimum(k + 1, len(self.values) - 1)]
            res = lo + frac * (hi - lo)
            # grid hits return the stored sample bit for bit
            exact = frac[:, 0] == 0.0
            res[exact] = lo[exact]
            out[now] = res
        return out


def trajectory_eval(traj, t):
    return traj.eval(t)


def _lag_index(theta, r):
    k = theta * r
    if abs(k - round(k)) > 1e-9:
        raise InvalidArgument(f"r * theta = {k} is not an integer for lag endpoint {theta}")
    return int(round(-k))


def _trap_weights(n, delta):
    # composite trapezoid on n samples; a single sample spans zero length
    w = np.full(n, delta)
    if n == 1:
        return np.zeros(1)
    w[0] = w[-1] = 0.5 * delta
    return w


def solve_re(model, phi, t_end, r=40, t_start=0.0):
    """Integrate `model` from the initial function `phi` up to `t_end`.

    Parameters
    ----------
    model : NonlinearRE
    phi : float, array of shape (d,), or callable
        Initial function on ``[t_start - tau, t_start]``.
    t_end : float
        Last time; rounded up to the grid.
    r : int
        Grid pieces per unit time.

    Returns
    -------
    Trajectory
    """
    if not t_end > t_start:
        raise InvalidArgument(f"t_end must exceed t_start, got {t_end}")
    if r < 1:
        raise InvalidArgument(f"r must be >= 1, got {r}")
    d = model.d
    delta = 1.0 / r
    lo, hi = model.lag_support
    i_lo, i_hi = _lag_index(lo, r), _lag_index(hi, r)
    if abs(model.tau * r - round(model.tau * r)) > 1e-9:
        raise InvalidArgument(f"r * tau = {model.tau * r} is not an integer")
    history = _history_callable(phi, d)

    K = int(np.ceil((t_end - t_start) * r - 1e-9))
    x = np.empty((K + 1, d))
    # history samples at grid offsets -i_lo..0, left limit at t_start
    hist_j = np.arange(-i_lo, 1)
    hist = np.asarray(history(t_start + hist_j * delta), dtype=float).reshape(-1, d)
    thetas = -delta * np.arange(i_lo, i_hi - 1, -1)  # lo .. hi, ascending

    for k in range(K + 1):
        tk = t_start + k * delta
        j_a, j_b = k - i_lo, k - i_hi
        acc = np.zeros(d)
        if j_a < 0:
            jh = np.arange(j_a, min(j_b, 0) + 1)
            w = _trap_weights(len(jh), delta)
            if w.any():
                vals = model.integrand(np.full(len(jh), tk), thetas[: len(jh)], hist[jh + i_lo])
                acc += w @ vals
        implicit = i_hi == 0 and k > 0
        if j_b > 0:
            js = np.arange(max(j_a, 0), j_b + 1)
            w = _trap_weights(len(js), delta)
            th = thetas[len(thetas) - len(js):]
            if implicit:
                # the last sample is the unknown x_k itself
                known = js[:-1]
                acc += w[:-1] @ model.integrand(np.full(len(known), tk), th[:-1], x[known])
                x[k] = _fixed_point(model, tk, th[-1], w[-1], acc, x[k - 1])
                continue
            acc += w @ model.integrand(np.full(len(js), tk), th, x[js])
        x[k] = acc

    return Trajectory(delta=delta, t_start=float(t_start), tau=float(model.tau), values=x, history=history)


def _fixed_point(model, tk, theta, weight, known, guess):
    xk = np.array(guess, dtype=float)
    for _ in range(FIXED_POINT_MAXITER):
        new = known + weight * model.integrand(np.array([tk]), np.array([theta]), xk[None, :])[0]
        if np.max(np.abs(new - xk)) <= FIXED_POINT_TOL:
            return new
        xk = new
    raise SolverFailure(f"fixed-point iteration did not converge at t = {tk}")
