"""Collocation matrix of the evolution operator over one window of length ``h = tau``.

Block formula::

    T = T1 + T2 (I - U2)^{-1} U1

where ``U1``/``U2`` collocate the integral operator at the step nodes on the
part of the integration window that falls on the old state / on the new
piece, and ``T1``/``T2`` read the new state off the concatenated function.
Row and column ordering is node-major with the ``d`` components inside.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AssemblyFailure
from .mesh import CollocationMesh, cc_rule, default_quad_order

log = logging.getLogger(__name__)

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class EvolutionMatrix:
    entries: np.ndarray
    window: tuple
    mesh: CollocationMesh

    @property
    def m(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def _clip(a, b, support):
    lo, hi = max(a, support[0]), min(b, support[1])
    return (lo, hi) if hi > lo else None


def _collocate(kernel, s, mesh, Q, past):
    """Shared body of U1 (``past=True``) and U2 (``past=False``)."""
    d = kernel.d
    t_nodes = mesh.step_nodes
    n_cols = mesh.M + 1 if past else mesh.N
    out = np.zeros((mesh.N, d, n_cols, d))
    rows, thetas, weights = [], [], []
    for i, ti in enumerate(t_nodes):
        piece = (-mesh.tau, -ti) if past else (-ti, 0.0)
        piece = _clip(*piece, kernel.support)
        if piece is None:
            continue
        x, w = cc_rule(Q, piece)
        rows.append(i)
        thetas.append(x)
        weights.append(w)
    if not rows:
        return out.reshape(mesh.N * d, n_cols * d)
    rows = np.array(rows)
    theta = np.array(thetas)  # (R, Q+1)
    w = np.array(weights)
    ti = t_nodes[rows][:, None]
    C = kernel.eval(s + ti, theta)  # (R, Q+1, d, d)
    u = (ti + theta).ravel()
    B = (mesh.state_basis(u) if past else mesh.step_basis(u)).reshape(theta.shape + (n_cols,))
    out[rows] = np.einsum("rq,rqj,rqab->rajb", w, B, C)
    return out.reshape(mesh.N * d, n_cols * d)


def build_U1(kernel, s, mesh, Q=None):
    """Integral over the old state: ``theta in [-tau, -t_i]`` (dN x d(M+1))."""
    Q = default_quad_order(mesh.M, mesh.N) if Q is None else Q
    return _collocate(kernel, s, mesh, Q, past=True)


def build_U2(kernel, s, mesh, Q=None):
    """Integral over the new piece: ``theta in (-t_i, 0]`` (dN x dN)."""
    Q = default_quad_order(mesh.M, mesh.N) if Q is None else Q
    return _collocate(kernel, s, mesh, Q, past=False)


def build_T2(mesh, d=1):
    """Step interpolant evaluated at ``h + theta_j``; at ``theta = -tau`` this extrapolates to 0."""
    L = mesh.step_basis(mesh.h + mesh.state_nodes)
    return np.kron(L, np.eye(d))


def build_T1(mesh, d=1):
    """Zero for ``h = tau``: the shifted old state only touches ``theta = -tau``,
    and that node is filled from the step polynomial by :func:`build_T2`."""
    m = d * (mesh.M + 1)
    return np.zeros((m, m))


def assemble_T(kernel, s, mesh, Q=None, check=True):
    """Evolution matrix for the window ``[s, s + h]``.

    Raises
    ------
    AssemblyFailure
        If ``I - U2`` is singular or its reciprocal 1-norm condition number
        falls below ``RCOND_MIN``.
    """
    d = kernel.d
    U1 = build_U1(kernel, s, mesh, Q)
    U2 = build_U2(kernel, s, mesh, Q)
    A = np.eye(U2.shape[0]) - U2
    lu, piv, info = scipy.linalg.lapack.dgetrf(A)
    if info > 0:
        raise AssemblyFailure(f"I - U2 is singular on window [{s}, {s + mesh.h}]", rcond=0.0)
    if check:
        rcond, _ = scipy.linalg.lapack.dgecon(lu, np.linalg.norm(A, 1), norm="1")
        if rcond < RCOND_MIN:
            raise AssemblyFailure(
                f"I - U2 ill-conditioned on window [{s}, {s + mesh.h}]: rcond = {rcond:.3e}",
                rcond=rcond,
            )
    X = scipy.linalg.lu_solve((lu, piv), U1)
    T = build_T1(mesh, d) + build_T2(mesh, d) @ X
    if not np.all(np.isfinite(T)):
        raise AssemblyFailure(f"non-finite entries on window [{s}, {s + mesh.h}]")
    return EvolutionMatrix(entries=T, window=(s, s + mesh.h), mesh=mesh)


def legendre_coordinates(T):
    """Matrix of ``T`` in the orthonormal Legendre basis of ``L^2([-tau, 0])``.

    Nodal values of a degree-``M`` polynomial are mapped to its coefficients
    on the normalized Legendre polynomials, so the Frobenius norm of the
    result is the Hilbert-Schmidt norm of the collocation operator restricted
    to polynomials.
    """
    mesh = T.mesh
    d = T.m // (mesh.M + 1)
    x = 2.0 * mesh.state_nodes / mesh.tau + 1.0
    V = np.polynomial.legendre.legvander(x, mesh.M)
    V *= np.sqrt((2 * np.arange(mesh.M + 1) + 1) / mesh.tau)
    V = np.kron(V, np.eye(d))
    return np.linalg.solve(V, T.entries @ V)


def operator_distance(A, B, ord="fro"):
    """Norm of the difference of two evolution matrices built on possibly different meshes.

    Both are taken to Legendre coordinates and the smaller one is padded with
    zeros, i.e. it acts as zero on the Legendre modes it does not resolve.
    """
    La, Lb = legendre_coordinates(A), legendre_coordinates(B)
    n = max(La.shape[0], Lb.shape[0])
    D = np.zeros((n, n))
    D[: La.shape[0], : La.shape[0]] += La
    D[: Lb.shape[0], : Lb.shape[0]] -= Lb
    return float(np.linalg.norm(D, ord))
