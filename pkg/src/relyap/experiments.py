"""Experiment orchestration: single runs, gamma sweeps and convergence studies."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dqr import dqr_run
from .errors import InvalidArgument, RelyapError
from .evolution import assemble_T
from .ivp import solve_re
from .mesh import CollocationMesh, default_quad_order
from .model import constant_kernel, equilibria, linearize, quad_re
from .spectral import CharacteristicProblem, dominant_real_root, le_from_eigs, operator_eigs

log = logging.getLogger(__name__)

TAU = 3.0

GAMMA_PRESETS = {
    "default": [{"start": 2.5, "stop": 5.0, "step": 0.01}],
    "island": [
        {"start": 2.5, "stop": 5.0, "step": 0.01},
        {"start": 4.8, "stop": 4.9, "step": 0.001},
    ],
}


class ConfigError(InvalidArgument):
    pass


@dataclass
class ExperimentConfig:
    """Run parameters; `gamma` is a number, a ``{start, stop, step}`` sweep or a list of either."""

    gamma: object = 0.5
    M: int = 16
    N: int = 16
    t_f: float = 1000.0
    r: int = 40
    phi0: float = 0.1
    seed: int = 0
    quad_order: int = None
    transient_skip: float = 0.0
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    @property
    def Q(self):
        return default_quad_order(self.M, self.N) if self.quad_order is None else self.quad_order

    def validate(self):
        if not isinstance(self.M, int) or not isinstance(self.N, int):
            raise ConfigError("M and N must be integers")
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if self.M < max(1, self.N - 1):
            raise ConfigError(f"need M >= N - 1 and M >= 1, got M={self.M}, N={self.N}")
        if not self.t_f >= TAU:
            raise ConfigError(f"t_f must be >= {TAU}, got {self.t_f}")
        if not isinstance(self.r, int) or self.r < 1:
            raise ConfigError(f"r must be a positive integer, got {self.r}")
        if self.quad_order is not None and self.quad_order < 2:
            raise ConfigError(f"quad_order must be >= 2, got {self.quad_order}")
        if self.transient_skip < 0:
            raise ConfigError("transient_skip must be non-negative")
        self.gammas()

    def gammas(self):
        """Sorted, de-duplicated gamma grid."""
        return gamma_grid(self.gamma)

    def is_sweep(self):
        return not isinstance(self.gamma, (int, float))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_json(cls, path, **overrides):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def gamma_grid(value):
    if isinstance(value, bool):
        raise ConfigError("gamma must be numeric")
    if isinstance(value, (int, float)):
        values = [float(value)]
    elif isinstance(value, dict):
        try:
            start, stop, step = float(value["start"]), float(value["stop"]), float(value["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"gamma sweep needs numeric start, stop, step: {value}") from exc
        if not step > 0:
            raise ConfigError("gamma sweep step must be positive")
        if not (0 < start <= 5 and 0 < stop <= 5) or stop < start:
            raise ConfigError(f"gamma sweep bounds must satisfy 0 < start <= stop <= 5: {value}")
        n = int(math.floor((stop - start) / step + 1e-9))
        values = [start + k * step for k in range(n + 1)]
    elif isinstance(value, (list, tuple)):
        values = [g for item in value for g in gamma_grid(item)]
    else:
        raise ConfigError(f"cannot interpret gamma = {value!r}")
    values = sorted({round(g, 10) for g in values})
    if any(not g > 0 for g in values):
        raise ConfigError("gamma must be positive")
    return values


def gamma_seed(seed, gamma):
    """Deterministic per-gamma seed, independent of sweep order."""
    return int(seed) ^ zlib.crc32(f"{gamma:.10g}".encode())


def lyapunov_exponents(gamma, cfg, seed=None, t_f=None, mesh=None):
    """Full pipeline for one gamma: trajectory, linearization, evolution matrices, DQR."""
    t_f = cfg.t_f if t_f is None else t_f
    seed = cfg.seed if seed is None else seed
    model = quad_re(gamma)
    s = float(cfg.transient_skip)
    traj = solve_re(model, cfg.phi0, s + t_f, cfg.r)
    kernel = linearize(model, traj)
    mesh = mesh or CollocationMesh(cfg.M, cfg.N, model.tau)

    def op_source(n):
        return assemble_T(kernel, s + n * mesh.h, mesh, cfg.Q)

    return dqr_run(op_source, model.d * (cfg.M + 1), mesh.h, t_f, seed)


def attracting_equilibrium(gamma, cfg, tol=1e-6):
    """The equilibrium the trajectory from ``phi0`` settles on, or ``None``."""
    s = float(cfg.transient_skip)
    traj = solve_re(quad_re(gamma), cfg.phi0, s + cfg.t_f, cfg.r)
    tail = traj.values[-int(10 * TAU * cfg.r):, 0]
    for xbar in equilibria(gamma).values():
        if np.max(np.abs(tail - xbar)) <= tol:
            return xbar
    return None


def equilibrium_exponent(gamma, xbar, M_ref=64):
    """Dominant exponent of the RE linearized at the constant `xbar`.

    A positive kernel has a real dominant root, found by bisection; otherwise
    the spectrum of a fine evolution matrix is used.
    """
    c = 0.5 * gamma * (1.0 - 2.0 * xbar)
    if c > 0:
        return dominant_real_root(CharacteristicProblem(c), (-20.0, 20.0), 1e-13)
    mesh = CollocationMesh(M_ref, M_ref, TAU)
    T = assemble_T(constant_kernel(c), 0.0, mesh)
    return float(le_from_eigs(operator_eigs(T), TAU)[0])


# --- output helpers -------------------------------------------------------


def _fmt(x):
    return f"{float(x):.16e}" if math.isfinite(x) else ("nan" if math.isnan(x) else f"{x}")


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, np.integer)) else _fmt(v) for v in row])
    return path


def write_trajectory(path, traj):
    cols = [f"x_{i + 1}" for i in range(traj.d)]
    rows = ([t, *x] for t, x in zip(traj.times, traj.values))
    return write_csv(path, ["t", *cols], rows)


def write_history(path, est):
    m = est.history.shape[1]
    rows = ([n + 1, t, *h] for n, (t, h) in enumerate(zip(est.times, est.history)))
    return write_csv(path, ["step", "t", *[f"lambda_{i + 1}" for i in range(m)]], rows)


def write_les(path, est):
    return write_csv(path, ["index", "lambda"], ([i + 1, v] for i, v in enumerate(est.exponents)))


DIAGRAM_SCRIPT = """\
# gnuplot script: two dominant Lyapunov exponents against gamma
set datafile separator ','
set key autotitle columnhead
set xlabel 'gamma'
set ylabel 'Lyapunov exponent'
set grid
set yrange [-0.3:0.3]
set terminal pngcairo size 1000,600
set output '{png}'
plot '{csv}' using 1:2 with linespoints pt 7 ps 0.4 title 'le1', \\
     '{csv}' using 1:3 with linespoints pt 7 ps 0.4 title 'le2', \\
     0 with lines lc rgb 'black' notitle
"""


# --- experiments ----------------------------------------------------------


def run_lyapunov(cfg, dump_matrices=0):
    """Single gamma run; writes ``les.csv`` and ``history.csv`` to ``cfg.output_dir``."""
    if cfg.is_sweep():
        raise ConfigError("lyapunov expects a single gamma; use diagram for sweeps")
    gamma = float(cfg.gamma)
    out = Path(cfg.output_dir)
    est = lyapunov_exponents(gamma, cfg)
    write_les(out / "les.csv", est)
    write_history(out / "history.csv", est)
    if dump_matrices:
        _dump_matrices(gamma, cfg, out / "matrices", dump_matrices)
    return est


def _dump_matrices(gamma, cfg, folder, count):
    model = quad_re(gamma)
    s = float(cfg.transient_skip)
    traj = solve_re(model, cfg.phi0, s + count * TAU, cfg.r)
    kernel = linearize(model, traj)
    mesh = CollocationMesh(cfg.M, cfg.N, model.tau)
    m = cfg.M + 1
    for n in range(count):
        T = assemble_T(kernel, s + n * TAU, mesh, cfg.Q).entries
        write_csv(folder / f"T_{n:05d}.csv", [f"c{j + 1}" for j in range(m)], T)


def _diagram_point(args):
    gamma, cfg = args
    m = cfg.M + 1
    try:
        est = lyapunov_exponents(gamma, cfg, seed=gamma_seed(cfg.seed, gamma))
        return gamma, est.sorted
    except RelyapError as exc:
        log.warning("gamma = %g failed: %s", gamma, exc)
        return gamma, np.full(m, np.nan)


def run_diagram(cfg, workers=None, write=True):
    """Sweep gamma; returns ``(gammas, exponents)`` with exponents sorted descending per row.

    Writes ``diagram.csv`` and the gnuplot script ``diagram.gp`` when `write`.
    """
    gammas = cfg.gammas()
    workers = workers or os.cpu_count() or 1
    jobs = [(g, cfg) for g in gammas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_diagram_point, jobs))
    else:
        results = [_diagram_point(j) for j in jobs]
    les = np.array([r[1] for r in results])
    if write:
        out = Path(cfg.output_dir)
        header = ["gamma", *[f"le{i + 1}" for i in range(les.shape[1])]]
        write_csv(out / "diagram.csv", header, ([g, *row] for g, row in zip(gammas, les)))
        (out / "diagram.gp").write_text(DIAGRAM_SCRIPT.format(csv="diagram.csv", png="diagram.png"))
    return np.array(gammas), les


TF_VALUES = (125.0, 250.0, 500.0, 1000.0)
MN_VALUES = (8, 12, 16, 20)


def run_convergence(cfg, mode, values=None, write=True):
    """Error of the dominant exponent against `t_f` (``mode="tf"``) or ``M = N`` (``"MN"``).

    The reference is the characteristic-root/spectral value when the
    trajectory settles on an equilibrium, else the run with the largest
    parameter value.

    Returns
    -------
    list of dict
        Rows with keys ``param``, ``lambda``, ``reference``, ``error``.
    """
    if cfg.is_sweep():
        raise ConfigError("converge expects a single gamma")
    gamma = float(cfg.gamma)
    if mode == "tf":
        values = sorted(values or TF_VALUES)
        # one run to the largest t_f; shorter horizons are prefixes of its history
        est = lyapunov_exponents(gamma, cfg, t_f=max(values))
        lams = [float(np.max(est.history[int(math.floor(tf / TAU + 1e-12)) - 1])) for tf in values]
        ref_cfg = cfg.replace(t_f=max(values))
    elif mode == "MN":
        values = sorted(values or MN_VALUES)
        lams = [lyapunov_exponents(gamma, cfg.replace(M=v, N=v)).dominant for v in values]
        ref_cfg = cfg
    else:
        raise ConfigError(f"mode must be 'tf' or 'MN', got {mode!r}")
    xbar = attracting_equilibrium(gamma, ref_cfg)
    reference = equilibrium_exponent(gamma, xbar) if xbar is not None else lams[-1]
    rows = [
        {"param": v, "lambda": lam, "reference": reference, "error": abs(lam - reference)}
        for v, lam in zip(values, lams)
    ]
    if write:
        write_csv(
            Path(cfg.output_dir) / f"convergence_{mode}.csv",
            [mode, "lambda", "reference", "error"],
            ([r["param"], r["lambda"], r["reference"], r["error"]] for r in rows),
        )
    return rows


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
