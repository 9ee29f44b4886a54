"""Lyapunov exponents of renewal equations via pseudospectral collocation and discrete QR."""

from .dqr import LyapunovEstimate, dqr_run, qr_pos, random_unitary
from .errors import (
    AssemblyFailure,
    CoverageError,
    InvalidArgument,
    NumericFailure,
    RelyapError,
    SolverFailure,
)
from .evolution import EvolutionMatrix, assemble_T, build_T1, build_T2, build_U1, build_U2
from .ivp import Trajectory, solve_re, trajectory_eval
from .mesh import (
    CollocationMesh,
    barycentric_weights,
    cheb_extrema,
    cheb_zeros,
    interp_eval,
    quad_cc,
)
from .model import Kernel, NonlinearRE, constant_kernel, equilibria, linearize, quad_re
from .spectral import CharacteristicProblem, dominant_real_root, le_from_eigs, operator_eigs

__version__ = "0.1.0"
