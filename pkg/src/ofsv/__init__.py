"""Oscillation-free spectral volume (OFSV) schemes for hyperbolic conservation laws."""

import os as _os

# must precede the first numpy import to reach the BLAS thread pools
if _os.environ.get("OFSV_NUM_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["OFSV_NUM_THREADS"])

from .geometry import (CVLayout, Family, InvalidExtent, Mesh1D, Mesh2D, QuadratureRule,
                       UnsupportedDegree, build_cv_layout, build_uniform_mesh_1d,
                       build_uniform_mesh_2d, gauss_interior_points, gauss_rule,
                       right_radau_interior_points)
from .basis import (ModalPoly, ReconstructionOperator, SolutionState, average_initial,
                    build_reconstruction_operator, damping_moment, evaluate,
                    interpolate_initial, project_truncate)
from .physics import (GAMMA, ConservationLaw, Euler, InvalidState, LinearAdvection,
                      advection_flux, euler_flux, make_law, to_characteristic)
from .numflux import VacuumDetected, get_riemann_flux, hllc, interior_flux, lax_friedrichs, upwind
from .damping import DampingField, damping_rate, sigma_coefficients, vertex_jump
from .timeint import DEFAULT_CFL, REFERENCE_CFL, StepControl, compute_dt, rk4_step, ssprk3_step
from .solver import (SV1D, SV2D, BlowUp, BoundaryCondition, Diagnostics, compute_residual,
                     ghost_state, integrate, make_discretization)
from .analysis import (cell_average_error, convergence_order, convergence_study,
                       dg_equivalence_check, downwind_point_error, exact_riemann_euler,
                       l1_distance, l2_error, overshoot_metric)
from .config import ConfigError, RunConfig, build_simulation, load_config, preset, run

__version__ = "0.1.0"
