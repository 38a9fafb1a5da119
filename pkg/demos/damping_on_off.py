"""What the damping term does on a discontinuity.

Advects a square wave once around a periodic domain with k=3 and compares
the damped and undamped solutions: the extreme CV-bound trace values and the
largest damping coefficient sigma^l at the final time.

    python3 demos/damping_on_off.py
"""

import numpy as np

from ofsv.analysis import cv_bound_traces
from ofsv.basis import average_initial
from ofsv.geometry import build_cv_layout, build_uniform_mesh_1d
from ofsv.physics import LinearAdvection
from ofsv.solver import SV1D, BoundaryCondition, integrate
from ofsv.timeint import StepControl


def square(x):
    return np.where((x > 0.25) & (x < 0.75), 1.0, 0.0)


if __name__ == "__main__":
    mesh = build_uniform_mesh_1d(0.0, 1.0, 40)
    layout = build_cv_layout(3, "gauss")
    for damping in (False, True):
        disc = SV1D(LinearAdvection(), mesh, layout, BoundaryCondition(), BoundaryCondition(),
                    damping=damping)
        final, _ = integrate(average_initial(square, mesh, layout, 8), disc, StepControl(0.2, 1.0))
        _, traces = cv_bound_traces(final)
        sigma = disc.sigma(disc.op.to_modal(final.u)).sigma
        label = "damped  " if damping else "undamped"
        print(f"{label} trace range [{traces.min():+.4f}, {traces.max():+.4f}]"
              f"  max sigma {np.max(np.abs(sigma)):.3e}")
