"""Sod shock tube: damped solution next to the exact solution.

Writes sod_profile.csv with the CV-bound traces of the density and the
exact density at the same points, then prints the L1 error and the
overshoot measured against the exact density range.

    python3 demos/sod_profile.py [preset]    # preset: sod (default) or lax
"""

import sys

import numpy as np

from ofsv import io
from ofsv.analysis import cv_bound_traces, l1_distance, overshoot_metric
from ofsv.config import build_simulation, preset

if __name__ == "__main__":
    name = sys.argv[1] if len(sys.argv) > 1 else "sod"
    sim = build_simulation(preset(name))
    final, diag = sim.run()

    def exact(x):
        return sim.problem.exact(x, final.t)

    x, rho = cv_bound_traces(final)
    rho_exact = exact(x.ravel())[0]
    path = io.write_csv(f"{name}_profile.csv", ["x", "rho", "rho_exact"],
                        zip(x.ravel(), rho.ravel(), rho_exact))
    span = np.ptp(exact(np.linspace(sim.mesh.a, sim.mesh.b, 4001))[0])
    over, under = overshoot_metric(final, exact)
    print(f"{name}: t={final.t:.3f} after {diag.steps} steps ({diag.wall_time:.1f}s)")
    print(f"density L1 error   {l1_distance(final, exact):.4f}")
    print(f"overshoot          {100 * over / span:.2f}% of the exact range")
    print(f"undershoot         {100 * under / span:.2f}% of the exact range")
    print(f"profile written to {path}")
