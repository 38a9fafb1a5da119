"""CSV and VTK output round trips."""

import numpy as np
import pytest

from ofsv import io
from ofsv.basis import interpolate_initial
from ofsv.config import build_simulation, preset
from ofsv.geometry import build_cv_layout, build_uniform_mesh_1d
from ofsv.physics import LinearAdvection


@pytest.mark.parametrize("v", [np.pi, -1e-300, 1 / 3, 12345.678901234567])
def test_fmt_round_trips_exactly(v):
    s = io.fmt(v)
    assert float(s) == v
    assert len(s.split("e")[0].replace("-", "").replace(".", "")) == 17


def test_fmt_special():
    assert io.fmt(None) == "" and io.fmt(7) == "7" and io.fmt(np.int64(3)) == "3"


def test_csv_round_trip(tmp_path, rng):
    data = rng.normal(size=(5, 3))
    rows = [list(r) for r in data]
    rows[2][1] = None
    io.write_csv(tmp_path / "a.csv", ["a", "b", "c"], rows)
    header, back = io.read_csv(tmp_path / "a.csv")
    assert header == ["a", "b", "c"]
    assert np.isnan(back[2, 1])
    mask = ~np.isnan(back)
    np.testing.assert_array_equal(back[mask], data[mask])


def test_profile_csv(tmp_path):
    mesh = build_uniform_mesh_1d(0.0, 1.0, 4)
    state = interpolate_initial(np.sin, mesh, build_cv_layout(2, "gauss"))
    path = io.write_snapshot(tmp_path / "s", state, LinearAdvection(), 3)
    assert path.name == "s_0003.csv"
    header, back = io.read_csv(path)
    assert header == ["x", "u"]
    np.testing.assert_array_equal(back[:, 0], state.cv_centers())
    np.testing.assert_array_equal(back[:, 1], state.u[0].ravel())


def test_vtk_round_trip(tmp_path):
    sim = build_simulation(preset("riemann2d-a").with_overrides(mesh={"cells": [4, 3]}))
    state = sim.initial_state()
    path = io.write_snapshot(tmp_path / "r", state, sim.law, 0)
    assert path.suffix == ".vtk"
    dims, fields = io.read_vtk(path)
    W = io.output_fields(state, sim.law)
    assert dims == (W.shape[1], W.shape[2])
    assert list(fields) == ["rho", "u", "v", "p"]
    for name, f in zip(fields, W):
        np.testing.assert_array_equal(fields[name], f.T)
