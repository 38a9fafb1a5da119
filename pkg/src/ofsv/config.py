"""Run configurations: JSON sections {law, discretization, mesh, time, boundary, initial, output}.

Defaults
--------
law:            name (required), gamma 1.4, velocity (1,...,1) for advection
discretization: k 2, family "gauss", flux "default" (HLLC for Euler, upwind
                for advection), damping true, integrator "rk4",
                positivity_floor null (off)
mesh:           extent [a, b] or [x0, x1, y0, y1], cells [N] or [Nx, Ny]
time:           t_final 0, cfl 0.2, dt null, dt_exponent 1
boundary:       every side "periodic"; a side is a kind string or
                {"kind": ..., "state": [...]}
initial:        id (required), params {}, mode from the problem,
                quad_points max(k+2, 6)
output:         snapshots [] (t_final is always written), prefix "run"
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

from .basis import SolutionState, average_initial, interpolate_initial
from .geometry import build_cv_layout, build_uniform_mesh_1d, build_uniform_mesh_2d
from .physics import make_law
from .problems import build_problem
from .solver import BoundaryCondition, integrate, make_discretization
from .timeint import DEFAULT_CFL, StepControl

SECTIONS = ("law", "discretization", "mesh", "time", "boundary", "initial", "output")
PRESETS = ("advect1d", "euler2d-smooth", "sod", "lax", "shu-osher", "titarev-toro",
           "riemann2d-a", "riemann2d-b", "shock-vortex", "double-mach")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    raw: Dict[str, Any] = field(default_factory=dict)

    def section(self, name) -> Dict[str, Any]:
        return self.raw.get(name, {}) or {}

    @property
    def dim(self) -> int:
        return len(self.section("mesh").get("cells", [1]))

    @property
    def k(self) -> int:
        return int(self.section("discretization").get("k", 2))

    def with_overrides(self, **sections) -> "RunConfig":
        """Deep-copied config with section keys replaced, e.g. mesh={"cells": [64]}."""
        raw = copy.deepcopy(self.raw)
        for name, values in sections.items():
            raw.setdefault(name, {}).update(copy.deepcopy(values))
        return RunConfig(raw)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2)


def validate(raw: Dict[str, Any]) -> None:
    unknown = set(raw) - set(SECTIONS) - {"name", "description"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for name in ("law", "mesh", "initial"):
        if name not in raw:
            raise ConfigError(f"missing section {name!r}")
    mesh = raw["mesh"]
    cells = mesh.get("cells")
    extent = mesh.get("extent")
    if not cells or any(int(c) < 1 for c in cells):
        raise ConfigError("mesh.cells must list positive counts")
    if extent is None or len(extent) != 2 * len(cells):
        raise ConfigError("mesh.extent must hold two coordinates per axis")
    disc = raw.get("discretization", {})
    if int(disc.get("k", 2)) < 0:
        raise ConfigError("k must be non-negative")
    if "id" not in raw["initial"]:
        raise ConfigError("initial.id is required")


def load_config(source) -> RunConfig:
    """Config from a dict, a JSON file path, or a preset name."""
    if isinstance(source, RunConfig):
        return source
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
    else:
        path = Path(source)
        if path.exists():
            raw = json.loads(path.read_text())
        elif str(source) in PRESETS:
            raw = load_preset_raw(str(source))
        else:
            raise ConfigError(f"no config file or preset named {source!r}")
    try:
        validate(raw)
    except (TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(raw)


def load_preset_raw(name: str) -> Dict[str, Any]:
    text = resources.files("ofsv").joinpath("presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def preset(name: str) -> RunConfig:
    return load_config(load_preset_raw(name))


def _bc(spec) -> BoundaryCondition:
    if isinstance(spec, str):
        return BoundaryCondition(spec)
    state = spec.get("state")
    return BoundaryCondition(spec["kind"], tuple(state) if state is not None else None)


@dataclass
class Simulation:
    config: RunConfig
    law: Any
    mesh: Any
    layout: Any
    disc: Any
    control: StepControl
    integrator: str
    problem: Any

    def initial_state(self) -> SolutionState:
        init = self.config.section("initial")
        mode = init.get("mode", self.problem.mode)
        if mode == "interpolate":
            return interpolate_initial(self.problem.initial, self.mesh, self.layout)
        if mode == "average":
            n = int(init.get("quad_points", max(self.layout.k + 2, 6)))
            return average_initial(self.problem.initial, self.mesh, self.layout, n)
        raise ConfigError(f"unknown initialisation mode {mode!r}")

    def run(self, state: Optional[SolutionState] = None, **kwargs):
        state = state if state is not None else self.initial_state()
        return integrate(state, self.disc, self.control, self.integrator, **kwargs)


def build_simulation(config) -> Simulation:
    cfg = load_config(config)
    law_s = cfg.section("law")
    disc_s = cfg.section("discretization")
    mesh_s = cfg.section("mesh")
    time_s = cfg.section("time")
    dim = cfg.dim
    try:
        law = make_law(law_s["name"], dim, law_s.get("gamma", 1.4), law_s.get("velocity"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad law section: {exc}") from exc
    cells = [int(c) for c in mesh_s["cells"]]
    ext = [float(e) for e in mesh_s["extent"]]
    mesh = build_uniform_mesh_1d(ext[0], ext[1], cells[0]) if dim == 1 else \
        build_uniform_mesh_2d(ext, cells[0], cells[1])
    try:
        layout = build_cv_layout(cfg.k, disc_s.get("family", "gauss"))
    except ValueError as exc:
        raise ConfigError(f"bad discretization section: {exc}") from exc
    sides = ("left", "right") if dim == 1 else ("left", "right", "bottom", "top")
    bnd = cfg.section("boundary")
    try:
        bcs = {s: _bc(bnd.get(s, "periodic")) for s in sides}
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad boundary section: {exc}") from exc
    damping = bool(disc_s.get("damping", True))
    flux = disc_s.get("flux", "default")
    try:
        disc = make_discretization(law, mesh, layout, bcs, flux, damping,
                                   disc_s.get("positivity_floor"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ctrl = StepControl(float(time_s.get("cfl", DEFAULT_CFL)), float(time_s.get("t_final", 0.0)),
                       time_s.get("dt"), float(time_s.get("dt_exponent", 1.0)))
    init = cfg.section("initial")
    try:
        problem = build_problem(init["id"], init.get("params", {}), law)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    integrator = disc_s.get("integrator", "rk4")
    if integrator not in ("rk4", "ssprk3"):
        raise ConfigError(f"unknown integrator {integrator!r}")
    return Simulation(cfg, law, mesh, layout, disc, ctrl, integrator, problem)


def run(config, **kwargs):
    """Build and run a configuration; returns (final SolutionState, Diagnostics)."""
    return build_simulation(config).run(**kwargs)
