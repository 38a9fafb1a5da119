"""Meshes, control-volume layouts and quadrature on the reference interval [-1, 1]."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

NEWTON_TOL = 1e-15
MAX_QUAD_POINTS = 16


class UnsupportedDegree(ValueError):
    pass


class InvalidExtent(ValueError):
    pass


class Family(str, enum.Enum):
    GAUSS = "gauss"
    RIGHT_RADAU = "radau"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "_")
        aliases = {
            "gauss": cls.GAUSS, "gauss_legendre": cls.GAUSS, "lsv": cls.GAUSS,
            "radau": cls.RIGHT_RADAU, "right_radau": cls.RIGHT_RADAU, "rrsv": cls.RIGHT_RADAU,
        }
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown CV family {value!r}") from None


def legendre_and_derivative(n, x):
    """Values of L_n and L_n' at ``x`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if n == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for m in range(1, n):
        p0, p1 = p1, ((2 * m + 1) * x * p1 - m * p0) / (m + 1)
    # derivative from L_n' (x^2 - 1) = n (x L_n - L_{n-1}); safe away from +-1
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p1 - p0) / (x * x - 1.0)
    edge = np.isclose(np.abs(x), 1.0, rtol=0.0, atol=1e-14)
    if np.any(edge):
        dp = np.where(edge, np.sign(x) ** (n + 1) * n * (n + 1) / 2.0, dp)
    return p1, dp


def _newton(f, x0, maxiter=100):
    x = np.array(x0, dtype=float)
    for _ in range(maxiter):
        val, der = f(x)
        dx = val / der
        x -= dx
        if np.max(np.abs(dx)) <= NEWTON_TOL:
            break
    # one polishing step after the stopping criterion
    val, der = f(x)
    return x - val / der


def gauss_interior_points(k: int) -> np.ndarray:
    """Roots of the degree-k Legendre polynomial, ascending."""
    if k < 1:
        raise UnsupportedDegree("Gauss subdivision needs k >= 1")
    guess = -np.cos(np.pi * (np.arange(1, k + 1) - 0.25) / (k + 0.5))
    x = _newton(lambda t: legendre_and_derivative(k, t), guess)
    return np.sort(x)


def _radau_poly(k):
    def f(t):
        a, da = legendre_and_derivative(k + 1, t)
        b, db = legendre_and_derivative(k, t)
        return a - b, da - db
    return f


def right_radau_interior_points(k: int) -> np.ndarray:
    """The k roots of L_{k+1} - L_k lying in (-1, 1), ascending."""
    if k < 1:
        raise UnsupportedDegree("right-Radau subdivision needs k >= 1")
    # mirrored Chebyshev-Gauss-Radau guesses, dropping the node at +1
    guess = np.cos(2.0 * np.pi * np.arange(1, k + 1) / (2 * k + 1))
    x = _newton(_radau_poly(k), guess)
    return np.sort(x)


def right_radau_rule(k: int):
    """(k+1)-point right-Radau rule: interior Radau points plus +1.

    Weights come from moment matching against Legendre polynomials, so the
    rule integrates polynomials of degree 2k exactly.
    """
    nodes = np.append(right_radau_interior_points(k), 1.0)
    vand = npleg.legvander(nodes, k).T
    moments = np.zeros(k + 1)
    moments[0] = 2.0
    weights = np.linalg.solve(vand, moments)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    def mapped(self, a: float, b: float):
        """Nodes and weights transplanted to the interval [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights

    def integrate(self, f, a=-1.0, b=1.0):
        x, w = self.mapped(a, b)
        return np.sum(w * f(x))


def gauss_rule(n: int) -> QuadratureRule:
    if not 1 <= n <= MAX_QUAD_POINTS:
        raise UnsupportedDegree(f"Gauss rule with {n} points not supported (1..{MAX_QUAD_POINTS})")
    x = gauss_interior_points(n)
    _, dp = legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    return QuadratureRule(x, w)


@dataclass(frozen=True)
class CVLayout:
    """Subdivision of the reference SV [-1, 1] into k+1 control volumes."""

    k: int
    family: Family
    interior_points: np.ndarray
    cv_bounds: np.ndarray = field(repr=False)

    @property
    def cv_widths(self) -> np.ndarray:
        return np.diff(self.cv_bounds)

    @property
    def n_cv(self) -> int:
        return self.k + 1

    def physical_bounds(self, left: float, right: float) -> np.ndarray:
        return left + 0.5 * (right - left) * (self.cv_bounds + 1.0)


def build_cv_layout(k: int, family="gauss") -> CVLayout:
    family = Family.parse(family)
    if k < 0:
        raise UnsupportedDegree("k must be non-negative")
    if k == 0:
        interior = np.zeros(0)
    elif family is Family.GAUSS:
        interior = gauss_interior_points(k)
    else:
        interior = right_radau_interior_points(k)
    bounds = np.concatenate(([-1.0], interior, [1.0]))
    return CVLayout(k, family, interior, bounds)


@dataclass(frozen=True)
class Mesh1D:
    a: float
    b: float
    edges: np.ndarray

    @property
    def n(self) -> int:
        return len(self.edges) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def h(self) -> float:
        return float(np.max(self.widths))

    def cv_edges(self, layout: CVLayout) -> np.ndarray:
        """Physical CV bounds, shape (N, k+2)."""
        return self.edges[:-1, None] + 0.5 * self.widths[:, None] * (layout.cv_bounds + 1.0)


def build_uniform_mesh_1d(a: float, b: float, n: int) -> Mesh1D:
    if not b > a:
        raise InvalidExtent(f"empty interval [{a}, {b}]")
    if n < 1:
        raise InvalidExtent("need at least one SV")
    edges = a + (b - a) * np.arange(n + 1) / n
    edges[-1] = b
    return Mesh1D(float(a), float(b), edges)


@dataclass(frozen=True)
class Mesh2D:
    x: Mesh1D
    y: Mesh1D

    @property
    def shape(self):
        return (self.x.n, self.y.n)

    @property
    def h(self) -> float:
        """Largest SV side length."""
        return float(max(self.x.h, self.y.h))

    def sv_sizes(self) -> np.ndarray:
        """Per-SV length scale h_tau = longest side, shape (Nx, Ny)."""
        return np.maximum(self.x.widths[:, None], self.y.widths[None, :])


def build_uniform_mesh_2d(extent, nx: int, ny: int) -> Mesh2D:
    x0, x1, y0, y1 = extent
    return Mesh2D(build_uniform_mesh_1d(x0, x1, nx), build_uniform_mesh_1d(y0, y1, ny))
