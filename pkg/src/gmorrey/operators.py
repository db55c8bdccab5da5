"""Maximal, fractional maximal, Riesz potential and dual Hardy operators."""

from __future__ import annotations

import numpy as np

from .fields import OrderField, ScalarField, ball_sums, lattice_ball_measure
from .radial import RadialFunction, RadiusGrid


def default_radius_grid(grid, K: int = 64, r_max: float | None = None) -> RadiusGrid:
    return RadiusGrid.log_spaced(grid.h, r_max if r_max is not None else 4 * grid.domain.diam, K)


def _averages(f: ScalarField, radius_grid: RadiusGrid, alpha_over_n: np.ndarray | None) -> np.ndarray:
    grid = f.grid
    hn = grid.cell_measure
    radii = radius_grid.nodes
    a = np.abs(f.values)
    S = ball_sums(grid, a * hn, radii)
    B = lattice_ball_measure(grid, radii)
    avg = S / B[None, :]
    # single-cell term: restores Mf >= |f| below the smallest node
    single = a.copy()
    if alpha_over_n is not None:
        avg = avg * B[None, :] ** alpha_over_n[:, None]
        single = single * hn**alpha_over_n
    return np.maximum(avg.max(axis=1), single)


def maximal(f: ScalarField, radius_grid: RadiusGrid | None = None) -> ScalarField:
    """Hardy-Littlewood maximal function, sup over the radius nodes.

    Averages integrate |f| over the ball clipped to the box but divide by the
    measure of the full ball.
    """
    radius_grid = radius_grid or default_radius_grid(f.grid)
    return ScalarField(f.grid, _averages(f, radius_grid, None))


def fractional_maximal(f: ScalarField, alpha: OrderField, radius_grid: RadiusGrid | None = None) -> ScalarField:
    radius_grid = radius_grid or default_radius_grid(f.grid)
    return ScalarField(f.grid, _averages(f, radius_grid, alpha.values / f.grid.n))


def self_cell_integral(n: int, h: float, alpha) -> np.ndarray:
    """Kernel integral over the cell containing the evaluation point.

    1-D: exact over [-h/2, h/2].  2-D: over the disc with the cell's area.
    """
    alpha = np.asarray(alpha, dtype=float)
    if n == 1:
        return 2.0 * (h / 2.0) ** alpha / alpha
    rho = h / np.sqrt(np.pi)
    return 2.0 * np.pi * rho**alpha / alpha


def riesz_potential(f: ScalarField, alpha: OrderField, *, chunk: int = 512) -> ScalarField:
    """Riesz potential of variable order over the whole computational box."""
    grid = f.grid
    n = grid.n
    al = alpha.values
    if np.any(al <= 0) or np.any(al >= n):
        raise ValueError(f"Riesz potential needs 0 < alpha < {n}")
    X = grid.centers
    fh = f.values * grid.cell_measure
    out = np.empty(grid.size)
    for s in range(0, grid.size, chunk):
        xi = X[s : s + chunk]
        d = np.sqrt(np.sum((xi[:, None, :] - X[None, :, :]) ** 2, axis=2))
        e = (al[s : s + chunk] - n)[:, None]
        with np.errstate(divide="ignore"):
            K = np.where(d > 0, d ** np.where(d > 0, e, 0.0), 0.0)
        out[s : s + chunk] = K @ fh
    out += f.values * self_cell_integral(n, grid.h, al)
    return ScalarField(grid, out)


def riesz_weight(alpha: OrderField) -> np.ndarray:
    """(1 + |x|)^(-gamma(x)) on the cell centers."""
    r = np.sqrt(np.sum(alpha.grid.centers**2, axis=1))
    return (1.0 + r) ** (-alpha.gamma)


def weighted_riesz(f: ScalarField, alpha: OrderField) -> ScalarField:
    I = riesz_potential(f, alpha)
    return ScalarField(f.grid, riesz_weight(alpha) * I.values)


def weighted_fractional_maximal(f: ScalarField, alpha: OrderField, radius_grid: RadiusGrid | None = None) -> ScalarField:
    M = fractional_maximal(f, alpha, radius_grid)
    return ScalarField(f.grid, riesz_weight(alpha) * M.values)


def dual_hardy(g: RadialFunction, u: RadialFunction, v: RadialFunction) -> RadialFunction:
    """v(r_k) * sum_{r_j >= r_k} g(r_j) u(r_j) dr_j."""
    rg = g.radius_grid
    if u.radius_grid is not rg and not np.array_equal(u.radius_grid.nodes, rg.nodes):
        raise ValueError("u is not on the radius grid of g")
    if v.radius_grid is not rg and not np.array_equal(v.radius_grid.nodes, rg.nodes):
        raise ValueError("v is not on the radius grid of g")
    terms = g.values * u.values * rg.weights
    tail = np.cumsum(terms[::-1])[::-1]
    return RadialFunction(rg, v.values * tail)
