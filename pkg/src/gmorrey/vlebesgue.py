"""Variable exponent Lebesgue spaces on a grid.

The modular of ``f`` is ``sum |f|^p h^n`` and the Luxemburg norm is the root
of the strictly decreasing map ``eta -> J(f/eta) - 1``, found by bracketing
and bisection.  The same solver serves the radial norms of
:mod:`gmorrey.morrey` and :mod:`gmorrey.conditions`, which only differ in
the weights they attach to the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import (
    ExponentField,
    Grid,
    ScalarField,
    ball_counts,
    ball_sums,
    sorted_distances,
)

REL_TOL = 1e-10
MAX_ITER = 200
PAIR_SEED = 0x4D4F52
FULL_PAIRS_BELOW = 2048
RANDOM_PAIRS = 10**6


class LuxemburgError(RuntimeError):
    def __init__(self, message, bracket):
        super().__init__(f"{message}; last bracket {bracket}")
        self.bracket = bracket


@dataclass(frozen=True)
class LuxemburgResult:
    norm: float
    iterations: int
    residual: float


def _region(grid: Grid, region) -> np.ndarray:
    if region is None:
        return np.arange(grid.size)
    region = np.asarray(region)
    if region.dtype == bool:
        region = np.flatnonzero(region)
    if region.size == 0:
        raise ValueError("region must be nonempty")
    return region.astype(int)


def modular(f: ScalarField, p: ExponentField, region=None) -> float:
    idx = _region(f.grid, region)
    terms = np.abs(f.values[idx]) ** p.values[idx] * f.grid.cell_measure
    return math.fsum(terms)


def _modular_rows(log_a, p, w, mask, log_eta):
    """J(f/eta) for each row of ``mask``; ``log_eta`` has one entry per row.

    ``log_a`` is either shared by all rows (1-D) or given per row (2-D).
    """
    la = log_a if log_a.ndim == 2 else log_a[None, :]
    with np.errstate(over="ignore", under="ignore"):
        t = np.exp(p[None, :] * (la - log_eta[:, None]))
    return np.sum(np.where(mask, w[None, :] * t, 0.0), axis=1)


def solve_luxemburg(
    a,
    p,
    w,
    mask=None,
    rel_tol: float = REL_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[np.ndarray, int, np.ndarray]:
    """Luxemburg norms of the samples ``a`` over several regions at once.

    ``p`` and the weights ``w`` are per-sample arrays, ``a`` is per-sample or
    per-region (regions x samples) and ``mask`` is a boolean array
    (regions x samples).  Returns ``(norms, iterations,
    residuals)``.  The bracket starts at ``max(J, 1)**(1/p_min)`` and is
    doubled or halved until it straddles the root; bisection in log scale
    runs to relative width ``rel_tol`` and a final secant step on
    ``log J`` refines the root inside the last bracket.
    """
    a = np.abs(np.asarray(a, dtype=float))
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    S = a.shape[-1]
    if mask is None:
        mask = np.ones((a.shape[0] if a.ndim == 2 else 1, S), bool)
    mask = np.atleast_2d(np.asarray(mask, bool))
    R = mask.shape[0]
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
    a2 = a if a.ndim == 2 else a[None, :]
    active = np.any(mask & (a2 > 0) & (w[None, :] > 0), axis=1)
    norms = np.zeros(R)
    residuals = np.zeros(R)
    if not active.any():
        return norms, 0, residuals
    m = mask[active]
    if log_a.ndim == 2:
        log_a = log_a[active]
    p_min = np.min(np.where(m, p[None, :], np.inf), axis=1)
    J1 = _modular_rows(log_a, p, w, m, np.zeros(m.shape[0]))
    hi = np.log(np.maximum(J1, 1.0)) / p_min
    lo = hi.copy()
    J_lo = _modular_rows(log_a, p, w, m, lo)
    iters = 0
    # hi is an upper bound by construction; walk lo down until J(f/e^lo) > 1
    while np.any(J_lo <= 1.0):
        iters += 1
        if iters > max_iter:
            raise LuxemburgError("no lower bracket", (float(np.exp(lo.min())), float(np.exp(hi.max()))))
        move = J_lo <= 1.0
        hi = np.where(move, lo, hi)
        lo = np.where(move, lo - math.log(2.0), lo)
        J_lo = np.where(move, _modular_rows(log_a, p, w, m, lo), J_lo)
    J_hi = _modular_rows(log_a, p, w, m, hi)
    tol = math.log1p(rel_tol)
    while np.any(hi - lo > tol):
        iters += 1
        if iters > max_iter:
            raise LuxemburgError("bisection did not converge", (float(np.exp(lo.max())), float(np.exp(hi.max()))))
        mid = 0.5 * (lo + hi)
        J_mid = _modular_rows(log_a, p, w, m, mid)
        up = J_mid > 1.0
        lo, J_lo = np.where(up, mid, lo), np.where(up, J_mid, J_lo)
        hi, J_hi = np.where(up, hi, mid), np.where(up, J_hi, J_mid)
    phi_lo, phi_hi = np.log(J_lo), np.log(J_hi)
    denom = phi_lo - phi_hi
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(denom > 0, lo + phi_lo * (hi - lo) / denom, 0.5 * (lo + hi))
    u = np.clip(u, lo, hi)
    norms[active] = np.exp(u)
    residuals[active] = np.abs(_modular_rows(log_a, p, w, m, u) - 1.0)
    return norms, iters, residuals


def _constant_on(p_vals: np.ndarray) -> bool:
    return p_vals.size > 0 and bool(np.ptp(p_vals) == 0.0)


def luxemburg_norm(
    f: ScalarField,
    p: ExponentField,
    region=None,
    *,
    rel_tol: float = REL_TOL,
    max_iter: int = MAX_ITER,
    method: str = "auto",
) -> LuxemburgResult:
    """Luxemburg norm of ``f`` restricted to ``region`` (all cells by default).

    ``method="auto"`` uses the closed form ``J(f)**(1/p)`` when ``p`` is
    constant on the region; ``method="bisect"`` always runs the solver.
    """
    idx = _region(f.grid, region)
    a = f.values[idx]
    pv = p.values[idx]
    hn = f.grid.cell_measure
    if not np.any(a):
        return LuxemburgResult(0.0, 0, 0.0)
    if method == "auto" and _constant_on(pv):
        q = float(pv[0])
        J = math.fsum(np.abs(a) ** q * hn)
        return LuxemburgResult(J ** (1.0 / q), 0, 0.0)
    if method not in ("auto", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    norms, it, res = solve_luxemburg(a, pv, np.full(a.size, hn), rel_tol=rel_tol, max_iter=max_iter)
    return LuxemburgResult(float(norms[0]), it, float(res[0]))


def lp_norm(f: ScalarField, p: ExponentField, region=None) -> float:
    return luxemburg_norm(f, p, region).norm


def conjugate_exponent(p: ExponentField) -> ExponentField:
    if not p.p_minus > 1.0:
        raise ValueError("conjugate exponent requires p_minus > 1")
    q = p.values / (p.values - 1.0)
    p_inf = None if p.p_inf is None else p.p_inf / (p.p_inf - 1.0)
    return ExponentField(
        p.grid,
        q,
        p_minus=p.p_plus / (p.p_plus - 1.0),
        p_plus=p.p_minus / (p.p_minus - 1.0),
        p_inf=p_inf,
    )


def holder_check(f: ScalarField, g: ScalarField, p: ExponentField, region=None) -> float:
    """Ratio of ``∫ f g`` to the variable exponent Hölder bound; at most 1."""
    idx = _region(f.grid, region)
    integral = math.fsum(f.values[idx] * g.values[idx] * f.grid.cell_measure)
    pc = conjugate_exponent(p)
    nf = luxemburg_norm(f, p, idx).norm
    ng = luxemburg_norm(g, pc, idx).norm
    if nf == 0.0 or ng == 0.0:
        return 0.0
    C = 1.0 / p.p_minus + 1.0 / pc.p_minus
    return integral / (C * nf * ng)


def log_condition_constant(p: ExponentField, *, seed: int = PAIR_SEED) -> float:
    """Largest ``|p(x)-p(y)| * (-ln|x-y|)`` over sampled pairs with |x-y| <= 1/2."""
    X = p.grid.centers
    v = p.values
    N = X.shape[0]
    if N < 2:
        raise ValueError("log condition needs at least two cells")
    best = 0.0
    if N < FULL_PAIRS_BELOW:
        for start in range(0, N, 256):
            xi = X[start : start + 256]
            d = np.sqrt(np.sum((xi[:, None, :] - X[None, :, :]) ** 2, axis=2))
            dp = np.abs(v[start : start + 256, None] - v[None, :])
            ok = (d > 0) & (d <= 0.5)
            if ok.any():
                best = max(best, float(np.max(np.where(ok, dp * -np.log(np.where(ok, d, 1.0)), 0.0))))
        return best
    rng = np.random.default_rng(seed)
    i = rng.integers(0, N, RANDOM_PAIRS)
    j = rng.integers(0, N, RANDOM_PAIRS)
    d = np.sqrt(np.sum((X[i] - X[j]) ** 2, axis=1))
    ok = (d > 0) & (d <= 0.5)
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(v[i] - v[j])[ok] * -np.log(d[ok])))


def decay_condition_constant(p: ExponentField) -> float:
    """``sup_x |p(x) - p(inf)| * ln(e + |x|)`` over the cells."""
    if p.p_inf is None:
        raise ValueError("decay condition needs p_inf")
    r = np.sqrt(np.sum(p.grid.centers**2, axis=1))
    return float(np.max(np.abs(p.values - p.p_inf) * np.log(math.e + r)))


def eta_p(x, r: float, p: ExponentField) -> float:
    """n/p(x) for r <= 1, n/p(inf) for r > 1; ``x`` is a point or cell index."""
    if not r > 0:
        raise ValueError("radius must be positive")
    n = p.grid.n
    if r > 1.0:
        if p.p_inf is None:
            raise ValueError("eta_p for r > 1 needs p_inf")
        return n / p.p_inf
    i = x if isinstance(x, (int, np.integer)) else p.grid.nearest_cell(x)
    return n / float(p.values[i])


def eta_table(p: ExponentField, centers, radii) -> np.ndarray:
    """eta_p(x_i, r_k) for cell indices ``centers`` and ``radii``."""
    radii = np.asarray(radii, dtype=float)
    centers = np.asarray(centers, dtype=int)
    n = p.grid.n
    small = n / p.values[centers][:, None]
    if np.any(radii > 1.0):
        if p.p_inf is None:
            raise ValueError("eta_p for r > 1 needs p_inf")
        return np.where(radii[None, :] <= 1.0, small, n / p.p_inf)
    return np.broadcast_to(small, (centers.size, radii.size)).copy()


def ball_norms(
    f: ScalarField,
    p: ExponentField,
    radii,
    centers: Sequence[int] | None = None,
    *,
    rel_tol: float = REL_TOL,
) -> np.ndarray:
    """Luxemburg norms of f on B~(x, r): shape (len(centers), len(radii)).

    Centers are cell indices.  Constant exponents go through lattice ball
    sums; variable exponents solve every radius of a center in one
    vectorized bisection over the distance-sorted cells.
    """
    grid = f.grid
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    centers = np.arange(grid.size) if centers is None else np.asarray(centers, dtype=int)
    hn = grid.cell_measure
    if _constant_on(p.values):
        q = float(p.values[0])
        S = ball_sums(grid, np.abs(f.values) ** q * hn, radii, centers)
        return np.maximum(S, 0.0) ** (1.0 / q)
    out = np.zeros((centers.size, radii.size))
    for row, c in enumerate(centers):
        order, d = sorted_distances(grid, grid.centers[c])
        cnt = ball_counts(d, radii)
        m = int(cnt.max())
        if m == 0:
            continue
        mask = np.arange(m)[None, :] < cnt[:, None]
        a = f.values[order[:m]]
        norms, _, _ = solve_luxemburg(a, p.values[order[:m]], np.full(m, hn), mask, rel_tol=rel_tol)
        out[row] = norms
    return out


def point_ball_norms(f: ScalarField, p: ExponentField, x, radii) -> np.ndarray:
    """Luxemburg norms of f on B~(x, r) for an arbitrary point ``x``."""
    grid = f.grid
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    order, d = sorted_distances(grid, x)
    cnt = ball_counts(d, radii)
    m = int(cnt.max())
    if m == 0:
        return np.zeros(radii.size)
    mask = np.arange(m)[None, :] < cnt[:, None]
    idx = order[:m]
    pv = p.values[idx]
    a = f.values[idx]
    hn = grid.cell_measure
    if _constant_on(pv):
        S = np.concatenate([[0.0], np.cumsum(np.abs(a) ** pv[0] * hn)])[cnt]
        return S ** (1.0 / pv[0])
    return solve_luxemburg(a, pv, np.full(m, hn), mask)[0]
