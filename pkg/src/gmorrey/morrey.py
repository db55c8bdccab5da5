"""Morrey-type norms with variable exponents.

All norms are built from the local profile ``r -> ||f||_{L_p(B~(x, r))}``
evaluated at cell centers x and radius nodes r.  The global norm measures
the weighted profile in a radial variable exponent norm and takes the
maximum over centers; the sup-type norms take the maximum over (x, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import Domain, ExponentField, Grid, ScalarField
from .radial import RadialExponent, RadialFunction, RadiusGrid, end_slope, SLOPE_TOL
from .vlebesgue import ball_norms, eta_table, point_ball_norms, solve_luxemburg

WEIGHT_KINDS = ("power", "table", "lambda")


def _as_center_array(value, size: int | None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size != 1 and size is not None and arr.size != size:
        raise ValueError(f"per-center parameter has {arr.size} entries, expected {size}")
    return arr


@dataclass(frozen=True, eq=False)
class RadialWeight:
    """Weight w(x, r) on centers x and radii r.

    ``power``: ``amplitude * r**beta(x) * (1 + r)**growth * exp(-rate * r)``;
    the weight is a pure power when ``growth == rate == 0``.
    ``table``: samples of shape (centers or 1, K) on ``radius_grid``.
    ``lambda``: ``r**(-lam(x)/p(x) + eta_p(x, r))``.
    """

    kind: str = "power"
    beta: np.ndarray | float = 0.0
    amplitude: float = 1.0
    growth: float = 0.0
    rate: float = 0.0
    table: np.ndarray | None = None
    radius_grid: RadiusGrid | None = None
    lam: np.ndarray | float | None = None
    p: ExponentField | None = None

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power":
            object.__setattr__(self, "beta", _as_center_array(self.beta, None))
            if not self.amplitude > 0:
                raise ValueError("weight amplitude must be positive")
        elif self.kind == "table":
            t = np.atleast_2d(np.asarray(self.table, dtype=float))
            if self.radius_grid is None or t.shape[1] != self.radius_grid.K:
                raise ValueError("table weight needs samples aligned with its radius grid")
            if not np.all(t > 0) or not np.all(np.isfinite(t)):
                raise ValueError("weight must be positive and finite")
            t.flags.writeable = False
            object.__setattr__(self, "table", t)
        else:
            if self.p is None or self.lam is None:
                raise ValueError("lambda weight needs p and lam")
            lam = _as_center_array(self.lam, self.p.grid.size)
            if np.any(lam < 0) or np.any(lam > self.p.grid.n):
                raise ValueError("lambda must lie in [0, n]")
            object.__setattr__(self, "lam", lam)

    @classmethod
    def power(cls, beta=0.0, amplitude: float = 1.0, growth: float = 0.0, rate: float = 0.0) -> "RadialWeight":
        return cls("power", beta=beta, amplitude=amplitude, growth=growth, rate=rate)

    @classmethod
    def tabulate(cls, fn, radius_grid: RadiusGrid, points=None) -> "RadialWeight":
        """Sample ``fn(x, r)`` (or ``fn(r)`` when ``points`` is None)."""
        r = radius_grid.nodes
        if points is None:
            table = np.asarray(fn(r), dtype=float)[None, :]
        else:
            table = np.array([fn(x, r) for x in np.atleast_2d(points)], dtype=float)
        return cls("table", table=table, radius_grid=radius_grid)

    @classmethod
    def lambda_form(cls, p: ExponentField, lam) -> "RadialWeight":
        return cls("lambda", lam=lam, p=p)

    @property
    def is_pure_power(self) -> bool:
        return self.kind == "power" and self.growth == 0.0 and self.rate == 0.0

    @property
    def center_count(self) -> int:
        """Number of distinct center rows (1 when w does not depend on x)."""
        if self.kind == "power":
            return self.beta.size
        if self.kind == "table":
            return self.table.shape[0]
        return self.p.grid.size

    def scaled(self, c: float) -> "RadialWeight":
        if self.kind == "power":
            return RadialWeight.power(self.beta, self.amplitude * c, self.growth, self.rate)
        if self.kind == "table":
            return RadialWeight("table", table=self.table * c, radius_grid=self.radius_grid)
        raise ValueError("lambda weights cannot be rescaled")

    def _node_index(self, radii: np.ndarray) -> np.ndarray:
        nodes = self.radius_grid.nodes
        idx = np.clip(np.searchsorted(nodes, radii), 0, nodes.size - 1)
        idx_lo = np.clip(idx - 1, 0, nodes.size - 1)
        pick = np.where(np.abs(nodes[idx_lo] - radii) < np.abs(nodes[idx] - radii), idx_lo, idx)
        if not np.allclose(nodes[pick], radii, rtol=1e-12, atol=0):
            raise ValueError("table weight evaluated off its radius nodes")
        return pick

    def values(self, centers, radii) -> np.ndarray:
        """w(x_i, r_k) as an array (len(centers), len(radii))."""
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        centers = np.atleast_1d(np.asarray(centers, dtype=int))
        if self.kind == "power":
            beta = self.beta if self.beta.size == 1 else self.beta[centers]
            beta = np.broadcast_to(beta, centers.shape)[:, None]
            w = self.amplitude * radii[None, :] ** beta
            if self.growth:
                w = w * (1.0 + radii[None, :]) ** self.growth
            if self.rate:
                w = w * np.exp(-self.rate * radii[None, :])
            return w
        if self.kind == "table":
            cols = self._node_index(radii)
            rows = np.zeros_like(centers) if self.table.shape[0] == 1 else centers
            return self.table[np.ix_(rows, cols)]
        lam = self.lam if self.lam.size == 1 else self.lam[centers]
        lam = np.broadcast_to(lam, centers.shape)
        expo = -lam[:, None] / self.p.values[centers][:, None] + eta_table(self.p, centers, radii)
        return radii[None, :] ** expo

    def to_dict(self) -> dict:
        if self.kind == "power":
            beta = float(self.beta[0]) if self.beta.size == 1 else self.beta.tolist()
            return {"kind": "power", "beta": beta, "amplitude": self.amplitude, "growth": self.growth, "rate": self.rate}
        if self.kind == "table":
            return {"kind": "table", "values": self.table.tolist(), "radius_grid": self.radius_grid.to_dict()}
        lam = float(self.lam[0]) if self.lam.size == 1 else self.lam.tolist()
        return {"kind": "lambda", "lambda": lam}

    @classmethod
    def from_dict(cls, d: dict, p: ExponentField | None = None, radius_grid: RadiusGrid | None = None) -> "RadialWeight":
        kind = d.get("kind", "power")
        if kind == "power":
            return cls.power(
                d.get("beta", 0.0), float(d.get("amplitude", 1.0)), float(d.get("growth", 0.0)), float(d.get("rate", 0.0))
            )
        if kind == "table":
            rg = RadiusGrid.from_dict(d["radius_grid"]) if "radius_grid" in d else radius_grid
            return cls("table", table=np.asarray(d["values"], dtype=float), radius_grid=rg)
        if kind == "lambda":
            return cls.lambda_form(p, d["lambda"])
        raise ValueError(f"unknown weight kind {kind!r}")


@dataclass(frozen=True, eq=False)
class MorreySpaceSpec:
    """(p, theta, w) on a domain plus the radius grid used to discretize (0, inf).

    ``theta`` is a :class:`RadialExponent` or ``math.inf``.
    """

    p: ExponentField
    theta: RadialExponent | float
    w: RadialWeight
    domain: Domain
    radius_grid: RadiusGrid

    def __post_init__(self):
        if self.p.grid.domain != self.domain:
            raise ValueError("exponent grid does not live on the domain of the space")
        if isinstance(self.theta, RadialExponent):
            if not np.array_equal(self.theta.radius_grid.nodes, self.radius_grid.nodes):
                raise ValueError("theta is not sampled on the radius grid of the space")
        elif self.theta != math.inf:
            raise ValueError("theta must be a RadialExponent or math.inf")

    @property
    def grid(self) -> Grid:
        return self.p.grid

    def with_radius_grid(self, radius_grid: RadiusGrid) -> "MorreySpaceSpec":
        """Same space on another radius grid (theta must be constant or infinite)."""
        theta = self.theta
        if isinstance(theta, RadialExponent):
            if not theta.is_constant:
                raise ValueError("only constant theta can be moved to another radius grid")
            theta = RadialExponent.constant(radius_grid, theta.tail_value)
        return MorreySpaceSpec(self.p, theta, self.w, self.domain, radius_grid)

    def to_dict(self) -> dict:
        from .fieldio import exponent_to_dict

        return {
            "domain": self.domain.to_dict(),
            "points_per_axis": self.grid.points_per_axis,
            "p": exponent_to_dict(self.p),
            "theta": "inf" if self.theta == math.inf else self.theta.to_dict(),
            "w": self.w.to_dict(),
            "radius_grid": self.radius_grid.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MorreySpaceSpec":
        from .fieldio import sample_exponent

        domain = Domain.from_dict(d["domain"])
        grid = Grid(domain, int(d["points_per_axis"]))
        p = sample_exponent(d["p"], grid)
        rg_d = d.get("radius_grid", {})
        if "nodes" in rg_d:
            rg = RadiusGrid.from_dict(rg_d)
        else:
            rg = RadiusGrid.log_spaced(
                float(rg_d.get("r_min", grid.h)), float(rg_d.get("r_max", 4 * domain.diam)), int(rg_d.get("K", 64))
            )
        theta = RadialExponent.from_dict(d.get("theta", "inf"), rg)
        w = RadialWeight.from_dict(d.get("w", {"kind": "power", "beta": 0.0}), p=p, radius_grid=rg)
        return cls(p, theta, w, domain, rg)


def default_radius_grid(grid: Grid, K: int = 64) -> RadiusGrid:
    return RadiusGrid.log_spaced(grid.h, 4 * grid.domain.diam, K)


def _centers(grid: Grid, centers) -> np.ndarray:
    return np.arange(grid.size) if centers is None else np.atleast_1d(np.asarray(centers, dtype=int))


def local_norm_profile(f: ScalarField, p: ExponentField, x, radius_grid: RadiusGrid) -> RadialFunction:
    """``r -> ||f||_{L_p(B~(x, r))}`` on the radius nodes; ``x`` is a cell index or a point."""
    if isinstance(x, (int, np.integer)):
        vals = ball_norms(f, p, radius_grid.nodes, [int(x)])[0]
    else:
        vals = point_ball_norms(f, p, x, radius_grid.nodes)
    return RadialFunction(radius_grid, np.maximum.accumulate(vals))


def profiles(f: ScalarField, p: ExponentField, radius_grid: RadiusGrid, centers=None) -> np.ndarray:
    """Local norms for several centers: shape (len(centers), K)."""
    vals = ball_norms(f, p, radius_grid.nodes, _centers(f.grid, centers))
    # balls are nested; remove solver-level jitter so profiles are non-decreasing
    return np.maximum.accumulate(vals, axis=1)


def radial_norms(G: np.ndarray, theta: RadialExponent | float, dr: np.ndarray) -> np.ndarray:
    """Row-wise L_theta(.) norm of radial samples with quadrature weights ``dr``."""
    G = np.abs(np.atleast_2d(G))
    if theta == math.inf:
        return G.max(axis=1)
    tv = theta.values[: G.shape[1]]
    if theta.is_constant:
        q = float(tv[0])
        return np.sum(G**q * dr[None, :], axis=1) ** (1.0 / q)
    return solve_luxemburg(G, tv, dr)[0]


def variable_morrey_lambda_norm(
    f: ScalarField, p: ExponentField, lam, radius_grid: RadiusGrid | None = None, centers=None
) -> float:
    """sup over (x, t) of t^(-lam(x)/p(x)) ||f||_{L_p(B~(x, t))}."""
    grid = f.grid
    rg = radius_grid or default_radius_grid(grid)
    c = _centers(grid, centers)
    lam = _as_center_array(lam, grid.size)
    lam_c = np.broadcast_to(lam if lam.size == 1 else lam[c], c.shape)
    if np.any(lam_c < 0) or np.any(lam_c > grid.n):
        raise ValueError("lambda must lie in [0, n]")
    P = profiles(f, p, rg, c)
    t = rg.nodes[None, :]
    return float(np.max(t ** (-lam_c[:, None] / p.values[c][:, None]) * P))


def generalized_morrey_norm(
    f: ScalarField,
    p: ExponentField,
    w: RadialWeight,
    normalization: str = "unbounded",
    radius_grid: RadiusGrid | None = None,
    centers=None,
) -> float:
    """Sup-type generalized Morrey norm.

    ``"bounded"``: ``r^(-n/p(x)) / w * ||f||``; ``"unbounded"``: ``||f|| / w``;
    ``"eta"``: ``w * r^(-eta_p(x, r)) * ||f||``, the infinite-theta limit of
    the global norm.
    """
    grid = f.grid
    rg = radius_grid or default_radius_grid(grid)
    c = _centers(grid, centers)
    r = rg.nodes
    P = profiles(f, p, rg, c)
    W = w.values(c, r)
    if normalization == "bounded":
        Q = r[None, :] ** (-grid.n / p.values[c][:, None]) / W * P
    elif normalization == "unbounded":
        Q = P / W
    elif normalization == "eta":
        Q = W * r[None, :] ** (-eta_table(p, c, r)) * P
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return float(np.max(Q))


def weighted_profiles(f: ScalarField, spec: MorreySpaceSpec, centers=None) -> np.ndarray:
    """w(x, r) r^(-eta_p(x, r)) ||f||_{L_p(B~(x, r))}: shape (centers, K)."""
    c = _centers(spec.grid, centers)
    r = spec.radius_grid.nodes
    P = profiles(f, spec.p, spec.radius_grid, c)
    W = spec.w.values(c, r)
    return W * r[None, :] ** (-eta_table(spec.p, c, r)) * P


def gm_norm(f: ScalarField, spec: MorreySpaceSpec, centers=None) -> float:
    """Global Morrey-type norm: max over centers of the radial norm of the weighted profile."""
    G = weighted_profiles(f, spec, centers)
    return float(np.max(radial_norms(G, spec.theta, spec.radius_grid.weights)))


def gm_lambda_norm(
    f: ScalarField,
    p: ExponentField,
    theta: RadialExponent | float,
    lam,
    radius_grid: RadiusGrid,
    centers=None,
) -> float:
    """Global norm with w(x, r) = r^(-lam(x)/p(x) + eta_p(x, r))."""
    w = RadialWeight.lambda_form(p, lam)
    spec = MorreySpaceSpec(p, theta, w, p.grid.domain, radius_grid)
    return gm_norm(f, spec, centers)


@dataclass
class NonemptinessReport:
    value: float
    value_half: float
    truncation_sensitivity: float
    divergent: bool
    reasons: list[str] = field(default_factory=list)
    truncation: tuple[float, float] = (0.0, 0.0)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "value_half": self.value_half,
            "truncation_sensitivity": self.truncation_sensitivity,
            "divergent": self.divergent,
            "reasons": list(self.reasons),
            "truncation": list(self.truncation),
        }


def nonemptiness_check(spec: MorreySpaceSpec, centers=None, growth_ratio: float = 1.5) -> NonemptinessReport:
    """sup_x ||w(x, .)||_{L_theta(0, inf)} on the truncated radius grid.

    Divergence is reported, never raised: an end slope of w^theta on the
    wrong side of -1 or growth beyond ``growth_ratio`` when the truncation
    radius doubles marks the supremum as infinite.
    """
    rg = spec.radius_grid
    c = _centers(spec.grid, centers) if spec.w.center_count > 1 else np.array([0])
    W = spec.w.values(c, rg.nodes)
    full = float(np.max(radial_norms(W, spec.theta, rg.weights)))
    half_rg = rg.truncated(rg.r_max / 2)
    m = half_rg.K
    half = float(np.max(radial_norms(W[:, :m], spec.theta, half_rg.weights)))
    ratio = full / half if half > 0 else math.inf
    reasons = []
    if spec.theta != math.inf:
        th = spec.theta.values
        Y = (W**th[None, :]).T
        tail = end_slope(rg.nodes, Y, "tail")
        head = end_slope(rg.nodes, Y, "head")
        if np.any(~np.isfinite(tail) | (tail >= -1.0 - SLOPE_TOL)):
            reasons.append("tail-divergent")
        if np.any(~np.isfinite(head) | (head <= -1.0 + SLOPE_TOL)):
            reasons.append("head-divergent")
    if ratio > growth_ratio:
        reasons.append("truncation-growth")
    return NonemptinessReport(full, half, ratio, bool(reasons), reasons, (rg.r_min, rg.r_max))
