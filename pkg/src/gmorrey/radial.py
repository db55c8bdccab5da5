"""The radius half-line: grids, radial functions, radial exponents, quadrature.

Integrals over (0, inf) are evaluated on a log-spaced node set.  Between
nodes a positive integrand is interpolated by a power law and integrated
exactly, so pure powers are integrated without discretization error.  The
pieces below the first node and beyond the last node are closed by
extrapolating the end slopes; a closure that would diverge is left out and
reported instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import exprel

# slope tolerance used when a tail sits exactly on the integrability edge
SLOPE_TOL = 1e-9


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.empty_like(nodes)
    d = np.diff(nodes)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (nodes[2:] - nodes[:-2]) / 2
    return w


@dataclass(frozen=True, eq=False)
class RadiusGrid:
    """Strictly increasing radius nodes with per-node quadrature weights ``dr``."""

    nodes: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        if nodes.size < 2:
            raise ValueError("radius grid needs at least 2 nodes")
        if not nodes[0] > 0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("radius nodes must be positive and strictly increasing")
        w = _trapezoid_weights(nodes) if self.weights is None else np.array(self.weights, dtype=float)
        nodes.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    @classmethod
    def log_spaced(cls, r_min: float, r_max: float, K: int = 64) -> "RadiusGrid":
        """``K`` geometric nodes on [r_min, r_max]; r = 1 is always a node when inside."""
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max")
        if K < 8:
            raise ValueError("radius grid needs K >= 8 nodes")
        nodes = np.geomspace(r_min, r_max, K)
        if r_min < 1.0 < r_max:
            k = int(np.argmin(np.abs(np.log(nodes))))
            if abs(nodes[k] - 1.0) < 1e-12:
                nodes[k] = 1.0
            else:
                nodes = np.sort(np.append(nodes, 1.0))
        return cls(nodes)

    @classmethod
    def from_nodes(cls, nodes) -> "RadiusGrid":
        nodes = np.asarray(nodes, dtype=float)
        if nodes.size < 8:
            raise ValueError("radius grid needs K >= 8 nodes")
        return cls(nodes)

    @classmethod
    def lattice(cls, h: float, r_max: float) -> "RadiusGrid":
        """Radii (m + 1/2) h: one node per distinct lattice ball in 1-D."""
        m = np.arange(int(math.floor(r_max / h - 0.5)) + 1)
        return cls.from_nodes((m + 0.5) * h)

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def K(self) -> int:
        return int(self.nodes.size)

    def count_upto(self, r: float) -> int:
        return int(np.searchsorted(self.nodes, r * (1 + 1e-12), side="right"))

    def truncated(self, r_max: float) -> "RadiusGrid":
        """Prefix of the node set with r <= r_max (weights recomputed)."""
        m = self.count_upto(r_max)
        return RadiusGrid(self.nodes[:m])

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RadiusGrid":
        if "nodes" in d:
            return cls(np.asarray(d["nodes"], dtype=float))
        return cls.log_spaced(float(d["r_min"]), float(d["r_max"]), int(d.get("K", 64)))


@dataclass(frozen=True, eq=False)
class RadialFunction:
    radius_grid: RadiusGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.shape != self.radius_grid.nodes.shape:
            raise ValueError("radial values must align with the radius nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("radial values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, radius_grid: RadiusGrid, fn) -> "RadialFunction":
        return cls(radius_grid, fn(radius_grid.nodes))


def conjugate(values):
    values = np.asarray(values, dtype=float)
    return values / (values - 1.0)


@dataclass(frozen=True, eq=False)
class RadialExponent:
    """Exponent theta(.) on the radius nodes, constant from the cutoff ``a`` on."""

    radius_grid: RadiusGrid
    values: np.ndarray
    a: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        rg = self.radius_grid
        if v.shape != rg.nodes.shape:
            raise ValueError("exponent values must align with the radius nodes")
        if not (v.min() > 1.0 and np.all(np.isfinite(v))):
            raise ValueError("radial exponent must satisfy 1 < theta < inf")
        if not rg.r_min <= self.a <= rg.r_max:
            raise ValueError(f"cutoff a={self.a} outside the radius grid span")
        tail = v[rg.nodes >= self.a]
        if tail.size and np.ptp(tail) > 0:
            raise ValueError("radial exponent must be constant beyond the cutoff a")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "a", float(self.a))

    @classmethod
    def constant(cls, radius_grid: RadiusGrid, value: float) -> "RadialExponent":
        return cls(radius_grid, np.full(radius_grid.K, float(value)), radius_grid.r_min)

    @classmethod
    def piecewise(cls, radius_grid: RadiusGrid, breaks, values) -> "RadialExponent":
        """theta = values[i] on [breaks[i-1], breaks[i]); the last break is the cutoff."""
        breaks = list(breaks)
        if len(values) != len(breaks) + 1:
            raise ValueError("piecewise exponent needs len(breaks) + 1 values")
        idx = np.searchsorted(np.asarray(breaks, dtype=float), radius_grid.nodes, side="right")
        return cls(radius_grid, np.asarray(values, dtype=float)[idx], breaks[-1] if breaks else radius_grid.r_min)

    @property
    def tail_value(self) -> float:
        return float(self.values[-1])

    @property
    def theta_minus(self) -> float:
        return float(self.values.min())

    @property
    def theta_plus(self) -> float:
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0)

    def tilde(self) -> "RadialExponent":
        """Suffix infimum over [r, a) for r < a, the tail constant for r >= a."""
        nodes = self.radius_grid.nodes
        before = nodes < self.a
        out = np.full(nodes.shape, self.tail_value)
        if before.any():
            head = self.values[before]
            out[before] = np.minimum.accumulate(head[::-1])[::-1]
        return RadialExponent(self.radius_grid, out, self.a)

    def conjugate(self) -> np.ndarray:
        return conjugate(self.values)

    def to_dict(self) -> dict:
        return {"kind": "table", "values": self.values.tolist(), "a": self.a}

    @classmethod
    def from_dict(cls, d, radius_grid: RadiusGrid) -> "RadialExponent | float":
        if d in ("inf", "infinity") or d == math.inf:
            return math.inf
        if isinstance(d, (int, float)):
            return cls.constant(radius_grid, float(d))
        kind = d.get("kind", "constant")
        if kind == "constant":
            return cls.constant(radius_grid, float(d["value"]))
        if kind == "piecewise":
            return cls.piecewise(radius_grid, d["breaks"], d["values"])
        if kind == "table":
            return cls(radius_grid, np.asarray(d["values"], dtype=float), float(d["a"]))
        raise ValueError(f"unknown radial exponent kind {kind!r}")


# ---------------------------------------------------------------------------
# power-law quadrature


def power_segments(r: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Integrals over [r_k, r_{k+1}] of the power-law interpolant of ``y``.

    ``y`` has the node axis first; extra axes are integrated independently.
    Segments with a non-positive endpoint fall back to the trapezoid rule.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = (-1,) + (1,) * (y.ndim - 1)
    r0, r1 = r[:-1].reshape(shape), r[1:].reshape(shape)
    y0, y1 = y[:-1], y[1:]
    L = np.log(r1 / r0)
    pos = (y0 > 0) & (y1 > 0) & np.isfinite(y0) & np.isfinite(y1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s = np.where(pos, np.log(np.where(pos, y1, 1.0) / np.where(pos, y0, 1.0)) / L, 0.0)
        power = y0 * r0 * L * exprel((s + 1.0) * L)
        trap = 0.5 * (y0 + y1) * (r1 - r0)
    return np.where(pos, power, trap)


def end_slope(r: np.ndarray, y: np.ndarray, end: str) -> np.ndarray:
    """Log-log slope of the first ("head") or last ("tail") segment.

    Returns nan where the slope is undefined (a non-positive end value).
    """
    i, j = (0, 1) if end == "head" else (-2, -1)
    y0, y1 = np.asarray(y[i], dtype=float), np.asarray(y[j], dtype=float)
    ok = (y0 > 0) & (y1 > 0) & np.isfinite(y0) & np.isfinite(y1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.log(np.where(ok, y1, 1.0) / np.where(ok, y0, 1.0)) / math.log(r[j] / r[i])
    return np.where(ok, s, np.nan)


def tail_closure(r: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integral beyond the last node by power-law extrapolation.

    Returns ``(closure, divergent)``.  A zero last value closes to 0; a tail
    whose slope is >= -1 (or undefined with a positive last value) is flagged
    divergent and closes to 0, i.e. the integral stays truncated.
    """
    yl = np.asarray(y[-1], dtype=float)
    s = end_slope(r, y, "tail")
    conv = np.isfinite(s) & (s < -1.0 - SLOPE_TOL)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = np.where(conv, yl * r[-1] / -(s + 1.0), 0.0)
    divergent = (yl > 0) & ~conv
    return np.where(np.isfinite(c), c, 0.0), divergent


def head_closure(r: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integral over (0, r_1) by power-law extrapolation; see :func:`tail_closure`."""
    y0 = np.asarray(y[0], dtype=float)
    s = end_slope(r, y, "head")
    conv = np.isfinite(s) & (s > -1.0 + SLOPE_TOL)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = np.where(conv, y0 * r[0] / (s + 1.0), 0.0)
    zero_head = y0 <= 0
    # a head that vanishes at r_1 but rises afterwards is taken as compactly supported
    c = np.where(zero_head, 0.0, c)
    divergent = (y0 > 0) & ~conv
    return np.where(np.isfinite(c), c, 0.0), divergent


def integrals_from(r: np.ndarray, y: np.ndarray, closure: bool = True):
    """``∫_{r_k}^∞ y`` for every node k; returns ``(values, tail_divergent)``."""
    seg = power_segments(r, y)
    tail, div = tail_closure(r, y) if closure else (np.zeros(np.shape(y)[1:]), np.zeros(np.shape(y)[1:], bool))
    out = np.empty_like(np.asarray(y, dtype=float))
    out[-1] = tail
    out[:-1] = tail + np.cumsum(seg[::-1], axis=0)[::-1]
    return out, div


def integrals_to(r: np.ndarray, y: np.ndarray, closure: bool = True):
    """``∫_0^{r_k} y`` for every node k; returns ``(values, head_divergent)``."""
    seg = power_segments(r, y)
    head, div = head_closure(r, y) if closure else (np.zeros(np.shape(y)[1:]), np.zeros(np.shape(y)[1:], bool))
    out = np.empty_like(np.asarray(y, dtype=float))
    out[0] = head
    out[1:] = head + np.cumsum(seg, axis=0)
    return out, div
