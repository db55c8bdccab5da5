"""Domains, uniform grids, sampled fields and ball geometry.

Every other module computes on the objects defined here.  A grid is a
uniform lattice of cells over a box; a field stores one value per cell
(the value at the cell center).  Balls contain exactly the cells whose
centers lie strictly inside them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: volume of the unit ball in dimension n
BALL_VOLUME = {1: 2.0, 2: math.pi}

# relative margin of the strict membership test |x - c| < r
_MEMBERSHIP_EPS = 1e-12


@dataclass(frozen=True)
class Domain:
    """Box domain in dimension 1 or 2.

    When ``unbounded`` is set the domain stands for the whole space and the
    computational box is ``[-R, R]^n`` with ``R = truncation_radius``.
    """

    n: int
    box: tuple[tuple[float, float], ...] = ()
    unbounded: bool = False
    truncation_radius: float | None = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.n}")
        if self.unbounded:
            R = self.truncation_radius
            if R is None or not R > 0:
                raise ValueError("unbounded domain needs truncation_radius > 0")
            object.__setattr__(self, "box", tuple((-float(R), float(R)) for _ in range(self.n)))
        box = tuple((float(a), float(b)) for a, b in self.box)
        if len(box) != self.n:
            raise ValueError(f"box has {len(box)} axes, expected {self.n}")
        for a, b in box:
            if not a < b:
                raise ValueError(f"degenerate box axis [{a}, {b}]")
        object.__setattr__(self, "box", box)

    @classmethod
    def interval(cls, a: float, b: float) -> "Domain":
        return cls(1, ((a, b),))

    @classmethod
    def square(cls, a: float, b: float) -> "Domain":
        return cls(2, ((a, b), (a, b)))

    @classmethod
    def whole_space(cls, n: int, truncation_radius: float) -> "Domain":
        return cls(n, unbounded=True, truncation_radius=truncation_radius)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in self.box)

    @property
    def diam(self) -> float:
        return math.sqrt(sum(w * w for w in self.widths))

    @property
    def measure(self) -> float:
        return math.prod(self.widths)

    def to_dict(self) -> dict:
        d = {"n": self.n, "box": [list(ax) for ax in self.box], "unbounded": self.unbounded}
        if self.unbounded:
            d["truncation_radius"] = self.truncation_radius
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        if d.get("unbounded"):
            R = d.get("truncation_radius")
            if R is None:
                R = max(max(abs(a), abs(b)) for a, b in d["box"])
            return cls(int(d["n"]), unbounded=True, truncation_radius=float(R))
        return cls(int(d["n"]), tuple(tuple(ax) for ax in d["box"]))


@dataclass(frozen=True)
class Grid:
    """Uniform lattice of ``points_per_axis**n`` cells over ``domain.box``.

    Cells are stored in C order; for n = 2 the flat index is ``i * N + j``
    with ``i`` along the first axis.
    """

    domain: Domain
    points_per_axis: int
    h: float = field(init=False)
    axes: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = int(self.points_per_axis)
        if N < 2:
            raise ValueError(f"points_per_axis must be >= 2, got {N}")
        widths = self.domain.widths
        if not np.allclose(widths, widths[0], rtol=1e-12, atol=0.0):
            raise ValueError("grid spacing must be identical on every axis")
        h = widths[0] / N
        axes = []
        for a, _ in self.domain.box:
            ax = a + (np.arange(N) + 0.5) * h
            ax.flags.writeable = False
            axes.append(ax)
        if self.domain.n == 1:
            centers = axes[0][:, None].copy()
        else:
            X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
            centers = np.column_stack([X.ravel(), Y.ravel()])
        centers.flags.writeable = False
        object.__setattr__(self, "points_per_axis", N)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "axes", tuple(axes))
        object.__setattr__(self, "centers", centers)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def size(self) -> int:
        return self.points_per_axis**self.domain.n

    @property
    def cell_measure(self) -> float:
        return self.h**self.domain.n

    def refine(self) -> "Grid":
        return Grid(self.domain, 2 * self.points_per_axis)

    def nearest_cell(self, x) -> int:
        """Flat index of the cell containing ``x`` (clipped to the box)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = []
        for k, (a, _) in enumerate(self.domain.box):
            i = int(math.floor((x[k] - a) / self.h))
            idx.append(min(max(i, 0), self.points_per_axis - 1))
        if self.n == 1:
            return idx[0]
        return idx[0] * self.points_per_axis + idx[1]

    def sample_centers(self, count: int = 9) -> np.ndarray:
        """Evenly spread cell indices, the first and last next to the boundary."""
        N = self.points_per_axis
        if self.n == 1:
            return np.unique(np.round(np.linspace(0, N - 1, count)).astype(int))
        per_axis = max(2, int(round(math.sqrt(count))))
        ii = np.unique(np.round(np.linspace(0, N - 1, per_axis)).astype(int))
        return np.array([i * N + j for i in ii for j in ii], dtype=int)


def make_grid(domain: Domain, points_per_axis: int) -> Grid:
    return Grid(domain, points_per_axis)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples of a function, one per grid cell."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values).ravel()
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field samples must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values + other.values)


@dataclass(frozen=True, eq=False)
class ExponentField:
    """Variable exponent p(.) sampled on a grid.

    ``p_minus``/``p_plus`` default to the sample range (widened to include
    ``p_inf``).  ``A_p`` and ``A_inf`` are declared constants of the log and
    decay conditions; estimates live in :mod:`gmorrey.vlebesgue`.
    """

    grid: Grid
    values: np.ndarray
    p_minus: float | None = None
    p_plus: float | None = None
    p_inf: float | None = None
    A_p: float | None = None
    A_inf: float | None = None

    def __post_init__(self):
        v = _frozen(self.values).ravel()
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("exponent samples must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        lo, hi = float(v.min()), float(v.max())
        if self.p_inf is not None:
            lo, hi = min(lo, self.p_inf), max(hi, self.p_inf)
        p_minus = lo if self.p_minus is None else float(self.p_minus)
        p_plus = hi if self.p_plus is None else float(self.p_plus)
        if not (1.0 < p_minus and p_plus < math.inf):
            raise ValueError(f"exponent bounds must satisfy 1 < p_minus, p_plus < inf; got {p_minus}, {p_plus}")
        if lo < p_minus or hi > p_plus:
            bad = int(np.argmax((v < p_minus) | (v > p_plus)))
            raise ValueError(f"exponent sample {v[bad]} at cell {bad} outside [{p_minus}, {p_plus}]")
        if self.p_inf is not None and not p_minus <= self.p_inf <= p_plus:
            raise ValueError("p_inf outside [p_minus, p_plus]")
        object.__setattr__(self, "p_minus", p_minus)
        object.__setattr__(self, "p_plus", p_plus)
        if self.domain_unbounded and self.p_inf is None:
            raise ValueError("unbounded domain requires p_inf")

    @property
    def domain_unbounded(self) -> bool:
        return self.grid.domain.unbounded

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0) and (self.p_inf is None or self.p_inf == self.values[0])

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ExponentField":
        return cls(grid, np.full(grid.size, float(value)), p_inf=float(value), A_p=0.0, A_inf=0.0)


@dataclass(frozen=True, eq=False)
class OrderField:
    """Variable order alpha(.) with 0 <= alpha(x) < n.

    ``A_inf`` is the decay constant of the exponent the order is paired with;
    it enters the compensating weight exponent ``gamma``.
    """

    grid: Grid
    values: np.ndarray
    A_inf: float = 0.0
    alpha_inf: float | None = None

    def __post_init__(self):
        v = _frozen(self.values).ravel()
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        n = self.grid.n
        if np.any(v < 0) or np.any(v >= n):
            raise ValueError(f"order must satisfy 0 <= alpha < {n}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.alpha_inf is None and np.ptp(v) == 0.0:
            object.__setattr__(self, "alpha_inf", float(v[0]))

    @classmethod
    def constant(cls, grid: Grid, value: float, A_inf: float = 0.0) -> "OrderField":
        return cls(grid, np.full(grid.size, float(value)), A_inf=A_inf)

    @property
    def alpha_minus(self) -> float:
        return float(self.values.min())

    @property
    def alpha_plus(self) -> float:
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0)

    def alpha_p_plus(self, p: ExponentField) -> float:
        return float(np.max(self.values * p.values))

    @property
    def gamma(self) -> np.ndarray:
        n = self.grid.n
        return self.A_inf * self.values * (1.0 - self.values / n)


# ---------------------------------------------------------------------------
# ball geometry


@dataclass(frozen=True, eq=False)
class BallCells:
    indices: np.ndarray
    ball_measure: float
    discrete_measure: float


def ball_measure(n: int, r) -> np.ndarray | float:
    return BALL_VOLUME[n] * np.asarray(r, dtype=float) ** n


def ball_cells(grid: Grid, x, r: float) -> BallCells:
    """Cells of ``grid`` whose centers lie in the open ball B(x, r).

    Returns the index set, the full-ball measure ``v_n r^n`` and the measure
    of the intersection with the computational box.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    for k, (a, b) in enumerate(grid.domain.box):
        if not a <= x[k] <= b:
            raise ValueError(f"center {x} outside the domain box")
    d = np.sqrt(np.sum((grid.centers - x) ** 2, axis=1))
    idx = np.flatnonzero(d < r * (1.0 - _MEMBERSHIP_EPS))
    return BallCells(idx, float(ball_measure(grid.n, r)), idx.size * grid.cell_measure)


def lattice_reach(h: float, r) -> np.ndarray:
    """Largest integer k >= 0 with k*h < r (membership margin applied)."""
    r = np.asarray(r, dtype=float)
    return np.maximum(np.ceil(r * (1.0 - _MEMBERSHIP_EPS) / h) - 1, 0).astype(np.int64)


def lattice_ball_measure(grid: Grid, radii) -> np.ndarray:
    """Measure of the unclipped lattice ball: cell count times h^n.

    This is the discrete counterpart of |B(x, r)| for a cell-centered x; it
    equals ``v_n r^n`` up to an O(h/r) lattice error and makes averages of
    constants exact.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    h = grid.h
    if grid.n == 1:
        counts = 2 * lattice_reach(h, radii) + 1
    else:
        counts = np.empty(radii.size, dtype=np.int64)
        for k, r in enumerate(radii):
            m = int(lattice_reach(h, r))
            a = np.arange(-m, m + 1)
            rem = np.maximum((r * (1.0 - _MEMBERSHIP_EPS)) ** 2 - (a * h) ** 2, 0.0)
            b = np.maximum(np.ceil(np.sqrt(rem) / h) - 1, 0).astype(np.int64)
            counts[k] = int(np.sum(2 * b + 1))
    return counts * grid.cell_measure


def ball_sums(grid: Grid, values, radii, centers: Sequence[int] | None = None) -> np.ndarray:
    """Sums of ``values`` over B~(x, r) for cell centers x and each radius.

    Returns an array of shape ``(len(centers), len(radii))``.  In one
    dimension each window sum is accumulated outward from its center, so
    nonnegative values keep full relative accuracy even where they are tiny
    next to the total; in two dimensions row prefix sums are used.
    """
    values = np.asarray(values, dtype=float)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    N = grid.points_per_axis
    h = grid.h
    centers = np.arange(grid.size) if centers is None else np.asarray(centers, dtype=int)
    out = np.zeros((centers.size, radii.size))
    if grid.n == 1:
        m = np.minimum(lattice_reach(h, radii), N)
        M = int(m.max())
        padded = np.concatenate([np.zeros(M), values, np.zeros(M)])
        j = np.arange(1, M + 1)
        chunk = max(1, 4_000_000 // max(M, 1))
        for s in range(0, centers.size, chunk):
            c = centers[s : s + chunk] + M
            pairs = padded[c[:, None] - j[None, :]] + padded[c[:, None] + j[None, :]]
            S = np.concatenate([padded[c][:, None], padded[c][:, None] + np.cumsum(pairs, axis=1)], axis=1)
            out[s : s + chunk] = S[:, m]
        return out
    V = values.reshape(N, N)
    P = np.zeros((N, N + 1))
    np.cumsum(V, axis=1, out=P[:, 1:])
    ci, cj = np.divmod(centers, N)
    for k, r in enumerate(radii):
        rr = r * (1.0 - _MEMBERSHIP_EPS)
        m = int(lattice_reach(h, r))
        acc = np.zeros(centers.size)
        for a in range(-m, m + 1):
            rem = rr * rr - (a * h) ** 2
            if rem <= 0:
                continue
            b = max(int(math.ceil(math.sqrt(rem) / h)) - 1, 0)
            rows = ci + a
            ok = (rows >= 0) & (rows < N)
            if not ok.any():
                continue
            lo = np.clip(cj - b, 0, N)
            hi = np.clip(cj + b + 1, 0, N)
            rows_c = np.clip(rows, 0, N - 1)
            acc += np.where(ok, P[rows_c, hi] - P[rows_c, lo], 0.0)
        out[:, k] = acc
    return out


def sorted_distances(grid: Grid, x) -> tuple[np.ndarray, np.ndarray]:
    """Cell order by distance from ``x`` and the sorted distances."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = np.sqrt(np.sum((grid.centers - x) ** 2, axis=1))
    order = np.argsort(d, kind="stable")
    return order, d[order]


def ball_counts(sorted_d: np.ndarray, radii) -> np.ndarray:
    """Number of sorted distances strictly inside each radius."""
    radii = np.asarray(radii, dtype=float)
    return np.searchsorted(sorted_d, radii * (1.0 - _MEMBERSHIP_EPS), side="left")
