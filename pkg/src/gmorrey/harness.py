"""Verification engine: test families, local inequality checks and operator norm ratios.

Each local check compares a left-hand side ``||T f||`` on B~(x, t) with a
right-hand side built from the local profile of f, sweeping sample centers
x and radius nodes t <= r_max/2.  The ratio LHS/RHS estimates the constant
of the inequality; a check passes when that estimate is finite and does not
more than double when the grid is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fieldio import sample_exponent, sample_order, sample_scalar
from .fields import Domain, ExponentField, Grid, OrderField, ScalarField
from .morrey import MorreySpaceSpec, gm_norm, profiles
from .operators import fractional_maximal, maximal, riesz_potential, weighted_riesz
from .radial import RadiusGrid, integrals_from
from .vlebesgue import ball_norms, decay_condition_constant, eta_table
from .conditions import sobolev_exponent

FAMILY_KINDS = ("ball-indicators", "power-bumps", "random-smooth")
OPERATORS = ("identity", "M", "Malpha", "I", "weighted-I")


@dataclass(frozen=True)
class TestFamily:
    """Seeded family of test functions, stored as descriptors.

    Members are drawn one after another from a single generator, so the
    first k members of a larger family equal the smaller family.
    """

    __test__ = False  # not a pytest class

    kind: str = "ball-indicators"
    count: int = 8
    seed: int = 0
    p_plus: float = 2.0
    n: int = 1
    spread: float = 2.0

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("family needs at least one member")

    @classmethod
    def parse(cls, text: str, **kw) -> "TestFamily":
        """``kind,count,seed`` as given on the command line."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ValueError("family must be given as kind,count,seed")
        return cls(parts[0], int(parts[1]), int(parts[2]), **kw)

    def descriptors(self) -> list[dict]:
        rng = np.random.default_rng(self.seed)
        out = []
        for _ in range(self.count):
            c = rng.uniform(-self.spread, self.spread, self.n).tolist()
            if self.kind == "ball-indicators":
                out.append({"kind": "indicator-ball", "center": c, "radius": float(rng.uniform(0.25, 1.5))})
            elif self.kind == "power-bumps":
                beta = float(rng.uniform(0.0, 0.9 * self.n / self.p_plus))
                out.append({"kind": "power", "center": c, "beta": beta, "amplitude": 1.0})
            else:
                k = 3
                out.append(
                    {
                        "kind": "gaussian-sum",
                        "amplitudes": rng.normal(0.0, 1.0, k).tolist(),
                        "centers": rng.uniform(-self.spread, self.spread, (k, self.n)).tolist(),
                        "widths": rng.uniform(0.2, 1.0, k).tolist(),
                    }
                )
        return out

    def members(self, grid: Grid) -> list[ScalarField]:
        return [sample_scalar(d, grid) for d in self.descriptors()]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "count": self.count, "seed": self.seed}


@dataclass(frozen=True)
class VerifySetup:
    """Grid and sweep configuration shared by all checks."""

    n: int = 1
    points: int = 1024
    truncation_radius: float = 4.0
    K: int = 64
    r_min: float | None = None
    r_max: float = 8.0
    centers: int = 9

    def domain(self) -> Domain:
        return Domain.whole_space(self.n, self.truncation_radius)

    def grid(self, level: int = 0) -> Grid:
        return Grid(self.domain(), self.points * 2**level)

    def radius_grid(self) -> RadiusGrid:
        r_min = self.r_min if self.r_min is not None else self.grid().h
        return RadiusGrid.log_spaced(r_min, self.r_max, self.K)

    def sample_points(self) -> np.ndarray:
        g = self.grid()
        return g.centers[g.sample_centers(self.centers)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "points": self.points,
            "truncation_radius": self.truncation_radius,
            "K": self.K,
            "r_min": self.radius_grid().r_min,
            "r_max": self.r_max,
            "centers": self.centers,
        }


@dataclass
class VerifyReport:
    inequality: str
    constant: float
    constant_refined: float
    passed: bool
    rows: list[tuple] = field(default_factory=list)
    witness: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    setup: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.constant_refined <= 2.0 * self.constant

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "constant": self.constant,
            "constant_refined": self.constant_refined,
            "passed": self.passed,
            "witness": dict(self.witness),
            "flags": list(self.flags),
            "setup": dict(self.setup),
            "extra": dict(self.extra),
            "rows": [list(r) for r in self.rows],
        }


ROW_FIELDS = ("member", "x", "t", "lhs", "rhs", "ratio")


# ---------------------------------------------------------------------------
# field transport between grids


def _prolong_values(values: np.ndarray, src: Grid, dst: Grid) -> np.ndarray:
    k = dst.points_per_axis // src.points_per_axis
    if k * src.points_per_axis != dst.points_per_axis or src.domain != dst.domain:
        raise ValueError("grids are not nested")
    if src.n == 1:
        return np.repeat(values, k)
    N = src.points_per_axis
    return np.repeat(np.repeat(values.reshape(N, N), k, axis=0), k, axis=1).ravel()


def scalar_on(f, grid: Grid) -> ScalarField:
    if isinstance(f, dict):
        return sample_scalar(f, grid)
    if f.grid == grid:
        return f
    return ScalarField(grid, _prolong_values(f.values, f.grid, grid))


def exponent_on(p, grid: Grid) -> ExponentField:
    if isinstance(p, (dict, int, float)):
        return sample_exponent(p, grid)
    if p.grid == grid:
        return p
    return replace(p, grid=grid, values=_prolong_values(p.values, p.grid, grid))


def order_on(alpha, grid: Grid, A_inf: float = 0.0) -> OrderField:
    if isinstance(alpha, (dict, int, float)):
        return sample_order(alpha, grid, A_inf)
    if alpha.grid == grid:
        return alpha
    return replace(alpha, grid=grid, values=_prolong_values(alpha.values, alpha.grid, grid))


# ---------------------------------------------------------------------------
# local inequalities


def _t_count(rg: RadiusGrid) -> int:
    return max(rg.count_upto(rg.r_max / 2), 1)


def integral_rhs(f: ScalarField, p_f: ExponentField, p_eta: ExponentField, centers, rg: RadiusGrid) -> np.ndarray:
    """t^eta(x, t) ∫_t^R r^(-eta(x, r)-1) ||f||_{L_p(B~(x, r))} dr on every node.

    The integral stops at the last radius node R: profiles are unknown beyond
    it, and the truncated value can only overstate the ratio.
    """
    r = rg.nodes
    P = profiles(f, p_f, rg, centers)
    eta = eta_table(p_eta, centers, r)
    I, _ = integrals_from(r, (r[None, :] ** (-eta - 1.0) * P).T, closure=False)
    return r[None, :] ** eta * I.T


def sup_rhs(f: ScalarField, p: ExponentField, centers, rg: RadiusGrid) -> np.ndarray:
    """t^eta(x, t) sup_{r > 2t} r^(-eta(x, r)) ||f||_{L_p(B~(x, r))}.

    Radii beyond the last node contribute their limit at r_max.
    """
    r = rg.nodes
    P = profiles(f, p, rg, centers)
    eta = eta_table(p, centers, r)
    Q = r[None, :] ** (-eta) * P
    suffix = np.maximum.accumulate(Q[:, ::-1], axis=1)[:, ::-1]
    first = np.searchsorted(r, 2.0 * r * (1 + 1e-12), side="right")
    S = np.where(first[None, :] < r.size, suffix[:, np.minimum(first, r.size - 1)], Q[:, -1:])
    return r[None, :] ** eta * S


def _ratios(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, 0.0))


@dataclass
class _Sweep:
    C: float
    rows: list
    witness: dict


def _sweep(lhs_rhs, points, grid: Grid, rg: RadiusGrid, member: int = 0) -> _Sweep:
    centers = np.array([grid.nearest_cell(x) for x in points])
    lhs, rhs = lhs_rhs(grid, centers)
    m = _t_count(rg)
    lhs, rhs = lhs[:, :m], rhs[:, :m]
    ratio = _ratios(lhs, rhs)
    rows = []
    for i, x in enumerate(points):
        for k in range(m):
            rows.append((member, [float(v) for v in x], float(rg.nodes[k]), float(lhs[i, k]), float(rhs[i, k]), float(ratio[i, k])))
    i, k = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    C = float(ratio[i, k])
    return _Sweep(C, rows, {"member": member, "x": [float(v) for v in points[i]], "t": float(rg.nodes[k])})


def _check(name, make_lhs_rhs, fs, setup: VerifySetup, extra=None) -> VerifyReport:
    """Run one inequality over members ``fs`` on the base and refined grids."""
    rg = setup.radius_grid()
    points = setup.sample_points()
    results = []
    for level in (0, 1):
        grid = setup.grid(level)
        best, rows, witness = 0.0, [], {}
        for j, f in enumerate(fs):
            s = _sweep(make_lhs_rhs(scalar_on(f, grid), grid), points, grid, rg, j)
            if level == 0:
                rows += s.rows
            if s.C > best or not witness:
                best, witness = max(best, s.C), s.witness
        results.append((best, rows, witness))
    (C, rows, witness), (C2, _, _) = results
    flags = []
    if not math.isfinite(C):
        flags.append("rhs-zero-with-positive-lhs")
    if not C2 <= 2.0 * C:
        flags.append("refinement-unstable")
    return VerifyReport(name, C, C2, not flags, rows, witness, flags, setup.to_dict(), extra or {})


def _members(f):
    return f if isinstance(f, (list, tuple)) else [f]


def verify_local_embedding(f, p, setup: VerifySetup | None = None) -> VerifyReport:
    """||f||_{B~(x,t)} against t^eta ∫_t^∞ r^(-eta-1) ||f||_{B~(x,r)} dr."""
    setup = setup or VerifySetup()
    rg = setup.radius_grid()

    def make(fg, grid):
        pg = exponent_on(p, grid)

        def lr(grid, centers):
            lhs = ball_norms(fg, pg, rg.nodes, centers)
            return lhs, integral_rhs(fg, pg, pg, centers, rg)

        return lr

    pg0 = exponent_on(p, setup.grid())
    extra = {"decay_constant": decay_condition_constant(pg0)} if pg0.p_inf is not None else {}
    return _check("lemma21", make, _members(f), setup, extra)


def verify_maximal_local(f, p, setup: VerifySetup | None = None) -> tuple[VerifyReport, VerifyReport]:
    """||Mf||_{B~(x,t)} against the sup-form and the integral-form right-hand sides."""
    setup = setup or VerifySetup()
    rg = setup.radius_grid()

    def make(rhs):
        def build(fg, grid):
            pg = exponent_on(p, grid)
            Mf = maximal(fg)
            return lambda grid, centers: (ball_norms(Mf, pg, rg.nodes, centers), rhs(fg, pg, centers))

        return build

    fs = _members(f)
    sup_form = _check("thm24", make(lambda fg, pg, c: sup_rhs(fg, pg, c, rg)), fs, setup)
    int_form = _check("eq27", make(lambda fg, pg, c: integral_rhs(fg, pg, pg, c, rg)), fs, setup)
    return sup_form, int_form


def verify_riesz_local(f, p, alpha: float, setup: VerifySetup | None = None) -> VerifyReport:
    """||I^alpha f||_{L_q(B~(x,t))} against t^eta_q ∫_t^∞ r^(-eta_q-1) ||f||_{L_p(B~(x,r))} dr."""
    return _riesz_check("eq28", f, p, float(alpha), setup or VerifySetup(), weighted=False)


def verify_weighted_riesz_local(f, p, alpha, setup: VerifySetup | None = None) -> VerifyReport:
    """As :func:`verify_riesz_local` with the weighted potential (1+|y|)^-gamma I^alpha f."""
    return _riesz_check("eq29", f, p, alpha, setup or VerifySetup(), weighted=True)


def _riesz_check(name, f, p, alpha, setup, weighted):
    rg = setup.radius_grid()
    g0 = setup.grid()
    p0 = exponent_on(p, g0)
    A_inf = decay_condition_constant(p0) if p0.p_inf is not None else 0.0
    extra = {"decay_constant": A_inf}

    def make(fg, grid):
        pg = exponent_on(p, grid)
        ag = order_on(alpha, grid, A_inf if weighted else 0.0)
        qg = sobolev_exponent(pg, ag)
        If = weighted_riesz(fg, ag) if weighted else riesz_potential(fg, ag)

        def lr(grid, centers):
            return ball_norms(If, qg, rg.nodes, centers), integral_rhs(fg, pg, qg, centers, rg)

        return lr

    return _check(name, make, _members(f), setup, extra)


# ---------------------------------------------------------------------------
# operator norm ratios


def apply_operator(op: str, f: ScalarField, alpha=None, radius_grid: RadiusGrid | None = None) -> ScalarField:
    if op == "identity":
        return f
    if op == "M":
        return maximal(f, radius_grid)
    if op == "Malpha":
        return fractional_maximal(f, order_on(alpha, f.grid), radius_grid)
    if op == "I":
        return riesz_potential(f, order_on(alpha, f.grid))
    if op == "weighted-I":
        return weighted_riesz(f, order_on(alpha, f.grid))
    raise ValueError(f"unknown operator {op!r}; expected one of {OPERATORS}")


@dataclass
class OperatorNormReport:
    operator: str
    max_ratio: float
    ratios: list[float]
    skipped: list[int]
    family: dict
    truncation: tuple[float, float]

    @property
    def finite(self) -> bool:
        return math.isfinite(self.max_ratio)

    def prefix_max(self, k: int) -> float:
        vals = [r for r in self.ratios[:k] if not math.isnan(r)]
        return max(vals) if vals else 0.0

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "max_ratio": self.max_ratio,
            "ratios": list(self.ratios),
            "skipped": list(self.skipped),
            "family": dict(self.family),
            "truncation": list(self.truncation),
        }


def estimate_operator_norm(
    op: str,
    src: MorreySpaceSpec,
    dst: MorreySpaceSpec,
    family: TestFamily,
    alpha=None,
    centers=None,
) -> OperatorNormReport:
    """max over the family of gm_norm(op f, dst) / gm_norm(f, src); zero members are skipped."""
    grid = src.grid
    if dst.grid != grid:
        raise ValueError("source and target spaces must share a grid")
    ratios, skipped = [], []
    for j, f in enumerate(family.members(grid)):
        den = gm_norm(f, src, centers)
        if den == 0.0:
            ratios.append(math.nan)
            skipped.append(j)
            continue
        ratios.append(gm_norm(apply_operator(op, f, alpha), dst, centers) / den)
    finite = [r for r in ratios if not math.isnan(r)]
    best = max(finite) if finite else 0.0
    return OperatorNormReport(op, best, ratios, skipped, family.to_dict(), (dst.radius_grid.r_min, dst.radius_grid.r_max))
