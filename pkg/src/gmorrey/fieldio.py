"""Field descriptors (JSON-style dicts) and CSV input/output for sampled fields.

Descriptors describe a function analytically so that the same object can be
sampled on any grid; this is how refinement studies re-create their inputs.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .fields import ExponentField, Grid, OrderField, ScalarField


def _distance(grid: Grid, center) -> np.ndarray:
    c = np.zeros(grid.n) if center is None else np.broadcast_to(np.asarray(center, dtype=float), (grid.n,))
    return np.sqrt(np.sum((grid.centers - c) ** 2, axis=1))


def _prolong(values, grid: Grid) -> np.ndarray:
    """Samples given on a coarser grid of the same box, repeated onto ``grid``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == grid.size:
        return v
    N = grid.points_per_axis
    M = round(v.size ** (1.0 / grid.n))
    if M**grid.n != v.size or N % M:
        raise ValueError(f"table of {v.size} samples does not fit a grid with {N} points per axis")
    k = N // M
    if grid.n == 1:
        return np.repeat(v, k)
    return np.repeat(np.repeat(v.reshape(M, M), k, axis=0), k, axis=1).ravel()


def sample_scalar(desc: dict, grid: Grid) -> ScalarField:
    """Sample a scalar descriptor.

    kinds: ``constant`` (value), ``power`` (beta, center; |x-c|^-beta with the
    distance clipped at h/2), ``indicator-ball`` (center, radius; closed ball),
    ``interval`` (a, b; 1-D closed indicator), ``table`` (values),
    ``gaussian-sum`` (amplitudes, centers, widths).
    """
    kind = desc.get("kind", "constant")
    if kind == "constant":
        v = np.full(grid.size, float(desc.get("value", 1.0)))
    elif kind == "power":
        d = np.maximum(_distance(grid, desc.get("center")), grid.h / 2)
        v = float(desc.get("amplitude", 1.0)) * d ** (-float(desc["beta"]))
    elif kind == "indicator-ball":
        d = _distance(grid, desc.get("center"))
        v = (d <= float(desc.get("radius", 1.0)) * (1 + 1e-12)).astype(float)
    elif kind == "interval":
        x = grid.centers[:, 0]
        v = ((x >= float(desc["a"])) & (x <= float(desc["b"]))).astype(float)
    elif kind == "table":
        v = _prolong(desc["values"], grid)
    elif kind == "gaussian-sum":
        v = np.zeros(grid.size)
        for a, c, s in zip(desc["amplitudes"], desc["centers"], desc["widths"]):
            v += float(a) * np.exp(-0.5 * (_distance(grid, c) / float(s)) ** 2)
    else:
        raise ValueError(f"unknown scalar kind {kind!r}")
    return ScalarField(grid, v)


def sample_exponent(desc, grid: Grid) -> ExponentField:
    """Sample an exponent descriptor.

    kinds: ``constant`` (value), ``table`` (values, p_inf), ``step`` (left,
    right, at), ``log-decay`` (p_inf, amplitude; p_inf + amplitude/ln(e+|x|)),
    ``log-holder`` (base, amplitude, center; base + amplitude/ln(e+1/|x-c|)),
    ``bump`` (base, height, center, width).
    """
    if isinstance(desc, (int, float)):
        desc = {"kind": "constant", "value": desc}
    kind = desc.get("kind", "constant")
    if kind == "constant":
        return ExponentField.constant(grid, float(desc["value"]))
    p_inf = desc.get("p_inf")
    if kind == "table":
        v = _prolong(desc["values"], grid)
    elif kind == "step":
        x = grid.centers[:, 0]
        v = np.where(x < float(desc.get("at", 0.0)), float(desc["left"]), float(desc["right"]))
    elif kind == "log-decay":
        p_inf = float(desc["p_inf"])
        v = p_inf + float(desc["amplitude"]) / np.log(math.e + _distance(grid, None))
    elif kind == "log-holder":
        d = np.maximum(_distance(grid, desc.get("center")), grid.h / 2)
        v = float(desc["base"]) + float(desc["amplitude"]) / np.log(math.e + 1.0 / d)
        if p_inf is None and grid.domain.unbounded:
            p_inf = float(desc["base"])
    elif kind == "bump":
        d = _distance(grid, desc.get("center"))
        v = float(desc["base"]) + float(desc["height"]) * np.exp(-((d / float(desc.get("width", 1.0))) ** 2))
        if p_inf is None and grid.domain.unbounded:
            p_inf = float(desc["base"])
    else:
        raise ValueError(f"unknown exponent kind {kind!r}")
    if p_inf is None and grid.domain.unbounded:
        raise ValueError(f"{kind} exponent on an unbounded domain needs p_inf")
    return ExponentField(grid, v, p_inf=None if p_inf is None else float(p_inf))


def sample_order(desc, grid: Grid, A_inf: float = 0.0) -> OrderField:
    """kinds: ``constant`` (value), ``table`` (values), ``sin-profile``
    (base, amplitude; base + amplitude sin(pi x1) exp(-|x|^2))."""
    if isinstance(desc, (int, float)):
        desc = {"kind": "constant", "value": desc}
    kind = desc.get("kind", "constant")
    A_inf = float(desc.get("A_inf", A_inf))
    if kind == "constant":
        return OrderField.constant(grid, float(desc["value"]), A_inf)
    if kind == "table":
        return OrderField(grid, _prolong(desc["values"], grid), A_inf, desc.get("alpha_inf"))
    if kind == "sin-profile":
        base = float(desc["base"])
        x1 = grid.centers[:, 0]
        r2 = np.sum(grid.centers**2, axis=1)
        v = base + float(desc["amplitude"]) * np.sin(math.pi * x1) * np.exp(-r2)
        return OrderField(grid, v, A_inf, base)
    raise ValueError(f"unknown order kind {kind!r}")


def exponent_to_dict(p: ExponentField) -> dict:
    if p.is_constant:
        return {"kind": "constant", "value": float(p.values[0])}
    d = {"kind": "table", "values": p.values.tolist()}
    if p.p_inf is not None:
        d["p_inf"] = p.p_inf
    return d


def write_field_csv(path, field: ScalarField, name: str = "value") -> None:
    grid = field.grid
    cols = ["x"] if grid.n == 1 else ["x1", "x2"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols + [name])
        for x, v in zip(grid.centers, field.values):
            w.writerow([repr(float(c)) for c in x] + [repr(float(v))])


def read_field_csv(path, grid: Grid) -> ScalarField:
    """Read the last column of a CSV written by :func:`write_field_csv`."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    values = [float(r[-1]) for r in rows[1:] if r]
    return ScalarField(grid, _prolong(values, grid))
