"""Extended reals, uniform grids and grid functions.

Extended reals are stored as IEEE floats: ``-inf`` and ``+inf`` are the two
sentinels and NaN is never allowed to appear.  Every place that could create
``-inf + inf`` goes through :func:`ext_add`, which raises instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from okrwn.errors import ExtRealError, GridError

NEG_INF = -math.inf
POS_INF = math.inf

_INF_CODES = {"+inf": POS_INF, "inf": POS_INF, "-inf": NEG_INF}


def ext_add(a, b):
    """Add extended reals (scalars or arrays); ``-inf + inf`` raises."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    clash = (np.isposinf(a_arr) & np.isneginf(b_arr)) | (np.isneginf(a_arr) & np.isposinf(b_arr))
    if np.any(clash):
        raise ExtRealError("NEG_INF + POS_INF is undefined")
    out = a_arr + b_arr
    return float(out) if out.ndim == 0 else out


def encode_ext(x: float):
    if x == POS_INF:
        return "+inf"
    if x == NEG_INF:
        return "-inf"
    return float(x)


def decode_ext(x) -> float:
    if isinstance(x, str):
        try:
            return _INF_CODES[x.strip().lower()]
        except KeyError:
            raise GridError(f"unknown extended-real code {x!r}") from None
    value = float(x)
    if math.isnan(value):
        raise GridError("NaN is not an extended real")
    return value


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``count`` nodes and inclusive endpoints."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise GridError("grid endpoints must be finite")
        if not self.lo < self.hi:
            raise GridError(f"need lo < hi, got {self.lo} >= {self.hi}")
        if int(self.count) != self.count or self.count < 2:
            raise GridError(f"need at least 2 nodes, got {self.count}")
        object.__setattr__(self, "count", int(self.count))

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def __len__(self):
        return self.count

    @classmethod
    def parse(cls, text: str) -> "Grid1D":
        """Parse ``lo:hi:n`` as used on the command line."""
        try:
            lo, hi, n = text.split(":")
            return cls(float(lo), float(hi), int(n))
        except ValueError as exc:
            raise GridError(f"grid spec {text!r} is not lo:hi:n") from exc

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "count": self.count}

    @classmethod
    def from_json(cls, data) -> "Grid1D":
        return cls(float(data["lo"]), float(data["hi"]), int(data["count"]))


def _coerce_axes(axes) -> tuple:
    if isinstance(axes, Grid1D):
        return (axes,)
    return tuple(axes)


@dataclass(frozen=True)
class GridFunction:
    """Extended-real values on the tensor product of ``axes``.

    ``extrapolated`` optionally marks nodes whose value depends on the grid
    boundary (the maximizer of a transform sat on the edge of the primal box).
    """

    axes: tuple
    values: np.ndarray
    extrapolated: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        axes = _coerce_axes(self.axes)
        object.__setattr__(self, "axes", axes)
        values = np.array(self.values, dtype=float)
        shape = tuple(ax.count for ax in axes)
        if values.shape != shape:
            raise GridError(f"values shape {values.shape} does not match axes {shape}")
        if np.isnan(values).any():
            raise GridError("grid function contains NaN")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.extrapolated is not None:
            flags = np.asarray(self.extrapolated, dtype=bool)
            if flags.shape != shape:
                raise GridError("extrapolation mask shape mismatch")
            object.__setattr__(self, "extrapolated", flags)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    def mesh(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (ndim,)``."""
        grids = np.meshgrid(*[ax.nodes for ax in self.axes], indexing="ij")
        return np.stack(grids, axis=-1)

    @classmethod
    def sample(cls, fn, axes) -> "GridFunction":
        """Evaluate a vectorized ``fn(points[..., ndim])`` on the grid."""
        axes = _coerce_axes(axes)
        grids = np.meshgrid(*[ax.nodes for ax in axes], indexing="ij")
        pts = np.stack(grids, axis=-1)
        return cls(axes, np.asarray(fn(pts), dtype=float))

    def to_json(self) -> dict:
        return {
            "axes": [ax.to_json() for ax in self.axes],
            "values": _encode_nested(self.values),
            "inf_code": "±inf",
        }

    @classmethod
    def from_json(cls, data) -> "GridFunction":
        axes = tuple(Grid1D.from_json(a) for a in data["axes"])
        values = _decode_nested(data["values"])
        return cls(axes, np.asarray(values, dtype=float).reshape(tuple(a.count for a in axes)))


def _encode_nested(values: np.ndarray):
    if values.ndim == 1:
        return [encode_ext(v) for v in values]
    return [_encode_nested(row) for row in values]


def _decode_nested(values):
    if isinstance(values, list):
        return [_decode_nested(v) for v in values]
    return decode_ext(values)


def nearest_index(grid: Grid1D, x: float) -> int:
    i = int(round((x - grid.lo) / grid.step))
    return min(max(i, 0), grid.count - 1)


def second_differences(values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[2:] - 2.0 * v[1:-1] + v[:-2]
