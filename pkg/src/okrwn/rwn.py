"""Test curves, subgeodesic rays and the Legendre correspondence between them.

A test curve is a table ``v[p, alpha]`` (concave and nonincreasing in alpha,
NEG_INF beyond its critical value); a subgeodesic ray is a table ``u[p, t]``
(convex in t, tending to 0 as t -> 0).  ``hat_transform`` and
``check_transform`` are the two partial Legendre transforms.

The sphere model carries the explicit family used for the 4*pi density
bound: with ``E = tan^2(d/2)`` and ``u_t = 2 log((1 + e^t E)/(1 + E))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from okrwn.convex.grids import NEG_INF, POS_INF, Grid1D, GridFunction, second_differences
from okrwn.convex.legendre import partial_inf_transform, partial_sup_transform
from okrwn.errors import GridError, InvariantError, QuadratureError

DEFAULT_T_GRID = Grid1D(1e-3, 30.0, 401)
DEFAULT_ALPHA_GRID = Grid1D(-2.5, 2.5, 201)
SHAPE_TOL = 1e-9


@dataclass(frozen=True)
class PointSet:
    ids: tuple
    phi: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        ids = tuple(self.ids)
        if len(set(ids)) != len(ids):
            raise InvariantError("identifiers must be unique", field="points")
        phi = np.asarray(self.phi, dtype=float).reshape(-1)
        if len(phi) != len(ids):
            raise InvariantError("one weight per point", field="phi")
        if not np.isfinite(phi).all():
            raise InvariantError("weights must be finite", field="phi")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "phi", phi)

    def __len__(self):
        return len(self.ids)

    @classmethod
    def of_size(cls, n: int) -> "PointSet":
        return cls(tuple(range(n)), np.zeros(n))

    def to_json(self) -> dict:
        out = {"ids": list(self.ids), "phi": self.phi.tolist()}
        if self.coords is not None:
            out["coords"] = np.asarray(self.coords).tolist()
        return out

    @classmethod
    def from_json(cls, data) -> "PointSet":
        coords = data.get("coords")
        return cls(tuple(data["ids"]), data["phi"], None if coords is None else np.asarray(coords))


@dataclass(frozen=True)
class CriticalValue:
    """Critical value with a bracketing interval; ``converged`` is False when
    the bracket is wider than the requested tolerance."""

    value: float
    lower: float
    upper: float
    converged: bool = True


def _point_axis(n: int) -> Grid1D:
    # sample points are carried as a dummy integer axis of the grid function
    return Grid1D(0.0, float(max(n - 1, 1)), max(n, 2))


def _as_gridfunction(values, last_axis: Grid1D) -> GridFunction:
    vals = np.asarray(values, dtype=float)
    if vals.shape[0] == 1:
        vals = np.vstack([vals, vals])
        return GridFunction((_point_axis(1), last_axis), vals)
    return GridFunction((_point_axis(len(vals)), last_axis), vals)


@dataclass(frozen=True)
class TestCurve:
    points: PointSet
    alpha_grid: Grid1D
    values: np.ndarray
    extrapolated: np.ndarray | None = field(default=None, compare=False)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (len(self.points), self.alpha_grid.count):
            raise InvariantError(f"shape {vals.shape} does not match points x alpha", field="values")
        if np.isnan(vals).any():
            raise InvariantError("NaN in test curve", field="values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def validate(self, tol: float = 1e-6) -> None:
        """Concave, nonincreasing, NEG_INF only as a suffix, limit 0 at alpha_lo <= 0."""
        for p, row in enumerate(self.values):
            finite = np.isfinite(row)
            if np.isposinf(row).any():
                raise InvariantError(f"point {p}: +inf in test curve", field="values")
            k = int(finite.sum())
            if not finite[:k].all():
                raise InvariantError(f"point {p}: NEG_INF is not a suffix", field="values")
            fin = row[:k]
            scale = tol * max(1.0, float(np.abs(fin).max(initial=0.0)))
            if (np.diff(fin) > scale).any():
                raise InvariantError(f"point {p}: not nonincreasing", field="values")
            if k >= 3 and (second_differences(fin) > scale).any():
                raise InvariantError(f"point {p}: not concave", field="values")
            if self.alpha_grid.lo <= 0 and k and abs(fin[0]) > scale:
                raise InvariantError(f"point {p}: no limit 0 at alpha_lo", field="values")

    @property
    def lambda_v(self) -> CriticalValue:
        return _lambda_v(self)

    def to_json(self) -> dict:
        gf = GridFunction((_point_axis(len(self.points)), self.alpha_grid),
                          self.values if len(self.points) > 1 else np.vstack([self.values] * 2))
        return {"kind": "test_curve", "points": self.points.to_json(), **gf.to_json()}

    @classmethod
    def from_json(cls, data) -> "TestCurve":
        pts = PointSet.from_json(data["points"])
        gf = GridFunction.from_json(data)
        return cls(pts, gf.axes[-1], gf.values[: len(pts)])


@dataclass(frozen=True)
class SubgeodesicRay:
    points: PointSet
    t_grid: Grid1D
    values: np.ndarray
    extrapolated: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.t_grid.lo <= 0:
            raise InvariantError("t-grid must start above 0", field="t_grid")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (len(self.points), self.t_grid.count):
            raise InvariantError(f"shape {vals.shape} does not match points x t", field="values")
        if not np.isfinite(vals).all():
            raise InvariantError("ray values must be finite", field="values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def validate(self, tol: float = 1e-6) -> None:
        t = self.t_grid.nodes
        for p, row in enumerate(self.values):
            scale = tol * max(1.0, float(np.abs(row).max()))
            if (second_differences(row) < -scale).any():
                raise InvariantError(f"point {p}: not convex in t", field="values")
            if (np.diff(row / t) < -scale / t[0]).any():
                raise InvariantError(f"point {p}: u/t decreases", field="values")

    @property
    def lambda_u(self) -> CriticalValue:
        return _lambda_u(self)

    def to_json(self) -> dict:
        gf = GridFunction((_point_axis(len(self.points)), self.t_grid),
                          self.values if len(self.points) > 1 else np.vstack([self.values] * 2))
        return {"kind": "subgeodesic_ray", "points": self.points.to_json(), **gf.to_json()}

    @classmethod
    def from_json(cls, data) -> "SubgeodesicRay":
        pts = PointSet.from_json(data["points"])
        gf = GridFunction.from_json(data)
        return cls(pts, gf.axes[-1], gf.values[: len(pts)])


# -- transforms ---------------------------------------------------------------


def hat_transform(v: TestCurve, t_grid: Grid1D = DEFAULT_T_GRID) -> SubgeodesicRay:
    gf = partial_sup_transform(_as_gridfunction(v.values, v.alpha_grid), t_grid)
    n = len(v.points)
    return SubgeodesicRay(v.points, t_grid, gf.values[:n], gf.extrapolated[:n])


def check_transform(u: SubgeodesicRay, alpha_grid: Grid1D = DEFAULT_ALPHA_GRID) -> TestCurve:
    gf = partial_inf_transform(_as_gridfunction(u.values, u.t_grid), alpha_grid)
    n = len(u.points)
    return TestCurve(u.points, alpha_grid, gf.values[:n], gf.extrapolated[:n])


def _lambda_v(v: TestCurve) -> CriticalValue:
    alpha = v.alpha_grid.nodes
    dead = np.all(np.isneginf(v.values), axis=0)
    if not dead.any():
        return CriticalValue(POS_INF, float(alpha[-1]), POS_INF, False)
    first = int(np.argmax(dead))
    if first == 0:
        return CriticalValue(NEG_INF, NEG_INF, float(alpha[0]), False)
    # v is usc, so the last live column is attained: lambda lies in [alpha[first-1], alpha[first])
    return CriticalValue(float(alpha[first - 1]), float(alpha[first - 1]), float(alpha[first]), True)


def _secant(row, t, lo, hi):
    i, j = np.searchsorted(t, lo), np.searchsorted(t, hi, side="right") - 1
    return (row[j] - row[i]) / (t[j] - t[i])


def _lambda_u(u: SubgeodesicRay, rel_tol: float = 1e-3) -> CriticalValue:
    t = u.t_grid.nodes
    T = t[-1]
    last = max(_secant(row, t, 0.75 * T, T) for row in u.values)
    prev = max(_secant(row, t, 0.5 * T, 0.75 * T) for row in u.values)
    lo, hi = sorted((prev, last))
    # convex rows: the last secant is the sharper lower bound for the slope
    return CriticalValue(float(last), float(lo), float(hi), bool(abs(last - prev) < rel_tol * max(1.0, abs(last))))


def critical_values(x) -> CriticalValue:
    if isinstance(x, TestCurve):
        return _lambda_v(x)
    if isinstance(x, SubgeodesicRay):
        return _lambda_u(x)
    raise TypeError(f"expected TestCurve or SubgeodesicRay, got {type(x).__name__}")


def roundtrip_defect(
    v: TestCurve, t_grid: Grid1D = DEFAULT_T_GRID, alpha_grid: Grid1D | None = None
) -> float:
    """Sup over finite nodes of ``|check(hat(v)) - v|``.

    A node finite on one side and NEG_INF on the other counts as infinite.
    """
    if alpha_grid is None:
        alpha_grid = v.alpha_grid
    if alpha_grid != v.alpha_grid:
        raise GridError("roundtrip compares on the curve's own alpha-grid")
    back = check_transform(hat_transform(v, t_grid), alpha_grid)
    a, b = v.values, back.values
    if (np.isneginf(a) != np.isneginf(b)).any():
        return POS_INF
    finite = np.isfinite(a)
    if not finite.any():
        return 0.0
    return float(np.abs(a[finite] - b[finite]).max())


# -- shipped families ---------------------------------------------------------


def linear_curve(G, lam: float, alpha_grid: Grid1D = DEFAULT_ALPHA_GRID) -> TestCurve:
    """``v_alpha = alpha G`` on ``(0, lam]``, 0 for alpha <= 0, NEG_INF beyond."""
    G = np.atleast_1d(np.asarray(G, dtype=float))
    if (G > 0).any():
        raise InvariantError("G must be nonpositive", field="G")
    alpha = alpha_grid.nodes
    vals = np.where(alpha[None, :] <= 0, 0.0, alpha[None, :] * G[:, None])
    vals = np.where(alpha[None, :] > lam + 1e-12, NEG_INF, vals)
    return TestCurve(PointSet(tuple(range(len(G))), G), alpha_grid, vals)


def zero_curve(n_points: int = 1, alpha_grid: Grid1D = DEFAULT_ALPHA_GRID) -> TestCurve:
    alpha = alpha_grid.nodes
    row = np.where(alpha <= 0, 0.0, NEG_INF)
    return TestCurve(PointSet.of_size(n_points), alpha_grid, np.tile(row, (n_points, 1)))


def ad0_value(E, alpha):
    """Closed-form ``inf_{t>0} {2 log((1+e^t E)/(1+E)) - t alpha}`` with ``0 log 0 = 0``."""
    E = float(E)
    a = float(alpha)
    if a <= 0:
        return 0.0
    if a > 2:
        return NEG_INF
    if a < 2 and E >= a / (2 - a):
        return 0.0

    def xlogx(x):
        return 0.0 if x == 0 else x * math.log(x)

    return a * math.log(E) + 2 * math.log(2 / (1 + E)) - xlogx(a) - xlogx(2 - a)


def ad0_ray(E, t):
    """``2 log((1 + e^t E)/(1 + E))``, stable for large t."""
    E = np.asarray(E, dtype=float)
    t = np.asarray(t, dtype=float)
    return 2 * (np.logaddexp(0.0, t + np.log(E)) - np.log1p(E))


def refined_partial_inf(E: float, alpha: float, t_grid: Grid1D = DEFAULT_T_GRID) -> float:
    """Numerical ``inf_{t>0}`` of the AD0 objective: grid argmin, then a bounded
    scalar refinement inside the bracketing cell; the t -> 0 value 0 is included."""
    t = t_grid.nodes
    obj = ad0_ray(E, t) - alpha * t
    j = int(np.argmin(obj))
    lo, hi = t[max(j - 1, 0)], t[min(j + 1, len(t) - 1)]
    res = optimize.minimize_scalar(
        lambda s: float(ad0_ray(E, s) - alpha * s), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return min(0.0, float(obj[j]), float(res.fun))


@dataclass(frozen=True)
class SphereModel:
    """Round sphere around a base point, parametrized by geodesic distance.

    The Kaehler potential in the stereographic coordinate ``w`` with
    ``|w|^2 = E = tan^2(d/2)`` is ``phi = 2 log(1 + E)``.
    """

    radial_grid: Grid1D

    def __post_init__(self):
        if self.radial_grid.lo < 0 or self.radial_grid.hi > math.pi:
            raise InvariantError("distances must lie in [0, pi]", field="radial_grid")

    @classmethod
    def from_params(cls, n_radial: int = 201, d_max: float = math.pi - 1e-3) -> "SphereModel":
        return cls(Grid1D(1e-6, d_max, n_radial))

    @property
    def E(self) -> np.ndarray:
        return np.tan(self.radial_grid.nodes / 2) ** 2

    @property
    def phi(self) -> np.ndarray:
        return 2 * np.log1p(self.E)

    @property
    def near_antipode(self) -> bool:
        """True when the grid reaches close enough to d = pi that E blows up."""
        return self.radial_grid.hi > math.pi - 1e-6

    def points(self) -> PointSet:
        return PointSet(tuple(range(self.radial_grid.count)), self.phi, self.radial_grid.nodes)


def theoremA_family(
    model: SphereModel,
    alpha_grid: Grid1D = DEFAULT_ALPHA_GRID,
    t_grid: Grid1D = DEFAULT_T_GRID,
    cross_check_tol: float | None = 1e-6,
) -> TestCurve:
    """The explicit curve on the sphere model, from the closed-form branches.

    With ``cross_check_tol`` set, each node whose minimizing t lies inside
    ``t_grid`` is compared with a refined numerical infimum; a mismatch
    raises InvariantError.
    """
    E = model.E
    alpha = alpha_grid.nodes
    vals = np.array([[ad0_value(e, a) for a in alpha] for e in E])
    if cross_check_tol is not None:
        for i, e in enumerate(E):
            for k, a in enumerate(alpha):
                # only where the minimizing t lies inside the t-grid
                if 0 < a < 2 and np.isfinite(vals[i, k]) and _stationary_t(e, a) < t_grid.hi:
                    num = refined_partial_inf(e, a, t_grid)
                    if abs(num - vals[i, k]) > cross_check_tol * max(1.0, abs(vals[i, k])):
                        raise InvariantError(
                            f"branch formula {vals[i, k]} != numerical {num} at E={e}, alpha={a}",
                            field="values",
                        )
    return TestCurve(model.points(), alpha_grid, vals)


def _stationary_t(E, alpha):
    return math.log(alpha / ((2 - alpha) * E)) if E > 0 else POS_INF


def ad0_curve(E_values, alpha_grid: Grid1D = DEFAULT_ALPHA_GRID) -> TestCurve:
    """The same family sampled at explicit E values instead of a distance grid."""
    E_values = np.atleast_1d(np.asarray(E_values, dtype=float))
    alpha = alpha_grid.nodes
    vals = np.array([[ad0_value(e, a) for a in alpha] for e in E_values])
    return TestCurve(PointSet(tuple(range(len(E_values))), 2 * np.log1p(E_values), E_values), alpha_grid, vals)


@dataclass(frozen=True)
class DensityBound:
    limit: float
    constant_4pi: float
    ratio: float
    sequence: tuple  # (t, value) pairs


def sphere_density_bound(model: SphereModel, t_values=(10.0, 12.0, 14.0)) -> DensityBound:
    """``lim e^t int e^{-phi} (1+E)^2/(1+e^t E)^2`` for the section ``dw``.

    The volume form is ``i dw ^ dw-bar = 2 dA`` and ``dA = pi dE`` after the
    angular integral; quadrature runs in ``x = log E`` where the integrand
    peaks at ``x = -t``.
    """
    seq = []
    for t in t_values:
        # e^{-phi} (1+E)^2 = 1 on this model
        def f(x, t=t):
            s = t + x
            return 2 * math.pi * math.exp(s - 2 * math.log1p(math.exp(s))) if s < 700 else 0.0

        val, err = integrate.quad(f, -t - 60, -t + 60, points=[-t], epsabs=0, epsrel=1e-12, limit=200)
        if not np.isfinite(val) or err > 1e-8 * abs(val):
            raise QuadratureError(f"density quadrature did not converge at t={t}")
        seq.append((float(t), float(val)))
    c4pi, err = integrate.quad(lambda r: 2 * math.pi * r / (1 + r * r / 4) ** 2, 0, math.inf, epsabs=0, epsrel=1e-12)
    if err > 1e-8:
        raise QuadratureError("reference constant quadrature did not converge")
    limit = seq[-1][1]
    return DensityBound(limit, float(c4pi), limit / c4pi, tuple(seq))


def sphere_sections_dimension(deg_L: int) -> dict:
    """For ``L = -K`` on P^1 (deg 2): ``K + L`` is trivial, one section,
    matching the bound ``deg L / 2``."""
    deg_KL = deg_L - 2
    dim = deg_KL + 1 if deg_KL >= 0 else 0
    return {"deg_L": deg_L, "dim_H0_K_plus_L": dim, "bound": deg_L / 2, "sharp": dim == deg_L / 2}
