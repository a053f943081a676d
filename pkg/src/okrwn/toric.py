"""Toric line-bundle models and their integrals.

A model is a lattice polytope ``P`` with a convex increasing support pair
``(phi_P, phi_P^*)`` in logarithmic coordinates ``y_j = log |z_j|^2``.
Integrals use the convention ``i dz ^ dz-bar = 2 dA`` per axis; with it the
density of ``K_X + L`` becomes ``(2 pi)^n int e^{-phi_P(y) + y_1 + ... + y_n} dy``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from okrwn.convex.bodies import ConvexBody, convex_hull, lattice_points
from okrwn.convex.grids import POS_INF, Grid1D, GridFunction
from okrwn.convex.legendre import gradient_image_body
from okrwn.errors import DivergenceError, InvariantError, QuadratureError

VOLUME_CONVENTION = "i dz^dzbar = 2 dA per axis"
Y_BOX = 40.0
DEFAULT_NODES = {1: 2001, 2: 401, 3: 81}


@dataclass(frozen=True)
class LatticePolytope:
    body: ConvexBody
    delzant: bool = True

    def __post_init__(self):
        b = self.body
        if not b.exact or any(c.denominator != 1 for v in b.vertices for c in v):
            raise InvariantError("vertices must be integral", field="polytope")
        if not b.full_dimensional:
            raise InvariantError("polytope must be full-dimensional", field="polytope")

    @property
    def dimension(self) -> int:
        return self.body.dimension

    @classmethod
    def from_vertices(cls, vertices, delzant: bool = True) -> "LatticePolytope":
        return cls(convex_hull([tuple(int(c) for c in v) for v in vertices]), delzant)


def _fs_phi(d):
    def phi(y):
        y = np.asarray(y, dtype=float)
        # d log(1 + sum e^{y_j}) evaluated stably
        z = np.concatenate([np.zeros(y.shape[:-1] + (1,)), y], axis=-1)
        m = z.max(axis=-1)
        return d * (m + np.log(np.exp(z - m[..., None]).sum(axis=-1)))

    return phi


def _xlogx(a):
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)


def _fs_phi_star(d, tol=1e-12):
    def phi_star(a):
        a = np.asarray(a, dtype=float)
        rest = d - a.sum(axis=-1)
        inside = (a >= -tol).all(axis=-1) & (rest >= -tol)
        a = np.clip(a, 0.0, None)
        rest = np.clip(rest, 0.0, None)
        val = _xlogx(a).sum(axis=-1) + _xlogx(rest) - d * math.log(d)
        return np.where(inside, val, POS_INF)

    return phi_star


@dataclass(frozen=True)
class ToricModel:
    polytope: LatticePolytope
    phi: Callable
    phi_star: Callable
    tag: str = "grid"
    params: dict = field(default_factory=dict)
    y_axes: tuple = ()

    def __post_init__(self):
        if not self.y_axes:
            n = self.polytope.dimension
            ax = Grid1D(-Y_BOX, Y_BOX, DEFAULT_NODES.get(n, 41))
            object.__setattr__(self, "y_axes", (ax,) * n)

    @property
    def n(self) -> int:
        return self.polytope.dimension

    def phi_grid(self) -> GridFunction:
        return GridFunction.sample(self.phi, self.y_axes)

    def with_axes(self, axes) -> "ToricModel":
        return ToricModel(self.polytope, self.phi, self.phi_star, self.tag, self.params, tuple(axes))

    def to_json(self) -> dict:
        out = {
            "polytope": {"vertices": [[int(c) for c in v] for v in self.polytope.body.sorted_vertices()]},
            "phi": self.tag,
            "params": dict(self.params),
        }
        if self.tag == "grid":
            out["grid"] = self.phi_grid().to_json()
        return out

    @classmethod
    def from_json(cls, data) -> "ToricModel":
        tag = data.get("phi", "fubini_study")
        params = data.get("params", {})
        if tag == "fubini_study":
            return fubini_study(int(params.get("n", 1)), int(params["d"]))
        if tag == "product":
            return product_model(params["degrees"])
        if tag == "grid":
            poly = LatticePolytope.from_vertices(data["polytope"]["vertices"])
            return from_grid(poly, GridFunction.from_json(data["grid"]))
        raise InvariantError(f"unknown phi kind {tag!r}", field="phi")


def fubini_study(n: int, d: int) -> ToricModel:
    """``O(d)`` on ``P^n``: ``phi_P(y) = d log(1 + sum e^{y_j})``, ``P = d * simplex``."""
    verts = [(0,) * n] + [tuple(d * int(i == j) for j in range(n)) for i in range(n)]
    return ToricModel(LatticePolytope.from_vertices(verts), _fs_phi(d), _fs_phi_star(d),
                      "fubini_study", {"n": n, "d": d})


def product_model(degrees) -> ToricModel:
    """Product of ``O(d_j)`` on ``P^1`` factors; ``P`` is a box."""
    degrees = tuple(int(d) for d in degrees)
    one_phi = [_fs_phi(d) for d in degrees]
    one_star = [_fs_phi_star(d) for d in degrees]

    def phi(y):
        y = np.asarray(y, dtype=float)
        return sum(f(y[..., j:j + 1]) for j, f in enumerate(one_phi))

    def phi_star(a):
        a = np.asarray(a, dtype=float)
        return sum(f(a[..., j:j + 1]) for j, f in enumerate(one_star))

    verts = list(itertools.product(*[(0, d) for d in degrees]))
    return ToricModel(LatticePolytope.from_vertices(verts), phi, phi_star, "product", {"degrees": list(degrees)})


def from_grid(polytope: LatticePolytope, phi_grid: GridFunction) -> ToricModel:
    """Model from sampled ``phi_P``; values off the grid use multilinear
    interpolation and the conjugate is a direct scan over the nodes."""
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator([ax.nodes for ax in phi_grid.axes], phi_grid.values,
                                     bounds_error=False, fill_value=None)
    pts = phi_grid.mesh().reshape(-1, phi_grid.ndim)
    vals = phi_grid.values.ravel()

    def phi(y):
        y = np.asarray(y, dtype=float)
        return interp(y.reshape(-1, phi_grid.ndim)).reshape(y.shape[:-1])

    def phi_star(a):
        a = np.asarray(a, dtype=float)
        flat = a.reshape(-1, phi_grid.ndim)
        out = np.array([np.max(pts @ row - vals) for row in flat])
        return out.reshape(a.shape[:-1])

    return ToricModel(polytope, phi, phi_star, "grid", {}, phi_grid.axes)


# -- sections -----------------------------------------------------------------


def sections_basis(model: ToricModel, k: int) -> list:
    if k < 1:
        raise InvariantError("k must be >= 1", field="k")
    return lattice_points(model.polytope.body, k)


@dataclass(frozen=True)
class SectionCheck:
    defect: float
    sup: float
    argmax: tuple
    boundary_supremum: bool


def normalized_section_check(model: ToricModel, u, k: int) -> SectionCheck:
    """``|sup_y exp(u.y - k phi_P(y) - k phi_P^*(u/k)) - 1|``."""
    u = np.asarray(u, dtype=float)
    a = u / k
    star = float(model.phi_star(a))
    if not np.isfinite(star):
        raise InvariantError(f"u/k = {a.tolist()} lies outside P", field="u")
    n = model.n
    grid = model.phi_grid()
    y = grid.mesh().reshape(-1, n)
    obj = y @ u - k * grid.values.ravel()
    j = int(np.argmax(obj))
    box = [(ax.lo, ax.hi) for ax in model.y_axes]
    res = optimize.minimize(lambda x: -(x @ u - k * float(model.phi(x))), y[j], method="L-BFGS-B", bounds=box)
    best = max(obj[j], -res.fun)
    x = res.x if -res.fun >= obj[j] else y[j]
    on_edge = any(abs(x[i] - lo) < 1e-6 or abs(x[i] - hi) < 1e-6 for i, (lo, hi) in enumerate(box))
    # on the boundary of P the supremum is only approached as |y| -> infinity
    on_face = any(float(sl) == 0 for sl in model.polytope.body.slacks(tuple(Fraction(int(c), k) for c in u)))
    sup = math.exp(best - k * star)
    return SectionCheck(abs(sup - 1.0), sup, tuple(float(c) for c in x), bool(on_edge or on_face))


@dataclass(frozen=True)
class GrowthCondition:
    phi_x: GridFunction
    max_violation: float
    samples: tuple


def growth_condition(model: ToricModel, k_max: int = 1) -> GrowthCondition:
    """The zero-fiber limit equals ``phi_P``; certify the lower bound
    ``(1/k) log |f^u_hom|^2 <= phi_x`` for every ``u`` in ``kP``, ``k <= k_max``."""
    grid = model.phi_grid()
    y = grid.mesh().reshape(-1, model.n)
    phi = grid.values.ravel()
    worst, samples = -math.inf, []
    for k in range(1, k_max + 1):
        for u in sections_basis(model, k):
            u_arr = np.array(u, dtype=float)
            # monomials are already homogeneous; normalized by e^{-k phi*(u/k)/2}
            lhs = (y @ u_arr - k * float(model.phi_star(u_arr / k))) / k
            worst = max(worst, float(np.max(lhs - phi)))
            samples.append((k, tuple(u)))
    return GrowthCondition(grid, worst, tuple(samples))


# -- integrals ----------------------------------------------------------------


@dataclass(frozen=True)
class ToricIntegralReport:
    value: float
    truncation_bound: float
    grid: list
    margin: float
    convention: str = VOLUME_CONVENTION

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "truncation_bound": self.truncation_bound,
            "grid": self.grid,
            "margin": self.margin,
            "convention": self.convention,
        }


def toric_integral(u_fun: GridFunction, shift, collar: float | None = None) -> ToricIntegralReport:
    """``(2 pi)^n int e^{-u(y) + shift.y} dy`` by the trapezoid rule on the grid.

    The shift must lie in the interior of the gradient image of ``u``;
    otherwise the integral diverges and DivergenceError is raised before any
    quadrature.  The truncation bound adds, for each box face, the face
    integral divided by the exponential decay rate there (which convexity
    keeps from decreasing further out).
    """
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    n = u_fun.ndim
    if len(shift) != n:
        raise InvariantError(f"shift has {len(shift)} entries, grid {n} axes", field="shift")
    body = gradient_image_body(u_fun)
    if collar is None:
        collar = 1e-6 * max(1.0, body.diameter())
    margin = body.interior_distance(shift)
    if margin <= collar:
        raise DivergenceError(
            f"shift {shift.tolist()} is not interior to the gradient image (margin {margin:.3g})"
        )
    y = u_fun.mesh()
    expo = -u_fun.values + y @ shift
    peak = float(expo.max())
    dens = np.exp(expo - peak)
    steps = [ax.step for ax in u_fun.axes]
    total = dens
    for k in reversed(range(n)):
        total = integrate.trapezoid(total, dx=steps[k], axis=k)
    scale = (2 * math.pi) ** n * math.exp(peak)
    value = float(total) * scale

    grads = np.gradient(u_fun.values, *steps, edge_order=2)
    if n == 1:
        grads = [grads]
    bound = 0.0
    for k in range(n):
        for side, sign in ((0, -1.0), (-1, 1.0)):
            idx = [slice(None)] * n
            idx[k] = side
            idx = tuple(idx)
            rate = float(np.min(sign * (grads[k][idx] - shift[k])))
            face = dens[idx]
            for j in reversed(range(n - 1)):
                face = integrate.trapezoid(face, dx=[s for i, s in enumerate(steps) if i != k][j], axis=j)
            face = float(face) * scale
            if face == 0.0:
                continue
            if rate <= 0:
                bound = POS_INF
                break
            bound += face / rate
    if not bound < 1e-3 * value:
        raise QuadratureError(f"truncation bound {bound:.3g} too large against value {value:.3g}; widen the grid")
    return ToricIntegralReport(value, bound, [ax.to_json() for ax in u_fun.axes], float(margin))


def reference_integral(model: ToricModel, shift, epsrel: float = 1e-11) -> float:
    """Independent oracle: adaptive (nested) quadrature of the closed form,
    centred on the peak of the integrand."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    n = model.n
    res = optimize.minimize(lambda y: float(model.phi(y)) - y @ shift, np.zeros(n))
    c, top = res.x, -float(res.fun)

    def f(*y):
        y = np.array(y)
        return math.exp(float(y @ shift) - float(model.phi(y)) - top)

    if n == 1:
        val, err = integrate.quad(f, c[0] - 200, c[0] + 200, points=[c[0]], epsabs=0, epsrel=epsrel, limit=400)
    else:
        ranges = [(c[j] - 80, c[j] + 80) for j in range(n)]
        val, err = integrate.nquad(f, ranges, opts={"epsabs": 0, "epsrel": epsrel, "limit": 200})
    if not np.isfinite(val) or err > 1e-6 * abs(val):
        raise QuadratureError(f"reference quadrature error {err:.3g}")
    return (2 * math.pi) ** n * val * math.exp(top)


# -- Bergman kernel -------------------------------------------------------------


@dataclass(frozen=True)
class BergmanCheck:
    K0: float
    integral: float
    K0_times_integral: float
    basis: tuple
    gram_diagonal: tuple
    convention: str = VOLUME_CONVENTION


def bergman_fixed_point_check(model: ToricModel, shift=None) -> BergmanCheck:
    """``K(0) * int e^{-phi_x} = 1`` for sections ``z^u dz`` (``shift`` = 1s) or
    functions (``shift`` = 0s).

    ``K(0)`` is the extremal quotient over the monomial basis; monomials are
    orthogonal by rotation invariance, so ``K(0) = sum_u |z^u(0)|^2 / G_uu``
    with ``G_uu`` from adaptive quadrature.  The integral of ``e^{-phi_x}``
    is evaluated on the growth-condition grid instead.
    """
    n = model.n
    shift = np.ones(n) if shift is None else np.atleast_1d(np.asarray(shift, dtype=float))
    body = model.polytope.body
    basis = [u for u in lattice_points(body, 1)
             if interior_point(body, np.array(u, dtype=float) + shift)]
    if tuple([0] * n) not in basis:
        raise DivergenceError("the constant section is not integrable: shift is not interior to P")
    gram = [reference_integral(model, np.array(u, dtype=float) + shift) for u in basis]
    K0 = sum((1.0 if not any(u) else 0.0) / g for u, g in zip(basis, gram))
    integral = toric_integral(growth_condition(model).phi_x, shift).value
    return BergmanCheck(K0, integral, K0 * integral, tuple(basis), tuple(gram))


def interior_point(body: ConvexBody, point) -> bool:
    return all(float(s) > 0 for s in body.slacks(tuple(float(c) for c in point)))


# -- radial Gram families ---------------------------------------------------------


def linear_ray(lam: float):
    """``hat v_t = lam * max(G + t, 0)`` with ``G = log(|z|^2 / (1 + |z|^2))``."""

    def hat_v(y, t):
        g = y - np.logaddexp(0.0, y)
        return lam * np.maximum(g + t, 0.0)

    def kinks(t):
        if lam == 0 or t <= 0:
            return []
        return [-t - math.log1p(-math.exp(-t))]

    return hat_v, kinks


def radial_gram_family(model: ToricModel, lam: float = 1.0, t_samples=None, hat_v=None, kinks=None):
    """Diagonal Gram matrices of ``z^j dz`` for ``K + L`` on ``P^1``.

    ``H(t)_jj = 2 pi int exp((j+1) y - phi_P(y) - hat v_t(y)) dy``; by default
    ``hat v_t`` is the ray of the linear test curve with critical value
    ``lam``.  Off-diagonal entries vanish by rotation invariance; this is
    confirmed numerically on an angular grid.  Returns a quadrature-backed
    GramFamily (evaluated lazily, cached).
    """
    from okrwn.filtrations import GramFamily

    if model.n != 1:
        raise InvariantError("radial families live on P^1 models", field="model")
    meta = {"lam": lam, **model.params}
    if hat_v is None:
        hat_v, kinks = linear_ray(lam)
        if model.tag == "fubini_study":
            meta["radial"] = {"d": model.params["d"], "lam": lam}
    if kinks is None:
        kinks = lambda t: []  # noqa: E731
    body = model.polytope.body
    exps = [u[0] for u in lattice_points(body, 1) if interior_point(body, (u[0] + 1.0,))]
    N = len(exps)
    theta = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    for j in exps:
        for k in exps:
            if j != k:
                off = abs(np.mean(np.exp(1j * (j - k) * theta)))
                if off > 1e-12:
                    raise InvariantError("off-diagonal angular integral does not vanish", field="gram")

    def entry(j, t):
        def f(y):
            return math.exp((j + 1) * y - float(model.phi(np.array([y]))) - float(hat_v(y, t)))

        cuts = sorted(kinks(t))
        edges = [-200.0] + cuts + [200.0]
        total, err_total = 0.0, 0.0
        for a, b in zip(edges, edges[1:]):
            val, err = integrate.quad(f, a, b, epsabs=0, epsrel=1e-11, limit=400)
            total += val
            err_total += err
        if not total > 0 or err_total > 1e-8 * total:
            raise QuadratureError(f"Gram entry {j} at t={t} did not converge")
        return 2 * math.pi * total

    def evaluator(t):
        return np.diag([entry(j, t) for j in exps])

    fam = GramFamily.quadrature_backed(N, evaluator, meta={"exponents": exps, **meta})
    if t_samples is not None:
        h0 = fam.H(0.0)
        for t in t_samples:
            ht = fam.H(float(t))
            if (np.diag(ht) > np.diag(h0) * (1 + 1e-10)).any():
                raise InvariantError(f"H({t}) exceeds H(0)", field="gram")
    return fam
