"""Chebyshev transforms, Azukawa functions and Chebyshev bodies of Reinhardt domains.

A complete Reinhardt domain is described by its logarithmic image
``K = {y : y_j = log |z_j|^2, z in X}``.  Monomials are extremal on such
domains, so the Chebyshev transform is the support function of ``K``:
``v(alpha) = log sup_X |z^alpha|^2 = sup_{y in K} alpha . y`` for ``alpha >= 0``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.optimize import linprog

from okrwn.convex.grids import POS_INF, GridFunction
from okrwn.errors import InvariantError, QuadratureError, UnsupportedError
from okrwn.valuations import WeightMatrix

_NEG_BIG = -1e6  # stands in for log 0 where a coordinate vanishes


@dataclass(frozen=True)
class ReinhardtDomain:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.params
        if self.kind == "polydisc":
            radii = tuple(float(r) for r in p["radii"])
            if not radii or min(radii) <= 0:
                raise InvariantError("radii must be positive", field="radii")
            object.__setattr__(self, "params", {"radii": radii})
        elif self.kind == "ball":
            if float(p["radius"]) <= 0 or int(p.get("n", 0)) < 1:
                raise InvariantError("need radius > 0 and n >= 1", field="radius")
            object.__setattr__(self, "params", {"radius": float(p["radius"]), "n": int(p["n"])})
        elif self.kind == "log_halfspaces":
            N = np.asarray([h[0] for h in p["halfspaces"]], dtype=float)
            c = np.asarray([h[1] for h in p["halfspaces"]], dtype=float)
            if (N < 0).any():
                raise InvariantError("normals must be non-negative for a complete domain", field="halfspaces")
            n = N.shape[1]
            for j in range(n):
                res = linprog(-np.eye(n)[j], A_ub=N, b_ub=c, bounds=[(None, None)] * n, method="highs")
                if res.status != 0:
                    raise InvariantError("log-image is unbounded above: domain is unbounded", field="halfspaces")
            object.__setattr__(self, "params", {"halfspaces": [(tuple(map(float, a)), float(b)) for a, b in zip(N, c)]})
        else:
            raise InvariantError(f"unknown domain kind {self.kind!r}", field="kind")

    @classmethod
    def polydisc(cls, radii) -> "ReinhardtDomain":
        return cls("polydisc", {"radii": radii})

    @classmethod
    def ball(cls, n: int, radius: float = 1.0) -> "ReinhardtDomain":
        return cls("ball", {"radius": radius, "n": n})

    @classmethod
    def log_halfspaces(cls, halfspaces) -> "ReinhardtDomain":
        """``{z : sum_j N_ij log |z_j|^2 < c_i for all i}``."""
        return cls("log_halfspaces", {"halfspaces": halfspaces})

    @property
    def n(self) -> int:
        if self.kind == "polydisc":
            return len(self.params["radii"])
        if self.kind == "ball":
            return self.params["n"]
        return len(self.params["halfspaces"][0][0])

    @property
    def contains_origin(self) -> bool:
        return True

    def _halfspaces(self):
        hs = self.params["halfspaces"]
        return np.array([h[0] for h in hs]), np.array([h[1] for h in hs])

    def contains_log(self, y) -> bool:
        """Membership of a point of the log-image (``y_j = log |z_j|^2``)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "polydisc":
            return bool((y < 2 * np.log(self.params["radii"])).all())
        if self.kind == "ball":
            return bool(np.exp(y).sum() < self.params["radius"] ** 2)
        N, c = self._halfspaces()
        return bool((N @ y < c).all())

    def upper_log_bounds(self) -> np.ndarray:
        """``sup_K y_j`` per coordinate."""
        if self.kind == "polydisc":
            return 2 * np.log(self.params["radii"])
        if self.kind == "ball":
            return np.full(self.n, 2 * math.log(self.params["radius"]))
        N, c = self._halfspaces()
        out = []
        for j in range(self.n):
            res = linprog(-np.eye(self.n)[j], A_ub=N, b_ub=c, bounds=[(None, None)] * self.n, method="highs")
            out.append(-res.fun)
        return np.array(out)

    def to_json(self) -> dict:
        params = dict(self.params)
        if self.kind == "polydisc":
            params["radii"] = list(params["radii"])
        if self.kind == "log_halfspaces":
            params["halfspaces"] = [[list(a), b] for a, b in params["halfspaces"]]
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_json(cls, data) -> "ReinhardtDomain":
        return cls(data["kind"], data.get("params", {}))


# -- Chebyshev transform ------------------------------------------------------------


def log_sup_norm_sq(domain: ReinhardtDomain, a) -> float:
    """``log sup_X |z^a|^2`` for ``a >= 0``; POS_INF when some ``a_j < 0``."""
    a = np.asarray(a, dtype=float)
    if len(a) != domain.n:
        raise InvariantError("exponent arity differs from the domain dimension", field="a")
    if (a < 0).any():
        return POS_INF
    if domain.kind == "polydisc":
        return float(a @ (2 * np.log(domain.params["radii"])))
    if domain.kind == "ball":
        s = a.sum()
        if s == 0:
            return 0.0
        nz = a[a > 0]
        return float(s * 2 * math.log(domain.params["radius"]) + (nz * np.log(nz / s)).sum())
    N, c = domain._halfspaces()
    if not a.any():
        return 0.0
    res = linprog(-a, A_ub=N, b_ub=c, bounds=[(None, None)] * domain.n, method="highs")
    if res.status != 0:
        raise InvariantError("support function is unbounded", field="domain")
    return float(-res.fun)


def monomial_sup_norm(domain: ReinhardtDomain, a) -> float:
    """``sup_X |z^a|``."""
    return math.exp(0.5 * log_sup_norm_sq(domain, a))


def domain_chebyshev(domain: ReinhardtDomain, alpha_axes) -> GridFunction:
    """Chebyshev transform on an alpha-grid: the support function of the log-image."""
    axes = tuple(alpha_axes)
    if len(axes) != domain.n:
        raise InvariantError("one alpha axis per coordinate", field="alpha_axes")
    mesh = np.stack(np.meshgrid(*[ax.nodes for ax in axes], indexing="ij"), -1)
    vals = np.array([log_sup_norm_sq(domain, a) for a in mesh.reshape(-1, domain.n)])
    return GridFunction(axes, vals.reshape(mesh.shape[:-1]))


# -- Azukawa functions ----------------------------------------------------------------


def _log_abs_sq(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    mag = np.abs(xi) ** 2
    with np.errstate(divide="ignore"):
        return np.where(mag > 0, np.log(np.where(mag > 0, mag, 1.0)), _NEG_BIG)


def _first_row(beta) -> np.ndarray:
    row = np.asarray(beta.rows[0] if isinstance(beta, WeightMatrix) else beta, dtype=float)
    if (row <= 0).any():
        raise InvariantError("weight is not infinitesimal (first row must be positive)", field="beta")
    return row


def azukawa_closed_form(domain: ReinhardtDomain, beta, x) -> float:
    """``A^n`` in log coordinates: the unique ``s`` with ``x - s*b`` on the boundary
    of the log-image (``b`` the first weight row)."""
    b = _first_row(beta)
    x = np.asarray(x, dtype=float)
    if domain.kind == "polydisc":
        return float(np.max((x - 2 * np.log(domain.params["radii"])) / b))
    if domain.kind == "log_halfspaces":
        N, c = domain._halfspaces()
        return float(np.max((N @ x - c) / (N @ b)))
    R2 = domain.params["radius"] ** 2

    def g(s):
        return math.log(np.exp(x - b * s).sum()) - math.log(R2)

    hi = float(np.max(x)) - math.log(R2) + math.log(len(x))
    lo = float(np.max(x)) - math.log(R2)
    lo, hi = lo / b.max() - 1.0, hi / b.min() + 1.0
    while g(lo) < 0:
        lo -= 10.0
    while g(hi) > 0:
        hi += 10.0
    return float(optimize.brentq(g, lo, hi, xtol=1e-15, rtol=1e-15))


def _slice_grid(b: np.ndarray, res: int) -> np.ndarray:
    """Points ``alpha >= 0`` with ``b . alpha = 1``."""
    n = len(b)
    pts = []
    for w in itertools.product(range(res + 1), repeat=n - 1):
        if sum(w) <= res:
            ww = np.array(list(w) + [res - sum(w)], dtype=float) / res
            pts.append(ww / b)
    return np.array(pts)


def azukawa_n(domain: ReinhardtDomain, beta, xi, method: str = "primal", res: int | None = None) -> float:
    """``A^n(xi) = sup_{b.alpha = 1, alpha >= 0} (sum alpha_j log |xi_j|^2 - v(alpha))``.

    ``method="primal"`` runs grid search over the slice followed by SLSQP
    refinement; ``method="closed"`` uses the boundary-crossing closed form.
    """
    b = _first_row(beta)
    if len(b) != domain.n:
        raise InvariantError("weight arity differs from the domain dimension", field="beta")
    x = _log_abs_sq(xi)
    if method == "closed":
        return azukawa_closed_form(domain, b, x)
    if method != "primal":
        raise InvariantError(f"unknown method {method!r}", field="method")
    n = domain.n
    if res is None:
        res = {1: 1, 2: 400, 3: 60}.get(n, 12)
    grid = _slice_grid(b, res)
    if not len(grid):
        raise InvariantError("empty constraint slice", field="beta")

    def obj(a):
        return float(a @ x) - log_sup_norm_sq(domain, np.clip(a, 0.0, None))

    vals = np.array([obj(a) for a in grid])
    a0 = grid[int(np.argmax(vals))]
    best = float(vals.max())
    if n > 1:
        out = optimize.minimize(
            lambda a: -obj(a), a0, method="SLSQP",
            bounds=[(0, None)] * n,
            constraints=[{"type": "eq", "fun": lambda a: float(b @ a) - 1.0}],
            options={"ftol": 1e-14, "maxiter": 200},
        )
        if out.success and abs(b @ out.x - 1) < 1e-9:
            best = max(best, -float(out.fun))
    return best


@dataclass(frozen=True)
class AzukawaFunction:
    evaluator: Callable
    weight: WeightMatrix

    def __call__(self, xi) -> float:
        return self.evaluator(xi)


def green_function(domain: ReinhardtDomain) -> Callable:
    """Pluricomplex Green function with pole at the centre (closed forms only)."""
    if domain.kind == "polydisc":
        lr = 2 * np.log(domain.params["radii"])

        def G(z):
            z = np.asarray(z, dtype=complex)
            if not np.any(z):
                return -math.inf
            return float(np.max(_log_abs_sq(z) - lr))

        return G
    if domain.kind == "ball":
        R2 = domain.params["radius"] ** 2

        def G(z):
            m = float(np.sum(np.abs(np.asarray(z, dtype=complex)) ** 2))
            return math.log(m / R2) if m > 0 else -math.inf

        return G
    raise UnsupportedError(f"no closed-form Green function for {domain.kind}")


def _weight_from_row(row) -> WeightMatrix:
    n = len(row)
    rows = [tuple(int(c) for c in row)] + [tuple(int(i == j) for j in range(n)) for i in range(n - 1)]
    return WeightMatrix(tuple(rows))


def azukawa_1_explicit(domain: ReinhardtDomain, beta_row, scales=(1e-3, 1e-4), agree_tol: float = 1e-6):
    """``A^1(xi) = limsup_{s->0} G(s^{b_1} xi_1, ..., s^{b_n} xi_n) - log |s|^2``.

    Evaluated at the given scales; the evaluator returns the value at the
    smallest scale and raises if consecutive scales disagree beyond
    ``agree_tol``.
    """
    G = green_function(domain)
    row = np.asarray(beta_row, dtype=float)
    weight = _weight_from_row(beta_row)
    _first_row(weight)

    def at_scale(xi, s):
        z = np.asarray(xi, dtype=complex) * s ** row
        return G(z) - 2 * math.log(s)

    def evaluator(xi):
        vals = [at_scale(xi, s) for s in scales]
        if all(v == -math.inf for v in vals):
            return -math.inf
        if max(vals) - min(vals) > agree_tol * max(1.0, abs(vals[-1])):
            raise QuadratureError(f"scale-and-limit not settled: {vals}")
        return vals[-1]

    return AzukawaFunction(evaluator, weight)


def homogeneity_defect(A: Callable, beta_row, xi, s_values=(0.5, 2.0, 3.7, 1e-2)) -> float:
    """``max_s |A(s^b xi) - A(xi) - log s^2|``."""
    b = np.asarray(beta_row, dtype=float)
    base = A(xi)
    xi = np.asarray(xi, dtype=complex)
    return max(abs(A(xi * s ** b) - base - 2 * math.log(s)) for s in s_values)


# -- Chebyshev bodies ----------------------------------------------------------------


@dataclass(frozen=True)
class ChebyshevBodyReport:
    volume: float
    descriptor: dict
    bergman_bound: float
    exact_kernel: float | None = None

    @property
    def gap(self) -> float | None:
        return None if self.exact_kernel is None else self.exact_kernel - self.bergman_bound

    def to_json(self) -> dict:
        return {"volume": self.volume, "bergman_bound": self.bergman_bound,
                "exact_kernel": self.exact_kernel, "gap": self.gap, "body": self.descriptor}


def exact_kernel_at_center(domain: ReinhardtDomain) -> float | None:
    """Bergman kernel on the diagonal at 0: polydisc ``1/(pi^n prod r^2)``,
    ball ``n!/(pi^n R^{2n})``; None when no closed form is shipped."""
    n = domain.n
    if domain.kind == "polydisc":
        return 1.0 / (math.pi ** n * float(np.prod(np.square(domain.params["radii"]))))
    if domain.kind == "ball":
        return math.factorial(n) / (math.pi ** n * domain.params["radius"] ** (2 * n))
    return None


def sublevel_volume(A_log: Callable, n: int, t_upper, epsrel: float = 1e-9) -> float:
    """Volume of ``{xi : A(log |xi|^2) < 0}`` for a log-homogeneous, coordinatewise
    nondecreasing ``A``, as ``pi^n * int dt`` over ``t_j = |xi_j|^2``
    (equivalently ``(2 pi)^n int prod r_j dr_j``)."""
    t_upper = np.asarray(t_upper, dtype=float)

    def logs(ts):
        return np.array([math.log(t) if t > 0 else _NEG_BIG for t in ts])

    def tau(prefix):
        k = len(prefix)
        base = list(prefix) + [0.0] * (n - k)

        def g(t):
            pt = base.copy()
            pt[k] = t
            return A_log(logs(pt))

        hi = t_upper[k] * (1 + 1e-12)
        if g(0.0) >= 0:
            return 0.0
        if g(hi) < 0:
            return float(hi)
        return float(optimize.brentq(g, 0.0, hi, xtol=1e-14 * max(1.0, hi), rtol=1e-14))

    # nquad: variable 0 is innermost; map it to coordinate n-1
    def ranges_for(i):
        coord = n - 1 - i

        def rng(*outer):
            prefix = list(reversed(outer))[:coord]
            return (0.0, tau(prefix))

        return rng

    ranges = [ranges_for(i) for i in range(n)]
    val, err = integrate.nquad(lambda *args: 1.0, ranges, opts={"epsabs": 0, "epsrel": epsrel, "limit": 200})
    if not val > 0 or err > 1e-7 * val:
        raise QuadratureError(f"volume quadrature error {err:.3g}")
    return math.pi ** n * val


def chebyshev_body(domain: ReinhardtDomain, beta, which: str = "n") -> ChebyshevBodyReport:
    """``X^n = {A^n < 0}`` (or ``X^1`` from the Green-function limit with
    ``which="1"``), its volume and the Bergman lower bound ``1/|X|``."""
    b = _first_row(beta)
    if which == "n":
        def A_log(x):
            return azukawa_closed_form(domain, b, x)
    elif which == "1":
        A1 = azukawa_1_explicit(domain, b)

        def A_log(x):
            return A1(np.sqrt(np.exp(np.asarray(x))))
    else:
        raise InvariantError(f"unknown body {which!r}", field="which")
    upper = np.exp(domain.upper_log_bounds())
    vol = sublevel_volume(A_log, domain.n, upper)
    if not vol > 0:
        raise InvariantError("volume must be positive", field="volume")
    desc = {"coords": "t_j = |xi_j|^2", "which": which, "weight_row": b.tolist(), "domain": domain.to_json()}
    return ChebyshevBodyReport(vol, desc, 1.0 / vol, exact_kernel_at_center(domain))
