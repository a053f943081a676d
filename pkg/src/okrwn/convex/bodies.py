"""Convex bodies in vertex + halfspace form.

Rational input (ints and :class:`fractions.Fraction`) keeps everything exact:
hull, facet normals, slacks and volume.  Float input goes through
``scipy.spatial.ConvexHull`` with a 1e-9 tolerance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from numbers import Rational

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from okrwn.errors import DegenerateBodyError, InvariantError

FLOAT_TOL = 1e-9


def is_exact_number(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def as_exact(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if is_exact_number(x):
        return Fraction(x)
    raise TypeError(f"{x!r} is not rational")


def encode_number(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if is_exact_number(x):
        return int(x)
    return float(x)


def decode_number(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def _det_exact(rows) -> Fraction:
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _rank_exact(rows) -> int:
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return 0
    rank, ncols = 0, len(m[0])
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _primitive(normal, offset):
    """Scale an exact halfspace so the normal is a primitive integer vector."""
    denoms = [Fraction(c).denominator for c in normal]
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), denoms, 1)
    ints = [int(Fraction(c) * lcm) for c in normal]
    g = reduce(math.gcd, (abs(c) for c in ints), 0) or 1
    scale = Fraction(lcm, g)
    return tuple(Fraction(c, g) for c in ints), Fraction(offset) * scale


@dataclass(frozen=True)
class Halfspace:
    """The closed halfspace ``normal . x <= offset``."""

    normal: tuple
    offset: object

    def slack(self, point):
        return self.offset - sum(a * b for a, b in zip(self.normal, point))

    def norm(self) -> float:
        return math.sqrt(sum(float(c) ** 2 for c in self.normal))


@dataclass(frozen=True)
class ConvexBody:
    dimension: int
    vertices: tuple
    halfspaces: tuple
    exact: bool = False
    full_dimensional: bool = True
    facets: tuple = ()  # simplicial facet triangulation (vertex index tuples), n >= 3 only

    # -- construction -------------------------------------------------------

    @classmethod
    def from_points(cls, points, exact: bool | None = None) -> "ConvexBody":
        return convex_hull(points, exact=exact)

    @classmethod
    def simplex(cls, edge_lengths) -> "ConvexBody":
        """``{x >= 0 : sum x_j / e_j <= 1}`` with vertices on the axes."""
        n = len(edge_lengths)
        pts = [tuple([0] * n)]
        for j, e in enumerate(edge_lengths):
            v = [0] * n
            v[j] = e
            pts.append(tuple(v))
        return convex_hull(pts)

    # -- queries -------------------------------------------------------------

    def slacks(self, point) -> list:
        """``offset - normal . point`` per halfspace (exact when possible)."""
        if self.exact and all(is_exact_number(c) or isinstance(c, str) for c in point):
            point = tuple(as_exact(c) for c in point)
        else:
            point = tuple(float(c) for c in point)
        return [h.slack(point) for h in self.halfspaces]

    def contains(self, point, tol: float = 0.0) -> bool:
        if not self.full_dimensional:
            return _in_convex_combination(self.vertices, point, tol)
        return all(s >= -tol * h.norm() for s, h in zip(self.slacks(point), self.halfspaces))

    def interior_distance(self, point) -> float:
        """Signed distance to the boundary (positive inside)."""
        if not self.full_dimensional:
            return -math.inf
        return min(float(s) / h.norm() for s, h in zip(self.slacks(point), self.halfspaces))

    def diameter(self) -> float:
        pts = np.array([[float(c) for c in v] for v in self.vertices])
        if len(pts) < 2:
            return 0.0
        diffs = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diffs ** 2).sum(-1)).max())

    def volume(self):
        if not self.full_dimensional:
            raise DegenerateBodyError("body is not full-dimensional; volume is zero")
        n = self.dimension
        if n == 1:
            (a,), (b,) = self.vertices
            return abs(b - a)
        if n == 2:
            return _shoelace(self.vertices)
        centre = _centroid(self.vertices, self.exact)
        total = Fraction(0) if self.exact else 0.0
        for facet in self.facets:
            rows = [[self.vertices[i][k] - centre[k] for k in range(n)] for i in facet]
            d = _det_exact(rows) if self.exact else float(np.linalg.det(np.array(rows, dtype=float)))
            total += abs(d)
        return total / math.factorial(n)

    def validate(self, tol: float = FLOAT_TOL) -> None:
        """Cross-check the two representations; raise InvariantError on mismatch."""
        if not self.full_dimensional:
            return
        for v in self.vertices:
            slacks = self.slacks(v)
            if any(float(s) < -tol * h.norm() for s, h in zip(slacks, self.halfspaces)):
                raise InvariantError(f"vertex {v} violates a halfspace", field="vertices")
            tight = sum(1 for s, h in zip(slacks, self.halfspaces) if abs(float(s)) <= tol * h.norm())
            if tight < self.dimension:
                raise InvariantError(f"vertex {v} is not extreme", field="vertices")

    def sorted_vertices(self) -> list:
        return sorted(self.vertices, key=lambda v: tuple(float(c) for c in v))

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "vertices": [[encode_number(c) for c in v] for v in self.sorted_vertices()],
            "halfspaces": [
                {"normal": [encode_number(c) for c in h.normal], "offset": encode_number(h.offset)}
                for h in self.halfspaces
            ],
            "full_dimensional": self.full_dimensional,
        }

    @classmethod
    def from_json(cls, data) -> "ConvexBody":
        pts = [tuple(decode_number(c) for c in v) for v in data["vertices"]]
        body = convex_hull(pts)
        if data.get("halfspaces"):
            given = [
                Halfspace(tuple(decode_number(c) for c in h["normal"]), decode_number(h["offset"]))
                for h in data["halfspaces"]
            ]
            for v in body.vertices:
                for h in given:
                    if float(h.slack(v)) < -FLOAT_TOL * h.norm():
                        raise InvariantError("stored halfspaces disagree with vertices", field="halfspaces")
        return body


# -- hull construction -------------------------------------------------------


def convex_hull(points, exact: bool | None = None) -> ConvexBody:
    pts = [tuple(p) for p in points]
    if not pts:
        raise DegenerateBodyError("empty point set")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise InvariantError("points have inconsistent arity", field="points")
    if exact is None:
        exact = all(is_exact_number(c) for p in pts for c in p)
    if exact:
        pts = sorted({tuple(Fraction(c) for c in p) for p in pts})
    else:
        pts = [tuple(float(c) for c in p) for p in pts]
        pts = [tuple(p) for p in np.unique(np.array(pts), axis=0)]

    base = pts[0]
    diffs = [[p[k] - base[k] for k in range(n)] for p in pts[1:]]
    if exact:
        rank = _rank_exact(diffs)
    else:
        rank = int(np.linalg.matrix_rank(np.array(diffs), tol=FLOAT_TOL)) if diffs else 0
    if rank < n:
        return ConvexBody(n, tuple(_extreme_degenerate(pts)), (), exact, full_dimensional=False)

    if n == 1:
        lo, hi = min(pts), max(pts)
        one = Fraction(1) if exact else 1.0
        hs = (Halfspace((one,), hi[0]), Halfspace((-one,), -lo[0]))
        return ConvexBody(1, (lo, hi), hs, exact)
    if n == 2 and exact:
        ring = _monotone_chain(pts)
        hs = []
        for p, q in zip(ring, ring[1:] + ring[:1]):
            normal = (q[1] - p[1], p[0] - q[0])
            hs.append(Halfspace(*_primitive(normal, normal[0] * p[0] + normal[1] * p[1])))
        return ConvexBody(2, tuple(ring), tuple(hs), True)
    return _scipy_hull(pts, n, exact)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(pts):
    """Counter-clockwise hull without collinear points."""
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _scipy_hull(pts, n, exact):
    arr = np.array([[float(c) for c in p] for p in pts])
    hull = ConvexHull(arr)
    index = {int(i): k for k, i in enumerate(sorted(hull.vertices))}
    verts = tuple(pts[i] for i in sorted(hull.vertices))
    centre = _centroid(verts, exact)
    facets, hs, seen = [], [], set()
    for simplex, eq in zip(hull.simplices, hull.equations):
        facets.append(tuple(index[int(i)] for i in simplex))
        if exact:
            p0 = pts[simplex[0]]
            rows = [[pts[i][k] - p0[k] for k in range(n)] for i in simplex[1:]]
            normal = []
            for k in range(n):
                minor = [r[:k] + r[k + 1:] for r in rows]
                normal.append((-1) ** k * _det_exact(minor))
            offset = sum(a * b for a, b in zip(normal, p0))
            if sum(a * b for a, b in zip(normal, centre)) > offset:
                normal, offset = [-c for c in normal], -offset
            normal, offset = _primitive(normal, offset)
            key = (normal, offset)
        else:
            normal, offset = tuple(eq[:-1]), -eq[-1]
            key = tuple(np.round(eq, 9))
        if key not in seen:
            seen.add(key)
            hs.append(Halfspace(tuple(normal), offset))
    return ConvexBody(n, verts, tuple(hs), exact, True, tuple(facets))


def _extreme_degenerate(pts):
    # Lower-dimensional bodies keep their distinct points; only the 1-point
    # and collinear cases are reduced to extreme points.
    if len(pts) <= 2:
        return pts
    base = pts[0]
    direction = next(
        ([p[k] - base[k] for k in range(len(base))] for p in pts[1:] if p != base), None
    )
    if direction is None:
        return [base]
    proj = [sum((p[k] - base[k]) * direction[k] for k in range(len(base))) for p in pts]
    collinear = all(
        abs(float(sum((p[k] - base[k]) ** 2 for k in range(len(base))) * sum(d * d for d in direction) - pr * pr))
        <= FLOAT_TOL
        for p, pr in zip(pts, proj)
    )
    if collinear:
        return [pts[int(np.argmin([float(x) for x in proj]))], pts[int(np.argmax([float(x) for x in proj]))]]
    return pts


def _centroid(verts, exact):
    n = len(verts[0])
    if exact:
        return tuple(sum(Fraction(v[k]) for v in verts) / len(verts) for k in range(n))
    return tuple(float(np.mean([v[k] for v in verts])) for k in range(n))


def _shoelace(ring):
    total = 0
    for p, q in zip(ring, ring[1:] + ring[:1]):
        total += p[0] * q[1] - q[0] * p[1]
    return abs(total) / 2


def _in_convex_combination(verts, point, tol):
    pts = np.array([[float(c) for c in v] for v in verts])
    m = len(pts)
    target = np.array([float(c) for c in point])
    a_eq = np.vstack([pts.T, np.ones(m)])
    b_eq = np.concatenate([target, [1.0]])
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs")
    if res.status == 0:
        return True
    if tol > 0:
        # allow a small residual in the affine combination
        dist = min(np.linalg.norm(pts - target, axis=1))
        return dist <= tol
    return False


def lattice_points(body: ConvexBody, scale=1) -> list:
    """Integer points of ``scale * body`` (exact bodies only)."""
    if not body.exact or not body.full_dimensional:
        raise InvariantError("lattice enumeration needs an exact full-dimensional body", field="body")
    scale = Fraction(scale)
    n = body.dimension
    lows = [math.ceil(min(v[k] for v in body.vertices) * scale) for k in range(n)]
    highs = [math.floor(max(v[k] for v in body.vertices) * scale) for k in range(n)]
    out = []
    for u in itertools.product(*[range(a, b + 1) for a, b in zip(lows, highs)]):
        if all(h.slack(tuple(Fraction(c) / scale for c in u)) >= 0 for h in body.halfspaces):
            out.append(tuple(u))
    return out
