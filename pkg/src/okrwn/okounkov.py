"""Okounkov bodies from valuation samples and the interior / jet criteria.

Bodies are built from rescaled valuation vectors ``nu(F)/k``.  With lattice
(integer) exponents everything stays in exact rational arithmetic, so
boundary cases such as ``(1, 1)`` on the body of ``O(2)`` over ``P^2`` are
decided without tolerance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from okrwn.convex.bodies import ConvexBody, convex_hull, is_exact_number
from okrwn.errors import DegenerateBodyError, InvariantError, OkrwnError
from okrwn.valuations import FlagSpec, SparsePolynomial, flag_valuation


@dataclass(frozen=True)
class ValuationSample:
    k: int
    exponent: tuple

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvariantError(f"tensor power must be >= 1, got {self.k}", field="k")
        object.__setattr__(self, "exponent", tuple(self.exponent))

    def rescaled(self):
        if all(is_exact_number(c) for c in self.exponent):
            return tuple(Fraction(c, self.k) for c in self.exponent)
        return tuple(float(c) / self.k for c in self.exponent)


@dataclass(frozen=True)
class OkounkovBody:
    body: ConvexBody
    k_max: int
    source: str = "flag"

    @property
    def degenerate(self) -> bool:
        return not self.body.full_dimensional


@dataclass(frozen=True)
class SuccessiveMinima:
    eps: tuple

    def __post_init__(self):
        eps = tuple(self.eps)
        if not eps or any(e <= 0 for e in eps):
            raise InvariantError("minima must be positive", field="eps")
        if any(a > b for a, b in zip(eps, eps[1:])):
            raise InvariantError("minima must be nondecreasing", field="eps")
        object.__setattr__(self, "eps", eps)


def accumulate_body(samples, k_max: int | None = None, source: str = "flag") -> OkounkovBody:
    samples = list(samples)
    if not samples:
        raise OkrwnError("no valuation samples")
    n = len(samples[0].exponent)
    if any(len(s.exponent) != n for s in samples):
        raise InvariantError("samples have inconsistent arity", field="samples")
    if k_max is None:
        k_max = max(s.k for s in samples)
    pts = [s.rescaled() for s in samples if s.k <= k_max]
    if not pts:
        raise OkrwnError(f"no samples with k <= {k_max}")
    return OkounkovBody(convex_hull(pts), k_max, source)


def sections_samples(sections, k: int, flag: FlagSpec) -> list:
    """Valuation samples of explicit sections of ``kL`` in adapted coordinates."""
    out = []
    for f in sections:
        if not isinstance(f, SparsePolynomial):
            raise TypeError("sections must be SparsePolynomial")
        out.append(ValuationSample(k, flag_valuation(f, flag)))
    return out


def projective_samples(n: int, d: int, k_max: int = 1) -> list:
    """Monomial sections of ``O(kd)`` on ``P^n`` in the affine chart at a
    torus-fixed point; with the coordinate flag their valuations are the
    exponents themselves."""
    out = []
    for k in range(1, k_max + 1):
        for u in itertools.product(range(k * d + 1), repeat=n):
            if sum(u) <= k * d:
                out.append(ValuationSample(k, u))
    return out


@dataclass(frozen=True)
class VolumeCheck:
    vol: object
    target: object
    gap: object


def volume_identity_check(body: OkounkovBody, top_intersection) -> VolumeCheck:
    """Compare ``vol(body)`` with ``top_intersection / n!`` (signed gap)."""
    if body.degenerate:
        raise DegenerateBodyError("volume identity needs a full-dimensional body")
    vol = body.body.volume()
    n = body.body.dimension
    if is_exact_number(top_intersection) and body.body.exact:
        target = Fraction(top_intersection) / math.factorial(n)
    else:
        target = float(top_intersection) / math.factorial(n)
        vol = float(vol)
    return VolumeCheck(vol, target, vol - target)


def default_margin(body: ConvexBody) -> float:
    return 1e-6 * body.diameter()


def interior_certificate(body, point, margin: float | None = None) -> bool:
    """True iff the closed margin-ball around ``point`` lies strictly inside."""
    cb = body.body if isinstance(body, OkounkovBody) else body
    if margin is None:
        margin = default_margin(cb)
    if margin <= 0:
        raise InvariantError("margin must be positive", field="margin")
    if not cb.full_dimensional:
        return False
    for s, h in zip(cb.slacks(point), cb.halfspaces):
        if s <= 0 or float(s) <= margin * h.norm():
            return False
    return True


def jet_certificate(body, k: int, margin: float | None = None) -> bool:
    """``(j+1, 1, ..., 1)`` interior for every ``j <= k``."""
    cb = body.body if isinstance(body, OkounkovBody) else body
    n = cb.dimension
    return all(interior_certificate(cb, (j + 1,) + (1,) * (n - 1), margin) for j in range(k + 1))


@dataclass(frozen=True)
class CriterionE:
    holds: bool
    lhs: object
    simplex: ConvexBody


def criterion_E(minima: SuccessiveMinima, k: int) -> CriterionE:
    """``(k+1)/eps_1 + 1/eps_2 + ... + 1/eps_n < 1`` and the simplex
    ``{a >= 0 : sum a_j / eps_j <= 1}``."""
    eps = minima.eps
    exact = all(is_exact_number(e) for e in eps)
    conv = Fraction if exact else float
    lhs = conv(k + 1) / conv(eps[0]) + sum((conv(1) / conv(e) for e in eps[1:]), conv(0))
    return CriterionE(bool(lhs < 1), lhs, ConvexBody.simplex(eps))


def projective_jet_fact(n: int, d: int, k: int) -> bool:
    """``K + O(d) = O(d - n - 1)`` on ``P^n`` generates k-jets iff ``d - n - 1 >= k``."""
    return d - n - 1 >= k
