"""Weight matrices, weighted orders on exponents, valuations and homogenization.

Exponents are tuples of naturals.  A weight matrix ``beta`` orders them by
lexicographic comparison of ``T(a) = beta @ a``.  Coefficients stay exact
(ints, Fractions, or complex pairs of those) unless a float is supplied, in
which case the polynomial is flagged ``inexact`` and tiny terms are pruned.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from okrwn.errors import InvariantError, OkrwnError

MAX_WEIGHT_DIM = 6
PRUNE_REL = 1e-12


class Order(enum.Enum):
    LT = -1
    EQ = 0
    GT = 1


def _bareiss_det(m) -> int:
    a = [list(r) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


@dataclass(frozen=True)
class WeightMatrix:
    rows: tuple
    det: int = field(init=False)

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in r) for r in self.rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InvariantError("weight matrix must be square", field="rows")
        if n > MAX_WEIGHT_DIM:
            raise InvariantError(f"dimension {n} exceeds {MAX_WEIGHT_DIM}", field="rows")
        if any(c < 0 for r in rows for c in r):
            raise InvariantError("entries must be non-negative integers", field="rows")
        det = _bareiss_det(rows)
        if det == 0:
            raise InvariantError("weight matrix is singular", field="rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "det", det)

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def infinitesimal(self) -> bool:
        return all(c > 0 for c in self.rows[0])

    def T(self, a) -> tuple:
        if len(a) != self.n:
            raise InvariantError(f"exponent arity {len(a)} != {self.n}", field="exponent")
        return tuple(sum(b * x for b, x in zip(r, a)) for r in self.rows)

    @classmethod
    def identity(cls, n: int) -> "WeightMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def straightened(cls, n: int) -> "WeightMatrix":
        """First row all ones, then ``e_1, ..., e_{n-1}``."""
        rows = [tuple([1] * n)] + [tuple(int(i == j) for j in range(n)) for i in range(n - 1)]
        return cls(tuple(rows))

    def to_json(self):
        return [list(r) for r in self.rows]

    @classmethod
    def from_json(cls, data) -> "WeightMatrix":
        return cls(tuple(tuple(r) for r in data))


def beta_compare(a, g, beta: WeightMatrix) -> Order:
    if len(a) != len(g):
        raise InvariantError("exponent arities differ", field="exponent")
    ta, tg = beta.T(a), beta.T(g)
    if ta < tg:
        return Order.LT
    if ta > tg:
        return Order.GT
    return Order.EQ


# -- polynomials ---------------------------------------------------------------


def _is_exact(c) -> bool:
    if isinstance(c, bool):
        return False
    if isinstance(c, Rational):
        return True
    if isinstance(c, ExactComplex):
        return True
    return False


@dataclass(frozen=True)
class ExactComplex:
    """Gaussian rational ``re + i im`` with Fraction parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def __add__(self, o):
        o = _to_exact_complex(o)
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __mul__(self, o):
        o = _to_exact_complex(o)
        return ExactComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __eq__(self, o):
        try:
            o = _to_exact_complex(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re or self.im)

    def __abs__(self):
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))


def _to_exact_complex(c) -> ExactComplex:
    if isinstance(c, ExactComplex):
        return c
    if isinstance(c, Rational) and not isinstance(c, bool):
        return ExactComplex(Fraction(c))
    raise TypeError(f"{c!r} is not exact")


def _normalize_coeff(c):
    """Gaussian rationals with zero imaginary part collapse to Fraction."""
    if isinstance(c, ExactComplex) and c.im == 0:
        c = c.re
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


@dataclass(frozen=True)
class SparsePolynomial:
    """Finite sum of ``c * z^exp``; zero coefficients are never stored."""

    arity: int
    terms: dict
    inexact: bool = False
    pruned: int = 0  # number of float terms dropped below the pruning threshold

    def __post_init__(self):
        clean = {}
        for exp, c in dict(self.terms).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.arity or any(e < 0 for e in exp):
                raise InvariantError(f"bad exponent {exp}", field="terms")
            clean[exp] = clean.get(exp, 0) + c
        inexact = self.inexact or not all(_is_exact(c) for c in clean.values())
        pruned = self.pruned
        if inexact:
            clean = {e: complex(c) for e, c in clean.items()}
            top = max((abs(c) for c in clean.values()), default=0.0)
            kept = {e: c for e, c in clean.items() if abs(c) > PRUNE_REL * top}
            pruned += len(clean) - len(kept)
            clean = kept
        else:
            clean = {e: _normalize_coeff(c) for e, c in clean.items() if c != 0}
        object.__setattr__(self, "terms", dict(sorted(clean.items())))
        object.__setattr__(self, "inexact", inexact)
        object.__setattr__(self, "pruned", pruned)

    @classmethod
    def from_terms(cls, pairs, arity: int | None = None) -> "SparsePolynomial":
        """Build from ``[(coeff, exponent), ...]``; repeated exponents add up."""
        pairs = list(pairs)
        if arity is None:
            if not pairs:
                raise InvariantError("cannot infer arity of an empty polynomial", field="arity")
            arity = len(pairs[0][1])
        terms: dict = {}
        for c, e in pairs:
            e = tuple(e)
            terms[e] = terms.get(e, 0) + c
        return cls(arity, terms)

    @classmethod
    def monomial(cls, exp, coeff=1) -> "SparsePolynomial":
        return cls(len(exp), {tuple(exp): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def support(self) -> list:
        return list(self.terms)

    def __mul__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        if self.arity != other.arity:
            raise InvariantError("arity mismatch", field="arity")
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return SparsePolynomial(self.arity, out, self.inexact or other.inexact)

    def __add__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        if self.arity != other.arity:
            raise InvariantError("arity mismatch", field="arity")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return SparsePolynomial(self.arity, out, self.inexact or other.inexact)

    def shift(self, exp) -> "SparsePolynomial":
        """Multiply by the monomial ``z^exp``."""
        return SparsePolynomial(
            self.arity, {tuple(a + b for a, b in zip(e, exp)): c for e, c in self.terms.items()}, self.inexact
        )

    def __eq__(self, other):
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, tuple(self.terms.items())))

    def to_json(self) -> dict:
        terms = []
        for e, c in self.terms.items():
            if self.inexact:
                z = complex(c)
                re, im = z.real, z.imag
            else:
                z = _to_exact_complex(c)
                re, im = _encode_fraction(z.re), _encode_fraction(z.im)
            terms.append({"re": re, "im": im, "exp": list(e)})
        return {"arity": self.arity, "terms": terms}

    @classmethod
    def from_json(cls, data) -> "SparsePolynomial":
        terms = {}
        for t in data["terms"]:
            re, im = t.get("re", 0), t.get("im", 0)
            if isinstance(re, (int, str)) and isinstance(im, (int, str)):
                c = ExactComplex(Fraction(re), Fraction(im))
            else:
                c = complex(float(re), float(im))
            terms[tuple(t["exp"])] = c
        return cls(int(data["arity"]), terms)


def _encode_fraction(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _require_nonzero(f: SparsePolynomial):
    if f.is_zero():
        raise OkrwnError("valuation of the zero polynomial is undefined")


@dataclass(frozen=True)
class Valuation:
    exponent: tuple
    coefficient: object


def beta_valuation(f: SparsePolynomial, beta: WeightMatrix) -> Valuation:
    """The smallest support exponent in the beta-order, with its coefficient."""
    _require_nonzero(f)
    if f.arity != beta.n:
        raise InvariantError("arity mismatch", field="beta")
    exp = min(f.terms, key=beta.T)
    return Valuation(exp, f.terms[exp])


def homogenize(f: SparsePolynomial, j: int | None = None, beta_row=None) -> SparsePolynomial:
    """Lowest weighted-order part of ``f``.

    The weight is ``beta_row`` when given, else ``e_j`` (homogenize in the
    single variable ``z_j``), else all ones.  Scaling the homogenizing
    variables by ``s^w`` and dividing by ``s^d`` with ``d`` the minimal order,
    the limit ``s -> 0`` keeps exactly the terms of order ``d``.
    """
    _require_nonzero(f)
    n = f.arity
    if beta_row is not None:
        w = tuple(int(c) for c in beta_row)
    elif j is not None:
        if not 0 <= j < n:
            raise InvariantError(f"variable index {j} out of range", field="j")
        w = tuple(int(k == j) for k in range(n))
    else:
        w = (1,) * n
    if len(w) != n or any(c < 0 for c in w):
        raise InvariantError("weight row must be n non-negative integers", field="beta_row")
    order = {e: sum(a * b for a, b in zip(w, e)) for e in f.terms}
    d = min(order.values())
    return SparsePolynomial(n, {e: c for e, c in f.terms.items() if order[e] == d}, f.inexact)


def weighted_order(f: SparsePolynomial, w) -> int:
    _require_nonzero(f)
    return min(sum(a * b for a, b in zip(w, e)) for e in f.terms)


@dataclass(frozen=True)
class FlagSpec:
    """``order[j]`` is the coordinate cut out at step ``j`` of the flag."""

    order: tuple

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise InvariantError(f"{order} is not a permutation", field="order")
        object.__setattr__(self, "order", order)

    @classmethod
    def identity(cls, n: int) -> "FlagSpec":
        return cls(tuple(range(n)))


def flag_valuation(f: SparsePolynomial, flag: FlagSpec) -> tuple:
    """Iterated vanishing orders along the flag, in flag order."""
    _require_nonzero(f)
    if len(flag.order) != f.arity:
        raise InvariantError("flag length differs from arity", field="flag")
    terms = dict(f.terms)
    nu = []
    for var in flag.order:
        assert terms, "restriction of a nonzero polynomial became zero"
        m = min(e[var] for e in terms)
        nu.append(m)
        # divide by z_var^m, then restrict to z_var = 0
        terms = {e: c for e, c in terms.items() if e[var] == m}
    return tuple(nu)
