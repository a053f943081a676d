import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from okrwn.chebyshev import (
    ReinhardtDomain,
    azukawa_1_explicit,
    azukawa_closed_form,
    azukawa_n,
    chebyshev_body,
    domain_chebyshev,
    exact_kernel_at_center,
    homogeneity_defect,
    log_sup_norm_sq,
    monomial_sup_norm,
)
from okrwn.convex.grids import Grid1D
from okrwn.convex.grids import second_differences
from okrwn.errors import InvariantError, QuadratureError, UnsupportedError
from okrwn.valuations import WeightMatrix

UNIT2 = ReinhardtDomain.polydisc((1.0, 1.0))
BALL2 = ReinhardtDomain.ball(2)
R23 = ReinhardtDomain.polydisc((2.0, 3.0))
W2 = WeightMatrix.straightened(2)
# |z1| < 1, |z2| < 1, |z1 z2|^2 < 1/e
HS = ReinhardtDomain.log_halfspaces([((1, 0), 0.0), ((0, 1), 0.0), ((1, 1), -1.0)])


def test_domain_validation():
    with pytest.raises(InvariantError):
        ReinhardtDomain.polydisc((1.0, -1.0))
    with pytest.raises(InvariantError):
        ReinhardtDomain.ball(2, 0.0)
    with pytest.raises(InvariantError):
        ReinhardtDomain.log_halfspaces([((1, 1), 0.0)])  # unbounded along z1
    with pytest.raises(InvariantError):
        ReinhardtDomain.log_halfspaces([((1, -1), 0.0), ((0, 1), 0.0)])
    with pytest.raises(InvariantError):
        ReinhardtDomain("annulus", {})


@pytest.mark.parametrize("dom", [UNIT2, BALL2, R23, HS], ids=["polydisc", "ball", "radii23", "halfspaces"])
def test_domain_json_roundtrip(dom):
    back = ReinhardtDomain.from_json(json.loads(json.dumps(dom.to_json())))
    assert back == dom


def test_contains_log():
    assert HS.contains_log((-0.6, -0.6)) and not HS.contains_log((-0.4, -0.4))
    assert BALL2.contains_log((-1.0, -1.0)) and not BALL2.contains_log((0.0, -1.0))


# -- sup norms and the Chebyshev transform ---------------------------------------------


def test_monomial_sup_norm_examples():
    for a in [(0, 0), (3, 1), (2, 7)]:
        assert monomial_sup_norm(UNIT2, a) == pytest.approx(1.0)
    assert monomial_sup_norm(BALL2, (1, 1)) == pytest.approx(0.5)
    assert monomial_sup_norm(R23, (1, 2)) == pytest.approx(18.0)
    assert log_sup_norm_sq(UNIT2, (-1, 0)) == math.inf


def test_halfspace_sup_norm_by_lp():
    # sup |z1 z2|^2 = 1/e
    assert log_sup_norm_sq(HS, (1, 1)) == pytest.approx(-1.0)
    assert log_sup_norm_sq(HS, (0, 0)) == 0.0


def test_domain_chebyshev_examples():
    ax = Grid1D(0.0, 2.0, 21)
    assert np.abs(domain_chebyshev(UNIT2, (ax, ax)).values).max() == 0.0
    v = domain_chebyshev(BALL2, (ax, ax)).values
    a = np.stack(np.meshgrid(ax.nodes, ax.nodes, indexing="ij"), -1)
    s = a.sum(-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(a > 0, a * np.log(a / s[..., None]), 0.0).sum(-1)
    ent[0, 0] = 0.0
    assert np.abs(v - ent).max() < 1e-12
    v23 = domain_chebyshev(R23, (ax, ax)).values
    assert np.abs(v23 - (2 * a[..., 0] * math.log(2) + 2 * a[..., 1] * math.log(3))).max() < 1e-12


def test_domain_chebyshev_off_orthant_and_convex():
    ax = Grid1D(-1.0, 2.0, 31)
    v = domain_chebyshev(BALL2, (ax, ax)).values
    assert np.isposinf(v[0, 15])
    inner = v[10:, 10:]
    for row in list(inner) + list(inner.T):
        assert (second_differences(row) >= -1e-12).all()


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(0, 5), st.integers(0, 5)), st.tuples(st.integers(0, 5), st.integers(0, 5)),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.sampled_from(["polydisc", "ball"]))
def test_two_term_never_beats_monomial(a, b, c, kind):
    """On the torus where z^a peaks, the angular mean of |z^a + c z^b|^2 is
    |z^a|^2 + |c z^b|^2, so the sup of f is at least the monomial sup."""
    dom = R23 if kind == "polydisc" else BALL2
    a_arr = np.array(a, float)
    if kind == "polydisc":
        r = np.array([2.0, 3.0])
    else:
        r = np.sqrt(a_arr / a_arr.sum()) if a_arr.sum() else np.array([0.5, 0.5])
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    T1, T2 = np.meshgrid(th, th, indexing="ij")
    z1, z2 = r[0] * np.exp(1j * T1), r[1] * np.exp(1j * T2)
    f = z1 ** a[0] * z2 ** a[1] + (c if b != a else 0) * z1 ** b[0] * z2 ** b[1]
    assert 2 * math.log(max(np.abs(f).max(), 1e-300)) >= log_sup_norm_sq(dom, a) - 1e-9


# -- Azukawa functions ----------------------------------------------------------------


def test_azukawa_polydisc_is_max():
    xi = (0.2, 0.5)
    for method in ("primal", "closed"):
        assert azukawa_n(UNIT2, W2, xi, method=method) == pytest.approx(max(math.log(0.04), math.log(0.25)))


@pytest.mark.parametrize("c", [0.1, 0.3, 0.6])
def test_azukawa_ball_diagonal(c):
    for method in ("primal", "closed"):
        assert azukawa_n(BALL2, W2, (c, c), method=method) == pytest.approx(math.log(2 * c * c), abs=1e-9)


@pytest.mark.parametrize("dom", [UNIT2, BALL2, R23, HS], ids=["polydisc", "ball", "radii23", "halfspaces"])
def test_primal_matches_closed_form(dom):
    rng = np.random.default_rng(3)
    for _ in range(5):
        xi = rng.uniform(0.05, 2.0, size=2)
        for row in ((1, 1), (1, 2)):
            p = azukawa_n(dom, row, xi, method="primal")
            q = azukawa_n(dom, row, xi, method="closed")
            assert p == pytest.approx(q, abs=1e-7)


def test_azukawa_homogeneity():
    for dom in (UNIT2, BALL2, HS):
        for row in ((1, 1), (1, 2), (2, 3)):
            A = lambda z, dom=dom, row=row: azukawa_n(dom, row, z, method="closed")  # noqa: E731
            assert homogeneity_defect(A, row, (0.3, 0.45)) < 1e-8


def test_azukawa_convex_in_log_coordinates():
    rng = np.random.default_rng(5)
    for dom in (BALL2, HS):
        for _ in range(20):
            x, y = rng.uniform(-4, 1, size=(2, 2))
            mid = azukawa_closed_form(dom, (1, 2), (x + y) / 2)
            ends = (azukawa_closed_form(dom, (1, 2), x) + azukawa_closed_form(dom, (1, 2), y)) / 2
            assert mid <= ends + 1e-10


def test_azukawa_rejects_non_infinitesimal():
    with pytest.raises(InvariantError):
        azukawa_n(UNIT2, WeightMatrix.identity(2), (0.1, 0.1))
    with pytest.raises(InvariantError):
        azukawa_n(UNIT2, (1, 1, 1), (0.1, 0.1))


def test_azukawa_1_explicit():
    xi = (0.3, 0.4)
    A1 = azukawa_1_explicit(UNIT2, (1, 1))
    assert A1(xi) == pytest.approx(math.log(0.16))
    assert A1(xi) == pytest.approx(azukawa_n(UNIT2, W2, xi, method="closed"))
    B1 = azukawa_1_explicit(BALL2, (1, 1))
    assert B1(xi) == pytest.approx(math.log(0.25))
    # weighted row: the second coordinate is pushed to -inf by the limit
    W = azukawa_1_explicit(UNIT2, (1, 2))
    assert W(xi) == pytest.approx(math.log(0.09), abs=1e-6)
    assert homogeneity_defect(W, (1, 2), xi) < 1e-8
    with pytest.raises(UnsupportedError):
        azukawa_1_explicit(HS, (1, 1))


def test_azukawa_1_reports_unsettled_limit():
    # |xi_2| large enough that s^2 |xi_2|^2 still dominates at s = 1e-3
    W = azukawa_1_explicit(UNIT2, (1, 2), scales=(1e-1, 1e-2))
    with pytest.raises(QuadratureError):
        W((0.01, 50.0))


# -- Chebyshev bodies ---------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polydisc_and_ball_bodies(n):
    pd = chebyshev_body(ReinhardtDomain.polydisc((1.0,) * n), (1,) * n)
    assert pd.volume == pytest.approx(math.pi ** n, rel=1e-7)
    assert abs(pd.gap) <= 1e-6 * pd.exact_kernel
    b = chebyshev_body(ReinhardtDomain.ball(n), (1,) * n)
    assert b.volume == pytest.approx(math.pi ** n / math.factorial(n), rel=1e-7)
    assert abs(b.gap) <= 1e-6 * b.exact_kernel


def test_scaled_polydisc_body():
    rep = chebyshev_body(R23, (1, 1))
    assert rep.volume == pytest.approx(math.pi ** 2 * 36, rel=1e-7)
    assert rep.bergman_bound == pytest.approx(1 / (36 * math.pi ** 2), rel=1e-7)
    assert rep.to_json()["gap"] == rep.gap


def test_chain_is_equality_on_sharp_cases():
    for dom in (UNIT2, BALL2):
        x1 = chebyshev_body(dom, (1, 1), which="1").volume
        xn = chebyshev_body(dom, (1, 1), which="n").volume
        assert x1 <= xn * (1 + 1e-7)
        assert x1 == pytest.approx(xn, rel=1e-7)


def test_halfspace_body_equals_domain():
    """For a complete Reinhardt domain X^n is X itself: |X| = 2 pi^2 / e here."""
    rep = chebyshev_body(HS, (1, 1))
    assert rep.volume == pytest.approx(2 * math.pi ** 2 / math.e, rel=1e-7)
    assert rep.exact_kernel is None and rep.gap is None
    assert exact_kernel_at_center(HS) is None
