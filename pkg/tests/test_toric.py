import json
import math

import numpy as np
import pytest

from okrwn.convex.grids import Grid1D, GridFunction
from okrwn.convex.legendre import legendre_conjugate
from okrwn.errors import DivergenceError, InvariantError
from okrwn.toric import (
    LatticePolytope,
    ToricModel,
    bergman_fixed_point_check,
    fubini_study,
    growth_condition,
    normalized_section_check,
    product_model,
    radial_gram_family,
    reference_integral,
    sections_basis,
    toric_integral,
)


def test_sections_basis():
    assert sorted(sections_basis(fubini_study(1, 2), 1)) == [(0,), (1,), (2,)]
    assert len(sections_basis(fubini_study(2, 1), 2)) == 6
    assert sorted(sections_basis(fubini_study(1, 2), 3)) == [(j,) for j in range(7)]
    with pytest.raises(InvariantError):
        sections_basis(fubini_study(1, 2), 0)


def test_lattice_polytope_invariants():
    with pytest.raises(InvariantError):
        LatticePolytope.from_vertices([(0, 0), (1, 1)])


def test_phi_star_closed_form():
    m = fubini_study(1, 2)
    assert float(m.phi_star(np.array([0.0]))) == pytest.approx(0.0)
    assert float(m.phi_star(np.array([1.0]))) == pytest.approx(-2 * math.log(2))
    assert np.isposinf(m.phi_star(np.array([2.5])))


# -- normalized sections ---------------------------------------------------------------


def test_section_check_examples():
    m = fubini_study(1, 2)
    mid = normalized_section_check(m, (1,), 1)
    assert mid.defect < 1e-8 and not mid.boundary_supremum
    assert abs(mid.argmax[0]) < 1e-4
    zero = normalized_section_check(m, (0,), 1)
    assert zero.defect < 1e-8 and zero.boundary_supremum
    vert = normalized_section_check(m, (4,), 2)
    assert vert.defect < 1e-6 and vert.boundary_supremum
    with pytest.raises(InvariantError):
        normalized_section_check(m, (3,), 1)


@pytest.mark.parametrize("model", [fubini_study(1, 2), fubini_study(1, 4), product_model((2, 2))],
                         ids=["O2", "O4", "prod22"])
def test_section_bound_all_lattice_points(model):
    for k in range(1, 5):
        for u in sections_basis(model, k):
            assert normalized_section_check(model, u, k).defect < 1e-6


# -- growth condition ------------------------------------------------------------------


def test_growth_condition_p1():
    m = fubini_study(1, 2)
    gc = growth_condition(m)
    y = gc.phi_x.axes[0].nodes
    assert np.abs(gc.phi_x.values - 2 * np.logaddexp(0, y)).max() < 1e-12
    assert gc.max_violation <= 1e-9
    assert {u for _, u in gc.samples} == {(0,), (1,), (2,)}


def test_growth_condition_product_unit_box():
    m = product_model((1, 1))
    gc = growth_condition(m, k_max=2)
    mesh = gc.phi_x.mesh()
    assert np.abs(gc.phi_x.values - np.logaddexp(0, mesh).sum(-1)).max() < 1e-12
    assert gc.max_violation <= 1e-9


def test_conjugacy_on_grid():
    m = fubini_study(1, 2)
    a_ax = Grid1D(0.0, 2.0, 2001)
    star = GridFunction.sample(lambda a: m.phi_star(a), (a_ax,))
    y_ax = Grid1D(-5.0, 5.0, 101)
    back = legendre_conjugate(star, (y_ax,))
    assert np.abs(back.values - 2 * np.logaddexp(0, y_ax.nodes)).max() < 1e-4


# -- integrals -------------------------------------------------------------------------


def test_integral_p1_o2():
    rep = toric_integral(growth_condition(fubini_study(1, 2)).phi_x, [1.0])
    assert rep.value == pytest.approx(2 * math.pi, rel=1e-10)
    assert rep.truncation_bound < 1e-3 * rep.value
    assert "2 dA" in rep.to_json()["convention"]


def test_integral_p2_o2_diverges():
    with pytest.raises(DivergenceError):
        toric_integral(growth_condition(fubini_study(2, 2)).phi_x, [1.0, 1.0])


def test_integral_p2_o3_matches_reference():
    m = fubini_study(2, 3)
    rep = toric_integral(growth_condition(m).phi_x, [1.0, 1.0])
    ref = reference_integral(m, [1.0, 1.0])
    assert rep.value == pytest.approx(ref, rel=1e-8)
    assert rep.value == pytest.approx(2 * math.pi ** 2, rel=1e-8)


def test_integral_nonincreasing_in_u():
    phi = growth_condition(fubini_study(1, 3)).phi_x
    base = toric_integral(phi, [1.0]).value
    y = phi.axes[0].nodes
    bigger = GridFunction(phi.axes, phi.values + 0.1 * np.exp(-y ** 2))
    assert toric_integral(bigger, [1.0]).value <= base


# -- Bergman kernel ------------------------------------------------------------------


@pytest.mark.parametrize("model", [fubini_study(1, 2), fubini_study(1, 4)], ids=["O2", "O4"])
def test_bergman_fixed_point(model):
    chk = bergman_fixed_point_check(model)
    assert abs(chk.K0_times_integral - 1) < 1e-6
    assert chk.K0_times_integral >= 1 - 1e-9


def test_bergman_divergent_model():
    with pytest.raises(DivergenceError):
        bergman_fixed_point_check(fubini_study(1, 1))


# -- radial Gram families ---------------------------------------------------------------


def test_radial_family_basics():
    fam = radial_gram_family(fubini_study(1, 4), 1.0, t_samples=[1.0, 5.0])
    assert fam.N == 3
    h0 = fam.H(0.0)
    assert np.allclose(h0, np.diag(np.diag(h0))) and (np.diag(h0).real > 0).all()


def test_radial_family_zero_curve():
    fam = radial_gram_family(fubini_study(1, 4), hat_v=lambda y, t: 0.0 * y)
    assert np.allclose(fam.H(7.0), fam.H(0.0), rtol=1e-12)


def test_radial_family_constant_section_decay():
    fam = radial_gram_family(fubini_study(1, 4), 1.0)
    l20, l40 = (math.log(fam.H(t)[0, 0].real) for t in (20.0, 40.0))
    assert (l20 - l40) / 20 == pytest.approx(1.0, abs=0.05)


def test_radial_family_needs_p1():
    with pytest.raises(InvariantError):
        radial_gram_family(fubini_study(2, 3))


# -- serialization -------------------------------------------------------------------


@pytest.mark.parametrize("model", [fubini_study(2, 3), product_model((1, 2))], ids=["fs", "product"])
def test_model_json_roundtrip(model):
    back = ToricModel.from_json(json.loads(json.dumps(model.to_json())))
    assert back.params == model.params and back.tag == model.tag
    y = np.array([0.3, -1.2])
    assert float(back.phi(y)) == pytest.approx(float(model.phi(y)))


def test_grid_model_roundtrip_and_sections():
    m = fubini_study(1, 2).with_axes((Grid1D(-30.0, 30.0, 601),))
    gm = ToricModel.from_json(json.loads(json.dumps({**m.to_json(), "phi": "grid", "grid": m.phi_grid().to_json()})))
    assert gm.tag == "grid"
    assert float(gm.phi(np.array([0.05]))) == pytest.approx(2 * math.log1p(math.exp(0.05)), abs=1e-3)
    assert normalized_section_check(gm, (1,), 1).defect < 1e-3
