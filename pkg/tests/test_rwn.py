import json
import math

import numpy as np
import pytest

from okrwn.convex.grids import NEG_INF, Grid1D
from okrwn.errors import InvariantError
from okrwn.rwn import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_T_GRID,
    PointSet,
    SphereModel,
    SubgeodesicRay,
    TestCurve,
    ad0_curve,
    ad0_ray,
    ad0_value,
    check_transform,
    critical_values,
    hat_transform,
    linear_curve,
    refined_partial_inf,
    roundtrip_defect,
    sphere_density_bound,
    sphere_sections_dimension,
    theoremA_family,
    zero_curve,
)

E_SET = (0.1, 1.0, 3.0, 10.0)


# -- hat transform -------------------------------------------------------------------


def test_hat_of_linear_curve():
    u = hat_transform(linear_curve([-1.0], 1.0))
    t = u.t_grid.nodes
    assert np.abs(u.values[0] - np.maximum(t - 1, 0)).max() < 1e-12
    u.validate()


def test_hat_of_zero_curve():
    u = hat_transform(zero_curve(3))
    assert np.abs(u.values).max() == 0.0


def test_hat_of_ad0_at_E1():
    alpha = Grid1D(-0.5, 2.5, 3001)
    u = hat_transform(ad0_curve([1.0], alpha), Grid1D(0.01, 8.0, 80))
    t = u.t_grid.nodes
    # the maximizer approaches alpha = 2 where v has a log singularity; error is O(h)
    assert np.abs(u.values[0] - 2 * np.log((1 + np.exp(t)) / 2)).max() < 0.1 * alpha.step


def test_hat_output_u_over_t_nondecreasing():
    u = hat_transform(ad0_curve(E_SET))
    t = u.t_grid.nodes
    for row in u.values:
        assert (np.diff(row / t) >= -1e-9).all()


# -- check transform ----------------------------------------------------------------


def test_check_of_linear_ray():
    t = Grid1D(1e-3, 10.0, 2001)
    G = np.array([-1.0, -0.3])
    ray = SubgeodesicRay(PointSet((0, 1), G), t, np.maximum(G[:, None] + t.nodes[None, :], 0.0))
    alpha = Grid1D(0.0, 1.0, 11)
    v = check_transform(ray, alpha)
    assert np.abs(v.values - alpha.nodes[None, :] * G[:, None]).max() < 2 * t.step


def test_check_of_zero_ray():
    ray = SubgeodesicRay(PointSet.of_size(1), DEFAULT_T_GRID, np.zeros((1, DEFAULT_T_GRID.count)))
    v = check_transform(ray)
    a = v.alpha_grid.nodes
    assert (v.values[0][a <= 0] == 0).all()
    assert np.isneginf(v.values[0][a > 0]).all()


def test_check_of_sphere_ray_at_E3():
    """E=3 >= 1/(2-1) puts alpha=1 on the zero branch.

    The unconstrained infimum over all real t would give log 3 - 2 log 2; the
    restriction t > 0 binds and the value is 0.
    """
    t = DEFAULT_T_GRID
    ray = SubgeodesicRay(PointSet.of_size(1), t, ad0_ray(3.0, t.nodes)[None, :])
    v = check_transform(ray, Grid1D(0.0, 2.0, 41))
    assert v.values[0][20] == pytest.approx(0.0, abs=1e-12)
    assert ad0_value(3.0, 1.0) == 0.0
    s = np.linspace(-10, 10, 200001)
    unconstrained = float(np.min(ad0_ray(3.0, s) - s))
    assert unconstrained == pytest.approx(math.log(3) - 2 * math.log(2), abs=1e-8)


def test_hat_check_reproduces_ray():
    u = hat_transform(ad0_curve(E_SET))
    back = hat_transform(check_transform(u, Grid1D(-2.5, 2.5, 401)), u.t_grid)
    assert np.abs(back.values - u.values).max() < 2e-2


# -- critical values ----------------------------------------------------------------


def test_lambda_v_sphere_family():
    v = theoremA_family(SphereModel.from_params(41))
    lam = critical_values(v)
    assert lam.value == pytest.approx(2.0, abs=1e-2)
    assert lam.lower <= 2.0 <= lam.upper


def test_lambda_linear():
    v = linear_curve([-1.0, -0.5], 0.7)
    assert critical_values(v).value == pytest.approx(0.7, abs=1e-12)
    lu = critical_values(hat_transform(v))
    assert lu.value == pytest.approx(0.7, abs=1e-3)
    assert lu.converged


def test_lambda_invariance_on_families():
    for v in (linear_curve([-2.0], 1.3), ad0_curve(E_SET)):
        lv, lu = critical_values(v), critical_values(hat_transform(v))
        assert abs(lv.value - lu.value) <= (lv.upper - lv.lower) + 1e-3


def test_critical_values_type_error():
    with pytest.raises(TypeError):
        critical_values(np.zeros(3))


# -- roundtrip -----------------------------------------------------------------------


def test_roundtrip_ad0_201():
    v = ad0_curve(E_SET, Grid1D(-2.5, 2.5, 201))
    assert roundtrip_defect(v, Grid1D(1e-3, 30.0, 201)) < 5e-3


def test_roundtrip_linear():
    v = linear_curve([-1.0, -0.25], 1.0)
    assert roundtrip_defect(v) < DEFAULT_ALPHA_GRID.step * 1.0


def test_roundtrip_zero():
    assert roundtrip_defect(zero_curve(2)) == 0.0


# -- sphere family ---------------------------------------------------------------


def test_ad0_alpha_zero_and_beyond():
    assert ad0_value(0.5, 0.0) == 0.0
    assert ad0_value(0.5, -1.0) == 0.0
    assert ad0_value(0.5, 2.5) == NEG_INF


def test_ad0_alpha2_branch_matches_numerics():
    # v_2 = 2 log E + 2 log(2/(1+E)) - 2 log 2 (0 log 0 = 0)
    for E in E_SET:
        closed = 2 * math.log(E) + 2 * math.log(2 / (1 + E)) - 2 * math.log(2)
        assert ad0_value(E, 2.0) == pytest.approx(closed, abs=1e-12)
        assert refined_partial_inf(E, 2.0) == pytest.approx(closed, abs=1e-9)


@pytest.mark.parametrize("E", E_SET)
def test_ad0_branch_formula_vs_numerical_inf(E):
    for a in np.arange(0.25, 1.76, 0.25):
        assert abs(ad0_value(E, a) - refined_partial_inf(E, a, Grid1D(1e-3, 30.0, 401))) < 1e-6


def test_sphere_family_validates():
    v = theoremA_family(SphereModel.from_params(21))
    v.validate()


def test_sphere_model_flags_antipode():
    m = SphereModel.from_params(11, math.pi - 1e-9)
    assert m.near_antipode
    assert (np.diff(m.E) > 0).all()
    assert not SphereModel.from_params(11, 3.0).near_antipode
    with pytest.raises(InvariantError):
        SphereModel(Grid1D(0.1, 4.0, 5))


def test_sphere_density_bound():
    b = sphere_density_bound(SphereModel.from_params(11))
    assert b.constant_4pi == pytest.approx(4 * math.pi, abs=1e-6)
    assert b.limit == pytest.approx(2 * math.pi, rel=1e-8)
    assert b.ratio == pytest.approx(0.5, rel=1e-8)
    vals = [v for _, v in b.sequence]
    assert all(abs(x - b.limit) < 1e-4 for x in vals)


def test_sphere_sections_dimension_is_sharp():
    rec = sphere_sections_dimension(2)
    assert rec["dim_H0_K_plus_L"] == 1 and rec["bound"] == 1 and rec["sharp"]


# -- invariants and serialization ------------------------------------------------------------


def test_testcurve_rejects_nonconcave():
    alpha = Grid1D(0.0, 1.0, 5)
    v = TestCurve(PointSet.of_size(1), alpha, np.array([[0.0, -1.0, -1.1, -3.0, -3.1]]))
    with pytest.raises(InvariantError):
        v.validate()


def test_testcurve_rejects_inner_neginf():
    alpha = Grid1D(0.0, 1.0, 4)
    v = TestCurve(PointSet.of_size(1), alpha, np.array([[0.0, NEG_INF, -1.0, NEG_INF]]))
    with pytest.raises(InvariantError):
        v.validate()


def test_testcurve_rejects_increasing():
    alpha = Grid1D(-1.0, 1.0, 3)
    v = TestCurve(PointSet.of_size(1), alpha, np.array([[0.0, 0.5, 1.0]]))
    with pytest.raises(InvariantError):
        v.validate()


def test_pointset_invariants():
    with pytest.raises(InvariantError):
        PointSet((0, 0), [0.0, 1.0])
    with pytest.raises(InvariantError):
        PointSet((0, 1), [0.0, math.inf])


def test_ray_requires_positive_t():
    with pytest.raises(InvariantError):
        SubgeodesicRay(PointSet.of_size(1), Grid1D(0.0, 1.0, 3), np.zeros((1, 3)))


def test_curve_and_ray_json_roundtrip():
    v = ad0_curve([0.1, 3.0])
    back = TestCurve.from_json(json.loads(json.dumps(v.to_json())))
    assert np.array_equal(back.values, v.values)
    u = hat_transform(linear_curve([-1.0], 0.5))
    ub = SubgeodesicRay.from_json(json.loads(json.dumps(u.to_json())))
    assert np.array_equal(ub.values, u.values)
