"""
Tests des familles explicites : rectangles hauts, caténoïdes, surfaces réglées,
courbes papillon.

Les valeurs de référence sont dans tests/goldens/. Pour les régénérer :
    MINIMAL_LAB_REGEN_GOLDENS=1 pytest tests/test_families.py
"""

import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.families import (
    ButterflyParams,
    ButterflyWitness,
    Infeasible,
    RuledSurface,
    TallRectangle,
    butterfly_curve,
    butterfly_feasibility,
    catenoid_for_height,
    catenoid_half_height,
    catenoid_height_closed_form,
    catenoid_neck,
    catenoid_profile,
    rho_profile,
    slab_disk_diameter,
    tall_f_closed_form,
    tall_f_inverse,
    tall_f_of_rho,
    tall_for_height,
    tall_height,
    tall_height_closed_form,
    tall_profile,
    tall_s_min,
)
from minimal_lab.utils import DomainError, InvalidParams, OutOfRange


GOLDENS_DIR = Path(__file__).parent / "goldens"
BUTTERFLY_Q = (-8.0, -0.125, 0.125, 8.0)


def _check_golden(name: str, key: str, values: list, rel: float = 1e-7):
    """Compare au golden, ou le réécrit si MINIMAL_LAB_REGEN_GOLDENS=1"""
    path = GOLDENS_DIR / f"{name}.json"
    golden = json.loads(path.read_text(encoding="utf-8"))
    if os.environ.get("MINIMAL_LAB_REGEN_GOLDENS") == "1":
        golden[key] = [float(v) for v in values]
        path.write_text(json.dumps(golden, indent=2, ensure_ascii=False), encoding="utf-8")
        pytest.skip(f"golden {name} régénéré")
    assert values == pytest.approx(golden[key], rel=rel)
    return golden


@pytest.fixture(scope="module")
def profile_half():
    return tall_profile(0.5)


class TestTallRectangle:
    """Profil et hauteur des rectangles hauts"""

    def test_heights_golden(self):
        golden = json.loads((GOLDENS_DIR / "tall_heights.json").read_text(encoding="utf-8"))
        _check_golden("tall_heights", "ell", [tall_height(c) for c in golden["C"]])

    def test_quadrature_matches_closed_form(self):
        for C in (0.1, 0.5, 0.9):
            assert tall_height(C) == pytest.approx(tall_height_closed_form(C), rel=1e-7)

    def test_heights_increase_from_pi(self):
        grid = [0.01 * k for k in range(1, 100)]
        heights = [tall_height_closed_form(c) for c in grid]
        assert all(h1 < h2 for h1, h2 in zip(heights, heights[1:]))
        assert all(h > math.pi for h in heights)
        assert tall_height_closed_form(1e-6) == pytest.approx(math.pi, abs=1e-5)

    def test_height_diverges_at_one(self):
        assert tall_height(0.999) > 9.5
        assert tall_height(0.9999) > 10.0
        assert math.isinf(tall_height(1.0))

    def test_domain(self):
        for C in (0.0, -0.2, 1.5):
            with pytest.raises(DomainError):
                tall_height(C)
        with pytest.raises(DomainError):
            tall_profile(1.01)

    def test_profile_samples(self, profile_half):
        expected = tall_f_closed_form(0.5, profile_half.s_samples)
        np.testing.assert_allclose(profile_half.f_samples, expected, rtol=1e-6, atol=1e-7)
        assert profile_half.height == pytest.approx(tall_height_closed_form(0.5), rel=1e-7)
        assert profile_half.s_min == pytest.approx(tall_s_min(0.5))

    def test_inverse(self):
        s_min = tall_s_min(0.5)
        s = s_min + np.array([0.01, 0.5, 3.0, 20.0])
        np.testing.assert_allclose(tall_f_inverse(0.5, tall_f_closed_form(0.5, s)), s, rtol=1e-7)

    def test_limit_profile(self):
        rho = np.array([0.1, 0.5, 2.0, 5.0])
        np.testing.assert_allclose(tall_f_of_rho(1.0, rho), tall_f_closed_form(1.0, np.sinh(rho)), rtol=1e-10)
        np.testing.assert_allclose(tall_f_inverse(1.0, tall_f_closed_form(1.0, np.sinh(rho))),
                                   np.sinh(rho), rtol=1e-9)

    def test_parameter_for_height(self):
        L = tall_height_closed_form(0.3)
        assert tall_for_height(L) == pytest.approx(0.3, rel=1e-9)
        with pytest.raises(DomainError):
            tall_for_height(3.0)

    def test_rectangle_height_must_match(self, profile_half):
        with pytest.raises(InvalidParams):
            TallRectangle(profile=profile_half, a=0.0, b=3.0)
        with pytest.raises(InvalidParams):
            TallRectangle(profile=profile_half, a=0.0, b=math.inf)

    def test_neck_at_mid_height(self, profile_half):
        tr = TallRectangle.with_height(profile_half, a=1.0)
        mid = 1.0 + 0.5 * tr.height
        assert rho_profile(tr, mid) == pytest.approx(profile_half.rho_min, rel=1e-9)
        assert rho_profile(tr, 1.0 + 0.1) == pytest.approx(rho_profile(tr, tr.b - 0.1), rel=1e-9)
        assert rho_profile(tr, 1.01) > rho_profile(tr, 1.5)
        with pytest.raises(OutOfRange):
            rho_profile(tr, 0.5)


class TestCatenoid:
    """Caténoïdes horizontales"""

    def test_necks_golden(self):
        golden = json.loads((GOLDENS_DIR / "catenoid_necks.json").read_text(encoding="utf-8"))
        _check_golden("catenoid_necks", "r_neck_squared", [catenoid_neck(c) ** 2 for c in golden["C"]],
                      rel=1e-12)

    def test_half_height_closed_form(self):
        for C in (0.6, 1.0, 5.0):
            assert catenoid_half_height(C) == pytest.approx(
                float(catenoid_height_closed_form(catenoid_neck(C), 1.0)), rel=1e-7)

    def test_heights_below_pi(self):
        assert 3.0 < 2.0 * catenoid_half_height(0.6) < math.pi
        heights = [2.0 * catenoid_half_height(c) for c in (0.6, 1.0, 5.0, 50.0)]
        assert all(h1 > h2 for h1, h2 in zip(heights, heights[1:]))

    def test_domain(self):
        for C in (0.5, 0.2, -1.0):
            with pytest.raises(DomainError):
                catenoid_profile(C)

    def test_radius_inverts_height(self):
        p = catenoid_profile(2.0)
        r = np.array([1.01 * p.r_neck, 0.7, 0.95])
        np.testing.assert_allclose(p.radius_at(p.height_at(r)), r, rtol=1e-8)
        assert float(p.radius_at(0.0)) == pytest.approx(p.r_neck, rel=1e-12)
        with pytest.raises(OutOfRange):
            p.radius_at(p.half_height + 1.0)

    def test_profile_is_symmetric(self):
        p = catenoid_profile(1.0, samples=32)
        np.testing.assert_allclose(p.t_samples, -p.t_samples[::-1], atol=1e-14)
        np.testing.assert_allclose(p.r_samples, p.r_samples[::-1])

    def test_parameter_for_height(self):
        C = catenoid_for_height(2.0)
        assert 2.0 * catenoid_half_height(C) == pytest.approx(2.0, rel=1e-8)
        with pytest.raises(DomainError):
            catenoid_for_height(3.5)

    def test_disk_grows_with_height(self):
        diameters = [slab_disk_diameter(ell) for ell in (1.0, 2.0, 3.0)]
        assert diameters[0] < diameters[1] < diameters[2]
        assert 0.8 < diameters[1] < 1.2


class TestRuledSurface:
    """Surfaces réglées"""

    def test_diagonal_height(self):
        surface = RuledSurface(kind="diagonal", slope=0.5)
        for tau in (-2.0, 0.0, 3.0):
            assert surface.point(tau, 0.7).t == pytest.approx(0.5 * tau)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParams):
            RuledSurface(kind="cone")


class TestButterfly:
    """Courbes papillon et faisabilité"""

    def test_feasible_configuration(self):
        witness = butterfly_feasibility(2.0, BUTTERFLY_Q)
        assert isinstance(witness, ButterflyWitness)
        assert witness.geodesic_distance == pytest.approx(math.acosh(70.015625 / 62.015625), rel=1e-9)
        assert witness.margin == pytest.approx(witness.disk_diameter - witness.geodesic_distance)
        assert witness.margin > 0.3
        assert witness.L > math.pi
        assert 2.0 * witness.rho_min < witness.safety * witness.margin * (1.0 + 1e-9)

    def test_edge_constant_matches_root_search(self):
        witness = butterfly_feasibility(2.0, BUTTERFLY_Q)
        target = witness.safety * witness.margin

        root = brentq(lambda c: 2.0 * math.asinh(tall_s_min(c)) - target, 1e-12, 1.0 - 1e-12,
                      xtol=1e-15, rtol=1e-13)
        assert 1.0 / math.cosh(target / 2.0) ** 2 == pytest.approx(root, rel=1e-10)
        assert witness.tall_C == pytest.approx(root, rel=1e-8)
        assert witness.tall_C > root

    def test_far_geodesics_infeasible(self):
        result = butterfly_feasibility(2.0, (-1.01, -0.99, 0.99, 1.01))
        assert isinstance(result, Infeasible)
        assert result.geodesic_distance > result.disk_diameter

    def test_order_required(self):
        with pytest.raises(DomainError):
            butterfly_feasibility(2.0, (1.0, -1.0, 0.5, 2.0))
        with pytest.raises(DomainError):
            butterfly_feasibility(3.5, BUTTERFLY_Q)

    def test_curve(self):
        curve = butterfly_curve(ButterflyParams(ell=2.0, L=4.0, a=0.0, b=1.0, q=BUTTERFLY_Q))
        assert len(curve.segments) == 12
        assert len(curve.loops()) == 1
        assert curve.on_cylinder
        assert curve.is_simple()
        assert len(curve.breakpoints()) == 4

    def test_params_validation(self):
        with pytest.raises(InvalidParams):
            ButterflyParams(ell=2.0, L=4.0, a=0.0, b=2.5, q=BUTTERFLY_Q)
        with pytest.raises(InvalidParams):
            ButterflyParams(ell=2.0, L=3.0, a=0.0, b=0.5, q=BUTTERFLY_Q)
