"""
Tests des compactifications produit et géodésique
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.compactify import (
    Cap,
    Chamber,
    ChamberInterval,
    Corner,
    DivergingSample,
    Equator,
    LimitConfig,
    NoLimit,
    Pole,
    VerticalCylinder,
    boundary_point_from_dict,
    correspondence_round_trip,
    geodesic_limit,
    geodesic_to_product,
    product_limit,
    product_to_geodesic,
    random_boundary_points,
    same_ideal,
)
from minimal_lab.hyperbolic import INFINITY, UNIT_GEODESIC, AmbientPoint, HPoint, IdealPoint, Isometry
from minimal_lab.utils import SampleTooShort


def ray(slope_t: float, n: int = 40, height: float = 0.0) -> DivergingSample:
    """Rayon x = e^k, y = 0, t = height + slope_t·k"""
    k = np.arange(1, n + 1, dtype=float)
    return DivergingSample.from_arrays(np.exp(k), np.zeros(n), height + slope_t * k)


def vertical_ray(sign: int, n: int = 40) -> DivergingSample:
    k = np.arange(1, n + 1, dtype=float)
    return DivergingSample.from_arrays(np.ones(n), np.zeros(n), sign * k)


class TestLimits:
    """Limites de suites divergentes dans les deux bords"""

    def test_horizontal_ray(self):
        s = ray(0.0, height=2.5)
        assert geodesic_limit(s) == Equator(INFINITY)
        limit = product_limit(s)
        assert isinstance(limit, VerticalCylinder)
        assert limit.theta == INFINITY
        assert limit.t == pytest.approx(2.5)

    def test_vertical_ray(self):
        assert geodesic_limit(vertical_ray(1)) == Pole(1)
        assert geodesic_limit(vertical_ray(-1)) == Pole(-1)
        limit = product_limit(vertical_ray(-1))
        assert isinstance(limit, Cap) and limit.sign == -1

    def test_diagonal_ray(self):
        limit = geodesic_limit(ray(-0.5))
        assert isinstance(limit, Chamber)
        assert limit.sign == -1
        assert limit.slope == pytest.approx(0.5, rel=1e-9)
        assert product_limit(ray(-0.5)) == Corner(INFINITY, -1)

    def test_slope_independent_of_vertical_shift(self):
        s = ray(2.0)
        shifted = s.transformed(Isometry.vertical_translation(7.0))
        assert geodesic_limit(shifted).slope == pytest.approx(geodesic_limit(s).slope, rel=1e-9)

    def test_isometry_moves_ideal_point(self):
        phi = Isometry.translation_along(UNIT_GEODESIC, 0.7)
        limit = geodesic_limit(ray(1.0).transformed(phi))
        assert isinstance(limit, Chamber)
        assert limit.slope == pytest.approx(1.0, rel=1e-6)
        assert same_ideal(limit.theta, phi.apply_ideal(INFINITY), tol=1e-6)

    def test_oscillating_sample(self):
        k = np.arange(1, 41, dtype=float)
        s = DivergingSample.from_arrays(np.exp(k), np.zeros(40), (-1.0) ** k * k)
        assert isinstance(geodesic_limit(s), NoLimit)

    def test_bounded_sample_too_short(self):
        s = DivergingSample.from_arrays(np.ones(5), np.zeros(5), np.arange(5.0))
        with pytest.raises(SampleTooShort):
            geodesic_limit(s)

    @pytest.mark.parametrize("height", [
        lambda k: 5.0 - 1.0 / k,
        lambda k: 5.0 - 10.0 / k,
        lambda k: 5.0 - 2.0 ** (-k),
    ])
    def test_height_converging_slowly(self, height):
        k = np.arange(1, 41, dtype=float)
        s = DivergingSample.from_arrays(np.exp(k), np.zeros(40), height(k))
        assert geodesic_limit(s) == Equator(INFINITY)
        limit = product_limit(s)
        assert isinstance(limit, VerticalCylinder)
        assert limit.theta == INFINITY
        assert limit.t == pytest.approx(5.0, abs=1e-2)

    def test_base_converging_to_interior_point(self):
        k = np.arange(1, 41, dtype=float)
        s = DivergingSample.from_arrays(1.0 + 1.0 / k, np.zeros(40), k)
        assert geodesic_limit(s) == Pole(1)
        limit = product_limit(s)
        assert isinstance(limit, Cap) and limit.sign == 1
        assert limit.p.x == pytest.approx(1.0, abs=0.05)
        assert limit.p.y == pytest.approx(0.0, abs=1e-12)

    def test_bounded_wobbling_base(self):
        """Base bornée qui oscille : pôle géodésique, pas de limite produit"""
        k = np.arange(1, 41, dtype=float)
        s = DivergingSample.from_arrays(1.0 + 0.5 * (-1.0) ** k, np.zeros(40), k)
        assert geodesic_limit(s) == Pole(1)
        assert isinstance(product_limit(s), NoLimit)

    def test_basepoint_invariance_on_curved_sample(self):
        k = np.arange(1, 81, dtype=float)
        x, y, t = np.exp(k), np.sin(k), 0.7 * k + 5.0 * 2.0 ** (-k)
        config = LimitConfig(escape_radius=50.0)
        here = geodesic_limit(DivergingSample.from_arrays(x, y, t), config)
        there = geodesic_limit(
            DivergingSample.from_arrays(x, y, t, basepoint=AmbientPoint.of(2.0, 3.0, -1.0)), config
        )
        assert isinstance(here, Chamber) and isinstance(there, Chamber)
        assert here.sign == there.sign == 1
        assert here.slope == pytest.approx(0.7, abs=1e-6)
        assert there.slope == pytest.approx(here.slope, abs=1e-6)
        assert same_ideal(here.theta, there.theta, tol=1e-6)


class TestCorrespondence:
    """Correspondance entre bord produit et bord géodésique"""

    def test_corner_blows_up_to_chamber(self):
        image = product_to_geodesic(Corner(IdealPoint(2.0), 1))
        assert isinstance(image, ChamberInterval)
        assert image.is_full
        assert image.contains(Chamber(IdealPoint(2.0), 1, 3.0))
        assert image.contains(Equator(IdealPoint(2.0)))
        assert image.contains(Pole(1))
        assert not image.contains(Pole(-1))

    def test_equator_blows_up_to_fiber(self):
        fiber = geodesic_to_product(Equator(IdealPoint(-1.0)))
        assert fiber.contains(VerticalCylinder(IdealPoint(-1.0), 42.0))
        assert not fiber.contains(VerticalCylinder(IdealPoint(1.0), 0.0))

    def test_pole_blows_up_to_cap(self):
        cap = geodesic_to_product(Pole(-1))
        assert cap.contains(Cap(-1, HPoint(3.0, 1.0)))
        assert not cap.contains(Cap(1, HPoint(3.0, 1.0)))

    def test_random_round_trips(self):
        rng = np.random.default_rng(0)
        points = random_boundary_points(rng, 1000)
        assert all(correspondence_round_trip(b) for b in points)

    def test_serialised_chamber(self):
        point = Chamber(INFINITY, -1, 0.25)
        assert boundary_point_from_dict(point.to_dict()) == point
        interval = ChamberInterval(IdealPoint(0.5), 1, 0.0, math.inf)
        assert interval.to_dict()["interval"][1] == "inf"
        assert ChamberInterval.from_dict(interval.to_dict()) == interval
