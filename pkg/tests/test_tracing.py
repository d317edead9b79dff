"""
Tests du relevé du bord géodésique des surfaces maillées et des orbites
"""

import math
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.compactify import Chamber
from minimal_lab.families import HorizontalSlice, RuledSurface
from minimal_lab.hyperbolic import INFINITY, AmbientPoint, GeodesicH2, HPoint, Isometry
from minimal_lab.mesh import build_mesh
from minimal_lab.tracing import (
    BASEPOINT,
    TraceConfig,
    orbit_slope_sample,
    trace_surface_boundary,
    translation_length,
)
from minimal_lab.utils import DegenerateGenerator, InvalidParams, MeshTooSmall


AXIS = GeodesicH2.between(0.0, math.inf)


@pytest.fixture(scope="module")
def diagonal_mesh():
    return build_mesh(RuledSurface(kind="diagonal", slope=0.5), resolution=(121, 121), radius=120.0)


@pytest.fixture(scope="module")
def diagonal_trace(diagonal_mesh):
    return trace_surface_boundary(diagonal_mesh)


class TestTraceSurface:
    """Intervalles de pentes des surfaces maillées"""

    def test_diagonal_chambers(self, diagonal_trace):
        assert diagonal_trace.chamber_bins() == [(0, 1), (180, -1)]
        interval = diagonal_trace.interval_at(0, 1)
        assert interval.lo == 0.0
        assert abs(interval.hi - 0.5) < 0.02
        assert interval.theta == INFINITY
        assert diagonal_trace.interval_at(90, 1) is None

    def test_diagonal_summary(self, diagonal_trace):
        summary = diagonal_trace.product_summary
        assert summary["corner+"] > 0 and summary["corner-"] > 0
        assert summary["cap+"] == summary["cap-"] == 0
        assert diagonal_trace.boundary.poles == set()
        assert 0.0 < diagonal_trace.coverage <= 1.0

    def test_vertical_translation_invariance(self, diagonal_mesh, diagonal_trace):
        phi = Isometry.vertical_translation(7.0)
        moved = trace_surface_boundary(diagonal_mesh.transformed(phi), basepoint=phi.apply(BASEPOINT))
        pd.testing.assert_frame_equal(moved.slope_table, diagonal_trace.slope_table)

    def test_hyperbolic_translation_invariance(self, diagonal_mesh, diagonal_trace):
        phi = Isometry.dilation(1.0)
        moved = trace_surface_boundary(diagonal_mesh.transformed(phi), basepoint=phi.apply(BASEPOINT))
        assert moved.chamber_bins() == diagonal_trace.chamber_bins()
        np.testing.assert_allclose(moved.slope_table["hi"], diagonal_trace.slope_table["hi"], rtol=1e-9)

    def test_slice_is_equator(self):
        mesh = build_mesh(HorizontalSlice(t=0.0), resolution=(64, 64), radius=120.0)
        result = trace_surface_boundary(mesh, bins=16)
        assert result.boundary.equator_full
        assert result.boundary.chamber_intervals == []
        assert result.coverage == 0.0

    def test_mesh_too_small(self):
        mesh = build_mesh(HorizontalSlice(), resolution=(16, 16), radius=10.0)
        with pytest.raises(MeshTooSmall):
            trace_surface_boundary(mesh)

    def test_config(self):
        with pytest.raises(InvalidParams):
            TraceConfig(bins=2)
        with pytest.raises(InvalidParams):
            TraceConfig(escape_radius=0.0)


class TestOrbits:
    """Orbites des translations hélicoïdales"""

    def test_orbit_slope(self):
        orbit = orbit_slope_sample(Isometry.translation_along(AXIS, 2.0, shift=1.0))
        assert orbit.tau == pytest.approx(2.0, rel=1e-12)
        np.testing.assert_allclose(orbit.raw_slopes, 0.5, rtol=1e-9)
        assert isinstance(orbit.limit, Chamber)
        assert orbit.limit.slope == pytest.approx(0.5, abs=1e-6)
        assert orbit.limit.theta == INFINITY

    def test_orbit_from_other_basepoint(self):
        base = AmbientPoint(HPoint(2.0, 3.0), -1.0)
        orbit = orbit_slope_sample(Isometry.translation_along(AXIS, 1.5, shift=-3.0), basepoint=base)
        assert orbit.limit.sign == -1
        assert orbit.limit.slope == pytest.approx(2.0, rel=1e-6)

    def test_translation_length(self):
        assert translation_length(Isometry.dilation(3.0)) == pytest.approx(3.0, rel=1e-12)

    def test_degenerate_generators(self):
        with pytest.raises(DegenerateGenerator):
            orbit_slope_sample(Isometry.rotation_about(HPoint(1.0, 0.0), 1.0, shift=1.0))
        with pytest.raises(DegenerateGenerator):
            orbit_slope_sample(Isometry.vertical_translation(1.0))
        with pytest.raises(DegenerateGenerator):
            orbit_slope_sample(Isometry(Isometry.dilation(1.0).moebius, vertical_flip=True))
