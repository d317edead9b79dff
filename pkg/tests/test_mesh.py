"""
Tests des maillages des familles explicites, de leurs résidus et des exports
"""

import math
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.families import (
    Catenoid,
    HorizontalSlice,
    RuledSurface,
    TallRectangle,
    VerticalFlat,
    catenoid_profile,
    tall_profile,
)
from minimal_lab.hyperbolic import Isometry
from minimal_lab.mesh import (
    _assemble,
    build_mesh,
    family_graph,
    mesh_residual,
    metric_areas,
    read_obj,
    save_mesh_csv,
    write_obj,
)
from minimal_lab.utils import InvalidParams, ResolutionTooLow


@pytest.fixture(scope="module")
def tall():
    return TallRectangle.with_height(tall_profile(0.5), a=1.0)


@pytest.fixture(scope="module")
def catenoid():
    return Catenoid(catenoid_profile(2.0), t0=0.5)


class TestBuildMesh:
    """Maillage des familles"""

    def test_slice(self):
        mesh = build_mesh(HorizontalSlice(t=2.0), resolution=(16, 24), radius=10.0)
        assert len(mesh.vertices) == 16 * 24
        assert len(mesh.triangles) > 0
        assert np.all(mesh.t == 2.0)
        assert np.all(mesh.x > 0)

    def test_tall_heights_stay_in_slab(self, tall):
        mesh = build_mesh(tall, resolution=(32, 32), radius=30.0)
        assert mesh.t.min() >= tall.a - 1e-9
        assert mesh.t.max() <= tall.b + 1e-9
        assert np.all(np.isfinite(mesh.vertices))

    def test_catenoid_heights(self, catenoid):
        mesh = build_mesh(catenoid, resolution=(32, 32), radius=20.0)
        b = catenoid.profile.half_height
        assert mesh.t.min() >= catenoid.t0 - b - 1e-9
        assert mesh.t.max() <= catenoid.t0 + b + 1e-9

    def test_provenance(self):
        mesh = build_mesh(RuledSurface(kind="helicoid", pitch=0.5), resolution=(16, 16), radius=5.0)
        assert mesh.provenance["family"]["family"] == "helicoid"
        assert mesh.provenance["resolution"] == [16, 16]

    def test_resolution_too_low(self):
        with pytest.raises(ResolutionTooLow):
            build_mesh(HorizontalSlice(), resolution=(4, 64))

    def test_unknown_family(self):
        with pytest.raises(InvalidParams):
            build_mesh("tall")
        with pytest.raises(InvalidParams):
            build_mesh(HorizontalSlice(), radius=-1.0)

    def test_transformed_mesh(self):
        mesh = build_mesh(VerticalFlat(), resolution=(8, 8), radius=2.0)
        moved = mesh.transformed(Isometry.vertical_translation(3.0))
        np.testing.assert_allclose(moved.t, mesh.t + 3.0)
        np.testing.assert_allclose(moved.x, mesh.x)

    def test_nan_triangles_dropped(self):
        x, y = np.meshgrid([1.0, 2.0, 3.0], [0.0, 1.0, 2.0], indexing="ij")
        t = np.zeros((3, 3))
        t[2, 2] = math.nan
        mesh = _assemble(x, y, t, wrap=False, provenance={})
        assert len(mesh.triangles) == 6
        assert 8 not in mesh.triangles
        assert np.all(np.isfinite(metric_areas(mesh.vertices, mesh.triangles)))


class TestFamilyResiduals:
    """Résidus des graphes locaux des familles"""

    def test_exact_families(self):
        assert mesh_residual(HorizontalSlice(t=1.5)).sup_norm == 0.0
        assert mesh_residual(VerticalFlat()).sup_norm == 0.0

    @pytest.mark.parametrize("family_name", ["tall", "catenoid", "diagonal", "helicoid"])
    def test_second_order_convergence(self, family_name, tall, catenoid):
        family = {
            "tall": tall,
            "catenoid": catenoid,
            "diagonal": RuledSurface(kind="diagonal", slope=0.5),
            "helicoid": RuledSurface(kind="helicoid", pitch=0.7),
        }[family_name]
        coarse = mesh_residual(family, (33, 33)).sup_norm
        fine = mesh_residual(family, (65, 65)).sup_norm
        assert fine < coarse / 2.5

    def test_window_too_small(self, tall):
        with pytest.raises(ResolutionTooLow):
            family_graph(tall, n=2)


class TestExport:
    """Exports OBJ et CSV"""

    def test_obj_round_trip(self, tmp_path, catenoid):
        mesh = build_mesh(catenoid, resolution=(12, 12), radius=5.0)
        path = write_obj(mesh, tmp_path / "catenoid.obj")
        assert path.read_text(encoding="utf-8").startswith("# minimal_lab mesh: catenoid")
        back = read_obj(path)
        np.testing.assert_array_equal(back.vertices, mesh.vertices)
        np.testing.assert_array_equal(back.triangles, mesh.triangles)

    def test_csv(self, tmp_path):
        mesh = build_mesh(HorizontalSlice(), resolution=(8, 8), radius=3.0)
        vertices, triangles = save_mesh_csv(mesh, tmp_path, stem="slice")
        frame = pd.read_csv(vertices)
        assert list(frame.columns) == ["x", "y", "t"]
        assert len(frame) == 64
        assert list(pd.read_csv(triangles).columns) == ["i", "j", "k"]
