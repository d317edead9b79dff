"""
Tests des résidus des équations des graphes minimaux et des diagnostics
près du bord idéal (constante de Lipschitz, tableau conormal).
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.families import TallRectangle, tall_profile
from minimal_lab.mesh import tall_horizontal_graph
from minimal_lab.plateau import tall_c1_solution
from minimal_lab.residual import (
    HORIZONTAL,
    VERTICAL,
    GraphFunction,
    conormal_diagnostic,
    divergence_residual,
    horizontal_residual,
    lipschitz_constant,
    vertical_residual,
)
from minimal_lab.utils import InvalidParams, ResolutionTooLow, ShapeError, WindowOutOfRange


def c1_graph(n: int) -> GraphFunction:
    return GraphFunction.from_function(
        VERTICAL, np.linspace(0.05, 0.3, n), np.linspace(-0.2, 0.2, n), tall_c1_solution)


@pytest.fixture(scope="module")
def tall_half():
    return TallRectangle.with_height(tall_profile(0.5), a=0.0)


class TestGraphFunction:
    """Validation des grilles"""

    def test_non_uniform_axis(self):
        with pytest.raises(ShapeError):
            GraphFunction(VERTICAL, [0.1, 0.2, 0.4], [0.0, 1.0], np.zeros((3, 2)))

    def test_negative_x(self):
        with pytest.raises(ShapeError):
            GraphFunction(VERTICAL, [-0.1, 0.0, 0.1], [0.0, 1.0], np.zeros((3, 2)))

    def test_non_finite_values(self):
        values = np.zeros((3, 3))
        values[1, 1] = np.nan
        with pytest.raises(ShapeError):
            GraphFunction(VERTICAL, [0.1, 0.2, 0.3], [0.0, 0.5, 1.0], values)

    def test_orientation_checked(self):
        g = GraphFunction.from_function(HORIZONTAL, np.linspace(0.1, 1, 5), np.linspace(0, 1, 5),
                                        lambda X, T: np.zeros_like(X))
        with pytest.raises(ShapeError):
            vertical_residual(g)


class TestResiduals:
    """Résidus discrets"""

    def test_constant_is_exact(self):
        g = GraphFunction.from_function(VERTICAL, np.linspace(0.5, 1.5, 9), np.linspace(0, 1, 9),
                                        lambda X, Y: np.full_like(X, 2.0))
        assert vertical_residual(g).sup_norm == 0.0
        assert divergence_residual(g).sup_norm == 0.0

    def test_quadratic_is_not_minimal(self):
        g = GraphFunction.from_function(VERTICAL, np.linspace(0.5, 1.5, 9), np.linspace(0, 1, 9),
                                        lambda X, Y: X * X + Y * Y)
        assert np.all(np.abs(vertical_residual(g).cells) > 0)

    def test_horizontal_linear_graph(self):
        g = GraphFunction.from_function(HORIZONTAL, np.linspace(0.5, 1.5, 9), np.linspace(0, 1, 9),
                                        lambda X, T: X.copy())
        report = horizontal_residual(g)
        np.testing.assert_allclose(report.cells, -2.0 * g.x[1:-1, None] * np.ones((7, 7)), rtol=1e-12)
        flat = GraphFunction.from_function(HORIZONTAL, np.linspace(0.5, 1.5, 9), np.linspace(0, 1, 9),
                                           lambda X, T: np.zeros_like(X))
        assert horizontal_residual(flat).sup_norm == 0.0

    def test_closed_form_converges(self):
        coarse = vertical_residual(c1_graph(65)).sup_norm
        fine = vertical_residual(c1_graph(129)).sup_norm
        assert fine < coarse / 3.0

    def test_divergence_form_agrees(self):
        def u(X, Y):
            return 0.1 * (X * X + X * Y)

        grids = [GraphFunction.from_function(VERTICAL, np.linspace(0.5, 1.5, n), np.linspace(0, 1, n), u)
                 for n in (33, 65)]
        gaps = [np.max(np.abs(vertical_residual(g).cells - divergence_residual(g).cells)) for g in grids]
        assert gaps[1] < gaps[0] / 2.5

    def test_ideal_edge_column(self):
        g = GraphFunction.from_function(VERTICAL, np.linspace(0.0, 1.0, 17), np.linspace(0, 1, 17),
                                        lambda X, Y: X * X - Y * Y)
        report = vertical_residual(g, include_ideal_edge=True)
        assert report.cells.shape == (16, 15)
        # u_xx + u_yy = 0 sur la colonne x = 0
        assert np.max(np.abs(report.cells[0])) < 1e-9

    def test_report_frame(self):
        report = vertical_residual(c1_graph(17))
        frame = report.to_frame()
        assert list(frame.columns) == ["x", "c", "residual"]
        assert len(frame) == 15 * 15
        assert report.to_dict()["sup"] == pytest.approx(report.sup_norm)


class TestIdealBoundary:
    """Comportement des graphes horizontaux près de x = 0"""

    def test_tall_horizontal_residual(self, tall_half):
        coarse = horizontal_residual(tall_horizontal_graph(tall_half, n=65)).sup_norm
        fine = horizontal_residual(tall_horizontal_graph(tall_half, n=129)).sup_norm
        assert fine < coarse / 2.5

    def test_lipschitz_matches_slope(self, tall_half):
        v = tall_horizontal_graph(tall_half, n=129)
        s_max = float(tall_half.profile.f_inverse(0.1 * tall_half.height))
        assert lipschitz_constant(v) == pytest.approx(s_max, rel=0.05)

    def test_lipschitz_linear(self):
        g = GraphFunction.from_function(HORIZONTAL, np.linspace(0.0, 1.0, 11), np.linspace(0, 1, 11),
                                        lambda X, T: 3.0 * X)
        assert lipschitz_constant(g) == pytest.approx(3.0, rel=1e-12)

    def test_lipschitz_window(self, tall_half):
        v = tall_horizontal_graph(tall_half, n=129)
        mid = 0.5 * tall_half.height
        inner = lipschitz_constant(v, (mid - 0.2, mid + 0.2))
        assert inner < lipschitz_constant(v)
        with pytest.raises(WindowOutOfRange):
            lipschitz_constant(v, (tall_half.b, tall_half.b + 1.0))

    def test_semi_infinite(self):
        tr = TallRectangle(profile=tall_profile(1.0), a=0.0, b=math.inf)
        v = tall_horizontal_graph(tr, n=65)
        assert math.isfinite(lipschitz_constant(v))

    def test_conormal_table(self, tall_half):
        table = conormal_diagnostic(tall_horizontal_graph(tall_half, n=129))
        assert table.shape == (3, 3)
        assert table.index.name == "p"
        assert np.all(np.isfinite(table.to_numpy()))
        assert table.loc[0, 0] > 0

    def test_conormal_orders(self, tall_half):
        with pytest.raises(InvalidParams):
            conormal_diagnostic(tall_horizontal_graph(tall_half, n=33), orders=(3, 0))

    def test_graph_arguments(self, tall_half):
        with pytest.raises(ResolutionTooLow):
            tall_horizontal_graph(tall_half, n=3)
        with pytest.raises(InvalidParams):
            tall_horizontal_graph(tall_half, sheet=0)
        with pytest.raises(InvalidParams):
            tall_horizontal_graph(tall_half, t_window=(-1.0, 1.0))

    def test_far_from_ideal_boundary(self):
        g = GraphFunction.from_function(HORIZONTAL, np.linspace(0.5, 1.0, 9), np.linspace(0, 1, 9),
                                        lambda X, T: np.zeros_like(X))
        with pytest.raises(WindowOutOfRange):
            lipschitz_constant(g)
