"""
Tests du problème de Dirichlet pour les graphes verticaux (Newton amorti)
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.plateau import (
    DirichletProblem,
    NewtonConfig,
    SolveResult,
    boundary_trace,
    bump,
    coons_patch,
    newton_tail_constant,
    solve,
    tall_c1_solution,
)
from minimal_lab.residual import VERTICAL, GraphFunction
from minimal_lab.utils import (
    IllPosedData,
    InvalidParams,
    NonConvergence,
    NotConverged,
    ResolutionTooLow,
)


@pytest.fixture(scope="module")
def bump_problem():
    return DirichletProblem.from_dict({
        "grid": [32, 32],
        "edges": {"kind": "bump", "center": 0.0, "width": 0.25, "amplitude": 1.0},
    })


@pytest.fixture(scope="module")
def bump_solution(bump_problem):
    return solve(bump_problem)


class TestProblem:
    """Validation des données"""

    def test_corner_mismatch(self):
        ny = nx = 16
        with pytest.raises(IllPosedData):
            DirichletProblem(1.0, 0.0, 1.0, nx, ny,
                             ideal=np.ones(ny), far=np.zeros(ny), bottom=np.zeros(nx), top=np.zeros(nx))

    def test_grid_bounds(self):
        with pytest.raises(ResolutionTooLow):
            DirichletProblem.from_dict({"grid": [8, 8]})
        with pytest.raises(InvalidParams):
            DirichletProblem.from_dict({"grid": [1024, 16]})

    def test_unknown_edges(self):
        with pytest.raises(InvalidParams):
            DirichletProblem.from_dict({"edges": {"kind": "spline"}})

    def test_bump_support(self):
        y = np.linspace(-1.0, 1.0, 41)
        values = bump(y, 0.0, 0.25)
        assert values.max() == pytest.approx(1.0)
        assert np.all(values[np.abs(y) >= 0.25] == 0.0)

    def test_coons_patch_matches_edges(self, bump_problem):
        U = coons_patch(bump_problem)
        np.testing.assert_allclose(U[0], bump_problem.ideal, atol=1e-14)
        np.testing.assert_allclose(U[-1], bump_problem.far, atol=1e-14)
        np.testing.assert_allclose(U[:, 0], bump_problem.bottom, atol=1e-14)

    def test_newton_config(self):
        with pytest.raises(InvalidParams):
            NewtonConfig(initial="random")
        with pytest.raises(InvalidParams):
            NewtonConfig(tol=0.0)


class TestSolve:
    """Résolution"""

    def test_constant_data(self):
        p = DirichletProblem.from_dict({"grid": [24, 24], "edges": {"kind": "constant", "value": 5.0}})
        r = solve(p)
        assert r.converged
        assert r.iterations <= 2
        np.testing.assert_allclose(r.solution.values, 5.0, atol=1e-10)

    def test_closed_form_oracle(self):
        p = DirichletProblem.from_function(tall_c1_solution, X=1.0, y0=1.5, y1=2.5, nx=128, ny=128)
        r = solve(p)
        X, Y = np.meshgrid(p.x, p.y, indexing="ij")
        assert np.max(np.abs(r.solution.values - tall_c1_solution(X, Y))) < 5e-4

    def test_maximum_principle(self, bump_problem, bump_solution):
        lo, hi = bump_problem.data_range
        assert bump_solution.solution.values.min() >= lo - 1e-8
        assert bump_solution.solution.values.max() <= hi + 1e-8

    def test_vertical_translation(self, bump_problem, bump_solution):
        shifted = solve(bump_problem.shifted(3.0))
        np.testing.assert_allclose(shifted.solution.values, bump_solution.solution.values + 3.0, atol=1e-7)

    def test_history(self, bump_solution):
        history = bump_solution.history
        assert history[0]["iteration"] == 0
        assert history[-1]["sup"] == pytest.approx(bump_solution.final_residual)
        assert bump_solution.final_residual < 1e-8

    def test_non_convergence_keeps_best(self, bump_problem):
        with pytest.raises(NonConvergence) as info:
            solve(bump_problem, tol=1e-30, max_iter=1)
        best = info.value.best
        assert isinstance(best, SolveResult)
        assert not best.converged
        assert best.final_residual == min(h["sup"] for h in best.history)

    def test_zero_initial_guess(self, bump_problem, bump_solution):
        r = solve(bump_problem, config=NewtonConfig(initial="zero"))
        np.testing.assert_allclose(r.solution.values, bump_solution.solution.values, atol=1e-7)


class TestDiagnostics:
    """Trace sur x = 0 et constante de Newton"""

    def test_boundary_trace(self, bump_problem, bump_solution):
        trace = boundary_trace(bump_solution)
        np.testing.assert_array_equal(trace.ideal, bump_problem.ideal)
        assert 0.0 < trace.deviation < 1.0

    def test_trace_requires_convergence(self):
        g = GraphFunction(VERTICAL, [0.0, 1.0], [0.0, 1.0], np.zeros((2, 2)))
        with pytest.raises(NotConverged):
            boundary_trace(SolveResult(g, 3, 1.0, False))

    def test_tail_constant(self):
        history = [{"sup": 1e-2}, {"sup": 1e-4}, {"sup": 1e-8}]
        assert newton_tail_constant(history) == pytest.approx(1.0)
        assert math.isnan(newton_tail_constant([{"sup": 1.0}, {"sup": 0.5}]))
