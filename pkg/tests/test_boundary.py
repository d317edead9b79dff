"""
Tests de l'analyse des courbes du bord : critère de remplissage, queues fines,
hauteur, classification des bords géodésiques.
"""

import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.acceptance import (
    butterfly_example,
    classifier_generators,
    partial_chamber_curve,
    twisted_curve,
    two_circles,
)
from minimal_lab.boundary import (
    BOUNDARY_CASE,
    CAP_NOT_GEODESIC,
    FILLABLE_BY_CRITERION,
    SHORT,
    SHORT_NOT_TALL,
    TALL,
    THIN_TAIL_OBSTRUCTION,
    UNKNOWN,
    assess_fillability,
    check_proposition_fillability,
    check_tall,
    classify_geodesic_curve,
    detect_thin_tail,
    oscillation_check,
    vertical_line_components,
)
from minimal_lab.compactify import ChamberInterval
from minimal_lab.curves import (
    CapPath,
    GeodesicBoundarySet,
    HorizontalArc,
    PiecewiseBoundaryCurve,
    VerticalSegment,
)
from minimal_lab.hyperbolic import BoundaryArc, HPoint, IdealPoint
from minimal_lab.utils import CurveTouchesCaps, InvalidParams, MalformedCurve


def rectangle(height: float) -> PiecewiseBoundaryCurve:
    return PiecewiseBoundaryCurve((
        HorizontalArc(-1.0, 1.0, 0.0),
        VerticalSegment(1.0, 0.0, height),
        HorizontalArc(1.0, -1.0, height, positive=False),
        VerticalSegment(-1.0, height, 0.0),
    ))


class TestVerticalLines:
    """Composantes de {θ}×R privée de la courbe"""

    def test_inside_rectangle(self):
        comps = vertical_line_components(rectangle(2.0), IdealPoint(0.0))
        assert [c.bounded for c in comps] == [False, True, False]
        assert comps[1].length == pytest.approx(2.0)

    def test_outside_rectangle(self):
        comps = vertical_line_components(rectangle(2.0), IdealPoint(5.0))
        assert len(comps) == 1
        assert not comps[0].bounded


class TestFillability:
    """Critère de remplissage et obstructions"""

    def test_tall_rectangle_fillable(self):
        verdict = check_proposition_fillability(rectangle(4.0))
        assert verdict.status == FILLABLE_BY_CRITERION
        assert verdict.witnesses["shortest_bounded"] == pytest.approx(4.0)

    def test_twisted_curve_fillable(self):
        verdict = assess_fillability(twisted_curve())
        assert verdict.status == FILLABLE_BY_CRITERION
        assert verdict.witnesses["shortest_bounded"] >= 4.0 - 1e-9

    def test_short_rectangle_thin_tail(self):
        verdict = check_proposition_fillability(rectangle(1.0))
        assert verdict.status == THIN_TAIL_OBSTRUCTION
        assert verdict.witnesses["line"]["length"] == pytest.approx(1.0)
        assert verdict.witnesses["tail"]["slab_height"] < math.pi

    def test_thin_tail_location(self):
        tail = detect_thin_tail(rectangle(1.0))
        assert tail is not None
        assert tail.contact == (pytest.approx(0.0), pytest.approx(1.0))
        assert tail.theta == pytest.approx(math.pi / 2) or tail.theta == pytest.approx(3 * math.pi / 2)

    def test_no_tail_on_circles(self):
        assert detect_thin_tail(two_circles(1.0)) is None

    def test_two_close_circles(self):
        verdict = assess_fillability(two_circles(2.0))
        assert verdict.status == SHORT_NOT_TALL
        assert verdict.witnesses["height"] == pytest.approx(2.0)
        assert any("caténoïde" in note for note in verdict.notes)

    def test_cap_path_not_geodesic(self):
        curve = PiecewiseBoundaryCurve((
            CapPath.circle(1, HPoint(1.0, 0.0), 1.0),
            HorizontalArc.circle(0.0),
        ))
        assert check_proposition_fillability(curve).status == CAP_NOT_GEODESIC

    def test_open_curve_rejected(self):
        curve = PiecewiseBoundaryCurve((VerticalSegment(0.0, 0.0, 1.0),), closed=False)
        with pytest.raises(InvalidParams):
            check_proposition_fillability(curve)

    def test_butterfly_needs_feasibility(self):
        witness, curve = butterfly_example()
        verdict = check_proposition_fillability(curve)
        assert verdict.status == UNKNOWN
        assert verdict.witnesses["line"]["length"] == pytest.approx(witness.ell)


class TestTallness:
    """Hauteur h(σ)"""

    def test_tall_and_short(self):
        assert check_tall(two_circles(4.0)).status == TALL
        short = check_tall(two_circles(1.0))
        assert short.status == SHORT
        assert short.height == pytest.approx(1.0)

    def test_boundary_case(self):
        assert check_tall(two_circles(math.pi)).status == BOUNDARY_CASE

    def test_caps_rejected(self):
        with pytest.raises(CurveTouchesCaps):
            check_tall(rectangle(math.inf))


class TestClassification:
    """Bords géodésiques des surfaces à bord idéal"""

    @pytest.mark.parametrize("expected", [1, 2, 3, 4])
    def test_generators(self, expected):
        result = classify_geodesic_curve(classifier_generators()[expected])
        assert result.curve_type == expected
        assert result.status == f"type {expected}"

    def test_partial_chamber(self):
        result = classify_geodesic_curve(partial_chamber_curve())
        assert result.status == "NotFillableCurve"
        assert "partielle" in result.rule

    def test_empty_set(self):
        assert classify_geodesic_curve(GeodesicBoundarySet()).curve_type is None

    def test_equator_with_extra_pieces(self):
        with pytest.raises(MalformedCurve):
            classify_geodesic_curve(GeodesicBoundarySet(equator_full=True, poles={1}))

    def test_isolated_pole(self):
        with pytest.raises(MalformedCurve):
            classify_geodesic_curve(GeodesicBoundarySet(
                equator_arcs=[BoundaryArc.between(-1.0, 1.0), BoundaryArc.between(1.0, -1.0)],
                poles={-1},
            ))

    def test_dangling_arc(self):
        with pytest.raises(MalformedCurve):
            classify_geodesic_curve(GeodesicBoundarySet(
                equator_arcs=[BoundaryArc.between(-1.0, 1.0)],
                poles={1},
                chamber_intervals=[ChamberInterval(IdealPoint(-1.0), 1)],
            ))


class TestOscillation:
    """Chambres attachées à l'équateur ou réduites au pôle"""

    def test_attached_intervals(self):
        b = GeodesicBoundarySet(chamber_intervals=[
            ChamberInterval(IdealPoint(0.0), 1, 0.0, 0.5),
            ChamberInterval(IdealPoint(2.0), -1, math.inf, math.inf),
        ])
        assert oscillation_check(b).passed

    def test_detached_interval(self):
        b = GeodesicBoundarySet(chamber_intervals=[ChamberInterval(IdealPoint(0.0), 1, 0.3, 1.0)])
        report = oscillation_check(b)
        assert not report.passed
        assert report.violations[0]["gap"] == pytest.approx(0.3)

    def test_overlapping_pieces_are_merged(self):
        b = GeodesicBoundarySet(chamber_intervals=[
            ChamberInterval(IdealPoint(1.0), 1, 0.1, math.inf),
            ChamberInterval(IdealPoint(1.0), 1, 0.0, 0.2),
        ])
        assert oscillation_check(b).passed

    def test_pole_with_detached_piece_in_same_chamber(self):
        b = GeodesicBoundarySet(chamber_intervals=[
            ChamberInterval(IdealPoint(1.0), 1, math.inf, math.inf),
            ChamberInterval(IdealPoint(1.0), 1, 0.3, 1.0),
        ])
        report = oscillation_check(b)
        assert not report.passed
        assert report.violations[0]["gap"] == pytest.approx(0.3)
        assert math.isinf(report.violations[1]["gap"])

    def test_two_attached_pieces_with_hole(self):
        b = GeodesicBoundarySet(chamber_intervals=[
            ChamberInterval(IdealPoint(-2.0), -1, 0.0, 0.4),
            ChamberInterval(IdealPoint(-2.0), -1, 0.9, 1.5),
        ])
        report = oscillation_check(b)
        assert not report.passed
        assert len(report.violations) == 1
        assert report.violations[0]["gap"] == pytest.approx(0.5)
        assert report.violations[0]["chamber"]["sign"] == -1

    def test_opposite_signs_are_separate_chambers(self):
        b = GeodesicBoundarySet(chamber_intervals=[
            ChamberInterval(IdealPoint(1.0), 1, 0.0, 0.5),
            ChamberInterval(IdealPoint(1.0), -1, math.inf, math.inf),
        ])
        assert oscillation_check(b).passed
