"""
Procédures de décision sur les courbes du bord

- composantes des droites verticales privées de la courbe ;
- critère de remplissage (composantes bornées de longueur > π, calottes
  vides ou réduites à une géodésique) ;
- courbes hautes et hauteur h(σ) ;
- queues fines ;
- classification des courbes du bord géodésique et vérification du
  théorème d'oscillation.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .compactify import ChamberInterval, same_ideal
from .curves import (
    ANGLE_TOL,
    CapGeodesic,
    CapPath,
    GeodesicBoundarySet,
    HorizontalArc,
    PiecewiseBoundaryCurve,
    cylinder_chains,
    wrap_diff,
)
from .hyperbolic import TWO_PI, IdealPoint, angle_gap, ideal_angle, ideal_from_angle
from .utils import CurveTouchesCaps, InvalidParams, MalformedCurve


FILLABLE_BY_CRITERION = "FillableByCriterion"
TALL_MINIMIZING = "TallMinimizing"
THIN_TAIL_OBSTRUCTION = "ThinTailObstruction"
CAP_NOT_GEODESIC = "CapNotGeodesic"
SHORT_NOT_TALL = "ShortNotTall"
UNKNOWN = "Unknown"

TALL = "tall"
SHORT = "short"
BOUNDARY_CASE = "boundary-case"


# ---------------------------------------------------------------------------
# Droites verticales
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineComponent:
    """Composante ouverte (lo, hi) de {θ}×R privée de la courbe"""
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "length": self.length}


def _angle_of(theta: Union[IdealPoint, float]) -> float:
    return ideal_angle(theta) if isinstance(theta, IdealPoint) else float(theta) % TWO_PI


def components_at_angle(sigma: PiecewiseBoundaryCurve, angle: float) -> List[LineComponent]:
    covered = []
    for seg in sigma.segments:
        covered.extend(seg.covered(angle))
    if not covered:
        return [LineComponent(-math.inf, math.inf)]

    covered.sort()
    merged = [list(covered[0])]
    for lo, hi in covered[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    components = []
    previous = -math.inf
    for lo, hi in merged:
        if lo > previous:
            components.append(LineComponent(previous, lo))
        previous = hi
    if previous < math.inf:
        components.append(LineComponent(previous, math.inf))
    return components


def vertical_line_components(sigma: PiecewiseBoundaryCurve, theta: Union[IdealPoint, float]) -> List[LineComponent]:
    """Composantes connexes de ({θ}×R̄) ∖ σ ; θ point idéal ou angle de Cayley"""
    return components_at_angle(sigma, _angle_of(theta))


def sample_angles(sigma: PiecewiseBoundaryCurve, samples: int = 720) -> List[float]:
    """Points de rupture (triés), grille dense, milieux entre points de rupture"""
    breaks = sigma.breakpoints()
    grid = [TWO_PI * k / samples for k in range(samples)] if samples > 0 else []
    middles = []
    if len(breaks) > 1:
        for a, b in zip(breaks, breaks[1:] + [breaks[0] + TWO_PI]):
            middles.append((0.5 * (a + b)) % TWO_PI)
    elif len(breaks) == 1:
        middles.append((breaks[0] + math.pi) % TWO_PI)
    return breaks + grid + middles


def _shortest_bounded(sigma: PiecewiseBoundaryCurve, samples: int):
    """(longueur, angle, composante) de la plus courte composante bornée ; la première rencontrée en cas d'égalité"""
    best = (math.inf, None, None)
    for angle in sample_angles(sigma, samples):
        for comp in components_at_angle(sigma, angle):
            if comp.bounded and comp.length < best[0]:
                best = (comp.length, angle, comp)
    return best


def _line_witness(angle: float, comp: LineComponent) -> dict:
    return {
        "theta": angle,
        "ideal": ideal_from_angle(angle).to_dict()["value"],
        "component": [comp.lo, comp.hi],
        "length": comp.length,
    }


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass
class FillabilityVerdict:
    status: str
    witnesses: Dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"status": self.status, "witnesses": self.witnesses, "notes": self.notes}


@dataclass
class TallnessVerdict:
    status: str
    height: float
    witness: Optional[dict] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"status": self.status, "height": self.height, "witness": self.witness, "notes": self.notes}


@dataclass
class ThinTail:
    """Sous-arc touchant {θ}×R d'un seul côté, contenu dans une tranche de hauteur < π"""
    theta: float
    side: int
    contact: Tuple[float, float]
    slab: Tuple[float, float]

    @property
    def ideal(self) -> IdealPoint:
        return ideal_from_angle(self.theta)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "ideal": self.ideal.to_dict()["value"],
            "side": self.side,
            "contact": list(self.contact),
            "slab": list(self.slab),
            "slab_height": self.slab[1] - self.slab[0],
        }


def _cap_verdict(sigma: PiecewiseBoundaryCurve) -> Optional[FillabilityVerdict]:
    for sign in (1, -1):
        segments = sigma.cap_segments(sign)
        paths = [s for s in segments if isinstance(s, CapPath)]
        if paths:
            return FillabilityVerdict(CAP_NOT_GEODESIC, {"cap": sign, "segment": paths[0].to_dict()},
                                      ["la trace dans la calotte n'est pas une réunion de géodésiques"])
        geodesics = [s for s in segments if isinstance(s, CapGeodesic)]
        if len(geodesics) > 1:
            return FillabilityVerdict(UNKNOWN, {"cap": sign, "geodesics": len(geodesics)},
                                      ["calotte contenant plusieurs géodésiques : critère non applicable"])
    return None


def detect_thin_tail(sigma: PiecewiseBoundaryCurve, resolution: float = ANGLE_TOL) -> Optional[ThinTail]:
    """
    Cherche un contact extrémal de la courbe avec une droite verticale (les deux
    voisins du même côté) dont la hauteur est < π.
    """
    for chain in cylinder_chains(sigma):
        A, T = chain.angles, chain.ts
        n = len(A)
        if n < 2:
            continue
        if chain.closed:
            cuts = [k for k in range(n) if abs(wrap_diff(A[k], A[k - 1])) > resolution]
            if not cuts:
                continue
            A, T = np.roll(A, -cuts[0]), np.roll(T, -cuts[0])

        i = 0
        while i < n:
            j = i
            while j + 1 < n and abs(wrap_diff(A[j + 1], A[j])) <= resolution:
                j += 1
            prev = i - 1 if i > 0 else (n - 1 if chain.closed else None)
            nxt = j + 1 if j < n - 1 else (0 if chain.closed else None)
            if prev is not None and nxt is not None:
                side_prev = np.sign(wrap_diff(A[prev], A[i]))
                side_next = np.sign(wrap_diff(A[nxt], A[j]))
                if side_prev != 0 and side_prev == side_next:
                    run = T[i:j + 1]
                    lo, hi = float(np.min(run)), float(np.max(run))
                    height = hi - lo if math.isfinite(lo) and math.isfinite(hi) else math.inf
                    if height < math.pi:
                        margin = 0.25 * (math.pi - height)
                        return ThinTail(float(A[i] % TWO_PI), int(side_prev), (lo, hi),
                                        (lo - margin, hi + margin))
            i = j + 1
    return None


def check_proposition_fillability(sigma: PiecewiseBoundaryCurve, samples: int = 720) -> FillabilityVerdict:
    """Composantes verticales bornées de longueur > π et calottes vides ou géodésiques"""
    if not sigma.closed:
        raise InvalidParams("le critère de remplissage porte sur une courbe fermée")

    cap = _cap_verdict(sigma)
    if cap is not None:
        return cap

    length, angle, comp = _shortest_bounded(sigma, samples)
    if comp is None or length > math.pi:
        return FillabilityVerdict(FILLABLE_BY_CRITERION, {"shortest_bounded": length,
                                                          "samples": len(sample_angles(sigma, samples))})

    witness = {"line": _line_witness(angle, comp)}
    tail = detect_thin_tail(sigma)
    if tail is not None:
        witness["tail"] = tail.to_dict()
        return FillabilityVerdict(THIN_TAIL_OBSTRUCTION, witness,
                                  ["queue fine : aucune surface minimale ne remplit σ"])
    return FillabilityVerdict(UNKNOWN, witness,
                              [f"composante bornée de longueur {length:.6g} <= π : critère non satisfait"])


def check_tall(sigma: PiecewiseBoundaryCurve, samples: int = 720, tol: float = 1e-9) -> TallnessVerdict:
    """Hauteur h(σ) = inf des longueurs des composantes bornées ; tall si h > π"""
    if not sigma.on_cylinder:
        raise CurveTouchesCaps("la courbe doit rester dans le cylindre ∂H²×R")

    length, angle, comp = _shortest_bounded(sigma, samples)
    witness = _line_witness(angle, comp) if comp is not None else None
    if abs(length - math.pi) <= tol:
        return TallnessVerdict(BOUNDARY_CASE, length, witness, ["h(σ) = π : cas limite non tranché"])
    if length > math.pi:
        return TallnessVerdict(TALL, length, witness)

    notes = []
    circles = [s for s in sigma.segments if isinstance(s, HorizontalArc) and s.full]
    if len(circles) == 2 and len(sigma.segments) == 2:
        notes.append("minimal ≠ minimizing : une caténoïde minimale remplit ces deux cercles")
    return TallnessVerdict(SHORT, length, witness, notes)


def assess_fillability(sigma: PiecewiseBoundaryCurve, samples: int = 720) -> FillabilityVerdict:
    """Enchaîne calottes, critère, queue fine et hauteur"""
    verdict = check_proposition_fillability(sigma, samples)
    if verdict.status in (FILLABLE_BY_CRITERION, CAP_NOT_GEODESIC, THIN_TAIL_OBSTRUCTION):
        return verdict
    if not sigma.on_cylinder:
        return verdict

    tall = check_tall(sigma, samples)
    if tall.status == TALL:
        return FillabilityVerdict(TALL_MINIMIZING, {"height": tall.height}, tall.notes)
    if tall.status == SHORT:
        return FillabilityVerdict(SHORT_NOT_TALL, {"height": tall.height, "line": tall.witness}, tall.notes)
    verdict.notes.extend(tall.notes)
    return verdict


# ---------------------------------------------------------------------------
# Bord géodésique
# ---------------------------------------------------------------------------

@dataclass
class ClassificationResult:
    """Type 1 à 4, ou NotFillableCurve avec la règle violée"""
    curve_type: Optional[int]
    rule: str = ""
    components: List[dict] = field(default_factory=list)

    @property
    def status(self) -> str:
        return f"type {self.curve_type}" if self.curve_type else "NotFillableCurve"

    def to_dict(self) -> dict:
        return {"status": self.status, "type": self.curve_type, "rule": self.rule,
                "components": self.components}


def _not_fillable(rule: str, components=None) -> ClassificationResult:
    return ClassificationResult(None, rule, components or [])


def _arcs_overlap(a, b) -> bool:
    for first, second in ((a, b), (b, a)):
        inner = [first.theta_start + w * first.span for w in (0.01, 0.5, 0.99)]
        if any(second.contains_angle(theta) and
               angle_gap(theta, second.theta_start) > ANGLE_TOL and
               angle_gap(theta, second.theta_end) > ANGLE_TOL for theta in inner):
            return True
    return False


class _Nodes:
    """Pieds sur l'équateur (à tolérance près) et pôles ; union-find"""

    def __init__(self):
        self.feet: List[IdealPoint] = []
        self.parent: Dict = {}
        self.degree: Dict = {}

    def foot(self, q: IdealPoint):
        for k, p in enumerate(self.feet):
            if same_ideal(p, q):
                return ("foot", k)
        self.feet.append(q)
        return ("foot", len(self.feet) - 1)

    def find(self, node):
        self.parent.setdefault(node, node)
        while self.parent[node] != node:
            self.parent[node] = self.parent[self.parent[node]]
            node = self.parent[node]
        return node

    def link(self, u, v):
        for node in (u, v):
            self.degree[node] = self.degree.get(node, 0) + 1
        self.parent[self.find(u)] = self.find(v)


def classify_geodesic_curve(candidate: GeodesicBoundarySet) -> ClassificationResult:
    """Type (1) équateur, (2) arc + deux chambres de même signe, (3) quatre chambres + deux arcs, (4) deux types 2 opposés"""
    for ci in candidate.chamber_intervals:
        if not ci.is_full:
            return _not_fillable("la courbe contient une chambre de Weyl partielle", [ci.to_dict()])

    if candidate.equator_full:
        if candidate.chamber_intervals or candidate.equator_arcs or candidate.poles:
            raise MalformedCurve("équateur complet accompagné d'autres pièces")
        return ClassificationResult(1, components=[{"equator": True}])

    arcs = candidate.equator_arcs
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            if _arcs_overlap(arcs[i], arcs[j]):
                raise MalformedCurve(f"arcs {i} et {j} de l'équateur se chevauchent")

    nodes = _Nodes()
    for arc in arcs:
        nodes.link(nodes.foot(arc.start), nodes.foot(arc.end))
    for ci in candidate.chamber_intervals:
        nodes.link(nodes.foot(ci.theta), ("pole", ci.sign))

    for sign in candidate.poles:
        if nodes.degree.get(("pole", sign), 0) == 0:
            raise MalformedCurve(f"pôle {sign:+d} isolé")
    for node, degree in nodes.degree.items():
        if degree != 2:
            raise MalformedCurve(f"{node}: degré {degree} ≠ 2, pas une réunion de courbes de Jordan")
    if not nodes.degree:
        return _not_fillable("ensemble vide")

    groups: Dict = {}
    for arc in arcs:
        groups.setdefault(nodes.find(nodes.foot(arc.start)), {"arcs": [], "chambers": []})["arcs"].append(arc)
    for ci in candidate.chamber_intervals:
        groups.setdefault(nodes.find(("pole", ci.sign)), {"arcs": [], "chambers": []})["chambers"].append(ci)

    described = []
    for group in groups.values():
        chambers = group["chambers"]
        signs = sorted({c.sign for c in chambers})
        feet_signs: Dict = {}
        for c in chambers:
            feet_signs.setdefault(nodes.foot(c.theta), set()).add(c.sign)
        degenerate = sum(1 for s in feet_signs.values() if s == {1, -1})
        span = sum(a.span for a in group["arcs"])
        kind = None
        if not chambers and abs(span - TWO_PI) < 1e-9:
            kind = 1
        elif len(chambers) == 2 and len(signs) == 1 and len(group["arcs"]) == 1:
            kind = 2
        elif len(chambers) == 4 and signs == [-1, 1] and len(group["arcs"]) + degenerate == 2:
            kind = 3
        described.append({
            "kind": kind,
            "sign": signs[0] if len(signs) == 1 else 0,
            "arcs": len(group["arcs"]),
            "chambers": len(chambers),
            "degenerate_arcs": degenerate,
        })

    kinds = sorted((d["kind"] or 0) for d in described)
    if len(described) == 1 and kinds[0] in (1, 2, 3):
        return ClassificationResult(kinds[0], components=described)
    if len(described) == 2 and kinds == [2, 2] and {d["sign"] for d in described} == {1, -1}:
        return ClassificationResult(4, components=described)
    return _not_fillable("composition de courbes hors des quatre types", described)


@dataclass
class OscillationReport:
    passed: bool
    violations: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "violations": self.violations}


def _chambers(intervals: List[ChamberInterval]) -> List[List[ChamberInterval]]:
    """Regroupe les intervalles par chambre (point idéal, signe)"""
    groups: List[List[ChamberInterval]] = []
    for ci in intervals:
        for group in groups:
            if group[0].sign == ci.sign and same_ideal(group[0].theta, ci.theta):
                group.append(ci)
                break
        else:
            groups.append([ci])
    return groups


def _merge_slopes(group: List[ChamberInterval], tol: float) -> List[ChamberInterval]:
    """Réunion des intervalles fermés de pentes d'une même chambre"""
    pieces = sorted(group, key=lambda ci: ci.lo)
    merged = [pieces[0]]
    for ci in pieces[1:]:
        last = merged[-1]
        if ci.lo <= last.hi + tol:
            merged[-1] = ChamberInterval(last.theta, last.sign, last.lo, max(last.hi, ci.hi))
        else:
            merged.append(ci)
    return merged


def oscillation_check(b: GeodesicBoundarySet, tol: float = 1e-9) -> OscillationReport:
    """
    Chaque chambre : vide, réduite au pôle, ou un seul intervalle [0, r] attaché
    à l'équateur. Les intervalles d'une même chambre sont d'abord réunis.
    """
    violations = []
    for group in _chambers(b.chamber_intervals):
        merged = _merge_slopes(group, tol)
        first = merged[0]
        if len(merged) == 1 and (first.lo <= tol or math.isinf(first.lo)):
            continue
        if first.lo > tol and not math.isinf(first.lo):
            violations.append({"chamber": first.to_dict(), "gap": first.lo})
        for previous, ci in zip(merged, merged[1:]):
            violations.append({"chamber": ci.to_dict(), "gap": ci.lo - previous.hi})
    return OscillationReport(not violations, violations)
