"""
Courbes du bord ∂×X et ensembles du bord géodésique

Une courbe est une liste ordonnée de segments exacts :
- VerticalSegment : {θ}×[t0, t1] sur le cylindre (t infini = coin) ;
- HorizontalArc : arc de ∂H² à hauteur t, parcouru dans le sens des angles
  de Cayley croissants (positive=True) ou décroissants ;
- CapGeodesic : géodésique complète tracée dans la calotte H²×{±∞} ;
- CapPath : lacet fermé (polygone) dans une calotte, trace non géodésique ;
- CylinderPath : ligne polygonale en coordonnées (angle déroulé, t).

Les coordonnées du cylindre sont (angle de Cayley, t).
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .compactify import ChamberInterval
from .hyperbolic import (
    TWO_PI,
    BoundaryArc,
    GeodesicH2,
    HPoint,
    IdealPoint,
    angle_gap,
    ideal_angle,
    ideal_from_angle,
)
from .utils import InvalidParams, decode_real, encode_real


ANGLE_TOL = 1e-9
T_TOL = 1e-9
ARC_STEP = math.pi / 32


def _ideal(value) -> IdealPoint:
    return value if isinstance(value, IdealPoint) else IdealPoint(value)


def _same_t(t1: float, t2: float) -> bool:
    if math.isinf(t1) or math.isinf(t2):
        return t1 == t2
    return abs(t1 - t2) <= T_TOL * max(1.0, abs(t1))


def wrap_diff(a: float, b: float) -> float:
    """Différence a − b ramenée dans [−π, π)"""
    return (a - b + math.pi) % TWO_PI - math.pi


# ---------------------------------------------------------------------------
# Segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerticalSegment:
    theta: IdealPoint
    t0: float
    t1: float
    kind = "vertical"
    on_cylinder = True

    def __post_init__(self):
        object.__setattr__(self, "theta", _ideal(self.theta))
        t0, t1 = float(self.t0), float(self.t1)
        if math.isnan(t0) or math.isnan(t1) or t0 == t1:
            raise InvalidParams(f"segment vertical dégénéré: [{self.t0}, {self.t1}]")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)

    @property
    def angle(self) -> float:
        return ideal_angle(self.theta)

    def start_point(self) -> Tuple[float, float]:
        return self.angle, self.t0

    def end_point(self) -> Tuple[float, float]:
        return self.angle, self.t1

    def breakpoints(self) -> List[float]:
        return [self.angle]

    def covered(self, theta: float) -> List[Tuple[float, float]]:
        if angle_gap(self.angle, theta) > ANGLE_TOL:
            return []
        return [(min(self.t0, self.t1), max(self.t0, self.t1))]

    def polyline(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.angle, self.angle]), np.array([self.t0, self.t1])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.to_dict()["value"],
                "t0": encode_real(self.t0), "t1": encode_real(self.t1)}

    @classmethod
    def from_dict(cls, data: dict) -> "VerticalSegment":
        return cls(IdealPoint.from_dict(data["theta"]), decode_real(data["t0"]), decode_real(data["t1"]))


@dataclass(frozen=True)
class HorizontalArc:
    start: IdealPoint
    end: IdealPoint
    t: float
    positive: bool = True
    full: bool = False
    kind = "arc"

    def __post_init__(self):
        object.__setattr__(self, "start", _ideal(self.start))
        object.__setattr__(self, "end", _ideal(self.end))
        object.__setattr__(self, "t", float(self.t))
        if math.isnan(self.t):
            raise InvalidParams("hauteur d'arc NaN")
        if self.full and self.start != self.end:
            raise InvalidParams("un cercle complet commence et finit au même point")
        if not self.full and angle_gap(ideal_angle(self.start), ideal_angle(self.end)) <= ANGLE_TOL:
            raise InvalidParams("arc dégénéré (utiliser full=True pour un cercle)")

    @classmethod
    def circle(cls, t: float, at: Union[float, IdealPoint] = math.inf) -> "HorizontalArc":
        """Cercle horizontal complet ∂H²×{t}"""
        return cls(_ideal(at), _ideal(at), t, positive=True, full=True)

    @property
    def on_cylinder(self) -> bool:
        return math.isfinite(self.t)

    @property
    def angle0(self) -> float:
        return ideal_angle(self.start)

    @property
    def sweep(self) -> float:
        """Balayage angulaire signé"""
        if self.full:
            return TWO_PI if self.positive else -TWO_PI
        a0, a1 = self.angle0, ideal_angle(self.end)
        if self.positive:
            return (a1 - a0) % TWO_PI
        return -((a0 - a1) % TWO_PI)

    def contains_angle(self, theta: float) -> bool:
        if self.full:
            return True
        if self.sweep > 0:
            offset = (theta - self.angle0) % TWO_PI
        else:
            offset = (self.angle0 - theta) % TWO_PI
        return offset <= abs(self.sweep) + ANGLE_TOL or offset >= TWO_PI - ANGLE_TOL

    def start_point(self) -> Tuple[float, float]:
        return self.angle0, self.t

    def end_point(self) -> Tuple[float, float]:
        return self.angle0 + self.sweep, self.t

    def breakpoints(self) -> List[float]:
        return [] if self.full else [self.angle0, ideal_angle(self.end)]

    def covered(self, theta: float) -> List[Tuple[float, float]]:
        if not self.on_cylinder or not self.contains_angle(theta):
            return []
        return [(self.t, self.t)]

    def polyline(self) -> Tuple[np.ndarray, np.ndarray]:
        n = max(2, int(math.ceil(abs(self.sweep) / ARC_STEP)) + 1)
        angles = self.angle0 + np.linspace(0.0, self.sweep, n)
        return angles, np.full(n, self.t)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "start": self.start.to_dict()["value"],
                "end": self.end.to_dict()["value"], "t": encode_real(self.t),
                "positive": self.positive, "full": self.full}

    @classmethod
    def from_dict(cls, data: dict) -> "HorizontalArc":
        return cls(IdealPoint.from_dict(data["start"]), IdealPoint.from_dict(data["end"]),
                   decode_real(data["t"]), bool(data.get("positive", True)), bool(data.get("full", False)))


@dataclass(frozen=True)
class CapGeodesic:
    sign: int
    geodesic: GeodesicH2
    reverse: bool = False
    kind = "cap_geodesic"
    on_cylinder = False

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidParams(f"signe de calotte invalide: {self.sign}")

    @property
    def start(self) -> IdealPoint:
        return self.geodesic.endpoints[1 if self.reverse else 0]

    @property
    def end(self) -> IdealPoint:
        return self.geodesic.endpoints[0 if self.reverse else 1]

    def start_point(self) -> Tuple[float, float]:
        return ideal_angle(self.start), self.sign * math.inf

    def end_point(self) -> Tuple[float, float]:
        return ideal_angle(self.end), self.sign * math.inf

    def breakpoints(self) -> List[float]:
        return []

    def covered(self, theta: float) -> List[Tuple[float, float]]:
        return []

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sign": self.sign,
                "geodesic": self.geodesic.to_dict(), "reverse": self.reverse}

    @classmethod
    def from_dict(cls, data: dict) -> "CapGeodesic":
        return cls(int(data["sign"]), GeodesicH2.from_dict(data["geodesic"]), bool(data.get("reverse", False)))


@dataclass(frozen=True)
class CapPath:
    """Lacet fermé dans la calotte sign·∞ (sommets dans H²)"""
    sign: int
    points: Tuple[HPoint, ...]
    kind = "cap_path"
    on_cylinder = False

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidParams(f"signe de calotte invalide: {self.sign}")
        if len(self.points) < 3:
            raise InvalidParams("un lacet de calotte exige au moins 3 sommets")
        object.__setattr__(self, "points", tuple(self.points))

    @classmethod
    def circle(cls, sign: int, center: HPoint, radius: float, n: int = 16) -> "CapPath":
        from .hyperbolic import polar_points
        alpha = np.linspace(0.0, TWO_PI, n, endpoint=False)
        x, y = polar_points(center, np.full(n, radius), alpha)
        return cls(sign, tuple(HPoint(float(a), float(b)) for a, b in zip(x, y)))

    def breakpoints(self) -> List[float]:
        return []

    def covered(self, theta: float) -> List[Tuple[float, float]]:
        return []

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sign": self.sign, "points": [p.to_dict() for p in self.points]}

    @classmethod
    def from_dict(cls, data: dict) -> "CapPath":
        return cls(int(data["sign"]), tuple(HPoint.from_dict(p) for p in data["points"]))


@dataclass(frozen=True)
class CylinderPath:
    """Ligne polygonale (angle déroulé, t) sur le cylindre, t fini"""
    angles: Tuple[float, ...]
    ts: Tuple[float, ...]
    kind = "path"
    on_cylinder = True

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        ts = tuple(float(t) for t in self.ts)
        if len(angles) != len(ts) or len(angles) < 2:
            raise InvalidParams("chemin: au moins deux sommets, tailles identiques")
        if not all(math.isfinite(v) for v in angles + ts):
            raise InvalidParams("chemin: coordonnées finies attendues")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "ts", ts)

    @classmethod
    def through(cls, points: Sequence[Tuple[float, float]]) -> "CylinderPath":
        return cls(tuple(p[0] for p in points), tuple(p[1] for p in points))

    def start_point(self) -> Tuple[float, float]:
        return self.angles[0], self.ts[0]

    def end_point(self) -> Tuple[float, float]:
        return self.angles[-1], self.ts[-1]

    def breakpoints(self) -> List[float]:
        return [a % TWO_PI for a in self.angles]

    def covered(self, theta: float) -> List[Tuple[float, float]]:
        found = []
        for (a0, t0), (a1, t1) in zip(zip(self.angles, self.ts), zip(self.angles[1:], self.ts[1:])):
            if abs(a1 - a0) <= ANGLE_TOL:
                if angle_gap(a0, theta) <= ANGLE_TOL:
                    found.append((min(t0, t1), max(t0, t1)))
                continue
            lo, hi = min(a0, a1), max(a0, a1)
            k0 = math.ceil((lo - theta - ANGLE_TOL) / TWO_PI)
            k1 = math.floor((hi - theta + ANGLE_TOL) / TWO_PI)
            for k in range(k0, k1 + 1):
                target = theta + k * TWO_PI
                w = min(max((target - a0) / (a1 - a0), 0.0), 1.0)
                t = t0 + w * (t1 - t0)
                found.append((t, t))
        return found

    def polyline(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array(self.angles), np.array(self.ts)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "angles": list(self.angles), "ts": list(self.ts)}

    @classmethod
    def from_dict(cls, data: dict) -> "CylinderPath":
        return cls(tuple(data["angles"]), tuple(data["ts"]))


Segment = Union[VerticalSegment, HorizontalArc, CapGeodesic, CapPath, CylinderPath]

SEGMENT_KINDS = {
    "vertical": VerticalSegment,
    "arc": HorizontalArc,
    "cap_geodesic": CapGeodesic,
    "cap_path": CapPath,
    "path": CylinderPath,
}


def _points_match(p: Tuple[float, float], q: Tuple[float, float]) -> bool:
    return angle_gap(p[0], q[0]) <= ANGLE_TOL and _same_t(p[1], q[1])


# ---------------------------------------------------------------------------
# Courbes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseBoundaryCurve:
    """
    Union de lacets consécutifs (closed=True) ou chemin ouvert.
    Un CapPath forme à lui seul un lacet.
    """
    segments: Tuple[Segment, ...]
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise InvalidParams("courbe vide")
        self.loops()

    def loops(self) -> List[List[Segment]]:
        """Découpe en lacets en vérifiant le raccord des extrémités"""
        loops: List[List[Segment]] = []
        current: List[Segment] = []
        loop_start = None
        for i, seg in enumerate(self.segments):
            if isinstance(seg, CapPath):
                if current:
                    raise InvalidParams(f"segment {i}: lacet de calotte au milieu d'un lacet ouvert")
                loops.append([seg])
                continue
            if current:
                if not _points_match(current[-1].end_point(), seg.start_point()):
                    raise InvalidParams(
                        f"segment {i}: début {seg.start_point()} ≠ fin précédente {current[-1].end_point()}")
            else:
                loop_start = seg.start_point()
            current.append(seg)
            if self.closed and _points_match(seg.end_point(), loop_start):
                loops.append(current)
                current = []
        if current:
            if self.closed:
                raise InvalidParams("courbe fermée qui ne revient pas à son point de départ")
            loops.append(current)
        return loops

    @property
    def on_cylinder(self) -> bool:
        return all(getattr(s, "on_cylinder", False) for s in self.segments) and all(
            not isinstance(s, VerticalSegment) or (math.isfinite(s.t0) and math.isfinite(s.t1))
            for s in self.segments)

    def cap_segments(self, sign: int) -> List[Segment]:
        return [s for s in self.segments
                if isinstance(s, (CapGeodesic, CapPath)) and s.sign == sign]

    def breakpoints(self) -> List[float]:
        points = set()
        for seg in self.segments:
            for a in seg.breakpoints():
                points.add(round(a % TWO_PI, 12))
        return sorted(points)

    def is_simple(self) -> bool:
        """Absence d'auto-intersection (coordonnées (angle, arctan t) et calottes)"""
        for sign in (1, -1):
            geos = [s.geodesic for s in self.cap_segments(sign) if isinstance(s, CapGeodesic)]
            for i in range(len(geos)):
                for j in range(i + 1, len(geos)):
                    if _geodesics_meet(geos[i], geos[j]):
                        return False
        edges = []
        for chain_id, chain in enumerate(cylinder_chains(self)):
            tau = np.arctan(chain.ts)
            n = len(chain.angles)
            count = n if chain.closed else n - 1
            for k in range(count):
                k1 = (k + 1) % n
                edges.extend(_split_edge(chain_id, k, count, chain.closed,
                                         (chain.angles[k], tau[k]), (chain.angles[k1], tau[k1])))
        for i in range(len(edges)):
            for j in range(i + 1, len(edges)):
                if _adjacent(edges[i], edges[j]):
                    continue
                if _edges_cross(edges[i], edges[j]):
                    return False
        return True

    def to_dict(self) -> dict:
        return {"closed": self.closed, "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseBoundaryCurve":
        segments = []
        for item in data["segments"]:
            kind = item.get("kind")
            if kind not in SEGMENT_KINDS:
                raise InvalidParams(f"type de segment inconnu: {kind}")
            segments.append(SEGMENT_KINDS[kind].from_dict(item))
        return cls(tuple(segments), bool(data.get("closed", True)))


def _geodesics_meet(g1: GeodesicH2, g2: GeodesicH2) -> bool:
    """Deux géodésiques se coupent ou partagent une extrémité ssi leurs extrémités s'entrelacent"""
    a = [ideal_angle(p) for p in g1.endpoints]
    b = [ideal_angle(p) for p in g2.endpoints]
    if any(angle_gap(x, y) <= ANGLE_TOL for x in a for y in b):
        return True
    lo, hi = min(a), max(a)
    inside = [lo < v < hi for v in b]
    return inside[0] != inside[1]


@dataclass
class CylinderChain:
    """Suite de sommets (angle déroulé, t) d'une portion connexe de la courbe sur le cylindre"""
    angles: np.ndarray
    ts: np.ndarray
    closed: bool


def cylinder_chains(curve: PiecewiseBoundaryCurve) -> List[CylinderChain]:
    """Portions de la courbe sur le cylindre, coupées aux segments de calotte"""
    chains = []
    for loop in curve.loops():
        if len(loop) == 1 and isinstance(loop[0], CapPath):
            continue
        caps = [i for i, s in enumerate(loop) if not s.on_cylinder]
        closed = curve.closed and not caps
        if caps:
            k = caps[-1] + 1
            loop = loop[k:] + loop[:k]
        runs: List[List[Segment]] = [[]]
        for seg in loop:
            if seg.on_cylinder:
                runs[-1].append(seg)
            elif runs[-1]:
                runs.append([])
        for run in runs:
            if not run:
                continue
            angles, ts = run[0].polyline()
            angles, ts = list(angles), list(ts)
            for seg in run[1:]:
                a, t = seg.polyline()
                shift = angles[-1] - wrap_diff(angles[-1], a[0]) - a[0]
                angles.extend((a[1:] + shift).tolist())
                ts.extend(t[1:].tolist())
            if closed:
                angles, ts = angles[:-1], ts[:-1]
            chains.append(CylinderChain(np.array(angles), np.array(ts), closed))
    return chains


def _split_edge(chain_id, k, count, closed, p, q):
    """Ramène l'arête dans [0, 2π) en la coupant à la couture"""
    a0, t0 = p
    a0 = a0 % TWO_PI
    a1 = a0 + wrap_diff(q[0], p[0])
    t1 = q[1]
    if 0.0 <= a1 <= TWO_PI:
        pieces = [((a0, t0), (a1, t1))]
    else:
        seam = TWO_PI if a1 > TWO_PI else 0.0
        tm = t0 + (seam - a0) / (a1 - a0) * (t1 - t0)
        wrap = TWO_PI if seam else -TWO_PI
        pieces = [((a0, t0), (seam, tm)), ((seam - wrap, tm), (a1 - wrap, t1))]
    return [(chain_id, k, count, closed, piece) for piece in pieces]


def _adjacent(e1, e2) -> bool:
    c1, k1, n1, closed1, _ = e1
    c2, k2, _, _, _ = e2
    if c1 != c2:
        return False
    if abs(k1 - k2) <= 1:
        return True
    return closed1 and {k1, k2} == {0, n1 - 1}


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r, eps) -> bool:
    return (min(p[0], q[0]) - eps <= r[0] <= max(p[0], q[0]) + eps
            and min(p[1], q[1]) - eps <= r[1] <= max(p[1], q[1]) + eps)


def _edges_cross(e1, e2, eps: float = 1e-12) -> bool:
    p1, p2 = e1[4]
    p3, p4 = e2[4]
    d1, d2 = _orient(p3, p4, p1), _orient(p3, p4, p2)
    d3, d4 = _orient(p1, p2, p3), _orient(p1, p2, p4)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
            ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    if abs(d1) <= eps and _on_segment(p3, p4, p1, eps):
        return True
    if abs(d2) <= eps and _on_segment(p3, p4, p2, eps):
        return True
    if abs(d3) <= eps and _on_segment(p1, p2, p3, eps):
        return True
    if abs(d4) <= eps and _on_segment(p1, p2, p4, eps):
        return True
    return False


# ---------------------------------------------------------------------------
# Ensembles du bord géodésique
# ---------------------------------------------------------------------------

@dataclass
class GeodesicBoundarySet:
    """Arcs de l'équateur, pôles atteints, intervalles de pentes par chambre"""
    equator_arcs: List[BoundaryArc] = field(default_factory=list)
    equator_full: bool = False
    poles: set = field(default_factory=set)
    chamber_intervals: List[ChamberInterval] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "equator_full": self.equator_full,
            "equator_arcs": [a.to_dict() for a in self.equator_arcs],
            "poles": sorted(self.poles),
            "chamber_intervals": [c.to_dict() for c in self.chamber_intervals],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeodesicBoundarySet":
        return cls(
            equator_arcs=[BoundaryArc.from_dict(a) for a in data.get("equator_arcs", [])],
            equator_full=bool(data.get("equator_full", False)),
            poles={int(p) for p in data.get("poles", [])},
            chamber_intervals=[ChamberInterval.from_dict(c) for c in data.get("chamber_intervals", [])],
        )
