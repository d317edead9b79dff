"""
Géométrie exacte de H² et de H²×R

Modèle canonique : demi-plan, point (x > 0, y), nombre complexe z = y + i·x.
Le modèle du disque n'est utilisé que via la transformation de Cayley
w = (z − i)/(z + i), qui envoie (1, 0) sur l'origine.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .utils import CoincidentPoints, DomainError, DEFAULT_TOLERANCES


TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HPoint:
    """Point du demi-plan hyperbolique"""
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"HPoint non fini: ({self.x}, {self.y})")
        if x <= 0:
            raise DomainError(f"HPoint hors du demi-plan: x={self.x} <= 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def z(self) -> complex:
        return complex(self.y, self.x)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(x=z.imag, y=z.real)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y}

    @classmethod
    def from_dict(cls, data: dict) -> "HPoint":
        return cls(x=data["x"], y=data["y"])


@dataclass(frozen=True)
class AmbientPoint:
    """Point (x, y, t) de H²×R"""
    base: HPoint
    t: float

    def __post_init__(self):
        t = float(self.t)
        if not math.isfinite(t):
            raise DomainError(f"hauteur non finie: {self.t}")
        object.__setattr__(self, "t", t)

    @classmethod
    def of(cls, x: float, y: float, t: float) -> "AmbientPoint":
        return cls(HPoint(x, y), t)

    def to_dict(self) -> dict:
        return {"x": self.base.x, "y": self.base.y, "t": self.t}


@dataclass(frozen=True)
class IdealPoint:
    """Point de ∂H² : réel du bord du demi-plan, ou ∞"""
    value: float

    def __post_init__(self):
        value = float(self.value)
        if math.isnan(value):
            raise DomainError("IdealPoint NaN")
        # un seul point à l'infini
        if math.isinf(value):
            value = math.inf
        object.__setattr__(self, "value", value)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def sort_key(self) -> Tuple[int, float]:
        return (1, 0.0) if self.is_infinite else (0, self.value)

    def to_dict(self) -> dict:
        return {"value": "inf" if self.is_infinite else self.value}

    @classmethod
    def from_dict(cls, data: Union[dict, float, str]) -> "IdealPoint":
        raw = data["value"] if isinstance(data, dict) else data
        return cls(math.inf if raw in ("inf", "+inf", "-inf") else float(raw))

    def __repr__(self) -> str:
        return "IdealPoint(∞)" if self.is_infinite else f"IdealPoint({self.value:g})"


INFINITY = IdealPoint(math.inf)


@dataclass(frozen=True)
class GeodesicH2:
    """Géodésique de H², donnée par ses deux extrémités idéales (ordre canonique)"""
    endpoints: Tuple[IdealPoint, IdealPoint]

    def __post_init__(self):
        p, q = self.endpoints
        if p == q:
            raise DomainError(f"extrémités confondues: {p}")
        if q.sort_key < p.sort_key:
            p, q = q, p
        object.__setattr__(self, "endpoints", (p, q))

    @classmethod
    def between(cls, a: Union[float, IdealPoint], b: Union[float, IdealPoint]) -> "GeodesicH2":
        a = a if isinstance(a, IdealPoint) else IdealPoint(a)
        b = b if isinstance(b, IdealPoint) else IdealPoint(b)
        return cls((a, b))

    @property
    def is_vertical(self) -> bool:
        return self.endpoints[1].is_infinite

    @property
    def center(self) -> float:
        p, q = self.endpoints
        return p.value if self.is_vertical else 0.5 * (p.value + q.value)

    @property
    def radius(self) -> float:
        p, q = self.endpoints
        return math.inf if self.is_vertical else 0.5 * (q.value - p.value)

    def signed_distance(self, p: HPoint) -> float:
        """Distance signée de p à la géodésique (positive à l'intérieur du demi-cercle / à droite)"""
        if self.is_vertical:
            return math.asinh((p.y - self.center) / p.x)
        m, r = self.center, self.radius
        return math.asinh((r * r - (p.x ** 2 + (p.y - m) ** 2)) / (2.0 * r * p.x))

    def contains(self, p: HPoint, tol: float = DEFAULT_TOLERANCES.geometry) -> bool:
        return abs(self.signed_distance(p)) < tol

    def point_at(self, s: float) -> HPoint:
        """Point de paramètre d'arc s (s=0 au sommet, croissant vers la seconde extrémité)"""
        if self.is_vertical:
            return HPoint(math.exp(s), self.center)
        m, r = self.center, self.radius
        return HPoint(r / math.cosh(s), m + r * math.tanh(s))

    def to_dict(self) -> dict:
        return {"endpoints": [e.to_dict()["value"] for e in self.endpoints]}

    @classmethod
    def from_dict(cls, data: dict) -> "GeodesicH2":
        a, b = data["endpoints"]
        return cls((IdealPoint.from_dict(a), IdealPoint.from_dict(b)))


UNIT_GEODESIC = GeodesicH2.between(-1.0, 1.0)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def dist_h2(p: HPoint, q: HPoint) -> float:
    """Distance hyperbolique (forme arcsinh, stable pour les petites distances)"""
    chord = math.hypot(p.x - q.x, p.y - q.y)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(p.x * q.x)))


def dist_h2_arrays(x1, y1, x2, y2) -> np.ndarray:
    """Version vectorisée de dist_h2"""
    x1, y1, x2, y2 = (np.asarray(a, dtype=float) for a in (x1, y1, x2, y2))
    chord = np.hypot(x1 - x2, y1 - y2)
    return 2.0 * np.arcsinh(chord / (2.0 * np.sqrt(x1 * x2)))


def dist_ambient(p: AmbientPoint, q: AmbientPoint) -> float:
    return math.hypot(dist_h2(p.base, q.base), p.t - q.t)


def equidistant_coordinate(p: HPoint) -> float:
    """s(x, y) = (1 − x² − y²)/(2x) ; sinh de la distance signée au demi-cercle unité"""
    return (1.0 - p.x * p.x - p.y * p.y) / (2.0 * p.x)


def geodesic_through(p: HPoint, q: HPoint) -> GeodesicH2:
    if dist_h2(p, q) == 0.0:
        raise CoincidentPoints(f"points confondus: {p}")
    if p.y == q.y:
        return GeodesicH2((IdealPoint(p.y), INFINITY))
    m = (q.x ** 2 + q.y ** 2 - p.x ** 2 - p.y ** 2) / (2.0 * (q.y - p.y))
    r = math.hypot(p.x, p.y - m)
    return GeodesicH2.between(m - r, m + r)


def distance_between_geodesics(g1: GeodesicH2, g2: GeodesicH2) -> float:
    """Distance entre deux géodésiques ; 0 si elles se coupent ou sont asymptotes"""
    values = [e.value for e in (*g1.endpoints, *g2.endpoints)]
    if any(math.isinf(v) for v in values):
        # z -> −1/(z − c) avec c hors des extrémités
        finite = [v for v in values if math.isfinite(v)]
        c = (min(finite) - 1.0) if finite else 0.0
        values = [0.0 if math.isinf(v) else -1.0 / (v - c) for v in values]
    a1, a2, b1, b2 = values
    if len({a1, a2} & {b1, b2}) > 0:
        return 0.0
    ratio = ((a1 - b1) * (a2 - b2) + (a1 - b2) * (a2 - b1)) / ((a1 - a2) * (b1 - b2))
    ratio = abs(ratio)
    return math.acosh(ratio) if ratio > 1.0 else 0.0


# ---------------------------------------------------------------------------
# Isométries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    """
    Isométrie de H²×R : Möbius réelle de déterminant 1 sur le facteur H²,
    t -> ±t + shift sur le facteur vertical.
    """
    moebius: Tuple[float, float, float, float] = (1.0, 0.0, 0.0, 1.0)
    vertical_shift: float = 0.0
    vertical_flip: bool = False

    def __post_init__(self):
        a, b, c, d = (float(v) for v in np.asarray(self.moebius, dtype=float).ravel())
        det = a * d - b * c
        if det <= 0:
            raise DomainError(f"matrice de Möbius de déterminant {det} <= 0")
        k = 1.0 / math.sqrt(det)
        object.__setattr__(self, "moebius", (a * k, b * k, c * k, d * k))
        object.__setattr__(self, "vertical_shift", float(self.vertical_shift))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.moebius).reshape(2, 2)

    @property
    def trace(self) -> float:
        return self.moebius[0] + self.moebius[3]

    # constructeurs -------------------------------------------------------

    @classmethod
    def identity(cls) -> "Isometry":
        return cls()

    @classmethod
    def vertical_translation(cls, shift: float) -> "Isometry":
        return cls(vertical_shift=shift)

    @classmethod
    def dilation(cls, tau: float) -> "Isometry":
        """Translation de longueur tau le long de la géodésique (0, ∞)"""
        return cls((math.exp(tau / 2.0), 0.0, 0.0, math.exp(-tau / 2.0)))

    @classmethod
    def translation_along(cls, geodesic: GeodesicH2, tau: float, shift: float = 0.0) -> "Isometry":
        """Translation de longueur tau vers la seconde extrémité (mouvement hélicoïdal si shift ≠ 0)"""
        p, q = geodesic.endpoints
        if q.is_infinite:
            g = np.array([[1.0, p.value], [0.0, 1.0]])
        else:
            g = np.array([[q.value, p.value], [1.0, 1.0]])
        dil = np.diag([math.exp(tau / 2.0), math.exp(-tau / 2.0)])
        m = g @ dil @ np.linalg.inv(g)
        return cls(tuple(m.ravel()), vertical_shift=shift)

    @classmethod
    def rotation_about(cls, center: HPoint, angle: float, shift: float = 0.0) -> "Isometry":
        """Rotation d'angle `angle` autour de center (sens direct dans le disque de Cayley)"""
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        rot = np.array([[c, s], [-s, c]])
        h = np.array([[center.x, center.y], [0.0, 1.0]])
        m = h @ rot @ np.linalg.inv(h)
        return cls(tuple(m.ravel()), vertical_shift=shift)

    @classmethod
    def frame_of(cls, geodesic: GeodesicH2) -> "Isometry":
        """Isométrie envoyant la géodésique (0, ∞) sur `geodesic` (0 -> première extrémité)"""
        p, q = geodesic.endpoints
        if q.is_infinite:
            return cls((1.0, p.value, 0.0, 1.0))
        return cls((q.value, p.value, 1.0, 1.0))

    @classmethod
    def from_boundary_triple(
        cls, p1: IdealPoint, p2: IdealPoint, p3: IdealPoint
    ) -> "Isometry":
        """Isométrie envoyant (p1, p2, p3) sur (0, 1, ∞) ; l'ordre cyclique doit être direct"""
        if len({p1, p2, p3}) < 3:
            raise DomainError("points idéaux non distincts")
        if p1.is_infinite:
            m = (0.0, p2.value - p3.value, 1.0, -p3.value)
        elif p2.is_infinite:
            m = (1.0, -p1.value, 1.0, -p3.value)
        elif p3.is_infinite:
            m = (1.0, -p1.value, 0.0, p2.value - p1.value)
        else:
            a1, a2, a3 = p1.value, p2.value, p3.value
            m = (a2 - a3, -a1 * (a2 - a3), a2 - a1, -a3 * (a2 - a1))
        det = m[0] * m[3] - m[1] * m[2]
        if det <= 0:
            raise DomainError("triplet d'orientation inverse")
        return cls(m)

    # action ----------------------------------------------------------------

    def apply_h2(self, p: HPoint) -> HPoint:
        a, b, c, d = self.moebius
        z = p.z
        return HPoint.from_complex((a * z + b) / (c * z + d))

    def apply_ideal(self, q: IdealPoint) -> IdealPoint:
        a, b, c, d = self.moebius
        if q.is_infinite:
            return INFINITY if c == 0 else IdealPoint(a / c)
        den = c * q.value + d
        if den == 0:
            return INFINITY
        return IdealPoint((a * q.value + b) / den)

    def apply_geodesic(self, g: GeodesicH2) -> GeodesicH2:
        return GeodesicH2(tuple(self.apply_ideal(e) for e in g.endpoints))

    def apply_t(self, t: float) -> float:
        return (-t if self.vertical_flip else t) + self.vertical_shift

    def apply(self, p: AmbientPoint) -> AmbientPoint:
        return AmbientPoint(self.apply_h2(p.base), self.apply_t(p.t))

    def compose(self, other: "Isometry") -> "Isometry":
        """self ∘ other"""
        m = self.matrix @ other.matrix
        sign = -1.0 if self.vertical_flip else 1.0
        return Isometry(
            tuple(m.ravel()),
            vertical_shift=sign * other.vertical_shift + self.vertical_shift,
            vertical_flip=self.vertical_flip != other.vertical_flip,
        )

    def inverse(self) -> "Isometry":
        a, b, c, d = self.moebius
        sign = -1.0 if self.vertical_flip else 1.0
        return Isometry((d, -b, -c, a), vertical_shift=-sign * self.vertical_shift,
                        vertical_flip=self.vertical_flip)

    def power(self, n: int) -> "Isometry":
        result = Isometry.identity()
        step = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            result = step.compose(result)
        return result

    def to_dict(self) -> dict:
        return {
            "moebius": list(self.moebius),
            "vertical_shift": self.vertical_shift,
            "vertical_flip": self.vertical_flip,
        }


def apply_isometry(phi: Isometry, p: AmbientPoint) -> AmbientPoint:
    return phi.apply(p)


# ---------------------------------------------------------------------------
# Modèle du disque (Cayley)
# ---------------------------------------------------------------------------

def disk_from_halfplane(p: HPoint) -> complex:
    z = p.z
    return (z - 1j) / (z + 1j)


def halfplane_from_disk(w: complex) -> HPoint:
    if abs(w) >= 1.0:
        raise DomainError(f"point hors du disque: |w|={abs(w)}")
    return HPoint.from_complex(1j * (1.0 + w) / (1.0 - w))


def dist_disk(w1: complex, w2: complex) -> float:
    num = 2.0 * abs(w1 - w2) ** 2
    den = (1.0 - abs(w1) ** 2) * (1.0 - abs(w2) ** 2)
    return math.acosh(1.0 + num / den)


def ideal_angle(q: IdealPoint, base: Optional[HPoint] = None) -> float:
    """Angle de Cayley dans [0, 2π) du point idéal q vu depuis base (défaut (1, 0)) ; ∞ -> 0"""
    if base is not None:
        if q.is_infinite:
            return 0.0
        q = IdealPoint((q.value - base.y) / base.x)
    if q.is_infinite:
        return 0.0
    y = q.value
    return math.atan2(-2.0 * y, y * y - 1.0) % TWO_PI


def ideal_from_angle(theta: float, tol: float = 1e-14) -> IdealPoint:
    theta = theta % TWO_PI
    if theta < tol or TWO_PI - theta < tol:
        return INFINITY
    return IdealPoint(-1.0 / math.tan(theta / 2.0))


def cayley_angles(x, y, base: Optional[HPoint] = None) -> np.ndarray:
    """Angles de Cayley (vectorisés) de la direction des points (x, y) vus depuis base"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if base is not None:
        x, y = x / base.x, (y - base.y) / base.x
    return np.mod(np.arctan2(-2.0 * y, x * x + y * y - 1.0), TWO_PI)


def angle_gap(a: float, b: float) -> float:
    """Écart angulaire sur le cercle, dans [0, π]"""
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def moebius_arrays(phi: Isometry, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """Action vectorisée de la partie Möbius de phi sur des tableaux (x, y)"""
    a, b, c, d = phi.moebius
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # déterminant 1 : Im(φz) = Im(z)/|cz + d|², sans perte de précision loin de i
    den = (c * y + d) ** 2 + (c * x) ** 2
    real = a * c * (x * x + y * y) + (a * d + b * c) * y + b * d
    return x / den, real / den


def polar_points(center: HPoint, rho, alpha) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coordonnées géodésiques polaires autour de center : point à distance rho
    dans la direction d'angle de Cayley alpha (rho < 0 : direction opposée).
    Exact pour rho grand (jusqu'à ~300), sans passer par le disque.
    """
    rho = np.asarray(rho, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    c, s = np.cos(alpha / 2.0), np.sin(alpha / 2.0)
    e_minus, e_plus = np.exp(-rho), np.exp(rho)
    den = c * c * e_minus + s * s * e_plus
    x = 1.0 / den
    y = c * s * (e_minus - e_plus) / den
    return center.x * x, center.x * y + center.y


@dataclass(frozen=True)
class BoundaryArc:
    """Arc de ∂H² parcouru de start à end dans le sens des angles de Cayley croissants"""
    start: IdealPoint
    end: IdealPoint

    def __post_init__(self):
        if self.start == self.end:
            raise DomainError("arc dégénéré")

    @classmethod
    def between(cls, a: Union[float, IdealPoint], b: Union[float, IdealPoint]) -> "BoundaryArc":
        a = a if isinstance(a, IdealPoint) else IdealPoint(a)
        b = b if isinstance(b, IdealPoint) else IdealPoint(b)
        return cls(a, b)

    @property
    def theta_start(self) -> float:
        return ideal_angle(self.start)

    @property
    def span(self) -> float:
        return (ideal_angle(self.end) - self.theta_start) % TWO_PI

    @property
    def theta_end(self) -> float:
        """Angle de fin déroulé (theta_start < theta_end <= theta_start + 2π)"""
        return self.theta_start + self.span

    def contains_angle(self, theta: float, tol: float = 0.0) -> bool:
        offset = (theta - self.theta_start) % TWO_PI
        return offset <= self.span + tol or offset >= TWO_PI - tol

    @property
    def midpoint(self) -> IdealPoint:
        return ideal_from_angle(self.theta_start + 0.5 * self.span)

    @property
    def geodesic(self) -> GeodesicH2:
        return GeodesicH2((self.start, self.end))

    def frame(self) -> Isometry:
        """Isométrie envoyant l'arc standard (−1 -> 0 -> 1) sur cet arc"""
        standard = Isometry.from_boundary_triple(IdealPoint(-1.0), IdealPoint(0.0), IdealPoint(1.0))
        target = Isometry.from_boundary_triple(self.start, self.midpoint, self.end)
        return target.inverse().compose(standard)

    def to_dict(self) -> dict:
        return {"start": self.start.to_dict()["value"], "end": self.end.to_dict()["value"]}

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryArc":
        return cls(IdealPoint.from_dict(data["start"]), IdealPoint.from_dict(data["end"]))


STANDARD_ARC = BoundaryArc.between(-1.0, 1.0)
