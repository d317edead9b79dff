"""
Compactifications de H²×R

- compactification produit : cylindre vertical ∂H²×R, deux calottes H²×{±∞},
  deux cercles de coins ;
- compactification géodésique : équateur, pôles, chambres de Weyl paramétrées
  par la pente ρ ∈ (0, ∞).

Les ensembles de points du bord sont décrits par des descripteurs fermés
(ChamberInterval, CylinderFiber, CapRegion, PointSet).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .hyperbolic import (
    AmbientPoint,
    HPoint,
    IdealPoint,
    angle_gap,
    cayley_angles,
    dist_ambient,
    dist_h2_arrays,
    ideal_angle,
    ideal_from_angle,
)
from .utils import SampleTooShort, ValidationError, decode_real, encode_real


def _sign(value: float) -> int:
    return 1 if value >= 0 else -1


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValidationError(f"signe invalide: {sign}")
    return sign


def same_ideal(a: IdealPoint, b: IdealPoint, tol: float = 1e-9) -> bool:
    """Égalité de points idéaux à tolérance près (mesurée sur l'angle de Cayley)"""
    if a == b:
        return True
    return angle_gap(ideal_angle(a), ideal_angle(b)) < tol


# ---------------------------------------------------------------------------
# Points du bord produit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerticalCylinder:
    theta: IdealPoint
    t: float
    kind = "cylinder"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.to_dict()["value"], "t": self.t}


@dataclass(frozen=True)
class Cap:
    sign: int
    p: HPoint
    kind = "cap"

    def __post_init__(self):
        _check_sign(self.sign)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sign": self.sign, "p": self.p.to_dict()}


@dataclass(frozen=True)
class Corner:
    theta: IdealPoint
    sign: int
    kind = "corner"

    def __post_init__(self):
        _check_sign(self.sign)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.to_dict()["value"], "sign": self.sign}


ProductBoundaryPoint = Union[VerticalCylinder, Cap, Corner]


# ---------------------------------------------------------------------------
# Points du bord géodésique
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Equator:
    theta: IdealPoint
    kind = "equator"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.to_dict()["value"]}


@dataclass(frozen=True)
class Pole:
    sign: int
    kind = "pole"

    def __post_init__(self):
        _check_sign(self.sign)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sign": self.sign}


@dataclass(frozen=True)
class Chamber:
    theta: IdealPoint
    sign: int
    slope: float
    kind = "chamber"

    def __post_init__(self):
        _check_sign(self.sign)
        if not (0.0 < self.slope < math.inf):
            raise ValidationError(f"pente de chambre hors de (0, ∞): {self.slope}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta": self.theta.to_dict()["value"],
            "sign": self.sign,
            "slope": self.slope,
        }


GeodesicBoundaryPoint = Union[Equator, Pole, Chamber]


@dataclass(frozen=True)
class NoLimit:
    """Absence de limite, avec le diagnostic de fluctuation"""
    fluctuation: float
    reason: str = ""
    kind = "nolimit"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "fluctuation": self.fluctuation, "reason": self.reason}


def boundary_point_from_dict(data: dict):
    """Relit un point du bord sérialisé (schéma à étiquette `kind`)"""
    kind = data["kind"]
    if kind == "cylinder":
        return VerticalCylinder(IdealPoint.from_dict(data["theta"]), decode_real(data["t"]))
    if kind == "cap":
        return Cap(int(data["sign"]), HPoint.from_dict(data["p"]))
    if kind == "corner":
        return Corner(IdealPoint.from_dict(data["theta"]), int(data["sign"]))
    if kind == "equator":
        return Equator(IdealPoint.from_dict(data["theta"]))
    if kind == "pole":
        return Pole(int(data["sign"]))
    if kind == "chamber":
        return Chamber(IdealPoint.from_dict(data["theta"]), int(data["sign"]), decode_real(data["slope"]))
    raise ValidationError(f"type de point du bord inconnu: {kind}")


# ---------------------------------------------------------------------------
# Descripteurs d'ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChamberInterval:
    """
    Partie fermée de la chambre W^sign(theta) : pentes dans [lo, hi] ⊆ [0, ∞].
    lo = 0 inclut le point de l'équateur, hi = ∞ inclut le pôle.
    """
    theta: IdealPoint
    sign: int
    lo: float = 0.0
    hi: float = math.inf
    kind = "chamber_interval"

    def __post_init__(self):
        _check_sign(self.sign)
        if not (0.0 <= self.lo <= self.hi):
            raise ValidationError(f"intervalle de pentes invalide: [{self.lo}, {self.hi}]")

    @property
    def is_full(self) -> bool:
        return self.lo == 0.0 and math.isinf(self.hi)

    @property
    def has_equator(self) -> bool:
        return self.lo == 0.0

    @property
    def has_pole(self) -> bool:
        return math.isinf(self.hi)

    def contains(self, point) -> bool:
        if isinstance(point, Equator):
            return self.has_equator and same_ideal(point.theta, self.theta)
        if isinstance(point, Pole):
            return self.has_pole and point.sign == self.sign
        if isinstance(point, Chamber):
            return (point.sign == self.sign and same_ideal(point.theta, self.theta)
                    and self.lo <= point.slope <= self.hi)
        return False

    def representative(self):
        """Point intérieur de la chambre si l'intervalle en contient un"""
        if self.hi == 0.0:
            return Equator(self.theta)
        if math.isinf(self.lo):
            return Pole(self.sign)
        if self.lo > 0:
            return Chamber(self.theta, self.sign, self.lo)
        return Chamber(self.theta, self.sign, min(1.0, 0.5 * self.hi))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta": self.theta.to_dict()["value"],
            "sign": self.sign,
            "interval": [encode_real(self.lo), encode_real(self.hi)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChamberInterval":
        lo, hi = data.get("interval", [0.0, "inf"])
        return cls(IdealPoint.from_dict(data["theta"]), int(data["sign"]),
                   decode_real(lo), decode_real(hi))


@dataclass(frozen=True)
class CylinderFiber:
    """Droite verticale {theta}×R du cylindre"""
    theta: IdealPoint
    kind = "cylinder_fiber"

    def contains(self, point) -> bool:
        return isinstance(point, VerticalCylinder) and same_ideal(point.theta, self.theta)

    def representative(self):
        return VerticalCylinder(self.theta, 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.to_dict()["value"]}


@dataclass(frozen=True)
class CapRegion:
    """Calotte entière H²×{sign·∞}"""
    sign: int
    kind = "cap_region"

    def __post_init__(self):
        _check_sign(self.sign)

    def contains(self, point) -> bool:
        return isinstance(point, Cap) and point.sign == self.sign

    def representative(self):
        return Cap(self.sign, HPoint(1.0, 0.0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sign": self.sign}


@dataclass(frozen=True)
class PointSet:
    points: tuple = field(default_factory=tuple)
    kind = "points"

    def contains(self, point) -> bool:
        for p in self.points:
            if type(p) is not type(point):
                continue
            if isinstance(p, (Equator, VerticalCylinder, Corner, Chamber)):
                if not same_ideal(p.theta, point.theta):
                    continue
            if isinstance(p, Chamber) and (p.sign != point.sign or abs(p.slope - point.slope) > 1e-12):
                continue
            if isinstance(p, (Pole, Cap, Corner)) and p.sign != point.sign:
                continue
            return True
        return False

    def representative(self):
        return self.points[0]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "points": [p.to_dict() for p in self.points]}


# ---------------------------------------------------------------------------
# Correspondance entre les deux bords
# ---------------------------------------------------------------------------

def product_to_geodesic(b: ProductBoundaryPoint):
    """Éclatement des coins, contraction des calottes"""
    if isinstance(b, VerticalCylinder):
        return PointSet((Equator(b.theta),))
    if isinstance(b, Cap):
        return PointSet((Pole(b.sign),))
    if isinstance(b, Corner):
        return ChamberInterval(b.theta, b.sign, 0.0, math.inf)
    raise ValidationError(f"point du bord produit attendu: {b!r}")


def geodesic_to_product(b: GeodesicBoundaryPoint):
    """Éclatement de l'équateur et des pôles"""
    if isinstance(b, Equator):
        return CylinderFiber(b.theta)
    if isinstance(b, Pole):
        return CapRegion(b.sign)
    if isinstance(b, Chamber):
        return PointSet((Corner(b.theta, b.sign),))
    raise ValidationError(f"point du bord géodésique attendu: {b!r}")


# ---------------------------------------------------------------------------
# Limites de suites divergentes
# ---------------------------------------------------------------------------

@dataclass
class LimitConfig:
    """Paramètres de lecture des limites"""
    # Queue de la suite
    escape_radius: float = 20.0
    tail: int = 8

    # Seuils
    slope_fluctuation: float = 1e-3
    angle_fluctuation: float = 1e-3
    zero_slope: float = 1e-3
    pole_slope: float = 1e6
    convergence: float = 1e-6

    # Distance horizontale bornée : d_H ≤ bounded_fraction·R sur toute la queue
    bounded_fraction: float = 0.5

    # Queue convergente : |Δ_j| ~ c·j^(-p) avec p > decay_exponent
    # et reste estimé ≤ remaining_fraction·R
    decay_exponent: float = 1.2
    remaining_fraction: float = 0.05


@dataclass(frozen=True)
class DivergingSample:
    """Suite de points de H²×R et point base"""
    points: tuple
    basepoint: AmbientPoint = AmbientPoint(HPoint(1.0, 0.0), 0.0)

    @classmethod
    def from_arrays(cls, x, y, t, basepoint: Optional[AmbientPoint] = None) -> "DivergingSample":
        pts = tuple(AmbientPoint.of(a, b, c) for a, b, c in zip(x, y, t))
        if basepoint is None:
            return cls(pts)
        return cls(pts, basepoint)

    def arrays(self):
        x = np.array([p.base.x for p in self.points])
        y = np.array([p.base.y for p in self.points])
        t = np.array([p.t for p in self.points])
        return x, y, t

    def transformed(self, phi) -> "DivergingSample":
        return DivergingSample(tuple(phi.apply(p) for p in self.points), phi.apply(self.basepoint))


@dataclass
class _Tail:
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray          # hauteurs relatives au point base
    d_h: np.ndarray        # distances horizontales au point base
    positions: np.ndarray  # rangs (à partir de 1) dans la suite


def _tail(s: DivergingSample, config: LimitConfig) -> _Tail:
    """Derniers points au-delà du rayon d'échappement"""
    far = [(j, p) for j, p in enumerate(s.points, start=1)
           if dist_ambient(s.basepoint, p) > config.escape_radius]
    if len(far) < config.tail:
        raise SampleTooShort(
            f"{len(far)} point(s) au-delà du rayon {config.escape_radius}, {config.tail} requis"
        )
    far = far[-config.tail:]
    x = np.array([p.base.x for _, p in far])
    y = np.array([p.base.y for _, p in far])
    t = np.array([p.t for _, p in far])
    b = s.basepoint
    d_h = dist_h2_arrays(b.base.x, b.base.y, x, y)
    return _Tail(x, y, t - b.t, d_h, np.array([j for j, _ in far], dtype=float))


def _tail_behaviour(values: np.ndarray, positions: np.ndarray, config: LimitConfig):
    """
    Comportement d'une queue de valeurs réelles.

    Retourne (état, reste) avec état ∈ {'converge', 'diverge', 'oscille'} ;
    le reste est l'écart estimé entre la dernière valeur et la limite.

    La queue converge quand ses pas décroissent au moins comme j^(-p), p > 1,
    et que le reste estimé est petit devant le rayon d'échappement. Sinon elle
    diverge si elle est monotone, et oscille dans les autres cas.
    """
    if float(np.ptp(values)) < config.convergence:
        return "converge", 0.0
    steps = np.diff(values)
    monotone = bool(np.all(steps > 0) or np.all(steps < 0))
    sizes = np.maximum(np.abs(steps), 1e-300)
    p = -float(np.polyfit(np.log(positions[1:]), np.log(sizes), 1)[0])
    if p > config.decay_exponent:
        remaining = float(sizes[-1] * positions[-1] / (p - 1.0))
        if remaining <= config.remaining_fraction * config.escape_radius:
            return "converge", (remaining * _sign(steps[-1]) if monotone else 0.0)
    if monotone:
        return "diverge", math.inf
    return "oscille", math.inf


def _horizontal_behaviour(tail: _Tail, config: LimitConfig) -> str:
    """Convergence de la base : longueur du chemin parcouru, puis distance au point base"""
    hops = dist_h2_arrays(tail.x[:-1], tail.y[:-1], tail.x[1:], tail.y[1:])
    path = np.concatenate([[0.0], np.cumsum(hops)])
    state, _ = _tail_behaviour(path, tail.positions, config)
    if state == "converge":
        return "converge"
    state, _ = _tail_behaviour(tail.d_h, tail.positions, config)
    return "diverge" if state == "diverge" else "oscille"


def _limit_direction(x, y, base: HPoint, config: LimitConfig):
    """Angle limite vu depuis base et son point idéal ; None si l'angle fluctue"""
    angles = cayley_angles(x, y, base)
    gaps = [angle_gap(angles[-1], a) for a in angles[-3:]]
    if max(gaps) > config.angle_fluctuation:
        return None, max(gaps)
    q = ideal_from_angle(float(angles[-1]))
    if not q.is_infinite:
        q = IdealPoint(base.x * q.value + base.y)
    return q, max(gaps)


def geodesic_limit(s: DivergingSample, config: Optional[LimitConfig] = None):
    """
    Limite dans la compactification géodésique.

    - d_H bornée sur la queue alors que |t| → ∞ : pôle ;
    - hauteur convergente : équateur ;
    - sinon la pente est lue sur les accroissements Δt/Δd_H de la queue, ce qui
      la rend indépendante du point base et des translations verticales.
    """
    config = config or LimitConfig()
    tail = _tail(s, config)
    t = tail.t

    if float(np.max(tail.d_h)) <= config.bounded_fraction * config.escape_radius:
        signs = np.sign(t)
        if np.all(signs == signs[-1]) and signs[-1] != 0:
            return Pole(int(signs[-1]))
        return NoLimit(float(np.ptp(t)), "hauteur de signe variable")

    vertical, _ = _tail_behaviour(t, tail.positions, config)
    if vertical == "converge":
        q, angle_fluct = _limit_direction(tail.x, tail.y, s.basepoint.base, config)
        if q is None:
            return NoLimit(angle_fluct, "direction")
        return Equator(q)

    dt = np.diff(t)
    dd = np.diff(tail.d_h)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.where(np.abs(dd) > 1e-12 * np.maximum(np.abs(dt), 1.0), dt / dd, np.inf * np.sign(dt))

    if np.all(np.abs(slopes) >= config.pole_slope):
        signs = np.sign(dt)
        if np.all(signs == signs[-1]) and signs[-1] != 0:
            return Pole(int(signs[-1]))
        return NoLimit(math.inf, "pente infinie de signe variable")

    if not np.all(np.isfinite(slopes)):
        return NoLimit(math.inf, "pente tantôt finie tantôt infinie")

    fluctuation = float(np.max(slopes) - np.min(slopes))
    if fluctuation > config.slope_fluctuation:
        return NoLimit(fluctuation, "pente")

    q, angle_fluct = _limit_direction(tail.x, tail.y, s.basepoint.base, config)
    if q is None:
        return NoLimit(angle_fluct, "direction")

    slope = float(slopes[-1])
    if abs(slope) < config.zero_slope:
        return Equator(q)
    return Chamber(q, _sign(slope), abs(slope))


def product_limit(s: DivergingSample, config: Optional[LimitConfig] = None):
    """Limite dans la compactification produit"""
    config = config or LimitConfig()
    tail = _tail(s, config)
    horizontal = _horizontal_behaviour(tail, config)
    vertical, remaining = _tail_behaviour(tail.t, tail.positions, config)

    if horizontal == "diverge" and vertical == "converge":
        q, fluct = _limit_direction(tail.x, tail.y, s.basepoint.base, config)
        if q is None:
            return NoLimit(fluct, "direction")
        return VerticalCylinder(q, float(tail.t[-1] + remaining + s.basepoint.t))
    if horizontal == "converge" and vertical == "diverge":
        return Cap(_sign(tail.t[-1]), HPoint(float(tail.x[-1]), float(tail.y[-1])))
    if horizontal == "diverge" and vertical == "diverge":
        q, fluct = _limit_direction(tail.x, tail.y, s.basepoint.base, config)
        if q is None:
            return NoLimit(fluct, "direction")
        return Corner(q, _sign(tail.t[-1]))
    spread = float(max(np.ptp(tail.d_h), np.ptp(tail.t)))
    return NoLimit(spread, f"horizontal={horizontal}, vertical={vertical}")


def random_boundary_points(rng: np.random.Generator, count: int) -> List:
    """Points du bord tirés au hasard dans les deux compactifications"""
    points = []
    for _ in range(count):
        kind = rng.integers(6)
        theta = IdealPoint(math.inf) if rng.random() < 0.05 else IdealPoint(rng.normal(scale=3.0))
        sign = int(rng.choice([-1, 1]))
        if kind == 0:
            points.append(VerticalCylinder(theta, float(rng.normal(scale=5.0))))
        elif kind == 1:
            points.append(Cap(sign, HPoint(float(rng.uniform(0.1, 5.0)), float(rng.normal()))))
        elif kind == 2:
            points.append(Corner(theta, sign))
        elif kind == 3:
            points.append(Equator(theta))
        elif kind == 4:
            points.append(Pole(sign))
        else:
            points.append(Chamber(theta, sign, float(rng.exponential(2.0)) + 1e-6))
    return points


def correspondence_round_trip(b) -> bool:
    """Vérifie que l'aller-retour entre les deux bords recouvre le point de départ"""
    if isinstance(b, (VerticalCylinder, Cap, Corner)):
        image = product_to_geodesic(b)
        return geodesic_to_product(image.representative()).contains(b)
    image = geodesic_to_product(b)
    return product_to_geodesic(image.representative()).contains(b)
