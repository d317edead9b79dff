"""
Familles explicites de surfaces minimales dans H²×R

- tranches horizontales H²×{t}, plats verticaux γ×R ;
- rectangles hauts H(c, a, b) : profil f solution de
  f'(s) = −1/sqrt(C s⁴ + (2C−1) s² + (C−1)), hauteur ℓ = 2·(f(s_min) − f(∞)) ;
- caténoïdes horizontales : r' = ±sqrt(C r² − (1 + r⁴)/4), C > 1/2 ;
- surfaces réglées diagonales et hélicoïdes (orbites d'une géodésique) ;
- courbes papillon et leur critère numérique de faisabilité.

Les hauteurs sont calculées par quadrature adaptative (scipy.integrate.quad)
avec le changement de variable s = s_min + σ² à l'extrémité singulière.
Les formes closes (intégrales elliptiques) servent d'évaluateurs vectorisés
et de contrôle.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ellipj, ellipk, ellipkinc

from .hyperbolic import (
    AmbientPoint,
    BoundaryArc,
    GeodesicH2,
    HPoint,
    IdealPoint,
    INFINITY,
    STANDARD_ARC,
    Isometry,
    distance_between_geodesics,
    ideal_angle,
)
from .curves import HorizontalArc, PiecewiseBoundaryCurve, VerticalSegment
from .utils import (
    DEFAULT_TOLERANCES,
    DomainError,
    InvalidParams,
    OutOfRange,
    QuadratureFailure,
)


# C au-delà duquel le profil n'est plus distinguable de C = 1
C_MAX_TALL = 1.0 - 1e-15
C_MIN_TALL = 1e-12


def _quad(func: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Quadrature adaptative ; QuadratureFailure si la tolérance n'est pas atteinte"""
    value, abserr, *rest = quad(func, lo, hi, epsabs=tol, epsrel=tol, limit=400, full_output=1)
    if len(rest) > 1:
        raise QuadratureFailure(f"quad sur [{lo}, {hi}]: {rest[1]}")
    if not math.isfinite(value) or abserr > 10.0 * max(tol, tol * abs(value)):
        raise QuadratureFailure(f"quad sur [{lo}, {hi}]: erreur estimée {abserr:.3g}")
    return value


# ---------------------------------------------------------------------------
# Rectangles hauts
# ---------------------------------------------------------------------------

def tall_s_min(C: float) -> float:
    """Racine positive de C s⁴ + (2C−1) s² + (C−1) (0 pour C = 1)"""
    return math.sqrt((1.0 - C) / C)


def _tall_f_quadrature(C: float, s_min: float, s: float, tol: float) -> float:
    """f(s) = ∫_s^∞ ds'/sqrt(P(s')) avec P = (1+s²)·C·(s − s_min)(s + s_min)"""
    def tail(u):
        return 1.0 / math.sqrt((1.0 + u * u) * C * (u - s_min) * (u + s_min))

    def near(sigma):
        # s = s_min + σ² : la singularité en racine inverse disparaît
        u = s_min + sigma * sigma
        return 2.0 / math.sqrt((1.0 + u * u) * C * (u + s_min))

    split = s_min + 1.0
    if s >= split:
        return _quad(tail, s, math.inf, tol)
    sigma0 = math.sqrt(max(s - s_min, 0.0))
    return _quad(near, sigma0, 1.0, tol) + _quad(tail, split, math.inf, tol)


def tall_f_closed_form(C: float, s) -> np.ndarray:
    """f(s) = F(arcsin(1/sqrt(C(1+s²))) | C) ; pour C = 1 : arctanh((1+s²)^(−1/2))"""
    s = np.asarray(s, dtype=float)
    if C == 1.0:
        return np.arctanh(1.0 / np.sqrt(1.0 + s * s))
    arg = np.clip(1.0 / np.sqrt(C * (1.0 + s * s)), 0.0, 1.0)
    return ellipkinc(np.arcsin(arg), C)


def tall_f_inverse(C: float, value) -> np.ndarray:
    """s tel que f(s) = value (value ∈ (0, f(s_min)]), via l'amplitude de Jacobi"""
    value = np.asarray(value, dtype=float)
    if C == 1.0:
        return 1.0 / np.sinh(value)
    sn, _, _, _ = ellipj(value, C)
    return np.sqrt(np.maximum(1.0 / (C * sn * sn) - 1.0, 0.0))


def tall_f_of_rho(C: float, rho) -> np.ndarray:
    """f(sinh ρ), stable pour ρ -> 0 (C = 1 : −log tanh(ρ/2)) et ρ grand"""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        if C == 1.0:
            small = -np.log(np.tanh(np.minimum(rho, 1.0) / 2.0))
            large = -np.log1p(-2.0 / (np.exp(np.maximum(rho, 1.0)) + 1.0))
            return np.where(rho < 1.0, small, large)
        arg = np.clip(1.0 / (math.sqrt(C) * np.cosh(rho)), 0.0, 1.0)
        return ellipkinc(np.arcsin(arg), C)


def tall_height_closed_form(C: float) -> float:
    """ℓ(C) = 2K(C), strictement croissante, ℓ(0+) = π"""
    return math.inf if C >= 1.0 else 2.0 * float(ellipk(C))


@dataclass
class TallRectangleProfile:
    """Profil f d'un rectangle haut de paramètre C ∈ (0, 1]"""
    C: float
    s_min: float
    s_samples: np.ndarray
    f_samples: np.ndarray
    height: float

    def f(self, s) -> np.ndarray:
        return tall_f_closed_form(self.C, s)

    def f_inverse(self, value) -> np.ndarray:
        return tall_f_inverse(self.C, value)

    @property
    def rho_min(self) -> float:
        """Distance minimale de la surface à son axe de symétrie"""
        return math.asinh(self.s_min)

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "s_min": self.s_min,
            "height": self.height,
            "rho_min": self.rho_min,
            "samples": len(self.s_samples),
        }


def tall_profile(
    C: float,
    samples: int = 64,
    tol: float = DEFAULT_TOLERANCES.quadrature,
) -> TallRectangleProfile:
    """Profil et hauteur d'un rectangle haut"""
    if not (0.0 < C <= 1.0) or not math.isfinite(C):
        raise DomainError(f"C doit appartenir à (0, 1], reçu {C}")

    if C == 1.0:
        s = np.concatenate([[0.0], np.geomspace(1e-6, 1e3, samples - 1)])
        with np.errstate(divide="ignore"):
            f = tall_f_closed_form(1.0, s)
        return TallRectangleProfile(C=1.0, s_min=0.0, s_samples=s, f_samples=f, height=math.inf)

    s_min = tall_s_min(C)
    s = s_min + np.concatenate([[0.0], np.geomspace(1e-6, 1e3, samples - 1)])
    f = np.array([_tall_f_quadrature(C, s_min, float(v), tol) for v in s])
    height = 2.0 * float(f[0])
    return TallRectangleProfile(C=C, s_min=s_min, s_samples=s, f_samples=f, height=height)


def tall_height(C: float, tol: float = DEFAULT_TOLERANCES.quadrature) -> float:
    """ℓ(C) par quadrature, sans tabuler le profil"""
    if not (0.0 < C <= 1.0):
        raise DomainError(f"C doit appartenir à (0, 1], reçu {C}")
    if C == 1.0:
        return math.inf
    s_min = tall_s_min(C)
    return 2.0 * _tall_f_quadrature(C, s_min, s_min, tol)


def tall_for_height(L: float) -> float:
    """Paramètre C du rectangle haut de hauteur L (> π), par bissection sur ℓ(C) = 2K(C)"""
    lo_height = tall_height_closed_form(C_MIN_TALL)
    hi_height = tall_height_closed_form(C_MAX_TALL)
    if not (lo_height < L < hi_height):
        raise DomainError(f"hauteur {L} hors de ({lo_height:.6f}, {hi_height:.3f})")
    return brentq(lambda c: tall_height_closed_form(c) - L, C_MIN_TALL, C_MAX_TALL,
                  xtol=1e-15, rtol=1e-13)


@dataclass
class TallRectangle:
    """
    Rectangle haut H(c, a, b) : graphe horizontal au-dessus de c×[a, b].
    a = −∞ ou b = +∞ pour les rectangles semi-infinis (C = 1).
    """
    profile: TallRectangleProfile
    arc: BoundaryArc = STANDARD_ARC
    a: float = 0.0
    b: float = math.inf

    def __post_init__(self):
        if math.isinf(self.a) and math.isinf(self.b):
            raise InvalidParams("au moins une des hauteurs a, b doit être finie")
        finite = math.isfinite(self.a) and math.isfinite(self.b)
        if finite:
            if abs((self.b - self.a) - self.profile.height) > 1e-9 * max(1.0, self.profile.height):
                raise InvalidParams(f"b − a = {self.b - self.a} ≠ ℓ = {self.profile.height}")
        elif self.profile.C != 1.0:
            raise InvalidParams("un rectangle semi-infini exige C = 1")

    @classmethod
    def with_height(cls, profile: TallRectangleProfile, a: float = 0.0,
                    arc: BoundaryArc = STANDARD_ARC) -> "TallRectangle":
        return cls(profile=profile, arc=arc, a=a, b=a + profile.height)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b)

    @property
    def height(self) -> float:
        return self.b - self.a

    def frame(self) -> Isometry:
        return self.arc.frame()

    def to_dict(self) -> dict:
        return {
            "family": "tall",
            "profile": self.profile.to_dict(),
            "arc": self.arc.to_dict(),
            "a": self.a,
            "b": self.b,
        }


def rho_profile(tr: TallRectangle, t: float) -> float:
    """Distance ρ(t) entre la tranche de hauteur t et la géodésique axe de l'arc"""
    if not (tr.a < t < tr.b):
        raise OutOfRange(f"t={t} hors de ({tr.a}, {tr.b})")
    if math.isinf(tr.b):
        u = t - tr.a
    elif math.isinf(tr.a):
        u = tr.b - t
    else:
        u = min(t - tr.a, tr.b - t)
    s = float(tr.profile.f_inverse(u))
    return math.asinh(s)


# ---------------------------------------------------------------------------
# Caténoïdes horizontales
# ---------------------------------------------------------------------------

def catenoid_neck(C: float) -> float:
    """Plus petite racine positive de r⁴ − 4C r² + 1 : r² = 2C − sqrt(4C² − 1)"""
    return math.sqrt(1.0 / (2.0 * C + math.sqrt(4.0 * C * C - 1.0)))


def _catenoid_height_quadrature(r_neck: float, r: float, tol: float) -> float:
    """t(r) = ∫_{r_neck}^r dr'/sqrt(C r'² − (1 + r'⁴)/4), en r' = r_neck + σ²"""
    alpha = r_neck * r_neck

    def integrand(sigma):
        u = r_neck + sigma * sigma
        return 4.0 / math.sqrt((u + r_neck) * (1.0 / alpha - u * u))

    return _quad(integrand, 0.0, math.sqrt(max(r - r_neck, 0.0)), tol)


def catenoid_height_closed_form(r_neck: float, r) -> np.ndarray:
    """t(r) = 2 r_n F(φ | 1 − r_n⁴), sin²φ = (1 − r_n²/r²)/(1 − r_n⁴)"""
    r = np.asarray(r, dtype=float)
    alpha = r_neck * r_neck
    sin2 = np.clip((1.0 - alpha / (r * r)) / (1.0 - alpha * alpha), 0.0, 1.0)
    return 2.0 * r_neck * ellipkinc(np.arcsin(np.sqrt(sin2)), 1.0 - alpha * alpha)


@dataclass
class CatenoidProfile:
    """Profil r(t) (rayon euclidien dans le disque de Cayley) d'une caténoïde horizontale"""
    C: float
    r_neck: float
    half_height: float
    t_samples: np.ndarray
    r_samples: np.ndarray

    @property
    def height(self) -> float:
        return 2.0 * self.half_height

    def radius_at(self, t) -> np.ndarray:
        """r(t) pour |t| <= b, par inversion de Jacobi"""
        t = np.asarray(t, dtype=float)
        if np.any(np.abs(t) > self.half_height * (1.0 + 1e-12)):
            raise OutOfRange(f"|t| > b = {self.half_height}")
        alpha = self.r_neck ** 2
        sn, _, _, _ = ellipj(np.abs(t) / (2.0 * self.r_neck), 1.0 - alpha * alpha)
        return np.sqrt(alpha / (1.0 - sn * sn * (1.0 - alpha * alpha)))

    def height_at(self, r) -> np.ndarray:
        return catenoid_height_closed_form(self.r_neck, r)

    @property
    def disk_diameter(self) -> float:
        """Diamètre hyperbolique du disque {r < r_neck} non recouvert par la caténoïde"""
        return 4.0 * math.atanh(self.r_neck)

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "r_neck": self.r_neck,
            "half_height": self.half_height,
            "height": self.height,
            "disk_diameter": self.disk_diameter,
        }


def catenoid_half_height(C: float, tol: float = DEFAULT_TOLERANCES.quadrature) -> float:
    if not (C > 0.5) or not math.isfinite(C):
        raise DomainError(f"la caténoïde exige C > 1/2, reçu {C}")
    return _catenoid_height_quadrature(catenoid_neck(C), 1.0, tol)


def catenoid_profile(
    C: float,
    samples: int = 64,
    tol: float = DEFAULT_TOLERANCES.quadrature,
) -> CatenoidProfile:
    """Profil de caténoïde par quadrature de l'EDO séparable"""
    if not (C > 0.5) or not math.isfinite(C):
        raise DomainError(f"la caténoïde exige C > 1/2, reçu {C}")
    r_neck = catenoid_neck(C)
    r = r_neck + (1.0 - r_neck) * np.linspace(0.0, 1.0, samples) ** 2
    t = np.array([_catenoid_height_quadrature(r_neck, float(v), tol) for v in r])
    half_height = float(t[-1])
    t_all = np.concatenate([-t[::-1], t[1:]])
    r_all = np.concatenate([r[::-1], r[1:]])
    return CatenoidProfile(C=C, r_neck=r_neck, half_height=half_height,
                           t_samples=t_all, r_samples=r_all)


def catenoid_for_height(ell: float, tol: float = DEFAULT_TOLERANCES.quadrature) -> float:
    """C de la caténoïde de hauteur totale ell ∈ (0, π), par bissection sur 2b(C)"""
    if not (0.0 < ell < math.pi):
        raise DomainError(f"hauteur de caténoïde hors de (0, π): {ell}")
    lo = 0.5 + 1e-12
    if 2.0 * catenoid_half_height(lo, tol) <= ell:
        raise DomainError(f"hauteur {ell} trop proche de π")
    hi = 1.0
    while 2.0 * catenoid_half_height(hi, tol) > ell:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError(f"hauteur {ell} trop petite")
    return brentq(lambda c: 2.0 * catenoid_half_height(c, tol) - ell, lo, hi, xtol=1e-14, rtol=1e-12)


def slab_disk_diameter(ell: float, tol: float = DEFAULT_TOLERANCES.quadrature) -> float:
    """Diamètre du disque complémentaire de la projection de la caténoïde de hauteur ell"""
    return 4.0 * math.atanh(catenoid_neck(catenoid_for_height(ell, tol)))


@dataclass
class Catenoid:
    """Caténoïde placée : profil, centre de rotation, hauteur du col"""
    profile: CatenoidProfile
    center: HPoint = HPoint(1.0, 0.0)
    t0: float = 0.0

    def to_dict(self) -> dict:
        return {"family": "catenoid", "profile": self.profile.to_dict(),
                "center": self.center.to_dict(), "t0": self.t0}


# ---------------------------------------------------------------------------
# Tranches, plats, surfaces réglées
# ---------------------------------------------------------------------------

@dataclass
class HorizontalSlice:
    t: float = 0.0
    center: HPoint = HPoint(1.0, 0.0)

    def to_dict(self) -> dict:
        return {"family": "slice", "t": self.t}


@dataclass
class VerticalFlat:
    geodesic: GeodesicH2 = GeodesicH2((IdealPoint(0.0), INFINITY))

    def to_dict(self) -> dict:
        return {"family": "flat", "geodesic": self.geodesic.to_dict()}


@dataclass
class RuledSurface:
    """
    kind = "diagonal" : orbite de la géodésique orthogonale à l'axe par la
    translation hyperbolique couplée t -> t + slope·τ ;
    kind = "helicoid" : orbite d'une géodésique passant par center par les
    rotations couplées t -> t + pitch·angle.
    """
    kind: str = "diagonal"
    axis: GeodesicH2 = GeodesicH2((IdealPoint(0.0), INFINITY))
    center: HPoint = HPoint(1.0, 0.0)
    slope: float = 0.0
    pitch: float = 1.0

    def __post_init__(self):
        if self.kind not in ("diagonal", "helicoid"):
            raise InvalidParams(f"type de surface réglée inconnu: {self.kind}")
        if not (math.isfinite(self.slope) and math.isfinite(self.pitch)):
            raise InvalidParams("pente et pas doivent être finis")

    def frame(self) -> Isometry:
        return Isometry.frame_of(self.axis)

    def generator(self, tau: float) -> Isometry:
        """Isométrie engendrant la surface pour un pas tau (translation ou rotation)"""
        if self.kind == "diagonal":
            return Isometry.translation_along(self.axis, tau, shift=self.slope * tau)
        return Isometry.rotation_about(self.center, tau, shift=self.pitch * tau)

    def point(self, tau: float, s: float) -> AmbientPoint:
        """Point de paramètres (tau, s) : s abscisse sur la génératrice initiale"""
        if self.kind == "diagonal":
            base = self.frame().apply_h2(HPoint(1.0 / math.cosh(s), math.tanh(s)))
        else:
            base = Isometry.rotation_about(self.center, 0.0).apply_h2(
                HPoint(self.center.x * math.exp(s), self.center.y))
        return self.generator(tau).apply(AmbientPoint(base, 0.0))

    def to_dict(self) -> dict:
        data = {"family": self.kind, "center": self.center.to_dict()}
        if self.kind == "diagonal":
            data.update({"axis": self.axis.to_dict(), "slope": self.slope})
        else:
            data["pitch"] = self.pitch
        return data


# ---------------------------------------------------------------------------
# Courbes papillon
# ---------------------------------------------------------------------------

@dataclass
class ButterflyParams:
    ell: float
    L: float
    a: float
    b: float
    q: Tuple[IdealPoint, IdealPoint, IdealPoint, IdealPoint]

    def __post_init__(self):
        self.q = tuple(p if isinstance(p, IdealPoint) else IdealPoint(p) for p in self.q)
        if not (0.0 < self.ell < math.pi < self.L):
            raise InvalidParams(f"il faut 0 < ℓ < π < L, reçu ℓ={self.ell}, L={self.L}")
        if not (self.a < self.b and self.b + self.ell < self.a + self.L):
            raise InvalidParams("il faut a < b et b + ℓ < a + L")
        if len(set(self.q)) != 4 or not cyclically_ordered(self.q):
            raise InvalidParams("q1..q4 doivent être distincts et cycliquement ordonnés")

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "L": self.L,
            "a": self.a,
            "b": self.b,
            "q": [p.to_dict()["value"] for p in self.q],
        }


def cyclically_ordered(points) -> bool:
    """Vrai si les angles de Cayley des points croissent cycliquement"""
    angles = [ideal_angle(p) for p in points]
    k = int(np.argmin(angles))
    rotated = angles[k:] + angles[:k]
    return all(u < v for u, v in zip(rotated, rotated[1:]))


def butterfly_curve(p: ButterflyParams) -> PiecewiseBoundaryCurve:
    """Courbe papillon fermée à 12 segments"""
    q1, q2, q3, q4 = p.q
    a, b, ell, L = p.a, p.b, p.ell, p.L
    top = a + L
    segments = (
        VerticalSegment(q1, a, top),
        HorizontalArc(q1, q2, top),
        VerticalSegment(q2, top, b + ell),
        HorizontalArc(q2, q3, b + ell),
        VerticalSegment(q3, b + ell, top),
        HorizontalArc(q3, q4, top),
        VerticalSegment(q4, top, a),
        HorizontalArc(q4, q3, a, positive=False),
        VerticalSegment(q3, a, b),
        HorizontalArc(q3, q2, b, positive=False),
        VerticalSegment(q2, b, a),
        HorizontalArc(q2, q1, a, positive=False),
    )
    return PiecewiseBoundaryCurve(segments=segments, closed=True)


@dataclass
class ButterflyWitness:
    """Géométrie témoin de la faisabilité (disque, marge, rectangles hauts)"""
    ell: float
    disk_diameter: float
    geodesic_distance: float
    margin: float
    catenoid_C: float
    tall_C: float
    L: float
    L_min: float
    rho_min: float
    safety: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class Infeasible:
    ell: float
    disk_diameter: float
    geodesic_distance: float
    reason: str = ""
    kind = "infeasible"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ell": self.ell, "disk_diameter": self.disk_diameter,
                "geodesic_distance": self.geodesic_distance, "reason": self.reason}


def _tall_C_for_radius(radius: float) -> float:
    """C tel que 2·asinh(s_min(C)) = radius : C = 1/cosh²(radius/2)"""
    return 1.0 / math.cosh(radius / 2.0) ** 2


def butterfly_feasibility(
    ell: float,
    q: Tuple[IdealPoint, IdealPoint, IdealPoint, IdealPoint],
    safety: float = 0.9,
    tol: float = DEFAULT_TOLERANCES.quadrature,
) -> Union[ButterflyWitness, Infeasible]:
    """
    Cherche L > π tel que 2·r(L) < safety·(d(ℓ) − dist(γ1, γ4)), où d(ℓ) est le
    diamètre du disque laissé libre par la caténoïde de hauteur ℓ et r(L) la
    distance minimale du rectangle haut de hauteur L à son plat limite.
    """
    if not (0.0 < ell < math.pi):
        raise DomainError(f"ℓ doit appartenir à (0, π), reçu {ell}")
    if not (0.0 < safety <= 1.0):
        raise DomainError(f"facteur de sécurité hors de (0, 1]: {safety}")
    q = tuple(p if isinstance(p, IdealPoint) else IdealPoint(p) for p in q)
    if len(set(q)) != 4 or not cyclically_ordered(q):
        raise DomainError("q1..q4 doivent être distincts et cycliquement ordonnés")

    C_cat = catenoid_for_height(ell, tol)
    diameter = 4.0 * math.atanh(catenoid_neck(C_cat))
    gamma1 = GeodesicH2((q[0], q[1]))
    gamma4 = GeodesicH2((q[2], q[3]))
    distance = distance_between_geodesics(gamma1, gamma4)
    if distance >= diameter:
        return Infeasible(ell, diameter, distance, "dist(γ1, γ4) >= d(ℓ)")

    margin = diameter - distance

    def rho_gap(C: float) -> float:
        return 2.0 * math.asinh(tall_s_min(C)) - safety * margin

    # r(L) décroît avec C : au-delà du bord C_edge = 1/cosh²(safety·marge/2), puis L = ℓ(C)
    C_edge = _tall_C_for_radius(safety * margin)
    if C_edge >= C_MAX_TALL:
        return Infeasible(ell, diameter, distance, "marge trop faible pour un rectangle haut")
    C_tall = min(C_edge * (1.0 + 1e-9), C_MAX_TALL)
    if rho_gap(C_tall) >= 0.0:
        return Infeasible(ell, diameter, distance, "marge trop faible pour un rectangle haut")
    L = tall_height(C_tall, tol)
    L_min = tall_height(_tall_C_for_radius(margin), tol)
    return ButterflyWitness(
        ell=ell,
        disk_diameter=diameter,
        geodesic_distance=distance,
        margin=margin,
        catenoid_C=C_cat,
        tall_C=C_tall,
        L=L,
        L_min=L_min,
        rho_min=math.asinh(tall_s_min(C_tall)),
        safety=safety,
    )
