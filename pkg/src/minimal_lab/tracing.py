"""
Lecture du bord géodésique d'une surface maillée et orbites d'isométries

Les sommets lointains sont regroupés par direction idéale (angle de Cayley
vu du point base) ; chaque case conserve l'enveloppe fermée des pentes
t/d_H observées. Une pente très grande marque seulement le pôle : un
maillage fini ne certifie jamais une pente infinie.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .compactify import ChamberInterval, DivergingSample, LimitConfig, geodesic_limit
from .curves import GeodesicBoundarySet
from .hyperbolic import TWO_PI, AmbientPoint, BoundaryArc, HPoint, IdealPoint, Isometry, cayley_angles, dist_h2_arrays, ideal_from_angle
from .mesh import SurfaceMesh
from .utils import DegenerateGenerator, InvalidParams, MeshTooSmall


BASEPOINT = AmbientPoint(HPoint(1.0, 0.0), 0.0)


def ideal_seen_from(theta: float, base: HPoint) -> IdealPoint:
    """Point idéal d'angle de Cayley theta vu depuis base"""
    q = ideal_from_angle(theta)
    if q.is_infinite:
        return q
    return IdealPoint(base.x * q.value + base.y)


@dataclass
class TraceConfig:
    """Paramètres du relevé des pentes"""
    # Sommets retenus
    escape_radius: float = 100.0
    bins: int = 360

    # Seuils de pente
    equator_tol: float = 0.05
    pole_slope: float = 10.0

    def __post_init__(self):
        if self.bins < 4:
            raise InvalidParams(f"nombre de cases trop faible: {self.bins}")
        if not (self.escape_radius > 0):
            raise InvalidParams(f"rayon d'échappement invalide: {self.escape_radius}")

    def to_dict(self) -> dict:
        return {"escape_radius": self.escape_radius, "bins": self.bins,
                "equator_tol": self.equator_tol, "pole_slope": self.pole_slope}


@dataclass
class TraceResult:
    boundary: GeodesicBoundarySet
    product_summary: Dict[str, int]
    far_vertices: int
    bins: int
    coverage: float
    slope_table: pd.DataFrame = field(repr=False, default=None)

    def interval_at(self, bin_index: int, sign: int) -> Optional[ChamberInterval]:
        rows = self.slope_table
        match = rows[(rows["bin"] == bin_index) & (rows["sign"] == sign)]
        if match.empty:
            return None
        return self.boundary.chamber_intervals[int(match.index[0])]

    def chamber_bins(self) -> List[tuple]:
        return sorted({(int(b), int(s)) for b, s in zip(self.slope_table["bin"], self.slope_table["sign"])})

    def to_dict(self) -> dict:
        return {
            "boundary": self.boundary.to_dict(),
            "product_summary": self.product_summary,
            "far_vertices": self.far_vertices,
            "bins": self.bins,
            "coverage": self.coverage,
        }


def _equator_arcs(flags: np.ndarray, base: HPoint) -> List[BoundaryArc]:
    """Réunit les cases consécutives porteuses d'équateur en arcs"""
    n = len(flags)
    width = TWO_PI / n
    if not flags.any() or flags.all():
        return []
    start = int(np.flatnonzero(~flags)[0])
    arcs = []
    run = None
    for step in range(1, n + 1):
        k = (start + step) % n
        if flags[k] and run is None:
            run = k
        if run is not None and (not flags[k] or step == n):
            last = (k - 1) % n if not flags[k] else k
            lo = (run - 0.5) * width
            hi = (last + 0.5) * width
            arcs.append(BoundaryArc(ideal_seen_from(lo, base), ideal_seen_from(hi, base)))
            run = None
    return arcs


def trace_surface_boundary(
    mesh: SurfaceMesh,
    basepoint: AmbientPoint = BASEPOINT,
    escape_radius: Optional[float] = None,
    bins: Optional[int] = None,
    config: Optional[TraceConfig] = None,
) -> TraceResult:
    """Bord géodésique d'une surface maillée, lu sur les sommets hors de la boule de rayon R"""
    config = config or TraceConfig()
    R = config.escape_radius if escape_radius is None else escape_radius
    N = config.bins if bins is None else bins

    base = basepoint.base
    d = dist_h2_arrays(base.x, base.y, mesh.x, mesh.y)
    dt = mesh.t - basepoint.t
    far = np.hypot(d, dt) > R
    if not far.any():
        raise MeshTooSmall(f"aucun sommet au-delà du rayon {R}")

    d, dt = d[far], dt[far]
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(d > 0, dt / d, np.sign(dt) * np.inf)
    angles = cayley_angles(mesh.x[far], mesh.y[far], base)
    bin_index = np.rint(angles / (TWO_PI / N)).astype(int) % N

    pole = np.abs(slope) >= config.pole_slope
    equator = np.abs(slope) < config.equator_tol
    chamber = ~pole & ~equator

    poles = {int(s) for s in np.unique(np.sign(dt[pole])) if s != 0}
    equator_bins = np.zeros(N, dtype=bool)
    equator_bins[np.unique(bin_index[equator])] = True

    frame = pd.DataFrame({
        "bin": bin_index[chamber],
        "sign": np.sign(slope[chamber]).astype(int),
        "slope": np.abs(slope[chamber]),
    })
    rows = []
    intervals = []
    if not frame.empty:
        hull = frame.groupby(["bin", "sign"])["slope"].agg(["min", "max", "count"]).reset_index()
        for b, s, lo, hi, count in hull.itertuples(index=False):
            lo = 0.0 if equator_bins[b] else float(lo)
            hi = math.inf if hi >= 0.5 * config.pole_slope else float(hi)
            rows.append({"bin": int(b), "sign": int(s), "lo": lo, "hi": hi, "count": int(count)})
            intervals.append(ChamberInterval(ideal_seen_from(TWO_PI * b / N, base), int(s), lo, hi))
    table = pd.DataFrame(rows, columns=["bin", "sign", "lo", "hi", "count"])

    summary = {
        "cylinder": int(equator.sum()),
        "corner+": int((chamber & (slope > 0)).sum()),
        "corner-": int((chamber & (slope < 0)).sum()),
        "cap+": int((pole & (dt > 0)).sum()),
        "cap-": int((pole & (dt < 0)).sum()),
    }
    covered_bins = len({int(b) for b in table["bin"]}) if not table.empty else 0

    boundary = GeodesicBoundarySet(
        equator_arcs=_equator_arcs(equator_bins, base),
        equator_full=bool(equator_bins.all()),
        poles=poles,
        chamber_intervals=intervals,
    )
    return TraceResult(boundary, summary, int(far.sum()), N, covered_bins / N, table)


# ---------------------------------------------------------------------------
# Orbites
# ---------------------------------------------------------------------------

@dataclass
class OrbitSample:
    sample: DivergingSample
    raw_slopes: np.ndarray
    limit: object
    tau: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "delta": self.delta,
            "steps": len(self.sample.points),
            "raw_slopes": self.raw_slopes,
            "limit": self.limit.to_dict(),
        }


def translation_length(generator: Isometry) -> float:
    """τ = 2·acosh(|tr|/2) ; DegenerateGenerator si l'isométrie n'est pas hyperbolique"""
    trace = abs(generator.trace)
    if trace <= 2.0 + 1e-12:
        raise DegenerateGenerator(f"|tr| = {trace:.12g} <= 2 : pas de translation hyperbolique")
    return 2.0 * math.acosh(trace / 2.0)


def orbit_slope_sample(
    generator: Isometry,
    steps: int = 40,
    basepoint: AmbientPoint = BASEPOINT,
    config: Optional[LimitConfig] = None,
) -> OrbitSample:
    """Itère l'isométrie depuis basepoint et lit la limite de l'orbite"""
    tau = translation_length(generator)
    if generator.vertical_flip:
        raise DegenerateGenerator("générateur avec retournement vertical")

    points = []
    p = basepoint
    for _ in range(steps):
        p = generator.apply(p)
        points.append(p)
    sample = DivergingSample(tuple(points), basepoint)

    x, y, t = sample.arrays()
    d = dist_h2_arrays(basepoint.base.x, basepoint.base.y, x, y)
    raw = (t - basepoint.t) / d

    config = config or LimitConfig(escape_radius=min(20.0, 0.5 * tau * steps))
    return OrbitSample(sample, raw, geodesic_limit(sample, config), tau, generator.vertical_shift)
