"""
Maillages des familles explicites et export OBJ / CSV

Les sommets sont donnés dans les coordonnées du modèle (x, y, t) du
demi-plan ; ce n'est pas un plongement isométrique.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .families import (
    Catenoid,
    HorizontalSlice,
    RuledSurface,
    TallRectangle,
    VerticalFlat,
    tall_f_of_rho,
)
from .hyperbolic import (
    AmbientPoint,
    HPoint,
    Isometry,
    moebius_arrays,
    polar_points,
)
from .residual import HORIZONTAL, VERTICAL, GraphFunction, ResidualReport, horizontal_residual, vertical_residual
from .utils import InvalidParams, ResolutionTooLow, ShapeError, save_csv


DEFAULT_RADIUS = 120.0
MIN_RESOLUTION = 8
AREA_EPS = 1e-14


@dataclass
class SurfaceMesh:
    """Sommets (x, y, t), triangles (indices), provenance"""
    vertices: np.ndarray
    triangles: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ShapeError("indice de triangle hors des sommets")

    @property
    def x(self) -> np.ndarray:
        return self.vertices[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.vertices[:, 1]

    @property
    def t(self) -> np.ndarray:
        return self.vertices[:, 2]

    def ambient_points(self) -> List[AmbientPoint]:
        return [AmbientPoint.of(x, y, t) for x, y, t in self.vertices]

    def transformed(self, phi: Isometry) -> "SurfaceMesh":
        x, y = moebius_arrays(phi, self.x, self.y)
        t = (-self.t if phi.vertical_flip else self.t) + phi.vertical_shift
        return SurfaceMesh(np.column_stack([x, y, t]), self.triangles.copy(), dict(self.provenance))

    def to_dict(self) -> dict:
        return {
            "vertices": len(self.vertices),
            "triangles": len(self.triangles),
            "provenance": self.provenance,
        }


# ---------------------------------------------------------------------------
# Triangulation
# ---------------------------------------------------------------------------

def _grid_triangles(nu: int, nv: int, wrap: bool = False) -> np.ndarray:
    """Deux triangles par cellule d'une grille nu×nv (raccord de la dernière colonne si wrap)"""
    cols = nv if wrap else nv - 1
    i, j = np.meshgrid(np.arange(nu - 1), np.arange(cols), indexing="ij")
    i, j = i.ravel(), j.ravel()
    j1 = (j + 1) % nv
    a = i * nv + j
    b = (i + 1) * nv + j
    c = (i + 1) * nv + j1
    d = i * nv + j1
    return np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])


def metric_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Aire des triangles pour la métrique (dx² + dy²)/x² + dt², figée au barycentre"""
    p = vertices[triangles]
    xc = p[:, :, 0].mean(axis=1)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        scale = np.array([1.0, 1.0, 0.0])[None, :] / xc[:, None] + np.array([0.0, 0.0, 1.0])[None, :]
        e1 = (p[:, 1] - p[:, 0]) * scale
        e2 = (p[:, 2] - p[:, 0]) * scale
        cross = np.cross(e1, e2)
        return 0.5 * np.hypot(np.hypot(cross[:, 0], cross[:, 1]), cross[:, 2])


def _assemble(x, y, t, wrap: bool, provenance: dict) -> SurfaceMesh:
    nu, nv = np.shape(x)
    vertices = np.column_stack([np.ravel(x), np.ravel(y), np.ravel(t)])
    triangles = _grid_triangles(nu, nv, wrap)
    areas = metric_areas(vertices, triangles)
    keep = ~np.isnan(areas) & ~(areas <= AREA_EPS)
    return SurfaceMesh(vertices, triangles[keep], provenance)


def _clustered(lo: float, hi: float, n: int) -> np.ndarray:
    """n valeurs de lo à hi, resserrées près de lo"""
    return lo + (hi - lo) * np.linspace(0.0, 1.0, n) ** 2


# ---------------------------------------------------------------------------
# Paramétrages
# ---------------------------------------------------------------------------

def _slice_mesh(s: HorizontalSlice, nu: int, nv: int, radius: float) -> SurfaceMesh:
    rho = np.linspace(radius / nu, radius, nu)
    alpha = np.linspace(0.0, 2.0 * math.pi, nv, endpoint=False)
    R, A = np.meshgrid(rho, alpha, indexing="ij")
    x, y = polar_points(s.center, R, A)
    return _assemble(x, y, np.full_like(x, s.t), True, {})


def _flat_mesh(f: VerticalFlat, nu: int, nv: int, radius: float) -> SurfaceMesh:
    s = np.linspace(-radius, radius, nu)
    t = np.linspace(-radius, radius, nv)
    S, T = np.meshgrid(s, t, indexing="ij")
    x, y = moebius_arrays(Isometry.frame_of(f.geodesic), np.exp(S), np.zeros_like(S))
    return _assemble(x, y, T, False, {})


def _tall_mesh(tr: TallRectangle, nu: int, nv: int, radius: float) -> SurfaceMesh:
    C = tr.profile.C
    if tr.is_finite:
        rho = _clustered(tr.profile.rho_min, radius, nu)
        f = tall_f_of_rho(C, rho)
        # feuillet inférieur (ρ décroissant) puis supérieur, raccord en ρ_min
        rho_rows = np.concatenate([rho[::-1], rho[1:]])
        t_rows = np.concatenate([tr.a + f[::-1], tr.b - f[1:]])
    else:
        rho_rows = np.exp(np.linspace(-300.0, math.log(radius), 2 * nu - 1))
        f = tall_f_of_rho(C, rho_rows)
        t_rows = tr.a + f if math.isfinite(tr.a) else tr.b - f

    D = np.linspace(-radius, radius, nv)
    R, DD = np.meshgrid(rho_rows, D, indexing="ij")
    T = np.broadcast_to(t_rows[:, None], R.shape)
    # point à distance ρ de γ0 du côté de 0, translaté de D le long de γ0
    ch, sh = np.cosh(DD / 2.0), np.sinh(DD / 2.0)
    e2 = np.exp(-2.0 * R)
    den = ch * ch + sh * sh * e2
    x0 = np.exp(-R) / den
    y0 = ch * sh * (1.0 + e2) / den
    x, y = moebius_arrays(tr.frame(), x0, y0)
    return _assemble(x, y, T, False, {})


def _catenoid_mesh(cat: Catenoid, nu: int, nv: int, radius: float) -> SurfaceMesh:
    profile = cat.profile
    rho_neck = 2.0 * math.atanh(profile.r_neck)
    rho = _clustered(rho_neck, max(radius, rho_neck + 1.0), nu)
    T = profile.height_at(np.tanh(rho / 2.0))
    rho_rows = np.concatenate([rho[::-1], rho[1:]])
    t_rows = np.concatenate([cat.t0 - T[::-1], cat.t0 + T[1:]])
    alpha = np.linspace(0.0, 2.0 * math.pi, nv, endpoint=False)
    R, A = np.meshgrid(rho_rows, alpha, indexing="ij")
    x, y = polar_points(cat.center, R, A)
    return _assemble(x, y, np.broadcast_to(t_rows[:, None], R.shape), True, {})


def _ruled_mesh(rs: RuledSurface, nu: int, nv: int, radius: float) -> SurfaceMesh:
    if rs.kind == "diagonal":
        # translation de λ le long de l'axe, abscisse D sur la génératrice orthogonale
        lam = np.linspace(-1.25 * radius, 1.25 * radius, nu)
        D = np.linspace(-2.5 * radius, 2.5 * radius, nv)
        L, DD = np.meshgrid(lam, D, indexing="ij")
        x0 = np.exp(L) / np.cosh(DD)
        y0 = np.exp(L) * np.tanh(DD)
        x, y = moebius_arrays(rs.frame(), x0, y0)
        return _assemble(x, y, rs.slope * L, False, {})

    rho = np.linspace(-radius, radius, nu)
    alpha = np.linspace(-2.0 * math.pi, 2.0 * math.pi, nv)
    R, A = np.meshgrid(rho, alpha, indexing="ij")
    x, y = polar_points(rs.center, R, A)
    return _assemble(x, y, rs.pitch * A, False, {})


def build_mesh(
    family,
    resolution: Tuple[int, int] = (64, 64),
    radius: float = DEFAULT_RADIUS,
) -> SurfaceMesh:
    """Maillage d'une famille ; resolution = (nu, nv) >= 8×8"""
    nu, nv = (int(resolution[0]), int(resolution[1]))
    if min(nu, nv) < MIN_RESOLUTION:
        raise ResolutionTooLow(f"résolution {nu}×{nv} < {MIN_RESOLUTION}×{MIN_RESOLUTION}")
    if not (radius > 0 and math.isfinite(radius)):
        raise InvalidParams(f"rayon de maillage invalide: {radius}")

    if isinstance(family, HorizontalSlice):
        mesh = _slice_mesh(family, nu, nv, radius)
    elif isinstance(family, VerticalFlat):
        mesh = _flat_mesh(family, nu, nv, radius)
    elif isinstance(family, TallRectangle):
        mesh = _tall_mesh(family, nu, nv, radius)
    elif isinstance(family, Catenoid):
        mesh = _catenoid_mesh(family, nu, nv, radius)
    elif isinstance(family, RuledSurface):
        mesh = _ruled_mesh(family, nu, nv, radius)
    else:
        raise InvalidParams(f"famille non maillable: {type(family).__name__}")

    mesh.provenance = {"family": family.to_dict(), "resolution": [nu, nv], "radius": radius}
    return mesh


# ---------------------------------------------------------------------------
# Graphes locaux et résidu
# ---------------------------------------------------------------------------

def family_graph(family, n: int = 129) -> GraphFunction:
    """Portion de la surface écrite comme graphe sur une fenêtre n×n (repère de la famille)"""
    if n < 3:
        raise ResolutionTooLow(f"fenêtre {n}×{n} trop petite")

    if isinstance(family, HorizontalSlice):
        return GraphFunction.from_function(
            VERTICAL, np.linspace(0.5, 1.5, n), np.linspace(-0.5, 0.5, n),
            lambda X, Y: np.full_like(X, family.t))

    if isinstance(family, VerticalFlat):
        return GraphFunction.from_function(
            HORIZONTAL, np.linspace(0.5, 1.5, n), np.linspace(-0.5, 0.5, n),
            lambda X, T: np.zeros_like(X))

    if isinstance(family, TallRectangle):
        profile = family.profile
        x1 = 1.0 / (2.0 * (profile.s_min + 2.0))
        base = family.a if math.isfinite(family.a) else family.b
        sign = 1.0 if math.isfinite(family.a) else -1.0

        def tall(X, Y):
            s = (1.0 - X * X - Y * Y) / (2.0 * X)
            return base + sign * profile.f(s)

        return GraphFunction.from_function(
            VERTICAL, np.linspace(x1 / 4.0, x1, n), np.linspace(-x1, x1, n), tall)

    if isinstance(family, Catenoid):
        profile = family.profile
        h = 0.25
        while True:
            x = np.linspace(h, 2.0 * h, n)
            y = np.linspace(-h / 2.0, h / 2.0, n)
            X, Y = np.meshgrid(x, y, indexing="ij")
            w = _cayley_modulus(family.center, X, Y)
            if w.min() >= 0.5 * (1.0 + profile.r_neck):
                break
            h /= 2.0
        return GraphFunction.from_function(
            VERTICAL, x, y,
            lambda X, Y: family.t0 - profile.height_at(_cayley_modulus(family.center, X, Y)))

    if isinstance(family, RuledSurface):
        if family.kind == "diagonal":
            phi = family.frame().inverse()

            def diagonal(X, Y):
                x0, y0 = moebius_arrays(phi, X, Y)
                return 0.5 * family.slope * np.log(x0 * x0 + y0 * y0)

            # fenêtre autour de l'image de i par le repère de l'axe
            center = family.frame().apply_h2(HPoint(1.0, 0.0))
            x = center.x * np.linspace(0.5, 1.5, n)
            y = center.y + center.x * np.linspace(-0.5, 0.5, n)
            return GraphFunction.from_function(VERTICAL, x, y, diagonal)

        c = family.center

        def helicoid(X, Y):
            xr, yr = X / c.x, (Y - c.y) / c.x
            return family.pitch * np.arctan2(-2.0 * yr, xr * xr + yr * yr - 1.0)

        return GraphFunction.from_function(
            VERTICAL, c.x * np.linspace(1.5, 2.5, n), c.y + c.x * np.linspace(-0.5, 0.5, n), helicoid)

    raise InvalidParams(f"famille sans graphe local: {type(family).__name__}")


def tall_horizontal_graph(
    tr: TallRectangle,
    n: int = 129,
    t_window: Optional[Tuple[float, float]] = None,
    sheet: int = 1,
) -> GraphFunction:
    """
    Rectangle haut écrit y − 1 = v(x, t) près de l'extrémité 1 de l'arc standard.
    Chaque tranche est l'équidistante (1 − x² − y²)/(2x) = ±S(t) de l'axe.
    """
    if n < 4:
        raise ResolutionTooLow(f"graphe horizontal {n}×{n} trop petit")
    if sheet not in (-1, 1):
        raise InvalidParams(f"feuillet ±1 attendu, reçu {sheet}")
    if t_window is None:
        if tr.is_finite:
            margin = 0.1 * tr.height
            t_window = (tr.a + margin, tr.b - margin)
        elif math.isfinite(tr.a):
            t_window = (tr.a + 0.5, tr.a + 5.0)
        else:
            t_window = (tr.b - 5.0, tr.b - 0.5)
    t0, t1 = t_window
    if not (tr.a < t0 < t1 < tr.b):
        raise InvalidParams(f"fenêtre ({t0}, {t1}) hors de ({tr.a}, {tr.b})")

    t = np.linspace(t0, t1, n)
    u = np.minimum(t - tr.a, tr.b - t)
    S = sheet * np.asarray(tr.profile.f_inverse(u), dtype=float)
    s_max = float(np.max(np.abs(S)))
    x = np.linspace(0.0, 0.5 / (s_max + math.hypot(s_max, 1.0)), n)
    X, St = np.meshgrid(x, S, indexing="ij")
    return GraphFunction(HORIZONTAL, x, t, np.sqrt(1.0 - X * X - 2.0 * X * St) - 1.0)


def _cayley_modulus(center: HPoint, X, Y) -> np.ndarray:
    xr, yr = X / center.x, (Y - center.y) / center.x
    return np.sqrt((xr * xr + yr * yr - 1.0) ** 2 + 4.0 * yr * yr) / (xr * xr + yr * yr + 2.0 * xr + 1.0)


def mesh_residual(family, resolution: Tuple[int, int] = (65, 65)) -> ResidualReport:
    """Résidu de l'équation des graphes minimaux sur le graphe local de la famille"""
    g = family_graph(family, int(resolution[0]))
    if g.orientation == VERTICAL:
        return vertical_residual(g)
    return horizontal_residual(g)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def write_obj(mesh: SurfaceMesh, path: Union[str, Path]) -> Path:
    """Wavefront OBJ : coordonnées du modèle (x, y, t), faces indexées à partir de 1"""
    path = Path(path)
    family = mesh.provenance.get("family", {}).get("family", "?")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# minimal_lab mesh: {family}\n")
        f.write("# model coordinates (x, y, t) of the half-plane model, not an isometric embedding\n")
        for x, y, t in mesh.vertices:
            f.write(f"v {x:.17g} {y:.17g} {t:.17g}\n")
        for a, b, c in mesh.triangles + 1:
            f.write(f"f {a} {b} {c}\n")
    return path


def read_obj(path: Union[str, Path]) -> SurfaceMesh:
    vertices, triangles = [], []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                vertices.append([float(v) for v in parts[1:4]])
            elif parts[0] == "f":
                triangles.append([int(v.split("/")[0]) - 1 for v in parts[1:4]])
    if not vertices:
        raise ShapeError(f"aucun sommet dans {path}")
    return SurfaceMesh(np.array(vertices), np.array(triangles, dtype=np.int64).reshape(-1, 3),
                       {"source": str(path)})


def save_mesh_csv(mesh: SurfaceMesh, output_dir: Union[str, Path], stem: str = "mesh") -> Tuple[Path, Path]:
    """Sommets (x, y, t) et triangles (i, j, k) en deux fichiers CSV"""
    output_dir = Path(output_dir)
    vertices = pd.DataFrame(mesh.vertices, columns=["x", "y", "t"])
    triangles = pd.DataFrame(mesh.triangles, columns=["i", "j", "k"])
    return (save_csv(vertices, output_dir / f"{stem}_vertices.csv"),
            save_csv(triangles, output_dir / f"{stem}_triangles.csv"))
