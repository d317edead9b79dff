"""
Résidus des équations des graphes minimaux et diagnostics près du bord idéal

Graphes verticaux t = u(x, y) :
    u_xx(1 + x²u_y²) + u_yy(1 + x²u_x²) − 2x²u_xy u_x u_y − x u_x(u_x² + u_y²) = 0
Graphes horizontaux y = v(x, t) :
    v_xx(x² + v_t²) + v_tt(1 + v_x²) − 2v_xt v_x v_t − x v_x(1 + v_x²) = 0

Différences centrées d'ordre 2 sur grille uniforme.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from .utils import InvalidParams, ShapeError, WindowOutOfRange, save_csv


VERTICAL = "vertical"
HORIZONTAL = "horizontal"


@dataclass
class GraphFunction:
    """
    Fonction échantillonnée sur [x0, x1]×[c0, c1] (x0 >= 0).
    c désigne y pour un graphe vertical, t pour un graphe horizontal ;
    values[i, j] = valeur en (x[i], c[j]).
    """
    orientation: str
    x: np.ndarray
    c: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.orientation not in (VERTICAL, HORIZONTAL):
            raise ShapeError(f"orientation inconnue: {self.orientation}")
        self.x = np.asarray(self.x, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.ndim != 1 or self.c.ndim != 1:
            raise ShapeError("axes x et c unidimensionnels attendus")
        if self.values.shape != (len(self.x), len(self.c)):
            raise ShapeError(f"valeurs de forme {self.values.shape}, attendu {(len(self.x), len(self.c))}")
        for name, axis in (("x", self.x), ("c", self.c)):
            if len(axis) < 2:
                raise ShapeError(f"axe {name}: au moins deux nœuds")
            steps = np.diff(axis)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ShapeError(f"axe {name}: pas non uniforme")
        if self.x[0] < 0:
            raise ShapeError(f"x0 = {self.x[0]} < 0")
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("valeurs non finies")

    @classmethod
    def from_function(
        cls,
        orientation: str,
        x: np.ndarray,
        c: np.ndarray,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ) -> "GraphFunction":
        X, C = np.meshgrid(np.asarray(x, dtype=float), np.asarray(c, dtype=float), indexing="ij")
        return cls(orientation, x, c, np.broadcast_to(func(X, C), X.shape).astype(float))

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def hc(self) -> float:
        return float(self.c[1] - self.c[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def shifted(self, constant: float) -> "GraphFunction":
        return GraphFunction(self.orientation, self.x, self.c, self.values + constant)


@dataclass
class ResidualReport:
    """Résidu aux nœuds évalués"""
    sup_norm: float
    l2_norm: float
    cells: np.ndarray
    spacing: Tuple[float, float]
    x: np.ndarray = field(default=None, repr=False)
    c: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_cells(cls, cells: np.ndarray, hx: float, hc: float, x=None, c=None) -> "ResidualReport":
        cells = np.asarray(cells, dtype=float)
        sup = float(np.max(np.abs(cells))) if cells.size else 0.0
        l2 = float(np.sqrt(hx * hc * np.sum(cells ** 2)))
        return cls(sup, l2, cells, (hx, hc), x, c)

    def to_dict(self) -> dict:
        return {"sup": self.sup_norm, "l2": self.l2_norm, "h": list(self.spacing)}

    def to_frame(self) -> pd.DataFrame:
        X, C = np.meshgrid(self.x, self.c, indexing="ij")
        return pd.DataFrame({"x": X.ravel(), "c": C.ravel(), "residual": self.cells.ravel()})

    def save_csv(self, path: Union[str, Path]) -> Path:
        return save_csv(self.to_frame(), path)


# ---------------------------------------------------------------------------
# Différences finies
# ---------------------------------------------------------------------------

def _central(g: GraphFunction):
    """Dérivées centrées aux nœuds intérieurs : (u_x, u_c, u_xx, u_cc, u_xc)"""
    u = g.values
    hx, hc = g.hx, g.hc
    ux = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * hx)
    uc = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * hc)
    uxx = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / hx ** 2
    ucc = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / hc ** 2
    uxc = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * hx * hc)
    return ux, uc, uxx, ucc, uxc


def vertical_operator(x, ux, uy, uxx, uyy, uxy):
    x2 = x * x
    return (uxx * (1.0 + x2 * uy ** 2) + uyy * (1.0 + x2 * ux ** 2)
            - 2.0 * x2 * uxy * ux * uy - x * ux * (ux ** 2 + uy ** 2))


def horizontal_operator(x, vx, vt, vxx, vtt, vxt):
    return (vxx * (x * x + vt ** 2) + vtt * (1.0 + vx ** 2)
            - 2.0 * vxt * vx * vt - x * vx * (1.0 + vx ** 2))


def _check(g: GraphFunction, orientation: str):
    if g.orientation != orientation:
        raise ShapeError(f"graphe {orientation} attendu, reçu {g.orientation}")
    if min(g.shape) < 3:
        raise ShapeError(f"grille {g.shape}: au moins 3×3 nœuds")


def vertical_residual(u: GraphFunction, include_ideal_edge: bool = False) -> ResidualReport:
    """
    Résidu de l'équation des graphes verticaux aux nœuds intérieurs.
    include_ideal_edge : ajoute la colonne x = 0 (schéma décentré d'ordre 2 en x).
    """
    _check(u, VERTICAL)
    ux, uy, uxx, uyy, uxy = _central(u)
    X = u.x[1:-1, None]
    cells = vertical_operator(X, ux, uy, uxx, uyy, uxy)
    xs = u.x[1:-1]

    if include_ideal_edge and u.x[0] == 0.0:
        if u.shape[0] < 4:
            raise ShapeError("colonne x = 0 : au moins 4 nœuds en x")
        v = u.values
        # en x = 0 l'équation se réduit à u_xx + u_yy
        edge_xx = (2.0 * v[0, 1:-1] - 5.0 * v[1, 1:-1] + 4.0 * v[2, 1:-1] - v[3, 1:-1]) / u.hx ** 2
        edge_yy = (v[0, 2:] - 2.0 * v[0, 1:-1] + v[0, :-2]) / u.hc ** 2
        cells = np.vstack([edge_xx + edge_yy, cells])
        xs = u.x[:-1]
    return ResidualReport.from_cells(cells, u.hx, u.hc, xs, u.c[1:-1])


def horizontal_residual(v: GraphFunction) -> ResidualReport:
    """Résidu de l'équation des graphes horizontaux (colonne x = 0 exclue)"""
    _check(v, HORIZONTAL)
    vx, vt, vxx, vtt, vxt = _central(v)
    X = v.x[1:-1, None]
    cells = horizontal_operator(X, vx, vt, vxx, vtt, vxt)
    return ResidualReport.from_cells(cells, v.hx, v.hc, v.x[1:-1], v.c[1:-1])


def divergence_residual(u: GraphFunction) -> ResidualReport:
    """
    Forme divergence W³·∂_i(u_i/W), W = sqrt(1 + x²|∇u|²), flux aux demi-nœuds.
    Coïncide avec vertical_residual à O(h²).
    """
    _check(u, VERTICAL)
    v = u.values
    hx, hy = u.hx, u.hc
    x = u.x

    # flux en x aux demi-nœuds (i+½, j), j intérieur
    ux_half = (v[1:, 1:-1] - v[:-1, 1:-1]) / hx
    uy_nodes = (v[:, 2:] - v[:, :-2]) / (2.0 * hy)
    uy_half = 0.5 * (uy_nodes[1:, :] + uy_nodes[:-1, :])
    x_half = 0.5 * (x[1:] + x[:-1])[:, None]
    Fx = ux_half / np.sqrt(1.0 + x_half ** 2 * (ux_half ** 2 + uy_half ** 2))

    # flux en y aux demi-nœuds (i, j+½), i intérieur
    uy_half_y = (v[1:-1, 1:] - v[1:-1, :-1]) / hy
    ux_nodes = (v[2:, :] - v[:-2, :]) / (2.0 * hx)
    ux_half_y = 0.5 * (ux_nodes[:, 1:] + ux_nodes[:, :-1])
    X = x[1:-1, None]
    Fy = uy_half_y / np.sqrt(1.0 + X ** 2 * (ux_half_y ** 2 + uy_half_y ** 2))

    div = (Fx[1:, :] - Fx[:-1, :]) / hx + (Fy[:, 1:] - Fy[:, :-1]) / hy
    ux, uy, _, _, _ = _central(u)
    W = np.sqrt(1.0 + X ** 2 * (ux ** 2 + uy ** 2))
    return ResidualReport.from_cells(W ** 3 * div, hx, hy, x[1:-1], u.c[1:-1])


# ---------------------------------------------------------------------------
# Diagnostics près de x = 0
# ---------------------------------------------------------------------------

def _window_rows(g: GraphFunction, t_window: Optional[Tuple[float, float]]) -> np.ndarray:
    if g.orientation != HORIZONTAL:
        raise ShapeError("diagnostic de bord : graphe horizontal attendu")
    if not (g.x[0] == 0.0 or g.x[0] < 0.01):
        raise WindowOutOfRange(f"la grille ne s'approche pas de x = 0 (x0 = {g.x[0]})")
    if t_window is None:
        return np.ones(len(g.c), dtype=bool)
    t0, t1 = t_window
    eps = 1e-12 * max(1.0, abs(g.c[0]), abs(g.c[-1]))
    if not (g.c[0] - eps <= t0 < t1 <= g.c[-1] + eps):
        raise WindowOutOfRange(f"fenêtre [{t0}, {t1}] hors de [{g.c[0]}, {g.c[-1]}]")
    rows = (g.c >= t0 - eps) & (g.c <= t1 + eps)
    if not rows.any():
        raise WindowOutOfRange(f"aucun nœud dans [{t0}, {t1}]")
    return rows


def lipschitz_constant(v: GraphFunction, t_window: Optional[Tuple[float, float]] = None) -> float:
    """max |v(x, t)|/x sur les trois plus petites colonnes x > 0"""
    rows = _window_rows(v, t_window)
    columns = np.flatnonzero(v.x > 0)[:3]
    ratios = np.abs(v.values[columns][:, rows]) / v.x[columns, None]
    return float(np.max(ratios))


def conormal_diagnostic(
    v: GraphFunction,
    orders: Tuple[int, int] = (2, 2),
    t_window: Optional[Tuple[float, float]] = None,
) -> pd.DataFrame:
    """
    Tableau sup |(x∂x)^p ∂t^q v| / x, p <= orders[0], q <= orders[1].
    x∂x est dérivé en s = log x après rééchantillonnage logarithmique.
    """
    p_max, q_max = orders
    if not (0 <= p_max <= 2 and 0 <= q_max <= 2):
        raise InvalidParams(f"ordres hors de [0, 2]: {orders}")
    rows = _window_rows(v, t_window)
    positive = v.x > 0
    xs = v.x[positive]
    if len(xs) < 4:
        raise WindowOutOfRange("au moins 4 colonnes x > 0")

    x_log = np.geomspace(xs[0], xs[-1], len(xs))
    log_x = np.log(x_log)
    V = CubicSpline(xs, v.values[positive], axis=0)(x_log)

    table = {}
    D = V
    for p in range(p_max + 1):
        if p > 0:
            D = np.gradient(D, log_x, axis=0, edge_order=2)
        E = D
        for q in range(q_max + 1):
            if q > 0:
                E = np.gradient(E, v.hc, axis=1, edge_order=2)
            table.setdefault(q, {})[p] = float(np.max(np.abs(E[:, rows]) / x_log[:, None]))
    frame = pd.DataFrame(table).sort_index()
    frame.index.name = "p"
    frame.columns.name = "q"
    return frame
