"""
Problème de Dirichlet pour les graphes minimaux verticaux

Rectangle [0, X]×[y0, y1] du demi-plan ; l'arête x = 0 porte la donnée
idéale u0. Newton amorti (backtracking d'Armijo sur la norme l2 du résidu),
jacobienne creuse assemblée à partir des dérivées partielles de l'opérateur.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from .residual import VERTICAL, GraphFunction, vertical_operator
from .utils import (
    DEFAULT_TOLERANCES,
    IllPosedData,
    InvalidParams,
    NonConvergence,
    NotConverged,
    ResolutionTooLow,
    ShapeError,
)


MIN_GRID = 16
MAX_GRID = 512
CORNER_TOL = 1e-9


@dataclass
class NewtonConfig:
    """Paramètres du Newton amorti"""
    # Arrêt
    tol: float = DEFAULT_TOLERANCES.newton
    max_iter: int = 50

    # Recherche linéaire
    backtrack: float = 0.5
    min_step: float = 1e-6
    armijo: float = 1e-4

    # Itéré initial : "coons" (interpolation transfinie des bords) ou "zero"
    initial: str = "coons"

    verbose: bool = False

    def __post_init__(self):
        if not (self.tol > 0):
            raise InvalidParams(f"tolérance de Newton invalide: {self.tol}")
        if self.max_iter < 1:
            raise InvalidParams(f"max_iter invalide: {self.max_iter}")
        if self.initial not in ("coons", "zero"):
            raise InvalidParams(f"itéré initial inconnu: {self.initial}")

    def to_dict(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter, "backtrack": self.backtrack,
                "min_step": self.min_step, "armijo": self.armijo, "initial": self.initial}


def tall_c1_solution(X, Y) -> np.ndarray:
    """Graphe exact du rectangle haut C = 1 : arctanh(2x / sqrt(4x² + (1 − x² − y²)²))"""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return np.arctanh(2.0 * X / np.sqrt(4.0 * X * X + (1.0 - X * X - Y * Y) ** 2))


def bump(y, center: float = 0.0, width: float = 0.25, amplitude: float = 1.0) -> np.ndarray:
    """Bosse lisse à support compact : amplitude·cos²(π(y − center)/(2 width))"""
    y = np.asarray(y, dtype=float)
    r = (y - center) / width
    return np.where(np.abs(r) < 1.0, amplitude * np.cos(0.5 * math.pi * r) ** 2, 0.0)


@dataclass
class DirichletProblem:
    """Données de Dirichlet sur les quatre arêtes du rectangle"""
    X: float
    y0: float
    y1: float
    nx: int
    ny: int
    ideal: np.ndarray
    far: np.ndarray
    bottom: np.ndarray
    top: np.ndarray
    name: str = ""

    def __post_init__(self):
        if not (self.X > 0 and self.y1 > self.y0):
            raise InvalidParams(f"domaine invalide: X={self.X}, y ∈ [{self.y0}, {self.y1}]")
        if min(self.nx, self.ny) < MIN_GRID:
            raise ResolutionTooLow(f"grille {self.nx}×{self.ny} < {MIN_GRID}×{MIN_GRID}")
        if max(self.nx, self.ny) > MAX_GRID:
            raise InvalidParams(f"grille {self.nx}×{self.ny} > {MAX_GRID}×{MAX_GRID}")
        for name, n in (("ideal", self.ny), ("far", self.ny), ("bottom", self.nx), ("top", self.nx)):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.shape != (n,):
                raise ShapeError(f"arête {name}: {values.shape} au lieu de ({n},)")
            if not np.all(np.isfinite(values)):
                raise ShapeError(f"arête {name}: valeurs non finies")
            setattr(self, name, values)

        corners = [
            ("(0, y0)", self.ideal[0], self.bottom[0]),
            ("(0, y1)", self.ideal[-1], self.top[0]),
            ("(X, y0)", self.far[0], self.bottom[-1]),
            ("(X, y1)", self.far[-1], self.top[-1]),
        ]
        for label, u, v in corners:
            if abs(u - v) > CORNER_TOL:
                raise IllPosedData(f"coin {label}: données incompatibles {u} ≠ {v}")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.X, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny)

    @property
    def hx(self) -> float:
        return self.X / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def data_range(self):
        edges = np.concatenate([self.ideal, self.far, self.bottom, self.top])
        return float(edges.min()), float(edges.max())

    @classmethod
    def from_function(
        cls,
        g: Callable[[np.ndarray, np.ndarray], np.ndarray],
        X: float = 1.0,
        y0: float = -0.5,
        y1: float = 0.5,
        nx: int = 64,
        ny: int = 64,
        name: str = "",
    ) -> "DirichletProblem":
        x = np.linspace(0.0, X, nx)
        y = np.linspace(y0, y1, ny)

        def edge(xs, ys):
            return np.broadcast_to(g(xs, ys), np.broadcast(xs, ys).shape).astype(float)

        return cls(
            X=X, y0=y0, y1=y1, nx=nx, ny=ny,
            ideal=edge(np.zeros_like(y), y),
            far=edge(np.full_like(y, X), y),
            bottom=edge(x, np.full_like(x, y0)),
            top=edge(x, np.full_like(x, y1)),
            name=name,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "DirichletProblem":
        """
        {"domain": {"X", "y0", "y1"}, "grid": [nx, ny], "edges": {"kind": ...}}
        kind : constant (value), tall_c1, bump (center, width, amplitude), arrays
        (ideal, far, bottom, top).
        """
        domain = data.get("domain", {})
        X = float(domain.get("X", 1.0))
        y0 = float(domain.get("y0", -0.5))
        y1 = float(domain.get("y1", 0.5))
        nx, ny = (int(v) for v in data.get("grid", [64, 64]))
        edges = data.get("edges", {"kind": "constant", "value": 0.0})
        kind = edges.get("kind", "constant")
        name = data.get("name", kind)

        if kind == "constant":
            value = float(edges.get("value", 0.0))
            return cls.from_function(lambda xs, ys: np.full_like(xs, value), X, y0, y1, nx, ny, name)
        if kind == "tall_c1":
            return cls.from_function(tall_c1_solution, X, y0, y1, nx, ny, name)
        if kind == "bump":
            center = float(edges.get("center", 0.5 * (y0 + y1)))
            width = float(edges.get("width", 0.25 * (y1 - y0)))
            amplitude = float(edges.get("amplitude", 1.0))
            zeros_x = np.zeros(nx)
            return cls(X=X, y0=y0, y1=y1, nx=nx, ny=ny,
                       ideal=bump(np.linspace(y0, y1, ny), center, width, amplitude),
                       far=np.zeros(ny), bottom=zeros_x, top=zeros_x.copy(), name=name)
        if kind == "arrays":
            return cls(X=X, y0=y0, y1=y1, nx=nx, ny=ny,
                       ideal=edges["ideal"], far=edges["far"],
                       bottom=edges["bottom"], top=edges["top"], name=name)
        raise InvalidParams(f"type de données de bord inconnu: {kind}")

    def shifted(self, constant: float) -> "DirichletProblem":
        return DirichletProblem(self.X, self.y0, self.y1, self.nx, self.ny,
                                self.ideal + constant, self.far + constant,
                                self.bottom + constant, self.top + constant, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "domain": {"X": self.X, "y0": self.y0, "y1": self.y1},
            "grid": [self.nx, self.ny],
            "edges": {"kind": "arrays", "ideal": self.ideal, "far": self.far,
                      "bottom": self.bottom, "top": self.top},
        }


@dataclass
class SolveResult:
    solution: GraphFunction
    iterations: int
    final_residual: float
    converged: bool
    history: List[Dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "converged": self.converged,
            "history": self.history,
        }


# ---------------------------------------------------------------------------
# Opérateur discret et jacobienne
# ---------------------------------------------------------------------------

def _with_boundary(p: DirichletProblem, interior: np.ndarray) -> np.ndarray:
    U = np.empty((p.nx, p.ny))
    U[0, :] = p.ideal
    U[-1, :] = p.far
    U[:, 0] = p.bottom
    U[:, -1] = p.top
    U[1:-1, 1:-1] = interior
    return U


def _derivatives(U: np.ndarray, hx: float, hy: float):
    ux = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * hx)
    uy = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * hy)
    uxx = (U[2:, 1:-1] - 2.0 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / hx ** 2
    uyy = (U[1:-1, 2:] - 2.0 * U[1:-1, 1:-1] + U[1:-1, :-2]) / hy ** 2
    uxy = (U[2:, 2:] - U[2:, :-2] - U[:-2, 2:] + U[:-2, :-2]) / (4.0 * hx * hy)
    return ux, uy, uxx, uyy, uxy


def discrete_residual(p: DirichletProblem, U: np.ndarray) -> np.ndarray:
    X = p.x[1:-1, None]
    return vertical_operator(X, *_derivatives(U, p.hx, p.hy))


def _jacobian(p: DirichletProblem, U: np.ndarray):
    """Jacobienne creuse du résidu par rapport aux inconnues intérieures"""
    hx, hy = p.hx, p.hy
    mx, my = p.nx - 2, p.ny - 2
    x = p.x[1:-1, None]
    x2 = x * x
    ux, uy, uxx, uyy, uxy = _derivatives(U, hx, hy)

    A = 1.0 + x2 * uy ** 2
    B = 1.0 + x2 * ux ** 2
    Cxy = -2.0 * x2 * ux * uy
    Px = 2.0 * x2 * ux * uyy - 2.0 * x2 * uy * uxy - x * (3.0 * ux ** 2 + uy ** 2)
    Py = 2.0 * x2 * uy * uxx - 2.0 * x2 * ux * uxy - 2.0 * x * ux * uy
    Px = np.broadcast_to(Px, (mx, my))
    A = np.broadcast_to(A, (mx, my))

    stencil = {
        (0, 0): -2.0 * A / hx ** 2 - 2.0 * B / hy ** 2,
        (1, 0): A / hx ** 2 + Px / (2.0 * hx),
        (-1, 0): A / hx ** 2 - Px / (2.0 * hx),
        (0, 1): B / hy ** 2 + Py / (2.0 * hy),
        (0, -1): B / hy ** 2 - Py / (2.0 * hy),
        (1, 1): Cxy / (4.0 * hx * hy),
        (-1, -1): Cxy / (4.0 * hx * hy),
        (1, -1): -Cxy / (4.0 * hx * hy),
        (-1, 1): -Cxy / (4.0 * hx * hy),
    }

    I, J = np.meshgrid(np.arange(mx), np.arange(my), indexing="ij")
    row = (I * my + J).ravel()
    rows, cols, vals = [], [], []
    for (di, dj), weight in stencil.items():
        ni, nj = I + di, J + dj
        # les voisins sur le bord sont des données, pas des inconnues
        inside = ((ni >= 0) & (ni < mx) & (nj >= 0) & (nj < my)).ravel()
        rows.append(row[inside])
        cols.append((ni * my + nj).ravel()[inside])
        vals.append(np.broadcast_to(weight, (mx, my)).ravel()[inside])
    n = mx * my
    return coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n)).tocsr()


def coons_patch(p: DirichletProblem) -> np.ndarray:
    """Interpolation transfinie bilinéaire des quatre arêtes"""
    s = (p.x / p.X)[:, None]
    r = ((p.y - p.y0) / (p.y1 - p.y0))[None, :]
    U = ((1.0 - s) * p.ideal[None, :] + s * p.far[None, :]
         + (1.0 - r) * p.bottom[:, None] + r * p.top[:, None]
         - ((1.0 - s) * (1.0 - r) * p.ideal[0] + s * (1.0 - r) * p.far[0]
            + (1.0 - s) * r * p.ideal[-1] + s * r * p.far[-1]))
    return U


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------

def _result(p: DirichletProblem, U, iterations, residual, converged, history) -> SolveResult:
    solution = GraphFunction(VERTICAL, p.x, p.y, U)
    return SolveResult(solution, iterations, residual, converged, history)


def solve(
    p: DirichletProblem,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    config: Optional[NewtonConfig] = None,
) -> SolveResult:
    """
    Newton amorti sur l'équation discrétisée ; lève NonConvergence (avec le
    meilleur itéré) si le résidu sup ne passe pas sous tol en max_iter pas.
    """
    config = config or NewtonConfig()
    tol = config.tol if tol is None else tol
    max_iter = config.max_iter if max_iter is None else max_iter
    if not (tol > 0):
        raise InvalidParams(f"tolérance invalide: {tol}")

    if config.initial == "coons":
        U = coons_patch(p)
    else:
        U = _with_boundary(p, np.zeros((p.nx - 2, p.ny - 2)))

    R = discrete_residual(p, U)
    sup, l2 = float(np.max(np.abs(R))), float(np.linalg.norm(R))
    history = [{"iteration": 0, "sup": sup, "l2": l2, "step": 0.0}]
    best = (sup, U.copy())
    if config.verbose:
        print(f"   [SOLVE] it 0: sup={sup:.3e} l2={l2:.3e}")

    for it in range(1, max_iter + 1):
        if sup < tol:
            return _result(p, U, it - 1, sup, True, history)

        J = _jacobian(p, U)
        delta = spsolve(J, -R.ravel())
        if not np.all(np.isfinite(delta)):
            raise NonConvergence(f"système linéaire singulier à l'itération {it}",
                                 best=_result(p, best[1], it, best[0], False, history))
        delta = delta.reshape(R.shape)

        step = 1.0
        while True:
            trial = U.copy()
            trial[1:-1, 1:-1] += step * delta
            R_trial = discrete_residual(p, trial)
            l2_trial = float(np.linalg.norm(R_trial))
            if np.isfinite(l2_trial) and l2_trial <= (1.0 - config.armijo * step) * l2:
                break
            if step * config.backtrack < config.min_step:
                break
            step *= config.backtrack

        if not np.isfinite(l2_trial):
            raise NonConvergence(f"itéré non fini à l'itération {it}",
                                 best=_result(p, best[1], it, best[0], False, history))

        U, R = trial, R_trial
        sup, l2 = float(np.max(np.abs(R))), l2_trial
        history.append({"iteration": it, "sup": sup, "l2": l2, "step": step})
        if sup < best[0]:
            best = (sup, U.copy())
        if config.verbose:
            print(f"   [SOLVE] it {it}: sup={sup:.3e} l2={l2:.3e} pas={step:g}")

    if sup < tol:
        return _result(p, U, max_iter, sup, True, history)
    raise NonConvergence(
        f"Newton non convergé en {max_iter} itérations (résidu {best[0]:.3e} >= {tol:g})",
        best=_result(p, best[1], max_iter, best[0], False, history),
    )


@dataclass
class BoundaryTrace:
    """Ligne x = 0 de la solution et première ligne intérieure"""
    y: np.ndarray
    ideal: np.ndarray
    first_interior: np.ndarray
    deviation: float

    def to_dict(self) -> dict:
        return {"y": self.y, "ideal": self.ideal, "first_interior": self.first_interior,
                "deviation": self.deviation}


def boundary_trace(r: SolveResult) -> BoundaryTrace:
    if not r.converged:
        raise NotConverged("trace du bord demandée sur une résolution non convergée")
    values = r.solution.values
    return BoundaryTrace(
        y=r.solution.c.copy(),
        ideal=values[0].copy(),
        first_interior=values[1].copy(),
        deviation=float(np.max(np.abs(values[1] - values[0]))),
    )


def newton_tail_constant(history: List[Dict[str, float]], threshold: float = 1e-3) -> float:
    """K observé dans r_{k+1} <= K r_k² une fois r_k < threshold (nan si aucun couple)"""
    residuals = [h["sup"] for h in history]
    ratios = [r1 / r0 ** 2 for r0, r1 in zip(residuals, residuals[1:]) if 0 < r0 < threshold and r1 > 0]
    return max(ratios) if ratios else math.nan
