"""
Pipeline principal du laboratoire

Chaque commande (family, table, solve, classify, trace, accept) passe par
LabPipeline : construction des objets, calcul, écriture des fichiers et du
manifeste d'exécution dans le répertoire de sortie.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tabulate import tabulate

from .boundary import assess_fillability, check_tall, classify_geodesic_curve, detect_thin_tail, oscillation_check
from .curves import GeodesicBoundarySet, PiecewiseBoundaryCurve
from .families import (
    ButterflyParams,
    ButterflyWitness,
    Catenoid,
    HorizontalSlice,
    RuledSurface,
    TallRectangle,
    VerticalFlat,
    butterfly_curve,
    butterfly_feasibility,
    catenoid_profile,
    tall_height_closed_form,
    tall_profile,
)
from .hyperbolic import INFINITY, GeodesicH2, IdealPoint, Isometry
from .mesh import build_mesh, mesh_residual, read_obj, save_mesh_csv, write_obj
from .plateau import DirichletProblem, NewtonConfig, boundary_trace, solve
from .tracing import TraceConfig, orbit_slope_sample, trace_surface_boundary
from .utils import (
    LabError,
    InvalidParams,
    NonConvergence,
    Tolerances,
    build_manifest,
    ensure_output_dir,
    load_json,
    save_csv,
    save_json,
    write_manifest,
)


FAMILY_KINDS = ("slice", "flat", "tall", "catenoid", "diagonal", "helicoid")
TABLE_KINDS = ("tall", "catenoid")
COMMANDS = ("family", "table", "solve", "classify", "trace", "accept")


def env_threads() -> int:
    """Taille du pool de calcul (MINIMAL_LAB_THREADS, défaut 1)"""
    try:
        return max(1, int(os.environ.get("MINIMAL_LAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    """Configuration d'une exécution (fichier JSON optionnel, options CLI prioritaires)"""
    command: str = "family"
    inputs: List[str] = field(default_factory=list)
    output_dir: str = "output"

    # Tolérances
    tolerances: Tolerances = field(default_factory=Tolerances)

    # Maillages et grilles
    resolution: Tuple[int, int] = (64, 64)
    radius: float = 120.0
    grid: int = 129

    # Tracé du bord
    escape_radius: float = 100.0
    bins: int = 360
    steps: int = 40

    # Analyse des courbes
    safety: float = 0.9
    angle_samples: int = 720

    # Reproductibilité
    seed: int = 0
    threads: int = field(default_factory=env_threads)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidParams(f"commande inconnue: {self.command}")
        if isinstance(self.tolerances, dict):
            self.tolerances = Tolerances(**self.tolerances)
        for name, value in self.tolerances.to_dict().items():
            if not (value > 0):
                raise InvalidParams(f"tolérance {name} doit être > 0, reçu {value}")
        self.resolution = tuple(int(v) for v in self.resolution)
        if not (0.0 < self.safety <= 1.0):
            raise InvalidParams(f"facteur de sécurité hors de (0, 1]: {self.safety}")
        if self.threads < 1:
            raise InvalidParams(f"nombre de threads invalide: {self.threads}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    @classmethod
    def load(cls, path: Union[str, Path], **overrides) -> "RunConfig":
        """Charge un fichier JSON puis applique les options non nulles"""
        data = load_json(path)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": list(self.inputs),
            "output_dir": self.output_dir,
            "tolerances": self.tolerances.to_dict(),
            "resolution": list(self.resolution),
            "radius": self.radius,
            "grid": self.grid,
            "escape_radius": self.escape_radius,
            "bins": self.bins,
            "steps": self.steps,
            "safety": self.safety,
            "angle_samples": self.angle_samples,
            "seed": self.seed,
            "threads": self.threads,
        }


def make_family(kind: str, params: Optional[Dict[str, Any]] = None, tol: float = 1e-8):
    """
    Construit une famille à partir de paramètres nommés.

    slice: t ; flat: (aucun) ; tall: C, a ; catenoid: C, t0 ;
    diagonal: slope ou (tau, delta) ; helicoid: pitch.
    """
    params = dict(params or {})
    if kind == "slice":
        return HorizontalSlice(t=float(params.get("t", 0.0)))
    if kind == "flat":
        return VerticalFlat()
    if kind == "tall":
        C = float(params.get("C", 0.5))
        a = float(params.get("a", 0.0))
        profile = tall_profile(C, tol=tol)
        if C == 1.0:
            return TallRectangle(profile, a=a, b=math.inf)
        return TallRectangle.with_height(profile, a=a)
    if kind == "catenoid":
        return Catenoid(catenoid_profile(float(params.get("C", 1.0)), tol=tol),
                        t0=float(params.get("t0", 0.0)))
    if kind == "diagonal":
        if "tau" in params or "delta" in params:
            tau = float(params.get("tau", 1.0))
            if not (tau > 0):
                raise InvalidParams(f"tau doit être > 0, reçu {tau}")
            slope = float(params.get("delta", 0.0)) / tau
        else:
            slope = float(params.get("slope", 0.5))
        return RuledSurface(kind="diagonal", slope=slope)
    if kind == "helicoid":
        return RuledSurface(kind="helicoid", pitch=float(params.get("pitch", 1.0)))
    raise InvalidParams(f"famille inconnue: {kind} (attendu: {', '.join(FAMILY_KINDS)})")


def _family_summary(family) -> Dict[str, Any]:
    """Grandeurs dérivées affichées après la génération d'une famille"""
    if isinstance(family, TallRectangle):
        ell = family.profile.height
        return {"C": family.profile.C, "ell": ell, "ell > pi": ell > math.pi,
                "rho_min": family.profile.rho_min}
    if isinstance(family, Catenoid):
        p = family.profile
        return {"C": p.C, "r_neck": p.r_neck, "2b": p.height, "2b < pi": p.height < math.pi,
                "disk_diameter": p.disk_diameter}
    return {}


# ---------------------------------------------------------------------------
# Résultats
# ---------------------------------------------------------------------------

@dataclass
class CommandResult:
    """Résultat générique d'une commande : données, fichiers écrits, erreurs par élément"""
    command: str
    data: Dict[str, Any] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "data": self.data,
            "outputs": self.outputs,
            "errors": self.errors,
            "elapsed": self.elapsed,
        }


@dataclass
class TableResult:
    family: str
    rows: List[dict] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    @property
    def all_pass(self) -> bool:
        return bool(self.rows) and not self.errors and all(r["threshold_ok"] for r in self.rows)


def table_row(kind: str, C: float, tol: float) -> dict:
    """Une ligne de table : paramètre C et grandeurs dérivées, seuil π inclus"""
    if kind == "tall":
        profile = tall_profile(C, tol=tol)
        ell = profile.height
        return {
            "C": C,
            "ell": ell,
            "ell_closed_form": tall_height_closed_form(C),
            "s_min": profile.s_min,
            "threshold": "ell > pi",
            "threshold_ok": bool(ell > math.pi),
        }
    if kind == "catenoid":
        profile = catenoid_profile(C, tol=tol)
        return {
            "C": C,
            "r_neck": profile.r_neck,
            "height": profile.height,
            "disk_diameter": profile.disk_diameter,
            "threshold": "2b < pi",
            "threshold_ok": bool(profile.height < math.pi),
        }
    raise InvalidParams(f"table inconnue: {kind} (attendu: {', '.join(TABLE_KINDS)})")


def parameter_table(
    kind: str,
    values: Sequence[float],
    tol: float = 1e-8,
    threads: int = 1,
) -> TableResult:
    """Balayage d'une grille de paramètres ; les échecs sont consignés ligne par ligne"""
    values = [float(v) for v in values]
    if not values:
        raise InvalidParams("grille de paramètres vide")
    if kind not in TABLE_KINDS:
        raise InvalidParams(f"table inconnue: {kind} (attendu: {', '.join(TABLE_KINDS)})")

    def work(C: float):
        try:
            return table_row(kind, C, tol), None
        except LabError as e:
            return None, f"C={C:g}: {type(e).__name__}: {e}"

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        outcomes = list(pool.map(work, values))

    result = TableResult(family=kind)
    for row, error in outcomes:
        if row is not None:
            result.rows.append(row)
        if error is not None:
            result.errors.append(error)
    result.rows.sort(key=lambda r: r["C"])
    return result


def load_curve(data: dict):
    """
    Lit une courbe de bord : produit ({"segments": ...}), géodésique
    ({"equator_arcs" | "chamber_intervals" | "poles": ...}) ou papillon
    ({"kind": "butterfly", "ell", "q", ...}).
    """
    if data.get("kind") == "butterfly":
        return data
    if "segments" in data:
        return PiecewiseBoundaryCurve.from_dict(data)
    if any(k in data for k in ("equator_arcs", "chamber_intervals", "poles", "equator_full")):
        return GeodesicBoundarySet.from_dict(data)
    raise InvalidParams("courbe non reconnue (segments, bord géodésique ou papillon attendus)")


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class LabPipeline:
    """
    Exécute les commandes du laboratoire

    Gère :
    1. La construction des familles, problèmes et courbes
    2. Le calcul (maillage, résidu, Newton, classification, tracé)
    3. L'export (OBJ, CSV, JSON) et le manifeste d'exécution
    """

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    # utilitaires ---------------------------------------------------------

    def _output_dir(self, name: str) -> Path:
        return ensure_output_dir(self.config.output_dir, name)

    def _finish(self, result: CommandResult, arguments: dict, output_dir: Path, start: float) -> CommandResult:
        result.elapsed = time.time() - start
        summary = save_json(result, output_dir / "result.json")
        result.outputs.append(str(summary))
        manifest = build_manifest(result.command, arguments, self.config.to_dict(), result.outputs)
        write_manifest(output_dir, manifest)
        print(f"\n   [SAVE] {output_dir}")
        for path in result.outputs:
            print(f"      - {Path(path).name}")
        for error in result.errors:
            print(f"   [ERREUR] {error}")
        print(f"[OK] {result.command} terminé en {result.elapsed:.1f}s")
        return result

    # family --------------------------------------------------------------

    def run_family(self, kind: str, params: Optional[dict] = None) -> CommandResult:
        """Maillage OBJ + CSV, profil JSON et résidu de l'équation des graphes minimaux"""
        start = time.time()
        params = params or {}
        print(f"[FAMILLE] {kind} {params}")
        family = make_family(kind, params, self.config.tolerances.quadrature)
        summary = _family_summary(family)
        for key, value in summary.items():
            print(f"   {key}: {value}")

        mesh = build_mesh(family, self.config.resolution, self.config.radius)
        print(f"   maillage: {len(mesh.vertices)} sommets, {len(mesh.triangles)} triangles")
        report = mesh_residual(family, (self.config.grid, self.config.grid))
        print(f"   résidu: sup={report.sup_norm:.3e} l2={report.l2_norm:.3e}")

        output_dir = self._output_dir(f"family_{kind}")
        result = CommandResult("family", data={
            "family": family.to_dict(),
            "summary": summary,
            "residual": report.to_dict(),
            "vertices": len(mesh.vertices),
            "triangles": len(mesh.triangles),
        })
        result.outputs.append(str(write_obj(mesh, output_dir / f"{kind}.obj")))
        result.outputs.extend(str(p) for p in save_mesh_csv(mesh, output_dir, kind))
        result.outputs.append(str(save_json(family, output_dir / "profile.json")))
        result.outputs.append(str(report.save_csv(output_dir / "residual.csv")))
        return self._finish(result, {"kind": kind, "params": params}, output_dir, start)

    # table ---------------------------------------------------------------

    def run_table(self, kind: str, values: Sequence[float]) -> CommandResult:
        """CSV déterministe (paramètre, grandeurs dérivées, colonne de seuil π)"""
        start = time.time()
        print(f"[TABLE] {kind}: {len(values)} valeur(s), {self.config.threads} thread(s)")
        table = parameter_table(kind, values, self.config.tolerances.quadrature, self.config.threads)
        frame = table.to_frame()
        if not frame.empty:
            print(tabulate(frame, headers="keys", tablefmt="github", showindex=False, floatfmt=".10g"))

        output_dir = self._output_dir(f"table_{kind}")
        result = CommandResult("table", data={"family": kind, "rows": len(table.rows),
                                              "all_pass": table.all_pass},
                               errors=list(table.errors))
        result.outputs.append(str(save_csv(frame, output_dir / f"{kind}_table.csv")))
        return self._finish(result, {"kind": kind, "values": list(values)}, output_dir, start)

    # solve ---------------------------------------------------------------

    def run_solve(self, problem: Union[str, Path, dict, DirichletProblem],
                  newton: Optional[NewtonConfig] = None) -> CommandResult:
        """Newton sur le problème de Dirichlet ; solution et historique en CSV"""
        start = time.time()
        if isinstance(problem, (str, Path)):
            problem = load_json(problem)
        if isinstance(problem, dict):
            problem = DirichletProblem.from_dict(problem)
        newton = newton or NewtonConfig(tol=self.config.tolerances.newton)
        print(f"[SOLVE] {problem.name}: grille {problem.nx}×{problem.ny}, X={problem.X}")

        output_dir = self._output_dir(f"solve_{problem.name}")
        try:
            solution = solve(problem, config=newton)
        except NonConvergence as e:
            if e.best is not None:
                save_csv(e.best.solution.values, output_dir / "best_iterate.csv")
                save_csv(e.best.history, output_dir / "history.csv")
            raise

        trace = boundary_trace(solution)
        print(f"   {solution.iterations} itération(s), résidu {solution.final_residual:.3e}")
        print(f"   écart trace/donnée au bord: {trace.deviation:.3e}")
        result = CommandResult("solve", data={
            "problem": problem.name,
            "iterations": solution.iterations,
            "final_residual": solution.final_residual,
            "converged": solution.converged,
            "trace_deviation": trace.deviation,
            "range": [float(np.min(solution.solution.values)), float(np.max(solution.solution.values))],
        })
        result.outputs.append(str(save_csv(pd.DataFrame(solution.solution.values), output_dir / "solution.csv")))
        result.outputs.append(str(save_csv(solution.history, output_dir / "history.csv")))
        return self._finish(result, {"problem": problem.name, "newton": newton.to_dict()}, output_dir, start)

    # classify ------------------------------------------------------------

    def _classify_butterfly(self, data: dict) -> Dict[str, Any]:
        q = tuple(IdealPoint.from_dict(v) for v in data["q"])
        ell = float(data["ell"])
        witness = butterfly_feasibility(ell, q, safety=float(data.get("safety", self.config.safety)),
                                        tol=self.config.tolerances.quadrature)
        out: Dict[str, Any] = {"kind": "butterfly", "feasibility": witness.to_dict()}
        if isinstance(witness, ButterflyWitness):
            a = float(data.get("a", 0.0))
            b = float(data.get("b", a + 0.5 * (witness.L - ell)))
            params = ButterflyParams(ell=ell, L=witness.L, a=a, b=b, q=q)
            sigma = butterfly_curve(params)
            verdict = assess_fillability(sigma, self.config.angle_samples)
            out.update({"params": params.to_dict(), "verdict": verdict.to_dict(),
                        "status": verdict.status})
            print(f"   L = {witness.L:.6g} > π, 2r(L) = {2 * witness.rho_min:.6g} < marge {witness.margin:.6g}")
        else:
            out["status"] = witness.kind
            print(f"   infaisable: {witness.reason}")
        return out

    def _classify_curve(self, sigma: PiecewiseBoundaryCurve) -> Dict[str, Any]:
        verdict = assess_fillability(sigma, self.config.angle_samples)
        out: Dict[str, Any] = {"kind": "curve", "simple": sigma.is_simple(),
                               "verdict": verdict.to_dict(), "status": verdict.status}
        if sigma.on_cylinder:
            out["tallness"] = check_tall(sigma, self.config.angle_samples).to_dict()
        tail = detect_thin_tail(sigma)
        out["thin_tail"] = tail.to_dict() if tail is not None else None
        for note in verdict.notes:
            print(f"   {note}")
        return out

    def run_classify(self, curve: Union[str, Path, dict]) -> CommandResult:
        """Verdict de remplissage (courbe produit) ou type 1–4 (bord géodésique)"""
        start = time.time()
        name = Path(curve).stem if isinstance(curve, (str, Path)) else "curve"
        data = load_json(curve) if isinstance(curve, (str, Path)) else curve
        loaded = load_curve(data)
        print(f"[CLASSIFY] {name}")

        if isinstance(loaded, dict):
            out = self._classify_butterfly(loaded)
        elif isinstance(loaded, PiecewiseBoundaryCurve):
            out = self._classify_curve(loaded)
        else:
            classification = classify_geodesic_curve(loaded)
            oscillation = oscillation_check(loaded)
            out = {"kind": "geodesic", "classification": classification.to_dict(),
                   "oscillation": oscillation.to_dict(), "status": classification.status}
            if classification.rule:
                print(f"   règle: {classification.rule}")
        print(f"   statut: {out['status']}")

        output_dir = self._output_dir(f"classify_{name}")
        result = CommandResult("classify", data=out)
        return self._finish(result, {"curve": name}, output_dir, start)

    # trace ---------------------------------------------------------------

    def run_trace(self, kind: str, params: Optional[dict] = None, orbit: bool = False) -> CommandResult:
        """Intervalles de pentes par chambre lus sur le maillage, ou pente d'une orbite"""
        start = time.time()
        params = params or {}
        print(f"[TRACE] {kind} {params}")
        output_dir = self._output_dir(f"trace_{kind}")

        if orbit:
            tau = float(params.get("tau", 1.0))
            delta = float(params.get("delta", 0.0))
            generator = Isometry.translation_along(GeodesicH2((IdealPoint(0.0), INFINITY)), tau, shift=delta)
            sample = orbit_slope_sample(generator, steps=self.config.steps)
            print(f"   τ={sample.tau:.6g} δ={sample.delta:.6g} limite: {sample.limit.to_dict()}")
            result = CommandResult("trace", data={"orbit": sample.to_dict()})
            return self._finish(result, {"kind": kind, "params": params, "orbit": True}, output_dir, start)

        family = make_family(kind, params, self.config.tolerances.quadrature)
        mesh = build_mesh(family, self.config.resolution, self.config.radius)
        return self._trace_mesh(mesh, {"kind": kind, "params": params}, output_dir, start)

    def run_trace_mesh(self, path: Union[str, Path]) -> CommandResult:
        """Intervalles de pentes lus sur un maillage OBJ existant"""
        start = time.time()
        path = Path(path)
        if not path.is_file():
            raise InvalidParams(f"maillage introuvable: {path}")
        print(f"[TRACE] {path}")
        mesh = read_obj(path)
        output_dir = self._output_dir(f"trace_{path.stem}")
        return self._trace_mesh(mesh, {"mesh": str(path)}, output_dir, start)

    def _trace_mesh(self, mesh, meta: dict, output_dir: Path, start: float) -> CommandResult:
        trace = trace_surface_boundary(mesh, config=TraceConfig(escape_radius=self.config.escape_radius,
                                                                bins=self.config.bins))
        oscillation = oscillation_check(trace.boundary)
        print(f"   {trace.far_vertices} sommets lointains, couverture {trace.coverage:.3f}")
        print(tabulate([trace.product_summary], headers="keys", tablefmt="github"))
        if not trace.slope_table.empty:
            print(tabulate(trace.slope_table, headers="keys", tablefmt="github", showindex=False))
        print(f"   oscillation: {'OK' if oscillation.passed else 'violée'}")

        result = CommandResult("trace", data={"trace": trace.to_dict(),
                                              "oscillation": oscillation.to_dict()})
        result.outputs.append(str(save_csv(trace.slope_table, output_dir / "chambers.csv")))
        return self._finish(result, meta, output_dir, start)

    # accept --------------------------------------------------------------

    def run_accept(self, only: Optional[Sequence[int]] = None) -> CommandResult:
        """Critères d'acceptation ; succès ssi tous passent"""
        from .acceptance import run_acceptance

        start = time.time()
        print("[ACCEPT] critères d'acceptation")
        report = run_acceptance(only=only, threads=self.config.threads, seed=self.config.seed)
        frame = report.to_frame()
        print(tabulate(frame, headers="keys", tablefmt="github", showindex=False))

        output_dir = self._output_dir("accept")
        result = CommandResult("accept", data=report.to_dict(), errors=list(report.errors))
        result.outputs.append(str(save_csv(frame, output_dir / "acceptance.csv")))
        return self._finish(result, {"only": list(only) if only else None}, output_dir, start)


def write_error_diagnostic(error: LabError, output_dir: Union[str, Path]) -> Path:
    """Diagnostic JSON {error, message, exit_code} d'une commande interrompue"""
    output_dir = ensure_output_dir(output_dir)
    return save_json({
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": error.exit_code,
    }, output_dir / "error.json")
