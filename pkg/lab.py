#!/usr/bin/env python3
"""
Script principal du laboratoire de surfaces minimales dans H²×R

Usage:
    python lab.py <commande> [options]

Exemples:
    python lab.py family tall --C 0.5 --a 0 --res 64
    python lab.py family slice --t 2
    python lab.py table tall --values 0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9
    python lab.py solve --problem data/const5.json
    python lab.py classify --curve data/butterfly.json
    python lab.py trace diagonal --tau 2 --delta 1
    python lab.py trace --mesh output/family_diagonal/diagonal.obj --radius 60 --bins 90
    python lab.py accept
"""

import argparse
import os
import sys
from pathlib import Path

# Fix encodage Windows
if sys.platform == "win32":
    os.environ["PYTHONIOENCODING"] = "utf-8"
    sys.stdout.reconfigure(encoding='utf-8', errors='replace')

# Ajouter src au path
sys.path.insert(0, str(Path(__file__).parent / "src"))

import numpy as np

from minimal_lab.pipeline import FAMILY_KINDS, TABLE_KINDS, LabPipeline, RunConfig, write_error_diagnostic
from minimal_lab.plateau import NewtonConfig
from minimal_lab.utils import InvalidParams, LabError, load_json


FAMILY_PARAMS = ("C", "a", "t", "t0", "slope", "tau", "delta", "pitch")


def add_family_params(parser: argparse.ArgumentParser, optional: bool = False) -> None:
    parser.add_argument("kind", choices=FAMILY_KINDS, nargs="?" if optional else None, help="Famille de surfaces")
    parser.add_argument("--C", type=float, help="Paramètre C (tall, catenoid)")
    parser.add_argument("--a", type=float, help="Hauteur basse a (tall)")
    parser.add_argument("--t", type=float, help="Hauteur de la tranche (slice)")
    parser.add_argument("--t0", type=float, help="Hauteur du col (catenoid)")
    parser.add_argument("--slope", type=float, help="Pente (diagonal)")
    parser.add_argument("--tau", type=float, help="Longueur de translation (diagonal)")
    parser.add_argument("--delta", type=float, help="Décalage vertical (diagonal)")
    parser.add_argument("--pitch", type=float, help="Pas (helicoid)")


def family_params(args) -> dict:
    return {name: getattr(args, name) for name in FAMILY_PARAMS if getattr(args, name) is not None}


def parse_values(text: str) -> list:
    """'0.1,0.2' ou 'start:stop:count' (linéaire) ou 'log:start:stop:count'"""
    text = text.strip()
    if not text:
        return []
    try:
        if text.startswith("log:"):
            start, stop, count = text[4:].split(":")
            return [float(v) for v in np.geomspace(float(start), float(stop), int(count))]
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise InvalidParams(f"grille illisible '{text}': {e}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Laboratoire numérique des surfaces minimales de H²×R",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples:
  %(prog)s family tall --C 0.5 --res 64
  %(prog)s family catenoid --C 2
  %(prog)s table catenoid --values log:0.6:50:12
  %(prog)s solve --problem problem.json --tol 1e-8 --grid 128
  %(prog)s trace diagonal --tau 2 --delta 1 --orbit
  %(prog)s accept --only 1,3

Codes de sortie: 0 succès, 2 entrée invalide, 3 échec numérique.
Variable MINIMAL_LAB_THREADS : taille du pool pour les balayages.
        """
    )
    parser.add_argument("--output", "-o", default=None, help="Répertoire de sortie (défaut: output)")
    parser.add_argument("--config", "-c", default=None, help="Fichier JSON de configuration")
    parser.add_argument("--seed", type=int, default=None, help="Graine des tirages aléatoires")
    parser.add_argument("--threads", type=int, default=None, help="Taille du pool de calcul")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", help="Maillage, profil et résidu d'une famille explicite")
    add_family_params(p)
    p.add_argument("--res", type=int, default=None, help="Résolution du maillage (défaut: 64)")
    p.add_argument("--radius", type=float, default=None, help="Rayon du maillage (défaut: 120)")

    p = sub.add_parser("table", help="Table de grandeurs dérivées sur une grille de C")
    p.add_argument("kind", choices=TABLE_KINDS)
    p.add_argument("--values", required=True, help="Grille: '0.1,0.2', 'a:b:n' ou 'log:a:b:n'")

    p = sub.add_parser("solve", help="Problème de Dirichlet pour les graphes verticaux")
    p.add_argument("--problem", required=True, help="Fichier JSON du problème")
    p.add_argument("--tol", type=float, default=None, help="Tolérance de Newton (défaut: 1e-8)")
    p.add_argument("--max-iter", type=int, default=50, help="Itérations maximales (défaut: 50)")
    p.add_argument("--grid", type=int, default=None, help="Grille n×n (remplace celle du fichier)")
    p.add_argument("--initial", choices=["coons", "zero"], default="coons")
    p.add_argument("--verbose", "-v", action="store_true")

    p = sub.add_parser("classify", help="Verdict de remplissage ou type du bord géodésique")
    p.add_argument("--curve", required=True, help="Fichier JSON de la courbe")
    p.add_argument("--samples", type=int, default=None, help="Angles échantillonnés (défaut: 720)")
    p.add_argument("--safety", type=float, default=None, help="Facteur de sécurité papillon (défaut: 0.9)")

    p = sub.add_parser("trace", help="Intervalles de pentes du bord géodésique")
    add_family_params(p, optional=True)
    p.add_argument("--mesh", default=None, help="Maillage OBJ à relever à la place d'une famille")
    p.add_argument("--orbit", action="store_true", help="Pente de l'orbite de la translation (tau, delta)")
    p.add_argument("--escape-radius", type=float, default=None, help="Rayon d'échappement (défaut: 100)")
    p.add_argument("--bins", type=int, default=None, help="Nombre de cases angulaires (défaut: 360)")
    p.add_argument("--steps", type=int, default=None, help="Longueur de l'orbite (défaut: 40)")
    p.add_argument("--res", type=int, default=None)
    p.add_argument("--radius", type=float, default=None)

    p = sub.add_parser("accept", help="Critères d'acceptation")
    p.add_argument("--only", default=None, help="Critères à exécuter (ex: '1,3,7')")

    return parser


def make_config(args) -> RunConfig:
    """Fichier de configuration éventuel, puis options explicites"""
    overrides = {
        "command": args.command,
        "output_dir": args.output,
        "seed": args.seed,
        "threads": args.threads,
    }
    res = getattr(args, "res", None)
    if res is not None:
        overrides["resolution"] = (res, res)
    for key, attr in (("radius", "radius"), ("escape_radius", "escape_radius"), ("bins", "bins"),
                      ("steps", "steps"), ("angle_samples", "samples"), ("safety", "safety")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    # maillage existant : --radius est le rayon d'échappement
    if getattr(args, "mesh", None) and args.radius is not None and args.escape_radius is None:
        overrides["escape_radius"] = args.radius
    if args.config:
        return RunConfig.load(args.config, **overrides)
    return RunConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def run(args) -> int:
    config = make_config(args)
    pipeline = LabPipeline(config)

    if args.command == "family":
        pipeline.run_family(args.kind, family_params(args))
        return 0

    if args.command == "table":
        values = parse_values(args.values)
        if not values:
            raise InvalidParams("grille de paramètres vide")
        pipeline.run_table(args.kind, values)
        return 0

    if args.command == "solve":
        problem = load_json(args.problem)
        problem.setdefault("name", Path(args.problem).stem)
        if args.grid is not None:
            problem["grid"] = [args.grid, args.grid]
        newton = NewtonConfig(tol=args.tol if args.tol is not None else config.tolerances.newton,
                              max_iter=args.max_iter, initial=args.initial, verbose=args.verbose)
        pipeline.run_solve(problem, newton)
        return 0

    if args.command == "classify":
        pipeline.run_classify(args.curve)
        return 0

    if args.command == "trace":
        if args.mesh:
            if args.kind or args.orbit:
                raise InvalidParams("--mesh exclut une famille et --orbit")
            pipeline.run_trace_mesh(args.mesh)
        elif args.kind:
            pipeline.run_trace(args.kind, family_params(args), orbit=args.orbit)
        else:
            raise InvalidParams("famille ou --mesh requis")
        return 0

    only = [int(v) for v in args.only.split(",")] if args.only else None
    result = pipeline.run_accept(only)
    return 0 if result.data.get("all_passed") else 3


def error_output_dir(args) -> str:
    """Répertoire du diagnostic : celui de la configuration si elle se lit"""
    try:
        return make_config(args).output_dir
    except (LabError, OSError, ValueError):
        return args.output or "output"


def main():
    parser = build_parser()
    args = parser.parse_args()

    try:
        code = run(args)
    except LabError as e:
        print(f"[ERREUR] {type(e).__name__}: {e}")
        output_dir = error_output_dir(args)
        path = write_error_diagnostic(e, output_dir)
        print(f"   diagnostic: {path}")
        sys.exit(e.exit_code)
    sys.exit(code)


if __name__ == "__main__":
    main()
