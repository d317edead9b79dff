"""
Minimal Lab - Laboratoire numérique des surfaces minimales de H²×R

Ce module fournit :
- la géométrie du demi-plan (isométries, géodésiques, points idéaux)
- les compactifications produit et géodésique de H²×R
- les familles explicites (rectangles hauts, caténoïdes, surfaces réglées)
- les résidus des équations des graphes minimaux et le solveur de Plateau
- l'analyse des courbes de bord (remplissage, hauteur, classification)
"""

__version__ = "1.0.0"

# Imports lazy : scipy n'est chargé qu'à la première utilisation
__all__ = [
    "LabPipeline",
    "RunConfig",
    "run_acceptance",
    "build_mesh",
    "solve",
    "DirichletProblem",
    "assess_fillability",
    "classify_geodesic_curve",
    "trace_surface_boundary",
    "orbit_slope_sample",
]


def __getattr__(name):
    """Import lazy des points d'entrée publics."""
    if name == "LabPipeline":
        from .pipeline import LabPipeline
        return LabPipeline
    if name == "RunConfig":
        from .pipeline import RunConfig
        return RunConfig
    if name == "run_acceptance":
        from .acceptance import run_acceptance
        return run_acceptance
    if name == "build_mesh":
        from .mesh import build_mesh
        return build_mesh
    if name in ("solve", "DirichletProblem"):
        from . import plateau
        return getattr(plateau, name)
    if name in ("assess_fillability", "classify_geodesic_curve"):
        from . import boundary
        return getattr(boundary, name)
    if name in ("trace_surface_boundary", "orbit_slope_sample"):
        from . import tracing
        return getattr(tracing, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
