"""
Utilitaires communs du laboratoire

Erreurs, tolérances, conversion JSON, sorties fichiers et manifeste d'exécution.
"""

import json
import math
import platform
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd


# ---------------------------------------------------------------------------
# Erreurs
# ---------------------------------------------------------------------------

class LabError(Exception):
    """Erreur de base du laboratoire"""
    exit_code = 1


class ValidationError(LabError):
    """Entrée invalide (code de sortie 2)"""
    exit_code = 2


class NumericalError(LabError):
    """Échec numérique (code de sortie 3)"""
    exit_code = 3


class DomainError(ValidationError):
    pass


class CoincidentPoints(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class ResolutionTooLow(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class WindowOutOfRange(ValidationError):
    pass


class IllPosedData(ValidationError):
    pass


class CurveTouchesCaps(ValidationError):
    pass


class MeshTooSmall(ValidationError):
    pass


class DegenerateGenerator(ValidationError):
    pass


class SampleTooShort(ValidationError):
    pass


class MalformedCurve(ValidationError):
    pass


class QuadratureFailure(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class NonConvergence(NumericalError):
    """Newton n'a pas convergé ; `best` contient le meilleur itéré"""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


# ---------------------------------------------------------------------------
# Tolérances
# ---------------------------------------------------------------------------

@dataclass
class Tolerances:
    """Tolérances numériques par défaut"""
    # Géométrie exacte
    geometry: float = 1e-10
    det: float = 1e-12

    # Quadrature adaptative
    quadrature: float = 1e-8

    # Newton
    newton: float = 1e-8

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "det": self.det,
            "quadrature": self.quadrature,
            "newton": self.newton,
        }


DEFAULT_TOLERANCES = Tolerances()


# ---------------------------------------------------------------------------
# Sérialisation
# ---------------------------------------------------------------------------

def encode_real(value: float) -> Union[float, str]:
    """Encode un réel étendu (sentinelles "inf" / "-inf")"""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def decode_real(value: Union[float, int, str]) -> float:
    """Inverse de encode_real"""
    if isinstance(value, str):
        if value in ("inf", "+inf"):
            return math.inf
        if value == "-inf":
            return -math.inf
        return float(value)
    return float(value)


def convert_types(obj: Any) -> Any:
    """Convertit les types numpy en types Python natifs (infinis -> sentinelles)"""
    if isinstance(obj, dict):
        return {k: convert_types(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [convert_types(item) for item in obj]
    elif isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, (float, np.floating)):
        return encode_real(obj)
    elif isinstance(obj, np.ndarray):
        return convert_types(obj.tolist())
    return obj


def save_json(data: Any, path: Union[str, Path]) -> Path:
    """Sauvegarde un objet (dict ou objet avec to_dict) en JSON"""
    path = Path(path)
    if hasattr(data, "to_dict"):
        data = data.to_dict()
    with open(path, "w", encoding="utf-8") as f:
        json.dump(convert_types(data), f, ensure_ascii=False, indent=2)
    return path


def load_json(path: Union[str, Path]) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_csv(rows: Union[pd.DataFrame, List[dict]], path: Union[str, Path]) -> Path:
    """Exporte des lignes en CSV via pandas"""
    path = Path(path)
    df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
    df.to_csv(path, index=False)
    return path


def ensure_output_dir(base_dir: Union[str, Path], run_name: Optional[str] = None) -> Path:
    """Crée et retourne le répertoire de sortie d'une commande"""
    output_dir = Path(base_dir)
    if run_name:
        output_dir = output_dir / run_name
    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir


# ---------------------------------------------------------------------------
# Manifeste d'exécution
# ---------------------------------------------------------------------------

def build_manifest(
    command: str,
    arguments: Dict[str, Any],
    config: Optional[dict] = None,
    outputs: Optional[List[Union[str, Path]]] = None,
) -> dict:
    """Décrit une exécution : entrées, versions, tolérances, fichiers produits"""
    import scipy
    from . import __version__

    return {
        "command": command,
        "arguments": arguments,
        "config": config or {},
        "versions": {
            "minimal_lab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
        },
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in (outputs or [])],
    }


def write_manifest(output_dir: Union[str, Path], manifest: dict) -> Path:
    return save_json(manifest, Path(output_dir) / "manifest.json")
