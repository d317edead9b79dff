"""
Régénère les goldens de tests/goldens à partir des quadratures.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
SRC_DIR = ROOT_DIR / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from minimal_lab.families import catenoid_neck, tall_height

GOLDENS_DIR = ROOT_DIR / "tests" / "goldens"


def regenerate(name: str, key: str, compute) -> None:
    path = GOLDENS_DIR / f"{name}.json"
    golden = json.loads(path.read_text(encoding="utf-8"))
    old = golden.get(key, [])
    golden[key] = [float(compute(c)) for c in golden["C"]]
    path.write_text(json.dumps(golden, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    print(f"[SAVE] {path.name}")
    for c, before, after in zip(golden["C"], old, golden[key]):
        print(f"   C={c:g}: {before!r} -> {after!r}")


def main() -> None:
    regenerate("tall_heights", "ell", lambda c: tall_height(c, tol=1e-12))
    regenerate("catenoid_necks", "r_neck_squared", lambda c: catenoid_neck(c) ** 2)


if __name__ == "__main__":
    main()
