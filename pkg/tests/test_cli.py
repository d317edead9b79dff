"""
Tests de l'interface en ligne de commande (lab.py) : grilles, configuration
et codes de sortie.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).parent.parent))

import lab
from minimal_lab.families import RuledSurface
from minimal_lab.mesh import build_mesh, write_obj
from minimal_lab.utils import InvalidParams, load_json, save_json


def run_main(monkeypatch, *argv) -> int:
    monkeypatch.setattr(sys, "argv", ["lab.py", *argv])
    with pytest.raises(SystemExit) as info:
        lab.main()
    return info.value.code


class TestParseValues:
    """Grilles de paramètres"""

    def test_list(self):
        assert lab.parse_values("0.1, 0.2,0.3") == [0.1, 0.2, 0.3]

    def test_linear(self):
        assert lab.parse_values("0:1:5") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])

    def test_log(self):
        assert lab.parse_values("log:1:100:3") == pytest.approx([1.0, 10.0, 100.0])

    def test_empty_and_invalid(self):
        assert lab.parse_values("  ") == []
        with pytest.raises(InvalidParams):
            lab.parse_values("0.1,abc")


class TestConfig:
    """Options et fichier de configuration"""

    def test_options_override_file(self, tmp_path):
        config_path = save_json({"radius": 40.0, "bins": 90}, tmp_path / "config.json")
        args = lab.build_parser().parse_args(
            ["--config", str(config_path), "--output", str(tmp_path), "trace", "diagonal", "--bins", "180"])
        config = lab.make_config(args)
        assert config.radius == 40.0
        assert config.bins == 180
        assert config.output_dir == str(tmp_path)
        assert config.command == "trace"

    def test_family_params(self):
        args = lab.build_parser().parse_args(["family", "tall", "--C", "0.5", "--res", "16"])
        assert lab.family_params(args) == {"C": 0.5}
        assert lab.make_config(args).resolution == (16, 16)


class TestExitCodes:
    """0 succès, 2 entrée invalide, 3 échec numérique"""

    def test_success(self, monkeypatch, tmp_path):
        code = run_main(monkeypatch, "--output", str(tmp_path), "table", "tall", "--values", "0.2,0.4")
        assert code == 0
        assert (tmp_path / "table_tall" / "tall_table.csv").exists()

    def test_invalid_input(self, monkeypatch, tmp_path):
        code = run_main(monkeypatch, "--output", str(tmp_path), "family", "slice", "--res", "4")
        assert code == 2
        assert load_json(tmp_path / "error.json")["error"] == "ResolutionTooLow"

    def test_empty_grid(self, monkeypatch, tmp_path):
        assert run_main(monkeypatch, "--output", str(tmp_path), "table", "tall", "--values", " ") == 2

    def test_non_convergence(self, monkeypatch, tmp_path):
        problem = save_json({"grid": [16, 16],
                             "edges": {"kind": "bump", "center": 0.0, "width": 0.25, "amplitude": 1.0}},
                            tmp_path / "bump.json")
        code = run_main(monkeypatch, "--output", str(tmp_path), "solve", "--problem", str(problem),
                        "--tol", "1e-30", "--max-iter", "1")
        assert code == 3
        assert load_json(tmp_path / "error.json")["exit_code"] == 3
        assert (tmp_path / "solve_bump" / "best_iterate.csv").exists()

    def test_unknown_criterion(self, monkeypatch, tmp_path):
        code = run_main(monkeypatch, "--output", str(tmp_path), "accept", "--only", "3,99")
        assert code == 3

    def test_diagnostic_in_configured_output_dir(self, monkeypatch, tmp_path):
        target = tmp_path / "from_config"
        config_path = save_json({"output_dir": str(target)}, tmp_path / "config.json")
        code = run_main(monkeypatch, "--config", str(config_path), "family", "slice", "--res", "4")
        assert code == 2
        assert load_json(target / "error.json")["error"] == "ResolutionTooLow"


class TestTraceMesh:
    """Relevé d'un maillage OBJ existant"""

    def test_trace_obj(self, monkeypatch, tmp_path):
        mesh = build_mesh(RuledSurface(kind="diagonal", slope=0.5), resolution=(41, 41), radius=120.0)
        path = write_obj(mesh, tmp_path / "diagonal.obj")
        code = run_main(monkeypatch, "--output", str(tmp_path), "trace", "--mesh", str(path),
                        "--radius", "80", "--bins", "90")
        assert code == 0
        manifest = load_json(tmp_path / "trace_diagonal" / "manifest.json")
        assert manifest["config"]["escape_radius"] == 80.0
        assert manifest["config"]["bins"] == 90
        assert (tmp_path / "trace_diagonal" / "chambers.csv").exists()

    def test_radius_is_escape_radius(self, tmp_path):
        args = lab.build_parser().parse_args(["trace", "--mesh", "surface.obj", "--radius", "50"])
        assert lab.make_config(args).escape_radius == 50.0

    def test_mesh_or_family_required(self, monkeypatch, tmp_path):
        assert run_main(monkeypatch, "--output", str(tmp_path), "trace") == 2
        code = run_main(monkeypatch, "--output", str(tmp_path), "trace", "diagonal", "--mesh", "surface.obj")
        assert code == 2

    def test_missing_obj(self, monkeypatch, tmp_path):
        code = run_main(monkeypatch, "--output", str(tmp_path), "trace", "--mesh", str(tmp_path / "absent.obj"))
        assert code == 2
        assert load_json(tmp_path / "error.json")["error"] == "InvalidParams"
