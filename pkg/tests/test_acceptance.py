"""
Tests des critères d'acceptation (un test par critère) et du rapport
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from minimal_lab.acceptance import CRITERIA, AcceptanceReport, run_acceptance, run_check


class TestCriteria:
    """Chaque critère passe"""

    @pytest.mark.parametrize("number", sorted(CRITERIA))
    def test_criterion(self, number):
        check = run_check(number)
        assert check.error == ""
        assert check.passed, check.details

    def test_seeded_criteria_other_seed(self):
        assert run_check(8, seed=7).passed


class TestReport:
    """Rapport d'acceptation"""

    def test_subset(self):
        report = run_acceptance(only=[3, 1], threads=2)
        assert [c.number for c in report.checks] == [1, 3]
        assert report.all_passed
        frame = report.to_frame()
        assert list(frame["statut"]) == ["OK", "OK"]

    def test_unknown_criterion_fails(self):
        report = run_acceptance(only=[3, 99])
        assert len(report.checks) == 1
        assert not report.all_passed
        assert "99" in report.errors[0]

    def test_empty_report(self):
        assert not AcceptanceReport().all_passed
