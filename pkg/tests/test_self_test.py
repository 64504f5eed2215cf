"""
Unit tests for the self-test suites.
"""
from datetime import datetime

import numpy as np
import pytest

from src.core.bipath_core import BipathPoset, IntervalKind
from src.utils.self_test import CheckResult, CheckStatus, SelfTestRunner, random_arc_code


class TestSelfTestRunner:
    """Test cases for SelfTestRunner."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = SelfTestRunner(seed=5, trials=3)

    def test_run_all_passes(self):
        """Test that every suite passes on a short run."""
        report = self.runner.run_all()

        assert report['overall_status'] == 'passed'
        assert report['seed'] == 5
        assert report['trials'] == 3
        assert [check['name'] for check in report['checks']] == [
            "Interval Round-Trip",
            "Plant And Recover",
            "Slice Geometry",
            "Restriction Images",
            "Distance Axioms",
            "Two-Row Example",
        ]
        assert report['summary']['total_checks'] == 6
        assert report['summary']['status_counts'] == {'passed': 6, 'failed': 0, 'error': 0}
        assert report['summary']['failed'] == []

    def test_trial_generators_reproducible(self):
        """Test that trial streams depend only on seed and salt."""
        first = [g.integers(0, 1000) for g in self.runner.trial_generators(1)]
        again = [g.integers(0, 1000) for g in SelfTestRunner(seed=5, trials=3).trial_generators(1)]
        other = [g.integers(0, 1000) for g in self.runner.trial_generators(2)]
        assert first == again
        assert len(first) == 3
        assert first != other

    def test_failing_check_is_reported(self, mocker):
        """Test that a failing check makes the report fail."""
        mocker.patch.object(SelfTestRunner, 'check_example', side_effect=RuntimeError("broken"))
        mocker.patch.object(SelfTestRunner, 'check_interval_round_trip', return_value=("ok", {}))
        mocker.patch.object(SelfTestRunner, 'check_restriction_images', return_value=("ok", {}))
        report = self.runner.run_all()

        assert report['overall_status'] == 'failed'
        example = report['checks'][-1]
        assert example['status'] == 'error'
        assert example['message'] == "RuntimeError: broken"
        assert report['summary']['failed'] == ["Two-Row Example"]

    def test_slice_geometry(self):
        """Test that the covering map preserves the order of ZZ on every small poset."""
        message, details = self.runner.check_slice_geometry()
        assert details == {'posets': 16}
        assert message == "16 posets checked over three periods"

    def test_slice_geometry_follows_zz_order(self, mocker):
        """Test that arrows are oriented by the order of ZZ."""
        mocker.patch('src.utils.self_test.zz_leq', return_value=False)
        with pytest.raises(Exception, match="reverses the arrow"):
            self.runner.check_slice_geometry()

    def test_example_details(self):
        """Test the details of the two-row example check."""
        message, details = self.runner.check_example()
        assert "separate" in message
        assert details['arc_code_plus'] != details['arc_code_minus']


class TestCheckResult:
    """Test cases for CheckResult."""

    def test_to_dict(self):
        """Test JSON-ready conversion."""
        stamp = datetime(2024, 1, 2, 3, 4, 5)
        result = CheckResult("Slice Geometry", CheckStatus.PASSED, "ok", {'posets': 16}, 0.12345, stamp)
        assert result.to_dict() == {
            'name': "Slice Geometry",
            'status': 'passed',
            'message': "ok",
            'details': {'posets': 16},
            'duration_seconds': 0.123,
            'timestamp': '2024-01-02T03:04:05',
        }


class TestRandomArcCode:
    """Test cases for random arc codes."""

    def test_size_and_full_exclusion(self):
        """Test the interval count bound and the allow_full switch."""
        poset = BipathPoset(3, 2)
        rng = np.random.default_rng(9)
        for _ in range(50):
            code = random_arc_code(poset, rng, 4, allow_full=False)
            assert code.total <= 4
            assert all(interval.kind is not IntervalKind.FULL for interval in code.elements())
