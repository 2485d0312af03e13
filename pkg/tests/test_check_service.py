import numpy as np
import pytest

from src.services.check_service import CheckResult


class TestCheckResult:
    def test_upper_bound(self):
        result = CheckResult.at_most('kato_identity', 1e-12, 1e-10)
        assert result.passed
        assert result.to_dict() == {
            'name': 'kato_identity', 'residual': 1e-12, 'tolerance': 1e-10, 'passed': True, 'comparison': '<=',
        }

    def test_lower_bound(self):
        result = CheckResult.at_least('non_comparability', 1e-9, 1e-8)
        assert not result.passed
        assert result.comparison == '>='


class TestCheckService:
    def test_idempotent_pair_passes(self, checks, gallery):
        gp, _ = gallery.idempotent_pair(np.diag([1.0, 2.0]), seed=0)
        report = checks.run(gp.as_projection_pair(), trials=2, seed=0)
        failed = [c for c in report['checks'] if not c['passed']]
        assert report['success'], failed
        assert report['generic_dim'] == 4
        names = {c['name'] for c in report['checks']}
        assert {'kato_identity', 'transitivity', 'minimal_lifting', 'triangle_inequality'} <= names

    def test_discretized_mt_passes(self, checks, gallery):
        report = checks.run(gallery.discretized_mt(6), trials=2, seed=1)
        assert report['success']

    def test_pair_without_generic_part(self, checks, decomposition):
        pair = decomposition.validate_pair(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        report = checks.run(pair, trials=2, seed=0)
        assert report['success']
        assert report['generic_dim'] == 0
        assert [c['name'] for c in report['checks']] == ['kato_identity', 'split_reassembly']

    def test_deterministic(self, checks, gallery):
        pair = gallery.random_generic_pair(4, seed=9).as_projection_pair()
        assert checks.run(pair, trials=2, seed=5) == checks.run(pair, trials=2, seed=5)

    @pytest.mark.parametrize('m', [2, 4])
    def test_random_pairs_pass(self, checks, gallery, m):
        report = checks.run(gallery.random_generic_pair(m, seed=m).as_projection_pair(), trials=2, seed=m)
        assert report['success']
