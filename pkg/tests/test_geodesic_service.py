import csv

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.models.errors import CertificationFailed, DomainError, MismatchedDifference, NotCommutingWithGamma
from src.models.geodesic import HorizontalTangent


def random_tangent(checks, frame, seed, length):
    return checks.random_tangent(frame, np.random.default_rng(seed), length)


class TestHorizontalTangents:
    def test_rejects_hermitian_block(self, geodesics, decomposition, theta_pair):
        frame = decomposition.halmos_frame(theta_pair([0.4]))
        with pytest.raises(DomainError):
            geodesics.horizontal_from_block([[1.0]], frame)

    def test_rejects_block_mixing_angles(self, geodesics, decomposition, theta_pair):
        frame = decomposition.halmos_frame(theta_pair([0.3, 0.9]))
        Y = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(NotCommutingWithGamma):
            geodesics.horizontal_from_block(Y, frame)

    def test_finsler_norm_scalar(self, geodesics, decomposition, theta_pair):
        theta, y = 0.7, 0.4
        frame = decomposition.halmos_frame(theta_pair([theta]))
        ht = geodesics.horizontal_from_block([[1j * y]], frame)
        assert geodesics.finsler_norm(ht) == pytest.approx(y / np.cos(theta), abs=1e-12)

    def test_isotropy_preserves_horizontal_space(self, geodesics, checks, orbit, decomposition, theta_pair):
        frame = decomposition.halmos_frame(theta_pair([0.5, 0.5, 1.1]))
        ht = random_tangent(checks, frame, 3, 1.0)
        B = orbit.isotropy_sample(frame, seed=4).ambient()
        X, Y1, Y2, Z = frame.blocks(B @ ht.Z @ B.conj().T)
        assert_allclose(Y1, Y2, atol=1e-12)
        assert_allclose(X, -Y1 * frame.tau, atol=1e-12)
        assert_allclose(Z, Y1 * frame.tau, atol=1e-12)

    def test_tangent_is_horizontal(self, geodesics, checks, orbit, decomposition, theta_pair, spectral):
        gp = theta_pair([0.5, 0.5, 1.1])
        frame = decomposition.halmos_frame(gp)
        ht = random_tangent(checks, frame, 6, 1.4)
        Z = ht.Z
        assert spectral.operator_norm(Z @ gp.A0 - gp.A0 @ Z) < 1e-9
        assert_allclose(orbit.conditional_expectation(Z, gp, frame), 0.0, atol=1e-9)

    def test_spectrum_is_symmetric(self, geodesics, checks, gallery, decomposition, spectral):
        gp = gallery.random_generic_pair(6, seed=23)
        ht = random_tangent(checks, decomposition.halmos_frame(gp), 8, 1.1)
        w = spectral.eigh(1j * ht.Z).eigenvalues
        assert_allclose(w, -w[::-1], atol=1e-9)
        assert np.max(np.abs(w)) == pytest.approx(geodesics.finsler_norm(ht), abs=1e-9)

    def test_rejects_non_horizontal_tangent(self, geodesics, decomposition, theta_pair):
        frame = decomposition.halmos_frame(theta_pair([0.4]))
        with pytest.raises(CertificationFailed):
            geodesics._certify_horizontal(HorizontalTangent(frame, np.array([[1.0 + 0j]])))


class TestExponential:
    def test_closed_form_matches_expm(self, geodesics, checks, gallery, decomposition, spectral):
        for seed in range(10):
            gp = gallery.random_generic_pair(2 * (seed % 4 + 1), seed=seed)
            frame = decomposition.halmos_frame(gp)
            rng = np.random.default_rng(seed)
            ht = checks.random_tangent(frame, rng, rng.uniform(0.1, 3.0))
            t = rng.uniform(-1.0, 1.0)
            U = geodesics.exp_unitary_closed_form(ht, t)
            assert spectral.operator_norm(U - spectral.expm(t * ht.Z)) < 1e-9
            assert spectral.operator_norm(geodesics.exp_unitary_intrinsic(ht, t) - U) < 1e-9

    def test_exp_pair_stays_in_fiber(self, geodesics, checks, gallery, decomposition, spectral):
        gp = gallery.random_generic_pair(6, seed=7)
        ht = random_tangent(checks, decomposition.halmos_frame(gp), 1, 1.2)
        moved = geodesics.exp_pair(gp, ht, 0.8)
        assert spectral.operator_norm(moved.A0 - gp.A0) < 1e-9


class TestLogarithm:
    @pytest.mark.parametrize('m', [2, 4, 8])
    def test_log_inverts_exp(self, geodesics, checks, gallery, decomposition, spectral, m):
        gp = gallery.random_generic_pair(m, seed=m)
        frame = decomposition.halmos_frame(gp)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            ht = checks.random_tangent(frame, rng, rng.uniform(0.05, np.pi / 2 - 0.05))
            back = geodesics.log_pair(gp, geodesics.exp_pair(gp, ht, 1.0), frame)
            assert spectral.operator_norm(back.Y - ht.Y) < 1e-8

    def test_same_pair_has_zero_distance(self, geodesics, theta_pair):
        gp = theta_pair([0.4, 1.0])
        assert geodesics.geodesic_distance(gp, gp) == pytest.approx(0.0, abs=1e-12)

    def test_antipodal_target(self, geodesics, davis, theta_pair, spectral):
        gp = theta_pair([0.6])
        target = davis.symmetry_to_pair(gp.A0, -davis.pair_to_symmetry(gp).V)
        ht = geodesics.log_pair(gp, target)
        assert geodesics.finsler_norm(ht) == pytest.approx(np.pi / 2, abs=1e-9)
        end = geodesics.exp_pair(gp, ht, 1.0)
        assert spectral.operator_norm(end.P0 - target.P0) < 1e-7

    def test_branch_b_agrees_with_branch_a(self, geodesics, checks, gallery, decomposition, spectral):
        gp = gallery.random_generic_pair(4, seed=31)
        frame = decomposition.halmos_frame(gp)
        ht = random_tangent(checks, frame, 2, 1.0)
        target = geodesics.exp_pair(gp, ht, 1.0)
        via_b = geodesics.log_pair(gp, target, frame, branch='B')
        assert spectral.operator_norm(via_b.Y - ht.Y) < 1e-8

    def test_random_targets_within_radius(self, geodesics, orbit, gallery):
        gp = gallery.random_generic_pair(6, seed=12)
        for seed in range(10):
            target = orbit.random_fiber_pair(gp, seed=seed)
            assert geodesics.geodesic_distance(gp, target) <= np.pi / 2 + 1e-9

    def test_unknown_branch(self, geodesics, theta_pair):
        gp = theta_pair([0.4])
        with pytest.raises(DomainError):
            geodesics.log_pair(gp, gp, branch='C')

    def test_mismatched_difference(self, geodesics, theta_pair):
        with pytest.raises(MismatchedDifference):
            geodesics.log_pair(theta_pair([0.4]), theta_pair([0.5]))


class TestDistance:
    def test_omega_sweep_traces_half_angle(self, geodesics, gallery, davis):
        gp = gallery.theta_pair([0.8])
        family = gallery.omega_parametrization(gp.A0)
        base = davis.symmetry_to_pair(gp.A0, family.symmetry())
        for phi in (0.5, 1.5, 2.5, 3.0):
            target = davis.symmetry_to_pair(gp.A0, family.symmetry([np.exp(1j * phi)]))
            assert geodesics.geodesic_distance(base, target) == pytest.approx(phi / 2, abs=1e-8)

    def test_symmetric_and_triangle(self, geodesics, orbit, gallery):
        gp = gallery.random_generic_pair(4, seed=5)
        for seed in range(5):
            b = orbit.random_fiber_pair(gp, seed=2 * seed)
            c = orbit.random_fiber_pair(gp, seed=2 * seed + 1)
            d = geodesics.geodesic_distance
            assert d(gp, b) == pytest.approx(d(b, gp), abs=1e-8)
            assert d(gp, c) <= d(gp, b) + d(b, c) + 1e-7

    def test_distance_is_linear_up_to_half_pi(self, geodesics, checks, gallery, decomposition):
        gp = gallery.random_generic_pair(4, seed=19)
        ht = random_tangent(checks, decomposition.halmos_frame(gp), 4, 1.0)
        speed = geodesics.finsler_norm(ht)
        for t in (-0.7, 0.25, 0.8, 1.2, 1.5):
            target = geodesics.exp_pair(gp, ht, t)
            assert geodesics.geodesic_distance(gp, target) == pytest.approx(abs(t) * speed, abs=1e-7)

    def test_distinct_tangents_reach_distinct_pairs(self, geodesics, checks, gallery, decomposition, spectral):
        gp = gallery.random_generic_pair(4, seed=29)
        frame = decomposition.halmos_frame(gp)
        rng = np.random.default_rng(1)
        for _ in range(5):
            ht1 = checks.random_tangent(frame, rng, rng.uniform(0.1, np.pi / 2 - 0.05))
            ht2 = checks.random_tangent(frame, rng, rng.uniform(0.1, np.pi / 2 - 0.05))
            end1, end2 = geodesics.exp_pair(gp, ht1, 1.0), geodesics.exp_pair(gp, ht2, 1.0)
            gap = max(spectral.operator_norm(end1.P0 - end2.P0), spectral.operator_norm(end1.Q0 - end2.Q0))
            assert gap > 1e-8


class TestPaths:
    def test_sample_path_endpoints(self, geodesics, orbit, gallery, spectral):
        gp = gallery.random_generic_pair(4, seed=6)
        target = orbit.random_fiber_pair(gp, seed=7)
        geo = geodesics.geodesic(gp, target)
        samples = geodesics.sample_path(geo, 4)
        assert [s['t'] for s in samples] == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert spectral.operator_norm(samples[0]['P'] - gp.P0) < 1e-9
        assert spectral.operator_norm(samples[-1]['Q'] - target.Q0) < 1e-7
        assert samples[-1]['distance'] == pytest.approx(geo.length_per_unit_t)

    def test_export_csv(self, geodesics, orbit, theta_pair, tmp_path):
        gp = theta_pair([0.5])
        geo = geodesics.geodesic(gp, orbit.random_fiber_pair(gp, seed=1))
        path = geodesics.export_csv(geo, 3, tmp_path / 'path.csv')
        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 5
        assert rows[0][0] == 't' and rows[0][-1] == 'distance'
        assert all(len(row) == 2 + 2 * 2 * 4 for row in rows)
        assert float(rows[-1][-1]) == pytest.approx(geo.length_per_unit_t, abs=1e-15)


class TestMinimality:
    def test_scalar_lifting_margin(self, geodesics, decomposition, theta_pair):
        frame = decomposition.halmos_frame(theta_pair([0.7]))
        ht = geodesics.horizontal_from_block([[0.4j]], frame)
        for d in (-0.3, 0.1, 0.8):
            assert geodesics.lifting_margin(ht, [[1j * d]]) == pytest.approx(abs(d), abs=1e-10)

    def test_certificate(self, geodesics, checks, gallery, decomposition):
        gp = gallery.random_generic_pair(6, seed=14)
        frame = decomposition.halmos_frame(gp)
        for seed in range(3):
            ht = random_tangent(checks, frame, seed, 1.3)
            report = geodesics.minimality_certificate(ht, trials=40, seed=seed, iterations=30)
            assert report['certified']
            assert report['min_margin'] >= -1e-9
            assert report['descent_margin'] >= -1e-9

    def test_certificate_is_deterministic(self, geodesics, checks, theta_pair, decomposition):
        frame = decomposition.halmos_frame(theta_pair([0.4, 0.4]))
        ht = random_tangent(checks, frame, 0, 1.0)
        first = geodesics.minimality_certificate(ht, trials=10, seed=3, iterations=10)
        second = geodesics.minimality_certificate(ht, trials=10, seed=3, iterations=10)
        assert first == second
