import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.models.errors import AnticommutationViolated, DomainError, NotCodiagonal
from src.models.pairs import DavisSymmetry

FLIP = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestDavisSymmetry:
    def test_theta_pair_symmetry(self, davis, theta_pair):
        theta = 0.4
        c, s = np.cos(theta), np.sin(theta)
        dv = davis.pair_to_symmetry(theta_pair([theta]))
        assert_allclose(dv.V, [[c, s], [s, -c]], atol=1e-12)

    def test_scalar_closed_form(self, davis):
        lam = 0.6
        r = np.sqrt(1 - lam ** 2)
        gp = davis.symmetry_to_pair(np.diag([lam, -lam]), FLIP)
        assert_allclose(gp.P0, 0.5 * np.array([[1 + lam, r], [r, 1 - lam]]), atol=1e-12)
        assert_allclose(gp.Q0, 0.5 * np.array([[1 - lam, r], [r, 1 + lam]]), atol=1e-12)
        assert_allclose(gp.P0 @ gp.P0, gp.P0, atol=1e-12)
        assert_allclose(gp.A0, np.diag([lam, -lam]), atol=1e-12)

    def test_rejects_commuting_symmetry(self, davis):
        with pytest.raises(AnticommutationViolated) as excinfo:
            davis.symmetry_to_pair(np.diag([0.6, -0.6]), np.diag([1.0, -1.0]))
        assert excinfo.value.exit_code == 3

    def test_rejects_non_symmetry(self, davis):
        with pytest.raises(DomainError):
            davis.symmetry_to_pair(np.diag([0.6, -0.6]), 2.0 * FLIP)

    @pytest.mark.parametrize('m', [2, 4, 8, 16, 32])
    def test_round_trips(self, davis, gallery, spectral, m):
        for seed in range(3):
            gp = gallery.random_generic_pair(m, seed=100 * m + seed)
            dv = davis.pair_to_symmetry(gp)
            assert davis.anticommutator_residual(dv.V, gp.A0) <= 1e-9
            back = davis.symmetry_to_pair(gp.A0, dv)
            assert spectral.operator_norm(back.P0 - gp.P0) < 1e-9
            assert spectral.operator_norm(back.Q0 - gp.Q0) < 1e-9

            basis = davis.symmetry_to_subspace(dv)
            assert basis.shape == (m, m // 2)
            assert spectral.operator_norm(davis.subspace_to_symmetry(basis, gp.A0).V - dv.V) < 1e-9
            E = davis.subspace_projection(dv)
            assert davis.codiagonal_projection_check(E, gp.A0)


class TestCodiagonalSubspaces:
    def test_eigenvector_is_not_codiagonal(self, davis):
        with pytest.raises(NotCodiagonal):
            davis.subspace_to_symmetry(np.array([[1.0], [0.0]]), np.diag([0.6, -0.6]))

    def test_balanced_vector_is_codiagonal(self, davis):
        basis = np.array([[1.0], [1.0]]) / np.sqrt(2)
        dv = davis.subspace_to_symmetry(basis, np.diag([0.6, -0.6]))
        assert_allclose(dv.V, FLIP, atol=1e-12)

    def test_j0(self, davis):
        assert_allclose(davis.j0(np.diag([0.6, -0.2])), np.diag([1.0, -1.0]))

    def test_j0_anticommutes_with_every_symmetry(self, davis, gallery, orbit, spectral):
        gp = gallery.random_generic_pair(6, seed=41)
        J0 = davis.j0(gp.A0)
        for seed in range(4):
            V = davis.pair_to_symmetry(orbit.random_fiber_pair(gp, seed=seed)).V
            assert spectral.operator_norm(J0 @ V + V @ J0) < 1e-9

    def test_P0_is_not_codiagonal(self, davis, theta_pair):
        gp = theta_pair([0.4, 1.0])
        assert not davis.codiagonal_projection_check(gp.P0, gp.A0)

    def test_sum_operator_squares_to_one_minus_A0_squared(self, davis, theta_pair):
        gp = theta_pair([0.3, 1.2])
        S = davis.sum_operator(gp)
        assert_allclose(S @ S, np.eye(4) - gp.A0 @ gp.A0, atol=1e-12)

    def test_symmetry_to_pair_accepts_value_object(self, davis):
        A0 = np.diag([0.6, -0.6])
        gp = davis.symmetry_to_pair(A0, DavisSymmetry(FLIP, A0))
        assert gp.m == 2
