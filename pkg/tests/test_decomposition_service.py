import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import block_diag

from src.models.errors import EmptyGenericPart, NotAContraction, NotAProjection


def mixed_pair(theta):
    """One vector in each of the four intersections plus a 2-dimensional generic block."""
    c, s = np.cos(theta), np.sin(theta)
    P = block_diag([[1.0]], [[1.0]], [[0.0]], [[0.0]], [[1.0, 0.0], [0.0, 0.0]])
    Q = block_diag([[1.0]], [[0.0]], [[1.0]], [[0.0]], [[c * c, c * s], [c * s, s * s]])
    return P, Q


class TestValidatePair:
    def test_accepts_theta_pair(self, decomposition, theta_pair):
        gp = theta_pair([0.4])
        pair = decomposition.validate_pair(gp.P0, gp.Q0)
        assert pair.n == 2

    def test_rejects_non_idempotent(self, decomposition):
        with pytest.raises(NotAProjection) as excinfo:
            decomposition.validate_pair(np.diag([0.5, 0.0]), np.eye(2))
        assert excinfo.value.details['property'] == 'idempotent'

    def test_rejects_oblique_idempotent(self, decomposition):
        with pytest.raises(NotAProjection) as excinfo:
            decomposition.validate_pair(np.array([[1.0, 1.0], [0.0, 0.0]]), np.eye(2))
        assert excinfo.value.details['property'] == 'self-adjoint'


class TestThreeSpaceSplit:
    def test_dimensions(self, decomposition):
        pair = decomposition.validate_pair(*mixed_pair(np.pi / 6))
        split = decomposition.three_space_split(pair.A)
        assert split.dims == {'nullA': 2, 'plus1': 1, 'minus1': 1, 'generic': 2}

    def test_reassembles_A(self, decomposition, spectral):
        pair = decomposition.validate_pair(*mixed_pair(0.7))
        split = decomposition.three_space_split(pair.A)
        G = split.basis_generic
        A0 = G.conj().T @ pair.A @ G
        assert spectral.operator_norm(split.assemble(A0) - pair.A) < 1e-12
        assert spectral.unitary_residual(split.T) < 1e-12

    def test_rejects_non_contraction(self, decomposition):
        with pytest.raises(NotAContraction):
            decomposition.three_space_split(2.0 * np.eye(2))


class TestGenericPart:
    def test_generic_spectrum(self, decomposition, spectral):
        pair = decomposition.validate_pair(*mixed_pair(np.pi / 6))
        gp = decomposition.generic_part(pair)
        assert gp.m == 2
        assert_allclose(spectral.eigh(gp.A0).eigenvalues, [-0.5, 0.5], atol=1e-12)

    def test_empty_generic_part(self, decomposition):
        pair = decomposition.validate_pair(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
        with pytest.raises(EmptyGenericPart) as excinfo:
            decomposition.generic_part(pair)
        assert excinfo.value.exit_code == 3


class TestHalmosFrame:
    def test_angles_ascending(self, decomposition, theta_pair):
        thetas = [1.1, 0.3, 0.7]
        frame = decomposition.halmos_frame(theta_pair(thetas))
        assert_allclose(frame.gamma, sorted(thetas), atol=1e-12)

    @pytest.mark.parametrize('m', [2, 4, 8, 16])
    def test_reproduces_random_pairs(self, decomposition, gallery, spectral, m):
        gp = gallery.random_generic_pair(m, seed=m)
        frame = decomposition.halmos_frame(gp)
        P_model, Q_model = frame.model_pair()
        assert spectral.unitary_residual(frame.W) < 1e-10
        assert spectral.operator_norm(frame.to_frame(gp.P0) - P_model) < 1e-9
        assert spectral.operator_norm(frame.to_frame(gp.Q0) - Q_model) < 1e-9

    def test_repeated_angles(self, decomposition, theta_pair, spectral):
        gp = theta_pair([0.5, 0.5, 0.9])
        frame = decomposition.halmos_frame(gp)
        _, Q_model = frame.model_pair()
        assert spectral.operator_norm(frame.to_frame(gp.Q0) - Q_model) < 1e-9


class TestDifferenceClass:
    def test_generic_witness(self, decomposition, spectral):
        A = np.diag([0.5, -0.5])
        report = decomposition.is_difference_of_projections(A)
        assert report['success']
        witness = report['witness']
        assert spectral.operator_norm(witness.A - A) < 1e-12
        assert decomposition.kato_residual(witness) < 1e-10

    def test_unit_eigenvalues(self, decomposition):
        report = decomposition.is_difference_of_projections(np.diag([1.0, 0.0, -1.0]))
        assert report['success']
        assert_allclose(report['witness'].P, np.diag([1.0, 0.0, 0.0]), atol=1e-12)
        assert_allclose(report['witness'].Q, np.diag([0.0, 0.0, 1.0]), atol=1e-12)

    def test_unbalanced_spectrum(self, decomposition):
        report = decomposition.is_difference_of_projections(np.diag([0.5, 0.3]))
        assert not report['success']
        assert report['witness'] is None

    def test_asymmetric_spectrum(self, decomposition):
        report = decomposition.is_difference_of_projections(np.diag([0.5, -0.3]))
        assert not report['success']

    def test_non_contraction(self, decomposition):
        assert not decomposition.is_difference_of_projections(np.diag([2.0]))['success']

    def test_non_hermitian(self, decomposition):
        assert not decomposition.is_difference_of_projections([[0.0, 1.0], [0.0, 0.0]])['success']


class TestAngles:
    def test_friedrichs_cos(self, decomposition, theta_pair):
        pair = theta_pair([0.4, 0.9]).as_projection_pair()
        assert decomposition.friedrichs_cos(pair) == pytest.approx(np.cos(0.4), abs=1e-12)

    def test_friedrichs_ignores_intersection(self, decomposition):
        pair = decomposition.validate_pair(*mixed_pair(0.6))
        assert decomposition.friedrichs_cos(pair) == pytest.approx(np.cos(0.6), abs=1e-10)

    def test_principal_angles(self, decomposition, theta_pair):
        pair = theta_pair([0.9, 0.2]).as_projection_pair()
        assert_allclose(decomposition.principal_angles(pair), [0.2, 0.9], atol=1e-10)

    def test_kato_identity(self, decomposition, gallery):
        pair = gallery.random_generic_pair(6, seed=3).as_projection_pair()
        assert decomposition.kato_residual(pair) < 1e-10

    def test_symmetry_difference(self, decomposition, theta_pair):
        assert decomposition.is_symmetry_difference(
            decomposition.validate_pair(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        )
        assert not decomposition.is_symmetry_difference(theta_pair([0.3]).as_projection_pair())
