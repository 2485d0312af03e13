import logging
from typing import Optional, Union

import numpy as np

from src.models.config import Tolerances
from src.models.errors import (
    AnticommutationViolated, CertificationFailed, DomainError, NotCodiagonal,
)
from src.models.pairs import DavisSymmetry, GenericPair
from src.services.spectral_service import SpectralService, adjoint, hermitian_part

logger = logging.getLogger(__name__)


class DavisService:
    """Correspondences between generic pairs, anti-commuting symmetries,
    co-diagonal subspaces and co-diagonal projections over a fixed A0."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.spectral = SpectralService(self.tolerances)

    def anticommutator_residual(self, V: np.ndarray, A0: np.ndarray) -> float:
        return self.spectral.operator_norm(V @ A0 + A0 @ V)

    def _relative(self, A0: np.ndarray) -> float:
        return self.tolerances.certify_tol * max(self.spectral.operator_norm(A0), np.finfo(float).tiny)

    def pair_to_symmetry(self, gp: GenericPair) -> DavisSymmetry:
        """V = sgn(P0 + Q0 - 1); SingularSign propagates when the pair is not generic."""
        if gp.m == 0:
            return DavisSymmetry(np.zeros((0, 0), dtype=complex), gp.A0)
        V = self.spectral.sign(gp.P0 + gp.Q0 - np.eye(gp.m))
        residual = self.anticommutator_residual(V, gp.A0)
        if residual > self._relative(gp.A0):
            logger.warning('Davis symmetry fails to anti-commute: %r', residual)
            raise CertificationFailed('Davis symmetry does not anti-commute with A0', {'residual': residual})
        return DavisSymmetry(V, gp.A0)

    def symmetry_to_pair(self, A0: np.ndarray, V: Union[DavisSymmetry, np.ndarray]) -> GenericPair:
        """
        Pair attached to an anti-commuting symmetry.

        Args:
            A0: Hermitian generic difference
            V: symmetry with V A0 = -A0 V

        Returns:
            GenericPair (P_V, Q_V) with P_V - Q_V = A0
        """
        V = V.V if isinstance(V, DavisSymmetry) else V
        A0 = self.spectral.hermitian(A0, 'A0')
        m = A0.shape[0]
        if m == 0:
            empty = np.zeros((0, 0), dtype=complex)
            return GenericPair(empty, empty)
        V = self.spectral.hermitian(V, 'V')
        if V.shape != A0.shape:
            raise DomainError('V and A0 have different dimensions', {'V': list(V.shape), 'A0': list(A0.shape)})
        square = self.spectral.operator_norm(V @ V - np.eye(m))
        if square > self.tolerances.certify_tol:
            raise DomainError('V is not a symmetry', {'residual': square})
        residual = self.anticommutator_residual(V, A0)
        if residual > self._relative(A0):
            raise AnticommutationViolated('V does not anti-commute with A0', {'residual': residual})
        root = self.spectral.matrix_function(A0, lambda w: np.sqrt(np.clip(1.0 - w ** 2, 0.0, 1.0)))
        H = hermitian_part(root @ V)
        I = np.eye(m)
        return GenericPair(0.5 * (I + A0 + H), 0.5 * (I - A0 + H))

    def symmetry_to_subspace(self, dv: DavisSymmetry) -> np.ndarray:
        """Orthonormal basis of the +1 eigenspace of V."""
        decomp = self.spectral.eigh(dv.V)
        basis = decomp.columns(decomp.eigenvalues > 0)
        E = self.spectral.projector(basis)
        if not self.codiagonal_projection_check(E, dv.A0):
            raise CertificationFailed('Davis subspace is not co-diagonal for A0')
        return basis

    def subspace_to_symmetry(self, basis: np.ndarray, A0: np.ndarray) -> DavisSymmetry:
        A0 = self.spectral.hermitian(A0, 'A0')
        E = self.spectral.projector(np.asarray(basis, dtype=complex).reshape(A0.shape[0], -1))
        if not self.codiagonal_projection_check(E, A0):
            raise NotCodiagonal('A0 does not map the subspace into its orthogonal complement')
        return DavisSymmetry(hermitian_part(2.0 * E - np.eye(A0.shape[0])), A0)

    def codiagonal_projection_check(self, E: np.ndarray, A0: np.ndarray) -> bool:
        m = A0.shape[0]
        if m == 0:
            return True
        F = np.eye(m) - E
        tol = self._relative(A0)
        inner = self.spectral.operator_norm(E @ A0 @ E)
        outer = self.spectral.operator_norm(F @ A0 @ F)
        return inner <= tol and outer <= tol

    def subspace_projection(self, dv: DavisSymmetry) -> np.ndarray:
        """Co-diagonal projection E = (1 + V)/2."""
        return hermitian_part(0.5 * (np.eye(dv.m) + dv.V))

    def j0(self, A0: np.ndarray) -> np.ndarray:
        """Isometric part of A0 in its polar decomposition."""
        return self.spectral.sign(A0)

    def sum_operator(self, gp: GenericPair) -> np.ndarray:
        return gp.P0 + gp.Q0 - np.eye(gp.m)

    def conjugate_pair(self, U: np.ndarray, gp: GenericPair) -> GenericPair:
        """U-conjugate of a generic pair."""
        Ua = adjoint(U)
        return GenericPair(hermitian_part(U @ gp.P0 @ Ua), hermitian_part(U @ gp.Q0 @ Ua))
