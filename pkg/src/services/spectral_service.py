import logging
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg

from src.models.config import Tolerances
from src.models.errors import (
    BranchCut, DomainError, MalformedMatrix, NotHermitian, SingularSign, SpectralError,
)
from src.models.matrix import SpectralDecomp

logger = logging.getLogger(__name__)


def adjoint(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + adjoint(M))


def anti_hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M - adjoint(M))


class SpectralService:
    """Matrix-function kernel shared by every other service.

    All inputs are dense complex ``numpy`` arrays. Hermitian inputs are
    symmetrized on entry and rejected when the anti-Hermitian residual
    exceeds ``hermitian_tol`` relative to the norm.
    """

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()

    def as_matrix(self, M, name: str = 'M') -> np.ndarray:
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise MalformedMatrix(f'{name} must be square', {'matrix': name, 'shape': list(M.shape)})
        if not np.all(np.isfinite(M)):
            raise MalformedMatrix(f'{name} has non-finite entries', {'matrix': name})
        return M

    def hermitian(self, M, name: str = 'M') -> np.ndarray:
        M = self.as_matrix(M, name)
        scale = self.operator_norm(M)
        residual = self.operator_norm(M - adjoint(M))
        if residual > self.tolerances.hermitian_tol * max(scale, np.finfo(float).tiny):
            raise NotHermitian(
                f'{name} is not Hermitian',
                {'matrix': name, 'residual': residual, 'norm': scale},
            )
        return hermitian_part(M)

    def eigh(self, M) -> SpectralDecomp:
        """
        Hermitian eigendecomposition.

        Args:
            M: Hermitian matrix (symmetrized on entry)

        Returns:
            SpectralDecomp with ascending eigenvalues and orthonormal eigenvectors
        """
        M = self.hermitian(M)
        n = M.shape[0]
        if n == 0:
            return SpectralDecomp(np.zeros(0), np.zeros((0, 0), dtype=complex))
        try:
            w, U = scipy.linalg.eigh(M)
        except scipy.linalg.LinAlgError as e:
            raise SpectralError(f'eigendecomposition did not converge: {e}', {'n': n})
        return SpectralDecomp(np.asarray(w, dtype=float), np.asarray(U, dtype=complex))

    def matrix_function(self, M, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Apply a vectorized real function to the spectrum of a Hermitian matrix."""
        decomp = self.eigh(M)
        if decomp.n == 0:
            return np.zeros((0, 0), dtype=complex)
        try:
            with np.errstate(all='ignore'):
                values = np.asarray(f(decomp.eigenvalues))
        except (ValueError, ArithmeticError) as e:
            raise DomainError(f'function undefined on spectrum: {e}')
        bad = ~np.isfinite(values)
        if np.any(bad):
            eigenvalue = float(decomp.eigenvalues[np.argmax(bad)])
            raise DomainError(
                f'function undefined at eigenvalue {eigenvalue!r}', {'eigenvalue': eigenvalue}
            )
        U = decomp.eigenvectors
        result = (U * values) @ adjoint(U)
        if np.isrealobj(values):
            return hermitian_part(result)
        return result

    def sign(self, M, gap_tol: Optional[float] = None, scale_floor: float = 0.0) -> np.ndarray:
        """
        Sign of a Hermitian matrix with a spectral gap around zero.

        Args:
            M: Hermitian matrix
            gap_tol: relative gap, defaults to the configured ``gap_tol``
            scale_floor: lower bound for the scale the gap is measured against;
                1.0 makes the gap absolute for contractions

        Returns:
            The symmetry sgn(M)
        """
        gap_tol = self.tolerances.gap_tol if gap_tol is None else gap_tol
        decomp = self.eigh(M)
        if decomp.n == 0:
            return np.zeros((0, 0), dtype=complex)
        w = decomp.eigenvalues
        scale = max(float(np.max(np.abs(w))), scale_floor)
        inside = np.abs(w) <= gap_tol * scale
        if scale == 0.0 or np.any(inside):
            offending = float(w[np.argmin(np.abs(w))])
            logger.debug('sign gap violated: eigenvalue %r, scale %r', offending, scale)
            raise SingularSign(
                f'eigenvalue {offending!r} lies inside the sign gap',
                {'eigenvalue': offending, 'gap': gap_tol * scale},
            )
        U = decomp.eigenvectors
        return hermitian_part((U * np.sign(w)) @ adjoint(U))

    def unitary_residual(self, U: np.ndarray) -> float:
        return self.operator_norm(adjoint(U) @ U - np.eye(U.shape[0]))

    def unitary_phases(self, U) -> Tuple[np.ndarray, np.ndarray]:
        """Principal eigen-phases in (-pi, pi] and the unitary Schur basis of a unitary matrix."""
        U = self.as_matrix(U, 'U')
        if U.shape[0] == 0:
            return np.zeros(0), np.zeros((0, 0), dtype=complex)
        residual = self.unitary_residual(U)
        if residual > self.tolerances.hermitian_tol:
            raise DomainError('matrix is not unitary', {'residual': residual})
        T, basis = scipy.linalg.schur(U, output='complex')
        return np.angle(np.diag(T)), basis

    def unitary_log(self, U, gap_tol: Optional[float] = None) -> np.ndarray:
        """
        Principal logarithm of a unitary matrix.

        Args:
            U: unitary matrix without eigenvalue -1
            gap_tol: minimal distance of the spectrum to -1

        Returns:
            Anti-Hermitian Z with e^Z = U and ||Z|| < pi
        """
        gap_tol = self.tolerances.gap_tol if gap_tol is None else gap_tol
        phases, basis = self.unitary_phases(U)
        if phases.size == 0:
            return np.zeros((0, 0), dtype=complex)
        distance = np.abs(np.exp(1j * phases) + 1.0)
        if np.min(distance) <= gap_tol:
            phase = float(phases[np.argmin(distance)])
            raise BranchCut(
                f'eigenvalue with phase {phase!r} sits on the branch cut at -1',
                {'phase': phase},
            )
        return anti_hermitian_part((basis * (1j * phases)) @ adjoint(basis))

    def expm(self, Z) -> np.ndarray:
        Z = self.as_matrix(Z, 'Z')
        if Z.shape[0] == 0:
            return Z.copy()
        return scipy.linalg.expm(Z)

    def operator_norm(self, M) -> float:
        M = np.asarray(M)
        if M.size == 0:
            return 0.0
        return float(np.linalg.norm(M, 2))

    def nullspace_basis(self, M, rank_tol: Optional[float] = None) -> np.ndarray:
        """Orthonormal basis of the eigenvalues with |lambda| <= rank_tol * ||M||."""
        rank_tol = self.tolerances.rank_tol if rank_tol is None else rank_tol
        decomp = self.eigh(M)
        if decomp.n == 0:
            return np.zeros((0, 0), dtype=complex)
        w = decomp.eigenvalues
        threshold = rank_tol * float(np.max(np.abs(w)))
        return decomp.columns(np.abs(w) <= threshold)

    def projector(self, basis: np.ndarray) -> np.ndarray:
        return hermitian_part(basis @ adjoint(basis))

    def haar_unitary(self, d: int, rng: np.random.Generator) -> np.ndarray:
        """Haar-distributed d x d unitary (QR of a complex Ginibre matrix with phase correction)."""
        if d == 0:
            return np.zeros((0, 0), dtype=complex)
        G = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
        Qm, R = np.linalg.qr(G)
        diag = np.diag(R)
        phases = diag / np.where(np.abs(diag) > 0, np.abs(diag), 1.0)
        return Qm * phases

    def clusters(self, values: np.ndarray, rel_tol: Optional[float] = None) -> list:
        """Group sorted values into index runs closer than rel_tol relative to the largest magnitude."""
        rel_tol = self.tolerances.cluster_tol if rel_tol is None else rel_tol
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return []
        tol = rel_tol * max(float(np.max(np.abs(values))), 1.0)
        order = np.argsort(values, kind='stable')
        groups = [[int(order[0])]]
        for prev, idx in zip(order[:-1], order[1:]):
            if values[idx] - values[prev] <= tol:
                groups[-1].append(int(idx))
            else:
                groups.append([int(idx)])
        return groups
