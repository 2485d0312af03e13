from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from src.models.matrix import matrix_to_dict


@dataclass(frozen=True)
class ProjectionPair:
    """Two orthogonal projections P, Q on C^n; the pair lies in the fiber of A = P - Q."""

    P: np.ndarray
    Q: np.ndarray

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def A(self) -> np.ndarray:
        return self.P - self.Q

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'P': matrix_to_dict(self.P), 'Q': matrix_to_dict(self.Q)}


@dataclass(frozen=True)
class ThreeSpaceSplit:
    """Orthonormal bases of N(A), N(A-1), N(A+1) and the generic part H0."""

    basis_nullA: np.ndarray
    basis_plus1: np.ndarray
    basis_minus1: np.ndarray
    basis_generic: np.ndarray

    @property
    def T(self) -> np.ndarray:
        return np.hstack([self.basis_nullA, self.basis_plus1, self.basis_minus1, self.basis_generic])

    @property
    def dims(self) -> Dict[str, int]:
        return {
            'nullA': self.basis_nullA.shape[1],
            'plus1': self.basis_plus1.shape[1],
            'minus1': self.basis_minus1.shape[1],
            'generic': self.basis_generic.shape[1],
        }

    def assemble(self, A0: np.ndarray) -> np.ndarray:
        """Rebuild the ambient operator 0 + 1 + (-1) + A0 through T."""
        d = self.dims
        diag = np.concatenate([np.zeros(d['nullA']), np.ones(d['plus1']), -np.ones(d['minus1'])])
        k = diag.size
        block = np.zeros((k + d['generic'],) * 2, dtype=complex)
        block[:k, :k] = np.diag(diag)
        block[k:, k:] = A0
        T = self.T
        return T @ block @ T.conj().T

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dims': self.dims,
            'basis_nullA': matrix_to_dict(self.basis_nullA),
            'basis_plus1': matrix_to_dict(self.basis_plus1),
            'basis_minus1': matrix_to_dict(self.basis_minus1),
            'basis_generic': matrix_to_dict(self.basis_generic),
        }


@dataclass(frozen=True)
class GenericPair:
    """Compressions P0, Q0 of a pair to its generic part (dimension m, always even)."""

    P0: np.ndarray
    Q0: np.ndarray

    @property
    def m(self) -> int:
        return self.P0.shape[0]

    @property
    def A0(self) -> np.ndarray:
        return self.P0 - self.Q0

    def as_projection_pair(self) -> ProjectionPair:
        return ProjectionPair(self.P0, self.Q0)

    def to_dict(self) -> Dict[str, Any]:
        return {'m': self.m, 'P0': matrix_to_dict(self.P0), 'Q0': matrix_to_dict(self.Q0)}


@dataclass(frozen=True)
class HalmosFrame:
    """
    Unitary W carrying H0 to L x L coordinates, where P0 = [[1,0],[0,0]] and
    Q0 = [[C^2, CS], [CS, S^2]] with C = cos(gamma), S = sin(gamma).
    """

    W: np.ndarray
    gamma: np.ndarray

    @property
    def half(self) -> int:
        return self.gamma.size

    @property
    def m(self) -> int:
        return 2 * self.half

    @property
    def C(self) -> np.ndarray:
        return np.cos(self.gamma)

    @property
    def S(self) -> np.ndarray:
        return np.sin(self.gamma)

    @property
    def tau(self) -> np.ndarray:
        return np.tan(self.gamma)

    def to_frame(self, M: np.ndarray) -> np.ndarray:
        return self.W @ M @ self.W.conj().T

    def from_frame(self, M: np.ndarray) -> np.ndarray:
        return self.W.conj().T @ M @ self.W

    def blocks(self, M: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """The four L x L blocks of an ambient operator in frame coordinates."""
        F = self.to_frame(M)
        k = self.half
        return F[:k, :k], F[:k, k:], F[k:, :k], F[k:, k:]

    @staticmethod
    def assemble(X: np.ndarray, Y1: np.ndarray, Y2: np.ndarray, Z: np.ndarray) -> np.ndarray:
        return np.block([[X, Y1], [Y2, Z]])

    def model_pair(self) -> Tuple[np.ndarray, np.ndarray]:
        """Frame-coordinate P0 and Q0."""
        k = self.half
        C, S = np.diag(self.C), np.diag(self.S)
        I, O = np.eye(k), np.zeros((k, k))
        return np.block([[I, O], [O, O]]), np.block([[C @ C, C @ S], [C @ S, S @ S]])

    def sigma(self) -> np.ndarray:
        """The symmetry [[-S, C], [C, S]] of the geodesic closed form."""
        C, S = np.diag(self.C), np.diag(self.S)
        return np.block([[-S, C], [C, S]])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'm': self.m,
            'gamma': [float(g) for g in self.gamma],
            'W': matrix_to_dict(self.W),
        }


@dataclass(frozen=True)
class DavisSymmetry:
    """Symmetry V on H0 anti-commuting with A0."""

    V: np.ndarray
    A0: np.ndarray

    @property
    def m(self) -> int:
        return self.V.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {'m': self.m, 'V': matrix_to_dict(self.V)}
