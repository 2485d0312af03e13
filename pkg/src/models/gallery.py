from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.models.matrix import matrix_to_dict


@dataclass(frozen=True)
class OmegaParametrization:
    """
    Davis symmetries of an A0 with simple spectrum, one unimodular phase per
    eigenvalue pair: V e_k = omega_k f_k and V f_k = conj(omega_k) e_k, where
    e_k, f_k are unit eigenvectors for +lambda_k and -lambda_k.
    """

    eigenvalues: np.ndarray
    E: np.ndarray
    F: np.ndarray
    phases: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.phases is None:
            object.__setattr__(self, 'phases', np.ones(self.eigenvalues.size, dtype=complex))

    @property
    def m(self) -> int:
        return self.E.shape[0]

    def symmetry(self, omegas: Optional[Sequence[complex]] = None) -> np.ndarray:
        omegas = self.phases if omegas is None else np.asarray(omegas, dtype=complex)
        if omegas.shape != self.eigenvalues.shape:
            raise ValueError(f'expected {self.eigenvalues.size} phases, got {omegas.size}')
        if not np.allclose(np.abs(omegas), 1.0, atol=1e-12):
            raise ValueError('phases must lie on the unit circle')
        forward = (self.F * omegas) @ self.E.conj().T
        return forward + forward.conj().T

    def phases_of(self, V: np.ndarray) -> np.ndarray:
        """Phases omega_k = <V e_k, f_k> of a symmetry in the family."""
        return np.einsum('ik,ij,jk->k', self.F.conj(), V, self.E)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'eigenvalues': [float(x) for x in self.eigenvalues],
            'phases': [[float(w.real), float(w.imag)] for w in self.phases],
            'E': matrix_to_dict(self.E),
            'F': matrix_to_dict(self.F),
        }
