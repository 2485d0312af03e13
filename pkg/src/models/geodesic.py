from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.models.matrix import matrix_to_dict
from src.models.pairs import GenericPair, HalmosFrame


@dataclass(frozen=True)
class HorizontalTangent:
    """
    Horizontal vector at a generic pair, stored as its block Y.

    Y is anti-Hermitian and commutes with the angle operator; the ambient
    tangent is Z = W* [[-Y tau, Y], [Y, Y tau]] W.
    """

    frame: HalmosFrame
    Y: np.ndarray

    @property
    def Y_tau(self) -> np.ndarray:
        return self.Y * self.frame.tau

    @property
    def Y_over_C(self) -> np.ndarray:
        """Y C^{-1}; column scaling because C is diagonal."""
        return self.Y / self.frame.C

    @property
    def Z_frame(self) -> np.ndarray:
        Yt = self.Y_tau
        return HalmosFrame.assemble(-Yt, self.Y, self.Y, Yt)

    @property
    def Z(self) -> np.ndarray:
        return self.frame.from_frame(self.Z_frame)

    def scaled(self, t: float) -> 'HorizontalTangent':
        return HorizontalTangent(self.frame, t * self.Y)

    def to_dict(self) -> Dict[str, Any]:
        return {'Y': matrix_to_dict(self.Y), 'gamma': [float(g) for g in self.frame.gamma]}


@dataclass(frozen=True)
class Geodesic:
    """t -> exp(tZ) . base, with constant speed ||Y C^{-1}||."""

    base: GenericPair
    tangent: HorizontalTangent
    length_per_unit_t: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'base': self.base.to_dict(),
            'tangent': self.tangent.to_dict(),
            'length_per_unit_t': self.length_per_unit_t,
        }
