from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.models.matrix import matrix_to_dict
from src.models.pairs import HalmosFrame


@dataclass(frozen=True)
class CommutantElement:
    """Element [[X, Y], [Y, Z]] of the commutant of A0 in Halmos coordinates."""

    frame: HalmosFrame
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    def frame_matrix(self) -> np.ndarray:
        return HalmosFrame.assemble(self.X, self.Y, self.Y, self.Z)

    def ambient(self) -> np.ndarray:
        return self.frame.from_frame(self.frame_matrix())

    def to_dict(self) -> Dict[str, Any]:
        return {'X': matrix_to_dict(self.X), 'Y': matrix_to_dict(self.Y), 'Z': matrix_to_dict(self.Z)}


@dataclass(frozen=True)
class IsotropyElement:
    """Unitary diag(Wp, Wp) fixing a generic pair; Wp commutes with the angle operator."""

    frame: HalmosFrame
    Wp: np.ndarray

    def frame_matrix(self) -> np.ndarray:
        O = np.zeros_like(self.Wp)
        return HalmosFrame.assemble(self.Wp, O, O, self.Wp)

    def ambient(self) -> np.ndarray:
        return self.frame.from_frame(self.frame_matrix())

    def to_dict(self) -> Dict[str, Any]:
        return {'Wp': matrix_to_dict(self.Wp)}
