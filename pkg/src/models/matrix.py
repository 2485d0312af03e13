from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, FiniteFloat, PositiveInt, ValidationError, model_validator

from src.models.errors import MalformedMatrix


class MatrixFile(BaseModel):
    """On-disk matrix: {"rows": n, "cols": n, "data": [[re, im], ...]} row-major."""

    rows: PositiveInt
    cols: PositiveInt
    data: List[Tuple[FiniteFloat, FiniteFloat]]

    @model_validator(mode='after')
    def check_size(self) -> 'MatrixFile':
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f'data has {len(self.data)} entries, expected rows*cols = {self.rows * self.cols}'
            )
        return self

    def to_array(self) -> np.ndarray:
        values = np.array([re + 1j * im for re, im in self.data], dtype=complex)
        return values.reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, M: np.ndarray) -> 'MatrixFile':
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2:
            raise MalformedMatrix('matrix must be two-dimensional', {'shape': list(M.shape)})
        data = [(float(z.real), float(z.imag)) for z in M.ravel()]
        return cls(rows=M.shape[0], cols=M.shape[1], data=data)


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    """Read a matrix JSON file; NaN, Inf and shape mismatches are rejected."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MalformedMatrix(f'cannot read {path}: {e}', {'path': str(path)})
    try:
        return MatrixFile.model_validate_json(text).to_array()
    except ValidationError as e:
        raise MalformedMatrix(
            f'{path} is not a valid matrix file',
            {'path': str(path), 'errors': [err['msg'] for err in e.errors()]},
        )


def save_matrix(M: np.ndarray, path: Union[str, Path]) -> None:
    Path(path).write_text(MatrixFile.from_array(M).model_dump_json())


def matrix_to_dict(M: np.ndarray) -> Dict[str, Any]:
    # report payloads may carry empty bases, which matrix files never do
    M = np.asarray(M, dtype=complex)
    return {
        'rows': int(M.shape[0]),
        'cols': int(M.shape[1]),
        'data': [[float(z.real), float(z.imag)] for z in M.ravel()],
    }


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in ascending order with the unitary matrix of eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def columns(self, mask: np.ndarray) -> np.ndarray:
        return self.eigenvectors[:, mask]
