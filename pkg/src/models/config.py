from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat


class Tolerances(BaseModel):
    """Numerical tolerances shared by every service.

    ``rank_tol`` and ``gap_tol`` are relative to the norm of the matrix they
    are applied to. The remaining levels are the fixed certification
    thresholds of the library.
    """

    model_config = ConfigDict(frozen=True)

    rank_tol: PositiveFloat = 1e-8
    gap_tol: PositiveFloat = 1e-8
    hermitian_tol: PositiveFloat = 1e-8
    projection_tol: PositiveFloat = 1e-10
    certify_tol: PositiveFloat = 1e-9
    cluster_tol: PositiveFloat = 1e-9
    branch_margin: PositiveFloat = 1e-6
    endpoint_tol: PositiveFloat = 1e-7


class RunConfig(BaseModel):
    """Settings of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    rank_tol: PositiveFloat = 1e-8
    gap_tol: PositiveFloat = 1e-8
    seed: int = Field(default=0, ge=0)
    output: Optional[Path] = None
    format: Literal['json', 'csv'] = 'json'

    def tolerances(self) -> Tolerances:
        return Tolerances(rank_tol=self.rank_tol, gap_tol=self.gap_tol)
