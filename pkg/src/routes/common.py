import functools
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
import numpy as np

from src.models.config import RunConfig
from src.models.errors import MismatchedDifference, PairGeometryError
from src.models.matrix import load_matrix
from src.models.pairs import GenericPair, ProjectionPair
from src.services.decomposition_service import DecompositionService
from src.services.spectral_service import adjoint, hermitian_part

logger = logging.getLogger(__name__)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def dumps(payload: Dict[str, Any]) -> str:
    # repr floats are the shortest strings that round-trip, so reports diff cleanly
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable, allow_nan=False)


def emit(payload: Dict[str, Any]) -> None:
    click.echo(dumps(payload))


def fail(error: PairGeometryError) -> None:
    logger.debug('command failed with %s', type(error).__name__, exc_info=error)
    click.echo(dumps(error.to_dict()), err=True)
    click.get_current_context().exit(error.exit_code)


def handles_errors(command: Callable) -> Callable:
    """Turn library errors into a JSON message on stderr and the matching exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except PairGeometryError as e:
            fail(e)

    return wrapper


def load_pair(P_path: str, Q_path: str, decomposition: DecompositionService) -> ProjectionPair:
    return decomposition.validate_pair(load_matrix(P_path), load_matrix(Q_path))


def same_fiber_generic_parts(
    base: ProjectionPair, target: ProjectionPair, decomposition: DecompositionService
) -> Dict[str, GenericPair]:
    """Generic parts of two pairs of one fiber, compressed to the same orthonormal basis."""
    if base.n != target.n:
        raise MismatchedDifference('pairs act on spaces of different dimension', {'n0': base.n, 'n1': target.n})
    spectral = decomposition.spectral
    residual = spectral.operator_norm(base.A - target.A)
    if residual > decomposition.tolerances.certify_tol * max(1.0, spectral.operator_norm(base.A)):
        raise MismatchedDifference('pairs have different differences', {'residual': residual})
    gp0 = decomposition.generic_part(base)
    G = decomposition.three_space_split(base.A).basis_generic
    gp1 = GenericPair(
        hermitian_part(adjoint(G) @ target.P @ G),
        hermitian_part(adjoint(G) @ target.Q @ G),
    )
    decomposition.certify_generic(gp1)
    return {'base': gp0, 'target': gp1}


def output_dir(config: RunConfig, default: Optional[str] = None) -> Path:
    path = config.output or Path(default or '.')
    path.mkdir(parents=True, exist_ok=True)
    return path
