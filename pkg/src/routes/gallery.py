import logging
from typing import Any, Dict, List, Tuple

import click
import numpy as np

from src.models.config import RunConfig
from src.models.errors import InvalidParameter
from src.models.matrix import save_matrix
from src.models.pairs import ProjectionPair
from src.routes.common import dumps, emit, handles_errors, output_dir
from src.services.gallery_service import GalleryService

logger = logging.getLogger(__name__)


def parse_index_set(text: str) -> List[int]:
    """'0:3' -> [0, 1, 2]; '0,2,5' -> [0, 2, 5]."""
    try:
        if ':' in text:
            start, stop = text.split(':', 1)
            return list(range(int(start), int(stop)))
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise InvalidParameter(f'cannot parse index set {text!r}', {'value': text})


def parse_points(values: Tuple[str, ...]) -> List[complex]:
    try:
        return [complex(value.replace(' ', '')) for value in values]
    except ValueError:
        raise InvalidParameter('disk points must be numbers such as 0.3 or 0.1+0.2j', {'values': list(values)})


def write_pair(config: RunConfig, pair: ProjectionPair, metadata: Dict[str, Any]) -> None:
    directory = output_dir(config)
    save_matrix(pair.P, directory / 'P.json')
    save_matrix(pair.Q, directory / 'Q.json')
    (directory / 'metadata.json').write_text(dumps(metadata))
    logger.info('wrote pair of size %d to %s', pair.n, directory)
    emit({'success': True, 'directory': str(directory), **metadata})


def describe(gallery: GalleryService, pair: ProjectionPair, name: str, params: Dict[str, Any]) -> Dict[str, Any]:
    split = gallery.decomposition.three_space_split(pair.A)
    metadata = {'generator': name, 'params': params, 'n': pair.n, 'dims': split.dims}
    if split.dims['generic']:
        gp = gallery.decomposition.generic_part(pair)
        eigenvalues = gallery.spectral.eigh(gp.A0).eigenvalues
        metadata['generic_eigenvalues'] = [float(x) for x in eigenvalues]
        metadata['multiplicities'] = [len(g) for g in gallery.spectral.clusters(eigenvalues[eigenvalues > 0])]
    return metadata


def gallery_service(config: RunConfig) -> GalleryService:
    return GalleryService(config.tolerances())


@click.group('gallery')
def gallery_group():
    """Write example pairs as P.json, Q.json and metadata.json into --out."""


@gallery_group.command('mt')
@click.option('--n', 'n', required=True, type=int)
@click.option('--phases', multiple=True, type=float, help='One real angle per grid point.')
@click.pass_obj
@handles_errors
def mt_cmd(config: RunConfig, n: int, phases: Tuple[float, ...]):
    """Multiplication by the variable on a symmetric grid."""
    gallery = gallery_service(config)
    pair = gallery.discretized_mt(n, list(phases) or None)
    write_pair(config, pair, describe(gallery, pair, 'mt', {'n': n, 'phases': list(phases)}))


@gallery_group.command('fourier')
@click.option('--n', 'n', required=True, type=int)
@click.option('--I', 'I', required=True, help="Index set such as '0:3' or '0,1,2'.")
@click.option('--J', 'J', required=True, help="Index set such as '0:3' or '0,1,2'.")
@click.pass_obj
@handles_errors
def fourier_cmd(config: RunConfig, n: int, I: str, J: str):
    """Coordinate projection on I and Fourier-conjugated projection on J."""
    gallery = gallery_service(config)
    index_I, index_J = parse_index_set(I), parse_index_set(J)
    pair = gallery.fourier_pair(n, index_I, index_J)
    write_pair(config, pair, describe(gallery, pair, 'fourier', {'n': n, 'I': index_I, 'J': index_J}))


@gallery_group.command('blaschke')
@click.option('--a', 'a', required=True, multiple=True)
@click.option('--b', 'b', required=True, multiple=True)
@click.pass_obj
@handles_errors
def blaschke_cmd(config: RunConfig, a: Tuple[str, ...], b: Tuple[str, ...]):
    """Generic pair of the model space spanned by the kernels at a and b."""
    gallery = gallery_service(config)
    points_a, points_b = parse_points(a), parse_points(b)
    pair = gallery.blaschke_pair(points_a, points_b).as_projection_pair()
    params = {'a': [[z.real, z.imag] for z in points_a], 'b': [[z.real, z.imag] for z in points_b]}
    write_pair(config, pair, describe(gallery, pair, 'blaschke', params))


@gallery_group.command('idempotent')
@click.option('--B', 'B', required=True, multiple=True, type=float, help='Diagonal of B, repeat per entry.')
@click.pass_obj
@handles_errors
def idempotent_cmd(config: RunConfig, B: Tuple[float, ...]):
    """Range projections of the idempotent [[1, B], [0, 0]] and its adjoint."""
    gallery = gallery_service(config)
    gp, report = gallery.idempotent_pair(np.diag(B), seed=config.seed)
    pair = gp.as_projection_pair()
    metadata = describe(gallery, pair, 'idempotent', {'B': list(B)})
    metadata['commutant'] = report
    write_pair(config, pair, metadata)


@gallery_group.command('theta')
@click.option('--theta', 'thetas', required=True, multiple=True, type=float)
@click.pass_obj
@handles_errors
def theta_cmd(config: RunConfig, thetas: Tuple[float, ...]):
    """Halmos model pair for the given angles."""
    gallery = gallery_service(config)
    pair = gallery.theta_pair(thetas).as_projection_pair()
    write_pair(config, pair, describe(gallery, pair, 'theta', {'theta': list(thetas)}))


@gallery_group.command('random')
@click.option('--m', 'm', required=True, type=int)
@click.pass_obj
@handles_errors
def random_cmd(config: RunConfig, m: int):
    """Random generic pair with a Haar-distributed frame, seeded by --seed."""
    gallery = gallery_service(config)
    pair = gallery.random_generic_pair(m, config.seed).as_projection_pair()
    write_pair(config, pair, describe(gallery, pair, 'random', {'m': m, 'seed': config.seed}))
