import os
import sys
# DON'T CHANGE THIS !!!
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import logging
from pathlib import Path
from typing import Optional

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from src.models.config import RunConfig
from src.models.errors import InvalidInput
from src.routes.check import check_cmd
from src.routes.common import fail
from src.routes.davis import davis_cmd
from src.routes.decompose import decompose_cmd
from src.routes.gallery import gallery_group
from src.routes.geodesic import distance_cmd, geodesic_cmd

load_dotenv()


@click.group()
@click.option('--rank-tol', envvar='PAIRGEOM_RANK_TOL', default=1e-8, show_default=True, type=float,
              help='Relative rank threshold.')
@click.option('--gap-tol', envvar='PAIRGEOM_GAP_TOL', default=1e-8, show_default=True, type=float,
              help='Relative spectral gap for sign and logarithm.')
@click.option('--seed', envvar='PAIRGEOM_SEED', default=0, show_default=True, type=int)
@click.option('--out', 'output', type=click.Path(path_type=Path), default=None,
              help='Output file (geodesic CSV) or directory (gallery).')
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json', show_default=True)
@click.option('-v', '--verbose', count=True, help='-v for INFO, -vv for DEBUG on stderr.')
@click.pass_context
def cli(ctx: click.Context, rank_tol: float, gap_tol: float, seed: int,
        output: Optional[Path], fmt: str, verbose: int):
    """Geometry of pairs of orthogonal projections with a fixed difference."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    try:
        ctx.obj = RunConfig(rank_tol=rank_tol, gap_tol=gap_tol, seed=seed, output=output, format=fmt)
    except ValidationError as e:
        fail(InvalidInput('invalid run configuration', {'errors': [err['msg'] for err in e.errors()]}))


# Register commands
cli.add_command(decompose_cmd)
cli.add_command(davis_cmd)
cli.add_command(geodesic_cmd)
cli.add_command(distance_cmd)
cli.add_command(check_cmd)
cli.add_command(gallery_group)


if __name__ == '__main__':
    cli()
