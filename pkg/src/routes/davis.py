import click

from src.models.config import RunConfig
from src.models.matrix import matrix_to_dict
from src.routes.common import emit, handles_errors, load_pair
from src.services.davis_service import DavisService
from src.services.decomposition_service import DecompositionService


@click.command('davis')
@click.argument('p_file', type=click.Path(dir_okay=False))
@click.argument('q_file', type=click.Path(dir_okay=False))
@click.pass_obj
@handles_errors
def davis_cmd(config: RunConfig, p_file: str, q_file: str):
    """Davis symmetry, isometric part of A0 and the Davis subspace of the generic part."""
    tolerances = config.tolerances()
    decomposition = DecompositionService(tolerances)
    davis = DavisService(tolerances)

    gp = decomposition.generic_part(load_pair(p_file, q_file, decomposition))
    dv = davis.pair_to_symmetry(gp)
    emit({
        'success': True,
        'm': gp.m,
        'A0': matrix_to_dict(gp.A0),
        'V': matrix_to_dict(dv.V),
        'J0': matrix_to_dict(davis.j0(gp.A0)),
        'subspace': matrix_to_dict(davis.symmetry_to_subspace(dv)),
    })
