import click

from src.models.config import RunConfig
from src.routes.common import emit, handles_errors, load_pair, same_fiber_generic_parts
from src.services.decomposition_service import DecompositionService
from src.services.geodesic_service import GeodesicService

pair_files = [
    click.argument('base_p', type=click.Path(dir_okay=False)),
    click.argument('base_q', type=click.Path(dir_okay=False)),
    click.argument('target_p', type=click.Path(dir_okay=False)),
    click.argument('target_q', type=click.Path(dir_okay=False)),
]


def with_pair_files(command):
    for decorator in reversed(pair_files):
        command = decorator(command)
    return command


@click.command('geodesic')
@with_pair_files
@click.option('--steps', default=16, show_default=True, type=click.IntRange(min=1))
@click.pass_obj
@handles_errors
def geodesic_cmd(config: RunConfig, base_p: str, base_q: str, target_p: str, target_q: str, steps: int):
    """Minimal geodesic between two pairs with the same difference."""
    tolerances = config.tolerances()
    decomposition = DecompositionService(tolerances)
    geodesics = GeodesicService(tolerances)

    parts = same_fiber_generic_parts(
        load_pair(base_p, base_q, decomposition), load_pair(target_p, target_q, decomposition), decomposition,
    )
    geo = geodesics.geodesic(parts['base'], parts['target'])
    report = {'success': True, 'distance': geo.length_per_unit_t, 'steps': steps}
    if config.format == 'csv':
        path = config.output or 'geodesic.csv'
        report['csv'] = str(geodesics.export_csv(geo, steps, path))
    else:
        report['geodesic'] = geo.to_dict()
        report['samples'] = [
            {'t': s['t'], 'distance': s['distance']} for s in geodesics.sample_path(geo, steps)
        ]
    emit(report)


@click.command('distance')
@with_pair_files
@click.pass_obj
@handles_errors
def distance_cmd(config: RunConfig, base_p: str, base_q: str, target_p: str, target_q: str):
    """Geodesic distance between two pairs with the same difference."""
    tolerances = config.tolerances()
    decomposition = DecompositionService(tolerances)
    parts = same_fiber_generic_parts(
        load_pair(base_p, base_q, decomposition), load_pair(target_p, target_q, decomposition), decomposition,
    )
    emit({'success': True, 'distance': GeodesicService(tolerances).geodesic_distance(parts['base'], parts['target'])})
