import click

from src.models.config import RunConfig
from src.routes.common import emit, handles_errors, load_pair
from src.services.decomposition_service import DecompositionService
from src.services.orbit_service import OrbitService


@click.command('decompose')
@click.argument('p_file', type=click.Path(dir_okay=False))
@click.argument('q_file', type=click.Path(dir_okay=False))
@click.option('--bases', is_flag=True, help='Include the orthonormal bases of the split.')
@click.pass_obj
@handles_errors
def decompose_cmd(config: RunConfig, p_file: str, q_file: str, bases: bool):
    """Three-space split, principal angles and closed-range report of a pair."""
    tolerances = config.tolerances()
    decomposition = DecompositionService(tolerances)
    orbit = OrbitService(tolerances)

    pair = load_pair(p_file, q_file, decomposition)
    split = decomposition.three_space_split(pair.A)
    report = {
        'success': True,
        'n': pair.n,
        'dims': split.dims,
        'principal_angles': [float(x) for x in decomposition.principal_angles(pair)],
        'friedrichs_cos': decomposition.friedrichs_cos(pair),
        'single_element_fiber': decomposition.is_symmetry_difference(pair),
    }
    if bases:
        report['split'] = split.to_dict()
    if split.dims['generic']:
        frame = decomposition.halmos_frame(decomposition.generic_part(pair))
        report['gamma'] = [float(g) for g in frame.gamma]
    else:
        report['gamma'] = []
        report['note'] = (
            'D_A is a single element' if report['single_element_fiber'] else 'no generic part'
        )
    report['closed_range'] = orbit.closed_range_report(pair.A)
    emit(report)
