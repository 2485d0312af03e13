import click

from src.models.config import RunConfig
from src.routes.common import emit, handles_errors, load_pair
from src.services.check_service import CheckService
from src.services.decomposition_service import DecompositionService


@click.command('check')
@click.argument('p_file', type=click.Path(dir_okay=False))
@click.argument('q_file', type=click.Path(dir_okay=False))
@click.option('--trials', default=5, show_default=True, type=click.IntRange(min=1))
@click.option('--quiet', is_flag=True, help='Hide the progress bar.')
@click.pass_context
@handles_errors
def check_cmd(ctx: click.Context, p_file: str, q_file: str, trials: int, quiet: bool):
    """Run the invariant battery on a pair; exit 1 when any invariant fails."""
    config: RunConfig = ctx.obj
    tolerances = config.tolerances()
    pair = load_pair(p_file, q_file, DecompositionService(tolerances))
    report = CheckService(tolerances).run(pair, trials=trials, seed=config.seed, progress=not quiet)
    emit(report)
    if not report['success']:
        ctx.exit(1)
