import argparse
import json
import sys

from mpmath import mp

from nsx.commands.all_commands import all_group
from nsx.commands.asymptotics_commands import asymptotics_group
from nsx.commands.contour_commands import contour_group
from nsx.commands.pade_commands import pade_group
from nsx.commands.pipeline import Pipeline
from nsx.commands.registry import CommandRegistry
from nsx.commands.surface_commands import surface_group
from nsx.config import config, get_config
from nsx.models.problem_config import load_problem_config
from nsx.services.export_service import export_service
from nsx.utils.errors import NsxError, NumericalFailure
from nsx.utils.latency_monitor import monitor
from nsx.utils.logger import logger

registry = CommandRegistry()
for group in (contour_group, pade_group, surface_group, asymptotics_group, all_group):
    registry.register_group(group)


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        prog='nsx',
        description='Diagonal Pade approximants of algebraic germs, their Stahl contours '
                    'and the strong asymptotics of the denominators.'
    )
    parser.add_argument('command', choices=registry.names)
    parser.add_argument('--config', required=True, help='JSON problem file')
    parser.add_argument('--out', default=None, help='output directory')
    parser.add_argument('--precision', type=int, default=None, help='working precision in bits')
    parser.add_argument('--epsilon', type=float, default=None, help='epsilon of the N_epsilon index set')
    parser.add_argument('--env', choices=sorted(config), default=None, help='configuration profile')
    return parser.parse_args(argv)


def build_report(command, pipeline):
    return {
        'command': command,
        'config': pipeline.problem.echo(),
        'completed': list(pipeline.completed),
        'diagnostics': pipeline.diagnostics
    }


def log_timings(stats):
    for stage, row in stats['stages'].items():
        logger.info(f'{stage}: avg {row["avg"]:.2f}ms max {row["max"]:.2f}ms over {row["count"]} calls')


def run(command, problem, settings, out_dir):
    """Execute one command and write its files; nothing is written when it fails."""
    handler = registry.get(command)
    pipeline = Pipeline(problem, settings)
    logger.info(f'Running {command} at {problem.precision_bits} bits')
    try:
        with mp.workprec(problem.precision_bits):
            handler(pipeline)
            pipeline.bundle.add_json('report.json', build_report(command, pipeline))
    except (ArithmeticError, mp.NoConvergence) as e:
        raise NumericalFailure(str(e) or e.__class__.__name__, stage=command, cause=e.__class__.__name__)
    return export_service.commit(pipeline.bundle, out_dir)


def main(argv=None):
    args = parse_args(argv)
    settings = get_config(args.env)
    monitor.reset()
    try:
        defaults = {'precision_bits': settings.DEFAULT_PRECISION_BITS, 'epsilon': settings.EPSILON,
                    'tolerance': settings.DEFAULT_TOLERANCE}
        problem = load_problem_config(args.config, defaults, precision_bits=args.precision, epsilon=args.epsilon)
        out_dir = args.out or problem.output_dir or settings.OUTPUT_DIR
        paths = run(args.command, problem, settings, out_dir)
    except NsxError as e:
        logger.error(f'{args.command} failed with {e.__class__.__name__}: {e} {e.context}')
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return e.exit_code
    timings = monitor.get_stats()
    log_timings(timings)
    print(json.dumps({'success': True, 'command': args.command, 'files': [str(p) for p in paths],
                      'timings': timings}))
    return 0


if __name__ == '__main__':
    sys.exit(main())
