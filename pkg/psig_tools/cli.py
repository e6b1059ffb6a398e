import argparse
import logging
import os
import sys

import requests

from psig_tools import __version__ as psig_tools_version
from psig_tools import exceptions
from psig_tools import utilities
from psig_tools.run_config import COMMANDS, ESTIMATORS, WEIGHTS, RunConfig
from psig_tools.toolkit import PsigToolkit


logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_VALIDATION_ERROR = 1
EXIT_RUNTIME_ERROR = 2


class DefaultHelpParser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write('error: %s\n' % message)
        self.print_help(sys.stderr)
        sys.exit(EXIT_VALIDATION_ERROR)


def _add_shared_arguments(sub_parser):
    sub_parser.add_argument(
        '--config',
        dest='config_file',
        default=None,
        help='Plain-text "key = value" file with run settings; flags override it.',
    )
    sub_parser.add_argument(
        '--verbose', action='store_true', help='Log progress at INFO level to stderr.'
    )
    sub_parser.add_argument('--csv', default=None, help='Write results as CSV to this path.')
    sub_parser.add_argument(
        '--json', default=None, help='Write a JSON summary to this path.'
    )
    sub_parser.add_argument(
        '--model',
        default=None,
        help='Model name, or comma-separated names (linear3, quadratic3, sigmoidal3, mlp3_tanh).',
    )
    sub_parser.add_argument(
        '--input', default=None, help='Comma-separated input x, e.g. 1,1,1.'
    )
    sub_parser.add_argument(
        '--baseline', default=None, help='Comma-separated baseline x\', e.g. 0,0,0.'
    )
    sub_parser.add_argument(
        '--density',
        default=None,
        help=(
            'uniform, triangular, beta:a,b (a, b >= 1), pointmass:s0 or '
            'empirical:<file-or-url>.'
        ),
    )
    sub_parser.add_argument(
        '--steps', type=int, default=None, help='Number of grid nodes m.'
    )
    sub_parser.add_argument(
        '--rule',
        choices=['right', 'midpoint'],
        default=None,
        help='Quadrature nodes: right endpoints k/m (default) or midpoints.',
    )
    sub_parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Random seed; defaults to $PSIG_TOOLS_SEED, then 0.',
    )
    sub_parser.add_argument(
        '--workers',
        type=int,
        default=None,
        help='Threads used for independent trials and repeats.',
    )


def parser(arguments=None):
    main_parser = DefaultHelpParser(prog='psig-tools')

    main_parser.add_argument(
        '-V', '--version', action='version', version='%(prog)s ' + psig_tools_version
    )

    subparsers = main_parser.add_subparsers(help='sub-command help', dest='command')

    attribute = subparsers.add_parser(
        'attribute',
        help='attribute help',
        description='Attribute a model output to its input features.',
    )
    variance = subparsers.add_parser(
        'variance',
        help='variance help',
        description='Compare attribution variance of IG and PS-IG under gradient noise.',
    )
    convergence = subparsers.add_parser(
        'convergence',
        help='convergence help',
        description='Compare deterministic and Monte Carlo PS-IG error against gradient budgets.',
    )
    axioms = subparsers.add_parser(
        'axioms', help='axioms help', description='Run the attribution axiom checks.'
    )
    residual = subparsers.add_parser(
        'residual',
        help='residual help',
        description='Report completeness residuals of path-weighted attributions.',
    )
    for sub_parser in (attribute, variance, convergence, axioms, residual):
        _add_shared_arguments(sub_parser)

    # attribute arguments
    attribute.add_argument(
        '--estimator', choices=ESTIMATORS, default=None, help='Default psig_det.'
    )
    attribute.add_argument(
        '--n-baselines',
        type=int,
        default=None,
        help='Number of sampled baselines for psig_mc.',
    )
    for sub_parser in (attribute, convergence):
        sub_parser.add_argument(
            '--inner-steps',
            type=int,
            default=None,
            help='Gradient evaluations per sampled baseline.',
        )
    for sub_parser in (attribute, residual):
        sub_parser.add_argument(
            '--weight',
            choices=WEIGHTS,
            default=None,
            help='Path weight: one, identity, or cdf (the CDF of --density).',
        )

    # variance arguments
    variance.add_argument('--trials', type=int, default=None, help='Number of noise trials.')
    variance.add_argument(
        '--sigma', type=float, default=None, help='Standard deviation of the gradient noise.'
    )

    # convergence arguments
    convergence.add_argument(
        '--budgets', default=None, help='Comma-separated gradient budgets, ascending.'
    )
    convergence.add_argument(
        '--mc-repeats', type=int, default=None, help='Monte Carlo repeats per budget.'
    )
    convergence.add_argument(
        '--ground-truth-steps',
        type=int,
        default=None,
        help='Grid nodes of the deterministic ground truth.',
    )
    convergence.add_argument(
        '--split',
        choices=['fixed', 'balanced'],
        default=None,
        help='How a Monte Carlo budget is divided between baselines and inner steps.',
    )
    convergence.add_argument(
        '--svg', default=None, help='Write the log-log convergence plot to this path.'
    )

    args = vars(main_parser.parse_args(arguments))

    # Return help messages if no arguments provided
    if not args['command']:
        main_parser.error('No commands/arguments provided!')

    command = getattr(PsigToolkit, args['command'], False)
    if not command or args['command'] not in COMMANDS:
        raise KeyError('%s is not a valid command.' % args['command'])
    return command, args


def _configure_logging(verbose):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )


def resolve_config(args):
    """Build the `RunConfig` from parsed arguments, the optional --config file and the environment."""
    flags = dict(args)
    config_file = flags.pop('config_file', None)
    flags.pop('verbose', None)
    return RunConfig.harmonize(flags, config_file=config_file)


def main(arguments=None):
    _, args = parser(arguments)
    _configure_logging(args.get('verbose'))
    created = []
    try:
        config = resolve_config(args)
        created = [path for path in config.output_paths() if not os.path.exists(path)]
        outcome = getattr(PsigToolkit, config.command)(config)
    except (exceptions.ValidationError, ValueError) as err:
        return _fail(err, created, EXIT_VALIDATION_ERROR)
    except (exceptions.Error, OSError, requests.exceptions.RequestException) as err:
        return _fail(err, created, EXIT_RUNTIME_ERROR)
    print(outcome.summary)
    return EXIT_SUCCESS


def _fail(err, created, status):
    utilities.remove_files(created)
    sys.stderr.write('error: %s\n' % err)
    return status
