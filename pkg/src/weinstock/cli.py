import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from weinstock.config import COMMANDS, ExperimentConfig, load_config
from weinstock.errors import InvalidInputError
from weinstock.experiments import EXPERIMENTS
from weinstock.pipeline import EXIT_INVALID_INPUT, run_experiment
from weinstock.weight_parser import parse_weight

__all__ = ['cli_args_to_config', 'default_argparser', 'main', 'parse_weight']

logger = logging.getLogger(__name__)


def default_argparser(description: str = 'Weighted Steklov experiments') -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='weinstock', description=description)
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='command')
    for command in COMMANDS:
        subparser = subparsers.add_parser(command, help=f'Run the {command} experiment.')
        _add_common_arguments(subparser)
    return parser


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    # Every default is None so that unset flags never override config file values.
    parser.add_argument(
        '-w', '--weight', default=None, help='Weight expression, e.g. "1 + 0.2*cos(8*t)", or CSV.'
    )
    parser.add_argument('--n-modes', type=int, default=None, help='Galerkin/truncation order.')
    parser.add_argument('--grid', type=int, default=None, help='Boundary sample count.')
    parser.add_argument('--k-max', type=int, default=None, help='Highest eigenvalue index.')
    parser.add_argument('--alpha', default=None, help='Comma-separated amplitudes.')
    parser.add_argument(
        '--sweep',
        action='append',
        default=None,
        help='Sweep range "N=a..b" (doubling) or "N=a,b,c"; may be repeated.',
    )
    parser.add_argument('--eps', type=float, default=None, help='Sharpness exponent gap.')
    parser.add_argument('--teeth', default=None, help='Comma-separated tooth counts.')
    parser.add_argument('--mesh', default=None, help='FEM mesh as "rings,sectors".')
    parser.add_argument('--samples', type=int, default=None, help='Random ensemble size.')
    parser.add_argument('--seed', type=int, default=None, help='Random seed.')
    parser.add_argument('--tol', type=float, default=None, help='Convergence tolerance.')
    parser.add_argument('--workers', type=int, default=None, help='Threads for sweep points.')
    parser.add_argument(
        '-o', '--out', type=Path, default=None, help='Path to the output directory.'
    )
    parser.add_argument(
        '-c',
        '--config',
        type=Path,
        default=None,
        help='Optional, path to a configuration file (*.json, *.yaml/yml, *.toml).',
    )
    parser.add_argument(
        '--auto-subdir',
        action='store_true',
        help='Optional, store the run in a timestamped subdirectory of the output directory.',
    )
    parser.add_argument(
        '-g', '--save-git', action='store_true', help='Optional, log the git status.'
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Log debug messages.')


def cli_args_to_config(args: list[str]) -> dict[str, Any]:
    """Turn leftover ``--key=value`` / ``--key value`` tokens into config overrides."""
    parsed: dict[str, Any] = {}

    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith('--'):
            raise InvalidInputError(f'Unexpected argument "{token}"')

        key_val = token[2:]
        if '=' in key_val:
            key, val_str = key_val.split('=', 1)
        elif i + 1 < len(args) and not args[i + 1].startswith('--'):
            key, val_str = key_val, args[i + 1]
            i += 1
        else:
            key, val_str = key_val, None

        parsed[key.replace('-', '_')] = _convert_value(val_str)
        i += 1

    return parsed


def _convert_value(val: str | None) -> Any:
    if val is None:
        return True

    match val.lower():
        case 'true':
            return True
        case 'false':
            return False
        case 'none' | 'null':
            return None
        case _:
            pass

    for convert in (int, float):
        try:
            return convert(val)
        except ValueError:
            pass
    return val


def build_config(namespace: argparse.Namespace, extra: list[str]) -> ExperimentConfig:
    """Merge config file, flags and free-form overrides, in that order of precedence."""
    mapping: dict[str, Any] = {}
    if namespace.config is not None:
        mapping.update(load_config(namespace.config))
        logger.info('Loaded configuration from %s', str(namespace.config))

    flags = {
        key: value
        for key, value in vars(namespace).items()
        if key not in ('config', 'auto_subdir', 'save_git', 'verbose') and value is not None
    }
    mapping.update(flags)

    overrides = cli_args_to_config(extra)
    for key, value in overrides.items():
        logger.info('Overriding %s = %r', key, value)
    mapping.update(overrides)
    mapping['command'] = namespace.command
    return ExperimentConfig.from_mapping(mapping)


def main(argv: Sequence[str] | None = None) -> int:
    parser = default_argparser()
    namespace, extra = parser.parse_known_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if namespace.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    try:
        config = build_config(namespace, extra)
    except (ValueError, FileNotFoundError) as ex:
        print(f'weinstock: invalid configuration: {ex}', file=sys.stderr)
        return EXIT_INVALID_INPUT

    experiment = EXPERIMENTS[config.command]()
    return run_experiment(
        experiment,
        config,
        auto_subdirs=namespace.auto_subdir,
        save_git=namespace.save_git,
        logger=logging.getLogger('weinstock'),
    )


if __name__ == '__main__':
    sys.exit(main())
