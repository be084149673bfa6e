import datetime
import json
import sys
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from logging import Logger, getLogger
from pathlib import Path
from typing import Any, ClassVar

import numpy as np
from coolname import generate_slug  # pyright: ignore[reportMissingTypeStubs]

from weinstock.config import ExperimentConfig, save_config
from weinstock.errors import InvalidInputError, NumericalError
from weinstock.git import save_git_status
from weinstock.reports import Table, to_jsonable, write_error, write_report, write_table

EXIT_SUCCESS = 0
EXIT_ASSERTION_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL_FAILURE = 3

_CONFIG_ECHO = 'config.yaml'
_REPORT = 'report.json'
_ERROR = 'error.json'


@dataclass
class ExperimentResult:
    """Tables written as ``<name>.csv``, summary values and the brackets that were checked."""

    tables: dict[str, Table] = field(default_factory=dict[str, Table])
    results: dict[str, Any] = field(default_factory=dict[str, Any])
    assertions: dict[str, bool] = field(default_factory=dict[str, bool])


class Experiment(ABC):
    """One subcommand of the command-line driver.

    Subclasses set ``name`` and implement ``run``. Artifacts other than the tables (curves,
    meshes, coefficient files) may be written directly into ``output_dir``.
    """

    name: ClassVar[str]
    default_weight: ClassVar[str | None] = None

    @abstractmethod
    def run(
        self, config: ExperimentConfig, output_dir: Path, logger: Logger
    ) -> ExperimentResult:
        raise NotImplementedError()


def run_experiment(
    experiment: Experiment,
    config: ExperimentConfig,
    *,
    auto_subdirs: bool = False,
    save_git: bool = False,
    logger: Logger = getLogger(),
) -> int:
    """Run an experiment and write its report; returns the process exit status.

    Parameters
    ----------
    experiment : Experiment
        The subcommand to run.
    config : ExperimentConfig
        Validated configuration; it is echoed to ``config.yaml`` and into the report.
    auto_subdirs : bool, optional
        When true, stores the run in a subdirectory ``YYYYMMdd-HHmmss-{slug1}-{slug2}`` of
        ``config.out``.
    save_git : bool, optional
        When true, copies files with uncommitted changes to a ``git`` subdirectory.
    logger : Logger, optional
        Logger used for progress messages.

    Returns
    -------
    int
        0 when every asserted bracket holds, 1 when one fails, 2 for invalid input and 3
        for numerical failures. Errors are written to ``error.json`` and stderr.
    """
    output_dir = _get_output_subdir(config.out) if auto_subdirs else config.out
    output_dir.mkdir(parents=True, exist_ok=True)
    save_config(config.to_mapping(), output_dir / _CONFIG_ECHO)
    if save_git:
        save_git_status(output_dir)

    logger.info('Starting experiment %s in %s', experiment.name, str(output_dir))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', RuntimeWarning)
        try:
            result = experiment.run(config, output_dir, logger)
        except (NumericalError, np.linalg.LinAlgError) as ex:
            return _fail(output_dir, ex, EXIT_NUMERICAL_FAILURE, logger)
        except (InvalidInputError, ValueError) as ex:
            return _fail(output_dir, ex, EXIT_INVALID_INPUT, logger)

    messages = list(dict.fromkeys(str(item.message) for item in caught))
    for message in messages:
        logger.warning('%s', message)

    for name, table in result.tables.items():
        write_table(table, output_dir / f'{name}.csv')
    write_report(
        output_dir / _REPORT,
        config=config.to_mapping(),
        results=result.results,
        assertions=result.assertions,
        seed=config.seed,
        warnings=messages,
    )

    failed = [name for name, holds in result.assertions.items() if not holds]
    if failed:
        logger.warning('Experiment %s: failed assertions %s', experiment.name, ', '.join(failed))
        return EXIT_ASSERTION_FAILED
    logger.info('Finished experiment %s', experiment.name)
    return EXIT_SUCCESS


def _get_output_subdir(output_dir: Path) -> Path:
    timestamp = datetime.datetime.now().strftime('%Y%m%d-%H%M%S')
    slug = generate_slug(2)  # e.g. "mottled-crab"
    return output_dir / f'{timestamp}-{slug}'


def _fail(output_dir: Path, error: Exception, status: int, logger: Logger) -> int:
    details: dict[str, Any] = {'exit_status': status}
    for attribute in ('minimum', 'position', 'measured', 'residual'):
        if getattr(error, attribute, None) is not None:
            details[attribute] = getattr(error, attribute)
    write_error(output_dir / _ERROR, error, details)
    record = {'type': type(error).__name__, 'message': str(error), 'details': details}
    print(json.dumps(to_jsonable(record)), file=sys.stderr)
    logger.error('%s: %s', type(error).__name__, error)
    return status
