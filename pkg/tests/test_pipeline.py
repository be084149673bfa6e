import json
import warnings
from logging import Logger
from pathlib import Path

import numpy as np
import pytest

from weinstock.config import ExperimentConfig
from weinstock.errors import ConvergenceError, InvalidWeightError
from weinstock.pipeline import (
    EXIT_ASSERTION_FAILED,
    EXIT_INVALID_INPUT,
    EXIT_NUMERICAL_FAILURE,
    EXIT_SUCCESS,
    Experiment,
    ExperimentResult,
    run_experiment,
)
from weinstock.reports import Table


class TableExperiment(Experiment):
    name = 'table'

    def __init__(self, holds: bool = True) -> None:
        self.holds = holds

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        table = Table(('k', 'value'))
        table.append(0, 0.5)
        table.append(1, 1 / 3)
        warnings.warn('tail energy too large', RuntimeWarning)
        return ExperimentResult(
            tables={'values': table},
            results={'total': 0.5 + 1 / 3},
            assertions={'holds': self.holds},
        )


class FailingExperiment(Experiment):
    name = 'failing'

    def __init__(self, error: Exception) -> None:
        self.error = error

    def run(self, config: ExperimentConfig, output_dir: Path, logger: Logger) -> ExperimentResult:
        raise self.error


def make_config(tmp_path: Path) -> ExperimentConfig:
    return ExperimentConfig(command='spectrum', out=tmp_path / 'output', seed=7)


def test_run_experiment_writes_report(tmp_path: Path):
    config = make_config(tmp_path)
    assert run_experiment(TableExperiment(), config) == EXIT_SUCCESS

    output_dir = tmp_path / 'output'
    assert (output_dir / 'config.yaml').exists()
    assert (output_dir / 'values.csv').read_text(encoding='utf-8') == (
        'k,value\n0,0.5\n1,0.333333333333333\n'
    )
    report = json.loads((output_dir / 'report.json').read_text(encoding='utf-8'))
    assert report['seed'] == 7
    assert report['config']['command'] == 'spectrum'
    assert report['assertions'] == {'holds': True}
    assert report['warnings'] == ['tail energy too large']
    assert 'numpy' in report['versions']
    assert 'timestamp' in report


def test_csv_bodies_are_reproducible(tmp_path: Path):
    first = ExperimentConfig(command='spectrum', out=tmp_path / 'first')
    second = ExperimentConfig(command='spectrum', out=tmp_path / 'second')
    run_experiment(TableExperiment(), first)
    run_experiment(TableExperiment(), second)
    assert (tmp_path / 'first' / 'values.csv').read_bytes() == (
        tmp_path / 'second' / 'values.csv'
    ).read_bytes()


def test_failed_assertion(tmp_path: Path):
    assert run_experiment(TableExperiment(holds=False), make_config(tmp_path)) == (
        EXIT_ASSERTION_FAILED
    )
    assert (tmp_path / 'output' / 'report.json').exists()


def test_invalid_input(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    error = InvalidWeightError('Boundary weight must be strictly positive', minimum=-0.5)
    status = run_experiment(FailingExperiment(error), make_config(tmp_path))
    assert status == EXIT_INVALID_INPUT

    record = json.loads((tmp_path / 'output' / 'error.json').read_text(encoding='utf-8'))
    assert record['type'] == 'InvalidWeightError'
    assert record['details']['minimum'] == -0.5
    assert record['details']['exit_status'] == EXIT_INVALID_INPUT
    assert json.loads(capsys.readouterr().err.splitlines()[0])['type'] == 'InvalidWeightError'
    assert not (tmp_path / 'output' / 'report.json').exists()


def test_numerical_failure(tmp_path: Path):
    error = ConvergenceError('Moebius normalization did not converge', residual=1e-3)
    status = run_experiment(FailingExperiment(error), make_config(tmp_path))
    assert status == EXIT_NUMERICAL_FAILURE
    record = json.loads((tmp_path / 'output' / 'error.json').read_text(encoding='utf-8'))
    assert record['details']['residual'] == 1e-3


def test_linear_algebra_failure_is_numerical(tmp_path: Path):
    error = np.linalg.LinAlgError('Matrix is not positive definite')
    status = run_experiment(FailingExperiment(error), make_config(tmp_path))
    assert status == EXIT_NUMERICAL_FAILURE
    record = json.loads((tmp_path / 'output' / 'error.json').read_text(encoding='utf-8'))
    assert record['type'] == 'LinAlgError'


def test_auto_subdirs(tmp_path: Path):
    run_experiment(TableExperiment(), make_config(tmp_path), auto_subdirs=True)
    (run_dir,) = list((tmp_path / 'output').iterdir())
    assert (run_dir / 'report.json').exists()
    assert len(run_dir.name.split('-')) >= 4
