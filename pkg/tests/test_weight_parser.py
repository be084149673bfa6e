from pathlib import Path

import numpy as np
import pytest
from scipy.special import i0

from weinstock.circle_fourier import grid
from weinstock.errors import InvalidInputError, InvalidWeightError, WeightSyntaxError
from weinstock.weight_parser import evaluate_expression, parse_weight, tokenize


def test_tokenize():
    tokens = tokenize('1 + 0.2*cos(8*t)')
    assert [kind for kind, _, _ in tokens] == [
        'number',
        'op',
        'number',
        'op',
        'name',
        'op',
        'number',
        'op',
        'name',
        'op',
        'end',
    ]
    assert tokens[4] == ('name', 'cos', 8)
    assert tokens[-1] == ('end', '', 16)


def test_constant_weight():
    weight = parse_weight('1', 64)
    assert np.allclose(weight.samples, 1.0)
    assert weight.mean == pytest.approx(1.0)


def test_cosine_weight():
    weight = parse_weight('1 + 0.2*cos(8*t)')
    assert weight.grid_size == 1024
    assert weight.series.coefficient(0) == pytest.approx(1.0)
    assert weight.series.coefficient(8) == pytest.approx(0.1)
    assert weight.series.coefficient(-8) == pytest.approx(0.1)
    assert weight.bandwidth() == 8


def test_sine_and_bare_frequency():
    weight = parse_weight('1.2 + 0.1*cos(t) - 0.05*sin(3*t)', 128)
    assert weight.series.coefficient(1) == pytest.approx(0.05)
    assert weight.series.coefficient(3) == pytest.approx(0.025j)


def test_exp_weight():
    weight = parse_weight('exp(0.1*cos(t))', 256)
    assert weight.mean == pytest.approx(i0(0.1))


def test_arithmetic():
    t = grid(8)
    assert np.allclose(evaluate_expression('2 - -0.5', t), 2.5)
    assert np.allclose(evaluate_expression('(1 + 1) * 3 / 4', t), 1.5)
    assert np.allclose(evaluate_expression('1e-1 * 10', t), 1.0)


def test_non_positive_weight_reports_minimum():
    with pytest.raises(InvalidWeightError) as info:
        parse_weight('1 + 1.5*cos(2*t)')
    assert info.value.minimum == pytest.approx(-0.5)


@pytest.mark.parametrize(
    'text, position',
    [
        ('1 + $', 4),
        ('1 + 0.2*cos(8*t', 15),
        ('1 +', 3),
        ('exp(0.1*exp(cos(t)))', 8),
        ('cos(2.5*t)', 4),
        ('1 + tan(t)', 4),
        ('1 / (cos(t) - cos(t))', 2),
        ('', 0),
    ],
)
def test_syntax_errors(text: str, position: int):
    with pytest.raises(WeightSyntaxError) as info:
        parse_weight(text, 64)
    assert info.value.position == position
    assert f'position {position}' in str(info.value)


def test_coefficient_file(tmp_path: Path):
    path = tmp_path / 'weight.csv'
    path.write_text('n,re,im\n0,1.0,0.0\n3,0.1,0.05\n', encoding='utf-8')
    weight = parse_weight(str(path), 128)
    assert weight.series.coefficient(3) == pytest.approx(0.1 + 0.05j)
    assert weight.series.coefficient(-3) == pytest.approx(0.1 - 0.05j)
    assert weight.mean == pytest.approx(1.0)


def test_coefficient_file_errors(tmp_path: Path):
    with pytest.raises(InvalidInputError):
        parse_weight(str(tmp_path / 'missing.csv'))

    path = tmp_path / 'bad.csv'
    path.write_text('k,re,im\n0,1.0,0.0\n', encoding='utf-8')
    with pytest.raises(InvalidInputError):
        parse_weight(str(path))

    path.write_text('n,re,im\n0,one,0.0\n', encoding='utf-8')
    with pytest.raises(InvalidInputError):
        parse_weight(str(path))
