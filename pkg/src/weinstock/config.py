import json
import re
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Sequence, cast

import toml  # pyright: ignore[reportMissingModuleSource]
import yaml  # pyright: ignore[reportMissingModuleSource]

from weinstock.errors import InvalidInputError

COMMANDS = (
    'spectrum',
    'deficit-sweep',
    'stability',
    'reconstruct',
    'homogenize',
    'instability',
    'sharpness',
)

_RANGE = re.compile(r'^\s*(?P<name>[A-Za-z_]\w*)\s*=\s*(?P<values>.+)$')


def load_config(config_file: Path) -> dict[str, Any]:
    if not config_file.exists():
        raise FileNotFoundError(f'Config file not found: {config_file}')

    text = config_file.read_text(encoding='utf-8')
    suffix = config_file.suffix.lower()
    match suffix:
        case '.yaml' | '.yml':
            config = yaml.safe_load(text)
        case '.json':
            config = json.loads(text)
        case '.toml':
            config = toml.loads(text)
        case _:
            raise InvalidInputError(
                f'Unsupported config file type: {suffix}, supported extensions: '
                '.yaml, .yml, .json, .toml'
            )

    if config is None:
        return {}
    if not isinstance(config, Mapping):
        raise InvalidInputError('Config file must contain a mapping at the top level')

    return dict(cast(Mapping[str, Any], config))


def save_config(config: Mapping[str, Any], config_file: Path) -> None:
    config_file.parent.mkdir(parents=True, exist_ok=True)
    suffix = config_file.suffix.lower()
    match suffix:
        case '.yaml' | '.yml':
            with open(config_file, 'w') as handle:
                yaml.safe_dump(dict(config), handle, sort_keys=False)
        case '.json':
            with open(config_file, 'w') as handle:
                json.dump(config, handle, indent=4, ensure_ascii=False)
        case '.toml':
            with open(config_file, 'w') as handle:
                toml.dump(dict(config), handle)
        case _:
            raise InvalidInputError(
                f'Unsupported config file type: {suffix}, supported extensions: '
                '.yaml, .yml, .json, .toml'
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated parameters of one experiment run.

    ``weight`` is either mini-language text or a path to a coefficient CSV; ``None`` selects
    the command's default weight. ``sweep`` maps a sweep variable to its values.
    """

    command: str
    weight: str | None = None
    n_modes: int | None = None
    grid: int = 1024
    k_max: int = 6
    alpha: tuple[float, ...] = (0.05, 0.1, 0.2, 0.4)
    sweep: tuple[tuple[str, tuple[int, ...]], ...] = ()
    eps: float = 0.5
    teeth: tuple[int, ...] = (8, 16, 32)
    mesh: tuple[int, int] = (16, 128)
    out: Path = Path('output')
    seed: int = 0
    tol: float = 1e-10
    samples: int | None = None
    holder_exponent: float = 1.0
    workers: int = 4

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidInputError(
                f'Unknown command "{self.command}", expected one of {", ".join(COMMANDS)}'
            )
        if not self.tol > 0:
            raise InvalidInputError(f'Tolerance must be positive, got {self.tol}')
        if self.grid < 8:
            raise InvalidInputError(f'Grid size must be >= 8, got {self.grid}')
        if self.n_modes is not None and self.n_modes < 2:
            raise InvalidInputError(f'n_modes must be >= 2, got {self.n_modes}')
        if self.k_max < 1:
            raise InvalidInputError(f'k_max must be >= 1, got {self.k_max}')
        if not self.alpha or any(not a > 0 for a in self.alpha):
            raise InvalidInputError('Amplitudes must form a non-empty list of positive values')
        if any(not values for _, values in self.sweep):
            raise InvalidInputError('Sweep ranges must be non-empty')
        if not self.teeth:
            raise InvalidInputError('Tooth ladder must be non-empty')
        if not 0 < self.eps < 1:
            raise InvalidInputError(f'eps must lie in (0, 1), got {self.eps}')
        if not 0 < self.holder_exponent <= 1:
            raise InvalidInputError('Hoelder exponent must lie in (0, 1]')
        if self.mesh[0] < 2 or self.mesh[1] < 8:
            raise InvalidInputError(f'Mesh needs >= 2 rings and >= 8 sectors, got {self.mesh}')
        if self.samples is not None and self.samples < 1:
            raise InvalidInputError('samples must be positive')
        if self.workers < 1:
            raise InvalidInputError('workers must be positive')

    @classmethod
    def from_mapping(cls, config: Mapping[str, Any]) -> 'ExperimentConfig':
        known = {field.name for field in fields(cls)}
        values: dict[str, Any] = {}
        for raw_key, value in config.items():
            key = raw_key.replace('-', '_')
            if key not in known:
                raise InvalidInputError(f'Unknown configuration key "{raw_key}"')
            if value is None:
                continue
            values[key] = _CONVERTERS.get(key, _identity)(value)
        if 'command' not in values:
            raise InvalidInputError('Configuration must name a command')
        return cls(**values)

    def sweep_values(self, name: str, default: Sequence[int]) -> tuple[int, ...]:
        for key, values in self.sweep:
            if key == name:
                return values
        return tuple(default)

    def to_mapping(self) -> dict[str, Any]:
        """Plain mapping that round-trips through :meth:`from_mapping` and the config files."""
        mapping = asdict(self)
        mapping['alpha'] = list(self.alpha)
        mapping['teeth'] = list(self.teeth)
        mapping['mesh'] = list(self.mesh)
        mapping['sweep'] = {name: list(values) for name, values in self.sweep}
        mapping['out'] = str(self.out)
        return mapping


def parse_sweep(text: str) -> tuple[str, tuple[int, ...]]:
    """Parse ``N=a..b`` (doubling from ``a`` up to ``b``) or ``N=a,b,c``."""
    match = _RANGE.match(text)
    if match is None:
        raise InvalidInputError(f'Sweep must look like "N=a..b" or "N=a,b,c", got "{text}"')
    name, spec = match['name'], match['values'].strip()
    try:
        if '..' in spec:
            start_text, stop_text = spec.split('..', 1)
            bounds = (int(start_text), int(stop_text))
            listed = None
        else:
            bounds = None
            listed = [int(value) for value in spec.split(',') if value.strip()]
    except ValueError as ex:
        raise InvalidInputError(f'Sweep values must be integers, got "{text}"') from ex

    values: list[int] = []
    if bounds is not None:
        current, stop = bounds
        while 0 < current <= stop:
            values.append(current)
            current *= 2
    else:
        values = listed or []
    if not values:
        raise InvalidInputError(f'Empty sweep range "{text}"')
    return name, tuple(values)


def _identity(value: Any) -> Any:
    return value


def _float_list(value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        return tuple(float(item) for item in value.split(',') if item.strip())
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(item) for item in cast(Sequence[Any], value))


def _int_list(value: Any) -> tuple[int, ...]:
    if isinstance(value, str):
        return tuple(int(item) for item in value.split(',') if item.strip())
    if isinstance(value, int):
        return (value,)
    return tuple(int(item) for item in cast(Sequence[Any], value))


def _mesh(value: Any) -> tuple[int, int]:
    levels = _int_list(value)
    if len(levels) != 2:
        raise InvalidInputError(f'Mesh must be given as "rings,sectors", got {value!r}')
    return levels[0], levels[1]


def _sweep(value: Any) -> tuple[tuple[str, tuple[int, ...]], ...]:
    if isinstance(value, str):
        return (parse_sweep(value),)
    if isinstance(value, Mapping):
        items = cast(Mapping[str, Any], value).items()
        return tuple((str(name), _int_list(values)) for name, values in items)
    return tuple(parse_sweep(str(item)) for item in cast(Sequence[Any], value))


def _optional_int(value: Any) -> int | None:
    return None if value is None else int(value)


_CONVERTERS: dict[str, Any] = {
    'command': str,
    'weight': str,
    'n_modes': _optional_int,
    'grid': int,
    'k_max': int,
    'alpha': _float_list,
    'sweep': _sweep,
    'eps': float,
    'teeth': _int_list,
    'mesh': _mesh,
    'out': Path,
    'seed': int,
    'tol': float,
    'samples': _optional_int,
    'holder_exponent': float,
    'workers': int,
}
