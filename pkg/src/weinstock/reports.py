# pyright: reportUnknownMemberType=false, reportUnknownVariableType=false
"""CSV tables and JSON summaries written by the experiments.

CSV bodies are deterministic: floats are written with ``'.15g'`` and rows keep the order in
which they were produced. Timestamps and versions only appear in the JSON summary.
"""

import csv
import datetime
import json
import math
import platform
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from weinstock.conformal import ConformalMap
from weinstock.constructions import StarBoundary
from weinstock.git import git_provenance
from weinstock.steklov_fem import Mesh

FLOAT_FORMAT = '.15g'
_VERSIONED_PACKAGES = ('weinstock', 'numpy', 'scipy', 'shapely')


@dataclass
class Table:
    header: Sequence[str]
    rows: list[Sequence[Any]] = field(default_factory=list[Sequence[Any]])

    def append(self, *row: Any) -> None:
        if len(row) != len(self.header):
            raise ValueError(f'Row has {len(row)} cells, header has {len(self.header)}')
        self.rows.append(row)

    def column(self, name: str) -> list[Any]:
        index = list(self.header).index(name)
        return [row[index] for row in self.rows]


def format_cell(value: Any) -> str:
    match value:
        case None:
            return ''
        case bool():
            return 'true' if value else 'false'
        case int() | np.integer():
            return str(int(value))
        case float() | np.floating():
            return format(float(value), FLOAT_FORMAT)
        case _:
            return str(value)


def write_table(table: Table, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(table.header)
        writer.writerows([format_cell(cell) for cell in row] for row in table.rows)
    return path


def write_points(points: ArrayLike, path: Path, header: Sequence[str] = ('x', 'y')) -> Path:
    table = Table(header)
    for row in np.asarray(points, dtype=np.float64):
        table.append(*(float(value) for value in row))
    return write_table(table, path)


def export_curve(curve: ArrayLike, path: Path) -> Path:
    return write_points(curve, path)


def export_map(conformal_map: ConformalMap, path: Path) -> Path:
    table = Table(('index', 're', 'im'))
    for index, value in enumerate(conformal_map.map_coeffs):
        table.append(index, float(value.real), float(value.imag))
    return write_table(table, path)


def export_boundary(boundary: StarBoundary, path: Path) -> Path:
    return write_points(boundary.points, path)


def export_mesh(mesh: Mesh, directory: Path, stem: str = 'mesh') -> tuple[Path, Path]:
    nodes = write_points(mesh.nodes, directory / f'{stem}_nodes.csv')
    triangles = Table(('a', 'b', 'c'))
    for a, b, c in mesh.triangles:
        triangles.append(int(a), int(b), int(c))
    return nodes, write_table(triangles, directory / f'{stem}_triangles.csv')


def versions() -> dict[str, Any]:
    found: dict[str, Any] = {'python': platform.python_version()}
    for package in _VERSIONED_PACKAGES:
        try:
            found[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            found[package] = None
    found['git'] = git_provenance()
    return found


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays, paths and non-finite floats for ``json.dump``."""
    match value:
        case Mapping():
            items = value.items()
            return {str(k): to_jsonable(v) for k, v in items}
        case list() | tuple():
            return [to_jsonable(v) for v in value]
        case np.ndarray():
            return to_jsonable(value.tolist())
        case bool() | np.bool_():
            return bool(value)
        case int() | np.integer():
            return int(value)
        case float() | np.floating():
            number = float(value)
            return number if math.isfinite(number) else str(number)
        case complex() | np.complexfloating():
            return {'re': to_jsonable(value.real), 'im': to_jsonable(value.imag)}
        case Path():
            return str(value)
        case _:
            return value


def write_json(content: Mapping[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(to_jsonable(content), handle, indent=4, ensure_ascii=False)
    return path


def write_report(
    path: Path,
    *,
    config: Mapping[str, Any],
    results: Mapping[str, Any],
    assertions: Mapping[str, bool],
    seed: int,
    warnings: Sequence[str] = (),
) -> Path:
    return write_json(
        {
            'config': config,
            'results': results,
            'assertions': assertions,
            'seed': seed,
            'warnings': list(warnings),
            'versions': versions(),
            'timestamp': datetime.datetime.now().isoformat(timespec='seconds'),
        },
        path,
    )


def write_error(
    path: Path, error: BaseException, details: Mapping[str, Any] | None = None
) -> Path:
    return write_json(
        {
            'type': type(error).__name__,
            'message': str(error),
            'details': dict(details or {}),
        },
        path,
    )
