"""File formats.

* space: JSON, see :func:`archk.space.validate_space`
* kernel spec: JSON, see :meth:`archk.kernel.KernelSpec.from_dict`, with an
  optional top-level ``noise`` (GP noise variance)
* config: JSON object ``id -> value``
* dataset: CSV with a header row of dimension ids, optionally followed by a
  ``y`` column; an empty cell means "unassigned"; ``#`` lines are comments
* matrix: CSV, full matrix, row-major, ``%.17g``; lines starting with ``#``
  are comments (used for the run manifest)
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np

from archk.errors import DomainError, SchemaError
from archk.kernel import KernelSpec
from archk.space import Categorical, Config, ParamSpace, validate_config, validate_space

Y_COLUMN = "y"


def load_json(path: str | Path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def load_space(path: str | Path) -> ParamSpace:
    return validate_space(load_json(path))


def load_kernel_spec(path: str | Path, space: ParamSpace) -> tuple[KernelSpec, float | None]:
    raw = load_json(path)
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{path}: kernel spec must be a JSON object")
    raw = dict(raw)
    noise = raw.pop("noise", None)
    # written by `archk tune`; informational only
    raw.pop("lml", None)
    raw.pop("manifest", None)
    if noise is not None and (isinstance(noise, bool) or not isinstance(noise, (int, float))):
        raise SchemaError(f"{path}: 'noise' must be a number")
    return KernelSpec.from_dict(space, raw), noise


def load_config(path: str | Path, space: ParamSpace) -> Config:
    raw = load_json(path)
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{path}: config must be a JSON object")
    return validate_config(space, raw)


def _parse_cell(space: ParamSpace, name: str, cell: str):
    if cell == "":
        return None
    dim = space.dim(name)
    if isinstance(dim, Categorical):
        for v in dim.values:
            if str(v) == cell:
                return v
        return cell  # rejected later as UnknownCategory
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(f"{name}: {cell!r} is not a number") from None


def parse_dataset(text: str, space: ParamSpace, require_y: bool = False):
    """Parse dataset CSV text into ``(configs, y)``; ``y`` is ``None`` when
    the file has no ``y`` column.  All invalid rows are reported together,
    by line number."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise SchemaError("dataset is empty (no header row)")
    header = rows[0]
    has_y = bool(header) and header[-1] == Y_COLUMN
    names = header[:-1] if has_y else header
    if sorted(names) != sorted(space.ids) or len(set(names)) != len(names):
        raise SchemaError(f"dataset header {header} must list each dimension id once ({list(space.ids)})")
    if require_y and not has_y:
        raise SchemaError("dataset needs a final 'y' column")

    configs, ys, problems = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):  # counts non-comment lines
        if not row:
            continue
        if len(row) != len(header):
            problems.append(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
            continue
        try:
            raw = {n: _parse_cell(space, n, c) for n, c in zip(names, row)}
            configs.append(validate_config(space, raw))
            if has_y:
                y = float(row[-1])
                if not math.isfinite(y):
                    raise DomainError(f"target {row[-1]!r} is not finite")
                ys.append(y)
        except (DomainError, ValueError) as exc:
            problems.append(f"line {lineno}: {type(exc).__name__}: {exc}")
    if problems:
        raise DomainError("invalid rows in dataset:\n  " + "\n  ".join(problems))
    return configs, (np.array(ys) if has_y else None)


def read_dataset(path: str | Path, space: ParamSpace, require_y: bool = False):
    return parse_dataset(Path(path).read_text(), space, require_y)


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_dataset(space: ParamSpace, configs: Sequence[Mapping], y: Sequence[float] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(space.ids) + ([Y_COLUMN] if y is not None else []))
    for k, c in enumerate(configs):
        row = [_format_value(c.get(i)) for i in space.ids]
        if y is not None:
            row.append(repr(float(y[k])))
        writer.writerow(row)
    return buf.getvalue()


def format_matrix(K: np.ndarray, manifest: Mapping | None = None) -> str:
    lines = []
    if manifest is not None:
        lines.append("# manifest: " + json.dumps(manifest, sort_keys=True, separators=(",", ":")))
    for row in np.atleast_2d(K):
        lines.append(",".join("%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise SchemaError(f"line {lineno}: not a row of numbers") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise SchemaError(f"matrix must be square and non-empty; got {len(rows)} rows")
    return np.array(rows)


def read_matrix(path: str | Path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())
