"""Reading the solver's CSV and JSON result documents.

Both document flavors reduce to the same thing: named float columns of a
common length, a flat string metadata mapping, and an optional list of
refined (n, E_n) eigenvalue pairs.  CSV files carry metadata as leading
``# key = value`` lines; JSON files carry the same content structurally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import RecipeError, SchemaMismatch

__all__ = ["Table", "load_table"]


@dataclass(frozen=True)
class Table:
    """One loaded result document.

    Fields
    ------
    path : Path
        Where the document was read from, for error messages.
    metadata : mapping of str to str
        Flat key/value annotations (potential, config echo, and so on).
    columns : mapping of str to ndarray
        Named float columns, all of one length.
    eigenvalues : tuple of (int, float)
        Refined (n, E_n) pairs if the document carries any, else empty.
    """

    path: Path
    metadata: Mapping[str, str]
    columns: Mapping[str, np.ndarray]
    eigenvalues: tuple = ()

    def require(self, names) -> None:
        """Raise SchemaMismatch listing any of `names` not present."""
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise SchemaMismatch(self.path, missing)

    def column(self, name: str) -> np.ndarray:
        self.require([name])
        return self.columns[name]


def _parse_csv(path: Path, text: str) -> Table:
    metadata: dict[str, str] = {}
    rows: list[list[float]] = []
    header: list[str] | None = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line.lstrip("# ").partition(" = ")
            if sep:
                metadata[key] = value
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise RecipeError(
                f"{path}: row has {len(cells)} cells, header has {len(header)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise RecipeError(f"{path}: non-numeric cell: {exc}") from None
    if header is None:
        raise RecipeError(f"{path}: no header row found")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    columns = {name: data[:, i] for i, name in enumerate(header)}
    return Table(path, metadata, columns, _pairs_from_metadata(metadata))


def _pairs_from_metadata(metadata: Mapping[str, str]) -> tuple:
    pairs = []
    for key, value in metadata.items():
        if key.startswith("eigenvalue_"):
            try:
                pairs.append((int(key[len("eigenvalue_"):]), float(value)))
            except ValueError:
                continue
    return tuple(sorted(pairs))


def _flatten_metadata(payload: Mapping, keys) -> dict[str, str]:
    out = {}
    for key in keys:
        value = payload.get(key)
        if value is not None and not isinstance(value, (dict, list)):
            out[key] = str(value)
    config = payload.get("config")
    if isinstance(config, dict):
        for key, value in config.items():
            if not isinstance(value, (dict, list)):
                out[f"config_{key}"] = str(value)
    return out


def _parse_json(path: Path, text: str) -> Table:
    payload = json.loads(text)
    if not isinstance(payload, dict):
        raise RecipeError(f"{path}: expected a JSON object")
    metadata = _flatten_metadata(
        payload, ("source", "potential", "bc_method", "coupling", "energy")
    )

    def as_column(values):
        return np.array(
            [math.nan if v is None else float(v) for v in values], dtype=float
        )

    columns: dict[str, np.ndarray] = {}
    if "columns" in payload:
        columns = {k: as_column(v) for k, v in payload["columns"].items()}
    elif "grid" in payload:
        columns["energy"] = as_column(payload["grid"])
        columns["ntilde"] = as_column(payload["ntilde"])
        diagnostics = payload.get("diagnostics", {})
        if "iterations" in diagnostics:
            columns["iterations"] = as_column(diagnostics["iterations"])
        if "residuals" in diagnostics:
            columns["milne_residual"] = as_column(diagnostics["residuals"])
        for key, values in payload.items():
            if key in ("grid", "ntilde") or not isinstance(values, list):
                continue
            if values and isinstance(values[0], (int, float)):
                columns[key] = as_column(values)
    else:
        raise RecipeError(f"{path}: no recognizable column data")

    pairs = tuple(
        (int(e["n"]), float(e["E"])) for e in payload.get("eigenvalues", ())
    )
    return Table(path, metadata, columns, pairs)


def load_table(path) -> Table:
    """Load a CSV or JSON result document into a Table."""
    path = Path(path)
    if not path.is_file():
        raise RecipeError(f"input not found: {path}")
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return _parse_json(path, text)
    return _parse_csv(path, text)
