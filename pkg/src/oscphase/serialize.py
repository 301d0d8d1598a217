"""Deterministic result documents shared by the CLI and the figure scripts.

Two formats carry every artifact: JSON documents with a fixed key layout and
CSV files opening with a ``#``-prefixed metadata block followed by a standard
header row.  CSV floats are written with 17 significant digits and JSON
floats round-trip exactly, so identical inputs always produce byte-identical
files.  Sweep documents follow one schema regardless of their producer; the
``source`` entry says whether the numbers came from the phase solver or the
shooting oracle.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Mapping

import numpy as np

from . import __version__

__all__ = [
    "ARTIFACT_NAME",
    "config_metadata",
    "csv_document",
    "format_float",
    "json_document",
    "table_csv",
    "table_payload",
]

ARTIFACT_NAME = "oscphase"


def format_float(value) -> str:
    """Render a float with 17 significant digits (lossless for doubles)."""
    return f"{float(value):.17g}"


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def _plain(value):
    """Recursively reduce numpy containers, enums, and floats to JSON types.

    NaN becomes ``null`` so the output stays strict JSON; 17-significant-
    digit rounding is the identity on doubles, so values round-trip exactly.
    """
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, enum.Enum):
        return _plain(value.value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return None if math.isnan(f) else f
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def json_document(payload: Mapping) -> str:
    """Serialize a payload mapping to indented, key-order-preserving JSON."""
    return json.dumps(_plain(payload), indent=2, allow_nan=False) + "\n"


def csv_document(metadata: Mapping, columns: Mapping) -> str:
    """Assemble a CSV file: ``# key = value`` lines, header row, data rows.

    Parameters
    ----------
    metadata : mapping
        Scalar provenance entries, written in insertion order.
    columns : mapping
        Column name to 1-D array; all columns must share one length.
    """
    lines = [f"# {key} = {value}" for key, value in metadata.items()]
    names = list(columns)
    if not names:
        raise ValueError("need at least one column")
    arrays = [np.atleast_1d(np.asarray(columns[name])) for name in names]
    length = arrays[0].shape[0]
    if any(a.ndim != 1 or a.shape[0] != length for a in arrays):
        raise ValueError("columns must be 1-D arrays of one common length")
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_cell(a[i]) for a in arrays))
    return "\n".join(lines) + "\n"


def config_metadata(config: Mapping) -> dict:
    """``config_<key>`` metadata entries with canonical value formatting."""
    return {f"config_{key}": _cell_or_text(val) for key, val in config.items()}


def _cell_or_text(value) -> str:
    if isinstance(value, enum.Enum):
        value = value.value
    if isinstance(value, (bool, int, float, np.integer, np.floating, np.bool_)):
        return _cell(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_cell_or_text(v) for v in value)
    return str(value)


def table_payload(table, config: Mapping, source: str = ARTIFACT_NAME,
                  extra_columns: Mapping | None = None) -> dict:
    """JSON payload for a spectrum table in the documented sweep schema."""
    payload = {
        "artifact": {"name": ARTIFACT_NAME, "version": __version__},
        "source": source,
        "config": dict(config),
        "potential": table.potential,
        "bc_method": table.bc_method,
        "coupling": table.coupling,
        "grid": table.energies,
        "ntilde": table.ntilde,
        "eigenvalues": [{"n": n, "E": E} for n, E in table.eigenvalues],
        "diagnostics": {
            "iterations": table.iterations,
            "residuals": table.residuals,
        },
    }
    if extra_columns:
        for name, values in extra_columns.items():
            payload[name] = values
    return payload


def table_csv(table, config: Mapping, source: str = ARTIFACT_NAME,
              extra_columns: Mapping | None = None) -> str:
    """CSV rendering of a spectrum table in the documented sweep schema."""
    metadata = {
        "artifact": f"{ARTIFACT_NAME} {__version__}",
        "source": source,
        "potential": table.potential,
        "bc_method": table.bc_method.value,
    }
    if table.coupling is not None:
        metadata["coupling"] = format_float(table.coupling)
    metadata.update(config_metadata(config))
    for n, E in table.eigenvalues:
        metadata[f"eigenvalue_{n}"] = format_float(E)
    columns = {
        "energy": table.energies,
        "ntilde": table.ntilde,
        "iterations": np.asarray(table.iterations),
        "milne_residual": np.asarray(table.residuals),
    }
    if extra_columns:
        columns.update(extra_columns)
    return csv_document(metadata, columns)
