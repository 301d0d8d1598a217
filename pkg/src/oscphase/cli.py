"""Command-line front end for quantization, phase tables, and energy sweeps.

Every command emits a deterministic CSV or JSON document that embeds the
resolved configuration, so downstream scripts can reproduce a run from its
output alone.  Exit codes: 0 on success, 2 for configuration errors, 3 for
solver failures; failures also write a machine-readable JSON error record to
stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, oracle
from .errors import OscPhaseError
from .model import (
    SymmetricPotential,
    action_to_turning,
    momentum_sq,
    total_action,
    turning_point,
)
from .qlm import milne_residual, qlm_solve, solution_grid, total_phase, trial_airy
from .semiclassical import (
    BoundaryMethod,
    Terminant,
    airy_quantize,
    airy_uniform_phase,
    bc_series,
    dunham_quantize,
    nsc,
    wkb_quantize,
)
from .serialize import (
    ARTIFACT_NAME,
    config_metadata,
    csv_document,
    format_float,
    json_document,
    table_csv,
    table_payload,
)
from .spectrum import decadic_potential, eigenvalue, oscillation_number_sweep

__all__ = ["ConfigError", "RunConfig", "main"]

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_SOLVER = 3

_BC_METHODS = {
    "series": BoundaryMethod.ASYMPTOTIC_SERIES,
    "wkb": BoundaryMethod.WKB_P0,
}
_TERMINANTS = {
    "none": Terminant.NONE,
    "stieltjes": Terminant.STIELTJES_HALF,
}
_METHODS = ("qlm", "wkb", "dunham", "airy", "oracle")

# Default refinement/solver tolerance per command when --tol is not given:
# eigenvalue searches stop on the energy step, phase solves on the field
# update norm.
_TOL_DEFAULTS = {
    "quantize": 1e-10,
    "compare": 1e-10,
    "phase": 1e-12,
    "sweep": 1e-12,
    "oracle": 1e-10,
}
_FMT_DEFAULTS = {
    "quantize": "json",
    "oracle": "json",
    "phase": "csv",
    "sweep": "csv",
    "compare": "csv",
}


class ConfigError(ValueError):
    """Raised for invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved options of one CLI invocation."""

    command: str
    potential: str | None
    hbar: float
    tol: float
    grid_points: int | None
    xmax_factor: float | None
    bc: str
    fmt: str
    out: str | None
    jobs: int
    extras: dict

    def public(self) -> dict:
        """The configuration entries embedded in every output document."""
        entries = {
            "command": self.command,
            "potential": self.potential,
            "hbar": self.hbar,
            "tol": self.tol,
            "grid_points": self.grid_points,
            "xmax_factor": self.xmax_factor,
            "bc": self.bc,
            "format": self.fmt,
            "jobs": self.jobs,
        }
        entries.update(self.extras)
        return {k: v for k, v in entries.items() if v is not None}

    def bc_method(self) -> BoundaryMethod:
        return _BC_METHODS[self.bc]

    def grid_kwargs(self) -> dict:
        return {
            "min_points": self.grid_points,
            "xmax_factor": self.xmax_factor,
        }


# -- configuration resolution -------------------------------------------------


def _load_config_file(path: str) -> dict:
    """Parse a ``key = value`` file whose keys mirror the flag names."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        entries[key.strip().lower().replace("-", "_")] = value.strip()
    return entries


_CONFIG_KEY_ALIASES = {"format": "fmt"}

_CONFIG_CASTS = {
    "potential": str,
    "hbar": float,
    "tol": float,
    "grid_points": int,
    "xmax_factor": float,
    "bc": str,
    "fmt": str,
    "out": str,
    "jobs": int,
    "levels": str,
    "method": str,
    "kmax": int,
    "terminant": str,
    "energy": float,
    "e_min": float,
    "e_max": float,
    "samples": int,
    "lambdas": str,
    "with_semiclassical": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "methods": str,
}


def _pick(args: argparse.Namespace, file_cfg: dict, key: str, default=None):
    """Flag value if given, else config-file value, else the default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_cfg:
        try:
            return _CONFIG_CASTS[key](file_cfg[key])
        except (KeyError, ValueError) as exc:
            raise ConfigError(
                f"bad config value {key} = {file_cfg[key]!r}"
            ) from exc
    return default


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_cfg = {}
    if getattr(args, "config", None):
        raw = _load_config_file(args.config)
        for key, value in raw.items():
            key = _CONFIG_KEY_ALIASES.get(key, key)
            if key not in _CONFIG_CASTS:
                raise ConfigError(f"unknown config key {key!r}")
            file_cfg[key] = value

    command = args.command
    bc = _pick(args, file_cfg, "bc", "series")
    if bc not in _BC_METHODS:
        raise ConfigError(f"bc must be one of {sorted(_BC_METHODS)}")
    fmt = _pick(args, file_cfg, "fmt", _FMT_DEFAULTS[command])
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    hbar = _pick(args, file_cfg, "hbar", 1.0)
    if not hbar > 0.0:
        raise ConfigError("hbar must be positive")
    tol = _pick(args, file_cfg, "tol", _TOL_DEFAULTS[command])
    if not tol > 0.0:
        raise ConfigError("tol must be positive")
    grid_points = _pick(args, file_cfg, "grid_points")
    if grid_points is not None and grid_points < 16:
        raise ConfigError("grid-points must be at least 16")
    xmax_factor = _pick(args, file_cfg, "xmax_factor")
    if xmax_factor is not None and not xmax_factor > 1.0:
        raise ConfigError("xmax-factor must exceed 1")
    jobs = _pick(args, file_cfg, "jobs", 1)
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")

    extras = {}
    for key in ("levels", "method", "kmax", "terminant", "energy",
                "e_min", "e_max", "samples", "lambdas",
                "with_semiclassical", "methods"):
        if hasattr(args, key):
            extras[key] = _pick(args, file_cfg, key)

    cfg = RunConfig(
        command=command,
        potential=_pick(args, file_cfg, "potential"),
        hbar=hbar,
        tol=tol,
        grid_points=grid_points,
        xmax_factor=xmax_factor,
        bc=bc,
        fmt=fmt,
        out=_pick(args, file_cfg, "out"),
        jobs=jobs,
        extras=extras,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    ex = cfg.extras
    if cfg.command in ("quantize", "oracle", "compare") and not ex.get("levels"):
        raise ConfigError(f"{cfg.command} needs --levels")
    if cfg.command == "quantize":
        method = ex.get("method") or "qlm"
        if method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}")
        cfg.extras["method"] = method
        _check_dunham(ex)
    if cfg.command == "compare":
        methods = [m.strip() for m in (ex.get("methods")
                                       or ",".join(_METHODS)).split(",")]
        unknown = [m for m in methods if m not in _METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}")
        cfg.extras["methods"] = methods
        _check_dunham(ex)
    if cfg.command == "phase":
        if ex.get("energy") is None:
            raise ConfigError("phase needs --energy")
        if not ex["energy"] > 0.0:
            raise ConfigError("energy must be positive")
    if cfg.command == "sweep":
        for key in ("e_min", "e_max", "samples"):
            if ex.get(key) is None:
                raise ConfigError(f"sweep needs --{key.replace('_', '-')}")
        if not 0.0 < ex["e_min"] < ex["e_max"]:
            raise ConfigError("need 0 < e-min < e-max")
        if ex["samples"] < 4:
            raise ConfigError("need at least 4 samples")
        if ex.get("lambdas") and cfg.potential:
            raise ConfigError("give either --potential or --lambdas, not both")
        if not ex.get("lambdas") and not cfg.potential:
            raise ConfigError("sweep needs --potential or --lambdas")
    elif cfg.command != "sweep" and not cfg.potential:
        raise ConfigError(f"{cfg.command} needs --potential")


def _check_dunham(ex: dict) -> None:
    kmax = ex.get("kmax")
    if kmax is None:
        ex["kmax"] = 3
    elif kmax < 0:
        raise ConfigError("kmax must be nonnegative")
    terminant = ex.get("terminant") or "none"
    if terminant not in _TERMINANTS:
        raise ConfigError(f"terminant must be one of {sorted(_TERMINANTS)}")
    ex["terminant"] = terminant


def _parse_levels(text: str) -> list[int]:
    levels = set()
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            if "-" in chunk:
                a, _, b = chunk.partition("-")
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise ValueError
                levels.update(range(lo, hi + 1))
            else:
                levels.add(int(chunk))
        except ValueError as exc:
            raise ConfigError(f"bad level selector {chunk!r}") from exc
    if not levels:
        raise ConfigError("empty level list")
    return sorted(levels)


def _parse_lambdas(text: str) -> list[tuple[str, float]]:
    pairs = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            lam = float(chunk)
        except ValueError as exc:
            raise ConfigError(f"bad coupling {chunk!r}") from exc
        if not lam > 0.0:
            raise ConfigError("couplings must be positive")
        pairs.append((chunk, lam))
    if not pairs:
        raise ConfigError("empty coupling list")
    return pairs


def _potential(cfg: RunConfig) -> SymmetricPotential:
    try:
        return SymmetricPotential.from_text(cfg.potential, hbar=cfg.hbar)
    except ValueError as exc:
        raise ConfigError(f"bad potential {cfg.potential!r}: {exc}") from exc


# -- command implementations --------------------------------------------------


def _quantize_one(method: str, V: SymmetricPotential, n: int,
                  cfg: RunConfig) -> float:
    if method == "qlm":
        return eigenvalue(V, n, tol=cfg.tol, bc_method=cfg.bc_method(),
                          **cfg.grid_kwargs())
    if method == "wkb":
        return wkb_quantize(V, n)
    if method == "dunham":
        return dunham_quantize(V, n, cfg.extras["kmax"],
                               _TERMINANTS[cfg.extras["terminant"]])
    if method == "airy":
        return airy_quantize(V, n)
    return oracle.numerov_eigenvalue(V, n)


def _eigen_document(cfg: RunConfig, method: str,
                    pairs: list[tuple[int, float]]) -> str:
    source = "oracle" if method == "oracle" else ARTIFACT_NAME
    if cfg.fmt == "json":
        return json_document({
            "artifact": {"name": ARTIFACT_NAME, "version": __version__},
            "source": source,
            "config": cfg.public(),
            "potential": cfg.potential,
            "method": method,
            "eigenvalues": [{"n": n, "E": E} for n, E in pairs],
        })
    metadata = {
        "artifact": f"{ARTIFACT_NAME} {__version__}",
        "source": source,
        "potential": cfg.potential,
        "method": method,
    }
    metadata.update(config_metadata(cfg.public()))
    return csv_document(metadata, {
        "n": np.array([n for n, _ in pairs], dtype=int),
        "energy": np.array([E for _, E in pairs]),
    })


def _cmd_quantize(cfg: RunConfig):
    V = _potential(cfg)
    levels = _parse_levels(cfg.extras["levels"])
    method = cfg.extras["method"]
    pairs = [(n, float(_quantize_one(method, V, n, cfg))) for n in levels]
    return _eigen_document(cfg, method, pairs)


def _cmd_oracle(cfg: RunConfig):
    V = _potential(cfg)
    levels = _parse_levels(cfg.extras["levels"])
    pairs = [(n, float(oracle.numerov_eigenvalue(V, n))) for n in levels]
    return _eigen_document(cfg, "oracle", pairs)


def _cmd_compare(cfg: RunConfig):
    V = _potential(cfg)
    levels = _parse_levels(cfg.extras["levels"])
    methods = cfg.extras["methods"]
    rows = {m: [] for m in methods}
    for n in levels:
        for m in methods:
            rows[m].append(float(_quantize_one(m, V, n, cfg)))
    if cfg.fmt == "json":
        return json_document({
            "artifact": {"name": ARTIFACT_NAME, "version": __version__},
            "source": ARTIFACT_NAME,
            "config": cfg.public(),
            "potential": cfg.potential,
            "levels": [
                {"n": n, **{m: rows[m][i] for m in methods}}
                for i, n in enumerate(levels)
            ],
        })
    metadata = {
        "artifact": f"{ARTIFACT_NAME} {__version__}",
        "source": ARTIFACT_NAME,
        "potential": cfg.potential,
    }
    metadata.update(config_metadata(cfg.public()))
    columns = {"n": np.array(levels, dtype=int)}
    for m in methods:
        columns[m] = np.array(rows[m])
    return csv_document(metadata, columns)


def _phase_columns(cfg: RunConfig, V: SymmetricPotential, E: float):
    k_cap = 6 if cfg.bc == "series" else 0
    bc = bc_series(V, E, k_cap)
    grid = solution_grid(
        V, E,
        **{k: v for k, v in cfg.grid_kwargs().items() if v is not None},
    )
    sol = qlm_solve(V, E, trial_airy(V, E, grid), bc, tol=cfg.tol)
    columns = {
        "x": sol.grid,
        "sigma": sol.sigma,
        "dsigma": sol.dsigma,
        "alpha": sol.alpha,
        "re_M": sol.values.real,
        "im_M": sol.values.imag,
    }
    if cfg.extras.get("with_semiclassical"):
        t2 = turning_point(V, E).t2
        p_sq = momentum_sq(V, E, sol.grid)
        p = np.sqrt(np.where(p_sq > 0.0, p_sq, np.nan))
        allowed = sol.grid <= t2
        wkb_phase = np.full_like(sol.grid, np.nan)
        wkb_phase[allowed] = (
            total_action(V, E, t2=t2)
            - action_to_turning(V, E, sol.grid[allowed], t2=t2)
            + 0.25 * math.pi
        )
        uniform = airy_uniform_phase(V, E, sol.grid)
        columns.update({
            "p": p,
            "wkb_phase": wkb_phase,
            "xi0": uniform.xi0,
            "sigma_sc": uniform.sigma_sc,
            "dsigma_sc": uniform.dsigma_sc,
        })
    diagnostics = {
        "bc_value": bc.value,
        "bc_order_used": bc.order_used,
        "iterations": sol.iterations,
        "milne_residual": milne_residual(sol, V, E),
        "ntilde": total_phase(sol) / math.pi,
    }
    return columns, diagnostics


def _cmd_phase(cfg: RunConfig):
    V = _potential(cfg)
    E = float(cfg.extras["energy"])
    columns, diagnostics = _phase_columns(cfg, V, E)
    if cfg.fmt == "json":
        return json_document({
            "artifact": {"name": ARTIFACT_NAME, "version": __version__},
            "source": ARTIFACT_NAME,
            "config": cfg.public(),
            "potential": cfg.potential,
            "energy": E,
            "diagnostics": diagnostics,
            "columns": columns,
        })
    metadata = {
        "artifact": f"{ARTIFACT_NAME} {__version__}",
        "source": ARTIFACT_NAME,
        "potential": cfg.potential,
        "energy": format_float(E),
    }
    metadata.update(config_metadata(cfg.public()))
    metadata.update({
        "bc_value": format_float(diagnostics["bc_value"]),
        "bc_order_used": str(diagnostics["bc_order_used"]),
        "iterations": str(diagnostics["iterations"]),
        "milne_residual": format_float(diagnostics["milne_residual"]),
        "ntilde": format_float(diagnostics["ntilde"]),
    })
    return csv_document(metadata, columns)


def _sweep_table(cfg: RunConfig, V: SymmetricPotential,
                 coupling: float | None):
    ex = cfg.extras
    mode = "cold" if cfg.jobs > 1 else "warm"
    table = oscillation_number_sweep(
        V, ex["e_min"], ex["e_max"], ex["samples"],
        bc_method=cfg.bc_method(),
        tol=cfg.tol,
        mode=mode,
        jobs=cfg.jobs,
        coupling=coupling,
        **cfg.grid_kwargs(),
    )
    extra_columns = None
    if ex.get("with_semiclassical"):
        extra_columns = {
            "nsc": np.array([nsc(V, E) for E in table.energies]),
        }
    if cfg.fmt == "json":
        return json_document(
            table_payload(table, cfg.public(), extra_columns=extra_columns)
        )
    return table_csv(table, cfg.public(), extra_columns=extra_columns)


def _cmd_sweep(cfg: RunConfig):
    if cfg.extras.get("lambdas"):
        documents = []
        for text, lam in _parse_lambdas(cfg.extras["lambdas"]):
            V = decadic_potential(lam, hbar=cfg.hbar)
            name = f"sweep_lambda_{text}.{cfg.fmt}"
            documents.append((name, _sweep_table(cfg, V, lam)))
        return documents
    return _sweep_table(cfg, _potential(cfg), None)


_HANDLERS = {
    "quantize": _cmd_quantize,
    "phase": _cmd_phase,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "compare": _cmd_compare,
}


# -- entry point --------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscphase",
        description="Quantize symmetric 1-D wells via exact quantum phase "
                    "functions and semiclassical approximations.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"%(prog)s {__version__}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="key = value file mirroring flag names; "
                             "explicit flags win")
    common.add_argument("--potential", metavar="SPEC",
                        help="even-power terms like 4:0.5 or 2:0.5,10:500")
    common.add_argument("--hbar", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--grid-points", type=int, dest="grid_points",
                        help="minimum number of half-line grid points")
    common.add_argument("--xmax-factor", type=float, dest="xmax_factor",
                        help="domain end as a multiple of the turning point")
    common.add_argument("--bc", choices=sorted(_BC_METHODS),
                        help="boundary-condition method at the origin")
    common.add_argument("--format", choices=("csv", "json"), dest="fmt")
    common.add_argument("--out", metavar="PATH",
                        help="output file (or directory for multi-document "
                             "sweeps); stdout when omitted")
    common.add_argument("--jobs", type=int,
                        help="worker processes for cold-start sweeps")

    quantize = sub.add_parser(
        "quantize", parents=[common],
        help="eigenvalues per level for one quantization method")
    quantize.add_argument("--levels", help="levels like 0, 0-5, or 0,2,4")
    quantize.add_argument("--method", choices=_METHODS)
    quantize.add_argument("--kmax", type=int,
                          help="highest correction order for dunham")
    quantize.add_argument("--terminant", choices=sorted(_TERMINANTS))

    phase = sub.add_parser(
        "phase", parents=[common],
        help="phase, derivative, and amplitude table at one energy")
    phase.add_argument("--energy", type=float)
    phase.add_argument("--with-semiclassical", action="store_true",
                       dest="with_semiclassical", default=None,
                       help="add momentum, primitive, and uniform-phase "
                            "columns")

    sweep = sub.add_parser(
        "sweep", parents=[common],
        help="oscillation-number sweep over an energy range")
    sweep.add_argument("--e-min", type=float, dest="e_min")
    sweep.add_argument("--e-max", type=float, dest="e_max")
    sweep.add_argument("--samples", type=int)
    sweep.add_argument("--lambdas",
                       help="comma-separated couplings of the "
                            "x^2/2 + lam x^10/2 family (one document each)")
    sweep.add_argument("--with-semiclassical", action="store_true",
                       dest="with_semiclassical", default=None,
                       help="add the first-order oscillation number column")

    oracle_cmd = sub.add_parser(
        "oracle", parents=[common],
        help="shooting-solver eigenvalues (independent ground truth)")
    oracle_cmd.add_argument("--levels", help="levels like 0, 0-5, or 0,2,4")

    compare = sub.add_parser(
        "compare", parents=[common],
        help="side-by-side eigenvalue table across methods")
    compare.add_argument("--levels", help="levels like 0, 0-5, or 0,2,4")
    compare.add_argument("--methods",
                         help=f"comma-separated subset of {_METHODS}")
    compare.add_argument("--kmax", type=int)
    compare.add_argument("--terminant", choices=sorted(_TERMINANTS))

    return parser


def _deliver(result, cfg: RunConfig) -> None:
    if isinstance(result, list):
        if cfg.out is None:
            raise ConfigError(
                "--out must name a directory for multi-document sweeps"
            )
        outdir = Path(cfg.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, text in result:
            (outdir / name).write_text(text)
        return
    if cfg.out is None:
        sys.stdout.write(result)
        return
    path = Path(cfg.out)
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(result)


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json_document({
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }))
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        return _fail(_EXIT_CONFIG, exc)
    try:
        result = _HANDLERS[cfg.command](cfg)
        _deliver(result, cfg)
    except ConfigError as exc:
        return _fail(_EXIT_CONFIG, exc)
    except BrokenPipeError:
        return _EXIT_OK
    except (OscPhaseError, ValueError) as exc:
        return _fail(_EXIT_SOLVER, exc)
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
