"""Figure builders: one deterministic matplotlib recipe per paper figure.

Every builder consumes already-loaded Tables keyed by role and returns a
Figure; `render` wraps that with input loading, schema checks, fixed
fonts and sizes, and an image write.  Nothing here runs the solver: the
pipeline is read-only over its input documents, so re-rendering a recipe
reproduces the image byte for byte.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .errors import RecipeError  # noqa: E402
from .recipe import FigureRecipe  # noqa: E402
from .table import Table, load_table  # noqa: E402

__all__ = ["FIGURE_IDS", "build", "render"]

_RC_PARAMS = {
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
    "figure.dpi": 110.0,
    "savefig.dpi": 110.0,
    "legend.fontsize": 7.5,
    "legend.framealpha": 1.0,
}

_SAVE_METADATA = {"Software": "figrender"}


# -- shared helpers -----------------------------------------------------------


def _tables(recipe: FigureRecipe) -> dict[str, Table]:
    loaded: dict[str, Table] = {}
    for entry in recipe.inputs:
        if entry.role in loaded:
            raise RecipeError(
                f"figure {recipe.figure!r}: duplicate role {entry.role!r}"
            )
        loaded[entry.role] = load_table(entry.path)
    return loaded


def _phase_pair(recipe: FigureRecipe, tables, columns):
    """The (exact-energy, wkb-energy) phase documents used by figs 1-3."""
    exact = tables.get("exact")
    wkb = tables.get("wkb_energy")
    if exact is None or wkb is None:
        raise RecipeError(
            f"figure {recipe.figure!r} needs inputs with roles "
            "'exact' and 'wkb_energy'"
        )
    exact.require(["x"] + columns)
    wkb.require(["x", columns[-1]])
    return exact, wkb


def _coupling_of(table: Table) -> float:
    value = table.metadata.get("coupling")
    if value is None:
        raise RecipeError(f"{table.path}: no 'coupling' metadata entry")
    return float(value)


def _family_sorted(tables: dict[str, Table]):
    """Family curves ordered by coupling, weakest (topmost curve) first."""
    return sorted(
        ((role, table) for role, table in tables.items()),
        key=lambda item: _coupling_of(item[1]),
    )

_FAMILY_COLORS = (
    "tab:red", "gold", "tab:pink", "tab:purple",
    "tab:blue", "deepskyblue", "tab:green", "tab:olive",
)


# -- figure builders ----------------------------------------------------------


def _fig_phase(recipe: FigureRecipe, tables) -> plt.Figure:
    """Quantum phase against its semiclassical limits (one state)."""
    exact, wkb = _phase_pair(
        recipe, tables, ["sigma", "sigma_sc", "wkb_phase"]
    )
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    x = exact.columns["x"]
    ax.plot(x, exact.columns["sigma"],
            **recipe.style("exact", color="black", label="quantum phase"))
    ax.plot(x, exact.columns["sigma_sc"],
            **recipe.style("uniform", color="black", linestyle="--",
                           label="uniform semiclassical"))
    ax.plot(x, exact.columns["wkb_phase"],
            **recipe.style("primitive_exact", color="tab:red",
                           linestyle="-.", linewidth=2.2,
                           label="S + pi/4 at exact E"))
    ax.plot(wkb.columns["x"], wkb.columns["wkb_phase"],
            **recipe.style("primitive_wkb", color="tab:blue",
                           linewidth=2.2, label="S + pi/4 at WKB E"))
    ax.set_xlabel("x")
    ax.set_ylabel("phase")
    ax.set_xlim(0.0, float(x[-1]))
    ax.legend(loc="lower right")
    fig.tight_layout()
    return fig


def _fig_phase_derivative(recipe: FigureRecipe, tables) -> plt.Figure:
    """First derivative of the curves of the phase figure."""
    exact, wkb = _phase_pair(recipe, tables, ["dsigma", "dsigma_sc", "p"])
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    x = exact.columns["x"]
    ax.plot(x, exact.columns["dsigma"],
            **recipe.style("exact", color="black", label="quantum"))
    ax.plot(x, exact.columns["dsigma_sc"],
            **recipe.style("uniform", color="black", linestyle="--",
                           label="uniform semiclassical"))
    ax.plot(x, exact.columns["p"],
            **recipe.style("primitive_exact", color="tab:red",
                           linestyle="-.", linewidth=2.2,
                           label="p at exact E"))
    ax.plot(wkb.columns["x"], wkb.columns["p"],
            **recipe.style("primitive_wkb", color="tab:blue",
                           linewidth=2.2, label="p at WKB E"))
    ax.set_xlabel("x")
    ax.set_ylabel("d(phase)/dx")
    ax.set_xlim(0.0, float(x[-1]))
    ax.legend(loc="upper right")
    fig.tight_layout()
    return fig


def _difference_rows(x, y, order: int, stride: int):
    """Strided finite differences of y up to `order`, with matching x."""
    xs = x[::stride]
    ys = y[::stride]
    rows = {0: (xs, ys)}
    for k in (order - 1, order):
        d = np.diff(ys, k)
        rows[k] = (xs[: d.size], d)
    return rows


def _fig_amplitude_comparison(recipe: FigureRecipe, tables) -> plt.Figure:
    """Amplitude and its high differences under two boundary values."""
    for role in ("series", "crude"):
        if role not in tables:
            raise RecipeError(
                f"figure {recipe.figure!r} needs inputs with roles "
                "'series' and 'crude'"
            )
        tables[role].require(["x", "alpha", "p"])

    fig, axes = plt.subplots(3, 2, figsize=(8.0, 9.0), sharex=True)
    for col, role in enumerate(("series", "crude")):
        table = tables[role]
        x = table.columns["x"]
        alpha = table.columns["alpha"]
        p = table.columns["p"]
        # plot window: the classically allowed region, where the fringe
        # lives; p is NaN outside it by construction.
        allowed = np.isfinite(p)
        t2 = float(x[allowed][-1])
        window = x <= 0.85 * t2
        stride = max(1, int(np.sum(window)) // 200)
        own = _difference_rows(x[window], alpha[window], 6, stride)
        ref = _difference_rows(
            x[window], p[window] ** -0.5, 6, stride
        )
        for row, order in enumerate((0, 5, 6)):
            ax = axes[row][col]
            ax.plot(*own[order],
                    **recipe.style(role, color="black",
                                   label="amplitude" if order == 0 else None))
            ax.plot(*ref[order],
                    **recipe.style("semiclassical", color="tab:red",
                                   linestyle="--",
                                   label="p^(-1/2)" if order == 0 else None))
            if order:
                ax.set_ylabel(f"difference order {order}")
            else:
                ax.set_ylabel("alpha")
                ax.legend(loc="upper left")
                ax.set_title(f"{role} boundary value")
        axes[-1][col].set_xlabel("x")
    fig.tight_layout()
    return fig


_MARKERS = {"quartic": "D", "sextic": "^", "octic": "s"}


def _fig_oscillation_numbers(recipe: FigureRecipe, tables) -> plt.Figure:
    """N(E) for the pure wells: full range plus a quantization zoom."""
    for role in ("quartic", "sextic", "octic"):
        if role not in tables:
            raise RecipeError(
                f"figure {recipe.figure!r} needs inputs with roles "
                "'quartic', 'sextic', and 'octic'"
            )
        tables[role].require(["energy", "ntilde"])

    fig, (full, zoom) = plt.subplots(
        1, 2, figsize=(10.0, 4.2), width_ratios=(1.6, 1.0)
    )
    styles = {
        "quartic": recipe.style("quartic", color="tab:red", linestyle="--",
                                label="quartic"),
        "sextic": recipe.style("sextic", color="tab:blue", label="sextic"),
        "octic": recipe.style("octic", color="tab:green", linestyle="-.",
                              label="octic"),
    }
    for role, style in styles.items():
        table = tables[role]
        for ax in (full, zoom):
            ax.plot(table.columns["energy"], table.columns["ntilde"],
                    **style)

    harmonic = tables.get("harmonic")
    if harmonic is not None:
        harmonic.require(["energy", "ntilde"])
        full.plot(harmonic.columns["energy"], harmonic.columns["ntilde"],
                  **recipe.style("harmonic", color="black", linewidth=0.9,
                                 label="harmonic"))

    zoom_max = 12.0
    for role in ("quartic", "sextic", "octic"):
        table = tables[role]
        pairs = [(n, E) for n, E in table.eigenvalues if E <= zoom_max]
        if pairs:
            zoom.scatter(
                [E for _, E in pairs], [n + 1 for n, _ in pairs],
                marker=_MARKERS[role], s=28.0, zorder=3.0,
                facecolors="none",
                edgecolors=styles[role].get("color", "black"),
            )

    full.set_xlabel("E")
    full.set_ylabel("N(E)")
    full.set_title("(a)")
    full.legend(loc="upper left")
    zoom.set_xlabel("E")
    zoom.set_xlim(0.0, zoom_max)
    zoom.set_ylim(0.0, None)
    zoom.set_title("(b)")
    fig.tight_layout()
    return fig


def _fig_coupling_family(recipe: FigureRecipe, tables) -> plt.Figure:
    """N(E, lambda) curves for the coupling family."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for i, (role, table) in enumerate(_family_sorted(tables)):
        table.require(["energy", "ntilde"])
        ax.plot(table.columns["energy"], table.columns["ntilde"],
                **recipe.style(role,
                               color=_FAMILY_COLORS[i % len(_FAMILY_COLORS)],
                               label=f"lambda = {role}"))
    ax.set_xlabel("E")
    ax.set_ylabel("N(E)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    return fig


def _fig_family_vs_semiclassical(recipe: FigureRecipe, tables) -> plt.Figure:
    """Quantum and first-order counts for the family, zoomed low."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    top = 0.0
    for i, (role, table) in enumerate(_family_sorted(tables)):
        table.require(["energy", "ntilde", "nsc"])
        color = _FAMILY_COLORS[i % len(_FAMILY_COLORS)]
        ax.plot(table.columns["energy"], table.columns["ntilde"],
                **recipe.style(role, color=color,
                               label=f"lambda = {role}"))
        ax.plot(table.columns["energy"], table.columns["nsc"],
                linestyle="--", linewidth=0.9, color=color)
        top = max(top, float(np.nanmax(table.columns["ntilde"])))
    for level in range(1, int(top) + 1):
        ax.axhline(level, color="gray", linestyle=":", linewidth=0.7)
    ax.set_xlabel("E")
    ax.set_ylabel("N(E)  (solid: quantum, dashed: first order)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    return fig


def _fig_family_surface(recipe: FigureRecipe, tables) -> plt.Figure:
    """N as a surface over energy and log-coupling."""
    ordered = _family_sorted(tables)
    grids = []
    counts = []
    lambdas = []
    for _, table in ordered:
        table.require(["energy", "ntilde"])
        grids.append(table.columns["energy"])
        counts.append(table.columns["ntilde"])
        lambdas.append(_coupling_of(table))
    for other in grids[1:]:
        if other.shape != grids[0].shape or not np.allclose(other, grids[0]):
            raise RecipeError(
                f"figure {recipe.figure!r}: family inputs must share one "
                "energy grid"
            )

    fig = plt.figure(figsize=(6.4, 5.2))
    ax = fig.add_subplot(projection="3d")
    E, L = np.meshgrid(grids[0], np.log10(lambdas))
    ax.plot_surface(
        E, L, np.vstack(counts), cmap="viridis",
        rstride=1, cstride=1, linewidth=0.2, edgecolor="gray",
    )
    ax.view_init(elev=25.0, azim=-120.0)
    ax.set_xlabel("E")
    ax.set_ylabel("log10 lambda")
    ax.set_zlabel("N")
    return fig


_BUILDERS = {
    "fig1": _fig_phase,
    "fig2": _fig_phase_derivative,
    "fig3": _fig_phase_derivative,
    "fig4": _fig_amplitude_comparison,
    "fig5": _fig_oscillation_numbers,
    "fig7_1": _fig_coupling_family,
    "fig7_2": _fig_family_vs_semiclassical,
    "fig8": _fig_family_surface,
}

FIGURE_IDS = tuple(sorted(_BUILDERS))


def build(recipe: FigureRecipe) -> plt.Figure:
    """Load the recipe's inputs and build its figure (without saving)."""
    builder = _BUILDERS.get(recipe.figure)
    if builder is None:
        raise RecipeError(
            f"unknown figure id {recipe.figure!r}; expected one of "
            f"{', '.join(FIGURE_IDS)}"
        )
    with matplotlib.rc_context(_RC_PARAMS):
        return builder(recipe, _tables(recipe))


def render(recipe: FigureRecipe) -> Path:
    """Build the figure and write the image; returns the output path."""
    with matplotlib.rc_context(_RC_PARAMS):
        fig = build(recipe)
        out = recipe.output
        out.parent.mkdir(parents=True, exist_ok=True)
        try:
            fig.savefig(out, metadata=_SAVE_METADATA)
        finally:
            plt.close(fig)
    return out
