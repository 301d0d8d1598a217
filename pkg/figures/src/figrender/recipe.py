"""Declarative figure recipes: which inputs feed which plot, styled how.

A recipe is a small JSON object:

    {
      "figure": "fig5",
      "inputs": [{"path": "../fixtures/sweep_quartic.csv",
                  "role": "quartic"}, ...],
      "styling": {"quartic": {"color": "tab:red", "linestyle": "--"}},
      "output": "fig5.png"
    }

Input paths are resolved relative to the recipe file, so recipes and
their committed fixtures travel together; the output path is resolved
against the working directory unless absolute.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import RecipeError

__all__ = ["FigureRecipe", "RecipeInput", "load_recipe"]


@dataclass(frozen=True)
class RecipeInput:
    """One input document and the role it plays in the figure."""

    path: Path
    role: str


@dataclass(frozen=True)
class FigureRecipe:
    """A fully resolved rendering request.

    Fields
    ------
    figure : str
        Figure identifier; must name a registered renderer.
    inputs : tuple of RecipeInput
        Documents to load, each tagged with its role.
    styling : mapping of role to style mapping
        Per-role matplotlib keyword overrides (color, linestyle, label,
        and so on), merged over the renderer's defaults.
    output : Path
        Image file to write.
    """

    figure: str
    inputs: tuple
    styling: Mapping[str, Mapping[str, object]] = field(default_factory=dict)
    output: Path = Path("figure.png")

    def style(self, role: str, **defaults) -> dict:
        """The renderer's defaults for `role`, overridden by the recipe."""
        merged = dict(defaults)
        merged.update(self.styling.get(role, {}))
        return merged

    def input_for(self, role: str) -> RecipeInput:
        for entry in self.inputs:
            if entry.role == role:
                return entry
        raise RecipeError(f"figure {self.figure!r} needs an input with "
                          f"role {role!r}")


def _as_mapping(value, what: str) -> Mapping:
    if not isinstance(value, dict):
        raise RecipeError(f"{what} must be an object")
    return value


def load_recipe(path) -> FigureRecipe:
    """Parse and resolve a recipe file."""
    path = Path(path)
    if not path.is_file():
        raise RecipeError(f"recipe not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RecipeError(f"{path}: not valid JSON: {exc}") from None
    payload = _as_mapping(payload, str(path))

    for key in ("figure", "inputs", "output"):
        if key not in payload:
            raise RecipeError(f"{path}: missing required key {key!r}")
    figure = payload["figure"]
    if not isinstance(figure, str) or not figure:
        raise RecipeError(f"{path}: 'figure' must be a nonempty string")

    raw_inputs = payload["inputs"]
    if not isinstance(raw_inputs, list) or not raw_inputs:
        raise RecipeError(f"{path}: 'inputs' must be a nonempty list")
    inputs = []
    for i, entry in enumerate(raw_inputs):
        entry = _as_mapping(entry, f"{path}: inputs[{i}]")
        if "path" not in entry or "role" not in entry:
            raise RecipeError(
                f"{path}: inputs[{i}] needs 'path' and 'role'"
            )
        resolved = (path.parent / str(entry["path"])).resolve()
        inputs.append(RecipeInput(path=resolved, role=str(entry["role"])))

    styling = _as_mapping(payload.get("styling", {}), f"{path}: 'styling'")
    for role, style in styling.items():
        _as_mapping(style, f"{path}: styling[{role!r}]")

    output = Path(str(payload["output"]))
    return FigureRecipe(
        figure=figure, inputs=tuple(inputs), styling=styling, output=output
    )
