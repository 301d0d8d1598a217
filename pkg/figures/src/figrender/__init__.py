"""Publication-figure rendering from solver result documents.

Recipes (JSON) name a figure, its input CSV/JSON documents with their
roles, optional styling overrides, and an output image path.  Rendering
is deterministic and read-only over its inputs; the solver itself is
never invoked from here.
"""

from .errors import FigRenderError, RecipeError, SchemaMismatch
from .recipe import FigureRecipe, RecipeInput, load_recipe
from .render import FIGURE_IDS, build, render
from .table import Table, load_table

__all__ = [
    "FIGURE_IDS",
    "FigRenderError",
    "FigureRecipe",
    "RecipeError",
    "RecipeInput",
    "SchemaMismatch",
    "Table",
    "build",
    "load_recipe",
    "load_table",
    "render",
]

__version__ = "0.1.0"
