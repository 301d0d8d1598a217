"""Command-line entry point: render one figure from a recipe file."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import FigRenderError
from .recipe import load_recipe
from .render import FIGURE_IDS, render

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figure",
        description="Render a figure from result documents, as described "
                    "by a JSON recipe.",
        epilog=f"known figure ids: {', '.join(FIGURE_IDS)}",
    )
    parser.add_argument("recipe", help="path to a recipe JSON file")
    parser.add_argument("--out", default=None,
                        help="override the recipe's output image path")
    args = parser.parse_args(argv)

    try:
        recipe = load_recipe(args.recipe)
        if args.out is not None:
            recipe = replace(recipe, output=Path(args.out))
        written = render(recipe)
    except FigRenderError as exc:
        print(f"render_figure: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
