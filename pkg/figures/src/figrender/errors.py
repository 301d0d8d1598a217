"""Exception types for the figure-rendering pipeline."""

__all__ = ["FigRenderError", "RecipeError", "SchemaMismatch"]


class FigRenderError(Exception):
    """Base class for all errors raised by this package."""


class RecipeError(FigRenderError):
    """A recipe file is malformed or references something unknown."""


class SchemaMismatch(FigRenderError):
    """An input document does not provide the columns a figure needs.

    The message lists every missing column so a renamed or dropped field
    can be identified from the error alone.
    """

    def __init__(self, path, missing):
        self.path = str(path)
        self.missing = tuple(sorted(missing))
        names = ", ".join(self.missing)
        super().__init__(f"{self.path}: missing columns: {names}")
