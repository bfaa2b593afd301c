"""Figure rendering for the oisac experiment CSVs.

Figures are pure functions of the CSV files the ``oisac`` CLI writes:
nothing is recomputed here, and re-rendering from identical inputs
yields byte-identical images.
"""

from .io import SchemaError, load_table
from .render import FIGURE_IDS, FIGURE_INPUTS, render

__all__ = ["FIGURE_IDS", "FIGURE_INPUTS", "SchemaError", "load_table", "render"]
