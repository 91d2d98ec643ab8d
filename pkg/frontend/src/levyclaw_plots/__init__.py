"""Figure rendering for levyclaw output files (CSV/JSON contracts only)."""

from .figures import FIGURE_KINDS, FigureSpec, available_kinds, render
from .readers import (DistanceData, FieldData, RunData, SchemaError,
                      load_convergence, load_distance, load_field,
                      load_manifest, load_run)

__version__ = "0.1.0"
