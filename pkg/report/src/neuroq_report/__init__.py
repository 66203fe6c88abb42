"""Figures and tables from neuroq training logs."""

__version__ = "0.1.0"

from .analysis import (  # noqa: F401
    batch_returns,
    convergence_curve,
    return_curves,
    timing_summary,
)
from .figures import plot_convergence, plot_returns  # noqa: F401
from .runset import Run, RunSet, RunSetError, load_runset  # noqa: F401
from .tables import timing_table  # noqa: F401
