"""Figure generation from benchmark summary CSVs, instance JSON files, and
MPS checkpoint JSON files. Consumes only those documented formats; it never
imports the solver package."""
from .io import (Checkpoint, GuardError, Instance, ParseError,
                 assignment_costs, enumerate_probabilities, load_checkpoint,
                 load_instance, read_summary)
from .plots import plot_comparison, plot_distribution, plot_heatmap

__all__ = [
    "Checkpoint", "GuardError", "Instance", "ParseError",
    "assignment_costs", "enumerate_probabilities", "load_checkpoint",
    "load_instance", "read_summary",
    "plot_comparison", "plot_distribution", "plot_heatmap",
]
