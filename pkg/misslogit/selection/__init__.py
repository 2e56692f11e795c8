from .diagnostics import MarCheck, mar_check
from .table import SelectionTable, estimate_selection_probs, lookup

__all__ = [
    "MarCheck",
    "SelectionTable",
    "estimate_selection_probs",
    "lookup",
    "mar_check",
]
