from .dataset import ColumnLayout, Dataset
from .loader import from_frame, load_csv, to_frame, write_csv
from .schema import ColumnSchema

__all__ = ["ColumnLayout", "ColumnSchema", "Dataset", "from_frame", "load_csv", "to_frame", "write_csv"]
