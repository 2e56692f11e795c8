from __future__ import annotations

from typing import Optional


class MissLogitError(Exception):
    """Base class for every error raised by the library."""


class SchemaError(MissLogitError):
    """Raised when a column-role schema is malformed."""


class DatasetValidationError(MissLogitError):
    """Raised when ingested records violate the missingness taxonomy."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ) -> None:
        self.row = row
        self.column = column

        where = []
        if row is not None:
            where.append(f"row={row}")
        if column is not None:
            where.append(f"column={column}")

        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class SelectionLookupError(MissLogitError, KeyError):
    """Raised when a stratum key is absent from a selection table."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "stratum not found"


class EmptyPoolError(MissLogitError):
    """Raised when every pool of a fallback chain is empty."""

    def __init__(self, record: int, key: str) -> None:
        self.record = record
        self.key = key
        super().__init__(
            f"No eligible donor for record {record} after all fallbacks | key={key}"
        )


class ImputationError(MissLogitError):
    """Raised for invalid imputation requests (e.g. fewer than two draws)."""


class VarianceError(MissLogitError):
    """Raised when a variance estimate cannot be formed."""

    def __init__(self, message: str, condition: Optional[float] = None) -> None:
        self.condition = condition
        if condition is not None:
            message = f"{message} | condition={condition:.3e}"
        super().__init__(message)


class ConfigError(MissLogitError):
    """Raised when a configuration file or object is invalid."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        super().__init__(f"{message} (field={field})" if field else message)
