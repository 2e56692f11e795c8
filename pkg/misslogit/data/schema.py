from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Literal

from pydantic import BaseModel, Field, ValidationError, field_validator

from ..errors import SchemaError
from ..utils.hashing import canonical_hash


Role = Literal["outcome", "x1", "x2", "z", "w", "ignore"]


class ColumnSchema(BaseModel):
    """
    Column-role map of a CSV dataset.

    File grammar (JSON)::

        {
          "missing_token": "NA",        # optional, case-sensitive
          "delimiter": ",",             # optional
          "columns": {"stay": "outcome", "visits": "x1", "city": "x2",
                      "spend": "z", "travel": "w", "id": "ignore"}
        }

    Column order inside each role follows the order of ``columns``.
    """

    columns: Dict[str, Role]
    missing_token: str = Field(default="NA", min_length=1)
    delimiter: str = Field(default=",", min_length=1, max_length=1)

    @field_validator("columns")
    @classmethod
    def _check_roles(cls, columns: Dict[str, Role]) -> Dict[str, Role]:
        outcomes = [c for c, r in columns.items() if r == "outcome"]
        if len(outcomes) != 1:
            raise ValueError(f"exactly one outcome column required, got {outcomes}")

        for role in ("x1", "x2"):
            if not any(r == role for r in columns.values()):
                raise ValueError(f"at least one '{role}' column required")

        return columns

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    def role_columns(self, role: Role) -> List[str]:
        return [c for c, r in self.columns.items() if r == role]

    @property
    def outcome(self) -> str:
        return self.role_columns("outcome")[0]

    @property
    def declared_order(self) -> List[str]:
        """Non-ignored columns in declaration order (used when writing)."""
        return [c for c, r in self.columns.items() if r != "ignore"]

    # ------------------------------------------------------------------
    # File IO
    # ------------------------------------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> "ColumnSchema":
        try:
            with Path(path).open() as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise SchemaError(f"Cannot read schema file {path}: {e}") from e

        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise SchemaError(f"Invalid schema {path}: {e.errors()[0]['msg']}") from e

    @property
    def schema_hash(self) -> str:
        return canonical_hash(self.model_dump(mode="json"))
