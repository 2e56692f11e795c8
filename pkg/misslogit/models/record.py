from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional, Sequence, Tuple, Union

import numpy as np


# ============================================================
# Level
# ============================================================

def canonical_token(value: Union[str, int, float, Decimal]) -> str:
    """
    Canonical text form of a discrete covariate value.

    Numeric values become exact decimal strings without exponent or
    trailing zeros ("0.40" -> "0.4", "1.0" -> "1", "-0" -> "0").
    Floats go through their shortest repr so -0.3 stays "-0.3".
    Non-numeric text is kept verbatim (surrounding blanks stripped).
    """
    if isinstance(value, bool):
        value = int(value)

    if isinstance(value, float):
        value = repr(value)

    text = str(value).strip()

    try:
        number = Decimal(text)
    except InvalidOperation:
        return text

    if not number.is_finite():
        return text

    if number == number.to_integral_value():
        return str(int(number))

    return format(number.normalize(), "f")


@dataclass(frozen=True)
class Level:
    """
    A discrete value of X1, X2, Z or W.

    Two levels are equal iff their canonical tokens are identical;
    numeric meaning is only used when a design vector is built.
    """

    token: str

    @classmethod
    def of(cls, value: Union[str, int, float, Decimal]) -> "Level":
        return cls(canonical_token(value))

    @property
    def is_numeric(self) -> bool:
        try:
            Decimal(self.token)
        except InvalidOperation:
            return False
        return True

    @property
    def numeric(self) -> float:
        try:
            return float(Decimal(self.token))
        except InvalidOperation:
            raise ValueError(f"Level '{self.token}' has no numeric value") from None

    def __str__(self) -> str:
        return self.token


LevelVector = Tuple[Level, ...]


def _levels(values: Optional[Sequence]) -> Optional[LevelVector]:
    if values is None:
        return None
    return tuple(v if isinstance(v, Level) else Level.of(v) for v in values)


# ============================================================
# Pattern codes
# ============================================================

def derive_pattern(x1_present: bool, x2_present: bool) -> int:
    """(T,T)->1, (F,T)->2, (T,F)->3, (F,F)->4."""
    if x1_present and x2_present:
        return 1
    if x2_present:
        return 2
    if x1_present:
        return 3
    return 4


# ============================================================
# Record
# ============================================================

@dataclass(frozen=True)
class Record:
    """
    One sampled unit: outcome, the two possibly-missing covariate blocks,
    the always-observed covariates Z and surrogates W, and its pattern code.

    ``delta`` may be omitted; it is then derived from block presence.
    """

    y: int
    x1: Optional[LevelVector]
    x2: Optional[LevelVector]
    z: LevelVector
    w: LevelVector
    delta: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x1", _levels(self.x1))
        object.__setattr__(self, "x2", _levels(self.x2))
        object.__setattr__(self, "z", _levels(self.z) or ())
        object.__setattr__(self, "w", _levels(self.w) or ())

        if self.y not in (0, 1):
            raise ValueError(f"Outcome must be 0 or 1, got {self.y!r}")

        expected = derive_pattern(self.x1 is not None, self.x2 is not None)

        if self.delta == 0:
            object.__setattr__(self, "delta", expected)
        elif self.delta != expected:
            raise ValueError(
                f"Pattern {self.delta} inconsistent with block presence "
                f"(x1={'present' if self.x1 is not None else 'absent'}, "
                f"x2={'present' if self.x2 is not None else 'absent'})"
            )

    @property
    def v(self) -> LevelVector:
        return self.z + self.w

    @property
    def is_complete(self) -> bool:
        return self.delta == 1


# ============================================================
# Stratum key
# ============================================================

@dataclass(frozen=True)
class StratumKey:
    """(Y, V) conditioning cell with V = (Z, W)."""

    y: int
    v: LevelVector

    def describe(self) -> str:
        return f"y={self.y} v=({', '.join(l.token for l in self.v)})"

    def __str__(self) -> str:
        return self.describe()


def stratum_key(record: Record) -> StratumKey:
    return StratumKey(record.y, record.v)


# ============================================================
# Design vector
# ============================================================

@dataclass(frozen=True)
class DesignVector:
    """(1, x1, x2, z) flattened as floats."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 1 or entries.size == 0 or entries[0] != 1.0:
            raise ValueError("Design vector must be 1-D with leading entry 1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_record(cls, record: Record) -> "DesignVector":
        if record.x1 is None or record.x2 is None:
            raise ValueError("Design vector needs both covariate blocks")
        values = [1.0] + [l.numeric for l in record.x1 + record.x2 + record.z]
        return cls(np.array(values))

    def __len__(self) -> int:
        return self.entries.size

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)
