"""Partial assignments of the input variables."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError


@dataclass(frozen=True)
class Restriction:
    """values[i] is 0, 1 or None (free) for variable x_{i+1}."""

    values: tuple

    def __post_init__(self):
        vals = tuple(None if v is None else int(v) for v in self.values)
        if any(v not in (None, 0, 1) for v in vals):
            raise InputError("restriction entries must be 0, 1 or None")
        object.__setattr__(self, "values", vals)

    @classmethod
    def free(cls, n: int) -> "Restriction":
        return cls((None,) * n)

    @classmethod
    def from_string(cls, s: str) -> "Restriction":
        """'01*1' style: '*' marks a free variable."""
        return cls(tuple(None if ch in "*-" else int(ch) for ch in s))

    def __len__(self):
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def free_vars(self) -> tuple[int, ...]:
        """0-based positions of the free variables."""
        return tuple(i for i, v in enumerate(self.values) if v is None)

    @property
    def fixed_mask(self) -> int:
        return sum(1 << i for i, v in enumerate(self.values) if v == 1)

    def complete(self, y) -> tuple[int, ...]:
        """Fill free positions, in order, with the bits of ``y``."""
        y = list(y)
        if len(y) != len(self.free_vars):
            raise InputError(f"completion needs {len(self.free_vars)} bits, got {len(y)}")
        it = iter(y)
        return tuple(next(it) if v is None else v for v in self.values)

    def __str__(self):
        return "".join("*" if v is None else str(v) for v in self.values)
