"""Deterministic local strategies ``J: settings -> outcomes``.

Outcomes and settings are 0-based throughout the package.  A strategy
space for ``m`` settings and ``o`` outcomes holds all ``o**m`` assignments
in lexicographic order, so the strategy with rank ``k`` is the base-``o``
expansion of ``k`` with the first setting as the most significant digit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_CAP = 2**20


@dataclass(frozen=True)
class DeterministicStrategy:
    assignment: tuple[int, ...]
    o: int

    def __post_init__(self):
        if any(not 0 <= a < self.o for a in self.assignment):
            raise DomainError(f"assignment {self.assignment} out of range for o={self.o}")

    @property
    def m(self) -> int:
        return len(self.assignment)


def response_distribution(j: DeterministicStrategy, x: int) -> np.ndarray:
    """One-hot outcome distribution of strategy ``j`` at setting ``x``."""
    if not 0 <= x < j.m:
        raise DomainError(f"setting {x} out of range for m={j.m}")
    col = np.zeros(j.o)
    col[j.assignment[x]] = 1.0
    return col


@dataclass(frozen=True)
class StrategySpace:
    """All ``o**m`` deterministic strategies, lexicographically ordered."""

    m: int
    o: int

    @property
    def size(self) -> int:
        return self.o**self.m

    def __len__(self) -> int:
        return self.size

    @cached_property
    def table(self) -> np.ndarray:
        """Integer array ``(size, m)``; row ``k`` is the assignment of rank ``k``."""
        k = np.arange(self.size)
        powers = self.o ** np.arange(self.m - 1, -1, -1)
        return (k[:, None] // powers[None, :]) % self.o

    @cached_property
    def selector(self) -> np.ndarray:
        """Array ``(size, m, o)`` with ``selector[k, x, a] = delta(a, J_k(x))``."""
        sel = np.zeros((self.size, self.m, self.o))
        k = np.arange(self.size)[:, None]
        x = np.arange(self.m)[None, :]
        sel[k, x, self.table] = 1.0
        return sel

    def __getitem__(self, k: int) -> DeterministicStrategy:
        return DeterministicStrategy(tuple(int(a) for a in self.table[k]), self.o)

    def __iter__(self):
        return (self[k] for k in range(self.size))

    def rank(self, j: DeterministicStrategy) -> int:
        """Lexicographic index of ``j``, inverse of ``__getitem__``."""
        if j.m != self.m or j.o != self.o:
            raise DomainError("strategy does not belong to this space")
        k = 0
        for a in j.assignment:
            k = k * self.o + a
        return k


def enumerate_strategies(m: int, o: int, cap: int = DEFAULT_CAP) -> StrategySpace:
    if m < 1 or o < 1:
        raise DomainError(f"need m >= 1 and o >= 1, got m={m}, o={o}")
    size = o**m
    if size > cap:
        raise CapacityError(size, cap)
    return StrategySpace(m, o)
