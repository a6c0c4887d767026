"""Normalized discrete distributions over integers or integer tuples,
stored in log space."""

from __future__ import annotations

import math

from .logmath import LOG_ZERO, log_add, log_sum_exp


class PmfTable:
    """A finite pmf: mapping from integer (or integer-tuple) keys to log mass.

    Entries with zero mass are dropped on construction, mirroring the
    "absent outside the support" convention of the exact formulas.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: dict):
        self.entries = {k: v for k, v in entries.items() if v > LOG_ZERO}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def support(self):
        return sorted(self.entries)

    def log_prob(self, key) -> float:
        return self.entries.get(key, LOG_ZERO)

    def prob(self, key) -> float:
        return math.exp(self.log_prob(key))

    def total_mass(self) -> float:
        return math.exp(log_sum_exp(self.entries.values()))

    def probs(self) -> dict:
        return {k: math.exp(v) for k, v in self.entries.items()}

    def mean(self, component: int | None = None) -> float:
        """Expectation of the key, or of one tuple component."""
        total = 0.0
        for key, lp in self.entries.items():
            x = key if component is None else key[component]
            total += x * math.exp(lp)
        return total

    def marginal(self, component: int) -> "PmfTable":
        """Sum out every tuple component except the given one."""
        acc: dict = {}
        for key, lp in self.entries.items():
            sub = key[component]
            prev = acc.get(sub)
            acc[sub] = lp if prev is None else log_add(prev, lp)
        return PmfTable(acc)

    def map_keys(self, fn) -> "PmfTable":
        """Aggregate mass under a key transformation (e.g. s = k1 + k2 - k)."""
        acc: dict = {}
        for key, lp in self.entries.items():
            new = fn(key)
            prev = acc.get(new)
            acc[new] = lp if prev is None else log_add(prev, lp)
        return PmfTable(acc)

    def top_entries(self, n: int) -> list:
        """The n highest-mass entries as (key, prob), most probable first."""
        ranked = sorted(self.entries.items(), key=lambda kv: -kv[1])
        return [(k, math.exp(v)) for k, v in ranked[:n]]
