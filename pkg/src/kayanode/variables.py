"""The seven forecast variables and their fixed ordering.

The order is load-bearing: state vectors, CSV columns, normalizer entries and
network outputs all use it. The three electricity shares sit in the last three
positions so the simplex handling can slice them off.
"""
from __future__ import annotations

import enum


class Variable(enum.IntEnum):
    POPULATION = 0
    GDP_PER_CAPITA = 1
    ENERGY_INTENSITY = 2
    CARBON_INTENSITY = 3
    SHARE_FOSSIL = 4
    SHARE_NUCLEAR = 5
    SHARE_RENEWABLE = 6

    @property
    def key(self) -> str:
        return self.name.lower()

    @classmethod
    def from_key(cls, key: str) -> "Variable":
        try:
            return cls[key.upper()]
        except KeyError:
            raise ValueError(f"unknown variable {key!r}") from None


#: Number of state variables.
N_VARIABLES = 7

#: Variable names in canonical order.
VARIABLE_KEYS = tuple(v.key for v in Variable)

#: Index range of the three electricity-share variables.
SHARE_SLICE = slice(4, 7)

#: Indices of the four Kaya factors (population through carbon intensity).
KAYA_SLICE = slice(0, 4)
