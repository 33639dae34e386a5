"""Centralized tolerance pack, threaded explicitly through audits."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    incidence: float = 1e-9
    rank_cutoff: float = 1e-8
    closure: float = 1e-7
    # two distinct-by-trail elements closer than this are flagged coincident
    coincidence: float = 1e-6

    def as_dict(self) -> dict:
        return {
            "incidence": self.incidence,
            "rank_cutoff": self.rank_cutoff,
            "closure": self.closure,
            "coincidence": self.coincidence,
        }


DEFAULT = Tolerances()


def from_env(base: Tolerances = DEFAULT) -> Tolerances:
    """Apply PONCELET_TOL overrides, e.g. "incidence=1e-8,closure=1e-6"."""
    raw = os.environ.get("PONCELET_TOL")
    if not raw:
        return base
    overrides = {}
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in ("incidence", "rank_cutoff", "closure", "coincidence"):
            raise ValueError(f"unknown tolerance key in PONCELET_TOL: {key!r}")
        overrides[key] = float(value)
    return replace(base, **overrides)
