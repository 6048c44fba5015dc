"""Per-iteration output record, the unit emitted by runs and the CLI."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class IterationRecord:
    """Snapshot after iteration k.

    p_e is the encryption error against a paired plaintext run and g_e the
    distance to a reference optimizer; both are None when the corresponding
    comparison data is unavailable.
    """

    k: int
    x: np.ndarray
    lam: np.ndarray
    eps: float
    p_e: float | None = None
    g_e: float | None = None

    def __post_init__(self):
        if self.p_e is not None and self.p_e < 0:
            raise ValueError("encryption error cannot be negative")
        if self.g_e is not None and self.g_e < 0:
            raise ValueError("optimality gap cannot be negative")
