"""Per-row min-max scaling of data matrices to a fixed range.

Rows with zero spread are flagged degenerate: they map to 0 on the scaled
side and invert back to their constant value, which avoids division by zero
for signal components that never activate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 0.0  # exact zero-spread check; data rows are finite by contract


@dataclass
class RowScaler:
    mins: np.ndarray
    maxs: np.ndarray
    lo: float = -1.0
    hi: float = 1.0
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        self.mins = np.atleast_1d(np.asarray(self.mins, dtype=float))
        self.maxs = np.atleast_1d(np.asarray(self.maxs, dtype=float))
        if self.degenerate is None:
            self.degenerate = self.maxs - self.mins <= _EPS
        else:
            self.degenerate = np.asarray(self.degenerate, dtype=bool)

    @classmethod
    def fit(cls, rows, limits=(-1.0, 1.0)) -> "RowScaler":
        """Fit per-row limits on a (n_rows, n_cols) matrix or a single row."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return cls(rows.min(axis=1), rows.max(axis=1), lo=limits[0], hi=limits[1])

    @property
    def n_rows(self) -> int:
        return self.mins.size

    def _span(self) -> np.ndarray:
        span = self.maxs - self.mins
        span[self.degenerate] = 1.0  # placeholder, overwritten below
        return span

    def apply(self, data) -> np.ndarray:
        data = np.asarray(data, dtype=float)
        vec = data.ndim == 1
        cols = data.reshape(self.n_rows, -1)
        span = self._span()
        out = (cols - self.mins[:, None]) / span[:, None] * (self.hi - self.lo) + self.lo
        out[self.degenerate, :] = 0.0
        return out[:, 0] if vec else out

    def invert(self, data) -> np.ndarray:
        data = np.asarray(data, dtype=float)
        vec = data.ndim == 1
        cols = data.reshape(self.n_rows, -1)
        span = self._span()
        out = (cols - self.lo) / (self.hi - self.lo) * span[:, None] + self.mins[:, None]
        out[self.degenerate, :] = self.mins[self.degenerate, None]
        return out[:, 0] if vec else out

    def to_dict(self) -> dict:
        return {
            "mins": self.mins.tolist(),
            "maxs": self.maxs.tolist(),
            "lo": self.lo,
            "hi": self.hi,
        }

    @classmethod
    def from_dict(cls, d) -> "RowScaler":
        return cls(np.array(d["mins"]), np.array(d["maxs"]), lo=d["lo"], hi=d["hi"])
