from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError


@dataclass
class MultiSourceDataset:
    """M aligned real matrices over the same N objects (rows = objects)."""

    sources: list[np.ndarray]
    ids: list[str] | None = None
    names: list[str] | None = None
    feature_names: list[list[str]] | None = field(default=None, repr=False)

    def __post_init__(self):
        srcs = []
        for m, X in enumerate(self.sources):
            X = np.asarray(X, dtype=float)
            if X.ndim == 1:
                X = X[:, None]
            if X.ndim != 2:
                raise DataError(f"source {m} must be a 2-D matrix")
            if not np.all(np.isfinite(X)):
                raise DataError(f"source {m} contains non-finite values")
            srcs.append(X)
        if not srcs:
            raise DataError("need at least one source")
        N = srcs[0].shape[0]
        for m, X in enumerate(srcs):
            if X.shape[0] != N:
                raise DataError(f"source {m} has {X.shape[0]} rows, expected {N}")
        self.sources = srcs
        if self.ids is None:
            self.ids = [str(i + 1) for i in range(N)]
        if len(self.ids) != N:
            raise DataError("id list does not match the number of objects")
        if self.names is None:
            self.names = [f"source{m + 1}" for m in range(len(srcs))]
        if self.feature_names is None:
            self.feature_names = [[f"f{d + 1}" for d in range(X.shape[1])] for X in srcs]

    @property
    def N(self) -> int:
        return self.sources[0].shape[0]

    @property
    def M(self) -> int:
        return len(self.sources)

    @property
    def dims(self) -> list[int]:
        return [X.shape[1] for X in self.sources]

    def concatenated(self) -> np.ndarray:
        return np.hstack(self.sources)

    def equals(self, other: "MultiSourceDataset") -> bool:
        return (self.ids == other.ids and self.names == other.names
                and self.feature_names == other.feature_names
                and len(self.sources) == len(other.sources)
                and all(np.array_equal(a, b) for a, b in zip(self.sources, other.sources)))
