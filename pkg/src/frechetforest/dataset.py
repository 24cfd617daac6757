"""Learning sample container and its pairwise distance cache."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .curves import Curve, pairwise_frechet
from .errors import EmptyInput, InvalidParams

__all__ = ["Dataset", "DistanceCache"]


class DistanceCache:
    """Pairwise discrete Fréchet matrices over a whole dataset.

    ``inputs`` has shape ``(p, n, n)``, ``output`` has shape ``(n, n)``.
    Both are read-only once built and safe to share between workers.
    """

    def __init__(self, inputs: np.ndarray, output: np.ndarray):
        self.inputs = np.ascontiguousarray(inputs, dtype=np.float64)
        self.output = np.ascontiguousarray(output, dtype=np.float64)
        self.inputs.flags.writeable = False
        self.output.flags.writeable = False

    @classmethod
    def from_dataset(cls, dataset: "Dataset") -> "DistanceCache":
        n, p = dataset.n, dataset.p
        inputs = np.empty((p, n, n))
        for j in range(p):
            inputs[j] = pairwise_frechet(dataset.inputs[j])
        return cls(inputs, pairwise_frechet(dataset.outputs))


class Dataset:
    """``n`` observations of ``p`` curve-valued inputs and one curve output.

    ``inputs[j][i]`` is the curve of variable ``j`` for observation ``i``.
    ``outputs`` may be ``None`` for prediction-only data.
    """

    def __init__(
        self,
        inputs: Sequence[Sequence[Curve]],
        outputs: Sequence[Curve] | None,
        variable_names: Sequence[str] | None = None,
        obs_ids: Sequence[str] | None = None,
    ):
        self.inputs = [list(col) for col in inputs]
        if not self.inputs:
            raise EmptyInput("a dataset needs at least one input variable")
        n = len(self.inputs[0])
        if n == 0:
            raise EmptyInput("a dataset needs at least one observation")
        for j, col in enumerate(self.inputs):
            if len(col) != n:
                raise InvalidParams(f"variable {j} has {len(col)} curves, expected {n}")
        self.outputs = list(outputs) if outputs is not None else None
        if self.outputs is not None and len(self.outputs) != n:
            raise InvalidParams(f"{len(self.outputs)} outputs for {n} observations")
        if variable_names is None:
            variable_names = [f"X{j + 1}" for j in range(len(self.inputs))]
        self.variable_names = [str(v) for v in variable_names]
        if len(self.variable_names) != len(self.inputs):
            raise InvalidParams("one name per input variable required")
        if obs_ids is None:
            obs_ids = [str(i) for i in range(n)]
        self.obs_ids = [str(o) for o in obs_ids]
        if len(self.obs_ids) != n:
            raise InvalidParams("one identifier per observation required")
        self._cache = None

    @property
    def n(self) -> int:
        return len(self.inputs[0])

    @property
    def p(self) -> int:
        return len(self.inputs)

    def __repr__(self):
        return f"Dataset(n={self.n}, p={self.p})"

    def distances(self) -> DistanceCache:
        if self._cache is None:
            if self.outputs is None:
                raise EmptyInput("distance cache needs output curves")
            self._cache = DistanceCache.from_dataset(self)
        return self._cache

    def observation(self, i: int) -> dict[str, Curve]:
        return {name: col[i] for name, col in zip(self.variable_names, self.inputs)}

    def subset(self, obs) -> "Dataset":
        obs = [int(i) for i in obs]
        sub = Dataset(
            [[col[i] for i in obs] for col in self.inputs],
            [self.outputs[i] for i in obs] if self.outputs is not None else None,
            self.variable_names,
            [self.obs_ids[i] for i in obs],
        )
        if self._cache is not None:
            ix = np.asarray(obs)
            sub._cache = DistanceCache(
                self._cache.inputs[:, ix][:, :, ix],
                self._cache.output[np.ix_(ix, ix)],
            )
        return sub
