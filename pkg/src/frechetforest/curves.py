"""Curves and the discrete Fréchet distance between them.

A :class:`Curve` is a raw sequence of ``(time, value)`` samples.  The
distance only looks at the value sequence: time stamps carry ordering but
no weight, so curves sampled on different grids (or with different numbers
of points) compare by shape alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import EmptyCurve, InvalidCurve

__all__ = [
    "Curve",
    "discrete_frechet",
    "squared_output_distance",
    "pairwise_frechet",
    "cross_frechet",
]


@dataclass(frozen=True, eq=False)
class Curve:
    """One sampled trajectory.

    ``times`` must be strictly increasing and finite; ``values`` has the
    same length.  Both are stored as read-only float64 arrays.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise EmptyCurve("a curve needs at least one sample")
        if times.size != values.size:
            raise InvalidCurve(
                f"times and values differ in length ({times.size} != {values.size})"
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise InvalidCurve("curve samples must be finite")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InvalidCurve("curve times must be strictly increasing")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, start=0.0, stop=None):
        """Curve on a uniform grid; ``stop`` defaults to ``len(values) - 1``."""
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise EmptyCurve("a curve needs at least one sample")
        if stop is None:
            stop = start + values.size - 1
        return cls(np.linspace(start, stop, values.size), values)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self):
        return hash((self.times.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"Curve(n={len(self)}, t=[{self.times[0]:g}, {self.times[-1]:g}])"

    def to_dict(self):
        return {"times": self.times.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["times"], doc["values"])


@njit(cache=True)
def _dfd(a, b):
    # Eiter & Mannila recursion, one rolling row.
    m = b.shape[0]
    row = np.empty(m)
    row[0] = abs(a[0] - b[0])
    for j in range(1, m):
        row[j] = max(row[j - 1], abs(a[0] - b[j]))
    for i in range(1, a.shape[0]):
        diag = row[0]
        row[0] = max(row[0], abs(a[i] - b[0]))
        for j in range(1, m):
            up = row[j]
            best = min(up, row[j - 1], diag)
            row[j] = max(best, abs(a[i] - b[j]))
            diag = up
    return row[m - 1]


@njit(cache=True)
def _pairwise(flat, offsets):
    n = offsets.shape[0] - 1
    out = np.zeros((n, n))
    for i in range(n):
        a = flat[offsets[i]:offsets[i + 1]]
        for j in range(i + 1, n):
            d = _dfd(a, flat[offsets[j]:offsets[j + 1]])
            out[i, j] = d
            out[j, i] = d
    return out


@njit(cache=True)
def _cross(flat_a, off_a, flat_b, off_b):
    na = off_a.shape[0] - 1
    nb = off_b.shape[0] - 1
    out = np.empty((na, nb))
    for i in range(na):
        a = flat_a[off_a[i]:off_a[i + 1]]
        for j in range(nb):
            out[i, j] = _dfd(a, flat_b[off_b[j]:off_b[j + 1]])
    return out


def _values(curve):
    if isinstance(curve, Curve):
        return curve.values
    values = np.asarray(curve, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise EmptyCurve("cannot measure distance to an empty curve")
    return values


def _pack(curves):
    arrays = [_values(c) for c in curves]
    offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
    np.cumsum([a.size for a in arrays], out=offsets[1:])
    flat = np.concatenate(arrays) if arrays else np.empty(0)
    return flat, offsets


def discrete_frechet(a, b) -> float:
    """Discrete Fréchet distance between two curves.

    Both arguments may be :class:`Curve` objects or plain value sequences.
    Ground distance is ``|a_i - b_j|``; time stamps are ignored.

    >>> discrete_frechet([0.0, 1.0, 0.0], [0.0, 0.0])
    1.0
    """
    return float(_dfd(_values(a), _values(b)))


def squared_output_distance(a, b) -> float:
    """Square of :func:`discrete_frechet`, the per-observation error unit."""
    d = discrete_frechet(a, b)
    return d * d


def pairwise_frechet(curves: Sequence[Curve]) -> np.ndarray:
    """Symmetric matrix of discrete Fréchet distances, zero diagonal."""
    flat, offsets = _pack(curves)
    return _pairwise(flat, offsets)


def cross_frechet(left: Sequence[Curve], right: Sequence[Curve]) -> np.ndarray:
    """``len(left) x len(right)`` matrix of distances."""
    fa, oa = _pack(left)
    fb, ob = _pack(right)
    return _cross(fa, oa, fb, ob)
