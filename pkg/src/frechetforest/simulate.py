"""Simulated curve-regression data: two structured inputs whose typical
shapes are switched by binary group labels, an output whose shape depends
on the label pair, and optional Brownian-motion noise inputs.

Inputs live on ``[0, 1]`` and the output on ``[1.1, 2]``.  Group ``G = 0``
selects shape ``k = 1`` and ``G = 1`` selects ``k = 2``; the output shape
for ``(G1, G2)`` is ``g[G1 + 1, G2 + 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve
from .dataset import Dataset
from .errors import DomainError, InvalidGrid, InvalidParams

__all__ = [
    "SimConfig",
    "SimTruth",
    "typical_input_curve",
    "typical_output_curve",
    "brownian_path",
    "simulate_dataset",
    "X_SUPPORT",
    "Y_SUPPORT",
]

X_SUPPORT = (0.0, 1.0)
Y_SUPPORT = (1.1, 2.0)


def typical_input_curve(j: int, k: int, t):
    """Typical input shape ``f_{j,k}`` evaluated at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=np.float64)
    if (j, k) == (1, 1):
        out = 0.5 * t + 0.1 * np.sin(6 * t)
    elif (j, k) == (1, 2):
        out = 0.3 - 0.7 * (t - 0.45) ** 2
    elif (j, k) == (2, 1):
        out = 2 * (t - 0.5) ** 2 - 0.3 * t
    elif (j, k) == (2, 2):
        out = 0.2 - 0.3 * t + 0.1 * np.cos(8 * t)
    else:
        raise InvalidParams(f"no typical input curve f_{j},{k}")
    return out[()] if out.ndim == 0 else out


def typical_output_curve(a: int, b: int, t):
    """Typical output shape ``g_{a,b}`` evaluated at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=np.float64)
    if (a, b) == (1, 1):
        out = t + 0.3 * np.sin(10 * t)
    elif (a, b) == (1, 2):
        out = t + 2 * (t - 1.7) ** 2
    elif (a, b) == (2, 1):
        out = 1.5 * np.exp(-((t - 1.5) ** 2) / 0.5) - 0.1 * t * np.cos(10 * t)
    elif (a, b) == (2, 2):
        if np.any(t <= 1.0):
            raise DomainError("g_2,2 needs t > 1")
        out = 2 * np.log(13 * (t - 1)) / (1 + t)
    else:
        raise InvalidParams(f"no typical output curve g_{a},{b}")
    return out[()] if out.ndim == 0 else out


def brownian_path(grid, rng) -> Curve:
    """Standard Brownian motion sampled on ``grid`` (which must start at 0)."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise InvalidGrid("grid must be strictly increasing and start at 0")
    rng = np.random.default_rng(rng)
    steps = rng.normal(0.0, 1.0, size=grid.size - 1) * np.sqrt(np.diff(grid))
    return Curve(grid, np.concatenate([[0.0], np.cumsum(steps)]))


@dataclass(frozen=True)
class SimConfig:
    n: int = 100
    noise_vars: int = 0
    x_grid_size: int = 51
    y_grid_size: int = 46
    seed: int = 0
    input_sd: float = 0.03
    output_sd: float = 0.05
    beta_sd: float = 0.1

    def validate(self) -> None:
        if self.n < 1:
            raise InvalidParams("n must be at least 1")
        if self.noise_vars < 0:
            raise InvalidParams("noise_vars must be non-negative")
        if self.x_grid_size < 2 or self.y_grid_size < 2:
            raise InvalidParams("grid sizes must be at least 2")
        if min(self.input_sd, self.output_sd, self.beta_sd) < 0:
            raise InvalidParams("standard deviations must be non-negative")

    @classmethod
    def noiseless(cls, **kwargs) -> "SimConfig":
        """Zero white noise and unit dilation, for exact-shape checks."""
        return cls(input_sd=0.0, output_sd=0.0, beta_sd=0.0, **kwargs)


@dataclass
class SimTruth:
    groups: np.ndarray  # (n, 2) in {0, 1}
    beta: np.ndarray

    @property
    def output_shape(self) -> list:
        """``(a, b)`` index of the generating output curve for each row."""
        return [(int(g1) + 1, int(g2) + 1) for g1, g2 in self.groups]


def simulate_dataset(config: SimConfig) -> tuple[Dataset, SimTruth]:
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n
    groups = rng.integers(0, 2, size=(n, 2))
    beta = rng.normal(1.0, config.beta_sd, size=n) if config.beta_sd > 0 else np.ones(n)
    tx = np.linspace(*X_SUPPORT, config.x_grid_size)
    ty = np.linspace(*Y_SUPPORT, config.y_grid_size)

    shapes_x = {(j, k): typical_input_curve(j, k, tx) for j in (1, 2) for k in (1, 2)}
    shapes_y = {(a, b): typical_output_curve(a, b, ty) for a in (1, 2) for b in (1, 2)}

    inputs = []
    for j in (1, 2):
        noise = rng.normal(0.0, 1.0, size=(n, tx.size)) * config.input_sd
        col = []
        for i in range(n):
            vals = beta[i] * shapes_x[j, groups[i, j - 1] + 1] + noise[i]
            col.append(Curve(tx, vals))
        inputs.append(col)

    noise = rng.normal(0.0, 1.0, size=(n, ty.size)) * config.output_sd
    outputs = [
        Curve(ty, beta[i] * shapes_y[groups[i, 0] + 1, groups[i, 1] + 1] + noise[i])
        for i in range(n)
    ]

    for _ in range(config.noise_vars):
        inputs.append([brownian_path(tx, rng) for _ in range(n)])

    names = ["X1", "X2"] + [f"N{k + 1}" for k in range(config.noise_vars)]
    obs_ids = [f"obs{i:04d}" for i in range(n)]
    return Dataset(inputs, outputs, names, obs_ids), SimTruth(groups, beta)
