"""
Empirical unconditional distribution and inverse-transform sampling.

The CDF table pairs the sorted sample with midpoint plotting positions
``(i + 0.5) / N``. Sampling interpolates linearly between knots and
truncates to the historical extremes outside ``[u_0, u_{N-1}]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Offset of the plotting position ``(i + PLOTTING_OFFSET) / N``.
PLOTTING_OFFSET = 0.5


def make_rng(seed, stream: int | None = None) -> np.random.Generator:
    """PCG64 generator for ``seed``.

    ``stream`` selects an independent child stream of the same seed
    (``SeedSequence(seed, spawn_key=(stream,))``) so that sampling and
    annealing can share one user-facing seed without sharing random
    numbers. Independent realizations use :func:`spawn_seeds`.
    """
    if stream is None:
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def spawn_seeds(base_seed: int, count: int) -> list[int]:
    """Derive ``count`` independent 64-bit seeds from ``base_seed``.

    Seed ``k`` is the first 64-bit word of
    ``SeedSequence(base_seed).spawn(count)[k]``; the result for index ``k``
    does not depend on ``count``.
    """
    children = np.random.SeedSequence(base_seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    sorted_values: np.ndarray
    cdf_levels: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.sorted_values, dtype=float)
        u = np.asarray(self.cdf_levels, dtype=float)
        if x.ndim != 1 or x.shape != u.shape or x.size < 1:
            raise ValueError("values and levels must be 1-d of equal, non-zero length")
        if np.any(np.diff(x) < 0):
            raise ValueError("sorted_values must be non-decreasing")
        if np.any(np.diff(u) <= 0) or u[0] <= 0 or u[-1] >= 1:
            raise ValueError("cdf_levels must be strictly increasing inside (0, 1)")
        x.flags.writeable = False
        u.flags.writeable = False
        object.__setattr__(self, "sorted_values", x)
        object.__setattr__(self, "cdf_levels", u)

    def __len__(self):
        return self.sorted_values.size

    @property
    def x_min(self) -> float:
        return float(self.sorted_values[0])

    @property
    def x_max(self) -> float:
        return float(self.sorted_values[-1])

    def ppf(self, u):
        """Vectorised inverse transform (no range check)."""
        return np.interp(u, self.cdf_levels, self.sorted_values)

    def cdf(self, x):
        """Source CDF: piecewise linear between knots, flat in the clipped tails.

        ``P(X <= x)`` for a draw from :func:`sample_iid`; the truncated tail
        mass sits as atoms on ``x_min`` and ``x_max``.
        """
        x = np.asarray(x, dtype=float)
        xs, us = self.sorted_values, self.cdf_levels
        # right-continuous: ties and atoms take the highest level at that value
        hi = np.searchsorted(xs, x, side="right")
        out = np.empty(x.shape)
        out[hi == 0] = 0.0
        full = hi == xs.size
        out[full] = 1.0
        mid = ~(full | (hi == 0))
        k = hi[mid]
        x0, x1 = xs[k - 1], xs[k]
        u0, u1 = us[k - 1], us[k]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(x1 > x0, (x[mid] - x0) / (x1 - x0), 0.0)
        out[mid] = u0 + frac * (u1 - u0)
        return out

    def save(self, path, header: str | None = None):
        with open(path, "w") as fh:
            if header:
                for line in header.splitlines():
                    fh.write(f"# {line}\n")
            fh.write("# value\tlevel\n")
            for x, u in zip(self.sorted_values, self.cdf_levels):
                fh.write(f"{float(x)!r}\t{float(u)!r}\n")

    @classmethod
    def load(cls, path) -> "EmpiricalDistribution":
        table = np.loadtxt(path, comments="#", ndmin=2, dtype=float)
        return cls(table[:, 0], table[:, 1])


@dataclass(frozen=True, eq=False)
class SampleDraw:
    values: np.ndarray
    seed: int
    n: int


def fit_empirical_cdf(r) -> EmpiricalDistribution:
    """Build the CDF table of a series (ReturnSeries or array)."""
    values = np.asarray(r, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("need at least 2 observations to fit a CDF")
    if not np.all(np.isfinite(values)):
        raise ValueError("cannot fit a CDF to non-finite values")
    n = values.size
    levels = (np.arange(n) + PLOTTING_OFFSET) / n
    return EmpiricalDistribution(np.sort(values, kind="stable"), levels)


def inverse_transform(d: EmpiricalDistribution, u: float) -> float:
    """Map ``u`` in [0, 1] to a value by linear interpolation in the table.

    Below the first level the result is ``x_min``, above the last it is
    ``x_max``.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    return float(d.ppf(u))


def sample_iid(d: EmpiricalDistribution, n: int, seed: int) -> SampleDraw:
    """Draw ``n`` i.i.d. values from ``d``; deterministic given ``seed``."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    u = make_rng(seed).random(n)
    return SampleDraw(d.ppf(u), int(seed), n)


def folded_cdf(d: EmpiricalDistribution) -> np.ndarray:
    """Mountain-plot coordinates: ``(x, level)`` for x <= 0, ``(x, 1 - level)`` above.

    Returns an ``(N, 2)`` array ordered by x.
    """
    x = d.sorted_values
    p = np.where(x <= 0, d.cdf_levels, 1.0 - d.cdf_levels)
    return np.column_stack([x, p])


def ks_at_knots(d: EmpiricalDistribution, sample) -> float:
    """Kolmogorov-Smirnov distance between ``sample`` and ``d`` at the knots of ``d``."""
    sample = np.sort(np.asarray(sample, dtype=float))
    knots = np.unique(d.sorted_values)
    ecdf = np.searchsorted(sample, knots, side="right") / sample.size
    return float(np.max(np.abs(ecdf - d.cdf(knots))))
