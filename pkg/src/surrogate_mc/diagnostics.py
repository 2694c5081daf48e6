"""
Plot-ready comparison data and toy series.

Nothing here draws figures; every output is an array or a tab-separated
table that any plotting tool can read.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import make_rng
from .features import FeatureSpec, Term, confidence_band, rho


@dataclass(frozen=True, eq=False)
class AcfPanel:
    name: str
    lags: np.ndarray
    target_values: np.ndarray
    surrogate_values: np.ndarray
    band: np.ndarray

    @property
    def discrepancy(self) -> np.ndarray:
        return self.surrogate_values - self.target_values

    @property
    def inside(self) -> np.ndarray:
        """Per-lag flag: surrogate within the band around the target."""
        return np.abs(self.discrepancy) <= self.band

    def table(self) -> np.ndarray:
        return np.column_stack([self.lags, self.target_values, self.surrogate_values,
                                self.target_values - self.band,
                                self.target_values + self.band])


PANEL_COLUMNS = ("lag", "target", "surrogate", "band_lo", "band_hi")


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    points: np.ndarray
    lag: int

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])


def acf_panels(x, z, L: int, K: int) -> dict[str, AcfPanel]:
    """The three correlation panels of target ``x`` against surrogate ``z``.

    Keys are ``"abs"`` (|x| with |x|, lags 1..K), ``"lev"`` (x with |x|,
    lags 1..L) and ``"ret"`` (x with x, lags 1..L). The band is the 99%
    white-noise half-width ``2.576 / sqrt(N - tau)`` with ``N = len(x)``.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    spec = FeatureSpec((Term("absolute", "absolute", K),
                        Term("centered", "absolute", L),
                        Term("centered", "centered", L)))
    tx = rho(x, spec).by_term(spec)
    tz = rho(z, spec).by_term(spec)
    panels = {}
    for k, name in enumerate(("abs", "lev", "ret")):
        lags = np.arange(1, spec.terms[k].max_lag + 1)
        panels[name] = AcfPanel(name, lags, tx[k], tz[k], confidence_band(x.size, lags))
    return panels


def ar1_generate(p: float, n: int, seed: int, burn_in: int = 0) -> np.ndarray:
    """``z_t = p z_{t-1} + e_t`` with standard normal noise.

    The first value is drawn from the stationary law N(0, 1/(1-p^2)), so
    no burn-in is needed; ``burn_in`` extra steps are discarded if given.
    """
    if not abs(p) < 1:
        raise ValueError("|p| must be < 1 for a stationary AR(1)")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    e = make_rng(seed).standard_normal(n + burn_in)
    z = np.empty(n + burn_in)
    z[0] = e[0] / np.sqrt(1.0 - p * p)
    for t in range(1, z.size):
        z[t] = p * z[t - 1] + e[t]
    return z[burn_in:]


def theoretical_ar1_acf(p: float, max_lag: int) -> np.ndarray:
    return p ** np.arange(1, max_lag + 1)


def sv_generate(n: int, seed: int, phi: float = 0.95, vol_of_vol: float = 0.3,
                leverage: float = -0.5, scale: float = 0.01) -> np.ndarray:
    """Stochastic-volatility returns with an AR(1) log-variance.

    ``h_t = phi h_{t-1} + vol_of_vol * eta_t`` and ``x_t = scale exp(h_t / 2) eps_t``,
    where ``eta_{t+1}`` has correlation ``leverage`` with ``eps_t``: a
    negative return raises the next day's volatility. Produces volatility
    clustering and a leverage-type cross-correlation on a known
    construction.
    """
    if not abs(phi) < 1:
        raise ValueError("|phi| must be < 1")
    if not -1 <= leverage <= 1:
        raise ValueError("leverage must lie in [-1, 1]")
    rng = make_rng(seed)
    eps = rng.standard_normal(n)
    xi = rng.standard_normal(n)
    h = np.empty(n)
    h[0] = vol_of_vol / np.sqrt(1 - phi * phi) * xi[0]
    s = np.sqrt(1 - leverage * leverage)
    for t in range(1, n):
        eta = leverage * eps[t - 1] + s * xi[t]
        h[t] = phi * h[t - 1] + vol_of_vol * eta
    return scale * np.exp(h / 2) * eps


def sine_generate(T: int, n: int) -> np.ndarray:
    """``sin(2 pi t / T)`` for ``t = 0..n-1``."""
    if T < 2:
        raise ValueError("period must be >= 2")
    if n < T:
        raise ValueError("need at least one full period")
    return np.sin(2 * np.pi * np.arange(n) / T)


def phase_diagram(z, lag: int) -> PhaseDiagram:
    z = np.asarray(z, dtype=float)
    lag = int(lag)
    if not 1 <= lag < z.size:
        raise ValueError(f"lag {lag} out of range for length {z.size}")
    return PhaseDiagram(np.column_stack([z[:-lag], z[lag:]]), lag)


def period_average(z, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and standard deviation over complete periods of length ``T``."""
    z = np.asarray(z, dtype=float)
    periods = z.size // T
    if periods < 2:
        raise ValueError("need at least 2 complete periods")
    block = z[:periods * T].reshape(periods, T)
    return block.mean(axis=0), block.std(axis=0)


def radial_rms(z, lag: int) -> float:
    """RMS distance of the phase-diagram points from the unit circle."""
    r = phase_diagram(z, lag).radii
    return float(np.sqrt(np.mean((r - 1.0) ** 2)))


def write_tsv(path, columns, table, notes=()):
    """Write a table with ``#`` comment lines and a ``#``-prefixed column header."""
    table = np.asarray(table)
    with open(path, "w") as fh:
        for note in notes:
            fh.write(f"# {note}\n")
        fh.write("# " + "\t".join(columns) + "\n")
        for row in table:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)
