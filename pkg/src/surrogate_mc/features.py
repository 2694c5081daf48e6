"""
Lagged correlation features and the surrogate objective.

For a mean-removed series ``u`` and transforms ``f``, ``g`` drawn from
{centered, absolute, square}::

    C_fg(tau) = mean_t f(u_t) g(u_{t-tau}) / sqrt(mean f(u)^2 * mean g(u)^2)

The numerator averages the ``N - tau`` overlapping pairs (or all ``N`` with
periodic boundaries); the denominator averages all ``N`` points and is
therefore invariant under any permutation of ``u``. That invariance is what
makes :meth:`ObjectiveState.swap_delta` cost O(lags) instead of O(N * lags).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

KINDS = {"centered": 0, "absolute": 1, "square": 2}
MODES = ("per-lag-l1", "paper-literal")

#: two-sided 99% normal quantile used for the white-noise confidence band
BAND_Z = 2.576

#: accepted swaps between full recomputes of the lag sums
RECOMPUTE_EVERY = 1_000_000


class DegenerateSeriesError(ValueError):
    """A transform of the series has zero mean square, so C is undefined."""


@dataclass(frozen=True)
class Term:
    f: str
    g: str
    max_lag: int
    weight: float = 1.0

    def __post_init__(self):
        for kind in (self.f, self.g):
            if kind not in KINDS:
                raise ValueError(f"unknown transform {kind!r}; choose from {list(KINDS)}")
        if int(self.max_lag) < 1:
            raise ValueError("max_lag must be >= 1")
        if not self.weight > 0:
            raise ValueError("weights must be positive")


@dataclass(frozen=True, eq=False)
class FeatureSpec:
    """Which correlation terms make up the feature vector, and how to compare them.

    Exactly one of ``terms`` or ``target_series`` is active. With a
    ``target_series`` the objective is the mean squared difference between
    the candidate series and that fixed series.
    """

    terms: tuple[Term, ...] = ()
    mode: str = "per-lag-l1"
    circular: bool = False
    target_series: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.target_series is not None:
            if self.terms:
                raise ValueError("use either correlation terms or a target series, not both")
            y = np.array(self.target_series, dtype=float)
            y.flags.writeable = False
            object.__setattr__(self, "target_series", y)
        elif not self.terms:
            raise ValueError("a feature spec needs at least one term")

    @property
    def target_mode(self) -> bool:
        return self.target_series is not None

    @property
    def n_entries(self) -> int:
        return sum(int(t.max_lag) for t in self.terms)

    @property
    def max_lag(self) -> int:
        return max((int(t.max_lag) for t in self.terms), default=0)

    def validate(self, n: int):
        if self.target_mode:
            if self.target_series.size != n:
                raise ValueError(
                    f"target series has length {self.target_series.size}, series has {n}")
            return
        for t in self.terms:
            if t.max_lag >= n:
                raise ValueError(f"max_lag {t.max_lag} must be < series length {n}")

    def labels(self) -> np.ndarray:
        """``(term index, lag)`` for every entry, in feature-vector order."""
        return np.array([(k, tau) for k, t in enumerate(self.terms)
                         for tau in range(1, t.max_lag + 1)], dtype=int).reshape(-1, 2)

    def with_mode(self, mode: str) -> "FeatureSpec":
        return FeatureSpec(self.terms, mode, self.circular, self.target_series)

    # -- constructors -----------------------------------------------------
    @classmethod
    def acf(cls, max_lag: int, **kw) -> "FeatureSpec":
        """Plain autocorrelation of the centered series up to ``max_lag``."""
        return cls((Term("centered", "centered", max_lag),), **kw)

    @classmethod
    def stylized(cls, L: int, K: int, **kw) -> "FeatureSpec":
        """Return ACF and leverage up to lag ``L``, |x| and x^2 ACFs up to ``K``."""
        return cls((
            Term("centered", "centered", L),
            Term("centered", "absolute", L),
            Term("absolute", "absolute", K),
            Term("square", "square", K),
        ), **kw)

    @classmethod
    def preset(cls, name: str, **kw) -> "FeatureSpec":
        if name == "sp500":
            return cls.stylized(40, 200, **kw)
        raise ValueError(f"unknown preset {name!r}")

    @classmethod
    def deterministic(cls, target) -> "FeatureSpec":
        return cls(target_series=np.asarray(target, dtype=float))

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        out = {"mode": self.mode, "circular": self.circular,
               "terms": [{"f": t.f, "g": t.g, "max_lag": int(t.max_lag),
                          "weight": float(t.weight)} for t in self.terms]}
        if self.target_mode:
            out["target_series"] = self.target_series.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        terms = tuple(Term(t["f"], t["g"], int(t["max_lag"]), float(t.get("weight", 1.0)))
                      for t in d.get("terms", ()))
        target = d.get("target_series")
        return cls(terms, d.get("mode", "per-lag-l1"), bool(d.get("circular", False)),
                   None if target is None else np.asarray(target, dtype=float))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FeatureSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Per-lag correlation values, ordered by (term, lag).

    In deterministic-target mode the entries are the series itself.
    """

    entries: np.ndarray

    def __len__(self):
        return self.entries.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def by_term(self, spec: FeatureSpec) -> list[np.ndarray]:
        off = _layout(spec)[3]
        return [self.entries[off[k]:off[k + 1]] for k in range(len(spec.terms))]


# -- helpers -----------------------------------------------------------------

def transforms(u) -> np.ndarray:
    """``(3, N)`` stack of centered, absolute and squared values of ``u``."""
    u = np.asarray(u, dtype=float)
    zc = u - u.mean()
    return np.ascontiguousarray(np.stack([zc, np.abs(zc), zc * zc]))


def _layout(spec: FeatureSpec):
    fk = np.array([KINDS[t.f] for t in spec.terms], dtype=np.int64)
    gk = np.array([KINDS[t.g] for t in spec.terms], dtype=np.int64)
    lags = np.array([t.max_lag for t in spec.terms], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lags)]).astype(np.int64)
    return fk, gk, lags, offsets


def _mean_square(row: np.ndarray) -> float:
    return float(np.dot(row, row)) / row.size


def _norms(V, fk, gk) -> np.ndarray:
    ms = [_mean_square(V[r]) for r in range(V.shape[0])]
    norms = np.array([np.sqrt(ms[f] * ms[g]) for f, g in zip(fk, gk)])
    if np.any(norms <= 0) or not np.all(np.isfinite(norms)):
        raise DegenerateSeriesError("series is constant under a feature transform")
    return norms


def _entry_scale(spec: FeatureSpec, n: int, norms) -> np.ndarray:
    """Multiplier turning a raw lag sum into the correlation value."""
    labels = spec.labels()
    counts = np.full(labels.shape[0], float(n)) if spec.circular else n - labels[:, 1].astype(float)
    return 1.0 / (counts * norms[labels[:, 0]])


def _entry_weights(spec: FeatureSpec) -> np.ndarray:
    return np.concatenate([np.full(t.max_lag, float(t.weight)) for t in spec.terms])


def confidence_band(n: int, lags, circular: bool = False) -> np.ndarray:
    """99% white-noise band ``2.576 / sqrt(n - tau)`` for each lag."""
    lags = np.asarray(lags, dtype=float)
    pairs = np.full(lags.shape, float(n)) if circular else n - lags
    return BAND_Z / np.sqrt(pairs)


def band_tolerance(spec: FeatureSpec, n: int) -> np.ndarray:
    """Per-entry band half-width, divided by the entry's weight."""
    labels = spec.labels()
    return confidence_band(n, labels[:, 1], spec.circular) / _entry_weights(spec)


# -- public operations ---------------------------------------------------------

def cross_correlation(u, f_kind: str, g_kind: str, tau: int, circular: bool = False) -> float:
    """Correlation of ``f(u_t)`` with ``g(u_{t-tau})`` on the mean-removed series.

    ``tau = 0`` is allowed for diagnostics. Raises DegenerateSeriesError if
    either transform is identically zero.
    """
    V = transforms(u)
    n = V.shape[1]
    tau = int(tau)
    if not 0 <= tau < n:
        raise ValueError(f"lag {tau} out of range for length {n}")
    F, G = V[KINDS[f_kind]], V[KINDS[g_kind]]
    norm = _norms(V, np.array([KINDS[f_kind]]), np.array([KINDS[g_kind]]))[0]
    if circular:
        num = float(np.dot(F, np.roll(G, tau))) / n
    else:
        num = float(np.dot(F[tau:], G[:n - tau])) / (n - tau)
    return num / norm


def rho(u, spec: FeatureSpec) -> FeatureVector:
    """Feature vector of ``u``: every term at every lag ``1..max_lag``."""
    u = np.asarray(u, dtype=float)
    spec.validate(u.size)
    if spec.target_mode:
        return FeatureVector(u.copy())
    V = transforms(u)
    fk, gk, lags, offsets = _layout(spec)
    S = np.empty(spec.n_entries)
    K.lag_sums(V, fk, gk, lags, offsets, spec.circular, S)
    return FeatureVector(S * _entry_scale(spec, u.size, _norms(V, fk, gk)))


def objective_delta(target, candidate, spec: FeatureSpec) -> float:
    """Discrepancy between two feature vectors.

    per-lag-l1 sums weighted absolute differences; paper-literal takes the
    absolute difference of the weighted totals, so errors may cancel;
    deterministic-target mode is the mean squared difference.
    """
    t = np.asarray(target, dtype=float)
    c = np.asarray(candidate, dtype=float)
    if t.shape != c.shape:
        raise ValueError(f"feature vectors differ in length: {t.size} vs {c.size}")
    if spec.target_mode:
        return float(np.mean((c - t) ** 2))
    w = _entry_weights(spec)
    if w.size != t.size:
        raise ValueError("feature vectors do not match the feature spec")
    if spec.mode == "paper-literal":
        return float(abs(np.dot(w, t) - np.dot(w, c)))
    return float(np.dot(w, np.abs(t - c)))


@dataclass(frozen=True, eq=False)
class SwapUpdate:
    """Lag-sum adjustments for one proposed swap, tied to a state version."""

    i: int
    j: int
    sum_deltas: np.ndarray
    new_delta: float
    n_outside: int
    version: int


class ObjectiveState:
    """Mutable objective for one annealing chain.

    Holds the candidate series (bitwise values, permuted in place), its
    transform stack, per-lag numerator sums and the fixed normalisations.

    Parameters
    ----------
    z : array_like
        Candidate series. It is mean-removed internally for correlation
        features; the raw values are what get permuted and reported.
    target : FeatureVector
        Features of the data being imitated.
    spec : FeatureSpec
    tolerance : array_like, optional
        Per-entry discrepancy tolerance used to count entries outside the
        band; defaults to :func:`band_tolerance`.
    recompute_every : int
        Accepted swaps between full recomputes of the lag sums.
    """

    def __init__(self, z, target, spec: FeatureSpec, tolerance=None,
                 recompute_every: int = RECOMPUTE_EVERY):
        raw = np.array(z, dtype=float)
        if raw.ndim != 1 or raw.size < 2:
            raise ValueError("need a 1-d series of length >= 2")
        spec.validate(raw.size)
        self.spec = spec
        self.raw = raw
        self.n = raw.size
        self.target = np.ascontiguousarray(np.asarray(target, dtype=float))
        self.recompute_every = int(recompute_every)
        self.version = 0
        self._since_recompute = 0
        if spec.target_mode:
            if self.target.size != self.n:
                raise ValueError("target length differs from the series")
            self.V = raw.reshape(1, -1).copy()
            self.fk = self.gk = self.lags = np.zeros(0, dtype=np.int64)
            self.offsets = np.zeros(1, dtype=np.int64)
            self.S = np.zeros(0)
            self.scale = self.weight = self.tol = np.zeros(0)
        else:
            if self.target.size != spec.n_entries:
                raise ValueError(
                    f"target has {self.target.size} entries, spec needs {spec.n_entries}")
            self.V = transforms(raw)
            self.fk, self.gk, self.lags, self.offsets = _layout(spec)
            self.norms = _norms(self.V, self.fk, self.gk)
            self.scale = _entry_scale(spec, self.n, self.norms)
            self.weight = _entry_weights(spec)
            self.tol = (band_tolerance(spec, self.n) if tolerance is None
                        else np.broadcast_to(np.asarray(tolerance, float), self.target.shape).copy())
            self.S = np.empty(spec.n_entries)
        self._dS = np.zeros(self.S.size)
        self.recompute()

    @property
    def literal(self) -> bool:
        return self.spec.mode == "paper-literal"

    def fresh_sums(self) -> np.ndarray:
        """Lag sums recomputed from scratch, without touching the state."""
        out = np.empty(self.S.size)
        K.lag_sums(self.V, self.fk, self.gk, self.lags, self.offsets, self.spec.circular, out)
        return out

    def recompute(self):
        """Rebuild lag sums and objective from the current series."""
        if self.spec.target_mode:
            self.delta = K.mse(self.raw, self.target)
            self.n_outside = 1
        else:
            self.S[:] = self.fresh_sums()
            self.delta, self.n_outside = K.evaluate(
                self.S, self._dS, False, self.scale, self.target, self.weight,
                self.tol, self.literal)
        self._since_recompute = 0

    def features(self) -> FeatureVector:
        if self.spec.target_mode:
            return FeatureVector(self.raw.copy())
        return FeatureVector(self.S * self.scale)

    def discrepancies(self) -> np.ndarray:
        return self.target - self.features().entries

    def _check_pair(self, i, j):
        i, j = int(i), int(j)
        if i == j:
            raise ValueError("swap indices must differ")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"swap ({i}, {j}) out of range for length {self.n}")
        return i, j

    def swap_delta(self, i: int, j: int) -> tuple[float, SwapUpdate]:
        """Objective after exchanging positions ``i`` and ``j``, state untouched."""
        i, j = self._check_pair(i, j)
        if self.spec.target_mode:
            new = self.delta + K.mse_swap(self.raw, self.target, i, j)
            return new, SwapUpdate(i, j, np.zeros(0), new, 1, self.version)
        dS = np.empty(self.S.size)
        K.swap_lag_deltas(self.V, self.fk, self.gk, self.lags, self.offsets,
                          self.spec.circular, i, j, dS)
        new, nout = K.evaluate(self.S, dS, True, self.scale, self.target,
                               self.weight, self.tol, self.literal)
        return new, SwapUpdate(i, j, dS, new, nout, self.version)

    def apply_swap(self, i: int, j: int, update: SwapUpdate):
        i, j = self._check_pair(i, j)
        if update.version != self.version or {update.i, update.j} != {i, j}:
            raise ValueError("stale swap update: state changed since swap_delta")
        K.swap_columns(self.V, self.raw, i, j)
        self.S += update.sum_deltas
        self.delta = update.new_delta
        self.n_outside = update.n_outside
        self.version += 1
        self._since_recompute += 1
        if self._since_recompute >= self.recompute_every:
            self.recompute()
        return self


def init_objective_state(z, target: FeatureVector, spec: FeatureSpec, **kw) -> ObjectiveState:
    return ObjectiveState(z, target, spec, **kw)


def swap_delta(state: ObjectiveState, i: int, j: int):
    return state.swap_delta(i, j)


def apply_swap(state: ObjectiveState, i: int, j: int, update: SwapUpdate) -> ObjectiveState:
    return state.apply_swap(i, j, update)
