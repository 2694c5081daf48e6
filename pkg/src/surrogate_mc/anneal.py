"""
Simulated annealing over pairwise swaps of an i.i.d. draw.

Each proposal exchanges two uniformly chosen distinct positions. Moves that
do not increase the objective are always accepted; uphill moves of cost
``d`` are accepted with probability ``exp(-d / T)``. A temperature stage
ends after ``max_success`` acceptances or ``max_total`` proposals, after
which ``T`` is multiplied by ``cooling_factor``. A stage with no
acceptance melts the chain once (``T *= remelt_factor``); a second
consecutive empty stage stops the run as frozen.

Random numbers come in blocks from a PCG64 generator on stream 1 of the run
seed, so a run is reproducible bit for bit given its inputs and seed.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels as K
from .empirical import EmpiricalDistribution, SampleDraw, make_rng, sample_iid, spawn_seeds
from .features import RECOMPUTE_EVERY, FeatureSpec, ObjectiveState

log = logging.getLogger(__name__)

#: fallback initial temperature when no probe move goes uphill
TEMPERATURE_FLOOR = 1e-12
PROPOSAL_STREAM = 1
PROBE_STREAM = 2

_STATUS = {K.STATUS_GOAL: "goal", K.STATUS_MAX_ITER: "max_iterations",
           K.STATUS_FROZEN: "frozen"}

#: progress events are ``(realization, iteration, delta, temperature)``
ProgressCallback = Callable[[int, int, float, float], None]


@dataclass(frozen=True)
class AnnealConfig:
    """Schedule of one annealing run.

    ``max_success`` and ``max_total`` default to ``2 N`` and ``20 N``.
    ``goal="band"`` stops as soon as every feature entry is within its 99%
    white-noise band of the target; a number stops when the objective drops
    to that value.
    """

    initial_temp: float | str = "auto"
    cooling_factor: float = 0.9
    max_success: int | None = None
    max_total: int | None = None
    goal: float | str = "band"
    max_iterations: int = 100_000_000
    remelt_factor: float = 10.0
    seed: int = 0
    log_every: int = 10_000
    probes: int = 1000
    recompute_every: int = RECOMPUTE_EVERY
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if not 0 < self.cooling_factor < 1:
            raise ValueError("cooling_factor must lie in (0, 1)")
        if not self.remelt_factor > 1:
            raise ValueError("remelt_factor must be > 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.log_every < 1 or self.chunk_size < 1 or self.recompute_every < 1:
            raise ValueError("log_every, chunk_size and recompute_every must be >= 1")
        if isinstance(self.initial_temp, str):
            if self.initial_temp != "auto":
                raise ValueError("initial_temp must be a number or 'auto'")
        elif self.initial_temp < 0:
            raise ValueError("initial_temp must be >= 0")
        if isinstance(self.goal, str):
            if self.goal != "band":
                raise ValueError("goal must be a number or 'band'")
        elif self.goal < 0:
            raise ValueError("goal must be >= 0")
        if (self.max_success is not None and self.max_total is not None
                and self.max_success > self.max_total):
            raise ValueError("max_success must not exceed max_total")

    def stage_limits(self, n: int) -> tuple[int, int]:
        succ = self.max_success if self.max_success is not None else 2 * n
        tot = self.max_total if self.max_total is not None else 20 * n
        if succ > tot:
            raise ValueError("max_success must not exceed max_total")
        return int(succ), int(tot)


@dataclass(eq=False)
class AnnealReport:
    final_series: np.ndarray
    final_delta: float
    iterations: int
    accepted: int
    trajectory: np.ndarray
    terminated_by: str
    seed: int
    initial_temp: float
    final_temp: float
    best_delta: float
    n_outside: int
    config: dict = field(default_factory=dict)

    @property
    def running_best(self) -> np.ndarray:
        """Running minimum of the logged objective values."""
        if self.trajectory.size == 0:
            return np.zeros(0)
        return np.minimum.accumulate(self.trajectory[:, 1])

    def summary(self) -> dict:
        return {"terminated_by": self.terminated_by, "iterations": self.iterations,
                "accepted": self.accepted, "final_delta": self.final_delta,
                "best_delta": self.best_delta, "n_outside": self.n_outside,
                "initial_temp": self.initial_temp, "final_temp": self.final_temp,
                "seed": self.seed}


def _draw_pairs(rng: np.random.Generator, n: int, m: int):
    i = rng.integers(0, n, m)
    j = rng.integers(0, n - 1, m)
    j += j >= i
    return i, j


def auto_initial_temperature(state: ObjectiveState, probes: int = 1000, seed: int = 0) -> float:
    """Temperature at which the median uphill probe move is accepted half the time.

    Probes random swaps without applying them and returns
    ``median(positive cost) / ln 2``, or :data:`TEMPERATURE_FLOOR` if no
    probe increases the objective.
    """
    if probes < 2:
        raise ValueError("need at least 2 probes")
    ii, jj = _draw_pairs(make_rng(seed, PROBE_STREAM), state.n, probes)
    costs = np.array([state.swap_delta(i, j)[0] for i, j in zip(ii, jj)]) - state.delta
    uphill = costs[costs > 0]
    if uphill.size == 0:
        return TEMPERATURE_FLOOR
    return float(np.median(uphill) / math.log(2.0))


def anneal_run(initial, target, spec: FeatureSpec, cfg: AnnealConfig = AnnealConfig(),
               progress: ProgressCallback | None = None, realization: int = 0) -> AnnealReport:
    """Permute ``initial`` until its features match ``target``.

    Parameters
    ----------
    initial : SampleDraw or array_like
        The i.i.d. draw to reorder. Its values are only moved, never
        modified.
    target : FeatureVector or array_like
        Feature vector of the data (or the target series itself in
        deterministic-target mode).
    spec : FeatureSpec
    cfg : AnnealConfig
    progress : callable, optional
        Receives ``(realization, iteration, delta, temperature)`` every
        ``cfg.log_every`` proposals.

    Returns
    -------
    AnnealReport
    """
    values = initial.values if isinstance(initial, SampleDraw) else initial
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty initial draw")
    band = cfg.goal == "band"
    goal = 0.0 if band else float(cfg.goal)
    # a negative tolerance marks every entry as outside, disabling the band stop
    state = ObjectiveState(values, target, spec, tolerance=None if band else -1.0,
                           recompute_every=cfg.recompute_every)
    n = state.n
    max_succ, max_tot = cfg.stage_limits(n)

    if cfg.initial_temp == "auto":
        t0 = auto_initial_temperature(state, cfg.probes, cfg.seed)
    else:
        t0 = float(cfg.initial_temp)

    def report(status, iters, accepted, traj, temp, best):
        return AnnealReport(
            final_series=state.raw.copy(), final_delta=float(state.delta),
            iterations=int(iters), accepted=int(accepted), trajectory=traj,
            terminated_by=status, seed=int(cfg.seed), initial_temp=t0,
            final_temp=float(temp), best_delta=float(best),
            n_outside=int(state.n_outside), config=asdict(cfg))

    if state.delta <= goal or state.n_outside == 0:
        return report("goal", 0, 0, np.zeros((0, 3)), t0, state.delta)

    fpar = np.zeros(6)
    fpar[K.P_T] = t0
    fpar[K.P_DELTA] = state.delta
    fpar[K.P_GOAL] = goal
    fpar[K.P_COOL] = cfg.cooling_factor
    fpar[K.P_REMELT] = cfg.remelt_factor
    fpar[K.P_BEST] = state.delta
    ipar = np.zeros(13, dtype=np.int64)
    ipar[K.I_MAX_SUCC] = max_succ
    ipar[K.I_MAX_TOT] = max_tot
    ipar[K.I_MAX_ITER] = cfg.max_iterations
    ipar[K.I_RECOMP_EVERY] = cfg.recompute_every
    ipar[K.I_LOG_EVERY] = cfg.log_every
    ipar[K.I_NOUT] = state.n_outside

    yt = state.target if spec.target_mode else np.zeros(0)
    rng = make_rng(cfg.seed, PROPOSAL_STREAM)
    chunks = []
    while ipar[K.I_STATUS] == K.STATUS_RUNNING:
        m = int(min(cfg.chunk_size, cfg.max_iterations - ipar[K.I_ITER]))
        if m <= 0:
            ipar[K.I_STATUS] = K.STATUS_MAX_ITER
            break
        ii, jj = _draw_pairs(rng, n, m)
        uu = rng.random(m)
        buf = np.empty((m // cfg.log_every + 1, 3))
        nrec = K.anneal_chunk(
            state.V, state.raw, state.fk, state.gk, state.lags, state.offsets,
            spec.circular, state.S, state.scale, state.target, state.weight,
            state.tol, state.literal, spec.target_mode, yt, ii, jj, uu,
            fpar, ipar, buf)
        state.delta = fpar[K.P_DELTA]
        state.n_outside = int(ipar[K.I_NOUT])
        if nrec:
            chunks.append(buf[:nrec].copy())
            if progress is not None:
                for it, d, temp in buf[:nrec]:
                    progress(realization, int(it), float(d), float(temp))
        if ipar[K.I_ITER] >= cfg.max_iterations and ipar[K.I_STATUS] == K.STATUS_RUNNING:
            ipar[K.I_STATUS] = K.STATUS_MAX_ITER

    state.version += int(ipar[K.I_ACCEPTED])
    traj = np.concatenate(chunks) if chunks else np.zeros((0, 3))
    status = _STATUS[int(ipar[K.I_STATUS])]
    log.debug("realization %d stopped by %s after %d iterations (delta %.3g)",
              realization, status, ipar[K.I_ITER], state.delta)
    return report(status, ipar[K.I_ITER], ipar[K.I_ACCEPTED], traj,
                  fpar[K.P_T], fpar[K.P_BEST])


def run_realizations(count: int, base_seed: int, source, target, spec: FeatureSpec,
                     cfg: AnnealConfig = AnnealConfig(), n: int | None = None,
                     workers: int | None = None,
                     progress: ProgressCallback | None = None) -> list[AnnealReport]:
    """Independent annealing chains, ordered by realization index.

    Realization ``k`` uses seed ``spawn_seeds(base_seed, count)[k]`` for
    both its draw (when ``source`` is a distribution) and its annealing
    stream. ``source`` may be a fixed :class:`SampleDraw` shared by all
    chains, or an :class:`EmpiricalDistribution` from which each chain
    draws ``n`` values of its own.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    seeds = spawn_seeds(base_seed, count)
    if isinstance(source, EmpiricalDistribution):
        if n is None:
            raise ValueError("n is required when sampling from a distribution")
        draws = [sample_iid(source, n, s) for s in seeds]
    else:
        draws = [source] * count

    def one(k):
        return anneal_run(draws[k], target, spec, replace(cfg, seed=seeds[k]),
                          progress=progress, realization=k)

    if workers is None or workers <= 1 or count == 1:
        return [one(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(count)))
