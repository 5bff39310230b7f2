# flowpepa/ensemble.py
"""
Replica ensembles and signalling-time statistics.

A replica is one kernel run for one seed. Replicas share the immutable
network and run sequentially or in a process pool; results always come
back in seed-list order, so statistics do not depend on scheduling.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from flowpepa.errors import NumericalError
from flowpepa.network import ReactionNetwork
from flowpepa.ode import ode_run
from flowpepa.ssa import Trace, WatchLevel, ssa_direct, ssa_gibson_bruck

logger = logging.getLogger(__name__)


class Method(str, Enum):
    DIRECT = "direct"
    GIBSON_BRUCK = "gibson-bruck"
    ODE = "ode"

    @property
    def stochastic(self) -> bool:
        return self is not Method.ODE


def simulate(
    network: ReactionNetwork,
    method: Method,
    seed: Optional[int],
    t_end: float,
    output_interval: float,
    dt: float = 0.01,
    watch: Sequence[WatchLevel] = (),
) -> Trace:
    """Run one kernel. seed is required for stochastic methods and ignored by ode."""
    if method is Method.ODE:
        return ode_run(network, t_end, dt, output_interval, watch=watch)
    if seed is None:
        raise ValueError(f"method {method.value} needs a seed")
    kernel = ssa_direct if method is Method.DIRECT else ssa_gibson_bruck
    return kernel(network, seed, t_end, output_interval, watch=watch)


# ============================================================
# Signalling time
# ============================================================


def signalling_time(trace: Trace, species: str, fraction: float, total: float) -> Optional[float]:
    """First time `species` reaches fraction * total; None if it never does.

    Exact crossing times recorded by the kernel are used when the trace
    watched this level; otherwise the sampled rows are scanned.

    Raises:
        ValueError: If fraction is not in (0, 1]
        KeyError: If the trace has no such species
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    column = trace.column(species)
    level = fraction * total
    crossing = trace.crossings.get((species, float(level)))
    if crossing is not None:
        return crossing
    hits = np.nonzero(column >= level)[0]
    if len(hits) == 0:
        return None
    return float(trace.times[hits[0]])


# ============================================================
# Replicas
# ============================================================


def _replica(args: Tuple[ReactionNetwork, Method, int, float, float, float, Tuple[WatchLevel, ...]]) -> Trace:
    network, method, seed, t_end, output_interval, dt, watch = args
    trace = simulate(network, method, seed, t_end, output_interval, dt, watch)
    logger.info("replica seed=%d finished at t=%g", seed, trace.times[-1])
    return trace


def run_replicas(
    network: ReactionNetwork,
    method: Method,
    seeds: Sequence[int],
    t_end: float,
    output_interval: float,
    *,
    dt: float = 0.01,
    watch: Sequence[WatchLevel] = (),
    jobs: int = 1,
) -> List[Trace]:
    """One trace per seed, in seed-list order.

    Raises:
        ValueError: If jobs < 1 or method is ode
        NumericalError: From the first failing replica, carrying its seed
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if not method.stochastic:
        raise ValueError("replicas need a stochastic method")
    tasks = [(network, method, seed, t_end, output_interval, dt, tuple(watch)) for seed in seeds]
    if jobs == 1 or len(tasks) < 2:
        return [_replica(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_replica, tasks))


@dataclass(frozen=True)
class EnsembleStats:
    """Per-seed signalling times (None = not reached) and their summary."""

    seeds: Tuple[int, ...]
    times: Tuple[Optional[float], ...]
    mean: Optional[float]
    std: Optional[float]
    cv: Optional[float]

    @property
    def reached(self) -> List[float]:
        return [t for t in self.times if t is not None]

    @property
    def missing(self) -> int:
        return sum(1 for t in self.times if t is None)

    @classmethod
    def from_times(cls, seeds: Sequence[int], times: Sequence[Optional[float]]) -> "EnsembleStats":
        reached = np.array([t for t in times if t is not None], dtype=float)
        missing = len(times) - len(reached)
        if missing:
            logger.warning("%d of %d replicas never reached the level; excluded from the summary", missing, len(times))
        mean = float(reached.mean()) if len(reached) else None
        std = float(reached.std(ddof=1)) if len(reached) >= 2 else None
        cv = std / mean if std is not None and mean else None
        return cls(tuple(seeds), tuple(times), mean, std, cv)

    def to_frame(self) -> pd.DataFrame:
        """Rows `seed,signalling_time` followed by mean, std and cv summary rows."""
        rows: List[Tuple[Union[int, str], Optional[float]]] = list(zip(self.seeds, self.times))
        rows += [("mean", self.mean), ("std", self.std), ("cv", self.cv)]
        return pd.DataFrame(rows, columns=["seed", "signalling_time"])

    def to_csv(self, path: Union[str, Path, None] = None) -> Optional[str]:
        return self.to_frame().to_csv(path, index=False, na_rep="NA")


def ensemble_stats(traces: Sequence[Trace], species: str, fraction: float, total: float) -> EnsembleStats:
    seeds = [trace.seed if trace.seed is not None else -1 for trace in traces]
    return EnsembleStats.from_times(seeds, [signalling_time(t, species, fraction, total) for t in traces])


def ensemble_run(
    network: ReactionNetwork,
    method: Method,
    seeds: Sequence[int],
    t_end: float,
    *,
    species: str,
    fraction: float,
    total: float,
    output_interval: float = 1.0,
    jobs: int = 1,
) -> EnsembleStats:
    """Signalling-time statistics over independent replicas.

    Raises:
        ValueError: Fewer than 2 seeds, or method is ode
        NumericalError: If any replica fails (names the seed)
    """
    if len(seeds) < 2:
        raise ValueError(f"seeds must hold >= 2 entries, got {len(seeds)}")
    level = fraction * total
    try:
        traces = run_replicas(network, method, seeds, t_end, output_interval, watch=[(species, level)], jobs=jobs)
    except NumericalError as exc:
        logger.error("replica seed=%s failed: %s", exc.seed, exc)
        raise
    return ensemble_stats(traces, species, fraction, total)


# ============================================================
# Pilot runs
# ============================================================


def plateau(network: ReactionNetwork, species: str, t_end: float, dt: float) -> float:
    """Final ODE value of species after a pilot run."""
    trace = ode_run(network, t_end, dt, t_end)
    return float(trace.column(species)[-1])


def auto_horizon(
    network: ReactionNetwork,
    species: str,
    fraction: float,
    factor: float,
    pilot_t_end: float,
    pilot_dt: float,
    total: Optional[float] = None,
) -> float:
    """factor times the ODE signalling time; factor * pilot_t_end if the pilot never signals."""
    trace = ode_run(network, pilot_t_end, pilot_dt, pilot_dt)
    if total is None:
        total = float(trace.column(species)[-1])
    reached = signalling_time(trace, species, fraction, total) if total > 0 else None
    if reached is None or reached <= 0 or not math.isfinite(reached):
        horizon = factor * pilot_t_end
        logger.warning("pilot ODE run never signals; horizon set to %g", horizon)
        return horizon
    horizon = factor * reached
    logger.info("pilot ODE signalling time %g; horizon %g", reached, horizon)
    return horizon
