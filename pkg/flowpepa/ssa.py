# flowpepa/ssa.py
"""
Exact stochastic simulation.

ssa_direct       Gillespie direct method: exponential waiting time in the
                 total propensity, reaction chosen proportionally.
ssa_gibson_bruck Next reaction method: one tentative firing time per
                 reaction in an indexed priority queue; after a firing only
                 the dependents of that reaction are recomputed, reusing
                 their random numbers through the a_old/a_new rescaling.

Both kernels are fully determined by (network, seed) and return a Trace
sampled on a fixed output grid.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from flowpepa.errors import EvalError, NumericalError
from flowpepa.indexed_heap import IndexedPriorityQueue
from flowpepa.network import Reaction, ReactionNetwork
from flowpepa.rng import SeededRNG

logger = logging.getLogger(__name__)

WatchLevel = Tuple[str, float]


# ============================================================
# Trace
# ============================================================


@dataclass(frozen=True, eq=False)
class Trace:
    """
    Sampled trajectory: one row per output interval from t=0, plus a final
    row at the stopping time. crossings maps a watched (species, level) to
    the exact time the species first reached the level.
    """

    species: Tuple[str, ...]
    times: np.ndarray
    counts: np.ndarray
    crossings: Dict[WatchLevel, float] = field(default_factory=dict)
    method: str = ""
    seed: Optional[int] = None

    def column(self, species: str) -> np.ndarray:
        try:
            return self.counts[:, self.species.index(species)]
        except ValueError:
            raise KeyError(f"Species '{species}' not found in trace") from None

    def value_at(self, species: str, time: float) -> float:
        """Count in effect at `time` (last sampled row at or before it)."""
        row = int(np.searchsorted(self.times, time, side="right")) - 1
        if row < 0:
            raise ValueError(f"time must be >= {self.times[0]}, got {time}")
        return float(self.column(species)[row])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.counts, columns=list(self.species))
        frame.insert(0, "time", self.times)
        return frame

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False)


class _Recorder:
    """Samples the state on the output grid and notes first crossings."""

    def __init__(
        self,
        network: ReactionNetwork,
        t_end: float,
        output_interval: float,
        watch: Sequence[WatchLevel],
        state: Sequence[float],
    ) -> None:
        if t_end <= 0:
            raise ValueError(f"t_end must be > 0, got {t_end}")
        if output_interval <= 0:
            raise ValueError(f"output_interval must be > 0, got {output_interval}")
        self._t_end = t_end
        self._interval = output_interval
        self._k = 0
        self.times: List[float] = []
        self.rows: List[Tuple[float, ...]] = []
        self._pending = [((name, float(level)), network.index(name), float(level)) for name, level in watch]
        self.crossings: Dict[WatchLevel, float] = {}
        self.check(0.0, state)

    def _grid(self) -> float:
        return min(self._k * self._interval, self._t_end)

    def _more(self) -> bool:
        return self._k * self._interval <= self._t_end * (1 + 1e-12)

    def advance_to(self, t: float, state: Sequence[float], inclusive: bool) -> None:
        """Record grid points before t (or up to and including t)."""
        while self._more():
            g = self._grid()
            if g > t or (g == t and not inclusive):
                return
            self.times.append(g)
            self.rows.append(tuple(state))
            self._k += 1

    def check(self, t: float, state: Sequence[float]) -> None:
        if not self._pending:
            return
        remaining = []
        for key, i, level in self._pending:
            if state[i] >= level:
                self.crossings[key] = t
            else:
                remaining.append((key, i, level))
        self._pending = remaining

    def finish(self, t: float, state: Sequence[float]) -> None:
        self.advance_to(t, state, inclusive=True)
        if not self.times or self.times[-1] < t:
            self.times.append(t)
            self.rows.append(tuple(state))

    def trace(self, network: ReactionNetwork, method: str, seed: Optional[int]) -> Trace:
        counts = np.array(self.rows, dtype=float).reshape(len(self.rows), len(network.species))
        return Trace(network.species, np.array(self.times), counts, dict(self.crossings), method, seed)


# ============================================================
# Shared checks
# ============================================================


def _propensity(reaction: Reaction, state: Sequence[float], seed: Optional[int]) -> float:
    try:
        value = reaction.propensity(state)
    except EvalError as exc:
        raise NumericalError(f"reaction {reaction.name}: {exc}", reaction.name, seed) from exc
    if not math.isfinite(value) or value < 0:
        raise NumericalError(f"reaction {reaction.name} has propensity {value}", reaction.name, seed)
    return value


def _fire(reaction: Reaction, state: List[float], network: ReactionNetwork, seed: Optional[int]) -> None:
    for i, delta in enumerate(reaction.change):
        if delta:
            state[i] += delta
            if state[i] < 0:
                raise NumericalError(
                    f"reaction {reaction.name} drove {network.species[i]} negative", reaction.name, seed
                )


# ============================================================
# Direct method
# ============================================================


def ssa_direct(
    network: ReactionNetwork,
    seed: int,
    t_end: float,
    output_interval: float,
    *,
    watch: Sequence[WatchLevel] = (),
) -> Trace:
    """Gillespie direct method.

    Args:
        network: Compiled network
        seed: Replica seed
        t_end: Simulated time horizon (> 0)
        output_interval: Spacing of sampled rows (> 0)
        watch: (species, level) pairs whose first crossing time is recorded

    Returns:
        Trace ending at t_end, or at the last event if every propensity
        has dropped to zero

    Raises:
        NumericalError: Negative/non-finite propensity or negative count
    """
    rng = SeededRNG(seed)
    reactions = network.reactions
    state = list(network.initial)
    recorder = _Recorder(network, t_end, output_interval, watch, state)
    t = 0.0
    events = 0
    while True:
        props = [_propensity(r, state, seed) for r in reactions]
        total = math.fsum(props)
        if total == 0:
            recorder.finish(t, state)
            break
        t_next = t + rng.exponential(total)
        if t_next > t_end:
            recorder.finish(t_end, state)
            break
        target = rng.uniform() * total
        chosen = len(props) - 1
        acc = 0.0
        for j, a in enumerate(props):
            acc += a
            if target < acc:
                chosen = j
                break
        while props[chosen] == 0:
            chosen -= 1
        recorder.advance_to(t_next, state, inclusive=False)
        _fire(reactions[chosen], state, network, seed)
        t = t_next
        events += 1
        recorder.check(t, state)
    logger.debug("ssa_direct seed=%d: %d events", seed, events)
    return recorder.trace(network, "direct", seed)


# ============================================================
# Next reaction method
# ============================================================


def ssa_gibson_bruck(
    network: ReactionNetwork,
    seed: int,
    t_end: float,
    output_interval: float,
    *,
    watch: Sequence[WatchLevel] = (),
) -> Trace:
    """Gibson-Bruck next reaction method.

    Same contract as ssa_direct. A reaction whose propensity is zero has
    tentative time +inf; when it becomes positive again it gets a fresh
    exponential draw. Other dependents keep their random number:
    tau_new = t + (a_old / a_new) * (tau_old - t).
    """
    rng = SeededRNG(seed)
    reactions = network.reactions
    dependents = network.dependency_graph
    state = list(network.initial)
    recorder = _Recorder(network, t_end, output_interval, watch, state)
    props = [_propensity(r, state, seed) for r in reactions]
    queue = IndexedPriorityQueue([rng.exponential(a) for a in props])
    t = 0.0
    events = 0
    while True:
        mu, t_next = queue.peek()
        if mu < 0 or math.isinf(t_next):
            recorder.finish(t, state)
            break
        if t_next > t_end:
            recorder.finish(t_end, state)
            break
        recorder.advance_to(t_next, state, inclusive=False)
        _fire(reactions[mu], state, network, seed)
        t = t_next
        events += 1
        recorder.check(t, state)

        for alpha in sorted(dependents[mu]):
            if alpha == mu:
                continue
            a_old = props[alpha]
            a_new = _propensity(reactions[alpha], state, seed)
            props[alpha] = a_new
            if a_new == 0:
                queue.update(alpha, math.inf)
            elif a_old == 0:
                queue.update(alpha, t + rng.exponential(a_new))
            elif a_new != a_old:
                queue.update(alpha, t + (a_old / a_new) * (queue.key(alpha) - t))
        props[mu] = _propensity(reactions[mu], state, seed)
        queue.update(mu, t + rng.exponential(props[mu]))
    logger.debug("ssa_gibson_bruck seed=%d: %d events", seed, events)
    return recorder.trace(network, "gibson-bruck", seed)
