# flowpepa/ode.py
"""Deterministic reaction rate equations, integrated with fixed-step RK4."""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from flowpepa.errors import EvalError, NumericalError
from flowpepa.network import ReactionNetwork
from flowpepa.ssa import Trace, WatchLevel

logger = logging.getLogger(__name__)


def derivative(network: ReactionNetwork, state: np.ndarray, change: Optional[np.ndarray] = None) -> np.ndarray:
    """dX/dt = sum over reactions of change_r * propensity_r(X).

    Args:
        change: Precomputed network.change_matrix(), if available

    Raises:
        NumericalError: If a propensity cannot be evaluated or the result is not finite
    """
    counts = state.tolist()
    rates = np.empty(len(network.reactions))
    for j, reaction in enumerate(network.reactions):
        try:
            rates[j] = reaction.propensity(counts)
        except EvalError as exc:
            raise NumericalError(f"reaction {reaction.name}: {exc}", reaction.name) from exc
    if change is None:
        change = network.change_matrix()
    slope = rates @ change
    if not np.all(np.isfinite(slope)):
        bad = [network.reactions[j].name for j in range(len(rates)) if not math.isfinite(rates[j])]
        raise NumericalError(f"non-finite derivative (reactions: {', '.join(bad) or 'sum'})", bad[0] if bad else None)
    return slope


def rk4_step(network: ReactionNetwork, state: np.ndarray, h: float, change: Optional[np.ndarray] = None) -> np.ndarray:
    if change is None:
        change = network.change_matrix()
    k1 = derivative(network, state, change)
    k2 = derivative(network, state + 0.5 * h * k1, change)
    k3 = derivative(network, state + 0.5 * h * k2, change)
    k4 = derivative(network, state + h * k3, change)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def ode_run(
    network: ReactionNetwork,
    t_end: float,
    dt: float,
    output_interval: float,
    *,
    watch: Sequence[WatchLevel] = (),
) -> Trace:
    """Integrate the network from its initial counts to t_end.

    Steps are k * dt (the last one shortened to land on t_end). Grid rows
    and watched crossings between two steps are linearly interpolated.

    Raises:
        ValueError: If t_end, dt or output_interval is not > 0
        NumericalError: On a non-finite derivative
    """
    for name, value in (("t_end", t_end), ("dt", dt), ("output_interval", output_interval)):
        if value <= 0:
            raise ValueError(f"{name} must be > 0, got {value}")

    state = np.array(network.initial, dtype=float)
    change = network.change_matrix()
    pending = [((name, float(level)), network.index(name), float(level)) for name, level in watch]
    crossings: Dict[WatchLevel, float] = {}
    for key, i, level in list(pending):
        if state[i] >= level:
            crossings[key] = 0.0
            pending.remove((key, i, level))

    n_grid = int(math.floor(t_end / output_interval * (1 + 1e-12))) + 1
    grid = [min(k * output_interval, t_end) for k in range(n_grid)]
    if grid[-1] < t_end:
        grid.append(t_end)
    times: List[float] = [0.0]
    rows: List[np.ndarray] = [state.copy()]
    next_row = 1

    n_steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    t = 0.0
    for step in range(1, n_steps + 1):
        t_new = t_end if step == n_steps else min(step * dt, t_end)
        new_state = rk4_step(network, state, t_new - t, change)
        while next_row < len(grid) and grid[next_row] <= t_new:
            g = grid[next_row]
            w = (g - t) / (t_new - t)
            times.append(g)
            rows.append(state + w * (new_state - state))
            next_row += 1
        for key, i, level in list(pending):
            if new_state[i] >= level:
                w = (level - state[i]) / (new_state[i] - state[i])
                crossings[key] = t + w * (t_new - t)
                pending.remove((key, i, level))
        state, t = new_state, t_new

    logger.debug("ode_run: %d steps to t=%g", n_steps, t_end)
    counts = np.array(rows).reshape(len(rows), len(network.species))
    return Trace(network.species, np.array(times), counts, crossings, "ode", None)
