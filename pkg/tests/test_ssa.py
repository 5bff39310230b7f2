"""Tests for the direct and next-reaction stochastic kernels."""

import math
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd
import pytest

from flowpepa.errors import NumericalError
from flowpepa.network import Reaction, ReactionNetwork, compile_network
from flowpepa.ssa import Trace, ssa_direct, ssa_gibson_bruck
from tests.conftest import load_text

Kernel = Callable[..., Trace]
KERNELS = [ssa_direct, ssa_gibson_bruck]

# Extinction time of a pure death process from 10 molecules at rate 1:
# mean is the harmonic number H_10, variance the sum of 1/k^2.
EXTINCTION_MEAN = sum(1.0 / k for k in range(1, 11))
EXTINCTION_VAR = sum(1.0 / k**2 for k in range(1, 11))


class CountingRate:
    """Propensity that counts its evaluations."""

    def __init__(self, fn: Callable[[Sequence[float]], float]) -> None:
        self.fn = fn
        self.calls = 0

    def __call__(self, counts: Sequence[float]) -> float:
        self.calls += 1
        return self.fn(counts)


def single_reaction(rate: str) -> ReactionNetwork:
    return compile_network(
        load_text(
            f"""
            entity A {{ type: SimpleChemical count: 0 }}
            entity B {{ type: SimpleChemical count: 0 }}
            process p {{ rate: "{rate}" }}
            arc {{ kind: Consumption entity: A process: p ref: a }}
            arc {{ kind: Production entity: B process: p }}
            """
        )
    )


@pytest.mark.parametrize("kernel", KERNELS, ids=["direct", "gibson-bruck"])
class TestKernels:
    """Both exact kernels against analytic oracles."""

    def test_poisson_birth(self, kernel: Kernel, birth_network: ReactionNetwork) -> None:
        """Births at rate 1 for 10 time units are Poisson(10)."""
        finals = [kernel(birth_network, seed, 10.0, 10.0).counts[-1, 0] for seed in range(1000)]
        assert abs(np.mean(finals) - 10.0) < 3 * math.sqrt(10.0 / 1000)

    def test_extinction_time(self, kernel: Kernel, decay_network: Callable[[float, float], ReactionNetwork]) -> None:
        """Ten molecules decaying at rate 1 die out after H_10 on average."""
        network = decay_network(1.0, 10.0)
        times = [kernel(network, seed, 1000.0, 1000.0).times[-1] for seed in range(1000)]
        assert abs(np.mean(times) - EXTINCTION_MEAN) < 3 * math.sqrt(EXTINCTION_VAR / 1000)

    def test_extinct_trace_stops_at_last_event(
        self, kernel: Kernel, decay_network: Callable[[float, float], ReactionNetwork]
    ) -> None:
        trace = kernel(decay_network(1.0, 10.0), 7, 1000.0, 1.0)
        assert trace.counts[-1, 0] == 0.0
        assert trace.times[-1] < 1000.0
        assert np.all(np.diff(trace.counts[:, 0]) <= 0)

    def test_same_seed_same_trace(self, kernel: Kernel, mapk_network: ReactionNetwork) -> None:
        first = kernel(mapk_network, 11, 0.2, 0.05)
        second = kernel(mapk_network, 11, 0.2, 0.05)
        np.testing.assert_array_equal(first.times, second.times)
        np.testing.assert_array_equal(first.counts, second.counts)

    def test_different_seeds_differ(self, kernel: Kernel, birth_network: ReactionNetwork) -> None:
        traces = [kernel(birth_network, seed, 50.0, 1.0).counts for seed in (1, 2)]
        assert not np.array_equal(traces[0], traces[1])

    def test_output_grid(self, kernel: Kernel, birth_network: ReactionNetwork) -> None:
        trace = kernel(birth_network, 3, 2.5, 1.0)
        np.testing.assert_allclose(trace.times, [0.0, 1.0, 2.0, 2.5])
        assert trace.counts.shape == (4, 1)
        assert trace.counts[0, 0] == 0.0
        assert np.all(np.diff(trace.counts[:, 0]) >= 0)

    def test_trace_metadata(self, kernel: Kernel, birth_network: ReactionNetwork) -> None:
        trace = kernel(birth_network, 5, 1.0, 1.0)
        assert trace.seed == 5
        assert trace.method in ("direct", "gibson-bruck")
        assert trace.species == ("A",)

    def test_zero_rate_network(self, kernel: Kernel) -> None:
        trace = kernel(single_reaction("0"), 1, 10.0, 1.0)
        assert trace.times.tolist() == [0.0]
        assert trace.counts.tolist() == [[0.0, 0.0]]

    def test_negative_propensity(self, kernel: Kernel) -> None:
        with pytest.raises(NumericalError) as info:
            kernel(single_reaction("0 - 1"), 4, 10.0, 1.0)
        assert info.value.reaction == "p"
        assert info.value.seed == 4

    def test_division_by_zero(self, kernel: Kernel) -> None:
        with pytest.raises(NumericalError, match="division by zero"):
            kernel(single_reaction("1 / <ent: a>"), 1, 10.0, 1.0)

    def test_firing_an_empty_pool(self, kernel: Kernel) -> None:
        with pytest.raises(NumericalError, match="negative"):
            kernel(single_reaction("1"), 1, 100.0, 1.0)

    def test_watch_levels(self, kernel: Kernel, birth_network: ReactionNetwork) -> None:
        trace = kernel(birth_network, 2, 100.0, 10.0, watch=[("A", 0.0), ("A", 5.0), ("A", 1e6)])
        assert trace.crossings[("A", 0.0)] == 0.0
        assert 0.0 < trace.crossings[("A", 5.0)] < 100.0
        assert ("A", 1e6) not in trace.crossings

    def test_rejects_bad_horizon(self, kernel: Kernel, birth_network: ReactionNetwork) -> None:
        with pytest.raises(ValueError):
            kernel(birth_network, 1, 0.0, 1.0)
        with pytest.raises(ValueError):
            kernel(birth_network, 1, 1.0, 0.0)


class TestDependencyUpdates:
    """Gibson-Bruck recomputes only dependent propensities."""

    def test_only_dependents_are_recomputed(self) -> None:
        death = CountingRate(lambda x: 1.0 * x[0])
        birth = CountingRate(lambda x: 1.0)
        watcher = CountingRate(lambda x: 0.0)
        network = ReactionNetwork(
            species=("A", "B"),
            initial=(20.0, 0.0),
            reactions=(
                Reaction("death", (-1, 0), death, frozenset({0})),
                Reaction("birth", (0, 1), birth, frozenset()),
                Reaction("watcher", (0, 1), watcher, frozenset({0})),
            ),
        )
        assert network.dependency_graph == (frozenset({0, 2}), frozenset(), frozenset())

        trace = ssa_gibson_bruck(network, 9, 5.0, 5.0)
        a_final, b_final = trace.counts[-1]
        deaths = int(20 - a_final)
        assert birth.calls == 1 + int(b_final)
        assert death.calls == 1 + deaths
        assert watcher.calls == 1 + deaths


class TestTrace:
    """Trace lookups and CSV output."""

    @pytest.fixture
    def trace(self, birth_network: ReactionNetwork) -> Trace:
        return ssa_direct(birth_network, 1, 3.0, 1.0)

    def test_column(self, trace: Trace) -> None:
        assert trace.column("A").shape == (4,)
        with pytest.raises(KeyError):
            trace.column("ghost")

    def test_value_at(self, trace: Trace) -> None:
        assert trace.value_at("A", 1.5) == trace.counts[1, 0]
        assert trace.value_at("A", 3.0) == trace.counts[-1, 0]
        with pytest.raises(ValueError):
            trace.value_at("A", -1.0)

    def test_frame(self, trace: Trace) -> None:
        frame = trace.to_frame()
        assert list(frame.columns) == ["time", "A"]
        assert frame["time"].tolist() == [0.0, 1.0, 2.0, 3.0]

    def test_csv(self, trace: Trace, tmp_path: Path) -> None:
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["time", "A"]
        np.testing.assert_allclose(frame["A"].to_numpy(), trace.column("A"))
