"""Tests for the RK4 reaction-rate integrator."""

import math
from typing import Callable

import numpy as np
import pytest

from flowpepa.errors import NumericalError
from flowpepa.network import ReactionNetwork, compile_network
from flowpepa.ode import derivative, ode_run, rk4_step
from tests.conftest import CONVERSION, MAPK_POOLS, load_text

DecayFactory = Callable[[float, float], ReactionNetwork]


@pytest.fixture(scope="module")
def conversion() -> ReactionNetwork:
    return compile_network(load_text(CONVERSION))


class TestAccuracy:
    """RK4 against analytic solutions."""

    def test_exponential_decay(self, decay_network: DecayFactory) -> None:
        trace = ode_run(decay_network(0.1, 100.0), 10.0, 0.01, 1.0)
        assert trace.value_at("A", 10.0) == pytest.approx(100.0 * math.exp(-1.0), rel=1e-4)

    def test_single_step_order(self, decay_network: DecayFactory) -> None:
        """One step on x' = -x equals the degree-4 Taylor polynomial of exp(-h)."""
        network = decay_network(1.0, 1.0)
        state = rk4_step(network, np.array(network.initial), 0.1)
        taylor = sum((-0.1) ** n / math.factorial(n) for n in range(5))
        assert state[0] == pytest.approx(taylor, rel=1e-12)

    def test_stoichiometry_is_conserved(self, conversion: ReactionNetwork) -> None:
        trace = ode_run(conversion, 5.0, 0.01, 0.5)
        np.testing.assert_allclose(trace.column("B"), 2.0 * (10.0 - trace.column("A")), atol=1e-9)

    def test_mapk_pools(self, mapk_network: ReactionNetwork) -> None:
        slope = derivative(mapk_network, np.array(mapk_network.initial))
        for species, _ in MAPK_POOLS.values():
            assert sum(slope[mapk_network.index(name)] for name in species) == pytest.approx(0.0, abs=1e-9)


class TestGrid:
    """Output grid sampling."""

    def test_rows_on_output_grid(self, decay_network: DecayFactory) -> None:
        trace = ode_run(decay_network(0.1, 100.0), 10.0, 0.01, 1.0)
        np.testing.assert_allclose(trace.times, np.arange(11.0))
        assert trace.counts.shape == (11, 1)
        assert trace.method == "ode"
        assert trace.seed is None

    def test_grid_between_steps_is_interpolated(self, decay_network: DecayFactory) -> None:
        trace = ode_run(decay_network(0.1, 100.0), 3.0, 0.3, 1.0)
        np.testing.assert_allclose(trace.times, [0.0, 1.0, 2.0, 3.0])
        assert trace.value_at("A", 1.0) == pytest.approx(100.0 * math.exp(-0.1), rel=1e-3)

    def test_last_step_lands_on_horizon(self, decay_network: DecayFactory) -> None:
        trace = ode_run(decay_network(0.1, 100.0), 1.0, 0.3, 0.4)
        np.testing.assert_allclose(trace.times, [0.0, 0.4, 0.8, 1.0])
        assert trace.counts[-1, 0] == pytest.approx(100.0 * math.exp(-0.1), rel=1e-6)

    def test_zero_rate_is_constant(self) -> None:
        network = compile_network(
            load_text(
                'entity A { type: Complex count: 4 }\nentity B { type: Complex count: 1 }\nprocess p { rate: "0" }\n'
                "arc { kind: Consumption entity: A process: p }\narc { kind: Production entity: B process: p }"
            )
        )
        trace = ode_run(network, 5.0, 0.1, 1.0)
        assert trace.counts.tolist() == [[4.0, 1.0]] * 6


class TestWatch:
    """Interpolated first crossings."""

    def test_crossing_is_interpolated(self, conversion: ReactionNetwork) -> None:
        trace = ode_run(conversion, 2.0, 0.01, 1.0, watch=[("B", 10.0)])
        assert trace.crossings[("B", 10.0)] == pytest.approx(math.log(2.0), abs=1e-3)

    def test_level_met_at_start(self, conversion: ReactionNetwork) -> None:
        trace = ode_run(conversion, 1.0, 0.01, 1.0, watch=[("A", 10.0)])
        assert trace.crossings[("A", 10.0)] == 0.0

    def test_level_never_met(self, conversion: ReactionNetwork) -> None:
        trace = ode_run(conversion, 1.0, 0.01, 1.0, watch=[("B", 25.0)])
        assert trace.crossings == {}


class TestErrors:
    @pytest.mark.parametrize("t_end, dt, interval", [(0.0, 0.1, 1.0), (1.0, 0.0, 1.0), (1.0, 0.1, -1.0)])
    def test_non_positive_arguments(
        self, conversion: ReactionNetwork, t_end: float, dt: float, interval: float
    ) -> None:
        with pytest.raises(ValueError):
            ode_run(conversion, t_end, dt, interval)

    def test_division_by_zero(self) -> None:
        network = compile_network(
            load_text(
                'entity A { type: Complex count: 0 }\nprocess p { rate: "1 / <ent: a>" }\n'
                "arc { kind: Production entity: A process: p ref: a }"
            )
        )
        with pytest.raises(NumericalError) as info:
            ode_run(network, 1.0, 0.1, 1.0)
        assert info.value.reaction == "p"
