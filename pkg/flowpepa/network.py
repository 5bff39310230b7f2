# flowpepa/network.py
"""
Reaction network compiled from a Document.

Species are the non-boundary entities in natural key order; Source and
Sink pools have no state dimension. Each irreversible process becomes one
reaction, each reversible process two (`_F`, `_B`) with opposite change
vectors. Propensities are closures over the count vector with parameters
folded in. The network is immutable and shared read-only by replicas.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from flowpepa.errors import CompileError, ExprSyntaxError, ResolutionError
from flowpepa.expr import ResolvedExpr, compile_expr, parameter_name, resolve_process_rates, species_read
from flowpepa.model import Document
from flowpepa.naming import natural_key
from flowpepa.types import ArcType

logger = logging.getLogger(__name__)

Propensity = Callable[[Sequence[float]], float]


class CompiledRate:
    """Propensity closure that pickles as its resolved expression."""

    def __init__(self, expr: ResolvedExpr, species_index: Mapping[str, int], params: Mapping[str, float]) -> None:
        self.expr = expr
        self._species_index = dict(species_index)
        self._params = dict(params)
        self._fn = compile_expr(expr, self._species_index, self._params)

    def __call__(self, counts: Sequence[float]) -> float:
        return self._fn(counts)

    def __getstate__(self) -> Tuple[ResolvedExpr, Dict[str, int], Dict[str, float]]:
        return self.expr, self._species_index, self._params

    def __setstate__(self, state: Tuple[ResolvedExpr, Dict[str, int], Dict[str, float]]) -> None:
        self.__init__(*state)  # type: ignore[misc]


@dataclass(frozen=True)
class Reaction:
    name: str
    change: Tuple[int, ...]
    propensity: Propensity = field(compare=False)
    reads: FrozenSet[int] = frozenset()

    @property
    def changed(self) -> FrozenSet[int]:
        return frozenset(i for i, delta in enumerate(self.change) if delta)


@dataclass(frozen=True)
class ReactionNetwork:
    """
    species/initial give the state layout; dependency_graph[r] holds every
    reaction whose propensity reads a species that reaction r changes.
    """

    species: Tuple[str, ...]
    initial: Tuple[float, ...]
    reactions: Tuple[Reaction, ...]
    params: Dict[str, float] = field(default_factory=dict)
    dependency_graph: Tuple[FrozenSet[int], ...] = field(init=False)
    warnings: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dependency_graph", build_dependency_graph(self.reactions))

    def index(self, species: str) -> int:
        try:
            return self.species.index(species)
        except ValueError:
            raise KeyError(f"Species '{species}' not found in network") from None

    def reaction_names(self) -> List[str]:
        return [r.name for r in self.reactions]

    def change_matrix(self) -> np.ndarray:
        """Reactions x species matrix of state changes."""
        if not self.reactions:
            return np.zeros((0, len(self.species)))
        return np.array([r.change for r in self.reactions], dtype=float)

    def with_initial(self, overrides: Mapping[str, float]) -> "ReactionNetwork":
        initial = list(self.initial)
        for name, value in overrides.items():
            initial[self.index(name)] = float(value)
        return ReactionNetwork(self.species, tuple(initial), self.reactions, self.params, warnings=self.warnings)


def build_dependency_graph(reactions: Sequence[Reaction]) -> Tuple[FrozenSet[int], ...]:
    readers: Dict[int, List[int]] = {}
    for j, reaction in enumerate(reactions):
        for species in reaction.reads:
            readers.setdefault(species, []).append(j)
    graph = []
    for reaction in reactions:
        dependents = {j for species in reaction.changed for j in readers.get(species, ())}
        graph.append(frozenset(dependents))
    return tuple(graph)


# ============================================================
# Compilation
# ============================================================

# Sign of the forward change; the backward reaction negates it.
_SIGN = {
    ArcType.CONSUMPTION: -1,
    ArcType.PRODUCTION: 1,
    ArcType.LEFT_HAND_SIDE: -1,
    ArcType.RIGHT_HAND_SIDE: 1,
}


def compile_network(doc: Document) -> ReactionNetwork:
    """Compile a valid Document into a ReactionNetwork.

    Raises:
        CompileError: A rate does not resolve, reads a Source/Sink pool, or
            names a species outside the network
    """
    species: List[str] = [eid for eid in doc.entity_ids() if not doc.entities[eid].epn_type.is_boundary]
    index = {eid: i for i, eid in enumerate(species)}
    initial = tuple(float(doc.entities[eid].initial_molecule_count or 0.0) for eid in species)
    params = {parameter_name(arc_id, name): prop.value for (arc_id, name), prop in doc.properties.items()}
    params = dict(sorted(params.items(), key=lambda item: natural_key(item[0])))

    reactions: List[Reaction] = []
    warnings: List[str] = []
    for pid in doc.process_ids():
        process = doc.processes[pid]
        try:
            rates = resolve_process_rates(process, doc)
        except (ExprSyntaxError, ResolutionError) as exc:
            raise CompileError(f"process {pid}: {exc}") from exc

        forward = [0] * len(species)
        touches_boundary = False
        for arc in doc.arcs_of_process(pid):
            if arc.arc_type not in _SIGN:
                continue
            entity = doc.entities.get(arc.entity)
            if entity is None:
                raise CompileError(f"arc {arc.arc_id} refers to unknown entity {arc.entity!r}")
            if entity.epn_type.is_boundary:
                touches_boundary = True
                continue
            forward[index[arc.entity]] += _SIGN[arc.arc_type] * arc.stoichiometry
        changes = [tuple(forward)]
        if process.reversible:
            changes.append(tuple(-delta for delta in forward))

        for (name, expr), change in zip(rates, changes):
            read = species_read(expr)
            for eid in sorted(read, key=natural_key):
                if eid not in index:
                    raise CompileError(f"reaction {name} reads {eid}, which has no count in the network")
            if not any(change) and not touches_boundary:
                message = f"NoOpReaction: reaction {name} changes no species"
                logger.warning(message)
                warnings.append(message)
            reactions.append(
                Reaction(
                    name=name,
                    change=change,
                    propensity=CompiledRate(expr, index, params),
                    reads=frozenset(index[eid] for eid in read),
                )
            )

    network = ReactionNetwork(tuple(species), initial, tuple(reactions), params, warnings=tuple(warnings))
    logger.info("compiled network: %d species, %d reactions", len(species), len(reactions))
    return network


def species_totals(network: ReactionNetwork, counts: np.ndarray, groups: Sequence[Sequence[str]]) -> np.ndarray:
    """Column sums of the given species groups for each row of counts."""
    columns = [[network.index(name) for name in group] for group in groups]
    return np.stack([counts[:, cols].sum(axis=1) for cols in columns], axis=1)


def lookup(network: ReactionNetwork, reaction: str) -> Optional[Reaction]:
    for candidate in network.reactions:
        if candidate.name == reaction:
            return candidate
    return None
