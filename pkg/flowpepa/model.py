# flowpepa/model.py
"""
Document: the validated in-memory model.

Four primary keyed collections (entities, processes, arcs, quantitative
properties) plus logic operators and compartments. Every collection is
keyed by id and iterated in natural key order, so everything derived from
a Document (printed text, generated code, compiled networks) is stable.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from flowpepa.errors import ExprSyntaxError, ResolutionError, UnknownEntity, UnknownProcess
from flowpepa.expr import parse_expr, resolve, species_read
from flowpepa.naming import natural_key
from flowpepa.types import (
    BACKWARD_SUFFIX,
    FORWARD_SUFFIX,
    Arc,
    ArcType,
    Compartment,
    Diagnostic,
    EntityPoolNode,
    EpnType,
    LogicalOperator,
    LogicKind,
    ProcessNode,
    QuantitativeProperty,
    Severity,
    SourceSpan,
)

PropertyKey = Tuple[str, str]

# ============================================================
# Document
# ============================================================


@dataclass(frozen=True)
class Document:
    """
    Immutable model. `properties` is derived from the arcs and keyed by
    (arc_id, property name). Build instances with Document.build().
    """

    entities: Dict[str, EntityPoolNode] = field(default_factory=dict)
    processes: Dict[str, ProcessNode] = field(default_factory=dict)
    arcs: Dict[str, Arc] = field(default_factory=dict)
    logic_operators: Dict[str, LogicalOperator] = field(default_factory=dict)
    compartments: Dict[str, Compartment] = field(default_factory=dict)
    properties: Dict[PropertyKey, QuantitativeProperty] = field(init=False)
    _by_process: Dict[str, Tuple[Arc, ...]] = field(init=False, compare=False, repr=False)
    _by_entity: Dict[str, Tuple[Arc, ...]] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        properties: Dict[PropertyKey, QuantitativeProperty] = {}
        by_process: Dict[str, List[Arc]] = {}
        by_entity: Dict[str, List[Arc]] = {}
        for arc_id in sorted(self.arcs, key=natural_key):
            arc = self.arcs[arc_id]
            for prop in arc.quantitative_properties:
                properties[(arc_id, prop.name)] = prop
            by_process.setdefault(arc.process, []).append(arc)
            by_entity.setdefault(arc.entity, []).append(arc)
        object.__setattr__(self, "properties", properties)
        object.__setattr__(self, "_by_process", {k: tuple(v) for k, v in by_process.items()})
        object.__setattr__(self, "_by_entity", {k: tuple(v) for k, v in by_entity.items()})

    @classmethod
    def build(
        cls,
        entities: Iterable[EntityPoolNode] = (),
        processes: Iterable[ProcessNode] = (),
        arcs: Iterable[Arc] = (),
        logic_operators: Iterable[LogicalOperator] = (),
        compartments: Iterable[Compartment] = (),
    ) -> "Document":
        """Key each collection by id; arc properties are kept sorted by name."""
        return cls(
            entities={e.id: e for e in entities},
            processes={p.id: p for p in processes},
            arcs={a.arc_id: _sorted_properties(a) for a in arcs},
            logic_operators={o.id: o for o in logic_operators},
            compartments={c.id: c for c in compartments},
        )

    # --------------------------------------------------------
    # Ordered views
    # --------------------------------------------------------

    def entity_ids(self) -> List[str]:
        return sorted(self.entities, key=natural_key)

    def process_ids(self) -> List[str]:
        return sorted(self.processes, key=natural_key)

    def arc_ids(self) -> List[str]:
        return sorted(self.arcs, key=natural_key)

    def logic_ids(self) -> List[str]:
        return sorted(self.logic_operators, key=natural_key)

    def compartment_ids(self) -> List[str]:
        return sorted(self.compartments, key=natural_key)

    def property_keys(self) -> List[PropertyKey]:
        return sorted(self.properties, key=lambda k: (natural_key(k[0]), natural_key(k[1])))

    # --------------------------------------------------------
    # Neighbourhood queries
    # --------------------------------------------------------

    def arcs_of_process(self, pid: str) -> List[Arc]:
        """All arcs attached to a process, ordered by arc_id.

        Raises:
            UnknownProcess: If pid is not a process of this document
        """
        if pid not in self.processes:
            raise UnknownProcess(pid)
        return list(self._by_process.get(pid, ()))

    def arcs_of_entity(self, eid: str) -> List[Arc]:
        """All arcs attached to an entity pool, ordered by arc_id.

        Raises:
            UnknownEntity: If eid is not an entity of this document
        """
        if eid not in self.entities:
            raise UnknownEntity(eid)
        return list(self._by_entity.get(eid, ()))


def _sorted_properties(arc: Arc) -> Arc:
    ordered = tuple(sorted(arc.quantitative_properties, key=lambda p: natural_key(p.name)))
    if ordered == arc.quantitative_properties:
        return arc
    return Arc(
        arc_id=arc.arc_id,
        arc_type=arc.arc_type,
        entity=arc.entity,
        process=arc.process,
        manual_equation_arc_id=arc.manual_equation_arc_id,
        stoichiometry=arc.stoichiometry,
        quantitative_properties=ordered,
        span=arc.span,
    )


def arcs_of_process(doc: Document, pid: str) -> List[Arc]:
    return doc.arcs_of_process(pid)


def arcs_of_entity(doc: Document, eid: str) -> List[Arc]:
    return doc.arcs_of_entity(eid)


# ============================================================
# Validation
# ============================================================

_CONSUMING = (ArcType.CONSUMPTION, ArcType.LEFT_HAND_SIDE)
_PRODUCING = (ArcType.PRODUCTION, ArcType.RIGHT_HAND_SIDE)


def validate(doc: Document) -> List[Diagnostic]:
    """Check every structural rule of a Document.

    Returns:
        Diagnostics in a fixed order (global, entities, processes, arcs,
        logic); empty iff the document is valid. An entity with no arcs is
        legal; the generator leaves it out with a logged warning.
    """
    return _Validator(doc).run()


class _Validator:
    def __init__(self, doc: Document) -> None:
        self.doc = doc
        self.out: List[Diagnostic] = []

    def report(self, code: str, subject: str, message: str, span: Optional[SourceSpan]) -> None:
        self.out.append(Diagnostic(Severity.ERROR, code, message, span, subject))

    def run(self) -> List[Diagnostic]:
        if not self.doc.processes:
            self.out.append(Diagnostic(Severity.ERROR, "NoProcesses", "document declares no processes"))
        for eid in self.doc.entity_ids():
            self._entity(self.doc.entities[eid])
        for pid in self.doc.process_ids():
            self._process(self.doc.processes[pid])
        for arc_id in self.doc.arc_ids():
            self._arc(self.doc.arcs[arc_id])
        for op_id in self.doc.logic_ids():
            self._logic(self.doc.logic_operators[op_id])
        return self.out

    # --------------------------------------------------------

    def _entity(self, entity: EntityPoolNode) -> None:
        count = entity.initial_molecule_count
        if entity.compartment is not None and entity.compartment not in self.doc.compartments:
            self.report(
                "DanglingCompartmentRef",
                entity.id,
                f"entity {entity.id} refers to unknown compartment {entity.compartment!r}",
                entity.span,
            )
        if entity.epn_type.is_boundary:
            return
        if count is None:
            self.report(
                "MissingInitialCount", entity.id, f"entity {entity.id} has no initial molecule count", entity.span
            )
        elif entity.epn_type is not EpnType.PERTURBING_AGENT:
            if count < 0:
                self.report("NegativeCount", entity.id, f"entity {entity.id} has negative count {count}", entity.span)
            elif count != int(count):
                self.report(
                    "NonIntegerCount", entity.id, f"entity {entity.id} count {count} is not an integer", entity.span
                )
    def _process(self, process: ProcessNode) -> None:
        pid = process.id
        if pid.endswith(FORWARD_SUFFIX) or pid.endswith(BACKWARD_SUFFIX):
            self.report(
                "ReservedSuffix", pid, f"process id {pid} ends with a reserved suffix _F/_B", process.span
            )
        if process.reversible and process.propensity_backward is None:
            self.report(
                "MissingBackwardPropensity", pid, f"reversible process {pid} has no backward rate", process.span
            )
        if not process.reversible and process.propensity_backward is not None:
            self.report(
                "UnexpectedBackwardPropensity",
                pid,
                f"irreversible process {pid} declares a backward rate",
                process.span,
            )

        arcs = [a for a in self.doc.arcs_of_process(pid) if a.entity in self.doc.entities]
        seen: Set[str] = set()
        for arc in arcs:
            ref = arc.manual_equation_arc_id
            if ref is None:
                continue
            if ref in seen:
                self.report(
                    "DuplicateManualRef", arc.arc_id, f"process {pid} has two arcs with ref {ref!r}", arc.span
                )
            seen.add(ref)

        material = [a for a in self.doc.arcs_of_process(pid) if not a.arc_type.is_modifier]
        if not any(a.arc_type in _CONSUMING for a in material) or not any(a.arc_type in _PRODUCING for a in material):
            self.report(
                "IncompleteProcess",
                pid,
                f"process {pid} needs a consuming-side and a producing-side arc (use Source/Sink for none)",
                process.span,
            )

        texts = [process.propensity_forward]
        if process.reversible and process.propensity_backward is not None:
            texts.append(process.propensity_backward)
        for text in texts:
            self._rate(process, text)

    def _rate(self, process: ProcessNode, text: str) -> None:
        try:
            resolved = resolve(parse_expr(text), process, self.doc)
        except ExprSyntaxError as exc:
            self.report("RateSyntax", process.id, f"process {process.id}: {exc}", process.span)
            return
        except ResolutionError as exc:
            self.report(type(exc).__name__, process.id, str(exc), process.span)
            return
        for eid in sorted(species_read(resolved), key=natural_key):
            entity = self.doc.entities.get(eid)
            if entity is not None and entity.epn_type.is_boundary:
                self.report(
                    "SourceSinkInRate",
                    process.id,
                    f"process {process.id} reads {eid}, a {entity.epn_type.value} without a count",
                    process.span,
                )

    def _arc(self, arc: Arc) -> None:
        if arc.entity not in self.doc.entities:
            self.report(
                "DanglingEntityRef", arc.arc_id, f"arc {arc.arc_id} refers to unknown entity {arc.entity!r}", arc.span
            )
        process = self.doc.processes.get(arc.process)
        if process is None:
            self.report(
                "DanglingProcessRef",
                arc.arc_id,
                f"arc {arc.arc_id} refers to unknown process {arc.process!r}",
                arc.span,
            )
        elif arc.arc_type.is_reversible_side and not process.reversible:
            self.report(
                "ArcTypeMismatch",
                arc.arc_id,
                f"arc {arc.arc_id}: {arc.arc_type.value} on irreversible process {process.id}",
                arc.span,
            )
        elif arc.arc_type in (ArcType.CONSUMPTION, ArcType.PRODUCTION) and process.reversible:
            self.report(
                "ArcTypeMismatch",
                arc.arc_id,
                f"arc {arc.arc_id}: {arc.arc_type.value} on reversible process {process.id}",
                arc.span,
            )
        if arc.stoichiometry < 1:
            self.report(
                "InvalidStoichiometry",
                arc.arc_id,
                f"arc {arc.arc_id} stoichiometry must be >= 1, got {arc.stoichiometry}",
                arc.span,
            )

    def _logic(self, op: LogicalOperator) -> None:
        n = len(op.inputs)
        if (op.kind is LogicKind.NOT and n != 1) or (op.kind is not LogicKind.NOT and n < 2):
            expected = "exactly 1 input" if op.kind is LogicKind.NOT else "at least 2 inputs"
            self.report("LogicArity", op.id, f"{op.kind.value} operator {op.id} needs {expected}, has {n}", op.span)
        if not op.output_low < op.output_high:
            self.report(
                "LogicOutputRange",
                op.id,
                f"logic operator {op.id}: low output {op.output_low} must be below high {op.output_high}",
                op.span,
            )
        for inp in op.inputs:
            if inp.source in self.doc.entities:
                if inp.input_threshold is None:
                    self.report(
                        "MissingInputThreshold",
                        op.id,
                        f"logic operator {op.id}: entity input {inp.source} needs a threshold",
                        op.span,
                    )
                elif inp.input_threshold < 0:
                    self.report(
                        "MissingInputThreshold",
                        op.id,
                        f"logic operator {op.id}: threshold for {inp.source} must be non-negative",
                        op.span,
                    )
            elif inp.source in self.doc.logic_operators:
                if inp.input_threshold is not None:
                    self.report(
                        "UnexpectedInputThreshold",
                        op.id,
                        f"logic operator {op.id}: operator input {inp.source} takes no threshold",
                        op.span,
                    )
            else:
                self.report(
                    "DanglingLogicInput", op.id, f"logic operator {op.id}: unknown input {inp.source!r}", op.span
                )
        if self._on_cycle(op.id):
            self.report("CyclicLogic", op.id, f"logic operator {op.id} is part of a cycle", op.span)

    def _on_cycle(self, start: str) -> bool:
        ops: Mapping[str, LogicalOperator] = self.doc.logic_operators
        stack = [inp.source for inp in ops[start].inputs if inp.source in ops]
        visited: Set[str] = set()
        while stack:
            current = stack.pop()
            if current == start:
                return True
            if current in visited:
                continue
            visited.add(current)
            stack.extend(inp.source for inp in ops[current].inputs if inp.source in ops)
        return False


def is_valid(diagnostics: Iterable[Diagnostic]) -> bool:
    return not any(d.is_error for d in diagnostics)
