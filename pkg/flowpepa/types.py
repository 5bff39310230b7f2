# flowpepa/types.py
"""
FLOWPEPA CORE TYPES
Purpose: Formalize the Process Flow Abstraction
         water tanks (entity pools) → pipes (arcs) → pumps (processes)

This file contains ONLY structural contracts.
No validation logic.
No expression logic.
No code generation.

Vocabulary values are the exact keywords of the `.pfa` text format.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

# ============================================================
# Primitive Types
# ============================================================

EntityId = str
ProcessId = str
ArcId = str

# Suffixes appended to reversible processes when they are split.
FORWARD_SUFFIX = "_F"
BACKWARD_SUFFIX = "_B"


# ============================================================
# SOURCE POSITIONS AND DIAGNOSTICS
# ============================================================


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a token or statement in an input text."""

    line: int
    column: int
    length: int = 0


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """
    One finding about an input text or a Document.

    Error diagnostics abort Document construction; warnings do not.
    `subject` names the offending node id when there is one.
    """

    severity: Severity
    code: str
    message: str
    span: Optional[SourceSpan] = None
    subject: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR


# ============================================================
# ENTITY POOL NODES ("water tanks")
# ============================================================


class EpnType(str, Enum):
    UNSPECIFIED = "Unspecified"
    SIMPLE_CHEMICAL = "SimpleChemical"
    MACROMOLECULE = "Macromolecule"
    NUCLEIC_ACID_FEATURE = "NucleicAcidFeature"
    COMPLEX = "Complex"
    SOURCE = "Source"
    SINK = "Sink"
    PERTURBING_AGENT = "PerturbingAgent"

    @property
    def is_boundary(self) -> bool:
        """Source and Sink pools are effectively infinite and carry no count."""
        return self in (EpnType.SOURCE, EpnType.SINK)


@dataclass(frozen=True)
class EntityPoolNode:
    """
    A pool of indistinguishable molecules.

    The id is opaque: whatever it encodes (modifications, complexes,
    compartment) is passed on by name and never parsed.
    For PerturbingAgent the count is an unconstrained magnitude.
    """

    id: EntityId
    epn_type: EpnType
    initial_molecule_count: Optional[float] = None
    compartment: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


# ============================================================
# PROCESS NODES ("pumps")
# ============================================================


class ProcessType(str, Enum):
    PROCESS = "Process"
    ASSOCIATION = "Association"
    DISSOCIATION = "Dissociation"
    OMITTED = "Omitted"
    UNCERTAIN = "Uncertain"
    OBSERVABLE = "Observable"


@dataclass(frozen=True)
class ProcessNode:
    """
    A reaction. ProcessType is informational only; every type compiles
    to the same kind of reaction.
    """

    id: ProcessId
    process_type: ProcessType
    propensity_forward: str
    reversible: bool = False
    propensity_backward: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


# ============================================================
# ARCS ("pipes" and "control electronics")
# ============================================================


class ArcType(str, Enum):
    CONSUMPTION = "Consumption"
    PRODUCTION = "Production"
    LEFT_HAND_SIDE = "LeftHandSide"
    RIGHT_HAND_SIDE = "RightHandSide"
    MODULATION = "Modulation"
    STIMULATION = "Stimulation"
    CATALYSIS = "Catalysis"
    INHIBITION = "Inhibition"
    NECESSARY_STIMULATION = "NecessaryStimulation"

    @property
    def is_modifier(self) -> bool:
        return self in _MODIFIER_ARCS

    @property
    def is_reversible_side(self) -> bool:
        return self in (ArcType.LEFT_HAND_SIDE, ArcType.RIGHT_HAND_SIDE)


_MODIFIER_ARCS = frozenset(
    {
        ArcType.MODULATION,
        ArcType.STIMULATION,
        ArcType.CATALYSIS,
        ArcType.INHIBITION,
        ArcType.NECESSARY_STIMULATION,
    }
)


@dataclass(frozen=True)
class QuantitativeProperty:
    """A named kinetic parameter stored on an arc (e.g. kcat, Km)."""

    name: str
    value: float


@dataclass(frozen=True)
class Arc:
    """
    Link between one entity pool and one process.

    arc_id is globally unique; manual_equation_arc_id is the short name
    propensity functions use, unique only among the arcs of one process.
    """

    arc_id: ArcId
    arc_type: ArcType
    entity: EntityId
    process: ProcessId
    manual_equation_arc_id: Optional[str] = None
    stoichiometry: int = 1
    quantitative_properties: Tuple[QuantitativeProperty, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def property(self, name: str) -> Optional[QuantitativeProperty]:
        for prop in self.quantitative_properties:
            if prop.name == name:
                return prop
        return None


# ============================================================
# LOGIC GATES
# ============================================================


class LogicKind(str, Enum):
    AND = "And"
    OR = "Or"
    NOT = "Not"


@dataclass(frozen=True)
class LogicInput:
    """
    Incoming logic arc. `input_threshold` is set iff the source is an
    entity pool; operator outputs are already boolean.
    """

    source: str
    input_threshold: Optional[float] = None


@dataclass(frozen=True)
class LogicalOperator:
    id: str
    kind: LogicKind
    inputs: Tuple[LogicInput, ...]
    output_low: float = 0.0
    output_high: float = 1.0
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


# ============================================================
# COMPARTMENTS
# ============================================================


@dataclass(frozen=True)
class Compartment:
    id: str
    name: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


# ============================================================
# END OF FILE
# ============================================================
