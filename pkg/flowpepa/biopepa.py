# flowpepa/biopepa.py
"""
Bio-PEPA code generation.

Three loops over the Document: entities give species components, processes
give functional rates, arc properties give parameters. Everything is
emitted in natural key order, so the output bytes are a pure function of
the Document. check_output() re-reads the emitted subset and cross-checks
its names.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, List, Optional, Set, Tuple

from flowpepa.errors import ExprSyntaxError, GenerationError, NoProcesses, ResolutionError
from flowpepa.expr import (
    ResolvedExpr,
    names_used,
    parameter_name,
    parse_expr,
    render_expr,
    resolve_process_rates,
    species_read,
)
from flowpepa.model import Document
from flowpepa.naming import format_number, natural_key
from flowpepa.types import BACKWARD_SUFFIX, FORWARD_SUFFIX, ArcType, Diagnostic, ProcessNode, Severity, SourceSpan

logger = logging.getLogger(__name__)


class BioPepaOperator(str, Enum):
    REACTANT = "<<"
    PRODUCT = ">>"
    ACTIVATOR = "(+)"
    INHIBITOR = "(-)"
    MODIFIER = "(.)"


@dataclass(frozen=True)
class SpeciesTerm:
    """One `(reaction, stoichiometry) operator Species` summand."""

    reaction: str
    stoichiometry: int
    operator: BioPepaOperator


@dataclass(frozen=True)
class BioPepaModel:
    locations: List[Tuple[str, str]] = field(default_factory=list)
    parameters: List[Tuple[str, float]] = field(default_factory=list)
    rates: List[Tuple[str, str]] = field(default_factory=list)
    species_components: List[Tuple[str, List[SpeciesTerm]]] = field(default_factory=list)
    model_component: List[Tuple[str, float]] = field(default_factory=list)


# ============================================================
# Arc mapping
# ============================================================

_MODIFIER_OPERATOR: Dict[ArcType, BioPepaOperator] = {
    ArcType.MODULATION: BioPepaOperator.MODIFIER,
    ArcType.NECESSARY_STIMULATION: BioPepaOperator.MODIFIER,
    ArcType.STIMULATION: BioPepaOperator.ACTIVATOR,
    ArcType.CATALYSIS: BioPepaOperator.ACTIVATOR,
    ArcType.INHIBITION: BioPepaOperator.INHIBITOR,
}


def map_arcs_for_entity(doc: Document, eid: str) -> List[SpeciesTerm]:
    """Species component terms contributed by the arcs of one entity.

    Modifier arcs always carry stoichiometry 1. LeftHandSide and
    RightHandSide arcs yield one term per direction of their reversible
    process.

    Raises:
        UnknownEntity: If eid is not an entity of doc
    """
    terms: List[SpeciesTerm] = []
    for arc in doc.arcs_of_entity(eid):
        pid, k = arc.process, arc.stoichiometry
        match arc.arc_type:
            case ArcType.CONSUMPTION:
                terms.append(SpeciesTerm(pid, k, BioPepaOperator.REACTANT))
            case ArcType.PRODUCTION:
                terms.append(SpeciesTerm(pid, k, BioPepaOperator.PRODUCT))
            case ArcType.LEFT_HAND_SIDE:
                terms.append(SpeciesTerm(pid + FORWARD_SUFFIX, k, BioPepaOperator.REACTANT))
                terms.append(SpeciesTerm(pid + BACKWARD_SUFFIX, k, BioPepaOperator.PRODUCT))
            case ArcType.RIGHT_HAND_SIDE:
                terms.append(SpeciesTerm(pid + FORWARD_SUFFIX, k, BioPepaOperator.PRODUCT))
                terms.append(SpeciesTerm(pid + BACKWARD_SUFFIX, k, BioPepaOperator.REACTANT))
            case _:
                terms.append(SpeciesTerm(pid, 1, _MODIFIER_OPERATOR[arc.arc_type]))
    return terms


# ============================================================
# Parameters and rates
# ============================================================


def gen_parameters(doc: Document) -> List[Tuple[str, float]]:
    """One `<ArcID>_<property>` parameter per quantitative property, sorted by name."""
    params = [(parameter_name(arc_id, name), prop.value) for (arc_id, name), prop in doc.properties.items()]
    names = [name for name, _ in params]
    assert len(set(names)) == len(names), "parameter names collide"
    return sorted(params, key=lambda item: natural_key(item[0]))


def gen_rate(doc: Document, process: ProcessNode) -> List[Tuple[str, str]]:
    """Functional rates of one process with aliases substituted.

    Raises:
        GenerationError: If a rate does not parse or an alias does not resolve
    """
    return [(name, render_expr(expr)) for name, expr in _resolved(doc, process)]


def _resolved(doc: Document, process: ProcessNode) -> List[Tuple[str, ResolvedExpr]]:
    try:
        return resolve_process_rates(process, doc)
    except (ExprSyntaxError, ResolutionError) as exc:
        raise GenerationError(f"process {process.id}: {exc}", process.id) from exc


# ============================================================
# Model assembly
# ============================================================


def generate(doc: Document) -> BioPepaModel:
    """Assemble the Bio-PEPA model of a valid Document.

    Raises:
        NoProcesses: If the document has no process
        GenerationError: If a rate cannot be resolved
    """
    if not doc.processes:
        raise NoProcesses("document declares no processes")

    rates: List[Tuple[str, str]] = []
    reads: Dict[str, FrozenSet[str]] = {}
    for pid in doc.process_ids():
        for name, expr in _resolved(doc, doc.processes[pid]):
            rates.append((name, render_expr(expr)))
            reads[name] = species_read(expr)

    components: List[Tuple[str, List[SpeciesTerm]]] = []
    model_component: List[Tuple[str, float]] = []
    for eid in doc.entity_ids():
        entity = doc.entities[eid]
        if entity.epn_type.is_boundary:
            continue
        terms = map_arcs_for_entity(doc, eid)
        with_role = {term.reaction for term in terms}
        for name, _ in rates:
            if eid in reads[name] and name not in with_role:
                terms.append(SpeciesTerm(name, 1, BioPepaOperator.MODIFIER))
        if not terms:
            logger.warning("entity %s takes part in no reaction; left out of the model", eid)
            continue
        components.append((eid, terms))
        model_component.append((eid, entity.initial_molecule_count or 0.0))

    locations = [(cid, doc.compartments[cid].name) for cid in doc.compartment_ids()]
    return BioPepaModel(
        locations=locations,
        parameters=gen_parameters(doc),
        rates=rates,
        species_components=components,
        model_component=model_component,
    )


# ============================================================
# Rendering
# ============================================================


def render(model: BioPepaModel) -> str:
    """Bio-PEPA source text; sections separated by blank lines, LF endings."""
    sections: List[List[str]] = [
        [f"location {cid} : size = 1, type = compartment;" for cid, _ in model.locations],
        [f"{name} = {format_number(value)};" for name, value in model.parameters],
        [f"kineticLawOf {name} : {text};" for name, text in model.rates],
        [_component(species, terms) for species, terms in model.species_components],
        [" <*> ".join(f"{species}[{format_number(count)}]" for species, count in model.model_component)],
    ]
    return "\n\n".join("\n".join(lines) for lines in sections if any(lines)) + "\n"


def _component(species: str, terms: List[SpeciesTerm]) -> str:
    body = " + ".join(f"({t.reaction}, {t.stoichiometry}) {t.operator.value} {species}" for t in terms)
    return f"{species} = {body};"


# ============================================================
# Self-check
# ============================================================

_ID = r"[A-Za-z_][A-Za-z0-9_]*"
_NUM = r"-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_OPS = "|".join(re.escape(op.value) for op in BioPepaOperator)

_LOCATION = re.compile(rf"location ({_ID}) : size = ({_NUM}), type = compartment;\Z")
_PARAMETER = re.compile(rf"({_ID}) = ({_NUM});\Z")
_RATE = re.compile(rf"kineticLawOf ({_ID}) : (.+);\Z")
_COMPONENT = re.compile(rf"({_ID}) = (\(.*);\Z")
_TERM = re.compile(rf"\(({_ID}), (\d+)\) ({_OPS}) ({_ID})\Z")
_POPULATION = re.compile(rf"({_ID})\[({_NUM})\]\Z")

_Report = Callable[[str, str, SourceSpan], None]


@dataclass
class _Checked:
    declared: Dict[str, str] = field(default_factory=dict)
    rate_names: Dict[str, SourceSpan] = field(default_factory=dict)
    rate_reads: List[Tuple[str, FrozenSet[str], SourceSpan]] = field(default_factory=list)
    components: Dict[str, SourceSpan] = field(default_factory=dict)
    term_reactions: List[Tuple[str, SourceSpan]] = field(default_factory=list)
    model_species: Optional[List[Tuple[str, SourceSpan]]] = None


def check_output(text: str) -> List[Diagnostic]:
    """Re-parse emitted Bio-PEPA text and verify its cross references.

    Codes: Syntax (unparseable line, missing model line), DuplicateName,
    UndeclaredName (rate reads an undeclared identifier), UndefinedRate
    (component uses a reaction without kineticLawOf), ComponentMismatch
    (term names another species, or a component absent from the model
    line), MissingComponent (model line species without a component).
    """
    out: List[Diagnostic] = []
    state = _Checked()

    def report(code: str, message: str, span: SourceSpan) -> None:
        out.append(Diagnostic(Severity.ERROR, code, message, span))

    def declare(name: str, kind: str, span: SourceSpan) -> None:
        if name in state.declared:
            report("DuplicateName", f"{name} already declared as {state.declared[name]}", span)
        state.declared[name] = kind

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        span = SourceSpan(lineno, 1, len(raw))
        if state.model_species is not None:
            report("Syntax", "text after the model line", span)
            continue
        if match := _LOCATION.match(line):
            declare(match.group(1), "location", span)
        elif match := _PARAMETER.match(line):
            declare(match.group(1), "parameter", span)
        elif match := _RATE.match(line):
            name = match.group(1)
            if name in state.rate_names:
                report("DuplicateName", f"kinetic law {name} defined twice", span)
            state.rate_names[name] = span
            try:
                expr = parse_expr(match.group(2), SourceSpan(lineno, match.start(2) + 1), allow_names=True)
            except ExprSyntaxError as exc:
                report("Syntax", f"kinetic law {name}: {exc}", exc.span or span)
                continue
            state.rate_reads.append((name, names_used(expr), span))
        elif match := _COMPONENT.match(line):
            _check_component(match.group(1), match.group(2), span, state, report)
            declare(match.group(1), "species", span)
        elif "<*>" in line or _POPULATION.match(line):
            state.model_species = _check_model_line(line, span, report)
        else:
            report("Syntax", f"cannot parse line: {line[:60]!r}", span)

    end = SourceSpan(max(1, text.count("\n")), 1)
    if state.model_species is None:
        report("Syntax", "missing model component line", end)
        return out

    for name, used, span in state.rate_reads:
        for ident in sorted(used, key=natural_key):
            if state.declared.get(ident) not in ("parameter", "species"):
                report("UndeclaredName", f"kinetic law {name} reads undeclared {ident}", span)
    for reaction, span in state.term_reactions:
        if reaction not in state.rate_names:
            report("UndefinedRate", f"reaction {reaction} has no kineticLawOf", span)
    in_model: Set[str] = set()
    for species, span in state.model_species:
        in_model.add(species)
        if species not in state.components:
            report("MissingComponent", f"model line lists {species} without a species component", span)
    for species, span in state.components.items():
        if species not in in_model:
            report("ComponentMismatch", f"species {species} is missing from the model line", span)
    return out


def _check_component(species: str, body: str, span: SourceSpan, state: _Checked, report: _Report) -> None:
    state.components[species] = span
    for chunk in body.split(" + "):
        term = _TERM.match(chunk.strip())
        if term is None:
            report("Syntax", f"species {species}: malformed term {chunk.strip()!r}", span)
            continue
        if term.group(4) != species:
            report("ComponentMismatch", f"component {species} has a term for {term.group(4)}", span)
        state.term_reactions.append((term.group(1), span))


def _check_model_line(line: str, span: SourceSpan, report: _Report) -> List[Tuple[str, SourceSpan]]:
    species: List[Tuple[str, SourceSpan]] = []
    for chunk in line.split("<*>"):
        population = _POPULATION.match(chunk.strip())
        if population is None:
            report("Syntax", f"malformed model line entry {chunk.strip()!r}", span)
            continue
        species.append((population.group(1), span))
    return species
