# flowpepa/printer.py
"""Canonical `.pfa` text for a Document. parse(print_document(doc)) == doc."""

from typing import List

from flowpepa.model import Document
from flowpepa.naming import format_number
from flowpepa.types import Arc, Compartment, EntityPoolNode, LogicalOperator, ProcessNode

HEADER = "# flowpepa process flow model"
INDENT = "  "


def print_document(doc: Document) -> str:
    """Sections in fixed order, each sorted by id, separated by blank lines.

    Arcs always carry their id, so numbering survives a round trip even
    when the source relied on automatic `st<N>` ids.
    """
    sections: List[List[str]] = [
        [_compartment(doc.compartments[cid]) for cid in doc.compartment_ids()],
        [_entity(doc.entities[eid]) for eid in doc.entity_ids()],
        [_process(doc.processes[pid]) for pid in doc.process_ids()],
        [_arc(doc.arcs[aid]) for aid in doc.arc_ids()],
        [_logic(doc.logic_operators[oid]) for oid in doc.logic_ids()],
    ]
    blocks = [HEADER] + ["\n\n".join(section) for section in sections if section]
    return "\n\n".join(blocks) + "\n"


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _block(head: str, lines: List[str]) -> str:
    return "\n".join([head + " {"] + [INDENT + line for line in lines] + ["}"])


def _compartment(compartment: Compartment) -> str:
    return _block(f"compartment {compartment.id}", [f"name: {quote(compartment.name)}"])


def _entity(entity: EntityPoolNode) -> str:
    lines = [f"type: {entity.epn_type.value}"]
    if entity.initial_molecule_count is not None:
        lines.append(f"count: {format_number(entity.initial_molecule_count)}")
    if entity.compartment is not None:
        lines.append(f"compartment: {entity.compartment}")
    return _block(f"entity {entity.id}", lines)


def _process(process: ProcessNode) -> str:
    lines = [
        f"type: {process.process_type.value}",
        f"reversible: {'true' if process.reversible else 'false'}",
        f"rate: {quote(process.propensity_forward)}",
    ]
    if process.propensity_backward is not None:
        lines.append(f"rate_backward: {quote(process.propensity_backward)}")
    return _block(f"process {process.id}", lines)


def _arc(arc: Arc) -> str:
    lines = [
        f"kind: {arc.arc_type.value}",
        f"entity: {arc.entity}",
        f"process: {arc.process}",
    ]
    if arc.manual_equation_arc_id is not None:
        lines.append(f"ref: {arc.manual_equation_arc_id}")
    if arc.stoichiometry != 1:
        lines.append(f"stoichiometry: {arc.stoichiometry}")
    if arc.quantitative_properties:
        lines.append("params {")
        lines.extend(f"{INDENT}{p.name} = {format_number(p.value)}" for p in arc.quantitative_properties)
        lines.append("}")
    return _block(f"arc {arc.arc_id}", lines)


def _logic(op: LogicalOperator) -> str:
    lines = [f"kind: {op.kind.value}"]
    for logic_input in op.inputs:
        if logic_input.input_threshold is None:
            lines.append(f"input: {logic_input.source}")
        else:
            lines.append(f"input: {logic_input.source} >= {format_number(logic_input.input_threshold)}")
    lines.append(f"low: {format_number(op.output_low)}")
    lines.append(f"high: {format_number(op.output_high)}")
    return _block(f"logic {op.id}", lines)
