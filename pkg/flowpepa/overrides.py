# flowpepa/overrides.py
"""`--set` assignments: `<entity>.count=N` and `<arc>.<property>=V`."""

import dataclasses
import re
from typing import Dict, Iterable

from flowpepa.errors import UsageError
from flowpepa.model import Document
from flowpepa.types import Arc, EntityPoolNode, QuantitativeProperty

_ASSIGNMENT = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)\s*\Z")


def apply_overrides(doc: Document, assignments: Iterable[str]) -> Document:
    """New Document with entity counts and arc properties replaced.

    Raises:
        UsageError: Malformed assignment, unknown target, non-numeric value,
            or an arc property the arc does not carry
    """
    entities: Dict[str, EntityPoolNode] = dict(doc.entities)
    arcs: Dict[str, Arc] = dict(doc.arcs)
    for text in assignments:
        match = _ASSIGNMENT.match(text)
        if match is None:
            raise UsageError(f"bad assignment {text!r}; expected NAME.ATTR=VALUE")
        target, attr, raw = match.groups()
        try:
            value = float(raw)
        except ValueError:
            raise UsageError(f"bad value in {text!r}: {raw!r} is not a number") from None

        if target in entities:
            if attr != "count":
                raise UsageError(f"{text!r}: entities only accept .count")
            entities[target] = dataclasses.replace(entities[target], initial_molecule_count=value)
        elif target in arcs:
            arc = arcs[target]
            if arc.property(attr) is None:
                raise UsageError(f"{text!r}: arc {target} has no property {attr!r}")
            props = tuple(
                QuantitativeProperty(p.name, value if p.name == attr else p.value) for p in arc.quantitative_properties
            )
            arcs[target] = dataclasses.replace(arc, quantitative_properties=props)
        else:
            raise UsageError(f"{text!r}: no entity or arc named {target!r}")

    return Document(
        entities=entities,
        processes=dict(doc.processes),
        arcs=arcs,
        logic_operators=dict(doc.logic_operators),
        compartments=dict(doc.compartments),
    )
