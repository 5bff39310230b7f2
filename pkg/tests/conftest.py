"""Shared fixtures: the bundled MAPK model and small reference networks."""

from pathlib import Path
from typing import Callable

import pytest

from flowpepa.model import Document
from flowpepa.network import ReactionNetwork, compile_network
from flowpepa.parser import parse, parse_file

ROOT = Path(__file__).resolve().parents[1]
MAPK_MODEL = ROOT / "models" / "mapk.pfa"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

MAPK_POOLS = {
    "m_MAPKKK": (("m_MAPKKK", "m_MAPKKK_act"), 150.0),
    "m_MAPKK": (("m_MAPKK", "m_MAPKK_P", "m_MAPKK_PP"), 3000.0),
    "m_MAPK": (("m_MAPK", "m_MAPK_P", "m_MAPK_PP"), 7500.0),
}

BIRTH = """
entity src { type: Source }
entity A { type: SimpleChemical count: 0 }
process birth { rate: "1" }
arc { kind: Consumption entity: src process: birth }
arc { kind: Production entity: A process: birth }
"""

DECAY = """
entity A {{ type: SimpleChemical count: {a0} }}
entity sink {{ type: Sink }}
process death {{ rate: "<par: a.k> * <ent: a>" }}
arc {{ kind: Consumption entity: A process: death ref: a params {{ k = {k} }} }}
arc {{ kind: Production entity: sink process: death }}
"""

CONVERSION = """
entity A { type: SimpleChemical count: 10 }
entity B { type: SimpleChemical count: 0 }
process conv { rate: "<par: a.k> * <ent: a>" }
arc { kind: Consumption entity: A process: conv ref: a params { k = 1 } }
arc { kind: Production entity: B process: conv stoichiometry: 2 }
"""

BINDING = """
entity A { type: SimpleChemical count: 10 }
entity B { type: SimpleChemical count: 10 }
entity AB { type: Complex count: 0 }
process bind {
  type: Association
  reversible: true
  rate: "<par: a.kon> * <ent: a> * <ent: b>"
  rate_backward: "<par: a.koff> * <ent: ab>"
}
arc { kind: LeftHandSide entity: A process: bind ref: a params { kon = 0.01 koff = 0.5 } }
arc { kind: LeftHandSide entity: B process: bind ref: b }
arc { kind: RightHandSide entity: AB process: bind ref: ab }
"""


def load_text(text: str) -> Document:
    result = parse(text)
    assert result.document is not None, [d.message for d in result.diagnostics]
    return result.document


@pytest.fixture
def load_pfa() -> Callable[[str], Document]:
    return load_text


@pytest.fixture(scope="session")
def mapk_text() -> str:
    return MAPK_MODEL.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def mapk_doc() -> Document:
    result = parse_file(MAPK_MODEL)
    assert result.document is not None
    return result.document


@pytest.fixture(scope="session")
def mapk_network(mapk_doc: Document) -> ReactionNetwork:
    return compile_network(mapk_doc)


@pytest.fixture(scope="session")
def birth_network() -> ReactionNetwork:
    return compile_network(load_text(BIRTH))


@pytest.fixture
def decay_network() -> Callable[[float, float], ReactionNetwork]:
    def build(k: float, a0: float) -> ReactionNetwork:
        return compile_network(load_text(DECAY.format(k=k, a0=a0)))

    return build
