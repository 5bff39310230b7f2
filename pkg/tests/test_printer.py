"""Round-trip tests for the canonical `.pfa` printer."""

import random
import string

import pytest

from flowpepa.model import Document
from flowpepa.parser import parse
from flowpepa.printer import HEADER, print_document, quote
from flowpepa.types import (
    Arc,
    ArcType,
    Compartment,
    EntityPoolNode,
    EpnType,
    LogicalOperator,
    LogicInput,
    LogicKind,
    ProcessNode,
    ProcessType,
    QuantitativeProperty,
)
from tests.conftest import BINDING, load_text

RATE_CHARS = string.ascii_letters + string.digits + ' <>:.*+-/()"\\_'


def reparse(doc: Document) -> Document:
    result = parse(print_document(doc))
    assert result.document is not None, [d.message for d in result.diagnostics]
    return result.document


def random_number(rng: random.Random, non_negative: bool = False) -> float:
    value = rng.choice([0.0, 1.0, 1e-7, 3.5e12, 0.1, rng.uniform(0, 1e4), float(rng.randint(0, 9999))])
    if not non_negative and rng.random() < 0.3:
        value = -value
    return value


def random_text(rng: random.Random) -> str:
    return "".join(rng.choice(RATE_CHARS) for _ in range(rng.randint(0, 40)))


def random_document(rng: random.Random) -> Document:
    """Arbitrary but syntactically printable document; references need not resolve."""
    compartments = [Compartment(f"c{n}", random_text(rng)) for n in range(rng.randint(0, 2))]
    entities = []
    for n in range(rng.randint(0, 6)):
        epn_type = rng.choice(list(EpnType))
        count = None
        if rng.random() < 0.8:
            count = random_number(rng, non_negative=epn_type is not EpnType.PERTURBING_AGENT)
        compartment = rng.choice(compartments).id if compartments and rng.random() < 0.5 else None
        entities.append(EntityPoolNode(f"e{n}", epn_type, count, compartment))
    processes = []
    for n in range(rng.randint(0, 4)):
        reversible = rng.random() < 0.5
        processes.append(
            ProcessNode(
                f"p{n}",
                rng.choice(list(ProcessType)),
                random_text(rng),
                reversible,
                random_text(rng) if rng.random() < 0.5 else None,
            )
        )
    arcs = []
    for n in range(rng.randint(0, 8)):
        names = rng.sample(["k", "Km", "kcat", "V", "h"], rng.randint(0, 3))
        arcs.append(
            Arc(
                f"st{rng.randint(1, 3)}{n}",
                rng.choice(list(ArcType)),
                f"e{rng.randint(0, 9)}",
                f"p{rng.randint(0, 9)}",
                rng.choice([None, "sub", "enz", "a"]),
                rng.randint(1, 4),
                tuple(QuantitativeProperty(name, random_number(rng)) for name in names),
            )
        )
    logic = []
    for n in range(rng.randint(0, 3)):
        inputs = tuple(
            LogicInput(f"e{rng.randint(0, 5)}", random_number(rng)) if rng.random() < 0.7 else LogicInput(f"g{n + 1}")
            for _ in range(rng.randint(0, 3))
        )
        logic.append(
            LogicalOperator(f"g{n}", rng.choice(list(LogicKind)), inputs, random_number(rng), random_number(rng))
        )
    return Document.build(
        entities=entities, processes=processes, arcs=arcs, logic_operators=logic, compartments=compartments
    )


class TestRoundTrip:
    """parse(print(doc)) == doc."""

    def test_mapk(self, mapk_doc: Document) -> None:
        assert reparse(mapk_doc) == mapk_doc

    def test_reversible_binding(self) -> None:
        doc = load_text(BINDING)
        assert reparse(doc) == doc

    def test_empty_document(self) -> None:
        assert print_document(Document()) == HEADER + "\n"
        assert reparse(Document()) == Document()

    @pytest.mark.parametrize("seed", range(50))
    def test_random_documents(self, seed: int) -> None:
        doc = random_document(random.Random(seed))
        assert reparse(doc) == doc

    @pytest.mark.parametrize("seed", range(5))
    def test_printing_is_idempotent(self, seed: int) -> None:
        text = print_document(random_document(random.Random(1000 + seed)))
        assert print_document(reparse(load_text(text))) == text


class TestCanonicalForm:
    """Exact layout of printed documents."""

    def test_attribute_order_is_normalised(self) -> None:
        a = load_text('entity A { count: 3 type: Complex }\nprocess p { rate: "1" type: Omitted }')
        b = load_text('process p { type: Omitted rate: "1" }\nentity A { type: Complex count: 3 }')
        assert print_document(a) == print_document(b)

    def test_automatic_ids_are_written_out(self) -> None:
        text = print_document(load_text("arc { kind: Production entity: B process: p }"))
        assert "arc st1 {" in text

    def test_layout(self) -> None:
        doc = load_text(
            "entity A { type: Complex count: 2.5 }\narc { kind: Production entity: A process: p params { k = 1 } }"
        )
        assert print_document(doc) == "\n".join(
            [
                HEADER,
                "",
                "entity A {",
                "  type: Complex",
                "  count: 2.5",
                "}",
                "",
                "arc st1 {",
                "  kind: Production",
                "  entity: A",
                "  process: p",
                "  params {",
                "    k = 1",
                "  }",
                "}",
                "",
            ]
        )

    def test_sections_sorted_naturally(self) -> None:
        doc = load_text("entity x10 { type: Complex }\nentity x2 { type: Complex }")
        text = print_document(doc)
        assert text.index("entity x2 ") < text.index("entity x10 ")

    def test_quote_escapes(self) -> None:
        assert quote('a"b\\c') == '"a\\"b\\\\c"'
