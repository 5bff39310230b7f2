"""Tests for propensity expressions: parsing, resolution, logic lowering and evaluation."""

import itertools
import math
from types import MappingProxyType
from typing import Dict, List, Mapping, Sequence, Tuple

import pytest

from flowpepa.errors import (
    CyclicLogic,
    EvalError,
    ExprSyntaxError,
    UnknownLogicOperator,
    UnknownManualArcRef,
    UnknownProperty,
)
from flowpepa.expr import (
    BinOp,
    Call,
    EntityAlias,
    LogicAlias,
    Neg,
    Number,
    ParamAlias,
    ParamRef,
    SpeciesRef,
    compile_expr,
    evaluate,
    lower_logic,
    names_used,
    parse_expr,
    render_expr,
    resolve,
    resolve_process_rates,
    species_read,
    threshold,
)
from flowpepa.model import Document
from flowpepa.types import LogicKind, SourceSpan
from tests.conftest import BINDING, load_text

MM = """
entity S { type: SimpleChemical count: 150 }
entity P { type: SimpleChemical count: 0 }
entity E { type: Macromolecule count: 20 }
process conv { rate: "<par: enz.kcat> * <ent: enz> * <ent: sub> / (<par: enz.Km> + <ent: sub>)" }
arc { kind: Consumption entity: S process: conv ref: sub }
arc { kind: Production entity: P process: conv }
arc { kind: Catalysis entity: E process: conv ref: enz params { kcat = 10 Km = 300 } }
"""

GATES = """
entity A { type: SimpleChemical count: 0 }
entity B { type: SimpleChemical count: 0 }
logic g_and { kind: And input: A >= 5 input: B >= 5 }
logic g_or { kind: Or input: A >= 5 input: B >= 5 }
logic g_not { kind: Not input: g_and low: 2 high: 10 }
process gated { rate: "<logic: g_or> * 3" }
"""

INPUTS = ("A", "B", "C", "D", "E")
KINDS = (LogicKind.AND, LogicKind.OR, LogicKind.NOT)

# gate -> its candidate inputs in order; a Not gate takes only the first
Layout = Dict[str, Tuple[str, str]]
CHAIN: Layout = {"g1": ("A", "B"), "g2": ("g1", "C"), "g3": ("g2", "D"), "g4": ("g3", "E")}
TREE: Layout = {"g1": ("A", "B"), "g2": ("C", "D"), "g3": ("g1", "g2"), "g4": ("g3", "E")}


def gate_network(layout: Layout, kinds: Sequence[LogicKind]) -> Document:
    lines = [f"entity {name} {{ type: SimpleChemical count: 0 }}" for name in INPUTS]
    for (gate, sources), kind in zip(layout.items(), kinds):
        used = sources[:1] if kind is LogicKind.NOT else sources
        inputs = " ".join(f"input: {s}" if s in layout else f"input: {s} >= 5" for s in used)
        lines.append(f"logic {gate} {{ kind: {kind.value} {inputs} low: 2 high: 10 }}")
    return load_text("\n".join(lines))


def boolean_reference(layout: Layout, kinds: Sequence[LogicKind], inputs: Mapping[str, bool]) -> bool:
    env = dict(inputs)
    result = False
    for (gate, sources), kind in zip(layout.items(), kinds):
        args: List[bool] = [env[s] for s in sources]
        if kind is LogicKind.NOT:
            result = not args[0]
        elif kind is LogicKind.AND:
            result = all(args)
        else:
            result = any(args)
        env[gate] = result
    return result


def value(text: str) -> float:
    return evaluate(parse_expr(text), {}, {})


class TestParseExpr:
    """Propensity text to AST."""

    def test_precedence(self) -> None:
        assert parse_expr("1 + 2 * 3") == BinOp("+", Number(1.0), BinOp("*", Number(2.0), Number(3.0)))
        assert value("1 + 2 * 3") == 7.0

    def test_left_associative(self) -> None:
        assert value("8 - 2 - 1") == 5.0
        assert value("8 / 2 / 2") == 2.0

    def test_unary_minus(self) -> None:
        assert value("-2 * 3") == -6.0
        assert parse_expr("--2") == Neg(Neg(Number(2.0)))

    def test_parentheses(self) -> None:
        assert value("(1 + 2) * 3") == 9.0

    def test_number_forms(self) -> None:
        assert value(".5 + 1e2 + 2.") == 102.5

    def test_aliases(self) -> None:
        expr = parse_expr("<par: enz.kcat> * < ent : sub > + <logic: G1>")
        assert expr == BinOp("+", BinOp("*", ParamAlias("enz", "kcat"), EntityAlias("sub")), LogicAlias("G1"))

    def test_threshold_call(self) -> None:
        assert parse_expr("threshold(<ent: a>, 2)") == Call("threshold", (EntityAlias("a"), Number(2.0)))

    def test_bare_names_only_when_allowed(self) -> None:
        with pytest.raises(ExprSyntaxError, match="bare name"):
            parse_expr("k * A")
        assert names_used(parse_expr("k * A + threshold(B, 1)", allow_names=True)) == {"k", "A", "B"}

    @pytest.mark.parametrize(
        "text",
        ["", "1 +", "(1", "1 2", "foo(1)", "threshold(1)", "<xyz: a>", "<par: a>", "<ent: a.b>", "<ent: >", "1 $ 2"],
    )
    def test_syntax_errors(self, text: str) -> None:
        with pytest.raises(ExprSyntaxError):
            parse_expr(text)

    def test_error_position(self) -> None:
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("1 + )")
        assert info.value.span == SourceSpan(1, 5, 1)

    def test_error_position_with_origin(self) -> None:
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("1 +", SourceSpan(3, 10))
        assert info.value.span is not None
        assert (info.value.span.line, info.value.span.column) == (3, 13)


class TestResolve:
    """Alias resolution against a process's arcs."""

    def test_mapk_enzyme_rate(self, mapk_doc: Document) -> None:
        process = mapk_doc.processes["K_P_act"]
        resolved = resolve(parse_expr(process.propensity_forward), process, mapk_doc)
        assert render_expr(resolved) == "st27_kcat * m_MAPKK_PP * m_MAPK_P / (st27_Km + m_MAPK_P)"
        assert species_read(resolved) == {"m_MAPKK_PP", "m_MAPK_P"}

    def test_michaelis_menten_value(self) -> None:
        doc = load_text(MM)
        [(name, expr)] = resolve_process_rates(doc.processes["conv"], doc)
        assert name == "conv"
        rate = evaluate(expr, {"S": 150.0, "E": 20.0}, {"st3_kcat": 10.0, "st3_Km": 300.0})
        assert math.isclose(rate, 200.0 / 3.0, abs_tol=1e-9)

    def test_michaelis_menten_is_monotone_and_saturates(self) -> None:
        doc = load_text(MM)
        [(_, expr)] = resolve_process_rates(doc.processes["conv"], doc)
        params = {"st3_kcat": 10.0, "st3_Km": 300.0}
        substrates = [0.0, 1.0, 10.0, 150.0, 300.0, 1000.0, 7500.0]
        enzymes = [1.0, 5.0, 20.0, 100.0]
        grid = [[evaluate(expr, {"S": s, "E": e}, params) for s in substrates] for e in enzymes]
        for e, row in zip(enzymes, grid):
            assert row[0] == 0.0
            assert all(a < b for a, b in zip(row, row[1:]))
            assert all(rate < 10.0 * e for rate in row)
            assert math.isclose(row[substrates.index(300.0)], 10.0 * e / 2)
        for column in zip(*grid):
            assert all(a <= b for a, b in zip(column, column[1:]))

    def test_reversible_split(self) -> None:
        doc = load_text(BINDING)
        rates = dict(resolve_process_rates(doc.processes["bind"], doc))
        assert list(rates) == ["bind_F", "bind_B"]
        state = {"A": 10.0, "B": 10.0, "AB": 4.0}
        params = {"st1_kon": 0.01, "st1_koff": 0.5}
        assert math.isclose(evaluate(rates["bind_F"], state, params), 1.0)
        assert math.isclose(evaluate(rates["bind_B"], state, params), 2.0)

    def test_unknown_reference(self) -> None:
        doc = load_text(MM.replace("<ent: sub> /", "<ent: substrate> /"))
        with pytest.raises(UnknownManualArcRef) as info:
            resolve_process_rates(doc.processes["conv"], doc)
        assert info.value.process_id == "conv"

    def test_unknown_property(self) -> None:
        doc = load_text(MM.replace("enz.kcat", "enz.Vmax"))
        with pytest.raises(UnknownProperty, match="Vmax"):
            resolve_process_rates(doc.processes["conv"], doc)

    def test_resolved_tree_has_no_aliases(self) -> None:
        doc = load_text(MM)
        [(_, expr)] = resolve_process_rates(doc.processes["conv"], doc)
        assert isinstance(expr, BinOp)
        assert expr.right == BinOp("+", ParamRef("st3_Km"), SpeciesRef("S"))


class TestLogic:
    """Logic operators lowered to arithmetic."""

    @pytest.mark.parametrize(
        "a, b, expected_and, expected_or, expected_not",
        [
            (0, 0, 0.0, 0.0, 10.0),
            (5, 0, 0.0, 1.0, 10.0),
            (0, 7, 0.0, 1.0, 10.0),
            (5, 5, 1.0, 1.0, 2.0),
            (4, 100, 0.0, 1.0, 10.0),
        ],
    )
    def test_truth_table(self, a: int, b: int, expected_and: float, expected_or: float, expected_not: float) -> None:
        doc = load_text(GATES)
        state = {"A": float(a), "B": float(b)}
        gates = doc.logic_operators
        assert evaluate(lower_logic(gates["g_and"], doc), state, {}) == expected_and
        assert evaluate(lower_logic(gates["g_or"], doc), state, {}) == expected_or
        assert evaluate(lower_logic(gates["g_not"], doc), state, {}) == expected_not

    @pytest.mark.parametrize(
        "layout, size",
        [(CHAIN, 1), (CHAIN, 2), (CHAIN, 3), (CHAIN, 4), (TREE, 4)],
        ids=["chain1", "chain2", "chain3", "chain4", "tree4"],
    )
    def test_nested_networks_match_boolean_logic(self, layout: Layout, size: int) -> None:
        """Every gate assignment and every input combination agrees with plain boolean evaluation."""
        for kinds in itertools.product(KINDS, repeat=size):
            doc = gate_network(layout, kinds)
            lowered = lower_logic(doc.logic_operators[f"g{size}"], doc)
            for bits in itertools.product((False, True), repeat=len(INPUTS)):
                state = {name: 9.0 if bit else 4.0 for name, bit in zip(INPUTS, bits)}
                expected = 10.0 if boolean_reference(layout, kinds, dict(zip(INPUTS, bits))) else 2.0
                assert evaluate(lowered, state, {}) == expected, (kinds, bits)

    def test_logic_alias_in_rate(self) -> None:
        doc = load_text(GATES)
        [(_, expr)] = resolve_process_rates(doc.processes["gated"], doc)
        assert evaluate(expr, {"A": 9.0, "B": 0.0}, {}) == 3.0
        assert evaluate(expr, {"A": 0.0, "B": 0.0}, {}) == 0.0
        assert species_read(expr) == {"A", "B"}

    def test_cycle(self) -> None:
        doc = load_text("logic g1 { kind: Not input: g2 }\nlogic g2 { kind: Not input: g1 }")
        with pytest.raises(CyclicLogic):
            lower_logic(doc.logic_operators["g1"], doc)

    def test_unknown_input(self) -> None:
        doc = load_text("logic g1 { kind: Not input: ghost >= 1 }")
        with pytest.raises(UnknownLogicOperator):
            lower_logic(doc.logic_operators["g1"], doc)

    def test_unknown_operator_alias(self) -> None:
        doc = load_text('process p { rate: "<logic: nope>" }')
        with pytest.raises(UnknownLogicOperator):
            resolve_process_rates(doc.processes["p"], doc)

    def test_threshold_builtin(self) -> None:
        assert threshold(5.0, 5.0) == 1.0
        assert threshold(4.999, 5.0) == 0.0


class TestEvaluate:
    def test_division_by_zero(self) -> None:
        with pytest.raises(EvalError) as info:
            value("1 / (2 - 2)")
        assert info.value.span == SourceSpan(1, 3, 1)

    def test_compiled_matches_interpreted(self, mapk_doc: Document) -> None:
        process = mapk_doc.processes["K_P_act"]
        expr = resolve(parse_expr(process.propensity_forward), process, mapk_doc)
        index = {"m_MAPKK_PP": 0, "m_MAPK_P": 1}
        params = {"st27_kcat": 10.0, "st27_Km": 300.0}
        rate = compile_expr(expr, index, params)
        for counts in ([0.0, 0.0], [20.0, 100.0], [3000.0, 7500.0]):
            state = dict(zip(index, counts))
            assert rate(counts) == evaluate(expr, state, params)

    def test_evaluation_leaves_inputs_untouched(self) -> None:
        doc = load_text(MM)
        [(_, expr)] = resolve_process_rates(doc.processes["conv"], doc)
        state = MappingProxyType({"S": 150.0, "E": 20.0})
        params = MappingProxyType({"st3_kcat": 10.0, "st3_Km": 300.0})
        first = evaluate(expr, state, params)
        assert [evaluate(expr, state, params) for _ in range(3)] == [first] * 3
        assert dict(state) == {"S": 150.0, "E": 20.0}

        counts = (150.0, 20.0)
        rate = compile_expr(expr, {"S": 0, "E": 1}, dict(params))
        assert rate(counts) == rate(counts) == first
        assert counts == (150.0, 20.0)

    def test_compiled_division_by_zero(self) -> None:
        rate = compile_expr(BinOp("/", Number(1.0), SpeciesRef("A")), {"A": 0}, {})
        with pytest.raises(EvalError):
            rate([0.0])

    def test_compile_rejects_unbound_names(self) -> None:
        with pytest.raises(KeyError):
            compile_expr(SpeciesRef("ghost"), {"A": 0}, {})

    def test_unresolved_nodes_are_rejected(self) -> None:
        with pytest.raises(TypeError):
            evaluate(EntityAlias("sub"), {}, {})


class TestRender:
    """Minimal-parenthesis rendering."""

    @pytest.mark.parametrize(
        "text",
        ["a - b - c", "a - (b - c)", "a / (b * c)", "-(a + b)", "threshold(a, 2) * 3", "k * A / (Km + A)"],
    )
    def test_minimal_parentheses(self, text: str) -> None:
        expr = parse_expr(text, allow_names=True)
        assert render_expr(expr) == text
        assert parse_expr(render_expr(expr), allow_names=True) == expr

    def test_negative_numbers(self) -> None:
        assert render_expr(BinOp("*", Number(-2.0), SpeciesRef("A"))) == "(-2) * A"

    def test_aliases_render_as_source(self) -> None:
        text = "<par: enz.kcat> * <ent: sub>"
        assert render_expr(parse_expr(text)) == text
