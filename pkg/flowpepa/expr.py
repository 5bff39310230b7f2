# flowpepa/expr.py
"""
Propensity expressions.

Source text such as

    <par: enz.kcat> * <ent: enz> * <ent: sub> / (<par: enz.Km> + <ent: sub>)

is parsed into a small arithmetic AST. Aliases are scoped to one process:
`<par: m.p>` names property p of the arc whose manual reference is m and
resolves to the global parameter `<ArcID>_<p>`; `<ent: m>` resolves to the
entity that arc points at; `<logic: G>` inlines the arithmetic lowering of
logic operator G. A resolved expression holds only numbers, parameter
references, species references, operators and the threshold builtin.
"""

import operator
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple, Union

from flowpepa.errors import (
    CyclicLogic,
    EvalError,
    ExprSyntaxError,
    UnknownLogicOperator,
    UnknownManualArcRef,
    UnknownProperty,
)
from flowpepa.lexer import EOF, Lexer, Token
from flowpepa.naming import format_number
from flowpepa.types import (
    BACKWARD_SUFFIX,
    FORWARD_SUFFIX,
    LogicalOperator,
    LogicKind,
    ProcessNode,
    SourceSpan,
)

if TYPE_CHECKING:
    from flowpepa.model import Document

# ============================================================
# AST
# ============================================================


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class ParamAlias:
    ref: str
    prop: str


@dataclass(frozen=True)
class EntityAlias:
    ref: str


@dataclass(frozen=True)
class LogicAlias:
    operator_id: str


@dataclass(frozen=True)
class Name:
    """Bare identifier; only accepted when parsing generated Bio-PEPA rates."""

    name: str


@dataclass(frozen=True)
class ParamRef:
    name: str


@dataclass(frozen=True)
class SpeciesRef:
    entity: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


Expr = Union[Number, ParamAlias, EntityAlias, LogicAlias, Name, ParamRef, SpeciesRef, Neg, BinOp, Call]

# Same node classes, but guaranteed alias-free.
ResolvedExpr = Expr

BUILTINS: Dict[str, int] = {"threshold": 2}


def threshold(signal: float, limit: float) -> float:
    """1 if signal >= limit else 0."""
    return 1.0 if signal >= limit else 0.0


# ============================================================
# Parsing
# ============================================================

_EXPR_LEXER = Lexer(
    [
        ("WS", r"[ \t]+"),
        ("NUMBER", r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"),
        ("ALIAS", r"<[^<>]*>"),
        ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
        ("OP", r"[-+*/(),]"),
    ],
    skip={"WS"},
)

_ALIAS = re.compile(r"<\s*([A-Za-z_]*)\s*:(.*)>\Z", re.DOTALL)
_ALIAS_REF = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*\Z")
_ALIAS_PAR = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*\.\s*([A-Za-z_][A-Za-z0-9_]*)\s*\Z")


def parse_expr(text: str, origin: Optional[SourceSpan] = None, allow_names: bool = False) -> Expr:
    """Parse a propensity function.

    Args:
        text: Expression source
        origin: Position of the first character within an enclosing file
        allow_names: Accept bare identifiers (generated Bio-PEPA rates)

    Returns:
        Expression AST; * and / bind tighter than + and -, all left-associative

    Raises:
        ExprSyntaxError: On any lexical or syntax error, with position
    """
    line, column = (origin.line, origin.column) if origin else (1, 1)
    tokens, problems = _EXPR_LEXER.tokenize(text, line, column)
    if problems:
        raise ExprSyntaxError(problems[0].message, problems[0].span)
    return _ExprParser(tokens, allow_names).parse()


class _ExprParser:
    def __init__(self, tokens: List[Token], allow_names: bool) -> None:
        self._tokens = tokens
        self._pos = 0
        self._allow_names = allow_names

    def parse(self) -> Expr:
        if self._peek().kind == EOF:
            raise ExprSyntaxError("empty expression", self._peek().span)
        expr = self._sum()
        tok = self._peek()
        if tok.kind != EOF:
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.span)
        return expr

    def _peek(self) -> Token:
        return self._tokens[self._pos]

    def _next(self) -> Token:
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _accept(self, text: str) -> Optional[Token]:
        tok = self._peek()
        if tok.kind == "OP" and tok.text == text:
            self._pos += 1
            return tok
        return None

    def _expect(self, text: str) -> Token:
        tok = self._accept(text)
        if tok is None:
            bad = self._peek()
            found = "end of expression" if bad.kind == EOF else repr(bad.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", bad.span)
        return tok

    def _sum(self) -> Expr:
        left = self._product()
        while True:
            tok = self._accept("+") or self._accept("-")
            if tok is None:
                return left
            left = BinOp(tok.text, left, self._product(), tok.span)

    def _product(self) -> Expr:
        left = self._unary()
        while True:
            tok = self._accept("*") or self._accept("/")
            if tok is None:
                return left
            left = BinOp(tok.text, left, self._unary(), tok.span)

    def _unary(self) -> Expr:
        if self._accept("-"):
            return Neg(self._unary())
        return self._primary()

    def _primary(self) -> Expr:
        tok = self._next()
        if tok.kind == "NUMBER":
            return Number(float(tok.text))
        if tok.kind == "ALIAS":
            return _parse_alias(tok)
        if tok.kind == "IDENT":
            if self._accept("("):
                return self._call(tok)
            if self._allow_names:
                return Name(tok.text)
            raise ExprSyntaxError(f"bare name {tok.text!r}; use <par: ...> or <ent: ...>", tok.span)
        if tok.kind == "OP" and tok.text == "(":
            inner = self._sum()
            self._expect(")")
            return inner
        found = "end of expression" if tok.kind == EOF else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {found}", tok.span)

    def _call(self, name: Token) -> Expr:
        if name.text not in BUILTINS:
            raise ExprSyntaxError(f"unknown builtin {name.text!r}", name.span)
        args: List[Expr] = []
        if not self._accept(")"):
            args.append(self._sum())
            while self._accept(","):
                args.append(self._sum())
            self._expect(")")
        arity = BUILTINS[name.text]
        if len(args) != arity:
            raise ExprSyntaxError(f"{name.text} takes {arity} arguments, got {len(args)}", name.span)
        return Call(name.text, tuple(args), name.span)


def _parse_alias(tok: Token) -> Expr:
    match = _ALIAS.match(tok.text)
    if match is None:
        raise ExprSyntaxError(f"malformed alias {tok.text!r}", tok.span)
    kind, body = match.group(1), match.group(2)
    if not body.strip():
        raise ExprSyntaxError(f"empty alias {tok.text!r}", tok.span)
    if kind == "par":
        par = _ALIAS_PAR.match(body)
        if par is None:
            raise ExprSyntaxError(f"expected <par: arcref.property>, got {tok.text!r}", tok.span)
        return ParamAlias(par.group(1), par.group(2))
    if kind in ("ent", "logic"):
        ref = _ALIAS_REF.match(body)
        if ref is None:
            raise ExprSyntaxError(f"expected <{kind}: identifier>, got {tok.text!r}", tok.span)
        return EntityAlias(ref.group(1)) if kind == "ent" else LogicAlias(ref.group(1))
    raise ExprSyntaxError(f"unknown alias kind {kind!r}", tok.span)


# ============================================================
# Resolution
# ============================================================


def resolve(expr: Expr, process: ProcessNode, doc: "Document") -> ResolvedExpr:
    """Replace aliases by their true identity within the scope of one process.

    Raises:
        UnknownManualArcRef: No arc of this process carries the reference
        UnknownProperty: The referenced arc lacks the property
        UnknownLogicOperator / CyclicLogic: For <logic: ...> aliases
    """
    scope = {arc.manual_equation_arc_id: arc for arc in doc.arcs_of_process(process.id) if arc.manual_equation_arc_id}

    def walk(node: Expr) -> Expr:
        match node:
            case ParamAlias(ref, prop):
                arc = scope.get(ref)
                if arc is None:
                    raise UnknownManualArcRef(f"process {process.id}: no arc with ref {ref!r}", process.id)
                if arc.property(prop) is None:
                    raise UnknownProperty(
                        f"process {process.id}: arc {arc.arc_id} (ref {ref!r}) has no property {prop!r}",
                        process.id,
                    )
                return ParamRef(parameter_name(arc.arc_id, prop))
            case EntityAlias(ref):
                arc = scope.get(ref)
                if arc is None:
                    raise UnknownManualArcRef(f"process {process.id}: no arc with ref {ref!r}", process.id)
                return SpeciesRef(arc.entity)
            case LogicAlias(operator_id):
                op = doc.logic_operators.get(operator_id)
                if op is None:
                    raise UnknownLogicOperator(
                        f"process {process.id}: unknown logic operator {operator_id!r}", process.id
                    )
                return lower_logic(op, doc)
            case Neg(operand):
                return Neg(walk(operand))
            case BinOp(op, left, right, span):
                return BinOp(op, walk(left), walk(right), span)
            case Call(func, args, span):
                return Call(func, tuple(walk(arg) for arg in args), span)
            case _:
                return node

    return walk(expr)


def parameter_name(arc_id: str, prop: str) -> str:
    """Global parameter name of an arc property: ArcID_property."""
    return f"{arc_id}_{prop}"


def resolve_process_rates(process: ProcessNode, doc: "Document") -> List[Tuple[str, ResolvedExpr]]:
    """Parse and resolve the propensity functions of one process.

    Returns:
        [(pid, fwd)] for irreversible processes, [(pid_F, fwd), (pid_B, bwd)] for reversible ones
    """
    forward = resolve(parse_expr(process.propensity_forward), process, doc)
    if not process.reversible:
        return [(process.id, forward)]
    backward = resolve(parse_expr(process.propensity_backward or ""), process, doc)
    return [(process.id + FORWARD_SUFFIX, forward), (process.id + BACKWARD_SUFFIX, backward)]


# ============================================================
# Logic lowering
# ============================================================


def lower_logic(op: LogicalOperator, doc: "Document") -> Expr:
    """Arithmetic equivalent of a logic operator network.

    Entity inputs become threshold(entity, input_threshold); AND multiplies,
    NOT is (1 - x), OR is threshold(sum, 1). The boolean result b of the
    outermost operator is mapped to output_low + b * (output_high - output_low).

    Raises:
        CyclicLogic: If the operator graph reachable from op has a cycle
        UnknownLogicOperator: If an input names neither an entity nor an operator
    """
    boolean = _lower_boolean(op, doc, ())
    return BinOp("+", Number(op.output_low), BinOp("*", boolean, Number(op.output_high - op.output_low)))


def _lower_boolean(op: LogicalOperator, doc: "Document", path: Tuple[str, ...]) -> Expr:
    if op.id in path:
        raise CyclicLogic(f"logic operators form a cycle: {' -> '.join(path + (op.id,))}")
    path = path + (op.id,)
    inputs: List[Expr] = []
    for logic_input in op.inputs:
        if logic_input.source in doc.entities:
            limit = logic_input.input_threshold if logic_input.input_threshold is not None else 0.0
            inputs.append(Call("threshold", (SpeciesRef(logic_input.source), Number(limit))))
        elif logic_input.source in doc.logic_operators:
            inputs.append(_lower_boolean(doc.logic_operators[logic_input.source], doc, path))
        else:
            raise UnknownLogicOperator(f"logic operator {op.id}: unknown input {logic_input.source!r}")
    if op.kind is LogicKind.NOT:
        return BinOp("-", Number(1.0), inputs[0])
    combined = inputs[0]
    for item in inputs[1:]:
        combined = BinOp("*" if op.kind is LogicKind.AND else "+", combined, item)
    if op.kind is LogicKind.OR:
        return Call("threshold", (combined, Number(1.0)))
    return combined


# ============================================================
# Evaluation
# ============================================================

_ARITH: Dict[str, Callable[[float, float], float]] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
}


def evaluate(expr: ResolvedExpr, state: Mapping[str, float], params: Mapping[str, float]) -> float:
    """Value of a resolved expression.

    Args:
        expr: Resolved expression
        state: Species id -> count
        params: Parameter name -> value

    Raises:
        EvalError: Division by zero (with the operator's span)
        KeyError: Unbound name (a resolution invariant was broken upstream)
    """
    match expr:
        case Number(value):
            return value
        case ParamRef(name):
            return params[name]
        case SpeciesRef(entity):
            return state[entity]
        case Neg(operand):
            return -evaluate(operand, state, params)
        case BinOp("/", left, right, span):
            denominator = evaluate(right, state, params)
            if denominator == 0:
                raise EvalError(_div_message(span), span)
            return evaluate(left, state, params) / denominator
        case BinOp(op, left, right):
            return _ARITH[op](evaluate(left, state, params), evaluate(right, state, params))
        case Call("threshold", (signal, limit)):
            return threshold(evaluate(signal, state, params), evaluate(limit, state, params))
    raise TypeError(f"cannot evaluate unresolved node {expr!r}")


def _div_message(span: Optional[SourceSpan]) -> str:
    if span is None:
        return "division by zero"
    return f"division by zero at {span.line}:{span.column}"


CountVector = Sequence[float]


def compile_expr(
    expr: ResolvedExpr, species_index: Mapping[str, int], params: Mapping[str, float]
) -> Callable[[CountVector], float]:
    """Closure evaluating expr over a count vector; parameters are folded in.

    Same semantics as evaluate(). Raises KeyError for names outside
    species_index/params at compile time rather than at run time.
    """
    match expr:
        case Number(value):
            const = value
            return lambda x: const
        case ParamRef(name):
            pval = params[name]
            return lambda x: pval
        case SpeciesRef(entity):
            i = species_index[entity]
            return lambda x: x[i]
        case Neg(operand):
            f = compile_expr(operand, species_index, params)
            return lambda x: -f(x)
        case BinOp("/", left, right, span):
            num = compile_expr(left, species_index, params)
            den = compile_expr(right, species_index, params)
            message = _div_message(span)

            def divide(x: CountVector) -> float:
                d = den(x)
                if d == 0:
                    raise EvalError(message, span)
                return num(x) / d

            return divide
        case BinOp(op, left, right):
            fl = compile_expr(left, species_index, params)
            fr = compile_expr(right, species_index, params)
            arith = _ARITH[op]
            return lambda x: arith(fl(x), fr(x))
        case Call("threshold", (signal, limit)):
            fs = compile_expr(signal, species_index, params)
            ft = compile_expr(limit, species_index, params)
            return lambda x: 1.0 if fs(x) >= ft(x) else 0.0
    raise TypeError(f"cannot compile unresolved node {expr!r}")


# ============================================================
# Inspection and rendering
# ============================================================


def species_read(expr: Expr) -> FrozenSet[str]:
    """Entity ids a resolved expression reads."""
    found: Set[str] = set()
    _collect(expr, SpeciesRef, found)
    return frozenset(found)


def names_used(expr: Expr) -> FrozenSet[str]:
    """Bare names of an expression parsed with allow_names=True."""
    found: Set[str] = set()
    _collect(expr, Name, found)
    return frozenset(found)


def _collect(expr: Expr, kind: type, found: Set[str]) -> None:
    match expr:
        case SpeciesRef(entity) if kind is SpeciesRef:
            found.add(entity)
        case Name(name) if kind is Name:
            found.add(name)
        case Neg(operand):
            _collect(operand, kind, found)
        case BinOp(_, left, right):
            _collect(left, kind, found)
            _collect(right, kind, found)
        case Call(_, args):
            for arg in args:
                _collect(arg, kind, found)


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY = 3
_ATOM = 4


def render_expr(expr: Expr) -> str:
    """Text of an expression with the parentheses needed to keep its evaluation order."""
    return _render(expr)[0]


def _render(expr: Expr) -> Tuple[str, int]:
    match expr:
        case Number(value):
            text = format_number(value)
            return (f"({text})", _ATOM) if value < 0 else (text, _ATOM)
        case ParamRef(name) | Name(name):
            return name, _ATOM
        case SpeciesRef(entity):
            return entity, _ATOM
        case ParamAlias(ref, prop):
            return f"<par: {ref}.{prop}>", _ATOM
        case EntityAlias(ref):
            return f"<ent: {ref}>", _ATOM
        case LogicAlias(operator_id):
            return f"<logic: {operator_id}>", _ATOM
        case Neg(operand):
            text, prec = _render(operand)
            if prec <= _UNARY:
                text = f"({text})"
            return f"-{text}", _UNARY
        case BinOp(op, left, right):
            prec = _PRECEDENCE[op]
            ltext, lprec = _render(left)
            rtext, rprec = _render(right)
            if lprec < prec:
                ltext = f"({ltext})"
            if rprec <= prec:
                rtext = f"({rtext})"
            return f"{ltext} {op} {rtext}", prec
        case Call(func, args):
            return f"{func}({', '.join(render_expr(arg) for arg in args)})", _ATOM
    raise TypeError(f"cannot render {expr!r}")
