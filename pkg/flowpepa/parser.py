# flowpepa/parser.py
"""
Recursive-descent parser for the `.pfa` process flow format.

    compartment cyt { name: "cytosol" }
    entity m_MAPK { type: Macromolecule count: 7500 compartment: cyt }
    process K_act { type: Process rate: "<par: enz.kcat> * <ent: enz>" }
    arc { kind: Consumption entity: m_MAPK process: K_act ref: sub }
    arc st99 { kind: Stimulation entity: m_E process: K_act ref: enz params { kcat = 10 Km = 300 } }
    logic G1 { kind: And input: m_A >= 10 input: G2 low: 0 high: 1 }

Layout is free-form; `#` starts a comment. Arcs without an explicit id are
numbered `st<N>` by the ordinal of their arc statement, moving up to the
next free N when an explicit id anywhere in the file already holds it. All
ids share one namespace. Errors are collected as Diagnostics; a statement with an error
is skipped up to its closing brace (or the next statement) and parsing
continues, so one pass reports every independent problem.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Set, Tuple, Type, TypeVar, Union

from flowpepa.lexer import EOF, Lexer, Token
from flowpepa.model import Document
from flowpepa.types import (
    Arc,
    ArcType,
    Compartment,
    Diagnostic,
    EntityPoolNode,
    EpnType,
    LogicalOperator,
    LogicInput,
    LogicKind,
    ProcessNode,
    ProcessType,
    QuantitativeProperty,
    Severity,
    SourceSpan,
)

logger = logging.getLogger(__name__)

_RULES = [
    ("COMMENT", r"#[^\n]*"),
    ("WS", r"\s+"),
    ("NUMBER", r"(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("GE", r">="),
    ("LBRACE", r"\{"),
    ("RBRACE", r"\}"),
    ("COLON", r":"),
    ("EQUALS", r"="),
    ("MINUS", r"-"),
]

_LEXER = Lexer(_RULES, skip=("COMMENT", "WS"))

STATEMENT_KEYWORDS = ("compartment", "entity", "process", "arc", "logic")

E = TypeVar("E", bound=Enum)


@dataclass(frozen=True)
class ParseResult:
    """Outcome of parse(): a Document iff no error diagnostic was raised."""

    document: Optional[Document]
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.document is not None


class _Abort(Exception):
    """Unwinds out of the current statement after its diagnostic is recorded."""


# str, float, int, bool, a (source, threshold) pair or a tuple of (name, value) params
Value = Any


@dataclass
class _Attr:
    name: str
    value: Value
    span: SourceSpan


def parse(text: str) -> ParseResult:
    """Parse `.pfa` text.

    Returns:
        ParseResult with the Document (None if any error) and all diagnostics
        in source order.
    """
    tokens, lex_diagnostics = _LEXER.tokenize(text)
    return _PfaParser(tokens, lex_diagnostics).run()


def parse_file(path: Union[str, Path]) -> ParseResult:
    """Read a UTF-8 `.pfa` file and parse it.

    Raises:
        FileNotFoundError / OSError: If the file cannot be read
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse(text)


def unescape(text: str) -> str:
    """Body of a STRING token with backslash escapes removed."""
    out: List[str] = []
    chars = iter(text[1:-1])
    for ch in chars:
        out.append(next(chars, "") if ch == "\\" else ch)
    return "".join(out)


# ============================================================
# Parser
# ============================================================


class _PfaParser:
    def __init__(self, tokens: List[Token], diagnostics: List[Diagnostic]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        self.ids: Set[str] = set()
        self.explicit_ids = _explicit_ids(tokens)
        self.arc_ordinal = 0
        self.depth = 0
        self.entities: List[EntityPoolNode] = []
        self.processes: List[ProcessNode] = []
        self.arcs: List[Arc] = []
        self.logic: List[LogicalOperator] = []
        self.compartments: List[Compartment] = []

    # --------------------------------------------------------
    # Token helpers
    # --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def error(self, code: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(Diagnostic(Severity.ERROR, code, message, span))

    def fail(self, code: str, message: str, span: SourceSpan) -> "_Abort":
        self.error(code, message, span)
        return _Abort()

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.fail("UnexpectedToken", f"expected {what}, found {_describe(self.tok)}", self.tok.span)
        return self.advance()

    def at_statement_start(self) -> bool:
        tok = self.tok
        if tok.kind != "IDENT" or tok.text not in STATEMENT_KEYWORDS:
            return False
        return self.peek().kind in ("IDENT", "LBRACE")

    # --------------------------------------------------------
    # Driver
    # --------------------------------------------------------

    def run(self) -> ParseResult:
        while self.tok.kind != EOF:
            if not self.at_statement_start():
                self.error(
                    "UnexpectedToken", f"expected a statement keyword, found {_describe(self.tok)}", self.tok.span
                )
                self.synchronize()
                continue
            try:
                self.statement()
            except _Abort:
                self.synchronize()
        errors = [d for d in self.diagnostics if d.is_error]
        logger.debug("parsed %d declarations with %d errors", len(self.ids), len(errors))
        if errors:
            return ParseResult(None, self.diagnostics)
        document = Document.build(
            entities=self.entities,
            processes=self.processes,
            arcs=self.arcs,
            logic_operators=self.logic,
            compartments=self.compartments,
        )
        return ParseResult(document, self.diagnostics)

    def synchronize(self) -> None:
        """Skip past the closing brace of the current statement or up to the next one."""
        depth, self.depth = self.depth, 0
        while self.tok.kind != EOF:
            if self.at_statement_start():
                return
            tok = self.advance()
            if tok.kind == "LBRACE":
                depth += 1
            elif tok.kind == "RBRACE":
                depth -= 1
                if depth <= 0:
                    return

    def statement(self) -> None:
        keyword = self.advance().text
        if keyword == "arc":
            self.arc_ordinal += 1
            self.arc_statement()
            return
        id_tok = self.expect("IDENT", f"{keyword} id")
        self.declare(id_tok)
        handler: Dict[str, Callable[[Token], None]] = {
            "compartment": self.compartment_statement,
            "entity": self.entity_statement,
            "process": self.process_statement,
            "logic": self.logic_statement,
        }
        handler[keyword](id_tok)

    def declare(self, id_tok: Token) -> None:
        if id_tok.text in self.ids:
            self.error("DuplicateId", f"id {id_tok.text!r} is already declared", id_tok.span)
        self.ids.add(id_tok.text)

    def auto_arc_id(self) -> str:
        ordinal = self.arc_ordinal
        while f"st{ordinal}" in self.ids or f"st{ordinal}" in self.explicit_ids:
            ordinal += 1
        return f"st{ordinal}"

    # --------------------------------------------------------
    # Attribute blocks
    # --------------------------------------------------------

    def block(self, readers: Dict[str, Callable[[], Value]], repeatable: Tuple[str, ...] = ()) -> List[_Attr]:
        """`{ name: value ... }` with per-attribute value readers."""
        self.expect("LBRACE", "'{'")
        self.depth += 1
        attrs: List[_Attr] = []
        seen: Set[str] = set()
        while self.tok.kind != "RBRACE":
            name_tok = self.expect("IDENT", "an attribute name or '}'")
            name = name_tok.text
            reader = readers.get(name)
            if reader is None:
                raise self.fail("UnknownAttribute", f"unknown attribute {name!r}", name_tok.span)
            if name != "params":
                self.expect("COLON", "':'")
            value = reader()
            if name in seen and name not in repeatable:
                self.error("DuplicateAttribute", f"attribute {name!r} given twice", name_tok.span)
            seen.add(name)
            attrs.append(_Attr(name, value, name_tok.span))
        self.advance()
        self.depth -= 1
        return attrs

    def read_ident(self) -> str:
        return self.expect("IDENT", "an identifier").text

    def read_string(self) -> str:
        return unescape(self.expect("STRING", "a quoted string").text)

    def read_number(self) -> float:
        negative = False
        if self.tok.kind == "MINUS":
            self.advance()
            negative = True
        value = float(self.expect("NUMBER", "a number").text)
        return -value if negative else value

    def read_integer(self) -> int:
        tok = self.expect("NUMBER", "an integer")
        if not tok.text.isdigit():
            raise self.fail("UnexpectedToken", f"expected an integer, found {tok.text!r}", tok.span)
        return int(tok.text)

    def read_bool(self) -> bool:
        tok = self.expect("IDENT", "true or false")
        if tok.text not in ("true", "false"):
            raise self.fail("UnexpectedToken", f"expected true or false, found {tok.text!r}", tok.span)
        return tok.text == "true"

    def read_enum(self, enum_type: Type[E]) -> Callable[[], Value]:
        def reader() -> Value:
            tok = self.expect("IDENT", f"a {enum_type.__name__} keyword")
            try:
                enum_type(tok.text)
            except ValueError:
                choices = ", ".join(member.value for member in enum_type)
                raise self.fail(
                    "UnknownKeyword", f"unknown {enum_type.__name__} {tok.text!r} (one of {choices})", tok.span
                ) from None
            return tok.text

        return reader

    def read_logic_input(self) -> Tuple[str, Optional[float]]:
        source = self.read_ident()
        if self.tok.kind != "GE":
            return source, None
        self.advance()
        return source, self.read_number()

    def read_params(self) -> Value:
        self.expect("LBRACE", "'{'")
        self.depth += 1
        seen: Dict[str, float] = {}
        while self.tok.kind != "RBRACE":
            name_tok = self.expect("IDENT", "a property name or '}'")
            self.expect("EQUALS", "'='")
            value = self.read_number()
            if name_tok.text in seen:
                self.error("DuplicateProperty", f"property {name_tok.text!r} given twice", name_tok.span)
            seen[name_tok.text] = value
        self.advance()
        self.depth -= 1
        return tuple(sorted(seen.items()))

    def require(self, attrs: Dict[str, _Attr], names: Tuple[str, ...], what: str, span: SourceSpan) -> None:
        for name in names:
            if name not in attrs:
                raise self.fail("MissingAttribute", f"{what} lacks required attribute {name!r}", span)

    # --------------------------------------------------------
    # Statements
    # --------------------------------------------------------

    def compartment_statement(self, id_tok: Token) -> None:
        attrs = _index(self.block({"name": self.read_string}))
        name = attrs["name"].value if "name" in attrs else id_tok.text
        self.compartments.append(Compartment(id_tok.text, str(name), id_tok.span))

    def entity_statement(self, id_tok: Token) -> None:
        attrs = _index(
            self.block(
                {
                    "type": self.read_enum(EpnType),
                    "count": self.read_number,
                    "compartment": self.read_ident,
                }
            )
        )
        self.require(attrs, ("type",), f"entity {id_tok.text}", id_tok.span)
        epn_type = EpnType(attrs["type"].value)
        count = float(attrs["count"].value) if "count" in attrs else None
        if count is not None and count < 0 and epn_type is not EpnType.PERTURBING_AGENT:
            self.error("NegativeCount", f"entity {id_tok.text} has negative count {count:g}", attrs["count"].span)
        compartment = attrs["compartment"].value if "compartment" in attrs else None
        self.entities.append(
            EntityPoolNode(id_tok.text, epn_type, count, None if compartment is None else str(compartment), id_tok.span)
        )

    def process_statement(self, id_tok: Token) -> None:
        attrs = _index(
            self.block(
                {
                    "type": self.read_enum(ProcessType),
                    "reversible": self.read_bool,
                    "rate": self.read_string,
                    "rate_backward": self.read_string,
                }
            )
        )
        self.require(attrs, ("rate",), f"process {id_tok.text}", id_tok.span)
        process_type = ProcessType(attrs["type"].value) if "type" in attrs else ProcessType.PROCESS
        backward = attrs["rate_backward"].value if "rate_backward" in attrs else None
        self.processes.append(
            ProcessNode(
                id=id_tok.text,
                process_type=process_type,
                propensity_forward=str(attrs["rate"].value),
                reversible=bool(attrs["reversible"].value) if "reversible" in attrs else False,
                propensity_backward=None if backward is None else str(backward),
                span=id_tok.span,
            )
        )

    def arc_statement(self) -> None:
        keyword_span = self.tokens[self.pos - 1].span
        if self.tok.kind == "IDENT":
            id_tok = self.advance()
            arc_id, span = id_tok.text, id_tok.span
        else:
            arc_id, span = self.auto_arc_id(), keyword_span
        if arc_id in self.ids:
            self.error("DuplicateId", f"id {arc_id!r} is already declared", span)
        self.ids.add(arc_id)
        attrs = _index(
            self.block(
                {
                    "kind": self.read_enum(ArcType),
                    "entity": self.read_ident,
                    "process": self.read_ident,
                    "ref": self.read_ident,
                    "stoichiometry": self.read_integer,
                    "params": self.read_params,
                }
            )
        )
        self.require(attrs, ("kind", "entity", "process"), f"arc {arc_id}", span)
        params = attrs["params"].value if "params" in attrs else ()
        ref = attrs["ref"].value if "ref" in attrs else None
        self.arcs.append(
            Arc(
                arc_id=arc_id,
                arc_type=ArcType(attrs["kind"].value),
                entity=str(attrs["entity"].value),
                process=str(attrs["process"].value),
                manual_equation_arc_id=None if ref is None else str(ref),
                stoichiometry=int(attrs["stoichiometry"].value) if "stoichiometry" in attrs else 1,
                quantitative_properties=tuple(QuantitativeProperty(n, v) for n, v in params),
                span=span,
            )
        )

    def logic_statement(self, id_tok: Token) -> None:
        attr_list = self.block(
            {
                "kind": self.read_enum(LogicKind),
                "input": self.read_logic_input,
                "low": self.read_number,
                "high": self.read_number,
            },
            repeatable=("input",),
        )
        attrs = _index(attr_list)
        self.require(attrs, ("kind",), f"logic operator {id_tok.text}", id_tok.span)
        inputs = tuple(LogicInput(*attr.value) for attr in attr_list if attr.name == "input")
        self.logic.append(
            LogicalOperator(
                id=id_tok.text,
                kind=LogicKind(attrs["kind"].value),
                inputs=inputs,
                output_low=float(attrs["low"].value) if "low" in attrs else 0.0,
                output_high=float(attrs["high"].value) if "high" in attrs else 1.0,
                span=id_tok.span,
            )
        )


def _index(attrs: List[_Attr]) -> Dict[str, _Attr]:
    return {attr.name: attr for attr in attrs}


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == EOF else repr(tok.text)


def _explicit_ids(tokens: List[Token]) -> Set[str]:
    """Ids written after a statement keyword anywhere in the token stream."""
    return {
        tokens[i + 1].text
        for i in range(len(tokens) - 2)
        if tokens[i].kind == "IDENT"
        and tokens[i].text in STATEMENT_KEYWORDS
        and tokens[i + 1].kind == "IDENT"
        and tokens[i + 2].kind == "LBRACE"
    }
