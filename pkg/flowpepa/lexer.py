# flowpepa/lexer.py
"""
Table-driven regular-expression lexer.

Each grammar (the `.pfa` model format, propensity expressions) supplies
its own ordered rule table; the first rule matching at a position wins.
Positions are tracked as 1-based line/column so every token carries a
SourceSpan usable in diagnostics.
"""

import re
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence, Tuple

from flowpepa.types import Diagnostic, Severity, SourceSpan

EOF = "EOF"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan


class Lexer:
    """Compiles a rule table into a single alternation of named groups."""

    def __init__(self, rules: Sequence[Tuple[str, str]], skip: Iterable[str] = ()) -> None:
        self._pattern = re.compile("|".join(f"(?P<{kind}>{regex})" for kind, regex in rules))
        self._skip: FrozenSet[str] = frozenset(skip)

    def tokenize(self, text: str, line: int = 1, column: int = 1) -> Tuple[List[Token], List[Diagnostic]]:
        """Split text into tokens, ending with an EOF token.

        Args:
            text: Input text
            line: Line number of the first character (for embedded texts)
            column: Column number of the first character

        Returns:
            (tokens, diagnostics); unmatched characters yield one LexError
            diagnostic each and are skipped.
        """
        tokens: List[Token] = []
        diagnostics: List[Diagnostic] = []
        pos = 0
        while pos < len(text):
            match = self._pattern.match(text, pos)
            if match is None or match.end() == pos:
                diagnostics.append(
                    Diagnostic(
                        Severity.ERROR,
                        "LexError",
                        f"unexpected character {text[pos]!r}",
                        SourceSpan(line, column, 1),
                    )
                )
                line, column = _advance(text[pos], line, column)
                pos += 1
                continue
            kind = match.lastgroup or ""
            lexeme = match.group()
            if kind not in self._skip:
                tokens.append(Token(kind, lexeme, SourceSpan(line, column, len(lexeme))))
            line, column = _advance(lexeme, line, column)
            pos = match.end()
        tokens.append(Token(EOF, "", SourceSpan(line, column, 0)))
        return tokens, diagnostics


def _advance(lexeme: str, line: int, column: int) -> Tuple[int, int]:
    newlines = lexeme.count("\n")
    if newlines:
        return line + newlines, len(lexeme) - lexeme.rfind("\n")
    return line, column + len(lexeme)
