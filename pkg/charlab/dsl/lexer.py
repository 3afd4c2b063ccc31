"""Tokenizer for .cdl sources."""

from dataclasses import dataclass
from typing import List

from ..core.errors import CdlSyntaxError

# longest operators first
OPERATORS = ("->", "!=", "..", "+", "-", "*", "^", "/", "=", "(", ")", "[", "]", "{", "}", ",", ":", ";", "@", "|")


@dataclass(frozen=True)
class Token:
    kind: str  # INT, IDENT, OP or EOF
    text: str
    line: int
    column: int

    def is_op(self, text: str) -> bool:
        return self.kind == "OP" and self.text == text

    def is_word(self, text: str) -> bool:
        return self.kind == "IDENT" and self.text == text


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    line, column = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            column += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = column
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("INT", source[i:j], line, start_col))
            column += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", source[i:j], line, start_col))
            column += j - i
            i = j
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("OP", op, line, start_col))
                i += len(op)
                column += len(op)
                break
        else:
            raise CdlSyntaxError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(Token("EOF", "", line, column))
    return tokens
