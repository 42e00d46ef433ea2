"""Text syntax of the epistemic language.

    phi ::= ident | true | false | !phi | phi & phi | phi | phi | phi -> phi
          | K[agent] phi | E[group] phi | Ek[group,n] phi | C[group] phi
          | Ee[group,n] phi | Ce[group,n] phi | Ed[group] phi | Cd[group] phi
          | ( phi )
    group ::= { agent (, agent)* }

! and the modal prefixes bind tightest, then &, then |, then -> (right
associative). & and | associate to the left.
"""

import re
from typing import NamedTuple

from app.services.exceptions import FormulaSyntaxError
from app.services.logic.formulas import (
    And,
    Atom,
    C,
    Cdiamond,
    Ceps,
    E,
    Ediamond,
    Eeps,
    Ek,
    EventAtom,
    FalseFormula,
    Formula,
    Group,
    Implies,
    K,
    Not,
    Or,
    TrueFormula,
)

TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<modal>(?:Ek|Ee|Ce|Ed|Cd|K|E|C)\[)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_@.]*)
  | (?P<punct>[!&|(){},\]-])
    """,
    re.VERBOSE,
)

PREC_IMPLIES = 1
PREC_OR = 2
PREC_AND = 3
PREC_UNARY = 4
PREC_ATOM = 5


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    """Split formula text into tokens, ending with an eof token"""
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_RE.match(text, position)
        if match is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[position]!r}", position
            )
        kind = match.lastgroup or ""
        if kind != "ws":
            value = match.group()
            tokens.append(Token(value if kind == "punct" else kind, value, position))
        position = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token list"""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        if token.kind != "eof":
            self.index += 1
        return token

    def expect(self, kind: str, what: str) -> Token:
        if self.current.kind != kind:
            raise FormulaSyntaxError(f"expected {what}", self.current.position)
        return self.advance()

    def formula(self) -> Formula:
        result = self.implication()
        if self.current.kind != "eof":
            raise FormulaSyntaxError(
                f"unexpected {self.current.text!r}", self.current.position
            )
        return result

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.current.kind == "arrow":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.current.kind == "|":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.current.kind == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        token = self.current
        if token.kind == "!":
            self.advance()
            return Not(self.unary())
        if token.kind == "modal":
            self.advance()
            return self.modal(token.text[:-1])
        if token.kind == "(":
            self.advance()
            inner = self.implication()
            self.expect(")", "')'")
            return inner
        if token.kind == "ident":
            self.advance()
            if token.text == "true":
                return TrueFormula()
            if token.text == "false":
                return FalseFormula()
            return Atom(token.text)
        raise FormulaSyntaxError("expected formula", token.position)

    def modal(self, operator: str) -> Formula:
        # pylint: disable=too-many-return-statements
        if operator == "K":
            agent = self.expect("ident", "agent").text
            self.expect("]", "']'")
            return K(agent, self.unary())

        group = self.group()
        if operator in ("Ek", "Ee", "Ce"):
            self.expect(",", "','")
            n = self.natural()
            self.expect("]", "']'")
            arg = self.unary()
            if operator == "Ek":
                return Ek(group, n, arg)
            if operator == "Ee":
                return Eeps(group, n, arg)
            return Ceps(group, n, arg)

        self.expect("]", "']'")
        arg = self.unary()
        if operator == "E":
            return E(group, arg)
        if operator == "C":
            return C(group, arg)
        if operator == "Ed":
            return Ediamond(group, arg)
        return Cdiamond(group, arg)

    def group(self) -> Group:
        self.expect("{", "'{'")
        if self.current.kind == "}":
            raise FormulaSyntaxError("empty group", self.current.position)
        members = [self.expect("ident", "agent").text]
        while self.current.kind == ",":
            self.advance()
            members.append(self.expect("ident", "agent").text)
        self.expect("}", "'}'")
        return frozenset(members)

    def natural(self) -> int:
        token = self.current
        if token.kind == "-":
            raise FormulaSyntaxError("negative parameter", token.position)
        if token.kind != "ident" or not token.text.isdigit():
            raise FormulaSyntaxError("expected natural number", token.position)
        self.advance()
        return int(token.text)


def parse_formula(text: str) -> Formula:
    """Parse formula text into its AST"""
    parser = _Parser(text)
    try:
        return parser.formula()
    except RecursionError:
        raise FormulaSyntaxError(
            "formula nested too deeply", parser.current.position
        ) from None


def format_group(group: Group) -> str:
    """{a,b} with members sorted"""
    return "{" + ",".join(sorted(group)) + "}"


def _prefix(formula: Formula) -> str:
    # pylint: disable=too-many-return-statements
    if isinstance(formula, K):
        return f"K[{formula.agent}] "
    if isinstance(formula, E):
        return f"E[{format_group(formula.group)}] "
    if isinstance(formula, Ek):
        return f"Ek[{format_group(formula.group)},{formula.k}] "
    if isinstance(formula, C):
        return f"C[{format_group(formula.group)}] "
    if isinstance(formula, Eeps):
        return f"Ee[{format_group(formula.group)},{formula.eps}] "
    if isinstance(formula, Ceps):
        return f"Ce[{format_group(formula.group)},{formula.eps}] "
    if isinstance(formula, Ediamond):
        return f"Ed[{format_group(formula.group)}] "
    if isinstance(formula, Cdiamond):
        return f"Cd[{format_group(formula.group)}] "
    return "!"


def _format(formula: Formula, context: int) -> str:
    if isinstance(formula, (Atom, EventAtom)):
        return formula.name
    if isinstance(formula, TrueFormula):
        return "true"
    if isinstance(formula, FalseFormula):
        return "false"

    if isinstance(formula, Implies):
        precedence = PREC_IMPLIES
        text = (
            f"{_format(formula.left, PREC_OR)} -> "
            f"{_format(formula.right, PREC_IMPLIES)}"
        )
    elif isinstance(formula, Or):
        precedence = PREC_OR
        text = f"{_format(formula.left, PREC_OR)} | {_format(formula.right, PREC_AND)}"
    elif isinstance(formula, And):
        precedence = PREC_AND
        text = (
            f"{_format(formula.left, PREC_AND)} & "
            f"{_format(formula.right, PREC_UNARY)}"
        )
    else:
        precedence = PREC_UNARY
        text = _prefix(formula) + _format(
            formula.arg, PREC_UNARY  # type: ignore[union-attr]
        )

    return f"({text})" if precedence < context else text


def format_formula(formula: Formula) -> str:
    """Canonical text; parse_formula inverts it for ASTs without event atoms"""
    return _format(formula, PREC_IMPLIES)
