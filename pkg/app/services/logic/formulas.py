"""Formula AST of the epistemic language"""

from dataclasses import dataclass
from typing import Iterable, Union

from app.services.systems.models import Event

Group = frozenset[str]


def group_of(agents: Iterable[str]) -> Group:
    """A group from any iterable of agent ids"""
    return frozenset(agents)


@dataclass(frozen=True)
class Atom:
    """Primitive proposition, true by valuation at the global state"""

    name: str


@dataclass(frozen=True)
class EventAtom:
    """psi_e: true exactly at the points of a given event"""

    event: Event
    name: str


@dataclass(frozen=True)
class TrueFormula:
    """Logical true"""


@dataclass(frozen=True)
class FalseFormula:
    """Logical false"""


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class K:
    """agent knows arg"""

    agent: str
    arg: "Formula"


@dataclass(frozen=True)
class E:
    """everyone in group knows arg"""

    group: Group
    arg: "Formula"


@dataclass(frozen=True)
class Ek:
    """k-fold everyone-knows; k = 0 is arg itself"""

    group: Group
    k: int
    arg: "Formula"


@dataclass(frozen=True)
class C:
    """common knowledge"""

    group: Group
    arg: "Formula"


@dataclass(frozen=True)
class Eeps:
    """everyone knows within a shared eps-interval of the run"""

    group: Group
    eps: int
    arg: "Formula"


@dataclass(frozen=True)
class Ceps:
    """eps-common knowledge"""

    group: Group
    eps: int
    arg: "Formula"


@dataclass(frozen=True)
class Ediamond:
    """everyone knows at some time of the run"""

    group: Group
    arg: "Formula"


@dataclass(frozen=True)
class Cdiamond:
    """eventual common knowledge"""

    group: Group
    arg: "Formula"


Formula = Union[
    Atom,
    EventAtom,
    TrueFormula,
    FalseFormula,
    Not,
    And,
    Or,
    Implies,
    K,
    E,
    Ek,
    C,
    Eeps,
    Ceps,
    Ediamond,
    Cdiamond,
]

BINARY = (And, Or, Implies)
GROUP_OPERATORS = (E, Ek, C, Eeps, Ceps, Ediamond, Cdiamond)


def disjunction(formulas: Iterable[Formula]) -> Formula:
    """Left-nested Or of one or more formulas"""
    items = list(formulas)
    if not items:
        return FalseFormula()
    result = items[0]
    for item in items[1:]:
        result = Or(result, item)
    return result


def alternating_knowledge(first: str, second: str, k: int, arg: Formula) -> Formula:
    """(K_first K_second)^k arg"""
    result = arg
    for _ in range(k):
        result = K(first, K(second, result))
    return result


def subformulas(formula: Formula) -> Iterable[Formula]:
    """formula and every formula nested in it, outermost first"""
    yield formula
    if isinstance(formula, BINARY):
        yield from subformulas(formula.left)
        yield from subformulas(formula.right)
    elif hasattr(formula, "arg"):
        yield from subformulas(formula.arg)  # type: ignore[union-attr]


def max_eps(formula: Formula) -> int:
    """Largest eps parameter used in the formula, 0 when there is none"""
    return max(
        (f.eps for f in subformulas(formula) if isinstance(f, (Eeps, Ceps))),
        default=0,
    )
