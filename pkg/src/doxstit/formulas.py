"""Formula language: AST, concrete syntax, parser, printer, substitution.

The language has atoms, the boolean connectives, historical necessity
`[]` (with `<>` as its dual), an agency operator `[agent]` ("the agent
sees to it that"), knowledge `K:agent`, conditional belief `B:agent[cond]`
(bare `B:agent` conditions on `#t`), and three ought operators:
`O:agent` (objective), `Os:agent` (subjective), `Ob:agent` (doxastic,
i.e. grounded in expected-utility maximization).

Concrete syntax, tightest first::

    !            negation
    &            conjunction          (left associative)
    |            disjunction          (left associative)
    ->           implication          (right associative)
    <->          biconditional        (right associative)

Unary modalities bind tighter than every binary connective.  Atoms are
lowercase identifiers; `#t`/`#f` are the constants.  Uppercase
identifiers are schema metavariables: a bare uppercase identifier stands
for a formula, an uppercase name in an agent position (`K:A`, `[A]`)
stands for an agent.  See docs/grammar.md for the full EBNF.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import EvalError, SubstitutionError


class ParseError(Exception):
    """Syntax error with position and the set of expected tokens."""

    def __init__(self, message, line, col, expected=()):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.expected = tuple(expected)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

class Formula:
    """Base class; all nodes are frozen dataclasses, hashable and
    structurally comparable."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    sub: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    sub: Formula


@dataclass(frozen=True)
class Stit(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True)
class Knows(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True)
class Believes(Formula):
    """Conditional belief.  `cond` is never None; bare belief stores Top."""

    agent: str
    cond: Formula
    sub: Formula


@dataclass(frozen=True)
class OughtObj(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True)
class OughtSubj(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True)
class OughtDox(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True)
class MetaFormula(Formula):
    """Schema metavariable standing for a formula."""

    name: str


TOP = Top()
BOTTOM = Bottom()

AGENT_OPS = (Stit, Knows, Believes, OughtObj, OughtSubj, OughtDox)


def is_agent_metavar(name: str) -> bool:
    return bool(name) and name[0].isupper()


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_OP_PREFIXES = {"Os": "ought_subj", "Ob": "ought_dox", "O": "ought_obj",
                "K": "knows", "B": "believes"}


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _is_ident_start(c):
    return c.isalpha() or c == "_"


def _is_ident_char(c):
    return c.isalnum() or c == "_"


def _tokenize(text: str):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col

        def emit(kind, value, length):
            nonlocal i, col
            tokens.append(_Token(kind, value, start_line, start_col))
            i += length
            col += length

        if c == "(":
            emit("lparen", c, 1)
        elif c == ")":
            emit("rparen", c, 1)
        elif c == "[":
            emit("lbrack", c, 1)
        elif c == "]":
            emit("rbrack", c, 1)
        elif c == "!":
            emit("not", c, 1)
        elif c == "&":
            emit("and", c, 1)
        elif c == "|":
            emit("or", c, 1)
        elif c == "-":
            if text.startswith("->", i):
                emit("implies", "->", 2)
            else:
                raise ParseError("stray '-', expected '->'", line, col, ("->",))
        elif c == "<":
            if text.startswith("<->", i):
                emit("iff", "<->", 3)
            elif text.startswith("<>", i):
                emit("diamond", "<>", 2)
            else:
                raise ParseError("stray '<', expected '<>' or '<->'", line, col, ("<>", "<->"))
        elif c == "#":
            if text.startswith("#t", i):
                emit("top", "#t", 2)
            elif text.startswith("#f", i):
                emit("bottom", "#f", 2)
            else:
                raise ParseError("expected '#t' or '#f'", line, col, ("#t", "#f"))
        elif _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            if word in _OP_PREFIXES and j < n and text[j] == ":":
                k = j + 1
                if k >= n or not _is_ident_start(text[k]):
                    raise ParseError(f"'{word}:' must be followed by an agent name",
                                     line, col, ("agent name",))
                m = k + 1
                while m < n and _is_ident_char(text[m]):
                    m += 1
                emit(_OP_PREFIXES[word], text[k:m], m - i)
            elif word[0].isupper():
                emit("uident", word, len(word))
            else:
                emit("ident", word, len(word))
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent; precedence as documented above)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.peek()
        if tok.kind != kind:
            found = tok.value or "end of input"
            raise ParseError(f"expected {what}, found {found!r}",
                             tok.line, tok.col, (what,))
        return self.take()

    def parse(self) -> Formula:
        f = self.iff()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected {tok.value!r} after formula",
                             tok.line, tok.col, ("end of input",))
        return f

    def iff(self):
        left = self.implies()
        if self.peek().kind == "iff":
            self.take()
            return Iff(left, self.iff())
        return left

    def implies(self):
        left = self.disj()
        if self.peek().kind == "implies":
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self):
        left = self.conj()
        while self.peek().kind == "or":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek().kind == "and":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        kind = tok.kind
        if kind == "not":
            self.take()
            return Not(self.unary())
        if kind == "lbrack":
            self.take()
            if self.peek().kind == "rbrack":
                self.take()
                return Box(self.unary())
            name = self.peek()
            if name.kind not in ("ident", "uident"):
                raise ParseError(f"expected agent name or ']' inside '[...]', found {name.value!r}",
                                 name.line, name.col, ("agent name", "]"))
            self.take()
            self.expect("rbrack", "']'")
            return Stit(name.value, self.unary())
        if kind == "diamond":
            self.take()
            return Diamond(self.unary())
        if kind == "knows":
            self.take()
            return Knows(tok.value, self.unary())
        if kind == "believes":
            self.take()
            # "B:a[cond] body" -- a bracket right here is a condition,
            # unless it is the empty bracket pair of a box body.
            if self.peek().kind == "lbrack" and self.peek(1).kind != "rbrack":
                self.take()
                cond = self.iff()
                self.expect("rbrack", "']'")
                return Believes(tok.value, cond, self.unary())
            return Believes(tok.value, TOP, self.unary())
        if kind == "ought_obj":
            self.take()
            return OughtObj(tok.value, self.unary())
        if kind == "ought_subj":
            self.take()
            return OughtSubj(tok.value, self.unary())
        if kind == "ought_dox":
            self.take()
            return OughtDox(tok.value, self.unary())
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "top":
            self.take()
            return TOP
        if tok.kind == "bottom":
            self.take()
            return BOTTOM
        if tok.kind == "ident":
            self.take()
            return Atom(tok.value)
        if tok.kind == "uident":
            self.take()
            return MetaFormula(tok.value)
        if tok.kind == "lparen":
            self.take()
            f = self.iff()
            self.expect("rparen", "')'")
            return f
        found = tok.value or "end of input"
        raise ParseError(
            f"expected a formula, found {found!r}", tok.line, tok.col,
            ("atom", "#t", "#f", "!", "(", "[]", "[agent]", "<>",
             "K:", "B:", "O:", "Os:", "Ob:"))


def parse(text: str) -> Formula:
    """Parse a formula; raises ParseError with line/column on bad input."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

# precedence levels : iff=1 < implies=2 < or=3 < and=4 < unary=5
_PREC_IFF, _PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4, 5


def _fmt(f: Formula, ctx: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, MetaFormula):
        return f.name
    if isinstance(f, Top):
        return "#t"
    if isinstance(f, Bottom):
        return "#f"
    if isinstance(f, Iff):
        s = f"{_fmt(f.left, _PREC_IFF + 1)} <-> {_fmt(f.right, _PREC_IFF)}"
        return f"({s})" if ctx > _PREC_IFF else s
    if isinstance(f, Implies):
        s = f"{_fmt(f.left, _PREC_IMPLIES + 1)} -> {_fmt(f.right, _PREC_IMPLIES)}"
        return f"({s})" if ctx > _PREC_IMPLIES else s
    if isinstance(f, Or):
        s = f"{_fmt(f.left, _PREC_OR)} | {_fmt(f.right, _PREC_OR + 1)}"
        return f"({s})" if ctx > _PREC_OR else s
    if isinstance(f, And):
        s = f"{_fmt(f.left, _PREC_AND)} & {_fmt(f.right, _PREC_AND + 1)}"
        return f"({s})" if ctx > _PREC_AND else s
    if isinstance(f, Not):
        return f"!{_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, Box):
        return f"[] {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, Diamond):
        return f"<> {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, Stit):
        return f"[{f.agent}] {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, Knows):
        return f"K:{f.agent} {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, Believes):
        if f.cond == TOP:
            body = _fmt(f.sub, _PREC_UNARY)
            # "B:a [x] ..." would re-parse the bracket as a condition
            if isinstance(f.sub, Stit):
                body = f"({_fmt(f.sub, 0)})"
            return f"B:{f.agent} {body}"
        return f"B:{f.agent}[{_fmt(f.cond, 0)}] {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, OughtObj):
        return f"O:{f.agent} {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, OughtSubj):
        return f"Os:{f.agent} {_fmt(f.sub, _PREC_UNARY)}"
    if isinstance(f, OughtDox):
        return f"Ob:{f.agent} {_fmt(f.sub, _PREC_UNARY)}"
    raise TypeError(f"not a formula: {f!r}")


def format_formula(f: Formula) -> str:
    """Minimal-parenthesization text; `parse(format_formula(f)) == f`."""
    return _fmt(f, 0)


# ---------------------------------------------------------------------------
# Normalization and substitution
# ---------------------------------------------------------------------------

def normalize(f: Formula) -> Formula:
    """Reduce sugar to the primitive grammar.

    Diamond becomes a negated box, Or/Implies/Iff become negated
    conjunctions, Bottom becomes !#t.  Evaluation treats sugar natively;
    this exists so the sugar laws are a testable identity.
    """
    if isinstance(f, (Atom, Top, MetaFormula)):
        return f
    if isinstance(f, Bottom):
        return Not(TOP)
    if isinstance(f, Not):
        return Not(normalize(f.sub))
    if isinstance(f, And):
        return And(normalize(f.left), normalize(f.right))
    if isinstance(f, Or):
        return Not(And(Not(normalize(f.left)), Not(normalize(f.right))))
    if isinstance(f, Implies):
        return Not(And(normalize(f.left), Not(normalize(f.right))))
    if isinstance(f, Iff):
        left, right = normalize(f.left), normalize(f.right)
        return And(Not(And(left, Not(right))), Not(And(right, Not(left))))
    if isinstance(f, Box):
        return Box(normalize(f.sub))
    if isinstance(f, Diamond):
        return Not(Box(Not(normalize(f.sub))))
    if isinstance(f, Stit):
        return Stit(f.agent, normalize(f.sub))
    if isinstance(f, Knows):
        return Knows(f.agent, normalize(f.sub))
    if isinstance(f, Believes):
        return Believes(f.agent, normalize(f.cond), normalize(f.sub))
    if isinstance(f, OughtObj):
        return OughtObj(f.agent, normalize(f.sub))
    if isinstance(f, OughtSubj):
        return OughtSubj(f.agent, normalize(f.sub))
    if isinstance(f, OughtDox):
        return OughtDox(f.agent, normalize(f.sub))
    raise TypeError(f"not a formula: {f!r}")


def _subst_agent(agent: str, agents: Mapping[str, str]) -> str:
    if is_agent_metavar(agent):
        try:
            return agents[agent]
        except KeyError:
            raise SubstitutionError(f"no agent assigned to metavariable {agent!r}") from None
    return agent


def substitute(schema: Formula,
               formulas: Optional[Mapping[str, Formula]] = None,
               agents: Optional[Mapping[str, str]] = None) -> Formula:
    """Uniform substitution of metavariables in a schema.

    `formulas` maps uppercase formula metavariables to formulas, `agents`
    maps agent metavariables to agent names.  Every metavariable occurring
    in the schema must be assigned.
    """
    formulas = formulas or {}
    agents = agents or {}

    def walk(f: Formula) -> Formula:
        if isinstance(f, MetaFormula):
            try:
                return formulas[f.name]
            except KeyError:
                raise SubstitutionError(f"no formula assigned to metavariable {f.name!r}") from None
        if isinstance(f, (Atom, Top, Bottom)):
            return f
        if isinstance(f, Not):
            return Not(walk(f.sub))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(walk(f.left), walk(f.right))
        if isinstance(f, (Box, Diamond)):
            return type(f)(walk(f.sub))
        if isinstance(f, Believes):
            return Believes(_subst_agent(f.agent, agents), walk(f.cond), walk(f.sub))
        if isinstance(f, AGENT_OPS):
            return type(f)(_subst_agent(f.agent, agents), walk(f.sub))
        raise TypeError(f"not a formula: {f!r}")

    return walk(schema)


def metavariables(f: Formula) -> tuple[set[str], set[str]]:
    """Return (formula metavariables, agent metavariables) of a schema."""
    fvars: set[str] = set()
    avars: set[str] = set()

    def walk(g):
        if isinstance(g, MetaFormula):
            fvars.add(g.name)
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or, Implies, Iff)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Box, Diamond)):
            walk(g.sub)
        elif isinstance(g, Believes):
            if is_agent_metavar(g.agent):
                avars.add(g.agent)
            walk(g.cond)
            walk(g.sub)
        elif isinstance(g, AGENT_OPS):
            if is_agent_metavar(g.agent):
                avars.add(g.agent)
            walk(g.sub)

    walk(f)
    return fvars, avars


def agents_of(f: Formula) -> set[str]:
    """Concrete (non-metavariable) agent names occurring in a formula."""
    out: set[str] = set()

    def walk(g):
        if isinstance(g, Believes):
            if not is_agent_metavar(g.agent):
                out.add(g.agent)
            walk(g.cond)
            walk(g.sub)
        elif isinstance(g, AGENT_OPS):
            if not is_agent_metavar(g.agent):
                out.add(g.agent)
            walk(g.sub)
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or, Implies, Iff)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Box, Diamond)):
            walk(g.sub)

    walk(f)
    return out


def ensure_closed(f: Formula) -> None:
    """Raise EvalError if the formula still contains metavariables."""
    fvars, avars = metavariables(f)
    if fvars or avars:
        names = ", ".join(sorted(fvars | avars))
        raise EvalError(f"formula contains uninstantiated metavariables: {names}")
