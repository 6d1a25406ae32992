"""Linear temporal logic formulas: parsing, normal forms and lasso-word semantics.

The concrete grammar is ASCII: ``true``, identifiers, ``!``, ``&&``, ``||``,
``X`` (next), ``U`` (until), ``<>`` (eventually), ``[]`` (always) and
parentheses.  Precedence, tightest first: unary operators, ``&&``, ``||``,
``U`` (right associative).
"""

from __future__ import annotations

from dataclasses import dataclass


class LtlError(Exception):
    pass


class LtlSyntaxError(LtlError):
    """Malformed formula text; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownPropositionError(LtlError):
    def __init__(self, name, position):
        super().__init__(f"unknown proposition '{name}' (at position {position})")
        self.name = name
        self.position = position


@dataclass(frozen=True)
class Proposition:
    """An atomic observation, e.g. a region name such as 'R8'."""

    name: str
    id: int


class PropositionTable:
    """The declared proposition universe of a scenario."""

    def __init__(self, names):
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate proposition names")
        self.props = [Proposition(n, i) for i, n in enumerate(names)]
        self.by_name = {p.name: p for p in self.props}

    def __len__(self):
        return len(self.props)

    def __contains__(self, name):
        return name in self.by_name

    def names(self):
        return [p.name for p in self.props]


# ---------------------------------------------------------------------------
# Abstract syntax.  Frozen dataclasses so formulas are hashable set members.


@dataclass(frozen=True)
class TrueF:
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class FalseF:
    # Internal only: produced by negation normal form, not by the parser.
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not:
    sub: "Formula"

    def __str__(self):
        return f"!{_paren(self.sub, 4)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        # left associative: a right-nested And needs parentheses
        return f"{_paren(self.left, 3)} && {_paren(self.right, 4)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"{_paren(self.left, 2)} || {_paren(self.right, 3)}"


@dataclass(frozen=True)
class Next:
    sub: "Formula"

    def __str__(self):
        return f"X {_paren(self.sub, 4)}"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        # Right associative: the left operand needs parentheses when it is
        # itself an Until.
        return f"{_paren(self.left, 2)} U {_paren(self.right, 1)}"


@dataclass(frozen=True)
class Release:
    # Internal dual of Until, reachable only through to_nnf.
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"{_paren(self.left, 2)} R {_paren(self.right, 1)}"


@dataclass(frozen=True)
class Eventually:
    sub: "Formula"

    def __str__(self):
        return f"<> {_paren(self.sub, 4)}"


@dataclass(frozen=True)
class Always:
    sub: "Formula"

    def __str__(self):
        return f"[] {_paren(self.sub, 4)}"


Formula = (
    TrueF | FalseF | Prop | Not | And | Or | Next | Until | Release | Eventually | Always
)

# Precedence level produced by each node: atoms/unary bind tightest.
_LEVEL = {
    TrueF: 5,
    FalseF: 5,
    Prop: 5,
    Not: 4,
    Next: 4,
    Eventually: 4,
    Always: 4,
    And: 3,
    Or: 2,
    Until: 1,
    Release: 1,
}


def _paren(f, min_level):
    s = str(f)
    if _LEVEL[type(f)] < min_level:
        return f"({s})"
    return s


def to_text(f):
    """Render a formula back into the concrete grammar."""
    return str(f)


# ---------------------------------------------------------------------------
# Parser: hand rolled recursive descent.

_RESERVED = {"true", "X", "U"}


class _Lexer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.index = 0

    def _scan(self):
        text = self.text
        i = 0
        n = len(text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if c.isalpha():
                j = i + 1
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                word = text[i:j]
                if word == "true":
                    self.tokens.append(("TRUE", word, i))
                elif word == "X":
                    self.tokens.append(("NEXT", word, i))
                elif word == "U":
                    self.tokens.append(("UNTIL", word, i))
                else:
                    self.tokens.append(("IDENT", word, i))
                i = j
                continue
            two = text[i : i + 2]
            if two == "&&":
                self.tokens.append(("AND", two, i))
                i += 2
            elif two == "||":
                self.tokens.append(("OR", two, i))
                i += 2
            elif two == "<>":
                self.tokens.append(("EVENTUALLY", two, i))
                i += 2
            elif two == "[]":
                self.tokens.append(("ALWAYS", two, i))
                i += 2
            elif c == "!":
                self.tokens.append(("NOT", c, i))
                i += 1
            elif c == "(":
                self.tokens.append(("LPAREN", c, i))
                i += 1
            elif c == ")":
                self.tokens.append(("RPAREN", c, i))
                i += 1
            else:
                raise LtlSyntaxError(f"unexpected character '{c}'", i)
        self.tokens.append(("EOF", "", n))

    def peek(self):
        return self.tokens[self.index]

    def take(self):
        tok = self.tokens[self.index]
        if tok[0] != "EOF":
            self.index += 1
        return tok


class _Parser:
    def __init__(self, text, table):
        self.lex = _Lexer(text)
        self.table = table

    def parse(self):
        f = self._until()
        kind, value, pos = self.lex.peek()
        if kind != "EOF":
            raise LtlSyntaxError(f"unexpected token '{value}'", pos)
        return f

    def _until(self):
        left = self._or()
        if self.lex.peek()[0] == "UNTIL":
            self.lex.take()
            right = self._until()
            return Until(left, right)
        return left

    def _or(self):
        f = self._and()
        while self.lex.peek()[0] == "OR":
            self.lex.take()
            f = Or(f, self._and())
        return f

    def _and(self):
        f = self._unary()
        while self.lex.peek()[0] == "AND":
            self.lex.take()
            f = And(f, self._unary())
        return f

    def _unary(self):
        kind, value, pos = self.lex.peek()
        if kind == "NOT":
            self.lex.take()
            return Not(self._unary())
        if kind == "NEXT":
            self.lex.take()
            return Next(self._unary())
        if kind == "EVENTUALLY":
            self.lex.take()
            return Eventually(self._unary())
        if kind == "ALWAYS":
            self.lex.take()
            return Always(self._unary())
        return self._atom()

    def _atom(self):
        kind, value, pos = self.lex.take()
        if kind == "TRUE":
            return TrueF()
        if kind == "IDENT":
            if self.table is not None and value not in self.table:
                raise UnknownPropositionError(value, pos)
            return Prop(value)
        if kind == "LPAREN":
            f = self._until()
            kind2, value2, pos2 = self.lex.take()
            if kind2 != "RPAREN":
                raise LtlSyntaxError("expected ')'", pos2)
            return f
        raise LtlSyntaxError(
            f"expected formula, got '{value}'" if value else "unexpected end of formula", pos
        )


def parse(text, table=None):
    """Parse formula text against a proposition table (None skips the check)."""
    return _Parser(text, table).parse()


def propositions_of(f):
    """The set of proposition names a formula mentions."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Prop):
            out.add(g.name)
        elif isinstance(g, (Not, Next, Eventually, Always)):
            stack.append(g.sub)
        elif isinstance(g, (And, Or, Until, Release)):
            stack.append(g.left)
            stack.append(g.right)
    return out


# ---------------------------------------------------------------------------
# Negation normal form.


def to_nnf(f):
    """Push negations onto propositions, expanding <> and [] into U / R."""
    return _nnf(f, False)


def _nnf(f, negated):
    if isinstance(f, TrueF):
        return FalseF() if negated else TrueF()
    if isinstance(f, FalseF):
        return TrueF() if negated else FalseF()
    if isinstance(f, Prop):
        return Not(f) if negated else f
    if isinstance(f, Not):
        return _nnf(f.sub, not negated)
    if isinstance(f, And):
        left, right = _nnf(f.left, negated), _nnf(f.right, negated)
        return Or(left, right) if negated else And(left, right)
    if isinstance(f, Or):
        left, right = _nnf(f.left, negated), _nnf(f.right, negated)
        return And(left, right) if negated else Or(left, right)
    if isinstance(f, Next):
        return Next(_nnf(f.sub, negated))
    if isinstance(f, Until):
        left, right = _nnf(f.left, negated), _nnf(f.right, negated)
        return Release(left, right) if negated else Until(left, right)
    if isinstance(f, Release):
        left, right = _nnf(f.left, negated), _nnf(f.right, negated)
        return Until(left, right) if negated else Release(left, right)
    if isinstance(f, Eventually):
        # <>p == true U p; negated: [] !p == false R !p
        sub = _nnf(f.sub, negated)
        return Release(FalseF(), sub) if negated else Until(TrueF(), sub)
    if isinstance(f, Always):
        sub = _nnf(f.sub, negated)
        return Until(TrueF(), sub) if negated else Release(FalseF(), sub)
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f):
    """All distinct subformulas, children before parents."""
    seen = {}

    def visit(g):
        if g in seen:
            return
        if isinstance(g, (Not, Next, Eventually, Always)):
            visit(g.sub)
        elif isinstance(g, (And, Or, Until, Release)):
            visit(g.left)
            visit(g.right)
        seen[g] = len(seen)

    visit(f)
    return list(seen)


# ---------------------------------------------------------------------------
# Lasso words and the brute-force semantics oracle.


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word stem . loop^omega over label sets."""

    stem: tuple
    loop: tuple

    def __post_init__(self):
        if len(self.loop) == 0:
            raise ValueError("loop must be nonempty")

    @staticmethod
    def of(stem, loop):
        return LassoWord(
            tuple(frozenset(s) for s in stem), tuple(frozenset(s) for s in loop)
        )

    def label_at(self, i):
        m = len(self.stem)
        if i < m:
            return self.stem[i]
        return self.loop[(i - m) % len(self.loop)]


def eval_lasso(f, word):
    """Truth of a formula at position 0 of an ultimately periodic word.

    Tabulates every subformula over the |stem| + |loop| distinct positions;
    Until/Eventually are least fixpoints, Release/Always greatest fixpoints,
    iterated around the loop until stable.  Truth tables are kept as integer
    bitmasks over positions (bit i = truth at position i).
    """
    m = len(word.stem)
    k = len(word.loop)
    p = m + k
    full = (1 << p) - 1

    def shift_succ(mask):
        # bit i of result = bit succ(i) of mask, succ(p-1) wraps to m
        return (mask >> 1) | (((mask >> m) & 1) << (p - 1))

    labels = [word.label_at(i) for i in range(p)]
    table = {}
    for g in subformulas(f):
        if isinstance(g, TrueF):
            t = full
        elif isinstance(g, FalseF):
            t = 0
        elif isinstance(g, Prop):
            t = 0
            for i in range(p):
                if g.name in labels[i]:
                    t |= 1 << i
        elif isinstance(g, Not):
            t = full ^ table[g.sub]
        elif isinstance(g, And):
            t = table[g.left] & table[g.right]
        elif isinstance(g, Or):
            t = table[g.left] | table[g.right]
        elif isinstance(g, Next):
            t = shift_succ(table[g.sub])
        elif isinstance(g, Until):
            t1, t2 = table[g.left], table[g.right]
            t = 0
            while True:
                t_new = t2 | (t1 & shift_succ(t))
                if t_new == t:
                    break
                t = t_new
        elif isinstance(g, Release):
            t1, t2 = table[g.left], table[g.right]
            t = full
            while True:
                t_new = t2 & (t1 | shift_succ(t))
                if t_new == t:
                    break
                t = t_new
        elif isinstance(g, Eventually):
            ts = table[g.sub]
            t = 0
            while True:
                t_new = ts | shift_succ(t)
                if t_new == t:
                    break
                t = t_new
        elif isinstance(g, Always):
            ts = table[g.sub]
            t = full
            while True:
                t_new = ts & shift_succ(t)
                if t_new == t:
                    break
                t = t_new
        else:
            raise TypeError(f"not a formula: {g!r}")
        table[g] = t
    return bool(table[f] & 1)
