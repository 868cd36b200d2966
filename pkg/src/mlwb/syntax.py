"""Formula syntax: ASTs, parsers, printers and structural helpers.

Three object languages live here:

* propositional multimodal formulas (``false``, letters, ``->``, ``box``),
* predicate modal formulas (atoms over variables/constants, ``forall``),
* universal strict Horn sentences over a single binary relation ``R``.

Derived connectives (``~``, ``&``, ``|``, ``dia``, ``exists``) are parsed
but normalized to the primitive cases immediately, so two ASTs are equal
iff their primitive skeletons are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class ParseError(ValueError):
    """Raised on malformed input; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# ASTs


@dataclass(frozen=True)
class Falsum:
    def __repr__(self):
        return "Falsum()"


@dataclass(frozen=True)
class Letter:
    name: str


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Box:
    index: int
    body: "Formula"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: object


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple  # of Term; empty for 0-ary letters


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Falsum, Letter, Implies, Box, Atom, Forall]

FALSUM = Falsum()


def neg(a: Formula) -> Formula:
    return Implies(a, FALSUM)


def conj(a: Formula, b: Formula) -> Formula:
    return neg(Implies(a, neg(b)))


def disj(a: Formula, b: Formula) -> Formula:
    return Implies(neg(a), b)


def dia(a: Formula, index: int = 1) -> Formula:
    return neg(Box(index, neg(a)))


def exists(var: str, a: Formula) -> Formula:
    return neg(Forall(var, neg(a)))


def box_power(a: Formula, k: int) -> Formula:
    """k nested boxes around ``a`` (index 1)."""
    if k < 0:
        raise ValueError("negative box power")
    for _ in range(k):
        a = Box(1, a)
    return a


def subformulas(a: Formula) -> Iterator[Formula]:
    yield a
    if isinstance(a, Implies):
        yield from subformulas(a.left)
        yield from subformulas(a.right)
    elif isinstance(a, (Box, Forall)):
        yield from subformulas(a.body)


def modal_depth(a: Formula) -> int:
    if isinstance(a, Implies):
        return max(modal_depth(a.left), modal_depth(a.right))
    if isinstance(a, Box):
        return 1 + modal_depth(a.body)
    if isinstance(a, Forall):
        return modal_depth(a.body)
    return 0


def letters(a: Formula) -> set:
    """Propositional letters (and 0-ary atoms) occurring in ``a``."""
    out = set()
    for sub in subformulas(a):
        if isinstance(sub, Letter):
            out.add(sub.name)
        elif isinstance(sub, Atom) and not sub.args:
            out.add(sub.name)
    return out


def free_vars(a: Formula) -> set:
    if isinstance(a, Atom):
        return {t.name for t in a.args if isinstance(t, Var)}
    if isinstance(a, Implies):
        return free_vars(a.left) | free_vars(a.right)
    if isinstance(a, Box):
        return free_vars(a.body)
    if isinstance(a, Forall):
        return free_vars(a.body) - {a.var}
    return set()


def constants(a: Formula) -> set:
    out = set()
    for sub in subformulas(a):
        if isinstance(sub, Atom):
            out |= {t.value for t in sub.args if isinstance(t, Const)}
    return out


def is_closed(a: Formula) -> bool:
    return not free_vars(a)


def free_vars_ordered(a: Formula) -> list:
    """Free variables in order of first occurrence."""
    seen: list = []

    def walk(f, bound):
        if isinstance(f, Atom):
            for t in f.args:
                if isinstance(t, Var) and t.name not in bound and t.name not in seen:
                    seen.append(t.name)
        elif isinstance(f, Implies):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, Box):
            walk(f.body, bound)
        elif isinstance(f, Forall):
            walk(f.body, bound | {f.var})

    walk(a, frozenset())
    return seen


def universal_closure(a: Formula) -> Formula:
    """Close ``a`` under universal quantifiers, first-occurrence order."""
    for v in reversed(free_vars_ordered(a)):
        a = Forall(v, a)
    return a


def substitute_constants(a: Formula, assignment: dict) -> Formula:
    """Replace free occurrences of variables with constants.

    ``assignment`` maps variable names to constant values.  Substituting a
    variable that occurs bound anywhere in its scope is rejected.
    """
    def walk(f, active):
        if isinstance(f, Atom):
            args = tuple(
                Const(active[t.name]) if isinstance(t, Var) and t.name in active else t
                for t in f.args
            )
            return Atom(f.name, args)
        if isinstance(f, Implies):
            return Implies(walk(f.left, active), walk(f.right, active))
        if isinstance(f, Box):
            return Box(f.index, walk(f.body, active))
        if isinstance(f, Forall):
            if f.var in active:
                raise ValueError(f"cannot substitute bound variable {f.var!r}")
            return Forall(f.var, walk(f.body, active))
        return f

    return walk(a, dict(assignment))


# ---------------------------------------------------------------------------
# Tokenizer

_SYMBOLS = ["->", "=>", "~", "&", "|", "(", ")", "[", "]", ".", ","]
_KEYWORDS = {"false", "true", "box", "dia", "forall", "exists"}


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append((sym, sym, i))
                i += len(sym)
                break
        else:
            if c.isalnum() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                word = text[i:j]
                kind = word if word in _KEYWORDS else "ident"
                toks.append((kind, word, i))
                i = j
            else:
                raise ParseError(f"unexpected character {c!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, n_modalities: int, predicate: bool):
        self.toks = _tokenize(text)
        self.pos = 0
        self.n_modalities = n_modalities
        self.predicate = predicate
        self.arities: dict = {}

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    # grammar: implication (right-assoc) < "|" < "&" < unary/quantifier < atom
    def formula(self, bound=frozenset()):
        left = self.disjunction(bound)
        if self.peek()[0] == "->":
            self.next()
            return Implies(left, self.formula(bound))
        return left

    def disjunction(self, bound):
        left = self.conjunction(bound)
        while self.peek()[0] == "|":
            self.next()
            left = disj(left, self.conjunction(bound))
        return left

    def conjunction(self, bound):
        left = self.unary(bound)
        while self.peek()[0] == "&":
            self.next()
            left = conj(left, self.unary(bound))
        return left

    def modal_index(self):
        if self.peek()[0] == "[":
            self.next()
            tok = self.expect("ident")
            if not tok[1].isdigit():
                raise ParseError("modality index must be a number", tok[2])
            self.expect("]")
            index = int(tok[1])
        else:
            index = 1
        if not 1 <= index <= self.n_modalities:
            raise ParseError(
                f"modality index {index} outside 1..{self.n_modalities}",
                self.peek()[2],
            )
        return index

    def unary(self, bound):
        kind, _, pos = self.peek()
        if kind == "~":
            self.next()
            return neg(self.unary(bound))
        if kind == "box":
            self.next()
            return Box(self.modal_index(), self.unary(bound))
        if kind == "dia":
            self.next()
            return dia(self.unary(bound), self.modal_index())
        if kind in ("forall", "exists"):
            if not self.predicate:
                raise ParseError(f"{kind!r} not allowed in propositional formula", pos)
            self.next()
            var = self.expect("ident")[1]
            if var in bound:
                raise ParseError(f"shadowed bound variable {var!r}", pos)
            self.expect(".")
            body = self.unary(bound | {var})
            return Forall(var, body) if kind == "forall" else exists(var, body)
        return self.atomic(bound)

    def atomic(self, bound):
        kind, word, pos = self.next()
        if kind == "false":
            return FALSUM
        if kind == "(":
            inner = self.formula(bound)
            self.expect(")")
            return inner
        if kind != "ident":
            raise ParseError(f"unexpected token {word!r}", pos)
        if not self.predicate:
            return Letter(word)
        args: tuple = ()
        if self.peek()[0] == "(":
            self.next()
            names = [self.expect("ident")[1]]
            while self.peek()[0] == ",":
                self.next()
                names.append(self.expect("ident")[1])
            self.expect(")")
            args = tuple(Var(v) for v in names)
        arity = self.arities.setdefault(word, len(args))
        if arity != len(args):
            raise ParseError(
                f"predicate {word!r} used with arity {len(args)}, earlier {arity}", pos
            )
        return Atom(word, args)


def parse_prop(text: str, n_modalities: int = 1) -> Formula:
    p = _Parser(text, n_modalities, predicate=False)
    a = p.formula()
    p.expect("end")
    return a


def parse_pred(text: str, n_modalities: int = 1) -> Formula:
    p = _Parser(text, n_modalities, predicate=True)
    a = p.formula()
    p.expect("end")
    return a


# ---------------------------------------------------------------------------
# Printing

_PREC_IMP, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4


def _wrap(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _fmt(a: Formula, outer: int) -> str:
    # unfold derived-connective skeletons for readability
    if isinstance(a, Implies):
        if a.right == FALSUM:
            inner = a.left
            if isinstance(inner, Box) and isinstance(inner.body, Implies) \
                    and inner.body.right == FALSUM:
                idx = "" if inner.index == 1 else f"[{inner.index}]"
                return _wrap(f"dia{idx} {_fmt(inner.body.left, _PREC_UNARY)}",
                             _PREC_UNARY, outer)
            if isinstance(inner, Forall) and isinstance(inner.body, Implies) \
                    and inner.body.right == FALSUM:
                return _wrap(f"exists {inner.var}. {_fmt(inner.body.left, _PREC_UNARY)}",
                             _PREC_UNARY, outer)
            if isinstance(inner, Implies) and isinstance(inner.right, Implies) \
                    and inner.right.right == FALSUM:
                s = f"{_fmt(inner.left, _PREC_AND)} & {_fmt(inner.right.left, _PREC_AND)}"
                return _wrap(s, _PREC_AND, outer)
            return _wrap(f"~{_fmt(inner, _PREC_UNARY)}", _PREC_UNARY, outer)
        if isinstance(a.left, Implies) and a.left.right == FALSUM \
                and not isinstance(a.right, Falsum):
            s = f"{_fmt(a.left.left, _PREC_OR + 1)} | {_fmt(a.right, _PREC_OR)}"
            return _wrap(s, _PREC_OR, outer)
        s = f"{_fmt(a.left, _PREC_IMP + 1)} -> {_fmt(a.right, _PREC_IMP)}"
        return _wrap(s, _PREC_IMP, outer)
    if isinstance(a, Falsum):
        return "false"
    if isinstance(a, Letter):
        return a.name
    if isinstance(a, Box):
        idx = "" if a.index == 1 else f"[{a.index}]"
        return _wrap(f"box{idx} {_fmt(a.body, _PREC_UNARY)}", _PREC_UNARY, outer)
    if isinstance(a, Atom):
        if not a.args:
            return a.name
        args = ",".join(str(t.name if isinstance(t, Var) else t.value) for t in a.args)
        return f"{a.name}({args})"
    if isinstance(a, Forall):
        return _wrap(f"forall {a.var}. {_fmt(a.body, _PREC_UNARY)}", _PREC_UNARY, outer)
    raise TypeError(f"not a formula: {a!r}")


def to_text(a: Formula) -> str:
    return _fmt(a, 0)


# ---------------------------------------------------------------------------
# Horn sentences


@dataclass(frozen=True)
class HTrue:
    pass


@dataclass(frozen=True)
class HAtom:
    left: str
    right: str


@dataclass(frozen=True)
class HAnd:
    left: "HBody"
    right: "HBody"


@dataclass(frozen=True)
class HOr:
    left: "HBody"
    right: "HBody"


HBody = Union[HTrue, HAtom, HAnd, HOr]


@dataclass(frozen=True)
class HornSentence:
    """``forall vars (body -> head)`` with a positive body over atoms ``u R v``."""

    variables: tuple
    body: HBody
    head: HAtom

    def __post_init__(self):
        head_vars = {self.head.left, self.head.right}
        if not head_vars <= set(self.variables):
            raise ValueError("head variables must be bound")

    def body_atoms(self) -> Iterator[HAtom]:
        def walk(b):
            if isinstance(b, HAtom):
                yield b
            elif isinstance(b, (HAnd, HOr)):
                yield from walk(b.left)
                yield from walk(b.right)

        yield from walk(self.body)


def parse_horn(text: str) -> HornSentence:
    """Parse ``BODY => x R y`` with ``BODY ::= true | u R v | BODY & BODY | BODY "|" BODY``."""
    if "=>" not in text:
        raise ParseError("missing '=>' in Horn sentence", len(text))
    body_text, head_text = text.split("=>", 1)

    def parse_atom(toks, pos):
        if pos + 2 < len(toks) and toks[pos + 1][1] == "R":
            left, right = toks[pos][1], toks[pos + 2][1]
            for t in (toks[pos], toks[pos + 2]):
                if t[0] != "ident" or t[1] == "R":
                    raise ParseError("bad relation atom", t[2])
            return HAtom(left, right), pos + 3
        raise ParseError("expected relation atom 'u R v'", toks[pos][2])

    def parse_body(toks):
        def or_level(pos):
            node, pos = and_level(pos)
            while toks[pos][0] == "|":
                rhs, pos2 = and_level(pos + 1)
                node, pos = HOr(node, rhs), pos2
            return node, pos

        def and_level(pos):
            node, pos = primary(pos)
            while toks[pos][0] == "&":
                rhs, pos2 = primary(pos + 1)
                node, pos = HAnd(node, rhs), pos2
            return node, pos

        def primary(pos):
            if toks[pos][0] == "true":
                return HTrue(), pos + 1
            if toks[pos][0] == "(":
                node, pos = or_level(pos + 1)
                if toks[pos][0] != ")":
                    raise ParseError("expected ')'", toks[pos][2])
                return node, pos + 1
            return parse_atom(toks, pos)

        node, pos = or_level(0)
        if toks[pos][0] != "end":
            raise ParseError(f"trailing tokens in Horn body: {toks[pos][1]!r}",
                             toks[pos][2])
        return node

    body = parse_body(_tokenize(body_text))
    head_toks = _tokenize(head_text)
    head, pos = parse_atom(head_toks, 0)
    if head_toks[pos][0] != "end":
        raise ParseError("Horn head must be a single atom", head_toks[pos][2])

    variables = []
    for v in (head.left, head.right):
        if v not in variables:
            variables.append(v)
    sentence = HornSentence(tuple(variables), body, head)
    for atom in sentence.body_atoms():
        for v in (atom.left, atom.right):
            if v not in variables:
                variables.append(v)
    return HornSentence(tuple(variables), body, head)


def horn_to_text(s: HornSentence) -> str:
    def fmt(b, outer_and=False):
        if isinstance(b, HTrue):
            return "true"
        if isinstance(b, HAtom):
            return f"{b.left} R {b.right}"
        if isinstance(b, HAnd):
            return f"{fmt(b.left, True)} & {fmt(b.right, True)}"
        s = f"{fmt(b.left)} | {fmt(b.right)}"
        return f"({s})" if outer_and else s

    return f"{fmt(s.body)} => {s.head.left} R {s.head.right}"
