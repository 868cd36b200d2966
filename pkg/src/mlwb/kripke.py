"""Finite Kripke frames and models.

Evaluation, generated subframes, depth-truncated unravelling, p-morphism
verification and brute-force validity checking.  Worlds are arbitrary
hashable ids; the id ``"0"`` is reserved for the stop symbol used by the
dense-path machinery.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Optional

from .syntax import FALSUM, Box, Falsum, Formula, Implies, Letter, box_power, letters

STOP = "0"


class EvaluationError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class KripkeFrame:
    worlds: frozenset
    relation: frozenset  # of (u, v) pairs
    root: Optional[object] = None

    def __post_init__(self):
        if STOP in self.worlds:
            raise ValueError(f"world id {STOP!r} is reserved")
        for u, v in self.relation:
            if u not in self.worlds or v not in self.worlds:
                raise ValueError(f"relation pair ({u!r}, {v!r}) outside worlds")
        if self.root is not None and self.root not in self.worlds:
            raise ValueError(f"root {self.root!r} not a world")

    @staticmethod
    def make(worlds: Iterable, relation: Iterable, root=None) -> "KripkeFrame":
        return KripkeFrame(frozenset(worlds), frozenset(tuple(p) for p in relation),
                           root)

    def successors(self, w) -> frozenset:
        return frozenset(v for u, v in self.relation if u == w)

    def is_rooted(self) -> bool:
        return self.root is not None and reachable(self, self.root) == self.worlds


def reachable(frame: KripkeFrame, w) -> frozenset:
    """R*-reachable set of ``w`` (including ``w``)."""
    seen = {w}
    todo = [w]
    while todo:
        u = todo.pop()
        for v in frame.successors(u):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return frozenset(seen)


def generated_subframe(frame: KripkeFrame, w) -> KripkeFrame:
    if w not in frame.worlds:
        raise ValueError(f"unknown world {w!r}")
    ws = reachable(frame, w)
    rel = frozenset(p for p in frame.relation if p[0] in ws and p[1] in ws)
    return KripkeFrame(ws, rel, root=w)


def relation_compose(r1: frozenset, r2: frozenset) -> frozenset:
    by_left: dict = {}
    for u, v in r2:
        by_left.setdefault(u, []).append(v)
    return frozenset((u, w) for u, v in r1 for w in by_left.get(v, ()))


def relation_power(frame: KripkeFrame, k: int) -> frozenset:
    """R^k; k = 0 gives the identity relation."""
    rel = frozenset((w, w) for w in frame.worlds)
    for _ in range(k):
        rel = relation_compose(rel, frame.relation)
    return rel


@dataclass(frozen=True)
class KripkeModel:
    frame: KripkeFrame
    valuation: dict  # letter name -> frozenset of worlds

    def __post_init__(self):
        for p, ws in self.valuation.items():
            if not frozenset(ws) <= self.frame.worlds:
                raise ValueError(f"valuation of {p!r} outside worlds")

    def extension(self, p: str) -> frozenset:
        if p not in self.valuation:
            raise EvaluationError(f"letter {p!r} has no valuation entry")
        return frozenset(self.valuation[p])


def eval_kripke(model: KripkeModel, w, a: Formula) -> bool:
    if w not in model.frame.worlds:
        raise EvaluationError(f"unknown world {w!r}")
    if isinstance(a, Falsum):
        return False
    if isinstance(a, Letter):
        return w in model.extension(a.name)
    if isinstance(a, Implies):
        return not eval_kripke(model, w, a.left) or eval_kripke(model, w, a.right)
    if isinstance(a, Box):
        return all(eval_kripke(model, v, a.body) for v in model.frame.successors(w))
    raise EvaluationError(f"not a propositional formula: {a!r}")


# ---------------------------------------------------------------------------
# p-morphisms


@dataclass(frozen=True)
class Verdict:
    ok: bool
    condition: Optional[str] = None
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class KripkeMorphism:
    source: KripkeFrame
    target: KripkeFrame
    map: dict
    # lifting is only promised at these points (all worlds when None);
    # truncated unravellings restrict it to interior paths
    interior: Optional[frozenset] = None

    def __call__(self, w):
        return self.map[w]

    def lifting_points(self) -> frozenset:
        return self.source.worlds if self.interior is None else self.interior


def check_pmorphism(f: KripkeMorphism) -> Verdict:
    """Check surjectivity, monotonicity, and lifting (at lifting points)."""
    fmap, src, tgt = f.map, f.source, f.target
    missing = src.worlds - set(fmap)
    if missing:
        return Verdict(False, "totality", (sorted(missing, key=repr)[0],))
    image = {fmap[w] for w in src.worlds}
    if image != tgt.worlds:
        return Verdict(False, "surjectivity",
                       (sorted(tgt.worlds - image, key=repr)[0],))
    for u, v in src.relation:
        if (fmap[u], fmap[v]) not in tgt.relation:
            return Verdict(False, "monotonicity", (u, v))
    for w in f.lifting_points():
        for v2 in tgt.successors(fmap[w]):
            if not any(fmap[v] == v2 for v in src.successors(w)):
                return Verdict(False, "lifting", (w, v2))
    return Verdict(True)


def pullback_valuation(f: KripkeMorphism, valuation: dict) -> dict:
    return {p: frozenset(w for w in f.source.worlds if f.map[w] in ws)
            for p, ws in valuation.items()}


def truth_preservation_test(f: KripkeMorphism, samples: int = 1000,
                            seed: int = 0) -> dict:
    """Sampled check of the truth-transfer biconditional for a verified morphism.

    For random (target valuation, formula of modal depth <= 3, point) triples,
    evaluates on both sides with the pullback valuation on the source.
    """
    verdict = check_pmorphism(f)
    if not verdict:
        raise ValueError(f"morphism not verified: {verdict.condition}")
    rng = random.Random(seed)
    tgt_worlds = sorted(f.target.worlds, key=repr)
    src_worlds = sorted(f.lifting_points(), key=repr)
    passed = 0
    failures = []
    for _ in range(samples):
        val = {p: frozenset(w for w in tgt_worlds if rng.random() < 0.5)
               for p in ("p", "q")}
        a = random_formula(rng, ["p", "q"], depth=3)
        x = rng.choice(src_worlds)
        left = eval_kripke(KripkeModel(f.source, pullback_valuation(f, val)), x, a)
        right = eval_kripke(KripkeModel(f.target, val), f.map[x], a)
        if left == right:
            passed += 1
        elif len(failures) < 5:
            failures.append((x, a, val))
    return {"samples": samples, "passed": passed, "failures": failures}


def random_formula(rng: random.Random, letter_names: list, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.15:
            return FALSUM
        return Letter(rng.choice(letter_names))
    if rng.random() < 0.5:
        return Implies(random_formula(rng, letter_names, depth - 1),
                       random_formula(rng, letter_names, depth - 1))
    return Box(1, random_formula(rng, letter_names, depth - 1))


# ---------------------------------------------------------------------------
# validity


def brute_validity(frame: KripkeFrame, a: Formula, cap: int = 2 ** 20) -> bool:
    """True iff ``a`` holds at every world under every valuation.

    Enumerates all valuations; refuses (loudly) when 2^(|letters|*|W|)
    exceeds ``cap`` rather than sampling.
    """
    names = sorted(letters(a))
    worlds = sorted(frame.worlds, key=repr)
    n_models = 2 ** (len(names) * len(worlds))
    if n_models > cap:
        raise BudgetExceeded(f"{n_models} valuations exceed cap {cap}")
    for bits in itertools.product(*[range(2)] * (len(names) * len(worlds))):
        val = {}
        for i, p in enumerate(names):
            chunk = bits[i * len(worlds):(i + 1) * len(worlds)]
            val[p] = frozenset(w for w, b in zip(worlds, chunk) if b)
        model = KripkeModel(frame, val)
        for w in worlds:
            if not eval_kripke(model, w, a):
                return False
    return True


def check_axiom_inclusion(frame: KripkeFrame, k: int) -> Verdict:
    """Relational counterpart of ``box p -> box^k p``: R^k(w) subset of R(w)."""
    rk = relation_power(frame, k)
    for u, v in rk:
        if (u, v) not in frame.relation:
            return Verdict(False, "inclusion", (u, v))
    return Verdict(True)


def check_pretransitive(frame: KripkeFrame, k: int) -> Verdict:
    """Counterpart of ``p & box p & ... & box^k p -> box^{k+1} p``."""
    rk1 = relation_power(frame, k + 1)
    union: set = set()
    for i in range(k + 1):
        union |= relation_power(frame, i)
    for pair in rk1:
        if pair not in union:
            return Verdict(False, "pretransitivity", pair)
    return Verdict(True)


def axiom_inclusion_formula(k: int) -> Formula:
    return Implies(Box(1, Letter("p")), box_power(Letter("p"), k))


def pretransitivity_formula(k: int) -> Formula:
    conjuncts = box_power(Letter("p"), 0)
    for i in range(1, k + 1):
        conjuncts = _conj(conjuncts, box_power(Letter("p"), i))
    return Implies(conjuncts, box_power(Letter("p"), k + 1))


def _conj(a, b):
    return Implies(Implies(a, Implies(b, FALSUM)), FALSUM)


# ---------------------------------------------------------------------------
# unravelling


@dataclass(frozen=True)
class Unravelling:
    frame: KripkeFrame          # worlds are path tuples
    pi: KripkeMorphism          # endpoint map onto the base frame
    interior: frozenset         # paths of length < depth


def unravel(frame: KripkeFrame, depth: int) -> Unravelling:
    """Frame of rooted paths of length <= depth with one-step extension.

    The endpoint map satisfies surjectivity and monotonicity globally;
    lifting is guaranteed only at interior paths (length < depth).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not frame.is_rooted():
        raise ValueError("frame must be rooted")
    paths = [(frame.root,)]
    frontier = [(frame.root,)]
    for _ in range(depth - 1):
        new = []
        for path in frontier:
            for v in sorted(frame.successors(path[-1]), key=repr):
                new.append(path + (v,))
        paths.extend(new)
        frontier = new
    path_set = frozenset(paths)
    rel = frozenset((p, q) for p in paths for q in path_set
                    if len(q) == len(p) + 1 and q[:-1] == p)
    unravelled = KripkeFrame(path_set, rel, root=(frame.root,))
    interior = frozenset(p for p in paths if len(p) < depth)
    pi = KripkeMorphism(unravelled, frame, {p: p[-1] for p in paths},
                        interior=interior)
    return Unravelling(unravelled, pi, interior)


# ---------------------------------------------------------------------------
# frame text format


def parse_frame(text: str) -> KripkeFrame:
    """Line format: ``frame <name>``, ``worlds w1 w2 ...``, ``root w``,
    ``edges a->b c->d ...``.  Duplicate world ids are rejected."""
    worlds: list = []
    edges: list = []
    root = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "frame":
            continue
        if head == "worlds":
            for w in rest:
                if w in worlds:
                    raise ValueError(f"line {lineno}: duplicate world {w!r}")
                worlds.append(w)
        elif head == "root":
            (root,) = rest
        elif head == "edges":
            for item in rest:
                if "->" not in item:
                    raise ValueError(f"line {lineno}: bad edge {item!r}")
                u, v = item.split("->", 1)
                edges.append((u, v))
        else:
            raise ValueError(f"line {lineno}: unknown directive {head!r}")
    return KripkeFrame.make(worlds, edges, root)


def parse_valuation(text: str) -> dict:
    """``val p = {w1,w2}`` per line."""
    val = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("val ") or "=" not in line:
            raise ValueError(f"line {lineno}: expected 'val p = {{...}}'")
        name, rhs = line[4:].split("=", 1)
        rhs = rhs.strip()
        if not (rhs.startswith("{") and rhs.endswith("}")):
            raise ValueError(f"line {lineno}: expected set braces")
        inner = rhs[1:-1].strip()
        members = frozenset(w.strip() for w in inner.split(",") if w.strip())
        val[name.strip()] = members
    return val


def format_frame(frame: KripkeFrame, name: str = "F") -> str:
    lines = [f"frame {name}",
             "worlds " + " ".join(sorted(frame.worlds, key=repr))]
    if frame.root is not None:
        lines.append(f"root {frame.root}")
    edges = " ".join(f"{u}->{v}" for u, v in sorted(frame.relation, key=repr))
    lines.append("edges " + edges if edges else "edges")
    return "\n".join(lines) + "\n"
