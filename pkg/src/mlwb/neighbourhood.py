"""Finite neighbourhood frames represented by filter bases.

Filters are never materialized: a set U is a neighbourhood of x iff some
base member of x is contained in U.  Improper filters (empty set in the
base) are permitted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .kripke import EvaluationError, KripkeFrame, KripkeMorphism, Verdict, \
    random_formula
from .syntax import Box, Falsum, Formula, Implies, Letter


@dataclass(frozen=True)
class NFrame:
    points: frozenset
    base: dict  # point -> tuple of frozensets (a filter base)

    def __post_init__(self):
        for x in self.points:
            members = self.base.get(x)
            if not members:
                raise ValueError(f"point {x!r} has an empty base")
            for m in members:
                if not m <= self.points:
                    raise ValueError(f"base member of {x!r} outside points")
            for m1 in members:
                for m2 in members:
                    inter = m1 & m2
                    if not any(m3 <= inter for m3 in members):
                        raise ValueError(
                            f"base of {x!r} not refined under intersection")

    @staticmethod
    def make(points, base) -> "NFrame":
        return NFrame(frozenset(points),
                      {x: tuple(frozenset(m) for m in members)
                       for x, members in base.items()})

    def is_neighbourhood(self, x, u: frozenset) -> bool:
        return any(m <= u for m in self.base[x])

    def filter_of(self, x) -> frozenset:
        """Materialized filter; exponential, only for tiny cross-checks."""
        import itertools
        out = set()
        for size in range(len(self.points) + 1):
            for combo in itertools.combinations(sorted(self.points, key=repr), size):
                u = frozenset(combo)
                if self.is_neighbourhood(x, u):
                    out.add(u)
        return frozenset(out)


@dataclass(frozen=True)
class NModel:
    frame: NFrame
    valuation: dict

    def extension(self, p: str) -> frozenset:
        if p not in self.valuation:
            raise EvaluationError(f"letter {p!r} has no valuation entry")
        return frozenset(self.valuation[p])


def eval_nbhd(model: NModel, x, a: Formula) -> bool:
    if x not in model.frame.points:
        raise EvaluationError(f"unknown point {x!r}")
    if isinstance(a, Falsum):
        return False
    if isinstance(a, Letter):
        return x in model.extension(a.name)
    if isinstance(a, Implies):
        return not eval_nbhd(model, x, a.left) or eval_nbhd(model, x, a.right)
    if isinstance(a, Box):
        ext = frozenset(y for y in model.frame.points
                        if eval_nbhd(model, y, a.body))
        return model.frame.is_neighbourhood(x, ext)
    raise EvaluationError(f"not a propositional formula: {a!r}")


def nf_from_kripke(frame: KripkeFrame) -> NFrame:
    """N(F): the principal filter generated by R(w) at each world."""
    return NFrame(frame.worlds,
                  {w: (frame.successors(w),) for w in frame.worlds})


# ---------------------------------------------------------------------------
# n-frame p-morphisms


@dataclass(frozen=True)
class NMorphism:
    source: NFrame
    target: NFrame
    map: dict

    def __call__(self, x):
        return self.map[x]


def check_n_pmorphism(f: NMorphism) -> Verdict:
    """Surjectivity plus zig/zag, checked on base members only.

    By upward closure it suffices to check zig on each base member of x and
    zag on each base member of f(x).
    """
    fmap, src, tgt = f.map, f.source, f.target
    missing = src.points - set(fmap)
    if missing:
        return Verdict(False, "totality", (sorted(missing, key=repr)[0],))
    image = {fmap[x] for x in src.points}
    if image != tgt.points:
        return Verdict(False, "surjectivity",
                       (sorted(tgt.points - image, key=repr)[0],))
    for x in sorted(src.points, key=repr):
        for u in src.base[x]:
            fu = frozenset(fmap[y] for y in u)
            if not tgt.is_neighbourhood(fmap[x], fu):
                return Verdict(False, "zig", (x, u))
        for v in tgt.base[fmap[x]]:
            pre = frozenset(y for y in src.points if fmap[y] in v)
            if not src.is_neighbourhood(x, pre):
                return Verdict(False, "zag", (x, v))
    return Verdict(True)


def n_morphism_from_kripke(f: KripkeMorphism) -> NMorphism:
    return NMorphism(nf_from_kripke(f.source), nf_from_kripke(f.target), dict(f.map))


def pullback_valuation(f: NMorphism, valuation: dict) -> dict:
    return {p: frozenset(x for x in f.source.points if f.map[x] in ws)
            for p, ws in valuation.items()}


def n_truth_preservation_test(f: NMorphism, samples: int = 1000,
                              seed: int = 0) -> dict:
    verdict = check_n_pmorphism(f)
    if not verdict:
        raise ValueError(f"morphism not verified: {verdict.condition}")
    rng = random.Random(seed)
    tgt_points = sorted(f.target.points, key=repr)
    src_points = sorted(f.source.points, key=repr)
    passed = 0
    failures = []
    for _ in range(samples):
        val = {p: frozenset(x for x in tgt_points if rng.random() < 0.5)
               for p in ("p", "q")}
        a = random_formula(rng, ["p", "q"], depth=3)
        x = rng.choice(src_points)
        left = eval_nbhd(NModel(f.source, pullback_valuation(f, val)), x, a)
        right = eval_nbhd(NModel(f.target, val), f.map[x], a)
        if left == right:
            passed += 1
        elif len(failures) < 5:
            failures.append((x, a, val))
    return {"samples": samples, "passed": passed, "failures": failures}


# ---------------------------------------------------------------------------
# text format


def parse_nframe(text: str) -> NFrame:
    """``nframe <name>``, ``points x y ...``, ``base x = {a,b} {c} ...``"""
    points: list = []
    base: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split(None, 1)
        if head == "nframe":
            continue
        if head == "points":
            for x in rest[0].split():
                if x in points:
                    raise ValueError(f"line {lineno}: duplicate point {x!r}")
                points.append(x)
        elif head == "base":
            lhs, rhs = rest[0].split("=", 1)
            x = lhs.strip()
            members = []
            for chunk in rhs.split():
                if not (chunk.startswith("{") and chunk.endswith("}")):
                    raise ValueError(f"line {lineno}: bad base set {chunk!r}")
                inner = chunk[1:-1]
                members.append(frozenset(p for p in inner.split(",") if p))
            base[x] = tuple(members)
        else:
            raise ValueError(f"line {lineno}: unknown directive {head!r}")
    return NFrame.make(points, base)
