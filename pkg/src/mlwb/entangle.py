"""Entanglement of the base frame with a domain alphabet, the ~ quotient,
D-sharp domains, the psi surjections, and the h/t/xi machinery.

An entangled word interleaves a rooted path of the base frame with letters
from a finite domain alphabet (standing in for an S5-total second frame).
Words are equivalent when they agree after stripping trailing base-frame
letters; the quotient classes form the expanding domains D-sharp that the
constant-domain construction matches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .dense import DenseFrame, canonical, dropped, f0, st, uk_members
from .kripke import (
    STOP, EvaluationError, KripkeFrame, KripkeMorphism, Verdict,
)
from .predicate import PredKKMorphism, PredKripkeFrame, check_kk_morphism


@dataclass(frozen=True)
class EntangleSpace:
    """Base frame plus domain alphabet.  ``frame2`` optionally replaces the
    S5-total frame on sigma2 for general two-frame enumeration."""

    frame: KripkeFrame
    sigma2: tuple
    frame2: Optional[KripkeFrame] = None

    def __post_init__(self):
        object.__setattr__(self, "sigma2", tuple(self.sigma2))
        if not self.sigma2:
            raise ValueError("domain alphabet must be nonempty")
        if not self.frame.is_rooted():
            raise ValueError("base frame must be rooted")
        overlap = set(self.sigma2) & (set(self.frame.worlds) | {STOP})
        if overlap:
            raise ValueError(f"alphabets must be disjoint: {sorted(overlap)}")
        if self.frame2 is not None and set(self.frame2.worlds) != set(self.sigma2):
            raise ValueError("frame2 must live on the domain alphabet")

    def root_symbol(self):
        if self.frame2 is not None:
            return self.frame2.root
        return self.sigma2[0]

    def is_w(self, letter) -> bool:
        return letter in self.frame.worlds

    def is_d(self, letter) -> bool:
        return letter in self.sigma2


# ---------------------------------------------------------------------------
# projections and enumeration


def p1(space: EntangleSpace, word) -> tuple:
    return (space.frame.root,) + tuple(a for a in word if space.is_w(a))


def p2(space: EntangleSpace, word) -> tuple:
    return (space.root_symbol(),) + tuple(a for a in word if space.is_d(a))


def pi(word):
    if not word:
        raise EvaluationError("pi is undefined on the empty word")
    return word[-1]


def _is_path(frame: KripkeFrame, path: tuple) -> bool:
    if not path or path[0] != frame.root:
        return False
    return all((u, v) in frame.relation for u, v in zip(path, path[1:]))


def is_entangled(space: EntangleSpace, word) -> bool:
    word = tuple(word)
    for a in word:
        if not (space.is_w(a) or space.is_d(a)):
            return False
    if not _is_path(space.frame, p1(space, word)):
        return False
    if space.frame2 is not None and not _is_path(space.frame2, p2(space, word)):
        return False
    return True


def entangle_enumerate(space: EntangleSpace, max_len: int) -> list:
    out = [()]
    frontier = [()]
    letters = sorted(space.frame.worlds) + list(space.sigma2)
    for _ in range(max_len):
        new = [w + (a,) for w in frontier for a in letters
               if is_entangled(space, w + (a,))]
        out.extend(new)
        frontier = new
    return out


def fiber(space: EntangleSpace, path: tuple, max_len: int) -> list:
    """All entangled words of length <= max_len with p1 exactly ``path``
    (the path taken against the domain alphabet)."""
    if not _is_path(space.frame, path):
        raise ValueError(f"not a rooted path: {path!r}")
    steps = path[1:]
    n = len(steps)
    out = []
    for total in range(n, max_len + 1):
        k = total - n  # number of domain letters
        for positions in itertools.combinations(range(total), n):
            for fillers in itertools.product(space.sigma2, repeat=k):
                word = [None] * total
                for idx, pos in enumerate(positions):
                    word[pos] = steps[idx]
                it = iter(fillers)
                for i in range(total):
                    if word[i] is None:
                        word[i] = next(it)
                out.append(tuple(word))
    return out


# ---------------------------------------------------------------------------
# the ~ quotient


def canonicalize(space: EntangleSpace, word) -> tuple:
    word = tuple(word)
    for c in word:
        if not (space.is_w(c) or space.is_d(c)):
            raise EvaluationError(f"not an entangled-word letter: {c!r}")
    while word and space.is_w(word[-1]):
        word = word[:-1]
    return word


def equiv(space: EntangleSpace, x, y) -> bool:
    for word in (x, y):
        if not is_entangled(space, word):
            raise EvaluationError(f"not an entangled word: {tuple(word)!r}")
    return canonicalize(space, x) == canonicalize(space, y)


def equiv_bruteforce(space: EntangleSpace, x, y) -> bool:
    """Oracle: x = t.c and y = t.d for an entangled t and c,d over W."""
    x, y = tuple(x), tuple(y)
    for i in range(len(x) + 1):
        if not all(space.is_w(a) for a in x[i:]):
            continue
        for j in range(len(y) + 1):
            if not all(space.is_w(a) for a in y[j:]):
                continue
            if x[:i] == y[:j] and is_entangled(space, x[:i]):
                return True
    return False


# ---------------------------------------------------------------------------
# D-sharp domains


def dsharp(space: EntangleSpace, path: tuple, max_sigma: int) -> frozenset:
    """Canonical representatives of classes over ``path``: interleavings of
    a prefix of the path's steps with up to max_sigma domain letters, ending
    in a domain letter (or empty).  Bounding the domain-letter count keeps
    the truncated family expanding along path extension."""
    if not _is_path(space.frame, path):
        raise ValueError(f"not a rooted path: {path!r}")
    steps = path[1:]
    classes = {()}
    for plen in range(len(steps) + 1):
        prefix = steps[:plen]
        for k in range(1, max_sigma + 1):
            total = plen + k
            for positions in itertools.combinations(range(total - 1), plen):
                for fillers in itertools.product(space.sigma2, repeat=k):
                    word = [None] * total
                    for idx, pos in enumerate(positions):
                        word[pos] = prefix[idx]
                    it = iter(fillers)
                    for i in range(total):
                        if word[i] is None:
                            word[i] = next(it)
                    classes.add(tuple(word))
    return frozenset(classes)


def domain_monotonicity_check(space: EntangleSpace, a_path: tuple,
                              b_path: tuple, max_sigma: int) -> Verdict:
    if not (len(b_path) == len(a_path) + 1 and b_path[:-1] == a_path
            and (a_path[-1], b_path[-1]) in space.frame.relation):
        return Verdict(False, "not-a-relation-step", (a_path, b_path))
    da = dsharp(space, a_path, max_sigma)
    db = dsharp(space, b_path, max_sigma)
    if not da <= db:
        return Verdict(False, "not-monotone", sorted(da - db)[0])
    strict = sorted(db - da)
    if not strict:
        return Verdict(False, "no-strictness-witness", (a_path, b_path))
    return Verdict(True, "strict", strict[0])


# ---------------------------------------------------------------------------
# h, t, xi


def h(space: EntangleSpace, alpha, gamma) -> tuple:
    """Interleave alpha's base-frame letters with gamma's domain letters.

    The zeros of gamma are slots; walking gamma position by position, each
    slot is filled by the next unused letter of alpha whose own position in
    alpha has already been reached.  Letters of alpha beyond gamma's
    stopping length are appended.  (A letter may thus be delayed past a run
    of domain letters, but never pulled ahead of its position — which is
    what keeps the result stable on deep neighbourhoods of alpha.)"""
    alpha = canonical(alpha)
    letters = []
    for pos, a in enumerate(alpha, start=1):
        if a == STOP:
            continue
        if not space.is_w(a):
            raise EvaluationError(f"not a base-frame letter: {a!r}")
        letters.append((pos, a))
    out = []
    k = 0
    for p, c in enumerate(canonical(gamma), start=1):
        if c == STOP:
            if k < len(letters) and letters[k][0] <= p:
                out.append(letters[k][1])
                k += 1
        elif space.is_d(c):
            out.append(c)
        else:
            raise EvaluationError(f"not a domain letter: {c!r}")
    out.extend(a for _, a in letters[k:])
    return tuple(out)


def t(space: EntangleSpace, alpha, ybar) -> tuple:
    """Insert the domain letters of ybar into alpha so that dropping zeros
    recovers ybar; the result is a stop word over the joint alphabet."""
    alpha = canonical(alpha)
    ybar = tuple(ybar)
    if dropped(alpha) != tuple(a for a in ybar if space.is_w(a)):
        raise EvaluationError(
            f"incompatible inputs: f0 of {alpha!r} does not match the"
            f" base-frame part of {ybar!r}")
    out = []
    i = 0
    j = 0
    while j < len(ybar) or i < len(alpha):
        c = ybar[j] if j < len(ybar) else None
        if c is not None and space.is_d(c):
            out.append(c)
            j += 1
        elif i >= len(alpha):
            break
        elif alpha[i] == STOP:
            out.append(STOP)
            i += 1
        else:
            # matching base-frame letters (guaranteed by the precondition)
            out.append(alpha[i])
            i += 1
            j += 1
    result = canonical(out)
    if tuple(a for a in result if a != STOP) != ybar:
        raise AssertionError(
            f"t self-check failed: dropping zeros of {result!r}"
            f" does not give {ybar!r}")  # pragma: no cover
    return result


def zero_pattern(space: EntangleSpace, word) -> tuple:
    """Replace base-frame letters by stops, keeping domain letters."""
    return canonical(tuple(STOP if space.is_w(a) else a for a in word))


def xi(space: EntangleSpace, alpha, gamma) -> tuple:
    return canonicalize(space, h(space, alpha, gamma))


def xi_surjectivity_check(space: EntangleSpace, alpha, max_sigma: int) -> dict:
    """Every truncated class over f0(alpha) is hit by xi(alpha, .), with the
    witness gamma constructed through t."""
    path = f0(alpha, space.frame)
    missed = []
    witnesses = {}
    classes = sorted(dsharp(space, path, max_sigma))
    for cls in classes:
        # the fiber member of the class: the canonical word followed by the
        # not-yet-consumed path steps
        used = len([a for a in cls if space.is_w(a)])
        ybar = cls + path[1 + used:]
        alpha_prime = t(space, alpha, ybar)  # self-checks f0(t(., .)) = ybar
        gamma = _witness_gamma(space, alpha, alpha_prime, ybar, cls)
        if gamma is None:
            missed.append(cls)
        else:
            witnesses[cls] = gamma
    return {
        "classes": len(classes),
        "missed": missed,
        "witnesses": witnesses,
        "ok": not missed,
    }


def _witness_gamma(space, alpha, alpha_prime, ybar, cls):
    """A domain stop word gamma with xi(alpha, gamma) == cls, or None.

    The zero patterns of the fiber representative and of t's output both
    work whenever alpha is stop-free; interior stops of alpha can shift
    slot positions, so fall back to a bounded search over zero-run
    patterns around the domain letters of the class."""
    for guess in (zero_pattern(space, ybar), zero_pattern(space, alpha_prime)):
        if xi(space, alpha, guess) == cls:
            return guess
    sigmas = [c for c in cls if space.is_d(c)]
    gap_cap = len(canonical(alpha)) + 2
    for gaps in itertools.product(range(gap_cap + 1), repeat=len(sigmas)):
        word = []
        for g, c in zip(gaps, sigmas):
            word.extend([STOP] * g)
            word.append(c)
        gamma = canonical(word)
        if xi(space, alpha, gamma) == cls:
            return gamma
    return None


def xi_locality_check(space: EntangleSpace, df: DenseFrame, alpha, gamma) -> dict:
    """xi(beta, gamma) = xi(alpha, gamma) for beta in U_m(alpha) at
    m = st(gamma) + st(alpha)."""
    if df.frame != space.frame:
        raise ValueError("dense frame must sit over the entangle base frame")
    m = st(gamma) + st(alpha)
    value = xi(space, alpha, gamma)
    members, families = uk_members(alpha, m, df)
    mismatches = [beta for beta in members
                  if xi(space, beta, gamma) != value]
    return {"m": m, "members": len(members), "families": len(families),
            "mismatches": mismatches, "ok": not mismatches}


# ---------------------------------------------------------------------------
# psi


def build_psi(space: EntangleSpace, target: PredKripkeFrame,
              max_sigma: int = 2,
              dense: Optional[DenseFrame] = None) -> PredKKMorphism:
    """Surjections from the D-sharp domains of the (optionally closed)
    truncated unravelling onto the target's expanding domains, built along
    the tree order; overflow classes land on a designated element of the
    parent's image.  Closure edges inherit agreement automatically because
    they point from ancestors to descendants."""
    frame = target.frame
    if frame != space.frame:
        raise ValueError("target must sit over the entangle base frame")
    if dense is None:
        height = max(len(_tree_path(frame, w)) for w in frame.worlds)
        dense = DenseFrame(frame, depth=height + 1)
    elif dense.frame != frame:
        raise ValueError("dense frame must sit over the target's base frame")
    closed = dense.closed_unravelling()
    domains = {p: dsharp(space, p, max_sigma) for p in closed.worlds}
    source = PredKripkeFrame(closed, domains)

    phi1 = {}
    for path in sorted(closed.worlds, key=lambda p: (len(p), p)):
        w = path[-1]
        if len(path) == 1:
            fresh = sorted(domains[path])
            targets = sorted(target.domain(w))
            inherited = {}
            parent_designated = targets[0]
        else:
            parent = path[:-1]
            fresh = sorted(domains[path] - domains[parent])
            targets = sorted(target.domain(w) - target.domain(parent[-1]))
            inherited = dict(phi1[parent])
            parent_designated = sorted(target.domain(parent[-1]))[0]
        if len(fresh) < len(targets):
            raise ValueError(
                f"alphabet too small: {len(fresh)} fresh classes cannot"
                f" cover {len(targets)} new elements at {path!r}")
        assignment = dict(inherited)
        for i, cls in enumerate(fresh):
            assignment[cls] = targets[i] if i < len(targets) else parent_designated
        phi1[path] = assignment

    phi0 = KripkeMorphism(closed, frame, {p: p[-1] for p in closed.worlds},
                          interior=dense.interior_paths())
    morphism = PredKKMorphism(source, target, phi0, phi1)
    verdict = check_kk_morphism(morphism)
    if not verdict:
        raise AssertionError(f"psi construction failed its own check:"
                             f" {verdict.condition} {verdict.witness}")
    return morphism


def _tree_path(frame: KripkeFrame, w) -> tuple:
    """The unique rooted path to w; error if the frame is not a tree."""
    paths = [(frame.root,)]
    found = []
    seen = 0
    while paths and seen <= len(frame.worlds) + 2:
        nxt = []
        for p in paths:
            if p[-1] == w:
                found.append(p)
            for v in frame.successors(p[-1]):
                if v in p:
                    raise ValueError("frame is not a tree (cycle)")
                nxt.append(p + (v,))
        paths = nxt
        seen += 1
    if len(found) != 1:
        raise ValueError(f"frame is not a tree at {w!r}")
    return found[0]
