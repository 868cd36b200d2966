"""Pseudo-infinite paths with stops and the dense neighbourhood frame.

A point of the dense frame over a rooted finite frame F is an eventually-zero
infinite word over W + {0}; it is stored canonically as the finite prefix with
trailing zeros stripped (a *stop word*).  The filter base at a point is the
antitone family U_k; since the intersection of the U_k is empty, no point has
a minimal neighbourhood.

Because the frame is infinite, evaluation is bounded and three-valued: every
verdict says whether it is *certified* (exact, backed by tail classifiers or
vacuity) or merely the best answer within the (k_max, j_max) budget.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Optional

from .horn import HornTheory, chain_axiom_powers, gamma_close
from .kripke import (
    STOP, BudgetExceeded, EvaluationError, KripkeFrame, Verdict,
    brute_validity, check_axiom_inclusion, unravel,
)
from .syntax import Box, Falsum, Formula, Implies, Letter, modal_depth


# ---------------------------------------------------------------------------
# stop words


def canonical(letters) -> tuple:
    """Strip trailing stop symbols."""
    word = tuple(letters)
    while word and word[-1] == STOP:
        word = word[:-1]
    return word


def dropped(word) -> tuple:
    return tuple(a for a in word if a != STOP)


def st(word) -> int:
    """Index of the last non-stop letter of the denoted infinite word."""
    return len(canonical(word))


def restrict(word, k: int) -> tuple:
    """First k letters of the infinite word (zero-padded beyond st)."""
    word = tuple(word)
    if k <= len(word):
        return word[:k]
    return word + (STOP,) * (k - len(word))


def validate_stopword(word, frame: KripkeFrame) -> Verdict:
    """A word is a path with stops iff its zero-dropped form is a chain of
    R-successors starting from a successor of the root."""
    if not frame.is_rooted():
        return Verdict(False, "frame-not-rooted")
    word = tuple(word)
    for a in word:
        if a != STOP and a not in frame.worlds:
            return Verdict(False, "unknown-letter", (a,))
    chain = (frame.root,) + dropped(word)
    for u, v in zip(chain, chain[1:]):
        if (u, v) not in frame.relation:
            return Verdict(False, "broken-chain", (u, v))
    return Verdict(True)


def f0(word, frame: KripkeFrame) -> tuple:
    """Root followed by the zero-dropped letters (a rooted path)."""
    verdict = validate_stopword(word, frame)
    if not verdict:
        raise EvaluationError(f"invalid path with stops: {verdict.condition}"
                              f" {verdict.witness}")
    return (frame.root,) + dropped(word)


def enumerate_paths_with_stops(frame: KripkeFrame, max_len: int) -> list:
    """All finite paths with stops of length <= max_len (raw words; trailing
    zeros allowed, so this is the paper's finite-word notion)."""
    out = [()]
    frontier = [()]
    for _ in range(max_len):
        new = []
        for word in frontier:
            endpoint = ((frame.root,) + dropped(word))[-1]
            steps = [STOP] + sorted(frame.successors(endpoint), key=repr)
            for a in steps:
                new.append(word + (a,))
        out.extend(new)
        frontier = new
    return out


def enumerate_canonical(frame: KripkeFrame, max_len: int) -> list:
    """All canonical stop words of length <= max_len."""
    return [w for w in enumerate_paths_with_stops(frame, max_len)
            if not w or w[-1] != STOP]


def parse_stopword(text: str) -> tuple:
    """Dot-separated letters, ``0`` for stops: ``a.0.b`` (trailing 0^w implicit)."""
    text = text.strip()
    if not text or text == "eps":
        return ()
    return canonical(text.split("."))


def format_stopword(word) -> str:
    if not word:
        return "eps"
    return ".".join(word)


def format_compact(word) -> str:
    """Single-character rendering like ``00b`` (used in reports)."""
    return "".join(word) if word else "eps"


# ---------------------------------------------------------------------------
# the dense frame


@dataclass(frozen=True)
class DenseFrame:
    """Bounded description of N_omega(F), optionally Gamma-relativized.

    The Gamma-closure of the unravelling is realized on the depth-truncated
    unravelling; Gamma must consist of chain sentences (axiom_to_horn
    instances), for which closure edges depend only on ancestor chains
    already present in the truncation.
    """

    frame: KripkeFrame
    gamma: Optional[HornTheory] = None
    depth: int = 6
    k_max: int = 12
    j_max: int = 8
    _closed: KripkeFrame = field(init=False, repr=False, compare=False)
    _interior: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.frame.is_rooted():
            raise ValueError("base frame must be rooted")
        unr = unravel(self.frame, self.depth)
        closed = unr.frame
        if self.gamma is not None and self.gamma.sentences:
            if chain_axiom_powers(self.gamma) is None:
                raise ValueError("Gamma must consist of chain sentences")
            closed = gamma_close(unr.frame, self.gamma)
        object.__setattr__(self, "_closed", closed)
        object.__setattr__(self, "_interior", unr.interior)

    def closed_unravelling(self) -> KripkeFrame:
        return self._closed

    def interior_paths(self) -> frozenset:
        return self._interior

    def extensions(self, path: tuple) -> list:
        """Extension suffixes ext with path -> path+ext one closed step away
        (ext = () on a reflexive closed edge)."""
        if path not in self._closed.worlds:
            raise BudgetExceeded(
                f"path of length {len(path)} beyond truncation depth {self.depth}")
        if path not in self._interior:
            raise BudgetExceeded(
                f"path {path!r} is a frontier path; raise the depth bound")
        out = []
        for q in sorted(self._closed.successors(path), key=repr):
            if q == path:
                out.append(())
            elif q[:len(path)] == path:
                out.append(q[len(path):])
        return out


@dataclass(frozen=True)
class DenseMorphismReport:
    ok: bool
    detail: dict


# ---------------------------------------------------------------------------
# U_k membership and enumeration


def is_member_uk(beta, alpha, k: int, df: DenseFrame) -> bool:
    """Direct check: shared prefix at m = max(k, st(alpha)) and a single
    (closed) relation step between the f0 images."""
    frame = df.frame
    m = max(k, st(alpha))
    if restrict(beta, m) != restrict(alpha, m):
        return False
    pa, pb = f0(alpha, frame), f0(beta, frame)
    closed = df.closed_unravelling()
    if pa not in closed.worlds or pb not in closed.worlds:
        raise BudgetExceeded("path beyond truncation depth")
    return (pa, pb) in closed.relation


def uk_members(alpha, k: int, df: DenseFrame):
    """Enumerated members of U_k(alpha) plus their tail families.

    Members come from the closed extensions of f0(alpha); zero paddings are
    enumerated up to j_max per gap.  Returns (members, families) where each
    family is (prefix, ext) describing { prefix . 0^j1 c1 ... 0^jr cr . 0^w }.
    """
    m = max(k, st(alpha))
    pre = restrict(alpha, m)
    members = []
    families = []
    for ext in df.extensions(f0(alpha, df.frame)):
        if ext == ():
            members.append(canonical(alpha))
            continue
        families.append((pre, ext))
        for js in itertools.product(range(df.j_max + 1), repeat=len(ext)):
            word = list(pre)
            for j, c in zip(js, ext):
                word.extend([STOP] * j)
                word.append(c)
            members.append(canonical(word))
    return members, families


def density_witness(alpha, n: int, beta, df: DenseFrame) -> int:
    """For beta in U_n(alpha), a k with beta not in U_{k+1}(alpha)."""
    if not is_member_uk(beta, alpha, n, df):
        raise ValueError("beta is not a member of U_n(alpha)")
    k = st(beta)
    if is_member_uk(beta, alpha, k + 1, df):
        raise AssertionError("density exclusion failed")  # pragma: no cover
    return k


# ---------------------------------------------------------------------------
# pattern valuations and tail classifiers


@dataclass(frozen=True)
class FiniteSetVal:
    words: frozenset  # of canonical stop words

    def member(self, word) -> bool:
        return canonical(word) in self.words

    def max_len(self) -> int:
        return max((len(w) for w in self.words), default=0)


@dataclass(frozen=True)
class ParityVal:
    """True exactly on words of shape 0^i L with i = parity (mod 2)."""

    letter: str
    parity: int  # 0 = even, 1 = odd

    def member(self, word) -> bool:
        w = canonical(word)
        return (len(w) >= 1 and w[-1] == self.letter
                and all(a == STOP for a in w[:-1])
                and (len(w) - 1) % 2 == self.parity)

    def max_len(self) -> int:
        return 0


@dataclass(frozen=True)
class PathVal:
    """Membership factors through f0."""

    paths: frozenset  # of rooted path tuples
    frame: KripkeFrame

    def member(self, word) -> bool:
        return f0(word, self.frame) in self.paths

    def max_len(self) -> int:
        return 0


@dataclass(frozen=True)
class TailFn:
    """Truth of a tail family as a function of the padding j.

    Exceptional values for j < len(exc); beyond that the value depends only
    on the parity of j.
    """

    exc: tuple
    even: bool
    odd: bool

    def value(self, j: int) -> bool:
        if j < len(self.exc):
            return self.exc[j]
        return self.even if j % 2 == 0 else self.odd

    def all_true(self) -> bool:
        return self.even and self.odd and all(self.exc)

    def first_false(self) -> Optional[int]:
        for j, v in enumerate(self.exc):
            if not v:
                return j
        if not self.even:
            return len(self.exc) + (len(self.exc) % 2)
        if not self.odd:
            j = len(self.exc)
            return j if j % 2 == 1 else j + 1
        return None

    def kind(self) -> str:
        if self.even and self.odd and all(self.exc):
            return "constantly-true"
        if not self.even and not self.odd:
            if not any(self.exc):
                return "constantly-false"
            return f"false-beyond-threshold({len(self.exc)})"
        if self.even != self.odd:
            base = "true-iff-j-even" if self.even else "true-iff-j-odd"
            return base if not self.exc else f"{base}-after({len(self.exc)})"
        return "constantly-true" if self.even else "constantly-false"

    @staticmethod
    def const(v: bool) -> "TailFn":
        return TailFn((), v, v)

    def combine(self, other: "TailFn", op) -> "TailFn":
        t = max(len(self.exc), len(other.exc))
        # keep one extra pair so parity values line up past both thresholds
        exc = tuple(op(self.value(j), other.value(j)) for j in range(t))
        even = op(self.value(t if t % 2 == 0 else t + 1),
                  other.value(t if t % 2 == 0 else t + 1))
        odd = op(self.value(t + 1 if t % 2 == 0 else t),
                 other.value(t + 1 if t % 2 == 0 else t))
        return TailFn(exc, even, odd)


def classify_letter(val, pre: tuple, b: str) -> TailFn:
    """Tail classifier of a valuation entry on the family pre . 0^j . b . 0^w."""
    m = len(pre)
    if isinstance(val, FiniteSetVal):
        js = [j for j in range(val.max_len() + 1)
              if canonical(pre + (STOP,) * j + (b,)) in val.words]
        t = max(js) + 1 if js else 0
        return TailFn(tuple(j in js for j in range(t)), False, False)
    if isinstance(val, ParityVal):
        if b != val.letter or any(a != STOP for a in pre):
            return TailFn.const(False)
        return TailFn((), (m % 2) == val.parity, ((m + 1) % 2) == val.parity)
    if isinstance(val, PathVal):
        return TailFn.const(val.member(pre + (b,)))
    raise EvaluationError(f"unclassifiable valuation {val!r}")


def classify_formula(valuation: dict, a: Formula, pre: tuple, b: str) -> TailFn:
    """Exact tail truth of a modal-depth-0 formula on a tail family."""
    if isinstance(a, Falsum):
        return TailFn.const(False)
    if isinstance(a, Letter):
        if a.name not in valuation:
            raise EvaluationError(f"letter {a.name!r} has no valuation entry")
        return classify_letter(valuation[a.name], pre, b)
    if isinstance(a, Implies):
        left = classify_formula(valuation, a.left, pre, b)
        right = classify_formula(valuation, a.right, pre, b)
        return left.combine(right, lambda l, r: (not l) or r)
    raise EvaluationError(f"cannot classify formula of modal depth > 0: {a!r}")


# ---------------------------------------------------------------------------
# bounded three-valued evaluation


@dataclass(frozen=True)
class EvalVerdict:
    value: Optional[bool]
    certified: bool
    witness: Optional[tuple] = None

    def known(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class DenseModel:
    dense: DenseFrame
    valuation: dict  # letter name -> pattern valuation

    def member(self, name: str, word) -> bool:
        if name not in self.valuation:
            raise EvaluationError(f"letter {name!r} has no valuation entry")
        return self.valuation[name].member(word)

    def stability_bound(self, alpha) -> int:
        """m beyond which every letter's tail classifier depends only on the
        parity of the prefix length."""
        longest = max((v.max_len() for v in self.valuation.values()), default=0)
        return max(st(alpha), longest) + 1


def bounded_eval(model: DenseModel, alpha, a: Formula) -> EvalVerdict:
    alpha = canonical(alpha)
    verdict = validate_stopword(alpha, model.dense.frame)
    if not verdict:
        raise EvaluationError(f"invalid point: {verdict.condition}")
    return _eval(model, alpha, a)


def _eval(model: DenseModel, alpha, a: Formula) -> EvalVerdict:
    if isinstance(a, Falsum):
        return EvalVerdict(False, True)
    if isinstance(a, Letter):
        return EvalVerdict(model.member(a.name, alpha), True)
    if isinstance(a, Implies):
        left = _eval(model, alpha, a.left)
        right = _eval(model, alpha, a.right)
        if left.certified and left.value is False:
            return EvalVerdict(True, True)
        if right.certified and right.value is True:
            return EvalVerdict(True, True)
        if left.certified and right.certified:
            return EvalVerdict((not left.value) or right.value, True)
        lv = left.value if left.value is not None else True
        rv = right.value if right.value is not None else False
        return EvalVerdict((not lv) or rv, False)
    if isinstance(a, Box):
        if a.index != 1:
            raise EvaluationError("dense evaluation supports one modality")
        return _eval_box(model, alpha, a.body)
    raise EvaluationError(f"not a propositional formula: {a!r}")


def _eval_box(model: DenseModel, alpha, body: Formula) -> EvalVerdict:
    df = model.dense
    exts = df.extensions(f0(alpha, df.frame))
    if not exts:
        return EvalVerdict(True, True, ("vacuous", None))

    exact = (modal_depth(body) == 0
             and all(len(ext) <= 1 for ext in exts))
    m_stable = model.stability_bound(alpha)
    falsifiers = {}
    for k in range(df.k_max + 1):
        m = max(k, st(alpha))
        pre = restrict(alpha, m)
        if exact:
            fals = None
            for ext in exts:
                if ext == ():
                    self_v = _eval(model, alpha, body)
                    if self_v.value is False:
                        fals = ("self", alpha)
                        break
                    continue
                tf = classify_formula(model.valuation, body, pre, ext[0])
                if not tf.all_true():
                    fals = (ext[0], tf.first_false(), tf.kind())
                    break
            if fals is None:
                return EvalVerdict(True, True, ("box-witness-k", k))
            falsifiers[k] = fals
        else:
            members, _ = uk_members(alpha, k, df)
            sub = [(beta, _eval(model, beta, body)) for beta in members]
            bad = [(beta, v) for beta, v in sub if v.value is False]
            if not bad:
                return EvalVerdict(True, False, ("box-sampled-k", k))
            falsifiers[k] = bad[0][0]
    if exact and df.k_max >= m_stable + 1:
        return EvalVerdict(False, True, ("box-falsifiers", tuple(sorted(falsifiers))))
    return EvalVerdict(False, False, ("box-falsifiers", tuple(sorted(falsifiers))))


# ---------------------------------------------------------------------------
# the paper's counterexample frame


def next_frame(length: int) -> KripkeFrame:
    """Truncation of the natural numbers with the "next" relation; the root
    is ``r`` and successive worlds are named "1", "2", ..."""
    worlds = ["r"] + [str(i) for i in range(1, length + 1)]
    rel = [(worlds[i], worlds[i + 1]) for i in range(length)]
    return KripkeFrame.make(worlds, rel, root="r")


def counterexample_g(k_max: int = 10) -> dict:
    """Certified failure of ``dia p -> box p`` on the dense frame over the
    next-relation chain, against its Kripke-side validity."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    frame = next_frame(k_max + 3)
    df = DenseFrame(frame, depth=3, k_max=k_max + 2, j_max=4)
    parity = ParityVal("1", 0)
    model = DenseModel(df, {"p": parity})
    p = Letter("p")
    notp = Implies(p, Falsum())
    dia_p = Implies(Box(1, notp), Falsum())
    dia_notp = Implies(Box(1, p), Falsum())
    alpha = ()
    v_dia_p = bounded_eval(model, alpha, dia_p)
    v_dia_notp = bounded_eval(model, alpha, dia_notp)
    v_box_p = bounded_eval(model, alpha, Box(1, p))
    witnesses = {}
    for k in range(k_max + 1):
        true_word = (STOP,) * k + ("1",) if k % 2 == 0 else (STOP,) * (k + 1) + ("1",)
        false_word = (STOP,) * (k + 1) + ("1",) if k % 2 == 0 else (STOP,) * k + ("1",)
        assert is_member_uk(canonical(true_word), alpha, k, df)
        assert is_member_uk(canonical(false_word), alpha, k, df)
        assert parity.member(true_word) and not parity.member(false_word)
        witnesses[k] = (format_compact(canonical(true_word)),
                        format_compact(canonical(false_word)))
    # dia p -> box p is a depth-one scheme: it is frame-valid exactly when
    # no world has two distinct successors, which holds per construction;
    # brute-force validity cross-checks the equivalence on a small instance
    axiom = Implies(dia_p_formula(), Box(1, p))
    functional = all(
        sum(1 for (u, v) in frame.relation if u == w) <= 1
        for w in frame.worlds)
    small = next_frame(4)
    kripke_valid = functional and brute_validity(small, axiom)
    certified = (v_dia_p.certified and v_dia_p.value is True
                 and v_dia_notp.certified and v_dia_notp.value is True
                 and v_box_p.certified and v_box_p.value is False)
    return {
        "ok": certified and kripke_valid,
        "dia_p": v_dia_p,
        "dia_not_p": v_dia_notp,
        "box_p": v_box_p,
        "witnesses": witnesses,
        "kripke_validates_dia_p_implies_box_p": kripke_valid,
    }


def dia_p_formula() -> Formula:
    return Implies(Box(1, Implies(Letter("p"), Falsum())), Falsum())


# ---------------------------------------------------------------------------
# lemma checks


def f0_image_check(alpha, k: int, df: DenseFrame) -> Verdict:
    """f0(U_k(alpha)) equals the closed-successor set of f0(alpha)."""
    frame = df.frame
    pa = f0(alpha, frame)
    closed = df.closed_unravelling()
    rhs = set(closed.successors(pa))
    members, families = uk_members(alpha, k, df)
    lhs = {f0(beta, frame) for beta in members}
    # one witness per extension suffices for the "contains" direction
    for ext in df.extensions(pa):
        target = pa + ext
        if target not in lhs:
            return Verdict(False, "image-misses-successor", (alpha, k, target))
    if not lhs <= rhs:
        return Verdict(False, "image-outside-successors",
                       (alpha, k, sorted(lhs - rhs)[0]))
    # f0 is constant on each tail family, so the j <= j_max enumeration is
    # exhaustive for the image computation
    for pre, ext in families:
        images = {f0(canonical(pre + (STOP,) * j + tuple(ext)), frame)
                  for j in range(df.j_max + 1)}
        if len(images) != 1:
            return Verdict(False, "f0-not-j-independent", (alpha, k, ext))
    return Verdict(True)


def f0_pmorphism_check(df: DenseFrame, n_samples: int = 50,
                       seed: int = 0, k_values=(0, 1, 2, 3)) -> DenseMorphismReport:
    """Sampled zig/zag of f0 against the principal bases of N(unravelling)."""
    frame = df.frame
    rng = random.Random(seed)
    # surjectivity onto interior paths is constructive: the letters of a path
    # form a valid stop word mapping back onto it
    for path in sorted(df.interior_paths(), key=repr):
        word = canonical(path[1:])
        if f0(word, frame) != path:
            return DenseMorphismReport(False, {"stage": "surjectivity",
                                               "path": path})
    candidates = [w for w in enumerate_canonical(frame, df.depth - 2)
                  if f0(w, frame) in df.interior_paths()]
    sample = candidates if len(candidates) <= n_samples else \
        rng.sample(candidates, n_samples)
    checked = 0
    for alpha in sample:
        for k in k_values:
            try:
                verdict = f0_image_check(alpha, k, df)
            except BudgetExceeded:
                continue
            if not verdict:
                return DenseMorphismReport(False, {
                    "stage": "zig-zag", "alpha": alpha, "k": k,
                    "condition": verdict.condition, "witness": verdict.witness})
            checked += 1
    return DenseMorphismReport(True, {"sampled_points": len(sample),
                                      "image_checks": checked})


def chain_collapse_check(df: DenseFrame, n: int, m: int,
                         samples: int = 100, seed: int = 0) -> dict:
    """Collapse step of the box-to-box^n preservation proof: an n-chain of
    U^Gamma_m steps stays inside U^Gamma_m of the start."""
    if df.gamma is None:
        raise ValueError("chain collapse needs a Gamma-relativized frame")
    closed = df.closed_unravelling()
    safe = frozenset(p for p in df.interior_paths()
                     if len(p) + n < df.depth)
    sub_worlds = frozenset(p for p in closed.worlds if len(p) <= df.depth - 1)
    # precondition: the closed truncated unravelling validates R^n <= R on
    # chains that stay inside the truncation
    rel = frozenset((u, v) for u, v in closed.relation
                    if u in sub_worlds and v in sub_worlds)
    cur = frozenset((w, w) for w in sub_worlds)
    for _ in range(n):
        cur = frozenset((u, w) for u, v in cur for u2, w in rel if u2 == v)
    for u, v in cur:
        if u in safe and (u, v) not in rel:
            raise ValueError(f"precondition failed: closed unravelling lacks"
                             f" R^{n} edge {(u, v)!r}")
    rng = random.Random(seed)
    starts = [w for w in enumerate_canonical(df.frame, max(1, df.depth - n - 2))
              if f0(w, df.frame) in safe]
    passed = tried = 0
    failures = []
    for _ in range(samples):
        alpha = rng.choice(starts)
        chain = [alpha]
        ok = True
        try:
            for _ in range(n):
                members, _ = uk_members(chain[-1], m, df)
                members = [b for b in members if b != chain[-1]]
                if not members:
                    ok = False
                    break
                chain.append(rng.choice(members))
            if not ok:
                continue
            result = is_member_uk(chain[-1], alpha, m, df)
        except BudgetExceeded:
            continue
        tried += 1
        if result:
            passed += 1
        elif len(failures) < 5:
            failures.append(tuple(chain))
    return {"tried": tried, "passed": passed, "failures": failures,
            "ok": tried > 0 and passed == tried}
