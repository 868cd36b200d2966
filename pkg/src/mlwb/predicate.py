"""Predicate semantics: expanding-domain Kripke frames, constant-domain
neighbourhood frames, and the two predicate p-morphism notions.

Evaluation is defined for closed formulas; constants name domain elements
directly.  Universal quantifiers range over the local domain on the Kripke
side and over the single constant domain on the neighbourhood side — the
asymmetry behind the Barcan formula's different status in the two semantics.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .kripke import EvaluationError, KripkeFrame, KripkeMorphism, Verdict, \
    check_pmorphism
from .neighbourhood import NFrame, NMorphism, check_n_pmorphism, nf_from_kripke
from .syntax import (
    Atom, Box, Const, Falsum, Forall, Implies, Formula, Var,
    constants, free_vars, parse_pred, substitute_constants,
    to_text, universal_closure,
)

PredFormula = Formula


# ---------------------------------------------------------------------------
# frames and models


@dataclass(frozen=True)
class PredKripkeFrame:
    frame: KripkeFrame
    domains: dict  # world -> frozenset of element names

    def __post_init__(self):
        object.__setattr__(self, "domains",
                           {w: frozenset(d) for w, d in self.domains.items()})
        if set(self.domains) != set(self.frame.worlds):
            raise ValueError("domains must cover exactly the worlds")
        for d in self.domains.values():
            if not d:
                raise ValueError("domains must be nonempty")
        for u, v in self.frame.relation:
            if not self.domains[u] <= self.domains[v]:
                raise ValueError(f"domains must expand along the relation:"
                                 f" D_{u!r} is not contained in D_{v!r}")

    def domain(self, w) -> frozenset:
        return self.domains[w]


@dataclass(frozen=True)
class PredKripkeModel:
    pframe: PredKripkeFrame
    valuation: dict  # predicate name -> world -> frozenset of tuples

    def __post_init__(self):
        for name, per_world in self.valuation.items():
            arities = {len(t) for rows in per_world.values() for t in rows}
            if len(arities) > 1:
                raise ValueError(f"inconsistent arity for {name!r}")
            for w, rows in per_world.items():
                dom = self.pframe.domain(w)
                for t in rows:
                    if not set(t) <= dom:
                        raise ValueError(
                            f"valuation of {name!r} at {w!r} uses elements"
                            f" outside the local domain: {t!r}")

    def holds(self, name: str, w, args: tuple) -> bool:
        if name not in self.valuation:
            raise EvaluationError(f"predicate {name!r} has no valuation entry")
        return args in self.valuation[name].get(w, frozenset())


@dataclass(frozen=True)
class PredNFrame:
    space: NFrame
    dstar: frozenset  # the constant domain

    def __post_init__(self):
        object.__setattr__(self, "dstar", frozenset(self.dstar))
        if not self.dstar:
            raise ValueError("constant domain must be nonempty")


@dataclass(frozen=True)
class PredNModel:
    pframe: PredNFrame
    valuation: dict  # predicate name -> point -> frozenset of tuples

    def __post_init__(self):
        for name, per_point in self.valuation.items():
            for x, rows in per_point.items():
                for t in rows:
                    if not set(t) <= self.pframe.dstar:
                        raise ValueError(
                            f"valuation of {name!r} at {x!r} leaves D*: {t!r}")

    def holds(self, name: str, x, args: tuple) -> bool:
        if name not in self.valuation:
            raise EvaluationError(f"predicate {name!r} has no valuation entry")
        return args in self.valuation[name].get(x, frozenset())


# ---------------------------------------------------------------------------
# evaluation


def _check_closed(a: PredFormula):
    fv = free_vars(a)
    if fv:
        raise EvaluationError(f"formula must be closed; free: {sorted(fv)}")


def eval_pred_kripke(model: PredKripkeModel, u, a: PredFormula) -> bool:
    _check_closed(a)
    missing = set(constants(a)) - model.pframe.domain(u)
    if missing:
        raise EvaluationError(
            f"constants {sorted(missing)} are not in the domain at {u!r}")
    return _ev_kripke(model, u, a)


def _ev_kripke(model: PredKripkeModel, u, a: PredFormula) -> bool:
    if isinstance(a, Falsum):
        return False
    if isinstance(a, Atom):
        args = []
        for arg in a.args:
            if not isinstance(arg, Const):
                raise EvaluationError(f"open atom {to_text(a)!r}")
            args.append(arg.value)
        return model.holds(a.name, u, tuple(args))
    if isinstance(a, Implies):
        return (not _ev_kripke(model, u, a.left)) or _ev_kripke(model, u, a.right)
    if isinstance(a, Box):
        if a.index != 1:
            raise EvaluationError("predicate evaluation is unimodal")
        return all(_ev_kripke(model, v, a.body)
                   for v in model.pframe.frame.successors(u))
    if isinstance(a, Forall):
        return all(_ev_kripke(model, u,
                              substitute_constants(a.body, {a.var: d}))
                   for d in sorted(model.pframe.domain(u)))
    raise EvaluationError(f"unsupported formula node {a!r}")


def eval_pred_nbhd(model: PredNModel, x, a: PredFormula) -> bool:
    _check_closed(a)
    missing = set(constants(a)) - model.pframe.dstar
    if missing:
        raise EvaluationError(f"constants {sorted(missing)} are not in D*")
    return _ev_nbhd(model, x, a)


def _ev_nbhd(model: PredNModel, x, a: PredFormula) -> bool:
    space = model.pframe.space
    if isinstance(a, Falsum):
        return False
    if isinstance(a, Atom):
        args = []
        for arg in a.args:
            if not isinstance(arg, Const):
                raise EvaluationError(f"open atom {to_text(a)!r}")
            args.append(arg.value)
        return model.holds(a.name, x, tuple(args))
    if isinstance(a, Implies):
        return (not _ev_nbhd(model, x, a.left)) or _ev_nbhd(model, x, a.right)
    if isinstance(a, Box):
        if a.index != 1:
            raise EvaluationError("predicate evaluation is unimodal")
        return any(all(_ev_nbhd(model, y, a.body) for y in u)
                   for u in space.base[x])
    if isinstance(a, Forall):
        return all(_ev_nbhd(model, x,
                            substitute_constants(a.body, {a.var: d}))
                   for d in sorted(model.pframe.dstar))
    raise EvaluationError(f"unsupported formula node {a!r}")


def barcan_formula(pred: str = "P") -> PredFormula:
    return parse_pred(f"forall x. box {pred}(x) -> box forall x. {pred}(x)")


def converse_barcan_formula(pred: str = "P") -> PredFormula:
    return parse_pred(f"box forall x. {pred}(x) -> forall x. box {pred}(x)")


# ---------------------------------------------------------------------------
# predicate p-morphisms


@dataclass(frozen=True)
class PredKKMorphism:
    """Kripke-to-Kripke: a frame p-morphism plus per-world surjections that
    agree along the relation."""

    source: PredKripkeFrame
    target: PredKripkeFrame
    phi0: KripkeMorphism
    phi1: dict  # world -> dict element -> element


def check_kk_morphism(m: PredKKMorphism) -> Verdict:
    base = check_pmorphism(m.phi0)
    if not base:
        return base
    for w in m.source.frame.worlds:
        fw = m.phi1.get(w)
        if fw is None:
            return Verdict(False, "missing-domain-map", (w,))
        dom, cod = m.source.domain(w), m.target.domain(m.phi0.map[w])
        if set(fw) != set(dom):
            return Verdict(False, "domain-map-not-total", (w,))
        image = set(fw.values())
        if not image <= cod:
            return Verdict(False, "domain-map-not-into", (w, sorted(image - cod)[0]))
        if image != set(cod):
            return Verdict(False, "domain-map-not-surjective",
                           (w, sorted(set(cod) - image)[0]))
    for u, v in m.source.frame.relation:
        for d in m.source.domain(u):
            if m.phi1[v][d] != m.phi1[u][d]:
                return Verdict(False, "domain-map-disagreement", (u, v, d))
    return Verdict(True)


@dataclass(frozen=True)
class PredNKMorphism:
    """Neighbourhood-to-Kripke: an n-frame p-morphism onto N(target frame)
    plus per-point surjections from the constant domain, locally stable."""

    space: NFrame
    target: PredKripkeFrame
    dstar: frozenset
    phi0: dict  # point -> world
    phi1: dict  # point -> dict element of D* -> element

    def __post_init__(self):
        object.__setattr__(self, "dstar", frozenset(self.dstar))


def check_nk_morphism(m: PredNKMorphism) -> Verdict:
    target_nf = nf_from_kripke(m.target.frame)
    base = check_n_pmorphism(NMorphism(m.space, target_nf, dict(m.phi0)))
    if not base:
        return base
    for x in m.space.points:
        fx = m.phi1.get(x)
        if fx is None:
            return Verdict(False, "missing-domain-map", (x,))
        if set(fx) != set(m.dstar):
            return Verdict(False, "domain-map-not-total", (x,))
        cod = m.target.domain(m.phi0[x])
        image = set(fx.values())
        if not image <= set(cod):
            return Verdict(False, "domain-map-not-into", (x,))
        if image != set(cod):
            return Verdict(False, "domain-map-not-surjective",
                           (x, sorted(set(cod) - image)[0]))
    for x in m.space.points:
        for d in m.dstar:
            if not any(all(m.phi1[y][d] == m.phi1[x][d] for y in u)
                       for u in m.space.base[x]):
                return Verdict(False, "domain-map-not-locally-stable", (x, d))
    return Verdict(True)


def pullback_kk(model: PredKripkeModel, m: PredKKMorphism) -> PredKripkeModel:
    """Pull a target valuation back along a KK morphism."""
    if model.pframe is not m.target and model.pframe != m.target:
        raise ValueError("valuation must live on the morphism's target")
    val = {}
    for name, per_world in model.valuation.items():
        arity = max((len(t) for rows in per_world.values() for t in rows),
                    default=0)
        out = {}
        for w in m.source.frame.worlds:
            rows = set()
            for t in _tuples(m.source.domain(w), arity):
                image = tuple(m.phi1[w][d] for d in t)
                if model.holds(name, m.phi0.map[w], image):
                    rows.add(t)
            out[w] = frozenset(rows)
        val[name] = out
    return PredKripkeModel(m.source, val)


def pullback_nk(model: PredKripkeModel, m: PredNKMorphism) -> PredNModel:
    if model.pframe is not m.target and model.pframe != m.target:
        raise ValueError("valuation must live on the morphism's target")
    val = {}
    for name, per_world in model.valuation.items():
        arity = max((len(t) for rows in per_world.values() for t in rows),
                    default=0)
        out = {}
        for x in m.space.points:
            rows = set()
            for t in _tuples(m.dstar, arity):
                image = tuple(m.phi1[x][d] for d in t)
                if model.holds(name, m.phi0[x], image):
                    rows.add(t)
            out[x] = frozenset(rows)
        val[name] = out
    return PredNModel(PredNFrame(m.space, m.dstar), val)


def _tuples(domain, arity):
    import itertools
    return itertools.product(sorted(domain), repeat=arity)


def compose_morphisms(nk: PredNKMorphism, kk: PredKKMorphism) -> PredNKMorphism:
    """eta_x(d) = psi_{1 phi0(x)}(phi1_x(d))."""
    if kk.source != nk.target and kk.source is not nk.target:
        raise ValueError("morphism codomain/domain mismatch")
    phi0 = {x: kk.phi0.map[nk.phi0[x]] for x in nk.space.points}
    phi1 = {x: {d: kk.phi1[nk.phi0[x]][nk.phi1[x][d]] for d in nk.dstar}
            for x in nk.space.points}
    return PredNKMorphism(nk.space, kk.target, nk.dstar, phi0, phi1)


# ---------------------------------------------------------------------------
# truth preservation


def random_pred_formula(rng: random.Random, preds: dict, depth: int = 2,
                        n_vars: int = 2) -> PredFormula:
    """Closed random formula of modal depth <= depth over the given
    predicate arities, <= n_vars quantified variables."""
    variables = [f"x{i}" for i in range(n_vars)]

    def build(d, scope, budget):
        options = ["atom"]
        if budget > 0:
            options.append("implies")
            if d > 0:
                options += ["box", "forall"]
        if scope:
            options.append("atom")
        kind = rng.choice(options)
        if kind == "atom":
            name = rng.choice(sorted(preds))
            if not scope and preds[name] > 0:
                return Falsum()
            args = tuple(Var(rng.choice(scope)) for _ in range(preds[name]))
            return Atom(name, args)
        if kind == "implies":
            return Implies(build(d, scope, budget - 1),
                           build(d, scope, budget - 1))
        if kind == "box":
            return Box(1, build(d - 1, scope, budget - 1))
        fresh = next((v for v in variables if v not in scope), None)
        if fresh is None:
            return build(d, scope, budget - 1)
        return Forall(fresh, build(d - 1, scope + [fresh], budget - 1))

    return universal_closure(build(depth, [], budget=6))


def pred_truth_preservation_test(m: PredNKMorphism, model: PredKripkeModel,
                                 samples: int = 200, seed: int = 0,
                                 extra_pool=()) -> dict:
    """Bidirectional truth preservation under the pulled-back valuation."""
    verdict = check_nk_morphism(m)
    if not verdict:
        raise ValueError(f"morphism fails: {verdict.condition} {verdict.witness}")
    theta = pullback_nk(model, m)
    preds = {name: max((len(t) for rows in per.values() for t in rows), default=0)
             for name, per in model.valuation.items()}
    rng = random.Random(seed)
    pool = list(extra_pool)
    while len(pool) < samples:
        pool.append(random_pred_formula(rng, preds))
    points = sorted(m.space.points, key=repr)
    checked = mismatches = 0
    failures = []
    for a in pool[:max(samples, len(extra_pool))]:
        x = rng.choice(points)
        left = eval_pred_nbhd(theta, x, a)
        right = eval_pred_kripke(model, m.phi0[x], a)
        checked += 1
        if left != right:
            mismatches += 1
            if len(failures) < 5:
                failures.append((to_text(a), x))
    return {"checked": checked, "mismatches": mismatches,
            "failures": failures, "ok": checked > 0 and mismatches == 0}


# ---------------------------------------------------------------------------
# text formats


def parse_domains(text: str, frame: KripkeFrame) -> PredKripkeFrame:
    """Lines ``domain w = {d1,d2}``."""
    domains = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("domain "):
            raise ValueError(f"line {lineno}: expected 'domain w = {{...}}'")
        head, _, rhs = line[len("domain "):].partition("=")
        w = head.strip()
        if w in domains:
            raise ValueError(f"line {lineno}: duplicate domain for {w!r}")
        domains[w] = frozenset(_parse_set(rhs.strip(), lineno))
    return PredKripkeFrame(frame, domains)


def parse_pred_valuation(text: str, pframe: PredKripkeFrame) -> PredKripkeModel:
    """Lines ``val P @ w = {(d1),(d1,d2)}`` (0-ary: ``{()}`` or ``{}``)."""
    val = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("val "):
            raise ValueError(f"line {lineno}: expected 'val P @ w = {{...}}'")
        head, _, rhs = line[len("val "):].partition("=")
        name, _, world = head.partition("@")
        name, world = name.strip(), world.strip()
        if not name or not world:
            raise ValueError(f"line {lineno}: expected 'val P @ w = {{...}}'")
        rows = _parse_tuples(rhs.strip(), lineno)
        val.setdefault(name, {})[world] = frozenset(rows)
    return PredKripkeModel(pframe, val)


def parse_constdomain(text: str) -> frozenset:
    """A single line ``constdomain = {d1,d2}``."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("constdomain"):
            raise ValueError(f"line {lineno}: expected 'constdomain = {{...}}'")
        _, _, rhs = line.partition("=")
        return frozenset(_parse_set(rhs.strip(), lineno))
    raise ValueError("missing 'constdomain = {...}' line")


def _parse_set(text: str, lineno: int):
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"line {lineno}: expected a {{...}} set")
    inner = text[1:-1].strip()
    if not inner:
        return []
    return [part.strip() for part in inner.split(",")]


def _parse_tuples(text: str, lineno: int):
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"line {lineno}: expected a {{...}} set of tuples")
    inner = text[1:-1].strip()
    rows = []
    while inner:
        if not inner.startswith("("):
            raise ValueError(f"line {lineno}: expected '(' in tuple set")
        close = inner.index(")")
        body = inner[1:close].strip()
        rows.append(tuple(p.strip() for p in body.split(",")) if body else ())
        inner = inner[close + 1:].lstrip().lstrip(",").lstrip()
    return rows
