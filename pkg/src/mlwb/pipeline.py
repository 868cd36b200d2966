"""End-to-end desk-scale pipeline: from a refuting expanding-domain Kripke
countermodel to a certified refutation on the constant-domain dense side.

Stages: validate the scenario, build the (Gamma-closed) truncated
unravelling with its D-sharp domains, construct psi, verify the (f0, xi)
morphism, compose, pull the valuation back, and re-evaluate the target
formula at the all-stops point of the dense frame.

Dense-side predicate evaluation works directly on pseudo-infinite paths.
The domain maps are local: on a deep enough neighbourhood of a point the
image of any fixed constant stabilises, so the box quantifier is decided on
a stabilised neighbourhood with the zero paddings enumerated as a robustness
window, and the universal quantifier runs over a profile-complete finite
family of constant-domain stop words (zero runs capped by the relevant
positions, plus overflow words for the classes beyond the truncated
domains).  Verdicts carry a certified flag; it drops only when a box hits
the truncation frontier or a padding window fails to stabilise.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Optional

import itertools

from .dense import DenseFrame, STOP, canonical, enumerate_canonical, f0, \
    restrict, st, uk_members
from .entangle import EntangleSpace, build_psi, xi, xi_locality_check, \
    xi_surjectivity_check
from .horn import HornTheory, chain_axiom_powers, eval_horn, parse_horn_theory
from .kripke import BudgetExceeded, EvaluationError, check_axiom_inclusion, \
    parse_frame
from .predicate import PredKripkeFrame, PredKripkeModel, eval_pred_kripke, \
    parse_domains, parse_pred_valuation
from .syntax import Atom, Box, Const, Falsum, Forall, Implies, modal_depth, \
    parse_pred, to_text, universal_closure


@dataclass(frozen=True)
class Scenario:
    name: str
    pframe: PredKripkeFrame
    model: PredKripkeModel
    formula: object
    gamma: Optional[HornTheory]
    depth: int = 5
    k_max: int = 8
    j_max: int = 4
    max_sigma: int = 2
    sigma2: tuple = ("1", "2")
    seed: int = 0


@dataclass
class Stage:
    name: str
    ok: bool
    detail: dict
    seconds: float


@dataclass
class PipelineReport:
    scenario: str
    seed: int
    stages: list = field(default_factory=list)
    dense_value: Optional[bool] = None
    dense_certified: bool = False
    kripke_value: Optional[bool] = None
    ok: bool = False


# ---------------------------------------------------------------------------
# scenario files


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    sections = _split_sections(text)
    for required in ("frame", "domains", "valuation", "formula"):
        if required not in sections:
            raise ValueError(f"missing [{required}] section")
    frame = parse_frame(sections["frame"])
    pframe = parse_domains(sections["domains"], frame)
    model = parse_pred_valuation(sections["valuation"], pframe)
    formula_lines = [l for l in sections["formula"].splitlines()
                     if l.split("#", 1)[0].strip()]
    if len(formula_lines) != 1:
        raise ValueError("[formula] must contain exactly one formula")
    formula = universal_closure(parse_pred(formula_lines[0].split("#", 1)[0]))
    gamma = None
    if sections.get("horn", "").strip():
        gamma = parse_horn_theory(sections["horn"])
    bounds = {"depth": 5, "k_max": 8, "j_max": 4, "max_sigma": 2, "seed": 0}
    sigma2 = ("1", "2")
    for lineno, raw in enumerate(sections.get("bounds", "").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "dalphabet":
            if not (value.startswith("{") and value.endswith("}")):
                raise ValueError(f"bounds line {lineno}: dalphabet = {{...}}")
            sigma2 = tuple(s.strip() for s in value[1:-1].split(","))
        elif key in bounds:
            bounds[key] = int(value)
        else:
            raise ValueError(f"bounds line {lineno}: unknown key {key!r}")
    return Scenario(name, pframe, model, formula, gamma,
                    sigma2=sigma2, **bounds)


def _split_sections(text: str) -> dict:
    sections = {}
    current = None
    for raw in text.splitlines():
        stripped = raw.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if current in sections:
                raise ValueError(f"duplicate section [{current}]")
            sections[current] = []
            continue
        if current is not None:
            sections[current].append(raw)
        elif stripped and not stripped.startswith("#"):
            raise ValueError(f"content before first section: {stripped!r}")
    return {k: "\n".join(v) for k, v in sections.items()}


# ---------------------------------------------------------------------------
# the constant domain


def enumerate_dstar(sigma2, max_sigma: int, gap_max: int) -> list:
    """Canonical domain stop words with at most max_sigma letters and zero
    runs capped at gap_max.  Longer runs produce the same domain maps at
    every truncated path, so this family is profile-complete."""
    out = [()]
    frontier = [()]
    for _ in range(max_sigma):
        new = []
        for word in frontier:
            for gap in range(gap_max + 1):
                for s in sigma2:
                    new.append(word + (STOP,) * gap + (s,))
        out.extend(new)
        frontier = new
    return out


# ---------------------------------------------------------------------------
# pipeline


def run_pipeline(s: Scenario) -> PipelineReport:
    report = PipelineReport(scenario=s.name, seed=s.seed)
    rng = random.Random(s.seed)

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            detail = fn()
            ok = detail.pop("ok", True)
        except (ValueError, EvaluationError, BudgetExceeded, AssertionError) as e:
            detail = {"error": str(e)}
            ok = False
        report.stages.append(Stage(name, ok, detail, time.perf_counter() - t0))
        return ok

    frame = s.pframe.frame
    ctx = {}

    def validate():
        detail = {}
        if s.gamma is not None:
            valid = all(eval_horn(frame, sent) for sent in s.gamma)
            detail["gamma_valid"] = valid
            powers = chain_axiom_powers(s.gamma)
            if powers is None:
                raise ValueError("Gamma must consist of chain sentences")
            for k in powers:
                if k >= 2 and not check_axiom_inclusion(frame, k):
                    raise ValueError(f"frame does not validate R^{k} <= R")
            if not valid:
                raise ValueError("the scenario frame violates Gamma")
        root_value = eval_pred_kripke(s.model, frame.root, s.formula)
        detail["formula"] = to_text(s.formula)
        detail["kripke_root_value"] = root_value
        report.kripke_value = root_value
        return detail

    def build_dense():
        df = DenseFrame(frame, gamma=s.gamma, depth=s.depth,
                        k_max=s.k_max, j_max=s.j_max)
        ctx["df"] = df
        closed = df.closed_unravelling()
        tree_edges = sum(1 for p, q in closed.relation
                         if len(q) == len(p) + 1 and q[:len(p)] == p)
        return {"paths": len(closed.worlds),
                "closure_edges": len(closed.relation) - tree_edges,
                "interior": len(df.interior_paths())}

    def psi_stage():
        space = EntangleSpace(frame, s.sigma2)
        ctx["space"] = space
        psi = build_psi(space, s.pframe, max_sigma=s.max_sigma, dense=ctx["df"])
        ctx["psi"] = psi
        return {"source_paths": len(psi.source.frame.worlds),
                "classes_at_root": len(psi.source.domain((frame.root,)))}

    def f0_xi_stage():
        from .dense import f0_pmorphism_check
        df, space = ctx["df"], ctx["space"]
        rep = f0_pmorphism_check(df, n_samples=20, seed=s.seed)
        if not rep.ok:
            return {"ok": False, **rep.detail}
        alphas = _sample_points(df, rng, 6)
        surj_checked = loc_checked = 0
        for alpha in alphas:
            out = xi_surjectivity_check(space, alpha, s.max_sigma)
            if not out["ok"]:
                return {"ok": False, "stage": "xi-surjectivity",
                        "alpha": alpha, "missed": out["missed"][:3]}
            surj_checked += out["classes"]
            for gamma in [(), (s.sigma2[0],), (STOP, s.sigma2[-1])]:
                loc = xi_locality_check(space, df, alpha, gamma)
                if not loc["ok"]:
                    return {"ok": False, "stage": "xi-locality",
                            "alpha": alpha, "gamma": gamma,
                            "mismatches": loc["mismatches"][:3]}
                loc_checked += loc["members"]
        return {"f0_zigzag": rep.detail, "xi_classes_checked": surj_checked,
                "xi_locality_members": loc_checked}

    def composition_stage():
        df, space, psi = ctx["df"], ctx["space"], ctx["psi"]
        dstar = enumerate_dstar(s.sigma2, s.max_sigma, s.depth)
        ctx["dstar"] = dstar
        eta = make_eta(space, psi, s.pframe)
        ctx["eta"] = eta
        surj_fail = loc_fail = None
        loc_gammas = [(), (s.sigma2[0],), (STOP, s.sigma2[-1]),
                      (s.sigma2[0], STOP, STOP, s.sigma2[-1])]
        for alpha in _sample_points(df, rng, 6):
            want = set(s.pframe.domain(f0(alpha, frame)[-1]))
            got = {eta(alpha, g) for g in dstar}
            if got != want:
                surj_fail = (alpha, sorted(want - got))
                break
            for gamma in loc_gammas:
                m = st(gamma) + st(alpha)
                members, _ = uk_members(alpha, m, df)
                for beta in members:
                    if eta(beta, gamma) != eta(alpha, gamma):
                        loc_fail = (alpha, beta, gamma)
                        break
        return {"ok": surj_fail is None and loc_fail is None,
                "eta_surjectivity_failure": surj_fail,
                "eta_locality_failure": loc_fail,
                "dstar_size": len(dstar)}

    def evaluation_stage():
        ev = DenseEvaluator(ctx["df"], ctx["space"], ctx["eta"], s.model,
                            s.sigma2, s.max_sigma, gamma=s.gamma)
        value, certified = ev.eval((), s.formula, {})
        report.dense_value = value
        report.dense_certified = certified
        matches = certified and value == report.kripke_value
        return {"ok": matches, "dense_value": value,
                "certified": certified,
                "point": "eps (the all-stops point over the root)"}

    ok = stage("scenario-validation", validate)
    ok = ok and stage("unravelling-and-closure", build_dense)
    ok = ok and stage("psi-morphism", psi_stage)
    ok = ok and stage("f0-xi-morphism", f0_xi_stage)
    ok = ok and stage("composition", composition_stage)
    ok = ok and stage("pullback-evaluation", evaluation_stage)
    report.ok = ok
    return report


def _sample_points(df: DenseFrame, rng: random.Random, count: int) -> list:
    safe_len = max(1, df.depth - 3)
    candidates = [w for w in enumerate_canonical(df.frame, safe_len)
                  if f0(w, df.frame) in df.interior_paths()
                  and len(f0(w, df.frame)) <= df.depth - 2]
    if len(candidates) <= count:
        return candidates
    picked = [()] if () in candidates else []
    pool = [c for c in candidates if c not in picked]
    picked.extend(rng.sample(pool, count - len(picked)))
    return picked


def make_eta(space: EntangleSpace, psi, pframe: PredKripkeFrame):
    """The composite domain map: a point (a stop word over the base frame)
    and a constant-domain stop word go to an element of the target domain at
    the point's endpoint, via the class of their interleaving.  Classes with
    more domain letters than the truncated assignments carry land on the
    designated element of the parent domain of the path they were born at,
    matching the overflow rule of the psi construction."""
    frame = space.frame

    def eta(alpha, gamma):
        path = f0(alpha, frame)
        mapping = psi.phi1.get(path)
        if mapping is None:
            raise BudgetExceeded(
                f"point {alpha!r} lies outside the truncated unravelling")
        cls = xi(space, alpha, gamma)
        if cls in mapping:
            return mapping[cls]
        born = (frame.root,) + tuple(c for c in cls if space.is_w(c))
        world = born[-2] if len(born) >= 2 else born[-1]
        return sorted(pframe.domain(world))[0]

    return eta


class DenseEvaluator:
    """Predicate evaluation at points of the dense frame; env maps variables
    to constant-domain stop words.  Returns (value, certified)."""

    def __init__(self, df: DenseFrame, space: EntangleSpace, eta,
                 model: PredKripkeModel, sigma2, max_sigma: int,
                 gamma: Optional[HornTheory] = None):
        self.df = df
        self.space = space
        self.eta = eta
        self.model = model
        self.sigma2 = tuple(sigma2)
        self.max_sigma = max_sigma
        powers = chain_axiom_powers(gamma) if gamma is not None else None
        self.ext_cap = max(powers) if powers else 1

    def eval(self, alpha, a, env: dict):
        if isinstance(a, Falsum):
            return False, True
        if isinstance(a, Atom):
            args = []
            for term in a.args:
                if isinstance(term, Const):
                    raise EvaluationError(
                        "scenario formulas must be constant-free")
                args.append(self.eta(alpha, env[term.name]))
            world = f0(alpha, self.df.frame)[-1]
            return self.model.holds(a.name, world, tuple(args)), True
        if isinstance(a, Implies):
            lv, lc = self.eval(alpha, a.left, env)
            rv, rc = self.eval(alpha, a.right, env)
            if (lc and lv is False) or (rc and rv is True):
                return True, True
            return (not lv) or rv, lc and rc
        if isinstance(a, Forall):
            return self._eval_forall(alpha, a, env)
        if isinstance(a, Box):
            return self._eval_box(alpha, a, env)
        raise EvaluationError(f"unsupported formula node {a!r}")

    def _gap_cap(self, alpha, body) -> int:
        # zero runs beyond the deepest position a nested box can reach act
        # identically, so capping them keeps the family profile-complete
        cap = st(alpha)
        for _ in range(modal_depth(body)):
            cap += self.ext_cap * (self.df.j_max + 1)
        return cap + 1

    def _eval_forall(self, alpha, a, env):
        gap_cap = self._gap_cap(alpha, a.body)
        family = enumerate_dstar(self.sigma2, self.max_sigma, gap_cap)
        overflow = (self.sigma2[0],) * (self.max_sigma + 1)
        family = family + [(STOP,) * g + overflow for g in range(gap_cap + 1)]
        value, certified = True, True
        for gamma in family:
            v, c = self.eval(alpha, a.body, {**env, a.var: gamma})
            if v is False:
                return False, c
            value = value and v
            certified = certified and c
        return value, certified

    def _eval_box(self, alpha, a, env):
        # decide on a neighbourhood deep enough that every constant in env
        # has a stable image at all members; the zero paddings then act as a
        # robustness window over each tail family
        m = max([st(alpha)] + [st(g) for g in env.values()])
        try:
            exts = self.df.extensions(f0(alpha, self.df.frame))
        except BudgetExceeded:
            return True, False
        pre = restrict(alpha, m)
        j_max = self.df.j_max
        value, certified = True, True
        for ext in sorted(exts):
            if ext == ():
                v, c = self.eval(canonical(alpha), a.body, env)
                if v is False:
                    return False, c
                value = value and v
                certified = certified and c
                continue
            verdicts = {}
            for js in itertools.product(range(j_max + 1), repeat=len(ext)):
                word = list(pre)
                for j, letter in zip(js, ext):
                    word.extend([STOP] * j)
                    word.append(letter)
                verdicts[js] = self.eval(canonical(word), a.body, env)
            generic_v, generic_c = verdicts[(j_max,) * len(ext)]
            deep = [v for js, (v, _) in verdicts.items() if min(js) >= j_max - 1]
            stable = len(set(deep)) == 1
            sub_cert = all(c for _, c in verdicts.values())
            if generic_v is False:
                robust = all(v is False for v, _ in verdicts.values())
                return False, robust and sub_cert
            value = value and generic_v
            certified = certified and stable and sub_cert and generic_c
        return value, certified


# ---------------------------------------------------------------------------
# report rendering


def render_report(report: PipelineReport) -> str:
    lines = [f"pipeline report: {report.scenario}",
             f"seed: {report.seed}"]
    for stg in report.stages:
        lines.append(f"stage {stg.name}: {'ok' if stg.ok else 'FAILED'}")
        for key in sorted(stg.detail):
            lines.append(f"  {key}: {_show(stg.detail[key])}")
        lines.append(f"# time {stg.name}: {stg.seconds:.3f}s")
    lines.append("summary:")
    lines.append(f"  kripke_root_value: {_show(report.kripke_value)}")
    lines.append(f"  dense_value: {_show(report.dense_value)}")
    lines.append(f"  dense_certified: {_show(report.dense_certified)}")
    lines.append(f"  refutation_reproduced: "
                 f"{_show(report.ok and report.dense_value is False)}")
    lines.append(f"  result: {'ok' if report.ok else 'FAILED'}")
    return "\n".join(lines) + "\n"


def _show(value) -> str:
    if isinstance(value, tuple):
        return "(" + ", ".join(_show(v) for v in value) + ")"
    if isinstance(value, (list, set, frozenset)):
        return "[" + ", ".join(_show(v) for v in sorted(value, key=repr)) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_show(v)}"
                               for k, v in sorted(value.items(), key=repr)) + "}"
    return str(value)
