import itertools

import pytest

from mlwb.kripke import KripkeFrame, KripkeModel, KripkeMorphism, \
    check_pmorphism, eval_kripke, unravel
from mlwb.neighbourhood import (
    NFrame, NModel, check_n_pmorphism, eval_nbhd, n_morphism_from_kripke,
    n_truth_preservation_test, nf_from_kripke, parse_nframe,
    pullback_valuation,
)
from mlwb.syntax import Box, Falsum, Implies, Letter, neg, parse_prop


def chain(n):
    worlds = [f"w{i}" for i in range(n)]
    return KripkeFrame(frozenset(worlds),
                       frozenset(zip(worlds, worlds[1:])), worlds[0])


class TestNFrame:
    def test_empty_base_rejected(self):
        with pytest.raises(ValueError):
            NFrame(frozenset({"x"}), {"x": ()})

    def test_filter_base_property_enforced(self):
        # two disjoint members with no member inside the intersection
        with pytest.raises(ValueError):
            NFrame(frozenset({"x", "y"}),
                   {"x": (frozenset({"x"}), frozenset({"y"})),
                    "y": (frozenset({"y"}),)})

    def test_nf_from_kripke_principal_filters(self):
        f = chain(3)
        nf = nf_from_kripke(f)
        assert nf.base[("w0")][0] == frozenset({"w1"})

    def test_parse(self):
        nf = parse_nframe("points x y\nbase x = {x,y} {y}\nbase y = {y}\n")
        assert nf.points == frozenset({"x", "y"})


class TestEvaluation:
    def test_agreement_with_kripke_exhaustive_small(self):
        frames = [chain(1), chain(2), chain(3),
                  KripkeFrame(frozenset("ab"),
                              frozenset({("a", "b"), ("b", "a")}), "a")]
        p = Letter("p")
        formulas = [p, neg(p), Box(1, p), Box(1, Box(1, p)),
                    Implies(Box(1, p), p), Box(1, Falsum())]
        for frame in frames:
            worlds = sorted(frame.worlds)
            nf = nf_from_kripke(frame)
            for bits in itertools.product([0, 1], repeat=len(worlds)):
                val = {"p": frozenset(w for w, b in zip(worlds, bits) if b)}
                km, nm = KripkeModel(frame, val), NModel(nf, val)
                for a in formulas:
                    for w in worlds:
                        assert eval_kripke(km, w, a) == eval_nbhd(nm, w, a)

    def test_box_via_base_member(self):
        # a genuinely non-principal base: two nested neighbourhoods
        nf = NFrame(frozenset({"x", "y", "z"}),
                    {"x": (frozenset({"y", "z"}), frozenset({"y"})),
                     "y": (frozenset({"z"}),),
                     "z": (frozenset({"z"}),)})
        model = NModel(nf, {"p": frozenset({"y"})})
        # box p holds at x through the smaller member {y}
        assert eval_nbhd(model, "x", Box(1, Letter("p")))
        assert not eval_nbhd(model, "y", Box(1, Letter("p")))


class TestMorphisms:
    def test_from_kripke_unravelling(self):
        frame = KripkeFrame(frozenset("rab"),
                            frozenset({("r", "a"), ("r", "b"), ("a", "b")}),
                            "r")
        u = unravel(frame, 4)
        nm = n_morphism_from_kripke(u.pi)
        assert check_n_pmorphism(nm)
        rep = n_truth_preservation_test(nm, samples=300, seed=3)
        assert rep["passed"] == 300

    def test_violation_detected(self):
        source = nf_from_kripke(chain(2))
        target = nf_from_kripke(
            KripkeFrame(frozenset("x"), frozenset({("x", "x")}), "x"))
        bad = check_n_pmorphism(
            type(n_morphism_from_kripke(
                KripkeMorphism(chain(2), chain(2),
                               {w: w for w in chain(2).worlds})))(
                source, target, {"w0": "x", "w1": "x"}))
        assert not bad

    def test_pullback_valuation(self):
        frame = chain(2)
        u = unravel(frame, 3)
        nm = n_morphism_from_kripke(u.pi)
        val = pullback_valuation(nm, {"p": frozenset({"w1"})})
        assert val["p"] == frozenset({("w0", "w1")})
