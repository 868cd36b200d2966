import itertools
import random

import pytest

from mlwb.kripke import (
    BudgetExceeded, KripkeFrame, KripkeModel, KripkeMorphism, axiom_inclusion_formula,
    brute_validity, check_axiom_inclusion, check_pmorphism, check_pretransitive,
    eval_kripke, format_frame, generated_subframe, parse_frame, parse_valuation,
    pretransitivity_formula, pullback_valuation, reachable, relation_power,
    truth_preservation_test, unravel,
)
from mlwb.syntax import Box, Implies, Letter, neg, parse_prop


def chain(n):
    worlds = [f"w{i}" for i in range(n)]
    return KripkeFrame(frozenset(worlds),
                       frozenset(zip(worlds, worlds[1:])), worlds[0])


class TestFrames:
    def test_reserved_world_id(self):
        with pytest.raises(ValueError):
            KripkeFrame(frozenset({"0", "a"}), frozenset(), None)

    def test_relation_outside_worlds(self):
        with pytest.raises(ValueError):
            KripkeFrame(frozenset({"a"}), frozenset({("a", "b")}), None)

    def test_reachable_and_generated(self):
        f = chain(4)
        assert reachable(f, "w1") == frozenset({"w1", "w2", "w3"})
        sub = generated_subframe(f, "w2")
        assert sub.worlds == frozenset({"w2", "w3"})

    def test_relation_power(self):
        f = chain(4)
        assert relation_power(f, 2) == frozenset({("w0", "w2"), ("w1", "w3")})
        assert relation_power(f, 0) == frozenset((w, w) for w in f.worlds)

    def test_parse_format_round_trip(self):
        f = chain(3)
        assert parse_frame(format_frame(f)) == f


class TestEvaluation:
    def test_box_on_chain(self):
        f = chain(3)
        model = KripkeModel(f, parse_valuation("val p = {w1, w2}"))
        assert eval_kripke(model, "w0", parse_prop("box p"))
        assert not eval_kripke(model, "w0", parse_prop("box box false"))
        # vacuous box at the endpoint
        assert eval_kripke(model, "w2", parse_prop("box false"))

    def test_brute_validity(self):
        f = chain(2)
        assert brute_validity(f, parse_prop("box p -> box p"))
        assert not brute_validity(f, parse_prop("p -> box p"))

    def test_brute_validity_budget(self):
        worlds = frozenset(f"w{i}" for i in range(25))
        big = KripkeFrame(worlds, frozenset(), None)
        with pytest.raises(BudgetExceeded):
            brute_validity(big, parse_prop("box p -> p"))

    def test_axiom_checks_match_validity_on_fixed_frames(self):
        frames = [
            chain(3),
            KripkeFrame(frozenset("ab"), frozenset({("a", "b"), ("b", "a")}), "a"),
            KripkeFrame(frozenset("abc"),
                        frozenset({("a", "b"), ("b", "c"), ("a", "c")}), "a"),
        ]
        for f in frames:
            for k in (1, 2, 3):
                assert bool(check_axiom_inclusion(f, k)) == \
                    brute_validity(f, axiom_inclusion_formula(k))
            for k in (1, 2):
                assert bool(check_pretransitive(f, k)) == \
                    brute_validity(f, pretransitivity_formula(k))


class TestUnravelling:
    def test_tree_shape(self):
        f = KripkeFrame(frozenset("rab"),
                        frozenset({("r", "a"), ("r", "b"), ("a", "r")}), "r")
        u = unravel(f, 3)
        assert ("r",) in u.frame.worlds
        assert all(len(p) <= 3 for p in u.frame.worlds)
        # edges extend paths by exactly one step
        for p, q in u.frame.relation:
            assert q[:len(p)] == p and len(q) == len(p) + 1

    def test_pi_is_pmorphism_on_interior(self):
        f = KripkeFrame(frozenset("rab"),
                        frozenset({("r", "a"), ("r", "b"), ("a", "r")}), "r")
        u = unravel(f, 4)
        assert check_pmorphism(u.pi)

    def test_needs_root(self):
        with pytest.raises(ValueError):
            unravel(KripkeFrame(frozenset("ab"), frozenset(), None), 2)


class TestMorphisms:
    def test_collapse_morphism(self):
        # a 2-cycle collapses onto a reflexive point
        source = KripkeFrame(frozenset("ab"),
                             frozenset({("a", "b"), ("b", "a")}), "a")
        target = KripkeFrame(frozenset("x"), frozenset({("x", "x")}), "x")
        f = KripkeMorphism(source, target, {"a": "x", "b": "x"})
        assert check_pmorphism(f)
        rep = truth_preservation_test(f, samples=300, seed=1)
        assert rep["passed"] == 300

    def test_zigzag_violation_detected(self):
        source = chain(2)
        target = KripkeFrame(frozenset("x"), frozenset({("x", "x")}), "x")
        f = KripkeMorphism(source, target, {"w0": "x", "w1": "x"})
        verdict = check_pmorphism(f)  # w1 has no successor to lift x -> x
        assert not verdict
        assert verdict.witness is not None

    def test_pullback_valuation(self):
        source = KripkeFrame(frozenset("ab"),
                             frozenset({("a", "b"), ("b", "a")}), "a")
        target = KripkeFrame(frozenset("x"), frozenset({("x", "x")}), "x")
        f = KripkeMorphism(source, target, {"a": "x", "b": "x"})
        val = pullback_valuation(f, {"p": frozenset({"x"})})
        assert val["p"] == frozenset({"a", "b"})

    def test_truth_preservation_exhaustive_small(self):
        source = KripkeFrame(frozenset("ab"),
                             frozenset({("a", "b"), ("b", "a")}), "a")
        target = KripkeFrame(frozenset("x"), frozenset({("x", "x")}), "x")
        f = KripkeMorphism(source, target, {"a": "x", "b": "x"})
        p = Letter("p")
        formulas = [p, neg(p), Box(1, p), Box(1, Box(1, p)),
                    Implies(Box(1, p), p)]
        for bits in range(2):
            val = {"p": frozenset({"x"}) if bits else frozenset()}
            src_model = KripkeModel(source, pullback_valuation(f, val))
            tgt_model = KripkeModel(target, val)
            for a in formulas:
                for w in source.worlds:
                    assert eval_kripke(src_model, w, a) == \
                        eval_kripke(tgt_model, f.map[w], a)
