import random

import pytest

from mlwb.horn import (
    HornTheory, axiom_to_horn, axioms_to_theory, chain_axiom_powers,
    closure_minimality_check, closure_pmorphism_lift_check, eval_horn,
    gamma_close, parse_horn_theory, transitive_closure_squaring,
)
from mlwb.kripke import KripkeFrame, KripkeMorphism, unravel
from mlwb.syntax import parse_horn


def random_frame(rng, max_worlds=6, p=0.3):
    n = rng.randint(1, max_worlds)
    worlds = [f"w{i}" for i in range(n)]
    relation = frozenset((u, v) for u in worlds for v in worlds
                         if rng.random() < p)
    return KripkeFrame(frozenset(worlds), relation, worlds[0])


class TestAxiomTranslation:
    def test_k0_is_reflexivity(self):
        s = axiom_to_horn(0)
        refl = KripkeFrame(frozenset("a"), frozenset({("a", "a")}), "a")
        irrefl = KripkeFrame(frozenset("a"), frozenset(), "a")
        assert eval_horn(refl, s) and not eval_horn(irrefl, s)

    def test_k1_is_vacuous(self):
        assert axiom_to_horn(1) is None

    def test_k2_is_transitivity(self):
        s = axiom_to_horn(2)
        assert s == parse_horn("x R z1 & z1 R y => x R y")

    def test_chain_axiom_powers(self):
        theory = axioms_to_theory([0, 2, 3])
        assert set(chain_axiom_powers(theory)) == {0, 2, 3}
        # a non-chain sentence has no power reading
        other = HornTheory.of(parse_horn("x R y => y R x"))
        assert chain_axiom_powers(other) is None


class TestClosure:
    def test_transitive_closure_matches_squaring_oracle(self):
        rng = random.Random(0)
        theory = HornTheory.of(axiom_to_horn(2))
        for _ in range(200):
            frame = random_frame(rng)
            closed = gamma_close(frame, theory)
            assert closed.relation == transitive_closure_squaring(frame.relation)

    def test_closure_is_superset_and_idempotent(self):
        rng = random.Random(1)
        theory = axioms_to_theory([0, 2])
        for _ in range(50):
            frame = random_frame(rng)
            closed = gamma_close(frame, theory)
            assert frame.relation <= closed.relation
            assert gamma_close(closed, theory).relation == closed.relation
            assert all(eval_horn(closed, s) for s in theory)

    def test_closure_minimality(self):
        rng = random.Random(2)
        theory = HornTheory.of(axiom_to_horn(2))
        for _ in range(20):
            report = closure_minimality_check(random_frame(rng), theory)
            assert report["violations"] == []

    def test_disjunctive_body(self):
        # instantiating x=b, y=a realizes the second disjunct, so the
        # sentence forces symmetry
        theory = parse_horn_theory("x R y | y R x => x R y")
        frame = KripkeFrame(frozenset("ab"), frozenset({("a", "b")}), "a")
        closed = gamma_close(frame, theory)
        assert closed.relation == frozenset({("a", "b"), ("b", "a")})

    def test_closure_lifts_along_unravelling(self):
        frame = KripkeFrame(frozenset("rab"),
                            frozenset({("r", "a"), ("a", "b"), ("r", "b")}), "r")
        theory = HornTheory.of(axiom_to_horn(2))
        assert all(eval_horn(frame, s) for s in theory)
        u = unravel(frame, 4)
        verdict = closure_pmorphism_lift_check(u.pi, theory)
        assert verdict


class TestParsing:
    def test_theory_parse(self):
        theory = parse_horn_theory(
            "x R y & y R z => x R z\n# comment\ntrue => x R x\n")
        assert len(theory.sentences) == 2
