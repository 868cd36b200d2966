import pytest

from mlwb.dense import DenseFrame, STOP
from mlwb.kripke import EvaluationError, KripkeFrame
from mlwb.entangle import (
    EntangleSpace, build_psi, canonicalize, domain_monotonicity_check,
    dsharp, entangle_enumerate, equiv, equiv_bruteforce, fiber, h,
    is_entangled, p1, p2, t, xi, xi_locality_check, xi_surjectivity_check,
    zero_pattern,
)
from mlwb.predicate import PredKripkeFrame, check_kk_morphism


def chain_space(n_worlds=4, sigma=("x", "y")):
    worlds = ["r"] + [f"w{i}" for i in range(1, n_worlds)]
    frame = KripkeFrame.make(worlds, list(zip(worlds, worlds[1:])), root="r")
    return EntangleSpace(frame, sigma)


def abc_space():
    # the worked three-step chain with a three-letter domain alphabet
    frame = KripkeFrame.make(["r", "1", "3", "4"],
                             [("r", "1"), ("1", "3"), ("3", "4")], root="r")
    return EntangleSpace(frame, ("a", "b", "c"))


class TestSpace:
    def test_alphabet_disjointness(self):
        frame = KripkeFrame.make(["r", "a"], [("r", "a")], root="r")
        with pytest.raises(ValueError):
            EntangleSpace(frame, ("a",))

    def test_projections(self):
        sp = abc_space()
        w = ("1", "a", "3", "b")
        assert p1(sp, w) == ("r", "1", "3")
        assert p2(sp, w) == ("a", "a", "b")

    def test_is_entangled(self):
        sp = abc_space()
        assert is_entangled(sp, ("1", "a", "3", "b"))
        assert not is_entangled(sp, ("3",))       # skips a step
        assert not is_entangled(sp, ("1", STOP))  # stops are not letters

    def test_enumeration_only_entangled(self):
        sp = chain_space(3)
        words = entangle_enumerate(sp, 4)
        assert words
        for w in words:
            assert is_entangled(sp, w)

    def test_fiber_partitions_by_path(self):
        sp = chain_space(3)
        words = entangle_enumerate(sp, 4)
        fib = fiber(sp, ("r", "w1"), 4)
        assert set(fib) == {w for w in words if p1(sp, w) == ("r", "w1")}


class TestWorkedVectors:
    def make_space(self):
        frame = KripkeFrame.make(["r", "a", "b", "c"],
                                 [("r", "a"), ("a", "b"), ("b", "c")],
                                 root="r")
        return EntangleSpace(frame, ("1", "2", "3", "4"))

    def test_h_on_the_fixed_vector(self):
        sp = self.make_space()
        assert h(sp, tuple("a0b00c"), tuple("1034")) == tuple("1a34bc")

    def test_h_base_clauses(self):
        sp = self.make_space()
        # empty gamma: alpha's letters pass through
        assert h(sp, tuple("a0b"), ()) == tuple("ab")
        # pure-sigma gamma: emitted before the appended letters
        assert h(sp, tuple("ab"), tuple("12")) == tuple("12ab")
        # a slot at position 1 can take alpha's first letter
        assert h(sp, tuple("ab"), (STOP, "1")) == tuple("a1b")

    def test_h_never_pulls_letters_ahead(self):
        sp = self.make_space()
        # alpha's b sits at position 3; the slot at position 2 stays empty
        assert h(sp, ("a", STOP, "b"), (STOP, STOP, "1")) == ("a", "1", "b")

    def test_t_on_the_fixed_vector(self):
        sp = self.make_space()
        assert t(sp, tuple("ab00c"), tuple("a12bc3")) == tuple("a12b00c3")

    def test_t_incompatible_inputs(self):
        sp = self.make_space()
        with pytest.raises(EvaluationError):
            t(sp, tuple("ab"), tuple("ba"))

    def test_h_rejects_foreign_letters(self):
        sp = self.make_space()
        with pytest.raises(EvaluationError):
            h(sp, ("a",), ("z",))
        with pytest.raises(EvaluationError):
            h(sp, ("z",), ("1",))


class TestEquivalence:
    def test_oracle_agreement_exhaustive(self):
        sp = chain_space(3, sigma=("x", "y"))
        words = entangle_enumerate(sp, 5)
        for i, u in enumerate(words):
            for v in words[i:]:
                assert equiv(sp, u, v) == equiv_bruteforce(sp, u, v)

    def test_canonicalize_idempotent(self):
        sp = chain_space(3)
        for w in entangle_enumerate(sp, 5):
            c = canonicalize(sp, w)
            assert canonicalize(sp, c) == c
            assert equiv(sp, w, c)

    def test_equiv_rejects_non_entangled(self):
        sp = chain_space(3)
        with pytest.raises(EvaluationError):
            equiv(sp, ("w2",), ("w2",))


class TestDsharp:
    def test_monotone_and_strict_along_steps(self):
        sp = chain_space(4)
        assert domain_monotonicity_check(sp, ("r",), ("r", "w1"), 2)
        assert domain_monotonicity_check(sp, ("r", "w1"), ("r", "w1", "w2"), 2)

    def test_rejects_non_step(self):
        sp = chain_space(4)
        v = domain_monotonicity_check(sp, ("r",), ("r", "w2"), 2)
        assert not v and v.condition == "not-a-relation-step"

    def test_root_classes_are_pure_sigma(self):
        sp = chain_space(3, sigma=("x",))
        d = dsharp(sp, ("r",), 2)
        assert d == frozenset({(), ("x",), ("x", "x")})


class TestXi:
    def test_surjectivity_on_stop_free_alpha(self):
        sp = chain_space(4)
        for alpha in [(), ("w1",), ("w1", "w2"), ("w1", "w2", "w3")]:
            rep = xi_surjectivity_check(sp, alpha, max_sigma=2)
            assert rep["ok"], rep["missed"]

    def test_surjectivity_with_interleaved_stops(self):
        sp = chain_space(3)
        for alpha in [("w1", STOP), (STOP, "w1"),
                      ("w1", STOP, STOP, "w2"), (STOP, STOP, "w1", "w2")]:
            rep = xi_surjectivity_check(sp, alpha, max_sigma=2)
            assert rep["ok"], rep["missed"]

    def test_locality(self):
        sp = chain_space(4)
        df = DenseFrame(sp.frame, depth=5)
        for alpha in [("w1",), ("w1", STOP, "w2")]:
            for gamma in [("x",), (STOP, "x"), ("x", STOP, "y")]:
                rep = xi_locality_check(sp, df, alpha, gamma)
                assert rep["ok"], rep

    def test_zero_pattern(self):
        sp = chain_space(3)
        assert zero_pattern(sp, ("x", "w1", "y")) == ("x", STOP, "y")

    def test_xi_lands_in_dsharp(self):
        sp = chain_space(4)
        alpha = ("w1", STOP, "w2")
        from mlwb.dense import f0
        path = f0(alpha, sp.frame)
        for gamma in [("x",), (STOP, "y"), ("x", STOP, "y", STOP)]:
            cls = xi(sp, alpha, gamma)
            assert cls in dsharp(sp, path, 3)


class TestBuildPsi:
    def test_two_chain_self_check(self):
        sp = chain_space(3)
        target = PredKripkeFrame(sp.frame,
                                 {"r": {"d"}, "w1": {"d", "e"},
                                  "w2": {"d", "e", "f"}})
        m = build_psi(sp, target, max_sigma=2)
        assert check_kk_morphism(m)
        # root classes cover the root domain
        root_map = m.phi1[("r",)]
        assert set(root_map.values()) == {"d"}

    def test_alphabet_too_small(self):
        sp = chain_space(2, sigma=("x",))
        target = PredKripkeFrame(
            sp.frame, {"r": {"d", "e", "f"}, "w1": {"d", "e", "f"}})
        with pytest.raises(ValueError, match="alphabet too small"):
            build_psi(sp, target, max_sigma=1)

    def test_non_tree_needs_dense(self):
        frame = KripkeFrame.make(["r", "a"],
                                 [("r", "a"), ("a", "a")], root="r")
        sp = EntangleSpace(frame, ("x", "y"))
        target = PredKripkeFrame(frame, {"r": {"d"}, "a": {"d", "e"}})
        with pytest.raises(ValueError):
            build_psi(sp, target, max_sigma=2)
        m = build_psi(sp, target, max_sigma=2,
                      dense=DenseFrame(frame, depth=4))
        assert check_kk_morphism(m)
