import math
import random

import pytest

from reprise.corpus import PAUSE
from reprise.grammar import Grammar
from reprise.terms import (
    App,
    BaseTerm,
    EvaluationLimit,
    Hole,
    Primitive,
    T_COUNT,
    T_NOTE,
    TypeCheckError,
    arrow,
    check_type,
    count,
    delete_terms,
    description_length,
    evaluate,
    note,
    parse_term,
    parse_type,
    prim,
    print_term,
    program,
    reconstruct,
    subprograms,
    time_index,
)

RUN_PROGRAM = App("", App("", App("", prim("iter"), prim("up")), note(2)), count(3))


def test_check_type_primitives():
    assert check_type(prim("rep")).text() == "(n->c->n)"
    assert check_type(prim("get")).text() == "(n->m->n)"
    assert check_type(count(3)) == T_COUNT


def test_check_type_rejects_mismatches():
    with pytest.raises(TypeCheckError):
        check_type(App("B", prim("rep"), time_index(2)))
    with pytest.raises(TypeCheckError):
        check_type(App("", count(3), note(0)))
    with pytest.raises(TypeCheckError):
        check_type(App("BBB", prim("rep"), prim("up")))
    with pytest.raises(TypeCheckError):
        check_type(BaseTerm("c", 99))


def test_evaluate_rep_get():
    assert evaluate(program(prim("rep")), ((0,), 2)) == (0, 0)
    assert evaluate(program(prim("get")), ((0, 2, 3), 2)) == (0, 2)


def test_evaluate_run_and_routers():
    assert check_type(RUN_PROGRAM) == T_NOTE
    assert evaluate(RUN_PROGRAM) == (2, 3, 4)
    routed = App("C", App("", prim("iter"), prim("up")), count(3))
    assert check_type(routed).text() == "(n->n)"
    assert evaluate(routed, ((2,),)) == (2, 3, 4)
    both = App("S", prim("concat"), prim("up"))
    assert evaluate(both, ((0, 4),)) == (0, 4, 1, 5)
    compose = App("B", prim("up"), prim("up"))
    assert evaluate(compose, ((10,),)) == (0,)  # wraps mod 12


def test_pause_is_fixed_under_shifts():
    shifted = evaluate(prim("up"), ((PAUSE, 5),))
    assert shifted == (PAUSE, 6)


def test_evaluate_limits():
    doubler = App("C", prim("rep"), count(16))  # x -> x*16
    nested = App("", App("", App("", prim("iter"), doubler), note(0)), count(16))
    with pytest.raises(EvaluationLimit):
        evaluate(nested)


def test_description_length():
    g = Grammar()
    p = program(count(3))
    # only terminal expansion exists at t_c: bits are exactly log2(16)
    assert description_length(p, g) == pytest.approx(4.0, abs=1e-12)
    prior = lambda term, t: math.log(1 / 8)
    assert description_length(note(0), prior, T_NOTE) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        description_length(note(0), lambda term, t: -math.inf, T_NOTE)


def test_subprograms():
    leaf = note(5)
    assert subprograms(leaf) == {leaf: 1}
    subs = subprograms(RUN_PROGRAM)
    # every node of the tree appears once
    assert sum(subs.values()) == 7
    assert subs[prim("up")] == 1
    twice = App("", App("", prim("concat"), note(1)), note(1))
    assert subprograms(twice)[note(1)] == 2


def test_subprograms_skip_holes():
    holed = App("", App("", prim("rep"), Hole(T_NOTE)), count(2))
    subs = subprograms(holed)
    assert all(not isinstance(t, Hole) for t in subs)
    assert subs[prim("rep")] == 1
    assert subs[count(2)] == 1
    assert len(subs) == 2


def test_print_parse_roundtrip():
    g = Grammar()
    rng = random.Random(3)
    for _ in range(300):
        term = g.sample_term(T_NOTE, rng)
        assert parse_term(print_term(term)) == term
    holed = App("C", Hole(parse_type("(n->c->n)")), count(4))
    assert parse_term(print_term(holed)) == holed
    assert print_term(note(PAUSE)) == "np"
    assert parse_term("np") == note(PAUSE)


def test_delete_terms_noop_and_collapse():
    g = Grammar()
    bits = g.partial_description_length(RUN_PROGRAM, T_NOTE)
    assert delete_terms(RUN_PROGRAM, bits + 1, g, T_NOTE) == RUN_PROGRAM
    assert delete_terms(RUN_PROGRAM, 1e-6, g, T_NOTE) == Hole(T_NOTE)
    with pytest.raises(ValueError):
        delete_terms(RUN_PROGRAM, 0.0, g, T_NOTE)


def test_delete_terms_orders_by_leaf_probability():
    g = Grammar()
    rep_prog = App("", App("", prim("rep"), note(8)), count(4))
    # leaf local probs: rep 0.7 (sole primitive at its goal) > count 1/16
    # > note 0.7/13; the cheapest-information leaf goes first
    full = g.partial_description_length(rep_prog, T_NOTE)
    partial = delete_terms(rep_prog, full - 0.4, g, T_NOTE)
    assert partial == App("", App("", Hole(parse_type("(n->c->n)")), note(8)), count(4))
    # a tighter budget holes the count next
    tighter = g.partial_description_length(partial, T_NOTE)
    partial2 = delete_terms(rep_prog, tighter - 0.4, g, T_NOTE)
    assert partial2 == App("", App("", Hole(parse_type("(n->c->n)")), note(8)), Hole(T_COUNT))


def test_delete_terms_monotone_in_budget():
    g = Grammar()
    rng = random.Random(1)
    for _ in range(30):
        term = g.sample_term(T_NOTE, rng)
        full = g.partial_description_length(term, T_NOTE)
        prev = None
        for budget in (full * 0.1, full * 0.4, full * 0.8, full * 1.2):
            out = g.partial_description_length(
                delete_terms(term, budget, g, T_NOTE), T_NOTE
            )
            assert out <= budget + 1e-9
            if prev is not None:
                assert out >= prev - 1e-9
            prev = out


def test_reconstruct():
    g = Grammar()
    rng = random.Random(5)
    # hole-free reconstruction equals evaluation
    assert reconstruct(RUN_PROGRAM, g.sampler(), rng) == evaluate(RUN_PROGRAM)
    # count hole: run of sampled length, still anchored at pitch 2
    partial = App("", App("", App("", prim("iter"), prim("up")), note(2)), Hole(T_COUNT))
    out1 = reconstruct(partial, g.sampler(), random.Random(9))
    out2 = reconstruct(partial, g.sampler(), random.Random(9))
    assert out1 == out2
    assert out1[0] == 2
    assert 1 <= len(out1) <= 16
