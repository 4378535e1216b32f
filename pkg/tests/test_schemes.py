import dataclasses
from fractions import Fraction

import pytest

from graphpir import verify
from graphpir.errors import AnswerabilityError, DecodabilityError, DomainError, UnsupportedStructureError
from graphpir.gf import FieldSpec, GfMatrix, solve_system
from graphpir.schemes import (
    Equation,
    QueryPlan,
    Transcript,
    answer_query,
    applicable_schemes,
    build_plan,
    decode,
    dumps_transcript,
    linear_system,
    load_transcript,
    plan_cyclic,
    plan_download_all,
    plan_fully_connected,
    plan_m3_example,
    plan_sun_jafar_332,
    run,
    transcript_from_dict,
    transcript_to_dict,
)
from graphpir.schemes.base import identity_permutations
from graphpir.storage import (
    COMPLETE_BIPARTITE_3_3,
    THREE_PER_DATABASE,
    TRIANGLE,
    MessageStore,
    make_cyclic,
    make_fully_connected,
    random_messages,
    zero_messages,
)

F13 = FieldSpec(13)


def logical(plan: QueryPlan) -> list[list[Equation]]:
    """Undo the private index permutations."""
    inverse = []
    for perm in plan.permutations:
        inv = [0] * len(perm)
        for s, p in enumerate(perm, start=1):
            inv[p - 1] = s
        inverse.append(tuple(inv))
    return [[eq.mapped(inverse) for eq in eqs] for eqs in plan.per_database]


def simulate(plan: QueryPlan, seed: int = 0):
    store = random_messages(plan.system, plan.q, plan.l, seed)
    return run(plan, store), store


def rate(t: Transcript) -> Fraction:
    return Fraction(t.plan.l, t.downloads)


def test_download_all_rates():
    t, store = simulate(plan_download_all(make_cyclic(3), 1))
    assert t.downloads == 3 and rate(t) == Fraction(1, 3)
    assert t.decoded == store.message(1)
    t, _ = simulate(plan_download_all(make_fully_connected(4), 2))
    assert t.downloads == 4 and rate(t) == Fraction(1, 4)


def test_download_all_longer_messages_and_larger_field():
    plan = plan_download_all(COMPLETE_BIPARTITE_3_3, 4, l=3, q=F13)
    t, store = simulate(plan, 9)
    assert t.decoded == store.message(4) and rate(t) == Fraction(1, 6)


def test_sun_jafar_matches_greedy_table():
    plan = plan_sun_jafar_332(1, seed=0)
    a, b, c = 1, 2, 3
    expected = [
        [Equation.of((a, 1)), Equation.of((b, 1)), Equation.of((a, 3), (b, 2))],
        [Equation.of((a, 2)), Equation.of((c, 1)), Equation.of((a, 4), (c, 2))],
        [Equation.of((b, 2)), Equation.of((c, 2)), Equation.of((b, 3), (c, 3))],
    ]
    assert logical(plan) == expected


@pytest.mark.parametrize("desired", [1, 2, 3])
def test_sun_jafar_counts_and_decoding(desired):
    plan = plan_sun_jafar_332(desired, seed=desired)
    assert [len(q) for q in plan.per_database] == [3, 3, 3]
    t, store = simulate(plan, 5)
    assert t.decoded == store.message(desired)
    assert rate(t) == Fraction(4, 9)


def test_sun_jafar_rejects_other_systems():
    with pytest.raises(UnsupportedStructureError):
        plan_sun_jafar_332(1, 0, system=make_cyclic(4))


def test_cyclic_triangle_first_repetition_shape():
    plan = plan_cyclic(TRIANGLE, 1, seed=0)
    assert plan.downloads == 24 and plan.l == 12
    rep1 = [eqs for eqs in logical(plan_cyclic(TRIANGLE, 1, seed=0, pairs=[(1, 2)]))]
    assert [len(e) for e in rep1] == [3, 3, 2]
    assert [e.arity for e in rep1[0]] == [1, 1, 2]
    assert all(e.messages == (2, 3) for e in rep1[2])
    assert {s for e in rep1[2] for m, s, _ in e.terms if m == 2} == {1, 2}


def test_cyclic_triangle_rate():
    t, store = simulate(plan_cyclic(TRIANGLE, 1, seed=0))
    assert t.decoded == store.message(1)
    assert rate(t) == Fraction(1, 2)


def test_cyclic_five():
    t, store = simulate(plan_cyclic(make_cyclic(5), 2, seed=3), 3)
    assert t.decoded == store.message(2)
    assert rate(t) == Fraction(1, 3)
    assert verify.check_decodability(t).passed


def test_cyclic_rejects_non_cyclic():
    with pytest.raises(UnsupportedStructureError):
        plan_cyclic(make_fully_connected(4), 1, 0)


def test_cyclic_on_relabeled_ring():
    ring = make_cyclic(6).relabeled({1: 3, 2: 6, 3: 1, 4: 5, 5: 2, 6: 4}, [4, 2, 6, 1, 3, 5])
    for desired in range(1, 7):
        t, store = simulate(plan_cyclic(ring, desired, seed=desired), desired)
        assert t.decoded == store.message(desired)
        assert rate(t) == Fraction(2, 7)


def test_weighted_sums_match_worked_example():
    plan = plan_fully_connected(make_fully_connected(4), 1, seed=0, q=F13, alpha=range(1, 13), permute=False)
    a, b, c, d = 1, 2, 3, 4
    expected = [
        Equation.of((a, 1, 1), (b, 1, 2)),
        Equation.of((a, 2, 3), (c, 1, 4)),
        Equation.of((a, 3, 5), (d, 1, 6)),
        Equation.of((b, 1, 7), (c, 1, 8)),
        Equation.of((b, 1, 9), (d, 1, 10)),
        Equation.of((c, 1, 11), (d, 1, 12)),
    ]
    assert [eqs for eqs in plan.per_database] == [(e,) for e in expected]
    assert Fraction(plan.l, plan.downloads) == Fraction(1, 2)


def test_weighted_sums_answer_and_full_solution():
    plan = plan_fully_connected(make_fully_connected(4), 1, seed=0, q=F13, alpha=range(1, 13), permute=False)
    w = {1: (4, 11, 6), 2: (9, 0, 0), 3: (12, 0, 0), 4: (2, 0, 0)}
    store = MessageStore(F13, 3, tuple(w[m] for m in (1, 2, 3, 4)))
    t = answer_query(plan, store)
    assert t.answers[0] == ((4 + 2 * 9) % 13,)
    assert decode(t) == (4, 11, 6)
    a, b, unknowns = linear_system(t)
    x = dict(zip(unknowns, solve_system(F13, GfMatrix(a), b)))
    assert (x[(2, 1)], x[(3, 1)], x[(4, 1)]) == (9, 12, 2)


@pytest.mark.parametrize("k,expected", [(4, Fraction(1, 2)), (6, Fraction(1, 3))])
def test_weighted_sum_rates(k, expected):
    system = make_fully_connected(k)
    for desired in (1, k):
        t, store = simulate(plan_fully_connected(system, desired, seed=2), 2)
        assert t.decoded == store.message(desired)
        assert rate(t) == expected


def test_weighted_sums_errors():
    with pytest.raises(UnsupportedStructureError):
        plan_fully_connected(make_fully_connected(3), 1, 0)
    with pytest.raises(DomainError):
        plan_fully_connected(make_fully_connected(4), 1, 0, q=FieldSpec(11))
    with pytest.raises(UnsupportedStructureError):
        plan_fully_connected(make_cyclic(4), 1, 0)


def test_weighted_sums_reject_rank_deficient_coefficients():
    # b1,c1,d1 equations 1*b+1*c, 1*b+1*d, 1*c+12*d are dependent over F_13
    alpha = [1, 2, 3, 4, 5, 6, 1, 1, 1, 1, 1, 12]
    with pytest.raises(DecodabilityError):
        plan_fully_connected(make_fully_connected(4), 1, 0, q=F13, alpha=alpha)


def test_m3_plan_counts():
    plan = plan_m3_example(1, seed=0)
    assert [len(q) for q in plan.per_database] == [15, 15, 15, 15]
    t, store = simulate(plan)
    assert t.decoded == store.message(1)
    assert rate(t) == Fraction(3, 10)


@pytest.mark.parametrize("desired", range(1, 7))
def test_m3_plan_every_message(desired):
    t, store = simulate(plan_m3_example(desired, seed=desired), desired)
    assert t.decoded == store.message(desired)
    assert [len(a) for a in t.answers] == [15, 15, 15, 15]


def test_m3_plan_rejects_other_systems():
    with pytest.raises(UnsupportedStructureError):
        plan_m3_example(1, 0, system=make_cyclic(6))


def test_zero_store_gives_zero_answers():
    plan = plan_cyclic(make_cyclic(4), 2, seed=1)
    t = answer_query(plan, zero_messages(plan.system, plan.q, plan.l))
    assert set(t.flat_answers()) == {0}


def test_answerability_enforced():
    system = make_cyclic(4)
    per_db = [(), (), (), ()]
    per_db[1] = (Equation.of((1, 1)),)  # database 2 stores messages 2 and 3
    plan = QueryPlan(system, 1, FieldSpec(2), 1, tuple(per_db), identity_permutations(4, 1), "handmade")
    assert plan.unanswerable() == [(2, 1)]
    with pytest.raises(AnswerabilityError, match="database 2 does not store message 1"):
        answer_query(plan, zero_messages(system, FieldSpec(2), 1))


def test_decode_failure_is_loud():
    plan = plan_sun_jafar_332(1, seed=0)
    per_db = list(plan.per_database)
    per_db[0] = per_db[0][:2]
    broken = dataclasses.replace(plan, per_database=tuple(per_db))
    t = answer_query(broken, random_messages(TRIANGLE, broken.q, broken.l, 0))
    with pytest.raises(DecodabilityError):
        decode(t)


def test_cyclic_single_repetition_matches_oracle():
    plan = plan_cyclic(make_cyclic(4), 3, seed=2, pairs=[(1, 3)])
    t, store = simulate(plan, 8)
    assert verify.brute_force_recover(t) == t.decoded == store.message(3)


def test_transcript_round_trip(tmp_path):
    t, _ = simulate(plan_fully_connected(make_fully_connected(5), 3, seed=4))
    p = tmp_path / "t.json"
    p.write_text(dumps_transcript(t))
    back = load_transcript(p)
    assert back == t
    assert transcript_from_dict(transcript_to_dict(t)) == t


def test_applicable_schemes():
    assert applicable_schemes(TRIANGLE) == ["download-all", "sun-jafar-332", "cyclic"]
    assert applicable_schemes(make_fully_connected(4)) == ["download-all", "fully-connected"]
    assert applicable_schemes(THREE_PER_DATABASE) == ["download-all", "m3-example"]
    assert applicable_schemes(COMPLETE_BIPARTITE_3_3) == ["download-all"]


def test_build_plan_routes_small_fully_connected():
    assert build_plan("fully-connected", make_fully_connected(2), 1).scheme == "download-all"
    assert build_plan("fully-connected", make_fully_connected(3), 1).scheme == "cyclic"
    with pytest.raises(UnsupportedStructureError):
        build_plan("cyclic", COMPLETE_BIPARTITE_3_3, 1)
    with pytest.raises(UnsupportedStructureError):
        build_plan("no-such-scheme", TRIANGLE, 1)


def test_plans_are_deterministic():
    for scheme, system in [("cyclic", make_cyclic(5)), ("fully-connected", make_fully_connected(5)),
                           ("m3-example", THREE_PER_DATABASE), ("sun-jafar-332", TRIANGLE)]:
        assert build_plan(scheme, system, 2, seed=11) == build_plan(scheme, system, 2, seed=11)
