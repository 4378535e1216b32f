import dataclasses
from fractions import Fraction

import pytest

from graphpir import verify
from graphpir.analysis import upper_bound
from graphpir.errors import OracleScaleError
from graphpir.gf import FieldSpec, mat_rank
from graphpir.schemes import (
    QueryPlan,
    Transcript,
    answer_query,
    decoding_matrix,
    plan_cyclic,
    plan_download_all,
    plan_fully_connected,
    plan_m3_example,
    plan_sun_jafar_332,
    run,
)
from graphpir.schemes.base import identity_permutations
from graphpir.schemes.fully_connected import _equations
from graphpir.storage import TRIANGLE, make_cyclic, make_fully_connected, random_messages, zero_messages

F13 = FieldSpec(13)


def simulate(plan, seed=0):
    return run(plan, random_messages(plan.system, plan.q, plan.l, seed))


def drop_equation(t: Transcript, database: int, index: int) -> Transcript:
    per_db = [list(e) for e in t.plan.per_database]
    answers = [list(a) for a in t.answers]
    del per_db[database - 1][index]
    del answers[database - 1][index]
    plan = dataclasses.replace(t.plan, per_database=tuple(tuple(e) for e in per_db))
    return Transcript(plan, tuple(tuple(a) for a in answers))


def test_canonical_view_of_compressed_database():
    plan = plan_cyclic(TRIANGLE, 1, seed=3, pairs=[(1, 2)])
    view = verify.canonicalize(plan, 3)
    assert view.equations == (((2, 1), (3, 1)), ((2, 2), (3, 2)))


@pytest.mark.parametrize("desired", [1, 2, 3, 4])
def test_canonical_view_of_weighted_sum(desired):
    system = make_fully_connected(4)
    plan = plan_fully_connected(system, desired, seed=desired)
    for db in range(1, 7):
        x, y = system.databases[db - 1]
        view = verify.canonicalize(plan, db)
        assert view.equations == (((x, 1), (y, 1)),)
        assert view.coefficient_profile == ("uniform-ensemble",)


@pytest.mark.parametrize("k", range(3, 7))
def test_cyclic_private(k):
    assert verify.check_privacy("cyclic", make_cyclic(k), range(3))


@pytest.mark.parametrize("k", range(4, 7))
def test_weighted_sums_private(k):
    assert verify.check_privacy("fully-connected", make_fully_connected(k), range(3))


def test_missing_dummy_sum_detected():
    def without_dummy(system, desired, seed):
        plan = plan_sun_jafar_332(desired, seed)
        if desired != 1:
            return plan
        per_db = list(plan.per_database)
        per_db[2] = per_db[2][:-1]
        return dataclasses.replace(plan, per_database=tuple(per_db))

    result = verify.check_privacy(without_dummy, TRIANGLE, range(3))
    assert not result.passed
    assert result.database == 3
    assert "database 3" in result.detail


def test_fetching_only_the_desired_message_detected():
    def naive(system, desired, seed):
        full = plan_download_all(system, desired)
        per_db = tuple(tuple(e for e in eqs if e.messages == (desired,)) for eqs in full.per_database)
        return dataclasses.replace(full, per_database=per_db)

    result = verify.check_privacy(naive, make_cyclic(4), [0])
    assert not result.passed and result.pair == (1, 2)
    assert verify.check_privacy("download-all", make_cyclic(4), [0]).passed


def test_literal_coefficients_must_match():
    def leaky(system, desired, seed):
        alpha = list(range(1, 13)) if desired == 1 else list(range(12, 0, -1))
        return plan_fully_connected(system, desired, seed, q=F13, alpha=alpha)

    def literal(system, desired, seed):
        return dataclasses.replace(leaky(system, desired, seed), coefficient_mode="literal")

    assert not verify.check_privacy(literal, make_fully_connected(4), [0]).passed


def test_decodability_pass_and_rank():
    plan = plan_fully_connected(make_fully_connected(4), 1, seed=0, q=F13, alpha=range(1, 13), permute=False)
    rep = verify.check_decodability(simulate(plan))
    assert rep.passed and rep.rank == 6 == rep.unknowns


@pytest.mark.parametrize(
    "plan",
    [
        plan_download_all(make_cyclic(5), 2),
        plan_sun_jafar_332(2, 0),
        plan_cyclic(make_cyclic(4), 4, 0),
        plan_fully_connected(make_fully_connected(5), 5, 0),
        plan_m3_example(3, 0),
    ],
    ids=lambda p: p.scheme,
)
def test_every_scheme_decodable(plan):
    assert verify.check_decodability(simulate(plan)).passed


def test_rank_deficient_weighted_sums_fail():
    system = make_fully_connected(4)
    alpha = [1, 2, 3, 4, 5, 6, 1, 1, 1, 1, 1, 12]
    assert mat_rank(F13, decoding_matrix(system, 1, alpha)) == 5
    plan = QueryPlan(
        system, 1, F13, 3, tuple((e,) for e in _equations(system, 1, alpha)),
        identity_permutations(4, 3), "handmade",
    )
    t = answer_query(plan, random_messages(system, F13, 3, 0))
    rep = verify.check_decodability(t)
    assert not rep.passed
    assert rep.rank == 5 and rep.rank_with_desired > rep.rank
    assert rep.undetermined


def test_rate_verdicts():
    t = simulate(plan_cyclic(TRIANGLE, 1, 0))
    r = verify.measure_rate(t, upper_bound(TRIANGLE))
    assert (r.rate, r.verdict) == (Fraction(1, 2), verify.EQUALS_CAPACITY)

    f5 = make_fully_connected(5)
    r = verify.measure_rate(simulate(plan_fully_connected(f5, 2, 0)), upper_bound(f5))
    assert (r.rate, r.verdict) == (Fraction(2, 5), verify.EQUALS_CAPACITY)

    r = verify.measure_rate(simulate(plan_sun_jafar_332(1, 0)), upper_bound(TRIANGLE))
    assert (r.rate, r.verdict) == (Fraction(4, 9), verify.BELOW_BOUND)

    r = verify.measure_rate(simulate(plan_m3_example(1, 0)))
    assert (r.rate, r.bound, r.capacity, r.verdict) == (Fraction(3, 10), Fraction(1, 2), None, verify.BELOW_BOUND)


def test_rate_above_bound_flagged():
    # a transcript that claims L=2 from 3 downloads on the triangle exceeds 1/2
    plan = plan_download_all(TRIANGLE, 1)
    fake = dataclasses.replace(plan, l=2, permutations=identity_permutations(3, 2))
    t = Transcript(fake, ((0, 0), (0,), ()))
    assert verify.measure_rate(t, upper_bound(TRIANGLE)).verdict == verify.VIOLATES_BOUND


@pytest.mark.parametrize("seed", range(3))
def test_oracle_matches_decode_on_ring_repetition(seed):
    t = simulate(plan_cyclic(TRIANGLE, 1 + seed, seed, pairs=[(1, 2)]), seed)
    assert verify.brute_force_recover(t, TRIANGLE) == t.decoded


def test_oracle_reports_ambiguity():
    t = simulate(plan_cyclic(TRIANGLE, 1, 0, pairs=[(1, 2)]))
    for db, idx in [(1, 2), (2, 2)]:
        assert verify.brute_force_recover(drop_equation(t, db, idx)) == verify.AMBIGUOUS


def test_oracle_zero_store():
    plan = plan_cyclic(make_cyclic(4), 2, 0, pairs=[(2, 4)])
    t = answer_query(plan, zero_messages(plan.system, plan.q, plan.l))
    assert verify.brute_force_recover(t) == (0, 0, 0, 0)


def test_oracle_budget():
    t = simulate(plan_cyclic(make_cyclic(5), 1, 0))
    with pytest.raises(OracleScaleError):
        verify.brute_force_recover(t)


def test_desired_side_ranks_m3():
    plan = plan_m3_example(1, 0)
    assert verify.desired_side_ranks(plan) == {1: 9, 2: 9}


def test_report_json_shape():
    t = simulate(plan_cyclic(TRIANGLE, 2, 0))
    rep = verify.verification_report(
        verify.check_privacy("cyclic", TRIANGLE, [0]),
        verify.check_decodability(t),
        verify.measure_rate(t, upper_bound(TRIANGLE)),
    )
    assert rep == {
        "privacy": "pass",
        "decodability": "pass",
        "rate": {"num": 1, "den": 2},
        "bound": {"num": 1, "den": 2},
        "verdict": "equals-capacity",
    }
