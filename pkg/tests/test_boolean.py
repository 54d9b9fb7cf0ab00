import numpy as np
import pytest
from hypothesis import given, settings

from conftest import bundles_of, identical_instances, instances, naive_is_ef1, tables_of
from fairdiv import (
    Instance,
    InvalidRange,
    NotIdentical,
    SetValuation,
    boolean_ef1_identical,
    neg_boolean_ef1,
)
from fairdiv.boolean import boolean_structure_holds
from fairdiv.generate import gen_boolean

X1, X2 = 1, 2


def test_neg_pair_disliked_together():
    v = SetValuation.from_function(2, lambda s: -1 if s == 3 else 0)
    alloc = neg_boolean_ef1(Instance.identical_agents(2, v))
    assert alloc.as_lists() == [[0, 1], []]
    assert naive_is_ef1([v.table.tolist()] * 2, alloc.as_lists())


def test_neg_all_zero_gives_everything_to_first():
    v = SetValuation(2, [0] * 4)
    alloc = neg_boolean_ef1(Instance.identical_agents(2, v))
    assert alloc.as_lists() == [[0, 1], []]


def test_neg_nonidentical_minimal_common_set():
    v1 = SetValuation.from_function(2, lambda s: -1 if s & X1 else 0)
    v2 = SetValuation.from_function(2, lambda s: -1 if s & X2 else 0)
    inst = Instance((v1, v2), identical_flag=False)
    alloc = neg_boolean_ef1(inst)
    assert alloc.as_lists() == [[0, 1], []]
    assert v1.child_summary(X1 | X2).has_arrow(-1, 0)
    assert naive_is_ef1(tables_of(inst), alloc.as_lists())


def test_neg_rejects_positive_values():
    with pytest.raises(InvalidRange):
        neg_boolean_ef1(Instance.identical_agents(2, SetValuation(1, [0, 1])))


def test_identical_all_liked():
    v = SetValuation.from_function(2, lambda s: 1 if s else 0)
    alloc = boolean_ef1_identical(Instance.identical_agents(2, v))
    assert alloc.as_lists() == [[0], [1]]
    assert boolean_structure_holds(v, alloc, [0, 1], 1)


def test_identical_all_zero():
    v = SetValuation(2, [0] * 4)
    alloc = boolean_ef1_identical(Instance.identical_agents(3, v))
    assert alloc.as_lists() == [[0, 1], [], []]
    assert boolean_structure_holds(v, alloc, [0, 1, 2], 1)


def test_identical_single_item_three_agents():
    v = SetValuation(1, [0, 1])
    alloc = boolean_ef1_identical(Instance.identical_agents(3, v))
    assert alloc.as_lists() == [[0], [], []]
    assert naive_is_ef1([[0, 1]] * 3, alloc.as_lists())


def test_identical_requires_identical():
    inst = Instance((SetValuation(1, [0, 1]), SetValuation(1, [0, 0])))
    with pytest.raises(NotIdentical):
        boolean_ef1_identical(inst)


def test_sub_problem_leaves_other_agents_empty():
    v = SetValuation.from_function(3, lambda s: 1 if s else 0)
    inst = Instance.identical_agents(4, v)
    alloc = boolean_ef1_identical(inst, agents=[1, 3], items=0b110)
    assert alloc.bundles[0] == 0 and alloc.bundles[2] == 0
    assert alloc.bundles[1] | alloc.bundles[3] == 0b110


def test_thousand_random_nonidentical_neg_instances():
    r = np.random.default_rng(11)
    for _ in range(1000):
        n, m = int(r.integers(2, 5)), int(r.integers(4, 9))
        inst = gen_boolean(n, m, -1, identical=False, seed=int(r.integers(2**31)))
        alloc = neg_boolean_ef1(inst)
        assert alloc.is_complete(m)
        assert naive_is_ef1(tables_of(inst), bundles_of(alloc))


@settings(max_examples=300, deadline=None)
@given(instances(values=(0, -1), max_n=4, max_m=5))
def test_neg_output_is_ef1_and_disliked_bundles_resolved(inst):
    alloc = neg_boolean_ef1(inst)
    assert alloc.is_complete(inst.m)
    assert naive_is_ef1(tables_of(inst), bundles_of(alloc))
    # only the agent taking the final leftover may hold a disliked bundle
    # with no child valued 0
    stuck = [
        i for i, v in enumerate(inst.valuations)
        if v.table[alloc.bundles[i]] == -1 and not v.child_summary(alloc.bundles[i]).has_arrow(-1, 0)
    ]
    assert len(stuck) <= 1


@settings(max_examples=300, deadline=None)
@given(identical_instances(values=(0, 1), max_m=6))
def test_identical_output_is_ef1_with_structure(inst):
    alloc = boolean_ef1_identical(inst)
    assert alloc.is_complete(inst.m)
    assert naive_is_ef1(tables_of(inst), bundles_of(alloc))
    assert boolean_structure_holds(inst.valuations[0], alloc, list(range(inst.n)), 1)


@settings(max_examples=300, deadline=None)
@given(identical_instances(values=(0, -1), max_m=6))
def test_identical_neg_structure(inst):
    alloc = neg_boolean_ef1(inst)
    assert boolean_structure_holds(inst.valuations[0], alloc, list(range(inst.n)), -1)


@settings(max_examples=300, deadline=None)
@given(instances(values=(0, -1), max_n=4, max_m=5))
def test_neg_later_agents_dislike_earlier_bundles(inst):
    log = []
    alloc = neg_boolean_ef1(inst, log=log)
    served = [i for i, _ in log]
    for pos, (i, items) in enumerate(log):
        assert alloc.bundles[i] == items
        later = [j for j in range(inst.n) if j not in served[: pos + 1]]
        for j in later:
            assert inst.valuations[j].table[items] == -1
