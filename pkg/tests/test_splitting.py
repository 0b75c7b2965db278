import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topnbench.interactions import InteractionMatrix
from topnbench.splitting import split_per_user

from conftest import make_records


def matrix_with_degrees(degrees):
    pairs = [(u, f"i{j}") for u, m in enumerate(degrees) for j in range(m)]
    return InteractionMatrix.from_records(make_records(pairs))


def test_five_interactions_split_3_1_1():
    fold = split_per_user(matrix_with_degrees([5]), seed=1)
    assert len(fold.train.row_items(0)) == 3
    assert len(fold.validation.row_items(0)) == 1
    assert len(fold.test.row_items(0)) == 1


def test_ten_interactions_split_6_2_2():
    fold = split_per_user(matrix_with_degrees([10]), seed=1)
    assert len(fold.train.row_items(0)) == 6
    assert len(fold.validation.row_items(0)) == 2
    assert len(fold.test.row_items(0)) == 2


def test_same_seed_and_repetition_reproduces_exactly():
    matrix = matrix_with_degrees([5, 8, 13, 21])
    a = split_per_user(matrix, seed=99, repetition=2)
    b = split_per_user(matrix, seed=99, repetition=2)
    for part in ("train", "validation", "test"):
        assert (getattr(a, part).matrix != getattr(b, part).matrix).nnz == 0


def test_repetitions_differ():
    matrix = matrix_with_degrees([9, 9, 9, 9, 9, 9])
    a = split_per_user(matrix, seed=99, repetition=0)
    b = split_per_user(matrix, seed=99, repetition=1)
    assert (a.test.matrix != b.test.matrix).nnz > 0


def test_too_few_interactions_is_error():
    with pytest.raises(ValueError, match="need >= 3"):
        split_per_user(matrix_with_degrees([5, 2]))


@settings(max_examples=40, deadline=None)
@given(
    degrees=st.lists(st.integers(3, 40), min_size=1, max_size=20),
    seed=st.integers(0, 2**32),
    repetition=st.integers(0, 4),
)
def test_disjoint_and_covering_per_user(degrees, seed, repetition):
    matrix = matrix_with_degrees(degrees)
    fold = split_per_user(matrix, seed=seed, repetition=repetition)
    for user, m in enumerate(degrees):
        train = set(fold.train.row_items(user))
        val = set(fold.validation.row_items(user))
        test = set(fold.test.row_items(user))
        assert train and val and test
        assert not (train & val or train & test or val & test)
        assert train | val | test == set(matrix.row_items(user))
        # uses the user's own interactions only
        assert len(train) + len(val) + len(test) == m
