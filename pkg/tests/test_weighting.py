import math

import numpy as np
import pytest
import scipy.sparse as sp

from topnbench.recommenders import weight_matrix


def csr(rows):
    return sp.csr_matrix(np.asarray(rows, dtype=float))


def test_none_scheme_gives_ones():
    mat = weight_matrix(csr([[1, 0], [3, 1]]), "none")
    assert set(mat.data.tolist()) == {1.0}
    assert mat.nnz == 3


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError, match="unknown weighting"):
        weight_matrix(csr([[1]]), "idf")


def test_tfidf_two_user_toy():
    # Two users, two items, each item has df = 1: every entry is log(1 + 2/1).
    mat = weight_matrix(csr([[1, 0], [0, 1]]), "tfidf")
    expected = math.log(3.0)
    np.testing.assert_allclose(mat.data, [expected, expected], rtol=1e-12)


def test_tfidf_popular_item_weighs_less():
    mat = weight_matrix(csr([[1, 1], [1, 0], [1, 0]]), "tfidf").toarray()
    assert mat[0, 0] < mat[0, 1]


def test_bm25_b_zero_ignores_user_length():
    # User 0 has 1 interaction, user 1 has 3; with b=0 the entries for the
    # shared item must match exactly.
    mat = weight_matrix(csr([[1, 0, 0, 0], [1, 1, 1, 0]]), "bm25", k1=1.5, b=0.0).toarray()
    assert mat[0, 0] == pytest.approx(mat[1, 0], rel=1e-15)


def test_bm25_hand_formula():
    rows = csr([[1, 1, 0], [1, 0, 1], [1, 0, 0]])
    k1, b = 1.2, 0.75
    mat = weight_matrix(rows, "bm25", k1=k1, b=b).toarray()
    n_users = 3
    avg_len = (2 + 2 + 1) / 3
    for user, lengths in ((0, 2), (1, 2), (2, 1)):
        for item, df in ((0, 3), (1, 1), (2, 1)):
            if rows[user, item] == 0:
                continue
            idf = math.log((n_users - df + 0.5) / (df + 0.5) + 1)
            denom = 1 + k1 * (1 - b + b * lengths / avg_len)
            assert mat[user, item] == pytest.approx(idf * (k1 + 1) / denom, rel=1e-12)


def test_bm25_parameter_validation():
    with pytest.raises(ValueError, match="k1"):
        weight_matrix(csr([[1]]), "bm25", k1=0.0)
    with pytest.raises(ValueError, match="b in"):
        weight_matrix(csr([[1]]), "bm25", b=1.5)
