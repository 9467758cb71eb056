import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mastery_rpca.matrix import (
    DenseMatrix,
    frobenius_norm,
    l1_norm,
    nuclear_norm,
    numerical_rank,
    read_csv,
    svd,
    write_csv,
)

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.float64, s, elements=finite)
)


def test_dense_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        DenseMatrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        DenseMatrix([[1.0, np.inf]])


def test_dense_matrix_label_lengths():
    M = DenseMatrix(np.zeros((2, 3)), ["a", "b"], ["x", "y", "z"])
    assert M.n_rows == 2 and M.n_cols == 3
    with pytest.raises(ValueError):
        DenseMatrix(np.zeros((2, 3)), ["a"], None)
    with pytest.raises(ValueError):
        DenseMatrix(np.zeros((2, 3)), None, ["x"])


def test_dense_matrix_is_immutable():
    M = DenseMatrix(np.eye(2))
    with pytest.raises(ValueError):
        M.values[0, 0] = 5.0


def test_svd_identity():
    f = svd(np.eye(3))
    np.testing.assert_allclose(f.singular_values, [1, 1, 1])


def test_svd_diagonal_signed_basis():
    f = svd(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(f.singular_values, [3, 1])
    np.testing.assert_allclose(np.abs(f.left_vectors), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(np.abs(f.right_vectors), np.eye(2), atol=1e-12)


def test_svd_reconstruction_seeded():
    A = np.random.default_rng(7).normal(size=(4, 3))
    f = svd(A)
    np.testing.assert_allclose(f.reconstruct(), A, atol=1e-9)
    assert f.left_vectors.shape == (4, 3) and f.right_vectors.shape == (3, 3)


def test_svd_sign_canonical():
    A = np.random.default_rng(1).normal(size=(6, 4))
    f1, f2 = svd(A), svd(-A)
    for f in (f1, f2):
        U = f.left_vectors
        pivots = U[np.argmax(np.abs(U), axis=0), np.arange(U.shape[1])]
        assert np.all(pivots > 0)
    np.testing.assert_allclose(f1.left_vectors, f2.left_vectors, atol=1e-12)
    np.testing.assert_allclose(f1.right_vectors, -f2.right_vectors, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_svd_invariants(A):
    f = svd(A)
    s = f.singular_values
    assert s.size == min(A.shape)
    assert np.all(s >= 0) and np.all(np.diff(s) <= 1e-12)
    scale = max(1.0, np.linalg.norm(A))
    assert np.linalg.norm(f.reconstruct() - A) <= 1e-9 * scale
    r = s.size
    np.testing.assert_allclose(f.left_vectors.T @ f.left_vectors, np.eye(r), atol=1e-9)
    np.testing.assert_allclose(f.right_vectors.T @ f.right_vectors, np.eye(r), atol=1e-9)


@pytest.mark.parametrize(
    "A, expected",
    [(np.zeros((3, 2)), 0.0), ([[3.0, 4.0]], 5.0), (np.eye(2), math.sqrt(2))],
)
def test_frobenius(A, expected):
    assert frobenius_norm(A) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "A, expected",
    [(np.zeros((2, 2)), 0.0), ([[1.0, -2.0], [0.0, 3.0]], 6.0), (np.full((10, 10), 0.5), 50.0)],
)
def test_l1(A, expected):
    assert l1_norm(A) == expected


def test_nuclear_norm_examples():
    assert nuclear_norm(np.diag([3.0, 1.0])) == pytest.approx(4.0, abs=1e-12)
    rng = np.random.default_rng(3)
    u = rng.normal(size=6)
    v = rng.normal(size=4)
    assert nuclear_norm(np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v))) == pytest.approx(1.0, abs=1e-12)
    A = rng.normal(size=(5, 4))
    assert abs(nuclear_norm(A) - np.linalg.svd(A, compute_uv=False).sum()) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(matrices, st.randoms(use_true_random=False))
def test_norm_ordering_and_permutation_invariance(A, rnd):
    nuc, fro, l1 = nuclear_norm(A), frobenius_norm(A), l1_norm(A)
    assert nuc >= fro - 1e-9 * max(1, fro) and fro >= 0
    rows = list(range(A.shape[0]))
    cols = list(range(A.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    B = A[np.ix_(rows, cols)]
    assert frobenius_norm(B) == pytest.approx(fro, rel=1e-12, abs=1e-12)
    assert l1_norm(B) == pytest.approx(l1, rel=1e-12, abs=1e-12)
    assert nuclear_norm(B) == pytest.approx(nuc, rel=1e-9, abs=1e-9)


def test_numerical_rank():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(8, 2)) @ rng.normal(size=(2, 6))
    assert numerical_rank(A) == 2
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_csv_roundtrip_plain(tmp_path):
    A = np.random.default_rng(2).normal(size=(4, 3))
    write_csv(tmp_path / "a.csv", A)
    B = read_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(B.values, A)
    assert B.row_labels is None and B.col_labels is None


def test_csv_roundtrip_labels(tmp_path):
    M = DenseMatrix([[1.5, 2.0], [3.0, -4.25]], ["s1", "s2"], ["topicA", "topicB"])
    write_csv(tmp_path / "m.csv", M)
    text = (tmp_path / "m.csv").read_text()
    assert text.splitlines()[0] == ",topicA,topicB"
    back = read_csv(tmp_path / "m.csv", header=True, row_labels=True)
    assert back.row_labels == ("s1", "s2") and back.col_labels == ("topicA", "topicB")
    np.testing.assert_array_equal(back.values, M.values)


def test_csv_header_only_flag(tmp_path):
    (tmp_path / "h.csv").write_text("a,b\n1,2\n3,4\n")
    M = read_csv(tmp_path / "h.csv", header=True)
    assert M.col_labels == ("a", "b") and M.shape == (2, 2)
    with pytest.raises(ValueError):
        read_csv(tmp_path / "h.csv")  # labels are never guessed


def test_csv_ragged(tmp_path):
    (tmp_path / "r.csv").write_text("1,2\n3\n")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "r.csv")
