import numpy as np
import pytest

from mastery_rpca.preprocess import RangeError, apply, bin_levels, invert_scores, invert_unit
from mastery_rpca.render import NEG, POS, colorize, heatmap, read_ppm, scatter


def test_invert_then_bin_endpoints():
    scores = np.array([[100.0, 0.0, 55.0]])
    inv = invert_scores(scores)
    np.testing.assert_array_equal(inv, [[0.0, 100.0, 45.0]])
    np.testing.assert_array_equal(bin_levels(inv), [[0, 9, 4]])
    np.testing.assert_array_equal(apply(scores, ["invert", "bin"]), [[0, 9, 4]])


def test_bin_level_edges():
    np.testing.assert_array_equal(bin_levels([[0, 9.999, 10, 99.9, 100]]), [[0, 0, 1, 9, 9]])
    np.testing.assert_array_equal(bin_levels([[0.5, 1.0]], 4, 0, 1), [[2, 3]])


def test_all_equal_scores_single_level():
    out = apply(np.full((4, 5), 73.0), ["invert", "bin"])
    assert np.unique(out).tolist() == [2.0]


def test_invert_unit():
    np.testing.assert_allclose(invert_unit([[0.25, 1.0]]), [[0.75, 0.0]])
    with pytest.raises(RangeError):
        invert_unit([[1.5]])


def test_range_error_lists_positions():
    with pytest.raises(RangeError) as exc:
        invert_scores([[50, 120], [-1, 3]])
    assert exc.value.positions == [(0, 1), (1, 0)]
    assert "(0,1)" in str(exc.value) and "(1,0)" in str(exc.value)


def test_unknown_mode():
    with pytest.raises(ValueError):
        apply([[1.0]], ["square"])


def test_zero_matrix_single_colour():
    img = read_ppm(heatmap(np.zeros((5, 7)), cell=3))
    assert img.shape == (15, 21, 3)
    assert np.unique(img.reshape(-1, 3), axis=0).tolist() == [[255, 255, 255]]


def test_identity_diagonal_distinct():
    img = read_ppm(heatmap(np.eye(6), cell=2))
    diag = {tuple(img[2 * i, 2 * i]) for i in range(6)}
    off = {tuple(img[2 * i, 2 * ((i + 1) % 6)]) for i in range(6)}
    assert diag == {tuple(POS.astype(int))} and off == {(255, 255, 255)}


def test_colormap_anchors():
    rgb = colorize(np.array([[-2.0, 0.0, 2.0]]))
    np.testing.assert_array_equal(rgb[0], [NEG, [255, 255, 255], POS])


def test_heatmap_deterministic():
    M = np.random.default_rng(0).normal(size=(9, 4))
    assert heatmap(M) == heatmap(M.copy())
    assert heatmap(M).startswith(b"P6\n16 36\n255\n")


def test_scatter_draws_points():
    pts = np.array([[0.0, 0.0], [1.0, 1.0]])
    img = read_ppm(scatter(pts, size=64, dot=1))
    assert (img == 0).all(axis=2).sum() > 0
    margin = 4
    assert img[64 - 1 - margin, margin].tolist() == [0, 0, 0]  # lower-left point
    assert img[margin, 64 - 1 - margin].tolist() == [0, 0, 0]  # upper-right point
    assert scatter(pts, 64) == scatter(pts.copy(), 64)
    assert read_ppm(scatter(np.zeros((0, 2)), 16)).min() == 255
