import numpy as np
import pytest

from dermforge.utils.exceptions import NonFiniteError, ShapeError
from dermforge.classes.Rng import Rng
from dermforge.utils.tensor_ops import checked_mode, is_checked, matmul, reduce, reshape


def test_reshape_keeps_row_major_order():
    t = np.arange(6, dtype=np.float32)
    out = reshape(t, (2, 3))
    np.testing.assert_array_equal(out, [[0, 1, 2], [3, 4, 5]])
    assert out.dtype == np.float32


def test_reshape_rejects_element_count_change():
    with pytest.raises(ShapeError):
        reshape(np.zeros(6), (4, 2))


def test_matmul_checks_rank_and_inner_dimension():
    a = np.ones((2, 3))
    np.testing.assert_array_equal(matmul(a, np.ones((3, 4))), np.full((2, 4), 3.0))
    with pytest.raises(ShapeError):
        matmul(a, np.ones((2, 4)))
    with pytest.raises(ShapeError):
        matmul(np.ones(3), np.ones((3, 1)))


@pytest.mark.parametrize(
    "mode, axes, expected",
    [
        ("sum", None, 15.0),
        ("mean", 0, [1.5, 2.5, 3.5]),
        ("max", 1, [2.0, 5.0]),
    ],
)
def test_reduce(mode, axes, expected):
    t = np.arange(6, dtype=np.float64).reshape(2, 3)
    np.testing.assert_allclose(reduce(t, axes, mode), expected)


def test_reduce_rejects_invalid_axis():
    with pytest.raises(ShapeError):
        reduce(np.zeros((2, 3)), 2)
    with pytest.raises(ShapeError):
        reduce(np.zeros((2, 3)), (0, -2))


def test_checked_mode_flags_non_finite_results():
    a = np.array([[np.inf, 1.0]])
    b = np.ones((2, 1))
    assert not is_checked()
    matmul(a, b)
    with checked_mode():
        assert is_checked()
        with pytest.raises(NonFiniteError):
            matmul(a, b)
    assert not is_checked()


def test_matmul_is_associative_in_single_precision():
    rng = Rng(17)
    a, b, c = (rng.normal(0.0, 1.0, shape, np.float32) for shape in ((4, 5), (5, 3), (3, 6)))
    left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
    assert left.dtype == np.float32
    np.testing.assert_allclose(left, right, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("axes", [None, 0, (1, 2)])
def test_mean_times_count_is_sum(axes):
    t = Rng(4).uniform(-1.0, 2.0, (3, 4, 5))
    count = t.size if axes is None else np.prod([t.shape[a] for a in np.atleast_1d(axes)])
    np.testing.assert_allclose(reduce(t, axes, "mean") * count, reduce(t, axes, "sum"), rtol=1e-6, atol=1e-12)
