import numpy as np
import pytest

from dermforge.classes.Rng import Rng
from dermforge.utils.exceptions import ArgumentError


def test_same_seed_and_key_give_the_same_stream():
    a = Rng(42).child(3, 7).normal(0.0, 1.0, 16)
    b = Rng(42, (3, 7)).normal(0.0, 1.0, 16)
    np.testing.assert_array_equal(a, b)


def test_child_streams_are_independent_of_each_other():
    root = Rng(42)
    assert not np.array_equal(root.child(0).random(8), root.child(1).random(8))
    assert not np.array_equal(Rng(42).random(8), Rng(43).random(8))


def test_child_does_not_consume_the_parent_stream():
    parent = Rng(5)
    parent.child(1).random(100)
    np.testing.assert_array_equal(parent.random(4), Rng(5).random(4))


def test_uniform_bounds():
    rng = Rng(0)
    values = rng.uniform(-2.0, 3.0, 1000)
    assert values.min() >= -2.0 and values.max() < 3.0
    assert rng.uniform(1.5, 1.5) == 1.5
    with pytest.raises(ArgumentError):
        rng.uniform(1.0, 0.0)


def test_draw_dispatches_and_validates():
    rng = Rng(0)
    assert rng.draw("normal", (0.0, 1.0), 5).shape == (5,)
    assert rng.draw("uniform", (0.0, 1.0), 0).shape == (0,)
    with pytest.raises(ArgumentError):
        rng.draw("normal", (0.0, -1.0), 3)
    with pytest.raises(ArgumentError):
        rng.draw("poisson", (1.0, 0.0), 3)


def test_normal_moments_and_dtype():
    values = Rng(9).normal(2.0, 0.5, 20000, np.float32)
    assert values.dtype == np.float32
    assert abs(values.mean() - 2.0) < 0.02
    assert abs(values.std() - 0.5) < 0.02


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_must_be_64_bit_unsigned(seed):
    with pytest.raises(ArgumentError):
        Rng(seed)


def test_stream_is_pinned_across_platforms():
    np.testing.assert_array_equal(
        Rng(0).uniform(0.0, 1.0, 3),
        [0.6369616873214543, 0.2697867137638703, 0.04097352393619469],
    )
