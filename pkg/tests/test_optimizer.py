import numpy as np
import pytest

from dermforge.classes.AdamOptimizer import AdamOptimizer
from dermforge.classes.ParamStore import ParamStore
from dermforge.classes.PlateauScheduler import PlateauScheduler
from dermforge.schemas.config import SchedulerConfig
from dermforge.utils.exceptions import ShapeError


@pytest.fixture
def store() -> ParamStore:
    return ParamStore({
        "dense/kernel": np.array([[1.0, -2.0], [0.5, 3.0]]),
        "bn/moving_mean": np.array([0.25, 0.75]),
    })


def test_first_step_moves_each_weight_by_about_lr(store):
    before = store["dense/kernel"].copy()
    optimizer = AdamOptimizer(store, learning_rate=1e-3)
    grad = np.array([[0.3, -4.0], [1e-2, 7.0]])
    optimizer.step({"dense/kernel": grad})
    np.testing.assert_allclose(before - store["dense/kernel"], 1e-3 * np.sign(grad), rtol=1e-4)


def test_moving_statistics_are_not_optimised(store):
    optimizer = AdamOptimizer(store, learning_rate=1e-3)
    assert list(optimizer.state.m) == ["dense/kernel"]
    optimizer.step({"dense/kernel": np.ones((2, 2))})
    np.testing.assert_array_equal(store["bn/moving_mean"], [0.25, 0.75])


def test_zero_learning_rate_leaves_parameters(store):
    before = store["dense/kernel"].copy()
    optimizer = AdamOptimizer(store, learning_rate=0.0)
    optimizer.step({"dense/kernel": np.full((2, 2), 5.0)})
    np.testing.assert_array_equal(store["dense/kernel"], before)
    assert optimizer.state.t == 1


def test_bias_correction_over_two_steps(store):
    optimizer = AdamOptimizer(store, learning_rate=0.1)
    g = np.full((2, 2), 2.0)
    optimizer.step({"dense/kernel": g})
    optimizer.step({"dense/kernel": g})
    # a constant gradient keeps m_hat = g and v_hat = g^2
    np.testing.assert_allclose(optimizer.state.m["dense/kernel"] / (1 - 0.9 ** 2), g)
    np.testing.assert_allclose(optimizer.state.v["dense/kernel"] / (1 - 0.999 ** 2), g ** 2)


def test_gradient_shape_mismatch(store):
    optimizer = AdamOptimizer(store, learning_rate=1e-3)
    with pytest.raises(ShapeError):
        optimizer.step({"dense/kernel": np.ones(4)})
    with pytest.raises(ShapeError):
        optimizer.step({})


def test_plateau_divides_by_ten_after_patience():
    scheduler = PlateauScheduler(1e-3)
    assert scheduler.update(1.0) == 1e-3
    assert scheduler.update(1.0) == 1e-3
    assert scheduler.update(0.99995) == 1e-3  # below min_delta
    assert scheduler.update(1.0) == pytest.approx(1e-4)
    assert scheduler.decays == 1


def test_improvement_resets_patience():
    scheduler = PlateauScheduler(1e-3)
    for loss in (1.0, 1.0, 1.0, 0.9, 0.9, 0.9):
        lr = scheduler.update(loss)
    assert lr == 1e-3
    assert scheduler.update(0.9) == pytest.approx(1e-4)


def test_schedule_floors_at_min_lr_then_exhausts():
    scheduler = PlateauScheduler(1e-3, SchedulerConfig())
    rates = [scheduler.update(1.0) for _ in range(10)]
    assert rates == pytest.approx([1e-3] * 3 + [1e-4] * 3 + [1e-5] * 4)
    assert rates[-1] == pytest.approx(1e-5)
    assert scheduler.exhausted
    assert all(a >= b for a, b in zip(rates, rates[1:]))
