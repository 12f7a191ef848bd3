import numpy as np
import pytest

from opcontrol.dynamics import (
    CONSTANT_C,
    Constant,
    InitDistribution,
    TrajectoryGrid,
    integrate,
    test_problem_1 as tp1,
)
from opcontrol.errors import InvalidParameterError, ShapeError
from opcontrol.montecarlo import (
    STREAM_MC_MEMBER,
    EnsembleAverage,
    derived_rng,
    member_inits,
    mc_projection,
    resample_check,
)

X0 = np.array([1.0, 0.0])
SHORT = TrajectoryGrid(steps=60)


def test_zero_sigma_is_the_deterministic_trajectory():
    dist = InitDistribution(X0, 0.0)
    ref = integrate(tp1(), Constant(CONSTANT_C), np.array([1.0, 0, 0, 0]), SHORT).states[:2]
    for K in (1, 7):
        avg = mc_projection(tp1(), Constant(CONSTANT_C), dist, SHORT, K=K, seed=K)
        assert np.allclose(avg.mean, ref, atol=1e-15, rtol=0)


def test_single_member_matches_integrate():
    dist = InitDistribution(X0, 1.0)
    y0 = dist.draw(4, derived_rng(5, STREAM_MC_MEMBER, 0))
    ref = integrate(tp1(), None, y0, SHORT).states[:2]
    avg = mc_projection(tp1(), None, dist, SHORT, K=1, seed=5)
    assert np.array_equal(avg.mean, ref)
    assert avg.count == 1 and avg.master_seed == 5 and avg.times.shape == (60,)


def test_reproducible_and_batch_independent():
    dist = InitDistribution(X0, 1.0)
    a = mc_projection(tp1(), None, dist, SHORT, K=30, seed=3, batch=30)
    b = mc_projection(tp1(), None, dist, SHORT, K=30, seed=3, batch=7)
    assert np.allclose(a.mean, b.mean, rtol=1e-14, atol=1e-15)
    c = mc_projection(tp1(), None, dist, SHORT, K=30, seed=3, batch=30)
    assert np.array_equal(a.mean, c.mean)
    assert resample_check(a, c) == 0.0


def test_members_do_not_depend_on_ensemble_size():
    dist = InitDistribution(X0, 1.0)
    small = member_inits(tp1(), dist, 5, seed=11)
    large = member_inits(tp1(), dist, 50, seed=11)
    assert np.array_equal(small, large[:, :5])
    assert np.array_equal(small[:2], np.tile(X0[:, None], (1, 5)))


def test_union_mean_is_weighted_mean():
    # members 0..19 and 20..49 of one master seed form disjoint sub-ensembles
    dist = InitDistribution(X0, 1.0)
    full = mc_projection(tp1(), None, dist, SHORT, K=50, seed=2)
    inits = member_inits(tp1(), dist, 50, seed=2)
    parts = [
        np.mean([integrate(tp1(), None, inits[:, j], SHORT).states[:2] for j in idx], axis=0)
        for idx in (range(20), range(20, 50))
    ]
    union = (20 * parts[0] + 30 * parts[1]) / 50
    assert np.max(np.abs(union - full.mean)) <= 1e-12 * max(1.0, np.max(np.abs(full.mean)))


def test_zero_sigma_resample_is_zero():
    dist = InitDistribution(X0, 0.0)
    a = mc_projection(tp1(), None, dist, SHORT, K=4, seed=0)
    b = mc_projection(tp1(), None, dist, SHORT, K=4, seed=99)
    assert resample_check(a, b) == 0.0


def test_resample_difference_shrinks_with_K():
    dist = InitDistribution(X0, 1.0)
    grid = TrajectoryGrid(steps=100)
    diffs = []
    for K in (25, 100, 400):
        reps = [
            resample_check(mc_projection(tp1(), None, dist, grid, K=K, seed=2 * r),
                           mc_projection(tp1(), None, dist, grid, K=K, seed=2 * r + 1))
            for r in range(3)
        ]
        diffs.append(np.mean(reps))
    # expected factor 2 per quadrupling; only the trend is checked
    assert diffs[0] > diffs[1] > diffs[2]
    print("resample max-abs differences for K=25,100,400:", diffs)


def test_decaying_envelope_under_constant_control():
    from opcontrol.config import preset
    from opcontrol.experiments import envelope_ratio, monte_carlo

    avg = monte_carlo(preset("tp1_constant"))
    assert envelope_ratio(avg.mean[0], avg.times) < 1.0


def test_validation():
    dist = InitDistribution(X0, 1.0)
    with pytest.raises(InvalidParameterError):
        mc_projection(tp1(), None, dist, SHORT, K=0)
    a = mc_projection(tp1(), None, dist, SHORT, K=2)
    b = mc_projection(tp1(), None, dist, TrajectoryGrid(steps=10), K=2)
    with pytest.raises(ShapeError):
        resample_check(a, b)
    with pytest.raises(InvalidParameterError):
        EnsembleAverage(np.array([[np.nan, 0.0]]), 1, 0, TrajectoryGrid(steps=2))
