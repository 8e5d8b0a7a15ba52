import math

import numpy as np
import pytest

from sbrbench.tune import INT, REAL, Bound, DeConfig, optimize


def sphere_cfg(seed=0, population=20, generations=50):
    bounds = tuple(Bound(-5.0, 5.0, REAL) for _ in range(3))
    return DeConfig(population=population, generations=generations, bounds=bounds, seed=seed)


def test_config_validation():
    b = (Bound(0, 1),)
    with pytest.raises(ValueError):
        DeConfig(population=3, bounds=b)
    with pytest.raises(ValueError):
        DeConfig(crossover_rate=0.0, bounds=b)
    with pytest.raises(ValueError):
        DeConfig(mutation_factor=2.5, bounds=b)
    with pytest.raises(ValueError):
        DeConfig(bounds=())
    with pytest.raises(ValueError):
        Bound(2.0, 1.0)
    with pytest.raises(ValueError):
        Bound(0.0, 1.0, kind="complex")


def test_degenerate_bounds_collapse_to_single_point():
    bounds = (Bound(2.0, 2.0, REAL), Bound(7.0, 7.0, INT))
    cfg = DeConfig(population=4, generations=1, bounds=bounds, seed=3)
    result = optimize(lambda v: -sum(v), cfg)
    assert result.best_params == (2.0, 7.0)


def test_sphere_optimum_found():
    target = np.array([1.5, -2.0, 0.5])

    def objective(v):
        return -float(np.sum((np.asarray(v) - target) ** 2))

    result = optimize(objective, sphere_cfg(seed=11))
    assert np.linalg.norm(np.asarray(result.best_params) - target) < 0.1
    assert result.best_fitness == pytest.approx(0.0, abs=0.01)


def test_history_monotone_non_decreasing():
    def objective(v):
        return -float(np.sum(np.square(v)))

    result = optimize(objective, sphere_cfg(seed=5, generations=20))
    assert len(result.history) == 21
    assert all(a <= b + 1e-15 for a, b in zip(result.history, result.history[1:]))


def test_results_respect_bounds_and_integer_dims():
    bounds = (Bound(10, 20, INT), Bound(0.25, 0.75, REAL))
    cfg = DeConfig(population=8, generations=15, bounds=bounds, seed=9)
    seen = []

    def objective(v):
        seen.append(v)
        return float(v[0]) * v[1]

    result = optimize(objective, cfg)
    for v in seen + [result.best_params]:
        assert 10 <= v[0] <= 20 and v[0] == int(v[0])
        assert 0.25 <= v[1] <= 0.75


def test_injected_default_never_worse():
    bounds = (Bound(-10, 10, REAL),)
    cfg = DeConfig(population=6, generations=4, bounds=bounds, seed=2)

    def objective(v):
        return -abs(v[0] - 3.0)

    x0 = (3.0,)
    result = optimize(objective, cfg, x0=x0)
    assert result.best_fitness >= objective(x0)


def test_same_seed_identical_trajectory():
    def objective(v):
        return -float(np.sum(np.square(v)))

    a = optimize(objective, sphere_cfg(seed=4, generations=10))
    b = optimize(objective, sphere_cfg(seed=4, generations=10))
    assert a.best_params == b.best_params
    assert a.history == b.history


def test_parallel_evaluation_same_trajectory():
    def objective(v):
        return -float(np.sum(np.square(v)))

    seq = optimize(objective, sphere_cfg(seed=8, generations=8), jobs=1)
    par = optimize(objective, sphere_cfg(seed=8, generations=8), jobs=4)
    assert seq.best_params == par.best_params
    assert seq.history == par.history


def test_non_finite_fitness_rejected_and_counted():
    bounds = (Bound(0.0, 1.0, REAL),)
    cfg = DeConfig(population=4, generations=3, bounds=bounds, seed=1)
    calls = {"n": 0}

    def objective(v):
        calls["n"] += 1
        if calls["n"] % 3 == 0:
            return math.nan
        return v[0]

    result = optimize(objective, cfg)
    assert result.rejected_non_finite > 0
    assert math.isfinite(result.best_fitness)
    assert result.evaluations == 4 + 4 * 3


def test_x0_dimension_mismatch():
    cfg = DeConfig(population=4, generations=1, bounds=(Bound(0, 1),), seed=0)
    with pytest.raises(ValueError):
        optimize(lambda v: 0.0, cfg, x0=(0.1, 0.2))


def test_tuning_log_written(tmp_path):
    cfg = DeConfig(population=4, generations=2, bounds=(Bound(0, 1),), seed=0)
    log = tmp_path / "tune.log"
    optimize(lambda v: v[0], cfg, log_path=log)
    lines = log.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3  # one per generation plus the initial population
    assert lines[0].startswith("generation 0 best")
