"""Differential evolution (DE/rand/1/bin) over bounded parameter vectors.

Maximizes a user-supplied fitness. Integer dimensions are rounded after
mutation and crossover; candidates are clamped to their bounds. The
caller may inject a known-good vector as member 0, which makes
"never worse than the default" hold by greedy selection. All random
draws for a generation happen before any evaluation, so evaluating a
generation's candidates in parallel cannot change the trajectory.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

INT = "int"
REAL = "real"


@dataclass(frozen=True)
class Bound:
    low: float
    high: float
    kind: str = REAL

    def __post_init__(self) -> None:
        if self.low > self.high:
            raise ValueError(f"bound low {self.low} exceeds high {self.high}")
        if self.kind not in (INT, REAL):
            raise ValueError(f"unknown bound kind {self.kind!r}")


@dataclass(frozen=True)
class DeConfig:
    population: int = 20
    generations: int = 10
    mutation_factor: float = 0.8
    crossover_rate: float = 0.9
    bounds: tuple[Bound, ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 4:
            raise ValueError("population must be >= 4 for rand/1 mutation")
        if not 0.0 < self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in (0, 1]")
        if not 0.0 < self.mutation_factor <= 2.0:
            raise ValueError("mutation_factor must lie in (0, 2]")
        if not self.bounds:
            raise ValueError("bounds must be non-empty")


@dataclass(frozen=True)
class TuneResult:
    best_params: tuple[float, ...]
    best_fitness: float
    history: tuple[float, ...]
    evaluations: int
    rejected_non_finite: int


def _clamp_round(vec: np.ndarray, bounds: Sequence[Bound]) -> np.ndarray:
    out = vec.copy()
    for d, b in enumerate(bounds):
        v = min(b.high, max(b.low, out[d]))
        if b.kind == INT:
            v = float(round(v))
            v = min(b.high, max(b.low, v))
        out[d] = v
    return out


def optimize(
    objective: Callable[[tuple[float, ...]], float],
    cfg: DeConfig,
    x0: Sequence[float] | None = None,
    jobs: int = 1,
    log_path: str | Path | None = None,
) -> TuneResult:
    """Classic DE/rand/1/bin maximization; deterministic for a given seed.

    ``x0`` replaces member 0 of the initial population (after clamping and
    integer rounding). Non-finite fitness values are treated as -inf, so
    such candidates can never be selected; their count is reported.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    bounds = cfg.bounds
    dim = len(bounds)
    lows = np.array([b.low for b in bounds])
    highs = np.array([b.high for b in bounds])
    pop = lows + rng.random((cfg.population, dim)) * (highs - lows)
    pop = np.array([_clamp_round(v, bounds) for v in pop])
    if x0 is not None:
        if len(x0) != dim:
            raise ValueError(f"x0 has {len(x0)} dims, bounds have {dim}")
        pop[0] = _clamp_round(np.asarray(x0, dtype=np.float64), bounds)

    rejected = 0

    def evaluate(candidates: list[np.ndarray]) -> list[float]:
        nonlocal rejected
        vectors = [tuple(float(x) for x in v) for v in candidates]
        if jobs > 1 and len(vectors) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                raw = list(pool.map(objective, vectors))
        else:
            raw = [objective(v) for v in vectors]
        out = []
        for v, f in zip(candidates, raw):
            if not math.isfinite(f):
                rejected += 1
                logger.warning("non-finite fitness for candidate %s; rejected", tuple(v))
                f = -math.inf
            out.append(f)
        return out

    def as_params(vec: np.ndarray) -> tuple[float, ...]:
        return tuple(float(x) for x in vec)

    fitness = evaluate(list(pop))
    evaluations = cfg.population
    best_idx = int(np.argmax(fitness))
    best_vec = pop[best_idx].copy()
    best_fit = fitness[best_idx]
    history = [best_fit]

    log_lines = [f"generation 0 best {best_fit!r} params {as_params(best_vec)}"]
    for gen in range(1, cfg.generations + 1):
        # draw all randomness up front so parallel evaluation stays
        # order-independent
        trials = []
        for i in range(cfg.population):
            choices = [j for j in range(cfg.population) if j != i]
            a, b, c = rng.choice(len(choices), size=3, replace=False)
            va, vb, vc = (pop[choices[a]], pop[choices[b]], pop[choices[c]])
            mutant = va + cfg.mutation_factor * (vb - vc)
            cross = rng.random(dim) < cfg.crossover_rate
            cross[rng.integers(dim)] = True
            trial = np.where(cross, mutant, pop[i])
            trials.append(_clamp_round(trial, bounds))
        trial_fitness = evaluate(trials)
        evaluations += cfg.population
        for i in range(cfg.population):
            if trial_fitness[i] >= fitness[i]:
                pop[i] = trials[i]
                fitness[i] = trial_fitness[i]
                if trial_fitness[i] > best_fit:
                    best_fit = trial_fitness[i]
                    best_vec = trials[i].copy()
        history.append(best_fit)
        log_lines.append(f"generation {gen} best {best_fit!r} params {as_params(best_vec)}")

    if log_path is not None:
        Path(log_path).write_text("\n".join(log_lines) + "\n", encoding="utf-8")

    return TuneResult(
        best_params=as_params(best_vec),
        best_fitness=float(best_fit),
        history=tuple(float(f) for f in history),
        evaluations=evaluations,
        rejected_non_finite=rejected,
    )
