"""Hyperparameter search with differential evolution (DE/rand/1/bin).

The general-purpose minimizer lives in :func:`differential_evolution`;
:func:`tune_hyperparams` wires it to held-out perplexity over (alpha, beta).
Selection is synchronous: every trial in a generation is built from the
incoming population, then replacements are applied at once, so a parallel
evaluation schedule gives the same result as the sequential one.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .corpus import Corpus, split_holdout
from .errors import InvalidBoundsError
from .lda import LdaConfig, fit, perplexity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeConfig:
    population: int = 20
    cr: float = 0.5
    f: float = 0.8
    generations: int = 10
    bounds: tuple = ((0.005, 2.0), (0.005, 2.0))
    seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be >= 4 (rand/1 needs 3 donors + target)")
        if not (0.0 <= self.cr <= 1.0):
            raise ValueError("cr must be in [0, 1]")
        if not (0.0 < self.f <= 2.0):
            raise ValueError("f must be in (0, 2]")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if len(self.bounds) == 0:
            raise InvalidBoundsError("bounds must have at least one dimension")
        for lo, hi in self.bounds:
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
                raise InvalidBoundsError(f"invalid bound ({lo}, {hi}): need finite lo < hi")


@dataclass
class DeResult:
    best_params: np.ndarray
    best_objective: float
    # best objective seen at initialization and after each generation
    history: list = field(default_factory=list)
    # every evaluation: (generation, params, objective); generation 0 is the
    # initial population, so there are population * (generations + 1) rows
    evaluations: list = field(default_factory=list)


class TuningResult(NamedTuple):
    alpha: float
    beta: float
    de: DeResult


def differential_evolution(objective: Callable, config: DeConfig) -> DeResult:
    """Minimize ``objective`` over a box with DE/rand/1/bin.

    Mutant = a + F*(b - c) with a, b, c distinct random members different
    from the target; binomial crossover at rate CR with one forced dimension;
    trials are clamped to the bounds; greedy selection keeps the trial when
    it is no worse than the target. Deterministic for a fixed seed.
    """
    lows = np.array([b[0] for b in config.bounds], dtype=np.float64)
    highs = np.array([b[1] for b in config.bounds], dtype=np.float64)
    dim = lows.size
    npop = config.population
    rng = np.random.default_rng(config.seed)

    pop = lows + rng.random((npop, dim)) * (highs - lows)
    fitness = np.empty(npop, dtype=np.float64)
    result = DeResult(best_params=pop[0].copy(), best_objective=np.inf)
    for i in range(npop):
        fitness[i] = objective(pop[i].copy())
        result.evaluations.append((0, pop[i].copy(), float(fitness[i])))
    result.history.append(float(fitness.min()))

    for gen in range(1, config.generations + 1):
        trials = np.empty_like(pop)
        for i in range(npop):
            others = np.delete(np.arange(npop), i)
            a, b, c = rng.choice(others, size=3, replace=False)
            mutant = pop[a] + config.f * (pop[b] - pop[c])
            cross = rng.random(dim) < config.cr
            cross[rng.integers(dim)] = True
            trial = np.where(cross, mutant, pop[i])
            np.clip(trial, lows, highs, out=trial)
            trials[i] = trial
        trial_fitness = np.empty(npop, dtype=np.float64)
        for i in range(npop):
            trial_fitness[i] = objective(trials[i].copy())
            result.evaluations.append((gen, trials[i].copy(), float(trial_fitness[i])))
        # synchronous replacement after the whole generation is evaluated
        accept = trial_fitness <= fitness
        pop[accept] = trials[accept]
        fitness[accept] = trial_fitness[accept]
        result.history.append(float(fitness.min()))
        log.info("generation %d/%d best objective %.6g",
                 gen, config.generations, fitness.min())

    best = int(np.argmin(fitness))
    result.best_params = pop[best].copy()
    result.best_objective = float(fitness[best])
    return result


def tune_hyperparams(
    corpus: Corpus,
    k: int,
    de: DeConfig,
    foldin_iterations: int = 50,
    tuning_iterations: int = 200,
    holdout_frac: float = 0.1,
) -> TuningResult:
    """Search (alpha, beta) minimizing held-out perplexity.

    A single train/holdout split and a single fit seed (both derived from
    ``de.seed``) are reused for every candidate, so objective values are
    comparable across the population (common random numbers). The reduced
    ``tuning_iterations`` Gibbs budget keeps the search affordable; refit
    with the full budget after tuning.
    """
    if len(de.bounds) != 2:
        raise InvalidBoundsError(
            f"tuning searches (alpha, beta); bounds must be 2-dimensional, got {len(de.bounds)}"
        )
    train, hold = split_holdout(corpus, holdout_frac, seed=de.seed)
    log.info("tuning split: %d train / %d holdout documents",
             train.num_documents, hold.num_documents)

    def objective(x: np.ndarray) -> float:
        alpha, beta = float(x[0]), float(x[1])
        cfg = LdaConfig(k=k, alpha=alpha, beta=beta,
                        iterations=tuning_iterations, seed=de.seed)
        model = fit(train, cfg)
        return perplexity(model, hold, foldin_iterations=foldin_iterations)

    result = differential_evolution(objective, de)
    alpha, beta = (float(v) for v in result.best_params)
    log.info("tuned alpha=%.6g beta=%.6g (perplexity %.4f)",
             alpha, beta, result.best_objective)
    return TuningResult(alpha=alpha, beta=beta, de=result)


def write_trace_csv(result: DeResult, path) -> None:
    """Every objective evaluation as CSV: generation, alpha, beta, objective."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "alpha", "beta", "objective"])
        for gen, params, obj in result.evaluations:
            writer.writerow([gen, repr(float(params[0])), repr(float(params[1])), repr(obj)])
