from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcoherent.closedloop import controller_pr_residual
from qcoherent.ga import (
    GAConfig,
    Mode,
    NoFeasibleError,
    SearchSpace,
    controller_of,
    crossover,
    decode,
    decode_values,
    fitness,
    fix_hinf,
    fix_lqg,
    mutate,
    next_generation,
    run_ga,
    select,
)
from qcoherent.model import PassivityClass, classify
from qcoherent.registry import cavity, dpa


@pytest.mark.parametrize("mode,n", [("passive", 7), ("non-passive", 15), ("passive+coupling", 9)])
def test_parameter_counts(mode, n):
    s = SearchSpace(mode=mode)
    assert s.n_params == n == len(set(s.names()))
    assert s.genome_length == 16 * n


def test_decode_extremes():
    s = SearchSpace(bits_per_param=8)
    assert np.all(decode_values(np.zeros(s.genome_length, dtype=np.uint8), s) == -3.0)
    assert np.all(decode_values(np.ones(s.genome_length, dtype=np.uint8), s) == 3.0)
    with pytest.raises(ValueError):
        decode_values(np.zeros(s.genome_length + 1, dtype=np.uint8), s)


def test_decode_formula():
    s = SearchSpace(bits_per_param=4, bounds=(0.0, 15.0))
    bits = np.tile([1, 0, 1, 1], s.n_params).astype(np.uint8)  # 0b1011 = 11
    assert np.allclose(decode_values(bits, s), 11.0)


@given(st.integers(0, 2**31 - 1), st.sampled_from(list(Mode)))
def test_decoded_controllers_are_realizable(seed, mode):
    s = SearchSpace(mode=mode)
    bits = np.random.default_rng(seed).integers(0, 2, s.genome_length, dtype=np.uint8)
    slh = decode(bits, s)
    k, coupling = controller_of(slh, s)
    assert max(controller_pr_residual(k)) < 1e-9
    passive = classify(slh) is PassivityClass.PASSIVE
    assert passive == (mode is not Mode.NON_PASSIVE)
    assert (coupling is not None) == (mode is Mode.PASSIVE_COUPLING)


def test_fitness_penalises_instability():
    # unstable plant drift; this genome does not stabilise it
    p = replace(dpa(), A=np.eye(2))
    s = SearchSpace()
    cfg = GAConfig()
    bits = np.zeros(s.genome_length, dtype=np.uint8)
    assert fitness(bits, p, s, cfg) >= cfg.penalty


def test_fitness_constraint_branch():
    s = SearchSpace()
    bits = np.random.default_rng(0).integers(0, 2, s.genome_length, dtype=np.uint8)
    free = fitness(bits, cavity(), s, GAConfig(objective="hinf"))
    assert free < 1e3
    cfg = GAConfig(objective="hinf", constraint=fix_lqg(0.0, 0.5))
    f = fitness(bits, cavity(), s, cfg)
    assert cfg.penalty / 2 < f < cfg.penalty


def test_config_validation():
    with pytest.raises(ValueError):
        GAConfig(population_size=3)
    with pytest.raises(ValueError):
        GAConfig(objective="lqg", constraint=fix_lqg(1, 2))
    with pytest.raises(ValueError):
        fix_hinf(0, 1).__class__("bogus", 0, 1)


def test_operators_preserve_shape_and_elite(rng):
    pop = rng.integers(0, 2, (10, 32), dtype=np.uint8)
    fit = rng.random(10)
    assert select(pop, fit, rng).shape == pop.shape
    assert crossover(pop, 1.0, rng).shape == pop.shape
    assert np.array_equal(mutate(pop, 0.0, rng), pop)
    assert np.array_equal(mutate(pop, 1.0, rng), 1 - pop)
    nxt = next_generation(pop, fit, GAConfig(population_size=10), rng, 0.5)
    assert np.array_equal(nxt[0], pop[np.argmin(fit)])


def test_crossover_conserves_bits(rng):
    pop = rng.integers(0, 2, (8, 20), dtype=np.uint8)
    out = crossover(pop, 1.0, rng)
    # each pair swaps tails, so column sums within a pair are unchanged
    for i in range(0, 8, 2):
        assert np.array_equal(out[i] + out[i + 1], pop[i] + pop[i + 1])


def test_run_is_deterministic_and_monotone():
    cfg = GAConfig(population_size=10, generations=8, rng_seed=3)
    a = run_ga(cavity(), SearchSpace(), cfg)
    b = run_ga(cavity(), SearchSpace(), cfg)
    assert a.trace_csv() == b.trace_csv()
    best = [f for _, f, _, _ in a.trace]
    assert all(x >= y for x, y in zip(best, best[1:]))
    assert a.report.J_lqg == pytest.approx(a.best_fitness)


def test_impossible_constraint_raises():
    # J can never drop below 1, so [0, 0.5] is infeasible
    cfg = GAConfig(population_size=6, generations=2, objective="hinf", constraint=fix_lqg(0.0, 0.5))
    with pytest.raises(NoFeasibleError):
        run_ga(cavity(), SearchSpace(), cfg)


def test_elite_initialisation_is_kept():
    s = SearchSpace()
    init = np.random.default_rng(1).integers(0, 2, s.genome_length, dtype=np.uint8)
    cfg = GAConfig(population_size=4, generations=0)
    r = run_ga(cavity(), s, cfg, init=init)
    assert r.best_fitness <= fitness(init, cavity(), s, cfg)
