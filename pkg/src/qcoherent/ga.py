"""Binary-coded genetic algorithm over physical controller parameters.

Each genome encodes the SLH parameters of a one-or-more-mode controller,
so every decoded controller is physically realisable by construction. The
search minimises one index (LQG or H-infinity) while keeping the other
inside an interval, using graded penalties for infeasible individuals.
"""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .closedloop import (
    ControllerRealization,
    PlantModel,
    assemble_closed_loop,
    build_controller_from_slh,
)
from .model import SLHParams
from .numerics import NotHurwitzError, spectral_abscissa
from .performance import PerformanceReport, evaluate, hinf_objective, lqg_index

log = logging.getLogger(__name__)


class NoFeasibleError(RuntimeError):
    pass


class Mode(str, enum.Enum):
    PASSIVE = "passive"
    NON_PASSIVE = "non-passive"
    PASSIVE_COUPLING = "passive+coupling"


@dataclass(frozen=True)
class SearchSpace:
    """Controller parameterisation.

    Channel groups are ``(vk1, vk2, y)`` with ``n_u/2``, ``n_vk2/2`` and
    ``n_y/2`` channels. Parameters are real and imaginary parts of the SLH
    entries in a fixed order (see :meth:`names`).
    """

    mode: Mode = Mode.PASSIVE
    n_modes: int = 1
    n_u: int = 2
    n_vk2: int = 2
    n_y: int = 2
    plant_modes: int = 1
    bounds: tuple[float, float] = (-3.0, 3.0)
    bits_per_param: int = 16

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError("bounds need lo < hi")
        if self.bits_per_param < 1 or self.bits_per_param > 52:
            raise ValueError("bits_per_param must be in [1, 52]")

    @property
    def n_channels(self) -> int:
        return (self.n_u + self.n_vk2 + self.n_y) // 2

    def names(self) -> list[str]:
        N, W = self.n_modes, self.n_channels
        out = []
        for i in range(N):
            out.append(f"Omega-[{i},{i}]")
            for j in range(i + 1, N):
                out += [f"Omega-[{i},{j}].re", f"Omega-[{i},{j}].im"]
        for r in range(W):
            for c in range(N):
                out += [f"C-[{r},{c}].re", f"C-[{r},{c}].im"]
        if self.mode is Mode.NON_PASSIVE:
            for i in range(N):
                for j in range(i, N):
                    out += [f"Omega+[{i},{j}].re", f"Omega+[{i},{j}].im"]
            for r in range(W):
                for c in range(N):
                    out += [f"C+[{r},{c}].re", f"C+[{r},{c}].im"]
        if self.mode is Mode.PASSIVE_COUPLING:
            for r in range(N):
                for c in range(self.plant_modes):
                    out += [f"K-[{r},{c}].re", f"K-[{r},{c}].im"]
        return out

    @property
    def n_params(self) -> int:
        return len(self.names())

    @property
    def genome_length(self) -> int:
        return self.n_params * self.bits_per_param

    def values_to_slh(self, x: np.ndarray) -> SLHParams:
        """Assemble controller SLH parameters from a real parameter vector."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {x.shape}")
        N, W = self.n_modes, self.n_channels
        it = iter(x)
        Om = np.zeros((N, N), dtype=complex)
        for i in range(N):
            Om[i, i] = next(it)
            for j in range(i + 1, N):
                Om[i, j] = next(it) + 1j * next(it)
                Om[j, i] = np.conj(Om[i, j])
        Cm = np.array([[next(it) + 1j * next(it) for _ in range(N)] for _ in range(W)])
        Op = np.zeros((N, N), dtype=complex)
        Cp = np.zeros((W, N), dtype=complex)
        Km = Kp = None
        if self.mode is Mode.NON_PASSIVE:
            for i in range(N):
                for j in range(i, N):
                    Op[i, j] = Op[j, i] = next(it) + 1j * next(it)
            Cp = np.array([[next(it) + 1j * next(it) for _ in range(N)] for _ in range(W)])
        if self.mode is Mode.PASSIVE_COUPLING:
            Km = np.array([[next(it) + 1j * next(it) for _ in range(self.plant_modes)] for _ in range(N)])
            Kp = np.zeros_like(Km)
        return SLHParams(S=np.eye(W), C_minus=Cm, C_plus=Cp, Omega_minus=Om, Omega_plus=Op,
                         K_minus=Km, K_plus=Kp)


@dataclass(frozen=True)
class Constraint:
    """Keep ``index`` (``"lqg"`` or ``"hinf"``) inside ``[lo, hi]``."""

    index: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.index not in ("lqg", "hinf"):
            raise ValueError("constraint index must be 'lqg' or 'hinf'")
        if not self.lo <= self.hi:
            raise ValueError("constraint interval needs lo <= hi")


def fix_lqg(lo: float, hi: float) -> Constraint:
    return Constraint("lqg", lo, hi)


def fix_hinf(lo: float, hi: float) -> Constraint:
    return Constraint("hinf", lo, hi)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    generations: int = 200
    crossover_prob: float = 0.8
    mutation_prob: float | None = None  # None -> 1 / genome length
    rng_seed: int = 0
    objective: str = "lqg"
    constraint: Constraint | None = None
    penalty: float = 1e6
    hinf_tol: float = 1e-9

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError("population_size must be even and >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0 <= self.crossover_prob <= 1:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if self.mutation_prob is not None and not 0 <= self.mutation_prob <= 1:
            raise ValueError("mutation_prob must lie in [0, 1]")
        if self.objective not in ("lqg", "hinf"):
            raise ValueError("objective must be 'lqg' or 'hinf'")
        if self.constraint is not None and self.constraint.index == self.objective:
            raise ValueError("the constrained index must differ from the objective")
        if not self.penalty > 0:
            raise ValueError("penalty must be positive")


def _bit_weights(b: int) -> np.ndarray:
    return 2.0 ** np.arange(b - 1, -1, -1)


def decode_values(bits: np.ndarray, s: SearchSpace) -> np.ndarray:
    """Real parameter values of one genome (1-D) or a population (2-D)."""
    bits = np.asarray(bits)
    if bits.shape[-1] != s.genome_length:
        raise ValueError(f"genome length {bits.shape[-1]} != {s.genome_length}")
    b = s.bits_per_param
    ints = bits.reshape(*bits.shape[:-1], s.n_params, b).astype(float) @ _bit_weights(b)
    lo, hi = s.bounds
    return lo + ints / (2.0**b - 1) * (hi - lo)


def decode(bits: np.ndarray, s: SearchSpace) -> SLHParams:
    return s.values_to_slh(decode_values(bits, s))


def controller_of(slh: SLHParams, s: SearchSpace) -> tuple[ControllerRealization, tuple | None]:
    k = build_controller_from_slh(slh, n_u=s.n_u, n_vk2=s.n_vk2, n_y=s.n_y)
    coupling = None
    if s.mode is Mode.PASSIVE_COUPLING:
        coupling = (slh.K_minus, slh.K_plus)
    return k, coupling


def _interval_distance(x: float, lo: float, hi: float) -> float:
    return max(lo - x, 0.0, x - hi)


def fitness(bits: np.ndarray, plant: PlantModel, s: SearchSpace, cfg: GAConfig) -> float:
    """Fitness of one genome; lower is better.

    Unstable loops score ``penalty + spectral abscissa``; loops violating the
    interval constraint score ``penalty / 2 + distance to the interval``.
    """
    try:
        k, coupling = controller_of(decode(bits, s), s)
        cl = assemble_closed_loop(plant, k, coupling)
        alpha = spectral_abscissa(cl.M)
        if not alpha < -1e-12:
            return cfg.penalty + alpha
        compute = {"lqg": lambda: lqg_index(cl), "hinf": lambda: hinf_objective(cl, cfg.hinf_tol)}
        if cfg.constraint is not None:
            c = cfg.constraint
            val = compute[c.index]()
            d = _interval_distance(val, c.lo, c.hi)
            if d > 0:
                return cfg.penalty / 2 + d
        return compute[cfg.objective]()
    except (NotHurwitzError, np.linalg.LinAlgError, FloatingPointError):
        return cfg.penalty


def select(pop: np.ndarray, fit: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Binary tournament selection, one winner per population slot."""
    P = pop.shape[0]
    a = rng.integers(0, P, size=P)
    b = rng.integers(0, P, size=P)
    winners = np.where(fit[a] <= fit[b], a, b)
    return pop[winners].copy()


def crossover(pop: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Single-point crossover of consecutive pairs, each pair with probability ``prob``."""
    out = pop.copy()
    P, L = out.shape
    do = rng.random(P // 2) < prob
    points = rng.integers(1, L, size=P // 2) if L > 1 else np.zeros(P // 2, dtype=int)
    for i in np.flatnonzero(do):
        c = points[i]
        a, b = 2 * i, 2 * i + 1
        tail = out[a, c:].copy()
        out[a, c:] = out[b, c:]
        out[b, c:] = tail
    return out


def mutate(pop: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
    flips = rng.random(pop.shape) < prob
    return np.where(flips, 1 - pop, pop).astype(pop.dtype)


def next_generation(pop, fit, cfg: GAConfig, rng: np.random.Generator, mutation_prob: float) -> np.ndarray:
    """Selection, crossover and mutation; slot 0 carries the unchanged elite."""
    elite = pop[int(np.argmin(fit))].copy()
    children = select(pop, fit, rng)
    children = crossover(children, cfg.crossover_prob, rng)
    children = mutate(children, mutation_prob, rng)
    children[0] = elite
    return children


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    slh: SLHParams
    controller: ControllerRealization
    coupling: tuple | None
    report: PerformanceReport
    best_fitness: float
    trace: list[tuple[int, float, float | None, float | None]]
    seed: int
    genome: np.ndarray
    wall_time: float = field(default=0.0, compare=False)

    def trace_csv(self) -> str:
        fmt = lambda x: "" if x is None else f"{x:.9g}"
        lines = ["generation,best_fitness,best_J,best_Hinf"]
        lines += [f"{g},{fmt(f)},{fmt(j)},{fmt(h)}" for g, f, j, h in self.trace]
        return "\n".join(lines) + "\n"


class _Evaluator:
    """Memoised fitness: identical genomes (elites, clones) are scored once."""

    def __init__(self, plant, s, cfg):
        self.plant, self.s, self.cfg = plant, s, cfg
        self.cache: dict[bytes, float] = {}

    def __call__(self, pop: np.ndarray) -> np.ndarray:
        out = np.empty(pop.shape[0])
        for i, g in enumerate(pop):
            key = g.tobytes()
            if key not in self.cache:
                self.cache[key] = fitness(g, self.plant, self.s, self.cfg)
            out[i] = self.cache[key]
        return out


def _report_of(bits, plant, s) -> tuple[SLHParams, ControllerRealization, tuple | None, PerformanceReport]:
    slh = decode(bits, s)
    k, coupling = controller_of(slh, s)
    return slh, k, coupling, evaluate(plant, k, coupling)


def run_ga(plant: PlantModel, s: SearchSpace, cfg: GAConfig, init: np.ndarray | None = None) -> SynthesisResult:
    """Run the GA and return the best individual seen in any generation.

    The evaluation step draws no random numbers, so scoring order (or
    parallel scoring) never changes the RNG stream.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.rng_seed)
    L = s.genome_length
    pm = 1.0 / L if cfg.mutation_prob is None else cfg.mutation_prob
    pop = rng.integers(0, 2, size=(cfg.population_size, L), dtype=np.uint8)
    if init is not None:
        init = np.atleast_2d(np.asarray(init, dtype=np.uint8))
        pop[: init.shape[0]] = init[: cfg.population_size]
    evaluator = _Evaluator(plant, s, cfg)

    trace = []
    best_bits, best_fit = None, np.inf
    any_feasible = False
    for gen in range(cfg.generations + 1):
        if gen > 0:
            pop = next_generation(pop, fit, cfg, rng, pm)
        fit = evaluator(pop)
        i = int(np.argmin(fit))
        any_feasible |= bool(np.any(fit < cfg.penalty / 2))
        if fit[i] < best_fit:
            best_fit, best_bits = float(fit[i]), pop[i].copy()
            j = h = None
            if best_fit < cfg.penalty / 2:
                rep = _report_of(best_bits, plant, s)[3]
                j, h = rep.J_lqg, rep.Hinf
        trace.append((gen, best_fit, j, h))
        if gen % 50 == 0:
            log.debug("generation %d best fitness %.6g", gen, best_fit)

    if not any_feasible:
        raise NoFeasibleError("no individual satisfied stability and the interval constraint")
    slh, k, coupling, report = _report_of(best_bits, plant, s)
    return SynthesisResult(slh=slh, controller=k, coupling=coupling, report=report,
                           best_fitness=best_fit, trace=trace, seed=cfg.rng_seed, genome=best_bits,
                           wall_time=time.perf_counter() - t0)
